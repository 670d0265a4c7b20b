//! Time integration of `∂_t φ = Q̂(φ, φ)` on the isotropic grid, initial data
//! families, moment extraction and the closed moment hierarchy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::collision::{taylor_weights, IsoCollisionOperator, DEFAULT_OPERATOR_TOL};
use crate::error::{domain, Error, Result};
use crate::field::{IsoSpectralField, RadialGrid, DEFAULT_INTERP_ORDER};
use crate::kernel::{kernel_integral, AngularKernel};
use crate::quadrature::adaptive_gk;

/// Highest moment order tracked by [`moments`] and the moment hierarchy.
pub const MAX_MOMENT_ORDER: usize = 4;

/// Relative growth of `sup|φ|` over `φ(0)` that counts as an unstable step.
const STABILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// Initial Fourier profiles, all with `φ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `e^{−cx}`.
    Maxwellian { c: f64 },
    /// `(1 + a₀x)e^{−(e₀+a₀)x}`.
    Bkw { a0: f64, e0: f64 },
    /// `(1 + x)^{−p}`.
    Matern { p: f64 },
    /// `w e^{−c₁x} + (1 − w) e^{−c₂x}`.
    TwoTemperature { c1: f64, c2: f64, w: f64 },
}

impl InitialCondition {
    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            InitialCondition::Maxwellian { c } if !(c > 0.0) => {
                domain(format!("maxwellian needs c > 0, got {c}"))
            }
            InitialCondition::Bkw { a0, e0 } if !(e0 > 0.0 && a0 <= 0.0 && e0 + a0 > 0.0) => {
                domain(format!("bkw needs e0 > 0 and -e0 < a0 <= 0, got a0 = {a0}, e0 = {e0}"))
            }
            InitialCondition::Matern { p } if !(p >= d as f64 / 2.0 + 1.0) => {
                domain(format!("matern needs p >= d/2 + 1 = {}, got {p}", d as f64 / 2.0 + 1.0))
            }
            InitialCondition::TwoTemperature { c1, c2, w }
                if !(c1 > 0.0 && c2 > 0.0 && (0.0..=1.0).contains(&w)) =>
            {
                domain("two_temperature needs c1, c2 > 0 and 0 <= w <= 1")
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Maxwellian { c } => (-c * x).exp(),
            InitialCondition::Bkw { a0, e0 } => (1.0 + a0 * x) * (-(e0 + a0) * x).exp(),
            InitialCondition::Matern { p } => (-p * x.ln_1p()).exp(),
            InitialCondition::TwoTemperature { c1, c2, w } => {
                w * (-c1 * x).exp() + (1.0 - w) * (-c2 * x).exp()
            }
        }
    }

    /// `−φ'(0)`.
    pub fn first_moment(&self) -> f64 {
        match *self {
            InitialCondition::Maxwellian { c } => c,
            InitialCondition::Bkw { e0, .. } => e0,
            InitialCondition::Matern { p } => p,
            InitialCondition::TwoTemperature { c1, c2, w } => w * c1 + (1.0 - w) * c2,
        }
    }

    pub fn field(&self, grid: RadialGrid, d: usize, interp_order: usize) -> Result<IsoSpectralField> {
        self.validate(d)?;
        let values = grid.points().into_iter().map(|x| self.eval(x)).collect();
        IsoSpectralField::new(grid, values, d, interp_order)
    }
}

fn default_power() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub x_max: f64,
    /// Grading exponent `q` in `x = x_max·u^q`.
    #[serde(default = "default_power")]
    pub power: u32,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.n, self.x_max, self.power)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 2048, x_max: 400.0, power: 2 }
    }
}

fn default_interp_order() -> usize {
    DEFAULT_INTERP_ORDER
}

fn default_operator_tol() -> f64 {
    DEFAULT_OPERATOR_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub kernel: AngularKernel,
    #[serde(default)]
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    pub ic: InitialCondition,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_interp_order")]
    pub interp_order: usize,
    #[serde(default = "default_operator_tol")]
    pub operator_tol: f64,
}

impl SimConfig {
    pub fn new(kernel: AngularKernel, grid: GridSpec, dt: f64, t_end: f64, ic: InitialCondition) -> Self {
        Self {
            kernel,
            grid,
            dt,
            t_end,
            integrator: Integrator::Rk4,
            ic,
            snapshot_times: vec![0.0, t_end],
            interp_order: DEFAULT_INTERP_ORDER,
            operator_tol: DEFAULT_OPERATOR_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.ic.validate(self.kernel.d)?;
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.dt < self.t_end) {
            return domain(format!("need 0 < dt < t_end, got dt = {}, t_end = {}", self.dt, self.t_end));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.t_end))
        {
            return domain(format!("snapshot time {t} outside [0, {}]", self.t_end));
        }
        if !(self.operator_tol > 0.0) {
            return domain("operator_tol must be positive");
        }
        self.grid.build().map(|_| ())
    }

    pub fn initial_field(&self) -> Result<IsoSpectralField> {
        self.ic.field(self.grid.build()?, self.kernel.d, self.interp_order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub field: IsoSpectralField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Moments `m₀…m₄` after every step, starting at `t = 0`.
    pub moment_series: Vec<MomentRow>,
    /// Largest `sup|φ| / φ(0)` seen over all steps.
    pub max_bochner_ratio: f64,
    pub steps: usize,
    /// Largest rounding-noise estimate of each moment over the series.
    pub moment_noise: Vec<f64>,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// `max_t |m₀(t) − m₀(0)|` and `max_t |m₁(t) − m₁(0)|`.
    pub fn conservation_residuals(&self) -> (f64, f64) {
        let Some(first) = self.moment_series.first() else {
            return (0.0, 0.0);
        };
        self.moment_series.iter().fold((0.0f64, 0.0f64), |(r0, r1), row| {
            (
                r0.max((row.m[0] - first.m[0]).abs()),
                r1.max((row.m[1] - first.m[1]).abs()),
            )
        })
    }
}

/// Integrates `cfg` with a freshly built operator.
pub fn integrate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let op = IsoCollisionOperator::new(grid, cfg.kernel, cfg.interp_order, cfg.operator_tol)?;
    integrate_with(cfg, &op)
}

/// Integrates `cfg` reusing a prebuilt operator on the same grid.
pub fn integrate_with(cfg: &SimConfig, op: &IsoCollisionOperator) -> Result<Trajectory> {
    cfg.validate()?;
    let mut phi = cfg.initial_field()?;
    if op.grid != phi.grid || op.kernel != cfg.kernel || op.width != phi.width() {
        return Err(Error::GridMismatch("operator does not match the configuration".into()));
    }
    let mut stops: Vec<f64> = cfg.snapshot_times.clone();
    stops.push(cfg.t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * cfg.t_end);

    let n = phi.values.len();
    let mut stepper = Stepper::new(n, cfg.integrator);
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        moment_series: Vec::new(),
        max_bochner_ratio: phi.bochner_ratio(),
        steps: 0,
        moment_noise: vec![0.0; MAX_MOMENT_ORDER + 1],
    };
    let record = |phi: &IsoSpectralField, t: f64, traj: &mut Trajectory| {
        let m = moments(phi, MAX_MOMENT_ORDER);
        for (a, b) in traj.moment_noise.iter_mut().zip(&m.noise) {
            *a = a.max(*b);
        }
        traj.moment_series.push(MomentRow { t, m: m.values });
    };
    record(&phi, 0.0, &mut traj);

    let mut t = 0.0;
    let mut next_stop = 0;
    let wants_snapshot = |s: f64| {
        cfg.snapshot_times
            .iter()
            .any(|x| (x - s).abs() <= 1e-12 * cfg.t_end)
    };
    while next_stop < stops.len() && stops[next_stop] <= 1e-12 * cfg.t_end {
        if wants_snapshot(stops[next_stop]) {
            traj.snapshots.push(Snapshot { t: 0.0, field: phi.clone() });
        }
        next_stop += 1;
    }
    while next_stop < stops.len() {
        let target = stops[next_stop];
        let mut h = cfg.dt;
        let landing = target - t <= cfg.dt * (1.0 + 1e-9);
        if landing {
            h = target - t;
        }
        let last_valid = t;
        stepper.step(op, &mut phi.values, h)?;
        t = if landing { target } else { t + h };
        traj.steps += 1;

        if phi.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t, last_valid_t: last_valid });
        }
        let ratio = phi.bochner_ratio();
        traj.max_bochner_ratio = traj.max_bochner_ratio.max(ratio);
        if ratio > 1.0 + STABILITY_SLACK {
            return Err(Error::Stability { t, ratio });
        }
        record(&phi, t, &mut traj);
        if landing {
            if wants_snapshot(target) {
                traj.snapshots.push(Snapshot { t, field: phi.clone() });
            }
            next_stop += 1;
        }
    }
    Ok(traj)
}

struct Stepper {
    integrator: Integrator,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Stepper {
    fn new(n: usize, integrator: Integrator) -> Self {
        Self {
            integrator,
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }

    fn step(&mut self, op: &IsoCollisionOperator, y: &mut [f64], h: f64) -> Result<()> {
        match self.integrator {
            Integrator::Euler => {
                op.apply(y, &mut self.k[0])?;
                for (v, k) in y.iter_mut().zip(&self.k[0]) {
                    *v += h * k;
                }
            }
            Integrator::Rk4 => {
                let [k1, k2, k3, k4] = &mut self.k;
                op.apply(y, k1)?;
                for ((t, v), k) in self.tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
                    *t = v + 0.5 * h * k;
                }
                op.apply(&self.tmp, k2)?;
                for ((t, v), k) in self.tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
                    *t = v + 0.5 * h * k;
                }
                op.apply(&self.tmp, k3)?;
                for ((t, v), k) in self.tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
                    *t = v + h * k;
                }
                op.apply(&self.tmp, k4)?;
                for (i, v) in y.iter_mut().enumerate() {
                    *v += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        Ok(())
    }
}

/// Taylor moments `m_k = (−1)^k φ^{(k)}(0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub values: Vec<f64>,
    /// Rounding amplification `ε·k!·Σ|w_j φ_j|` of each estimate.
    pub noise: Vec<f64>,
    /// Some estimate has rounding noise above `1e−6·max(1, |m_k|)`.
    pub ill_conditioned: bool,
}

/// Rounding amplification `ε·span^{−K}` the moment stencil is sized for.
/// Packing the nodes tighter (fine grids near the origin) inflates the noise of
/// the top moment; spreading them wider costs truncation error.
pub const MOMENT_NOISE_TARGET: f64 = 1e-8;

/// Node indices `0 = i_0 < … < i_{m−1}` with `x_{i_j} ≥ j·span/(m − 1)`.
fn moment_stencil(grid: &RadialGrid, m: usize, span: f64) -> Vec<usize> {
    let n = grid.len();
    let mut idx = vec![0];
    let mut i = 0;
    for j in 1..m {
        let target = span * j as f64 / (m - 1) as f64;
        i += 1;
        while i + (m - j) < n && grid.x(i) < target {
            i += 1;
        }
        if i >= n {
            break;
        }
        idx.push(i);
    }
    idx
}

/// Moments from the interpolating polynomial through `K + 3` nodes near the origin.
pub fn moments(phi: &IsoSpectralField, order: usize) -> Moments {
    let order = order.min(MAX_MOMENT_ORDER);
    let m = (order + 3).min(phi.values.len());
    let span = (f64::EPSILON / MOMENT_NOISE_TARGET).powf(1.0 / order.max(1) as f64);
    let idx = moment_stencil(&phi.grid, m, span);
    let xs: Vec<f64> = idx.iter().map(|&i| phi.grid.x(i)).collect();
    let vals: Vec<f64> = idx.iter().map(|&i| phi.values[i]).collect();
    let mut values = Vec::with_capacity(order + 1);
    let mut noise = Vec::with_capacity(order + 1);
    let mut factorial = 1.0;
    for k in 0..=order {
        if k > 0 {
            factorial *= k as f64;
        }
        let w = taylor_weights(&xs, k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff: f64 = w.iter().zip(&vals).map(|(w, v)| w * v).sum();
        let abs: f64 = w.iter().zip(&vals).map(|(w, v)| (w * v).abs()).sum();
        values.push(sign * factorial * coeff);
        noise.push(f64::EPSILON * factorial * abs);
    }
    let ill_conditioned = values
        .iter()
        .zip(&noise)
        .any(|(v, e)| *e > 1e-6 * v.abs().max(1.0));
    Moments { values, noise, ill_conditioned }
}

/// θ-integrated coefficients of the closed moment hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentHierarchy {
    pub order: usize,
    /// `gain[k][j] = C(k, j) ∫ b̃ s^j c^{k−j}` for `1 ≤ j ≤ k − 1`.
    pub gain: Vec<Vec<f64>>,
    /// `∫ b̃ (s^k + c^k − 1)`.
    pub loss: Vec<f64>,
}

impl MomentHierarchy {
    pub fn new(k: &AngularKernel, order: usize, tol: f64) -> Result<Self> {
        if order > MAX_MOMENT_ORDER {
            return domain(format!("moment hierarchy closed only up to order {MAX_MOMENT_ORDER}"));
        }
        let mut gain = vec![vec![0.0; order + 1]; order + 1];
        let mut loss = vec![0.0; order + 1];
        for kk in 2..=order {
            let mut binom = 1.0;
            for j in 1..kk {
                binom = binom * (kk - j + 1) as f64 / j as f64;
                let moment = kernel_integral(
                    k,
                    |t| {
                        let s = (0.5 * t).sin().powi(2);
                        let c = (0.5 * t).cos().powi(2);
                        s.powi(j as i32) * c.powi((kk - j) as i32)
                    },
                    tol,
                )?;
                gain[kk][j] = binom * moment;
            }
            loss[kk] = kernel_integral(
                k,
                |t| {
                    let s = (0.5 * t).sin().powi(2);
                    s.powi(kk as i32) + (kk as f64 * (-s).ln_1p()).exp_m1()
                },
                tol,
            )?;
        }
        Ok(Self { order, gain, loss })
    }

    pub fn rhs(&self, m: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        if self.order >= 1 {
            out[1] = 0.0;
        }
        for k in 2..=self.order {
            let mut acc = self.loss[k] * m[0] * m[k];
            for j in 1..k {
                acc += self.gain[k][j] * m[j] * m[k - j];
            }
            out[k] = acc;
        }
    }
}

/// RK4 solution of the moment hierarchy from `m0` (length `K + 1 ≤ 5`);
/// one row per step including `t = 0`.
pub fn moment_ode_oracle(k: &AngularKernel, m0: &[f64], t_end: f64, dt: f64) -> Result<Vec<MomentRow>> {
    if m0.is_empty() || m0.len() > MAX_MOMENT_ORDER + 1 {
        return domain(format!("need 1..={} initial moments", MAX_MOMENT_ORDER + 1));
    }
    if !(dt > 0.0 && t_end > 0.0) {
        return domain("need dt > 0 and t_end > 0");
    }
    let h = MomentHierarchy::new(k, m0.len() - 1, 1e-15)?;
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let dt = t_end / steps as f64;
    let n = m0.len();
    let mut m = m0.to_vec();
    let mut rows = vec![MomentRow { t: 0.0, m: m.clone() }];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 1..=steps {
        h.rhs(&m, &mut k1);
        for i in 0..n {
            tmp[i] = m[i] + 0.5 * dt * k1[i];
        }
        h.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = m[i] + 0.5 * dt * k2[i];
        }
        h.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = m[i] + dt * k3[i];
        }
        h.rhs(&tmp, &mut k4);
        for i in 0..n {
            m[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: step as f64 * dt,
                last_valid_t: (step - 1) as f64 * dt,
            });
        }
        rows.push(MomentRow { t: step as f64 * dt, m: m.clone() });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalProfile {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// Set when the oscillatory quadrature did not reach its tolerance.
    pub warning: Option<String>,
}

/// `f(r) = (2/r) ∫_0^{ρ_max} φ(ρ²) ρ sin(2πrρ) dρ` for `d = 3`, with
/// `f̂(η) = ∫ f(v) e^{−2πi v·η} dv`; `f(0) = 4π ∫ φ(ρ²) ρ² dρ`.
pub fn reconstruct_physical_radial(phi: &IsoSpectralField, r_grid: &[f64]) -> Result<PhysicalProfile> {
    if phi.d != 3 {
        return domain(format!("physical reconstruction implemented for d = 3 only, got {}", phi.d));
    }
    let rho_max = phi.grid.x_max.sqrt();
    let eval = |rho: f64| phi.eval((rho * rho).min(phi.grid.x_max)).unwrap_or(0.0);
    let mut f = Vec::with_capacity(r_grid.len());
    let mut warning = None;
    for &r in r_grid {
        if r < 0.0 {
            return domain(format!("negative radius {r}"));
        }
        // split at the oscillation scale so each piece is benign for Gauss–Kronrod
        let pieces = ((4.0 * r * rho_max).ceil() as usize).clamp(1, 4000);
        let width = rho_max / pieces as f64;
        let mut acc = 0.0;
        for p in 0..pieces {
            let (a, b) = (p as f64 * width, (p + 1) as f64 * width);
            let res = if r == 0.0 {
                adaptive_gk(|rho| 4.0 * PI * eval(rho) * rho * rho, a, b, 1e-14, 1e-12)
            } else {
                adaptive_gk(
                    |rho| 2.0 * eval(rho) * rho * (2.0 * PI * r * rho).sin() / r,
                    a,
                    b,
                    1e-14,
                    1e-12,
                )
            };
            match res {
                Ok(v) => acc += v,
                Err(Error::Convergence { partial, .. }) => {
                    acc += partial;
                    warning.get_or_insert_with(|| format!("oscillatory quadrature unconverged at r = {r}"));
                }
                Err(e) => return Err(e),
            }
        }
        f.push(acc);
    }
    Ok(PhysicalProfile { r: r_grid.to_vec(), f, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy() -> AngularKernel {
        AngularKernel::debye_yukawa(3, 1.0, 1.0).unwrap()
    }

    #[test]
    fn initial_conditions_are_normalised_and_validated() {
        for ic in [
            InitialCondition::Maxwellian { c: 2.0 },
            InitialCondition::Bkw { a0: -0.2, e0: 1.0 },
            InitialCondition::Matern { p: 4.0 },
            InitialCondition::TwoTemperature { c1: 0.5, c2: 2.0, w: 0.3 },
        ] {
            ic.validate(3).unwrap();
            assert_eq!(ic.eval(0.0), 1.0);
            let h = 1e-6;
            let slope = (ic.eval(h) - ic.eval(0.0)) / h;
            assert!((slope + ic.first_moment()).abs() < 1e-4);
        }
        assert!(InitialCondition::Matern { p: 2.0 }.validate(3).is_err());
        assert!(InitialCondition::Bkw { a0: 0.3, e0: 1.0 }.validate(3).is_err());
    }

    #[test]
    fn moments_of_maxwellian_and_matern() {
        let g = RadialGrid::quadratic(2048, 400.0).unwrap();
        let m = moments(&IsoSpectralField::from_fn(g, 3, |x| (-2.0 * x).exp()), 2);
        assert_eq!(m.values[0], 1.0);
        assert!((m.values[1] - 2.0).abs() < 1e-9);
        assert!((m.values[2] - 4.0).abs() < 1e-6);
        let m = moments(&IsoSpectralField::from_fn(g, 3, |x| (1.0 + x).powf(-4.0)), 2);
        assert!((m.values[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn hierarchy_second_moment_rate_is_lambda2() {
        use crate::kernel::{kernel_moment, MomentWeight};
        let h = MomentHierarchy::new(&dy(), 2, 1e-15).unwrap();
        let l2 = kernel_moment(&dy(), MomentWeight::TwoSc, 1e-15).unwrap();
        assert!((h.gain[2][1] - l2).abs() < 1e-12 * l2);
        assert!((h.loss[2] + l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn maxwellian_moments_are_stationary_in_hierarchy() {
        let c: f64 = 1.5;
        let m0: Vec<f64> = (0..=4).map(|k| c.powi(k)).collect();
        let rows = moment_ode_oracle(&dy(), &m0, 1.0, 0.01).unwrap();
        for (a, b) in rows.last().unwrap().m.iter().zip(&m0) {
            assert!((a - b).abs() < 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn snapshots_hit_requested_times() {
        let mut cfg = SimConfig::new(
            dy(),
            GridSpec { n: 128, x_max: 50.0, power: 2 },
            0.03,
            0.1,
            InitialCondition::Bkw { a0: -0.2, e0: 1.0 },
        );
        cfg.snapshot_times = vec![0.0, 0.05, 0.1];
        let traj = integrate(&cfg).unwrap();
        let ts: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.05, 0.1]);
        assert_eq!(traj.moment_series.last().unwrap().t, 0.1);
    }

    #[test]
    fn config_rejects_bad_times() {
        let mut cfg = SimConfig::new(
            dy(),
            GridSpec::default(),
            0.1,
            1.0,
            InitialCondition::Maxwellian { c: 1.0 },
        );
        cfg.snapshot_times.push(2.0);
        assert!(cfg.validate().is_err());
        cfg.snapshot_times.pop();
        cfg.dt = 2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn maxwellian_reconstructs_gaussian() {
        let c = 1.0;
        let g = RadialGrid::quadratic(1024, 60.0).unwrap();
        let phi = IsoSpectralField::from_fn(g, 3, |x| (-c * x).exp());
        let r: Vec<f64> = (0..12).map(|i| 0.1 * i as f64).collect();
        let prof = reconstruct_physical_radial(&phi, &r).unwrap();
        assert!(prof.warning.is_none());
        let peak = (PI / c).powf(1.5);
        for (r, f) in prof.r.iter().zip(&prof.f) {
            let exact = peak * (-PI * PI * r * r / c).exp();
            assert!((f - exact).abs() < 1e-6 * peak, "r={r} {f} {exact}");
        }
    }
}
