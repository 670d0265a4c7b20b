//! Numerical checks of the smoothing inequalities and the replay of the
//! frequency-ladder induction on computed trajectories.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::collision::IsoCollisionOperator;
use crate::error::{domain, Error, Result};
use crate::field::IsoSpectralField;
use crate::kernel::{
    kernel_moment, momentum_transfer, sphere_area, AngularKernel, KernelFamily, MomentWeight,
    THETA_MAX,
};
use crate::quadrature::{gauss_legendre, GeometricPanels};
use crate::solver::{moments, Trajectory};
use crate::weights::WeightParams;

mod suite;
pub use suite::{random_state, run_suite, SuiteConfig, SuiteCounts, SUITE_CHECKS};

pub const DEFAULT_TOL_REPORT: f64 = 1e-10;

/// One line of a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check_id: String,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol_report: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ReportMetadata {
    pub config_hash: Option<String>,
    /// Seconds since the Unix epoch; excluded from content hashes.
    pub created_unix: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry; `pass ⇔ margin ≥ −tol_report`.
    pub fn push(
        &mut self,
        check_id: impl Into<String>,
        inputs: Value,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tol_report: f64,
    ) -> bool {
        let pass = margin >= -tol_report;
        self.entries.push(CheckEntry {
            check_id: check_id.into(),
            inputs,
            lhs,
            rhs,
            margin,
            tol_report,
            pass,
        });
        pass
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.entries.extend(other.entries);
        self.metadata.notes.extend(other.metadata.notes);
    }
}

/// Running summary of a randomized sweep: the worst case and every violation.
#[derive(Debug, Clone)]
pub struct SweepTally {
    pub check_id: String,
    pub tol_report: f64,
    pub count: usize,
    worst: Option<(f64, f64, f64, Value)>,
    violations: Vec<(f64, f64, f64, Value)>,
}

impl SweepTally {
    pub fn new(check_id: impl Into<String>, tol_report: f64) -> Self {
        Self {
            check_id: check_id.into(),
            tol_report,
            count: 0,
            worst: None,
            violations: Vec::new(),
        }
    }

    pub fn record(&mut self, inputs: impl FnOnce() -> Value, lhs: f64, rhs: f64, margin: f64) {
        self.record_many(1, inputs, lhs, rhs, margin);
    }

    /// Records a batch of `count` samples summarized by a single outcome.
    pub fn record_many(
        &mut self,
        count: usize,
        inputs: impl FnOnce() -> Value,
        lhs: f64,
        rhs: f64,
        margin: f64,
    ) {
        self.count += count;
        let is_worst = self.worst.as_ref().is_none_or(|w| margin < w.2 || margin.is_nan());
        let bad = !(margin >= -self.tol_report);
        if is_worst || bad {
            let v = inputs();
            if bad {
                self.violations.push((lhs, rhs, margin, v.clone()));
            }
            if is_worst {
                self.worst = Some((lhs, rhs, margin, v));
            }
        }
    }

    pub fn violations(&self) -> usize {
        self.violations.len()
    }

    pub fn min_margin(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |w| w.2)
    }

    /// One summary entry plus one entry per violation.
    pub fn into_report(self, report: &mut VerificationReport) {
        let (lhs, rhs, margin, witness) = self
            .worst
            .unwrap_or((0.0, 0.0, f64::INFINITY, Value::Null));
        let summary = json!({
            "samples": self.count,
            "violations": self.violations.len(),
            "worst_case": witness,
        });
        let margin = if self.violations.is_empty() {
            margin
        } else {
            self.violations
                .iter()
                .map(|v| v.2)
                .fold(f64::INFINITY, f64::min)
                .min(margin)
        };
        report.push(self.check_id.clone(), summary, lhs, rhs, margin, self.tol_report);
        for (l, r, m, v) in self.violations {
            report.push(format!("{}/violation", self.check_id), v, l, r, m, self.tol_report);
        }
    }
}

/// Both sides of a scalar inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs }
    }
}

// ---------------------------------------------------------------------------
// L² → L^∞ embedding on unit cubes

/// How the sup-norms enter the embedding constant `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingForm {
    /// `L = max{(d+2)‖∇h‖∞, ‖h‖∞}^{d/(d+2)}`.
    #[default]
    Max,
    /// `L = ((d+2)‖∇h‖∞ + ‖h‖∞)^{d/(d+2)}`, what the one-dimensional step
    /// actually yields. The max form fails for slowly varying `h`, e.g.
    /// `cos(a y₁)` at the origin with `a < 1/(d+2)`.
    Sum,
}

/// Embedding constant `L` for the given sup-norms.
pub fn embedding_constant(d: usize, sup_h: f64, sup_grad: f64, form: EmbeddingForm) -> f64 {
    let q = (d + 2) as f64;
    let base = match form {
        EmbeddingForm::Max => (q * sup_grad).max(sup_h),
        EmbeddingForm::Sum => q * sup_grad + sup_h,
    };
    base.powf(d as f64 / q)
}

const CUBE_NODES: usize = 12;

/// `|h(x)| ≤ L (∫_{Q_x} |h|²)^{1/(d+2)}` with `Q_x` the unit cube cornered at
/// `x` and oriented away from the origin. `sup_h` and `sup_grad` must bound
/// the true sup-norms of `h` and `|∇h|`.
pub fn check_embedding(
    h: impl Fn(&[f64]) -> f64,
    x: &[f64],
    sup_h: f64,
    sup_grad: f64,
    form: EmbeddingForm,
) -> Result<Inequality> {
    let d = x.len();
    if !(1..=3).contains(&d) {
        return domain(format!("embedding check implemented for d = 1, 2, 3, got {d}"));
    }
    if !(sup_h >= 0.0 && sup_grad >= 0.0) {
        return domain("sup-norm bounds must be nonnegative");
    }
    let (z, w) = gauss_legendre(CUBE_NODES);
    let dirs: Vec<f64> = x.iter().map(|&c| if c >= 0.0 { 1.0 } else { -1.0 }).collect();
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    let mut integral = 0.0;
    loop {
        let mut weight = 1.0;
        for k in 0..d {
            let u = 0.5 * (z[idx[k]] + 1.0);
            y[k] = x[k] + dirs[k] * u;
            weight *= 0.5 * w[idx[k]];
        }
        integral += weight * h(&y).powi(2);
        let mut k = 0;
        loop {
            if k == d {
                let lhs = h(x).abs();
                let rhs = embedding_constant(d, sup_h, sup_grad, form)
                    * integral.powf(1.0 / (d + 2) as f64);
                return Ok(Inequality::new(lhs, rhs));
            }
            idx[k] += 1;
            if idx[k] < CUBE_NODES {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Fourier-side proxy for `‖f‖_{L¹₂} = ∫(1 + |v|²) f`: `m₀ + d m₁/(2π²)`,
/// exact for radial densities with `f̂(η) = φ(|η|²)`.
pub fn l1_2_proxy(phi: &IsoSpectralField) -> f64 {
    let m = moments(phi, 1).values;
    m[0] + phi.d as f64 * m[1] / (2.0 * PI * PI)
}

// ---------------------------------------------------------------------------
// Coercivity

/// `inf_x (φ(0) − |φ(x)|)/min(x, 1)` over the grid, the point `x = 1` and the
/// `x → 0` limit `m₁`.
pub fn estimate_cg_tilde(g: &IsoSpectralField) -> Result<f64> {
    let phi0 = g.values[0];
    let mut inf = moments(g, 1).values[1];
    for (i, v) in g.values.iter().enumerate().skip(1) {
        let x = g.grid.x(i);
        inf = inf.min((phi0 - v.abs()) / x.min(1.0));
    }
    if g.grid.x_max >= 1.0 {
        inf = inf.min(phi0 - g.eval(1.0)?.abs());
    }
    if !(inf > 0.0) {
        return Err(Error::DegenerateState(format!(
            "phi(0) - |phi(x)| >= C min(x, 1) fails with C = {inf:e}"
        )));
    }
    Ok(inf)
}

/// Constants of the coercivity lower bound, built along the proof chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityConstants {
    pub mu: f64,
    pub cg_tilde: f64,
    /// Largest panel boundary below which `b̃ ≥ (κ/2)|S^{d−2}|θ^{−1}(log(π/θ))^μ`.
    pub theta0: f64,
    pub big_r: f64,
    /// Constant in `∫b(|η⁻|² ∧ 1) ≥ C (log|η|)^{μ+1}` for `|η| ≥ R`.
    pub c_log: f64,
    /// `C_g = C̃_g C / 2`.
    pub cg: f64,
    /// `∫ b̃ (cos^{−d}(θ/2) − 1)`.
    pub c_i2: f64,
    pub mass: f64,
}

impl CoercivityConstants {
    /// `C_g (log R)^{μ+1} + C ĝ(0)`.
    pub fn l2_coefficient(&self) -> f64 {
        self.cg * self.big_r.ln().powf(self.mu + 1.0) + self.c_i2 * self.mass
    }

    /// Weighted-norm coefficient `C_g/(log(α + e))^{μ+1}`.
    pub fn weighted_coefficient(&self, alpha: f64) -> f64 {
        self.cg / (alpha + E).ln().powf(self.mu + 1.0)
    }
}

fn model_lower(k: &AngularKernel, mu: f64, theta: f64) -> f64 {
    0.5 * k.kappa * k.sphere_factor() / theta * (PI / theta).ln().powf(mu)
}

pub fn coercivity_constants(g: &IsoSpectralField, k: &AngularKernel) -> Result<CoercivityConstants> {
    let mu = match k.family {
        KernelFamily::DebyeYukawa { mu } => mu,
        _ => return domain("coercivity constants need a logarithmic (Debye–Yukawa) kernel"),
    };
    let cg_tilde = estimate_cg_tilde(g)?;
    let panels = GeometricPanels::new(THETA_MAX, 0.5, GeometricPanels::DEFAULT_ORDER);
    // θ₀: first panel boundary from which the model form is dominated all the way down
    let mut theta0 = None;
    for j in 0..60 {
        let top = panels.panel(j).1;
        let dominated = (0..60i32).all(|m| {
            let t = top * 0.5f64.powi(m);
            let (lo, hi) = panels.panel(j + m as usize);
            [t, 0.5 * (lo + hi)]
                .iter()
                .all(|&s| k.reduced_unchecked(s) >= model_lower(k, mu, s))
        });
        if dominated {
            theta0 = Some(top);
            break;
        }
    }
    let theta0 = theta0.ok_or_else(|| {
        Error::Domain("kernel never dominates the logarithmic model form".into())
    })?;
    let big_r = E.sqrt().max(1.0 / theta0 + 1.0);
    // (L + log π)^{μ+1} − (log(π/θ₀))^{μ+1} ≥ c L^{μ+1} for L ≥ log R
    let p = mu + 1.0;
    let sub = (PI / theta0).ln().max(0.0).powf(p);
    let mut frac: f64 = 1.0;
    for i in 0..=400 {
        let l = big_r.ln() + i as f64 * 0.25;
        frac = frac.min(((l + PI.ln()).powf(p) - sub) / l.powf(p));
    }
    if !(frac > 0.0) {
        return domain("coercivity lower chain degenerates for this kernel");
    }
    let c_log = frac * 0.5 * k.kappa * k.sphere_factor() / (4.0 * PI * PI * p);
    let c_i2 = kernel_moment(k, MomentWeight::CancellationI2, 1e-14)?;
    Ok(CoercivityConstants {
        mu,
        cg_tilde,
        theta0,
        big_r,
        c_log,
        cg: 0.5 * cg_tilde * c_log,
        c_i2,
        mass: g.values[0],
    })
}

/// `‖(log⟨D⟩_α)_+^{(μ+1)/2} f‖²`.
pub fn log_weighted_norm(f: &IsoSpectralField, alpha: f64, power: f64) -> f64 {
    let w = f.grid.plancherel_weights(f.d);
    f.values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let lw = (0.5 * (alpha + f.grid.x(i)).ln()).max(0.0);
            w[i] * v * v * lw.powf(power)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityCheck {
    pub inequality: Inequality,
    pub constants: CoercivityConstants,
    pub weighted_norm: f64,
    pub l2_norm_sq: f64,
}

/// `−⟨Q(g,f), f⟩ ≥ C_g/(log(α+e))^{μ+1} ‖(log⟨D⟩_α)^{(μ+1)/2} f‖² − (C_g(log R)^{μ+1} + C ĝ(0))‖f‖²`.
/// The margin is `LHS − RHS`.
pub fn check_coercivity(
    g: &IsoSpectralField,
    f: &IsoSpectralField,
    k: &AngularKernel,
    alpha: f64,
) -> Result<CoercivityCheck> {
    let op = IsoCollisionOperator::for_field(f, k)?;
    check_coercivity_with(&op, g, f, alpha)
}

pub fn check_coercivity_with(
    op: &IsoCollisionOperator,
    g: &IsoSpectralField,
    f: &IsoSpectralField,
    alpha: f64,
) -> Result<CoercivityCheck> {
    if !(alpha >= 0.0) {
        return domain(format!("alpha must be >= 0, got {alpha}"));
    }
    let c = coercivity_constants(g, &op.kernel)?;
    check_coercivity_constants(op, &c, g, f, alpha)
}

/// [`check_coercivity_with`] reusing precomputed constants for `g`.
pub fn check_coercivity_constants(
    op: &IsoCollisionOperator,
    c: &CoercivityConstants,
    g: &IsoSpectralField,
    f: &IsoSpectralField,
    alpha: f64,
) -> Result<CoercivityCheck> {
    let lhs = op.coercivity_functional(g, f)?;
    let weighted = log_weighted_norm(f, alpha, c.mu + 1.0);
    let l2 = f.l2_norm().powi(2);
    let rhs = c.weighted_coefficient(alpha) * weighted - c.l2_coefficient() * l2;
    Ok(CoercivityCheck {
        // lower bound: margin = LHS − RHS
        inequality: Inequality { lhs, rhs, margin: lhs - rhs },
        constants: *c,
        weighted_norm: weighted,
        l2_norm_sq: l2,
    })
}

// ---------------------------------------------------------------------------
// Commutation error and trilinear bound

pub fn check_commutation_inequality(
    f: &IsoSpectralField,
    p: &WeightParams,
    k: &AngularKernel,
) -> Result<Inequality> {
    let op = IsoCollisionOperator::for_field(f, k)?;
    check_commutation_with(&op, f, p)
}

pub fn check_commutation_with(
    op: &IsoCollisionOperator,
    f: &IsoSpectralField,
    p: &WeightParams,
) -> Result<Inequality> {
    let lhs = op.commutation_error_lhs(f, p)?;
    let rhs = op.commutation_error_rhs(f, p)?;
    Ok(Inequality::new(lhs, rhs))
}

/// `½ max{1, 2^{μ−1}} max{2^{d−1−μ}(log 2)^μ, 1 + 2^{d−1}} |S^{d−2}| ∫ sin^dθ b(cos θ) dθ`.
pub fn c_bd_constant(k: &AngularKernel) -> Result<f64> {
    let mu = k
        .mu()
        .ok_or_else(|| Error::Domain("c_bd needs a kernel with a logarithmic exponent".into()))?;
    let d = k.d as f64;
    let first = 1f64.max(2f64.powf(mu - 1.0));
    let second = (2f64.powf(d - 1.0 - mu) * 2f64.ln().powf(mu)).max(1.0 + 2f64.powf(d - 1.0));
    Ok(0.5 * first * second * sphere_area(k.d - 2) * momentum_transfer(k, 1e-14)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrilinearCheck {
    pub inequality: Inequality,
    pub c_bd: f64,
    pub norm: f64,
    pub log_norm: f64,
}

pub fn check_trilinear_bound(
    f: &IsoSpectralField,
    p: &WeightParams,
    k: &AngularKernel,
) -> Result<TrilinearCheck> {
    let op = IsoCollisionOperator::for_field(f, k)?;
    check_trilinear_with(&op, f, p, c_bd_constant(k)?)
}

pub fn check_trilinear_with(
    op: &IsoCollisionOperator,
    f: &IsoSpectralField,
    p: &WeightParams,
    c_bd: f64,
) -> Result<TrilinearCheck> {
    let lhs = op.trilinear_lhs(f, p)?;
    let (norm, log_norm) = op.weighted_norms(f, p)?;
    Ok(TrilinearCheck {
        inequality: Inequality::new(lhs, c_bd * (norm + log_norm)),
        c_bd,
        norm,
        log_norm,
    })
}

// ---------------------------------------------------------------------------
// Induction

/// `β₀(α) = C_{f₀}/(log(e+α))^{μ+1} · log α/(log α + 2T₀(μ+1)c_{b,d}M)`.
pub fn beta0(alpha: f64, m: f64, t0: f64, c_f0: f64, mu: f64, c_bd: f64) -> Result<f64> {
    if !(mu > 0.0 && alpha >= mu.exp() * (1.0 - 4.0 * f64::EPSILON)) {
        return domain(format!("beta0 needs mu > 0 and alpha >= e^mu, got alpha = {alpha}, mu = {mu}"));
    }
    if !(m >= 0.0 && t0 >= 0.0 && c_f0 > 0.0 && c_bd > 0.0) {
        return domain("beta0 needs M, T0 >= 0 and C_f0, c_bd > 0");
    }
    let la = alpha.ln();
    Ok(c_f0 / (E + alpha).ln().powf(mu + 1.0) * la / (la + 2.0 * t0 * (mu + 1.0) * c_bd * m))
}

/// `α* = e^{d/2 + (d+2)μ/2}`.
pub fn alpha_star(d: usize, mu: f64) -> f64 {
    (d as f64 / 2.0 + (d as f64 + 2.0) * mu / 2.0).exp()
}

/// `Λ₀ = 2√d/(√2 − 1)`.
pub fn lambda0(d: usize) -> f64 {
    2.0 * (d as f64).sqrt() / (2f64.sqrt() - 1.0)
}

pub const LADDER_RATIO: f64 = (1.0 + std::f64::consts::SQRT_2) / 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InductionState {
    pub d: usize,
    pub mu: f64,
    pub alpha_star: f64,
    /// `(μ+1)/(1 + log α*)`, equal to `2/(d+2)`.
    pub exponent: f64,
    pub lambda0: f64,
    pub lambda_ladder: Vec<f64>,
    pub big_m: f64,
    pub beta: f64,
    pub beta0: f64,
    /// Largest β passing `Hyp_{Λ₀}(M)`, `None` if every tried β passes.
    pub beta_tilde: Option<f64>,
    pub b1: f64,
    pub b2: f64,
    pub t0: f64,
    pub c_f0: f64,
    pub c_f0_tilde: f64,
    pub a_f0: f64,
    pub c_bd: f64,
    pub k_step2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub lambda: f64,
    /// Largest `G^{2/(d+2)}|φ|` (inflated for sub-grid variation) over `t` and `|ξ| ≤ Λ`.
    pub sup: f64,
    /// `(M − sup)/M`.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InductionReport {
    pub state: InductionState,
    pub ladder: Vec<LadderRow>,
    /// Largest `N` such that every rung up to `N` passes.
    pub n_max: Option<usize>,
    /// Largest `N` with `Λ_N² ≤ x_max`.
    pub grid_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionOptions {
    /// Use this β instead of `min{β₀, β̃}`.
    pub beta_override: Option<f64>,
    /// Snapshots must be spaced at most `T₀ · max_gap` apart.
    pub max_gap: f64,
}

impl Default for InductionOptions {
    fn default() -> Self {
        Self { beta_override: None, max_gap: 0.25 }
    }
}

/// `sup_t sup_{|ξ| ≤ Λ} G(t,ξ)^κ |φ(t,ξ)|`, bounding sub-grid values by
/// `|∇f̂| ≤ 2πB₁` and evaluating `G` at the later snapshot of each interval.
fn hyp_sup(
    snaps: &[(f64, &IsoSpectralField)],
    lambda: f64,
    beta: f64,
    alpha: f64,
    mu: f64,
    kappa: f64,
    b1: f64,
) -> f64 {
    let x_cut = lambda * lambda;
    let mut sup: f64 = 0.0;
    for w in 0..snaps.len() {
        let (t_hi, phi) = (snaps[(w + 1).min(snaps.len() - 1)].0, snaps[w].1);
        let next = snaps[(w + 1).min(snaps.len() - 1)].1;
        let n = phi.values.len();
        for i in 0..n {
            let x = phi.grid.x(i);
            if x > x_cut {
                break;
            }
            let (x_hi, deta) = if i + 1 < n {
                let xn = phi.grid.x(i + 1).min(x_cut);
                (xn, xn.sqrt() - x.sqrt())
            } else {
                (x, 0.0)
            };
            let amp = phi.values[i]
                .abs()
                .max(next.values[i].abs())
                .max(phi.values[(i + 1).min(n - 1)].abs())
                .max(next.values[(i + 1).min(n - 1)].abs())
                + PI * b1 * deta;
            let lg = kappa * beta * t_hi * (0.5 * (alpha + x_hi).ln()).powf(mu + 1.0);
            sup = sup.max(lg.exp() * amp);
        }
    }
    sup
}

/// Replays the induction on `traj` over `[0, T₀]`.
pub fn run_induction(
    traj: &Trajectory,
    k: &AngularKernel,
    t0: f64,
    opts: InductionOptions,
) -> Result<InductionReport> {
    let mu = k
        .mu()
        .ok_or_else(|| Error::Domain("induction needs a logarithmic kernel".into()))?;
    let d = k.d;
    if !(t0 > 0.0) {
        return domain("T0 must be positive");
    }
    let mut snaps: Vec<(f64, &IsoSpectralField)> = traj
        .snapshots
        .iter()
        .filter(|s| s.t <= t0 * (1.0 + 1e-12))
        .map(|s| (s.t, &s.field))
        .collect();
    snaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let covered = snaps.first().is_some_and(|s| s.0 == 0.0)
        && snaps.last().is_some_and(|s| s.0 >= t0 * (1.0 - 1e-12))
        && snaps.windows(2).all(|w| w[1].0 - w[0].0 <= opts.max_gap * t0 * (1.0 + 1e-9));
    if !covered {
        return Err(Error::TrajectoryTooCoarse(format!(
            "need snapshots at t = 0 and t = {t0} with gaps of at most {}",
            opts.max_gap * t0
        )));
    }
    let f0 = snaps[0].1;
    let x_max = f0.grid.x_max;

    let a_star = alpha_star(d, mu);
    let kappa = (mu + 1.0) / (1.0 + a_star.ln());
    let l0 = lambda0(d);
    let mut ladder = Vec::new();
    let mut lam = l0;
    while lam * lam <= x_max {
        ladder.push(lam);
        lam *= LADDER_RATIO;
    }
    if ladder.is_empty() {
        return domain(format!("grid too small: x_max = {x_max} < Λ₀² = {}", l0 * l0));
    }

    let cc = coercivity_constants(f0, k)?;
    let c_f0 = cc.cg;
    let c_f0_tilde = cc.l2_coefficient();
    let a_f0 = c_f0_tilde + c_f0 * a_star.ln() / (2.0 * (E + a_star).ln().powf(mu + 1.0));
    let b1 = l1_2_proxy(f0);
    let b2 = f0.l2_norm() * (t0 * a_f0).exp();
    let k_step2 = (2.0 * PI * (d as f64 + 2.0) * b1 * b2.powf(2.0 / d as f64))
        .powf(d as f64 / (d as f64 + 2.0));
    let big_m = (2.0 * b1 + 1.0).max(k_step2);
    let c_bd = c_bd_constant(k)?;
    let b0 = beta0(a_star, big_m, t0, c_f0, mu, c_bd)?;

    let hyp0 = |beta: f64| hyp_sup(&snaps, l0, beta, a_star, mu, kappa, b1) <= big_m;
    let beta_tilde = if !hyp0(f64::MIN_POSITIVE) {
        Some(0.0)
    } else {
        let mut hi = 1.0;
        while hyp0(hi) && hi < 1e12 {
            hi *= 2.0;
        }
        if hyp0(hi) {
            None
        } else {
            let mut lo = 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if hyp0(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        }
    };
    let beta = opts
        .beta_override
        .unwrap_or_else(|| beta_tilde.map_or(b0, |bt| b0.min(bt)));

    let rows: Vec<LadderRow> = ladder
        .iter()
        .enumerate()
        .map(|(n, &lam)| {
            let sup = hyp_sup(&snaps, lam, beta, a_star, mu, kappa, b1);
            let margin = (big_m - sup) / big_m;
            LadderRow { n, lambda: lam, sup, margin, pass: margin >= 0.0 }
        })
        .collect();
    let n_max = rows.iter().take_while(|r| r.pass).last().map(|r| r.n);
    Ok(InductionReport {
        state: InductionState {
            d,
            mu,
            alpha_star: a_star,
            exponent: kappa,
            lambda0: l0,
            lambda_ladder: ladder.clone(),
            big_m,
            beta,
            beta0: b0,
            beta_tilde,
            b1,
            b2,
            t0,
            c_f0,
            c_f0_tilde,
            a_f0,
            c_bd,
            k_step2,
        },
        grid_limit: ladder.len() - 1,
        ladder: rows,
        n_max,
    })
}
