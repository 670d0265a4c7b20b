//! The collision operator on isotropic Fourier states.
//!
//! For radial `f`, Bobylev's identity reduces to
//! `Q̂(x) = ∫_0^{π/2} b̃(θ) [φ(x s) φ(x c) − φ(0) φ(x)] dθ` with
//! `s = sin²(θ/2)`, `c = cos²(θ/2)`. The bracket is always evaluated as one
//! expression: gain and loss diverge separately.
//!
//! The θ-integral at grid point `x_i` runs over `J_i` geometric panels. Below
//! the last panel the bracket is replaced by its first-order expansion
//! `x s (φ'(0)φ(x) − φ(0)φ'(x))`, and `J_i` is chosen so that the neglected
//! second-order part stays below the operator tolerance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{IsoSpectralField, RadialGrid, Stencil, MAX_STENCIL};
use crate::kernel::{AngularKernel, MAX_PANELS, THETA_MAX};
use crate::quadrature::GeometricPanels;
use crate::weights::WeightParams;

pub const DEFAULT_OPERATOR_TOL: f64 = 1e-14;

/// Assumed bound on the second-order coefficient of the small-angle expansion;
/// mass-normalised states with moments of order one stay well below it.
const CURVATURE_BOUND: f64 = 100.0;

const MAX_DEPTH: usize = 64;

/// One θ quadrature node attached to a grid point.
#[derive(Debug, Clone, Copy)]
pub struct ThetaNode {
    /// `b̃(θ) · w_θ`.
    pub weight: f64,
    pub theta: f64,
    /// `sin²(θ/2)`.
    pub s: f64,
    /// `cos²(θ/2)`.
    pub c: f64,
    pub stencil_s: Stencil,
    pub stencil_c: Stencil,
}

impl ThetaNode {
    #[inline]
    pub fn interp_s(&self, values: &[f64], width: usize) -> f64 {
        self.stencil_s.apply(values, width)
    }

    #[inline]
    pub fn interp_c(&self, values: &[f64], width: usize) -> f64 {
        self.stencil_c.apply(values, width)
    }
}

/// Precomputed quadrature and interpolation data for `Q̂` on a fixed grid.
#[derive(Debug, Clone)]
pub struct IsoCollisionOperator {
    pub grid: RadialGrid,
    pub kernel: AngularKernel,
    pub width: usize,
    pub tol: f64,
    offsets: Vec<usize>,
    nodes: Vec<ThetaNode>,
    panels_used: Vec<usize>,
    /// `x_i ∫_0^{θ_{J_i}} b̃ sin²(θ/2) dθ`.
    tail: Vec<f64>,
    /// Weights on the first few grid values giving `φ'(0)`.
    slope0: Vec<f64>,
    deriv: Vec<Stencil>,
    dx_dp: Vec<f64>,
}

/// `∫_0^{θ_top} b̃(θ) w(θ) dθ` for a closure weight.
fn small_angle_moment(k: &AngularKernel, w: impl Fn(f64) -> f64, theta_top: f64) -> Result<f64> {
    let panels = GeometricPanels::new(theta_top, 0.5, 8);
    let scale = k.reduced_unchecked(theta_top) * w(theta_top) * theta_top;
    Ok(panels
        .integrate(
            |t| k.reduced_unchecked(t) * w(t),
            (1e-15 * scale).max(f64::MIN_POSITIVE),
            MAX_PANELS,
        )?
        .value)
}

/// Weights `a_j` with `Σ a_j φ(x_j) = p'(0)` for the interpolating polynomial
/// through the first `m` grid points.
pub(crate) fn taylor_weights(xs: &[f64], order: usize) -> Vec<f64> {
    // Coefficient of x^order in the Lagrange basis polynomials.
    let m = xs.len();
    let mut out = vec![0.0; m];
    for j in 0..m {
        // basis_j(x) = Π_{k≠j} (x − x_k)/(x_j − x_k), expanded in powers of x
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k == j {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (p, &a) in poly.iter().enumerate() {
                next[p + 1] += a;
                next[p] -= a * xk;
            }
            poly = next;
            denom *= xs[j] - xk;
        }
        out[j] = poly.get(order).copied().unwrap_or(0.0) / denom;
    }
    out
}

impl IsoCollisionOperator {
    pub fn new(grid: RadialGrid, kernel: AngularKernel, interp_order: usize, tol: f64) -> Result<Self> {
        Self::build(grid, kernel, interp_order, tol, 0)
    }

    /// Like [`new`](Self::new) with `extra` additional panels at every grid point,
    /// used to confirm that the small-angle truncation is converged.
    pub fn with_extra_panels(
        grid: RadialGrid,
        kernel: AngularKernel,
        interp_order: usize,
        tol: f64,
        extra: usize,
    ) -> Result<Self> {
        Self::build(grid, kernel, interp_order, tol, extra)
    }

    pub fn for_field(phi: &IsoSpectralField, kernel: &AngularKernel) -> Result<Self> {
        if kernel.d != phi.d {
            return Err(Error::GridMismatch(format!(
                "kernel dimension {} vs field dimension {}",
                kernel.d, phi.d
            )));
        }
        Self::new(phi.grid, *kernel, phi.interp_order, DEFAULT_OPERATOR_TOL)
    }

    fn build(
        grid: RadialGrid,
        kernel: AngularKernel,
        interp_order: usize,
        tol: f64,
        extra: usize,
    ) -> Result<Self> {
        kernel.validate()?;
        if !(tol > 0.0) {
            return Err(Error::Domain("operator tolerance must be positive".into()));
        }
        let width = interp_order + 1;
        if !(4..=MAX_STENCIL).contains(&width) {
            return Err(Error::Domain(format!("unsupported interp_order {interp_order}")));
        }
        let n = grid.n;
        let panels = GeometricPanels::new(THETA_MAX, 0.5, GeometricPanels::DEFAULT_ORDER);
        let mut t1 = Vec::with_capacity(MAX_DEPTH + 1);
        let mut t2 = Vec::with_capacity(MAX_DEPTH + 1);
        for j in 0..=MAX_DEPTH {
            let top = panels.panel(j).1;
            t1.push(small_angle_moment(&kernel, |t| (0.5 * t).sin().powi(2), top)?);
            t2.push(small_angle_moment(&kernel, |t| (0.5 * t).sin().powi(4), top)?);
        }
        let mut theta_nodes = Vec::new();
        let mut theta_weights = Vec::new();
        for j in 0..MAX_DEPTH {
            panels.push_panel_rule(j, &mut theta_nodes, &mut theta_weights);
        }
        let per_panel = panels.order();
        let inv_q = 1.0 / grid.power as f64;
        let mut offsets = Vec::with_capacity(n + 2);
        let mut nodes = Vec::new();
        let mut panels_used = vec![0; n + 1];
        let mut tail = vec![0.0; n + 1];
        offsets.push(0);
        offsets.push(0);
        for i in 1..=n {
            let x = grid.x(i);
            let mut j_i = 1;
            while j_i < MAX_DEPTH && x * x * CURVATURE_BOUND * t2[j_i] > tol {
                j_i += 1;
            }
            j_i = (j_i + extra).min(MAX_DEPTH);
            panels_used[i] = j_i;
            tail[i] = x * t1[j_i];
            for k in 0..j_i * per_panel {
                let theta = theta_nodes[k];
                let half = 0.5 * theta;
                let s = half.sin().powi(2);
                let c = half.cos().powi(2);
                let (ps, pc) = if grid.power == 2 {
                    (i as f64 * half.sin(), i as f64 * half.cos())
                } else {
                    (i as f64 * s.powf(inv_q), i as f64 * c.powf(inv_q))
                };
                nodes.push(ThetaNode {
                    weight: kernel.reduced_unchecked(theta) * theta_weights[k],
                    theta,
                    s,
                    c,
                    stencil_s: Stencil::at(ps, width, n),
                    stencil_c: Stencil::at(pc, width, n),
                });
            }
            offsets.push(nodes.len());
        }
        let m = (width - 1).max(4);
        let xs: Vec<f64> = (0..m).map(|j| grid.x(j)).collect();
        let slope0 = taylor_weights(&xs, 1);
        let q = grid.power as f64;
        let mut deriv = Vec::with_capacity(n + 1);
        let mut dx_dp = Vec::with_capacity(n + 1);
        for i in 0..=n {
            deriv.push(Stencil::derivative_at(i as f64, width, n));
            let u = i as f64 / n as f64;
            dx_dp.push(grid.x_max * q * u.powi(grid.power as i32 - 1) / n as f64);
        }
        Ok(Self {
            grid,
            kernel,
            width,
            tol,
            offsets,
            nodes,
            panels_used,
            tail,
            slope0,
            deriv,
            dx_dp,
        })
    }

    /// θ nodes used at grid point `i` (empty for `i = 0`).
    pub fn nodes(&self, i: usize) -> &[ThetaNode] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn panels_at(&self, i: usize) -> usize {
        self.panels_used[i]
    }

    pub fn total_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// `φ'(0)` from the first grid values.
    pub fn slope_at_zero(&self, values: &[f64]) -> f64 {
        self.slope0.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    fn slope_at(&self, values: &[f64], i: usize) -> f64 {
        self.deriv[i].apply(values, self.width) / self.dx_dp[i]
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for an operator on {} points",
                v.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// `Q̂_{g,f}(x_i) = ∫ b̃ [g(x s) f(x c) − g(0) f(x)] dθ` at every grid point.
    pub fn apply_bilinear(&self, g: &[f64], f: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(g)?;
        self.check_len(f)?;
        self.check_len(out)?;
        out[0] = 0.0;
        let g0 = g[0];
        let dg0 = self.slope_at_zero(g);
        for i in 1..out.len() {
            let fi = f[i];
            let loss = g0 * fi;
            let acc = if self.width == 8 {
                self.sum_fixed::<8>(i, g, f, loss)
            } else {
                let mut acc = 0.0;
                for nd in self.nodes(i) {
                    let a = nd.stencil_s.apply(g, self.width);
                    let b = nd.stencil_c.apply(f, self.width);
                    acc += nd.weight * (a * b - loss);
                }
                acc
            };
            let first_order = self.tail[i] * (dg0 * fi - g0 * self.slope_at(f, i));
            out[i] = acc + first_order;
        }
        Ok(())
    }

    #[inline]
    fn sum_fixed<const W: usize>(&self, i: usize, g: &[f64], f: &[f64], loss: f64) -> f64 {
        let mut acc = 0.0;
        for nd in self.nodes(i) {
            let a = interp_fixed::<W>(&nd.stencil_s, g);
            let b = interp_fixed::<W>(&nd.stencil_c, f);
            acc += nd.weight * (a * b - loss);
        }
        acc
    }

    /// `Q̂(φ, φ)` into `out`.
    pub fn apply(&self, phi: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply_bilinear(phi, phi, out)
    }

    pub fn eval(&self, phi: &IsoSpectralField) -> Result<IsoSpectralField> {
        self.check_field(phi)?;
        let mut out = vec![0.0; phi.values.len()];
        self.apply(&phi.values, &mut out)?;
        Ok(phi.with_values(out))
    }

    fn check_field(&self, phi: &IsoSpectralField) -> Result<()> {
        if phi.grid != self.grid || phi.d != self.kernel.d || phi.width() != self.width {
            return Err(Error::GridMismatch(
                "field grid, dimension or interpolation order differs from the operator".into(),
            ));
        }
        Ok(())
    }

    /// `−⟨Q(g, f), f⟩ = −∫ Q̂_{g,f}(x) φ_f(x) ω_d(x) dx`.
    pub fn coercivity_functional(&self, g: &IsoSpectralField, f: &IsoSpectralField) -> Result<f64> {
        self.check_field(g)?;
        self.check_field(f)?;
        let mut q = vec![0.0; f.values.len()];
        self.apply_bilinear(&g.values, &f.values, &mut q)?;
        let w = self.grid.plancherel_weights(f.d);
        Ok(-w
            .iter()
            .zip(&q)
            .zip(&f.values)
            .map(|((w, q), f)| w * q * f)
            .sum::<f64>())
    }

    /// `|⟨G_Λ Q(f,f) − Q(f, G_Λ f), G_Λ f⟩|` in radial form:
    /// `|∫ ω G_Λ(x) φ(x) ∫ b̃ φ(xs) φ(xc) [G(x) − G(xc)] dθ dx|`.
    pub fn commutation_error_lhs(&self, f: &IsoSpectralField, p: &WeightParams) -> Result<f64> {
        self.check_field(f)?;
        p.require_cut()?;
        let w = self.grid.plancherel_weights(f.d);
        let v = &f.values;
        let mut total = 0.0;
        for i in 1..v.len() {
            let x = self.grid.x(i);
            if !p.inside_cut(x) {
                continue;
            }
            let gx = p.g(x);
            let mut inner = 0.0;
            for nd in self.nodes(i) {
                let a = nd.interp_s(v, self.width);
                let b = nd.interp_c(v, self.width);
                // G(x) − G(xc) = G(x)(1 − e^{log G(xc) − log G(x)})
                let diff = -gx * (p.log_g(x * nd.c) - p.log_g(x)).exp_m1();
                inner += nd.weight * a * b * diff;
            }
            total += w[i] * gx * v[i] * inner;
        }
        finite(total.abs(), "commutation error")
    }

    /// Right-hand side of the commutation bound on the same nodes:
    /// `βt(μ+1) ∫ ω ∫ b̃ s (log⟨η⟩_α)^μ G(xs)^{(μ+1)/(1+log α)} |φ(xs)| G_Λ(xc)|φ(xc)| G_Λ(x)|φ(x)|`.
    pub fn commutation_error_rhs(&self, f: &IsoSpectralField, p: &WeightParams) -> Result<f64> {
        self.check_field(f)?;
        p.require_cut()?;
        let w = self.grid.plancherel_weights(f.d);
        let v = &f.values;
        let kappa = p.minus_exponent();
        let mut total = 0.0;
        for i in 1..v.len() {
            let x = self.grid.x(i);
            if !p.inside_cut(x) {
                continue;
            }
            let log_factor = (0.5 * (p.alpha + x).ln()).powf(p.mu);
            let mut inner = 0.0;
            for nd in self.nodes(i) {
                let a = nd.interp_s(v, self.width).abs();
                let b = nd.interp_c(v, self.width).abs();
                let gm = (kappa * p.log_g(x * nd.s)).exp();
                let gp = p.g_cut(x * nd.c);
                inner += nd.weight * nd.s * gm * a * gp * b;
            }
            total += w[i] * p.g_cut(x) * v[i].abs() * log_factor * inner;
        }
        finite(p.beta * p.t * (p.mu + 1.0) * total, "commutation bound")
    }

    /// Left-hand side of the trilinear bound:
    /// `∫ ω ∫ b̃ s (log⟨η⟩_α)^μ G_Λ(xc)|φ(xc)| G_Λ(x)|φ(x)| dθ dx`,
    /// including the small-angle remainder below the last panel.
    pub fn trilinear_lhs(&self, f: &IsoSpectralField, p: &WeightParams) -> Result<f64> {
        self.check_field(f)?;
        let w = self.grid.plancherel_weights(f.d);
        let v = &f.values;
        let mut total = 0.0;
        for i in 1..v.len() {
            let x = self.grid.x(i);
            if !p.inside_cut(x) {
                continue;
            }
            let gx = p.g(x);
            let log_factor = (0.5 * (p.alpha + x).ln()).powf(p.mu);
            let mut inner = 0.0;
            for nd in self.nodes(i) {
                let b = nd.interp_c(v, self.width).abs();
                inner += nd.weight * nd.s * p.g_cut(x * nd.c) * b;
            }
            inner += self.tail[i] / x * gx * v[i].abs();
            total += w[i] * gx * v[i].abs() * log_factor * inner;
        }
        finite(total, "trilinear form")
    }

    /// `(‖G_Λ f‖², ‖(log⟨D⟩_α)^{μ/2} G_Λ f‖²)`.
    pub fn weighted_norms(&self, f: &IsoSpectralField, p: &WeightParams) -> Result<(f64, f64)> {
        self.check_field(f)?;
        let w = self.grid.plancherel_weights(f.d);
        let mut plain = 0.0;
        let mut logw = 0.0;
        for (i, v) in f.values.iter().enumerate() {
            let x = self.grid.x(i);
            let g = p.g_cut(x);
            let e = w[i] * (g * v).powi(2);
            plain += e;
            logw += e * (0.5 * (p.alpha + x).ln()).powf(p.mu);
        }
        Ok((finite(plain, "weighted norm")?, finite(logw, "weighted norm")?))
    }
}

#[inline(always)]
fn interp_fixed<const W: usize>(s: &Stencil, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    if s.start >= 0 {
        let base = s.start as usize;
        let vs = &v[base..base + W];
        for k in 0..W {
            acc += s.weights[k] * vs[k];
        }
    } else {
        for k in 0..W {
            let idx = (s.start + k as i32).unsigned_abs() as usize;
            acc += s.weights[k] * v[idx];
        }
    }
    acc
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} overflowed; reduce beta*t or the cutoff")))
    }
}

/// `Q̂(φ, φ)` on the grid of `phi`.
pub fn bobylev_q_iso(phi: &IsoSpectralField, k: &AngularKernel, tol: f64) -> Result<IsoSpectralField> {
    if k.d != phi.d {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {} vs field dimension {}",
            k.d, phi.d
        )));
    }
    IsoCollisionOperator::new(phi.grid, *k, phi.interp_order, tol)?.eval(phi)
}

/// `−⟨Q(g, f), f⟩` in Fourier variables.
pub fn coercivity_functional(
    g: &IsoSpectralField,
    f: &IsoSpectralField,
    k: &AngularKernel,
) -> Result<f64> {
    g.same_grid(f)?;
    IsoCollisionOperator::for_field(f, k)?.coercivity_functional(g, f)
}

pub fn commutation_error_lhs(f: &IsoSpectralField, p: &WeightParams, k: &AngularKernel) -> Result<f64> {
    p.require_cut()?;
    IsoCollisionOperator::for_field(f, k)?.commutation_error_lhs(f, p)
}

pub fn commutation_error_rhs(f: &IsoSpectralField, p: &WeightParams, k: &AngularKernel) -> Result<f64> {
    p.require_cut()?;
    IsoCollisionOperator::for_field(f, k)?.commutation_error_rhs(f, p)
}

/// Node and panel counts of an operator, for diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorStats {
    pub grid_points: usize,
    pub total_nodes: usize,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl IsoCollisionOperator {
    pub fn stats(&self) -> OperatorStats {
        let used = &self.panels_used[1..];
        OperatorStats {
            grid_points: self.grid.len(),
            total_nodes: self.nodes.len(),
            min_panels: used.iter().copied().min().unwrap_or(0),
            max_panels: used.iter().copied().max().unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{kernel_moment, MomentWeight};

    fn kernel() -> AngularKernel {
        AngularKernel::debye_yukawa(3, 1.0, 1.0).unwrap()
    }

    fn field(n: usize, x_max: f64, f: impl Fn(f64) -> f64) -> IsoSpectralField {
        IsoSpectralField::from_fn(RadialGrid::quadratic(n, x_max).unwrap(), 3, f)
    }

    #[test]
    fn taylor_weights_recover_slope() {
        let xs = [0.0, 0.1, 0.25, 0.4, 0.7];
        let w = taylor_weights(&xs, 1);
        let v: f64 = xs.iter().zip(&w).map(|(x, w)| w * (2.0 - 3.0 * x + x * x * x)).sum();
        assert!((v + 3.0).abs() < 1e-12);
    }

    #[test]
    fn maxwellian_is_stationary() {
        let phi = field(512, 100.0, |x| (-x).exp());
        let q = bobylev_q_iso(&phi, &kernel(), 1e-14).unwrap();
        assert_eq!(q.values[0], 0.0);
        assert!(q.sup_norm() < 1e-11, "{}", q.sup_norm());
    }

    #[test]
    fn constant_state_is_stationary() {
        let phi = field(128, 10.0, |_| 1.0);
        let q = bobylev_q_iso(&phi, &kernel(), 1e-14).unwrap();
        assert!(q.sup_norm() < 1e-13);
    }

    #[test]
    fn bkw_state_matches_closed_form() {
        let (a, e0) = (-0.2, 1.0);
        let phi = field(1024, 200.0, |x| (1.0 + a * x) * (-(e0 + a) * x).exp());
        let q = bobylev_q_iso(&phi, &kernel(), 1e-14).unwrap();
        let lambda2 = kernel_moment(&kernel(), MomentWeight::TwoSc, 1e-15).unwrap();
        let mut worst: f64 = 0.0;
        for (i, x) in phi.grid.points().iter().enumerate() {
            let exact = 0.5 * lambda2 * a * a * x * x * (-(e0 + a) * x).exp();
            worst = worst.max((q.values[i] - exact).abs());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = field(64, 10.0, |x| (-x).exp());
        let b = field(128, 10.0, |x| (-x).exp());
        assert!(matches!(
            coercivity_functional(&a, &b, &kernel()),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn commutation_requires_cutoff() {
        let f = field(64, 10.0, |x| (-x).exp());
        let p = WeightParams::new(std::f64::consts::E, 1.0, 1.0, 0.1, None).unwrap();
        assert_eq!(commutation_error_lhs(&f, &p, &kernel()), Err(Error::MissingCutoff));
    }
}
