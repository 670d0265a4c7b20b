//! Radial grids in `x = |η|²` and isotropic Fourier states on them.
//!
//! The grid is uniform in an auxiliary variable `u ∈ [0, 1]` with
//! `x = x_max u^q` for even `q`. An isotropic `φ(x)` is then an even, smooth
//! function of `u`, so off-grid values come from Lagrange interpolation on
//! uniform `u`-nodes with the stencil mirrored across `u = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::sphere_area;

/// Widest interpolation stencil supported (order 7).
pub const MAX_STENCIL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    /// Number of intervals; the grid has `n + 1` points.
    pub n: usize,
    pub x_max: f64,
    /// Grading power `q` in `x = x_max u^q` (even).
    pub power: u32,
}

impl RadialGrid {
    pub fn new(n: usize, x_max: f64, power: u32) -> Result<Self> {
        if n < 8 {
            return domain(format!("grid needs at least 8 intervals, got {n}"));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return domain(format!("x_max must be positive, got {x_max}"));
        }
        if power == 0 || power % 2 == 1 || power > 8 {
            return domain(format!("grading power must be even and <= 8, got {power}"));
        }
        Ok(Self { n, x_max, power })
    }

    /// Quadratic grading, uniform in `|η|`.
    pub fn quadratic(n: usize, x_max: f64) -> Result<Self> {
        Self::new(n, x_max, 2)
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let u = i as f64 / self.n as f64;
        self.x_max * u.powi(self.power as i32)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }

    /// Fractional index `p` with `x = x(p)`.
    #[inline]
    pub fn fractional_index(&self, x: f64) -> f64 {
        self.n as f64 * (x / self.x_max).powf(1.0 / self.power as f64)
    }

    /// `|η|` spacing between points `i` and `i+1`.
    pub fn eta_spacing(&self, i: usize) -> f64 {
        self.x(i + 1).sqrt() - self.x(i).sqrt()
    }

    /// Weights `w_i` with `Σ w_i F(x_i) ≈ ∫_0^{x_max} F(x) ω_d(x) dx` where
    /// `ω_d(x) = (|S^{d−1}|/2) x^{d/2−1}` is the radial Plancherel density.
    pub fn plancherel_weights(&self, d: usize) -> Vec<f64> {
        let q = self.power as f64;
        let df = d as f64;
        let expo = self.power as usize * d / 2;
        let c = 0.5 * sphere_area(d - 1) * q * self.x_max.powf(0.5 * df);
        let h = 1.0 / self.n as f64;
        // integrand in u is u^{qd/2 - 1} F(x_max u^q); even in u iff qd/2 - 1 is even
        let even_at_zero = (expo - 1).is_multiple_of(2);
        let mut w = endpoint_corrected_ones(self.n, !even_at_zero, true);
        for (i, wi) in w.iter_mut().enumerate() {
            let u = i as f64 * h;
            let jac = if i == 0 {
                if expo == 1 { 1.0 } else { 0.0 }
            } else {
                u.powf(0.5 * q * df - 1.0)
            };
            *wi *= c * h * jac;
        }
        w
    }
}

const GREGORY: [f64; 5] = [
    95.0 / 288.0,
    317.0 / 240.0,
    23.0 / 30.0,
    793.0 / 720.0,
    157.0 / 160.0,
];

/// Unit-spacing trapezoid weights on `n + 1` points with optional
/// sixth-order Gregory corrections at either end.
pub(crate) fn endpoint_corrected_ones(n: usize, lo: bool, hi: bool) -> Vec<f64> {
    let mut w = vec![1.0; n + 1];
    if lo {
        w[..5].copy_from_slice(&GREGORY);
    } else {
        w[0] = 0.5;
    }
    if hi {
        for (k, g) in GREGORY.iter().enumerate() {
            w[n - k] = *g;
        }
    } else {
        w[n] = 0.5;
    }
    w
}

/// Lagrange weights for uniform nodes `0, 1, …, width−1` evaluated at `t`.
pub fn lagrange_weights(t: f64, width: usize, w: &mut [f64]) {
    for k in 0..width {
        let mut v = 1.0;
        for j in 0..width {
            if j != k {
                v *= (t - j as f64) / (k as f64 - j as f64);
            }
        }
        w[k] = v;
    }
}

/// Derivative (in node units) of the Lagrange basis at `t`.
pub fn lagrange_derivative_weights(t: f64, width: usize, w: &mut [f64]) {
    for k in 0..width {
        let mut acc = 0.0;
        for m in 0..width {
            if m == k {
                continue;
            }
            let mut v = 1.0 / (k as f64 - m as f64);
            for j in 0..width {
                if j != k && j != m {
                    v *= (t - j as f64) / (k as f64 - j as f64);
                }
            }
            acc += v;
        }
        w[k] = acc;
    }
}

/// An interpolation stencil into a mirrored grid array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub start: i32,
    pub weights: [f64; MAX_STENCIL],
}

impl Stencil {
    /// Stencil of `width` points around fractional index `p`, kept inside `[−width, n]`.
    pub fn at(p: f64, width: usize, n: usize) -> Self {
        let centre = if width % 2 == 1 { (p + 0.5).floor() } else { p.floor() };
        let mut start = centre as i32 - (width as i32 - 1) / 2;
        start = start.min(n as i32 - (width as i32 - 1));
        let mut weights = [0.0; MAX_STENCIL];
        lagrange_weights(p - start as f64, width, &mut weights);
        Self { start, weights }
    }

    /// Derivative stencil (per unit fractional index) at `p`.
    pub fn derivative_at(p: f64, width: usize, n: usize) -> Self {
        let mut s = Self::at(p, width, n);
        lagrange_derivative_weights(p - s.start as f64, width, &mut s.weights);
        s
    }

    #[inline]
    pub fn apply(&self, values: &[f64], width: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..width {
            let idx = (self.start + k as i32).unsigned_abs() as usize;
            acc += self.weights[k] * values[idx];
        }
        acc
    }
}

/// Isotropic Fourier state `φ(x) = f̂(η)`, `x = |η|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoSpectralField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub d: usize,
    pub interp_order: usize,
}

pub const DEFAULT_INTERP_ORDER: usize = 7;

impl IsoSpectralField {
    pub fn new(grid: RadialGrid, values: Vec<f64>, d: usize, interp_order: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if !(3..=MAX_STENCIL - 1).contains(&interp_order) {
            return domain(format!("interp_order must be in 3..=7, got {interp_order}"));
        }
        if d < 1 {
            return domain("dimension must be positive");
        }
        Ok(Self {
            grid,
            values,
            d,
            interp_order,
        })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(grid: RadialGrid, d: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self {
            grid,
            values,
            d,
            interp_order: DEFAULT_INTERP_ORDER,
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn width(&self) -> usize {
        self.interp_order + 1
    }

    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interpolated `φ(x)` for `0 ≤ x ≤ x_max`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.grid.x_max * (1.0 + 1e-14)).contains(&x) {
            return domain(format!("x = {x} outside [0, {}]", self.grid.x_max));
        }
        let p = self.grid.fractional_index(x.min(self.grid.x_max));
        Ok(Stencil::at(p, self.width(), self.grid.n).apply(&self.values, self.width()))
    }

    /// `dφ/dx` at grid point `i ≥ 1`.
    pub fn derivative_at_node(&self, i: usize) -> f64 {
        let s = Stencil::derivative_at(i as f64, self.width(), self.grid.n);
        let dphi_dp = s.apply(&self.values, self.width());
        dphi_dp / self.dx_dp(i)
    }

    /// `dx/dp` at grid point `i`, `p` the fractional index.
    pub fn dx_dp(&self, i: usize) -> f64 {
        let q = self.grid.power as f64;
        let u = i as f64 / self.grid.n as f64;
        self.grid.x_max * q * u.powi(self.grid.power as i32 - 1) / self.grid.n as f64
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.d != other.d {
            return Err(Error::GridMismatch(format!(
                "{:?} (d={}) vs {:?} (d={})",
                self.grid, self.d, other.grid, other.d
            )));
        }
        Ok(())
    }

    /// `∫ φ ψ ω_d dx`, the `L²(R^d)` pairing of the underlying densities.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let w = self.grid.plancherel_weights(self.d);
        Ok(w.iter()
            .zip(&self.values)
            .zip(&other.values)
            .map(|((w, a), b)| w * a * b)
            .sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).expect("same grid").max(0.0).sqrt()
    }

    /// Largest `|φ(x)| / φ(0)`; at most 1 for the transform of a nonnegative density.
    pub fn bochner_ratio(&self) -> f64 {
        self.sup_norm() / self.mass()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_and_inverse() {
        let g = RadialGrid::new(64, 400.0, 2).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(64), 400.0);
        assert!((g.fractional_index(g.x(17)) - 17.0).abs() < 1e-12);
        assert!(RadialGrid::new(64, 400.0, 3).is_err());
    }

    #[test]
    fn gregory_weights_exact_for_quintics() {
        let n = 20;
        for lo in [false, true] {
            let w = endpoint_corrected_ones(n, lo, true);
            for k in 0..=5 {
                // even powers are exact with the trapezoid end when mirrored; odd only with Gregory
                if !lo && k % 2 == 1 {
                    continue;
                }
                let q: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * (i as f64).powi(k))
                    .sum();
                let exact = (n as f64).powi(k + 1) / (k as f64 + 1.0);
                assert!((q - exact).abs() < 1e-9 * exact, "lo={lo} k={k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn plancherel_weights_integrate_gaussians() {
        // ∫_{R^d} e^{-2π|η|²} dη = 2^{-d/2}
        for (d, q) in [(2, 2), (3, 2), (3, 4), (1, 2)] {
            let g = RadialGrid::new(400, 30.0, q).unwrap();
            let w = g.plancherel_weights(d);
            let v: f64 = g
                .points()
                .iter()
                .zip(&w)
                .map(|(x, w)| w * (-2.0 * std::f64::consts::PI * x).exp())
                .sum();
            let exact = 2f64.powf(-(d as f64) / 2.0);
            // sixth-order Gregory ends when the integrand is odd in u, spectral otherwise
            let tol = if (q as usize * d / 2 - 1).is_multiple_of(2) { 1e-13 } else { 5e-9 };
            assert!((v - exact).abs() < tol, "d={d} q={q}: {v} vs {exact}");
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_accurate_between() {
        let g = RadialGrid::new(256, 100.0, 2).unwrap();
        let f = IsoSpectralField::from_fn(g, 3, |x| (-x).exp() * (1.0 + 0.3 * x));
        assert_eq!(f.eval(0.0).unwrap(), f.values[0]);
        assert_eq!(f.eval(g.x(33)).unwrap(), f.values[33]);
        for x in [1e-6, 0.013, 0.7, 3.3, 17.0, 99.9] {
            let e = f.eval(x).unwrap();
            let exact = (-x).exp() * (1.0 + 0.3 * x);
            assert!((e - exact).abs() < 1e-10, "x={x}: {e} vs {exact}");
        }
        assert!(f.eval(100.5).is_err());
    }

    #[test]
    fn node_derivative() {
        let g = RadialGrid::new(512, 50.0, 2).unwrap();
        let f = IsoSpectralField::from_fn(g, 3, |x| (-x).exp());
        for i in [1, 10, 100, 511] {
            let x = g.x(i);
            assert!((f.derivative_at_node(i) + (-x).exp()).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn derivative_weights_match_finite_difference() {
        let mut w = [0.0; 8];
        let mut wp = [0.0; 8];
        let mut wm = [0.0; 8];
        lagrange_derivative_weights(2.3, 8, &mut w);
        lagrange_weights(2.3 + 1e-6, 8, &mut wp);
        lagrange_weights(2.3 - 1e-6, 8, &mut wm);
        for k in 0..8 {
            assert!((w[k] - (wp[k] - wm[k]) / 2e-6).abs() < 1e-6);
        }
    }
}
