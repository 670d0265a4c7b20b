//! A small Cartesian two-dimensional Fourier grid used as an anisotropic
//! cross-check of the isotropic operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{lagrange_weights, MAX_STENCIL};
use crate::kernel::{AngularKernel, THETA_MAX};
use crate::quadrature::GeometricPanels;

/// Largest grid accepted by [`bobylev_q_2d`].
pub const MAX_2D_POINTS: usize = 64;

/// Geometric θ panels used when the caller has no preference.
pub const DEFAULT_2D_PANELS: usize = 30;

/// Off-grid evaluation scheme on the Cartesian grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Interp2D {
    Bilinear,
    /// Tensor-product interpolating cubic B-spline. The only `C²` scheme here;
    /// piecewise interpolants have derivative jumps at the nodes and spoil the
    /// small-angle cancellation there.
    CubicSpline,
    /// Trigonometric interpolation onto a grid refined by [`UPSAMPLE`], then
    /// a cubic spline on the fine grid. The box is treated as one period, so
    /// the samples must have decayed at its edges.
    #[default]
    Spectral,
    /// Tensor-product Lagrange interpolation of the given order (at most 7).
    Lagrange(usize),
}


/// `f̂` on nodes `η_j = −η_max + j·2η_max/n`, `j = 0..=n`, in both axes.
/// With `n` even the origin is a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2DField {
    pub n: usize,
    pub eta_max: f64,
    /// Row-major, `values[j * (n + 1) + i]` at `(η_i, η_j)`.
    pub values: Vec<Complex64>,
}

impl Grid2DField {
    pub fn new(n: usize, eta_max: f64, values: Vec<Complex64>) -> Result<Self> {
        if n < 8 || n % 2 == 1 {
            return Err(Error::Domain(format!("n must be even and >= 8, got {n}")));
        }
        if n > MAX_2D_POINTS {
            return Err(Error::ResourceGuard(format!(
                "2D oracle limited to n <= {MAX_2D_POINTS}, got {n}"
            )));
        }
        if !(eta_max > 0.0) {
            return Err(Error::Domain("eta_max must be positive".into()));
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                n + 1,
                n + 1
            )));
        }
        Ok(Self { n, eta_max, values })
    }

    /// Samples a radial profile `φ(|η|²)`.
    pub fn from_radial(n: usize, eta_max: f64, phi: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * eta_max / n as f64;
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let a = -eta_max + i as f64 * h;
                let b = -eta_max + j as f64 * h;
                values.push(Complex64::new(phi(a * a + b * b), 0.0));
            }
        }
        Self::new(n, eta_max, values)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.eta_max / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.eta_max + i as f64 * self.spacing()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * (self.n + 1) + i]
    }

    pub fn origin(&self) -> Complex64 {
        self.at(self.n / 2, self.n / 2)
    }

    /// Largest deviation from `value(−η) = conj(value(η))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..=self.n {
            for i in 0..=self.n {
                let d = self.at(i, j) - self.at(self.n - i, self.n - j).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Interpolated value at `(a, b)`; zero outside the square.
    pub fn eval(&self, a: f64, b: f64, scheme: Interp2D) -> Complex64 {
        let h = self.spacing();
        let pa = (a + self.eta_max) / h;
        let pb = (b + self.eta_max) / h;
        let nf = self.n as f64;
        let eps = 1e-12;
        if pa < -eps || pb < -eps || pa > nf + eps || pb > nf + eps {
            return Complex64::new(0.0, 0.0);
        }
        let pa = pa.clamp(0.0, nf);
        let pb = pb.clamp(0.0, nf);
        match scheme {
            Interp2D::Bilinear => {
                let ia = (pa.floor() as usize).min(self.n - 1);
                let ib = (pb.floor() as usize).min(self.n - 1);
                let ta = pa - ia as f64;
                let tb = pb - ib as f64;
                self.at(ia, ib) * ((1.0 - ta) * (1.0 - tb))
                    + self.at(ia + 1, ib) * (ta * (1.0 - tb))
                    + self.at(ia, ib + 1) * ((1.0 - ta) * tb)
                    + self.at(ia + 1, ib + 1) * (ta * tb)
            }
            Interp2D::CubicSpline => CubicSpline2D::new(self).eval(a, b),
            Interp2D::Spectral => CubicSpline2D::spectral(self).eval(a, b),
            Interp2D::Lagrange(order) => {
                let width = (order + 1).min(MAX_STENCIL);
                let (sa, wa) = one_sided_stencil(pa, width, self.n);
                let (sb, wb) = one_sided_stencil(pb, width, self.n);
                let mut acc = Complex64::new(0.0, 0.0);
                for (kb, wbk) in wb.iter().take(width).enumerate() {
                    let row = (sb + kb) * (self.n + 1);
                    let mut r = Complex64::new(0.0, 0.0);
                    for (ka, wak) in wa.iter().take(width).enumerate() {
                        r += self.values[row + sa + ka] * *wak;
                    }
                    acc += r * *wbk;
                }
                acc
            }
        }
    }
}

/// Refinement factor of [`Interp2D::Spectral`].
pub const UPSAMPLE: usize = 8;

/// Zero samples appended on each side before the spline fit.
const SPLINE_PAD: usize = 8;

/// Interpolating cubic B-spline of a [`Grid2DField`], with the samples
/// continued by zeros for [`SPLINE_PAD`] nodes beyond the box.
#[derive(Debug, Clone)]
pub struct CubicSpline2D {
    eta_max: f64,
    h: f64,
    m: usize,
    coeffs: Vec<Complex64>,
}

impl CubicSpline2D {
    pub fn new(f: &Grid2DField) -> Self {
        Self::from_samples(f.n, f.eta_max, &f.values)
    }

    /// Spline through the trigonometric interpolant of `f` sampled `UPSAMPLE`
    /// times more finely.
    pub fn spectral(f: &Grid2DField) -> Self {
        let nf = f.n * UPSAMPLE;
        let period = (f.n + 1) as f64;
        // D[p][i]: periodic Dirichlet kernel for an odd number of samples
        let mut dirichlet = vec![0.0; (nf + 1) * (f.n + 1)];
        for p in 0..=nf {
            for i in 0..=f.n {
                let t = p as f64 / UPSAMPLE as f64 - i as f64;
                let v = if p % UPSAMPLE == 0 {
                    f64::from(p / UPSAMPLE == i)
                } else {
                    (std::f64::consts::PI * t).sin()
                        / (period * (std::f64::consts::PI * t / period).sin())
                };
                dirichlet[p * (f.n + 1) + i] = v;
            }
        }
        let mut half = vec![Complex64::new(0.0, 0.0); (f.n + 1) * (nf + 1)];
        for j in 0..=f.n {
            for p in 0..=nf {
                let w = &dirichlet[p * (f.n + 1)..(p + 1) * (f.n + 1)];
                half[j * (nf + 1) + p] = (0..=f.n).map(|i| f.at(i, j) * w[i]).sum();
            }
        }
        let mut fine = vec![Complex64::new(0.0, 0.0); (nf + 1) * (nf + 1)];
        for q in 0..=nf {
            let w = &dirichlet[q * (f.n + 1)..(q + 1) * (f.n + 1)];
            for p in 0..=nf {
                fine[q * (nf + 1) + p] = (0..=f.n).map(|j| half[j * (nf + 1) + p] * w[j]).sum();
            }
        }
        Self::from_samples(nf, f.eta_max, &fine)
    }

    /// `samples` on the `(n + 1)²` nodes spanning `[−η_max, η_max]²`.
    pub fn from_samples(n: usize, eta_max: f64, samples: &[Complex64]) -> Self {
        let m = n + 1 + 2 * SPLINE_PAD;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m * m];
        for j in 0..=n {
            for i in 0..=n {
                coeffs[(j + SPLINE_PAD) * m + i + SPLINE_PAD] = samples[j * (n + 1) + i];
            }
        }
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for row in 0..m {
            line.copy_from_slice(&coeffs[row * m..(row + 1) * m]);
            bspline_solve(&mut line);
            coeffs[row * m..(row + 1) * m].copy_from_slice(&line);
        }
        for col in 0..m {
            for (r, v) in line.iter_mut().enumerate() {
                *v = coeffs[r * m + col];
            }
            bspline_solve(&mut line);
            for (r, v) in line.iter().enumerate() {
                coeffs[r * m + col] = *v;
            }
        }
        Self { eta_max, h: 2.0 * eta_max / n as f64, m, coeffs }
    }

    pub fn eval(&self, a: f64, b: f64) -> Complex64 {
        let pad = SPLINE_PAD as f64;
        let pa = (a + self.eta_max) / self.h + pad;
        let pb = (b + self.eta_max) / self.h + pad;
        let (ia, ta) = (pa.floor(), pa - pa.floor());
        let (ib, tb) = (pb.floor(), pb - pb.floor());
        if ia < 1.0 || ib < 1.0 || ia + 2.0 > (self.m - 1) as f64 || ib + 2.0 > (self.m - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let (ia, ib) = (ia as usize - 1, ib as usize - 1);
        let wa = bspline_basis(ta);
        let wb = bspline_basis(tb);
        let mut acc = Complex64::new(0.0, 0.0);
        for (kb, wbk) in wb.iter().enumerate() {
            let row = &self.coeffs[(ib + kb) * self.m + ia..(ib + kb) * self.m + ia + 4];
            let r = row[0] * wa[0] + row[1] * wa[1] + row[2] * wa[2] + row[3] * wa[3];
            acc += r * *wbk;
        }
        acc
    }
}

fn bspline_basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let u = 1.0 - t;
    [
        u * u * u / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ]
}

/// Solves `(c_{k−1} + 4c_k + c_{k+1})/6 = v_k` in place, with `c = 0` beyond
/// both ends.
fn bspline_solve(v: &mut [Complex64]) {
    let m = v.len();
    let mut cp = vec![0.0; m];
    let (a, b) = (1.0 / 6.0, 4.0 / 6.0);
    cp[0] = a / b;
    v[0] /= b;
    for k in 1..m {
        let denom = b - a * cp[k - 1];
        cp[k] = a / denom;
        let prev = v[k - 1];
        v[k] = (v[k] - prev * a) / denom;
    }
    for k in (0..m - 1).rev() {
        let next = v[k + 1];
        v[k] -= next * cp[k];
    }
}

fn one_sided_stencil(p: f64, width: usize, n: usize) -> (usize, [f64; MAX_STENCIL]) {
    let centre = if width % 2 == 1 { (p + 0.5).floor() } else { p.floor() };
    let start = (centre as i64 - (width as i64 - 1) / 2).clamp(0, (n + 1 - width) as i64) as usize;
    let mut w = [0.0; MAX_STENCIL];
    lagrange_weights(p - start as f64, width, &mut w);
    (start, w)
}

/// `Q̂(η) = ∫_{S¹} b(cos θ)[f̂(η⁻)f̂(η⁺) − f̂(0)f̂(η)] dσ` at every grid node,
/// `η^± = (η ± |η|σ)/2`, with `θ` the angle between `η` and `σ`.
///
/// `n_panels` geometric panels (8 Gauss nodes each) cover `(0, π/2]`; the
/// `±θ` contributions are paired so that the integrand is `O(θ²)`.
pub fn bobylev_q_2d(
    f: &Grid2DField,
    k: &AngularKernel,
    n_panels: usize,
    scheme: Interp2D,
) -> Result<Grid2DField> {
    if k.d != 2 {
        return Err(Error::Domain(format!("2D oracle needs a d = 2 kernel, got d = {}", k.d)));
    }
    if f.n > MAX_2D_POINTS {
        return Err(Error::ResourceGuard(format!(
            "2D oracle limited to n <= {MAX_2D_POINTS}, got {}",
            f.n
        )));
    }
    if let Interp2D::Lagrange(o) = scheme {
        if !(1..MAX_STENCIL).contains(&o) {
            return Err(Error::Domain(format!("unsupported 2D interpolation order {o}")));
        }
    }
    let panels = GeometricPanels::new(THETA_MAX, 0.5, GeometricPanels::DEFAULT_ORDER);
    let mut thetas = Vec::new();
    let mut tw = Vec::new();
    for j in 0..n_panels {
        panels.push_panel_rule(j, &mut thetas, &mut tw);
    }
    // b(cos θ) dσ over both half-circles equals b̃(θ)/2 dθ for each sign of θ
    let weights: Vec<f64> = thetas
        .iter()
        .zip(&tw)
        .map(|(t, w)| 0.5 * k.reduced_unchecked(*t) * w)
        .collect();
    let trig: Vec<(f64, f64)> = thetas.iter().map(|t| (t.cos(), t.sin())).collect();
    let spline = match scheme {
        Interp2D::CubicSpline => Some(CubicSpline2D::new(f)),
        Interp2D::Spectral => Some(CubicSpline2D::spectral(f)),
        _ => None,
    };
    let at = |a: f64, b: f64| match &spline {
        Some(sp) => sp.eval(a, b),
        None => f.eval(a, b, scheme),
    };
    let f0 = f.origin();
    let mut out = Vec::with_capacity(f.values.len());
    for j in 0..=f.n {
        for i in 0..=f.n {
            let a = f.coord(i);
            let b = f.coord(j);
            let r = (a * a + b * b).sqrt();
            let fe = f.at(i, j);
            if r == 0.0 {
                out.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let (ua, ub) = (a / r, b / r);
            let loss = f0 * fe;
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, &(ct, st)) in weights.iter().zip(&trig) {
                let mut pair = Complex64::new(0.0, 0.0);
                for sign in [1.0, -1.0] {
                    let sa = ua * ct - sign * ub * st;
                    let sb = sign * ua * st + ub * ct;
                    let plus = at(0.5 * (a + r * sa), 0.5 * (b + r * sb));
                    let minus = at(0.5 * (a - r * sa), 0.5 * (b - r * sb));
                    pair += minus * plus - loss;
                }
                acc += pair * *w;
            }
            out.push(acc);
        }
    }
    Grid2DField::new(f.n, f.eta_max, out)
}
