//! Measured smoothing rates and the derivative-growth characterization of
//! the log-Gevrey classes `𝒜^μ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::field::IsoSpectralField;
use crate::quadrature::adaptive_gk;

/// Points with `|φ|` below this are treated as noise in [`fit_beta`].
pub const NOISE_FLOOR: f64 = 1e-13;
pub const MIN_FIT_POINTS: usize = 10;
pub const MAX_DERIVATIVE_ORDER: usize = 30;
/// Allowed share of the last decade `[x_max/10, x_max]` in each `D_n²`.
pub const TAIL_SHARE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFit {
    /// Fitted `βt`.
    pub beta_t: f64,
    pub r_squared: f64,
    pub m_hat: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Default window `[10α, 0.8 x_max]`.
pub fn default_window(phi: &IsoSpectralField, alpha: f64) -> (f64, f64) {
    (10.0 * alpha, 0.8 * phi.grid.x_max)
}

/// Least-squares fit of `−log|φ(x)| = βt (½log(α+x))^{μ+1} − log M` over the
/// window, skipping points below [`NOISE_FLOOR`].
pub fn fit_beta(
    phi: &IsoSpectralField,
    t: f64,
    alpha: f64,
    mu: f64,
    window: Option<(f64, f64)>,
) -> Result<BetaFit> {
    fit_beta_floor(phi, t, alpha, mu, window, NOISE_FLOOR)
}

/// [`fit_beta`] with an explicit floor on `|φ|`.
pub fn fit_beta_floor(
    phi: &IsoSpectralField,
    t: f64,
    alpha: f64,
    mu: f64,
    window: Option<(f64, f64)>,
    floor: f64,
) -> Result<BetaFit> {
    if !(t > 0.0) {
        return domain(format!("smoothing fit needs t > 0, got {t}"));
    }
    if !(alpha >= 0.0 && mu > 0.0) {
        return domain("fit needs alpha >= 0 and mu > 0");
    }
    if !(floor >= 0.0) {
        return domain("noise floor must be nonnegative");
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(phi, alpha));
    if !(lo < hi && hi <= phi.grid.x_max) {
        return domain(format!("fit window [{lo}, {hi}] not inside [0, {}]", phi.grid.x_max));
    }
    let mut zs = Vec::new();
    let mut ys = Vec::new();
    for (i, v) in phi.values.iter().enumerate() {
        let x = phi.grid.x(i);
        if x < lo || x > hi || !(v.abs() > floor) {
            continue;
        }
        zs.push((0.5 * (alpha + x).ln()).powf(mu + 1.0));
        ys.push(-v.abs().ln());
    }
    if zs.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, found: zs.len() });
    }
    let (slope, intercept, r2) = linear_fit(&zs, &ys);
    Ok(BetaFit {
        beta_t: slope,
        r_squared: r2,
        m_hat: (-intercept).exp(),
        window: (lo, hi),
        points: zs.len(),
    })
}

/// `(slope, intercept, R²)` of ordinary least squares.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

/// `D_n = ((2π)^{2n} ∫ x^n φ² ω_d dx)^{1/2}` for `n = 0..=n_max`, the
/// `L²` norm of all `n`-th derivatives of the physical density.
pub fn derivative_norms(phi: &IsoSpectralField, n_max: usize) -> Result<Vec<f64>> {
    if n_max > MAX_DERIVATIVE_ORDER {
        return domain(format!("n_max must be <= {MAX_DERIVATIVE_ORDER}, got {n_max}"));
    }
    let w = phi.grid.plancherel_weights(phi.d);
    let x_max = phi.grid.x_max;
    let mut out = Vec::with_capacity(n_max + 1);
    let log_terms: Vec<(f64, f64)> = phi
        .values
        .iter()
        .enumerate()
        .filter(|(i, v)| w[*i] > 0.0 && **v != 0.0)
        .map(|(i, v)| (phi.grid.x(i).ln(), (w[i] * v * v).ln()))
        .collect();
    let tail_from = (0.1 * x_max).ln();
    for n in 0..=n_max {
        // log-sum-exp: x^n spans hundreds of decades on wide grids
        let nf = n as f64;
        let peak = log_terms
            .iter()
            .map(|(lx, lc)| lc + nf * lx)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut tail = 0.0;
        for (lx, lc) in &log_terms {
            let c = (lc + nf * lx - peak).exp();
            total += c;
            if *lx >= tail_from {
                tail += c;
            }
        }
        if !(tail <= TAIL_SHARE * total) {
            return Err(Error::UnresolvedTail { required_x_max: required_x_max(phi, n) });
        }
        let log_d2 = total.ln() + peak + 2.0 * nf * (2.0 * PI).ln();
        out.push((0.5 * log_d2).exp());
    }
    Ok(out)
}

/// Rough x_max at which the decade tail of order `n` would drop below the threshold,
/// assuming the current tail decays like `φ²` at the grid end.
fn required_x_max(phi: &IsoSpectralField, n: usize) -> f64 {
    let last = phi.values.last().copied().unwrap_or(0.0).abs();
    let mid = phi.eval(0.1 * phi.grid.x_max).unwrap_or(1.0).abs();
    // decay per decade in log, net of the x^{n+d/2} growth
    let rate = 2.0 * (mid / last.max(f64::MIN_POSITIVE)).ln() / 10f64.ln()
        - (n as f64 + phi.d as f64 / 2.0);
    if rate > 0.0 {
        phi.grid.x_max * 10f64.powf((-TAIL_SHARE.log10() / rate).max(1.0))
    } else {
        f64::INFINITY
    }
}

/// `τ^{−1/μ} μ (μ+1)^{−(1+1/μ)}`, the Laplace-method growth constant of `log D_n`.
pub fn growth_constant(tau: f64, mu: f64) -> f64 {
    tau.powf(-1.0 / mu) * mu * (mu + 1.0).powf(-(1.0 + 1.0 / mu))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmuFit {
    pub norms: Vec<f64>,
    /// Fit of `log D_n = n log C + b n^{1+1/μ} + c₀`.
    pub c_hat: f64,
    pub b_hat: f64,
    pub b_pred: f64,
    pub ratio: f64,
    /// Best power `p` in `log D_n = n log C + b n^p + c₀`.
    pub p_hat: f64,
    pub p_expected: f64,
}

/// Least-squares coefficients for the basis `(1, n, n^p)` and the residual sum.
fn power_fit(ns: &[f64], ys: &[f64], p: f64) -> ([f64; 3], f64) {
    let mut a = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&n, &y) in ns.iter().zip(ys) {
        let b = [1.0, n, n.powf(p)];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += b[i] * b[j];
            }
            r[i] += b[i] * y;
        }
    }
    let c = solve3(a, r);
    let res = ns
        .iter()
        .zip(ys)
        .map(|(&n, &y)| (y - c[0] - c[1] * n - c[2] * n.powf(p)).powi(2))
        .sum();
    (c, res)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let piv = (k..3).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Fits the growth of `log D_n` for a state with Fourier decay
/// `e^{−τ(log⟨η⟩)^{μ+1}}` and compares with the predicted constant.
pub fn check_amu_forward(phi: &IsoSpectralField, tau: f64, mu: f64, n_max: usize) -> Result<AmuFit> {
    if !(tau > 0.0 && mu > 0.0) {
        return domain("tau and mu must be positive");
    }
    if n_max < 4 {
        return domain("growth fit needs n_max >= 4");
    }
    let norms = derivative_norms(phi, n_max)?;
    let ns: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
    let ys: Vec<f64> = norms[1..].iter().map(|d| d.ln()).collect();
    let p_expected = 1.0 + 1.0 / mu;
    let (c, _) = power_fit(&ns, &ys, p_expected);

    // golden-section search on the residual over p ∈ (1, 6]
    let (mut a, mut b) = (1.0 + 1e-3, 6.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let res = |p: f64| power_fit(&ns, &ys, p).1;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (res(x1), res(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = res(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = res(x2);
        }
    }
    let b_pred = growth_constant(tau, mu);
    Ok(AmuFit {
        norms,
        c_hat: c[1].exp(),
        b_hat: c[2],
        b_pred,
        ratio: c[2] / b_pred,
        p_hat: 0.5 * (a + b),
        p_expected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceCheck {
    pub n: usize,
    /// `∫₁^∞ t^{2n−1} e^{−2τ(log t)^{μ+1}} dt`, scaled by `e^{−K h(t*)}`.
    pub direct: f64,
    /// `(n/τ)^{1/μ} ∫₀^∞ e^{K(u − u^{μ+1})} du` with the same scaling.
    pub substituted: f64,
    pub identity_rel_err: f64,
    /// `(n/τ)^{1/μ}(t* + ½√(2π/(K|h''(t*)|)))`, the upper bound for `μ ≥ 1`.
    pub bound: Option<f64>,
    /// `(bound − substituted)/bound` for `μ ≥ 1`.
    pub margin: Option<f64>,
    /// `substituted / laplace_approximation`, tends to 1 as `n` grows.
    pub asymptotic_ratio: f64,
}

/// `t* = (μ+1)^{−1/μ}`, maximizer of `h(t) = t − t^{μ+1}`.
pub fn laplace_t_star(mu: f64) -> f64 {
    (mu + 1.0).powf(-1.0 / mu)
}

/// Checks the change of variables behind the derivative-growth bound and,
/// for `μ ≥ 1`, the quadratic upper bound on the exponent. `panels` is the
/// minimum number of breakpoints used by both quadratures.
pub fn check_laplace_integral(tau: f64, mu: f64, n: usize, panels: usize) -> Result<LaplaceCheck> {
    if !(tau > 0.0 && mu > 0.0 && n >= 1 && panels >= 1) {
        return domain("laplace check needs tau, mu > 0, n >= 1 and at least one panel");
    }
    let nf = n as f64;
    let big_k = 2.0 * tau.powf(-1.0 / mu) * nf.powf(1.0 + 1.0 / mu);
    let ts = laplace_t_star(mu);
    let h_star = mu * (mu + 1.0).powf(-(1.0 + 1.0 / mu));
    let h2 = -mu * (mu + 1.0).powf(1.0 / mu);
    let shift = big_k * h_star;
    let scale = (nf / tau).powf(1.0 / mu);

    // u-side: integrand decays once K(h* − h(u)) exceeds ~750
    let h = |u: f64| u - u.powf(mu + 1.0);
    let mut u_end = 2.0 * ts.max(1.0);
    while big_k * (h_star - h(u_end)) < 750.0 {
        u_end *= 1.5;
    }
    let laplace = scale * (2.0 * PI / (big_k * h2.abs())).sqrt();
    let abs_tol = 1e-13 * laplace / panels as f64;
    // at least one breakpoint per peak width so no panel hides the peak
    let width = (big_k * h2.abs()).sqrt().recip();
    let panels = panels.max((u_end / width).ceil().min(1e5) as usize);
    let fu = |u: f64| (big_k * h(u) - shift).exp();
    let mut sub = 0.0;
    for k in 0..panels {
        let a = u_end * k as f64 / panels as f64;
        let b = u_end * (k + 1) as f64 / panels as f64;
        sub += adaptive_gk(fu, a, b, abs_tol / scale, 1e-13)?;
    }
    sub *= scale;

    // t-side in the original variable with geometric breakpoints, or in
    // s = log t once e^s leaves double range
    let s_end = scale * u_end;
    let mut direct = 0.0;
    if s_end < 700.0 {
        let ft = |t: f64| {
            let s = t.ln();
            ((2.0 * nf - 1.0) * s - 2.0 * tau * s.powf(mu + 1.0) - shift).exp()
        };
        for k in 0..panels {
            let a = (s_end * k as f64 / panels as f64).exp();
            let b = (s_end * (k + 1) as f64 / panels as f64).exp();
            direct += adaptive_gk(ft, a, b, abs_tol, 1e-13)?;
        }
    } else {
        let fs = |s: f64| (2.0 * nf * s - 2.0 * tau * s.powf(mu + 1.0) - shift).exp();
        for k in 0..panels {
            let a = s_end * k as f64 / panels as f64;
            let b = s_end * (k + 1) as f64 / panels as f64;
            direct += adaptive_gk(fs, a, b, abs_tol, 1e-13)?;
        }
    }

    let identity_rel_err = (direct - sub).abs() / direct.abs().max(sub.abs());
    let (bound, margin) = if mu >= 1.0 {
        let b = scale * (ts + 0.5 * (2.0 * PI / (big_k * h2.abs())).sqrt());
        (Some(b), Some((b - sub) / b))
    } else {
        (None, None)
    };
    Ok(LaplaceCheck {
        n,
        direct,
        substituted: sub,
        identity_rel_err,
        bound,
        margin,
        asymptotic_ratio: sub / laplace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RadialGrid;
    use crate::kernel::sphere_area;

    fn gamma(x: f64) -> f64 {
        // Lanczos, g = 7
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + 7.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }

    #[test]
    fn fit_recovers_exact_model() {
        let g = RadialGrid::new(1024, 1e8, 4).unwrap();
        for alpha in [1.0, std::f64::consts::E, 50.0] {
            for mu in [0.5, 1.0, 2.0] {
                let tau = 0.3;
                let phi = IsoSpectralField::from_fn(g, 3, |x| {
                    (-tau * (0.5 * (alpha + x).ln()).powf(mu + 1.0)).exp()
                });
                let f = fit_beta(&phi, 1.0, alpha, mu, None).unwrap();
                assert!((f.beta_t - tau).abs() < 1e-10 * tau, "{alpha} {mu} {f:?}");
                assert!((f.r_squared - 1.0).abs() < 1e-12);
                assert!((f.m_hat - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn fit_refuses_t_zero_and_sparse_windows() {
        let g = RadialGrid::quadratic(256, 100.0).unwrap();
        let phi = IsoSpectralField::from_fn(g, 3, |x| (-x).exp());
        assert!(fit_beta(&phi, 0.0, 1.0, 1.0, None).is_err());
        assert!(matches!(
            fit_beta(&phi, 1.0, 1.0, 1.0, Some((35.0, 80.0))),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn derivative_norms_match_gamma_closed_form() {
        let g = RadialGrid::quadratic(4096, 1000.0).unwrap();
        for d in [2usize, 3] {
            let phi = IsoSpectralField::from_fn(g, d, |x| (-x).exp());
            let dn = derivative_norms(&phi, 30).unwrap();
            for (n, v) in dn.iter().enumerate() {
                let nd = n as f64 + d as f64 / 2.0;
                let exact = ((2.0 * PI).powi(2 * n as i32) * 0.5 * sphere_area(d - 1) * gamma(nd)
                    / 2f64.powf(nd))
                .sqrt();
                assert!((v / exact - 1.0).abs() < 1e-10, "d={d} n={n}: {v} vs {exact}");
            }
            assert!((dn[0] - phi.l2_norm()).abs() < 1e-14 * dn[0]);
        }
    }

    #[test]
    fn derivative_norms_flag_unresolved_tail() {
        let g = RadialGrid::quadratic(1024, 400.0).unwrap();
        let phi = IsoSpectralField::from_fn(g, 3, |x| (-x).exp());
        assert!(derivative_norms(&phi, 10).is_ok());
        match derivative_norms(&phi, 30) {
            Err(Error::UnresolvedTail { required_x_max }) => assert!(required_x_max > 100.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_constant_value() {
        assert!((growth_constant(1.0, 1.0) - 0.25).abs() < 1e-15);
        for mu in [0.5, 1.0, 2.0, 3.0] {
            let ts = laplace_t_star(mu);
            let dh = 1.0 - (mu + 1.0) * ts.powf(mu);
            assert!(dh.abs() < 1e-14);
        }
    }

    #[test]
    fn laplace_identity_and_bound() {
        let c = check_laplace_integral(1.0, 1.0, 3, 8).unwrap();
        assert!(c.identity_rel_err < 1e-8, "{c:?}");
        for n in 1..=10 {
            let c = check_laplace_integral(1.0, 2.0, n, 8).unwrap();
            assert!(c.identity_rel_err < 1e-8, "{c:?}");
            assert!(c.margin.unwrap() >= 0.0, "{c:?}");
        }
        let r: Vec<f64> = [2, 8, 32]
            .iter()
            .map(|&n| (check_laplace_integral(1.0, 0.5, n, 8).unwrap().asymptotic_ratio - 1.0).abs())
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    }

    #[test]
    fn amu_growth_power_on_exact_weight_data() {
        let g = RadialGrid::new(1 << 15, 1e18, 8).unwrap();
        for (mu, tau) in [(0.5, 6.0), (1.0, 1.0), (2.0, 1.0)] {
            let phi = IsoSpectralField::from_fn(g, 3, |x| (-tau * (0.5 * x.ln_1p()).powf(mu + 1.0)).exp());
            let f = check_amu_forward(&phi, tau, mu, 30).unwrap();
            println!("{mu} {tau} p={} b={} pred={}", f.p_hat, f.b_hat, f.b_pred);
            assert!((f.p_hat - f.p_expected).abs() <= 0.1, "{f:?}");
        }
    }
}
