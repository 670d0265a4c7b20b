//! Logarithmic Fourier weights.
//!
//! Every function takes `x = |η|²`. The time weight is
//! `G(t, η) = exp(βt (log⟨η⟩_α)^{μ+1})` with `⟨η⟩_α = (α + |η|²)^{1/2}`, and is
//! evaluated through its logarithm since the exponent easily leaves the
//! double range on large grids.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// `⟨η⟩_α = √(α + x)`.
pub fn bracket_alpha(x: f64, alpha: f64) -> f64 {
    (alpha + x).sqrt()
}

/// `h(s) = (log(α + s))^{μ+1}`; increasing and concave for `α ≥ e^μ`.
pub fn h_profile(s: f64, alpha: f64, mu: f64) -> f64 {
    (alpha + s).ln().powf(mu + 1.0)
}

/// `ψ_α(r) = (log √(α + r))^{μ+1}`.
pub fn psi_alpha(r: f64, alpha: f64, mu: f64) -> f64 {
    (0.5 * (alpha + r).ln()).powf(mu + 1.0)
}

fn check_alpha(alpha: f64, mu: f64) -> Result<()> {
    if !(mu > 0.0) {
        return domain(format!("mu must be positive, got {mu}"));
    }
    // relative slack so that alpha = exp(mu) computed by the caller is accepted
    if !(alpha >= mu.exp() * (1.0 - 4.0 * f64::EPSILON)) {
        return domain(format!("alpha = {alpha} below e^mu = {}", mu.exp()));
    }
    Ok(())
}

/// `RHS − LHS` of `h(s₋ + s₊) ≤ ((μ+1)/(1+log α)) h(s₋) + h(s₊)`.
pub fn check_subadditivity(alpha: f64, mu: f64, s_minus: f64, s_plus: f64) -> Result<f64> {
    check_alpha(alpha, mu)?;
    if !(0.0 <= s_minus && s_minus <= s_plus) {
        return domain(format!("need 0 <= s_minus <= s_plus, got {s_minus}, {s_plus}"));
    }
    let factor = (mu + 1.0) / (1.0 + alpha.ln());
    let rhs = factor * h_profile(s_minus, alpha, mu) + h_profile(s_plus, alpha, mu);
    let lhs = h_profile(s_minus + s_plus, alpha, mu);
    Ok(rhs - lhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub t: f64,
    #[serde(default)]
    pub lambda_cut: Option<f64>,
}

impl WeightParams {
    pub fn new(alpha: f64, beta: f64, mu: f64, t: f64, lambda_cut: Option<f64>) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            mu,
            t,
            lambda_cut,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha, self.mu)?;
        if !(self.beta > 0.0) {
            return domain(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.t >= 0.0) {
            return domain(format!("t must be nonnegative, got {}", self.t));
        }
        if let Some(l) = self.lambda_cut {
            if !(l > 0.0) {
                return domain(format!("lambda_cut must be positive, got {l}"));
            }
        }
        Ok(())
    }

    pub fn with_cut(self, lambda: f64) -> Self {
        Self {
            lambda_cut: Some(lambda),
            ..self
        }
    }

    pub fn without_cut(self) -> Self {
        Self {
            lambda_cut: None,
            ..self
        }
    }

    /// `log G(t, η)` ignoring any cutoff.
    #[inline]
    pub fn log_g(&self, x: f64) -> f64 {
        self.beta * self.t * (0.5 * (self.alpha + x).ln()).powf(self.mu + 1.0)
    }

    /// `G(t, η)` ignoring any cutoff.
    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        self.log_g(x).exp()
    }

    /// Whether `|η| ≤ Λ`; always true without a cutoff.
    #[inline]
    pub fn inside_cut(&self, x: f64) -> bool {
        match self.lambda_cut {
            Some(l) => x.sqrt() <= l,
            None => true,
        }
    }

    /// `G_Λ = G · 1_{|η| ≤ Λ}`, or plain `G` when no cutoff is set.
    #[inline]
    pub fn g_cut(&self, x: f64) -> f64 {
        if self.inside_cut(x) {
            self.g(x)
        } else {
            0.0
        }
    }

    /// `log G_Λ`, `−∞` outside the ball.
    pub fn log_g_cut(&self, x: f64) -> f64 {
        if self.inside_cut(x) {
            self.log_g(x)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `(μ+1)/(1 + log α)`, the exponent carried by `G(η⁻)` in the commutation bound.
    pub fn minus_exponent(&self) -> f64 {
        (self.mu + 1.0) / (1.0 + self.alpha.ln())
    }

    /// `log G̃(r)` with `G̃(r) = exp(βt 2^{−μ−1}(log(α + r))^{μ+1})`; equal to `log G` at `x = r`.
    pub fn log_gtilde(&self, r: f64) -> f64 {
        self.beta * self.t * 2f64.powf(-self.mu - 1.0) * (self.alpha + r).ln().powf(self.mu + 1.0)
    }

    pub fn require_cut(&self) -> Result<f64> {
        self.lambda_cut.ok_or(Error::MissingCutoff)
    }
}

/// `G(t, η)` with cutoff applied when `p.lambda_cut` is set.
pub fn g_weight(x: f64, p: &WeightParams) -> f64 {
    p.g_cut(x)
}

/// Outcome of a log-scale inequality check.
///
/// `lhs` and `rhs` are natural logarithms of the two sides (after dividing
/// both by a common positive factor); `margin = (RHS − LHS)/max(RHS, LHS)`
/// lies in `[−1, 1]` and is nonnegative exactly when the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl LogMargin {
    pub fn from_logs(log_lhs: f64, log_rhs: f64) -> Self {
        let margin = if log_lhs == f64::NEG_INFINITY && log_rhs == f64::NEG_INFINITY {
            0.0
        } else if log_rhs >= log_lhs {
            -(log_lhs - log_rhs).exp_m1()
        } else {
            (log_rhs - log_lhs).exp_m1()
        };
        Self {
            lhs: log_lhs,
            rhs: log_rhs,
            margin,
        }
    }
}

/// Checks `|G̃(s) − G̃(s₊)| ≤ 2^{−μ}βt(μ+1)(1 − s₊/s)(log(α+s))^μ G̃(s₋)^{(μ+1)/(1+log α)} G̃(s₊)`
/// with `s = s₋ + s₊`. Both sides are divided by `G̃(s₊)` and compared in log form.
pub fn check_gtilde_diff_bound(p: &WeightParams, s_minus: f64, s_plus: f64) -> Result<LogMargin> {
    p.validate()?;
    if !(0.0 <= s_minus && s_minus <= s_plus) {
        return domain(format!("need 0 <= s_minus <= s_plus, got {s_minus}, {s_plus}"));
    }
    let s = s_minus + s_plus;
    if s == 0.0 {
        return domain("s = s_minus + s_plus must be positive");
    }
    let bt = p.beta * p.t;
    // |G̃(s) − G̃(s₊)| / G̃(s₊) = expm1(Δ), Δ ≥ 0
    // without cancellation: A^q − B^q = B^q expm1(q log1p((A − B)/B)) with
    // A − B = log1p(s₋/(α + s₊))
    let q = p.mu + 1.0;
    let b = (p.alpha + s_plus).ln();
    let eps = (s_minus / (p.alpha + s_plus)).ln_1p();
    let delta = bt * 2f64.powf(-q) * b.powf(q) * (q * (eps / b).ln_1p()).exp_m1();
    let log_lhs = if delta <= 0.0 {
        f64::NEG_INFINITY
    } else {
        delta + (-(-delta).exp_m1()).ln()
    };
    let log_rhs = if s_minus == 0.0 || bt == 0.0 {
        f64::NEG_INFINITY
    } else {
        -p.mu * 2f64.ln()
            + bt.ln()
            + (p.mu + 1.0).ln()
            + (s_minus / s).ln()
            + p.mu * (p.alpha + s).ln().ln()
            + p.minus_exponent() * p.log_gtilde(s_minus)
    };
    Ok(LogMargin::from_logs(log_lhs, log_rhs))
}

/// Result of the three `ψ_α` checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport {
    /// `ψ_α` exceeds every level `10^k`, `k = 0..4`, on the sampled ladder.
    pub unbounded: bool,
    /// Smallest sampled `r₀` such that `ψ_α(r) ≤ r` for every sampled `r ≥ r₀`.
    pub r0: f64,
    /// Points where `λ|η| ≥ R` and the scaling inequality was tested.
    pub tested: usize,
    /// Points skipped because `λ|η| < R`.
    pub skipped: usize,
    pub violations: Vec<(f64, f64, f64)>,
    /// Minimum of `ψ_α(λ²x) − λ²ψ_α(x)` over tested points.
    pub min_margin: f64,
}

impl PsiReport {
    pub fn passed(&self) -> bool {
        self.unbounded && self.violations.is_empty()
    }
}

/// Checks (i) `ψ_α → ∞`, (ii) `ψ_α(r) ≤ r` eventually, (iii)
/// `ψ_α(λ²x) ≥ λ²ψ_α(x)` whenever `λ√x ≥ R`, on the given `(λ, x)` points.
pub fn check_psi_properties(
    alpha: f64,
    mu: f64,
    big_r: f64,
    grid: &[(f64, f64)],
) -> Result<PsiReport> {
    check_alpha(alpha, mu)?;
    if !(big_r >= 1.0) {
        return domain(format!("R must be >= 1, got {big_r}"));
    }
    let ladder: Vec<f64> = (0..=600).map(|k| 10f64.powf(k as f64 * 0.5)).collect();
    let top = psi_alpha(ladder[ladder.len() - 1], alpha, mu);
    let unbounded = (0..5).all(|k| top > 10f64.powi(k))
        && ladder
            .windows(2)
            .all(|w| psi_alpha(w[1], alpha, mu) > psi_alpha(w[0], alpha, mu));
    let mut r0 = ladder[ladder.len() - 1];
    for &r in ladder.iter().rev() {
        if psi_alpha(r, alpha, mu) <= r {
            r0 = r;
        } else {
            break;
        }
    }
    let mut tested = 0;
    let mut skipped = 0;
    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    for &(lambda, x) in grid {
        if !(0.0..=1.0).contains(&lambda) || x < 0.0 {
            return domain(format!("need 0 <= lambda <= 1 and x >= 0, got ({lambda}, {x})"));
        }
        if lambda * x.sqrt() < big_r {
            skipped += 1;
            continue;
        }
        tested += 1;
        let lhs = psi_alpha(lambda * lambda * x, alpha, mu);
        let rhs = lambda * lambda * psi_alpha(x, alpha, mu);
        let m = lhs - rhs;
        min_margin = min_margin.min(m);
        if m < -1e-12 * lhs.abs().max(1.0) {
            violations.push((lambda, x, m));
        }
    }
    Ok(PsiReport {
        unbounded,
        r0,
        tested,
        skipped,
        violations,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn bracket_values() {
        assert_eq!(bracket_alpha(0.0, 1.0), 1.0);
        assert_eq!(bracket_alpha(3.0, 1.0), 2.0);
        assert!((bracket_alpha(E * E - E, E) - E).abs() < 1e-15);
    }

    #[test]
    fn h_profile_values() {
        assert!((h_profile(0.0, E, 1.0) - 1.0).abs() < 1e-15);
        for mu in [0.5f64, 1.0, 2.0, 3.0] {
            let h0 = h_profile(0.0, mu.exp(), mu);
            assert!((h0 - mu.powf(mu + 1.0)).abs() < 1e-12 * h0);
        }
    }

    #[test]
    fn subadditivity_trivial_and_explicit_cases() {
        let m = check_subadditivity(E, 1.0, 0.0, 5.0).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        let m = check_subadditivity(E, 1.0, 1.0, 1.0).unwrap();
        let expect = 2.0 * (E + 1.0).ln().powi(2) - (E + 2.0).ln().powi(2);
        assert!((m - expect).abs() < 1e-14);
        assert!(m > 0.0);
        assert!(check_subadditivity(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(check_subadditivity(E, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn weight_values() {
        let p = WeightParams::new(E, 1.0, 1.0, 0.0, None).unwrap();
        assert_eq!(g_weight(123.0, &p), 1.0);
        let p = WeightParams::new(E, 1.0, 1.0, 1.0, None).unwrap();
        assert!((g_weight(E * E - E, &p) - E).abs() < 1e-14);
        let p = p.with_cut(1.0);
        assert_eq!(g_weight(4.0, &p), 0.0);
        assert_eq!(g_weight(0.5, &p), p.g(0.5));
    }

    #[test]
    fn gtilde_is_g() {
        let p = WeightParams::new(10.0, 0.3, 1.5, 2.0, None).unwrap();
        for x in [0.0, 1.0, 1e3, 1e9] {
            assert!((p.log_gtilde(x) - p.log_g(x)).abs() < 1e-12 * p.log_g(x));
        }
    }

    #[test]
    fn gtilde_bound_edge_cases() {
        let p = WeightParams::new(E, 0.5, 1.0, 1.0, None).unwrap();
        let m = check_gtilde_diff_bound(&p, 0.0, 3.0).unwrap();
        assert_eq!(m.lhs, f64::NEG_INFINITY);
        assert_eq!(m.margin, 0.0);
        assert!(check_gtilde_diff_bound(&p, 0.0, 0.0).is_err());
        let m = check_gtilde_diff_bound(&p, 2.0, 2.0).unwrap();
        assert!(m.margin >= 0.0);
    }

    #[test]
    fn gtilde_bound_survives_overflowing_weights() {
        let p = WeightParams::new(2f64.exp(), 5.0, 2.0, 10.0, None).unwrap();
        let m = check_gtilde_diff_bound(&p, 1e11, 1e12).unwrap();
        assert!(m.lhs > 709.0);
        assert!(m.margin >= 0.0);
    }

    #[test]
    fn psi_checks_on_small_grid() {
        let grid: Vec<(f64, f64)> = (1..=50)
            .flat_map(|i| (0..50).map(move |j| (i as f64 / 50.0, 10f64.powf(j as f64 * 0.3))))
            .collect();
        let r = check_psi_properties(E, 1.0, 3.0, &grid).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.tested > 0 && r.skipped > 0);
        assert!(r.r0 <= 10.0);
        let eq = check_psi_properties(E, 1.0, 3.0, &[(1.0, 100.0)]).unwrap();
        assert_eq!(eq.min_margin, 0.0);
    }

    #[test]
    fn log_margin_signs() {
        assert!(LogMargin::from_logs(1.0, 2.0).margin > 0.0);
        assert!(LogMargin::from_logs(2.0, 1.0).margin < 0.0);
        assert_eq!(LogMargin::from_logs(3.0, 3.0).margin, 0.0);
    }
}
