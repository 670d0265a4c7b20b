//! Angular collision kernels and their moment quadratures.
//!
//! Kernels are described through the reduced form
//! `b̃(θ) = |S^{d−2}| sin^{d−2}θ b(cos θ)` on `(0, π/2]`, which is what every
//! θ-integral in the crate actually needs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{GeometricPanels, GradedIntegral};

pub const THETA_MAX: f64 = PI / 2.0;

/// Maximum number of geometric panels added before a θ-quadrature gives up.
pub const MAX_PANELS: usize = 1000;

/// Surface area `|S^n|` of the unit sphere in `R^{n+1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_area(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `b̃(θ) = κ|S^{d−2}| θ^{−1} (log(π/θ))^μ`.
    DebyeYukawa { mu: f64 },
    /// `b̃(θ) = κ|S^{d−2}| θ^{−1−2ν}`.
    PowerLaw { nu: f64 },
    /// `b̃(θ) = κ|S^{d−2}|`, bounded.
    IntegrableCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularKernel {
    pub d: usize,
    pub kappa: f64,
    #[serde(flatten)]
    pub family: KernelFamily,
}

impl AngularKernel {
    pub fn new(d: usize, kappa: f64, family: KernelFamily) -> Result<Self> {
        let k = Self { d, kappa, family };
        k.validate()?;
        Ok(k)
    }

    pub fn debye_yukawa(d: usize, kappa: f64, mu: f64) -> Result<Self> {
        Self::new(d, kappa, KernelFamily::DebyeYukawa { mu })
    }

    pub fn power_law(d: usize, kappa: f64, nu: f64) -> Result<Self> {
        Self::new(d, kappa, KernelFamily::PowerLaw { nu })
    }

    pub fn integrable_cutoff(d: usize, kappa: f64) -> Result<Self> {
        Self::new(d, kappa, KernelFamily::IntegrableCutoff)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return domain(format!("kernel dimension must be >= 2, got {}", self.d));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return domain(format!("kappa must be positive, got {}", self.kappa));
        }
        match self.family {
            KernelFamily::DebyeYukawa { mu } if !(mu > 0.0 && mu.is_finite()) => {
                domain(format!("mu must be positive, got {mu}"))
            }
            KernelFamily::PowerLaw { nu } if !(nu > 0.0 && nu < 1.0) => {
                domain(format!("nu must lie in (0, 1), got {nu}"))
            }
            _ => Ok(()),
        }
    }

    /// The logarithmic exponent μ, if the kernel has one.
    pub fn mu(&self) -> Option<f64> {
        match self.family {
            KernelFamily::DebyeYukawa { mu } => Some(mu),
            _ => None,
        }
    }

    /// `|S^{d−2}|`.
    pub fn sphere_factor(&self) -> f64 {
        sphere_area(self.d - 2)
    }

    /// `b̃(θ)` without the support check; callers guarantee `θ ∈ (0, π/2]`.
    #[inline]
    pub fn reduced_unchecked(&self, theta: f64) -> f64 {
        let c = self.kappa * self.sphere_factor();
        match self.family {
            KernelFamily::DebyeYukawa { mu } => c * (PI / theta).ln().powf(mu) / theta,
            KernelFamily::PowerLaw { nu } => c * theta.powf(-1.0 - 2.0 * nu),
            KernelFamily::IntegrableCutoff => c,
        }
    }

    /// `b̃(θ)` on the support `(0, π/2]`.
    pub fn eval_reduced(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta <= THETA_MAX) {
            return domain(format!("theta = {theta} outside the kernel support (0, pi/2]"));
        }
        Ok(self.reduced_unchecked(theta))
    }

    /// `b(cos θ)` itself.
    pub fn eval_b(&self, theta: f64) -> Result<f64> {
        let r = self.eval_reduced(theta)?;
        Ok(r / (self.sphere_factor() * theta.sin().powi(self.d as i32 - 2)))
    }

    /// `∫_0^θ b̃(φ) dφ` restricted to `[θ_J, π/2]` after `panels` geometric panels;
    /// for singular families this grows without bound as `panels` increases.
    pub fn partial_mass(&self, panels: usize) -> f64 {
        let g = GeometricPanels::new(THETA_MAX, GeometricPanels::DEFAULT_RATIO, 8);
        (0..panels)
            .map(|j| g.panel_integral(j, &|t| self.reduced_unchecked(t)))
            .sum()
    }
}

/// Weight functions paired with `b̃` in [`kernel_moment`]. Each vanishes at
/// least quadratically at θ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentWeight {
    /// `2 sin²(θ/2) cos²(θ/2)`.
    TwoSc,
    /// `sin²θ / |S^{d−2}|`, so that `b̃·w = sin^dθ b(cos θ)`.
    SinD,
    /// `cos^{−d}(θ/2) − 1`.
    CancellationI2,
    /// `sin²(θ/2)`.
    Sin2Half,
    /// `sin²θ`.
    Sin2,
}

impl MomentWeight {
    pub fn eval(self, theta: f64, d: usize) -> f64 {
        match self {
            MomentWeight::TwoSc => {
                let s = (0.5 * theta).sin().powi(2);
                let c = (0.5 * theta).cos().powi(2);
                2.0 * s * c
            }
            MomentWeight::SinD => theta.sin().powi(2) / sphere_area(d - 2),
            MomentWeight::CancellationI2 => {
                let s = (0.5 * theta).sin().powi(2);
                (-(d as f64) * 0.5 * (-s).ln_1p()).exp_m1()
            }
            MomentWeight::Sin2Half => (0.5 * theta).sin().powi(2),
            MomentWeight::Sin2 => theta.sin().powi(2),
        }
    }
}

/// `∫_0^{π/2} b̃(θ) w(θ) dθ` on the default graded mesh (ratio 1/2, 8 nodes).
pub fn kernel_moment(k: &AngularKernel, w: MomentWeight, tol: f64) -> Result<f64> {
    Ok(kernel_moment_graded(k, w, tol, GeometricPanels::DEFAULT_RATIO)?.value)
}

/// [`kernel_moment`] with an explicit grading ratio and the full quadrature record.
pub fn kernel_moment_graded(
    k: &AngularKernel,
    w: MomentWeight,
    tol: f64,
    ratio: f64,
) -> Result<GradedIntegral> {
    if !(tol > 0.0) {
        return domain("quadrature tolerance must be positive");
    }
    k.validate()?;
    let panels = GeometricPanels::new(THETA_MAX, ratio, order_for_ratio(ratio));
    panels.integrate(|t| k.reduced_unchecked(t) * w.eval(t, k.d), tol, MAX_PANELS)
}

/// Gauss–Legendre order giving a panel `[rθ, θ]` the same accuracy as 8 nodes
/// on `[θ/2, θ]` for integrands with a singularity at `θ = 0`.
pub fn order_for_ratio(ratio: f64) -> usize {
    let rho = |r: f64| {
        let d = (1.0 + r) / (1.0 - r);
        d + (d * d - 1.0).sqrt()
    };
    let n = GeometricPanels::DEFAULT_ORDER as f64 * rho(0.5).ln() / rho(ratio).ln();
    (n - 1e-9).ceil().max(2.0) as usize
}

/// `∫_0^{π/2} b̃(θ) w(θ) dθ` for an arbitrary weight vanishing like `θ²`.
pub fn kernel_integral(k: &AngularKernel, w: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain("quadrature tolerance must be positive");
    }
    k.validate()?;
    let panels = GeometricPanels::new(
        THETA_MAX,
        GeometricPanels::DEFAULT_RATIO,
        GeometricPanels::DEFAULT_ORDER,
    );
    Ok(panels
        .integrate(|t| k.reduced_unchecked(t) * w(t), tol, MAX_PANELS)?
        .value)
}

/// `∫_0^{π/2} sin^dθ b(cos θ) dθ`.
pub fn momentum_transfer(k: &AngularKernel, tol: f64) -> Result<f64> {
    kernel_moment(k, MomentWeight::SinD, tol)
}

/// `∫_0^{θ_top} b̃(θ) w(θ) dθ`, the small-angle remainder of a moment.
pub fn kernel_moment_below(
    k: &AngularKernel,
    w: MomentWeight,
    theta_top: f64,
    tol: f64,
) -> Result<f64> {
    let panels = GeometricPanels::new(
        theta_top,
        GeometricPanels::DEFAULT_RATIO,
        GeometricPanels::DEFAULT_ORDER,
    );
    Ok(panels
        .integrate(|t| k.reduced_unchecked(t) * w.eval(t, k.d), tol, MAX_PANELS)?
        .value)
}

/// The logarithmic exponent of the Debye–Yukawa interaction `r^{−1}e^{−r^s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DebyeExponent {
    pub mu: f64,
    /// `false` when μ ≤ 0, i.e. outside the range the smoothing estimates cover.
    pub admissible: bool,
}

/// `μ = (d − 1)/s − 1`, i.e. `2/s − 1` in three dimensions.
pub fn mu_from_debye(d: usize, s: f64) -> Result<DebyeExponent> {
    if d < 2 {
        return domain(format!("dimension must be >= 2, got {d}"));
    }
    if !(s > 0.0 && s <= 2.0) {
        return domain(format!("screening exponent s must lie in (0, 2], got {s}"));
    }
    let mu = (d as f64 - 1.0) / s - 1.0;
    Ok(DebyeExponent {
        mu,
        admissible: mu > 0.0,
    })
}
