//! The seeded randomized inequality suite.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    c_bd_constant, check_commutation_with, check_coercivity_constants, check_embedding,
    check_trilinear_with, coercivity_constants, l1_2_proxy, EmbeddingForm, SweepTally,
    VerificationReport, DEFAULT_TOL_REPORT,
};
use crate::collision::IsoCollisionOperator;
use crate::error::{Error, Result};
use crate::field::{IsoSpectralField, RadialGrid};
use crate::kernel::AngularKernel;
use crate::regularity::check_laplace_integral;
use crate::solver::{GridSpec, InitialCondition};
use crate::weights::{check_gtilde_diff_bound, check_psi_properties, check_subadditivity, WeightParams};

fn default_seed() -> u64 {
    42
}
fn default_d() -> usize {
    3
}
fn default_one() -> f64 {
    1.0
}
fn default_suite_grid() -> GridSpec {
    GridSpec { n: 512, x_max: 400.0, power: 2 }
}
fn default_tol() -> f64 {
    DEFAULT_TOL_REPORT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteCounts {
    pub subadditivity: usize,
    pub gtilde: usize,
    pub psi: usize,
    pub embedding: usize,
    pub coercivity: usize,
    pub commutation: usize,
    pub trilinear: usize,
}

impl Default for SuiteCounts {
    fn default() -> Self {
        Self {
            subadditivity: 100_000,
            gtilde: 100_000,
            psi: 10_000,
            embedding: 100,
            coercivity: 100,
            commutation: 100,
            trilinear: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Dimension of the collision checks.
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_one")]
    pub mu: f64,
    #[serde(default = "default_one")]
    pub kappa: f64,
    #[serde(default = "default_suite_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub counts: SuiteCounts,
    #[serde(default = "default_tol")]
    pub tol_report: f64,
    #[serde(default)]
    pub embedding_form: EmbeddingForm,
    /// Lower end of the weight shift `α` for the fixed-`μ` checks; defaults to `e^μ`.
    #[serde(default)]
    pub alpha_min: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            d: default_d(),
            mu: 1.0,
            kappa: 1.0,
            grid: default_suite_grid(),
            counts: SuiteCounts::default(),
            tol_report: DEFAULT_TOL_REPORT,
            embedding_form: EmbeddingForm::Max,
            alpha_min: None,
        }
    }
}

impl SuiteConfig {
    pub fn kernel(&self) -> Result<AngularKernel> {
        AngularKernel::debye_yukawa(self.d, self.kappa, self.mu)
    }

    /// `alpha_min`, checked against `e^μ` (below it `h` is not concave).
    pub fn alpha_lo(&self) -> Result<f64> {
        let floor = self.mu.exp();
        match self.alpha_min {
            None => Ok(floor),
            Some(a) if a >= floor * (1.0 - 4.0 * f64::EPSILON) => Ok(a),
            Some(a) => Err(Error::InvalidConfig(format!(
                "verify.alpha_min = {a} is below e^mu = {floor}"
            ))),
        }
    }
}

/// Check identifiers, in suite order.
pub const SUITE_CHECKS: [&str; 8] = [
    "subadditivity",
    "gtilde_difference",
    "psi_scaling",
    "embedding",
    "coercivity",
    "commutation",
    "trilinear",
    "laplace",
];

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// A sample `s ≥ 0` spread over many decades, sometimes exactly zero.
fn sample_s(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..20) {
        0 => 0.0,
        1 => rng.gen_range(0.0..1e-6),
        _ => log_uniform(rng, 1e-8, 1e12),
    }
}

/// Random admissible initial datum of one of the four families.
pub fn random_state(rng: &mut ChaCha8Rng, d: usize) -> InitialCondition {
    match rng.gen_range(0..4) {
        0 => InitialCondition::Maxwellian { c: rng.gen_range(0.3..3.0) },
        1 => {
            let e0 = rng.gen_range(0.5..2.0);
            InitialCondition::Bkw { a0: -rng.gen_range(0.0..0.3) * e0, e0 }
        }
        2 => InitialCondition::Matern { p: rng.gen_range(d as f64 / 2.0 + 1.0..6.0) },
        _ => InitialCondition::TwoTemperature {
            c1: rng.gen_range(0.3..1.0),
            c2: rng.gen_range(1.0..3.0),
            w: rng.gen_range(0.0..1.0),
        },
    }
}

/// Sum of a few Gaussian bumps in `|η| = √x`, of either sign.
fn random_bumps(rng: &mut ChaCha8Rng, grid: RadialGrid, d: usize) -> IsoSpectralField {
    let r_max = grid.x_max.sqrt();
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..5))
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..0.6 * r_max),
                rng.gen_range(0.5..3.0),
            )
        })
        .collect();
    IsoSpectralField::from_fn(grid, d, |x| {
        let r = x.sqrt();
        bumps
            .iter()
            .map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
            .sum()
    })
}

/// Runs every check of the suite and collects one summary entry per check
/// plus one entry per violation.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    if !(cfg.mu > 0.0) {
        return Err(Error::InvalidConfig(format!("mu must be positive, got {}", cfg.mu)));
    }
    if !(cfg.tol_report >= 0.0) {
        return Err(Error::InvalidConfig("tol_report must be nonnegative".into()));
    }
    let alpha_lo = cfg.alpha_lo()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerificationReport::new();
    let tol = cfg.tol_report;
    let mu = cfg.mu;

    // (a) subadditivity of h
    let mut tally = SweepTally::new(SUITE_CHECKS[0], tol);
    for _ in 0..cfg.counts.subadditivity {
        let m: f64 = rng.gen_range(0.1..3.0);
        let alpha = m.exp() * log_uniform(&mut rng, 1.0, 1e3);
        let (a, b) = (sample_s(&mut rng), sample_s(&mut rng));
        let (sm, sp) = (a.min(b), a.max(b));
        let margin = check_subadditivity(alpha, m, sm, sp)?;
        tally.record(|| json!({"alpha": alpha, "mu": m, "s_minus": sm, "s_plus": sp}), 0.0, margin, margin);
    }
    tally.into_report(&mut report);

    // (b) G̃ difference bound
    let mut tally = SweepTally::new(SUITE_CHECKS[1], tol);
    for _ in 0..cfg.counts.gtilde {
        let m: f64 = rng.gen_range(0.1..3.0);
        let alpha = m.exp() * log_uniform(&mut rng, 1.0, 1e3);
        let p = WeightParams::new(alpha, log_uniform(&mut rng, 1e-3, 10.0), m, rng.gen_range(0.0..2.0), None)?;
        let (a, b) = (sample_s(&mut rng), sample_s(&mut rng));
        let (sm, sp) = (a.min(b), a.max(b));
        if sm + sp == 0.0 {
            continue;
        }
        let r = check_gtilde_diff_bound(&p, sm, sp)?;
        tally.record(|| json!({"params": p, "s_minus": sm, "s_plus": sp}), r.lhs, r.rhs, r.margin);
    }
    tally.into_report(&mut report);

    // (c) ψ_α scaling, in batches sharing α
    let mut tally = SweepTally::new(SUITE_CHECKS[2], tol);
    let batches = 10.min(cfg.counts.psi.max(1));
    for b in 0..batches {
        let per = cfg.counts.psi / batches + usize::from(b < cfg.counts.psi % batches);
        let alpha = alpha_lo * log_uniform(&mut rng, 1.0, 1e3);
        let big_r = ((mu + 1.0) / 2.0).exp();
        let pts: Vec<(f64, f64)> = (0..per)
            .map(|_| (rng.gen_range(0.0..=1.0), log_uniform(&mut rng, 1.0, 1e12)))
            .collect();
        let r = check_psi_properties(alpha, mu, big_r, &pts)?;
        // psi checks violations with a relative round-off allowance
        let margin = if r.passed() { r.min_margin.max(0.0) } else { r.min_margin.min(-1.0) };
        let witness = r.violations.first().copied();
        tally.record_many(
            per,
            || json!({"alpha": alpha, "mu": mu, "R": big_r, "tested": r.tested, "skipped": r.skipped,
                       "r0": r.r0, "unbounded": r.unbounded, "first_violation": witness}),
            0.0,
            r.min_margin,
            margin,
        );
    }
    tally.into_report(&mut report);

    // shared grid, kernel and operator for the collision checks
    let grid = cfg.grid.build()?;
    let k = cfg.kernel()?;
    let d = cfg.d;
    let probe = IsoSpectralField::from_fn(grid, d, |x| (-x).exp());
    let op = IsoCollisionOperator::for_field(&probe, &k)?;

    // (d) embedding: Gaussians in d = 1 and radial Fourier states in d = 3
    let mut tally = SweepTally::new(SUITE_CHECKS[3], tol);
    let form = cfg.embedding_form;
    for i in 0..cfg.counts.embedding {
        if i % 2 == 0 {
            let c = rng.gen_range(0.5..3.0);
            let x = [rng.gen_range(-5.0..5.0)];
            // sup|h'| of e^{−c y²} is √(2c/e)
            let grad = (2.0 * c / E).sqrt();
            let r = check_embedding(|y| (-c * y[0] * y[0]).exp(), &x, 1.0, grad, form)?;
            tally.record(|| json!({"d": 1, "c": c, "x": x}), r.lhs, r.rhs, r.margin);
        } else {
            let ic = random_state(&mut rng, 3);
            let phi = ic.field(grid, 3, 7)?;
            let b1 = l1_2_proxy(&phi);
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let h = |y: &[f64]| phi.eval(y.iter().map(|v| v * v).sum()).unwrap_or(0.0);
            let r = check_embedding(h, &x, phi.values[0], 2.0 * std::f64::consts::PI * b1, form)?;
            tally.record(|| json!({"d": 3, "state": ic, "x": x, "b1": b1}), r.lhs, r.rhs, r.margin);
        }
    }
    tally.into_report(&mut report);

    // (e) coercivity with constants measured from g
    let mut tally = SweepTally::new(SUITE_CHECKS[4], tol);
    let alphas = [0.0, 1.0, mu.exp(), 1e3];
    for i in 0..cfg.counts.coercivity {
        let ic = random_state(&mut rng, d);
        let g = ic.field(grid, d, 7)?;
        let f = random_bumps(&mut rng, grid, d);
        let alpha = alphas[i % alphas.len()];
        let c = coercivity_constants(&g, &k)?;
        let r = check_coercivity_constants(&op, &c, &g, &f, alpha)?;
        let scale = r.inequality.lhs.abs().max(r.inequality.rhs.abs()).max(1e-300);
        tally.record(
            || json!({"g": ic, "alpha": alpha, "constants": c, "f_l2_sq": r.l2_norm_sq}),
            r.inequality.lhs,
            r.inequality.rhs,
            r.inequality.margin / scale,
        );
    }
    tally.into_report(&mut report);

    // (f) commutation error and (g) trilinear bound
    let c_bd = c_bd_constant(&k)?;
    let mut comm = SweepTally::new(SUITE_CHECKS[5], tol);
    let mut tri = SweepTally::new(SUITE_CHECKS[6], tol);
    let n = cfg.counts.commutation.max(cfg.counts.trilinear);
    for i in 0..n {
        let ic = random_state(&mut rng, d);
        let f = ic.field(grid, d, 7)?;
        let alpha = if alpha_lo < 100.0 { rng.gen_range(alpha_lo..100.0) } else { alpha_lo };
        let bt = rng.gen_range(0.01..0.5);
        let lam = rng.gen_range(2.0..18.0f64).min(grid.x_max.sqrt());
        let p = WeightParams::new(alpha, bt, mu, 1.0, Some(lam))?;
        if i < cfg.counts.commutation {
            let r = check_commutation_with(&op, &f, &p)?;
            let scale = r.rhs.abs().max(r.lhs.abs()).max(1e-300);
            comm.record(|| json!({"state": ic, "params": p}), r.lhs, r.rhs, r.margin / scale);
        }
        if i < cfg.counts.trilinear {
            let r = check_trilinear_with(&op, &f, &p, c_bd)?;
            let q = r.inequality;
            let scale = q.rhs.abs().max(q.lhs.abs()).max(1e-300);
            tri.record(|| json!({"state": ic, "params": p, "c_bd": c_bd}), q.lhs, q.rhs, q.margin / scale);
        }
    }
    comm.into_report(&mut report);
    tri.into_report(&mut report);

    // (h) Laplace substitution identity and the quadratic bound
    let mut tally = SweepTally::new(SUITE_CHECKS[7], tol);
    for &(tau, m) in &[(1.0, 1.0), (1.0, 2.0), (0.5, 1.5), (2.0, 3.0)] {
        for n in 1..=10 {
            let r = check_laplace_integral(tau, m, n, 8)?;
            // identity must hold to 1e−8; the bound must hold outright
            let id_margin = 1e-8 - r.identity_rel_err;
            let margin = id_margin.min(r.margin.unwrap_or(f64::INFINITY));
            tally.record(|| json!({"tau": tau, "mu": m, "n": n, "check": r}), r.substituted, r.bound.unwrap_or(f64::NAN), margin);
        }
    }
    for &m in &[0.5, 0.75] {
        let r: Vec<_> = [2usize, 8, 32]
            .iter()
            .map(|&n| check_laplace_integral(1.0, m, n, 8))
            .collect::<Result<_>>()?;
        let dev: Vec<f64> = r.iter().map(|c| (c.asymptotic_ratio - 1.0).abs()).collect();
        let id = r.iter().map(|c| c.identity_rel_err).fold(0.0, f64::max);
        // below μ = 1 only the approach of the ratio to 1 is checked
        let margin = (dev[0] - dev[1]).min(dev[1] - dev[2]).min(1e-8 - id);
        tally.record(|| json!({"mu": m, "ratio_deviation": dev}), dev[2], dev[0], margin);
    }
    tally.into_report(&mut report);

    report.metadata.notes.push(format!(
        "seed {}, grid n = {} x_max = {}, d = {}, mu = {}",
        cfg.seed, cfg.grid.n, cfg.grid.x_max, d, mu
    ));
    report.metadata.notes.push(
        "coercivity constants are measured on the discrete state and hold for it only".into(),
    );
    Ok(report)
}
