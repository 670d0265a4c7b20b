//! Experiment configuration schema and the smoothing and induction pipelines
//! shared by the command-line driver and the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DEFAULT_INTERP_ORDER;
use crate::kernel::{AngularKernel, KernelFamily};
use crate::regularity::{fit_beta_floor, BetaFit};
use crate::solver::{integrate, GridSpec, InitialCondition, Integrator, SimConfig, Trajectory};
use crate::verify::{alpha_star, run_induction, InductionOptions, InductionReport, SuiteConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    DebyeYukawa,
    PowerLaw,
    IntegrableCutoff,
}

fn one() -> f64 {
    1.0
}

/// `[kernel]` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub d: usize,
    #[serde(default = "one")]
    pub kappa: f64,
    pub family: KernelName,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<AngularKernel> {
        let family = match self.family {
            KernelName::DebyeYukawa => KernelFamily::DebyeYukawa {
                mu: self.mu.ok_or_else(|| missing("kernel.mu", "debye_yukawa"))?,
            },
            KernelName::PowerLaw => KernelFamily::PowerLaw {
                nu: self.nu.ok_or_else(|| missing("kernel.nu", "power_law"))?,
            },
            KernelName::IntegrableCutoff => KernelFamily::IntegrableCutoff,
        };
        AngularKernel::new(self.d, self.kappa, family).map_err(|e| Error::InvalidConfig(format!("kernel: {e}")))
    }
}

fn missing(field: &str, family: &str) -> Error {
    Error::InvalidConfig(format!("missing field `{field}` (required for family {family})"))
}

fn default_snapshots() -> Vec<f64> {
    Vec::new()
}

fn default_interp() -> usize {
    DEFAULT_INTERP_ORDER
}

/// `[time]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// Defaults to `[0, t_end]`.
    #[serde(default = "default_snapshots")]
    pub snapshots: Vec<f64>,
    #[serde(default = "default_interp")]
    pub interp_order: usize,
}

fn default_alpha_smoothing() -> Option<f64> {
    None
}

fn default_times() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

fn default_floor() -> f64 {
    1e-250
}

/// `[smoothing]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSpec {
    /// Weight shift; defaults to `α* = e^{d/2 + (d+2)μ/2}`.
    #[serde(default = "default_alpha_smoothing")]
    pub alpha: Option<f64>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Defaults to `[10α, 0.8 x_max]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Values with `|φ|` below this are excluded from the fit.
    #[serde(default = "default_floor")]
    pub noise_floor: f64,
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        Self { alpha: None, times: default_times(), window: None, noise_floor: default_floor() }
    }
}

fn default_gap() -> f64 {
    0.25
}

/// `[induction]` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionSpec {
    pub t0: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_gap")]
    pub max_gap: f64,
}

/// A full experiment file. Blocks a command does not use may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub ic: Option<InitialCondition>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub verify: Option<SuiteConfig>,
    #[serde(default)]
    pub smoothing: Option<SmoothingSpec>,
    #[serde(default)]
    pub induction: Option<InductionSpec>,
}

fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("missing block `[{name}]`")))
}

impl ExperimentConfig {
    pub fn kernel(&self) -> Result<AngularKernel> {
        need(&self.kernel, "kernel")?.build()
    }

    /// Solver configuration from the `kernel`, `grid`, `ic` and `time` blocks.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let kernel = self.kernel()?;
        let ic = *need(&self.ic, "ic")?;
        let time = need(&self.time, "time")?;
        let mut cfg = SimConfig::new(kernel, self.grid.unwrap_or_default(), time.dt, time.t_end, ic);
        cfg.integrator = time.integrator;
        cfg.interp_order = time.interp_order;
        if !time.snapshots.is_empty() {
            cfg.snapshot_times = time.snapshots.clone();
        }
        cfg.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }

    /// Suite configuration; the top-level seed, when present, wins.
    pub fn suite_config(&self) -> Result<SuiteConfig> {
        let mut s = self.verify.unwrap_or_default();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(k) = &self.kernel {
            let k = k.build()?;
            s.d = k.d;
            s.kappa = k.kappa;
            s.mu = k
                .mu()
                .ok_or_else(|| Error::InvalidConfig("verify needs a debye_yukawa kernel".into()))?;
        }
        if !(s.mu > 0.0) {
            return Err(Error::InvalidConfig(format!("kernel.mu must be positive, got {}", s.mu)));
        }
        s.alpha_lo()?;
        s.grid.build().map_err(|e| Error::InvalidConfig(format!("verify.grid: {e}")))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingRow {
    pub t: f64,
    pub fit: BetaFit,
}

/// Fits `βt` at each requested time; the trajectory must carry snapshots there.
pub fn smoothing_fits(
    traj: &Trajectory,
    k: &AngularKernel,
    spec: &SmoothingSpec,
) -> Result<Vec<SmoothingRow>> {
    let mu = k
        .mu()
        .ok_or_else(|| Error::InvalidConfig("smoothing needs a logarithmic kernel".into()))?;
    let alpha = spec.alpha.unwrap_or_else(|| alpha_star(k.d, mu));
    spec.times
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "smoothing.times: t = {t} refused, the estimate needs t > 0"
                )));
            }
            let snap = traj
                .snapshot_at(t)
                .ok_or_else(|| Error::InvalidConfig(format!("no snapshot at t = {t}")))?;
            let window = spec.window.map(|w| (w[0], w[1]));
            let fit = fit_beta_floor(&snap.field, t, alpha, mu, window, spec.noise_floor)?;
            Ok(SmoothingRow { t, fit })
        })
        .collect()
}

/// Simulates with snapshots at the fit times added, then fits.
pub fn run_smoothing(cfg: &ExperimentConfig) -> Result<(Trajectory, Vec<SmoothingRow>)> {
    let spec = cfg.smoothing.clone().unwrap_or_default();
    if let Some(t) = spec.times.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "smoothing.times: t = {t} refused, the estimate needs t > 0"
        )));
    }
    let mut sim = cfg.sim_config()?;
    sim.snapshot_times.extend(spec.times.iter().copied());
    sim.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let traj = integrate(&sim)?;
    let rows = smoothing_fits(&traj, &sim.kernel, &spec)?;
    Ok((traj, rows))
}

/// Simulates on `[0, T₀]` with snapshots every `T₀/8` and replays the induction.
pub fn run_induction_experiment(cfg: &ExperimentConfig) -> Result<(Trajectory, InductionReport)> {
    let spec = *need(&cfg.induction, "induction")?;
    if !(spec.t0 > 0.0) {
        return Err(Error::InvalidConfig("induction.t0 must be positive".into()));
    }
    let mut sim = cfg.sim_config()?;
    sim.snapshot_times.extend((0..=8).map(|i| spec.t0 * i as f64 / 8.0));
    sim.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let traj = integrate(&sim)?;
    let opts = InductionOptions { beta_override: spec.beta, max_gap: spec.max_gap };
    let report = run_induction(&traj, &sim.kernel, spec.t0, opts)?;
    Ok((traj, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_spec_requires_mu() {
        let k = KernelSpec { d: 3, kappa: 1.0, family: KernelName::DebyeYukawa, mu: None, nu: None };
        match k.build() {
            Err(Error::InvalidConfig(m)) => assert!(m.contains("kernel.mu"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_blocks_are_named() {
        let cfg = ExperimentConfig {
            seed: None,
            out: None,
            kernel: Some(KernelSpec { d: 3, kappa: 1.0, family: KernelName::DebyeYukawa, mu: Some(1.0), nu: None }),
            grid: None,
            ic: None,
            time: None,
            verify: None,
            smoothing: None,
            induction: None,
        };
        match cfg.sim_config() {
            Err(Error::InvalidConfig(m)) => assert!(m.contains("[ic]"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
