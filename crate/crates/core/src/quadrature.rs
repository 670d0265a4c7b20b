//! Quadrature building blocks.
//!
//! Three rules live here:
//!
//! * Gauss–Legendre nodes on `[-1, 1]`, computed by Newton iteration on the
//!   three-term recurrence.
//! * A geometrically graded panel rule on `(0, top]` with panels
//!   `[top r^{j+1}, top r^j]`. Panel contributions of integrands that vanish
//!   algebraically (possibly times a logarithm) at the origin decay roughly
//!   geometrically, so the remaining tail is estimated from the ratio of the
//!   last two panel contributions and added to the partial sum.
//! * Adaptive Gauss–Kronrod (7/15) on a finite interval, used as an
//!   independent route wherever a second opinion is needed.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A geometric grading of `(0, top]` into panels `[top r^{j+1}, top r^j]`,
/// each carrying the same Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GeometricPanels {
    pub top: f64,
    pub ratio: f64,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

/// Result of a graded integration: the extrapolated value and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedIntegral {
    pub value: f64,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub panels: usize,
}

impl GeometricPanels {
    pub const DEFAULT_RATIO: f64 = 0.5;
    pub const DEFAULT_ORDER: usize = 8;

    pub fn new(top: f64, ratio: f64, order: usize) -> Self {
        assert!(top > 0.0 && ratio > 0.0 && ratio < 1.0);
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        Self {
            top,
            ratio,
            ref_nodes,
            ref_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.ref_nodes.len()
    }

    /// Bounds `(lo, hi)` of panel `j`.
    pub fn panel(&self, j: usize) -> (f64, f64) {
        let hi = self.top * self.ratio.powi(j as i32);
        (hi * self.ratio, hi)
    }

    /// Nodes and weights of panel `j`, appended to the given buffers.
    pub fn push_panel_rule(&self, j: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let (lo, hi) = self.panel(j);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (z, w) in self.ref_nodes.iter().zip(&self.ref_weights) {
            nodes.push(mid + half * z);
            weights.push(half * w);
        }
    }

    /// Integral of `f` over panel `j`.
    pub fn panel_integral(&self, j: usize, f: &impl Fn(f64) -> f64) -> f64 {
        let (lo, hi) = self.panel(j);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (z, w) in self.ref_nodes.iter().zip(&self.ref_weights) {
            acc += w * f(mid + half * z);
        }
        acc * half
    }

    /// Integrates `f` over `(0, top]`, adding panels toward the origin until the
    /// tail-extrapolated total changes by less than `tol`.
    pub fn integrate(
        &self,
        f: impl Fn(f64) -> f64,
        tol: f64,
        max_panels: usize,
    ) -> Result<GradedIntegral> {
        const MIN_PANELS: usize = 4;
        let mut sum = 0.0;
        let mut prev_c = f64::NAN;
        let mut prev_total = f64::NAN;
        for j in 0..max_panels {
            let c = self.panel_integral(j, &f);
            if !c.is_finite() {
                return Err(Error::Convergence {
                    partial: sum,
                    panels: j,
                });
            }
            sum += c;
            let tail = geometric_tail(prev_c, c);
            let total = sum + tail;
            if j + 1 >= MIN_PANELS && (total - prev_total).abs() <= tol {
                return Ok(GradedIntegral {
                    value: total,
                    partial_sum: sum,
                    tail_estimate: tail,
                    panels: j + 1,
                });
            }
            prev_c = c;
            prev_total = total;
        }
        Err(Error::Convergence {
            partial: sum,
            panels: max_panels,
        })
    }
}

/// Remainder of a geometric series whose last two terms are `prev` and `last`.
pub(crate) fn geometric_tail(prev: f64, last: f64) -> f64 {
    if last == 0.0 || !prev.is_finite() || prev == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if q > 0.0 && q < 1.0 {
        last * q / (1.0 - q)
    } else {
        0.0
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol` or relative tolerance `rel_tol`, whichever is looser.
pub fn adaptive_gk(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::Convergence {
                partial: total,
                panels: intervals.len(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Convergence {
                partial: total,
                panels: intervals.len(),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, m);
        let (v2, e2) = gk15(&f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        for p in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn graded_rule_resolves_log_singular_integrand() {
        // int_0^1 x log(1/x) dx = 1/4
        let panels = GeometricPanels::new(1.0, 0.5, 8);
        let r = panels.integrate(|x| x * (1.0 / x).ln(), 1e-15, 500).unwrap();
        assert!((r.value - 0.25).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn graded_rule_tail_extrapolation_handles_slow_power_decay() {
        // int_0^1 x^{-0.9} dx = 10
        let panels = GeometricPanels::new(1.0, 0.5, 8);
        let r = panels.integrate(|x| x.powf(-0.9), 1e-12, 1000).unwrap();
        assert!((r.value - 10.0).abs() < 1e-9, "{}", r.value);
        assert!(r.tail_estimate > 0.0);
    }

    #[test]
    fn graded_rule_reports_divergence() {
        let panels = GeometricPanels::new(1.0, 0.5, 8);
        match panels.integrate(|x| 1.0 / x, 1e-12, 60) {
            Err(Error::Convergence { partial, panels }) => {
                assert_eq!(panels, 60);
                assert!(partial > 40.0);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_gk_matches_closed_forms() {
        let v = adaptive_gk(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = adaptive_gk(|x| (-x * x).exp(), -10.0, 10.0, 1e-15, 1e-14).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
