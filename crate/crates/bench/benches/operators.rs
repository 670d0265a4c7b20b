use std::hint::black_box;

use boltzsmooth::collision::{IsoCollisionOperator, DEFAULT_OPERATOR_TOL};
use boltzsmooth::collision2d::{bobylev_q_2d, Grid2DField, Interp2D, DEFAULT_2D_PANELS};
use boltzsmooth::kernel::{kernel_moment, MomentWeight};
use boltzsmooth::verify::{run_suite, SuiteConfig, SuiteCounts};
use boltzsmooth::{AngularKernel, IsoSpectralField, RadialGrid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn kernel() -> AngularKernel {
    AngularKernel::debye_yukawa(3, 1.0, 1.0).unwrap()
}

fn collision_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("collision_apply");
    group.sample_size(10);
    for n in [256usize, 1024, 2048] {
        let g = RadialGrid::quadratic(n, 400.0).unwrap();
        let op = IsoCollisionOperator::new(g, kernel(), 7, DEFAULT_OPERATOR_TOL).unwrap();
        let phi = IsoSpectralField::from_fn(g, 3, |x| (1.0 - 0.3 * x) * (-0.7 * x).exp());
        let mut out = vec![0.0; n + 1];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| op.apply(black_box(&phi.values), &mut out).unwrap())
        });
    }
    group.finish();
}

fn operator_build(c: &mut Criterion) {
    let g = RadialGrid::quadratic(1024, 400.0).unwrap();
    c.bench_function("operator_build_1024", |b| {
        b.iter(|| IsoCollisionOperator::new(black_box(g), kernel(), 7, DEFAULT_OPERATOR_TOL).unwrap())
    });
}

fn kernel_quadrature(c: &mut Criterion) {
    let k = kernel();
    c.bench_function("kernel_moment_two_sc", |b| {
        b.iter(|| kernel_moment(black_box(&k), MomentWeight::TwoSc, 1e-14).unwrap())
    });
}

fn planar_operator(c: &mut Criterion) {
    let k = AngularKernel::debye_yukawa(2, 1.0, 1.0).unwrap();
    let f = Grid2DField::from_radial(32, 6.0, |x| (-x).exp()).unwrap();
    let mut group = c.benchmark_group("planar");
    group.sample_size(10);
    group.bench_function("bobylev_q_2d_32", |b| {
        b.iter(|| bobylev_q_2d(black_box(&f), &k, DEFAULT_2D_PANELS, Interp2D::default()).unwrap())
    });
    group.finish();
}

fn suite(c: &mut Criterion) {
    let cfg = SuiteConfig {
        counts: SuiteCounts {
            subadditivity: 10_000,
            gtilde: 10_000,
            psi: 1_000,
            embedding: 10,
            coercivity: 10,
            commutation: 10,
            trilinear: 10,
        },
        ..SuiteConfig::default()
    };
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    group.bench_function("small_suite", |b| b.iter(|| run_suite(black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, collision_apply, operator_build, kernel_quadrature, planar_operator, suite);
criterion_main!(benches);
