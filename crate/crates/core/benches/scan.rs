use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;
use num_traits::One;

use selfaction_core::config::RunConfig;
use selfaction_core::mass::{solve_exact_condition, RootSearch};
use selfaction_core::potentials::PhysicalConstants;
use selfaction_core::quadrature::QuadTolerance;
use selfaction_core::report::{electron_beta, proton_run};
use selfaction_core::series::{iterate_first_family, iterate_second_family};
use selfaction_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mass_prescan(c: &mut Criterion) {
    let constants = PhysicalConstants::default();
    let first = iterate_first_family(BigRational::one(), 3);
    let second = iterate_second_family(BigRational::one(), 3);
    let search = RootSearch {
        prescan_points: 256,
        ..RootSearch::default()
    };
    let mut group = c.benchmark_group("mass_prescan");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                solve_exact_condition(&first, &second, constants.alpha, 3, &constants, &search, QuadTolerance::default(), exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn proton_scan(c: &mut Criterion) {
    let base = RunConfig {
        n_points: 8,
        ..RunConfig::default()
    };
    let beta = electron_beta(&base).unwrap();
    let mut group = c.benchmark_group("proton_scan");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = RunConfig { execution, ..base.clone() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| proton_run(black_box(&cfg), beta).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, mass_prescan, proton_scan);
criterion_main!(benches);
