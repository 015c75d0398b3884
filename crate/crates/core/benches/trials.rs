use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phaseqec::experiments::{
    run_natural_dephasing, run_single_round_qec, ConventionChoice, DephasingVariant, RunOptions, SingleRoundVariant,
};
use phaseqec::measurement::AssignmentConvention;
use phaseqec::noise::DeviceParams;
use phaseqec::parallel::Execution;

fn executions() -> Vec<Execution> {
    if cfg!(feature = "parallel") {
        vec![Execution::Sequential, Execution::Parallel]
    } else {
        vec![Execution::Sequential]
    }
}

fn single_round(c: &mut Criterion) {
    let params = DeviceParams::calibrated();
    let mut group = c.benchmark_group("single_round_qec_mc");
    group.sample_size(10);
    for exec in executions() {
        let opts = RunOptions { execution: exec, ..RunOptions::monte_carlo(2_000, 1) };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| {
                run_single_round_qec(
                    black_box(&[0.1, 0.3]),
                    &params,
                    ConventionChoice::default(),
                    SingleRoundVariant::Qec,
                    opts,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn natural_dephasing(c: &mut Criterion) {
    let params = DeviceParams::natural_dephasing();
    let mut group = c.benchmark_group("natural_dephasing_mc");
    group.sample_size(10);
    for exec in executions() {
        let opts = RunOptions { execution: exec, ..RunOptions::monte_carlo(1_000, 1) };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| {
                run_natural_dephasing(
                    black_box(&[5.0, 20.0]),
                    &params,
                    DephasingVariant::Qec,
                    AssignmentConvention::OPTIMAL,
                    opts,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, single_round, natural_dephasing);
criterion_main!(benches);
