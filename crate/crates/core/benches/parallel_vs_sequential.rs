use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entflow::channels::NoiseKind;
use entflow::dynamics::Measure;
use entflow::dynamics::{default_p_grid, sweep_with};
use entflow::encoder::{optimize_with, Objective, OptimizerConfig};
use entflow::states::{make_phi_gamma, EncodingUnitaries};
use entflow::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn sweep(c: &mut Criterion) {
    let state = make_phi_gamma(0.3);
    let enc = EncodingUnitaries::identity(2);
    let family = NoiseKind::AmplitudeDamping.into();
    let grid = default_p_grid();
    let mut g = c.benchmark_group("sweep_101");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep_with(&state, &enc, &family, &grid, exec).unwrap())
        });
    }
    g.finish();
}

fn optimize(c: &mut Criterion) {
    let state = make_phi_gamma(0.0);
    let family = NoiseKind::Dephasing.into();
    let objective = Objective::MeasureAtP {
        measure: Measure::Concurrence,
        p: 0.5,
    };
    let config = OptimizerConfig {
        grid_points: 3,
        starts: 2,
        ..OptimizerConfig::default()
    };
    let mut g = c.benchmark_group("optimize_grid3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| optimize_with(&state, &family, &objective, &config, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweep, optimize);
criterion_main!(benches);
