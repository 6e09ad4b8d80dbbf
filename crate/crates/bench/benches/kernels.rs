//! Hot-path benchmarks: field evaluation, closed-loop stepping, and the
//! Jacobian-vector product, each against its O(N^2) reference.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use kuramoto_rc::analysis::{jacobian_dense, jacobian_vector_product};
use kuramoto_rc::dynamics::{
    driven_field, driven_field_pairwise, random_initial_phases, sample_assignment,
    sample_frequencies, FrequencyDist, InteractionSpec, PhaseVector, ReservoirConfig,
};
use kuramoto_rc::integrate::ClosedLoopMode;
use kuramoto_rc::readout::{ReadoutSpec, ReadoutWeights};

fn setup(n: usize) -> (ReservoirConfig, ReadoutWeights, PhaseVector) {
    let cfg = ReservoirConfig {
        n,
        m: 3,
        forcing: 37.5,
        input_scale: 1.16,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma: 1.0 }, n, 1).unwrap(),
        assignment: sample_assignment(n, 3, 1).unwrap(),
        interaction: InteractionSpec::AllToAll { k: 20.7 },
    };
    let spec = ReadoutSpec::V3;
    let w = nalgebra::DMatrix::from_fn(3, spec.feature_count(n), |i, j| {
        1e-3 * ((i * 31 + j * 7) as f64).sin()
    });
    let weights = ReadoutWeights::new(w, spec, 1e-5);
    let state = random_initial_phases(n, 1);
    (cfg, weights, state)
}

fn bench_field(c: &mut Criterion) {
    let mut group = c.benchmark_group("driven_field");
    for n in [500usize, 1000, 2000] {
        let (cfg, _, state) = setup(n);
        let u = [0.3, -0.1, 0.7];
        group.bench_with_input(BenchmarkId::new("mean_field", n), &n, |b, _| {
            b.iter(|| driven_field(black_box(&state), &cfg, &u).unwrap())
        });
        if n <= 1000 {
            group.bench_with_input(BenchmarkId::new("pairwise", n), &n, |b, _| {
                b.iter(|| driven_field_pairwise(black_box(&state), &cfg, &u).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_closed_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_loop_step");
    for n in [500usize, 1000, 2000, 4000] {
        let (cfg, weights, state) = setup(n);
        group.bench_with_input(BenchmarkId::new("rk4_full", n), &n, |b, _| {
            b.iter(|| {
                ClosedLoopMode::Rk4Full
                    .step(black_box(&state), &cfg, &weights, 0.01)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_jvp(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian");
    for n in [500usize, 1000] {
        let (cfg, weights, state) = setup(n);
        let v: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin()).collect();
        group.bench_with_input(BenchmarkId::new("jvp_fast", n), &n, |b, _| {
            b.iter(|| jacobian_vector_product(black_box(&state), &cfg, &weights, &v).unwrap())
        });
        if n <= 500 {
            group.bench_with_input(BenchmarkId::new("dense_build", n), &n, |b, _| {
                b.iter(|| jacobian_dense(black_box(&state), &cfg, &weights).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_field, bench_closed_loop, bench_jvp);
criterion_main!(benches);
