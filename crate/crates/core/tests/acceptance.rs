//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them). Criterion 8 (the
//! full-size Kuramoto-Sivashinsky run) takes tens of minutes and is ignored
//! by default; run it with `cargo test --test acceptance -- --ignored`.

use std::time::Instant;

use nalgebra::DMatrix;

use kuramoto_rc::analysis::{
    self, local_extrema, lyapunov_spectrum, lyapunov_spectrum_generic, return_map, ExtremaKind,
    SweepOptions, TangentMode,
};
use kuramoto_rc::dynamics::{
    driven_field, driven_field_pairwise, order_parameter, random_initial_phases,
    sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec, PhaseVector,
    ReservoirConfig,
};
use kuramoto_rc::error::Result;
use kuramoto_rc::esn::{esn_narma10_grid};
use kuramoto_rc::graph;
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::meanfield::{oa_driven_field, MeanFieldParams, MeanFieldState};
use kuramoto_rc::pipeline::{run_experiment, run_open_loop, DriveMode, RunOutcome};
use kuramoto_rc::readout::{ReadoutSpec, ReadoutWeights};
use kuramoto_rc::tasks::{
    self, hold_series, scale_input, KsParams, LorenzParams, MackeyGlassParams, RosslerParams,
    SignalSeries,
};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion:02} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

// ---------------------------------------------------------------------------
// shared builders

fn reservoir(
    n: usize,
    m: usize,
    f: f64,
    k: f64,
    c: f64,
    sigma: f64,
    seed: u64,
) -> ReservoirConfig {
    ReservoirConfig {
        n,
        m,
        forcing: f,
        input_scale: c,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma }, n, seed).unwrap(),
        assignment: sample_assignment(n, m, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k },
    }
}

/// Lorenz input on the half-step grid, scaled by 30.92, starting at -t_wipe.
fn lorenz_input(schedule: &StepSchedule, divisor: f64) -> SignalSeries {
    let total = schedule.t_wipe + schedule.t_train + schedule.t_test + 2.0 * schedule.h_u;
    let series = tasks::lorenz_series(
        &LorenzParams::default(),
        [1.0, 1.0, 20.0],
        0.5 * schedule.h_u,
        total,
        tasks::LORENZ_TRANSIENT,
    )
    .unwrap();
    let mut series = scale_input(&series, divisor).unwrap();
    series.t0 = -schedule.t_wipe;
    series
}

/// Table 2 Lorenz experiment at the given bifurcation parameters.
fn lorenz_run(f: f64, k: f64, seed: u64) -> Result<RunOutcome> {
    let schedule = StepSchedule::new(0.01, 0.01, 25.0, 100.0, 2.0).unwrap();
    let cfg = reservoir(1000, 3, f, k, 1.159, 1.0, seed);
    let input = lorenz_input(&schedule, 30.92);
    run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-5, ClosedLoopMode::Rk4Full)
}

// ---------------------------------------------------------------------------

#[test]
fn crit01_lorenz_short_term_prediction() {
    let outcome = lorenz_run(37.545, 20.680, 0).unwrap();
    report(
        1,
        outcome.nmse < 1e-2,
        &format!("Lorenz Table-2 NMSE on [100,102] = {:.2e} (< 1e-2)", outcome.nmse),
    );
}

#[test]
fn crit02_oracle_equivalence() {
    let mut max_field = 0.0f64;
    let mut max_jvp = 0.0f64;
    for trial in 0..100u64 {
        let n = 10 + (trial as usize * 7) % 191; // N <= 200
        let cfg = reservoir(n, 3, 12.0, 7.0, 1.1, 1.0, trial);
        let state = random_initial_phases(n, trial + 1000);
        let u = [0.3, -0.2, 0.9];
        let fast = driven_field(&state, &cfg, &u).unwrap();
        let slow = driven_field_pairwise(&state, &cfg, &u).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            max_field = max_field.max((a - b).abs());
        }

        let spec = ReadoutSpec::V3;
        let w = DMatrix::from_fn(3, spec.feature_count(n), |i, j| {
            0.05 * ((i * 13 + j * 5 + trial as usize) as f64).sin()
        });
        let weights = ReadoutWeights::new(w, spec, 1e-5);
        let v: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.61 + trial as f64).cos()).collect();
        let jv = analysis::jacobian_vector_product(&state, &cfg, &weights, &v).unwrap();
        let dense = analysis::jacobian_dense(&state, &cfg, &weights).unwrap();
        let reference = dense * DMatrix::from_column_slice(n, 1, &v);
        let scale = reference.amax().max(1e-30);
        for i in 0..n {
            max_jvp = max_jvp.max((jv[i] - reference[(i, 0)]).abs() / scale);
        }
    }
    report(
        2,
        max_field <= 1e-12 && max_jvp <= 1e-10,
        &format!(
            "mean-field vs pairwise max |diff| = {max_field:.2e} (<= 1e-12), \
             fast JVP vs dense max rel = {max_jvp:.2e} (<= 1e-10)"
        ),
    );
}

fn timing_weights(n: usize) -> ReadoutWeights {
    let spec = ReadoutSpec::V3;
    let w = DMatrix::from_fn(3, spec.feature_count(n), |i, j| {
        1e-3 * ((i * 31 + j * 7) as f64).sin()
    });
    ReadoutWeights::new(w, spec, 1e-5)
}

fn linear_fit_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let (b, a) = (sxy / sxx, my - sxy / sxx * mx);
    let ss_res: f64 = x.iter().zip(y).map(|(xx, yy)| (yy - a - b * xx).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yy| (yy - my).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

#[test]
fn crit03_linear_time_scaling() {
    let sizes = [500usize, 1000, 2000, 4000];
    let mut linear = Vec::new();
    let mut quadratic = Vec::new();
    for &n in &sizes {
        let cfg = reservoir(n, 3, 37.5, 20.7, 1.16, 1.0, 1);
        let weights = timing_weights(n);
        let mut state = random_initial_phases(n, 1);
        for _ in 0..5 {
            state = ClosedLoopMode::Rk4Full.step(&state, &cfg, &weights, 0.01).unwrap();
        }
        let steps = 2_000_000 / n; // roughly constant work per size
        let start = Instant::now();
        for _ in 0..steps {
            state = ClosedLoopMode::Rk4Full.step(&state, &cfg, &weights, 0.01).unwrap();
        }
        linear.push(start.elapsed().as_secs_f64() / steps as f64);

        // O(N^2) reference: plain RK4 over the pairwise field.
        let qsteps = (40_000_000 / (n * n)).max(2);
        let eval = |phases: &[f64]| {
            let s = PhaseVector::new(phases.to_vec()).unwrap();
            let u = weights.predict(phases);
            driven_field_pairwise(&s, &cfg, &u).unwrap()
        };
        let mut x: Vec<f64> = state.as_slice().to_vec();
        let start = Instant::now();
        for _ in 0..qsteps {
            let k1 = eval(&x);
            let mid: Vec<f64> = (0..n).map(|i| x[i] + 0.005 * k1[i]).collect();
            let k2 = eval(&mid);
            let mid: Vec<f64> = (0..n).map(|i| x[i] + 0.005 * k2[i]).collect();
            let k3 = eval(&mid);
            let end: Vec<f64> = (0..n).map(|i| x[i] + 0.01 * k3[i]).collect();
            let k4 = eval(&end);
            for i in 0..n {
                x[i] += 0.01 / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
        quadratic.push(start.elapsed().as_secs_f64() / qsteps as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let r2 = linear_fit_r2(&xs, &linear);
    let lin_ratio = linear[3] / linear[0];
    let quad_ratio = quadratic[3] / quadratic[0];
    report(
        3,
        r2 > 0.95 && lin_ratio <= 12.0 && quad_ratio > 30.0,
        &format!(
            "closed-loop step times {linear:?} fit linearly with R^2 = {r2:.3} (> 0.95), \
             t(4000)/t(500) = {lin_ratio:.1} (<= 12); quadratic reference ratio = {quad_ratio:.1} (> 30)"
        ),
    );
}

fn lorenz_target_spectrum() -> [f64; 3] {
    let p = LorenzParams::default();
    let field = |x: &[f64], out: &mut [f64]| {
        out[0] = p.sigma * (x[1] - x[0]);
        out[1] = x[0] * (p.rho - x[2]) - x[1];
        out[2] = x[0] * x[1] - p.beta * x[2];
    };
    let jac = |x: &[f64]| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                -p.sigma, p.sigma, 0.0,
                p.rho - x[2], -1.0, -x[0],
                x[1], x[0], -p.beta,
            ],
        )
    };
    let spec =
        lyapunov_spectrum_generic(&[1.0, 1.0, 20.0], field, jac, 0.005, 200_000, 3, 2).unwrap();
    [spec.exponents[0], spec.exponents[1], spec.exponents[2]]
}

#[test]
fn crit04_lorenz_lyapunov_triple() {
    let l = lorenz_target_spectrum();
    let ok = (l[0] - 0.91).abs() <= 0.02 && l[1].abs() <= 0.02 && (l[2] + 14.57).abs() <= 0.3;
    report(
        4,
        ok,
        &format!(
            "Lorenz spectrum ({:.3}, {:.3}, {:.2}) vs (0.91, 0.00, -14.57) within (0.02, 0.02, 0.3)",
            l[0], l[1], l[2]
        ),
    );
}

#[test]
fn crit05_climate_reproduction() {
    let outcome = lorenz_run(29.719, 23.544, 0).unwrap();
    // 10x the training length, fast variational path.
    let steps = (10.0 * 100.0 / 0.01) as usize;
    let spec = lyapunov_spectrum(&outcome.trained, 2, steps, TangentMode::Fast, 10).unwrap();
    let (l1, l2) = (spec.exponents[0], spec.exponents[1]);
    report(
        5,
        (l1 - 0.91).abs() <= 0.05 && l2.abs() <= 0.02,
        &format!(
            "reservoir at F=29.719, K=23.544: lambda_1 = {l1:.3} (0.91 +/- 0.05), \
             lambda_2 = {l2:.3} (|.| <= 0.02) over T = 1000"
        ),
    );
}

#[test]
fn crit06_narma10_and_esn_baseline() {
    // Table 5; n_wipe is unspecified in the paper, 200 samples are used here.
    let (n_wipe, n_train, n_test) = (200usize, 2000usize, 2000usize);
    let h = 0.1;
    let schedule = StepSchedule::new(
        h,
        h,
        n_wipe as f64 * h,
        n_train as f64 * h,
        n_test as f64 * h,
    )
    .unwrap();
    let count = n_wipe + n_train + n_test + 5;
    let (u, y) = tasks::narma10_series(0, count).unwrap();
    let input = hold_series(&u, -schedule.t_wipe, h).unwrap();
    let targets = y[n_wipe..n_wipe + n_train + n_test].to_vec();
    let cfg = reservoir(500, 1, 14.3, 1.0, 0.1, 1.0, 0);
    let outcome = run_open_loop(
        &cfg,
        ReadoutSpec::V1,
        &schedule,
        &input,
        &targets,
        1e-11,
        DriveMode::Rk1,
    )
    .unwrap();

    let (esn_nmse, _) = esn_narma10_grid(23, 0, &u, &y, n_wipe, n_train, n_test).unwrap();
    report(
        6,
        outcome.nmse <= 3e-3 && esn_nmse < 2e-3,
        &format!(
            "NARMA10 reservoir NMSE = {:.2e} (<= 3e-3); ESN N=23 grid-search NMSE = {:.2e} (< 2e-3)",
            outcome.nmse, esn_nmse
        ),
    );
}

#[test]
fn crit07_mackey_glass() {
    // Two-clock scheme: the reservoir consumes one input sample of
    // h_u = 0.816 data time per h_res = 0.002 step. Windows count steps.
    let (h_res, h_u) = (0.002, 0.816);
    let (n_wipe, n_train, n_test) = (2200usize, 1000usize, 800usize);
    let schedule = StepSchedule::new(
        h_res,
        h_res,
        n_wipe as f64 * h_res,
        n_train as f64 * h_res,
        n_test as f64 * h_res,
    )
    .unwrap();
    let h_half = 0.5 * h_u;
    let total = (n_wipe + n_train + n_test + 4) as f64 * h_u;
    // Generate on a fine grid dividing both tau = 17 and h_u / 2, then
    // relabel the samples onto the reservoir clock.
    let dec = (h_half / 0.004).round() as usize;
    let fine = tasks::mackey_glass_series(
        &MackeyGlassParams::default(),
        0.5,
        h_half / dec as f64,
        total,
        500.0,
    )
    .unwrap();
    let data = fine.decimate(dec).unwrap();
    let input = SignalSeries::new(-schedule.t_wipe, 0.5 * h_res, 1, data.values).unwrap();

    let mut best = f64::INFINITY;
    let mut best_seed = 0;
    for seed in 5..15u64 {
        let cfg = reservoir(1000, 1, 68.5, 52.2, 0.872, 9.0, seed);
        match run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-7, ClosedLoopMode::Rk4Rk1)
        {
            Ok(out) if out.nmse < best => {
                best = out.nmse;
                best_seed = seed;
            }
            _ => {}
        }
        if best <= 5e-2 {
            break; // best-of semantics: one passing seed suffices
        }
    }
    report(
        7,
        best <= 5e-2,
        &format!(
            "Mackey-Glass Table-4 best NMSE over 10 seeds = {best:.2e} (<= 5e-2, seed {best_seed})"
        ),
    );
}

#[test]
#[ignore = "full-size Kuramoto-Sivashinsky run takes tens of minutes"]
fn crit08_kuramoto_sivashinsky() {
    // Two-clock scheme: one KS sample of h_u = 0.2 data time per
    // h_res = 0.01 reservoir step.
    let (h_res, h_u) = (0.01, 0.2);
    let (n_wipe, n_train, n_test) = (5000usize, 20_000usize, 800usize);
    let schedule = StepSchedule::new(
        h_res,
        h_res,
        n_wipe as f64 * h_res,
        n_train as f64 * h_res,
        n_test as f64 * h_res,
    )
    .unwrap();
    let p = KsParams {
        l: 45.0,
        gridpoints: 128,
        probes: 50,
    };
    let mut best = f64::INFINITY;
    let mut best_seed = 0;
    for seed in 0..5u64 {
        let y0 = tasks::ks_random_initial(&p, seed);
        let total = (n_wipe + n_train + n_test + 4) as f64 * h_u;
        let data = tasks::ks_series(&p, &y0, 0.5 * h_u, total, 100.0).unwrap();
        let input = SignalSeries::new(-schedule.t_wipe, 0.5 * h_res, 50, data.values).unwrap();
        let cfg = reservoir(9000, 50, 47.27, 32.17, 0.271, 1.0, seed);
        if let Ok(out) =
            run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-5, ClosedLoopMode::Rk4Full)
        {
            if out.nmse < best {
                best = out.nmse;
                best_seed = seed;
            }
        }
        if best <= 1.0 {
            break;
        }
    }
    report(
        8,
        best <= 1.0,
        &format!("Kuramoto-Sivashinsky Table-3 best NMSE = {best:.2e} (<= 1.0, seed {best_seed})"),
    );
}

/// Cheap deterministic uniform sampler for the benchmark criteria.
struct Lcg(u64);
impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

const BENCH_N: usize = 300;
const BENCH_SAMPLES: usize = 200;

fn bench_schedule() -> StepSchedule {
    StepSchedule::new(0.02, 0.02, 10.0, 50.0, 2.0).unwrap()
}

/// NMSE of a short-term Lorenz prediction with the given readout/topology.
fn bench_nmse(
    input: &SignalSeries,
    schedule: &StepSchedule,
    spec: ReadoutSpec,
    interaction: InteractionSpec,
    f: f64,
    c: f64,
    seed: u64,
) -> f64 {
    let mut cfg = reservoir(BENCH_N, 3, f, 0.0, c, 1.0, seed);
    cfg.interaction = interaction;
    match run_experiment(&cfg, spec, schedule, input, 1e-5, ClosedLoopMode::Rk4Full) {
        Ok(out) => out.nmse,
        Err(_) => f64::INFINITY,
    }
}

#[test]
fn crit09_readout_ordering() {
    let schedule = bench_schedule();
    let input = lorenz_input(&schedule, 30.92);
    let mut rng = Lcg(0x9e3779b97f4a7c15);
    let mut hits = [0usize; 3];
    for sample in 0..BENCH_SAMPLES {
        let c = rng.uniform(0.5, 1.5);
        let f = rng.uniform(5.0, 60.0);
        let k = rng.uniform(0.0, 40.0);
        for (slot, spec) in [ReadoutSpec::V1, ReadoutSpec::V2, ReadoutSpec::V3]
            .into_iter()
            .enumerate()
        {
            let nmse = bench_nmse(
                &input,
                &schedule,
                spec,
                InteractionSpec::AllToAll { k },
                f,
                c,
                sample as u64,
            );
            if nmse < 0.01 {
                hits[slot] += 1;
            }
        }
    }
    let rate = |h: usize| 100.0 * h as f64 / BENCH_SAMPLES as f64;
    let (v1, v2, v3) = (rate(hits[0]), rate(hits[1]), rate(hits[2]));
    report(
        9,
        v3 >= v2 && v2 >= v1 && v1 < 5.0,
        &format!(
            "success rates over {BENCH_SAMPLES} samples: v3 = {v3:.1}% >= v2 = {v2:.1}% >= \
             v1 = {v1:.1}% (v1 < 5%)"
        ),
    );
}

#[test]
fn crit10_graph_variants() {
    let schedule = bench_schedule();
    let input = lorenz_input(&schedule, 30.92);
    let mut rng = Lcg(0x2545f4914f6cdd1d);
    let mut hits = [0usize; 3]; // all-to-all, ER, WS
    for sample in 0..BENCH_SAMPLES {
        let c = rng.uniform(0.5, 1.5);
        let f = rng.uniform(5.0, 60.0);
        let k = rng.uniform(0.0, 40.0);
        let seed = sample as u64;
        let er = graph::erdos_renyi(BENCH_N, 0.1, seed).unwrap();
        let ws = graph::watts_strogatz(BENCH_N, 100, 0.5, seed).unwrap();
        let topologies = [
            InteractionSpec::AllToAll { k },
            InteractionSpec::Graph {
                k_scale: k / er.mean_degree(),
                adjacency: er.into(),
            },
            InteractionSpec::Graph {
                k_scale: k / ws.mean_degree(),
                adjacency: ws.into(),
            },
        ];
        for (slot, interaction) in topologies.into_iter().enumerate() {
            let nmse = bench_nmse(&input, &schedule, ReadoutSpec::V3, interaction, f, c, seed);
            if nmse < 1e-2 {
                hits[slot] += 1;
            }
        }
    }
    let rate = |h: usize| 100.0 * h as f64 / BENCH_SAMPLES as f64;
    let (a2a, er, ws) = (rate(hits[0]), rate(hits[1]), rate(hits[2]));
    report(
        10,
        er >= a2a + 10.0 && ws >= a2a + 10.0,
        &format!(
            "success rates over {BENCH_SAMPLES} samples: ER(p=0.1) = {er:.1}%, \
             WS(m=100, p=0.5) = {ws:.1}%, all-to-all = {a2a:.1}% (graphs >= a2a + 10pp)"
        ),
    );
}

#[test]
fn crit11_rotation_number_consistency() {
    let n = 500;
    let schedule = StepSchedule::new(0.02, 0.02, 10.0, 60.0, 2.0).unwrap();
    let input = lorenz_input(&schedule, 30.92);
    let target = lorenz_target_spectrum();
    let opts = SweepOptions {
        spec: ReadoutSpec::V3,
        ridge_epsilon: 1e-5,
        mode: ClosedLoopMode::Rk4Full,
        rotation_steps: 20_000,
        lyapunov_steps: 20_000,
        lyapunov_ortho_period: 10,
        target: Some(target),
        climate_epsilon: 0.1,
        seed: 0,
    };
    let mut points = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            let f = 5.0 + 55.0 * i as f64 / 7.0;
            let k = 2.0 + 38.0 * j as f64 / 7.0;
            points.push((f, k, 1.159));
        }
    }
    let records = analysis::sweep(
        &points,
        |f, k, c, seed| {
            let mut cfg = reservoir(n, 3, f, k, c, 1.0, seed);
            cfg.interaction = InteractionSpec::AllToAll { k };
            Ok(cfg)
        },
        &schedule,
        &input,
        &opts,
    );
    let climate_points: Vec<_> = records.iter().filter(|r| r.climate == Some(true)).collect();
    let violations = climate_points
        .iter()
        .filter(|r| r.rho_max != Some(0))
        .count();
    report(
        11,
        !climate_points.is_empty() && violations == 0,
        &format!(
            "8x8 sweep: {} climate-reproducing points, {} with max rotation number > 0 \
             (must be 0, and at least one climate point required)",
            climate_points.len(),
            violations
        ),
    );
}

#[test]
fn crit12_order_parameter_bifurcation() {
    // Lorenz-like oscillation at F=35, K=20 (Table-2 sizing otherwise).
    let out = lorenz_run(35.0, 20.0, 0).unwrap();
    let r = analysis::autonomous_r_series(&out.trained, 1000, ClosedLoopMode::Rk4Full).unwrap();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r.len() as f64).sqrt();
    let in_band = r.iter().all(|&v| v > 0.05 && v < 0.999);
    let oscillating = in_band && sd > 0.02;

    // Below the critical coupling at F=35, K=0.5 the incoherent motion decays
    // into a stationary state (this realization freezes around t = 140).
    let out = lorenz_run(35.0, 0.5, 3);
    let (weak, weak_detail) = match out {
        Err(e) => (false, format!("run failed: {e}")),
        Ok(out) => {
            let trained = &out.trained;
            let mut state = trained.final_train_state.clone();
            let h = trained.schedule.h_res;
            let mut sup_rate = f64::INFINITY;
            let mut rs = Vec::new();
            let long = (200.0 / h) as usize;
            for step in 0..long {
                let next = ClosedLoopMode::Rk4Full
                    .step(&state, &trained.cfg, &trained.weights, h)
                    .unwrap();
                if step >= 3 * long / 4 {
                    let rate = state
                        .as_slice()
                        .iter()
                        .zip(next.as_slice())
                        .map(|(a, b)| (b - a).abs() / h)
                        .fold(0.0f64, f64::max);
                    sup_rate = sup_rate.min(rate);
                    rs.push(order_parameter(&next).r);
                }
                state = next;
            }
            let rm = rs.iter().sum::<f64>() / rs.len() as f64;
            let rsd = (rs.iter().map(|v| (v - rm).powi(2)).sum::<f64>() / rs.len() as f64).sqrt();
            // Incoherence: r pinned near the finite-N noise floor ~ 1/sqrt(N).
            let collapsed = rm < 0.2 && rsd < 0.01;
            (
                sup_rate < 0.1 || collapsed,
                format!("sup |theta'| = {sup_rate:.2}, mean r = {rm:.3}, r sd = {rsd:.4}"),
            )
        }
    };
    report(
        12,
        oscillating && weak,
        &format!(
            "F=35, K=20: r in (0.05, 0.999) = {in_band}, sd = {sd:.3} (> 0.02); \
             F=35, K=0.5: stationary-or-collapsed = {weak} ({weak_detail})"
        ),
    );
}

#[test]
fn crit13_mean_field_invariants() {
    // OA fixed point at K=4, F=0: r* = sqrt(1 - 2/K) = sqrt(0.5).
    let params = MeanFieldParams::new(4.0, 0.0, 1.0, 0.0).unwrap();
    let mut state = MeanFieldState::new(0.5, 0.0).unwrap();
    let h = 0.01;
    for i in 0..20_000 {
        let t = i as f64 * h;
        let next = kuramoto_rc::integrate::rk4_generic_step(
            &[state.r, state.psi],
            |_, x, out| {
                let s = MeanFieldState { r: x[0], psi: x[1] };
                let (dr, dpsi) = oa_driven_field(s, &params, 0.0).unwrap();
                out[0] = dr;
                out[1] = dpsi;
            },
            t,
            h,
        )
        .unwrap();
        state = MeanFieldState { r: next[0], psi: next[1] };
    }
    let r_star = (1.0f64 - 2.0 / 4.0).sqrt();
    let fixed_point_err = (state.r - r_star).abs();

    // Finite-N tracking: N = 10^4 Cauchy oscillators vs the OA trajectory.
    let n = 10_000;
    let params = MeanFieldParams::new(1.0, 6.0, 1.0, 1.0).unwrap();
    let omega = sample_frequencies(FrequencyDist::Cauchy { omega0: 1.0, delta0: 1.0 }, n, 2024)
        .unwrap();
    let cfg = ReservoirConfig {
        n,
        m: 1,
        forcing: 6.0,
        input_scale: 1.0,
        omega,
        assignment: sample_assignment(n, 1, 2024).unwrap(),
        interaction: InteractionSpec::AllToAll { k: 1.0 },
    };
    // Delta initial state (all phases 0) lies on the OA manifold.
    let mut phases = PhaseVector::new(vec![0.0; n]).unwrap();
    let mut oa = MeanFieldState::new(1.0, 0.0).unwrap();
    let h = 0.02;
    let mut sup = 0.0f64;
    for i in 0..1000 {
        let t = i as f64 * h;
        let u = |t: f64| t; // ramp input u(t) = c t with c = 1
        let next_oa = kuramoto_rc::integrate::rk4_generic_step(
            &[oa.r, oa.psi],
            |tt, x, out| {
                let s = MeanFieldState { r: x[0].clamp(2e-12, 1.0), psi: x[1] };
                let (dr, dpsi) = oa_driven_field(s, &params, u(tt)).unwrap();
                out[0] = dr;
                out[1] = dpsi;
            },
            t,
            h,
        )
        .unwrap();
        let u_vec = [u(t)];
        let next = kuramoto_rc::integrate::rk4_generic_step(
            phases.as_slice(),
            |_, x, out| {
                let s = PhaseVector::new(x.to_vec()).unwrap();
                out.copy_from_slice(&driven_field(&s, &cfg, &u_vec).unwrap());
            },
            t,
            h,
        )
        .unwrap();
        phases = PhaseVector::new(next).unwrap();
        oa = MeanFieldState { r: next_oa[0], psi: next_oa[1] };
        let z = order_parameter(&phases);
        let diff = ((z.r * z.psi.cos() - oa.r * oa.psi.cos()).powi(2)
            + (z.r * z.psi.sin() - oa.r * oa.psi.sin()).powi(2))
        .sqrt();
        sup = sup.max(diff);
    }
    report(
        13,
        fixed_point_err <= 1e-8 && sup < 0.05,
        &format!(
            "OA fixed point |r - sqrt(0.5)| = {fixed_point_err:.1e} (<= 1e-8); \
             finite-N (10^4) tracking sup |z_N - z_OA| = {sup:.3} (< 0.05) over 20 time units"
        ),
    );
}

/// Single-linkage clustering of return-map points: two points are linked when
/// closer than `link`, and only clusters with at least `min_size` members
/// count as visually separable (stray transient points are ignored).
fn cluster_count_2d(points: &[(f64, f64)], link: f64, min_size: usize) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            if dx * dx + dy * dy < link * link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sizes = std::collections::HashMap::new();
    for i in 0..n {
        *sizes.entry(find(&mut parent, i)).or_insert(0usize) += 1;
    }
    sizes.values().filter(|&&s| s >= min_size).count()
}

// Recorded Rössler configuration (also shipped as configs/rossler.txt).
const ROSSLER_N: usize = 1000;
const ROSSLER_F: f64 = 37.545;
const ROSSLER_K: f64 = 20.680;
const ROSSLER_C: f64 = 1.159;
const ROSSLER_DIVISOR: f64 = 12.0;
const ROSSLER_SEED: u64 = 0;

#[test]
fn crit14_rossler_replication() {
    let schedule = StepSchedule::new(0.01, 0.01, 25.0, 200.0, 6.0).unwrap();
    let total = schedule.t_wipe + schedule.t_train + schedule.t_test + 2.0 * schedule.h_u;
    let series = tasks::rossler_series(
        &RosslerParams::default(),
        [1.0, 1.0, 1.0],
        0.5 * schedule.h_u,
        total,
        200.0,
    )
    .unwrap();
    let mut input = scale_input(&series, ROSSLER_DIVISOR).unwrap();
    input.t0 = -schedule.t_wipe;
    let cfg = reservoir(ROSSLER_N, 3, ROSSLER_F, ROSSLER_K, ROSSLER_C, 1.0, ROSSLER_SEED);
    let out =
        run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-5, ClosedLoopMode::Rk4Full)
            .unwrap();

    let spec = lyapunov_spectrum(&out.trained, 2, 150_000, TangentMode::Fast, 10).unwrap();
    let l1 = spec.exponents[0];

    // r_min return map over a long autonomous run.
    let r = analysis::autonomous_r_series(&out.trained, 60_000, ClosedLoopMode::Rk4Full).unwrap();
    let minima = local_extrema(&r, 0.0, schedule.h_res, ExtremaKind::Min, 1e-9);
    let pairs = return_map(&minima);
    let clusters = cluster_count_2d(&pairs, 0.005, 5);

    // Emit the return map CSV next to the test binary output.
    let mut csv = String::from("r_min_n,r_min_n1\n");
    for (a, b) in &pairs {
        csv.push_str(&format!("{a},{b}\n"));
    }
    let out_path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("rossler_return_map.csv");
    std::fs::write(&out_path, csv).unwrap();

    report(
        14,
        (l1 - 0.07).abs() <= 0.05 && clusters >= 4,
        &format!(
            "Rossler reservoir lambda_1 = {l1:.3} (0.07 +/- 0.05), r_min return map has \
             {clusters} clusters from {} minima (>= 4), CSV at {}",
            minima.values.len(),
            out_path.display()
        ),
    );
}
