//! The four subcommands: run, sweep, scaling-benchmark, analyze.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use kuramoto_rc::analysis::{
    self, local_extrema, return_map, ExtremaKind, SweepOptions, SweepRecord, TangentMode,
};
use kuramoto_rc::dynamics::{driven_field_pairwise, random_initial_phases, PhaseVector};
use kuramoto_rc::error::{invalid, Result};
use kuramoto_rc::integrate::ClosedLoopMode;
use kuramoto_rc::pipeline::{
    read_weights, run_experiment, run_open_loop, write_weights, TrainedReservoir,
};
use kuramoto_rc::readout::{ReadoutSpec, ReadoutWeights};
use kuramoto_rc::tasks::SignalSeries;

use crate::artifacts::{strip_comments, write_artifact};
use crate::config::Config;
use crate::experiment::{self, Task};

fn series_csv(series: &SignalSeries) -> String {
    let mut buf = Vec::new();
    series.to_csv(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("CSV is ASCII")
}

// ---------------------------------------------------------------------------
// run

pub fn cmd_run(config: &Config, out: &Path) -> Result<()> {
    let exp = experiment::build(config)?;
    let (seed, hash) = (exp.seed, config.hash());
    let put = |name: &str, body: &str| write_artifact(&out.join(name), seed, hash, body);

    put("config.txt", &config.raw)?;

    let mut summary = String::new();
    let trained: TrainedReservoir;
    match &exp.task {
        Task::ClosedLoop { input } => {
            let outcome = run_experiment(
                &exp.cfg,
                exp.spec,
                &exp.schedule,
                input,
                exp.epsilon,
                exp.mode,
            )?;
            put("prediction.csv", &series_csv(&outcome.prediction))?;
            put("truth.csv", &series_csv(&outcome.truth))?;
            // Order parameter along the autonomous test run.
            let steps = exp.schedule.n_test.saturating_sub(1) * exp.schedule.substeps;
            let r = analysis::autonomous_r_series(&outcome.trained, steps, exp.mode)?;
            let mut r_csv = String::from("t,r\n");
            for (i, v) in r.iter().enumerate() {
                let t = exp.schedule.t_train + exp.schedule.h_res * i as f64;
                writeln!(r_csv, "{t},{v}").unwrap();
            }
            put("r_series.csv", &r_csv)?;
            writeln!(summary, "nmse = {}", outcome.nmse).unwrap();
            trained = outcome.trained;
        }
        Task::OpenLoop {
            input,
            targets,
            drive,
        } => {
            let outcome = run_open_loop(
                &exp.cfg,
                exp.spec,
                &exp.schedule,
                input,
                targets,
                exp.epsilon,
                *drive,
            )?;
            let t0 = exp.schedule.t_train;
            let pred = SignalSeries::new(t0, exp.schedule.h_u, 1, outcome.prediction.clone())?;
            let truth = SignalSeries::new(t0, exp.schedule.h_u, 1, outcome.truth.clone())?;
            put("prediction.csv", &series_csv(&pred))?;
            put("truth.csv", &series_csv(&truth))?;
            writeln!(summary, "nmse = {}", outcome.nmse).unwrap();
            trained = outcome.trained;
        }
    }

    let mut wbuf = Vec::new();
    write_weights(&trained.weights, seed, &mut wbuf).expect("in-memory write");
    put("weights.txt", &String::from_utf8(wbuf).expect("ASCII"))?;

    let mut state_csv = String::from("oscillator,theta\n");
    for (i, th) in trained.final_train_state.as_slice().iter().enumerate() {
        writeln!(state_csv, "{i},{th}").unwrap();
    }
    put("final_state.csv", &state_csv)?;

    writeln!(summary, "train_nmse = {}", trained.train_nmse).unwrap();
    writeln!(summary, "task = {}", config.require("task")?).unwrap();
    writeln!(summary, "readout = {}", exp.spec.name()).unwrap();
    writeln!(summary, "mode = {}", exp.mode.name()).unwrap();
    put("summary.txt", &summary)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

fn grid_axis(config: &Config, prefix: &str) -> Result<Vec<f64>> {
    let min = config.require_f64(&format!("{prefix}_min"))?;
    let count = config.require_usize(&format!("{prefix}_count"))?;
    if count == 0 {
        return Err(invalid(format!("{prefix}_count must be at least 1")));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let max = config.require_f64(&format!("{prefix}_max"))?;
    Ok((0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect())
}

fn point_key(f: f64, k: f64, c: f64) -> (u64, u64, u64) {
    (f.to_bits(), k.to_bits(), c.to_bits())
}

pub fn cmd_sweep(config: &Config, out: &Path, resume: bool) -> Result<()> {
    let seed = config.u64_or("seed", 0)?;
    let hash = config.hash();
    let task = config.require("task")?;
    let n = config.require_usize("n")?;
    let c = config.require_f64("c")?;
    let m = match task {
        "lorenz" | "rossler" => 3,
        "mackey_glass" => 1,
        "ks" => config.usize_or("m", 50)?,
        other => return Err(invalid(format!("task '{other}' is not sweepable"))),
    };
    let (schedule, h_u) = experiment::schedule_from(config)?;
    let input = experiment::task_input(task, config, &schedule, h_u, seed)?;

    let target = match (
        config.get("target_lambda1"),
        config.get("target_lambda2"),
        config.get("target_lambda3"),
    ) {
        (Some(a), Some(b), Some(cc)) => {
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| invalid("target_lambda* keys must be numbers"))
            };
            Some([parse(a)?, parse(b)?, parse(cc)?])
        }
        (None, None, None) => None,
        _ => return Err(invalid("provide all three target_lambda* keys or none")),
    };
    let opts = SweepOptions {
        spec: ReadoutSpec::parse(config.str_or("readout", "v3"))?,
        ridge_epsilon: config.require_f64("epsilon")?,
        mode: ClosedLoopMode::parse(config.str_or("mode", "rk4_full"))?,
        rotation_steps: config.usize_or("rotation_steps", 20_000)?,
        lyapunov_steps: config.usize_or("lyapunov_steps", 0)?,
        lyapunov_ortho_period: config.usize_or("lyapunov_ortho_period", 2)?,
        target,
        climate_epsilon: config.f64_or("climate_epsilon", 0.02)?,
        seed,
    };

    let mut points = Vec::new();
    for &f in &grid_axis(config, "f")? {
        for &k in &grid_axis(config, "k")? {
            points.push((f, k, c));
        }
    }

    let csv_path = out.join("sweep.csv");
    let mut records: Vec<SweepRecord> = Vec::new();
    if resume && csv_path.exists() {
        let text = std::fs::read_to_string(&csv_path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", csv_path.display())))?;
        records = analysis::read_sweep_csv(std::io::BufReader::new(text.as_bytes()))?;
    }
    let done: std::collections::HashSet<_> = records
        .iter()
        .map(|r| point_key(r.f, r.k, r.c))
        .collect();
    let todo: Vec<_> = points
        .iter()
        .copied()
        .filter(|&(f, k, cc)| !done.contains(&point_key(f, k, cc)))
        .collect();

    let flush = |records: &mut Vec<SweepRecord>| -> Result<()> {
        records.sort_by(|a, b| a.f.total_cmp(&b.f).then(a.k.total_cmp(&b.k)));
        let mut body = Vec::new();
        analysis::write_sweep_csv(records, &mut body).expect("in-memory write");
        write_artifact(&csv_path, seed, hash, &String::from_utf8(body).expect("ASCII"))
    };

    // Checkpoint after every chunk so an interrupted sweep resumes cheaply.
    for chunk in todo.chunks(16) {
        let new = analysis::sweep(
            chunk,
            |f, k, cc, s| experiment::reservoir_config(config, n, m, f, k, cc, s),
            &schedule,
            &input,
            &opts,
        );
        records.extend(new);
        flush(&mut records)?;
    }
    if todo.is_empty() {
        flush(&mut records)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scaling benchmark

fn bench_reservoir(n: usize, seed: u64) -> Result<(TrainedReservoir, PhaseVector)> {
    let config = Config::parse("")?;
    let cfg = experiment::reservoir_config(&config, n, 3, 37.5, 20.7, 1.16, seed)?;
    let spec = ReadoutSpec::V3;
    // Small nonzero weights keep the feedback path realistic without blow-up.
    let w = nalgebra::DMatrix::from_fn(3, spec.feature_count(n), |i, j| {
        1e-3 * ((i * 31 + j * 7) as f64).sin()
    });
    let trained = TrainedReservoir {
        cfg,
        weights: ReadoutWeights::new(w, spec, 1e-5),
        schedule: kuramoto_rc::integrate::StepSchedule::uniform(0.01, 0.01, 0.01, 0.01)?,
        final_train_state: random_initial_phases(n, seed),
        train_nmse: 0.0,
    };
    let state = trained.final_train_state.clone();
    Ok((trained, state))
}

fn time_linear(n: usize, steps: usize, seed: u64) -> Result<f64> {
    let (trained, mut state) = bench_reservoir(n, seed)?;
    for _ in 0..3 {
        state = ClosedLoopMode::Rk4Full.step(&state, &trained.cfg, &trained.weights, 0.01)?;
    }
    let start = Instant::now();
    for _ in 0..steps {
        state = ClosedLoopMode::Rk4Full.step(&state, &trained.cfg, &trained.weights, 0.01)?;
    }
    Ok(start.elapsed().as_secs_f64() / steps as f64)
}

/// Reference closed-loop RK4 step using the O(N^2) pairwise field.
fn quadratic_step(state: &PhaseVector, trained: &TrainedReservoir, h: f64) -> Result<PhaseVector> {
    let eval = |phases: &[f64]| -> Result<Vec<f64>> {
        let s = PhaseVector::new(phases.to_vec())?;
        let u_hat = trained.weights.predict(phases);
        driven_field_pairwise(&s, &trained.cfg, &u_hat)
    };
    let x = state.as_slice();
    let n = x.len();
    let k1 = eval(x)?;
    let mid = |k: &[f64], w: f64| -> Vec<f64> {
        (0..n).map(|i| x[i] + w * h * k[i]).collect()
    };
    let k2 = eval(&mid(&k1, 0.5))?;
    let k3 = eval(&mid(&k2, 0.5))?;
    let k4 = eval(&mid(&k3, 1.0))?;
    PhaseVector::new(
        (0..n)
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
            .collect(),
    )
}

fn time_quadratic(n: usize, steps: usize, seed: u64) -> Result<f64> {
    let (trained, mut state) = bench_reservoir(n, seed)?;
    state = quadratic_step(&state, &trained, 0.01)?;
    let start = Instant::now();
    for _ in 0..steps {
        state = quadratic_step(&state, &trained, 0.01)?;
    }
    let _ = state;
    Ok(start.elapsed().as_secs_f64() / steps as f64)
}

/// Least-squares fit y = a + b x; returns (intercept, slope, r2).
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(xx, yy)| (yy - a - b * xx).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yy| (yy - my).powi(2)).sum();
    (a, b, if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 })
}

pub fn cmd_bench(
    sizes: &[usize],
    steps: usize,
    quadratic_steps: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if sizes.is_empty() || steps == 0 {
        return Err(invalid("benchmark needs at least one size and one step"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("benchmark sizes must be strictly ascending"));
    }
    let mut body = String::from("mode,n,steps,seconds_per_step\n");
    let mut lin = Vec::new();
    for &n in sizes {
        let t = time_linear(n, steps, seed)?;
        writeln!(body, "linear,{n},{steps},{t}").unwrap();
        lin.push(t);
    }
    let mut quad = Vec::new();
    if quadratic_steps > 0 {
        for &n in sizes {
            let t = time_quadratic(n, quadratic_steps, seed)?;
            writeln!(body, "quadratic,{n},{quadratic_steps},{t}").unwrap();
            quad.push(t);
        }
    }
    if sizes.len() > 1 {
        let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        let (a, b, r2) = linear_fit(&xs, &lin);
        writeln!(body, "# linear fit: t = {a} + {b} * N, r2 = {r2}").unwrap();
        writeln!(body, "# linear ratio t(max)/t(min) = {}", lin.last().unwrap() / lin[0]).unwrap();
        if !quad.is_empty() {
            writeln!(body, "# quadratic ratio t(max)/t(min) = {}", quad.last().unwrap() / quad[0])
                .unwrap();
        }
    }
    write_artifact(&out.join("bench.csv"), seed, 0, &body)
}

// ---------------------------------------------------------------------------
// analyze

fn read_artifact(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| invalid(format!("missing run artifact {}: {e}", path.display())))?;
    Ok(strip_comments(&text))
}

fn load_trained(run_dir: &Path) -> Result<(TrainedReservoir, Config, ClosedLoopMode)> {
    let config = Config::parse(&read_artifact(run_dir, "config.txt")?)?;
    let exp = experiment::build(&config)?;
    let (weights, _seed) =
        read_weights(std::io::BufReader::new(read_artifact(run_dir, "weights.txt")?.as_bytes()))?;
    let state_text = read_artifact(run_dir, "final_state.csv")?;
    let mut phases = Vec::new();
    for line in state_text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let theta = line
            .split(',')
            .nth(1)
            .ok_or_else(|| invalid("final_state.csv row needs 'oscillator,theta'"))?
            .parse::<f64>()
            .map_err(|_| invalid("bad theta in final_state.csv"))?;
        phases.push(theta);
    }
    let trained = TrainedReservoir {
        cfg: exp.cfg,
        weights,
        schedule: exp.schedule,
        final_train_state: PhaseVector::new(phases)?,
        train_nmse: 0.0,
    };
    Ok((trained, config, exp.mode))
}

pub fn cmd_analyze(run_dir: &Path, analyses: &str, out: &Path) -> Result<()> {
    let (trained, config, mode) = load_trained(run_dir)?;
    let seed = config.u64_or("seed", 0)?;
    let hash = config.hash();
    for name in analyses.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "return-map" => {
                let steps = config.usize_or("analysis_horizon", 20_000)?;
                let r = analysis::autonomous_r_series(&trained, steps, mode)?;
                let minima = local_extrema(
                    &r,
                    trained.schedule.t_train,
                    trained.schedule.h_res,
                    ExtremaKind::Min,
                    config.f64_or("extrema_bound", 1e-7)?,
                );
                let mut body = String::from("r_min_n,r_min_n1\n");
                for (a, b) in return_map(&minima) {
                    writeln!(body, "{a},{b}").unwrap();
                }
                write_artifact(&out.join("return_map.csv"), seed, hash, &body)?;
            }
            "lyapunov" => {
                let steps = config.usize_or("lyapunov_steps", 20_000)?;
                let spec = analysis::lyapunov_spectrum(
                    &trained,
                    3,
                    steps,
                    TangentMode::Fast,
                    config.usize_or("lyapunov_ortho_period", 2)?,
                )?;
                let mut body = String::from("lambda1,lambda2,lambda3,horizon\n");
                writeln!(
                    body,
                    "{},{},{},{}",
                    spec.exponents[0], spec.exponents[1], spec.exponents[2], spec.horizon
                )
                .unwrap();
                write_artifact(&out.join("lyapunov.csv"), seed, hash, &body)?;
            }
            "rotation" => {
                let steps = config.usize_or("rotation_steps", 20_000)?;
                let rot = analysis::rotation_numbers(&trained, steps, mode)?;
                let mut body = String::from("oscillator,rho\n");
                for (i, rho) in rot.rho.iter().enumerate() {
                    writeln!(body, "{i},{rho}").unwrap();
                }
                write_artifact(&out.join("rotation.csv"), seed, hash, &body)?;
            }
            other => return Err(invalid(format!("unknown analysis '{other}'"))),
        }
    }
    Ok(())
}
