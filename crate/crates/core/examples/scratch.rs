//! Throwaway calibration driver (not part of the library).

use kuramoto_rc::dynamics::{
    order_parameter, sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec,
    ReservoirConfig,
};
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::run_experiment;
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{self, scale_input, LorenzParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let f: f64 = args[1].parse().unwrap();
    let k: f64 = args[2].parse().unwrap();
    let seed: u64 = args[3].parse().unwrap();
    let n: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let t_train: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(100.0);
    let h: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0.01);

    let schedule = StepSchedule::new(h, h, 25.0, t_train, 2.0).unwrap();
    let total = schedule.t_wipe + schedule.t_train + schedule.t_test + 2.0 * h;
    let series = tasks::lorenz_series(
        &LorenzParams::default(),
        [1.0, 1.0, 20.0],
        0.5 * h,
        total,
        tasks::LORENZ_TRANSIENT,
    )
    .unwrap();
    let mut input = scale_input(&series, 30.92).unwrap();
    input.t0 = -schedule.t_wipe;
    let cfg = ReservoirConfig {
        n,
        m: 3,
        forcing: f,
        input_scale: 1.159,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma: 1.0 }, n, seed).unwrap(),
        assignment: sample_assignment(n, 3, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k },
    };
    let out = run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-5, ClosedLoopMode::Rk4Full);
    let out = match out {
        Ok(o) => o,
        Err(e) => {
            println!("run failed: {e}");
            return;
        }
    };
    println!("nmse = {:.3e}  train_nmse = {:.3e}", out.nmse, out.trained.train_nmse);

    // Long autonomous run: report sup|theta'| and r stats per window.
    let trained = &out.trained;
    let mut state = trained.final_train_state.clone();
    let window = (20.0 / h) as usize;
    for w in 0..10 {
        let mut sup_min = f64::INFINITY;
        let mut rs = Vec::new();
        for _ in 0..window {
            let next = match ClosedLoopMode::Rk4Full.step(&state, &trained.cfg, &trained.weights, h)
            {
                Ok(s) => s,
                Err(e) => {
                    println!("window {w}: step failed: {e}");
                    return;
                }
            };
            let rate = state
                .as_slice()
                .iter()
                .zip(next.as_slice())
                .map(|(a, b)| (b - a).abs() / h)
                .fold(0.0f64, f64::max);
            sup_min = sup_min.min(rate);
            rs.push(order_parameter(&next).r);
            state = next;
        }
        let rm = rs.iter().sum::<f64>() / rs.len() as f64;
        let rsd = (rs.iter().map(|v| (v - rm).powi(2)).sum::<f64>() / rs.len() as f64).sqrt();
        println!(
            "window {w} (t = {:.0}..{:.0}): min sup|theta'| = {sup_min:.3}, mean r = {rm:.3}, r sd = {rsd:.4}",
            w as f64 * 20.0,
            (w + 1) as f64 * 20.0
        );
    }
}
