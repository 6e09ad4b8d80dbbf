//! Throwaway: MG with two-clock semantics — one input sample per reservoir
//! step (input advances h_u = 0.816 of data time per h_res = 0.002 step).

use kuramoto_rc::dynamics::{
    sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec, ReservoirConfig,
};
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::run_experiment;
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{self, MackeyGlassParams, SignalSeries};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args[1].parse().unwrap();
    let eps: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1e-7);
    let mode = match args.get(2).map(|s| s.as_str()).unwrap_or("rk4rk1") {
        "rk4full" => ClosedLoopMode::Rk4Full,
        _ => ClosedLoopMode::Rk4Rk1,
    };

    let h_res = 0.002;
    let h_u = 0.816; // data-time advance per reservoir step
    let (n_wipe, n_train, n_test) = (2200usize, 1000usize, 800usize);
    let schedule = StepSchedule::new(
        h_res,
        h_res,
        n_wipe as f64 * h_res,
        n_train as f64 * h_res,
        n_test as f64 * h_res,
    )
    .unwrap();

    // MG series on the data clock at h_u/2 cadence, then relabeled onto the
    // reservoir clock at h_res/2 per row.
    let data_half = 0.5 * h_u;
    let total_data = (n_wipe + n_train + n_test + 4) as f64 * h_u;
    let dec = (data_half / 0.004).round() as usize;
    let fine = tasks::mackey_glass_series(
        &MackeyGlassParams::default(),
        0.5,
        data_half / dec as f64,
        total_data,
        500.0,
    )
    .unwrap();
    let data = fine.decimate(dec).unwrap();
    let input = SignalSeries::new(-schedule.t_wipe, 0.5 * h_res, 1, data.values.clone()).unwrap();

    let cfg = ReservoirConfig {
        n: 1000,
        m: 1,
        forcing: 68.5,
        input_scale: 0.872,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma: 9.0 }, 1000, seed)
            .unwrap(),
        assignment: sample_assignment(1000, 1, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k: 52.2 },
    };
    match run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, eps, mode) {
        Ok(out) => {
            println!(
                "seed {seed} {mode:?} eps {eps:.0e}: nmse = {:.3e}  train = {:.3e}  max|pred| = {:.2e}",
                out.nmse, out.trained.train_nmse, out.prediction.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
            );
            for i in (0..out.prediction.values.len()).step_by(100) {
                println!(
                    "  i={i}: pred {:.4} true {:.4}",
                    out.prediction.values[i], out.truth.values[i]
                );
            }
        }
        Err(e) => println!("seed {seed}: failed: {e}"),
    }
}
