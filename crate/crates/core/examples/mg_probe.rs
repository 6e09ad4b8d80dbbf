//! Throwaway Mackey-Glass calibration driver.

use kuramoto_rc::dynamics::{
    sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec, ReservoirConfig,
};
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::{nmse, run_experiment};
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{self, MackeyGlassParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args[1].parse().unwrap();
    let sigma: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(9.0);
    let f: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(68.5);
    let k: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(52.2);
    let c: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.872);
    let eps: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(1e-7);

    let (h_res, h_u) = (0.002, 0.816);
    let (n_wipe, n_train, n_test) = (2200.0, 1000.0, 800.0);
    let schedule =
        StepSchedule::new(h_res, h_u, n_wipe * h_u, n_train * h_u, n_test * h_u).unwrap();
    let h_half = 0.5 * h_u;
    let total = schedule.t_wipe + schedule.t_train + schedule.t_test + 2.0 * h_u;
    let dec = (h_half / 0.004).round() as usize;
    let fine = tasks::mackey_glass_series(
        &MackeyGlassParams::default(),
        0.5,
        h_half / dec as f64,
        total,
        500.0,
    )
    .unwrap();
    let mut input = fine.decimate(dec).unwrap();
    input.t0 = -schedule.t_wipe;

    let cfg = ReservoirConfig {
        n: 1000,
        m: 1,
        forcing: f,
        input_scale: c,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma }, 1000, seed).unwrap(),
        assignment: sample_assignment(1000, 1, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k },
    };
    match run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, eps, ClosedLoopMode::Rk4Full) {
        Ok(out) => {
            println!(
                "seed {seed} sigma {sigma}: nmse = {:.3e}  train_nmse = {:.3e}",
                out.nmse, out.trained.train_nmse
            );
            // First few predicted vs true values to see divergence shape.
            let p = &out.prediction;
            let t = &out.truth;
            for i in (0..p.values.len().min(800)).step_by(100) {
                println!("  i={i}: pred {:.4} true {:.4}", p.values[i], t.values[i]);
            }
            let _ = nmse(p, t);
        }
        Err(e) => println!("seed {seed}: failed: {e}"),
    }
}
