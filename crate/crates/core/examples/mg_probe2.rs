//! Throwaway: MG closed loop with sample-and-hold feedback cadences.

use kuramoto_rc::dynamics::{
    driven_field, predict_at, sample_assignment, sample_frequencies, FrequencyDist,
    InteractionSpec, PhaseVector, ReservoirConfig,
};
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::run_experiment;
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{self, MackeyGlassParams};

fn rk4_held(state: &PhaseVector, cfg: &ReservoirConfig, u: &[f64], h: f64) -> PhaseVector {
    let n = state.as_slice().len();
    let eval = |s: &[f64]| -> Vec<f64> {
        let pv = PhaseVector::new(s.to_vec()).unwrap();
        driven_field(&pv, cfg, u).unwrap()
    };
    let s0 = state.as_slice();
    let k1 = eval(s0);
    let mid1: Vec<f64> = (0..n).map(|i| s0[i] + 0.5 * h * k1[i]).collect();
    let k2 = eval(&mid1);
    let mid2: Vec<f64> = (0..n).map(|i| s0[i] + 0.5 * h * k2[i]).collect();
    let k3 = eval(&mid2);
    let end: Vec<f64> = (0..n).map(|i| s0[i] + h * k3[i]).collect();
    let k4 = eval(&end);
    let next: Vec<f64> = (0..n)
        .map(|i| s0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    PhaseVector::new(next).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args[1].parse().unwrap();
    // hold_steps: reservoir steps between feedback refreshes.
    let hold_steps: usize = args[2].parse().unwrap();

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
        forcing: 68.5,
        input_scale: 0.872,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma: 9.0 }, 1000, seed)
            .unwrap(),
        assignment: sample_assignment(1000, 1, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k: 52.2 },
    };
    let out = run_experiment(
        &cfg,
        ReadoutSpec::V3,
        &schedule,
        &input,
        1e-7,
        ClosedLoopMode::Rk4Full,
    )
    .unwrap();
    println!(
        "seed {seed}: rk4full nmse = {:.3e}  train = {:.3e}",
        out.nmse, out.trained.train_nmse
    );

    // Re-run the test window with sample-and-hold feedback.
    let trained = &out.trained;
    let sub = schedule.substeps;
    let offset = ((-schedule.t_wipe - input.t0) / input.h).round() as usize;
    let mut state = trained.final_train_state.clone();
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    let mut u_hat = predict_at(&state, &trained.cfg, &trained.weights);
    let mut since = 0usize;
    for i in 0..schedule.n_test {
        pred.push(u_hat[0]);
        truth.push(input.sample(offset + 2 * (schedule.n_wipe + schedule.n_train + i))[0]);
        if i + 1 < schedule.n_test {
            for _ in 0..sub {
                if since % hold_steps == 0 {
                    u_hat = predict_at(&state, &trained.cfg, &trained.weights);
                }
                state = rk4_held(&state, &trained.cfg, &u_hat, schedule.h_res);
                since += 1;
            }
        }
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let _ = mean;
    let num: f64 = pred.iter().zip(&truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let den: f64 = truth.iter().map(|t| t * t).sum();
    println!("seed {seed}: hold({hold_steps}) nmse = {:.3e}", num / den);
    for i in (0..pred.len()).step_by(100) {
        println!("  i={i}: pred {:.4} true {:.4}", pred[i], truth[i]);
    }
}
