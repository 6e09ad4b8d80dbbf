//! Throwaway calibration driver for the Rossler configuration.

use kuramoto_rc::analysis::{
    autonomous_r_series, local_extrema, lyapunov_spectrum, return_map, ExtremaKind, TangentMode,
};
use kuramoto_rc::dynamics::{
    sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec, ReservoirConfig,
};
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::run_experiment;
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{self, scale_input, RosslerParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let f: f64 = args[1].parse().unwrap();
    let k: f64 = args[2].parse().unwrap();
    let c: f64 = args[3].parse().unwrap();
    let div: f64 = args[4].parse().unwrap();
    let seed: u64 = args[5].parse().unwrap();
    let t_train: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(200.0);
    let n = 1000;
    let h = 0.01;

    let schedule = StepSchedule::new(h, h, 25.0, t_train, 6.0).unwrap();
    let total = schedule.t_wipe + schedule.t_train + schedule.t_test + 2.0 * h;
    let series =
        tasks::rossler_series(&RosslerParams::default(), [1.0, 1.0, 1.0], 0.5 * h, total, 200.0)
            .unwrap();
    let mut input = scale_input(&series, div).unwrap();
    input.t0 = -schedule.t_wipe;
    let cfg = ReservoirConfig {
        n,
        m: 3,
        forcing: f,
        input_scale: c,
        omega: sample_frequencies(FrequencyDist::Normal { mu: 1.0, sigma: 1.0 }, n, seed).unwrap(),
        assignment: sample_assignment(n, 3, seed).unwrap(),
        interaction: InteractionSpec::AllToAll { k },
    };
    let out = match run_experiment(&cfg, ReadoutSpec::V3, &schedule, &input, 1e-5, ClosedLoopMode::Rk4Full) {
        Ok(o) => o,
        Err(e) => {
            println!("run failed: {e}");
            return;
        }
    };
    println!("nmse = {:.3e}  train_nmse = {:.3e}", out.nmse, out.trained.train_nmse);

    let r = match autonomous_r_series(&out.trained, 60_000, ClosedLoopMode::Rk4Full) {
        Ok(r) => r,
        Err(e) => {
            println!("r series failed: {e}");
            return;
        }
    };
    let minima = local_extrema(&r, 0.0, h, ExtremaKind::Min, 1e-9);
    let mut vals = minima.values.clone();
    vals.sort_by(f64::total_cmp);
    let clusters = if vals.is_empty() {
        0
    } else {
        1 + vals.windows(2).filter(|w| w[1] - w[0] > 0.01).count()
    };
    println!(
        "minima: {} clusters: {clusters} range: {:?}",
        vals.len(),
        (vals.first(), vals.last())
    );
    let mut gaps: Vec<(f64, f64)> =
        vals.windows(2).map(|w| (w[1] - w[0], w[0])).collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("largest gaps (gap, below): {:?}", &gaps[..gaps.len().min(8)]);
    let pairs = return_map(&minima);
    println!("return-map pairs: {}", pairs.len());
    let mut csv = String::from("a,b\n");
    for (a, b) in &pairs {
        csv.push_str(&format!("{a},{b}\n"));
    }
    std::fs::write("/tmp/rossler_pairs.csv", csv).unwrap();

    match lyapunov_spectrum(&out.trained, 2, 150_000, TangentMode::Fast, 10) {
        Ok(s) => println!("lambda = {:?} over T = {}", &s.exponents, s.horizon),
        Err(e) => println!("lyapunov failed: {e}"),
    }
}
