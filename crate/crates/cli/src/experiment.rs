//! Translation from flat config files to core experiment objects and task
//! input series.

use std::sync::Arc;

use kuramoto_rc::dynamics::{
    sample_assignment, sample_frequencies, FrequencyDist, InteractionSpec, ReservoirConfig,
};
use kuramoto_rc::error::{invalid, Result};
use kuramoto_rc::graph;
use kuramoto_rc::integrate::{ClosedLoopMode, StepSchedule};
use kuramoto_rc::pipeline::DriveMode;
use kuramoto_rc::readout::ReadoutSpec;
use kuramoto_rc::tasks::{
    self, hold_series, scale_input, KsParams, LorenzParams, MackeyGlassParams, RosslerParams,
    SignalSeries,
};

use crate::config::Config;

/// Fully resolved experiment: reservoir, schedule and task data.
pub struct Experiment {
    pub cfg: ReservoirConfig,
    pub spec: ReadoutSpec,
    pub schedule: StepSchedule,
    pub mode: ClosedLoopMode,
    pub epsilon: f64,
    pub seed: u64,
    pub task: Task,
}

pub enum Task {
    /// Self-emulation: train on the input, then run closed-loop.
    ClosedLoop { input: SignalSeries },
    /// Drive-through system identification (NARMA10).
    OpenLoop {
        input: SignalSeries,
        targets: Vec<f64>,
        drive: DriveMode,
    },
}

fn frequency_dist(config: &Config) -> Result<FrequencyDist> {
    match config.str_or("omega_dist", "normal") {
        "normal" => Ok(FrequencyDist::Normal {
            mu: config.f64_or("omega_mu", 1.0)?,
            sigma: config.f64_or("omega_sigma", 1.0)?,
        }),
        "cauchy" => Ok(FrequencyDist::Cauchy {
            omega0: config.f64_or("omega_omega0", 1.0)?,
            delta0: config.f64_or("omega_delta0", 1.0)?,
        }),
        "bimodal" => Ok(FrequencyDist::Bimodal {
            mu1: config.require_f64("omega_mu1")?,
            mu2: config.require_f64("omega_mu2")?,
            sigma: config.f64_or("omega_sigma", 1.0)?,
        }),
        other => Err(invalid(format!("unknown omega_dist '{other}'"))),
    }
}

/// Sparse graphs get `k_scale = K / mean degree` so the total coupling per
/// oscillator stays comparable with the all-to-all `K/N` normalization.
fn graph_spec(adjacency: graph::Adjacency, k: f64) -> Result<InteractionSpec> {
    let d = adjacency.mean_degree();
    if d <= 0.0 {
        return Err(invalid("graph has no edges"));
    }
    Ok(InteractionSpec::Graph {
        adjacency: Arc::new(adjacency),
        k_scale: k / d,
    })
}

fn interaction(config: &Config, n: usize, k: f64, seed: u64) -> Result<InteractionSpec> {
    match config.str_or("interaction", "all_to_all") {
        "all_to_all" => Ok(InteractionSpec::AllToAll { k }),
        "sakaguchi" => Ok(InteractionSpec::Sakaguchi {
            k,
            alpha: config.require_f64("alpha")?,
        }),
        "erdos_renyi" => graph_spec(graph::erdos_renyi(n, config.require_f64("p")?, seed)?, k),
        "watts_strogatz" => graph_spec(
            graph::watts_strogatz(
                n,
                config.require_usize("ws_m")?,
                config.require_f64("p")?,
                seed,
            )?,
            k,
        ),
        "regular" => graph_spec(
            graph::regular_graph(n, config.require_usize("degree")?, seed)?,
            k,
        ),
        other => Err(invalid(format!("unknown interaction '{other}'"))),
    }
}

/// Builds the reservoir for given bifurcation parameters; shared by the run
/// and sweep commands so sweeps hold the same realization across the grid.
pub fn reservoir_config(
    config: &Config,
    n: usize,
    m: usize,
    f: f64,
    k: f64,
    c: f64,
    seed: u64,
) -> Result<ReservoirConfig> {
    let cfg = ReservoirConfig {
        n,
        m,
        forcing: f,
        input_scale: c,
        omega: sample_frequencies(frequency_dist(config)?, n, seed)?,
        assignment: sample_assignment(n, m, seed)?,
        interaction: interaction(config, n, k, seed)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn channel_count(task: &str, config: &Config) -> Result<usize> {
    match task {
        "lorenz" | "rossler" => Ok(3),
        "mackey_glass" | "narma10" => Ok(1),
        "ks" => config.usize_or("m", 50),
        other => Err(invalid(format!("unknown task '{other}'"))),
    }
}

/// Builds the reservoir-clock schedule from data-clock window durations.
/// Windows are given on the data clock (`h_u` per input sample); the
/// reservoir consumes one sample per `h_res` step, so the step counts carry
/// over to the reservoir clock. Returns the schedule and `h_u`.
pub fn schedule_from(config: &Config) -> Result<(StepSchedule, f64)> {
    let h_res = config.require_f64("h_res")?;
    let h_u = config.f64_or("h_u", h_res)?;
    let window_steps = |key: &str| -> Result<f64> {
        let t = config.require_f64(key)?;
        let n = (t / h_u).round();
        if n < 1.0 || (t / h_u - n).abs() > 1e-6 {
            return Err(invalid(format!(
                "{key} = {t} is not a positive multiple of h_u = {h_u}"
            )));
        }
        Ok(n)
    };
    let schedule = StepSchedule::new(
        h_res,
        h_res,
        window_steps("t_wipe")? * h_res,
        window_steps("t_train")? * h_res,
        window_steps("t_test")? * h_res,
    )?;
    Ok((schedule, h_u))
}

/// Generates the task input series on the data clock (`h_u / 2` cadence)
/// and relabels it onto the reservoir clock, where each reservoir step of
/// `h_res` consumes one input sample of `h_u`. When `h_u = h_res` the two
/// clocks coincide and no rescaling happens.
pub fn task_input(
    task: &str,
    config: &Config,
    schedule: &StepSchedule,
    h_u: f64,
    seed: u64,
) -> Result<SignalSeries> {
    let steps =
        schedule.n_wipe + schedule.n_train + schedule.n_test;
    let h_half = 0.5 * h_u;
    let total = (steps + 4) as f64 * h_u;
    let divisor = config.f64_or("input_divisor", 1.0)?;
    let mut series = match task {
        "lorenz" => tasks::lorenz_series(
            &LorenzParams::default(),
            [1.0, 1.0, 20.0],
            h_half,
            total,
            config.f64_or("transient", tasks::LORENZ_TRANSIENT)?,
        )?,
        "rossler" => tasks::rossler_series(
            &RosslerParams::default(),
            [1.0, 1.0, 1.0],
            h_half,
            total,
            config.f64_or("transient", 200.0)?,
        )?,
        "mackey_glass" => {
            let p = MackeyGlassParams::default();
            // Generate on a fine grid that divides both tau and h_u / 2.
            let dec = (h_half / 0.004).round().max(1.0) as usize;
            let h_fine = h_half / dec as f64;
            let fine = tasks::mackey_glass_series(
                &p,
                config.f64_or("mg_y0", 0.5)?,
                h_fine,
                total,
                config.f64_or("transient", 500.0)?,
            )?;
            fine.decimate(dec)?
        }
        "ks" => {
            let p = KsParams {
                l: config.f64_or("ks_l", 45.0)?,
                gridpoints: config.usize_or("ks_gridpoints", 128)?,
                probes: channel_count(task, config)?,
            };
            let y0 = tasks::ks_random_initial(&p, seed);
            tasks::ks_series(&p, &y0, h_half, total, config.f64_or("transient", 100.0)?)?
        }
        other => return Err(invalid(format!("task '{other}' has no generated input"))),
    };
    series = scale_input(&series, divisor)?;
    let mut rescaled =
        SignalSeries::new(-schedule.t_wipe, 0.5 * schedule.h_res, series.m, series.values)?;
    rescaled.scale = series.scale;
    Ok(rescaled)
}

pub fn build(config: &Config) -> Result<Experiment> {
    let seed = config.u64_or("seed", 0)?;
    let task = config.require("task")?.to_string();
    let n = config.require_usize("n")?;
    let f = config.require_f64("f")?;
    let k = config.require_f64("k")?;
    let c = config.require_f64("c")?;
    let epsilon = config.require_f64("epsilon")?;
    let (schedule, h_u) = schedule_from(config)?;
    let spec = ReadoutSpec::parse(config.require("readout")?)?;
    let mode = ClosedLoopMode::parse(config.str_or("mode", "rk4_full"))?;
    let m = channel_count(&task, config)?;
    let cfg = reservoir_config(config, n, m, f, k, c, seed)?;

    let task = if task == "narma10" {
        let count = schedule.n_wipe + schedule.n_train + schedule.n_test + 5;
        let (u, y) = tasks::narma10_series(seed, count)?;
        let targets =
            y[schedule.n_wipe..schedule.n_wipe + schedule.n_train + schedule.n_test].to_vec();
        let drive = match config.str_or("drive", "rk1") {
            "rk1" => DriveMode::Rk1,
            "rk4" => DriveMode::Rk4,
            other => return Err(invalid(format!("unknown drive scheme '{other}'"))),
        };
        Task::OpenLoop {
            input: hold_series(&u, -schedule.t_wipe, schedule.h_u)?,
            targets,
            drive,
        }
    } else {
        Task::ClosedLoop {
            input: task_input(&task, config, &schedule, h_u, seed)?,
        }
    };

    Ok(Experiment {
        cfg,
        spec,
        schedule,
        mode,
        epsilon,
        seed,
        task,
    })
}
