//! `krc` — drive, sweep and analyze Kuramoto reservoir experiments.

mod artifacts;
mod commands;
mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use kuramoto_rc::error::{invalid, Error, Result};

use config::Config;

const USAGE: &str = "\
usage: krc <command> [options]

commands:
  run                 train + test one reservoir from a config file
  sweep               run a grid of (F, K) points from a config file
  scaling-benchmark   time closed-loop stepping against an O(N^2) reference
  analyze             post-hoc analyses on a finished run directory

options:
  --config PATH       config file (run, sweep)
  --out DIR           output directory (default .)
  --seed U64          override the config seed
  --threads N         worker thread count (default: all cores)
  --resume            sweep: keep finished points from an existing sweep.csv
  --run DIR           analyze: run directory holding config.txt etc.
  --analyses LIST     analyze: comma list of return-map,lyapunov,rotation
  --sizes LIST        benchmark: comma list of ascending N (default 500,1000,2000)
  --steps N           benchmark: linear-mode steps per size (default 50)
  --quadratic-steps N benchmark: O(N^2) reference steps per size (default 5)
";

struct Args {
    command: String,
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
    resume: bool,
    run_dir: Option<PathBuf>,
    analyses: String,
    sizes: Vec<usize>,
    steps: usize,
    quadratic_steps: usize,
}

fn parse_args(argv: &[String]) -> Result<Args> {
    let command = argv
        .first()
        .ok_or_else(|| invalid(format!("missing command\n{USAGE}")))?
        .clone();
    let mut args = Args {
        command,
        config: None,
        out: PathBuf::from("."),
        seed: None,
        threads: None,
        resume: false,
        run_dir: None,
        analyses: "return-map,lyapunov,rotation".to_string(),
        sizes: vec![500, 1000, 2000],
        steps: 50,
        quadratic_steps: 5,
    };
    let mut it = argv[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<&String> {
            it.next()
                .ok_or_else(|| invalid(format!("{name} needs a value")))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value("--config")?)),
            "--out" => args.out = PathBuf::from(value("--out")?),
            "--seed" => {
                args.seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| invalid("--seed must be a u64"))?,
                )
            }
            "--threads" => {
                args.threads = Some(
                    value("--threads")?
                        .parse()
                        .map_err(|_| invalid("--threads must be a positive integer"))?,
                )
            }
            "--resume" => args.resume = true,
            "--run" => args.run_dir = Some(PathBuf::from(value("--run")?)),
            "--analyses" => args.analyses = value("--analyses")?.clone(),
            "--sizes" => {
                args.sizes = value("--sizes")?
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| invalid("--sizes must be a comma list of integers"))?
            }
            "--steps" => {
                args.steps = value("--steps")?
                    .parse()
                    .map_err(|_| invalid("--steps must be a positive integer"))?
            }
            "--quadratic-steps" => {
                args.quadratic_steps = value("--quadratic-steps")?
                    .parse()
                    .map_err(|_| invalid("--quadratic-steps must be an integer"))?
            }
            other => return Err(invalid(format!("unknown flag '{other}'\n{USAGE}"))),
        }
    }
    Ok(args)
}

fn load_config(args: &Args) -> Result<Config> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| invalid("this command needs --config PATH"))?;
    let mut cfg = Config::load(path)?;
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    Ok(cfg)
}

fn dispatch(args: &Args) -> Result<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| invalid(format!("cannot set up {threads} threads: {e}")))?;
    }
    match args.command.as_str() {
        "run" => commands::cmd_run(&load_config(args)?, &args.out),
        "sweep" => commands::cmd_sweep(&load_config(args)?, &args.out, args.resume),
        "scaling-benchmark" => commands::cmd_bench(
            &args.sizes,
            args.steps,
            args.quadratic_steps,
            args.seed.unwrap_or(0),
            &args.out,
        ),
        "analyze" => {
            let run_dir = args
                .run_dir
                .as_ref()
                .ok_or_else(|| invalid("analyze needs --run DIR"))?;
            let out = if args.out == PathBuf::from(".") {
                run_dir.clone()
            } else {
                args.out.clone()
            };
            commands::cmd_analyze(run_dir, &args.analyses, &out)
        }
        other => Err(invalid(format!("unknown command '{other}'\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = parse_args(&argv).and_then(|args| dispatch(&args));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("krc: {e}");
            match e {
                Error::InvalidArgument(_) => ExitCode::from(2),
                Error::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}
