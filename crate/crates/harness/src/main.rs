use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdpg_core::agent::Algo;
use hdpg_harness::compare::{compare, parse_seeds};
use hdpg_harness::eval::{evaluate_checkpoint, write_report};
use hdpg_harness::plot::emit_plotdata;
use hdpg_harness::train::train;
use hdpg_harness::{EnvKind, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "hdpg", version, about = "Train and evaluate multi-head policy gradient agents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one agent and write metrics.csv, timing.csv and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Push-recovery success rates for a walker checkpoint.
    EvalPush {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Comma-separated magnitudes in newtons.
        #[arg(long)]
        magnitudes: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train each algorithm on each seed and compare final returns.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "ddpg,mhddpg,hdpg")]
        algos: String,
        /// `0..9` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smoothed per-component curves from a metrics file.
    Plot {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        window: usize,
    },
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad magnitude '{v}'")))
        })
        .collect()
}

fn run(cmd: Cmd) -> Result<(), HarnessError> {
    match cmd {
        Cmd::Train {
            config,
            seed,
            algo,
            env,
            episodes,
            out,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(a) = algo {
                cfg.agent.algo = a.parse::<Algo>()?;
            }
            if let Some(e) = env {
                cfg.env = e.parse::<EnvKind>()?;
            }
            if let Some(n) = episodes {
                cfg.episodes = n;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            let outcome = train(&cfg, Some(&cfg.out))?;
            println!(
                "trained {} episodes ({} steps), wrote {}",
                outcome.rows.len(),
                outcome.total_steps,
                cfg.out.join("metrics.csv").display()
            );
        }
        Cmd::EvalPush {
            checkpoint,
            magnitudes,
            trials,
            seed,
            out,
        } => {
            let mags = magnitudes.as_deref().map(parse_f64_list).transpose()?;
            let report = evaluate_checkpoint(&checkpoint, mags, trials, seed)?;
            let path = write_report(&report, &out)?;
            for r in &report.rows {
                println!("magnitude {} success {} rate {}", r.magnitude, r.fraction(), r.rate());
            }
            println!("wrote {}", path.display());
        }
        Cmd::Compare {
            config,
            algos,
            seeds,
            out,
        } => {
            let base = RunConfig::load(&config)?;
            let seeds = parse_seeds(&seeds)?;
            let mut configs = Vec::new();
            for a in algos.split(',') {
                let mut c = base.clone();
                c.agent.algo = a.trim().parse::<Algo>()?;
                configs.push((a.trim().to_string(), c));
            }
            let report = compare(&configs, &seeds, Some(&out))?;
            for l in &report.labels {
                println!("{l}: mean final return {}", report.mean(l).unwrap_or(f64::NAN));
            }
            for p in &report.pairs {
                println!(
                    "{} vs {}: wins {}-{} ties {} mean diff {} p(two-sided) {}",
                    p.a, p.b, p.wins_a, p.wins_b, p.ties, p.mean_diff, p.p_two_sided
                );
            }
        }
        Cmd::Plot {
            metrics,
            out,
            window,
        } => {
            let r = emit_plotdata(&metrics, &out, window)?;
            println!("wrote {} curves, skipped {} rows", r.files.len(), r.skipped_rows);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let msg = first
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .replace('"', "'");
            eprintln!("error kind=usage message=\"{msg}\"");
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::FAILURE
        }
    }
}
