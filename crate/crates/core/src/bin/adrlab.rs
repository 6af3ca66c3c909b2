//! Command-line front end: train, eval, hist, bootstrap, compare.
//!
//! Exit codes: 0 ok, 1 runtime abort, 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{CommandFactory, Parser, Subcommand};

use adrlab::ddpg::DdpgAgent;
use adrlab::envs::EnvSpec;
use adrlab::eval::{compare, evaluate_generalization, sampling_histogram, EvalGrid, RunReport};
use adrlab::orchestrator::{run, Mode, RunConfig, RunOptions};
use adrlab::rng::derive_seed;
use adrlab::AdrError;

#[derive(Parser)]
#[command(name = "adrlab", version, about = "Active domain randomization toolkit")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write a run report.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = ["adr", "udr", "baseline"])]
        mode: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_timesteps: Option<u64>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Train a fresh agent with a saved sampler and discriminator.
    Bootstrap {
        #[arg(long)]
        config: PathBuf,
        /// Directory written by a previous run's `checkpoints/ensemble`.
        #[arg(long)]
        ensemble: Option<PathBuf>,
        /// A previous run's `checkpoints/discriminator.json`.
        #[arg(long)]
        discriminator: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_timesteps: Option<u64>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Evaluate a saved agent on the environment's generalization grid.
    Eval {
        /// Agent checkpoint directory.
        #[arg(long)]
        agent: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 25)]
        resets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write generalization.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Sampling histogram of a run's proposals.
    Hist {
        /// Run directory.
        run: PathBuf,
        /// Bucket width in timesteps (default: the run's eval cadence).
        #[arg(long)]
        bucket: Option<u64>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Align several runs and summarize per method.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        overwrite: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code == 2 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(code)
        }
    }
}

fn exit_code(e: &AdrError) -> u8 {
    match e {
        AdrError::Config(_) | AdrError::UnknownEnv(_) | AdrError::OutputExists(_) => 2,
        _ => 1,
    }
}

fn guard_output(dir: &Path, overwrite: bool) -> adrlab::Result<()> {
    let occupied = dir
        .read_dir()
        .map(|mut it| it.next().is_some())
        .unwrap_or(false);
    if occupied && !overwrite {
        return Err(AdrError::OutputExists(dir.to_path_buf()));
    }
    Ok(())
}

struct Overrides {
    seed: Option<u64>,
    out: Option<PathBuf>,
    max_timesteps: Option<u64>,
    overwrite: bool,
}

fn train(cfg: &RunConfig) -> adrlab::Result<()> {
    // Ctrl-C stops at the next iteration and keeps a partial report.
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = cancel.clone();
    if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed)) {
        eprintln!("warning: no interrupt handler: {e}");
    }
    let out = run(
        cfg,
        RunOptions {
            progress: true,
            cancel: Some(cancel),
        },
    )?;
    let r = &out.report;
    println!(
        "{} {} seed {}: {} steps, final grid mean return {:.3}",
        r.meta.mode,
        r.meta.env,
        r.meta.seed,
        r.meta.timesteps,
        r.grid_mean()
    );
    Ok(())
}

fn dispatch(cmd: Command) -> adrlab::Result<()> {
    match cmd {
        Command::Train {
            config,
            mode,
            seed,
            out,
            max_timesteps,
            overwrite,
        } => {
            let mode = mode.as_deref().map(Mode::parse).transpose()?;
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let cfg = apply_overrides(
                cfg,
                Overrides {
                    seed,
                    out,
                    max_timesteps,
                    overwrite,
                },
            )?;
            if cfg.mode == Mode::Bootstrap {
                return Err(AdrError::Config("use the `bootstrap` subcommand for bootstrap mode".into()));
            }
            train(&cfg)
        }
        Command::Bootstrap {
            config,
            ensemble,
            discriminator,
            seed,
            out,
            max_timesteps,
            overwrite,
        } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if ensemble.is_some() {
                cfg.ensemble_checkpoint = ensemble;
            }
            if discriminator.is_some() {
                cfg.discriminator_checkpoint = discriminator;
            }
            cfg.mode = Mode::Bootstrap;
            let cfg = apply_overrides(
                cfg,
                Overrides {
                    seed,
                    out,
                    max_timesteps,
                    overwrite,
                },
            )?;
            train(&cfg)
        }
        Command::Eval {
            agent,
            env,
            resets,
            seed,
            out,
            overwrite,
        } => {
            let spec = EnvSpec::by_name(&env)?;
            let agent = DdpgAgent::load_expecting(&agent, spec.obs_dim, spec.act_dim)?;
            let grid = EvalGrid::for_env(&spec, resets);
            let results = evaluate_generalization(&agent, &spec, &grid, derive_seed(seed, "eval"))?;
            println!("{:<32} {:>10} {:>10}", "cell", "mean", "std");
            for c in &results {
                println!(
                    "{:<32} {:>10.3} {:>10}",
                    c.cell.id,
                    c.mean(),
                    c.std().map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into())
                );
            }
            if let Some(dir) = out {
                guard_output(&dir, overwrite)?;
                std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                let path = dir.join("generalization.csv");
                let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
                let mut header = vec!["cell".to_string()];
                header.extend(spec.rand_space.names().into_iter().map(String::from));
                header.extend(["mean", "std", "n"].map(String::from));
                w.write_record(&header).map_err(|e| csv_err(&path, e))?;
                for c in &results {
                    let mut rec = vec![c.cell.id.clone()];
                    rec.extend(c.cell.physical.iter().map(f64::to_string));
                    rec.push(c.mean().to_string());
                    rec.push(c.std().map(|s| s.to_string()).unwrap_or_default());
                    rec.push(c.returns.len().to_string());
                    w.write_record(&rec).map_err(|e| csv_err(&path, e))?;
                }
                w.flush().map_err(|e| io_err(&path, e))?;
            }
            Ok(())
        }
        Command::Hist { run, bucket, bins } => {
            let report = RunReport::read(&run)?;
            let bucket = bucket.unwrap_or(report.meta.eval_every);
            let bins = bins.unwrap_or(report.meta.hist_bins);
            let rows = sampling_histogram(&report, bucket, bins)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r).map_err(|e| csv_err(Path::new("<stdout>"), e))?;
            }
            w.flush().map_err(|e| io_err(Path::new("<stdout>"), e))?;
            Ok(())
        }
        Command::Compare { runs, out, overwrite } => {
            let reports = runs.iter().map(RunReport::read).collect::<adrlab::Result<Vec<_>>>()?;
            let cmp = compare(&reports)?;
            print!("{}", cmp.table());
            if let Some(dir) = out {
                guard_output(&dir, overwrite)?;
                cmp.write(&dir)?;
            }
            Ok(())
        }
    }
}

fn apply_overrides(mut cfg: RunConfig, o: Overrides) -> adrlab::Result<RunConfig> {
    cfg.apply_env()?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.max_timesteps {
        cfg.max_timesteps = Some(t);
    }
    if o.out.is_some() {
        cfg.out_dir = o.out;
    }
    if let Some(dir) = &cfg.out_dir {
        guard_output(dir, o.overwrite)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn io_err(path: &Path, e: std::io::Error) -> AdrError {
    AdrError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> AdrError {
    AdrError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    }
}
