use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mirror_coin::harness::{
    cmd_ground_truth, cmd_metrics, cmd_sample, cmd_sweep, parse_config_with, ExperimentConfig,
};
use mirror_coin::{Error, Result};

#[derive(Parser)]
#[command(name = "mirror-coin", version, about = "Learning-rate free particle samplers on constrained domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learning-rate sweep of the configured baseline plus its coin counterpart.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lrs: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw reference samples for the configured target.
    GroundTruth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; a `.meta.json` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Energy distance between two sample files.
    Metrics {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf, seed: Option<u64>, n: Option<usize>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut overrides = Vec::new();
    if let Some(s) = seed {
        overrides.push(("seed".to_string(), s.to_string()));
    }
    if let Some(n) = n {
        overrides.push(("n".to_string(), n.to_string()));
    }
    parse_config_with(&text, &overrides)
}

fn out_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cli.or_else(|| cfg.out.clone())
        .ok_or_else(|| Error::config("out", "no output directory; pass --out or set `out`"))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sample { config, seed, n, out } => {
            let cfg = load(&config, seed, n)?;
            let dir = out_dir(out, &cfg)?;
            let rec = cmd_sample(&cfg, &dir)?;
            for row in rec.trace.iter().filter(|r| r.iteration == rec.iterations) {
                println!("{} {} = {:.6e}", row.iteration, row.metric, row.value);
            }
            println!("wrote {}", dir.display());
        }
        Command::Sweep { config, lrs, seeds, n, out } => {
            let cfg = load(&config, None, n)?;
            let dir = out_dir(out, &cfg)?;
            let rows = cmd_sweep(&cfg, &lrs, &seeds, &dir)?;
            for r in &rows {
                let lr = r.lr.map_or("NA".to_string(), |v| v.to_string());
                let m = r.final_metric.map_or("NA".to_string(), |v| format!("{v:.6e}"));
                println!("{:<22} lr={:<8} seed={:<4} {} {}", r.sampler, lr, r.seed, m, r.status);
            }
            println!("wrote {}", dir.join("sweep.csv").display());
        }
        Command::GroundTruth { config, n, seed, out } => {
            let cfg = load(&config, None, None)?;
            let m = cmd_ground_truth(&cfg.target, n, seed, &out)?;
            println!("wrote {} rows to {}", m.nrows(), out.display());
        }
        Command::Metrics { a, b, out } => {
            let r = cmd_metrics(&a, &b, out.as_deref())?;
            println!("energy_distance = {:.16e}", r.value);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
