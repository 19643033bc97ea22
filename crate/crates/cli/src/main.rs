//! `temcodec`: regenerate the integrate-and-fire codec experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 pipeline error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use temcodec::experiments::{
    bounds_csv, counts_csv, density_csv, rd_csv, roundtrip, write_artifact, ExperimentConfig,
    Workspace,
};
use temcodec::signal::BandlimitedSignal;
use temcodec::tem::Scheme;

const THREADS_VAR: &str = "TEMCODEC_THREADS";

#[derive(Parser)]
#[command(
    name = "temcodec",
    version,
    about = "Integrate-and-fire time encoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic and empirical interval bounds per scheme (bounds.csv).
    Bounds(Common),
    /// Mean firing counts and oversampling (counts.csv).
    Counts(Common),
    /// Firing-rate spreads per signal (density.csv).
    Density(Common),
    /// NMSE versus bit budget under UQ and NUQ (rd.csv).
    Rd(Common),
    /// Encode one signal, write a .tem1 stream, decode and score it.
    Roundtrip {
        /// Signal JSON as written by the library.
        signal: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to these schemes (lb, vb, conv).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    /// Bit budgets; roundtrip uses the first (default 8).
    #[arg(long, value_delimiter = ',')]
    bits: Vec<u8>,
}

enum Failure {
    Config(String),
    Pipeline(String),
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if !self.scheme.is_empty() {
            cfg.schemes = self.scheme.clone();
        }
        if !self.bits.is_empty() {
            cfg.bits = self.bits.clone();
        }
        cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn pipeline<T>(r: temcodec::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Pipeline(e.to_string()))
}

fn emit(cfg: &ExperimentConfig, name: &str, text: &str) -> Result<(), Failure> {
    let path = pipeline(write_artifact(&cfg.out_dir, name, text.as_bytes()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds(c) => {
            let cfg = c.config()?;
            let ws = pipeline(Workspace::new(&cfg))?;
            let rows = ws.bounds();
            emit(&cfg, "bounds.csv", &pipeline(bounds_csv(&cfg, &rows))?)?;
            if let Some(r) = rows.iter().find(|r| !r.contained) {
                return Err(Failure::Pipeline(format!(
                    "{} intervals left their analytic bounds",
                    r.scheme
                )));
            }
        }
        Command::Counts(c) => {
            let cfg = c.config()?;
            let ws = pipeline(Workspace::new(&cfg))?;
            emit(
                &cfg,
                "counts.csv",
                &pipeline(counts_csv(&cfg, &ws.counts()))?,
            )?;
        }
        Command::Density(c) => {
            let cfg = c.config()?;
            let ws = pipeline(Workspace::new(&cfg))?;
            let rows = pipeline(ws.density())?;
            emit(&cfg, "density.csv", &pipeline(density_csv(&cfg, &rows))?)?;
        }
        Command::Rd(c) => {
            let cfg = c.config()?;
            let ws = pipeline(Workspace::new(&cfg))?;
            let rows = pipeline(ws.rate_distortion())?;
            emit(&cfg, "rd.csv", &pipeline(rd_csv(&cfg, &rows))?)?;
        }
        Command::Roundtrip { signal, common } => {
            let scheme = common.scheme.first().copied().unwrap_or(Scheme::Lb);
            let bits = common.bits.first().copied().unwrap_or(8);
            let cfg = common.config()?;
            let text = std::fs::read_to_string(&signal)
                .map_err(|e| Failure::Config(format!("{}: {e}", signal.display())))?;
            let sig = BandlimitedSignal::from_json(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", signal.display())))?;
            let (bytes, recon, report) = pipeline(roundtrip(&cfg, &sig, scheme, bits))?;
            let path = pipeline(write_artifact(&cfg.out_dir, "roundtrip.tem1", &bytes))?;
            println!("wrote {}", path.display());
            emit(&cfg, "roundtrip_signal.json", &pipeline(recon.to_json())?)?;
            let metrics = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::Pipeline(e.to_string()))?;
            emit(&cfg, "roundtrip_metrics.json", &metrics)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{THREADS_VAR} must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
