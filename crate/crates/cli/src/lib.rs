//! Command-line front end for `stegdist-core`.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run_command, CliError, Outcome};
pub use config::{Format, RunConfig, Settings, SEED_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "stegdist",
    version,
    about = "Cost maps, change distributions and simulated embedding for grayscale PGM images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write per-pixel cost maps
    Cost(CommonArgs),
    /// Solve for λ and write probability maps and heatmaps
    Probmap(CommonArgs),
    /// Simulate embedding and write stego images and reports
    Embed(CommonArgs),
    /// Tabulate cost functions against distribution models
    Compare(CommonArgs),
    /// Report maximum capacity per image
    Capacity(CommonArgs),
}

impl Command {
    pub fn parts(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Cost(a) => ("cost", a),
            Command::Probmap(a) => ("probmap", a),
            Command::Embed(a) => ("embed", a),
            Command::Compare(a) => ("compare", a),
            Command::Capacity(a) => ("capacity", a),
        }
    }
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// `key = value` configuration file; flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cost function: hill or suniward (comma list for compare)
    #[arg(long)]
    pub cost: Option<String>,
    /// Distribution model: exp, linear, uniform, poly, comma list or all
    #[arg(long)]
    pub model: Option<String>,
    /// Relative payload in bits per pixel
    #[arg(long)]
    pub alpha: Option<f64>,
    /// S-UNIWARD stabilising constant
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Images per embedding group
    #[arg(long = "group-n", value_name = "N")]
    pub group_n: Option<usize>,
    /// Sampling seed (falls back to $STEGDIST_SEED, then 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input PGM file or directory of PGM files; repeatable
    #[arg(long = "in", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Record wall-clock times in reports
    #[arg(long)]
    pub timing: bool,
    /// Also write cost maps as CSV
    #[arg(long)]
    pub csv: bool,
    /// Also write change maps as PGM
    #[arg(long)]
    pub changes: bool,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, String> {
        let mut s = Settings::default();
        let pairs = [
            ("cost", self.cost.clone()),
            ("model", self.model.clone()),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("sigma", self.sigma.map(|v| v.to_string())),
            ("group_n", self.group_n.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("timing", self.timing.then(|| "true".into())),
            ("csv", self.csv.then(|| "true".into())),
            ("changes", self.changes.then(|| "true".into())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        s.set_inputs(
            self.inputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        );
        Ok(s)
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self, env_seed: Option<&str>) -> Result<RunConfig, String> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        settings.merge(self.settings()?);
        settings.resolve(env_seed)
    }
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, args) = cli.command.parts();
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match args.resolve(env_seed.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("stegdist: {e}");
            return 1;
        }
    };
    match run_command(name, &cfg) {
        Ok(outcome) => {
            let report = outcome
                .report
                .map(|p| p.display().to_string())
                .unwrap_or_default();
            println!(
                "{name}: {} processed, {} flagged -> {report}",
                outcome.processed,
                outcome.flags.len()
            );
            if name == "compare" {
                println!(
                    "compare: detection error is not computed; proxy_* columns stand in for it"
                );
            }
            0
        }
        Err(CliError::Usage(e)) => {
            eprintln!("stegdist: {e}");
            1
        }
        Err(CliError::Fatal(e)) => {
            eprintln!("stegdist: {e}");
            2
        }
    }
}
