#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use tempobench::harness::{self, ExperimentConfig, ReportOptions};
use tempobench::io::{discover_datasets, load_dataset, save_dataset};
use tempobench::synth::{self, SynthKind, SynthSpec};
use tempobench::transforms::{self, AugmentSpec, DEFAULT_SIGMA};
use tempobench::{Error, Result};

#[derive(Parser)]
#[command(name = "tempobench", version, about = "Temporal-information tests for time series classification benchmarks")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one shared random permutation to every series of each dataset.
    Permute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pad every z-normalized series with random-walk head and tail segments.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        l_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a synthetic dataset.
    Synth {
        #[arg(long)]
        kind: SynthKind,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        train: usize,
        #[arg(long, default_value_t = 100)]
        test: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 3.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset name; defaults to `synth_<kind>_<seed>`.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `workers` from the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Statistical tables from a results file.
    Stats {
        #[command(flatten)]
        args: ReportArgs,
    },
    /// Tables, SVG plots and a markdown summary from a results file.
    Report {
        #[command(flatten)]
        args: ReportArgs,
    },
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    k_std: f64,
    /// Holm-adjust the pairwise p-values behind the cliques.
    #[arg(long)]
    holm: bool,
}

impl ReportArgs {
    fn options(&self) -> Result<ReportOptions> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.k_std >= 0.0) {
            return Err(Error::Config(format!("k-std must be >= 0, got {}", self.k_std)));
        }
        Ok(ReportOptions {
            alpha: self.alpha,
            k_std: self.k_std,
            holm: self.holm,
        })
    }
}

fn datasets_in(input: &Path) -> Result<Vec<(PathBuf, String)>> {
    let found = discover_datasets(input)?;
    if found.is_empty() {
        return Err(Error::Config(format!("no datasets found in {}", input.display())));
    }
    Ok(found)
}

fn write_meta(out: &Path, name: &str, meta: serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&meta)? + "\n";
    std::fs::write(out.join(format!("{name}_meta.json")), text)?;
    Ok(())
}

fn permute(input: &Path, out: &Path, seed: u64) -> Result<()> {
    for (dir, name) in datasets_in(input)? {
        let ds = load_dataset(&dir, &name)?;
        let perm = transforms::make_permutation(ds.series_length, seed)?;
        let permuted = transforms::apply_shared_permutation(&ds, &perm)?;
        save_dataset(&permuted, out)?;
        write_meta(
            out,
            &name,
            json!({"transform": "permute", "seed": seed, "permutation": perm}),
        )?;
    }
    Ok(())
}

fn augment(input: &Path, out: &Path, spec: AugmentSpec) -> Result<()> {
    for (dir, name) in datasets_in(input)? {
        let ds = load_dataset(&dir, &name)?.z_normalized()?;
        let (augmented, record) = transforms::augment_dataset(&ds, &spec)?;
        save_dataset(&augmented, out)?;
        write_meta(
            out,
            &name,
            json!({
                "transform": "augment",
                "l_fraction": spec.l_fraction,
                "sigma": spec.sigma,
                "seed": spec.seed,
                "l": record.l,
                "train": record.train,
                "test": record.test,
            }),
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Permute { input, out, seed } => permute(&input, &out, seed)?,
        Command::Augment {
            input,
            out,
            l_fraction,
            sigma,
            seed,
        } => {
            if !(l_fraction > 0.0 && l_fraction <= 1.0) {
                return Err(Error::Config(format!("l-fraction must be in (0, 1], got {l_fraction}")));
            }
            let spec = AugmentSpec {
                l_fraction,
                sigma,
                seed,
            };
            augment(&input, &out, spec)?
        }
        Command::Synth {
            kind,
            n,
            train,
            test,
            classes,
            width,
            noise,
            amplitude,
            seed,
            name,
            out,
        } => {
            let spec = SynthSpec {
                kind,
                name,
                n,
                train_size: train,
                test_size: test,
                classes,
                width,
                noise,
                amplitude,
                seed,
            };
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            save_dataset(&synth::generate(&spec)?, &out)?;
        }
        Command::Run {
            config,
            out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let outcome = harness::run_experiment(&cfg)?;
            eprintln!(
                "{} of {} cells completed, {} skipped; results in {}",
                outcome.records.len(),
                outcome.cells,
                outcome.skipped.len(),
                outcome.results_path.display()
            );
            if outcome.all_failed() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Stats { args } => {
            let tables = harness::emit_stats(&args.results, &args.out, &args.options()?)?;
            for w in &tables.warnings {
                log::warn!("{w}");
            }
        }
        Command::Report { args } => {
            let tables = harness::emit_report(&args.results, &args.out, &args.options()?)?;
            for w in &tables.warnings {
                log::warn!("{w}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
