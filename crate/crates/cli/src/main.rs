//! `xqual`: train classifiers, evaluate explanation quality, and report the
//! performance/explainability frontier from one JSON config.
//!
//! Exit codes: 0 success, 1 partial failure or runtime error, 2 configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use xqual_core::pipeline::{
    adapter_check, frontier_report, run_evaluate, run_frontier, run_perturb, run_train, write_frontier, FrontierConfig,
    RunConfig,
};
use xqual_core::synth::{write_synthetic, SynthConfig};
use xqual_core::tradeoff::CandidatePoint;
use xqual_core::Error;

#[derive(Parser)]
#[command(name = "xqual", version, about = "Explanation quality and performance tradeoffs for text classifiers")]
struct Cli {
    /// Worker threads for training and evaluation; never changes numeric output.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: config `output_dir`, then $XQUAL_OUT_DIR, then ./xqual-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured model and report test AUC.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate Lipschitz and infidelity for every (model, attribution) pair.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pareto frontier and weighted ranking from evaluation exports or a points file.
    Frontier {
        #[arg(long, required_unless_present = "points")]
        config: Option<PathBuf>,
        /// JSON array of candidate points; bypasses the run artifacts.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Dump perturbations of one document as TSV.
    Perturb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        doc_id: String,
        #[arg(short, long, default_value_t = 15)]
        n: usize,
        /// Write the TSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Handshake an external model adapter and validate its protocol.
    AdapterCheck {
        /// Feature dimension of the probe vector.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 30.0)]
        timeout_secs: f64,
        #[arg(trailing_var_arg = true, required = true, num_args = 1..)]
        command: Vec<String>,
    },
    /// Write a seeded synthetic train/test corpus.
    Synth {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n_docs: usize,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load_config(path: &Path, cli: &Cli) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output_dir());
    Ok((cfg, out))
}

/// Returns whether everything succeeded (`false` means partial failure).
fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Train { config } => {
            let (cfg, out) = load_config(config, cli)?;
            let summary = run_train(&cfg, &out)?;
            print!("{}", summary.table());
            for m in summary.models.iter().filter(|m| m.error.is_some()) {
                eprintln!("model {} failed: {}", m.id, m.error.as_deref().unwrap_or_default());
            }
            Ok(!summary.has_failures())
        }
        Command::Evaluate { config } => {
            let (cfg, out) = load_config(config, cli)?;
            let summary = run_evaluate(&cfg, &out)?;
            println!(
                "{:<32} {:>12} {:>12} {:>6}",
                "pair", "lipschitz", "infidelity", "empty"
            );
            for r in &summary.runs {
                let med = |s: Option<xqual_core::metrics::Summary>| s.map(|s| format!("{:.6}", s.median)).unwrap_or_else(|| "-".into());
                println!(
                    "{:<32} {:>12} {:>12} {:>6}",
                    format!("{}/{}", r.model_id, r.method.as_str()),
                    med(r.lipschitz_summary),
                    med(r.infidelity_summary),
                    r.n_empty_neighborhoods
                );
                if let Some(f) = &r.failure {
                    eprintln!("{f}");
                }
                for e in &r.errors {
                    eprintln!("{}/{} {} {}: {}", r.model_id, r.method.as_str(), e.metric, e.doc_id, e.message);
                }
            }
            for o in &summary.overlap {
                println!(
                    "overlap {} truth vs {}: mean top-{} overlap {:.2} over {} docs",
                    o.model_id,
                    o.surrogate.as_str(),
                    o.top_k,
                    o.mean_overlap,
                    o.n_docs
                );
            }
            for p in &summary.exports {
                println!("wrote {}", p.display());
            }
            Ok(!summary.has_failures())
        }
        Command::Frontier { config, points } => {
            let report = match points {
                Some(points) => {
                    let text = fs::read_to_string(points)
                        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", points.display())))?;
                    let pts: Vec<CandidatePoint> = serde_json::from_str(&text)
                        .map_err(|e| Failure::Config(format!("{}: {e}", points.display())))?;
                    let (fcfg, out) = match config {
                        Some(c) => {
                            let (cfg, out) = load_config(c, cli)?;
                            (cfg.frontier, out)
                        }
                        None => (
                            FrontierConfig::default(),
                            cli.out.clone().unwrap_or_else(|| {
                                std::env::var_os(xqual_core::pipeline::OUT_DIR_ENV)
                                    .map(PathBuf::from)
                                    .unwrap_or_else(|| PathBuf::from(xqual_core::pipeline::DEFAULT_OUT_DIR))
                            }),
                        ),
                    };
                    let report = frontier_report(&pts, &fcfg)?;
                    write_frontier(&report, fcfg.quality, &out.join("frontier"))?;
                    report
                }
                None => {
                    let (cfg, out) = load_config(config.as_deref().expect("clap requires config"), cli)?;
                    run_frontier(&cfg, &out)?
                }
            };
            print!("{}", report.text());
            Ok(true)
        }
        Command::Perturb { config, doc_id, n, output } => {
            let (cfg, out) = load_config(config, cli)?;
            let tsv = run_perturb(&cfg, &out, doc_id, *n)?;
            match output {
                Some(p) => fs::write(p, tsv)?,
                None => print!("{tsv}"),
            }
            Ok(true)
        }
        Command::AdapterCheck { dim, timeout_secs, command } => {
            if !timeout_secs.is_finite() || *timeout_secs <= 0.0 {
                return Err(Failure::Config("timeout must be positive".into()));
            }
            let check = adapter_check(command, *dim, Duration::from_secs_f64(*timeout_secs))?;
            println!("{}", serde_json::to_string(&check).map_err(|e| Failure::Runtime(e.to_string()))?);
            Ok(true)
        }
        Command::Synth { dir, n_docs } => {
            let cfg = SynthConfig {
                n_docs: *n_docs,
                seed: cli.seed.unwrap_or(0),
                ..SynthConfig::default()
            };
            let (train, test) = write_synthetic(dir, &cfg)?;
            println!("wrote {} and {}", train.display(), test.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
