use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geogossip::experiment::{run_experiment, ExperimentConfig};
use geogossip::suite::{run_property_suite, SuiteSelector};
use geogossip::GossipError;

#[derive(Parser)]
#[command(name = "geogossip", version, about = "Random pairwise midpoint gossip on CAT(k) spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of seeded trials and write the series CSV and summary JSON.
    Run(RunArgs),
    /// Sample the geometric inequalities and report worst-case slacks.
    Check {
        /// cat0, catk or all
        #[arg(default_value = "all")]
        selector: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// `key = value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// euclidean, spd, sphere, so3 or tree
    #[arg(long)]
    space: Option<String>,
    /// Euclidean dimension
    #[arg(long)]
    dim: Option<String>,
    /// complete, path or file:PATH (edge list)
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    agents: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// midpoint, arithmetic or rsgd
    #[arg(long)]
    algo: Option<String>,
    /// Curvature bound; defaults to the space's own
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    record_every: Option<String>,
    /// Fraction of the horizon skipped before the slope fit
    #[arg(long)]
    window: Option<String>,
    /// Envelope coverage
    #[arg(long)]
    coverage: Option<String>,
    /// Longest initial word in the tree space
    #[arg(long)]
    tree_max_len: Option<String>,
    /// Move both agents in RSGD steps
    #[arg(long)]
    rsgd_symmetric: bool,
    /// Worker threads (defaults to the available parallelism)
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long, default_value = "series.csv")]
    csv: PathBuf,
    #[arg(long, default_value = "summary.json")]
    summary: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, GossipError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("space", &self.space),
            ("dim", &self.dim),
            ("graph", &self.graph),
            ("agents", &self.agents),
            ("iters", &self.iters),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("algo", &self.algo),
            ("kappa", &self.kappa),
            ("record_every", &self.record_every),
            ("window", &self.window),
            ("coverage", &self.coverage),
            ("tree_max_len", &self.tree_max_len),
            ("jobs", &self.jobs),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.rsgd_symmetric {
            cfg.rsgd_symmetric = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match args.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match run_experiment(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = out.write_files(&args.csv, &args.summary) {
        eprintln!("error: cannot write outputs: {e}");
        return ExitCode::from(1);
    }
    let fit = match out.summary.mean_curve_fit {
        Some(f) => format!("slope {:.6e}, R^2 {:.6}", f.slope, f.r2),
        None => "undefined".to_string(),
    };
    println!(
        "{} trials x {} iterations on {} ({}, {}): mean log {} fit {}",
        cfg.trials, cfg.iters, cfg.space, cfg.graph, cfg.algo, out.summary.fit_metric, fit
    );
    println!("wrote {} and {}", args.csv.display(), args.summary.display());
    ExitCode::SUCCESS
}

fn check(selector: &str, seed: u64) -> ExitCode {
    let selector: SuiteSelector = match selector.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_property_suite(selector, seed) {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Check { selector, seed } => check(&selector, seed),
    }
}
