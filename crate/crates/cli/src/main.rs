use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};
use trussopt::benchmarks::{geometry_report, load_problem, BUILTIN_IDS};
use trussopt::harness::{
    build_ranking, design_report, emit_report, read_report, run_campaign, Algorithm,
    ExperimentConfig, RankingInput, ReportFormat,
};
use trussopt::objective::Mode;
use trussopt::{Error, Result};

#[derive(Parser)]
#[command(name = "trussopt", version = version(), about = "Truss sizing optimization campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded multi-run campaign and report statistics.
    Run(RunArgs),
    /// Check one design: weight, feasibility and governing responses.
    Eval(EvalArgs),
    /// Rank algorithms from campaign reports.
    Rank(RankArgs),
    /// Recompute published weights to validate problem geometry.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem id or path to a problem file.
    #[arg(long)]
    problem: String,
    /// sfoa, sfoa-bestonly, de or pso.
    #[arg(long)]
    algo: Algorithm,
    #[arg(long, default_value = "discrete")]
    mode: Mode,
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Base seed; run k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation budget per run (defaults to the problem's table).
    #[arg(long)]
    budget: Option<usize>,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Include convergence histories (CSV: `<stem>.history.csv` sidecar).
    #[arg(long)]
    histories: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "discrete")]
    mode: Mode,
    /// Comma-separated per-variable areas.
    #[arg(long, conflicts_with = "oracle", required_unless_present = "oracle")]
    design: Option<String>,
    /// Name of an embedded published design instead of --design.
    #[arg(long)]
    oracle: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    /// Campaign reports (CSV or JSON), one per algorithm.
    #[arg(required = true, num_args = 2..)]
    reports: Vec<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Problem to check; all built-in problems when omitted.
    #[arg(long)]
    problem: Option<String>,
}

fn version() -> &'static str {
    static VERSION: OnceLock<String> = OnceLock::new();
    VERSION.get_or_init(trussopt::version)
}

fn parse_design(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Usage(format!("`{}` is not a number", v.trim())))
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4}"))
}

fn run(args: RunArgs) -> Result<bool> {
    let mut cfg = ExperimentConfig::new(&args.problem, args.algo, args.mode)
        .runs(args.runs)
        .base_seed(args.seed);
    if let Some(b) = args.budget {
        cfg = cfg.budget(b);
    }
    let c = run_campaign(&cfg)?;
    let s = &c.stats;
    println!(
        "{} {} {}: {} runs, budget {}",
        c.config.problem, c.config.algorithm, c.config.mode, s.runs, c.budget
    );
    println!("feasible  {}/{}", s.feasible_runs, s.runs);
    println!("best      {}", fmt_opt(s.best));
    println!("mean      {}", fmt_opt(s.mean));
    println!("std       {}", fmt_opt(s.std));
    println!("evals/run {}", s.evaluations_per_run);
    println!("time      {:.2}s", s.wall_time_secs);
    if let Some(out) = &args.out {
        for path in emit_report(&c, out, args.format, args.histories)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(true)
}

fn eval(args: EvalArgs) -> Result<bool> {
    let problem = load_problem(&args.problem)?;
    let values = match (&args.design, &args.oracle) {
        (Some(d), _) => parse_design(d)?,
        (None, Some(name)) => problem
            .oracle(name, args.mode)
            .ok_or_else(|| Error::Usage(format!("no {} design named `{name}`", args.mode)))?
            .values
            .clone(),
        (None, None) => unreachable!("clap requires one of --design or --oracle"),
    };
    let report = design_report(&problem, &values, args.mode)?;
    print!("{report}");
    Ok(true)
}

fn rank(args: RankArgs) -> Result<bool> {
    let mut inputs = Vec::new();
    for path in &args.reports {
        let r = read_report(path)?;
        let name = r
            .metadata
            .get("algorithm")
            .cloned()
            .unwrap_or_else(|| path.display().to_string());
        let tuning_changes = name.parse::<Algorithm>().map_or(3.0, Algorithm::tuning_changes);
        inputs.push(RankingInput {
            name,
            stats: r.stats,
            tuning_changes,
        });
    }
    print!("{}", build_ranking(&inputs)?);
    Ok(true)
}

fn validate(args: ValidateArgs) -> Result<bool> {
    let ids: Vec<String> = match args.problem {
        Some(p) => vec![p],
        None => BUILTIN_IDS.iter().map(|s| s.to_string()).collect(),
    };
    let mut ok = true;
    for id in ids {
        let report = geometry_report(&load_problem(&id)?)?;
        for c in &report.checks {
            let status = if c.suspect {
                "skip"
            } else if c.passed {
                "ok"
            } else {
                "FAIL"
            };
            println!(
                "{:<6} {:<8} {:<18} {:<10} published {:>12} computed {:>14.4} rel {:.2e}",
                status, report.problem, c.source, c.mode, c.published, c.computed, c.relative_error
            );
        }
        ok &= report.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    trussopt::exec::configure_threads_from_env();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Eval(a) => eval(a),
        Command::Rank(a) => rank(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
