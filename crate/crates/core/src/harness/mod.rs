//! Seeded multi-run campaigns, statistics, design checks, rankings and reports.

mod ranking;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use ranking::{build_ranking, RankingInput, RankingRow, RankingTable};
pub use report::{
    emit_report, history_path, parse_csv_report, read_report, write_csv, write_json, ParsedReport,
    ReportFormat,
};

use crate::baselines::{De, Pso};
use crate::benchmarks::{load_problem, BenchmarkProblem};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::Axis;
use crate::objective::Mode;
use crate::optimizer::RunRecord;
use crate::sfoa::Sfoa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sfoa,
    SfoaBestOnly,
    De,
    Pso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Sfoa,
        Algorithm::SfoaBestOnly,
        Algorithm::De,
        Algorithm::Pso,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sfoa => "sfoa",
            Algorithm::SfoaBestOnly => "sfoa-bestonly",
            Algorithm::De => "de",
            Algorithm::Pso => "pso",
        }
    }

    /// Parameters retuned between problems: DE changes N, Cr, F, budget and
    /// generations; the others change population, budget and generations.
    pub fn tuning_changes(self) -> f64 {
        match self {
            Algorithm::De => 5.0,
            _ => 3.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown algorithm `{s}` (expected sfoa, sfoa-bestonly, de or pso)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub runs: usize,
    pub base_seed: u64,
    /// Overrides the problem's budget for the algorithm.
    pub budget: Option<usize>,
    #[serde(skip, default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(problem: impl Into<String>, algorithm: Algorithm, mode: Mode) -> Self {
        ExperimentConfig {
            problem: problem.into(),
            algorithm,
            mode,
            runs: 30,
            base_seed: 0,
            budget: None,
            execution: Execution::default(),
        }
    }

    pub fn runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn base_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(move |k| self.base_seed.wrapping_add(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub runs: usize,
    pub feasible_runs: usize,
    pub infeasible_runs: usize,
    /// Best, mean and sample standard deviation of feasible best-of-run weights.
    pub best: Option<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub evaluations_per_run: f64,
    pub wall_time_secs: f64,
}

impl CampaignStats {
    pub fn from_runs(runs: &[RunRecord], wall_time_secs: f64) -> Self {
        let feasible: Vec<f64> = runs.iter().filter(|r| r.feasible).map(|r| r.best_weight).collect();
        let n = feasible.len();
        let (best, mean, std) = if n == 0 {
            (None, None, None)
        } else {
            let mean = feasible.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (feasible.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let best = feasible.iter().copied().fold(f64::INFINITY, f64::min);
            (Some(best), Some(mean), Some(std))
        };
        let evaluations_per_run = if runs.is_empty() {
            0.0
        } else {
            runs.iter().map(|r| r.evaluations as f64).sum::<f64>() / runs.len() as f64
        };
        CampaignStats {
            runs: runs.len(),
            feasible_runs: n,
            infeasible_runs: runs.len() - n,
            best,
            mean,
            std,
            evaluations_per_run,
            wall_time_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub config: ExperimentConfig,
    /// Evaluation budget actually applied to every run.
    pub budget: usize,
    pub stats: CampaignStats,
    /// Sorted by seed.
    pub runs: Vec<RunRecord>,
}

/// Budget the campaign applies for `algorithm` on `problem`.
pub fn effective_budget(problem: &BenchmarkProblem, cfg: &ExperimentConfig) -> usize {
    cfg.budget.unwrap_or(match cfg.algorithm {
        Algorithm::Sfoa => problem.algorithms.sfoa.budget,
        Algorithm::SfoaBestOnly => problem.algorithms.cfoa.budget,
        Algorithm::De => problem.algorithms.de.budget,
        Algorithm::Pso => problem.algorithms.pso.budget,
    })
}

enum Runner {
    Sfoa(Sfoa),
    De(De),
    Pso(Pso),
}

impl Runner {
    fn build(problem: &BenchmarkProblem, cfg: &ExperimentConfig, budget: usize) -> Result<Runner> {
        Ok(match cfg.algorithm {
            Algorithm::Sfoa => Runner::Sfoa(Sfoa::new(crate::sfoa::SfoaParams {
                budget,
                ..problem.sfoa_params()
            })?),
            Algorithm::SfoaBestOnly => Runner::Sfoa(Sfoa::new(crate::sfoa::SfoaParams {
                budget,
                ..problem.best_only_params()
            })?),
            Algorithm::De => Runner::De(De::new(crate::baselines::DeParams {
                budget,
                ..problem.de_params()
            })?),
            Algorithm::Pso => Runner::Pso(Pso::new(crate::baselines::PsoParams {
                budget,
                ..problem.pso_params()
            })?),
        })
    }

    fn with_execution(self, e: Execution) -> Runner {
        match self {
            Runner::Sfoa(a) => Runner::Sfoa(a.with_execution(e)),
            Runner::De(a) => Runner::De(a.with_execution(e)),
            Runner::Pso(a) => Runner::Pso(a.with_execution(e)),
        }
    }

    fn run(&self, problem: &BenchmarkProblem, mode: Mode, seed: u64) -> Result<RunRecord> {
        let objective = problem.objective(mode)?;
        Ok(match self {
            Runner::Sfoa(a) => a.run(&objective, seed),
            Runner::De(a) => a.run(&objective, seed),
            Runner::Pso(a) => a.run(&objective, seed),
        })
    }
}

/// Runs `cfg.runs` independent seeded runs and aggregates them.
///
/// Runs are spread over the pool when there are several; a single run
/// parallelises its population evaluations instead. Results do not depend on
/// the execution strategy.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<Campaign> {
    let problem = load_problem(&cfg.problem)?;
    run_campaign_on(&problem, cfg)
}

pub fn run_campaign_on(problem: &BenchmarkProblem, cfg: &ExperimentConfig) -> Result<Campaign> {
    if cfg.runs == 0 {
        return Err(Error::Usage("run count must be at least 1".into()));
    }
    if !problem.supports_mode(cfg.mode) {
        return Err(Error::Usage(format!(
            "problem `{}` has no discrete set",
            problem.id
        )));
    }
    let budget = effective_budget(problem, cfg);
    let (outer, inner) = if cfg.runs > 1 {
        (cfg.execution, Execution::Sequential)
    } else {
        (Execution::Sequential, cfg.execution)
    };
    let runner = Runner::build(problem, cfg, budget)?.with_execution(inner);
    let seeds: Vec<u64> = cfg.seeds().collect();
    let start = Instant::now();
    let mut runs = outer
        .map(&seeds, |&seed| runner.run(problem, cfg.mode, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let wall = start.elapsed().as_secs_f64();
    runs.sort_by_key(|r| r.seed);
    Ok(Campaign {
        config: cfg.clone(),
        budget,
        stats: CampaignStats::from_runs(&runs, wall),
        runs,
    })
}

/// Worst response of one kind across all load cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstResponse {
    pub value: f64,
    pub limit: f64,
    /// `1 - |value| / limit`; negative when violated.
    pub margin: f64,
    pub case: String,
    /// Member index for stresses, node index for displacements (1-based).
    pub location: usize,
    pub axis: Option<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub problem: String,
    pub mode: Mode,
    pub weight: f64,
    pub penalized: f64,
    pub feasible: bool,
    pub mass_unit: String,
    pub stress: Option<WorstResponse>,
    pub displacement: Option<WorstResponse>,
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem     {} ({})", self.problem, self.mode)?;
        writeln!(f, "weight      {:.4} {}", self.weight, self.mass_unit)?;
        writeln!(f, "penalized   {:.4}", self.penalized)?;
        writeln!(f, "feasible    {}", if self.feasible { "yes" } else { "no" })?;
        match &self.stress {
            Some(s) => writeln!(
                f,
                "stress      {:.4} (limit {}, margin {:+.3}%) member {} case {}",
                s.value,
                s.limit,
                100.0 * s.margin,
                s.location,
                s.case
            )?,
            None => writeln!(f, "stress      unavailable (unstable structure)")?,
        }
        match &self.displacement {
            Some(d) => writeln!(
                f,
                "displacement {:.5} (limit {}, margin {:+.3}%) node {} {} case {}",
                d.value,
                d.limit,
                100.0 * d.margin,
                d.location,
                d.axis.map(|a| a.to_string()).unwrap_or_default(),
                d.case
            )?,
            None => writeln!(f, "displacement unconstrained")?,
        }
        Ok(())
    }
}

/// Evaluates a per-variable design and reports the governing responses.
pub fn evaluate_design(problem_id: &str, values: &[f64], mode: Mode) -> Result<DesignReport> {
    let problem = load_problem(problem_id)?;
    design_report(&problem, values, mode)
}

pub fn design_report(problem: &BenchmarkProblem, values: &[f64], mode: Mode) -> Result<DesignReport> {
    let eval = problem.evaluate_design(values, mode)?;
    let c = &problem.constraints;
    let (mut stress, mut displacement) = (None, None);
    if let Ok(result) = problem.analyze_design(values, mode) {
        let cases = problem.model.load_cases();
        let mut worst_s: Option<WorstResponse> = None;
        let mut worst_d: Option<WorstResponse> = None;
        for (k, case) in result.cases.iter().enumerate() {
            for (i, &s) in case.stresses.iter().enumerate() {
                if worst_s.as_ref().is_none_or(|w| s.abs() > w.value.abs()) {
                    worst_s = Some(WorstResponse {
                        value: s,
                        limit: c.stress_limit,
                        margin: 1.0 - s.abs() / c.stress_limit,
                        case: cases[k].name.clone(),
                        location: i + 1,
                        axis: None,
                    });
                }
            }
            if let Some(limit) = c.displacement_limit {
                for (u, &(node, axis)) in case.displacements.iter().zip(problem.model.free_dofs()) {
                    if !c.displacement_axes.contains(&axis) {
                        continue;
                    }
                    if worst_d.as_ref().is_none_or(|w| u.abs() > w.value.abs()) {
                        worst_d = Some(WorstResponse {
                            value: *u,
                            limit,
                            margin: 1.0 - u.abs() / limit,
                            case: cases[k].name.clone(),
                            location: node + 1,
                            axis: Some(axis),
                        });
                    }
                }
            }
        }
        stress = worst_s;
        displacement = worst_d;
    }
    Ok(DesignReport {
        problem: problem.id.clone(),
        mode,
        weight: eval.weight,
        penalized: eval.penalized,
        feasible: eval.feasible,
        mass_unit: problem.units.mass.clone(),
        stress,
        displacement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, w: f64, feasible: bool) -> RunRecord {
        RunRecord {
            seed,
            evaluations: 100,
            best_weight: w,
            best_penalized: if feasible { w } else { w + 1.0 },
            best_design: vec![1.0],
            feasible,
            history: vec![],
        }
    }

    #[test]
    fn stats_sample_std_excludes_infeasible() {
        let runs = [
            record(0, 2.0, true),
            record(1, 4.0, true),
            record(2, 1.0, false),
            record(3, 6.0, true),
        ];
        let s = CampaignStats::from_runs(&runs, 0.0);
        assert_eq!(s.feasible_runs, 3);
        assert_eq!(s.infeasible_runs, 1);
        assert_eq!(s.best, Some(2.0));
        assert_eq!(s.mean, Some(4.0));
        assert_eq!(s.std, Some(2.0));
    }

    #[test]
    fn single_run_stats() {
        let s = CampaignStats::from_runs(&[record(0, 3.5, true)], 0.0);
        assert_eq!((s.best, s.mean, s.std), (Some(3.5), Some(3.5), Some(0.0)));
        let none = CampaignStats::from_runs(&[record(0, 3.5, false)], 0.0);
        assert_eq!(none.best, None);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ga".parse::<Algorithm>().is_err());
    }
}
