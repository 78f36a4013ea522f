use std::fmt;

use serde::{Deserialize, Serialize};

use super::CampaignStats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankingInput {
    pub name: String,
    pub stats: CampaignStats,
    pub tuning_changes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub name: String,
    pub best_rank: f64,
    pub mean_rank: f64,
    /// Evaluations per run divided by 10 000.
    pub evaluations: f64,
    pub std_rank: f64,
    pub tuning_changes: f64,
    pub total: f64,
}

impl RankingRow {
    /// Row from precomputed columns; the total is their sum.
    pub fn from_columns(
        name: impl Into<String>,
        best_rank: f64,
        mean_rank: f64,
        evaluations: f64,
        std_rank: f64,
        tuning_changes: f64,
    ) -> Self {
        RankingRow {
            name: name.into(),
            best_rank,
            mean_rank,
            evaluations,
            std_rank,
            tuning_changes,
            total: best_rank + mean_rank + evaluations + std_rank + tuning_changes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub rows: Vec<RankingRow>,
}

/// Competition ranks (1 + number of strictly smaller values); missing values rank last.
fn ranks(values: &[Option<f64>]) -> Vec<f64> {
    let key = |v: &Option<f64>| v.unwrap_or(f64::INFINITY);
    values
        .iter()
        .map(|v| 1.0 + values.iter().filter(|o| key(o) < key(v)).count() as f64)
        .collect()
}

pub fn build_ranking(inputs: &[RankingInput]) -> Result<RankingTable> {
    if inputs.len() < 2 {
        return Err(Error::Usage("ranking needs at least two algorithms".into()));
    }
    let best = ranks(&inputs.iter().map(|i| i.stats.best).collect::<Vec<_>>());
    let mean = ranks(&inputs.iter().map(|i| i.stats.mean).collect::<Vec<_>>());
    let std = ranks(&inputs.iter().map(|i| i.stats.std).collect::<Vec<_>>());
    let rows = inputs
        .iter()
        .enumerate()
        .map(|(k, i)| {
            RankingRow::from_columns(
                i.name.clone(),
                best[k],
                mean[k],
                i.stats.evaluations_per_run / 10_000.0,
                std[k],
                i.tuning_changes,
            )
        })
        .collect();
    Ok(RankingTable { rows })
}

impl fmt::Display for RankingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16}{:>6}{:>6}{:>8}{:>6}{:>8}{:>8}",
            "algorithm", "best", "mean", "evals", "std", "tuning", "total"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<16}{:>6}{:>6}{:>8.2}{:>6}{:>8}{:>8.2}",
                r.name, r.best_rank, r.mean_rank, r.evaluations, r.std_rank, r.tuning_changes, r.total
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(best: f64, mean: f64, std: f64) -> CampaignStats {
        CampaignStats {
            runs: 30,
            feasible_runs: 30,
            infeasible_runs: 0,
            best: Some(best),
            mean: Some(mean),
            std: Some(std),
            evaluations_per_run: 2000.0,
            wall_time_secs: 0.0,
        }
    }

    #[test]
    fn ties_share_the_lower_rank() {
        assert_eq!(
            ranks(&[Some(1.0), Some(1.0), Some(0.5), None]),
            vec![2.0, 2.0, 1.0, 4.0]
        );
    }

    #[test]
    fn identical_stats_tie() {
        let inputs: Vec<RankingInput> = ["a", "b"]
            .iter()
            .map(|n| RankingInput {
                name: n.to_string(),
                stats: stats(1.0, 2.0, 0.1),
                tuning_changes: 3.0,
            })
            .collect();
        let t = build_ranking(&inputs).unwrap();
        assert_eq!(t.rows[0].total, t.rows[1].total);
        assert_eq!(t.rows[0].best_rank, 1.0);
        assert!((t.rows[0].total - 6.2).abs() < 1e-12);
    }

    #[test]
    fn needs_two_algorithms() {
        let one = [RankingInput {
            name: "a".into(),
            stats: stats(1.0, 1.0, 0.0),
            tuning_changes: 3.0,
        }];
        assert!(build_ranking(&one).is_err());
    }
}
