//! Differential evolution, rand/1/bin with bound clamping and greedy selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optimizer::{clamp_into, rng_for, uniform_point, Objective, RunRecord, Tracker};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub population: usize,
    /// Crossover probability `Cr`.
    pub crossover: f64,
    /// Differential weight `F`.
    pub mutation: f64,
    pub budget: usize,
}

impl DeParams {
    /// Full generations after the initial population.
    pub fn generations(&self) -> usize {
        self.budget.saturating_sub(self.population) / self.population.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.population < 4 {
            return bad(format!("population must be at least 4, got {}", self.population));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return bad(format!("crossover must lie in [0, 1], got {}", self.crossover));
        }
        // F = 0 is allowed: the population then only recombines existing coordinates.
        if !(self.mutation >= 0.0 && self.mutation.is_finite()) {
            return bad(format!("mutation factor must be non-negative, got {}", self.mutation));
        }
        if self.budget < 2 * self.population {
            return bad(format!(
                "budget {} is below two generations of {}",
                self.budget, self.population
            ));
        }
        Ok(())
    }
}

/// Binomial crossover: each component comes from `mutant` with probability
/// `cr`, and component `j_rand` always does.
pub fn binomial_crossover<R: Rng + ?Sized>(
    rng: &mut R,
    target: &[f64],
    mutant: &[f64],
    cr: f64,
) -> Vec<f64> {
    let j_rand = rng.gen_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if j == j_rand || rng.gen::<f64>() < cr { m } else { t })
        .collect()
}

/// Three distinct indices in `0..n`, all different from `exclude`.
fn pick_three<R: Rng + ?Sized>(rng: &mut R, n: usize, exclude: usize) -> [usize; 3] {
    let mut out = [exclude; 3];
    for k in 0..3 {
        loop {
            let r = rng.gen_range(0..n);
            if r != exclude && !out[..k].contains(&r) {
                out[k] = r;
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct De {
    params: DeParams,
    execution: Execution,
}

impl De {
    pub fn new(params: DeParams) -> Result<Self> {
        params.validate()?;
        Ok(De {
            params,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn params(&self) -> &DeParams {
        &self.params
    }

    pub fn run<O: Objective + ?Sized>(&self, objective: &O, seed: u64) -> RunRecord {
        let p = &self.params;
        let (lower, upper) = (objective.lower(), objective.upper());
        let n = p.population;
        let mut rng = rng_for(seed);
        let mut tracker = Tracker::new();

        let mut pop: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, lower, upper)).collect();
        let mut fit = tracker.evaluate(objective, &pop, self.execution);
        tracker.end_iteration();

        while tracker.evaluations() < p.budget {
            // The last generation may be partial so the budget is met exactly.
            let count = n.min(p.budget - tracker.evaluations());
            let trials: Vec<Vec<f64>> = (0..count)
                .map(|i| {
                    let [r1, r2, r3] = pick_three(&mut rng, n, i);
                    let mutant: Vec<f64> = (0..lower.len())
                        .map(|j| pop[r1][j] + p.mutation * (pop[r2][j] - pop[r3][j]))
                        .collect();
                    let mut trial = binomial_crossover(&mut rng, &pop[i], &mutant, p.crossover);
                    clamp_into(&mut trial, lower, upper);
                    trial
                })
                .collect();
            let trial_fit = tracker.evaluate(objective, &trials, self.execution);
            for (i, (trial, f)) in trials.into_iter().zip(trial_fit).enumerate() {
                if f <= fit[i] {
                    pop[i] = trial;
                    fit[i] = f;
                }
            }
            tracker.end_iteration();
        }
        tracker.finish(seed)
    }
}
