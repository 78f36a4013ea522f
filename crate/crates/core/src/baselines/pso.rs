//! Particle swarm optimization with constant inertia and per-component velocity clamp.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optimizer::{clamp_into, rng_for, uniform_point, Objective, RunRecord, Tracker};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub population: usize,
    pub inertia: f64,
    /// Cognitive coefficient (pull toward the personal best).
    pub c1: f64,
    /// Social coefficient (pull toward the global best).
    pub c2: f64,
    /// Per-variable speed limit; `None` uses each variable's upper bound.
    pub v_max: Option<Vec<f64>>,
    pub budget: usize,
}

impl PsoParams {
    pub fn new(population: usize, budget: usize) -> Self {
        PsoParams {
            population,
            inertia: 0.8,
            c1: 1.5,
            c2: 2.0,
            v_max: None,
            budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.population < 1 {
            return bad("population must be positive".into());
        }
        if self.budget < self.population {
            return bad(format!(
                "budget {} is smaller than the population {}",
                self.budget, self.population
            ));
        }
        if [self.inertia, self.c1, self.c2].iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("inertia and acceleration coefficients must be non-negative".into());
        }
        if let Some(v) = &self.v_max {
            if v.iter().any(|x| !(*x > 0.0)) {
                return bad("v_max must be positive".into());
            }
        }
        Ok(())
    }
}

/// Per-iteration speed diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PsoTrace {
    /// Largest `|v_j|` over the swarm after each update.
    pub max_speed: Vec<f64>,
    /// Largest `|v_j| / v_max_j` over the swarm after each update.
    pub max_speed_ratio: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Pso {
    params: PsoParams,
    execution: Execution,
}

impl Pso {
    pub fn new(params: PsoParams) -> Result<Self> {
        params.validate()?;
        Ok(Pso {
            params,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }

    pub fn run<O: Objective + ?Sized>(&self, objective: &O, seed: u64) -> RunRecord {
        self.run_traced(objective, seed).0
    }

    pub fn run_traced<O: Objective + ?Sized>(&self, objective: &O, seed: u64) -> (RunRecord, PsoTrace) {
        let p = &self.params;
        let (lower, upper) = (objective.lower(), objective.upper());
        let dim = lower.len();
        let v_max = p.v_max.clone().unwrap_or_else(|| upper.to_vec());
        assert_eq!(v_max.len(), dim, "v_max length must match the dimension");
        let n = p.population;
        let mut rng = rng_for(seed);
        let mut tracker = Tracker::new();
        let mut trace = PsoTrace::default();

        let mut pos: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, lower, upper)).collect();
        let mut vel = vec![vec![0.0; dim]; n];
        let fit = tracker.evaluate(objective, &pos, self.execution);
        let mut pbest = pos.clone();
        let mut pbest_fit = fit;
        let mut g = best_index(&pbest_fit);
        tracker.end_iteration();

        while tracker.evaluations() < p.budget {
            let count = n.min(p.budget - tracker.evaluations());
            let (mut speed, mut ratio) = (0.0f64, 0.0f64);
            for i in 0..count {
                for j in 0..dim {
                    let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                    let v = p.inertia * vel[i][j]
                        + p.c1 * r1 * (pbest[i][j] - pos[i][j])
                        + p.c2 * r2 * (pbest[g][j] - pos[i][j]);
                    vel[i][j] = v.clamp(-v_max[j], v_max[j]);
                    speed = speed.max(vel[i][j].abs());
                    ratio = ratio.max(vel[i][j].abs() / v_max[j]);
                    pos[i][j] += vel[i][j];
                }
                clamp_into(&mut pos[i], lower, upper);
            }
            trace.max_speed.push(speed);
            trace.max_speed_ratio.push(ratio);
            let fit = tracker.evaluate(objective, &pos[..count], self.execution);
            for (i, f) in fit.into_iter().enumerate() {
                if f < pbest_fit[i] {
                    pbest_fit[i] = f;
                    pbest[i].clone_from(&pos[i]);
                }
            }
            g = best_index(&pbest_fit);
            tracker.end_iteration();
        }
        (tracker.finish(seed), trace)
    }
}

fn best_index(values: &[f64]) -> usize {
    let mut b = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[b] {
            b = i;
        }
    }
    b
}
