//! Spontaneous fruit-fly optimization.
//!
//! Each fly carries a planar pair (X, Y) per variable; its candidate value is
//! the smell concentration `1 / sqrt(X^2 + Y^2)`, clamped into bounds. Per
//! iteration the swarm is scattered around the best fly (reposition), flies
//! that got worse return to where they were (casting), the centre of
//! attraction follows the best fly, and every `kappa` iterations the search
//! radius contracts if the best value improved, otherwise the centre jumps to
//! a random fly (visual contrast).

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optimizer::{rng_for, Objective, RunRecord, Tracker};

/// How the reposition step scales its perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attraction {
    /// Average of the centre and a randomly drawn fly.
    Spontaneous,
    /// Centre alone; no random fly is drawn.
    BestOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfoaParams {
    pub population: usize,
    /// Iterations between phase decisions.
    pub kappa: usize,
    /// Initial search radius.
    pub m0: f64,
    /// Radius contraction factor applied on surging.
    pub contraction: f64,
    /// Number of steps in the quantized perturbation grid.
    pub resolution: u32,
    pub budget: usize,
    pub attraction: Attraction,
}

impl SfoaParams {
    pub fn new(population: usize, budget: usize) -> Self {
        SfoaParams {
            population,
            kappa: 5,
            m0: 0.95,
            contraction: 0.9,
            resolution: 10,
            budget,
            attraction: Attraction::Spontaneous,
        }
    }

    /// Comparison configuration: long delay, finer grid, centre-only attraction.
    pub fn best_only(population: usize, budget: usize) -> Self {
        SfoaParams {
            population,
            kappa: 320,
            m0: 0.95,
            contraction: 0.92,
            resolution: 50,
            budget,
            attraction: Attraction::BestOnly,
        }
    }

    pub fn max_iterations(&self) -> usize {
        self.budget / self.population.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.population < 2 {
            return bad(format!("population must be at least 2, got {}", self.population));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad(format!("contraction must lie in (0, 1), got {}", self.contraction));
        }
        if self.kappa < 1 || self.resolution < 1 {
            return bad("kappa and resolution must be at least 1".into());
        }
        if !(self.m0 > 0.0) {
            return bad(format!("initial radius must be positive, got {}", self.m0));
        }
        if self.budget < self.population {
            return bad(format!(
                "budget {} is smaller than the population {}",
                self.budget, self.population
            ));
        }
        Ok(())
    }
}

/// Uniform draw from the grid `{2q/n - 1 : q = 0..=n}`.
pub fn quantized_uniform<R: Rng + ?Sized>(rng: &mut R, resolution: u32) -> f64 {
    let q = rng.gen_range(0..=resolution);
    2.0 * f64::from(q) / f64::from(resolution) - 1.0
}

/// Smell concentration `1 / sqrt(X^2 + Y^2)`; infinite at the origin.
pub fn smell(x: f64, y: f64) -> f64 {
    let d = x.hypot(y);
    if d < 1e-12 {
        f64::INFINITY
    } else {
        1.0 / d
    }
}

/// Phase decision taken by [`SwarmState::phase_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Waiting,
    Surge,
    Contrast,
}

#[derive(Debug, Clone)]
pub struct SwarmState {
    /// `x[i][j]`, `y[i][j]`: coordinates of fly `i` for variable `j`.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    prev_x: Vec<Vec<f64>>,
    prev_y: Vec<Vec<f64>>,
    prev_fitness: Vec<f64>,
    pub centre_x: Vec<f64>,
    pub centre_y: Vec<f64>,
    pub centre_fitness: f64,
    pub radius: f64,
    pub timer: usize,
    pub iteration: usize,
    centre_history: VecDeque<f64>,
    window: usize,
}

impl SwarmState {
    /// Places the centre so that its smell equals `x0` and scatters
    /// `population` flies around it. Fitness starts at infinity.
    pub fn init<R: Rng + ?Sized>(params: &SfoaParams, x0: &[f64], rng: &mut R) -> Self {
        let centre: Vec<f64> = x0.iter().map(|&v| 1.0 / (v * std::f64::consts::SQRT_2)).collect();
        let mut x = Vec::with_capacity(params.population);
        let mut y = Vec::with_capacity(params.population);
        for _ in 0..params.population {
            let mut xi = Vec::with_capacity(centre.len());
            let mut yi = Vec::with_capacity(centre.len());
            for &c in &centre {
                xi.push(c * (1.0 + params.m0 * quantized_uniform(rng, params.resolution)));
                yi.push(c * (1.0 + params.m0 * quantized_uniform(rng, params.resolution)));
            }
            x.push(xi);
            y.push(yi);
        }
        let n = params.population;
        SwarmState {
            prev_x: x.clone(),
            prev_y: y.clone(),
            x,
            y,
            fitness: vec![f64::INFINITY; n],
            prev_fitness: vec![f64::INFINITY; n],
            centre_x: centre.clone(),
            centre_y: centre,
            centre_fitness: f64::INFINITY,
            radius: params.m0,
            timer: 0,
            iteration: 0,
            centre_history: VecDeque::with_capacity(params.kappa + 1),
            window: params.kappa + 1,
        }
    }

    pub fn population(&self) -> usize {
        self.x.len()
    }

    /// Candidate designs: per-fly smell values clamped into bounds.
    pub fn designs(&self, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| {
                (0..xi.len())
                    .map(|j| smell(xi[j], yi[j]).clamp(lower[j], upper[j]))
                    .collect()
            })
            .collect()
    }

    pub fn commit(&mut self, fitness: Vec<f64>) {
        assert_eq!(fitness.len(), self.population(), "one fitness per fly");
        self.fitness = fitness;
    }

    /// Index of the best current fly; first one on ties.
    pub fn best_fly(&self) -> usize {
        let mut best = 0;
        for (i, &f) in self.fitness.iter().enumerate() {
            if f < self.fitness[best] {
                best = i;
            }
        }
        best
    }

    /// Restores every fly whose fitness got strictly worse than last iteration.
    pub fn casting_revert(&mut self) {
        for i in 0..self.population() {
            if self.fitness[i] > self.prev_fitness[i] {
                self.x[i].clone_from(&self.prev_x[i]);
                self.y[i].clone_from(&self.prev_y[i]);
                self.fitness[i] = self.prev_fitness[i];
            }
        }
    }

    /// Moves the centre to the best fly if strictly better; records the centre value.
    pub fn select_centre(&mut self) -> bool {
        let b = self.best_fly();
        let moved = self.fitness[b] < self.centre_fitness;
        if moved {
            self.centre_x.clone_from(&self.x[b]);
            self.centre_y.clone_from(&self.y[b]);
            self.centre_fitness = self.fitness[b];
        }
        if self.centre_history.len() == self.window {
            self.centre_history.pop_front();
        }
        self.centre_history.push_back(self.centre_fitness);
        moved
    }

    /// Advances the response timer and, once it exceeds `kappa`, either
    /// contracts the radius (best improved on the centre value `kappa`
    /// iterations ago) or jumps the centre to a uniformly drawn fly.
    pub fn phase_step<R: Rng + ?Sized>(&mut self, params: &SfoaParams, rng: &mut R) -> Phase {
        self.iteration += 1;
        self.timer += 1;
        if self.timer <= params.kappa {
            return Phase::Waiting;
        }
        self.timer = 0;
        let window_start = self.centre_history.front().copied().unwrap_or(f64::INFINITY);
        let best = self.fitness[self.best_fly()];
        if best < window_start {
            self.radius *= params.contraction;
            Phase::Surge
        } else {
            let r = rng.gen_range(0..self.population());
            self.centre_x.clone_from(&self.x[r]);
            self.centre_y.clone_from(&self.y[r]);
            self.centre_fitness = self.fitness[r];
            Phase::Contrast
        }
    }

    /// Scatters every fly around the best one. Previous positions are kept for
    /// [`casting_revert`](Self::casting_revert).
    pub fn reposition<R: Rng + ?Sized>(&mut self, params: &SfoaParams, rng: &mut R) {
        let n = self.population();
        let b = self.best_fly();
        let (bx, by) = (self.x[b].clone(), self.y[b].clone());
        std::mem::swap(&mut self.prev_x, &mut self.x);
        std::mem::swap(&mut self.prev_y, &mut self.y);
        self.prev_fitness.clone_from(&self.fitness);
        let m = self.radius;
        for i in 0..n {
            for j in 0..bx.len() {
                let (sx, sy) = match params.attraction {
                    Attraction::Spontaneous => {
                        let r = rng.gen_range(0..n);
                        (
                            0.5 * (self.centre_x[j] + self.prev_x[r][j]),
                            0.5 * (self.centre_y[j] + self.prev_y[r][j]),
                        )
                    }
                    Attraction::BestOnly => (self.centre_x[j], self.centre_y[j]),
                };
                self.x[i][j] = bx[j] + sx * m * quantized_uniform(rng, params.resolution);
                self.y[i][j] = by[j] + sy * m * quantized_uniform(rng, params.resolution);
            }
        }
    }
}

/// Per-iteration diagnostics of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SfoaTrace {
    pub radius: Vec<f64>,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone)]
pub struct Sfoa {
    params: SfoaParams,
    execution: Execution,
}

impl Sfoa {
    pub fn new(params: SfoaParams) -> Result<Self> {
        params.validate()?;
        Ok(Sfoa {
            params,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn params(&self) -> &SfoaParams {
        &self.params
    }

    pub fn run<O: Objective + ?Sized>(&self, objective: &O, seed: u64) -> RunRecord {
        self.run_traced(objective, seed).0
    }

    pub fn run_traced<O: Objective + ?Sized>(&self, objective: &O, seed: u64) -> (RunRecord, SfoaTrace) {
        let p = &self.params;
        let (lower, upper) = (objective.lower(), objective.upper());
        let x0: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
        let mut rng = rng_for(seed);
        let mut tracker = Tracker::new();
        let mut trace = SfoaTrace::default();

        let mut swarm = SwarmState::init(p, &x0, &mut rng);
        let fitness = tracker.evaluate(objective, &swarm.designs(lower, upper), self.execution);
        swarm.commit(fitness);
        swarm.select_centre();
        tracker.end_iteration();
        trace.radius.push(swarm.radius);

        while tracker.evaluations() + p.population <= p.budget {
            swarm.reposition(p, &mut rng);
            let fitness = tracker.evaluate(objective, &swarm.designs(lower, upper), self.execution);
            swarm.commit(fitness);
            swarm.casting_revert();
            swarm.select_centre();
            let phase = swarm.phase_step(p, &mut rng);
            tracker.end_iteration();
            trace.radius.push(swarm.radius);
            trace.phases.push(phase);
        }
        (tracker.finish(seed), trace)
    }
}
