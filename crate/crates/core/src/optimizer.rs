//! Contract shared by every optimizer: the objective interface, run records and
//! best-so-far bookkeeping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::objective::Evaluation;

/// A bounded minimization problem.
///
/// Optimizers search the box `[lower, upper]`; `design` maps a search point to
/// the design actually evaluated (e.g. snapped to a discrete set).
pub trait Objective: Sync {
    fn dimension(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn evaluate(&self, x: &[f64]) -> Evaluation;

    fn design(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Plain function over a box, always feasible.
pub struct FnObjective<F> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, f: F) -> Self {
        assert_eq!(lower.len(), upper.len(), "bounds length mismatch");
        FnObjective { lower, upper, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.lower.len()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        Evaluation::unconstrained((self.f)(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub evaluations: usize,
    pub best_weight: f64,
    pub best_penalized: f64,
    pub best_design: Vec<f64>,
    pub feasible: bool,
    /// Best-so-far penalized value after each iteration, starting with the initial population.
    pub history: Vec<f64>,
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Evaluates a batch in order under the chosen execution strategy.
pub fn evaluate_batch<O: Objective + ?Sized>(
    objective: &O,
    points: &[Vec<f64>],
    execution: Execution,
) -> Vec<Evaluation> {
    execution.map(points, |x| objective.evaluate(x))
}

/// Tracks evaluations and the global best; produces the [`RunRecord`].
pub(crate) struct Tracker {
    evaluations: usize,
    best: Option<(Evaluation, Vec<f64>)>,
    best_feasible: Option<(Evaluation, Vec<f64>)>,
    history: Vec<f64>,
}

impl Tracker {
    pub fn new() -> Self {
        Tracker {
            evaluations: 0,
            best: None,
            best_feasible: None,
            history: Vec::new(),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Evaluates `points` as one batch, charging one evaluation each.
    pub fn evaluate<O: Objective + ?Sized>(
        &mut self,
        objective: &O,
        points: &[Vec<f64>],
        execution: Execution,
    ) -> Vec<f64> {
        let evals = evaluate_batch(objective, points, execution);
        self.evaluations += evals.len();
        let mut values = Vec::with_capacity(evals.len());
        for (x, ev) in points.iter().zip(evals) {
            values.push(ev.penalized);
            let better = match &self.best {
                None => true,
                Some((b, _)) => ev.penalized < b.penalized,
            };
            let better_feasible = ev.feasible
                && match &self.best_feasible {
                    None => true,
                    Some((b, _)) => ev.penalized < b.penalized,
                };
            if better_feasible {
                self.best_feasible = Some((ev.clone(), objective.design(x)));
            }
            if better {
                self.best = Some((ev, objective.design(x)));
            }
        }
        values
    }

    pub fn end_iteration(&mut self) {
        let v = self.best.as_ref().map_or(f64::INFINITY, |(e, _)| e.penalized);
        self.history.push(v);
    }

    pub fn finish(self, seed: u64) -> RunRecord {
        let (ev, design) = self
            .best_feasible
            .or(self.best)
            .expect("at least one evaluation");
        RunRecord {
            seed,
            evaluations: self.evaluations,
            best_weight: ev.weight,
            best_penalized: ev.penalized,
            best_design: design,
            feasible: ev.feasible,
            history: self.history,
        }
    }
}

/// Uniform point in the box.
pub(crate) fn uniform_point<R: rand::Rng>(rng: &mut R, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| l + (u - l) * rng.gen::<f64>())
        .collect()
}

pub(crate) fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &l), &u) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(l, u);
    }
}
