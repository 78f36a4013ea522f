//! Penalized weight objective: design decoding, constraint violations and the
//! quadratic exterior penalty.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{AnalysisResult, Axis, TrussModel};
use crate::optimizer::Objective;

/// Violation assigned when the analyzer rejects a design as unstable.
pub const G_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Discrete,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Continuous => "continuous",
            Mode::Discrete => "discrete",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Mode::Continuous),
            "discrete" => Ok(Mode::Discrete),
            _ => Err(Error::Usage(format!(
                "unknown mode `{s}` (expected continuous or discrete)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    group_map: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    discrete: Option<Vec<f64>>,
}

impl DesignSpace {
    /// `group_map[member]` is the variable controlling that member's area.
    pub fn new(
        group_map: Vec<usize>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        discrete: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = lower.len();
        if m == 0 || upper.len() != m {
            return Err(Error::InvalidModel(format!(
                "bounds must be non-empty and equal length ({} lower, {} upper)",
                lower.len(),
                upper.len()
            )));
        }
        for j in 0..m {
            if !(lower[j] < upper[j]) || !(lower[j] > 0.0) || !upper[j].is_finite() {
                return Err(Error::InvalidModel(format!(
                    "variable {j}: need 0 < lower < upper, got [{}, {}]",
                    lower[j], upper[j]
                )));
            }
        }
        let mut used = vec![false; m];
        for (i, &g) in group_map.iter().enumerate() {
            if g >= m {
                return Err(Error::InvalidModel(format!(
                    "member {i} maps to variable {g} but there are only {m}"
                )));
            }
            used[g] = true;
        }
        if let Some(j) = used.iter().position(|u| !u) {
            return Err(Error::InvalidModel(format!("variable {j} controls no member")));
        }
        if let Some(s) = &discrete {
            if s.is_empty() || s.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidModel(
                    "discrete set must be non-empty and strictly increasing".into(),
                ));
            }
            let (lo, hi) = (s[0], s[s.len() - 1]);
            if lower.iter().any(|&l| l != lo) || upper.iter().any(|&u| u != hi) {
                return Err(Error::InvalidModel(format!(
                    "bounds must equal the discrete range [{lo}, {hi}]"
                )));
            }
        }
        Ok(DesignSpace {
            group_map,
            lower,
            upper,
            discrete,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.lower.len()
    }

    pub fn num_members(&self) -> usize {
        self.group_map.len()
    }

    pub fn group_map(&self) -> &[usize] {
        &self.group_map
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn discrete_set(&self) -> Option<&[f64]> {
        self.discrete.as_deref()
    }

    /// Members controlled by variable `j`.
    pub fn members_of(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.group_map
            .iter()
            .enumerate()
            .filter(move |(_, &g)| g == j)
            .map(|(i, _)| i)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.num_variables() {
            return Err(Error::InvalidDesign(format!(
                "expected {} design variables, got {n}",
                self.num_variables()
            )));
        }
        Ok(())
    }

    /// Per-member areas from per-variable values, without clamping.
    pub fn expand(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        Ok(self.group_map.iter().map(|&g| values[g]).collect())
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| v.clamp(self.lower[j], self.upper[j]))
            .collect()
    }

    fn set(&self) -> Result<&[f64]> {
        self.discrete
            .as_deref()
            .ok_or_else(|| Error::InvalidDesign("problem has no discrete set".into()))
    }

    /// Index of the set entry nearest `value`; exact midpoints go to the lower index.
    pub fn nearest_index(&self, value: f64) -> Result<usize> {
        let s = self.set()?;
        let k = s.partition_point(|&a| a < value);
        Ok(if k == 0 {
            0
        } else if k == s.len() {
            s.len() - 1
        } else if value - s[k - 1] <= s[k] - value {
            k - 1
        } else {
            k
        })
    }

    /// Maps each variable value to the nearest discrete area.
    pub fn snap(&self, values: &[f64]) -> Result<Vec<f64>> {
        let s = self.set()?;
        values
            .iter()
            .map(|&v| self.nearest_index(v).map(|k| s[k]))
            .collect()
    }

    pub fn decode_indices(&self, indices: &[usize]) -> Result<Vec<f64>> {
        let s = self.set()?;
        self.check_len(indices.len())?;
        let values = indices
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                s.get(k).copied().ok_or_else(|| {
                    Error::InvalidDesign(format!(
                        "variable {j}: index {k} outside discrete set of {} entries",
                        s.len()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.expand(&values)
    }

    /// Indices of values that are members of the discrete set (relative tolerance 1e-9).
    pub fn encode_indices(&self, values: &[f64]) -> Result<Vec<usize>> {
        let s = self.set()?;
        self.check_len(values.len())?;
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let k = self.nearest_index(v)?;
                if (s[k] - v).abs() <= 1e-9 * v.abs().max(1.0) {
                    Ok(k)
                } else {
                    Err(Error::InvalidDesign(format!(
                        "variable {j}: {v} is not in the discrete set"
                    )))
                }
            })
            .collect()
    }

    /// Member areas for a design vector.
    ///
    /// Continuous: `x` holds real values, clamped into bounds. Discrete: `x`
    /// holds integral indices into the discrete set.
    pub fn decode(&self, x: &[f64], mode: Mode) -> Result<Vec<f64>> {
        match mode {
            Mode::Continuous => {
                self.check_len(x.len())?;
                self.expand(&self.clamp(x))
            }
            Mode::Discrete => {
                let indices = x
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
                            Ok(v as usize)
                        } else {
                            Err(Error::InvalidDesign(format!(
                                "variable {j}: {v} is not a valid discrete index"
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.decode_indices(&indices)
            }
        }
    }

    /// Search-space point to variable values: clamp, then snap in discrete mode.
    pub fn project(&self, x: &[f64], mode: Mode) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let clamped = self.clamp(x);
        match mode {
            Mode::Continuous => Ok(clamped),
            Mode::Discrete => self.snap(&clamped),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    /// Allowable absolute member stress.
    pub stress_limit: f64,
    /// Allowable absolute nodal displacement, if constrained.
    pub displacement_limit: Option<f64>,
    /// Axes on which the displacement limit applies.
    pub displacement_axes: Vec<Axis>,
    /// Per-member allowable compressive stress. Off for every shipped problem.
    pub buckling_stress: Option<Vec<f64>>,
}

impl ConstraintSpec {
    pub fn new(stress_limit: f64, displacement_limit: Option<f64>) -> Result<Self> {
        let spec = ConstraintSpec {
            stress_limit,
            displacement_limit,
            displacement_axes: Axis::ALL.to_vec(),
            buckling_stress: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stress_limit > 0.0) {
            return Err(Error::InvalidModel("stress limit must be positive".into()));
        }
        if let Some(d) = self.displacement_limit {
            if !(d > 0.0) {
                return Err(Error::InvalidModel("displacement limit must be positive".into()));
            }
        }
        if let Some(b) = &self.buckling_stress {
            if b.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidModel("buckling stresses must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub epsilon: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            lambda: 1e5,
            epsilon: 1e-6,
        }
    }
}

/// Normalized violations `max(0, |r|/limit - 1)`, stresses first (case-major),
/// then monitored displacements, then buckling terms if enabled.
pub fn violations(model: &TrussModel, result: &AnalysisResult, spec: &ConstraintSpec) -> Vec<f64> {
    let excess = |value: f64, limit: f64| (value.abs() / limit - 1.0).max(0.0);
    let mut g = Vec::new();
    for case in &result.cases {
        g.extend(case.stresses.iter().map(|&s| excess(s, spec.stress_limit)));
    }
    if let Some(limit) = spec.displacement_limit {
        for case in &result.cases {
            for (u, (_, axis)) in case.displacements.iter().zip(model.free_dofs()) {
                if spec.displacement_axes.contains(axis) {
                    g.push(excess(*u, limit));
                }
            }
        }
    }
    if let Some(allow) = &spec.buckling_stress {
        for case in &result.cases {
            g.extend(
                case.stresses
                    .iter()
                    .zip(allow)
                    .map(|(&s, &b)| if s < 0.0 { excess(s, b) } else { 0.0 }),
            );
        }
    }
    g
}

/// `W + lambda * sum(g^2)`.
pub fn penalize(weight: f64, g: &[f64], cfg: &PenaltyConfig) -> f64 {
    penalize_with_equalities(weight, g, &[], cfg)
}

/// Adds `lambda * sum(max(0, |h| - epsilon)^2)` for equality residuals `h`.
pub fn penalize_with_equalities(weight: f64, g: &[f64], h: &[f64], cfg: &PenaltyConfig) -> f64 {
    let ineq: f64 = g.iter().map(|v| v.max(0.0).powi(2)).sum();
    let eq: f64 = h.iter().map(|v| (v.abs() - cfg.epsilon).max(0.0).powi(2)).sum();
    weight + cfg.lambda * ineq + cfg.lambda * eq
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub weight: f64,
    pub penalized: f64,
    pub feasible: bool,
    pub violations: Vec<f64>,
}

impl Evaluation {
    /// Evaluation of an unconstrained objective value.
    pub fn unconstrained(value: f64) -> Self {
        Evaluation {
            weight: value,
            penalized: value,
            feasible: true,
            violations: Vec::new(),
        }
    }
}

/// Analyzes member areas and applies the penalty. Instability becomes an
/// infeasible evaluation with violation [`G_MAX`].
pub fn evaluate_areas(
    model: &TrussModel,
    spec: &ConstraintSpec,
    cfg: &PenaltyConfig,
    areas: &[f64],
) -> Result<Evaluation> {
    let weight = model.weight(areas)?;
    match model.analyze(areas) {
        Ok(result) => {
            let g = violations(model, &result, spec);
            let feasible = g.iter().all(|&v| v == 0.0);
            let penalized = if feasible { weight } else { penalize(weight, &g, cfg) };
            Ok(Evaluation {
                weight,
                penalized,
                feasible,
                violations: g,
            })
        }
        Err(Error::KinematicInstability { .. }) => Ok(Evaluation {
            weight,
            penalized: weight + cfg.lambda * G_MAX,
            feasible: false,
            violations: vec![G_MAX],
        }),
        Err(e) => Err(e),
    }
}

/// Decodes `x` per [`DesignSpace::decode`] and evaluates it.
pub fn evaluate(
    model: &TrussModel,
    space: &DesignSpace,
    spec: &ConstraintSpec,
    cfg: &PenaltyConfig,
    x: &[f64],
    mode: Mode,
) -> Result<Evaluation> {
    let areas = space.decode(x, mode)?;
    evaluate_areas(model, spec, cfg, &areas)
}

/// Optimizer-facing view of a truss problem in one mode.
///
/// Search points are per-variable areas in the box `[lower, upper]`; discrete
/// mode snaps them to the nearest admissible area before analysis. Every call
/// to [`Objective::evaluate`] increments a shared counter.
#[derive(Debug)]
pub struct TrussObjective<'a> {
    model: &'a TrussModel,
    space: &'a DesignSpace,
    spec: &'a ConstraintSpec,
    penalty: PenaltyConfig,
    mode: Mode,
    counter: AtomicUsize,
}

impl<'a> TrussObjective<'a> {
    pub fn new(
        model: &'a TrussModel,
        space: &'a DesignSpace,
        spec: &'a ConstraintSpec,
        penalty: PenaltyConfig,
        mode: Mode,
    ) -> Self {
        assert!(
            mode == Mode::Continuous || space.discrete_set().is_some(),
            "discrete mode needs a discrete set"
        );
        assert_eq!(model.members().len(), space.num_members(), "group map must cover every member");
        TrussObjective {
            model,
            space,
            spec,
            penalty,
            mode,
            counter: AtomicUsize::new(0),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn evaluations(&self) -> usize {
        self.counter.load(Ordering::Relaxed)
    }
}

impl Objective for TrussObjective<'_> {
    fn dimension(&self) -> usize {
        self.space.num_variables()
    }

    fn lower(&self) -> &[f64] {
        self.space.lower()
    }

    fn upper(&self) -> &[f64] {
        self.space.upper()
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        self.counter.fetch_add(1, Ordering::Relaxed);
        let values = self.design(x);
        let areas = self.space.expand(&values).expect("design has one value per variable");
        evaluate_areas(self.model, self.spec, &self.penalty, &areas)
            .expect("projected areas are positive")
    }

    fn design(&self, x: &[f64]) -> Vec<f64> {
        self.space
            .project(x, self.mode)
            .expect("search point has one value per variable")
    }
}
