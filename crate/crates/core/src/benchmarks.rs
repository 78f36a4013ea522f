//! Benchmark problem definitions and published reference designs.
//!
//! Problems are TOML files (see `data/`); the six classic ones are embedded in
//! the binary. Node, member and load-case indices in the files are 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{DeParams, PsoParams};
use crate::error::{Error, Result};
use crate::fem::{AnalysisResult, Axis, LoadCase, Material, Member, PointLoad, TrussModel};
use crate::objective::{
    evaluate_areas, ConstraintSpec, DesignSpace, Evaluation, Mode, PenaltyConfig, TrussObjective,
};
use crate::sfoa::SfoaParams;

/// Relative weight tolerance for geometry validation.
pub const GEOMETRY_TOLERANCE: f64 = 1e-3;

pub const BUILTIN_IDS: [&str; 6] = ["10bar", "15bar", "25bar", "52bar", "72bar", "200bar"];

const BUILTIN: [(&str, &str); 6] = [
    ("10bar", include_str!("../data/10bar.toml")),
    ("15bar", include_str!("../data/15bar.toml")),
    ("25bar", include_str!("../data/25bar.toml")),
    ("52bar", include_str!("../data/52bar.toml")),
    ("72bar", include_str!("../data/72bar.toml")),
    ("200bar", include_str!("../data/200bar.toml")),
];

/// (id, members, variables, discrete set size) for the shipped problems.
const SHAPES: [(&str, usize, usize, Option<usize>); 6] = [
    ("10bar", 10, 10, Some(41)),
    ("15bar", 15, 15, Some(16)),
    ("25bar", 25, 8, Some(30)),
    ("52bar", 52, 12, Some(64)),
    ("72bar", 72, 16, Some(64)),
    ("200bar", 200, 29, None),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub force: String,
    pub stress: String,
    pub mass: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationBudget {
    pub population: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeRow {
    pub population: usize,
    pub budget: usize,
    pub crossover: f64,
    pub mutation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoRow {
    pub population: usize,
    pub budget: usize,
    pub inertia: f64,
}

/// Per-algorithm population and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmTable {
    pub sfoa: PopulationBudget,
    pub cfoa: PopulationBudget,
    pub de: DeRow,
    pub pso: PsoRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDesign {
    pub problem: String,
    pub source: String,
    pub mode: Mode,
    pub weight: f64,
    pub values: Vec<f64>,
    /// Printed values that do not reproduce the printed weight; skipped by validation.
    pub suspect: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub id: String,
    pub title: String,
    pub units: Units,
    pub model: TrussModel,
    pub space: DesignSpace,
    pub constraints: ConstraintSpec,
    pub algorithms: AlgorithmTable,
    pub oracles: Vec<OracleDesign>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    id: String,
    title: String,
    dimension: usize,
    units: Units,
    material: Material,
    constraints: ConstraintsFile,
    design: DesignFile,
    nodes: Vec<Vec<f64>>,
    members: Vec<[usize; 3]>,
    supports: Vec<SupportFile>,
    load_cases: Vec<LoadCaseFile>,
    algorithms: AlgorithmTable,
    #[serde(default)]
    oracles: Vec<OracleFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsFile {
    stress_limit: f64,
    displacement_limit: Option<f64>,
    displacement_axes: Option<Vec<Axis>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignFile {
    variables: usize,
    lower: Option<f64>,
    upper: Option<f64>,
    discrete: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportFile {
    node: usize,
    fixed: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadCaseFile {
    name: String,
    loads: Vec<LoadFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadFile {
    node: usize,
    fx: Option<f64>,
    fy: Option<f64>,
    fz: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleFile {
    source: String,
    mode: Mode,
    weight: f64,
    values: Vec<f64>,
    #[serde(default)]
    suspect: bool,
    note: Option<String>,
}

/// Loads a shipped problem by id, or a problem file by path.
pub fn load_problem(id_or_path: &str) -> Result<BenchmarkProblem> {
    if let Some((_, text)) = BUILTIN.iter().find(|(id, _)| *id == id_or_path) {
        return parse_problem(text, id_or_path);
    }
    let path = Path::new(id_or_path);
    if path.is_file() {
        return load_problem_file(path);
    }
    Err(Error::UnknownProblem(id_or_path.to_string()))
}

pub fn load_problem_file(path: &Path) -> Result<BenchmarkProblem> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text, &path.display().to_string())
}

/// Parses and validates problem text. `origin` names the source in errors.
pub fn parse_problem(text: &str, origin: &str) -> Result<BenchmarkProblem> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .unwrap_or("document")
            .to_string();
        Error::load(origin, field, e.to_string().trim_end())
    })?;
    build(file)
}

fn build(f: ProblemFile) -> Result<BenchmarkProblem> {
    let id = f.id.clone();
    let err = |field: &str, msg: String| Error::load(&id, field, msg);

    if f.dimension != 2 && f.dimension != 3 {
        return Err(err("dimension", format!("must be 2 or 3, got {}", f.dimension)));
    }
    let mut nodes = Vec::with_capacity(f.nodes.len());
    for (i, n) in f.nodes.iter().enumerate() {
        if n.len() != f.dimension {
            return Err(err(
                &format!("nodes[{}]", i + 1),
                format!("expected {} coordinates, got {}", f.dimension, n.len()),
            ));
        }
        let mut c = [0.0; 3];
        c[..n.len()].copy_from_slice(n);
        nodes.push(c);
    }
    let node_index = |field: String, n: usize| -> Result<usize> {
        if n == 0 || n > nodes.len() {
            Err(err(&field, format!("node {n} does not exist ({} nodes)", nodes.len())))
        } else {
            Ok(n - 1)
        }
    };

    let mut members = Vec::with_capacity(f.members.len());
    for (i, &[a, b, g]) in f.members.iter().enumerate() {
        let field = format!("members[{}]", i + 1);
        let (a, b) = (node_index(field.clone(), a)?, node_index(field.clone(), b)?);
        if g == 0 || g > f.design.variables {
            return Err(err(
                &field,
                format!("group {g} outside 1..={}", f.design.variables),
            ));
        }
        members.push(Member { a, b, group: g - 1 });
    }

    let mut supports = Vec::new();
    for (i, s) in f.supports.iter().enumerate() {
        let field = format!("supports[{}]", i + 1);
        let node = node_index(field.clone(), s.node)?;
        for ch in s.fixed.chars() {
            let axis = Axis::from_char(ch)
                .filter(|a| a.index() < f.dimension)
                .ok_or_else(|| err(&field, format!("invalid axis `{ch}`")))?;
            supports.push((node, axis));
        }
    }

    let mut load_cases = Vec::new();
    for (k, lc) in f.load_cases.iter().enumerate() {
        let mut loads = Vec::new();
        for (i, l) in lc.loads.iter().enumerate() {
            let field = format!("load_cases[{}].loads[{}]", k + 1, i + 1);
            let node = node_index(field.clone(), l.node)?;
            for (axis, v) in [(Axis::X, l.fx), (Axis::Y, l.fy), (Axis::Z, l.fz)] {
                let Some(v) = v else { continue };
                if axis.index() >= f.dimension {
                    return Err(err(&field, format!("{axis} load in a {}-D problem", f.dimension)));
                }
                loads.push(PointLoad {
                    node,
                    axis,
                    magnitude: v,
                });
            }
        }
        load_cases.push(LoadCase::new(lc.name.clone(), loads));
    }
    if load_cases.is_empty() {
        return Err(err("load_cases", "at least one load case is required".into()));
    }

    let model = TrussModel::new(f.dimension, nodes, members.clone(), supports, f.material, load_cases)
        .map_err(|e| err("model", e.to_string()))?;

    let m = f.design.variables;
    let (lower, upper) = match (&f.design.discrete, f.design.lower, f.design.upper) {
        (Some(s), None, None) if !s.is_empty() => (s[0], s[s.len() - 1]),
        (None, Some(l), Some(u)) => (l, u),
        (Some(_), _, _) => {
            return Err(err(
                "design",
                "discrete problems take their bounds from the set; omit lower/upper".into(),
            ))
        }
        _ => return Err(err("design", "need either a discrete set or lower and upper".into())),
    };
    let space = DesignSpace::new(
        members.iter().map(|mb| mb.group).collect(),
        vec![lower; m],
        vec![upper; m],
        f.design.discrete.clone(),
    )
    .map_err(|e| err("design", e.to_string()))?;

    let constraints = ConstraintSpec {
        stress_limit: f.constraints.stress_limit,
        displacement_limit: f.constraints.displacement_limit,
        displacement_axes: f
            .constraints
            .displacement_axes
            .unwrap_or_else(|| Axis::ALL[..f.dimension].to_vec()),
        buckling_stress: None,
    };
    constraints
        .validate()
        .map_err(|e| err("constraints", e.to_string()))?;

    if let Some(&(_, nm, nv, ns)) = SHAPES.iter().find(|s| s.0 == id) {
        if model.members().len() != nm || m != nv {
            return Err(err(
                "members",
                format!(
                    "expected {nm} members and {nv} variables, got {} and {m}",
                    model.members().len()
                ),
            ));
        }
        if space.discrete_set().map(|s| s.len()) != ns {
            return Err(err(
                "design.discrete",
                format!("expected {ns:?} discrete areas, got {:?}", space.discrete_set().map(|s| s.len())),
            ));
        }
    }

    let algorithms = f.algorithms;
    for (name, n, b) in [
        ("algorithms.sfoa", algorithms.sfoa.population, algorithms.sfoa.budget),
        ("algorithms.cfoa", algorithms.cfoa.population, algorithms.cfoa.budget),
        ("algorithms.de", algorithms.de.population, algorithms.de.budget),
        ("algorithms.pso", algorithms.pso.population, algorithms.pso.budget),
    ] {
        if n < 2 || b < n {
            return Err(err(name, format!("population {n} and budget {b} are inconsistent")));
        }
    }

    let mut oracles = Vec::with_capacity(f.oracles.len());
    for (i, o) in f.oracles.into_iter().enumerate() {
        let field = format!("oracles[{}]", i + 1);
        if o.values.len() != m {
            return Err(err(&field, format!("expected {m} values, got {}", o.values.len())));
        }
        if o.mode == Mode::Discrete && !o.suspect {
            space
                .encode_indices(&o.values)
                .map_err(|e| err(&field, format!("{}: {e}", o.source)))?;
        }
        oracles.push(OracleDesign {
            problem: id.clone(),
            source: o.source,
            mode: o.mode,
            weight: o.weight,
            values: o.values,
            suspect: o.suspect,
            note: o.note,
        });
    }

    Ok(BenchmarkProblem {
        id: f.id,
        title: f.title,
        units: f.units,
        model,
        space,
        constraints,
        algorithms,
        oracles,
    })
}

impl BenchmarkProblem {
    pub fn num_variables(&self) -> usize {
        self.space.num_variables()
    }

    pub fn supports_mode(&self, mode: Mode) -> bool {
        mode == Mode::Continuous || self.space.discrete_set().is_some()
    }

    fn check_mode(&self, mode: Mode) -> Result<()> {
        if self.supports_mode(mode) {
            Ok(())
        } else {
            Err(Error::Usage(format!("problem `{}` has no discrete set", self.id)))
        }
    }

    /// Member areas for per-variable design values. Discrete values must be set members.
    pub fn member_areas(&self, values: &[f64], mode: Mode) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        if values.len() != self.num_variables() {
            return Err(Error::Usage(format!(
                "problem `{}` has {} design variables, got {}",
                self.id,
                self.num_variables(),
                values.len()
            )));
        }
        match mode {
            Mode::Continuous => self.space.decode(values, Mode::Continuous),
            Mode::Discrete => {
                let idx = self.space.encode_indices(values)?;
                self.space.decode_indices(&idx)
            }
        }
    }

    pub fn evaluate_design(&self, values: &[f64], mode: Mode) -> Result<Evaluation> {
        let areas = self.member_areas(values, mode)?;
        evaluate_areas(&self.model, &self.constraints, &PenaltyConfig::default(), &areas)
    }

    pub fn analyze_design(&self, values: &[f64], mode: Mode) -> Result<AnalysisResult> {
        self.model.analyze(&self.member_areas(values, mode)?)
    }

    pub fn objective(&self, mode: Mode) -> Result<TrussObjective<'_>> {
        self.check_mode(mode)?;
        Ok(TrussObjective::new(
            &self.model,
            &self.space,
            &self.constraints,
            PenaltyConfig::default(),
            mode,
        ))
    }

    pub fn sfoa_params(&self) -> SfoaParams {
        SfoaParams::new(self.algorithms.sfoa.population, self.algorithms.sfoa.budget)
    }

    pub fn best_only_params(&self) -> SfoaParams {
        SfoaParams::best_only(self.algorithms.cfoa.population, self.algorithms.cfoa.budget)
    }

    pub fn de_params(&self) -> DeParams {
        let d = self.algorithms.de;
        DeParams {
            population: d.population,
            crossover: d.crossover,
            mutation: d.mutation,
            budget: d.budget,
        }
    }

    pub fn pso_params(&self) -> PsoParams {
        let p = self.algorithms.pso;
        PsoParams {
            inertia: p.inertia,
            ..PsoParams::new(p.population, p.budget)
        }
    }

    pub fn oracle(&self, source: &str, mode: Mode) -> Option<&OracleDesign> {
        self.oracles.iter().find(|o| o.source == source && o.mode == mode)
    }
}

pub fn oracle_designs(id: &str) -> Result<Vec<OracleDesign>> {
    Ok(load_problem(id)?.oracles)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryCheck {
    pub source: String,
    pub mode: Mode,
    pub published: f64,
    pub computed: f64,
    pub relative_error: f64,
    pub suspect: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub problem: String,
    pub checks: Vec<GeometryCheck>,
}

impl GeometryReport {
    pub fn checked(&self) -> impl Iterator<Item = &GeometryCheck> {
        self.checks.iter().filter(|c| !c.suspect)
    }

    pub fn passed(&self) -> bool {
        self.checked().all(|c| c.passed)
    }
}

/// Recomputes every oracle weight without failing. Suspect designs are listed
/// but never marked failed.
pub fn geometry_report(problem: &BenchmarkProblem) -> Result<GeometryReport> {
    let mut checks = Vec::with_capacity(problem.oracles.len());
    for o in &problem.oracles {
        let areas = problem.space.expand(&o.values)?;
        let computed = problem.model.weight(&areas)?;
        let relative_error = (computed - o.weight).abs() / o.weight.abs();
        checks.push(GeometryCheck {
            source: o.source.clone(),
            mode: o.mode,
            published: o.weight,
            computed,
            relative_error,
            suspect: o.suspect,
            passed: o.suspect || relative_error <= GEOMETRY_TOLERANCE,
        });
    }
    Ok(GeometryReport {
        problem: problem.id.clone(),
        checks,
    })
}

/// Fails on the first non-suspect oracle whose weight deviates by more than
/// [`GEOMETRY_TOLERANCE`].
pub fn validate_geometry(problem: &BenchmarkProblem) -> Result<GeometryReport> {
    let report = geometry_report(problem)?;
    if let Some(c) = report.checked().find(|c| !c.passed) {
        return Err(Error::GeometryValidation {
            design: format!("{}/{} ({})", problem.id, c.source, c.mode),
            computed: c.computed,
            published: c.published,
            relative_error: c.relative_error,
        });
    }
    Ok(report)
}
