//! Linear-elastic analysis of pin-jointed trusses by the direct stiffness method.
//!
//! A [`TrussModel`] is validated once at construction and caches member lengths,
//! direction cosines and the free-DOF numbering, so repeated analyses for
//! different area vectors only assemble and factor the reduced stiffness.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reciprocal condition estimate below which the reduced stiffness is treated as singular.
pub const MIN_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

/// Two-node axial member. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub a: usize,
    pub b: usize,
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub elastic_modulus: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub node: usize,
    pub axis: Axis,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub name: String,
    pub loads: Vec<PointLoad>,
}

impl LoadCase {
    pub fn new(name: impl Into<String>, loads: Vec<PointLoad>) -> Self {
        LoadCase {
            name: name.into(),
            loads,
        }
    }
}

/// Response of the structure to one load case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResponse {
    /// Free-DOF displacements, ordered as [`TrussModel::free_dofs`].
    pub displacements: Vec<f64>,
    /// Signed axial stress per member, tension positive.
    pub stresses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub cases: Vec<CaseResponse>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TrussModel {
    dimension: usize,
    nodes: Vec<[f64; 3]>,
    members: Vec<Member>,
    supports: Vec<(usize, Axis)>,
    material: Material,
    load_cases: Vec<LoadCase>,
    lengths: Vec<f64>,
    cosines: Vec<[f64; 3]>,
    dof_map: Vec<Option<usize>>,
    free_dofs: Vec<(usize, Axis)>,
}

impl TrussModel {
    /// Builds and validates a model. Coordinates beyond `dimension` must be zero.
    pub fn new(
        dimension: usize,
        nodes: Vec<[f64; 3]>,
        members: Vec<Member>,
        supports: Vec<(usize, Axis)>,
        material: Material,
        load_cases: Vec<LoadCase>,
    ) -> Result<Self> {
        if dimension != 2 && dimension != 3 {
            return Err(Error::InvalidModel(format!("dimension must be 2 or 3, got {dimension}")));
        }
        if !(material.elastic_modulus > 0.0) || !(material.density >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "material needs E > 0 and density >= 0, got E = {}, density = {}",
                material.elastic_modulus, material.density
            )));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidModel(format!("node {i} has a non-finite coordinate")));
            }
            if n[dimension..].iter().any(|&c| c != 0.0) {
                return Err(Error::InvalidModel(format!(
                    "node {i} has a coordinate outside the {dimension}-D plane"
                )));
            }
        }

        let mut lengths = Vec::with_capacity(members.len());
        let mut cosines = Vec::with_capacity(members.len());
        for (i, m) in members.iter().enumerate() {
            if m.a >= nodes.len() || m.b >= nodes.len() {
                return Err(Error::InvalidModel(format!(
                    "member {i} references node {} but the model has {} nodes",
                    m.a.max(m.b),
                    nodes.len()
                )));
            }
            if m.a == m.b {
                return Err(Error::InvalidModel(format!("member {i} connects node {} to itself", m.a)));
            }
            let (pa, pb) = (nodes[m.a], nodes[m.b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
            let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if !(len > 0.0) {
                return Err(Error::DegenerateGeometry { member: i });
            }
            lengths.push(len);
            cosines.push([d[0] / len, d[1] / len, d[2] / len]);
        }

        let mut fixed = vec![false; nodes.len() * dimension];
        for &(node, axis) in &supports {
            if node >= nodes.len() || axis.index() >= dimension {
                return Err(Error::InvalidModel(format!("support ({node}, {axis}) is out of range")));
            }
            fixed[node * dimension + axis.index()] = true;
        }
        let mut dof_map = vec![None; fixed.len()];
        let mut free_dofs = Vec::new();
        for (g, &is_fixed) in fixed.iter().enumerate() {
            if !is_fixed {
                dof_map[g] = Some(free_dofs.len());
                free_dofs.push((g / dimension, Axis::ALL[g % dimension]));
            }
        }

        for case in &load_cases {
            for load in &case.loads {
                if load.node >= nodes.len() || load.axis.index() >= dimension {
                    return Err(Error::InvalidModel(format!(
                        "load case `{}`: load at ({}, {}) is out of range",
                        case.name, load.node, load.axis
                    )));
                }
                if fixed[load.node * dimension + load.axis.index()] {
                    return Err(Error::InvalidModel(format!(
                        "load case `{}`: load at ({}, {}) acts on a fixed DOF",
                        case.name, load.node, load.axis
                    )));
                }
            }
        }

        Ok(TrussModel {
            dimension,
            nodes,
            members,
            supports,
            material,
            load_cases,
            lengths,
            cosines,
            dof_map,
            free_dofs,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn supports(&self) -> &[(usize, Axis)] {
        &self.supports
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub fn load_cases(&self) -> &[LoadCase] {
        &self.load_cases
    }

    /// Free degrees of freedom as (node, axis), in solution-vector order.
    pub fn free_dofs(&self) -> &[(usize, Axis)] {
        &self.free_dofs
    }

    pub fn num_free_dofs(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn member_length(&self, member: usize) -> f64 {
        self.lengths[member]
    }

    pub fn with_node(&self, node: usize, coords: [f64; 3]) -> Result<TrussModel> {
        let mut nodes = self.nodes.clone();
        nodes[node] = coords;
        TrussModel::new(
            self.dimension,
            nodes,
            self.members.clone(),
            self.supports.clone(),
            self.material,
            self.load_cases.clone(),
        )
    }

    pub fn with_load_cases(&self, load_cases: Vec<LoadCase>) -> Result<TrussModel> {
        TrussModel::new(
            self.dimension,
            self.nodes.clone(),
            self.members.clone(),
            self.supports.clone(),
            self.material,
            load_cases,
        )
    }

    fn check_areas(&self, areas: &[f64]) -> Result<()> {
        if areas.len() != self.members.len() {
            return Err(Error::InvalidDesign(format!(
                "expected {} member areas, got {}",
                self.members.len(),
                areas.len()
            )));
        }
        if let Some(i) = areas.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidDesign(format!(
                "member {i} has non-positive area {}",
                areas[i]
            )));
        }
        Ok(())
    }

    /// Total structural weight, sum of area x density x length.
    pub fn weight(&self, areas: &[f64]) -> Result<f64> {
        self.check_areas(areas)?;
        Ok(self.material.density * areas.iter().zip(&self.lengths).map(|(a, l)| a * l).sum::<f64>())
    }

    /// Reduced global stiffness over the free DOFs.
    pub fn stiffness_matrix(&self, areas: &[f64]) -> Result<DMatrix<f64>> {
        self.check_areas(areas)?;
        let n = self.free_dofs.len();
        let dim = self.dimension;
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut dofs = [None; 6];
        for (i, m) in self.members.iter().enumerate() {
            let ea_l = self.material.elastic_modulus * areas[i] / self.lengths[i];
            let c = &self.cosines[i];
            for ax in 0..dim {
                dofs[ax] = self.dof_map[m.a * dim + ax];
                dofs[dim + ax] = self.dof_map[m.b * dim + ax];
            }
            for p in 0..2 * dim {
                let Some(gp) = dofs[p] else { continue };
                let sp = if p < dim { -1.0 } else { 1.0 };
                for q in 0..2 * dim {
                    let Some(gq) = dofs[q] else { continue };
                    let sq = if q < dim { -1.0 } else { 1.0 };
                    k[(gp, gq)] += sp * sq * ea_l * c[p % dim] * c[q % dim];
                }
            }
        }
        Ok(k)
    }

    /// Free-DOF force vector for a load case.
    pub fn load_vector(&self, case: &LoadCase) -> DVector<f64> {
        let mut f = DVector::zeros(self.free_dofs.len());
        for load in &case.loads {
            if let Some(g) = self.dof_map[load.node * self.dimension + load.axis.index()] {
                f[g] += load.magnitude;
            }
        }
        f
    }

    fn factorize(&self, areas: &[f64]) -> Result<Cholesky<f64, Dyn>> {
        let k = self.stiffness_matrix(areas)?;
        let norm = one_norm(&k);
        let chol = Cholesky::new(k).ok_or(Error::KinematicInstability { rcond: 0.0 })?;
        let rcond = if norm > 0.0 {
            1.0 / (norm * inverse_one_norm(&chol))
        } else {
            0.0
        };
        if !(rcond >= MIN_RCOND) {
            return Err(Error::KinematicInstability { rcond });
        }
        Ok(chol)
    }

    /// Reciprocal 1-norm condition estimate of the reduced stiffness.
    pub fn rcond(&self, areas: &[f64]) -> Result<f64> {
        let k = self.stiffness_matrix(areas)?;
        let norm = one_norm(&k);
        Ok(match Cholesky::new(k) {
            Some(chol) if norm > 0.0 => 1.0 / (norm * inverse_one_norm(&chol)),
            _ => 0.0,
        })
    }

    /// Solves K(areas) u = f for one load case, returning free-DOF displacements.
    pub fn assemble_and_solve(&self, areas: &[f64], case: &LoadCase) -> Result<DVector<f64>> {
        let chol = self.factorize(areas)?;
        Ok(chol.solve(&self.load_vector(case)))
    }

    /// Axial stress per member from free-DOF displacements, tension positive.
    pub fn member_stresses(&self, displacements: &[f64]) -> Vec<f64> {
        let dim = self.dimension;
        let disp = |node: usize, ax: usize| {
            self.dof_map[node * dim + ax]
                .map(|g| displacements[g])
                .unwrap_or(0.0)
        };
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let c = &self.cosines[i];
                let elongation: f64 = (0..dim).map(|ax| c[ax] * (disp(m.b, ax) - disp(m.a, ax))).sum();
                self.material.elastic_modulus * elongation / self.lengths[i]
            })
            .collect()
    }

    /// Solves every load case with one factorization.
    pub fn analyze(&self, areas: &[f64]) -> Result<AnalysisResult> {
        let weight = self.weight(areas)?;
        let chol = self.factorize(areas)?;
        let cases = self
            .load_cases
            .iter()
            .map(|case| {
                let u = chol.solve(&self.load_vector(case));
                let stresses = self.member_stresses(u.as_slice());
                CaseResponse {
                    displacements: u.as_slice().to_vec(),
                    stresses,
                }
            })
            .collect();
        Ok(AnalysisResult { cases, weight })
    }
}

fn one_norm(k: &DMatrix<f64>) -> f64 {
    k.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of the 1-norm of K^-1 (K symmetric), a few solves with the factor.
fn inverse_one_norm(chol: &Cholesky<f64, Dyn>) -> f64 {
    let n = chol.l_dirty().nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = chol.solve(&x);
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = chol.solve(&xi);
        let j = z.iamax();
        if z[j].abs() <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[j] = 1.0;
    }
    estimate
}
