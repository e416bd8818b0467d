//! Marked nodal configurations, stability of maps, arithmetic genus, and the
//! index and dimension formulas for moduli of stable maps. Also builds Hardy
//! triples on truncated Laurent modes whose indices reproduce Riemann–Roch.

use std::collections::HashSet;

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{SubspaceTriple, DEFAULT_RANK_TOL};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub genus: u32,
    /// The map is constant on this component.
    pub ghost: bool,
}

/// A special point: `(component index, point id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointRef(pub usize, pub u64);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConfigWire")]
pub struct NodalConfig {
    components: Vec<Component>,
    nodes: Vec<[PointRef; 2]>,
    marks: Vec<PointRef>,
}

#[derive(Deserialize)]
struct ConfigWire {
    components: Vec<Component>,
    #[serde(default)]
    nodes: Vec<[PointRef; 2]>,
    #[serde(default)]
    marks: Vec<PointRef>,
}

impl TryFrom<ConfigWire> for NodalConfig {
    type Error = Error;
    fn try_from(w: ConfigWire) -> Result<Self> {
        NodalConfig::new(w.components, w.nodes, w.marks)
    }
}

impl NodalConfig {
    pub fn new(components: Vec<Component>, nodes: Vec<[PointRef; 2]>, marks: Vec<PointRef>) -> Result<Self> {
        let c = components.len();
        if c == 0 {
            return Err(Error::InvalidConfig("no components".into()));
        }
        let mut seen = HashSet::new();
        for p in nodes.iter().flatten().chain(&marks) {
            if p.0 >= c {
                return Err(Error::InvalidConfig(format!("component index {} out of range (have {c})", p.0)));
            }
            if !seen.insert(*p) {
                return Err(Error::InvalidConfig(format!(
                    "point {} on component {} used twice",
                    p.1, p.0
                )));
            }
        }
        let mut uf = UnionFind::<usize>::new(c);
        for [p, q] in &nodes {
            uf.union(p.0, q.0);
        }
        if (1..c).any(|i| !uf.equiv(0, i)) {
            return Err(Error::InvalidConfig("dual graph is disconnected".into()));
        }
        Ok(NodalConfig { components, nodes, marks })
    }

    /// A single smooth component with `n` marked points.
    pub fn smooth(genus: u32, ghost: bool, n: u64) -> Self {
        NodalConfig {
            components: vec![Component { genus, ghost }],
            nodes: Vec::new(),
            marks: (0..n).map(|p| PointRef(0, p)).collect(),
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn nodes(&self) -> &[[PointRef; 2]] {
        &self.nodes
    }

    pub fn marks(&self) -> &[PointRef] {
        &self.marks
    }

    /// Marks plus node endpoints on component `i`.
    pub fn special_points(&self, i: usize) -> usize {
        self.nodes.iter().flatten().chain(&self.marks).filter(|p| p.0 == i).count()
    }

    /// A point id not used anywhere in the configuration.
    pub fn fresh_point_id(&self) -> u64 {
        self.nodes.iter().flatten().chain(&self.marks).map(|p| p.1 + 1).max().unwrap_or(0)
    }

    /// Adds a marked point on component `i` with a fresh id.
    pub fn with_mark(&self, i: usize) -> Result<Self> {
        let mut marks = self.marks.clone();
        marks.push(PointRef(i, self.fresh_point_id()));
        NodalConfig::new(self.components.clone(), self.nodes.clone(), marks)
    }
}

/// `Σ gᵢ + k - c + 1` for `k` nodes and `c` components.
pub fn arithmetic_genus(cfg: &NodalConfig) -> i64 {
    let sum: i64 = cfg.components.iter().map(|c| i64::from(c.genus)).sum();
    sum + cfg.nodes.len() as i64 - cfg.components.len() as i64 + 1
}

/// Every ghost component of genus 0 has at least three special points and every
/// ghost component of genus 1 at least one.
pub fn is_stable_map(cfg: &NodalConfig) -> bool {
    cfg.components.iter().enumerate().all(|(i, c)| {
        if !c.ghost {
            return true;
        }
        match c.genus {
            0 => cfg.special_points(i) >= 3,
            1 => cfg.special_points(i) >= 1,
            _ => true,
        }
    })
}

/// Complex dimension `m` of the target and the pairing `⟨c₁(TM), d⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetData {
    pub m: u32,
    pub c1d: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

/// `(g - 1)(3 - m) + ⟨c₁, d⟩ + n`.
pub fn moduli_dimension(g: u32, n: u32, t: TargetData) -> i64 {
    (i64::from(g) - 1) * (3 - i64::from(t.m)) + t.c1d + i64::from(n)
}

/// Index of the linearized Cauchy–Riemann operator: `m(1 - g) + ⟨c₁, d⟩` over
/// `ℂ`, twice that over `ℝ`.
pub fn riemann_roch_index(t: TargetData, g: u32, field: Field) -> i64 {
    let complex = i64::from(t.m) * (1 - i64::from(g)) + t.c1d;
    match field {
        Field::Complex => complex,
        Field::Real => 2 * complex,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotropyGroup {
    Trivial,
    /// Translations of a torus.
    Torus,
    /// `ℂ*` fixing two points of the sphere.
    CStar,
    /// Affine group `ℂ* ⋉ ℂ` fixing one point of the sphere.
    Affine,
    Psl2C,
}

impl IsotropyGroup {
    pub fn complex_dim(self) -> u32 {
        match self {
            IsotropyGroup::Trivial => 0,
            IsotropyGroup::Torus | IsotropyGroup::CStar => 1,
            IsotropyGroup::Affine => 2,
            IsotropyGroup::Psl2C => 3,
        }
    }
}

/// Automorphism group of a smooth genus-`g` surface with `n` marked points.
pub fn isotropy_group(g: u32, n: u32) -> (IsotropyGroup, u32) {
    let group = match (g, n) {
        (0, 0) => IsotropyGroup::Psl2C,
        (0, 1) => IsotropyGroup::Affine,
        (0, 2) => IsotropyGroup::CStar,
        (1, 0) => IsotropyGroup::Torus,
        _ => IsotropyGroup::Trivial,
    };
    (group, group.complex_dim())
}

/// `3g - 3 + n`.
pub fn teichmuller_dim(g: u32, n: u32) -> i64 {
    3 * i64::from(g) - 3 + i64::from(n)
}

/// `(dim A₀, dim X₀) = (3g - 3 + n - k, (m - 3)(1 - g) + ⟨c₁, d⟩ + n - k)`.
pub fn core_slice_dims(g: u32, n: u32, k: u32, t: TargetData) -> (i64, i64) {
    let k = i64::from(k);
    let one_minus_g = 1 - i64::from(g);
    (
        teichmuller_dim(g, n) - k,
        (i64::from(t.m) - 3) * one_minus_g + t.c1d + i64::from(n) - k,
    )
}

/// A triple together with the index it is expected to have.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyTriple {
    pub triple: SubspaceTriple,
    pub expected_index: i64,
}

fn mode_selection(ambient: usize, cols: impl Iterator<Item = usize>) -> CMatrix {
    let cols: Vec<usize> = cols.collect();
    let mut b = CMatrix::zeros(ambient, cols.len());
    for (c, &r) in cols.iter().enumerate() {
        b[(r, c)] = Complex64::new(1.0, 0.0);
    }
    b
}

/// Laurent modes `n ∈ [-N, N]` (row `n + N`); `E′` = modes `n ≥ 0`, boundary
/// values of the inner disk; `E″` = modes `n ≤ deg2d`, boundary values of a
/// section over the outer disk after the transition `x^{deg2d}`.
pub fn hardy_triple_for_line_bundle(deg2d: usize, truncation: usize) -> Result<HardyTriple> {
    if truncation <= deg2d {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} must exceed the degree {deg2d}"
        )));
    }
    let n = truncation;
    let ambient = 2 * n + 1;
    let prime = mode_selection(ambient, n..ambient);
    let dprime = mode_selection(ambient, 0..=n + deg2d);
    Ok(HardyTriple {
        triple: SubspaceTriple::new(ambient, prime, dprime, DEFAULT_RANK_TOL)?,
        expected_index: deg2d as i64 + 1,
    })
}

/// Hardy split of `ℂᵐ`-valued loops on the sphere's equator: `E′` =
/// nonnegative modes, `E″` = nonpositive modes, meeting in the constants.
pub fn hardy_split_triple(m: usize, truncation: usize) -> Result<HardyTriple> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let n = truncation;
    let per = 2 * n + 1;
    let ambient = m * per;
    let rows = |keep: fn(i64) -> bool| {
        (0..ambient).filter(move |r| keep((r % per) as i64 - n as i64))
    };
    let prime = mode_selection(ambient, rows(|k| k >= 0));
    let dprime = mode_selection(ambient, rows(|k| k <= 0));
    Ok(HardyTriple {
        triple: SubspaceTriple::new(ambient, prime, dprime, DEFAULT_RANK_TOL)?,
        expected_index: m as i64,
    })
}
