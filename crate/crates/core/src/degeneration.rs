//! Neck degenerations on the node model: closed-form Dirichlet energies of
//! Laurent series on annuli, the energy axiom for Gromov convergence along a
//! neck, and the dual-graph effect of collapsing vanishing cycles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_io;
use crate::error::{Error, Result};
use crate::loops::Loop;
use crate::moduli_index::{Component, NodalConfig, PointRef};
use crate::node_model::{boundary_traces, NodePolynomial};

/// `∫_{r<|x|<R} |f′|² dA = π Σ_{n≠0} n |aₙ|² (R²ⁿ - r²ⁿ)` for `f = Σ aₙ xⁿ`,
/// summed over the components of a vector-valued `f`.
pub fn annulus_energy(f: &Loop, r: f64, big_r: f64) -> Result<f64> {
    if !(r > 0.0 && r < big_r && big_r <= 1.0) {
        return Err(Error::InvalidRadii { r_in: r, r_out: big_r });
    }
    let mut total = 0.0;
    for (n, c) in f.modes() {
        if n == 0 {
            continue;
        }
        let weight: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        let e = 2 * n as i32;
        total += n as f64 * weight * (big_r.powi(e) - r.powi(e));
    }
    Ok(PI * total)
}

/// Maps `v_k` on the fibres `N_{z_k}` of a neck degeneration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyWire")]
pub struct NeckFamily {
    #[serde(with = "complex_io::vec")]
    z_seq: Vec<Complex64>,
    v: Vec<NodePolynomial>,
}

#[derive(Deserialize)]
struct FamilyWire {
    #[serde(with = "complex_io::vec")]
    z_seq: Vec<Complex64>,
    /// One polynomial for the whole family, or one per `z_k`.
    laurent: LaurentSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LaurentSpec {
    PerK(Vec<NodePolynomial>),
    Fixed(NodePolynomial),
}

impl TryFrom<FamilyWire> for NeckFamily {
    type Error = Error;
    fn try_from(w: FamilyWire) -> Result<Self> {
        match w.laurent {
            LaurentSpec::Fixed(p) => NeckFamily::constant_profile(w.z_seq, p),
            LaurentSpec::PerK(v) => NeckFamily::new(w.z_seq, v),
        }
    }
}

impl NeckFamily {
    pub fn new(z_seq: Vec<Complex64>, v: Vec<NodePolynomial>) -> Result<Self> {
        if z_seq.is_empty() {
            return Err(Error::InvalidArgument("empty gluing sequence".into()));
        }
        if z_seq.len() != v.len() {
            return Err(Error::ShapeMismatch(format!("{} gluing parameters, {} maps", z_seq.len(), v.len())));
        }
        for (k, z) in z_seq.iter().enumerate() {
            if !(z.is_finite() && z.norm() < 1.0) {
                return Err(Error::GluingParameter(z.norm()));
            }
            if k > 0 && !(z.norm() < z_seq[k - 1].norm()) {
                return Err(Error::InvalidArgument(format!("|z_{k}| does not decrease")));
            }
        }
        Ok(NeckFamily { z_seq, v })
    }

    /// The same `v` restricted to every fibre.
    pub fn constant_profile(z_seq: Vec<Complex64>, v: NodePolynomial) -> Result<Self> {
        let n = z_seq.len();
        NeckFamily::new(z_seq, vec![v; n])
    }

    pub fn z_seq(&self) -> &[Complex64] {
        &self.z_seq
    }

    pub fn maps(&self) -> &[NodePolynomial] {
        &self.v
    }

    /// Laurent series of `v_k` in the `x` coordinate of `N_{z_k}`.
    pub fn laurent(&self, k: usize) -> Result<Loop> {
        let v = &self.v[k];
        Ok(boundary_traces(v, self.z_seq[k], v.degree())?.into_parts().1)
    }

    /// Energy of `v_k` on the neck `|z_k|/ε < |x| < ε`.
    pub fn neck_energy(&self, k: usize, eps: f64) -> Result<f64> {
        let r = self.z_seq[k].norm() / eps;
        annulus_energy(&self.laurent(k)?, r, eps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub eps: f64,
    /// Largest `k` with `|z_k| < ε²/10`.
    pub k_used: usize,
    pub limit: f64,
    /// Relative change of the neck energy from the previous qualifying `k`;
    /// `None` when only one `k` qualifies.
    pub stability: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub stable: bool,
    pub decreasing: bool,
    pub final_limit: f64,
    pub pass: bool,
}

/// Thresholds for [`energy_axiom_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTolerances {
    /// The last `ε`-limit must not exceed this.
    pub energy: f64,
    /// Largest relative change between the last two qualifying `k`.
    pub stability: f64,
}

impl Default for EnergyTolerances {
    fn default() -> Self {
        EnergyTolerances { energy: 1e-6, stability: 1e-6 }
    }
}

/// For each `ε` reads off `lim_k` of the neck energy as the value at the last
/// `k` with `|z_k| < ε²/10`. Passes iff every limit is stable in `k`, the limits
/// do not increase along the schedule, and the last one is below tolerance.
pub fn energy_axiom_check(fam: &NeckFamily, eps_schedule: &[f64], tol: EnergyTolerances) -> Result<EnergyReport> {
    if eps_schedule.is_empty() {
        return Err(Error::EnergySchedule("empty ε schedule".into()));
    }
    for (i, &e) in eps_schedule.iter().enumerate() {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::EnergySchedule(format!("ε = {e} outside (0, 1)")));
        }
        if i > 0 && !(e < eps_schedule[i - 1]) {
            return Err(Error::EnergySchedule("ε schedule must decrease".into()));
        }
    }
    let mut rows = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let qualifying: Vec<usize> = (0..fam.z_seq.len())
            .filter(|&k| fam.z_seq[k].norm() < eps * eps / 10.0)
            .collect();
        let Some(&k_used) = qualifying.last() else {
            return Err(Error::EnergySchedule(format!("no z_k with |z_k| < ε²/10 for ε = {eps}")));
        };
        let limit = fam.neck_energy(k_used, eps)?;
        let stability = match qualifying.len() {
            0 | 1 => None,
            len => {
                let prev = fam.neck_energy(qualifying[len - 2], eps)?;
                let scale = limit.abs().max(prev.abs());
                Some(if scale == 0.0 { 0.0 } else { (limit - prev).abs() / scale })
            }
        };
        let stable = stability.is_some_and(|s| s <= tol.stability);
        rows.push(EnergyRow { eps, k_used, limit, stability, stable });
    }
    let stable = rows.iter().all(|r| r.stable);
    let decreasing = rows.windows(2).all(|w| w[1].limit <= w[0].limit);
    let final_limit = rows.last().map_or(0.0, |r| r.limit);
    Ok(EnergyReport {
        pass: stable && decreasing && final_limit <= tol.energy,
        rows,
        stable,
        decreasing,
        final_limit,
    })
}

/// A circle collapsed to a node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cycle {
    /// Lowers the genus of `component` by one and adds a self-node.
    Nonseparating { component: usize },
    /// Splits `component` into a piece of genus `genus` keeping the index and a
    /// new last component of the remaining genus; the special points with ids in
    /// `moved` go to the new component.
    Separating {
        component: usize,
        genus: u32,
        #[serde(default)]
        moved: Vec<u64>,
    },
}

fn apply_one(cfg: &NodalConfig, cycle: &Cycle) -> Result<NodalConfig> {
    let mut components = cfg.components().to_vec();
    let mut nodes = cfg.nodes().to_vec();
    let mut marks = cfg.marks().to_vec();
    let fresh = cfg.fresh_point_id();
    match *cycle {
        Cycle::Nonseparating { component } => {
            let c = components
                .get_mut(component)
                .ok_or_else(|| Error::InvalidDeformation(format!("no component {component}")))?;
            if c.genus == 0 {
                return Err(Error::InvalidDeformation(format!(
                    "component {component} has genus 0 and no nonseparating cycle"
                )));
            }
            c.genus -= 1;
            nodes.push([PointRef(component, fresh), PointRef(component, fresh + 1)]);
        }
        Cycle::Separating { component, genus, ref moved } => {
            let c = *components
                .get(component)
                .ok_or_else(|| Error::InvalidDeformation(format!("no component {component}")))?;
            if genus > c.genus {
                return Err(Error::InvalidDeformation(format!(
                    "cannot split genus {} off a genus-{} component",
                    genus, c.genus
                )));
            }
            for id in moved {
                if !cfg.nodes().iter().flatten().chain(cfg.marks()).any(|p| *p == PointRef(component, *id)) {
                    return Err(Error::InvalidDeformation(format!(
                        "point {id} is not a special point of component {component}"
                    )));
                }
            }
            let new = components.len();
            components[component].genus = genus;
            components.push(Component { genus: c.genus - genus, ghost: c.ghost });
            let relocate = |p: &mut PointRef| {
                if p.0 == component && moved.contains(&p.1) {
                    p.0 = new;
                }
            };
            nodes.iter_mut().flatten().for_each(relocate);
            marks.iter_mut().for_each(relocate);
            nodes.push([PointRef(component, fresh), PointRef(new, fresh)]);
        }
    }
    NodalConfig::new(components, nodes, marks)
}

/// Collapses the given vanishing cycles one after another.
pub fn apply_deformation(cfg: &NodalConfig, cycles: &[Cycle]) -> Result<NodalConfig> {
    cycles.iter().try_fold(cfg.clone(), |c, cy| apply_one(&c, cy))
}
