//! Coefficient-level tests for holomorphic extension of boundary loops
//! to disks, to pairs of disks meeting at a node, and to annuli.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_io;
use crate::error::{Error, Result};
use crate::loops::{HardyPart, Loop};
use crate::node_model::{membership_residual, relation_defect, NodeBoundary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Extension {
    Extends { defect: f64 },
    Fails { defect: f64 },
}

impl Extension {
    fn from_defect(defect: f64, tol: f64) -> Self {
        if defect <= tol {
            Extension::Extends { defect }
        } else {
            Extension::Fails { defect }
        }
    }

    pub fn extends(&self) -> bool {
        matches!(self, Extension::Extends { .. })
    }

    pub fn defect(&self) -> f64 {
        match *self {
            Extension::Extends { defect } | Extension::Fails { defect } => defect,
        }
    }
}

/// `ξ` extends holomorphically to the closed disk iff its negative modes vanish.
/// The defect is `‖P₋ξ‖ₛ / (1 + ‖ξ‖ₛ)`.
pub fn disk_extension_test(xi: &Loop, s: f64, tol: f64) -> Result<Extension> {
    let defect = xi.hardy_project(HardyPart::Minus).sobolev_norm(s)? / (1.0 + xi.sobolev_norm(s)?);
    Ok(Extension::from_defect(defect, tol))
}

/// Two disks glued at their centres: both loops extend and `ξ₀ = η₀`.
///
/// The verdict uses the combined defect `‖(P₋ξ, η₀ - ξ₀, P₋η)‖ₛ / (1 + max ‖·‖ₛ)`,
/// which is exactly the node membership residual at `z = 0`.
pub fn disk_pair_node_test(xi: &Loop, eta: &Loop, s: f64, tol: f64) -> Result<Extension> {
    let b = NodeBoundary::new(Complex64::new(0.0, 0.0), xi.clone(), eta.clone())?;
    Ok(Extension::from_defect(membership_residual(&b, s)?, tol))
}

/// Annulus `A(δ, 1)` with boundary charts `x` and `y = δ/x`: the loops are the
/// traces of one holomorphic map iff `η(y) = ξ(δ/y)`, i.e. `η₋ₙ = δⁿ ξₙ` for all `n`.
pub fn annulus_extension_test(xi: &Loop, eta: &Loop, delta: f64, s: f64, tol: f64) -> Result<Extension> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let b = NodeBoundary::new(Complex64::new(delta, 0.0), xi.clone(), eta.clone())?;
    let scale = 1.0 + xi.sobolev_norm(s)?.max(eta.sobolev_norm(s)?);
    Ok(Extension::from_defect(relation_defect(&b).sobolev_norm(s)? / scale, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    DiskPair {
        #[serde(with = "complex_io::pair")]
        z: Complex64,
    },
    Annulus {
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    #[serde(flatten)]
    pub kind: NodeKind,
    pub xi: Loop,
    pub eta: Loop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    /// Sampled sup-norms of `ξ` and `η`; `None` when the ball check is off.
    pub sup_norm: Option<f64>,
    pub in_ball: bool,
    pub extension: Extension,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VPrimeReport {
    pub nodes: Vec<NodeReport>,
    pub member: bool,
}

/// Per-node membership in the boundary-value space of maps that extend across
/// every node: values in the open unit ball (sampled) and the node or annulus
/// matching relation.
pub fn vprime_membership(nodes: &[NodeRecord], ball_check: bool, s: f64, tol: f64) -> Result<VPrimeReport> {
    let mut reports = Vec::with_capacity(nodes.len());
    for rec in nodes {
        let extension = match rec.kind {
            NodeKind::DiskPair { z } => {
                let b = NodeBoundary::new(z, rec.xi.clone(), rec.eta.clone())?;
                Extension::from_defect(membership_residual(&b, s)?, tol)
            }
            NodeKind::Annulus { delta } => annulus_extension_test(&rec.xi, &rec.eta, delta, s, tol)?,
        };
        let sup_norm = ball_check.then(|| rec.xi.sampled_sup_norm().max(rec.eta.sampled_sup_norm()));
        let in_ball = sup_norm.is_none_or(|v| v < 1.0);
        reports.push(NodeReport {
            sup_norm,
            in_ball,
            extension,
            pass: in_ball && extension.extends(),
        });
    }
    let member = reports.iter().all(|r| r.pass);
    Ok(VPrimeReport { nodes: reports, member })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node_model::node_membership;

    fn r(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn scalar(modes: &[(i64, f64)]) -> Loop {
        let m: Vec<_> = modes.iter().map(|&(n, v)| (n, r(v))).collect();
        Loop::scalar(4, &m).unwrap()
    }

    #[test]
    fn disk_examples() {
        let ok = disk_extension_test(&scalar(&[(0, 1.0), (1, 1.0)]), 1.5, 1e-10).unwrap();
        assert_eq!(ok, Extension::Extends { defect: 0.0 });
        assert!(!disk_extension_test(&scalar(&[(-1, 1.0)]), 1.5, 1e-10).unwrap().extends());
        assert!(disk_extension_test(&scalar(&[(-3, 1e-14)]), 1.5, 1e-10).unwrap().extends());
    }

    #[test]
    fn disk_pair_examples() {
        let k = scalar(&[(0, 0.3)]);
        assert!(disk_pair_node_test(&k, &k, 1.5, 1e-10).unwrap().extends());
        let a = scalar(&[(0, 1.0), (1, 1.0)]);
        let b = scalar(&[(0, 2.0), (1, 1.0)]);
        assert!(!disk_pair_node_test(&a, &b, 1.5, 1e-10).unwrap().extends());
    }

    #[test]
    fn disk_pair_matches_node_membership_at_zero() {
        let xi = scalar(&[(0, 0.5), (2, -1.0)]);
        let eta = scalar(&[(0, 0.5), (-1, 1e-3)]);
        let pair = disk_pair_node_test(&xi, &eta, 1.5, 1e-10).unwrap();
        let node = node_membership(&NodeBoundary::new(r(0.0), xi, eta).unwrap(), 1.5, 1e-10).unwrap();
        assert_eq!(pair.extends(), node.is_member());
        assert_eq!(pair.defect(), node.residual());
    }

    #[test]
    fn annulus_examples() {
        let d = 0.25;
        assert!(annulus_extension_test(&scalar(&[(1, 1.0)]), &scalar(&[(-1, 0.25)]), d, 1.5, 1e-12)
            .unwrap()
            .extends());
        // Oracle: η(y) = ξ(δ/y) with ξ = x⁻¹ gives η = y/δ = 4y.
        assert!(annulus_extension_test(&scalar(&[(-1, 1.0)]), &scalar(&[(1, 4.0)]), d, 1.5, 1e-12)
            .unwrap()
            .extends());
        assert!(!annulus_extension_test(&scalar(&[(1, 1.0)]), &scalar(&[(1, 1.0)]), d, 1.5, 1e-12)
            .unwrap()
            .extends());
    }

    #[test]
    fn annulus_rejects_bad_delta() {
        let l = scalar(&[(0, 1.0)]);
        for d in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(annulus_extension_test(&l, &l, d, 1.5, 1e-10).is_err());
        }
    }

    #[test]
    fn annulus_relation_is_symmetric() {
        let xi = scalar(&[(-2, 0.3), (0, 1.0), (1, 0.7), (3, -0.2)]);
        let eta = scalar(&[(-1, 0.1), (2, 0.5)]);
        let a = annulus_extension_test(&xi, &eta, 0.4, 1.5, 1e-10).unwrap();
        let b = annulus_extension_test(&eta, &xi, 0.4, 1.5, 1e-10).unwrap();
        assert_eq!(a.defect(), b.defect());
    }

    #[test]
    fn vprime_examples() {
        let k = scalar(&[(0, 0.5)]);
        let single = vec![NodeRecord {
            kind: NodeKind::DiskPair { z: r(0.0) },
            xi: k.clone(),
            eta: k,
        }];
        assert!(vprime_membership(&single, true, 1.5, 1e-10).unwrap().member);

        let ann = vec![NodeRecord {
            kind: NodeKind::Annulus { delta: 0.25 },
            xi: scalar(&[(1, 0.9)]),
            eta: scalar(&[(-1, 0.225)]),
        }];
        let rep = vprime_membership(&ann, true, 1.5, 1e-12).unwrap();
        assert!(rep.member);
        assert!((rep.nodes[0].sup_norm.unwrap() - 0.9).abs() < 1e-12);

        let big = scalar(&[(0, 1.2)]);
        let out = vec![NodeRecord {
            kind: NodeKind::DiskPair { z: r(0.0) },
            xi: big.clone(),
            eta: big,
        }];
        let rep = vprime_membership(&out, true, 1.5, 1e-10).unwrap();
        assert!(!rep.member);
        assert!(!rep.nodes[0].in_ball);
        assert!(rep.nodes[0].extension.extends());
        assert!(vprime_membership(&out, false, 1.5, 1e-10).unwrap().member);
    }

    #[test]
    fn node_record_json() {
        let text = r#"{"kind":"annulus","delta":0.25,
            "xi":{"m":1,"n_max":1,"coeffs":[[[0,0]],[[0,0]],[[1,0]]]},
            "eta":{"m":1,"n_max":1,"coeffs":[[[0.25,0]],[[0,0]],[[0,0]]]}}"#;
        let rec: NodeRecord = serde_json::from_str(text).unwrap();
        assert_eq!(rec.kind, NodeKind::Annulus { delta: 0.25 });
        let text = r#"{"kind":"disk_pair","z":[0,0],
            "xi":{"m":1,"n_max":0,"coeffs":[[[1,0]]]},
            "eta":{"m":1,"n_max":0,"coeffs":[[[1,0]]]}}"#;
        let rec: NodeRecord = serde_json::from_str(text).unwrap();
        assert!(vprime_membership(&[rec], false, 1.5, 1e-10).unwrap().member);
    }
}
