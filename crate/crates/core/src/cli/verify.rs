//! Built-in verification suites, one per compute module.

use std::f64::consts::PI;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::degeneration::{annulus_energy, energy_axiom_check, EnergyTolerances, NeckFamily};
use crate::error::Result;
use crate::extension::{annulus_extension_test, disk_extension_test, disk_pair_node_test};
use crate::fredholm::{
    exactness_check, finite_dim_reduction, intersect_newton, normal_coordinates, parametrized_index,
    parametrized_triple, GraphPairLocal, Monomial, PolynomialDims, PolynomialMap, StabilityStatus, SubspaceTriple,
};
use crate::fredholm::{index_stability_check, DEFAULT_RANK_TOL};
use crate::linalg::{self, CMatrix};
use crate::loops::Loop;
use crate::moduli_index::{
    core_slice_dims, hardy_split_triple, hardy_triple_for_line_bundle, isotropy_group, moduli_dimension,
    riemann_roch_index, teichmuller_dim, Field, IsotropyGroup, TargetData,
};
use crate::node_model::{boundary_traces, evaluate_h, holomorphicity_residual, node_chart_inverse};
use crate::sampling;

use super::report::{Check, Status};
use super::scenarios::{random_node_stats, stability_check};
use super::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Node,
    Extension,
    Fredholm,
    Index,
    Energy,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Node => "node",
            Suite::Extension => "extension",
            Suite::Fredholm => "fredholm",
            Suite::Index => "index",
            Suite::Energy => "energy",
            Suite::All => "all",
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn polynomial_dims(d_u: usize, d_x_prime: usize, d_x_dprime: usize, d_xi: usize) -> PolynomialDims {
    PolynomialDims { d_u, d_x_prime, d_x_dprime, d_xi }
}

fn mono(coeff: f64, u: &[u32], x_prime: &[u32]) -> Monomial {
    Monomial { coeff: c(coeff), u: u.to_vec(), x_prime: x_prime.to_vec() }
}

/// A polynomial graph pair with Newton seeds for its reduced equation.
#[derive(Debug, Clone)]
pub struct ReferenceMap {
    pub name: &'static str,
    pub map: PolynomialMap,
    pub seeds: Vec<Vec<Complex64>>,
}

/// The polynomial test set for the reduction and Newton checks.
pub fn reference_maps() -> Vec<ReferenceMap> {
    let i = Complex64::new(0.0, 1.0);
    vec![
        ReferenceMap {
            name: "square",
            map: PolynomialMap { dims: polynomial_dims(1, 1, 1, 1), components: vec![vec![mono(1.0, &[2], &[])]] },
            seeds: vec![vec![c(0.5)], vec![c(-0.3) + 0.2 * i]],
        },
        ReferenceMap {
            name: "zero",
            map: PolynomialMap { dims: polynomial_dims(2, 1, 1, 1), components: vec![vec![]] },
            seeds: vec![vec![c(0.3), c(0.1)]],
        },
        ReferenceMap {
            name: "product",
            map: PolynomialMap { dims: polynomial_dims(2, 0, 0, 1), components: vec![vec![mono(1.0, &[1, 1], &[])]] },
            seeds: vec![vec![c(0.4), c(0.3)], vec![c(-0.2), c(0.5)]],
        },
        ReferenceMap {
            name: "crossing_lines",
            map: PolynomialMap {
                dims: polynomial_dims(2, 1, 2, 2),
                components: vec![
                    vec![mono(1.0, &[2], &[]), mono(-1.0, &[0, 2], &[])],
                    vec![mono(1.0, &[1], &[1]), mono(0.5, &[], &[2])],
                ],
            },
            seeds: vec![vec![c(0.6), c(0.2)], vec![c(0.1), c(-0.7)]],
        },
        ReferenceMap {
            name: "cusp",
            map: PolynomialMap {
                dims: polynomial_dims(1, 2, 0, 1),
                components: vec![vec![mono(1.0, &[3], &[]), mono(1.0, &[1], &[1]), mono(2.0, &[], &[0, 2])]],
            },
            seeds: vec![vec![c(0.8)], vec![0.5 * i]],
        },
    ]
}

fn node_suite(st: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in [1usize, 2] {
        let w = random_node_stats(100, m, st.truncation, 0.9, 1.0, st.sobolev_s, st.seed)?;
        out.push(Check::residual(format!("node.m{m}.max_membership"), w[0], st.tol));
        out.push(Check::residual(format!("node.m{m}.max_roundtrip"), w[1], st.tol));
        out.push(Check::residual(format!("node.m{m}.max_trace_membership"), w[2], st.tol));
        out.push(Check::residual(format!("node.m{m}.transfer_contraction_excess"), w[3], 1e-14));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    let v = sampling::random_node_polynomial(&mut rng, 1, 4);
    let n_max = st.truncation.max(v.degree());
    let family = |z: Complex64, _t: &[Complex64]| node_chart_inverse(&boundary_traces(&v, z, n_max)?, st.sobolev_s, 1e-8);
    let mut worst: f64 = 0.0;
    let mut grid = Vec::new();
    for a in 0..10 {
        for b in 0..10 {
            let x = Complex64::from_polar(0.05 + 0.09 * a as f64, 0.6 * a as f64);
            let y = Complex64::from_polar(0.05 + 0.09 * b as f64, -0.4 * b as f64);
            let h = evaluate_h(family, x, y, &[])?;
            let scale = 1.0 + v.eval(x, y)[0].norm();
            worst = worst.max((h[0] - v.eval(x, y)[0]).norm() / scale);
            grid.push((x * 0.9, y * 0.9));
        }
    }
    out.push(Check::residual("node.h_reproduces_v", worst, 1e-10));
    let h_map = |x: Complex64, y: Complex64| evaluate_h(family, x, y, &[]).unwrap_or_default();
    out.push(Check::residual("node.h_holomorphic", holomorphicity_residual(h_map, &grid, 1e-4), 1e-6));
    Ok(out)
}

fn extension_suite(st: &Settings) -> Result<Vec<Check>> {
    let (s, tol) = (st.sobolev_s, st.tol);
    let l = |modes: &[(i64, f64)]| {
        let m: Vec<_> = modes.iter().map(|&(n, v)| (n, c(v))).collect();
        Loop::scalar(4, &m)
    };
    Ok(vec![
        Check::flag("extension.disk_polynomial", disk_extension_test(&l(&[(0, 1.0), (1, 1.0)])?, s, tol)?.extends(), true),
        Check::flag("extension.disk_pole", disk_extension_test(&l(&[(-1, 1.0)])?, s, tol)?.extends(), false),
        Check::flag("extension.disk_tiny_tail", disk_extension_test(&l(&[(-3, 1e-14)])?, s, tol)?.extends(), true),
        Check::flag(
            "extension.disk_pair_constants",
            disk_pair_node_test(&l(&[(0, 0.3)])?, &l(&[(0, 0.3)])?, s, tol)?.extends(),
            true,
        ),
        Check::flag(
            "extension.disk_pair_mismatch",
            disk_pair_node_test(&l(&[(0, 1.0), (1, 1.0)])?, &l(&[(0, 2.0), (1, 1.0)])?, s, tol)?.extends(),
            false,
        ),
        Check::flag(
            "extension.annulus_matching",
            annulus_extension_test(&l(&[(1, 1.0)])?, &l(&[(-1, 0.25)])?, 0.25, s, tol)?.extends(),
            true,
        ),
        Check::flag(
            "extension.annulus_mismatch",
            annulus_extension_test(&l(&[(1, 1.0)])?, &l(&[(1, 1.0)])?, 0.25, s, tol)?.extends(),
            false,
        ),
    ])
}

fn fredholm_suite(st: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    for (name, t, want) in [
        ("fredholm.index_c3", SubspaceTriple::coordinate(3, &[0, 1], &[1, 2])?, (1, 0, 1)),
        ("fredholm.index_full", SubspaceTriple::coordinate(4, &[0, 1, 2, 3], &[0, 1, 2, 3])?, (4, 0, 4)),
        ("fredholm.index_c4", SubspaceTriple::coordinate(4, &[0, 1], &[2])?, (0, 1, -1)),
    ] {
        let i = t.index();
        out.push(Check::exact(format!("{name}.dim_cap"), i.dim_cap as i64, want.0));
        out.push(Check::exact(format!("{name}.codim_sum"), i.codim_sum as i64, want.1));
        out.push(Check::exact(format!("{name}.index"), i.index, want.2));
    }

    let mut euler_violations = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let t = sampling::random_triple(&mut rng, n, p, q)?;
        euler_violations += usize::from(t.index().index != t.p() as i64 + t.q() as i64 - n as i64);
    }
    out.push(Check::exact("fredholm.euler_identity_violations", euler_violations as i64, 0));

    let mut unstable = 0;
    for trial in 0..20 {
        let t = sampling::random_triple(&mut rng, 8, 3, 3)?;
        let chk = stability_check("s".into(), &t, 1e-6, 5, st.seed.wrapping_add(trial));
        unstable += usize::from(chk.status != Status::Pass);
    }
    out.push(Check::exact("fredholm.generic_stability_failures", unstable as i64, 0));
    let mut near = CMatrix::zeros(2, 1);
    near[(0, 0)] = c(1.0);
    let mut near2 = near.clone();
    near2[(1, 0)] = c(1e-7);
    let degenerate = SubspaceTriple::new(2, near, near2, DEFAULT_RANK_TOL)?;
    let rep = index_stability_check(&degenerate, 1e-6, 5, &mut rng);
    out.push(Check::flag("fredholm.degenerate_inconclusive", rep.status == StabilityStatus::Inconclusive, true));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = sampling::random_triple_with_cap(&mut rng, 9, 5, 4, 2)?;
        let nc = normal_coordinates(&t);
        let sum = nc.projections().iter().fold(CMatrix::zeros(9, 9), |acc, p| acc + p);
        worst = worst.max(linalg::frobenius(&(sum - CMatrix::identity(9, 9))));
        let dims = nc.dims();
        worst = worst.max((dims.iter().sum::<usize>() as f64 - 9.0).abs());
    }
    out.push(Check::residual("fredholm.normal_coordinates_partition", worst, 1e-12));

    let t = SubspaceTriple::coordinate(4, &[0, 1], &[1, 2])?;
    let id = CMatrix::identity(4, 4);
    out.push(Check::flag("fredholm.exact_identity", exactness_check(&id, &t, &t)?.exact, true));
    let mut kill = id.clone();
    kill[(1, 1)] = c(0.0);
    out.push(Check::flag("fredholm.exact_killed_cap", exactness_check(&kill, &t, &t)?.exact, false));
    let mut inexact = 0;
    for _ in 0..100 {
        let src = sampling::random_triple_with_cap(&mut rng, 7, 4, 3, 1)?;
        let dst = sampling::random_triple_with_cap(&mut rng, 7, 4, 3, 1)?;
        let dh = sampling::gaussian_matrix(&mut rng, 7, 7);
        inexact += usize::from(!exactness_check(&dh, &src, &dst)?.exact);
    }
    out.push(Check::exact("fredholm.random_exactness_failures", inexact as i64, 0));

    out.push(Check::exact("fredholm.parametrized_1_2", parametrized_index(1, 2), 3));
    out.push(Check::exact("fredholm.parametrized_-1_1", parametrized_index(-1, 1), 0));
    let c3 = SubspaceTriple::coordinate(3, &[0, 1], &[1, 2])?;
    out.push(Check::exact("fredholm.parametrized_assembled", parametrized_triple(&c3, 2, None, None)?.index().index, 3));

    for rm in reference_maps() {
        let g = GraphPairLocal::from_polynomial(rm.map.clone())?;
        let r = finite_dim_reduction(&g);
        for (k, seed) in rm.seeds.iter().enumerate() {
            let sol = intersect_newton(&g, seed, 200, 1e-12)?;
            out.push(Check::residual(format!("fredholm.{}[{k}].newton_residual", rm.name), sol.residual(), 1e-12));
            let pass = r.tangent_check(sol.point(), DEFAULT_RANK_TOL)?.pass;
            out.push(Check::flag(format!("fredholm.{}[{k}].tangent_identities", rm.name), pass, true));
        }
    }
    Ok(out)
}

fn index_suite(st: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in 1..=3 {
        let i = hardy_split_triple(m, st.truncation)?.triple.index();
        out.push(Check::exact(format!("index.hardy_split_m{m}"), i.index, m as i64));
        out.push(Check::exact(format!("index.hardy_split_m{m}.codim_sum"), i.codim_sum as i64, 0));
    }
    for d in 0..=10usize {
        let n = st.truncation.max(2 * d + 1);
        let idx = hardy_triple_for_line_bundle(2 * d, n)?.triple.index().index;
        let rr = riemann_roch_index(TargetData { m: 1, c1d: 2 * d as i64 }, 0, Field::Complex);
        out.push(Check::exact(format!("index.line_bundle_d{d}"), idx, rr));
        out.push(Check::exact(format!("index.line_bundle_d{d}.count"), idx, 2 * d as i64 + 1));
    }
    let plane = |c1d| TargetData { m: 2, c1d };
    out.push(Check::exact("index.lines_in_plane", moduli_dimension(0, 0, plane(3)), 2));
    out.push(Check::exact("index.conics_in_plane", moduli_dimension(0, 0, plane(6)), 5));
    for d in 1..=5 {
        for n in 0..=5 {
            out.push(Check::exact(
                format!("index.plane_degree{d}_marks{n}"),
                moduli_dimension(0, n, plane(3 * d)),
                3 * d - 1 + i64::from(n),
            ));
        }
    }
    for g in 2..=5 {
        out.push(Check::exact(
            format!("index.point_target_genus{g}"),
            moduli_dimension(g, 0, TargetData { m: 0, c1d: 0 }),
            3 * i64::from(g) - 3,
        ));
    }
    for (g, n, grp, dim) in [
        (0, 0, IsotropyGroup::Psl2C, 3),
        (0, 1, IsotropyGroup::Affine, 2),
        (0, 2, IsotropyGroup::CStar, 1),
        (1, 0, IsotropyGroup::Torus, 1),
        (2, 0, IsotropyGroup::Trivial, 0),
    ] {
        let (got, got_dim) = isotropy_group(g, n);
        out.push(Check::flag(format!("index.isotropy_{g}_{n}.group"), got == grp, true));
        out.push(Check::exact(format!("index.isotropy_{g}_{n}.dim"), i64::from(got_dim), dim));
    }
    out.push(Check::exact("index.teichmuller_2_0", teichmuller_dim(2, 0), 3));
    out.push(Check::exact("index.teichmuller_1_1", teichmuller_dim(1, 1), 1));
    let t = TargetData { m: 3, c1d: 4 };
    for (g, n, k) in [(0, 3, 1), (1, 2, 2), (2, 0, 3)] {
        out.push(Check::exact(
            format!("index.core_slice_{g}_{n}_{k}"),
            core_slice_dims(g, n, k, t).1 + i64::from(k),
            moduli_dimension(g, n, t),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    let mut off = 0;
    for _ in 0..1000 {
        let (g, n) = (rng.random_range(0..20), rng.random_range(0..20));
        let t = TargetData { m: rng.random_range(0..10), c1d: rng.random_range(-50..50) };
        off += usize::from(
            moduli_dimension(g, n, t) != riemann_roch_index(t, g, Field::Complex) + teichmuller_dim(g, n),
        );
    }
    out.push(Check::exact("index.dimension_identity_violations", off as i64, 0));
    Ok(out)
}

fn energy_suite(st: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let z: Vec<Complex64> = (1..=60).map(|k| c(2f64.powi(-k))).collect();
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let ident = crate::node_model::NodePolynomial::scalar(&[(1, c(1.0))], &[], c(0.0))?;
    let fam = NeckFamily::constant_profile(z.clone(), ident)?;
    let rep = energy_axiom_check(&fam, &eps, EnergyTolerances::default())?;
    for row in &rep.rows {
        out.push(Check::close(format!("energy.identity_limit_eps{:e}", row.eps), row.limit, PI * row.eps * row.eps, 1e-8));
    }
    out.push(Check::flag("energy.identity_passes", rep.pass, true));
    let constant = crate::node_model::NodePolynomial::scalar(&[], &[], c(3.0))?;
    let rep = energy_axiom_check(&NeckFamily::constant_profile(z.clone(), constant)?, &eps, EnergyTolerances::default())?;
    out.push(Check::flag("energy.constant_passes", rep.pass, true));
    let bubble = z
        .iter()
        .map(|zk| crate::node_model::NodePolynomial::scalar(&[], &[(1, zk.inv())], c(0.0)))
        .collect::<Result<Vec<_>>>()?;
    let rep = energy_axiom_check(&NeckFamily::new(z, bubble)?, &eps, EnergyTolerances::default())?;
    out.push(Check::flag("energy.bubble_fails", rep.pass, false));

    let f = Loop::scalar(3, &[(-2, c(0.3)), (1, c(1.0)), (3, c(-0.5))])?;
    let whole = annulus_energy(&f, 0.1, 0.9)?;
    let split = annulus_energy(&f, 0.1, 0.4)? + annulus_energy(&f, 0.4, 0.9)?;
    out.push(Check::close("energy.additivity", split, whole, 1e-12));
    let x = Loop::scalar(1, &[(1, c(1.0))])?;
    out.push(Check::close("energy.identity_closed_form", annulus_energy(&x, 0.2, 0.7)?, PI * (0.49 - 0.04), st.tol));
    let inv = Loop::scalar(1, &[(-1, c(1.0))])?;
    let want = PI * (0.2f64.powi(-2) - 0.7f64.powi(-2));
    out.push(Check::close("energy.inverse_closed_form", annulus_energy(&inv, 0.2, 0.7)?, want, st.tol));
    Ok(out)
}

/// Runs one suite (or all of them, in module order).
pub fn verify_suite(suite: Suite, st: &Settings) -> Result<Vec<Check>> {
    Ok(match suite {
        Suite::Node => node_suite(st)?,
        Suite::Extension => extension_suite(st)?,
        Suite::Fredholm => fredholm_suite(st)?,
        Suite::Index => index_suite(st)?,
        Suite::Energy => energy_suite(st)?,
        Suite::All => {
            let mut all = node_suite(st)?;
            all.extend(extension_suite(st)?);
            all.extend(fredholm_suite(st)?);
            all.extend(index_suite(st)?);
            all.extend(energy_suite(st)?);
            all
        }
    })
}
