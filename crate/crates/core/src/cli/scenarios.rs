//! Scenario schemas and the checks each subcommand runs on them.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::complex_io;
use crate::degeneration::{annulus_energy, apply_deformation, energy_axiom_check, Cycle, EnergyTolerances, NeckFamily};
use crate::error::Error;
use crate::extension::{annulus_extension_test, disk_extension_test, disk_pair_node_test, vprime_membership, NodeRecord};
use crate::fredholm::{
    finite_dim_reduction, index_stability_check, intersect_newton, parametrized_index, GraphPairLocal, PolynomialMap,
    StabilityStatus, SubspaceTriple,
};
use crate::loops::Loop;
use crate::moduli_index::{
    arithmetic_genus, hardy_split_triple, hardy_triple_for_line_bundle, is_stable_map, moduli_dimension,
    riemann_roch_index, teichmuller_dim, Field, NodalConfig, TargetData,
};
use crate::node_model::{
    boundary_traces, chart_roundtrip_residual, membership_residual, node_chart, transfer, NodeBoundary, NodeChart,
    NodePolynomial,
};
use crate::sampling;

use super::report::{Check, Status};
use super::Settings;

/// Why a scenario could not be run. Both map to exit code 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
}

impl From<Error> for ScenarioError {
    fn from(e: Error) -> Self {
        ScenarioError::Config(e.to_string())
    }
}

pub type Outcome = Result<(Option<String>, Vec<Check>), ScenarioError>;

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
}

fn yes() -> bool {
    true
}

/// `residual <= tol` is the expected outcome iff `expect_within`.
fn expect_residual(name: String, residual: f64, tol: f64, expect_within: bool) -> Check {
    let within = residual <= tol;
    Check::residual(name, residual, tol).with_status(if within == expect_within { Status::Pass } else { Status::Fail })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryCase {
    #[serde(with = "complex_io::pair")]
    z: Complex64,
    xi: Loop,
    eta: Loop,
    #[serde(default = "yes")]
    expect_member: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialCase {
    v: NodePolynomial,
    #[serde(with = "complex_io::pair")]
    z: Complex64,
}

fn default_z_max() -> f64 {
    0.9
}

fn one() -> usize {
    1
}

fn default_decay() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomNodes {
    count: usize,
    #[serde(default = "default_z_max")]
    z_max: f64,
    #[serde(default = "one")]
    m: usize,
    #[serde(default = "default_decay")]
    decay: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeScenario {
    id: Option<String>,
    #[serde(default)]
    boundaries: Vec<BoundaryCase>,
    #[serde(default)]
    charts: Vec<NodeChart>,
    #[serde(default)]
    polynomials: Vec<PolynomialCase>,
    random: Option<RandomNodes>,
}

/// Membership, chart roundtrip, trace consistency and `𝒯_z` contraction over
/// random charts; returns the four worst values.
pub(crate) fn random_node_stats(
    count: usize,
    m: usize,
    n_max: usize,
    z_max: f64,
    decay: f64,
    s: f64,
    seed: u64,
) -> Result<[f64; 4], Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    let deg = n_max.min(6);
    for _ in 0..count {
        let c = sampling::random_chart(&mut rng, m, n_max, z_max, decay)?;
        worst[0] = worst[0].max(membership_residual(&node_chart(&c), s)?);
        worst[1] = worst[1].max(chart_roundtrip_residual(&c, s)?);
        let v = sampling::random_node_polynomial(&mut rng, m, deg);
        worst[2] = worst[2].max(membership_residual(&boundary_traces(&v, c.z(), n_max)?, s)?);
        let image = transfer(c.z(), c.xi_plus())?.sobolev_norm(s)?;
        worst[3] = worst[3].max(image - c.z().norm() * c.xi_plus().sobolev_norm(s)?);
    }
    Ok(worst)
}

pub fn node_check(text: &str, st: &Settings) -> Outcome {
    let sc: NodeScenario = parse(text)?;
    let mut out = Vec::new();
    for (i, b) in sc.boundaries.into_iter().enumerate() {
        let nb = NodeBoundary::new(b.z, b.xi, b.eta)?;
        let r = membership_residual(&nb, st.sobolev_s)?;
        out.push(expect_residual(format!("boundary[{i}].membership"), r, st.tol, b.expect_member));
    }
    for (i, c) in sc.charts.iter().enumerate() {
        let r = membership_residual(&node_chart(c), st.sobolev_s)?;
        out.push(Check::residual(format!("chart[{i}].membership"), r, st.tol));
        let rt = chart_roundtrip_residual(c, st.sobolev_s)?;
        out.push(Check::residual(format!("chart[{i}].roundtrip"), rt, st.tol));
    }
    for (i, p) in sc.polynomials.iter().enumerate() {
        let b = boundary_traces(&p.v, p.z, st.truncation.max(p.v.degree()))?;
        let r = membership_residual(&b, st.sobolev_s)?;
        out.push(Check::residual(format!("polynomial[{i}].trace_membership"), r, st.tol));
    }
    if let Some(rn) = sc.random {
        let w = random_node_stats(rn.count, rn.m, st.truncation, rn.z_max, rn.decay, st.sobolev_s, st.seed)?;
        out.push(Check::residual("random.max_membership", w[0], st.tol));
        out.push(Check::residual("random.max_roundtrip", w[1], st.tol));
        out.push(Check::residual("random.max_trace_membership", w[2], st.tol));
        out.push(Check::residual("random.transfer_contraction_excess", w[3], 1e-14));
    }
    Ok((sc.id, out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskCase {
    xi: Loop,
    #[serde(default = "yes")]
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairCase {
    xi: Loop,
    eta: Loop,
    #[serde(default = "yes")]
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnulusCase {
    xi: Loop,
    eta: Loop,
    delta: f64,
    #[serde(default = "yes")]
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VPrimeCase {
    nodes: Vec<NodeRecord>,
    #[serde(default = "yes")]
    ball_check: bool,
    #[serde(default = "yes")]
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtendScenario {
    id: Option<String>,
    #[serde(default)]
    disks: Vec<DiskCase>,
    #[serde(default)]
    disk_pairs: Vec<PairCase>,
    #[serde(default)]
    annuli: Vec<AnnulusCase>,
    vprime: Option<VPrimeCase>,
}

pub fn extend_check(text: &str, st: &Settings) -> Outcome {
    let sc: ExtendScenario = parse(text)?;
    let (s, tol) = (st.sobolev_s, st.tol);
    let mut out = Vec::new();
    for (i, d) in sc.disks.iter().enumerate() {
        let e = disk_extension_test(&d.xi, s, tol)?;
        out.push(expect_residual(format!("disk[{i}].extends"), e.defect(), tol, d.expect));
    }
    for (i, d) in sc.disk_pairs.iter().enumerate() {
        let e = disk_pair_node_test(&d.xi, &d.eta, s, tol)?;
        out.push(expect_residual(format!("disk_pair[{i}].extends"), e.defect(), tol, d.expect));
    }
    for (i, d) in sc.annuli.iter().enumerate() {
        let e = annulus_extension_test(&d.xi, &d.eta, d.delta, s, tol)?;
        out.push(expect_residual(format!("annulus[{i}].extends"), e.defect(), tol, d.expect));
    }
    if let Some(v) = sc.vprime {
        let rep = vprime_membership(&v.nodes, v.ball_check, s, tol)?;
        for (i, n) in rep.nodes.iter().enumerate() {
            let c = Check::residual(format!("vprime.node[{i}].defect"), n.extension.defect(), tol);
            out.push(c.with_status(if n.pass { Status::Pass } else { Status::Fail }));
        }
        out.push(Check::flag("vprime.member", rep.member, v.expect));
    }
    Ok((sc.id, out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectedIndex {
    dim_cap: Option<usize>,
    codim_sum: Option<usize>,
    index: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilitySpec {
    eps: f64,
    trials: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleCase {
    triple: SubspaceTriple,
    expected: Option<ExpectedIndex>,
    stability: Option<StabilitySpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineBundleCase {
    deg2d: usize,
    truncation: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitCase {
    m: usize,
    truncation: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametrizedCase {
    base: i64,
    dim_lambda: usize,
    expected: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexScenario {
    id: Option<String>,
    #[serde(default)]
    triples: Vec<TripleCase>,
    #[serde(default)]
    line_bundles: Vec<LineBundleCase>,
    #[serde(default)]
    hardy_split: Vec<SplitCase>,
    #[serde(default)]
    parametrized: Vec<ParametrizedCase>,
}

pub(crate) fn stability_check(name: String, t: &SubspaceTriple, eps: f64, trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = index_stability_check(t, eps, trials, &mut rng);
    match rep.status {
        StabilityStatus::Inconclusive => Check::inconclusive(name, rep.min_gap, 10.0 * eps),
        _ => Check::exact(name, rep.index_changes as i64, 0),
    }
}

pub fn index(text: &str, st: &Settings) -> Outcome {
    let sc: IndexScenario = parse(text)?;
    let mut out = Vec::new();
    for (i, tc) in sc.triples.iter().enumerate() {
        let t = &tc.triple;
        let idx = t.index();
        let euler = t.p() as i64 + t.q() as i64 - t.ambient_dim() as i64;
        out.push(Check::exact(format!("triple[{i}].euler_identity"), idx.index, euler));
        if let Some(e) = &tc.expected {
            if let Some(v) = e.dim_cap {
                out.push(Check::exact(format!("triple[{i}].dim_cap"), idx.dim_cap as i64, v as i64));
            }
            if let Some(v) = e.codim_sum {
                out.push(Check::exact(format!("triple[{i}].codim_sum"), idx.codim_sum as i64, v as i64));
            }
            if let Some(v) = e.index {
                out.push(Check::exact(format!("triple[{i}].index"), idx.index, v));
            }
        }
        if let Some(sp) = &tc.stability {
            out.push(stability_check(format!("triple[{i}].stability"), t, sp.eps, sp.trials, st.seed));
        }
    }
    for (i, lb) in sc.line_bundles.iter().enumerate() {
        let n = lb.truncation.unwrap_or(st.truncation);
        let h = hardy_triple_for_line_bundle(lb.deg2d, n)?;
        let rr = riemann_roch_index(TargetData { m: 1, c1d: lb.deg2d as i64 }, 0, Field::Complex);
        out.push(Check::exact(format!("line_bundle[{i}].index"), h.triple.index().index, rr));
    }
    for (i, sp) in sc.hardy_split.iter().enumerate() {
        let h = hardy_split_triple(sp.m, sp.truncation.unwrap_or(st.truncation))?;
        let idx = h.triple.index();
        out.push(Check::exact(format!("hardy_split[{i}].dim_cap"), idx.dim_cap as i64, sp.m as i64));
        out.push(Check::exact(format!("hardy_split[{i}].codim_sum"), idx.codim_sum as i64, 0));
        out.push(Check::exact(format!("hardy_split[{i}].index"), idx.index, sp.m as i64));
    }
    for (i, p) in sc.parametrized.iter().enumerate() {
        out.push(Check::exact(
            format!("parametrized[{i}].index"),
            parametrized_index(p.base, p.dim_lambda),
            p.expected,
        ));
    }
    Ok((sc.id, out))
}

fn default_rank_tol() -> f64 {
    crate::fredholm::DEFAULT_RANK_TOL
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceScenario {
    id: Option<String>,
    map: PolynomialMap,
    #[serde(default, with = "complex_io::rows")]
    points: Vec<Vec<Complex64>>,
    #[serde(default = "default_rank_tol")]
    rank_tol: f64,
}

pub fn reduce(text: &str, st: &Settings) -> Outcome {
    let sc: ReduceScenario = parse(text)?;
    let g = GraphPairLocal::from_polynomial(sc.map)?;
    let r = finite_dim_reduction(&g);
    let mut out = Vec::new();
    for (i, u) in sc.points.iter().enumerate() {
        out.push(Check::residual(format!("point[{i}].intersection_residual"), r.intersection_residual(u)?, st.tol));
        let t = r.tangent_check(u, sc.rank_tol)?;
        out.push(Check::flag(format!("point[{i}].tangent_identities"), t.pass, true));
    }
    Ok((sc.id, out))
}

fn default_max_iter() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntersectScenario {
    id: Option<String>,
    map: PolynomialMap,
    #[serde(with = "complex_io::rows")]
    seeds: Vec<Vec<Complex64>>,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    /// Residual target `‖f(u, 0)‖`; defaults to `--tol`.
    tol: Option<f64>,
    #[serde(default = "default_rank_tol")]
    rank_tol: f64,
}

pub fn intersect(text: &str, st: &Settings) -> Outcome {
    let sc: IntersectScenario = parse(text)?;
    let tol = sc.tol.unwrap_or(st.tol);
    let g = GraphPairLocal::from_polynomial(sc.map)?;
    let r = finite_dim_reduction(&g);
    let mut out = Vec::new();
    for (i, seed) in sc.seeds.iter().enumerate() {
        let sol = intersect_newton(&g, seed, sc.max_iter, tol)?;
        out.push(Check::residual(format!("seed[{i}].newton_residual"), sol.residual(), tol));
        if sol.converged() {
            let t = r.tangent_check(sol.point(), sc.rank_tol)?;
            out.push(Check::flag(format!("seed[{i}].tangent_identities"), t.pass, true));
        }
    }
    Ok((sc.id, out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnulusEnergyCase {
    laurent: Loop,
    r: f64,
    #[serde(rename = "R")]
    big_r: f64,
    expected: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnergyScenario {
    id: Option<String>,
    family: Option<NeckFamily>,
    #[serde(default)]
    eps_schedule: Vec<f64>,
    energy_tol: Option<f64>,
    stability_tol: Option<f64>,
    #[serde(default = "yes")]
    expect_pass: bool,
    /// Expected `ε`-limits, compared with relative tolerance `--tol`.
    #[serde(default)]
    expected_limits: Vec<f64>,
    #[serde(default)]
    annuli: Vec<AnnulusEnergyCase>,
}

pub fn energy(text: &str, st: &Settings) -> Outcome {
    let sc: EnergyScenario = parse(text)?;
    let mut out = Vec::new();
    for (i, a) in sc.annuli.iter().enumerate() {
        let e = annulus_energy(&a.laurent, a.r, a.big_r)?;
        match a.expected {
            Some(want) => out.push(Check::close(format!("annulus[{i}].energy"), e, want, st.tol)),
            None => out.push(Check::residual(format!("annulus[{i}].energy_nonnegative"), (-e).max(0.0), 0.0)),
        }
    }
    if let Some(fam) = &sc.family {
        let defaults = EnergyTolerances::default();
        let tol = EnergyTolerances {
            energy: sc.energy_tol.unwrap_or(defaults.energy),
            stability: sc.stability_tol.unwrap_or(defaults.stability),
        };
        let rep = energy_axiom_check(fam, &sc.eps_schedule, tol)?;
        // A family expected to fail reports its per-ε numbers as inconclusive;
        // only the verdict is checked.
        let graded = |c: Check| if sc.expect_pass { c } else { c.with_status(Status::Inconclusive) };
        for (i, row) in rep.rows.iter().enumerate() {
            let name = format!("eps[{i}]={:e}", row.eps);
            out.push(graded(match row.stability {
                Some(v) => Check::residual(format!("{name}.k_stability"), v, tol.stability),
                None => Check::residual(format!("{name}.k_stability"), f64::NAN, tol.stability),
            }));
            if let Some(want) = sc.expected_limits.get(i) {
                out.push(graded(Check::close(format!("{name}.limit"), row.limit, *want, st.tol)));
            }
        }
        out.push(graded(Check::residual("energy.final_limit", rep.final_limit, tol.energy)));
        out.push(Check::flag("energy.axiom_verdict", rep.pass, sc.expect_pass));
    }
    Ok((sc.id, out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionRow {
    label: Option<String>,
    g: u32,
    n: u32,
    m: u32,
    c1d: i64,
    expected: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigCase {
    config: NodalConfig,
    expect_stable: Option<bool>,
    expect_genus: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeformationCase {
    config: NodalConfig,
    cycles: Vec<Cycle>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuliScenario {
    id: Option<String>,
    #[serde(default)]
    rows: Vec<DimensionRow>,
    #[serde(default)]
    configs: Vec<ConfigCase>,
    #[serde(default)]
    deformations: Vec<DeformationCase>,
}

pub fn moduli_dim(text: &str, _st: &Settings) -> Outcome {
    let sc: ModuliScenario = parse(text)?;
    let mut out = Vec::new();
    for (i, r) in sc.rows.iter().enumerate() {
        let label = r.label.clone().unwrap_or_else(|| format!("row[{i}]"));
        let t = TargetData { m: r.m, c1d: r.c1d };
        let d = moduli_dimension(r.g, r.n, t);
        let mut dim = Check::exact(format!("{label}.moduli_dimension"), d, r.expected.unwrap_or(d));
        if r.expected.is_none() {
            dim.expected = None;
        }
        out.push(dim);
        let chain = riemann_roch_index(t, r.g, Field::Complex) + teichmuller_dim(r.g, r.n);
        out.push(Check::exact(format!("{label}.index_plus_teichmuller"), d, chain));
    }
    for (i, c) in sc.configs.iter().enumerate() {
        if let Some(e) = c.expect_stable {
            out.push(Check::flag(format!("config[{i}].stable"), is_stable_map(&c.config), e));
        }
        if let Some(e) = c.expect_genus {
            out.push(Check::exact(format!("config[{i}].arithmetic_genus"), arithmetic_genus(&c.config), e));
        }
    }
    for (i, d) in sc.deformations.iter().enumerate() {
        let after = apply_deformation(&d.config, &d.cycles)?;
        out.push(Check::exact(
            format!("deformation[{i}].arithmetic_genus"),
            arithmetic_genus(&after),
            arithmetic_genus(&d.config),
        ));
    }
    Ok((sc.id, out))
}
