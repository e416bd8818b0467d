//! Acceptance criteria for the core crate. Runs without the libtest harness and
//! prints one `PASS`/`FAIL` line per criterion; exits non-zero on any failure.
//!
//! Reference values come from oracles written here: Gaussian elimination for
//! ranks, direct Laurent sums for the node, log-radial Simpson quadrature for
//! neck energies, and the smoothing Euler characteristic for genera.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use hardy_node_core::degeneration::{apply_deformation, energy_axiom_check, Cycle, EnergyTolerances, NeckFamily};
use hardy_node_core::fredholm::{finite_dim_reduction, intersect_newton, GraphPairLocal, DEFAULT_RANK_TOL};
use hardy_node_core::fredholm::{index_stability_check, StabilityStatus};
use hardy_node_core::linalg::CMatrix;
use hardy_node_core::moduli_index::{
    arithmetic_genus, hardy_split_triple, hardy_triple_for_line_bundle, moduli_dimension, riemann_roch_index,
    Component, Field, NodalConfig, PointRef, TargetData,
};
use hardy_node_core::node_model::{
    boundary_traces, chart_roundtrip_residual, evaluate_h, membership_residual, node_chart, node_chart_inverse,
    transfer, NodePolynomial,
};
use hardy_node_core::{cli, sampling, Loop};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

/// Rank by Gaussian elimination with complete pivoting.
fn ge_rank(a: &CMatrix, rel_tol: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.nrows(), m.ncols());
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (0.0, step, step);
        for i in step..rows {
            for j in step..cols {
                if m[(i, j)].norm() > best.0 {
                    best = (m[(i, j)].norm(), i, j);
                }
            }
        }
        if best.0 <= rel_tol * scale {
            break;
        }
        m.swap_rows(step, best.1);
        m.swap_columns(step, best.2);
        let pivot = m[(step, step)];
        for i in step + 1..rows {
            let f = m[(i, step)] / pivot;
            for j in step..cols {
                let v = m[(step, j)];
                m[(i, j)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

/// `(dim_cap, codim_sum, index)` from the rank of `[B′ | B″]`.
fn ge_index(n: usize, b1: &CMatrix, b2: &CMatrix) -> (i64, i64, i64) {
    let mut joint = CMatrix::zeros(n, b1.ncols() + b2.ncols());
    joint.columns_mut(0, b1.ncols()).copy_from(b1);
    joint.columns_mut(b1.ncols(), b2.ncols()).copy_from(b2);
    let r = ge_rank(&joint, 1e-10) as i64;
    let (p, q) = (ge_rank(b1, 1e-10) as i64, ge_rank(b2, 1e-10) as i64);
    (p + q - r, n as i64 - r, p + q - n as i64)
}

fn criterion_1() -> Outcome {
    let mut bad = Vec::new();
    let mut el = Duration::ZERO;
    for m in 1..=3 {
        let start = Instant::now();
        let t = hardy_split_triple(m, 32).expect("split triple").triple;
        let i = t.index();
        el += start.elapsed();
        let got = (i.dim_cap as i64, i.codim_sum as i64, i.index);
        let oracle = ge_index(t.ambient_dim(), t.basis_prime(), t.basis_dprime());
        if got != (m as i64, 0, m as i64) || oracle != got {
            bad.push(format!("m={m}: got {got:?}, oracle {oracle:?}"));
        }
    }
    outcome(
        bad.is_empty() && within_budget(el, 1.0),
        format!("m=1..3 exact; {:.3} s; mismatches {bad:?}", el.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut bad = Vec::new();
    let mut el = Duration::ZERO;
    for d in 0..=10usize {
        let start = Instant::now();
        let t = hardy_triple_for_line_bundle(2 * d, 64).expect("line bundle triple").triple;
        let idx = t.index().index;
        let rr = riemann_roch_index(TargetData { m: 1, c1d: 2 * d as i64 }, 0, Field::Complex);
        el += start.elapsed();
        let oracle = ge_index(t.ambient_dim(), t.basis_prime(), t.basis_dprime()).2;
        if idx != 2 * d as i64 + 1 || rr != idx || oracle != idx {
            bad.push(format!("d={d}: index {idx}, RR {rr}, oracle {oracle}"));
        }
    }
    outcome(
        bad.is_empty() && within_budget(el, 1.0),
        format!("d=0..10 exact; {:.3} s; mismatches {bad:?}", el.as_secs_f64()),
    )
}

fn laurent_sum(l: &Loop, x: Complex64) -> Complex64 {
    l.modes().map(|(n, c)| c[0] * x.powi(n as i32)).sum()
}

fn poly_oracle(v: &NodePolynomial, x: Complex64, y: Complex64) -> Complex64 {
    let mut out = v.c[0];
    for (k, row) in v.a.iter().enumerate() {
        out += row[0] * x.powi(k as i32 + 1);
    }
    for (k, row) in v.b.iter().enumerate() {
        out += row[0] * y.powi(k as i32 + 1);
    }
    out
}

fn criterion_3() -> Outcome {
    let (n_max, s) = (32usize, 1.5);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = [0.0f64; 5];
    for _ in 0..1000 {
        let c = sampling::random_chart(&mut rng, 1, n_max, 0.9, 1.0).expect("chart");
        let b = node_chart(&c);
        worst[0] = worst[0].max(membership_residual(&b, s).expect("residual"));
        worst[1] = worst[1].max(chart_roundtrip_residual(&c, s).expect("roundtrip"));

        // ξ = ξ₊ + λ + 𝒯_z η₊ coefficient by coefficient.
        let scale = 1.0 + c.xi_plus().sobolev_norm(0.0).unwrap().max(c.eta_plus().sobolev_norm(0.0).unwrap());
        for n in -(n_max as i64)..=n_max as i64 {
            let want = match n {
                0 => c.lambda()[0],
                n if n > 0 => c.xi_plus().coeff(n)[0],
                n => c.z().powi(-n as i32) * c.eta_plus().coeff(-n)[0],
            };
            worst[2] = worst[2].max((b.xi().coeff(n)[0] - want).norm() / scale);
        }

        let v = sampling::random_node_polynomial(&mut rng, 1, 6);
        let tr = boundary_traces(&v, c.z(), n_max).expect("traces");
        worst[3] = worst[3].max(membership_residual(&tr, s).expect("residual"));
        let x = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
        let direct = poly_oracle(&v, x, c.z() / x);
        worst[3] = worst[3].max((laurent_sum(tr.xi(), x) - direct).norm() / (1.0 + direct.norm()));
    }

    let v = sampling::random_node_polynomial(&mut rng, 1, 5);
    let family = |z: Complex64, _: &[Complex64]| node_chart_inverse(&boundary_traces(&v, z, n_max)?, s, 1e-12);
    for a in 0..10 {
        for b in 0..10 {
            let x = Complex64::from_polar(0.05 + 0.09 * a as f64, 0.7 * a as f64 + 0.1);
            let y = Complex64::from_polar(0.05 + 0.09 * b as f64, -0.5 * b as f64);
            let h = evaluate_h(family, x, y, &[]).expect("H")[0];
            let want = poly_oracle(&v, x, y);
            worst[4] = worst[4].max((h - want).norm() / (1.0 + want.norm()));
        }
    }
    let el = start.elapsed();
    let pass = worst[..4].iter().all(|w| *w <= 1e-12) && worst[4] <= 1e-10 && within_budget(el, 10.0);
    outcome(
        pass,
        format!(
            "membership {:.1e}, roundtrip {:.1e}, chart oracle {:.1e}, traces {:.1e}, H grid {:.1e}; {:.2} s",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            el.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let (mut violations, mut oracle_err, mut tightest) = (0, 0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let z = sampling::disk_point(&mut rng, 1.0);
        let s = rng.random_range(0.0..=3.0);
        let n_max = rng.random_range(1..=32);
        let decay = rng.random_range(0.0..2.0);
        let zeta = sampling::random_loop(&mut rng, 1, n_max, decay, |k| k > 0);
        let image = transfer(z, &zeta).expect("transfer");
        for n in 1..=n_max as i64 {
            let want = z.powi(n as i32) * zeta.coeff(n)[0];
            oracle_err = oracle_err.max((image.coeff(-n)[0] - want).norm() / (1.0 + want.norm()));
        }
        let lhs = image.sobolev_norm(s).unwrap();
        let rhs = z.norm() * zeta.sobolev_norm(s).unwrap();
        if lhs > rhs + 1e-14 * rhs.max(1.0) {
            violations += 1;
        }
        tightest = tightest.min(rhs - lhs);
    }
    outcome(
        violations == 0 && oracle_err <= 1e-14,
        format!("violations {violations}/1000, smallest margin {tightest:.1e}, coefficient oracle {oracle_err:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut euler = 0;
    let mut oracle = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let shared = rng.random_range(0..=p.min(q));
        let t = if rng.random_bool(0.5) {
            sampling::random_triple(&mut rng, n, p, q)
        } else {
            sampling::random_triple_with_cap(&mut rng, n, p, q, shared)
        }
        .expect("triple");
        let i = t.index();
        euler += usize::from(i.index != p as i64 + q as i64 - n as i64);
        let o = ge_index(n, t.basis_prime(), t.basis_dprime());
        oracle += usize::from(o != (i.dim_cap as i64, i.codim_sum as i64, i.index));
    }

    let mut stable = 0;
    for _ in 0..100 {
        let n = rng.random_range(4..=10);
        let (p, q) = (rng.random_range(1..n), rng.random_range(1..n));
        let t = sampling::random_triple(&mut rng, n, p, q).expect("triple");
        let rep = index_stability_check(&t, 1e-6, 10, &mut rng);
        stable += usize::from(rep.status == StabilityStatus::Stable);
    }

    let (mut solutions, mut tangent_ok, mut unconverged) = (0, 0, 0);
    for rm in cli::verify::reference_maps() {
        let g = GraphPairLocal::from_polynomial(rm.map).expect("map");
        let red = finite_dim_reduction(&g);
        for seed in &rm.seeds {
            let sol = intersect_newton(&g, seed, 200, 1e-12).expect("newton");
            if !sol.converged() {
                unconverged += 1;
                continue;
            }
            solutions += 1;
            tangent_ok += usize::from(red.tangent_check(sol.point(), DEFAULT_RANK_TOL).expect("tangent").pass);
        }
    }
    outcome(
        euler == 0 && oracle == 0 && stable == 100 && unconverged == 0 && tangent_ok == solutions,
        format!(
            "euler violations {euler}/1000, GE oracle mismatches {oracle}, stable {stable}/100, tangent identities {tangent_ok}/{solutions} (unconverged {unconverged})"
        ),
    )
}

fn criterion_6() -> Outcome {
    let plane = |c1d| TargetData { m: 2, c1d };
    // (label, g, n, target, classical value)
    let mut table: Vec<(String, u32, u32, TargetData, i64)> = vec![
        ("lines in P2".into(), 0, 0, plane(3), 2),
        ("conics in P2".into(), 0, 0, plane(6), 5),
    ];
    for d in 1..=5i64 {
        for n in 0..=5u32 {
            table.push((format!("degree {d}, {n} marks"), 0, n, plane(3 * d), 3 * d - 1 + i64::from(n)));
        }
    }
    for g in 2..=5u32 {
        table.push((format!("point target, genus {g}"), g, 0, TargetData { m: 0, c1d: 0 }, 3 * i64::from(g) - 3));
    }
    let bad: Vec<String> = table
        .iter()
        .filter(|(_, g, n, t, want)| moduli_dimension(*g, *n, *t) != *want)
        .map(|(l, ..)| l.clone())
        .collect();
    outcome(bad.is_empty(), format!("{} rows, mismatches {bad:?}", table.len()))
}

/// Energy of `x ↦ v(x, z/x)` on `r < |x| < R` by Simpson's rule in `(log ρ, θ)`.
fn quadrature_energy(v: &NodePolynomial, z: Complex64, r: f64, big_r: f64) -> f64 {
    let derivative = |x: Complex64| {
        let mut d = Complex64::new(0.0, 0.0);
        for (k, row) in v.a.iter().enumerate() {
            d += row[0] * (k as f64 + 1.0) * x.powi(k as i32);
        }
        let y = z / x;
        for (k, row) in v.b.iter().enumerate() {
            d -= row[0] * (k as f64 + 1.0) * y.powi(k as i32) * z / (x * x);
        }
        d
    };
    let (nt, nr) = (64usize, 4000usize);
    let (t0, t1) = (r.ln(), big_r.ln());
    let h = (t1 - t0) / nr as f64;
    let mut total = 0.0;
    for i in 0..=nr {
        let t = t0 + h * i as f64;
        let rho = t.exp();
        let ring: f64 = (0..nt)
            .map(|j| derivative(Complex64::from_polar(rho, TAU * j as f64 / nt as f64)).norm_sqr())
            .sum::<f64>()
            * TAU
            / nt as f64;
        let w = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * ring * rho * rho;
    }
    total * h / 3.0
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let one = Complex64::new(1.0, 0.0);
    let z: Vec<Complex64> = (1..=60).map(|k| one * 2f64.powi(-k)).collect();
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let v = NodePolynomial::scalar(&[(1, one)], &[], Complex64::new(0.0, 0.0)).unwrap();
    let fam = NeckFamily::constant_profile(z.clone(), v.clone()).unwrap();
    let rep = energy_axiom_check(&fam, &eps, EnergyTolerances::default()).expect("energy check");
    let mut worst_closed = 0.0f64;
    let mut worst_quad = 0.0f64;
    for row in &rep.rows {
        let closed = PI * row.eps * row.eps;
        worst_closed = worst_closed.max((row.limit - closed).abs() / closed);
        let zk = z[row.k_used];
        let quad = quadrature_energy(&v, zk, zk.norm() / row.eps, row.eps);
        worst_quad = worst_quad.max((row.limit - quad).abs() / quad);
    }
    let decreasing = rep.rows.windows(2).all(|w| w[1].limit < w[0].limit);

    let bubble: Vec<NodePolynomial> = z
        .iter()
        .map(|zk| NodePolynomial::scalar(&[], &[(1, zk.inv())], Complex64::new(0.0, 0.0)).unwrap())
        .collect();
    let divergent = energy_axiom_check(&NeckFamily::new(z, bubble).unwrap(), &eps, EnergyTolerances::default())
        .expect("energy check");
    let el = start.elapsed();
    outcome(
        worst_closed <= 1e-8 && worst_quad <= 1e-8 && decreasing && rep.pass && !divergent.pass && within_budget(el, 5.0),
        format!(
            "closed form {worst_closed:.1e}, quadrature {worst_quad:.1e}, decreasing {decreasing}, identity verdict {}, divergent verdict {}; {:.2} s",
            rep.pass,
            divergent.pass,
            el.as_secs_f64()
        ),
    )
}

/// Multisets of `k` unordered component pairs (loops allowed) on `c` vertices.
fn edge_multisets(c: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..c).flat_map(|i| (i..c).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    fn rec(pairs: &[(usize, usize)], from: usize, k: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in from..pairs.len() {
            cur.push(pairs[i]);
            rec(pairs, i, k - 1, cur, out);
            cur.pop();
        }
    }
    rec(&pairs, 0, k, &mut Vec::new(), &mut out);
    out
}

/// Genus of the smoothing from its Euler characteristic: each component
/// contributes `2 - 2g`, and smoothing a node removes two discs and glues in
/// an annulus, lowering `χ` by 2.
fn smoothing_genus(cfg: &NodalConfig) -> i64 {
    let chi: i64 = cfg.components().iter().map(|c| 2 - 2 * i64::from(c.genus)).sum::<i64>() - 2 * cfg.nodes().len() as i64;
    1 - chi / 2
}

fn criterion_8() -> Outcome {
    let (mut configs, mut deformations, mut failures) = (0usize, 0usize, Vec::new());
    for c in 1..=4usize {
        for k in 0..=4usize {
            for edges in edge_multisets(c, k) {
                let mut nodes = Vec::new();
                for (id, &(i, j)) in edges.iter().enumerate() {
                    nodes.push([PointRef(i, 2 * id as u64), PointRef(j, 2 * id as u64 + 1)]);
                }
                let marks = vec![PointRef(0, 100)];
                for code in 0..3usize.pow(c as u32) {
                    let comps: Vec<Component> = (0..c)
                        .map(|i| Component { genus: ((code / 3usize.pow(i as u32)) % 3) as u32, ghost: i % 2 == 1 })
                        .collect();
                    let Ok(cfg) = NodalConfig::new(comps.clone(), nodes.clone(), marks.clone()) else {
                        continue;
                    };
                    configs += 1;
                    let g0 = arithmetic_genus(&cfg);
                    if g0 != smoothing_genus(&cfg) {
                        failures.push(format!("oracle disagrees on {cfg:?}"));
                    }
                    let mut cycles = Vec::new();
                    for (i, comp) in comps.iter().enumerate() {
                        if comp.genus > 0 {
                            cycles.push(vec![Cycle::Nonseparating { component: i }]);
                        }
                        let ids: Vec<u64> =
                            cfg.nodes().iter().flatten().chain(cfg.marks()).filter(|p| p.0 == i).map(|p| p.1).collect();
                        for split in 0..=comp.genus {
                            for mask in 0..1u32 << ids.len() {
                                let moved = ids.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, id)| *id).collect();
                                cycles.push(vec![Cycle::Separating { component: i, genus: split, moved }]);
                            }
                        }
                    }
                    if comps[0].genus > 0 {
                        cycles.push(vec![
                            Cycle::Nonseparating { component: 0 },
                            Cycle::Separating { component: 0, genus: 0, moved: vec![100] },
                        ]);
                    }
                    for cy in cycles {
                        deformations += 1;
                        match apply_deformation(&cfg, &cy) {
                            Ok(out) if arithmetic_genus(&out) == g0 && smoothing_genus(&out) == g0 => {}
                            Ok(out) => failures.push(format!("{cy:?} on {cfg:?} gave genus {}", arithmetic_genus(&out))),
                            Err(e) => failures.push(format!("{cy:?} on {cfg:?}: {e}")),
                        }
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{configs} configurations, {deformations} deformations, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 hardy split of the sphere", criterion_1),
        ("2 twisted riemann-roch", criterion_2),
        ("3 node roundtrips", criterion_3),
        ("4 transfer contraction", criterion_4),
        ("5 fredholm engine", criterion_5),
        ("6 dimension-formula table", criterion_6),
        ("7 energy axiom", criterion_7),
        ("8 genus invariance", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
