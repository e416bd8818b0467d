use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_io;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::triple::{SubspaceTriple, TripleIndex};

type MapFn = dyn Fn(&[Complex64], &[Complex64]) -> Vec<Complex64> + Send + Sync;
type JacFn = dyn Fn(&[Complex64], &[Complex64]) -> CMatrix + Send + Sync;

const ORIGIN_VALUE_TOL: f64 = 1e-12;
const ORIGIN_DERIVATIVE_TOL: f64 = 1e-8;
const FD_STEP: f64 = 1e-6;

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Local graph pair in coordinates `(u, x′, x″, ξ)`:
/// `X′ = {x″ = 0, ξ = f(u, x′)}` and `X″ = {x′ = 0, ξ = 0}`,
/// with `f(0, 0) = 0` and `df(0, 0) = 0`.
#[derive(Clone)]
pub struct GraphPairLocal {
    d_u: usize,
    d_xp: usize,
    d_xpp: usize,
    d_xi: usize,
    f: Arc<MapFn>,
    jac: Option<Arc<JacFn>>,
}

impl fmt::Debug for GraphPairLocal {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("GraphPairLocal")
            .field("dims", &self.dims())
            .field("exact_jacobian", &self.jac.is_some())
            .finish()
    }
}

impl GraphPairLocal {
    /// `f` must be holomorphic: derivatives are taken by real central differences.
    /// `jac`, when given, returns the `d_ξ × (d_u + d_x′)` matrix `[∂_u f | ∂_x′ f]`.
    pub fn new(dims: [usize; 4], f: Arc<MapFn>, jac: Option<Arc<JacFn>>) -> Result<Self> {
        let [d_u, d_xp, d_xpp, d_xi] = dims;
        if d_u == 0 {
            return Err(Error::InvalidGraphPair("d_u must be positive".into()));
        }
        let g = GraphPairLocal { d_u, d_xp, d_xpp, d_xi, f, jac };
        let zu = vec![Complex64::new(0.0, 0.0); d_u];
        let zx = vec![Complex64::new(0.0, 0.0); d_xp];
        let at_zero = g.eval(&zu, &zx)?;
        if at_zero.len() != d_xi {
            return Err(Error::InvalidGraphPair(format!(
                "f returns {} components, d_xi is {d_xi}",
                at_zero.len()
            )));
        }
        let v = norm(&at_zero);
        if !(v <= ORIGIN_VALUE_TOL) {
            return Err(Error::InvalidGraphPair(format!("|f(0,0)| = {v:e}")));
        }
        let d = linalg::spectral_norm(&g.jacobian(&zu, &zx)?);
        if !(d <= ORIGIN_DERIVATIVE_TOL) {
            return Err(Error::InvalidGraphPair(format!("|df(0,0)| = {d:e}")));
        }
        Ok(g)
    }

    pub fn from_polynomial(p: PolynomialMap) -> Result<Self> {
        p.validate()?;
        let dims = [p.dims.d_u, p.dims.d_x_prime, p.dims.d_x_dprime, p.dims.d_xi];
        let p = Arc::new(p);
        let pf = Arc::clone(&p);
        GraphPairLocal::new(dims, Arc::new(move |u, x| pf.eval(u, x)), Some(Arc::new(move |u, x| p.jacobian(u, x))))
    }

    /// `(d_u, d_x′, d_x″, d_ξ)`.
    pub fn dims(&self) -> [usize; 4] {
        [self.d_u, self.d_xp, self.d_xpp, self.d_xi]
    }

    fn check_args(&self, u: &[Complex64], xp: &[Complex64]) -> Result<()> {
        if u.len() != self.d_u || xp.len() != self.d_xp {
            return Err(Error::ShapeMismatch(format!(
                "f takes (u, x′) of lengths ({}, {}), got ({}, {})",
                self.d_u,
                self.d_xp,
                u.len(),
                xp.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, u: &[Complex64], xp: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_args(u, xp)?;
        Ok((self.f)(u, xp))
    }

    /// `[∂_u f | ∂_x′ f]` at `(u, x′)`, exact if supplied, otherwise by central
    /// differences with step `1e-6 · (1 + ‖(u, x′)‖)`.
    pub fn jacobian(&self, u: &[Complex64], xp: &[Complex64]) -> Result<CMatrix> {
        self.check_args(u, xp)?;
        if let Some(j) = &self.jac {
            let m = j(u, xp);
            if m.nrows() != self.d_xi || m.ncols() != self.d_u + self.d_xp {
                return Err(Error::ShapeMismatch(format!(
                    "supplied Jacobian is {}×{}, expected {}×{}",
                    m.nrows(),
                    m.ncols(),
                    self.d_xi,
                    self.d_u + self.d_xp
                )));
            }
            return Ok(m);
        }
        let mut point: Vec<Complex64> = u.iter().chain(xp).copied().collect();
        let h = FD_STEP * (1.0 + norm(&point));
        let mut out = CMatrix::zeros(self.d_xi, point.len());
        for j in 0..point.len() {
            let keep = point[j];
            point[j] = keep + h;
            let plus = (self.f)(&point[..self.d_u], &point[self.d_u..]);
            point[j] = keep - h;
            let minus = (self.f)(&point[..self.d_u], &point[self.d_u..]);
            point[j] = keep;
            for i in 0..self.d_xi {
                out[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDims {
    pub d_u: usize,
    pub d_x_prime: usize,
    #[serde(default)]
    pub d_x_dprime: usize,
    pub d_xi: usize,
}

/// `coeff · Π uᵢ^{u[i]} · Π x′ⱼ^{x_prime[j]}`; missing exponents are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(with = "complex_io::pair")]
    pub coeff: Complex64,
    #[serde(default)]
    pub u: Vec<u32>,
    #[serde(default)]
    pub x_prime: Vec<u32>,
}

/// Polynomial `f`: one list of monomials per `ξ` component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    pub dims: PolynomialDims,
    pub components: Vec<Vec<Monomial>>,
}

fn exponent(e: &[u32], i: usize) -> u32 {
    e.get(i).copied().unwrap_or(0)
}

impl Monomial {
    fn value(&self, u: &[Complex64], xp: &[Complex64]) -> Complex64 {
        let mut v = self.coeff;
        for (i, z) in u.iter().enumerate() {
            v *= z.powu(exponent(&self.u, i));
        }
        for (i, z) in xp.iter().enumerate() {
            v *= z.powu(exponent(&self.x_prime, i));
        }
        v
    }

    /// Derivative in variable `var` of the concatenated `(u, x′)`.
    fn derivative(&self, u: &[Complex64], xp: &[Complex64], var: usize) -> Complex64 {
        let (exps, at) = if var < u.len() { (&self.u, var) } else { (&self.x_prime, var - u.len()) };
        let e = exponent(exps, at);
        if e == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut v = self.coeff * f64::from(e);
        for (i, z) in u.iter().chain(xp).enumerate() {
            let k = if i < u.len() { exponent(&self.u, i) } else { exponent(&self.x_prime, i - u.len()) };
            v *= z.powu(if i == var { k - 1 } else { k });
        }
        v
    }
}

impl PolynomialMap {
    fn validate(&self) -> Result<()> {
        if self.components.len() != self.dims.d_xi {
            return Err(Error::InvalidGraphPair(format!(
                "{} component lists for d_xi = {}",
                self.components.len(),
                self.dims.d_xi
            )));
        }
        for m in self.components.iter().flatten() {
            if m.u.len() > self.dims.d_u || m.x_prime.len() > self.dims.d_x_prime {
                return Err(Error::InvalidGraphPair("monomial exponent list longer than its variable block".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: &[Complex64], xp: &[Complex64]) -> Vec<Complex64> {
        self.components
            .iter()
            .map(|c| c.iter().map(|m| m.value(u, xp)).sum())
            .collect()
    }

    pub fn jacobian(&self, u: &[Complex64], xp: &[Complex64]) -> CMatrix {
        CMatrix::from_fn(self.components.len(), u.len() + xp.len(), |i, j| {
            self.components[i].iter().map(|m| m.derivative(u, xp, j)).sum()
        })
    }
}

/// The reduced data `U = {(u,0,0,ξ)}`, `U′ = {(u,0,0,f(u,0))}`, `U″ = {(u,0,0,0)}`
/// of a graph pair, together with the ambient pair it reduces.
#[derive(Debug, Clone)]
pub struct FiniteDimReduction {
    g: GraphPairLocal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentReport {
    /// Triple `(T X, T X′, T X″)` at the point.
    pub ambient: TripleIndex,
    /// Triple `(T U, T U′, T U″)` at the point.
    pub reduced: TripleIndex,
    /// Rank of `[cap_U | cap_X]` inside `(u, x′, x″, ξ)` space, which equals both
    /// cap dimensions exactly when the two intersections coincide.
    pub joint_cap_rank: usize,
    pub caps_equal: bool,
    pub quotients_equal: bool,
    /// `T U ∩ (T X′ + T X″) = T U′ + T U″`.
    pub sums_compatible: bool,
    pub pass: bool,
}

pub fn finite_dim_reduction(g: &GraphPairLocal) -> FiniteDimReduction {
    FiniteDimReduction { g: g.clone() }
}

impl FiniteDimReduction {
    pub fn graph_pair(&self) -> &GraphPairLocal {
        &self.g
    }

    fn split<'a>(&self, p: &'a [Complex64]) -> Result<[&'a [Complex64]; 4]> {
        let [a, b, c, d] = self.g.dims();
        if p.len() != a + b + c + d {
            return Err(Error::ShapeMismatch(format!("point has {} coordinates, expected {}", p.len(), a + b + c + d)));
        }
        let (u, rest) = p.split_at(a);
        let (xp, rest) = rest.split_at(b);
        let (xpp, xi) = rest.split_at(c);
        Ok([u, xp, xpp, xi])
    }

    fn zeros(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); n]
    }

    /// The reduced equation `f(u, 0)`.
    pub fn intersection_equation(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.g.eval(u, &Self::zeros(self.g.d_xp))
    }

    pub fn intersection_residual(&self, u: &[Complex64]) -> Result<f64> {
        Ok(norm(&self.intersection_equation(u)?))
    }

    /// Point `(u, x′, x″, ξ)` lies in `X′`.
    pub fn in_x_prime(&self, p: &[Complex64], tol: f64) -> Result<bool> {
        let [u, xp, xpp, xi] = self.split(p)?;
        let f = self.g.eval(u, xp)?;
        let d: Vec<Complex64> = xi.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok(norm(xpp) <= tol && norm(&d) <= tol)
    }

    pub fn in_x_dprime(&self, p: &[Complex64], tol: f64) -> Result<bool> {
        let [_, xp, _, xi] = self.split(p)?;
        Ok(norm(xp) <= tol && norm(xi) <= tol)
    }

    pub fn in_u(&self, p: &[Complex64], tol: f64) -> Result<bool> {
        let [_, xp, xpp, _] = self.split(p)?;
        Ok(norm(xp) <= tol && norm(xpp) <= tol)
    }

    pub fn in_u_prime(&self, p: &[Complex64], tol: f64) -> Result<bool> {
        Ok(self.in_u(p, tol)? && self.in_x_prime(p, tol)?)
    }

    pub fn in_u_dprime(&self, p: &[Complex64], tol: f64) -> Result<bool> {
        Ok(self.in_u(p, tol)? && self.in_x_dprime(p, tol)?)
    }

    /// Compares the tangent triples of `(X, X′, X″)` and `(U, U′, U″)` at the
    /// intersection point `(u, 0, 0, 0)`, where `f(u, 0) = 0`. Everything is
    /// decided by rank with the relative threshold `rank_tol`.
    pub fn tangent_check(&self, u: &[Complex64], rank_tol: f64) -> Result<TangentReport> {
        let [d_u, d_xp, d_xpp, d_xi] = self.g.dims();
        let dim = d_u + d_xp + d_xpp + d_xi;
        let j = self.g.jacobian(u, &Self::zeros(d_xp))?;
        let one = Complex64::new(1.0, 0.0);
        let (o_xpp, o_xi) = (d_u + d_xp, d_u + d_xp + d_xpp);

        let mut tx_p = CMatrix::zeros(dim, d_u + d_xp);
        for c in 0..d_u + d_xp {
            tx_p[(c, c)] = one;
            for i in 0..d_xi {
                tx_p[(o_xi + i, c)] = j[(i, c)];
            }
        }
        let mut tx_pp = CMatrix::zeros(dim, d_u + d_xpp);
        for c in 0..d_u {
            tx_pp[(c, c)] = one;
        }
        for c in 0..d_xpp {
            tx_pp[(o_xpp + c, d_u + c)] = one;
        }

        let du = d_u + d_xi;
        let mut tu_p = CMatrix::zeros(du, d_u);
        let mut tu_pp = CMatrix::zeros(du, d_u);
        for c in 0..d_u {
            tu_p[(c, c)] = one;
            tu_pp[(c, c)] = one;
            for i in 0..d_xi {
                tu_p[(d_u + i, c)] = j[(i, c)];
            }
        }

        let tx = SubspaceTriple::new(dim, tx_p, tx_pp, rank_tol)?;
        let tu = SubspaceTriple::new(du, tu_p, tu_pp, rank_tol)?;
        let ambient = tx.index();
        let reduced = tu.index();

        let cap_of = |t: &SubspaceTriple| {
            let (a, b) = t.orthonormal_bases();
            linalg::intersection(a, b, rank_tol)
        };
        let cap_x = cap_of(&tx);
        let cap_u_small = cap_of(&tu);
        // Embed (u, ξ) ↦ (u, 0, 0, ξ).
        let mut cap_u = CMatrix::zeros(dim, cap_u_small.ncols());
        for c in 0..cap_u_small.ncols() {
            for r in 0..d_u {
                cap_u[(r, c)] = cap_u_small[(r, c)];
            }
            for r in 0..d_xi {
                cap_u[(o_xi + r, c)] = cap_u_small[(d_u + r, c)];
            }
        }
        // Both blocks are orthonormal, so equal spans give singular values √2 and 0;
        // finite-difference Jacobians perturb the zeros at the √rank_tol level at most.
        let joint_cap_rank = linalg::rank_above(&linalg::hstack(&[&cap_u, &cap_x]), rank_tol.sqrt());
        let caps_equal = cap_u.ncols() == cap_x.ncols() && joint_cap_rank == cap_x.ncols();
        let quotients_equal = ambient.codim_sum == reduced.codim_sum;

        // T U ∩ (T X′ + T X″) against T U′ + T U″, both inside T U = (u, ξ).
        let (a, b) = tx.orthonormal_bases();
        let sum_x = linalg::range_basis(&linalg::hstack(&[a, b]), rank_tol);
        let mut tu_amb = CMatrix::zeros(dim, du);
        for r in 0..d_u {
            tu_amb[(r, r)] = one;
        }
        for r in 0..d_xi {
            tu_amb[(o_xi + r, d_u + r)] = one;
        }
        let restricted = linalg::intersection(&tu_amb, &sum_x, rank_tol).ncols();
        let (a, b) = tu.orthonormal_bases();
        let sum_u = linalg::rank(&linalg::hstack(&[a, b]), rank_tol);
        let sums_compatible = restricted == sum_u;

        Ok(TangentReport {
            ambient,
            reduced,
            joint_cap_rank,
            caps_equal,
            quotients_equal,
            sums_compatible,
            pass: caps_equal && quotients_equal && sums_compatible,
        })
    }
}
