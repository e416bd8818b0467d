//! The standard node `N = {(x, y) ∈ 𝔻² : |xy| < 1}` fibred by `xy = z`.
//!
//! The fibre `N_z` has two boundary circles, parametrized by
//! `ι₁(e^{iθ}) = (e^{iθ}, z e^{-iθ})` and `ι₂(e^{iθ}) = (z e^{-iθ}, e^{iθ})`.
//! Boundary data `(ξ, η)` of a holomorphic map on `N_z` satisfies
//! `η₋ₙ = zⁿ ξₙ` for every `n ∈ ℤ` when `z ≠ 0`, and `ξ₀ = η₀`,
//! `ξₙ = ηₙ = 0 (n < 0)` when `z = 0`. The manifold `𝒩` of such triples is
//! parametrized by `(z, ξ₊, η₊, λ) ↦ (z, ξ₊ + λ + 𝒯_z η₊, η₊ + λ + 𝒯_z ξ₊)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_io;
use crate::error::{Error, Result};
use crate::loops::{HardyPart, Loop};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_gluing(z: Complex64) -> Result<()> {
    if z.is_finite() && z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::GluingParameter(z.norm()))
    }
}

/// `v(x, y) = Σ_{n>0} aₙ xⁿ + Σ_{n>0} bₙ yⁿ + c`, a holomorphic function on
/// every fibre `N_z`. `a[k]` and `b[k]` hold the coefficients of degree `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePolynomial {
    #[serde(with = "complex_io::rows")]
    pub a: Vec<Vec<Complex64>>,
    #[serde(with = "complex_io::rows")]
    pub b: Vec<Vec<Complex64>>,
    #[serde(with = "complex_io::vec")]
    pub c: Vec<Complex64>,
}

impl NodePolynomial {
    pub fn new(a: Vec<Vec<Complex64>>, b: Vec<Vec<Complex64>>, c: Vec<Complex64>) -> Result<Self> {
        let p = NodePolynomial { a, b, c };
        p.validate()?;
        Ok(p)
    }

    /// Scalar polynomial from `(degree, coeff)` lists for the `x` and `y` parts.
    pub fn scalar(a: &[(usize, Complex64)], b: &[(usize, Complex64)], c: Complex64) -> Result<Self> {
        let dense = |terms: &[(usize, Complex64)]| -> Result<Vec<Vec<Complex64>>> {
            let deg = terms.iter().map(|t| t.0).max().unwrap_or(0);
            let mut out = vec![vec![zero()]; deg];
            for &(d, v) in terms {
                if d == 0 {
                    return Err(Error::InvalidArgument(
                        "x/y parts start at degree 1; use c for constants".into(),
                    ));
                }
                out[d - 1][0] += v;
            }
            Ok(out)
        };
        Self::new(dense(a)?, dense(b)?, vec![c])
    }

    pub fn m(&self) -> usize {
        self.c.len()
    }

    fn validate(&self) -> Result<()> {
        let m = self.c.len();
        if m == 0 {
            return Err(Error::InvalidArgument("constant term must have m ≥ 1 entries".into()));
        }
        for row in self.a.iter().chain(&self.b) {
            if row.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient row of length {} in a polynomial with m = {m}",
                    row.len()
                )));
            }
        }
        let all = self.a.iter().chain(&self.b).flatten().chain(&self.c);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polynomial coefficient".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    /// Direct evaluation at `(x, y)`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Vec<Complex64> {
        let mut out = self.c.clone();
        let mut xp = Complex64::new(1.0, 0.0);
        for row in &self.a {
            xp *= x;
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * xp;
            }
        }
        let mut yp = Complex64::new(1.0, 0.0);
        for row in &self.b {
            yp *= y;
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * yp;
            }
        }
        out
    }
}

/// Boundary loops `(ξ, η)` on `∂₁N_z, ∂₂N_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeBoundaryWire")]
pub struct NodeBoundary {
    #[serde(with = "complex_io::pair")]
    z: Complex64,
    xi: Loop,
    eta: Loop,
}

#[derive(Deserialize)]
struct NodeBoundaryWire {
    #[serde(with = "complex_io::pair")]
    z: Complex64,
    xi: Loop,
    eta: Loop,
}

impl TryFrom<NodeBoundaryWire> for NodeBoundary {
    type Error = Error;
    fn try_from(w: NodeBoundaryWire) -> Result<Self> {
        NodeBoundary::new(w.z, w.xi, w.eta)
    }
}

impl NodeBoundary {
    pub fn new(z: Complex64, xi: Loop, eta: Loop) -> Result<Self> {
        check_gluing(z)?;
        xi.check_shape(&eta)?;
        Ok(NodeBoundary { z, xi, eta })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn xi(&self) -> &Loop {
        &self.xi
    }

    pub fn eta(&self) -> &Loop {
        &self.eta
    }

    pub fn into_parts(self) -> (Complex64, Loop, Loop) {
        (self.z, self.xi, self.eta)
    }
}

/// Chart coordinates `(z, ξ₊, η₊, λ)` of a point of `𝒩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeChartWire")]
pub struct NodeChart {
    #[serde(with = "complex_io::pair")]
    z: Complex64,
    xi_plus: Loop,
    eta_plus: Loop,
    #[serde(with = "complex_io::vec")]
    lambda: Vec<Complex64>,
}

#[derive(Deserialize)]
struct NodeChartWire {
    #[serde(with = "complex_io::pair")]
    z: Complex64,
    xi_plus: Loop,
    eta_plus: Loop,
    #[serde(with = "complex_io::vec")]
    lambda: Vec<Complex64>,
}

impl TryFrom<NodeChartWire> for NodeChart {
    type Error = Error;
    fn try_from(w: NodeChartWire) -> Result<Self> {
        NodeChart::new(w.z, w.xi_plus, w.eta_plus, w.lambda)
    }
}

impl NodeChart {
    pub fn new(z: Complex64, xi_plus: Loop, eta_plus: Loop, lambda: Vec<Complex64>) -> Result<Self> {
        check_gluing(z)?;
        xi_plus.check_shape(&eta_plus)?;
        if lambda.len() != xi_plus.m() {
            return Err(Error::ShapeMismatch(format!(
                "lambda has {} entries, loops have m = {}",
                lambda.len(),
                xi_plus.m()
            )));
        }
        if lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite lambda".into()));
        }
        for (name, l) in [("xi_plus", &xi_plus), ("eta_plus", &eta_plus)] {
            if !l.supported_on(|n| n > 0) {
                return Err(Error::Support(format!("{name} has modes with n ≤ 0")));
            }
        }
        Ok(NodeChart {
            z,
            xi_plus,
            eta_plus,
            lambda,
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn xi_plus(&self) -> &Loop {
        &self.xi_plus
    }

    pub fn eta_plus(&self) -> &Loop {
        &self.eta_plus
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }
}

/// Restricts `v` to the two boundary circles of `N_z`: `y = z/x` on `∂₁`
/// and `x = z/y` on `∂₂`, exactly at the coefficient level.
pub fn boundary_traces(v: &NodePolynomial, z: Complex64, n_max: usize) -> Result<NodeBoundary> {
    check_gluing(z)?;
    v.validate()?;
    if v.degree() > n_max {
        return Err(Error::TruncationOverflow {
            degree: v.degree(),
            n_max,
        });
    }
    let m = v.m();
    let mut xi = Loop::zeros(m, n_max);
    let mut eta = Loop::zeros(m, n_max);
    xi.coeff_mut(0).copy_from_slice(&v.c);
    eta.coeff_mut(0).copy_from_slice(&v.c);
    let mut zn = Complex64::new(1.0, 0.0);
    for n in 1..=v.degree() {
        zn *= z;
        let k = n as i64;
        if let Some(a) = v.a.get(n - 1) {
            xi.coeff_mut(k).copy_from_slice(a);
            for (t, s) in eta.coeff_mut(-k).iter_mut().zip(a) {
                *t = s * zn;
            }
        }
        if let Some(b) = v.b.get(n - 1) {
            eta.coeff_mut(k).copy_from_slice(b);
            for (t, s) in xi.coeff_mut(-k).iter_mut().zip(b) {
                *t = s * zn;
            }
        }
    }
    NodeBoundary::new(z, xi, eta)
}

/// `𝒯_z(Σ_{n>0} cₙ e^{inθ}) = Σ_{n>0} zⁿ cₙ e^{-inθ}`.
///
/// Accepts the closed disk `|z| ≤ 1`, where the operator is still a contraction
/// in every `H^s` norm.
pub fn transfer(z: Complex64, plus: &Loop) -> Result<Loop> {
    if !(z.is_finite() && z.norm() <= 1.0) {
        return Err(Error::GluingParameter(z.norm()));
    }
    if !plus.supported_on(|n| n > 0) {
        return Err(Error::Support("transfer input must live on modes n > 0".into()));
    }
    Ok(transfer_unchecked(z, plus))
}

fn transfer_unchecked(z: Complex64, plus: &Loop) -> Loop {
    let mut out = Loop::zeros(plus.m(), plus.n_max());
    let mut zn = Complex64::new(1.0, 0.0);
    for n in 1..=plus.n_max() as i64 {
        zn *= z;
        for (t, s) in out.coeff_mut(-n).iter_mut().zip(plus.coeff(n)) {
            *t = s * zn;
        }
    }
    out
}

/// Outcome of a membership test, carrying the relative residual either way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Membership {
    Member { residual: f64 },
    NonMember { residual: f64 },
}

impl Membership {
    pub(crate) fn from_residual(residual: f64, tol: f64) -> Self {
        if residual <= tol {
            Membership::Member { residual }
        } else {
            Membership::NonMember { residual }
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }

    pub fn residual(&self) -> f64 {
        match *self {
            Membership::Member { residual } | Membership::NonMember { residual } => residual,
        }
    }
}

/// Defect of the defining relations of `𝒩`, placed mode by mode:
/// mode `-n` (`n ≥ 0`) holds `η₋ₙ - zⁿ ξₙ`, mode `n > 0` holds `ξ₋ₙ - zⁿ ηₙ`.
///
/// For `z ≠ 0` the second family is the relation `η₋ₙ = zⁿ ξₙ` at negative
/// `n`, multiplied through by `z^{|n|}`. At `z = 0` the entries reduce to
/// `η₀ - ξ₀`, `η₋ₙ` and `ξ₋ₙ`.
pub fn relation_defect(b: &NodeBoundary) -> Loop {
    let (xi, eta) = (&b.xi, &b.eta);
    let mut d = Loop::zeros(xi.m(), xi.n_max());
    if b.z == zero() {
        for (t, (e, x)) in d.coeff_mut(0).iter_mut().zip(eta.coeff(0).iter().zip(xi.coeff(0))) {
            *t = e - x;
        }
        for n in 1..=xi.n_max() as i64 {
            d.coeff_mut(-n).copy_from_slice(eta.coeff(-n));
            d.coeff_mut(n).copy_from_slice(xi.coeff(-n));
        }
        return d;
    }
    let mut zn = Complex64::new(1.0, 0.0);
    for n in 0..=xi.n_max() as i64 {
        if n > 0 {
            zn *= b.z;
        }
        for (t, (e, x)) in d.coeff_mut(-n).iter_mut().zip(eta.coeff(-n).iter().zip(xi.coeff(n))) {
            *t = e - zn * x;
        }
        if n > 0 {
            for (t, (x, e)) in d.coeff_mut(n).iter_mut().zip(xi.coeff(-n).iter().zip(eta.coeff(n))) {
                *t = x - zn * e;
            }
        }
    }
    d
}

/// Sobolev-`s` norm of [`relation_defect`] divided by `1 + max(‖ξ‖ₛ, ‖η‖ₛ)`.
pub fn membership_residual(b: &NodeBoundary, s: f64) -> Result<f64> {
    let scale = 1.0 + b.xi.sobolev_norm(s)?.max(b.eta.sobolev_norm(s)?);
    Ok(relation_defect(b).sobolev_norm(s)? / scale)
}

pub fn node_membership(b: &NodeBoundary, s: f64, tol: f64) -> Result<Membership> {
    Ok(Membership::from_residual(membership_residual(b, s)?, tol))
}

/// `(z, ξ₊, η₊, λ) ↦ (z, ξ₊ + λ + 𝒯_z η₊, η₊ + λ + 𝒯_z ξ₊)`.
pub fn node_chart(c: &NodeChart) -> NodeBoundary {
    let with_constant = |plus: &Loop, other: &Loop| {
        let mut l = plus + &transfer_unchecked(c.z, other);
        l.coeff_mut(0).copy_from_slice(&c.lambda);
        l
    };
    NodeBoundary {
        z: c.z,
        xi: with_constant(&c.xi_plus, &c.eta_plus),
        eta: with_constant(&c.eta_plus, &c.xi_plus),
    }
}

/// Left inverse of [`node_chart`] on members of `𝒩`: `λ = ξ₀`, `ξ₊ = P₊ξ`, `η₊ = P₊η`.
pub fn node_chart_inverse(b: &NodeBoundary, s: f64, tol: f64) -> Result<NodeChart> {
    let verdict = node_membership(b, s, tol)?;
    if !verdict.is_member() {
        return Err(Error::NotMember {
            residual: verdict.residual(),
        });
    }
    NodeChart::new(
        b.z,
        b.xi.hardy_project(HardyPart::Plus),
        b.eta.hardy_project(HardyPart::Plus),
        b.xi.constant_term(),
    )
}

/// Relative distance between `c` and `node_chart_inverse(node_chart(c))`:
/// `(‖Δξ₊‖ₛ + ‖Δη₊‖ₛ + |Δλ|) / (1 + max(‖ξ₊‖ₛ, ‖η₊‖ₛ, |λ|))`.
pub fn chart_roundtrip_residual(c: &NodeChart, s: f64) -> Result<f64> {
    let back = node_chart_inverse(&node_chart(c), s, f64::INFINITY)?;
    let dl: f64 = back.lambda.iter().zip(&c.lambda).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let l: f64 = c.lambda.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let nx = c.xi_plus.sobolev_norm(s)?;
    let ny = c.eta_plus.sobolev_norm(s)?;
    let diff = (&back.xi_plus - &c.xi_plus).sobolev_norm(s)? + (&back.eta_plus - &c.eta_plus).sobolev_norm(s)? + dl;
    Ok(diff / (1.0 + nx.max(ny).max(l)))
}

/// `H(x, y, t) = ξ₊(x) + η₊(y) + λ` for the chart `family(xy, t)`.
///
/// For `y ≠ 0` this equals `ξ_{xy,t}(x)` and for `x ≠ 0` it equals `η_{xy,t}(y)`.
pub fn evaluate_h<F>(family: F, x: Complex64, y: Complex64, t: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &[Complex64]) -> Result<NodeChart>,
{
    for (name, p) in [("x", x), ("y", y)] {
        if !(p.is_finite() && p.norm() < 1.0) {
            return Err(Error::OutsideDisk(format!("{name} = {p}")));
        }
    }
    let z = x * y;
    let chart = family(z, t).map_err(|e| Error::FamilyUndefined(format!("z = {z}: {e}")))?;
    let xs = chart.xi_plus.eval_laurent_unchecked(x);
    let ys = chart.eta_plus.eval_laurent_unchecked(y);
    Ok(xs
        .iter()
        .zip(&ys)
        .zip(&chart.lambda)
        .map(|((a, b), l)| a + b + l)
        .collect())
}

/// Largest modulus of the Wirtinger derivatives `∂H/∂x̄`, `∂H/∂ȳ` over the grid,
/// by centred finite differences with step `h`. Vanishes up to `O(h²)` for
/// holomorphic `H`.
pub fn holomorphicity_residual<F>(h_map: F, grid: &[(Complex64, Complex64)], h: f64) -> f64
where
    F: Fn(Complex64, Complex64) -> Vec<Complex64>,
{
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for &(x, y) in grid {
        let wirtinger = |shift: &dyn Fn(Complex64) -> Vec<Complex64>| {
            let re: Vec<Complex64> = shift(dx)
                .iter()
                .zip(shift(-dx))
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect();
            let im: Vec<Complex64> = shift(dy)
                .iter()
                .zip(shift(-dy))
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect();
            re.iter()
                .zip(&im)
                .map(|(a, b)| (0.5 * (a + i * b)).norm())
                .fold(0.0, f64::max)
        };
        let in_x = wirtinger(&|d| h_map(x + d, y));
        let in_y = wirtinger(&|d| h_map(x, y + d));
        worst = worst.max(in_x).max(in_y);
    }
    worst
}
