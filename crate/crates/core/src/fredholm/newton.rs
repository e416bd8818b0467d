use num_complex::Complex64;
use serde::Serialize;

use crate::complex_io;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::reduction::GraphPairLocal;
use super::triple::DEFAULT_RANK_TOL;

const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NewtonOutcome {
    Solution {
        #[serde(with = "complex_io::vec")]
        u: Vec<Complex64>,
        residual: f64,
        iterations: usize,
        /// `‖F‖` before each step and after the last one.
        history: Vec<f64>,
    },
    NoConvergence {
        #[serde(with = "complex_io::vec")]
        u: Vec<Complex64>,
        residual: f64,
        iterations: usize,
        history: Vec<f64>,
    },
}

impl NewtonOutcome {
    pub fn converged(&self) -> bool {
        matches!(self, NewtonOutcome::Solution { .. })
    }

    pub fn point(&self) -> &[Complex64] {
        match self {
            NewtonOutcome::Solution { u, .. } | NewtonOutcome::NoConvergence { u, .. } => u,
        }
    }

    pub fn residual(&self) -> f64 {
        match *self {
            NewtonOutcome::Solution { residual, .. } | NewtonOutcome::NoConvergence { residual, .. } => residual,
        }
    }

    pub fn history(&self) -> &[f64] {
        match self {
            NewtonOutcome::Solution { history, .. } | NewtonOutcome::NoConvergence { history, .. } => history,
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt step `-(JᴴJ + μ)⁻¹ JᴴF` with `μ = ‖F‖²`, evaluated through
/// the SVD of `J` so singular values below `rank_tol · σ_max` are dropped.
fn damped_step(j: &CMatrix, f: &[Complex64], mu: f64, rank_tol: f64) -> Vec<Complex64> {
    let n = j.ncols();
    if j.nrows() == 0 || n == 0 {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let svd = linalg::svd(j);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let mut step = vec![Complex64::new(0.0, 0.0); n];
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= rank_tol * smax || s == 0.0 {
            continue;
        }
        let proj: Complex64 = (0..f.len()).map(|r| svd.u[(r, k)].conj() * f[r]).sum();
        let w = proj * (s / (s * s + mu));
        for (c, out) in step.iter_mut().enumerate() {
            *out -= svd.v[(c, k)] * w;
        }
    }
    step
}

/// Damped Gauss–Newton for `F(u) = 0`. Each step is the Levenberg–Marquardt
/// direction followed by step halving until `‖F‖` decreases; stops once
/// `‖F‖ ≤ tol` or when no halving decreases the residual.
pub fn gauss_newton<F, J>(
    f: F,
    jac: J,
    seed: &[Complex64],
    max_iter: usize,
    tol: f64,
    rank_tol: f64,
) -> Result<NewtonOutcome>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    J: Fn(&[Complex64]) -> CMatrix,
{
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be nonnegative")));
    }
    if seed.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidArgument("seed has non-finite entries".into()));
    }
    let mut u = seed.to_vec();
    let mut fu = f(&u);
    let mut r = norm(&fu);
    let mut history = vec![r];
    for it in 0..max_iter {
        if r <= tol {
            return Ok(NewtonOutcome::Solution { u, residual: r, iterations: it, history });
        }
        let j = jac(&u);
        let step = damped_step(&j, &fu, r * r, rank_tol);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<Complex64> = u.iter().zip(&step).map(|(a, d)| a + d * t).collect();
            let ft = f(&trial);
            let rt = norm(&ft);
            if rt < r {
                accepted = Some((trial, ft, rt));
                break;
            }
            t *= 0.5;
        }
        let Some((nu, nf, nr)) = accepted else {
            return Ok(NewtonOutcome::NoConvergence { u, residual: r, iterations: it, history });
        };
        u = nu;
        fu = nf;
        r = nr;
        history.push(r);
    }
    if r <= tol {
        Ok(NewtonOutcome::Solution { u, residual: r, iterations: max_iter, history })
    } else {
        Ok(NewtonOutcome::NoConvergence { u, residual: r, iterations: max_iter, history })
    }
}

/// Solves the reduced intersection equation `f(u, 0) = 0` from `seed`.
pub fn intersect_newton(g: &GraphPairLocal, seed: &[Complex64], max_iter: usize, tol: f64) -> Result<NewtonOutcome> {
    let [d_u, d_xp, _, _] = g.dims();
    if seed.len() != d_u {
        return Err(Error::ShapeMismatch(format!("seed has length {}, d_u is {d_u}", seed.len())));
    }
    let zero = vec![Complex64::new(0.0, 0.0); d_xp];
    let f = |u: &[Complex64]| g.eval(u, &zero).expect("shape checked");
    let j = |u: &[Complex64]| g.jacobian(u, &zero).expect("shape checked").columns(0, d_u).into_owned();
    gauss_newton(f, j, seed, max_iter, tol, DEFAULT_RANK_TOL)
}
