//! Truncated Fourier loops `S¹ → ℂᵐ`.
//!
//! A [`Loop`] stores the coefficients `ζₙ ∈ ℂᵐ` of `e^{inθ}` for every mode
//! `n ∈ [-N, N]`. On the unit circle `x = e^{iθ}` the same coefficients define
//! the Laurent polynomial `Σ ζₙ xⁿ`, which is how loops are evaluated on annuli.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_io::{from_pair, to_pair};
use crate::error::{Error, Result};

/// Default truncation order for scenarios.
pub const DEFAULT_TRUNCATION: usize = 32;

/// Slack allowed when checking that a point lies on an annulus boundary.
const RADIUS_SLACK: f64 = 1e-12;

/// Weight `(1 + |n|)^s` of mode `n` in the `H^s` norm.
pub fn sobolev_weight(n: i64, s: f64) -> f64 {
    (1.0 + n.unsigned_abs() as f64).powf(s)
}

/// Number of uniform samples used for pointwise operations on a loop of order `n_max`.
pub fn grid_size(n_max: usize) -> usize {
    8 * (n_max + 1)
}

/// Which part of the Hardy splitting `H^s = H^s_- ⊕ ℂᵐ ⊕ H^s_+` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyPart {
    /// Modes `n > 0`.
    Plus,
    /// Modes `n < 0`.
    Minus,
    /// The mode `n = 0`.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopWire", into = "LoopWire")]
pub struct Loop {
    m: usize,
    n_max: usize,
    /// Flat storage, mode `n` component `j` at `(n + N) * m + j`.
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct LoopWire {
    m: usize,
    n_max: usize,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<LoopWire> for Loop {
    type Error = Error;

    fn try_from(w: LoopWire) -> Result<Self> {
        let rows = w
            .coeffs
            .into_iter()
            .map(|row| row.into_iter().map(from_pair).collect())
            .collect();
        Loop::new(w.m, w.n_max, rows)
    }
}

impl From<Loop> for LoopWire {
    fn from(l: Loop) -> Self {
        LoopWire {
            m: l.m,
            n_max: l.n_max,
            coeffs: l
                .coeffs
                .chunks(l.m)
                .map(|row| row.iter().copied().map(to_pair).collect())
                .collect(),
        }
    }
}

impl Loop {
    pub fn zeros(m: usize, n_max: usize) -> Self {
        assert!(m > 0, "loop dimension must be positive");
        Loop {
            m,
            n_max,
            coeffs: vec![Complex64::new(0.0, 0.0); (2 * n_max + 1) * m],
        }
    }

    /// Builds a loop from one row per mode, listed from `-n_max` to `n_max`.
    pub fn new(m: usize, n_max: usize, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidLoop("target dimension m must be positive".into()));
        }
        if rows.len() != 2 * n_max + 1 {
            return Err(Error::InvalidLoop(format!(
                "expected {} mode rows for n_max = {n_max}, got {}",
                2 * n_max + 1,
                rows.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidLoop(format!(
                    "mode {} has {} components, expected {m}",
                    i as i64 - n_max as i64,
                    row.len()
                )));
            }
            coeffs.extend(row);
        }
        Self::from_flat(m, n_max, coeffs)
    }

    fn from_flat(m: usize, n_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidLoop(format!(
                "non-finite coefficient at mode {}",
                (pos / m) as i64 - n_max as i64
            )));
        }
        Ok(Loop { m, n_max, coeffs })
    }

    /// Builds a loop from sparse `(mode, value)` pairs; unspecified modes are zero.
    pub fn from_modes(m: usize, n_max: usize, modes: &[(i64, Vec<Complex64>)]) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidLoop("target dimension m must be positive".into()));
        }
        let mut out = Loop::zeros(m, n_max);
        for (n, v) in modes {
            if v.len() != m {
                return Err(Error::InvalidLoop(format!(
                    "mode {n} has {} components, expected {m}",
                    v.len()
                )));
            }
            if n.unsigned_abs() as usize > n_max {
                return Err(Error::TruncationOverflow {
                    degree: n.unsigned_abs() as usize,
                    n_max,
                });
            }
            out.coeff_mut(*n).copy_from_slice(v);
        }
        Self::from_flat(m, n_max, out.coeffs)
    }

    /// Scalar (`m = 1`) loop from sparse `(mode, value)` pairs.
    pub fn scalar(n_max: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let modes: Vec<_> = modes.iter().map(|&(n, c)| (n, vec![c])).collect();
        Self::from_modes(1, n_max, &modes)
    }

    /// The constant loop with value `v`.
    pub fn constant(n_max: usize, v: &[Complex64]) -> Result<Self> {
        Self::from_modes(v.len(), n_max, &[(0, v.to_vec())])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn offset(&self, n: i64) -> usize {
        assert!(
            n.unsigned_abs() as usize <= self.n_max,
            "mode {n} outside truncation {}",
            self.n_max
        );
        (n + self.n_max as i64) as usize * self.m
    }

    /// Coefficient of `e^{inθ}`. Panics if `|n| > n_max`.
    pub fn coeff(&self, n: i64) -> &[Complex64] {
        let o = self.offset(n);
        &self.coeffs[o..o + self.m]
    }

    /// Coefficient of `e^{inθ}`, zero outside the truncation.
    pub fn coeff_or_zero(&self, n: i64) -> Vec<Complex64> {
        if n.unsigned_abs() as usize <= self.n_max {
            self.coeff(n).to_vec()
        } else {
            vec![Complex64::new(0.0, 0.0); self.m]
        }
    }

    pub(crate) fn coeff_mut(&mut self, n: i64) -> &mut [Complex64] {
        let o = self.offset(n);
        &mut self.coeffs[o..o + self.m]
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &[Complex64])> + '_ {
        let n_max = self.n_max as i64;
        self.coeffs
            .chunks(self.m)
            .enumerate()
            .map(move |(i, c)| (i as i64 - n_max, c))
    }

    pub fn same_shape(&self, other: &Loop) -> bool {
        self.m == other.m && self.n_max == other.n_max
    }

    pub(crate) fn check_shape(&self, other: &Loop) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "(m={}, N={}) vs (m={}, N={})",
                self.m, self.n_max, other.m, other.n_max
            )))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// `‖ζ‖ₛ = sqrt(Σₙ (1+|n|)^{2s} |ζₙ|²)` over the stored modes.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::NegativeSobolev(s));
        }
        let sum: f64 = self
            .modes()
            .map(|(n, c)| {
                let w = sobolev_weight(n, s);
                w * w * c.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum();
        Ok(sum.sqrt())
    }

    /// Keeps only the requested Hardy part; other modes are zeroed.
    pub fn hardy_project(&self, part: HardyPart) -> Loop {
        let mut out = Loop::zeros(self.m, self.n_max);
        for (n, c) in self.modes() {
            let keep = match part {
                HardyPart::Plus => n > 0,
                HardyPart::Minus => n < 0,
                HardyPart::Constant => n == 0,
            };
            if keep {
                out.coeff_mut(n).copy_from_slice(c);
            }
        }
        out
    }

    pub fn constant_term(&self) -> Vec<Complex64> {
        self.coeff(0).to_vec()
    }

    /// True if every mode with `n ∉ allowed` vanishes exactly.
    pub fn supported_on(&self, allowed: impl Fn(i64) -> bool) -> bool {
        self.modes()
            .filter(|(n, _)| !allowed(*n))
            .all(|(_, c)| c.iter().all(|z| z.norm_sqr() == 0.0))
    }

    /// Evaluates `Σₙ ζₙ xⁿ` at a point of the closed annulus `r_in ≤ |x| ≤ r_out`.
    pub fn laurent_eval(&self, point: Complex64, r_in: f64, r_out: f64) -> Result<Vec<Complex64>> {
        if !(0.0 <= r_in && r_in < r_out && r_out <= 1.0) {
            return Err(Error::InvalidRadii { r_in, r_out });
        }
        let r = point.norm();
        if !point.is_finite() || r < r_in * (1.0 - RADIUS_SLACK) || r > r_out * (1.0 + RADIUS_SLACK) {
            return Err(Error::OutsideAnnulus {
                point: format!("{point}"),
                r_in,
                r_out,
            });
        }
        if r == 0.0 && !self.supported_on(|n| n >= 0) {
            return Err(Error::OutsideAnnulus {
                point: "0 (negative modes present)".into(),
                r_in,
                r_out,
            });
        }
        Ok(self.eval_laurent_unchecked(point))
    }

    /// Laurent evaluation without domain checks. Horner in `x` for the
    /// nonnegative part and in `1/x` for the negative part.
    pub(crate) fn eval_laurent_unchecked(&self, x: Complex64) -> Vec<Complex64> {
        let n = self.n_max as i64;
        let mut pos = vec![Complex64::new(0.0, 0.0); self.m];
        for k in (0..=n).rev() {
            for (acc, c) in pos.iter_mut().zip(self.coeff(k)) {
                *acc = *acc * x + c;
            }
        }
        if x.norm_sqr() == 0.0 {
            return pos;
        }
        let inv = x.inv();
        let mut neg = vec![Complex64::new(0.0, 0.0); self.m];
        for k in (1..=n).rev() {
            for (acc, c) in neg.iter_mut().zip(self.coeff(-k)) {
                *acc = (*acc + c) * inv;
            }
        }
        pos.iter().zip(&neg).map(|(a, b)| a + b).collect()
    }

    /// Value at `e^{iθ}`.
    pub fn eval_at_angle(&self, theta: f64) -> Vec<Complex64> {
        self.eval_laurent_unchecked(Complex64::from_polar(1.0, theta))
    }

    /// Values on `count` uniformly spaced angles `2πk/count`.
    pub fn sample(&self, count: usize) -> Vec<Vec<Complex64>> {
        (0..count)
            .map(|k| self.eval_at_angle(2.0 * PI * k as f64 / count as f64))
            .collect()
    }

    /// Fits a loop of order `n_max` to uniform samples by a discrete Fourier sum.
    /// Exact when the sampled function is a trigonometric polynomial of order
    /// `n_max` and `samples.len() ≥ 2·n_max + 1`.
    pub fn from_samples(samples: &[Vec<Complex64>], n_max: usize) -> Result<Self> {
        let count = samples.len();
        if count < 2 * n_max + 1 {
            return Err(Error::InvalidArgument(format!(
                "{count} samples cannot resolve order {n_max}"
            )));
        }
        let m = samples[0].len();
        if m == 0 || samples.iter().any(|s| s.len() != m) {
            return Err(Error::InvalidLoop("inconsistent sample dimensions".into()));
        }
        let mut out = Loop::zeros(m, n_max);
        for n in -(n_max as i64)..=n_max as i64 {
            let acc = out.coeff_mut(n);
            for (k, s) in samples.iter().enumerate() {
                let w = Complex64::from_polar(1.0, -2.0 * PI * (n * k as i64) as f64 / count as f64);
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += v * w;
                }
            }
            for a in acc.iter_mut() {
                *a /= count as f64;
            }
        }
        Self::from_flat(m, n_max, out.coeffs)
    }

    /// Largest Euclidean modulus over the `8(N+1)`-point sample grid.
    pub fn sampled_sup_norm(&self) -> f64 {
        self.sample(grid_size(self.n_max))
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Componentwise pointwise product, taken on the sample grid and re-fit to order `2N`.
    pub fn pointwise_product(&self, other: &Loop) -> Result<Loop> {
        self.check_shape(other)?;
        let count = grid_size(self.n_max);
        let a = self.sample(count);
        let b = other.sample(count);
        let prod: Vec<Vec<Complex64>> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).collect())
            .collect();
        Loop::from_samples(&prod, 2 * self.n_max)
    }

    /// Winding number about the origin of a scalar loop, from argument
    /// increments on the `8(N+1)`-point grid.
    pub fn winding_number(&self, tol: f64) -> Result<i64> {
        if self.m != 1 {
            return Err(Error::InvalidArgument(format!(
                "winding number needs a scalar loop, got m = {}",
                self.m
            )));
        }
        let values: Vec<Complex64> = self
            .sample(grid_size(self.n_max))
            .into_iter()
            .map(|v| v[0])
            .collect();
        let min_modulus = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_modulus > tol) {
            return Err(Error::WindingUndefined { min_modulus });
        }
        let total: f64 = values
            .iter()
            .zip(values.iter().cycle().skip(1))
            .map(|(a, b)| (b / a).arg())
            .sum();
        Ok((total / (2.0 * PI)).round() as i64)
    }

    /// Re-truncates to order `n_max`, padding with zeros. Shrinking fails if a
    /// dropped mode is nonzero.
    pub fn with_truncation(&self, n_max: usize) -> Result<Loop> {
        let mut out = Loop::zeros(self.m, n_max);
        for (n, c) in self.modes() {
            if n.unsigned_abs() as usize <= n_max {
                out.coeff_mut(n).copy_from_slice(c);
            } else if c.iter().any(|z| z.norm_sqr() != 0.0) {
                return Err(Error::TruncationOverflow {
                    degree: n.unsigned_abs() as usize,
                    n_max,
                });
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: Complex64) -> Loop {
        Loop {
            m: self.m,
            n_max: self.n_max,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    fn zip_with(&self, other: &Loop, f: impl Fn(Complex64, Complex64) -> Complex64) -> Loop {
        assert!(self.same_shape(other), "loop shape mismatch");
        Loop {
            m: self.m,
            n_max: self.n_max,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &Loop {
    type Output = Loop;
    fn add(self, rhs: &Loop) -> Loop {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Loop {
    type Output = Loop;
    fn sub(self, rhs: &Loop) -> Loop {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Loop {
    type Output = Loop;
    fn neg(self) -> Loop {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &Loop {
    type Output = Loop;
    fn mul(self, rhs: Complex64) -> Loop {
        self.scaled(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sobolev_norm_examples() {
        let one = Loop::scalar(4, &[(0, c(1.0, 0.0))]).unwrap();
        assert_eq!(one.sobolev_norm(2.0).unwrap(), 1.0);
        let e1 = Loop::scalar(4, &[(1, c(1.0, 0.0))]).unwrap();
        assert!((e1.sobolev_norm(1.0).unwrap() - 2.0).abs() < 1e-15);
        let three = Loop::scalar(4, &[(2, c(3.0, 0.0))]).unwrap();
        assert!((three.sobolev_norm(0.5).unwrap() - 5.196152422706632).abs() < 1e-12);
    }

    #[test]
    fn negative_sobolev_exponent_rejected() {
        let z = Loop::zeros(1, 2);
        assert_eq!(z.sobolev_norm(-0.5), Err(Error::NegativeSobolev(-0.5)));
        assert_eq!(z.sobolev_norm(0.0).unwrap(), 0.0);
    }

    #[test]
    fn hardy_projection_examples() {
        let z = Loop::scalar(3, &[(-1, c(1.0, 0.0)), (0, c(2.0, 0.0)), (1, c(3.0, 0.0))]).unwrap();
        assert_eq!(z.hardy_project(HardyPart::Plus), Loop::scalar(3, &[(1, c(3.0, 0.0))]).unwrap());
        assert_eq!(z.hardy_project(HardyPart::Minus), Loop::scalar(3, &[(-1, c(1.0, 0.0))]).unwrap());
        assert_eq!(z.constant_term(), vec![c(2.0, 0.0)]);
        let sum = &(&z.hardy_project(HardyPart::Plus) + &z.hardy_project(HardyPart::Constant))
            + &z.hardy_project(HardyPart::Minus);
        assert_eq!(sum, z);
    }

    #[test]
    fn laurent_eval_examples() {
        let x = Loop::scalar(2, &[(1, c(1.0, 0.0))]).unwrap();
        assert_eq!(x.laurent_eval(c(0.5, 0.0), 0.0, 1.0).unwrap(), vec![c(0.5, 0.0)]);
        let inv = Loop::scalar(2, &[(-1, c(1.0, 0.0))]).unwrap();
        assert_eq!(inv.laurent_eval(c(0.5, 0.0), 0.25, 1.0).unwrap(), vec![c(2.0, 0.0)]);
        // 1 + x + x² at 0.3+0.4i; Horner oracle value 1.23 + 0.64i
        let p = Loop::scalar(2, &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0)), (2, c(1.0, 0.0))]).unwrap();
        let v = p.laurent_eval(c(0.3, 0.4), 0.0, 1.0).unwrap()[0];
        assert!((v - c(1.23, 0.64)).norm() < 1e-15);
    }

    #[test]
    fn laurent_eval_rejects_points_off_annulus() {
        let p = Loop::scalar(2, &[(-1, c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            p.laurent_eval(c(0.1, 0.0), 0.25, 1.0),
            Err(Error::OutsideAnnulus { .. })
        ));
        assert!(p.laurent_eval(c(1.5, 0.0), 0.25, 1.0).is_err());
        assert!(p.laurent_eval(c(0.0, 0.0), 0.0, 1.0).is_err());
        assert!(matches!(
            p.laurent_eval(c(0.5, 0.0), 0.6, 0.4),
            Err(Error::InvalidRadii { .. })
        ));
        // Boundary points of the unit circle are accepted.
        assert!(p.laurent_eval(Complex64::from_polar(1.0, 0.7), 0.25, 1.0).is_ok());
    }

    #[test]
    fn winding_examples() {
        let e1 = Loop::scalar(4, &[(1, c(1.0, 0.0))]).unwrap();
        assert_eq!(e1.winding_number(1e-9).unwrap(), 1);
        let e2 = Loop::scalar(4, &[(2, c(3.0, 0.0))]).unwrap();
        assert_eq!(e2.winding_number(1e-9).unwrap(), 2);
        let shifted = Loop::scalar(4, &[(0, c(2.0, 0.0)), (1, c(1.0, 0.0))]).unwrap();
        assert_eq!(shifted.winding_number(1e-9).unwrap(), 0);
        let inv = Loop::scalar(4, &[(-3, c(0.5, 0.0))]).unwrap();
        assert_eq!(inv.winding_number(1e-9).unwrap(), -3);
    }

    #[test]
    fn winding_rejects_loops_through_origin() {
        // 1 + e^{iθ} vanishes at θ = π, which is a grid point.
        let through = Loop::scalar(3, &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            through.winding_number(1e-9),
            Err(Error::WindingUndefined { .. })
        ));
        let vector = Loop::zeros(2, 3);
        assert!(vector.winding_number(1e-9).is_err());
    }

    #[test]
    fn construction_validates_shape_and_finiteness() {
        assert!(Loop::new(1, 1, vec![vec![c(0.0, 0.0)]; 2]).is_err());
        assert!(Loop::new(2, 0, vec![vec![c(0.0, 0.0)]]).is_err());
        assert!(Loop::new(1, 0, vec![vec![c(f64::NAN, 0.0)]]).is_err());
        assert!(Loop::scalar(2, &[(3, c(1.0, 0.0))]).is_err());
        assert!(Loop::new(0, 0, vec![vec![]]).is_err());
    }

    #[test]
    fn json_schema_roundtrip() {
        let l = Loop::from_modes(2, 1, &[(-1, vec![c(1.0, 2.0), c(0.0, 0.0)]), (1, vec![c(0.0, 0.0), c(-3.0, 0.5)])])
            .unwrap();
        let text = serde_json::to_string(&l).unwrap();
        assert_eq!(
            text,
            r#"{"m":2,"n_max":1,"coeffs":[[[1.0,2.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[-3.0,0.5]]]}"#
        );
        let back: Loop = serde_json::from_str(&text).unwrap();
        assert_eq!(back, l);
        let bad = r#"{"m":1,"n_max":1,"coeffs":[[[1.0,0.0]]]}"#;
        assert!(serde_json::from_str::<Loop>(bad).is_err());
    }

    #[test]
    fn samples_refit_exactly() {
        let l = Loop::scalar(3, &[(-2, c(0.5, -1.0)), (0, c(1.0, 0.0)), (3, c(0.0, 2.0))]).unwrap();
        let back = Loop::from_samples(&l.sample(grid_size(3)), 3).unwrap();
        assert!((&back - &l).sobolev_norm(0.0).unwrap() < 1e-13);
    }

    #[test]
    fn truncation_resize() {
        let l = Loop::scalar(2, &[(1, c(1.0, 0.0))]).unwrap();
        let big = l.with_truncation(5).unwrap();
        assert_eq!(big.coeff(1), &[c(1.0, 0.0)]);
        assert_eq!(big.with_truncation(1).unwrap(), l.with_truncation(1).unwrap());
        let l2 = Loop::scalar(2, &[(2, c(1.0, 0.0))]).unwrap();
        assert!(l2.with_truncation(1).is_err());
    }
}
