//! Rank, range, nullspace and complement computations by singular-value
//! thresholding. All bases returned here are orthonormal. Matrices are stored as
//! nalgebra matrices and factorized with faer.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) struct Svd {
    pub(crate) u: CMatrix,
    pub(crate) sigma: Vec<f64>,
    pub(crate) v: CMatrix,
}

/// Thin SVD with singular values sorted in decreasing order, computed by faer.
pub(crate) fn svd(a: &CMatrix) -> Svd {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Svd {
            u: CMatrix::zeros(a.nrows(), 0),
            sigma: Vec::new(),
            v: CMatrix::zeros(a.ncols(), 0),
        };
    }
    let m = faer::Mat::<faer::c64>::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let s = m.thin_svd().expect("SVD of a finite matrix");
    let (u, d, v) = (s.U(), s.S().column_vector(), s.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| d[j].re.total_cmp(&d[i].re));
    let conv = |z: faer::c64| Complex64::new(z.re, z.im);
    Svd {
        u: CMatrix::from_fn(a.nrows(), k, |r, c| conv(u[(r, order[c])])),
        sigma: order.iter().map(|&i| d[i].re).collect(),
        v: CMatrix::from_fn(a.ncols(), k, |r, c| conv(v[(r, order[c])])),
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).sigma
}

/// Count of singular values above `threshold`.
pub fn rank_above(a: &CMatrix, threshold: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > threshold).count()
}

/// Numerical rank relative to the largest singular value.
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&v| v > rel_tol * max).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the column space, with numerical rank decided relative
/// to the largest singular value.
pub fn range_basis(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let s = svd(a);
    let r = match s.sigma.first() {
        Some(&max) if max > 0.0 => s.sigma.iter().filter(|&&v| v > rel_tol * max).count(),
        _ => 0,
    };
    s.u.columns(0, r).into_owned()
}

/// The `count` dominant left singular vectors.
pub fn leading_left_vectors(a: &CMatrix, count: usize) -> CMatrix {
    let s = svd(a);
    assert!(count <= s.u.ncols(), "asked for {count} of {} vectors", s.u.ncols());
    s.u.columns(0, count).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` inside `ℂⁿ`.
pub fn orth_complement(q: &CMatrix, n: usize) -> CMatrix {
    let count = n - q.ncols();
    if count == 0 {
        return CMatrix::zeros(n, 0);
    }
    let proj = CMatrix::identity(n, n) - q * q.adjoint();
    leading_left_vectors(&proj, count)
}

/// Orthonormal basis of `ker a`. The row space is read off the right singular
/// vectors and the kernel is its orthogonal complement.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = a.ncols();
    if a.nrows() == 0 {
        return CMatrix::identity(n, n);
    }
    let s = svd(a);
    let r = match s.sigma.first() {
        Some(&max) if max > 0.0 => s.sigma.iter().filter(|&&v| v > rel_tol * max).count(),
        _ => 0,
    };
    orth_complement(&s.v.columns(0, r).into_owned(), n)
}

/// Horizontal concatenation.
pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.columns_mut(at, b.ncols()).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Orthonormal basis of `span(a) ∩ span(b)` for matrices with orthonormal columns.
pub fn intersection(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> CMatrix {
    let joined = hstack(&[a, &(-b)]);
    let null = nullspace(&joined, rel_tol);
    let vecs = a * null.rows(0, a.ncols());
    if vecs.ncols() == 0 {
        return vecs;
    }
    leading_left_vectors(&vecs, vecs.ncols())
}

/// Frobenius norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value), zero for empty matrices.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}
