use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::complex_io;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

/// Ambient space `ℂᴺ` with two subspaces given by full-rank bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripleWire")]
pub struct SubspaceTriple {
    ambient_dim: usize,
    #[serde(with = "complex_io::matrix")]
    basis_prime: CMatrix,
    #[serde(with = "complex_io::matrix")]
    basis_dprime: CMatrix,
    rank_tol: f64,
    #[serde(skip)]
    q_prime: CMatrix,
    #[serde(skip)]
    q_dprime: CMatrix,
}

#[derive(Deserialize)]
struct TripleWire {
    ambient_dim: usize,
    #[serde(with = "complex_io::matrix")]
    basis_prime: CMatrix,
    #[serde(with = "complex_io::matrix")]
    basis_dprime: CMatrix,
    #[serde(default = "default_rank_tol")]
    rank_tol: f64,
}

impl TryFrom<TripleWire> for SubspaceTriple {
    type Error = Error;
    fn try_from(w: TripleWire) -> Result<Self> {
        // An ambient_dim × 0 basis has no rows to carry its height in JSON.
        let fix = |b: CMatrix| if b.nrows() == 0 { CMatrix::zeros(w.ambient_dim, 0) } else { b };
        SubspaceTriple::new(w.ambient_dim, fix(w.basis_prime), fix(w.basis_dprime), w.rank_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TripleIndex {
    pub dim_cap: usize,
    pub codim_sum: usize,
    pub index: i64,
}

fn check_basis(name: &str, b: &CMatrix, n: usize, rank_tol: f64) -> Result<()> {
    if b.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "{name} has {} rows, ambient dimension is {n}",
            b.nrows()
        )));
    }
    if b.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    if b.ncols() == 0 {
        return Ok(());
    }
    if b.ncols() > n {
        return Err(Error::RankDeficient(format!("{name} has more columns than rows")));
    }
    let s = linalg::singular_values(b);
    let (max, min) = (s[0], s[s.len() - 1]);
    if !(min > rank_tol * max) {
        return Err(Error::RankDeficient(format!(
            "{name}: smallest singular value {min:e} vs largest {max:e}"
        )));
    }
    Ok(())
}

impl SubspaceTriple {
    pub fn new(ambient_dim: usize, basis_prime: CMatrix, basis_dprime: CMatrix, rank_tol: f64) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
        }
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("rank_tol {rank_tol} outside (0, 1)")));
        }
        check_basis("basis_prime", &basis_prime, ambient_dim, rank_tol)?;
        check_basis("basis_dprime", &basis_dprime, ambient_dim, rank_tol)?;
        let q_prime = linalg::leading_left_vectors(&basis_prime, basis_prime.ncols());
        let q_dprime = linalg::leading_left_vectors(&basis_dprime, basis_dprime.ncols());
        Ok(SubspaceTriple {
            ambient_dim,
            basis_prime,
            basis_dprime,
            rank_tol,
            q_prime,
            q_dprime,
        })
    }

    /// Triple spanned by coordinate vectors, given as index lists.
    pub fn coordinate(ambient_dim: usize, prime: &[usize], dprime: &[usize]) -> Result<Self> {
        let pick = |idx: &[usize]| {
            let mut b = CMatrix::zeros(ambient_dim, idx.len());
            for (c, &i) in idx.iter().enumerate() {
                if i < ambient_dim {
                    b[(i, c)] = Complex64::new(1.0, 0.0);
                }
            }
            b
        };
        if let Some(&bad) = prime.iter().chain(dprime).find(|&&i| i >= ambient_dim) {
            return Err(Error::InvalidArgument(format!("coordinate {bad} outside ℂ^{ambient_dim}")));
        }
        Self::new(ambient_dim, pick(prime), pick(dprime), DEFAULT_RANK_TOL)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis_prime(&self) -> &CMatrix {
        &self.basis_prime
    }

    pub fn basis_dprime(&self) -> &CMatrix {
        &self.basis_dprime
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn p(&self) -> usize {
        self.basis_prime.ncols()
    }

    pub fn q(&self) -> usize {
        self.basis_dprime.ncols()
    }

    /// Orthonormalized bases `(Q′, Q″)` of the two subspaces.
    pub fn orthonormal_bases(&self) -> (&CMatrix, &CMatrix) {
        (&self.q_prime, &self.q_dprime)
    }

    /// `dim(E′∩E″) = nullity [B′ | -B″]`, `codim(E′+E″) = N - rank [B′ | B″]`,
    /// computed on orthonormalized bases so the rank threshold is basis independent.
    pub fn index(&self) -> TripleIndex {
        let (p, q, n) = (self.p(), self.q(), self.ambient_dim);
        let join = linalg::hstack(&[&self.q_prime, &(-&self.q_dprime)]);
        let dim_cap = p + q - linalg::rank(&join, self.rank_tol);
        let sum = linalg::hstack(&[&self.q_prime, &self.q_dprime]);
        let codim_sum = n - linalg::rank(&sum, self.rank_tol);
        TripleIndex {
            dim_cap,
            codim_sum,
            index: dim_cap as i64 - codim_sum as i64,
        }
    }

    /// Smallest relative singular value whose position against the rank
    /// threshold decides the index: the smallest singular value of each basis
    /// and the smallest retained singular value of `[Q′ | Q″]`.
    pub fn spectral_gap(&self) -> f64 {
        let rel_min = |b: &CMatrix| {
            let s = linalg::singular_values(b);
            match (s.first(), s.last()) {
                (Some(&max), Some(&min)) if max > 0.0 => min / max,
                _ => f64::INFINITY,
            }
        };
        let sum = linalg::hstack(&[&self.q_prime, &self.q_dprime]);
        let s = linalg::singular_values(&sum);
        let retained = match s.first() {
            Some(&max) if max > 0.0 => s
                .iter()
                .filter(|&&v| v > self.rank_tol * max)
                .map(|v| v / max)
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        };
        rel_min(&self.basis_prime).min(rel_min(&self.basis_dprime)).min(retained)
    }
}

/// `dim(E′∩E″) - dim(E/(E′+E″))`.
pub fn triple_index(t: &SubspaceTriple) -> TripleIndex {
    t.index()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityStatus {
    Stable,
    Unstable,
    /// The perturbation size is not small against the spectral gap.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub status: StabilityStatus,
    pub base: TripleIndex,
    pub min_gap: f64,
    pub trials_run: usize,
    /// Trials where the index changed or a perturbed basis lost rank.
    pub index_changes: usize,
    /// Trials where `dim(E′∩E″)` changed (the index may still agree).
    pub cap_changes: usize,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.status == StabilityStatus::Stable
    }
}

fn perturb<R: Rng + ?Sized>(b: &CMatrix, eps: f64, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(b.nrows(), b.ncols(), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gn = linalg::frobenius(&g);
    if gn == 0.0 {
        return b.clone();
    }
    b + g * Complex64::new(eps * linalg::frobenius(b) / gn, 0.0)
}

/// Recomputes the index after random relative perturbations of size `eps` of
/// both bases. Only meaningful when `eps < 0.1 · gap`; otherwise the report is
/// inconclusive and no trials are run.
pub fn index_stability_check<R: Rng + ?Sized>(
    t: &SubspaceTriple,
    eps: f64,
    trials: usize,
    rng: &mut R,
) -> StabilityReport {
    let base = t.index();
    let min_gap = t.spectral_gap();
    if !(eps < 0.1 * min_gap) {
        return StabilityReport {
            status: StabilityStatus::Inconclusive,
            base,
            min_gap,
            trials_run: 0,
            index_changes: 0,
            cap_changes: 0,
        };
    }
    let mut index_changes = 0;
    let mut cap_changes = 0;
    for _ in 0..trials {
        let bp = perturb(&t.basis_prime, eps, rng);
        let bq = perturb(&t.basis_dprime, eps, rng);
        match SubspaceTriple::new(t.ambient_dim, bp, bq, t.rank_tol) {
            Ok(pt) => {
                let idx = pt.index();
                index_changes += usize::from(idx.index != base.index);
                cap_changes += usize::from(idx.dim_cap != base.dim_cap);
            }
            Err(_) => index_changes += 1,
        }
    }
    StabilityReport {
        status: if index_changes == 0 {
            StabilityStatus::Stable
        } else {
            StabilityStatus::Unstable
        },
        base,
        min_gap,
        trials_run: trials,
        index_changes,
        cap_changes,
    }
}

/// Splitting `ℂᴺ = (E′∩E″) ⊕ C′ ⊕ C″ ⊕ Q` with `C′ ⊕ (E′∩E″) = E′`,
/// `C″ ⊕ (E′∩E″) = E″` and `Q ⊥ E′+E″`. Each block has orthonormal columns;
/// the intersection is orthogonal to `C′`, `C″`, `Q`, and `Q` is orthogonal to
/// the sum. `C′` and `C″` need not be orthogonal to each other.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalCoordinates {
    pub cap: CMatrix,
    pub prime_complement: CMatrix,
    pub dprime_complement: CMatrix,
    pub cokernel: CMatrix,
}

impl NormalCoordinates {
    pub fn dims(&self) -> [usize; 4] {
        [
            self.cap.ncols(),
            self.prime_complement.ncols(),
            self.dprime_complement.ncols(),
            self.cokernel.ncols(),
        ]
    }

    /// The `N × N` matrix whose columns are all four blocks in order.
    pub fn frame(&self) -> CMatrix {
        linalg::hstack(&[&self.cap, &self.prime_complement, &self.dprime_complement, &self.cokernel])
    }

    /// Projections onto each block along the other three; they sum to the identity.
    pub fn projections(&self) -> [CMatrix; 4] {
        let frame = self.frame();
        let n = frame.nrows();
        let inv = frame.clone().try_inverse().expect("normal coordinate frame is invertible");
        let dims = self.dims();
        let mut out: [CMatrix; 4] = std::array::from_fn(|_| CMatrix::zeros(n, n));
        let mut at = 0;
        for (k, d) in dims.iter().enumerate() {
            out[k] = frame.columns(at, *d) * inv.rows(at, *d);
            at += d;
        }
        out
    }

    /// Coordinates `(u, x′, x″, ξ)` of a vector in the frame.
    pub fn coordinates(&self, v: &CMatrix) -> [CMatrix; 4] {
        let inv = self.frame().try_inverse().expect("normal coordinate frame is invertible");
        let c = inv * v;
        let dims = self.dims();
        let mut at = 0;
        std::array::from_fn(|k| {
            let block = c.rows(at, dims[k]).into_owned();
            at += dims[k];
            block
        })
    }
}

pub fn normal_coordinates(t: &SubspaceTriple) -> NormalCoordinates {
    let n = t.ambient_dim;
    let (qp, qd) = t.orthonormal_bases();
    let idx = t.index();
    let k = idx.dim_cap;
    let cap = if k == 0 {
        CMatrix::zeros(n, 0)
    } else {
        let joined = linalg::hstack(&[qp, &(-qd)]);
        let null = linalg::nullspace(&joined, t.rank_tol);
        linalg::leading_left_vectors(&(qp * null.rows(0, qp.ncols())), k)
    };
    let off_cap = |q: &CMatrix| {
        let residual = q - &cap * (cap.adjoint() * q);
        linalg::leading_left_vectors(&residual, q.ncols() - k)
    };
    let prime_complement = off_cap(qp);
    let dprime_complement = off_cap(qd);
    let sum = linalg::hstack(&[qp, qd]);
    let sum_basis = linalg::leading_left_vectors(&sum, n - idx.codim_sum);
    let cokernel = linalg::orth_complement(&sum_basis, n);
    NormalCoordinates {
        cap,
        prime_complement,
        dprime_complement,
        cokernel,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub exact: bool,
    pub cap_dims: (usize, usize),
    pub cokernel_dims: (usize, usize),
    pub cap_rank: usize,
    pub quotient_rank: usize,
    /// Largest relative distance of `dh·E′_X` from `E′_Y` and of `dh·E″_X` from `E″_Y`.
    pub morphism_defect: f64,
}

/// Whether `dh` induces isomorphisms `E′_X∩E″_X → E′_Y∩E″_Y` and
/// `E_X/(E′_X+E″_X) → E_Y/(E′_Y+E″_Y)`.
///
/// Both maps are read off in normal coordinates: the intersection block by
/// orthogonal projection onto the target intersection, the quotient block by
/// orthogonal projection onto the target cokernel complement. Ranks are
/// thresholded at `rank_tol · ‖dh‖`.
pub fn exactness_check(dh: &CMatrix, source: &SubspaceTriple, target: &SubspaceTriple) -> Result<ExactnessReport> {
    if dh.ncols() != source.ambient_dim || dh.nrows() != target.ambient_dim {
        return Err(Error::ShapeMismatch(format!(
            "dh is {}×{}, expected {}×{}",
            dh.nrows(),
            dh.ncols(),
            target.ambient_dim,
            source.ambient_dim
        )));
    }
    let nx = normal_coordinates(source);
    let ny = normal_coordinates(target);
    let scale = linalg::spectral_norm(dh);
    let threshold = target.rank_tol.max(source.rank_tol) * scale;
    let cap_block = ny.cap.adjoint() * dh * &nx.cap;
    let quotient_block = ny.cokernel.adjoint() * dh * &nx.cokernel;
    let cap_rank = linalg::rank_above(&cap_block, threshold);
    let quotient_rank = linalg::rank_above(&quotient_block, threshold);
    let cap_dims = (nx.cap.ncols(), ny.cap.ncols());
    let cokernel_dims = (nx.cokernel.ncols(), ny.cokernel.ncols());
    let exact = cap_dims.0 == cap_dims.1
        && cokernel_dims.0 == cokernel_dims.1
        && cap_rank == cap_dims.0
        && quotient_rank == cokernel_dims.0;
    Ok(ExactnessReport {
        exact,
        cap_dims,
        cokernel_dims,
        cap_rank,
        quotient_rank,
        morphism_defect: morphism_defect(dh, source, target),
    })
}

fn morphism_defect(dh: &CMatrix, source: &SubspaceTriple, target: &SubspaceTriple) -> f64 {
    let (sp, sd) = source.orthonormal_bases();
    let (tp, td) = target.orthonormal_bases();
    let scale = linalg::spectral_norm(dh).max(f64::MIN_POSITIVE);
    let leak = |from: &CMatrix, to: &CMatrix| {
        let img = dh * from;
        linalg::spectral_norm(&(&img - to * (to.adjoint() * &img))) / scale
    };
    leak(sp, tp).max(leak(sd, td))
}

/// Index of the family triple over a parameter space of dimension `dim_lambda`.
pub fn parametrized_index(base_triple_index: i64, dim_lambda: usize) -> i64 {
    base_triple_index + dim_lambda as i64
}

/// Tangent triple of a family over `Λ = ℂ^{dim Λ}` whose fibres are the
/// subspaces of `t`. Both families project submersively onto `Λ`: each
/// `Λ`-direction is adjoined as `(e_λ, shiftᵢ e_λ)`, with optional shifts
/// `N × dim Λ` tilting the lift into `ℂᴺ`.
pub fn parametrized_triple(
    t: &SubspaceTriple,
    dim_lambda: usize,
    shift_prime: Option<&CMatrix>,
    shift_dprime: Option<&CMatrix>,
) -> Result<SubspaceTriple> {
    let n = t.ambient_dim;
    let total = dim_lambda + n;
    let lift = |basis: &CMatrix, shift: Option<&CMatrix>| -> Result<CMatrix> {
        let mut out = CMatrix::zeros(total, dim_lambda + basis.ncols());
        for l in 0..dim_lambda {
            out[(l, l)] = Complex64::new(1.0, 0.0);
        }
        if let Some(s) = shift {
            if s.nrows() != n || s.ncols() != dim_lambda {
                return Err(Error::ShapeMismatch(format!(
                    "shift is {}×{}, expected {n}×{dim_lambda}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            out.view_mut((dim_lambda, 0), (n, dim_lambda)).copy_from(s);
        }
        out.view_mut((dim_lambda, dim_lambda), (n, basis.ncols())).copy_from(basis);
        Ok(out)
    };
    SubspaceTriple::new(
        total,
        lift(&t.basis_prime, shift_prime)?,
        lift(&t.basis_dprime, shift_dprime)?,
        t.rank_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn index_examples() {
        let t = SubspaceTriple::coordinate(3, &[0, 1], &[1, 2]).unwrap();
        assert_eq!(t.index(), TripleIndex { dim_cap: 1, codim_sum: 0, index: 1 });
        let all: Vec<usize> = (0..5).collect();
        let t = SubspaceTriple::coordinate(5, &all, &all).unwrap();
        assert_eq!(t.index(), TripleIndex { dim_cap: 5, codim_sum: 0, index: 5 });
        let t = SubspaceTriple::coordinate(4, &[0, 1], &[2]).unwrap();
        assert_eq!(t.index(), TripleIndex { dim_cap: 0, codim_sum: 1, index: -1 });
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        let mut b = CMatrix::zeros(3, 2);
        b[(0, 0)] = one();
        b[(0, 1)] = one();
        let e = CMatrix::zeros(3, 0);
        assert!(matches!(
            SubspaceTriple::new(3, b, e, DEFAULT_RANK_TOL),
            Err(Error::RankDeficient(_))
        ));
        assert!(SubspaceTriple::new(3, CMatrix::zeros(2, 1), CMatrix::zeros(3, 0), 1e-9).is_err());
    }

    #[test]
    fn stability_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = SubspaceTriple::coordinate(3, &[0, 1], &[1, 2]).unwrap();
        let rep = index_stability_check(&t, 1e-6, 20, &mut rng);
        assert!(rep.is_stable());
        assert!((rep.min_gap - 0.5f64.sqrt()).abs() < 1e-12);

        // E′ = span(e₁), E″ = span(e₁ + 1e-7 e₂): a nearly coincident pair.
        let mut bp = CMatrix::zeros(2, 1);
        bp[(0, 0)] = one();
        let mut bq = CMatrix::zeros(2, 1);
        bq[(0, 0)] = one();
        bq[(1, 0)] = Complex64::new(1e-7, 0.0);
        let t = SubspaceTriple::new(2, bp, bq, DEFAULT_RANK_TOL).unwrap();
        let rep = index_stability_check(&t, 1e-6, 20, &mut rng);
        assert_eq!(rep.status, StabilityStatus::Inconclusive);
        assert!(rep.min_gap < 1e-6);
    }

    #[test]
    fn normal_coordinate_examples() {
        let t = SubspaceTriple::coordinate(3, &[0, 1], &[1, 2]).unwrap();
        assert_eq!(normal_coordinates(&t).dims(), [1, 1, 1, 0]);
        let t = SubspaceTriple::coordinate(5, &[0, 2], &[0, 2]).unwrap();
        assert_eq!(normal_coordinates(&t).dims(), [2, 0, 0, 3]);
    }

    #[test]
    fn exactness_examples() {
        let t = SubspaceTriple::coordinate(4, &[0, 1], &[1, 2]).unwrap();
        let id = CMatrix::identity(4, 4);
        assert!(exactness_check(&id, &t, &t).unwrap().exact);
        let mut kill = id.clone();
        kill[(1, 1)] = Complex64::new(0.0, 0.0);
        let rep = exactness_check(&kill, &t, &t).unwrap();
        assert!(!rep.exact);
        assert_eq!(rep.cap_rank, 0);
        // Collapsing the cokernel direction e₄ breaks the quotient map.
        let mut flat = id;
        flat[(3, 3)] = Complex64::new(0.0, 0.0);
        assert!(!exactness_check(&flat, &t, &t).unwrap().exact);
    }

    #[test]
    fn parametrized_examples() {
        assert_eq!(parametrized_index(1, 2), 3);
        assert_eq!(parametrized_index(-1, 1), 0);
        let t = SubspaceTriple::coordinate(3, &[0, 1], &[1, 2]).unwrap();
        let big = parametrized_triple(&t, 2, None, None).unwrap();
        assert_eq!(big.index().index, 3);
        assert_eq!(big.index().dim_cap, 3);
    }

    #[test]
    fn triple_json() {
        let text = r#"{"ambient_dim":3,
            "basis_prime":[[[1,0],[0,0]],[[0,0],[1,0]],[[0,0],[0,0]]],
            "basis_dprime":[[[0,0],[0,0]],[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        let t: SubspaceTriple = serde_json::from_str(text).unwrap();
        assert_eq!(t.index().index, 1);
        assert_eq!(t.rank_tol(), DEFAULT_RANK_TOL);
    }
}
