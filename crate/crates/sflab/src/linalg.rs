//! Finite-dimensional projection and subspace algebra.
//!
//! Everything downstream works with dense complex matrices: subspaces are
//! carried by orthonormal-column frames, idempotents by explicit matrices.
//! The operations here are the projector identities
//!
//! - `P_{L,M} = P_L (P_L - P_M)^{-1}` (oblique projector with image L, kernel M),
//! - `S = P(P-Q)^{-1}`, `T = (P-1)(P-Q)^{-1}` (complementary pair projectors),
//! - `P_ort = P (P + P* - 1)^{-1}` (orthogonalization of an idempotent),
//!
//! together with the gap metric `δ(L₁, L₂) = ‖P_{L₁} - P_{L₂}‖` and graph
//! projectors of bounded operators.

use ndarray::{concatenate, Array1, Array2, Axis};
use ndarray_linalg::{Eigh, Inverse, Solve, UPLO, SVD};
use num_complex::Complex64 as c64;
use thiserror::Error;

pub mod random;
pub mod schur;

/// Dense complex matrix, the universal carrier.
pub type CMatrix = Array2<c64>;

/// Scale-free invertibility threshold: a matrix counts as invertible iff its
/// smallest singular value exceeds `SV_RTOL` times its largest.
pub const SV_RTOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("projector difference is singular (σ_min = {min_sv:.3e}, threshold = {threshold:.3e}): subspace pairs are not complementary")]
    NotComplementary { min_sv: f64, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not idempotent (‖P² − P‖ = {0:.3e})")]
    NotIdempotent(f64),
    #[error("LAPACK backend failure: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

// ---------------------------------------------------------------------------
// Small dense helpers
// ---------------------------------------------------------------------------

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

/// ‖A‖ as the largest singular value (dense, exact at desk scale).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s.iter().cloned().fold(0.0, f64::max)
}

/// Smallest singular value.
pub fn smallest_sv(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Solve AX = B for X with a dense LU factorization.
pub fn solve_matrix(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "solve: A is {}×{}, B is {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    use ndarray_linalg::Factorize;
    let f = a
        .factorize()
        .map_err(|e| LinalgError::Backend(format!("LU factorization: {e}")))?;
    let mut out = CMatrix::zeros((n, b.ncols()));
    for (j, col) in b.columns().into_iter().enumerate() {
        let x = f
            .solve(&col.to_owned())
            .map_err(|e| LinalgError::Backend(format!("solve: {e}")))?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

/// Inverse, guarded by the scale-free singular-value threshold.
pub fn try_inverse(a: &CMatrix) -> Result<CMatrix> {
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= SV_RTOL * smax || smax == 0.0 {
        return Err(LinalgError::NotComplementary {
            min_sv: smin,
            threshold: SV_RTOL * smax,
        });
    }
    a.inv()
        .map_err(|e| LinalgError::Backend(format!("inverse: {e}")))
}

/// Hermitian deviation ‖A − A*‖.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    op_norm(&(a - &adjoint(a)))
}

/// Force exact Hermiticity, (A + A*)/2.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + &adjoint(a)).mapv(|z| z * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary of eigenvectors (columns), so that A = V diag(λ) V*.
///
/// ndarray-linalg hands back the eigenvectors of the transposed (row-major)
/// matrix for complex input; the conjugation below restores the standard
/// column convention.
pub fn eigh(a: &CMatrix) -> (Array1<f64>, CMatrix) {
    let (vals, vecs) = a.eigh(UPLO::Lower).expect("eigh failed");
    (vals, vecs.mapv(|z| z.conj()))
}

/// Hermitian inverse square root via eigendecomposition.
pub fn inv_sqrt_hermitian(a: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let d = Array2::from_diag(&vals.mapv(|v| c64::new(1.0 / v.max(1e-300).sqrt(), 0.0)));
    vecs.dot(&d).dot(&adjoint(&vecs))
}

/// Determinant of a small complex matrix by LU with partial pivoting.
pub fn det(a: &CMatrix) -> c64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.to_owned();
    let mut d = c64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].norm();
        for i in k + 1..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return c64::new(0.0, 0.0);
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            d = -d;
        }
        let piv = m[(k, k)];
        d *= piv;
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
        }
    }
    d
}

/// Identity matrix.
pub fn eye(n: usize) -> CMatrix {
    CMatrix::eye(n)
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn hcat(blocks: &[&CMatrix]) -> CMatrix {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    concatenate(Axis(1), &views).expect("hcat shape mismatch")
}

/// Block-diagonal direct sum.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros((n, m));
    let (mut i0, mut j0) = (0, 0);
    for b in blocks {
        out.slice_mut(ndarray::s![i0..i0 + b.nrows(), j0..j0 + b.ncols()])
            .assign(b);
        i0 += b.nrows();
        j0 += b.ncols();
    }
    out
}

// ---------------------------------------------------------------------------
// Subspace frames
// ---------------------------------------------------------------------------

/// A subspace of Cⁿ carried by a matrix whose columns are orthonormal and
/// span it. Frames are orthonormalized on construction so every projector
/// formula downstream is unconditionally stable.
#[derive(Debug, Clone)]
pub struct SubspaceFrame {
    ambient_dim: usize,
    basis: CMatrix,
}

impl SubspaceFrame {
    /// Span of the given columns; the basis is orthonormalized by SVD and
    /// numerically null directions are dropped.
    pub fn span(columns: &CMatrix) -> Self {
        let ambient_dim = columns.nrows();
        if columns.ncols() == 0 {
            return Self::zero(ambient_dim);
        }
        let (u, s, _) = columns.svd(true, false).expect("svd failed");
        let u = u.expect("svd U missing");
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let rank = s.iter().filter(|&&x| x > SV_RTOL.sqrt() * smax.max(1e-300)).count();
        let basis = u.slice(ndarray::s![.., ..rank]).to_owned();
        Self { ambient_dim, basis }
    }

    /// Trusted constructor for columns that are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix) -> Self {
        let ambient_dim = basis.nrows();
        debug_assert!(
            basis.ncols() == 0
                || op_norm(&(adjoint(&basis).dot(&basis) - eye(basis.ncols()))) < 1e-10
        );
        Self { ambient_dim, basis }
    }

    /// The zero subspace.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMatrix::zeros((ambient_dim, 0)),
        }
    }

    /// The full space.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: eye(ambient_dim),
        }
    }

    /// Coordinate subspace spanned by the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = CMatrix::zeros((ambient_dim, indices.len()));
        for (j, &i) in indices.iter().enumerate() {
            basis[(i, j)] = c64::new(1.0, 0.0);
        }
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace (Hermitian idempotent).
    pub fn projector(&self) -> CMatrix {
        self.basis.dot(&adjoint(&self.basis))
    }

    /// Frame of the orthogonal complement.
    pub fn orthogonal_complement(&self) -> SubspaceFrame {
        let p = self.projector();
        let q = eye(self.ambient_dim) - &p;
        let (vals, vecs) = eigh(&q);
        let mut cols = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            if *v > 0.5 {
                cols.push(i);
            }
        }
        let mut basis = CMatrix::zeros((self.ambient_dim, cols.len()));
        for (j, &i) in cols.iter().enumerate() {
            basis.column_mut(j).assign(&vecs.column(i));
        }
        Self {
            ambient_dim: self.ambient_dim,
            basis,
        }
    }

    /// Apply a matrix to the subspace: span(A · basis).
    pub fn map_by(&self, a: &CMatrix) -> SubspaceFrame {
        SubspaceFrame::span(&a.dot(&self.basis))
    }
}

// ---------------------------------------------------------------------------
// Idempotents
// ---------------------------------------------------------------------------

/// An idempotent matrix (projection, not necessarily orthogonal).
#[derive(Debug, Clone)]
pub struct Idempotent(CMatrix);

impl Idempotent {
    /// Validates ‖P² − P‖ ≤ 1e-10 · (1 + ‖P‖²).
    pub fn new(p: CMatrix) -> Result<Self> {
        let norm = op_norm(&p);
        let defect = op_norm(&(p.dot(&p) - &p));
        if defect > 1e-10 * (1.0 + norm * norm) {
            return Err(LinalgError::NotIdempotent(defect));
        }
        Ok(Self(p))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Frame of the image (column space).
    pub fn image(&self) -> SubspaceFrame {
        SubspaceFrame::span(&self.0)
    }

    /// Frame of the kernel.
    pub fn kernel(&self) -> SubspaceFrame {
        let n = self.0.nrows();
        SubspaceFrame::span(&(eye(n) - &self.0)).to_owned()
    }
}

impl SubspaceFrame {
    fn to_owned(&self) -> SubspaceFrame {
        self.clone()
    }
}

// ---------------------------------------------------------------------------
// Projector operations
// ---------------------------------------------------------------------------

/// Orthogonal projector onto span(L).
pub fn orth_projector(l: &SubspaceFrame) -> Idempotent {
    Idempotent(l.projector())
}

/// Given idempotents P, Q with P − Q invertible, return the projection S on
/// im P along im Q and the projection T on ker P along ker Q, so that
/// (P − Q)⁻¹ = S − T.
pub fn complementary_pair_projectors(
    p: &Idempotent,
    q: &Idempotent,
) -> Result<(Idempotent, Idempotent)> {
    let diff = p.matrix() - q.matrix();
    let inv = try_inverse(&diff)?;
    let s = p.matrix().dot(&inv);
    let n = p.matrix().nrows();
    let t = (p.matrix() - &eye(n)).dot(&inv);
    // (P−Q)⁻¹ = S − T is exact algebra; keep it as a consistency guard.
    let recon = &s - &t;
    let err = op_norm(&(&recon - &inv));
    if err > 1e-8 * (1.0 + op_norm(&inv)) {
        return Err(LinalgError::Backend(format!(
            "PQST consistency failure: ‖(S−T) − (P−Q)⁻¹‖ = {err:.3e}"
        )));
    }
    Ok((Idempotent(s), Idempotent(t)))
}

/// Projector with image L and kernel M, computed as P_L (P_L − P_M)⁻¹.
pub fn oblique_projector(l: &SubspaceFrame, m: &SubspaceFrame) -> Result<Idempotent> {
    if l.ambient_dim() != m.ambient_dim() {
        return Err(LinalgError::DimensionMismatch(
            "oblique projector frames live in different spaces".into(),
        ));
    }
    if l.rank() + m.rank() != l.ambient_dim() {
        return Err(LinalgError::DimensionMismatch(format!(
            "dim L + dim M = {} ≠ ambient dim {}",
            l.rank() + m.rank(),
            l.ambient_dim()
        )));
    }
    let pl = l.projector();
    let pm = m.projector();
    let inv = try_inverse(&(&pl - &pm))?;
    Ok(Idempotent(pl.dot(&inv)))
}

/// Hermitian idempotent with the same image as P: P (P + P* − 1)⁻¹.
pub fn orthogonalize_idempotent(p: &Idempotent) -> Idempotent {
    let n = p.matrix().nrows();
    let core = p.matrix() + &adjoint(p.matrix()) - &eye(n);
    // P + P* − 1 is invertible for every idempotent.
    let inv = try_inverse(&core).expect("P + P* - 1 must be invertible for an idempotent");
    let q = p.matrix().dot(&inv);
    Idempotent(hermitize(&q))
}

/// Gap metric: operator norm of the difference of orthogonal projectors.
pub fn gap_distance(l1: &SubspaceFrame, l2: &SubspaceFrame) -> f64 {
    assert_eq!(
        l1.ambient_dim(),
        l2.ambient_dim(),
        "gap distance requires equal ambient dimensions"
    );
    op_norm(&(l1.projector() - l2.projector()))
}

/// Orthogonal projector in H ⊕ H' onto the graph {(u, Au)} of A: H → H'.
pub fn graph_projector(a: &CMatrix) -> Idempotent {
    let (m, n) = a.dim();
    let gram = eye(n) + &adjoint(a).dot(a);
    let half = inv_sqrt_hermitian(&gram);
    let mut frame = CMatrix::zeros((n + m, n));
    frame.slice_mut(ndarray::s![..n, ..]).assign(&half);
    frame.slice_mut(ndarray::s![n.., ..]).assign(&a.dot(&half));
    let f = SubspaceFrame::from_orthonormal(frame);
    Idempotent(f.projector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn orth_projector_coordinate_axis() {
        let l = SubspaceFrame::coordinate(2, &[0]);
        let p = orth_projector(&l);
        let expected = ndarray::array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]];
        assert!(op_norm(&(p.matrix() - &expected)) < 1e-12);
    }

    #[test]
    fn orth_projector_full_space_is_identity() {
        let l = SubspaceFrame::full(3);
        let p = orth_projector(&l);
        assert!(op_norm(&(p.matrix() - &eye(3))) < 1e-12);
    }

    #[test]
    fn orth_projector_diagonal_line() {
        // span((1,1)/√2) → (1/2)[[1,1],[1,1]]; rank-1 outer product oracle.
        let v = ndarray::array![[c(1., 0.)], [c(1., 0.)]];
        let l = SubspaceFrame::span(&v);
        let scale = 1.0 / (2.0f64).sqrt();
        let w = v.mapv(|z| z * scale);
        let oracle = w.dot(&adjoint(&w));
        assert!(op_norm(&(orth_projector(&l).matrix() - &oracle)) < 1e-12);
    }

    #[test]
    fn complementary_pair_rejects_equal_projectors() {
        let p = Idempotent::new(ndarray::array![
            [c(1., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.)]
        ])
        .unwrap();
        let q = p.clone();
        assert!(matches!(
            complementary_pair_projectors(&p, &q),
            Err(LinalgError::NotComplementary { .. })
        ));
    }

    #[test]
    fn complementary_pair_orthogonal_axes() {
        let p = Idempotent::new(CMatrix::from_diag(&ndarray::arr1(&[c(1., 0.), c(0., 0.)]))).unwrap();
        let q = Idempotent::new(CMatrix::from_diag(&ndarray::arr1(&[c(0., 0.), c(1., 0.)]))).unwrap();
        let (s, t) = complementary_pair_projectors(&p, &q).unwrap();
        assert!(op_norm(&(s.matrix() - p.matrix())) < 1e-10);
        assert!(op_norm(&(t.matrix() - q.matrix())) < 1e-10);
    }

    #[test]
    fn complementary_pair_against_direct_solve() {
        // P = diag(1,0); Q projects onto span((1,1)) along span((1,−1)).
        // Oracle: solve directly for the projector with image im P, kernel im Q.
        let p = Idempotent::new(CMatrix::from_diag(&ndarray::arr1(&[c(1., 0.), c(0., 0.)]))).unwrap();
        let e = ndarray::array![[c(1., 0.), c(1., 0.)], [c(1., 0.), c(-1., 0.)]];
        // Q maps e1-col ↦ itself, e2-col ↦ 0: Q = e · diag(1,0) · e⁻¹.
        let d = CMatrix::from_diag(&ndarray::arr1(&[c(1., 0.), c(0., 0.)]));
        let q_mat = e.dot(&d).dot(&try_inverse(&e).unwrap());
        let q = Idempotent::new(q_mat).unwrap();
        let (s, t) = complementary_pair_projectors(&p, &q).unwrap();

        // Direct-solve oracle for S: image = span(e1), kernel = span((1,1)).
        let b = ndarray::array![[c(1., 0.), c(1., 0.)], [c(0., 0.), c(1., 0.)]];
        let target = ndarray::array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]];
        let s_oracle = target.dot(&try_inverse(&b).unwrap());
        assert!(op_norm(&(s.matrix() - &s_oracle)) < 1e-10);

        // T projects on ker P = span(e2) along ker Q = span((1,−1)).
        let bk = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(-1., 0.)]];
        let tk = ndarray::array![[c(0., 0.), c(0., 0.)], [c(1., 0.), c(0., 0.)]];
        let t_oracle = tk.dot(&try_inverse(&bk).unwrap());
        assert!(op_norm(&(t.matrix() - &t_oracle)) < 1e-10);
    }

    #[test]
    fn oblique_projector_axes() {
        let l = SubspaceFrame::coordinate(2, &[0]);
        let m = SubspaceFrame::coordinate(2, &[1]);
        let p = oblique_projector(&l, &m).unwrap();
        assert!(op_norm(&(p.matrix() - &CMatrix::from_diag(&ndarray::arr1(&[c(1., 0.), c(0., 0.)])))) < 1e-10);
    }

    #[test]
    fn oblique_projector_slanted_kernel() {
        // L = span(e1), M = span(e1+e2) → [[1,−1],[0,0]].
        let l = SubspaceFrame::coordinate(2, &[0]);
        let m = SubspaceFrame::span(&ndarray::array![[c(1., 0.)], [c(1., 0.)]]);
        let p = oblique_projector(&l, &m).unwrap();
        let oracle = ndarray::array![[c(1., 0.), c(-1., 0.)], [c(0., 0.), c(0., 0.)]];
        assert!(op_norm(&(p.matrix() - &oracle)) < 1e-10);
    }

    #[test]
    fn oblique_projector_coincident_is_error() {
        let l = SubspaceFrame::coordinate(2, &[0]);
        assert!(oblique_projector(&l, &l).is_err());
    }

    #[test]
    fn orthogonalize_upper_triangular_idempotent() {
        let p = Idempotent::new(ndarray::array![
            [c(1., 0.), c(1., 0.)],
            [c(0., 0.), c(0., 0.)]
        ])
        .unwrap();
        let q = orthogonalize_idempotent(&p);
        let oracle = CMatrix::from_diag(&ndarray::arr1(&[c(1., 0.), c(0., 0.)]));
        assert!(op_norm(&(q.matrix() - &oracle)) < 1e-10);
    }

    #[test]
    fn orthogonalize_fixes_hermitian_idempotents() {
        let l = SubspaceFrame::span(&ndarray::array![[c(1., 0.)], [c(0., 1.)]]);
        let p = orth_projector(&l);
        let q = orthogonalize_idempotent(&p);
        assert!(op_norm(&(q.matrix() - p.matrix())) < 1e-10);
    }

    #[test]
    fn orthogonalize_preserves_image_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 2 + (rand::Rng::gen::<usize>(&mut rng) % 11);
            let p = random_idempotent(&mut rng, n);
            let q = orthogonalize_idempotent(&p);
            // image equality via rank of concatenation
            let cat = hcat(&[&p.image().basis().clone(), &q.image().basis().clone()]);
            let r = SubspaceFrame::span(&cat).rank();
            assert_eq!(r, p.image().rank());
            assert_eq!(q.image().rank(), p.image().rank());
            assert!(hermitian_defect(q.matrix()) < 1e-9);
        }
    }

    #[test]
    fn eigh_reconstructs_hermitian_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 6);
        let (vals, vecs) = eigh(&h);
        let d = CMatrix::from_diag(&vals.mapv(|v| c(v, 0.0)));
        assert!(op_norm(&(vecs.dot(&d).dot(&adjoint(&vecs)) - &h)) < 1e-12);
        assert!(op_norm(&(adjoint(&vecs).dot(&vecs) - eye(6))) < 1e-12);
    }

    #[test]
    fn gap_distance_basic() {
        let l1 = SubspaceFrame::coordinate(2, &[0]);
        let l2 = SubspaceFrame::coordinate(2, &[1]);
        assert!((gap_distance(&l1, &l1)).abs() < 1e-14);
        assert!((gap_distance(&l1, &l2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_distance_rotated_line_is_sine() {
        for &theta in &[0.1f64, 0.4, 1.0, 1.4] {
            let l1 = SubspaceFrame::coordinate(2, &[0]);
            let v = ndarray::array![[c(theta.cos(), 0.)], [c(theta.sin(), 0.)]];
            let l2 = SubspaceFrame::span(&v);
            assert!((gap_distance(&l1, &l2) - theta.sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_projector_zero_map() {
        let a = CMatrix::zeros((2, 2));
        let p = graph_projector(&a);
        let oracle = block_diag(&[&eye(2), &CMatrix::zeros((2, 2))]);
        assert!(op_norm(&(p.matrix() - &oracle)) < 1e-12);
    }

    #[test]
    fn graph_projector_identity_on_c1() {
        let a = eye(1);
        let p = graph_projector(&a);
        let half = c(0.5, 0.);
        let oracle = ndarray::array![[half, half], [half, half]];
        assert!(op_norm(&(p.matrix() - &oracle)) < 1e-12);
    }

    #[test]
    fn graph_projector_annihilates_antigraph() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 3, 3);
        let p = graph_projector(&a);
        assert!(hermitian_defect(p.matrix()) < 1e-10);
        assert_eq!(p.image().rank(), 3);
        // (−A* v, v) spans the orthogonal complement of the graph.
        let v = random_matrix(&mut rng, 3, 1);
        let mut w = CMatrix::zeros((6, 1));
        w.slice_mut(ndarray::s![..3, ..]).assign(&(-adjoint(&a).dot(&v)));
        w.slice_mut(ndarray::s![3.., ..]).assign(&v);
        assert!(op_norm(&p.matrix().dot(&w)) < 1e-10 * op_norm(&w));
    }

    #[test]
    fn oblique_pair_sums_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let n = 4 + (rand::Rng::gen::<usize>(&mut rng) % 6);
            let k = 1 + (rand::Rng::gen::<usize>(&mut rng) % (n - 1));
            let (l, m) = random_complementary_pair(&mut rng, n, k);
            let plm = oblique_projector(&l, &m).unwrap();
            let pml = oblique_projector(&m, &l).unwrap();
            assert!(op_norm(&(plm.matrix() + pml.matrix() - &eye(n))) < 1e-8);
        }
    }

    #[test]
    fn pqst_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let n = 3 + (rand::Rng::gen::<usize>(&mut rng) % 10);
            let p = random_idempotent(&mut rng, n);
            let q = random_idempotent(&mut rng, n);
            let diff = p.matrix() - q.matrix();
            match complementary_pair_projectors(&p, &q) {
                Ok((s, t)) => {
                    let st = s.matrix() - t.matrix();
                    assert!(op_norm(&(diff.dot(&st) - &eye(n))) < 1e-7);
                    assert!(op_norm(&(st.dot(&diff) - &eye(n))) < 1e-7);
                    // P + Q = (2S − 1)(P − Q), and it is invertible.
                    let lhs = p.matrix() + q.matrix();
                    let rhs = (s.matrix().mapv(|z| z * 2.0) - &eye(n)).dot(&diff);
                    assert!(op_norm(&(&lhs - &rhs)) < 1e-7);
                    assert!(smallest_sv(&lhs) > SV_RTOL * op_norm(&lhs));
                }
                Err(LinalgError::NotComplementary { .. }) => {}
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }
}
