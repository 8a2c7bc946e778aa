//! Self-adjoint local boundary conditions and their automorphism picture.
//!
//! At a boundary point the conormal symbol σ(n) makes the fiber a symplectic
//! space via ω(u, v) = ⟨iσ(n)u, v⟩, and the chiral spaces E± are transversal
//! Lagrangians. Admissible boundary conditions L (Lagrangian, transversal to
//! E±) correspond one-to-one to self-adjoint automorphisms T of E⁻:
//!
//! ```text
//! L = Ker P_T,   P_T = P⁺ (1 + i σ(n)⁻¹ T P⁻),
//! T' = P⁻_ort · iσ(n) · P⁺ · P_{L,E⁺} · P⁻_ort + (1 − P⁻_ort).
//! ```
//!
//! The spectral subspace of T for negative eigenvalues is the fiber of the
//! bundle F that carries all topology downstream.

use crate::linalg::{
    adjoint, eigh, eye, gap_distance, hermitian_defect, oblique_projector, op_norm,
    orthogonalize_idempotent, smallest_sv, try_inverse, CMatrix, Idempotent, SubspaceFrame,
};
use crate::symbol::{chiral_split, EllipticSymbol};
use num_complex::Complex64 as c64;
use thiserror::Error;

/// Eigenvalues of T within this relative band around zero make F undefined.
pub const T_SINGULAR_RTOL: f64 = 1e-8;

/// Adjacent loop samples further apart than this gap mean the sampling does
/// not resolve the family.
pub const LOOP_GAP_LIMIT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("boundary automorphism T is numerically singular")]
    SingularT,
    #[error("T has an eigenvalue inside the singular band (|λ|_min = {min_eig:.3e}, threshold {threshold:.3e})")]
    NearSingularT { min_eig: f64, threshold: f64 },
    #[error("boundary condition meets E⁺ or E⁻: {0}")]
    NotTransversal(String),
    #[error("boundary condition is not Lagrangian (ω defect {0:.3e})")]
    NotLagrangian(f64),
    #[error("loop under-resolved at sample {index}: adjacent gap {gap:.3} ≥ 0.5")]
    ResolutionTooCoarse { index: usize, gap: f64 },
    #[error(transparent)]
    Symbol(#[from] crate::symbol::SymbolError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

pub type Result<T> = std::result::Result<T, BoundaryError>;

/// Boundary-point data: the conormal symbol σ(n) together with the chiral
/// frames and the projections P± of the fiber onto E± along E∓.
#[derive(Debug, Clone)]
pub struct ConormalData {
    sigma_n: CMatrix,
    e_plus: SubspaceFrame,
    e_minus: SubspaceFrame,
    p_plus: CMatrix,
    p_minus: CMatrix,
}

impl ConormalData {
    /// Build from the symbol pair (σ(n), σ(ξ)) at a boundary point, with
    /// (n, ξ) a positively oriented frame (outward conormal first).
    pub fn from_symbol(sym: &EllipticSymbol) -> Result<ConormalData> {
        let split = chiral_split(sym)?;
        let p_plus = oblique_projector(&split.e_plus, &split.e_minus)?;
        let n = sym.dim();
        let p_minus = eye(n) - p_plus.matrix();
        let data = ConormalData {
            sigma_n: sym.sigma1().clone(),
            e_plus: split.e_plus,
            e_minus: split.e_minus,
            p_plus: p_plus.into_matrix(),
            p_minus,
        };
        // σ(n) must send E± to their orthogonal complements.
        for f in [&data.e_plus, &data.e_minus] {
            let overlap = adjoint(f.basis()).dot(&data.sigma_n).dot(f.basis());
            if op_norm(&overlap) > 1e-9 * op_norm(&data.sigma_n).max(1.0) {
                return Err(BoundaryError::NotTransversal(
                    "σ(n)E± is not orthogonal to E±".into(),
                ));
            }
        }
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.sigma_n.nrows()
    }

    pub fn sigma_n(&self) -> &CMatrix {
        &self.sigma_n
    }

    pub fn e_plus(&self) -> &SubspaceFrame {
        &self.e_plus
    }

    pub fn e_minus(&self) -> &SubspaceFrame {
        &self.e_minus
    }

    pub fn p_plus(&self) -> &CMatrix {
        &self.p_plus
    }

    pub fn p_minus(&self) -> &CMatrix {
        &self.p_minus
    }

    /// Boundary data with mutually orthogonal chiral spaces given by explicit
    /// orthonormal frames (the Dirac-type case); the oblique projections P±
    /// are then the orthogonal ones.
    pub fn orthogonal(
        sigma_n: CMatrix,
        e_plus: SubspaceFrame,
        e_minus: SubspaceFrame,
    ) -> Result<ConormalData> {
        let n = sigma_n.nrows();
        if e_plus.rank() + e_minus.rank() != n {
            return Err(BoundaryError::NotTransversal(
                "chiral frames do not span the fiber".into(),
            ));
        }
        let overlap = adjoint(e_plus.basis()).dot(e_minus.basis());
        if op_norm(&overlap) > 1e-12 {
            return Err(BoundaryError::NotTransversal(
                "chiral frames are not orthogonal".into(),
            ));
        }
        let p_plus = e_plus.projector();
        let p_minus = e_minus.projector();
        let data = ConormalData {
            sigma_n,
            e_plus,
            e_minus,
            p_plus,
            p_minus,
        };
        for f in [&data.e_plus, &data.e_minus] {
            let ov = adjoint(f.basis()).dot(&data.sigma_n).dot(f.basis());
            if op_norm(&ov) > 1e-9 * op_norm(&data.sigma_n).max(1.0) {
                return Err(BoundaryError::NotTransversal(
                    "σ(n)E± is not orthogonal to E±".into(),
                ));
            }
        }
        Ok(data)
    }

    /// Same data with the E⁻ frame rotated by a unitary of coefficients;
    /// everything frame-dependent downstream must be invariant under this.
    pub fn reframe_e_minus(&self, w: &CMatrix) -> ConormalData {
        let basis = self.e_minus.basis().dot(w);
        ConormalData {
            sigma_n: self.sigma_n.clone(),
            e_plus: self.e_plus.clone(),
            e_minus: SubspaceFrame::from_orthonormal(basis),
            p_plus: self.p_plus.clone(),
            p_minus: self.p_minus.clone(),
        }
    }

    /// ω(u, v) = ⟨iσ(n)u, v⟩ evaluated on two ambient column blocks.
    pub fn symplectic_form(&self, u: &CMatrix, v: &CMatrix) -> CMatrix {
        let i = c64::new(0.0, 1.0);
        adjoint(&self.sigma_n.dot(u).mapv(|z| z * i)).dot(v)
    }
}

/// An automorphism of E⁻, stored in the explicit orthonormal frame of
/// `ConormalData::e_minus`; self-adjointness is then a plain Hermiticity test.
#[derive(Debug, Clone)]
pub struct BoundaryAutomorphism {
    t_matrix: CMatrix,
}

impl BoundaryAutomorphism {
    pub fn new(t_matrix: CMatrix) -> Self {
        Self { t_matrix }
    }

    pub fn scalar(k: usize, value: f64) -> Self {
        Self {
            t_matrix: eye(k) * c64::new(value, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t_matrix
    }

    pub fn is_self_adjoint(&self) -> bool {
        hermitian_defect(&self.t_matrix) <= 1e-9 * op_norm(&self.t_matrix).max(1.0)
    }
}

/// A local boundary condition: a half-dimensional subspace of the fiber.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    l_frame: SubspaceFrame,
}

impl BoundaryCondition {
    pub fn new(l_frame: SubspaceFrame) -> Self {
        Self { l_frame }
    }

    pub fn frame(&self) -> &SubspaceFrame {
        &self.l_frame
    }
}

/// T as an ambient endomorphism acting through E⁻ coordinates: Fm Tc Fm* P⁻.
fn t_compose_p_minus(c: &ConormalData, t: &BoundaryAutomorphism) -> CMatrix {
    let fm = c.e_minus.basis();
    fm.dot(&t.t_matrix).dot(&adjoint(fm)).dot(&c.p_minus)
}

/// The projection P_T = P⁺(1 + iσ(n)⁻¹ T P⁻) whose kernel is L.
pub fn p_t(c: &ConormalData, t: &BoundaryAutomorphism) -> Result<CMatrix> {
    let n = c.dim();
    let i = c64::new(0.0, 1.0);
    let sn_inv = try_inverse(&c.sigma_n)?;
    let inner = eye(n) + sn_inv.dot(&t_compose_p_minus(c, t)).mapv(|z| z * i);
    Ok(c.p_plus.dot(&inner))
}

/// Boundary condition L = Ker P_T defined by an invertible automorphism T.
pub fn condition_from_t(
    c: &ConormalData,
    t: &BoundaryAutomorphism,
) -> Result<BoundaryCondition> {
    let tm = &t.t_matrix;
    if tm.nrows() != c.e_minus.rank() {
        return Err(BoundaryError::NotTransversal(format!(
            "T acts on a {}-dimensional space, E⁻ has rank {}",
            tm.nrows(),
            c.e_minus.rank()
        )));
    }
    if smallest_sv(tm) <= crate::linalg::SV_RTOL * op_norm(tm) {
        return Err(BoundaryError::SingularT);
    }
    let pt = p_t(c, t)?;
    let defect = op_norm(&(pt.dot(&pt) - &pt));
    debug_assert!(defect <= 1e-9 * (1.0 + op_norm(&pt).powi(2)));
    let l_frame = nullspace(&pt, c.dim() - c.e_plus.rank());
    Ok(BoundaryCondition { l_frame })
}

/// Kernel frame of a matrix with known nullity.
fn nullspace(a: &CMatrix, nullity: usize) -> SubspaceFrame {
    use ndarray_linalg::SVD;
    let (_, s, vt) = a.svd(false, true).expect("svd failed");
    let vt = vt.expect("svd Vt missing");
    let n = a.ncols();
    let mut pairs: Vec<(f64, usize)> = s.iter().cloned().zip(0..).collect();
    while pairs.len() < n {
        pairs.push((0.0, pairs.len()));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut basis = CMatrix::zeros((n, nullity));
    for (j, (_, idx)) in pairs.iter().take(nullity).enumerate() {
        // rows of Vt are the right singular vectors, conjugated
        let row = vt.row(*idx);
        for i in 0..n {
            basis[(i, j)] = row[i].conj();
        }
    }
    SubspaceFrame::span(&basis)
}

/// Recover T from a transversal boundary condition L.
pub fn t_from_condition(
    c: &ConormalData,
    l: &BoundaryCondition,
) -> Result<BoundaryAutomorphism> {
    let lf = l.frame();
    if lf.rank() != c.dim() / 2 {
        return Err(BoundaryError::NotTransversal(format!(
            "L has rank {}, expected {}",
            lf.rank(),
            c.dim() / 2
        )));
    }
    for (name, f) in [("E⁺", &c.e_plus), ("E⁻", &c.e_minus)] {
        let diff = lf.projector() - f.projector();
        if smallest_sv(&diff) <= 1e-8 {
            return Err(BoundaryError::NotTransversal(format!(
                "L is not transversal to {name}"
            )));
        }
    }
    let i = c64::new(0.0, 1.0);
    let p_minus_idem = Idempotent::new(c.p_minus.clone())?;
    let pm_ort = orthogonalize_idempotent(&p_minus_idem).into_matrix();
    let p_l_eplus = oblique_projector(lf, &c.e_plus)?;
    let n = c.dim();
    let t_prime = pm_ort
        .dot(&c.sigma_n.mapv(|z| z * i))
        .dot(&c.p_plus)
        .dot(p_l_eplus.matrix())
        .dot(&pm_ort)
        + (eye(n) - &pm_ort);
    let fm = c.e_minus.basis();
    let t_matrix = adjoint(fm).dot(&t_prime).dot(fm);
    Ok(BoundaryAutomorphism { t_matrix })
}

/// Does ω vanish on L × L? Requires transversality first, which is reported
/// ahead of the Lagrangian verdict.
pub fn is_lagrangian(c: &ConormalData, l: &BoundaryCondition) -> Result<bool> {
    // transversality gate (errors take precedence over the boolean)
    let _ = t_from_condition(c, l)?;
    Ok(omega_defect(c, l) <= 1e-9 * op_norm(&c.sigma_n).max(1.0))
}

/// ‖ω restricted to L × L‖.
pub fn omega_defect(c: &ConormalData, l: &BoundaryCondition) -> f64 {
    let b = l.frame().basis();
    op_norm(&c.symplectic_form(b, b))
}

/// Spectral subspace of a self-adjoint invertible T for (−∞, 0), in E⁻
/// coordinates.
pub fn negative_subspace_f(t: &BoundaryAutomorphism) -> Result<SubspaceFrame> {
    let k = t.t_matrix.nrows();
    let (vals, vecs) = eigh(&crate::linalg::hermitize(&t.t_matrix));
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let threshold = T_SINGULAR_RTOL * scale.max(1e-300);
    let min_eig = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if min_eig < threshold {
        return Err(BoundaryError::NearSingularT { min_eig, threshold });
    }
    let neg: Vec<usize> = (0..k).filter(|&j| vals[j] < 0.0).collect();
    let mut basis = CMatrix::zeros((k, neg.len()));
    for (jj, &j) in neg.iter().enumerate() {
        basis.column_mut(jj).assign(&vecs.column(j));
    }
    Ok(SubspaceFrame::from_orthonormal(basis))
}

/// Cyclic samples of boundary data over a discretized boundary circle.
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    samples: Vec<(ConormalData, BoundaryAutomorphism)>,
}

impl BoundaryLoop {
    pub fn new(samples: Vec<(ConormalData, BoundaryAutomorphism)>) -> Self {
        assert!(!samples.is_empty());
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, k: usize) -> &(ConormalData, BoundaryAutomorphism) {
        &self.samples[k % self.samples.len()]
    }

    pub fn samples(&self) -> &[(ConormalData, BoundaryAutomorphism)] {
        &self.samples
    }
}

/// Per-sample F frames in ambient fiber coordinates, with a resolution check
/// between cyclically adjacent samples.
pub fn loop_f(bl: &BoundaryLoop) -> Result<Vec<SubspaceFrame>> {
    let mut frames = Vec::with_capacity(bl.len());
    for (c, t) in bl.samples() {
        let f_coeff = negative_subspace_f(t)?;
        let ambient = c.e_minus.basis().dot(f_coeff.basis());
        frames.push(SubspaceFrame::span(&ambient));
    }
    for k in 0..frames.len() {
        let next = (k + 1) % frames.len();
        if frames[k].rank() != frames[next].rank() {
            return Err(BoundaryError::ResolutionTooCoarse { index: k, gap: 1.0 });
        }
        let gap = gap_distance(&frames[k], &frames[next]);
        if gap >= LOOP_GAP_LIMIT {
            return Err(BoundaryError::ResolutionTooCoarse { index: k, gap });
        }
    }
    Ok(frames)
}
