//! Pointwise symbol algebra for first-order self-adjoint elliptic operators
//! on a surface.
//!
//! A symbol at a point is a pair of Hermitian matrices (σ₁, σ₂) — the values
//! of σ on a positively oriented cotangent frame — subject to ellipticity:
//! Q = σ₁⁻¹σ₂ has no real eigenvalue. The generalized eigenspaces of Q for
//! the upper and lower half-planes give the chiral splitting E⁺ ⊕ E⁻.
//!
//! The Θ-chart (E⁻, E⁺, J, Q⁻) with J = σ₁|_{E⁻} and Q⁻ = Q|_{E⁻} carries
//! the same data as (σ₁, σ₂); both directions are implemented here, plus the
//! retraction that deforms any symbol onto a Dirac one ((c₁σ₁ + c₂σ₂)² =
//! (c₁² + c₂²)·1) while keeping E⁻ fixed:
//!
//! ```text
//! J_s = (s (JJ*)^{-1/2} + 1 - s) J,   Q⁻_s = -i s + (1-s) Q⁻,
//! E⁺_s = graph of (1-s) B over (E⁻)^⊥.
//! ```

use crate::linalg::schur::{ordered_schur, HalfPlane};
use crate::linalg::{
    adjoint, eye, hermitian_defect, hermitize, inv_sqrt_hermitian, op_norm, smallest_sv,
    solve_matrix, try_inverse, CMatrix, SubspaceFrame, SV_RTOL,
};
use ndarray_linalg::Eig;
use num_complex::Complex64 as c64;
use thiserror::Error;

/// Ellipticity margin: min |Im λ(Q)| must exceed this times the spectral
/// radius of Q, separating genuine non-ellipticity from roundoff.
pub const ELLIPTICITY_RTOL: f64 = 1e-8;

/// Hermiticity tolerance relative to the matrix norm.
pub const HERMITICITY_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("σ(e₁) is numerically singular")]
    Singular,
    #[error("symbol is not elliptic: min |Im λ(Q)| = {min_imag:.3e} ≤ {threshold:.3e}")]
    NotElliptic { min_imag: f64, threshold: f64 },
    #[error("q_minus has an eigenvalue with non-negative imaginary part ({0:.3e})")]
    InvalidTheta(f64),
    #[error("path endpoints are not conjugate by g (defect {0:.3e})")]
    EndpointMismatch(f64),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

pub type Result<T> = std::result::Result<T, SymbolError>;

/// A validated elliptic symbol value (σ₁, σ₂) at one point.
#[derive(Debug, Clone)]
pub struct EllipticSymbol {
    sigma1: CMatrix,
    sigma2: CMatrix,
}

/// The chiral splitting Cⁿ = E⁺ ⊕ E⁻ derived from Q = σ₁⁻¹σ₂.
#[derive(Debug, Clone)]
pub struct ChiralSplit {
    pub e_plus: SubspaceFrame,
    pub e_minus: SubspaceFrame,
    pub q: CMatrix,
}

/// Θ-chart of a symbol: (E⁻, E⁺, J, Q⁻).
///
/// `j` holds the images of the `e_minus` basis columns under σ₁ (they lie in
/// (E⁻)^⊥); `q_minus` is Q restricted to E⁻, in the `e_minus` frame.
#[derive(Debug, Clone)]
pub struct ThetaCoordinates {
    pub e_minus: SubspaceFrame,
    pub e_plus: SubspaceFrame,
    pub j: CMatrix,
    pub q_minus: CMatrix,
}

/// Cyclic list of elliptic symbols over a discretized boundary circle.
/// Sample k is the pair (σ(n), σ(ξ)) at boundary point x_k; indexing wraps.
#[derive(Debug, Clone)]
pub struct SymbolLoop {
    samples: Vec<EllipticSymbol>,
}

impl SymbolLoop {
    pub fn new(samples: Vec<EllipticSymbol>) -> Self {
        assert!(!samples.is_empty(), "a symbol loop needs at least one sample");
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Cyclic access.
    pub fn sample(&self, k: usize) -> &EllipticSymbol {
        &self.samples[k % self.samples.len()]
    }

    pub fn samples(&self) -> &[EllipticSymbol] {
        &self.samples
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let defect = hermitian_defect(m);
    let scale = op_norm(m).max(1e-300);
    if defect > HERMITICITY_RTOL * scale.max(1.0) {
        return Err(SymbolError::NotHermitian(defect));
    }
    Ok(())
}

/// Validate a pair of Hermitian matrices as an elliptic symbol.
pub fn check_ellipticity(sigma1: &CMatrix, sigma2: &CMatrix) -> Result<EllipticSymbol> {
    check_hermitian(sigma1)?;
    check_hermitian(sigma2)?;
    if smallest_sv(sigma1) <= SV_RTOL * op_norm(sigma1) {
        return Err(SymbolError::Singular);
    }
    let q = solve_matrix(sigma1, sigma2)?;
    // Eigenvalues only; the row-major transposition inside zgeev leaves the
    // spectrum itself untouched.
    let (eigs, _) = q.eig().map_err(|e| {
        SymbolError::Linalg(crate::linalg::LinalgError::Backend(format!("eig: {e}")))
    })?;
    let radius = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_imag = eigs.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
    let threshold = ELLIPTICITY_RTOL * radius.max(1e-300);
    if min_imag <= threshold {
        return Err(SymbolError::NotElliptic { min_imag, threshold });
    }
    Ok(EllipticSymbol {
        sigma1: hermitize(sigma1),
        sigma2: hermitize(sigma2),
    })
}

impl EllipticSymbol {
    pub fn dim(&self) -> usize {
        self.sigma1.nrows()
    }

    pub fn sigma1(&self) -> &CMatrix {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &CMatrix {
        &self.sigma2
    }

    /// σ(c₁e₁ + c₂e₂).
    pub fn evaluate(&self, c1: f64, c2: f64) -> CMatrix {
        &self.sigma1 * c64::new(c1, 0.0) + &self.sigma2 * c64::new(c2, 0.0)
    }

    /// Q = σ₁⁻¹ σ₂.
    pub fn q(&self) -> CMatrix {
        solve_matrix(&self.sigma1, &self.sigma2).expect("σ₁ validated invertible")
    }

    /// Conjugated symbol (g σ₁ g*, g σ₂ g*).
    pub fn conjugate(&self, g: &CMatrix) -> EllipticSymbol {
        let ga = adjoint(g);
        EllipticSymbol {
            sigma1: hermitize(&g.dot(&self.sigma1).dot(&ga)),
            sigma2: hermitize(&g.dot(&self.sigma2).dot(&ga)),
        }
    }
}

/// Split Cⁿ into the generalized eigenspaces of Q for the upper (E⁺) and
/// lower (E⁻) half-planes, each frame coming from an ordered Schur
/// factorization.
pub fn chiral_split(sym: &EllipticSymbol) -> Result<ChiralSplit> {
    let q = sym.q();
    let lower = ordered_schur(&q, HalfPlane::LowerImag)?;
    let upper = ordered_schur(&q, HalfPlane::UpperImag)?;
    let e_minus = lower.invariant_subspace();
    let e_plus = upper.invariant_subspace();
    debug_assert_eq!(e_minus.rank() + e_plus.rank(), sym.dim());
    Ok(ChiralSplit { e_plus, e_minus, q })
}

/// Θ-chart of an elliptic symbol.
pub fn theta_coords(sym: &EllipticSymbol) -> Result<ThetaCoordinates> {
    let split = chiral_split(sym)?;
    let fm = split.e_minus.basis();
    // σ₁ E⁻ ⊥ E⁻, so the projection onto (E⁻)^⊥ only removes roundoff.
    let j_raw = sym.sigma1.dot(fm);
    let pm = split.e_minus.projector();
    let n = sym.dim();
    let j = (eye(n) - &pm).dot(&j_raw);
    let q_minus = adjoint(fm).dot(&split.q).dot(fm);
    Ok(ThetaCoordinates {
        e_minus: split.e_minus,
        e_plus: split.e_plus,
        j,
        q_minus,
    })
}

/// Rebuild (σ₁, σ₂) from a Θ-chart via the dual pairing of E⁺ with (E⁻)^⊥.
pub fn theta_inverse(theta: &ThetaCoordinates) -> Result<EllipticSymbol> {
    let (eigs, _) = theta.q_minus.eig().map_err(|e| {
        SymbolError::Linalg(crate::linalg::LinalgError::Backend(format!("eig: {e}")))
    })?;
    let max_im = eigs.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    if max_im >= 0.0 {
        return Err(SymbolError::InvalidTheta(max_im));
    }

    let u = theta.e_plus.basis(); // E⁺ frame
    let v = theta.e_minus.basis(); // E⁻ frame

    // σᵢ on E⁻, as ambient columns (they live in (E⁻)^⊥).
    let z1 = theta.j.clone();
    let z2 = theta.j.dot(&theta.q_minus);

    // σᵢ on E⁺ lands in (E⁺)^⊥; its coefficient matrix X over the frame of
    // (E⁺)^⊥ is fixed by ⟨σᵢ u, v⟩ = ⟨u, σᵢ v⟩ for u ∈ E⁺, v ∈ E⁻.
    let wp_frame = theta.e_plus.orthogonal_complement();
    let wp = wp_frame.basis(); // (E⁺)^⊥ frame
    let pairing = adjoint(wp).dot(v); // (E⁺)^⊥ × E⁻ pairing, invertible
    let pairing_inv_h = adjoint(&try_inverse(&pairing)?);
    let x1 = pairing_inv_h.dot(&adjoint(&z1)).dot(u);
    let x2 = pairing_inv_h.dot(&adjoint(&z2)).dot(u);

    let basis = crate::linalg::hcat(&[&u.to_owned(), &v.to_owned()]);
    let basis_inv = try_inverse(&basis)?;
    let img1 = crate::linalg::hcat(&[&wp.dot(&x1), &z1]);
    let img2 = crate::linalg::hcat(&[&wp.dot(&x2), &z2]);
    let s1 = img1.dot(&basis_inv);
    let s2 = img2.dot(&basis_inv);

    // The construction yields self-adjoint matrices; anything beyond roundoff
    // signals inconsistent chart data.
    let d1 = hermitian_defect(&s1) / op_norm(&s1).max(1e-300);
    let d2 = hermitian_defect(&s2) / op_norm(&s2).max(1e-300);
    if d1 > 1e-8 || d2 > 1e-8 {
        return Err(SymbolError::NotHermitian(d1.max(d2)));
    }
    check_ellipticity(&hermitize(&s1), &hermitize(&s2))
}

/// Is (c₁σ₁ + c₂σ₂)² = (c₁² + c₂²)·1 for all real (c₁, c₂)? Equivalently
/// σ₁² = σ₂² = 1 and σ₁σ₂ + σ₂σ₁ = 0, which is what is checked.
pub fn is_dirac(sym: &EllipticSymbol) -> bool {
    let n = sym.dim();
    let id = eye(n);
    let s1 = &sym.sigma1;
    let s2 = &sym.sigma2;
    let tol = 1e-9 * (1.0 + op_norm(s1).powi(2).max(op_norm(s2).powi(2)));
    op_norm(&(s1.dot(s1) - &id)) < tol
        && op_norm(&(s2.dot(s2) - &id)) < tol
        && op_norm(&(s1.dot(s2) + &s2.dot(s1))) < tol
}

/// Deform a symbol toward Dirac type; `t = 0` is the identity, `t = 1` lands
/// on a Dirac symbol. E⁻ is preserved for every `t`.
pub fn retract_symbol(sym: &EllipticSymbol, t: f64) -> Result<EllipticSymbol> {
    if t == 0.0 {
        return Ok(sym.clone());
    }
    let theta = theta_coords(sym)?;
    let fm = theta.e_minus.basis();
    let fperp_frame = theta.e_minus.orthogonal_complement();
    let fperp = fperp_frame.basis();
    let k = fm.ncols();

    // J as a coefficient matrix from the E⁻ frame to the (E⁻)^⊥ frame.
    let jc = adjoint(fperp).dot(&theta.j);
    let jj = jc.dot(&adjoint(&jc));
    let jj_inv_sqrt = inv_sqrt_hermitian(&jj);
    let blend = &jj_inv_sqrt * c64::new(t, 0.0) + &(eye(k) * c64::new(1.0 - t, 0.0));
    let jc_t = blend.dot(&jc);
    let j_t = fperp.dot(&jc_t);

    let q_minus_t =
        &theta.q_minus * c64::new(1.0 - t, 0.0) + &(eye(k) * c64::new(0.0, -t));

    // E⁺ as the graph of B over (E⁻)^⊥, shrunk by (1 − t).
    let fp = theta.e_plus.basis();
    let alpha = adjoint(fperp).dot(fp);
    let beta = adjoint(fm).dot(fp);
    let b = beta.dot(&try_inverse(&alpha)?);
    let graph_cols = fperp.to_owned() + fm.dot(&(&b * c64::new(1.0 - t, 0.0)));
    let e_plus_t = SubspaceFrame::span(&graph_cols);

    theta_inverse(&ThetaCoordinates {
        e_minus: theta.e_minus.clone(),
        e_plus: e_plus_t,
        j: j_t,
        q_minus: q_minus_t,
    })
}

/// Smooth partition of unity subordinate to [0, 2/3), (1/3, 1].
fn rho0(t: f64) -> f64 {
    if t <= 1.0 / 3.0 {
        1.0
    } else if t >= 2.0 / 3.0 {
        0.0
    } else {
        let u = (t - 1.0 / 3.0) * 3.0;
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

/// Retract a sampled path of symbols with conjugate ends, keeping the
/// endpoint identity path(1) = g·path(0)·g* exact for every stage `s`.
///
/// Stage `s = 0` returns the input; at `s = 1` every sample is Dirac type.
pub fn retract_path(
    path: &[EllipticSymbol],
    g: &CMatrix,
    s: f64,
) -> Result<Vec<EllipticSymbol>> {
    assert!(path.len() >= 2, "a path needs at least two samples");
    let first = &path[0];
    let last = &path[path.len() - 1];
    let conj_first = first.conjugate(g);
    let scale = op_norm(first.sigma1()).max(op_norm(first.sigma2())).max(1e-300);
    let defect = op_norm(&(last.sigma1() - conj_first.sigma1()))
        .max(op_norm(&(last.sigma2() - conj_first.sigma2())));
    if defect > 1e-9 * scale.max(1.0) {
        return Err(SymbolError::EndpointMismatch(defect));
    }
    if s == 0.0 {
        return Ok(path.to_vec());
    }

    let ga = adjoint(g);
    let nsamp = path.len();
    let mut out = Vec::with_capacity(nsamp);
    for (i, sym) in path.iter().enumerate() {
        let t = i as f64 / (nsamp - 1) as f64;
        let r0 = rho0(t);
        let r1 = 1.0 - r0;
        let a0 = retract_symbol(sym, s)?;
        let pulled = EllipticSymbol {
            sigma1: hermitize(&ga.dot(&sym.sigma1).dot(g)),
            sigma2: hermitize(&ga.dot(&sym.sigma2).dot(g)),
        };
        let a1 = retract_symbol(&pulled, s)?.conjugate(g);
        let s1 = &a0.sigma1 * c64::new(r0, 0.0) + &a1.sigma1 * c64::new(r1, 0.0);
        let s2 = &a0.sigma2 * c64::new(r0, 0.0) + &a1.sigma2 * c64::new(r1, 0.0);
        out.push(check_ellipticity(&s1, &s2)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Random elliptic symbols (used by the property suites and the CLI).
// ---------------------------------------------------------------------------

/// Draw a random elliptic symbol of even dimension `n` by sampling a Θ-chart
/// and mapping it back. Exercises `theta_inverse` on every draw.
pub fn random_elliptic_symbol<R: rand::Rng>(rng: &mut R, n: usize) -> EllipticSymbol {
    use crate::linalg::random::{random_frame, random_matrix};
    assert!(n >= 2 && n % 2 == 0, "elliptic symbols need even dimension");
    let k = n / 2;
    loop {
        let e_minus = random_frame(rng, n, k);
        if e_minus.rank() != k {
            continue;
        }
        let fperp_frame = e_minus.orthogonal_complement();
        let fperp = fperp_frame.basis();
        let fm = e_minus.basis();

        let b = random_matrix(rng, k, k).mapv(|z| z * 0.45);
        let e_plus = SubspaceFrame::span(&(fperp.to_owned() + fm.dot(&b)));
        if e_plus.rank() != k {
            continue;
        }

        let jc = random_matrix(rng, k, k);
        if smallest_sv(&jc) < 0.05 * op_norm(&jc) {
            continue;
        }
        let j = fperp.dot(&jc);

        let a = random_matrix(rng, k, k).mapv(|z| z * 0.8);
        let shift = op_norm(&a) + 0.3 + rng.gen_range(0.0..0.7);
        let q_minus = &a + &(eye(k) * c64::new(0.0, -shift));

        let theta = ThetaCoordinates {
            e_minus,
            e_plus,
            j,
            q_minus,
        };
        match theta_inverse(&theta) {
            Ok(sym) => return sym,
            Err(_) => continue,
        }
    }
}

/// 2×2 Pauli matrices, the canonical Dirac symbol pair.
pub fn pauli_pair() -> (CMatrix, CMatrix) {
    let o = c64::new(0.0, 0.0);
    let l = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    let sx = ndarray::array![[o, l], [l, o]];
    let sy = ndarray::array![[o, -i], [i, o]];
    (sx, sy)
}

/// Third Pauli matrix.
pub fn pauli_z() -> CMatrix {
    let o = c64::new(0.0, 0.0);
    let l = c64::new(1.0, 0.0);
    ndarray::array![[l, o], [o, -l]]
}

/// Spectrum of Q restricted to a frame must sit strictly in one half-plane;
/// used by the invariants suite.
pub fn restricted_spectrum_imag_range(q: &CMatrix, frame: &SubspaceFrame) -> (f64, f64) {
    let qc = adjoint(frame.basis()).dot(q).dot(frame.basis());
    let (eigs, _) = qc.eig().expect("eig failed");
    let lo = eigs.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_matrix, random_unitary};
    use crate::linalg::{block_diag, eigh, gap_distance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_symbol() -> EllipticSymbol {
        let (sx, sy) = pauli_pair();
        check_ellipticity(&sx, &sy).unwrap()
    }

    #[test]
    fn pauli_pair_is_elliptic_with_q_pm_i() {
        let sym = pauli_symbol();
        let q = sym.q();
        let i = c64::new(0.0, 1.0);
        // Q = σ_x σ_y = i σ_z
        let oracle = pauli_z().mapv(|z| z * i);
        assert!(op_norm(&(&q - &oracle)) < 1e-12);
    }

    #[test]
    fn identity_pair_is_not_elliptic() {
        let id = eye(2);
        assert!(matches!(
            check_ellipticity(&id, &id),
            Err(SymbolError::NotElliptic { .. })
        ));
        let (sx, _) = pauli_pair();
        assert!(matches!(
            check_ellipticity(&sx, &sx),
            Err(SymbolError::NotElliptic { .. })
        ));
    }

    #[test]
    fn odd_dimension_never_elliptic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let s1 = crate::linalg::random::random_invertible_hermitian(&mut rng, 3, 0.3);
            let s2 = crate::linalg::random::random_hermitian(&mut rng, 3);
            assert!(check_ellipticity(&s1, &s2).is_err());
        }
    }

    #[test]
    fn pauli_chiral_split() {
        let sym = pauli_symbol();
        let split = chiral_split(&sym).unwrap();
        let e1 = SubspaceFrame::coordinate(2, &[0]);
        let e2 = SubspaceFrame::coordinate(2, &[1]);
        assert!(gap_distance(&split.e_plus, &e1) < 1e-10);
        assert!(gap_distance(&split.e_minus, &e2) < 1e-10);
    }

    #[test]
    fn split_of_direct_sum_is_direct_sum_of_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_elliptic_symbol(&mut rng, 4);
        let b = random_elliptic_symbol(&mut rng, 2);
        let s1 = block_diag(&[a.sigma1(), b.sigma1()]);
        let s2 = block_diag(&[a.sigma2(), b.sigma2()]);
        let sum = check_ellipticity(&s1, &s2).unwrap();
        let split_sum = chiral_split(&sum).unwrap();
        let split_a = chiral_split(&a).unwrap();
        let split_b = chiral_split(&b).unwrap();
        let pm_oracle = block_diag(&[
            &split_a.e_minus.projector(),
            &split_b.e_minus.projector(),
        ]);
        assert!(op_norm(&(split_sum.e_minus.projector() - &pm_oracle)) < 1e-9);
    }

    #[test]
    fn symbol_maps_chiral_spaces_to_their_orthocomplements() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sym = random_elliptic_symbol(&mut rng, 8);
        let split = chiral_split(&sym).unwrap();
        for _ in 0..10 {
            let c1: f64 = rand::Rng::gen_range(&mut rng, -2.0..2.0);
            let c2: f64 = rand::Rng::gen_range(&mut rng, -2.0..2.0);
            if c1.abs() + c2.abs() < 1e-3 {
                continue;
            }
            let sx = sym.evaluate(c1, c2);
            for frame in [&split.e_plus, &split.e_minus] {
                let image = sx.dot(frame.basis());
                let overlap = adjoint(frame.basis()).dot(&image);
                assert!(
                    op_norm(&overlap) < 1e-9 * op_norm(&sx).max(1.0),
                    "σ(ξ)E± must be orthogonal to E±"
                );
            }
        }
    }

    #[test]
    fn half_plane_spectra_of_restricted_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for &n in &[2usize, 4, 6, 8] {
            let sym = random_elliptic_symbol(&mut rng, n);
            let split = chiral_split(&sym).unwrap();
            assert_eq!(split.e_plus.rank(), n / 2);
            assert_eq!(split.e_minus.rank(), n / 2);
            let (_, hi) = restricted_spectrum_imag_range(&split.q, &split.e_minus);
            let (lo, _) = restricted_spectrum_imag_range(&split.q, &split.e_plus);
            assert!(hi < 0.0, "spec(Q|E⁻) must lie in the lower half-plane");
            assert!(lo > 0.0, "spec(Q|E⁺) must lie in the upper half-plane");
        }
    }

    #[test]
    fn frame_change_leaves_split_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let sym = random_elliptic_symbol(&mut rng, 6);
        let split = chiral_split(&sym).unwrap();
        for &t in &[0.3f64, -1.2, 2.0] {
            // (e₁, e₂ + t e₁): σ₂ → σ₂ + t σ₁.
            let s2 = sym.sigma2() + &(sym.sigma1() * c64::new(t, 0.0));
            let shifted = check_ellipticity(sym.sigma1(), &s2).unwrap();
            let split2 = chiral_split(&shifted).unwrap();
            assert!(gap_distance(&split.e_minus, &split2.e_minus) < 1e-9);
            assert!(gap_distance(&split.e_plus, &split2.e_plus) < 1e-9);
            // (e₁ + t e₂, e₂): σ₁ → σ₁ + t σ₂ (stay away from singular σ₁).
            let s1 = sym.sigma1() + &(sym.sigma2() * c64::new(t * 0.1, 0.0));
            if let Ok(shifted) = check_ellipticity(&s1, sym.sigma2()) {
                let split3 = chiral_split(&shifted).unwrap();
                assert!(gap_distance(&split.e_minus, &split3.e_minus) < 1e-9);
            }
        }
    }

    #[test]
    fn pauli_theta_chart_maps_e2_to_e1() {
        let sym = pauli_symbol();
        let theta = theta_coords(&sym).unwrap();
        // E⁻ = span(e₂); J = σ_x|_{E⁻} sends e₂ to e₁.
        let col = theta.j.column(0).to_owned();
        let basis_phase = theta.e_minus.basis()[(1, 0)];
        // account for the arbitrary phase of the frame vector
        let expected = ndarray::array![basis_phase, c64::new(0.0, 0.0)];
        assert!((col[0] - expected[0]).norm() + (col[1] - expected[1]).norm() < 1e-10);
    }

    #[test]
    fn theta_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for &n in &[2usize, 4, 6, 8] {
            let sym = random_elliptic_symbol(&mut rng, n);
            let theta = theta_coords(&sym).unwrap();
            let back = theta_inverse(&theta).unwrap();
            let scale = op_norm(sym.sigma1()).max(op_norm(sym.sigma2()));
            assert!(op_norm(&(back.sigma1() - sym.sigma1())) < 1e-9 * scale.max(1.0));
            assert!(op_norm(&(back.sigma2() - sym.sigma2())) < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn theta_inverse_rejects_upper_half_plane_q_minus() {
        let sym = pauli_symbol();
        let mut theta = theta_coords(&sym).unwrap();
        theta.q_minus = eye(1) * c64::new(0.0, 0.5);
        assert!(matches!(
            theta_inverse(&theta),
            Err(SymbolError::InvalidTheta(_))
        ));
    }

    #[test]
    fn pauli_is_dirac_scaled_is_not() {
        let sym = pauli_symbol();
        assert!(is_dirac(&sym));
        let (sx, sy) = pauli_pair();
        let sym2 = check_ellipticity(&sx.mapv(|z| z * 2.0), &sy).unwrap();
        assert!(!is_dirac(&sym2));
    }

    #[test]
    fn retraction_is_identity_at_zero_and_dirac_at_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for &n in &[2usize, 4, 6] {
            let sym = random_elliptic_symbol(&mut rng, n);
            let r0 = retract_symbol(&sym, 0.0).unwrap();
            assert!(op_norm(&(r0.sigma1() - sym.sigma1())) < 1e-12);
            let r1 = retract_symbol(&sym, 1.0).unwrap();
            assert!(is_dirac(&r1), "retraction endpoint must be Dirac type");
            // E⁻ is preserved along the way.
            let em = chiral_split(&sym).unwrap().e_minus;
            for &t in &[0.25, 0.5, 0.75, 1.0] {
                let rt = retract_symbol(&sym, t).unwrap();
                let em_t = chiral_split(&rt).unwrap().e_minus;
                assert!(gap_distance(&em, &em_t) < 1e-8);
            }
        }
    }

    #[test]
    fn retraction_fixes_dirac_symbols() {
        let sym = pauli_symbol();
        for &t in &[0.3, 0.7, 1.0] {
            let rt = retract_symbol(&sym, t).unwrap();
            assert!(op_norm(&(rt.sigma1() - sym.sigma1())) < 1e-9);
            assert!(op_norm(&(rt.sigma2() - sym.sigma2())) < 1e-9);
        }
    }

    #[test]
    fn retraction_is_unitarily_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let sym = random_elliptic_symbol(&mut rng, 4);
        let g = random_unitary(&mut rng, 4);
        for &t in &[0.4, 1.0] {
            let lhs = retract_symbol(&sym.conjugate(&g), t).unwrap();
            let rhs = retract_symbol(&sym, t).unwrap().conjugate(&g);
            let scale = op_norm(lhs.sigma1()).max(1.0);
            assert!(op_norm(&(lhs.sigma1() - rhs.sigma1())) < 1e-9 * scale);
            assert!(op_norm(&(lhs.sigma2() - rhs.sigma2())) < 1e-9 * scale);
        }
    }

    #[test]
    fn retract_path_constant_loop_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let sym = random_elliptic_symbol(&mut rng, 4);
        let path: Vec<_> = (0..5).map(|_| sym.clone()).collect();
        let g = eye(4);
        let out = retract_path(&path, &g, 0.8).unwrap();
        let pointwise = retract_symbol(&sym, 0.8).unwrap();
        for o in &out {
            assert!(op_norm(&(o.sigma1() - pointwise.sigma1())) < 1e-9);
        }
        // s = 0 returns the input unchanged.
        let out0 = retract_path(&path, &g, 0.0).unwrap();
        for o in &out0 {
            assert!(op_norm(&(o.sigma1() - sym.sigma1())) < 1e-14);
        }
    }

    #[test]
    fn retract_path_preserves_conjugated_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let base = random_elliptic_symbol(&mut rng, 4);
        // one-parameter unitary family U(t) = exp(i t H), with g := U(1)
        let h = crate::linalg::random::random_hermitian(&mut rng, 4);
        let (hvals, hvecs) = eigh(&h);
        let nsamp = 7;
        let gpow = |t: f64| -> CMatrix {
            let d = CMatrix::from_diag(&ndarray::arr1(
                &hvals
                    .iter()
                    .map(|&l| {
                        let phase = l * t;
                        c64::new(phase.cos(), phase.sin())
                    })
                    .collect::<Vec<_>>(),
            ));
            hvecs.dot(&d).dot(&adjoint(&hvecs))
        };
        let path: Vec<_> = (0..nsamp)
            .map(|i| {
                let t = i as f64 / (nsamp - 1) as f64;
                base.conjugate(&gpow(t))
            })
            .collect();
        // endpoints: path(1) = g' path(0) g'⁻¹ with g' = gpow(1)
        let gfull = gpow(1.0);
        for &s in &[0.0, 0.5, 1.0] {
            let out = retract_path(&path, &gfull, s).unwrap();
            let last = &out[nsamp - 1];
            let conj_first = out[0].conjugate(&gfull);
            let scale = op_norm(last.sigma1()).max(1.0);
            assert!(
                op_norm(&(last.sigma1() - conj_first.sigma1())) < 1e-8 * scale,
                "endpoint conjugation must survive retraction (s = {s})"
            );
            if s == 1.0 {
                for o in &out {
                    assert!(is_dirac(o));
                }
            }
        }
    }

    #[test]
    fn symbol_loop_cyclic_indexing() {
        let sym = pauli_symbol();
        let lp = SymbolLoop::new(vec![sym.clone(), sym.clone(), sym]);
        assert_eq!(lp.len(), 3);
        let _ = lp.sample(5);
        let _ = random_matrix(&mut ChaCha8Rng::seed_from_u64(1), 2, 2);
    }
}
