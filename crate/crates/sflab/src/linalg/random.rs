//! Seeded random generators for matrices, frames and idempotents.
//!
//! These feed both the property-test batteries and the CLI `suite`
//! subcommand, so they live in the library proper rather than in test code.

use super::{adjoint, eye, oblique_projector, CMatrix, Idempotent, SubspaceFrame};
use ndarray_linalg::QR;
use num_complex::Complex64 as c64;
use rand::Rng;

/// Standard normal via Box-Muller, to keep the dependency set small.
fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_shape_fn((rows, cols), |_| c64::new(normal(rng), normal(rng)))
}

/// Hermitian matrix of unit-scale entries.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (a.clone() + adjoint(&a)).mapv(|z| z * 0.5)
}

/// Haar-like unitary via QR of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    let (q, r) = a.qr().expect("qr failed");
    // Fix the phase so the distribution is not biased by QR sign choices.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random k-dimensional subspace of Cⁿ.
pub fn random_frame<R: Rng>(rng: &mut R, n: usize, k: usize) -> SubspaceFrame {
    SubspaceFrame::span(&random_matrix(rng, n, k))
}

/// A complementary pair (L, M) with dim L = k, dim M = n − k, in generic
/// position but kept away from degeneracy.
pub fn random_complementary_pair<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> (SubspaceFrame, SubspaceFrame) {
    loop {
        let u = random_unitary(rng, n);
        let l = SubspaceFrame::span(&u.slice(ndarray::s![.., ..k]).to_owned());
        // Perturb the complement so the pair is genuinely oblique.
        let mut mcols = u.slice(ndarray::s![.., k..]).to_owned();
        let noise = random_matrix(rng, n, n - k).mapv(|z| z * 0.3);
        mcols = mcols + noise;
        let m = SubspaceFrame::span(&mcols);
        if m.rank() != n - k {
            continue;
        }
        let pl = l.projector();
        let pm = m.projector();
        if super::smallest_sv(&(&pl - &pm)) > 1e-3 {
            return (l, m);
        }
    }
}

/// Random (generally non-Hermitian) idempotent of moderate conditioning.
pub fn random_idempotent<R: Rng>(rng: &mut R, n: usize) -> Idempotent {
    let k = 1 + rng.gen_range(0..n.max(2) - 1);
    let (l, m) = random_complementary_pair(rng, n, k);
    oblique_projector(&l, &m).expect("complementary pair must yield a projector")
}

/// Hermitian matrix with spectrum bounded away from zero.
pub fn random_invertible_hermitian<R: Rng>(rng: &mut R, n: usize, min_gap: f64) -> CMatrix {
    let u = random_unitary(rng, n);
    let vals: Vec<c64> = (0..n)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            c64::new(sign * (min_gap + rng.gen_range(0.0..2.0)), 0.0)
        })
        .collect();
    let d = CMatrix::from_diag(&ndarray::arr1(&vals));
    let h = u.dot(&d).dot(&adjoint(&u));
    (h.clone() + adjoint(&h)).mapv(|z| z * 0.5)
}

/// Unit-modulus complex number.
pub fn random_phase<R: Rng>(rng: &mut R) -> c64 {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    c64::new(t.cos(), t.sin())
}

/// Identity-plus-noise unitary, useful for small perturbation tests.
pub fn near_identity_unitary<R: Rng>(rng: &mut R, n: usize, eps: f64) -> CMatrix {
    let h = random_hermitian(rng, n).mapv(|z| z * eps);
    // Cayley transform of a small Hermitian is unitary.
    let i = c64::new(0.0, 1.0);
    let a = eye(n) + &h.mapv(|z| z * i * 0.5);
    let b = eye(n) - &h.mapv(|z| z * i * 0.5);
    super::solve_matrix(&b, &a).expect("cayley solve")
}
