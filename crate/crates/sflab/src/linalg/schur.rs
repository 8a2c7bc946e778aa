//! Ordered complex Schur decomposition.
//!
//! Invariant subspaces for eigenvalue half-planes are extracted from a Schur
//! factorization with sorted eigenvalues (LAPACK `zgees`), never from raw
//! eigenvectors: the latter degrade for defective or clustered spectra while
//! the Schur route stays backward stable.

use super::{CMatrix, LinalgError, Result, SubspaceFrame};
use lapack_sys::__BindgenComplex;
use num_complex::Complex64 as c64;
use std::os::raw::{c_char, c_int};

/// Which eigenvalues to sort to the leading block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    LowerImag,
    UpperImag,
}

/// Result of a sorted Schur factorization A = V T V*.
pub struct OrderedSchur {
    /// Unitary factor; its leading `selected` columns span the invariant
    /// subspace of the selected eigenvalues.
    pub vectors: CMatrix,
    /// All eigenvalues, in the sorted Schur order.
    pub eigenvalues: Vec<c64>,
    /// Number of selected eigenvalues.
    pub selected: usize,
}

impl OrderedSchur {
    /// Frame of the invariant subspace belonging to the selected eigenvalues.
    pub fn invariant_subspace(&self) -> SubspaceFrame {
        let basis = self
            .vectors
            .slice(ndarray::s![.., ..self.selected])
            .to_owned();
        SubspaceFrame::from_orthonormal(basis)
    }
}

unsafe extern "C" fn select_lower(w: *const __BindgenComplex<f64>) -> c_int {
    if (*w).im < 0.0 {
        1
    } else {
        0
    }
}

unsafe extern "C" fn select_upper(w: *const __BindgenComplex<f64>) -> c_int {
    if (*w).im > 0.0 {
        1
    } else {
        0
    }
}

/// Schur-factorize `a` with the eigenvalues of the requested imaginary
/// half-plane sorted to the leading diagonal block.
pub fn ordered_schur(a: &CMatrix, half_plane: HalfPlane) -> Result<OrderedSchur> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::DimensionMismatch(
            "schur factorization needs a square matrix".into(),
        ));
    }
    if n == 0 {
        return Ok(OrderedSchur {
            vectors: CMatrix::zeros((0, 0)),
            eigenvalues: vec![],
            selected: 0,
        });
    }

    // Column-major copy for LAPACK.
    let mut buf: Vec<__BindgenComplex<f64>> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let z = a[(i, j)];
            buf.push(__BindgenComplex { re: z.re, im: z.im });
        }
    }

    let jobvs = b'V' as c_char;
    let sort = b'S' as c_char;
    let nn = n as c_int;
    let mut sdim: c_int = 0;
    let mut w = vec![__BindgenComplex { re: 0.0, im: 0.0 }; n];
    let mut vs = vec![__BindgenComplex { re: 0.0, im: 0.0 }; n * n];
    let mut rwork = vec![0.0f64; n];
    let mut bwork = vec![0 as c_int; n];
    let mut info: c_int = 0;

    let select = Some(match half_plane {
        HalfPlane::LowerImag => select_lower as unsafe extern "C" fn(_) -> c_int,
        HalfPlane::UpperImag => select_upper as unsafe extern "C" fn(_) -> c_int,
    });

    // Workspace query, then the real call.
    let mut work_query = [__BindgenComplex { re: 0.0, im: 0.0 }];
    let lwork_query: c_int = -1;
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            select,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            &mut sdim,
            w.as_mut_ptr(),
            vs.as_mut_ptr(),
            &nn,
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Backend(format!(
            "zgees workspace query failed (info = {info})"
        )));
    }
    let lwork = work_query[0].re as c_int;
    let mut work = vec![__BindgenComplex { re: 0.0, im: 0.0 }; lwork.max(1) as usize];
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            select,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            &mut sdim,
            w.as_mut_ptr(),
            vs.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Backend(format!("zgees failed (info = {info})")));
    }

    let mut vectors = CMatrix::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            let z = vs[i + j * n];
            vectors[(i, j)] = c64::new(z.re, z.im);
        }
    }
    let eigenvalues = w.iter().map(|z| c64::new(z.re, z.im)).collect();
    Ok(OrderedSchur {
        vectors,
        eigenvalues,
        selected: sdim as usize,
    })
}
