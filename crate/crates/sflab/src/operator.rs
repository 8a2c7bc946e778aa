//! Hermitian operator containers with eigenvalue counting.
//!
//! The counting-function spectral flow needs one primitive: the number of
//! eigenvalues below a level. Three storage layouts are supported:
//!
//! - `Dense` — small matrices, eigenvalues computed eagerly;
//! - `BlockDiag` — mode-decoupled discretizations, eigenvalues per block;
//! - `Bordered` — per-mode block-tridiagonal chains coupled only through a
//!   shared border block (mode-mixing boundary conditions). Counting uses
//!   Haynsworth inertia additivity: the chain pivots of a block-LDL sweep
//!   plus the inertia of the border Schur complement.
//!
//! Chains store variable block sizes, so a mode-local boundary reduction can
//! sit at the end of its own chain while only the genuinely mode-coupling
//! constraint goes into the border.

use crate::linalg::{adjoint, block_diag, eigh, hermitize, op_norm, CMatrix};
use num_complex::Complex64 as c64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("LDL pivot numerically singular at level {level:.6e} (block {block})")]
    PivotBreakdown { level: f64, block: usize },
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// Hermitian block-tridiagonal chain with variable block sizes.
#[derive(Debug, Clone)]
pub struct ChainOp {
    /// Diagonal blocks, Hermitian.
    pub diag: Vec<CMatrix>,
    /// upper[j] couples block j (rows) to block j+1 (columns).
    pub upper: Vec<CMatrix>,
}

impl ChainOp {
    pub fn dim(&self) -> usize {
        self.diag.iter().map(|d| d.nrows()).sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros((n, n));
        let mut offsets = Vec::with_capacity(self.diag.len() + 1);
        let mut acc = 0;
        for d in &self.diag {
            offsets.push(acc);
            acc += d.nrows();
        }
        offsets.push(acc);
        for (j, d) in self.diag.iter().enumerate() {
            let o = offsets[j];
            out.slice_mut(ndarray::s![o..o + d.nrows(), o..o + d.nrows()])
                .assign(d);
        }
        for (j, u) in self.upper.iter().enumerate() {
            let (r, cdim) = u.dim();
            let (o, p) = (offsets[j], offsets[j + 1]);
            out.slice_mut(ndarray::s![o..o + r, p..p + cdim]).assign(u);
            out.slice_mut(ndarray::s![p..p + cdim, o..o + r])
                .assign(&adjoint(u));
        }
        out
    }
}

/// Factorization data of one chain shifted by a level c. Pivots are small
/// and kept pre-inverted so the triangular solves are plain multiplies.
struct ChainFactor {
    pivot_inv: Vec<CMatrix>,
    /// negatives among all pivot eigenvalues
    negatives: usize,
}

/// Forward block-LDL sweep of (chain − c). Errors out on a near-singular
/// pivot so the caller can jitter the level inside its verified gap.
fn factor_chain(chain: &ChainOp, c: f64, pivot_tol: f64) -> Result<ChainFactor> {
    let m = chain.diag.len();
    let mut pivot_inv: Vec<CMatrix> = Vec::with_capacity(m);
    let mut negatives = 0;
    for j in 0..m {
        let mut d = chain.diag[j].clone();
        for i in 0..d.nrows() {
            d[(i, i)] -= c64::new(c, 0.0);
        }
        if j > 0 {
            let u = &chain.upper[j - 1];
            // D̃_j = d_j − U* D̃_{j−1}⁻¹ U
            d = d - adjoint(u).dot(&pivot_inv[j - 1]).dot(u);
        }
        let d = hermitize(&d);
        let (vals, vecs) = eigh(&d);
        let mut inv = CMatrix::zeros(d.dim());
        for (i, v) in vals.iter().enumerate() {
            if v.abs() < pivot_tol {
                return Err(OperatorError::PivotBreakdown { level: c, block: j });
            }
            if *v < 0.0 {
                negatives += 1;
            }
            let col = vecs.column(i);
            let w = c64::new(1.0 / v, 0.0);
            for a in 0..d.nrows() {
                for b in 0..d.nrows() {
                    inv[(a, b)] += col[a] * w * col[b].conj();
                }
            }
        }
        pivot_inv.push(inv);
    }
    Ok(ChainFactor {
        pivot_inv,
        negatives,
    })
}

impl ChainFactor {
    /// Solve (chain − c) X = B given the forward factors; B is dense over the
    /// chain rows.
    fn solve(&self, chain: &ChainOp, b: &CMatrix) -> Result<CMatrix> {
        let m = chain.diag.len();
        let mut offsets = Vec::with_capacity(m + 1);
        let mut acc = 0;
        for d in &chain.diag {
            offsets.push(acc);
            acc += d.nrows();
        }
        offsets.push(acc);
        let ncols = b.ncols();
        // forward: y_j = b_j − U_{j−1}* D̃_{j−1}⁻¹ y_{j−1}
        let mut y: Vec<CMatrix> = Vec::with_capacity(m);
        for j in 0..m {
            let bj = b
                .slice(ndarray::s![offsets[j]..offsets[j + 1], ..])
                .to_owned();
            let yj = if j == 0 {
                bj
            } else {
                let u = &chain.upper[j - 1];
                bj - adjoint(u).dot(&self.pivot_inv[j - 1].dot(&y[j - 1]))
            };
            y.push(yj);
        }
        // backward: x_m = D̃_m⁻¹ y_m; x_j = D̃_j⁻¹ (y_j − U_j x_{j+1})
        let mut x = vec![CMatrix::zeros((0, ncols)); m];
        for j in (0..m).rev() {
            let rhs = if j + 1 < m {
                &y[j] - &chain.upper[j].dot(&x[j + 1])
            } else {
                y[j].clone()
            };
            x[j] = self.pivot_inv[j].dot(&rhs);
        }
        let mut out = CMatrix::zeros((offsets[m], ncols));
        for j in 0..m {
            out.slice_mut(ndarray::s![offsets[j]..offsets[j + 1], ..])
                .assign(&x[j]);
        }
        Ok(out)
    }
}

/// Chain-to-border coupling stored as its nonzero row blocks:
/// (row offset within the chain, dense rows × border_dim block).
pub type CouplerBlocks = Vec<(usize, CMatrix)>;

/// Per-mode chains coupled through one shared Hermitian border block.
#[derive(Debug, Clone)]
pub struct BorderedOp {
    pub chains: Vec<ChainOp>,
    /// couplers[m]: nonzero row blocks of the (chain_m dim) × (border dim)
    /// coupling matrix.
    pub couplers: Vec<CouplerBlocks>,
    pub border: CMatrix,
}

impl BorderedOp {
    pub fn dim(&self) -> usize {
        self.chains.iter().map(|c| c.dim()).sum::<usize>() + self.border.nrows()
    }

    fn coupler_dense(&self, m: usize) -> CMatrix {
        let d = self.chains[m].dim();
        let nb = self.border.nrows();
        let mut k = CMatrix::zeros((d, nb));
        for (off, block) in &self.couplers[m] {
            k.slice_mut(ndarray::s![*off..off + block.nrows(), ..])
                .assign(block);
        }
        k
    }

    pub fn to_dense(&self) -> CMatrix {
        let nb = self.border.nrows();
        let n = self.dim();
        let mut out = CMatrix::zeros((n, n));
        let mut o = 0;
        for (m, chain) in self.chains.iter().enumerate() {
            let d = chain.dim();
            out.slice_mut(ndarray::s![o..o + d, o..o + d])
                .assign(&chain.to_dense());
            let k = self.coupler_dense(m);
            out.slice_mut(ndarray::s![o..o + d, n - nb..]).assign(&k);
            out.slice_mut(ndarray::s![n - nb.., o..o + d])
                .assign(&adjoint(&k));
            o += d;
        }
        out.slice_mut(ndarray::s![n - nb.., n - nb..])
            .assign(&self.border);
        out
    }
}

/// A Hermitian operator in one of the supported layouts.
#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Dense { mat: CMatrix, eigs: Vec<f64> },
    BlockDiag { blocks: Vec<CMatrix>, eigs: Vec<f64> },
    Bordered(BorderedOp),
}

impl OperatorMatrix {
    pub fn dense(mat: CMatrix) -> Self {
        let m = hermitize(&mat);
        let (vals, _) = eigh(&m);
        OperatorMatrix::Dense {
            mat: m,
            eigs: vals.to_vec(),
        }
    }

    pub fn block_diag(blocks: Vec<CMatrix>) -> Self {
        let blocks: Vec<CMatrix> = blocks.iter().map(hermitize).collect();
        let mut eigs: Vec<f64> = Vec::new();
        for b in &blocks {
            let (vals, _) = eigh(b);
            eigs.extend(vals.iter().cloned());
        }
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        OperatorMatrix::BlockDiag { blocks, eigs }
    }

    pub fn bordered(op: BorderedOp) -> Self {
        OperatorMatrix::Bordered(op)
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorMatrix::Dense { mat, .. } => mat.nrows(),
            OperatorMatrix::BlockDiag { blocks, .. } => {
                blocks.iter().map(|b| b.nrows()).sum()
            }
            OperatorMatrix::Bordered(b) => b.dim(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            OperatorMatrix::Dense { mat, .. } => mat.clone(),
            OperatorMatrix::BlockDiag { blocks, .. } => {
                let refs: Vec<&CMatrix> = blocks.iter().collect();
                block_diag(&refs)
            }
            OperatorMatrix::Bordered(b) => b.to_dense(),
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let bound_of = |m: &CMatrix| -> f64 {
            let mut best: f64 = 0.0;
            for i in 0..m.nrows() {
                let mut row = 0.0;
                for j in 0..m.ncols() {
                    row += m[(i, j)].norm();
                }
                best = best.max(row);
            }
            best
        };
        match self {
            OperatorMatrix::Dense { mat, .. } => bound_of(mat),
            OperatorMatrix::BlockDiag { blocks, .. } => blocks
                .iter()
                .map(bound_of)
                .fold(0.0, f64::max),
            OperatorMatrix::Bordered(_) => bound_of(&self.to_dense_rows_bound()),
        }
    }

    // Row-sum bound for the bordered layout without materializing the matrix.
    fn to_dense_rows_bound(&self) -> CMatrix {
        if let OperatorMatrix::Bordered(b) = self {
            // one-row matrix of row sums is enough for the Gershgorin max
            let n = b.dim();
            let nb = b.border.nrows();
            let mut sums = vec![0.0f64; n];
            let mut o = 0;
            for (m, chain) in b.chains.iter().enumerate() {
                let dense = chain.to_dense();
                for i in 0..dense.nrows() {
                    for j in 0..dense.ncols() {
                        sums[o + i] += dense[(i, j)].norm();
                    }
                }
                for (off, block) in &b.couplers[m] {
                    for i in 0..block.nrows() {
                        for j in 0..nb {
                            sums[o + off + i] += block[(i, j)].norm();
                            sums[n - nb + j] += block[(i, j)].norm();
                        }
                    }
                }
                o += dense.nrows();
            }
            for i in 0..nb {
                for j in 0..nb {
                    sums[n - nb + i] += b.border[(i, j)].norm();
                }
            }
            let mx = sums.iter().cloned().fold(0.0, f64::max);
            let mut m = CMatrix::zeros((1, 1));
            m[(0, 0)] = c64::new(mx, 0.0);
            m
        } else {
            unreachable!()
        }
    }

    /// Number of eigenvalues strictly below `c`.
    pub fn count_below(&self, c: f64) -> Result<usize> {
        match self {
            OperatorMatrix::Dense { eigs, .. } | OperatorMatrix::BlockDiag { eigs, .. } => {
                Ok(eigs.partition_point(|&v| v < c))
            }
            OperatorMatrix::Bordered(b) => {
                let scale = self.spectral_bound().max(1.0);
                let pivot_tol = 1e-13 * scale;
                // jitter ladder stays well inside any verified δ-gap
                let jitters = [0.0, 1e-9, -1e-9, 7e-9, -7e-9, 3e-8, -3e-8];
                let mut last_err = None;
                for &dj in &jitters {
                    match count_below_bordered(b, c + dj * scale, pivot_tol) {
                        Ok(n) => return Ok(n),
                        Err(e) => last_err = Some(e),
                    }
                }
                Err(last_err.unwrap())
            }
        }
    }

    /// Number of eigenvalues in the half-open interval [lo, hi). Saturating:
    /// level jitter around a pivot breakdown can make two very close counts
    /// momentarily inconsistent by one, and a negative difference must not
    /// wrap.
    pub fn count_in(&self, lo: f64, hi: f64) -> Result<usize> {
        Ok(self.count_below(hi)?.saturating_sub(self.count_below(lo)?))
    }

    /// All eigenvalues when the layout stores them.
    pub fn cached_eigenvalues(&self) -> Option<&[f64]> {
        match self {
            OperatorMatrix::Dense { eigs, .. } | OperatorMatrix::BlockDiag { eigs, .. } => {
                Some(eigs)
            }
            OperatorMatrix::Bordered(_) => None,
        }
    }

    /// Eigenvalues inside (lo, hi), each located to ± resolution. Uses the
    /// cache when available and interval bisection otherwise. `hints` from a
    /// nearby operator cut the bisection cost sharply.
    pub fn eigenvalues_in(
        &self,
        lo: f64,
        hi: f64,
        resolution: f64,
        hints: &[f64],
    ) -> Result<Vec<f64>> {
        if let Some(eigs) = self.cached_eigenvalues() {
            return Ok(eigs
                .iter()
                .cloned()
                .filter(|&v| v > lo && v < hi)
                .collect());
        }
        let mut found: Vec<f64> = Vec::new();
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        // carve the window along hint neighborhoods
        let mut cuts: Vec<f64> = vec![lo];
        let pad = (resolution * 8.0).max(1e-9);
        let mut hs: Vec<f64> = hints.iter().cloned().filter(|&h| h > lo && h < hi).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &h in &hs {
            let a = (h - pad).max(lo);
            let b = (h + pad).min(hi);
            if a > *cuts.last().unwrap() {
                intervals.push((*cuts.last().unwrap(), a));
            }
            intervals.push((a.max(*cuts.last().unwrap()), b));
            cuts.push(b);
        }
        if *cuts.last().unwrap() < hi {
            intervals.push((*cuts.last().unwrap(), hi));
        }
        for (a, b) in intervals {
            if b <= a {
                continue;
            }
            self.scan_interval(a, b, resolution, 0, &mut found)?;
        }
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(found)
    }

    fn scan_interval(
        &self,
        lo: f64,
        hi: f64,
        resolution: f64,
        depth: usize,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let n = self.count_in(lo, hi)?.min(self.dim());
        if n == 0 {
            return Ok(());
        }
        if hi - lo <= resolution || depth > 60 {
            let mid = 0.5 * (lo + hi);
            for _ in 0..n {
                out.push(mid);
            }
            return Ok(());
        }
        let mid = 0.5 * (lo + hi);
        self.scan_interval(lo, mid, resolution, depth + 1, out)?;
        self.scan_interval(mid, hi, resolution, depth + 1, out)
    }

    /// Smallest |eigenvalue|, to the requested resolution.
    pub fn min_abs_eigenvalue(&self, resolution: f64) -> Result<f64> {
        if let Some(eigs) = self.cached_eigenvalues() {
            return Ok(eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
        }
        let bound = self.spectral_bound();
        let mut r = resolution.max(1e-12);
        // expand a symmetric window until it contains an eigenvalue
        let mut w = r * 4.0;
        while w < 2.0 * bound {
            if self.count_in(-w, w)? > 0 {
                // bisect on the window half-width
                let (mut a, mut b) = (0.0f64, w);
                while b - a > r {
                    let m = 0.5 * (a + b);
                    if self.count_in(-m, m)? > 0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            w *= 2.0;
            r *= 1.0;
        }
        Ok(f64::INFINITY)
    }

    /// ‖A − B‖ in a layout-aware norm: exact dense norm for dense layouts,
    /// piecewise maxima for matching structured layouts (an upper-bounding
    /// proxy adequate for identity checks).
    pub fn defect_norm(&self, other: &OperatorMatrix) -> f64 {
        match (self, other) {
            (
                OperatorMatrix::BlockDiag { blocks: a, .. },
                OperatorMatrix::BlockDiag { blocks: b, .. },
            ) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| op_norm(&(x - y)))
                .fold(0.0, f64::max),
            (OperatorMatrix::Bordered(a), OperatorMatrix::Bordered(b))
                if a.chains.len() == b.chains.len() =>
            {
                let mut d = op_norm(&(&a.border - &b.border));
                for (ca, cb) in a.chains.iter().zip(&b.chains) {
                    for (x, y) in ca.diag.iter().zip(&cb.diag) {
                        d = d.max(op_norm(&(x - y)));
                    }
                    for (x, y) in ca.upper.iter().zip(&cb.upper) {
                        d = d.max(op_norm(&(x - y)));
                    }
                }
                for (m, (x, y)) in a.couplers.iter().zip(&b.couplers).enumerate() {
                    if x.len() == y.len()
                        && x.iter().zip(y).all(|((o1, _), (o2, _))| o1 == o2)
                    {
                        for ((_, bx), (_, by)) in x.iter().zip(y) {
                            d = d.max(op_norm(&(bx - by)));
                        }
                    } else {
                        d = d.max(op_norm(&(&a.coupler_dense(m) - &b.coupler_dense(m))));
                    }
                }
                d
            }
            _ => op_norm(&(self.to_dense() - other.to_dense())),
        }
    }
}

fn count_below_bordered(b: &BorderedOp, c: f64, pivot_tol: f64) -> Result<usize> {
    let nb = b.border.nrows();
    let mut total = 0usize;
    let mut schur = b.border.clone();
    for i in 0..nb {
        schur[(i, i)] -= c64::new(c, 0.0);
    }
    for (m, chain) in b.chains.iter().enumerate() {
        let f = factor_chain(chain, c, pivot_tol)?;
        total += f.negatives;
        if nb > 0 && !b.couplers[m].is_empty() {
            let k = b.coupler_dense(m);
            let x = f.solve(chain, &k)?;
            schur = schur - adjoint(&k).dot(&x);
        }
    }
    if nb > 0 {
        let (vals, _) = eigh(&hermitize(&schur));
        for v in vals.iter() {
            if v.abs() < pivot_tol {
                return Err(OperatorError::PivotBreakdown {
                    level: c,
                    block: usize::MAX,
                });
            }
            if *v < 0.0 {
                total += 1;
            }
        }
    }
    Ok(total)
}

/// Pointwise direct sum of operators (block structure is concatenated; a
/// block-diagonal summand joins a bordered one as extra uncoupled chains).
pub fn op_direct_sum(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let as_bordered = |op: &OperatorMatrix| -> Option<BorderedOp> {
        match op {
            OperatorMatrix::Bordered(p) => Some(p.clone()),
            OperatorMatrix::BlockDiag { blocks, .. } => Some(BorderedOp {
                chains: blocks
                    .iter()
                    .map(|m| ChainOp {
                        diag: vec![m.clone()],
                        upper: vec![],
                    })
                    .collect(),
                couplers: blocks.iter().map(|_| Vec::new()).collect(),
                border: CMatrix::zeros((0, 0)),
            }),
            OperatorMatrix::Dense { .. } => None,
        }
    };
    // widen a coupler block list to a larger border, placing the original
    // columns at `col_off`
    let widen = |blocks: &CouplerBlocks, col_off: usize, total: usize| -> CouplerBlocks {
        blocks
            .iter()
            .map(|(off, block)| {
                let mut w = CMatrix::zeros((block.nrows(), total));
                w.slice_mut(ndarray::s![.., col_off..col_off + block.ncols()])
                    .assign(block);
                (*off, w)
            })
            .collect()
    };
    match (a, b) {
        (
            OperatorMatrix::BlockDiag { blocks: b1, .. },
            OperatorMatrix::BlockDiag { blocks: b2, .. },
        ) => {
            let mut blocks = b1.clone();
            blocks.extend(b2.iter().cloned());
            OperatorMatrix::block_diag(blocks)
        }
        (OperatorMatrix::Bordered(_), _) | (_, OperatorMatrix::Bordered(_)) => {
            let pa = as_bordered(a);
            let pb = as_bordered(b);
            match (pa, pb) {
                (Some(pa), Some(pb)) => {
                    let (na, nb) = (pa.border.nrows(), pb.border.nrows());
                    let mut chains = pa.chains;
                    let mut couplers: Vec<CouplerBlocks> = pa
                        .couplers
                        .iter()
                        .map(|k| widen(k, 0, na + nb))
                        .collect();
                    chains.extend(pb.chains);
                    couplers.extend(pb.couplers.iter().map(|k| widen(k, na, na + nb)));
                    let border = block_diag(&[&pa.border, &pb.border]);
                    OperatorMatrix::bordered(BorderedOp {
                        chains,
                        couplers,
                        border,
                    })
                }
                _ => OperatorMatrix::dense(block_diag(&[&a.to_dense(), &b.to_dense()])),
            }
        }
        _ => OperatorMatrix::dense(block_diag(&[&a.to_dense(), &b.to_dense()])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_counting_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 12);
        let op = OperatorMatrix::dense(h.clone());
        let (vals, _) = eigh(&h);
        for &c in &[-2.0, -0.5, 0.0, 0.3, 1.7] {
            let oracle = vals.iter().filter(|&&v| v < c).count();
            assert_eq!(op.count_below(c).unwrap(), oracle);
        }
    }

    #[test]
    fn bordered_counting_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // two chains with mixed block sizes plus a border
        let mk_chain = |rng: &mut ChaCha8Rng, sizes: &[usize]| -> ChainOp {
            let diag = sizes.iter().map(|&s| random_hermitian(rng, s)).collect();
            let upper = sizes
                .windows(2)
                .map(|w| random_matrix(rng, w[0], w[1]).mapv(|z| z * 0.5))
                .collect();
            ChainOp { diag, upper }
        };
        for trial in 0..8 {
            let chain1 = mk_chain(&mut rng, &[3, 3, 3, 2]);
            let chain2 = mk_chain(&mut rng, &[2, 2, 2]);
            let nb = 3;
            let k1 = vec![(0usize, random_matrix(&mut rng, 3, nb).mapv(|z| z * 0.4))];
            let k2 = vec![(4usize, random_matrix(&mut rng, 2, nb).mapv(|z| z * 0.4))];
            let border = random_hermitian(&mut rng, nb);
            let bop = BorderedOp {
                chains: vec![chain1, chain2],
                couplers: vec![k1, k2],
                border,
            };
            let op = OperatorMatrix::bordered(bop);
            let oracle = OperatorMatrix::dense(op.to_dense());
            for &c in &[-1.5, -0.2, 0.0, 0.4, 1.1, 2.5] {
                assert_eq!(
                    op.count_below(c).unwrap(),
                    oracle.count_below(c).unwrap(),
                    "trial {trial} level {c}"
                );
            }
        }
    }

    #[test]
    fn windowed_eigenvalue_scan_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let chain = ChainOp {
            diag: (0..5).map(|_| random_hermitian(&mut rng, 2)).collect(),
            upper: (0..4)
                .map(|_| random_matrix(&mut rng, 2, 2).mapv(|z| z * 0.4))
                .collect(),
        };
        let bop = BorderedOp {
            chains: vec![chain],
            couplers: vec![Vec::new()],
            border: CMatrix::zeros((0, 0)),
        };
        let op = OperatorMatrix::bordered(bop);
        let dense = OperatorMatrix::dense(op.to_dense());
        let oracle: Vec<f64> = dense
            .cached_eigenvalues()
            .unwrap()
            .iter()
            .cloned()
            .filter(|&v| v.abs() < 1.0)
            .collect();
        let got = op.eigenvalues_in(-1.0, 1.0, 1e-7, &[]).unwrap();
        assert_eq!(got.len(), oracle.len());
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-6);
        }
        // hinted scan agrees as well
        let hinted = op.eigenvalues_in(-1.0, 1.0, 1e-7, &oracle).unwrap();
        assert_eq!(hinted.len(), oracle.len());
        // min |eig|
        let min_abs = op.min_abs_eigenvalue(1e-9).unwrap();
        let oracle_min = dense
            .cached_eigenvalues()
            .unwrap()
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min);
        assert!((min_abs - oracle_min).abs() < 1e-6);
    }
}
