//! Dense complex linear algebra for small bipartite systems.
//!
//! Matrices are stored row-major. Bipartite indices follow the `A ⊗ B`
//! convention: the composite index of `(i_a, i_b)` is `i_a * d_b + i_b`, so
//! Alice's index is the slow one.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance used when validating states.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Components with modulus below this do not count as "first nonzero" when
/// fixing eigenvector phases.
const PHASE_THRESHOLD: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// One of the two parties holding a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => write!(f, "A"),
            Party::B => write!(f, "B"),
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(CMatrix {
            rows: n_rows,
            cols: n_cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = CMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Projector `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        CMatrix::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols.max(1)).map(<[C64]>::to_vec).collect()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// `tr(M²)` real part; the purity for density matrices.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] * self[(j, i)]).re;
            }
        }
        acc
    }

    pub(crate) fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r2, c2) = (other.rows, other.cols);
        CMatrix::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// `K M K†`.
    pub(crate) fn sandwich(&self, m: &CMatrix) -> CMatrix {
        &(self * m) * &self.adjoint()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨u, v⟩`, conjugate-linear in the first argument.
pub(crate) fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<C64>>,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj() * *lambda;
                }
            }
        }
        m
    }

    /// Index ranges of eigenvalue clusters whose consecutive gaps are below
    /// [`DEGENERACY_GAP`].
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.dim() {
            if i == self.dim() || self.eigenvalues[i] - self.eigenvalues[i - 1] >= DEGENERACY_GAP {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn is_degenerate(&self) -> bool {
        self.clusters().iter().any(|r| r.len() > 1)
    }
}

/// Cyclic complex Jacobi diagonalization. Returns the diagonal (unsorted)
/// and, if requested, the accumulated unitary as columns.
fn jacobi(m: &CMatrix, want_vectors: bool) -> (Vec<f64>, Option<CMatrix>) {
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = want_vectors.then(|| CMatrix::identity(n));
    let frob2: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= 1e-32 * frob2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let b_abs = b.norm();
                if b_abs == 0.0 || b_abs * b_abs <= 1e-40 * frob2 {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = b / b_abs;
                let e = phase.conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * b_abs);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;

                // A <- A R
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * e * sn;
                    a[(k, q)] = akp * sn + akq * e * cs;
                }
                // A <- R† A
                let ec = e.conj();
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * ec * sn;
                    a[(q, k)] = apk * sn + aqk * ec * cs;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * cs - vkq * e * sn;
                        v[(k, q)] = vkp * sn + vkq * e * cs;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn hermitian_eigenvalues(m: &CMatrix, tol: f64) -> Result<Vec<f64>> {
    check_hermitian(m, tol)?;
    let (mut vals, _) = jacobi(m, false);
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Full eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Within a degenerate cluster (consecutive
/// gaps below [`DEGENERACY_GAP`]) the basis is replaced by a canonical one:
/// the standard basis vectors are projected onto the cluster subspace in
/// index order and Gram-Schmidt orthonormalized. Every eigenvector then has
/// its first nonzero component made real and positive. The result depends
/// only on the matrix, not on rotation order inside the solver.
pub fn hermitian_eig(m: &CMatrix, tol: f64) -> Result<HermitianSpectrum> {
    check_hermitian(m, tol)?;
    let n = m.rows();
    let (vals, vecs) = jacobi(m, true);
    let vecs = vecs.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));

    let mut spectrum = HermitianSpectrum {
        eigenvalues: order.iter().map(|&i| vals[i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| (0..n).map(|k| vecs[(k, i)]).collect())
            .collect(),
    };

    for cluster in spectrum.clusters() {
        if cluster.len() > 1 {
            let basis = canonical_basis(&spectrum.eigenvectors[cluster.clone()], &[]);
            for (slot, v) in cluster.zip(basis) {
                spectrum.eigenvectors[slot] = v;
            }
        }
    }
    for v in &mut spectrum.eigenvectors {
        fix_phase(v);
    }
    Ok(spectrum)
}

/// Orthonormal basis of `span(vectors)` that starts with the `preferred`
/// vectors (assumed orthonormal and inside the span) and is completed by
/// projecting standard basis vectors in index order.
pub(crate) fn canonical_basis(vectors: &[Vec<C64>], preferred: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let m = vectors.len();
    let n = vectors.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<C64>> = preferred.iter().take(m).cloned().collect();
    for j in 0..n {
        if out.len() == m {
            break;
        }
        // P e_j = Σ_k v_k conj(v_k[j])
        let mut w = vec![C64::new(0.0, 0.0); n];
        for v in vectors {
            let coef = v[j].conj();
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += vi * coef;
            }
        }
        for _ in 0..2 {
            for u in &out {
                let proj = inner(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= ui * proj;
                }
            }
        }
        let nw = norm(&w);
        if nw > 1e-4 {
            out.push(w.into_iter().map(|z| z / nw).collect());
        }
    }
    if out.len() < m {
        // unreachable for orthonormal input; keep the solver basis
        return vectors.to_vec();
    }
    out
}

pub(crate) fn fix_phase(v: &mut [C64]) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > PHASE_THRESHOLD) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// A validated bipartite density operator on `C^{d_A} ⊗ C^{d_B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[C64], dim_a: usize, dim_b: usize) -> Result<Self> {
        if psi.len() != dim_a * dim_b || psi.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "state vector of length {} for dims ({dim_a}, {dim_b})",
                psi.len()
            )));
        }
        let nrm = norm(psi);
        if nrm < 1e-12 {
            return Err(Error::TraceDeviation(1.0));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / nrm).collect();
        Ok(DensityOperator {
            dim_a,
            dim_b,
            matrix: CMatrix::projector(&unit),
        })
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        DensityOperator {
            dim_a,
            dim_b,
            matrix: CMatrix::identity(n).scale_re(1.0 / n as f64),
        }
    }

    /// Wraps a matrix known to be a state up to rounding; Hermitizes it and
    /// rescales to unit trace.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix, dim_a: usize, dim_b: usize) -> Self {
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        let matrix = if tr > 0.0 && tr != 1.0 { h.scale_re(1.0 / tr) } else { h };
        DensityOperator {
            dim_a,
            dim_b,
            matrix,
        }
    }

    #[cfg(test)]
    pub(crate) fn product(rho_a: &CMatrix, rho_b: &CMatrix) -> Self {
        DensityOperator::from_matrix_unchecked(rho_a.kron(rho_b), rho_a.rows(), rho_b.rows())
    }

    pub fn partial_trace(&self, keep: Party) -> CMatrix {
        partial_trace(self, keep)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.purity()
    }
}

impl AsRef<CMatrix> for DensityOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.matrix
    }
}

impl AsRef<CMatrix> for CMatrix {
    fn as_ref(&self) -> &CMatrix {
        self
    }
}

/// Validates `matrix` as a density operator on `C^{dim_a} ⊗ C^{dim_b}`.
///
/// Eigenvalues in `[-tol, 0)` are clipped to zero and the result is
/// renormalized; anything more negative is rejected.
pub fn validate_density(
    matrix: CMatrix,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
) -> Result<DensityOperator> {
    let n = dim_a * dim_b;
    if n == 0 || !matrix.is_square() || matrix.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for dims ({dim_a}, {dim_b})",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let dev = matrix.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let tr = matrix.trace();
    let tr_dev = (tr - C64::new(1.0, 0.0)).norm();
    if tr_dev > tol {
        return Err(Error::TraceDeviation(tr_dev));
    }
    let spectrum = hermitian_eig(&matrix, tol)?;
    let min = spectrum.eigenvalues[0];
    if min < -tol {
        return Err(Error::NegativeEigenvalue(min));
    }
    let matrix = if min < 0.0 {
        let clipped = HermitianSpectrum {
            eigenvalues: spectrum.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            eigenvectors: spectrum.eigenvectors,
        };
        clipped.reconstruct()
    } else {
        matrix
    };
    Ok(DensityOperator::from_matrix_unchecked(matrix, dim_a, dim_b))
}

/// Partial trace of an arbitrary `(d_A d_B)`-square matrix.
pub(crate) fn partial_trace_matrix(m: &CMatrix, dim_a: usize, dim_b: usize, keep: Party) -> CMatrix {
    match keep {
        Party::A => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Party::B => CMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    }
}

/// Reduced state of the party `keep`, tracing out the other one.
pub fn partial_trace(rho: &DensityOperator, keep: Party) -> CMatrix {
    partial_trace_matrix(&rho.matrix, rho.dim_a, rho.dim_b, keep)
}

/// Transposes the indices of `party` only.
pub fn partial_transpose(rho: &DensityOperator, party: Party) -> CMatrix {
    partial_transpose_matrix(&rho.matrix, rho.dim_a, rho.dim_b, party)
}

/// Partial transpose of an arbitrary `(d_A d_B)`-square matrix.
pub fn partial_transpose_matrix(m: &CMatrix, dim_a: usize, dim_b: usize, party: Party) -> CMatrix {
    let db = dim_b;
    CMatrix::from_fn(dim_a * db, dim_a * db, |r, s| {
        let (ia, ib) = (r / db, r % db);
        let (ja, jb) = (s / db, s % db);
        match party {
            Party::A => m[(ja * db + ib, ia * db + jb)],
            Party::B => m[(ia * db + jb, ja * db + ib)],
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn phi_plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], 2, 2).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        g.hermitian_part()
    }

    #[test]
    fn validates_maximally_mixed_qubit() {
        let m = CMatrix::from_diagonal(&[0.5, 0.5]);
        let rho = validate_density(m, 2, 1, 1e-9).unwrap();
        assert_eq!(rho.dims(), (2, 1));
    }

    #[test]
    fn rejects_bad_trace() {
        let m = CMatrix::from_diagonal(&[0.25, 0.25]);
        assert!(matches!(validate_density(m, 2, 1, 1e-9), Err(Error::TraceDeviation(_))));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::from_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(validate_density(m, 2, 1, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let m = CMatrix::from_diagonal(&[0.5, 0.5]);
        assert!(matches!(validate_density(m, 2, 2, 1e-9), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn clips_small_negative_eigenvalue() {
        let m = CMatrix::from_diagonal(&[1.0 + 5e-10, -5e-10]);
        let rho = validate_density(m, 2, 1, 1e-9).unwrap();
        let vals = hermitian_eigenvalues(rho.matrix(), 1e-12).unwrap();
        assert!(vals[0] >= 0.0);
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-15);
        let bad = CMatrix::from_diagonal(&[1.1, -0.1]);
        assert!(matches!(validate_density(bad, 2, 1, 1e-9), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let rho = phi_plus();
        let half = CMatrix::from_diagonal(&[0.5, 0.5]);
        assert!(partial_trace(&rho, Party::A).max_abs_diff(&half) < 1e-15);
        assert!(partial_trace(&rho, Party::B).max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let rho_a = CMatrix::from_rows(&[vec![c(0.7, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.0)]])
            .unwrap();
        let rho_b = CMatrix::from_diagonal(&[0.2, 0.5, 0.3]);
        let rho = DensityOperator::product(&rho_a, &rho_b);
        assert!(partial_trace(&rho, Party::A).max_abs_diff(&rho_a) < 1e-15);
        assert!(partial_trace(&rho, Party::B).max_abs_diff(&rho_b) < 1e-15);
    }

    #[test]
    fn partial_trace_of_classical_correlation() {
        let m = CMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        let rho = validate_density(m, 2, 2, 1e-9).unwrap();
        let half = CMatrix::from_diagonal(&[0.5, 0.5]);
        assert!(partial_trace(&rho, Party::B).max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn eig_diagonal() {
        let s = hermitian_eig(&CMatrix::from_diagonal(&[0.9, 0.1]), 1e-9).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn eig_pauli_x() {
        let x = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let s = hermitian_eig(&x, 1e-9).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // phase convention: first component real positive
        assert_abs_diff_eq!(s.eigenvectors[0][0].re, h, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvectors[0][1].re, -h, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvectors[1][1].re, h, epsilon = 1e-14);
    }

    #[test]
    fn eig_degenerate_uses_canonical_basis() {
        let s = hermitian_eig(&CMatrix::from_diagonal(&[0.5, 0.5]), 1e-9).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.5]);
        assert!(s.is_degenerate());
        assert_eq!(s.eigenvectors[0], vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(s.eigenvectors[1], vec![c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn eig_degenerate_cluster_is_independent_of_input_rotation() {
        // same projector written in two bases must give the same eigenvectors
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 4);
        let base = hermitian_eig(&h, 1e-9).unwrap();
        let mut vals = base.eigenvalues.clone();
        vals[1] = vals[0];
        let degenerate = HermitianSpectrum {
            eigenvalues: vals,
            eigenvectors: base.eigenvectors.clone(),
        }
        .reconstruct();
        let s1 = hermitian_eig(&degenerate, 1e-9).unwrap();
        // rotate within the cluster before rebuilding
        let (u, v) = (&base.eigenvectors[0], &base.eigenvectors[1]);
        let (ct, st) = (0.3f64.cos(), 0.3f64.sin());
        let ph = C64::from_polar(1.0, 0.8);
        let u2: Vec<C64> = u.iter().zip(v).map(|(a, b)| a * ct + b * st * ph).collect();
        let v2: Vec<C64> = u.iter().zip(v).map(|(a, b)| -a * st * ph.conj() + b * ct).collect();
        let mut vecs = base.eigenvectors.clone();
        vecs[0] = u2;
        vecs[1] = v2;
        let rotated = HermitianSpectrum {
            eigenvalues: s1.eigenvalues.clone(),
            eigenvectors: vecs,
        }
        .reconstruct();
        let s2 = hermitian_eig(&rotated, 1e-9).unwrap();
        for (a, b) in s1.eigenvectors.iter().zip(&s2.eigenvectors) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..1000 {
            let n = 2 + trial % 7;
            let h = random_hermitian(&mut rng, n);
            let s = hermitian_eig(&h, 1e-9).unwrap();
            assert!(s.reconstruct().max_abs_diff(&h) <= 1e-9);
            for i in 0..n {
                for j in 0..n {
                    let d = inner(&s.eigenvectors[i], &s.eigenvectors[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d - c(expect, 0.0)).norm() <= 1e-9);
                }
            }
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(hermitian_eig(&m, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn partial_transpose_of_bell_state_has_negative_eigenvalue() {
        let pt = partial_transpose(&phi_plus(), Party::B);
        let vals = hermitian_eigenvalues(&pt, 1e-9).unwrap();
        assert_abs_diff_eq!(vals[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_and_diagonal_states() {
        let rho_a = CMatrix::from_rows(&[vec![c(0.6, 0.0), c(0.2, 0.1)], vec![c(0.2, -0.1), c(0.4, 0.0)]])
            .unwrap();
        let rho_b = CMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.0, 0.3)], vec![c(0.0, -0.3), c(0.5, 0.0)]])
            .unwrap();
        let prod = DensityOperator::product(&rho_a, &rho_b);
        let vals = hermitian_eigenvalues(&partial_transpose(&prod, Party::B), 1e-9).unwrap();
        assert!(vals[0] >= -1e-12);

        let diag = validate_density(CMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]), 2, 2, 1e-9).unwrap();
        assert_eq!(&partial_transpose(&diag, Party::B), diag.matrix());
        assert_eq!(&partial_transpose(&diag, Party::A), diag.matrix());
    }
}
