//! Small dense matrix kernel.
//!
//! Everything here works on row-major `Vec<f64>` storage and is sized for
//! the matrix dimensions that show up in the processes (p <= 10). The
//! symmetric eigensolver is cyclic Jacobi, which is exact for p = 1, does a
//! single rotation for p = 2 and converges quadratically otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FwisError, Result};

const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense `rows x cols` matrix. Serialized as a list of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for RectMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RectMatrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for RectMatrix {
    type Error = FwisError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        RectMatrix::from_rows(&rows)
    }
}

impl From<RectMatrix> for Vec<Vec<f64>> {
    fn from(m: RectMatrix) -> Self {
        m.to_rows()
    }
}

impl RectMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FwisError::contract("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(FwisError::contract(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(FwisError::contract("ragged matrix rows"));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &RectMatrix) -> Result<RectMatrix> {
        if self.cols != other.rows {
            return Err(FwisError::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RectMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `A'A`, symmetric by construction.
    pub fn gram(&self) -> SymMatrix {
        let p = self.cols;
        SymMatrix::from_fn(p, |i, j| {
            (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum()
        })
    }

    pub fn add(&self, other: &RectMatrix) -> Result<RectMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RectMatrix) -> Result<RectMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &RectMatrix, f: impl Fn(f64, f64) -> f64) -> Result<RectMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FwisError::contract("matrix shapes differ"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(RectMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> RectMatrix {
        RectMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self.get(i, j) == 0.0))
    }
}

/// Real symmetric `p x p` matrix. Entry `(i, j)` and `(j, i)` are the same
/// `f64` bit pattern; every constructor enforces that.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix {}x{} ", self.dim, self.dim)?;
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = FwisError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = *d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Exact symmetry is required; use [`SymMatrix::symmetrize`] for
    /// approximately symmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rect = RectMatrix::from_rows(rows)?;
        Self::try_from_rect(&rect)
    }

    pub fn try_from_rect(m: &RectMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(FwisError::contract(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m.get(i, j) != m.get(j, i) {
                    return Err(FwisError::contract(format!(
                        "matrix is not symmetric at ({i}, {j}): {} vs {}",
                        m.get(i, j),
                        m.get(j, i)
                    )));
                }
            }
        }
        Ok(Self {
            dim: m.rows,
            data: m.data.clone(),
        })
    }

    /// `(A + A') / 2`.
    pub fn symmetrize(m: &RectMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(FwisError::contract("symmetrize needs a square matrix"));
        }
        Ok(Self::from_fn(m.rows, |i, j| 0.5 * (m.get(i, j) + m.get(j, i))))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn to_rect(&self) -> RectMatrix {
        RectMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matmul(&self, other: &SymMatrix) -> Result<RectMatrix> {
        self.check_dim(other)?;
        self.to_rect().matmul(&other.to_rect())
    }

    /// `Tr(A B)` for symmetric `A`, `B`, without forming the product.
    pub fn trace_product(&self, other: &SymMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(FwisError::contract(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue.
    pub fn min_eig(&self) -> Result<f64> {
        let eig = sym_eigen(self)?;
        Ok(eig.min_value())
    }
}

/// Symmetric positive semidefinite matrix with its smallest eigenvalue cached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrix", into = "SymMatrix")]
pub struct PsdMatrix {
    base: SymMatrix,
    min_eig: f64,
}

impl PsdMatrix {
    /// Accepts `a` when its smallest eigenvalue is at least
    /// `-1e-12 * max(1, trace)`; tiny negative round-off is reported as 0.
    pub fn new(a: SymMatrix) -> Result<Self> {
        let min = a.min_eig()?;
        let tol = 1e-12 * a.trace().abs().max(1.0);
        if min < -tol || !min.is_finite() {
            return Err(FwisError::contract(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self {
            base: a,
            min_eig: min.max(0.0),
        })
    }

    /// Requires a strictly positive smallest eigenvalue.
    pub fn new_pd(a: SymMatrix) -> Result<Self> {
        let min = a.min_eig()?;
        if min <= 0.0 || !min.is_finite() {
            return Err(FwisError::contract(format!(
                "matrix is not positive definite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self {
            base: a,
            min_eig: min,
        })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            base: SymMatrix::identity(p),
            min_eig: 1.0,
        }
    }

    pub(crate) fn from_parts(base: SymMatrix, min_eig: f64) -> Self {
        Self { base, min_eig }
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn is_pd(&self) -> bool {
        self.min_eig > 0.0
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn into_sym(self) -> SymMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }
}

impl std::ops::Deref for PsdMatrix {
    type Target = SymMatrix;

    fn deref(&self) -> &SymMatrix {
        &self.base
    }
}

impl TryFrom<SymMatrix> for PsdMatrix {
    type Error = FwisError;

    fn try_from(a: SymMatrix) -> Result<Self> {
        PsdMatrix::new(a)
    }
}

impl From<PsdMatrix> for SymMatrix {
    fn from(m: PsdMatrix) -> Self {
        m.base
    }
}

/// Eigenpairs of a symmetric matrix; `vectors` holds eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: RectMatrix,
}

impl SymEigen {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `V diag(h(lambda)) V'`.
    pub fn reassemble(&self, h: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|l| h(*l)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * mapped[k] * self.vectors.get(j, k))
                .sum()
        })
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(a: &SymMatrix) -> Result<SymEigen> {
    let n = a.dim;
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(FwisError::numeric(format!("non-finite entry in {a:?}")));
    }
    let mut m = a.data.clone();
    let mut v = RectMatrix::identity(n);
    if n == 1 {
        return Ok(SymEigen {
            values: vec![m[0]],
            vectors: v,
        });
    }
    let scale = a.norm();
    if scale == 0.0 {
        return Ok(SymEigen {
            values: vec![0.0; n],
            vectors: v,
        });
    }
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok(SymEigen { values, vectors: v });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Err(FwisError::numeric(format!(
        "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps for {a:?}"
    )))
}

/// Principal square root of a PSD matrix; negative round-off eigenvalues are
/// clamped to zero.
pub fn sym_sqrt(a: &PsdMatrix) -> Result<PsdMatrix> {
    let eig = sym_eigen(a.as_sym())?;
    Ok(sqrt_from_eigen(&eig))
}

pub(crate) fn sqrt_from_eigen(eig: &SymEigen) -> PsdMatrix {
    let root = eig.reassemble(|l| l.max(0.0).sqrt());
    let min = eig.min_value().max(0.0).sqrt();
    PsdMatrix::from_parts(root, min)
}

/// Default eigenvalue floor: `1e-12 * trace(A) / p`, never negative.
pub fn default_floor(a: &SymMatrix) -> f64 {
    1e-12 * a.trace().max(0.0) / a.dim as f64
}

/// Output of [`psd_project`].
#[derive(Clone, Debug)]
pub struct Projection {
    pub matrix: PsdMatrix,
    pub clamped: bool,
    pub(crate) eigen: SymEigen,
}

/// Raises every eigenvalue below `floor` up to `floor`.
///
/// When nothing needs clamping the input is returned bit-for-bit.
pub fn psd_project(a: &SymMatrix, floor: f64) -> Result<Projection> {
    if !(floor >= 0.0) {
        return Err(FwisError::contract(format!("floor must be >= 0, got {floor}")));
    }
    let eig = sym_eigen(a)?;
    let min = eig.min_value();
    if min >= floor {
        return Ok(Projection {
            matrix: PsdMatrix::from_parts(a.clone(), min),
            clamped: false,
            eigen: eig,
        });
    }
    let values: Vec<f64> = eig.values.iter().map(|l| l.max(floor)).collect();
    let eigen = SymEigen {
        values,
        vectors: eig.vectors,
    };
    let matrix = eigen.reassemble(|l| l);
    Ok(Projection {
        matrix: PsdMatrix::from_parts(matrix, floor),
        clamped: true,
        eigen,
    })
}

/// Cholesky factor of a strictly positive definite matrix.
pub fn cholesky(a: &PsdMatrix) -> Result<RectMatrix> {
    cholesky_sym(a.as_sym())
}

/// Cholesky factor computed directly from a symmetric matrix. Fails with
/// [`FwisError::Cone`] naming the first non-positive pivot, which is how
/// positive definiteness of large covariance matrices is checked.
pub fn cholesky_sym(a: &SymMatrix) -> Result<RectMatrix> {
    let n = a.dim;
    let mut l = RectMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) {
            return Err(FwisError::Cone {
                minor: j + 1,
                pivot: d,
            });
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// `log det A` for positive definite `A`.
pub fn log_det_pd(a: &SymMatrix) -> Result<f64> {
    let l = cholesky_sym(a)?;
    Ok(2.0 * (0..a.dim).map(|i| l.get(i, i).ln()).sum::<f64>())
}

/// Solves `A X = B` for positive definite `A`.
pub fn solve_pd(a: &SymMatrix, b: &RectMatrix) -> Result<RectMatrix> {
    let n = a.dim;
    if b.rows != n {
        return Err(FwisError::contract("right-hand side has the wrong row count"));
    }
    let l = cholesky_sym(a)?;
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x.get(i, c);
            for k in 0..i {
                s -= l.get(i, k) * x.get(k, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
        for i in (0..n).rev() {
            let mut s = x.get(i, c);
            for k in (i + 1)..n {
                s -= l.get(k, i) * x.get(k, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
    }
    Ok(x)
}

/// Gaussian elimination with partial pivoting for a small dense square system.
pub fn solve_dense(a: &RectMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(FwisError::contract("solve_dense needs a square system"));
    }
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        let pivot = m[pivot_row * n + col];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(FwisError::numeric(format!("singular system at column {col}")));
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[i * n + k] * x[k]).sum();
        x[i] = (rhs[i] - s) / m[i * n + i];
    }
    Ok(x)
}

/// `exp(Tr(A))`.
pub fn etr(a: &SymMatrix) -> f64 {
    a.trace().exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, seed: u64) -> RectMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RectMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    fn resid(a: &RectMatrix, b: &SymMatrix) -> f64 {
        a.sub(&b.to_rect()).unwrap().norm()
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let r = sym_sqrt(&PsdMatrix::identity(3)).unwrap();
        assert_eq!(r.as_sym(), &SymMatrix::identity(3));
        let d = PsdMatrix::new(SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        let r = sym_sqrt(&d).unwrap();
        assert!((r.get(0, 0) - 2.0).abs() < 1e-15);
        assert!((r.get(1, 1) - 3.0).abs() < 1e-15);
        assert_eq!(r.get(0, 1), 0.0);
    }

    #[test]
    fn sqrt_of_rank_deficient_gram() {
        // 3x2 G gives a 2x2 Gram; use G G' (3x3, rank 2) for the singular case too.
        let g = gaussian(3, 2, 11);
        for a in [g.gram(), g.transpose().gram()] {
            let psd = PsdMatrix::new(a.clone()).unwrap();
            let r = sym_sqrt(&psd).unwrap();
            let rr = r.matmul(&r).unwrap();
            assert!(resid(&rr, &a) < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn non_symmetric_rows_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, FwisError::Contract(_)));
    }

    #[test]
    fn project_cases() {
        let a = SymMatrix::from_diag(&[1.0, 2.0]);
        let p = psd_project(&a, 0.0).unwrap();
        assert!(!p.clamped);
        assert_eq!(p.matrix.as_sym(), &a);

        let p = psd_project(&SymMatrix::from_diag(&[1.0, -0.5]), 0.0).unwrap();
        assert!(p.clamped);
        assert_eq!(p.matrix.as_sym(), &SymMatrix::from_diag(&[1.0, 0.0]));

        let p = psd_project(&SymMatrix::from_diag(&[1e-15, 1.0]), 1e-12).unwrap();
        assert!(p.clamped);
        assert!((p.matrix.get(0, 0) - 1e-12).abs() < 1e-24);
        assert_eq!(p.matrix.get(1, 1), 1.0);
    }

    #[test]
    fn project_rejects_negative_floor() {
        assert!(psd_project(&SymMatrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn cholesky_cases() {
        let l = cholesky(&PsdMatrix::identity(2)).unwrap();
        assert_eq!(l, RectMatrix::identity(2));
        let a = PsdMatrix::new_pd(SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap())
            .unwrap();
        let l = cholesky(&a).unwrap();
        assert_eq!(l, RectMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 2.0]]).unwrap());
    }

    #[test]
    fn cholesky_random_8x8() {
        let g = gaussian(12, 8, 5);
        let a = g.gram();
        let l = cholesky(&PsdMatrix::new_pd(a.clone()).unwrap()).unwrap();
        assert!(l.is_lower_triangular());
        let llt = l.matmul(&l.transpose()).unwrap();
        assert!(resid(&llt, &a) < 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn cholesky_names_failing_minor() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 1.0]])
            .unwrap();
        match cholesky_sym(&a).unwrap_err() {
            FwisError::Cone { minor, .. } => assert_eq!(minor, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn log_det_and_solve() {
        let a = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert!((log_det_pd(&a).unwrap() - 16f64.ln()).abs() < 1e-14);
        let b = RectMatrix::identity(2);
        let x = solve_pd(&a, &b).unwrap();
        let ax = a.to_rect().matmul(&x).unwrap();
        assert!(ax.sub(&b).unwrap().norm() < 1e-14);
    }

    #[test]
    fn dense_solve_needs_pivoting() {
        let a = RectMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = solve_dense(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let sing = RectMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(solve_dense(&sing, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn eigen_rejects_nan() {
        let a = SymMatrix::from_diag(&[f64::NAN, 1.0]);
        assert!(matches!(sym_eigen(&a), Err(FwisError::Numeric(_))));
    }
}
