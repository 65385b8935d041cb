//! Dense complex vectors and matrices for the small dimensions this crate
//! works with (at most [`MAX_DIM`] per side).
//!
//! Decompositions are cyclic Jacobi: a two-sided sweep for Hermitian
//! eigenproblems and a one-sided (Hestenes) sweep for singular values. Both
//! are slow for large matrices and very accurate for tiny ones, in particular
//! on near-zero singular values, which is what the product-state checks need.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

pub type ComplexScalar = Complex64;

/// Default absolute tolerance for every approximate comparison.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Largest vector length / matrix side accepted.
pub const MAX_DIM: usize = 64;

const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn c64(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {dim} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge { dim: usize },
    #[error("zero-sized vector or matrix")]
    Empty,
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("expected {expected} entries, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("basis is linearly dependent (smallest Gram eigenvalue {min_eigenvalue:e})")]
    DependentBasis { min_eigenvalue: f64 },
}

fn check_dim(dim: usize) -> Result<(), NumericsError> {
    if dim == 0 {
        Err(NumericsError::Empty)
    } else if dim > MAX_DIM {
        Err(NumericsError::DimensionTooLarge { dim })
    } else {
        Ok(())
    }
}

fn check_finite(values: &[ComplexScalar]) -> Result<(), NumericsError> {
    match values
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(index) => Err(NumericsError::NonFinite { index }),
        None => Ok(()),
    }
}

#[derive(Clone, PartialEq)]
pub struct DenseVector {
    amps: Vec<ComplexScalar>,
}

impl DenseVector {
    pub fn new(amps: Vec<ComplexScalar>) -> Result<Self, NumericsError> {
        check_dim(amps.len())?;
        check_finite(&amps)?;
        Ok(Self { amps })
    }

    pub fn from_real(values: &[f64]) -> Result<Self, NumericsError> {
        Self::new(values.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "invalid dimension {dim}");
        Self {
            amps: vec![ComplexScalar::default(); dim],
        }
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[index] = c64(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[ComplexScalar] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<ComplexScalar> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: ComplexScalar) -> Self {
        Self {
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumericsError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(ComplexScalar, ComplexScalar) -> ComplexScalar,
    ) -> Result<Self, NumericsError> {
        if self.dim() != other.dim() {
            return Err(NumericsError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64, NumericsError> {
        Ok(self.sub(other)?.norm())
    }

    pub fn conj(&self) -> Self {
        Self {
            amps: self.amps.iter().map(|z| z.conj()).collect(),
        }
    }
}

impl Index<usize> for DenseVector {
    type Output = ComplexScalar;
    fn index(&self, i: usize) -> &ComplexScalar {
        &self.amps[i]
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter()).finish()
    }
}

/// Kronecker product; index `i·dim(v) + j` holds `u[i]·v[j]`.
pub fn tensor(u: &DenseVector, v: &DenseVector) -> Result<DenseVector, NumericsError> {
    let dim = u.dim() * v.dim();
    check_dim(dim)?;
    let mut amps = Vec::with_capacity(dim);
    for a in &u.amps {
        for b in &v.amps {
            amps.push(a * b);
        }
    }
    Ok(DenseVector { amps })
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner(u: &DenseVector, v: &DenseVector) -> Result<ComplexScalar, NumericsError> {
    if u.dim() != v.dim() {
        return Err(NumericsError::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ComplexScalar>,
}

impl DenseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<ComplexScalar>,
    ) -> Result<Self, NumericsError> {
        check_dim(rows)?;
        check_dim(cols)?;
        if entries.len() != rows * cols {
            return Err(NumericsError::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0 && rows <= MAX_DIM && cols <= MAX_DIM);
        Self {
            rows,
            cols,
            entries: vec![ComplexScalar::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) },
        )
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> ComplexScalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.entries[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| c64(x, 0.0)))
            .collect();
        Self::new(r, c, entries)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[DenseVector]) -> Result<Self, NumericsError> {
        let cols = columns.len();
        check_dim(cols)?;
        let rows = columns[0].dim();
        if let Some(bad) = columns.iter().find(|c| c.dim() != rows) {
            return Err(NumericsError::DimensionMismatch {
                left: rows,
                right: bad.dim(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[ComplexScalar] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> DenseVector {
        DenseVector {
            amps: (0..self.rows).map(|i| self[(i, j)]).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch {
                left: self.cols,
                right: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ComplexScalar::default() {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &DenseVector) -> Result<DenseVector, NumericsError> {
        if self.cols != v.dim() {
            return Err(NumericsError::DimensionMismatch {
                left: self.cols,
                right: v.dim(),
            });
        }
        Ok(DenseVector {
            amps: (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
                .collect(),
        })
    }

    pub fn kron(&self, other: &Self) -> Result<Self, NumericsError> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        check_dim(rows)?;
        check_dim(cols)?;
        Ok(Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        }))
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest |entry| of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch {
                left: self.rows * self.cols,
                right: other.rows * other.cols,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest |M_ij − conj(M_ji)|; `None` for non-square input.
    pub fn hermitian_deviation(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Some(dev)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = ComplexScalar;
    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<_> = (0..self.cols).map(|j| self[(i, j)]).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition `M = V diag(values) V†` of a Hermitian matrix.
/// Eigenvalues ascend; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn min_eigenvalue(&self) -> f64 {
        self.values[0]
    }

    /// `Σ_k λ_k v_k v_k†`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * self.values[k])
                .sum()
        })
    }
}

/// Rotation parameters zeroing the (p, q) entry of the Hermitian 2×2 block
/// `[[app, apq], [conj(apq), aqq]]`. Returns `(c, s, phase)` with
/// `phase = apq / |apq|`.
fn jacobi_rotation(app: f64, aqq: f64, apq: ComplexScalar) -> (f64, f64, ComplexScalar) {
    let mag = apq.norm();
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase)
}

/// Full Hermitian eigen-decomposition. Fails on non-square input or when
/// Hermiticity is violated by more than `tol`.
pub fn hermitian_eigen(m: &DenseMatrix, tol: f64) -> Result<HermitianEigen, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let deviation = m.hermitian_deviation().unwrap_or(f64::INFINITY);
    if deviation > tol {
        return Err(NumericsError::NotHermitian { deviation });
    }
    let n = m.rows;
    // symmetrize so the iteration sees an exactly Hermitian matrix
    let mut a = DenseMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = DenseMatrix::identity(n);
    let scale = a.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                // J = [[c, s], [-s·conj(phase), c·conj(phase)]] on (p, q)
                let jpp = c64(c, 0.0);
                let jpq = c64(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = c64(0.0, 0.0);
                a[(q, p)] = c64(0.0, 0.0);
                a[(p, p)] = c64(a[(p, p)].re, 0.0);
                a[(q, q)] = c64(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
pub fn hermitian_eigenvalues(m: &DenseMatrix, tol: f64) -> Result<Vec<f64>, NumericsError> {
    Ok(hermitian_eigen(m, tol)?.values)
}

/// Thin singular value decomposition `M = U diag(sigma) V†` with `sigma`
/// nonincreasing and `k = min(rows, cols)` columns in `u` and `v`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// One-sided Jacobi SVD.
pub fn svd(m: &DenseMatrix) -> Svd {
    if m.rows < m.cols {
        let t = svd(&m.adjoint());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(cols);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ComplexScalar::default();
                for i in 0..rows {
                    alpha += a[(i, p)].norm_sqr();
                    beta += a[(i, q)].norm_sqr();
                    gamma += a[(i, p)].conj() * a[(i, q)];
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, beta, gamma);
                let jpp = c64(c, 0.0);
                let jpq = c64(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * jpp + y * jqp;
                    a[(i, q)] = x * jpq + y * jqq;
                }
                for i in 0..cols {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * jpp + y * jqp;
                    v[(i, q)] = x * jpq + y * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u = DenseMatrix::from_fn(rows, cols, |i, j| {
        let k = order[j];
        if norms[k] > 0.0 {
            a[(i, k)] / norms[k]
        } else {
            ComplexScalar::default()
        }
    });
    let v = DenseMatrix::from_fn(cols, cols, |i, j| v[(i, order[j])]);
    Svd { u, sigma, v }
}

pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    svd(m).sigma
}

/// `G[i][j] = ⟨v_i|v_j⟩`.
pub fn gram(vectors: &[DenseVector]) -> Result<DenseMatrix, NumericsError> {
    let n = vectors.len();
    check_dim(n)?;
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inner(&vectors[i], &vectors[j])?;
        }
    }
    Ok(g)
}

/// Least-squares expansion of `target` over `basis`.
#[derive(Debug, Clone)]
pub struct SpanFit {
    pub coefficients: Vec<ComplexScalar>,
    pub residual: f64,
}

impl SpanFit {
    pub fn in_span(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// Coefficients minimizing `‖target − Σ α_i basis_i‖` and that minimum.
/// The basis must be independent: smallest Gram eigenvalue above `tol`.
pub fn span_coefficients(
    basis: &[DenseVector],
    target: &DenseVector,
    tol: f64,
) -> Result<SpanFit, NumericsError> {
    if let Some(bad) = basis.iter().find(|b| b.dim() != target.dim()) {
        return Err(NumericsError::DimensionMismatch {
            left: bad.dim(),
            right: target.dim(),
        });
    }
    let g = gram(basis)?;
    let eig = hermitian_eigen(&g, tol.max(1e-12))?;
    if eig.min_eigenvalue() <= tol {
        return Err(NumericsError::DependentBasis {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    let n = basis.len();
    let rhs: Vec<ComplexScalar> = basis
        .iter()
        .map(|b| inner(b, target))
        .collect::<Result<_, _>>()?;
    // α = W Λ⁻¹ W† rhs
    let projected: Vec<ComplexScalar> = (0..n)
        .map(|k| {
            let s: ComplexScalar = (0..n).map(|i| eig.vectors[(i, k)].conj() * rhs[i]).sum();
            s / eig.values[k]
        })
        .collect();
    let coefficients: Vec<ComplexScalar> = (0..n)
        .map(|i| (0..n).map(|k| eig.vectors[(i, k)] * projected[k]).sum())
        .collect();
    let synth = combine(basis, &coefficients)?;
    let residual = target.distance(&synth)?;
    Ok(SpanFit {
        coefficients,
        residual,
    })
}

/// `Σ α_i v_i`.
pub fn combine(
    vectors: &[DenseVector],
    coefficients: &[ComplexScalar],
) -> Result<DenseVector, NumericsError> {
    check_dim(vectors.len())?;
    if vectors.len() != coefficients.len() {
        return Err(NumericsError::DimensionMismatch {
            left: vectors.len(),
            right: coefficients.len(),
        });
    }
    let mut acc = DenseVector::zeros(vectors[0].dim());
    for (v, &a) in vectors.iter().zip(coefficients) {
        acc = acc.add(&v.scale(a))?;
    }
    Ok(acc)
}
