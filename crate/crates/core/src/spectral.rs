//! Matrix-function kernel shared by every other module.
//!
//! All operators live in [`ComplexMatrix`]. Self-adjoint operators are wrapped
//! in [`HermitianMatrix`] (symmetrized on construction) and self-adjoint
//! unitaries in [`Symmetry`]. Functions of Hermitian matrices go through the
//! spectral theorem: `f(M) = U diag(f(λ)) U*`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative anti-Hermitian residual tolerated by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-8;

const EIGH_EPS: f64 = f64::EPSILON;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { c(0.0) })
}

/// Complex diagonal matrix.
pub fn cdiag(values: &[Complex64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            values[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Builds a 2x2 block matrix `[[a, b], [c, d]]`; rows of `a` and `b` agree,
/// as do columns of `a` and `c`.
pub fn block2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cc: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    let (r0, c0) = a.shape();
    let (r1, c1) = d.shape();
    let mut out = zeros(r0 + r1, c0 + c1);
    out.view_mut((0, 0), (r0, c0)).copy_from(a);
    out.view_mut((0, c0), (r0, c1)).copy_from(b);
    out.view_mut((r0, 0), (r1, c0)).copy_from(cc);
    out.view_mut((r0, c0), (r1, c1)).copy_from(d);
    out
}

/// Splits an even-dimensional square matrix into its four half-size blocks.
pub fn split_blocks(m: &ComplexMatrix) -> [ComplexMatrix; 4] {
    let h = m.nrows() / 2;
    [
        m.view((0, 0), (h, h)).into_owned(),
        m.view((0, h), (h, h)).into_owned(),
        m.view((h, 0), (h, h)).into_owned(),
        m.view((h, h), (h, h)).into_owned(),
    ]
}

/// Residual `‖M*M − 1‖`.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.ncols();
    operator_norm(&(m.adjoint() * m - identity(n)))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// A self-adjoint matrix, stored symmetrized as `(M + M*)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Symmetrizes `m`, failing when its anti-Hermitian part exceeds
    /// [`HERMITIAN_TOL`] relative to `‖m‖`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        check_finite(&m)?;
        let norm = operator_norm(&m);
        let skew = operator_norm(&(&m - m.adjoint())) * 0.5;
        if skew > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { residual: skew });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking. Use for matrices that are Hermitian by
    /// construction, up to roundoff.
    pub fn symmetrized(m: ComplexMatrix) -> Self {
        let h = (&m + m.adjoint()) * c(0.5);
        Self(h)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self(diag(values))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.0)
    }
}

impl AsRef<ComplexMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomp {
    /// `U diag(values) U*`.
    pub fn reassemble(&self, values: &[f64]) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        scaled * u.adjoint()
    }

    /// Orthonormal columns for the eigenvalues selected by `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
        let idx: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| keep(self.eigenvalues[k]))
            .collect();
        select_columns(&self.eigenvectors, &idx)
    }
}

pub(crate) fn select_columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let mut out = zeros(m.nrows(), idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &m.column(k));
    }
    out
}

/// A self-adjoint unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry(HermitianMatrix);

impl Symmetry {
    /// Accepts `v` when it is Hermitian and `V² = 1` within `tol`.
    pub fn new(v: ComplexMatrix, tol: f64) -> Result<Self> {
        let h = HermitianMatrix::new(v)?;
        let n = h.dim();
        let residual = operator_norm(&(h.matrix() * h.matrix() - identity(n)));
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(h))
    }

    pub(crate) fn from_hermitian_unchecked(h: HermitianMatrix) -> Self {
        Self(h)
    }

    /// `2E − 1` for a projection `E`.
    pub fn from_projection(e: &ComplexMatrix) -> Self {
        let n = e.nrows();
        Self(HermitianMatrix::symmetrized(e * c(2.0) - identity(n)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(m: &HermitianMatrix) -> Result<SpectralDecomp> {
    let n = m.dim();
    if n == 0 {
        return Ok(SpectralDecomp {
            eigenvalues: Vec::new(),
            eigenvectors: zeros(0, 0),
        });
    }
    let max_iter = 200 * n.max(10);
    let eig = SymmetricEigen::try_new(m.matrix().clone(), EIGH_EPS, max_iter)
        .ok_or(Error::EigenNoConvergence {
            iterations: max_iter,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = select_columns(&eig.eigenvectors, &order);
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// `V diag(f(λ)) V*`. A non-finite value of `f` is a domain error.
pub fn matrix_function(m: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let dec = eigh(m)?;
    let mut values = Vec::with_capacity(dec.eigenvalues.len());
    for &lambda in &dec.eigenvalues {
        let v = f(lambda);
        if !v.is_finite() {
            return Err(Error::Domain { eigenvalue: lambda });
        }
        values.push(v);
    }
    Ok(HermitianMatrix::symmetrized(dec.reassemble(&values)))
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues
/// within `clamp` below zero are treated as zero.
pub fn sqrt_psd(m: &HermitianMatrix, clamp: f64) -> Result<HermitianMatrix> {
    matrix_function(m, |x| {
        if x >= 0.0 {
            x.sqrt()
        } else if x >= -clamp {
            0.0
        } else {
            f64::NAN
        }
    })
}

/// Gap threshold `gap_tol · max(‖M‖, 1)` used by [`sign`].
pub fn gap_threshold(m: &HermitianMatrix, gap_tol: f64) -> f64 {
    gap_tol * m.norm().max(1.0)
}

/// `sgn(M)`. Every eigenvalue must satisfy `|λ| > gap_tol · max(‖M‖, 1)`.
pub fn sign(m: &HermitianMatrix, gap_tol: f64) -> Result<Symmetry> {
    let dec = eigh(m)?;
    let norm = dec.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let threshold = gap_tol * norm.max(1.0);
    let mut values = Vec::with_capacity(dec.eigenvalues.len());
    for &lambda in &dec.eigenvalues {
        if lambda.abs() <= threshold || lambda == 0.0 {
            return Err(Error::SingularSign {
                eigenvalue: lambda,
                threshold,
            });
        }
        values.push(lambda.signum());
    }
    Ok(Symmetry(HermitianMatrix::symmetrized(
        dec.reassemble(&values),
    )))
}

/// Principal logarithm of a unitary, with phases in `(−π, π)`.
///
/// Fails with [`Error::BranchCut`] when some eigenvalue phase is within
/// `gap_tol` of `±π`.
pub fn unitary_log(u: &ComplexMatrix, gap_tol: f64) -> Result<ComplexMatrix> {
    let n = u.nrows();
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let residual = unitarity_residual(u);
    if residual > 1e-8 {
        return Err(Error::NotUnitary { residual });
    }
    // Cayley transform H = i(1 − U)(1 + U)⁻¹ is Hermitian with eigenvalues
    // tan(φ/2), sharing eigenvectors with U
    let one = identity(n);
    let shifted = &one + u;
    // singular values of 1 + U are |1 + e^{iφ}| = 2cos(φ/2)
    let smallest = shifted
        .singular_values()
        .iter()
        .fold(f64::INFINITY, |a, &x| a.min(x));
    let nearest = PI - 2.0 * (smallest / 2.0).min(1.0).asin();
    if PI - nearest <= gap_tol {
        return Err(Error::BranchCut { phase: nearest });
    }
    let inv = shifted.try_inverse().ok_or(Error::BranchCut { phase: nearest })?;
    let h = HermitianMatrix::symmetrized((&one - u) * inv * Complex64::i());
    let dec = eigh(&h)?;
    let mut phases = Vec::with_capacity(n);
    for &lambda in &dec.eigenvalues {
        let phase = 2.0 * lambda.atan();
        if PI - phase.abs() <= gap_tol {
            return Err(Error::BranchCut { phase });
        }
        phases.push(Complex64::new(0.0, phase));
    }
    let q = &dec.eigenvectors;
    let z = q * cdiag(&phases) * q.adjoint();
    // anti-Hermitian part only
    Ok((&z - z.adjoint()) * c(0.5))
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(z: &ComplexMatrix) -> ComplexMatrix {
    if z.nrows() == 0 {
        return zeros(0, 0);
    }
    z.exp()
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

/// Orthonormal basis for the eigenvectors with `|λ| ≤ rank_tol · max(‖M‖, 1)`.
/// When `M = 0` the whole space is returned.
pub fn nullspace_basis(m: &HermitianMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let dec = eigh(m)?;
    let norm = dec.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let threshold = rank_tol * norm.max(1.0);
    Ok(dec.columns_where(|x| x.abs() <= threshold))
}

/// Orthogonal projection onto the span of orthonormal columns.
pub fn range_projection(basis: &ComplexMatrix) -> ComplexMatrix {
    basis * basis.adjoint()
}

/// Orthonormal basis of the orthogonal complement of the span of orthonormal
/// `basis` inside `C^n`.
pub fn complement_basis(basis: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let p = range_projection(basis);
    let q = HermitianMatrix::symmetrized(identity(n) - p);
    let dec = eigh(&q)?;
    Ok(dec.columns_where(|x| x > 0.5))
}

/// JSON representation `{"rows": n, "cols": n, "data": [[re, im], ...]}`,
/// row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                self.rows * self.cols,
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        for (k, [re, im]) in self.data.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::NonFinite {
                    row: k / self.cols.max(1),
                    col: k % self.cols.max(1),
                });
            }
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("matrix serializes")
}

/// Parses the matrix JSON format, rejecting NaN and infinities.
pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let parsed: MatrixJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    parsed.to_matrix()
}
