//! Finite-dimensional fixtures: a discretized multiplication operator, DFT
//! time–frequency pairs, phase parametrization of Davis symmetries,
//! Blaschke model spaces, and pairs built from an idempotent.

use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::davis::{self, DavisSymmetry};
use crate::decomp::{self, validate_pair, GenericPair, ProjectionPair};
use crate::error::{Error, Result};
use crate::sample;
use crate::spectral::{
    block2, c, diag, eigh, identity, matrix_function, operator_norm, zeros, ComplexMatrix,
    HermitianMatrix, Symmetry,
};
use crate::tol::Tolerances;

/// Descending symmetric grid `t_k = (n + 1 − 2k)/n`, `k = 1..n`.
pub fn mt_grid(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| (n as f64 + 1.0 - 2.0 * k as f64) / n as f64)
        .collect()
}

/// The reversal permutation `e_k ↦ e_{n+1−k}`.
pub fn reversal(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if i + j + 1 == n { c(1.0) } else { c(0.0) })
}

/// `V_φ = diag(φ)·V·diag(φ̄)` for unimodular `φ`.
pub fn phase_twisted(v: &ComplexMatrix, phases: &[f64]) -> ComplexMatrix {
    let d: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    let dm = crate::spectral::cdiag(&d);
    &dm * v * dm.adjoint()
}

/// `A = diag(t_k)` with the reversal symmetry, realized as `(P_V, Q_V)`.
pub fn discretized_mt(n: usize, tol: &Tolerances) -> Result<ProjectionPair> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!("n must be even and at least 2, got {n}")));
    }
    let a = HermitianMatrix::from_real_diagonal(&mt_grid(n));
    let v = DavisSymmetry::new(&a, Symmetry::new(reversal(n), 1e-12)?)?;
    let gp = davis::symmetry_to_pair(&a, &v, tol)?;
    validate_pair(gp.p0().matrix().clone(), gp.q0().matrix().clone())
}

/// Unitary `n`-point DFT, `F_{jk} = e^{−2πi jk/n}/√n`.
pub fn dft(n: usize) -> ComplexMatrix {
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::from_polar(s, -2.0 * PI * ((j * k) % n) as f64 / n as f64)
    })
}

fn indicator(n: usize, set: &[usize]) -> Result<ComplexMatrix> {
    let mut d = vec![0.0; n];
    for &i in set {
        if i >= n {
            return Err(Error::InvalidInput(format!("index {i} out of range for n = {n}")));
        }
        d[i] = 1.0;
    }
    Ok(diag(&d))
}

/// `P = 1_I`, `Q = F*·1_J·F`.
pub fn fourier_pair(n: usize, i_set: &[usize], j_set: &[usize]) -> Result<ProjectionPair> {
    if n == 0 || i_set.is_empty() || j_set.is_empty() {
        return Err(Error::InvalidInput("index sets must be nonempty".into()));
    }
    let f = dft(n);
    let p = indicator(n, i_set)?;
    let q = f.adjoint() * indicator(n, j_set)? * &f;
    validate_pair(p, HermitianMatrix::symmetrized(q).into_matrix())
}

/// Largest mismatch between the positive eigenvalues of `A₀` and `√(1−s)`
/// for `s` the eigenvalues of `P₀Q₀P₀` on `R(P₀)`.
pub fn eigenvalue_law_residual(gp: &GenericPair) -> Result<f64> {
    let mut lambdas: Vec<f64> = eigh(gp.a0())?
        .eigenvalues
        .into_iter()
        .filter(|&x| x > 0.0)
        .collect();
    let range = eigh(gp.p0())?.columns_where(|x| x > 0.5);
    let compressed = HermitianMatrix::symmetrized(range.adjoint() * gp.q0().matrix() * &range);
    let mut predicted: Vec<f64> = eigh(&compressed)?
        .eigenvalues
        .iter()
        .map(|s| (1.0 - s).max(0.0).sqrt())
        .collect();
    if lambdas.len() != predicted.len() {
        return Ok(f64::INFINITY);
    }
    lambdas.sort_by(f64::total_cmp);
    predicted.sort_by(f64::total_cmp);
    Ok(lambdas
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Eigenvector pairs `(e_k, f_k)` of `A₀` for `±λ_k`, each spanning a
/// 2-dimensional block on which a Davis symmetry acts as
/// `[[0, ω_k],[ω̄_k, 0]]`.
#[derive(Debug, Clone)]
pub struct OmegaParametrization {
    pub lambdas: Vec<f64>,
    /// Columns `e_k`.
    pub plus: ComplexMatrix,
    /// Columns `f_k`.
    pub minus: ComplexMatrix,
}

/// Relative separation below which two eigenvalues count as repeated.
pub const SIMPLE_SPECTRUM_TOL: f64 = 1e-8;

impl OmegaParametrization {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `V_ω = Σ ω_k e_k f_k* + ω̄_k f_k e_k*`.
    pub fn symmetry(&self, omegas: &[Complex64]) -> Result<Symmetry> {
        if omegas.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: omegas.len(),
            });
        }
        let m = self.plus.nrows();
        let mut v = zeros(m, m);
        for (k, &w) in omegas.iter().enumerate() {
            if (w.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("phase {w} is not unimodular")));
            }
            let e = self.plus.column(k);
            let f = self.minus.column(k);
            v += &e * f.adjoint() * w + &f * e.adjoint() * w.conj();
        }
        Ok(Symmetry::from_hermitian_unchecked(HermitianMatrix::symmetrized(v)))
    }

    /// Phases `ω_k = e_k* V f_k` of a Davis symmetry.
    pub fn phases_of(&self, v: &ComplexMatrix) -> Vec<Complex64> {
        (0..self.len())
            .map(|k| (self.plus.column(k).adjoint() * v * self.minus.column(k))[(0, 0)])
            .collect()
    }
}

/// Pairs `+λ_k` with `−λ_k` eigenvectors of `A₀`; requires simple spectrum.
pub fn omega_parametrization(a0: &HermitianMatrix) -> Result<OmegaParametrization> {
    let dec = eigh(a0)?;
    let m = a0.dim();
    let scale = a0.norm().max(1.0);
    for w in dec.eigenvalues.windows(2) {
        if w[1] - w[0] <= SIMPLE_SPECTRUM_TOL * scale {
            return Err(Error::DegenerateSpectrum { eigenvalue: w[0] });
        }
    }
    let h = m / 2;
    if m % 2 != 0 || dec.eigenvalues.get(h.wrapping_sub(1)).is_some_and(|&x| x >= 0.0) {
        return Err(Error::InvalidInput("spectrum is not symmetric".into()));
    }
    // ascending order: index h + k holds +λ_k and h − 1 − k holds −λ_k
    let mut lambdas = Vec::with_capacity(h);
    let mut plus = zeros(m, h);
    let mut minus = zeros(m, h);
    for k in 0..h {
        let lp = dec.eigenvalues[h + k];
        let ln = dec.eigenvalues[h - 1 - k];
        if (lp + ln).abs() > decomp::SPECTRAL_PAIRING_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "eigenvalue {lp:.17e} has no partner at its negative"
            )));
        }
        lambdas.push(lp);
        plus.set_column(k, &dec.eigenvectors.column(h + k));
        minus.set_column(k, &dec.eigenvectors.column(h - 1 - k));
    }
    Ok(OmegaParametrization {
        lambdas,
        plus,
        minus,
    })
}

fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    if a.norm() == 0.0 {
        z
    } else {
        (a.norm() / a) * (a - z) / (c(1.0) - a.conj() * z)
    }
}

/// Finite Blaschke product with zeros `points`.
pub fn blaschke(points: &[Complex64], z: Complex64) -> Complex64 {
    points.iter().fold(c(1.0), |acc, &a| acc * mobius(a, z))
}

/// Reproducing kernel `k_x(z) = 1/(1 − x̄z)` of the Hardy space.
pub fn kernel(x: Complex64, z: Complex64) -> Complex64 {
    c(1.0) / (c(1.0) - x.conj() * z)
}

/// Gram matrix `G_{ij} = ⟨k_j, k_i⟩ = 1/(1 − x̄_j x_i)`.
pub fn gram(points: &[Complex64]) -> ComplexMatrix {
    let n = points.len();
    ComplexMatrix::from_fn(n, n, |i, j| kernel(points[j], points[i]))
}

/// Largest Gram condition number accepted by [`blaschke_pair`].
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Pair from the model space spanned by the kernels at `a # b`.
#[derive(Debug, Clone)]
pub struct BlaschkePair {
    pub pair: GenericPair,
    pub gram_condition: f64,
    /// Multiplicities of the positive eigenvalues of `A₀`, ascending.
    pub multiplicities: Vec<usize>,
}

/// Coefficients `c` with `Σ c_j k_{x_j} = f` on the unit circle.
fn expand_in_kernels(
    points: &[Complex64],
    nodes: &[Complex64],
    f: impl Fn(Complex64) -> Complex64,
) -> Result<ComplexMatrix> {
    let k = ComplexMatrix::from_fn(nodes.len(), points.len(), |p, j| kernel(points[j], nodes[p]));
    let rhs = ComplexMatrix::from_fn(nodes.len(), 1, |p, _| f(nodes[p]));
    let svd = k.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let residual = (&k * &coef - &rhs).norm();
    if residual > 1e-8 * rhs.norm().max(1.0) {
        return Err(Error::GenericCertification(format!(
            "function is not in the model space (residual {residual:.3e})"
        )));
    }
    Ok(coef)
}

/// Realizes `P_a = P_{B_a H²}` and `P_b = P_{B_b H²}` on the model space
/// `span{k_{a_i}, k_{b_j}}` in an orthonormal basis obtained from the
/// Cholesky factor of the Gram matrix.
///
/// `P_a k_{a_i} = 0`, `P_a k_{b_j} = conj(B_a(b_j))·B_a·k_{b_j}`, and
/// symmetrically for `P_b`.
pub fn blaschke_pair(a: &[Complex64], b: &[Complex64], tol: &Tolerances) -> Result<BlaschkePair> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return Err(Error::InvalidInput(format!(
            "need equally many nonzero points, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let points: Vec<Complex64> = a.iter().chain(b).copied().collect();
    if points.iter().any(|z| z.norm() >= 1.0 || !z.is_finite()) {
        return Err(Error::InvalidInput("points must lie in the open unit disk".into()));
    }
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::InvalidInput(format!(
                    "points must be distinct, {} repeats",
                    points[i]
                )));
            }
        }
    }
    let g = gram(&points);
    let gev = eigh(&HermitianMatrix::symmetrized(g.clone()))?.eigenvalues;
    let condition = gev[gev.len() - 1] / gev[0].max(f64::MIN_POSITIVE);
    if gev[0] <= 0.0 || condition > MAX_GRAM_CONDITION {
        return Err(Error::IllConditionedGram { condition });
    }

    let dim = 2 * n;
    let node_count = 4 * n + 1;
    let nodes: Vec<Complex64> = (0..node_count)
        .map(|p| Complex64::from_polar(1.0, 2.0 * PI * p as f64 / node_count as f64))
        .collect();
    // columns: coefficients of P k_x in the kernel basis
    let mut pa = zeros(dim, dim);
    let mut pb = zeros(dim, dim);
    for (j, &x) in points.iter().enumerate() {
        let (zeros_of, target) = if j < n { (b, &mut pb) } else { (a, &mut pa) };
        let scale = blaschke(zeros_of, x).conj();
        let coef = expand_in_kernels(&points, &nodes, |z| {
            scale * blaschke(zeros_of, z) * kernel(x, z)
        })?;
        target.set_column(j, &coef.column(0));
    }
    let chol = Cholesky::new(g).ok_or(Error::IllConditionedGram { condition })?;
    let l = chol.l();
    let l_adj = l.adjoint();
    let l_adj_inv = l_adj
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedGram { condition })?;
    let to_orthonormal = |m: &ComplexMatrix| &l_adj * m * &l_adj_inv;
    let p = HermitianMatrix::new(to_orthonormal(&pa))?;
    let q = HermitianMatrix::new(to_orthonormal(&pb))?;
    let pair = GenericPair::new(p.into_matrix(), q.into_matrix(), tol)?;
    if pair.dim() != dim {
        return Err(Error::GenericCertification(format!(
            "generic dimension {} differs from 2N = {dim}",
            pair.dim()
        )));
    }
    let witness = decomp::is_difference_of_projections(pair.a0(), tol);
    if !witness.is_difference {
        return Err(Error::GenericCertification(witness.diagnostic));
    }
    let multiplicities = multiplicities(&eigh(pair.a0())?.eigenvalues);
    Ok(BlaschkePair {
        pair,
        gram_condition: condition,
        multiplicities,
    })
}

/// Sizes of clusters of positive eigenvalues at [`SIMPLE_SPECTRUM_TOL`].
pub fn multiplicities(eigenvalues: &[f64]) -> Vec<usize> {
    let pos: Vec<f64> = eigenvalues.iter().copied().filter(|&x| x > 0.0).collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < pos.len() {
        let mut end = k + 1;
        while end < pos.len() && pos[end] - pos[end - 1] <= SIMPLE_SPECTRUM_TOL {
            end += 1;
        }
        out.push(end - k);
        k = end;
    }
    out
}

/// The pair `(P_{R(E)}, P_{R(E*)})` for `E = [[1, B],[0, 0]]`.
#[derive(Debug, Clone)]
pub struct IdempotentPair {
    pub pair: GenericPair,
    pub b: HermitianMatrix,
    /// `(E − E*)S⁻¹`.
    pub a_direct: ComplexMatrix,
    /// `[[B²(1+B²)⁻¹, −B(1+B²)⁻¹],[−B(1+B²)⁻¹, −B²(1+B²)⁻¹]]`.
    pub a_closed_form: ComplexMatrix,
}

impl IdempotentPair {
    pub fn closed_form_residual(&self) -> f64 {
        operator_norm(&(&self.a_direct - &self.a_closed_form))
    }

    /// Largest `‖[M, A₀]‖` over `samples` random `M = [[Y, Z],[Z, Y + 2BZ]]`
    /// with `Y`, `Z` in the commutant of `B`.
    pub fn commutant_residual<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<f64> {
        let mut worst = 0.0f64;
        let a0 = self.pair.a0().matrix();
        for _ in 0..samples {
            let y = sample::random_commutant_unitary(&self.b, 1e-9, rng)?;
            let z = sample::random_commutant_unitary(&self.b, 1e-9, rng)?;
            let bz = self.b.matrix() * &z * c(2.0);
            let m = block2(&y, &z, &z, &(&y + bz));
            worst = worst.max(operator_norm(&(&m * a0 - a0 * &m)) / operator_norm(&m).max(1.0));
        }
        Ok(worst)
    }
}

pub fn idempotent_pair(b: &ComplexMatrix, tol: &Tolerances) -> Result<IdempotentPair> {
    let bh = HermitianMatrix::new(b.clone())?;
    let k = bh.dim();
    let ev = eigh(&bh)?.eigenvalues;
    let smallest = ev.first().copied().unwrap_or(0.0);
    if k == 0 || smallest <= tol.rank_tol * bh.norm().max(1.0) {
        return Err(Error::NotPositive {
            eigenvalue: smallest,
        });
    }
    let one = identity(k);
    let e = block2(&one, bh.matrix(), &zeros(k, k), &zeros(k, k));
    let s = &e + e.adjoint() - identity(2 * k);
    let s_inv = s
        .try_inverse()
        .ok_or(Error::NotPositive {
            eigenvalue: smallest,
        })?;
    let p = &e * &s_inv;
    let q = e.adjoint() * &s_inv;
    let a_direct = (&e - e.adjoint()) * &s_inv;
    let pair = GenericPair::new(
        HermitianMatrix::symmetrized(p).into_matrix(),
        HermitianMatrix::symmetrized(q).into_matrix(),
        tol,
    )?;
    let inv = matrix_function(&bh, |x| 1.0 / (1.0 + x * x))?;
    let b2 = matrix_function(&bh, |x| x * x / (1.0 + x * x))?;
    let b1 = bh.matrix() * inv.matrix();
    let a_closed_form = block2(b2.matrix(), &(-&b1), &(-&b1), &(-b2.matrix()));
    Ok(IdempotentPair {
        pair,
        b: bh,
        a_direct,
        a_closed_form,
    })
}
