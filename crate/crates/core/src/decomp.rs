//! Three-space decomposition `H = N(A) ⊕ N(A²−1) ⊕ H₀`, extraction of the
//! generic part of a pair, the Halmos canonical frame, Friedrichs angle, and
//! the membership test for differences of projections.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::davis;
use crate::error::{Error, Result};
use crate::spectral::{
    block2, c, diag, eigh, identity, matrix_function, nullspace_basis, operator_norm, select_columns, zeros,
    ComplexMatrix, HermitianMatrix, MatrixJson, Symmetry,
};
use crate::tol::Tolerances;

/// Idempotency and self-adjointness tolerance for projections.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Residual allowed in the Halmos congruences.
pub const FRAME_TOL: f64 = 1e-9;
/// Eigenvalues closer than this factor to a classification threshold are
/// reported as borderline instead of being silently classified.
const BORDERLINE_FACTOR: f64 = 10.0;

fn check_projection(m: &ComplexMatrix, which: &'static str) -> Result<HermitianMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    crate::spectral::check_finite(m)?;
    let skew = operator_norm(&(m - m.adjoint()));
    if skew > PROJECTION_TOL {
        return Err(Error::NotAProjection {
            which,
            property: "self-adjointness",
            residual: skew,
        });
    }
    let h = HermitianMatrix::symmetrized(m.clone());
    let idem = operator_norm(&(h.matrix() * h.matrix() - h.matrix()));
    if idem > PROJECTION_TOL {
        return Err(Error::NotAProjection {
            which,
            property: "idempotency",
            residual: idem,
        });
    }
    Ok(h)
}

/// Two orthogonal projections on `C^n`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    p: HermitianMatrix,
    q: HermitianMatrix,
}

impl ProjectionPair {
    pub fn p(&self) -> &HermitianMatrix {
        &self.p
    }

    pub fn q(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// `A = P − Q`.
    pub fn difference(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.p.matrix() - self.q.matrix())
    }

    /// `‖(P−Q)² + (P+Q−1)² − 1‖`.
    pub fn kato_residual(&self) -> f64 {
        kato_residual(self.p.matrix(), self.q.matrix())
    }
}

pub(crate) fn kato_residual(p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let n = p.nrows();
    let a = p - q;
    let s = p + q - identity(n);
    operator_norm(&(&a * &a + &s * &s - identity(n)))
}

/// Certifies that `p` and `q` are projections of the same dimension.
pub fn validate_pair(p: ComplexMatrix, q: ComplexMatrix) -> Result<ProjectionPair> {
    let p = check_projection(&p, "P")?;
    let q = check_projection(&q, "Q")?;
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(ProjectionPair { p, q })
}

/// Orthonormal bases of `N(A)`, `N(A−1)`, `N(A+1)` and the generic part.
#[derive(Debug, Clone)]
pub struct ThreeSpaceSplit {
    pub null_a: ComplexMatrix,
    pub plus_one: ComplexMatrix,
    pub minus_one: ComplexMatrix,
    pub generic: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeSpaceSplitJson {
    pub null_a: MatrixJson,
    pub plus_one: MatrixJson,
    pub minus_one: MatrixJson,
    pub generic: MatrixJson,
}

impl ThreeSpaceSplit {
    pub fn dim(&self) -> usize {
        self.null_a.nrows()
    }

    pub fn generic_dim(&self) -> usize {
        self.generic.ncols()
    }

    /// The unitary `T = [N(A) | N(A−1) | N(A+1) | H₀]`.
    pub fn unitary(&self) -> ComplexMatrix {
        let n = self.dim();
        let blocks = [&self.null_a, &self.plus_one, &self.minus_one, &self.generic];
        let mut t = zeros(n, n);
        let mut col = 0;
        for b in blocks {
            for j in 0..b.ncols() {
                t.set_column(col, &b.column(j));
                col += 1;
            }
        }
        t
    }

    /// Reassembles `0 ⊕ 1 ⊕ (−1) ⊕ A₀` in the ambient space.
    pub fn reassemble(&self, a0: &ComplexMatrix) -> ComplexMatrix {
        &self.plus_one * self.plus_one.adjoint() - &self.minus_one * self.minus_one.adjoint()
            + &self.generic * a0 * self.generic.adjoint()
    }

    pub fn to_json(&self) -> ThreeSpaceSplitJson {
        ThreeSpaceSplitJson {
            null_a: MatrixJson::from_matrix(&self.null_a),
            plus_one: MatrixJson::from_matrix(&self.plus_one),
            minus_one: MatrixJson::from_matrix(&self.minus_one),
            generic: MatrixJson::from_matrix(&self.generic),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Class {
    Null,
    Plus,
    Minus,
    Generic,
}

fn classify(lambda: f64, null_threshold: f64, rank_tol: f64) -> Result<Class> {
    let abs = lambda.abs();
    let unit_gap = (lambda * lambda - 1.0).abs();
    if abs <= null_threshold {
        return Ok(Class::Null);
    }
    if unit_gap <= rank_tol {
        return Ok(if lambda > 0.0 { Class::Plus } else { Class::Minus });
    }
    if abs <= BORDERLINE_FACTOR * null_threshold || unit_gap <= BORDERLINE_FACTOR * rank_tol {
        return Err(Error::BorderlineSpectrum { eigenvalue: lambda });
    }
    Ok(Class::Generic)
}

/// Splits `C^n` into `N(A) ⊕ N(A−1) ⊕ N(A+1) ⊕ H₀` for a self-adjoint
/// contraction `A`.
pub fn three_space_split(a: &HermitianMatrix, tol: &Tolerances) -> Result<ThreeSpaceSplit> {
    let dec = eigh(a)?;
    let norm = dec.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if norm > 1.0 + tol.rank_tol {
        return Err(Error::NotAContraction { norm });
    }
    let null_threshold = tol.rank_tol * norm.max(1.0);
    let mut idx: [Vec<usize>; 4] = Default::default();
    for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
        let slot = match classify(lambda, null_threshold, tol.rank_tol)? {
            Class::Null => 0,
            Class::Plus => 1,
            Class::Minus => 2,
            Class::Generic => 3,
        };
        idx[slot].push(k);
    }
    let v = &dec.eigenvectors;
    Ok(ThreeSpaceSplit {
        null_a: select_columns(v, &idx[0]),
        plus_one: select_columns(v, &idx[1]),
        minus_one: select_columns(v, &idx[2]),
        generic: select_columns(v, &idx[3]),
    })
}

/// The generic part `(P₀, Q₀)` of a pair, on `H₀ ≅ C^m`.
///
/// Certified on construction: both are projections, `m` is even, and every
/// eigenvalue `λ` of `A₀ = P₀ − Q₀` satisfies `|λ| > rank_tol` and
/// `|λ² − 1| > rank_tol`.
#[derive(Debug, Clone)]
pub struct GenericPair {
    p0: HermitianMatrix,
    q0: HermitianMatrix,
    a0: HermitianMatrix,
}

impl GenericPair {
    pub fn new(p0: ComplexMatrix, q0: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let pair = validate_pair(p0, q0)?;
        Self::certify(pair.p, pair.q, tol)
    }

    fn certify(p0: HermitianMatrix, q0: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let m = p0.dim();
        if m % 2 != 0 {
            return Err(Error::GenericCertification(format!(
                "generic part has odd dimension {m}"
            )));
        }
        let a0 = HermitianMatrix::symmetrized(p0.matrix() - q0.matrix());
        for &lambda in &eigh(&a0)?.eigenvalues {
            if lambda.abs() <= tol.rank_tol || (lambda * lambda - 1.0).abs() <= tol.rank_tol {
                return Err(Error::GenericCertification(format!(
                    "A0 has eigenvalue {lambda:.17e} in N(A0) or N(A0²−1)"
                )));
            }
        }
        Ok(Self { p0, q0, a0 })
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }

    pub fn p0(&self) -> &HermitianMatrix {
        &self.p0
    }

    pub fn q0(&self) -> &HermitianMatrix {
        &self.q0
    }

    pub fn a0(&self) -> &HermitianMatrix {
        &self.a0
    }

    /// `P₀ + Q₀ − 1`.
    pub fn sum_minus_one(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.p0.matrix() + self.q0.matrix() - identity(self.dim()))
    }

    pub fn as_projection_pair(&self) -> ProjectionPair {
        ProjectionPair {
            p: self.p0.clone(),
            q: self.q0.clone(),
        }
    }

    /// `(U P₀ U*, U Q₀ U*)`, recertified.
    pub fn conjugated(&self, u: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let p = u * self.p0.matrix() * u.adjoint();
        let q = u * self.q0.matrix() * u.adjoint();
        Self::new(p, q, tol)
    }

    /// `max(‖P₀ − P₀′‖, ‖Q₀ − Q₀′‖)`.
    pub fn distance_to(&self, other: &GenericPair) -> f64 {
        operator_norm(&(self.p0.matrix() - other.p0.matrix()))
            .max(operator_norm(&(self.q0.matrix() - other.q0.matrix())))
    }

    /// Errors unless both pairs share `A₀` within `1e−9`.
    pub fn check_same_difference(&self, other: &GenericPair) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let residual = operator_norm(&(self.a0.matrix() - other.a0.matrix()));
        if residual > 1e-9 {
            return Err(Error::MismatchedDifference { residual });
        }
        Ok(())
    }
}

/// Generic part together with the split it was extracted from.
pub fn generic_part_with_split(
    pair: &ProjectionPair,
    tol: &Tolerances,
) -> Result<(ThreeSpaceSplit, GenericPair)> {
    let split = three_space_split(&pair.difference(), tol)?;
    if split.generic_dim() == 0 {
        return Err(Error::EmptyGenericPart);
    }
    cross_check_split(pair, &split)?;
    let g = &split.generic;
    let p0 = g.adjoint() * pair.p.matrix() * g;
    let q0 = g.adjoint() * pair.q.matrix() * g;
    let gp = GenericPair::certify(
        HermitianMatrix::symmetrized(p0),
        HermitianMatrix::symmetrized(q0),
        tol,
    )?;
    Ok((split, gp))
}

pub fn generic_part(pair: &ProjectionPair, tol: &Tolerances) -> Result<GenericPair> {
    generic_part_with_split(pair, tol).map(|(_, gp)| gp)
}

/// `N(A−1) = R(P)∩N(Q)`, `N(A+1) = N(P)∩R(Q)`, and `P = Q` on `N(A)`.
fn cross_check_split(pair: &ProjectionPair, split: &ThreeSpaceSplit) -> Result<()> {
    const TOL: f64 = 1e-8;
    let p = pair.p.matrix();
    let q = pair.q.matrix();
    let checks = [
        ("P fixes N(A-1)", operator_norm(&(p * &split.plus_one - &split.plus_one))),
        ("Q kills N(A-1)", operator_norm(&(q * &split.plus_one))),
        ("P kills N(A+1)", operator_norm(&(p * &split.minus_one))),
        ("Q fixes N(A+1)", operator_norm(&(q * &split.minus_one - &split.minus_one))),
        ("P = Q on N(A)", operator_norm(&((p - q) * &split.null_a))),
    ];
    for (name, residual) in checks {
        if residual > TOL {
            return Err(Error::GenericCertification(format!(
                "{name}: residual {residual:.3e}"
            )));
        }
    }
    Ok(())
}

/// Unitary change of basis `W : H₀ → L × L` with
/// `W P₀ W* = [[1,0],[0,0]]` and `W Q₀ W* = [[C², CS],[CS, S²]]`.
///
/// Angles are sorted ascending; `C`, `S`, `τ` are diagonal.
#[derive(Debug, Clone)]
pub struct HalmosFrame {
    /// Rows of `w` are the frame vectors: first `L`, then second `L`.
    pub w: ComplexMatrix,
    pub gamma: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub tan: Vec<f64>,
}

/// Relative tolerance used to group principal angles into clusters.
pub const CLUSTER_TOL: f64 = 1e-9;

impl HalmosFrame {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn half(&self) -> usize {
        self.gamma.len()
    }

    /// `W M W*`.
    pub fn to_frame(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.w * m * self.w.adjoint()
    }

    /// `W* M W`.
    pub fn from_frame(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.w.adjoint() * m * &self.w
    }

    pub fn gamma_matrix(&self) -> ComplexMatrix {
        diag(&self.gamma)
    }

    pub fn cos_matrix(&self) -> ComplexMatrix {
        diag(&self.cos)
    }

    pub fn sin_matrix(&self) -> ComplexMatrix {
        diag(&self.sin)
    }

    pub fn tan_matrix(&self) -> ComplexMatrix {
        diag(&self.tan)
    }

    /// Index ranges of angle clusters (consecutive angles within
    /// [`CLUSTER_TOL`] relative to the largest angle).
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let h = self.half();
        let scale = self.gamma.iter().fold(0.0f64, |a, &x| a.max(x));
        let mut out = Vec::new();
        let mut start = 0;
        while start < h {
            let mut end = start + 1;
            while end < h && self.gamma[end] - self.gamma[end - 1] <= CLUSTER_TOL * scale {
                end += 1;
            }
            out.push(start..end);
            start = end;
        }
        out
    }

    /// Zeroes the entries of an `L × L` block that couple different angle
    /// clusters, i.e. projects onto the commutant of `Γ`.
    pub fn project_commuting(&self, block: &ComplexMatrix) -> ComplexMatrix {
        let mut out = zeros(block.nrows(), block.ncols());
        for r in self.clusters() {
            let len = r.len();
            out.view_mut((r.start, r.start), (len, len))
                .copy_from(&block.view((r.start, r.start), (len, len)));
        }
        out
    }

    /// `‖[B, Γ]‖`.
    pub fn gamma_commutator(&self, block: &ComplexMatrix) -> f64 {
        let g = self.gamma_matrix();
        operator_norm(&(block * &g - &g * block))
    }

    /// `P₀` in frame coordinates.
    pub fn p0_frame(&self) -> ComplexMatrix {
        let h = self.half();
        block2(&identity(h), &zeros(h, h), &zeros(h, h), &zeros(h, h))
    }

    /// `Q₀` in frame coordinates.
    pub fn q0_frame(&self) -> ComplexMatrix {
        let c2: Vec<f64> = self.cos.iter().map(|x| x * x).collect();
        let s2: Vec<f64> = self.sin.iter().map(|x| x * x).collect();
        let cs: Vec<f64> = self.cos.iter().zip(&self.sin).map(|(a, b)| a * b).collect();
        block2(&diag(&c2), &diag(&cs), &diag(&cs), &diag(&s2))
    }

    /// `A₀ = [[S², −CS],[−CS, −S²]]` in frame coordinates.
    pub fn a0_frame(&self) -> ComplexMatrix {
        let s2: Vec<f64> = self.sin.iter().map(|x| x * x).collect();
        let ncs: Vec<f64> = self.cos.iter().zip(&self.sin).map(|(a, b)| -a * b).collect();
        let ns2: Vec<f64> = s2.iter().map(|x| -x).collect();
        block2(&diag(&s2), &diag(&ncs), &diag(&ncs), &diag(&ns2))
    }

    /// `J₀ = sgn(A₀) = [[S, −C],[−C, −S]]` in frame coordinates.
    pub fn j0_frame(&self) -> ComplexMatrix {
        let nc: Vec<f64> = self.cos.iter().map(|x| -x).collect();
        let ns: Vec<f64> = self.sin.iter().map(|x| -x).collect();
        block2(&diag(&self.sin), &diag(&nc), &diag(&nc), &diag(&ns))
    }

    /// Davis symmetry `V₀ = [[C, S],[S, −C]]` of the base pair.
    pub fn v0_frame(&self) -> ComplexMatrix {
        let nc: Vec<f64> = self.cos.iter().map(|x| -x).collect();
        block2(&diag(&self.cos), &diag(&self.sin), &diag(&self.sin), &diag(&nc))
    }

    /// The symmetry `Σ = [[−S, C],[C, S]] = −J₀`.
    pub fn sigma_frame(&self) -> ComplexMatrix {
        -self.j0_frame()
    }

    /// Largest of the two congruence residuals against `gp`.
    pub fn residual(&self, gp: &GenericPair) -> f64 {
        let rp = operator_norm(&(self.to_frame(gp.p0.matrix()) - self.p0_frame()));
        let rq = operator_norm(&(self.to_frame(gp.q0.matrix()) - self.q0_frame()));
        rp.max(rq)
    }
}

/// Builds the Halmos frame of a certified generic pair.
///
/// Angles up to `π/4` are read from the positive eigenvectors of `A₀`
/// (eigenvalues `sin θ`), larger ones from those of `P₀+Q₀−1` (eigenvalues
/// `cos θ`), so both ends of `(0, π/2)` are resolved linearly. Projecting an
/// eigenvector onto `R(P₀)` gives `e_k`; the second copy of `L` is the
/// normalized image `(1−P₀)Q₀e_k / (cos θ_k sin θ_k)`.
pub fn halmos_frame(gp: &GenericPair, tol: &Tolerances) -> Result<Arc<HalmosFrame>> {
    let m = gp.dim();
    let h = m / 2;
    let p = gp.p0.matrix();
    let q = gp.q0.matrix();

    let adec = eigh(&gp.a0)?;
    let small: Vec<usize> = (0..m)
        .filter(|&k| adec.eigenvalues[k] > 0.0 && adec.eigenvalues[k] <= FRAC_1_SQRT_2)
        .collect();
    if small.len() > h {
        return Err(Error::GenericCertification(format!(
            "{} positive eigenvalues of A0 in a space of dimension {m}",
            small.len()
        )));
    }
    let bdec = eigh(&gp.sum_minus_one())?;
    let large: Vec<usize> = (0..m)
        .filter(|&k| bdec.eigenvalues[k] > 0.0)
        .take(h - small.len())
        .collect();
    if large.len() != h - small.len() {
        return Err(Error::GenericCertification(format!(
            "rank P0 = {} but dim H0 = {m}",
            small.len() + large.len()
        )));
    }

    let mut candidates: Vec<(f64, nalgebra::DVector<Complex64>)> = Vec::with_capacity(h);
    for &k in &small {
        let theta = adec.eigenvalues[k].clamp(-1.0, 1.0).asin();
        candidates.push((theta, p * adec.eigenvectors.column(k)));
    }
    for &k in &large {
        let theta = bdec.eigenvalues[k].clamp(-1.0, 1.0).acos();
        candidates.push((theta, p * bdec.eigenvectors.column(k)));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut e = zeros(m, h);
    for (slot, (_, v)) in candidates.iter().enumerate() {
        e.set_column(slot, v);
    }
    // symmetric orthonormalization keeps each e_k in its eigenspace
    let gram = HermitianMatrix::symmetrized(e.adjoint() * &e);
    let gram_min = eigh(&gram)?.eigenvalues.first().copied().unwrap_or(1.0);
    if gram_min <= 0.25 {
        return Err(Error::GenericCertification(format!(
            "range of P0 not spanned by eigenvector projections (Gram minimum {gram_min:.3e})"
        )));
    }
    let e = e * matrix_function(&gram, |x| 1.0 / x.sqrt())?.matrix();

    let complement = identity(m) - p;
    let mut basis = zeros(m, m);
    let mut gamma = Vec::with_capacity(h);
    for (slot, (theta, _)) in candidates.iter().enumerate() {
        let theta = *theta;
        if theta.sin() <= tol.rank_tol || theta.cos() <= tol.rank_tol {
            return Err(Error::DegenerateAngle { angle: theta });
        }
        let ek = e.column(slot).into_owned();
        let g = &complement * q * &ek;
        let cs = g.norm();
        basis.set_column(slot, &ek);
        basis.set_column(h + slot, &(g / c(cs)));
        gamma.push(theta);
    }
    let frame = HalmosFrame {
        w: basis.adjoint(),
        cos: gamma.iter().map(|t| t.cos()).collect(),
        sin: gamma.iter().map(|t| t.sin()).collect(),
        tan: gamma.iter().map(|t| t.tan()).collect(),
        gamma,
    };
    let residual = frame.residual(gp);
    // the second frame vector is a quotient by cos θ sin θ
    let min_cs = frame
        .cos
        .iter()
        .zip(&frame.sin)
        .fold(1.0f64, |a, (c, s)| a.min(c * s));
    if residual > FRAME_TOL + 64.0 * f64::EPSILON / min_cs {
        return Err(Error::GenericCertification(format!(
            "Halmos congruence residual {residual:.3e}"
        )));
    }
    Ok(Arc::new(frame))
}

/// Outcome of the membership test for the class of differences of
/// projections.
#[derive(Debug, Clone)]
pub struct DifferenceReport {
    pub is_difference: bool,
    pub diagnostic: String,
    pub witness: Option<ProjectionPair>,
}

impl DifferenceReport {
    fn rejected(diagnostic: String) -> Self {
        Self {
            is_difference: false,
            diagnostic,
            witness: None,
        }
    }
}

/// Tolerance for matching `+λ` with `−λ` in the generic spectrum.
pub const SPECTRAL_PAIRING_TOL: f64 = 1e-8;

/// Decides whether `A = P − Q` for some projections and, if so, builds a
/// witness pair.
///
/// The generic spectrum must be symmetric with multiplicities. Positive and
/// negative eigenvectors are paired in ascending `|λ|` order into a symmetry
/// `V` with `VA₀ = −A₀V`, and the witness is `P = P_{N(A−1)} ⊕ P_V`,
/// `Q = P_{N(A+1)} ⊕ Q_V` (zero on `N(A)`).
pub fn is_difference_of_projections(a: &HermitianMatrix, tol: &Tolerances) -> DifferenceReport {
    let split = match three_space_split(a, tol) {
        Ok(s) => s,
        Err(e) => return DifferenceReport::rejected(e.to_string()),
    };
    let n = a.dim();
    let g = &split.generic;
    let a0 = HermitianMatrix::symmetrized(g.adjoint() * a.matrix() * g);
    let dec = match eigh(&a0) {
        Ok(d) => d,
        Err(e) => return DifferenceReport::rejected(e.to_string()),
    };
    let mut positive: Vec<usize> = (0..dec.eigenvalues.len())
        .filter(|&k| dec.eigenvalues[k] > 0.0)
        .collect();
    let mut negative: Vec<usize> = (0..dec.eigenvalues.len())
        .filter(|&k| dec.eigenvalues[k] < 0.0)
        .collect();
    if positive.len() != negative.len() {
        return DifferenceReport::rejected(format!(
            "generic spectrum is not symmetric: {} positive vs {} negative eigenvalues",
            positive.len(),
            negative.len()
        ));
    }
    positive.sort_by(|&x, &y| dec.eigenvalues[x].total_cmp(&dec.eigenvalues[y]));
    negative.sort_by(|&x, &y| dec.eigenvalues[y].total_cmp(&dec.eigenvalues[x]));
    let m = dec.eigenvalues.len();
    let mut v = zeros(m, m);
    for (&kp, &kn) in positive.iter().zip(&negative) {
        let (lp, ln) = (dec.eigenvalues[kp], dec.eigenvalues[kn]);
        if (lp + ln).abs() > SPECTRAL_PAIRING_TOL {
            return DifferenceReport::rejected(format!(
                "eigenvalue {lp:.17e} has no partner at {:.17e} (closest {ln:.17e})",
                -lp
            ));
        }
        let e = dec.eigenvectors.column(kp);
        let f = dec.eigenvectors.column(kn);
        v += &e * f.adjoint() + &f * e.adjoint();
    }
    let mut p = &split.plus_one * split.plus_one.adjoint();
    let mut q = &split.minus_one * split.minus_one.adjoint();
    if m > 0 {
        let v = Symmetry::from_hermitian_unchecked(HermitianMatrix::symmetrized(v));
        let (p_v, q_v) = match davis::davis_projections(&a0, &v) {
            Ok(pq) => pq,
            Err(e) => return DifferenceReport::rejected(e.to_string()),
        };
        p += g * p_v * g.adjoint();
        q += g * q_v * g.adjoint();
    }
    debug_assert_eq!(p.nrows(), n);
    match validate_pair(p, q) {
        Ok(pair) => DifferenceReport {
            is_difference: true,
            diagnostic: format!(
                "generic dimension {m}; N(A) {}, N(A-1) {}, N(A+1) {}",
                split.null_a.ncols(),
                split.plus_one.ncols(),
                split.minus_one.ncols()
            ),
            witness: Some(pair),
        },
        Err(e) => DifferenceReport::rejected(e.to_string()),
    }
}

/// Cosine of the Friedrichs angle between `R(P)` and `R(Q)`:
/// `‖PQ − P_{R(P)∩R(Q)}‖`, with the intersection computed as the nullspace
/// of `(1−P) + (1−Q)`.
pub fn friedrichs_cos(pair: &ProjectionPair, tol: &Tolerances) -> Result<f64> {
    let n = pair.dim();
    let p = pair.p.matrix();
    let q = pair.q.matrix();
    let sum = HermitianMatrix::symmetrized(identity(n) * c(2.0) - p - q);
    let meet = nullspace_basis(&sum, tol.rank_tol)?;
    let meet_proj = &meet * meet.adjoint();
    Ok(operator_norm(&(p * q - meet_proj)))
}
