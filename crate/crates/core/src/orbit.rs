//! The commutant of `A₀` in Halmos coordinates, its unitary group acting on
//! the fiber, isotropy, and the conditional expectation onto the isotropy
//! algebra.

use rand::Rng;
use serde::Serialize;
use std::sync::Arc;

use crate::davis::{self, DavisSymmetry};
use crate::decomp::{self, GenericPair, HalmosFrame};
use crate::error::{Error, Result};
use crate::sample;
use crate::spectral::{
    block2, c, commutator, diag, eigh, identity, operator_norm, select_columns, sign,
    split_blocks, zeros, ComplexMatrix, HermitianMatrix,
};
use crate::tol::Tolerances;

/// Residual tolerance for commutant membership, relative to `max(1, ‖M‖)`.
pub const COMMUTANT_TOL: f64 = 1e-9;

/// An element of the commutant `{A₀}′` in Halmos form `[[X, Y],[Y, Z]]`.
#[derive(Debug, Clone)]
pub struct CommutantElement {
    pub frame: Arc<HalmosFrame>,
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl CommutantElement {
    /// Builds `[[X, Y],[Y, X + 2τY]]` from blocks commuting with `Γ`.
    pub fn from_blocks(
        frame: &Arc<HalmosFrame>,
        x: ComplexMatrix,
        y: ComplexMatrix,
    ) -> Result<Self> {
        for b in [&x, &y] {
            let residual = frame.gamma_commutator(b);
            if residual > COMMUTANT_TOL * operator_norm(b).max(1.0) {
                return Err(Error::NotCommutingWithGamma { residual });
            }
        }
        let z = &x + frame.tan_matrix() * &y * c(2.0);
        Ok(Self {
            frame: Arc::clone(frame),
            x,
            y,
            z,
        })
    }

    /// The element in frame coordinates.
    pub fn frame_matrix(&self) -> ComplexMatrix {
        block2(&self.x, &self.y, &self.y, &self.z)
    }

    /// The element in ambient `H₀` coordinates.
    pub fn ambient(&self) -> ComplexMatrix {
        self.frame.from_frame(&self.frame_matrix())
    }

    pub fn product(&self, other: &CommutantElement) -> Result<CommutantElement> {
        commutant_membership(&(self.ambient() * other.ambient()), &self.frame)
    }

    pub fn adjoint(&self) -> Result<CommutantElement> {
        commutant_membership(&self.ambient().adjoint(), &self.frame)
    }

    /// Largest pairwise commutator among `X`, `Y`, `Z`.
    pub fn block_commutator_residual(&self) -> f64 {
        let pairs = [(&self.x, &self.y), (&self.x, &self.z), (&self.y, &self.z)];
        pairs
            .iter()
            .map(|(a, b)| operator_norm(&commutator(a, b)))
            .fold(0.0, f64::max)
    }
}

/// Decomposes `m` in the Halmos frame and certifies membership in `{A₀}′`.
pub fn commutant_membership(m: &ComplexMatrix, frame: &Arc<HalmosFrame>) -> Result<CommutantElement> {
    if m.nrows() != frame.dim() || m.ncols() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: m.nrows(),
        });
    }
    let scale = COMMUTANT_TOL * operator_norm(m).max(1.0);
    let [x, y1, y2, z] = split_blocks(&frame.to_frame(m));
    let off = operator_norm(&(&y1 - &y2));
    if off > scale {
        return Err(Error::NotInCommutant { residual: off });
    }
    let y = (&y1 + &y2) * c(0.5);
    for b in [&x, &y, &z] {
        let residual = frame.gamma_commutator(b);
        if residual > scale {
            return Err(Error::NotInCommutant { residual });
        }
    }
    let link = frame.cos_matrix() * (&x - &z) + frame.sin_matrix() * &y * c(2.0);
    let residual = operator_norm(&link);
    if residual > scale {
        return Err(Error::NotInCommutant { residual });
    }
    Ok(CommutantElement {
        frame: Arc::clone(frame),
        x,
        y,
        z,
    })
}

/// Random commutant element with Gaussian blocks projected onto the
/// commutant of `Γ`.
pub fn random_commutant_element<R: Rng + ?Sized>(
    frame: &Arc<HalmosFrame>,
    rng: &mut R,
) -> CommutantElement {
    let h = frame.half();
    let x = frame.project_commuting(&sample::ginibre(h, rng));
    let y = frame.project_commuting(&sample::ginibre(h, rng));
    CommutantElement::from_blocks(frame, x, y).expect("projected blocks commute with the angles")
}

fn check_unitary_in_commutant(a0: &HermitianMatrix, u: &ComplexMatrix) -> Result<()> {
    let residual = operator_norm(&commutator(u, a0.matrix()));
    if residual > 1e-9 * a0.norm().max(1.0) {
        return Err(Error::NotInCommutant { residual });
    }
    Ok(())
}

/// A unitary `U ∈ {A₀}′` with `U·(P₀, Q₀)·U* = (P₀′, Q₀′)`.
///
/// `H₀` is split along `K = N(P₀ + Q₀′ − 1)`; on `K` the map is the
/// isometric part of `A₀`, on `K^⊥` it is `sgn(P₀ + Q₀′ − 1)·V`.
pub fn intertwining_unitary(
    gp0: &GenericPair,
    gp1: &GenericPair,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    gp0.check_same_difference(gp1)?;
    let m = gp0.dim();
    let cross = HermitianMatrix::symmetrized(
        gp0.p0().matrix() + gp1.q0().matrix() - identity(m),
    );
    let dec = eigh(&cross)?;
    let norm = dec.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let threshold = tol.rank_tol * norm.max(1.0);
    let null_idx: Vec<usize> = (0..m).filter(|&k| dec.eigenvalues[k].abs() <= threshold).collect();
    let rest_idx: Vec<usize> = (0..m).filter(|&k| dec.eigenvalues[k].abs() > threshold).collect();
    let kb = select_columns(&dec.eigenvectors, &null_idx);
    let rb = select_columns(&dec.eigenvectors, &rest_idx);

    let v = davis::pair_to_symmetry(gp0, tol)?;
    let signs: Vec<f64> = rest_idx.iter().map(|&k| dec.eigenvalues[k].signum()).collect();
    let sigma = &rb * diag(&signs) * rb.adjoint();
    let mut u = sigma * v.matrix() * &rb * rb.adjoint();
    if !null_idx.is_empty() {
        let a_k = HermitianMatrix::symmetrized(kb.adjoint() * gp0.a0().matrix() * &kb);
        let u2 = sign(&a_k, tol.gap_tol)?;
        u += &kb * u2.matrix() * kb.adjoint();
    }
    check_unitary_in_commutant(gp0.a0(), &u)?;
    Ok(u)
}

/// The continuous local section `sgn(P₀ + Q₀′ − 1)·V`.
pub fn local_cross_section(
    gp0: &GenericPair,
    gp1: &GenericPair,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    gp0.check_same_difference(gp1)?;
    let m = gp0.dim();
    let cross = HermitianMatrix::symmetrized(
        gp0.p0().matrix() + gp1.q0().matrix() - identity(m),
    );
    let sigma = sign(&cross, tol.gap_tol)?;
    let v = davis::pair_to_symmetry(gp0, tol)?;
    Ok(sigma.matrix() * v.matrix())
}

/// Conjugation residual `max(‖UP₀U* − P₀′‖, ‖UQ₀U* − Q₀′‖)`.
pub fn conjugation_residual(u: &ComplexMatrix, gp0: &GenericPair, gp1: &GenericPair) -> f64 {
    let p = u * gp0.p0().matrix() * u.adjoint();
    let q = u * gp0.q0().matrix() * u.adjoint();
    operator_norm(&(p - gp1.p0().matrix())).max(operator_norm(&(q - gp1.q0().matrix())))
}

/// Conditional expectation of `{A₀}′` onto the isotropy algebra of a pair,
/// `E(M) = ½P₀(M + WMW)P₀ + ½P₀^⊥(M + WMW)P₀^⊥` with `W = sgn(K)` and
/// `K = Q₀ − P₀Q₀P₀ − P₀^⊥Q₀P₀^⊥`.
#[derive(Debug, Clone)]
pub struct Expectation {
    a0: HermitianMatrix,
    p0: ComplexMatrix,
    w: ComplexMatrix,
}

impl Expectation {
    pub fn new(gp: &GenericPair, tol: &Tolerances) -> Result<Self> {
        let m = gp.dim();
        let p = gp.p0().matrix();
        let q = gp.q0().matrix();
        let perp = identity(m) - p;
        let k = HermitianMatrix::symmetrized(q - p * q * p - &perp * q * &perp);
        let w = sign(&k, tol.gap_tol)?;
        Ok(Self {
            a0: gp.a0().clone(),
            p0: p.clone(),
            w: w.matrix().clone(),
        })
    }

    /// The symmetry `W = sgn(K)`.
    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.a0.dim() || m.ncols() != self.a0.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.a0.dim(),
                found: m.nrows(),
            });
        }
        let residual = operator_norm(&commutator(m, self.a0.matrix()));
        if residual > COMMUTANT_TOL * operator_norm(m).max(1.0) {
            return Err(Error::NotInCommutant { residual });
        }
        let n = m.nrows();
        let perp = identity(n) - &self.p0;
        let sym = m + &self.w * m * &self.w;
        Ok((&self.p0 * &sym * &self.p0 + &perp * &sym * &perp) * c(0.5))
    }
}

pub fn conditional_expectation(
    m: &ComplexMatrix,
    gp: &GenericPair,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    Expectation::new(gp, tol)?.apply(m)
}

/// A unitary `diag(W′, W′)` in Halmos coordinates with `W′Γ = ΓW′`.
#[derive(Debug, Clone)]
pub struct IsotropyElement {
    pub wp: ComplexMatrix,
    pub ambient: ComplexMatrix,
}

/// Block-Haar unitary on each angle cluster, lifted to `diag(W′, W′)`.
pub fn isotropy_sample<R: Rng + ?Sized>(frame: &HalmosFrame, rng: &mut R) -> IsotropyElement {
    let h = frame.half();
    let mut wp = zeros(h, h);
    for r in frame.clusters() {
        let len = r.len();
        wp.view_mut((r.start, r.start), (len, len))
            .copy_from(&sample::random_unitary(len, rng));
    }
    let ambient = frame.from_frame(&block2(&wp, &zeros(h, h), &zeros(h, h), &wp));
    IsotropyElement { wp, ambient }
}

/// Whether a unitary of `{A₀}′` fixes `P₀` (and hence `Q₀`).
pub fn fixes_pair(u: &ComplexMatrix, gp: &GenericPair, tol: f64) -> bool {
    operator_norm(&commutator(u, gp.p0().matrix())) <= tol
        && operator_norm(&commutator(u, gp.q0().matrix())) <= tol
}

/// The four numerical closed-range conditions. Each is reported both as a
/// raw gap and as the principal angle it implies.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedRangeReport {
    pub generic_dim: usize,
    pub threshold: f64,
    /// Smallest principal angle, from the Halmos frame.
    pub min_angle: f64,
    /// Smallest `|λ|` of `P₀Q₀P₀ − P₀` on `R(P₀)` (equals `min sin²θ`).
    pub compression_gap: f64,
    /// Smallest `|λ|` of `P₀ + Q₀ − 1` (equals `min cos θ`).
    pub sum_gap: f64,
    /// Smallest `|λ|` of `1 − A₀²` on `H₀` (equals `min cos²θ`).
    pub defect_gap: f64,
    /// Angles stay away from 0: `Γ` and `P₀Q₀P₀ − P₀` are invertible.
    pub angles_bounded_below: bool,
    /// Angles stay away from π/2: `P₀ + Q₀ − 1` and `1 − A₀²` are invertible.
    pub angles_bounded_above: bool,
    pub closed: bool,
}

/// Evaluates the closed-range conditions for `A` at an angle `threshold`.
///
/// The conditions come in two coupled groups: invertibility of `Γ` agrees
/// with that of `P₀Q₀P₀ − P₀` on `R(P₀)`, and invertibility of `P₀+Q₀−1`
/// agrees with that of `1 − A₀²`. Disagreement within a group beyond the
/// tolerance coupling is an [`Error::InconsistentReport`].
pub fn closed_range_report(
    a: &HermitianMatrix,
    threshold: f64,
    tol: &Tolerances,
) -> Result<ClosedRangeReport> {
    let report = decomp::is_difference_of_projections(a, tol);
    let pair = report
        .witness
        .ok_or_else(|| Error::InvalidInput(report.diagnostic.clone()))?;
    let gp = match decomp::generic_part(&pair, tol) {
        Ok(gp) => gp,
        Err(Error::EmptyGenericPart) => {
            return Ok(ClosedRangeReport {
                generic_dim: 0,
                threshold,
                min_angle: std::f64::consts::FRAC_PI_2,
                compression_gap: 1.0,
                sum_gap: 1.0,
                defect_gap: 1.0,
                angles_bounded_below: true,
                angles_bounded_above: true,
                closed: true,
            })
        }
        Err(e) => return Err(e),
    };
    generic_closed_range_report(&gp, threshold, tol)
}

fn min_abs(values: &[f64]) -> f64 {
    values.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()))
}

/// [`closed_range_report`] for an already extracted generic pair.
pub fn generic_closed_range_report(
    gp: &GenericPair,
    threshold: f64,
    tol: &Tolerances,
) -> Result<ClosedRangeReport> {
    let m = gp.dim();
    let frame = decomp::halmos_frame(gp, tol)?;
    let min_angle = frame.gamma.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let max_angle = frame.gamma.iter().fold(0.0f64, |a, &x| a.max(x));

    let p = gp.p0().matrix();
    let range = eigh(gp.p0())?.columns_where(|x| x > 0.5);
    let compression = HermitianMatrix::symmetrized(
        range.adjoint() * (p * gp.q0().matrix() * p - p) * &range,
    );
    let compression_gap = min_abs(&eigh(&compression)?.eigenvalues);
    let sum_gap = min_abs(&eigh(&gp.sum_minus_one())?.eigenvalues);
    let a = gp.a0().matrix();
    let defect = HermitianMatrix::symmetrized(identity(m) - a * a);
    let defect_gap = min_abs(&eigh(&defect)?.eigenvalues);

    let below = [min_angle, compression_gap.max(0.0).sqrt().asin()];
    let above = [
        std::f64::consts::FRAC_PI_2 - max_angle,
        std::f64::consts::FRAC_PI_2 - sum_gap.min(1.0).acos(),
        std::f64::consts::FRAC_PI_2 - defect_gap.max(0.0).sqrt().min(1.0).acos(),
    ];
    const COUPLING: f64 = 1e-7;
    let group = |name: &str, implied: &[f64]| -> Result<bool> {
        let verdicts: Vec<bool> = implied.iter().map(|&x| x > threshold).collect();
        let agree = verdicts.iter().all(|&v| v == verdicts[0]);
        let spread = implied.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x))
            - implied.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        if !agree && spread > COUPLING {
            return Err(Error::InconsistentReport(format!(
                "{name}: implied angles {implied:?} straddle threshold {threshold:e}"
            )));
        }
        Ok(verdicts.iter().all(|&v| v))
    };
    let angles_bounded_below = group("lower angle bound", &below)?;
    let angles_bounded_above = group("upper angle bound", &above)?;
    Ok(ClosedRangeReport {
        generic_dim: m,
        threshold,
        min_angle,
        compression_gap,
        sum_gap,
        defect_gap,
        angles_bounded_below,
        angles_bounded_above,
        closed: angles_bounded_below && angles_bounded_above,
    })
}

/// `(‖P₀ + Q₀‖, ‖P₀′ + Q₀′‖)`.
pub fn sum_norm_invariance(gp0: &GenericPair, gp1: &GenericPair) -> Result<(f64, f64)> {
    gp0.check_same_difference(gp1)?;
    let n0 = operator_norm(&(gp0.p0().matrix() + gp0.q0().matrix()));
    let n1 = operator_norm(&(gp1.p0().matrix() + gp1.q0().matrix()));
    Ok((n0, n1))
}

/// The pair obtained from `gp` by replacing its Davis symmetry with `v`.
pub fn pair_from_symmetry(gp: &GenericPair, v: &DavisSymmetry, tol: &Tolerances) -> Result<GenericPair> {
    davis::symmetry_to_pair(gp.a0(), v, tol)
}
