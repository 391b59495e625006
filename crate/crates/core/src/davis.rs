//! Davis correspondence on the generic part: pairs, anti-commuting
//! symmetries, co-diagonal subspaces and co-diagonal projections.

use crate::decomp::GenericPair;
use crate::error::{Error, Result};
use crate::spectral::{
    anticommutator, c, eigh, identity, operator_norm, sign, sqrt_psd, ComplexMatrix,
    HermitianMatrix, Symmetry,
};
use crate::tol::Tolerances;

/// Relative anti-commutation tolerance `‖VA₀ + A₀V‖ ≤ TOL·‖A₀‖`.
pub const ANTICOMMUTATION_TOL: f64 = 1e-9;
/// Relative tolerance for the co-diagonal conditions.
pub const CODIAGONAL_TOL: f64 = 1e-9;

/// A symmetry `V` with `VA₀ = −A₀V`.
#[derive(Debug, Clone)]
pub struct DavisSymmetry {
    v: Symmetry,
}

fn anticommutation_residual(a0: &HermitianMatrix, v: &ComplexMatrix) -> f64 {
    operator_norm(&anticommutator(v, a0.matrix()))
}

impl DavisSymmetry {
    /// Certifies `V² = 1` and anti-commutation with `a0`.
    pub fn new(a0: &HermitianMatrix, v: Symmetry) -> Result<Self> {
        if v.dim() != a0.dim() {
            return Err(Error::DimensionMismatch {
                expected: a0.dim(),
                found: v.dim(),
            });
        }
        let residual = anticommutation_residual(a0, v.matrix());
        if residual > ANTICOMMUTATION_TOL * a0.norm().max(1.0) {
            return Err(Error::AnticommutationViolated { residual });
        }
        let n = v.dim();
        let square = operator_norm(&(v.matrix() * v.matrix() - identity(n)));
        if square > 1e-10 {
            return Err(Error::NotUnitary { residual: square });
        }
        Ok(Self { v })
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.v
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.v.matrix()
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }
}

/// `(1 − A₀²)^{1/2}`, clamping roundoff below zero.
pub fn defect(a0: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = a0.dim();
    let m = HermitianMatrix::symmetrized(identity(n) - a0.matrix() * a0.matrix());
    sqrt_psd(&m, 1e-10)
}

/// `P_V = ½(1 + A₀ + (1−A₀²)^{1/2}V)`, `Q_V = ½(1 − A₀ + (1−A₀²)^{1/2}V)`.
pub fn davis_projections(
    a0: &HermitianMatrix,
    v: &Symmetry,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a0.dim();
    let d = defect(a0)?;
    let dv = d.matrix() * v.matrix();
    let one = identity(n);
    let p = (&one + a0.matrix() + &dv) * c(0.5);
    let q = (&one - a0.matrix() + &dv) * c(0.5);
    Ok((p, q))
}

/// `V = sgn(P₀ + Q₀ − 1)`.
pub fn pair_to_symmetry(gp: &GenericPair, tol: &Tolerances) -> Result<DavisSymmetry> {
    let v = sign(&gp.sum_minus_one(), tol.gap_tol)?;
    DavisSymmetry::new(gp.a0(), v)
}

/// Inverse of [`pair_to_symmetry`].
pub fn symmetry_to_pair(
    a0: &HermitianMatrix,
    v: &DavisSymmetry,
    tol: &Tolerances,
) -> Result<GenericPair> {
    let residual = anticommutation_residual(a0, v.matrix());
    if residual > ANTICOMMUTATION_TOL * a0.norm().max(1.0) {
        return Err(Error::AnticommutationViolated { residual });
    }
    let (p, q) = davis_projections(a0, v.symmetry())?;
    GenericPair::new(p, q, tol)
}

/// `max(‖E A₀ E‖, ‖(1−E) A₀ (1−E)‖)`.
fn codiagonal_residual(e: &ComplexMatrix, a0: &HermitianMatrix) -> f64 {
    let n = a0.dim();
    let f = identity(n) - e;
    let a = a0.matrix();
    operator_norm(&(e * a * e)).max(operator_norm(&(&f * a * &f)))
}

/// Orthonormal basis of the `+1` eigenspace of `V`.
pub fn symmetry_to_subspace(v: &DavisSymmetry, a0: &HermitianMatrix) -> Result<ComplexMatrix> {
    let basis = eigh(v.symmetry().hermitian())?.columns_where(|x| x > 0.0);
    let residual = codiagonal_residual(&(&basis * basis.adjoint()), a0);
    if residual > CODIAGONAL_TOL * a0.norm().max(1.0) {
        return Err(Error::NotCodiagonal { residual });
    }
    Ok(basis)
}

/// `V = 2P_S − 1` for a subspace with `A₀S ⊂ S^⊥` and `A₀S^⊥ ⊂ S`.
pub fn subspace_to_symmetry(basis: &ComplexMatrix, a0: &HermitianMatrix) -> Result<DavisSymmetry> {
    if basis.nrows() != a0.dim() {
        return Err(Error::DimensionMismatch {
            expected: a0.dim(),
            found: basis.nrows(),
        });
    }
    let e = basis * basis.adjoint();
    let residual = codiagonal_residual(&e, a0);
    if residual > CODIAGONAL_TOL * a0.norm().max(1.0) {
        return Err(Error::NotCodiagonal { residual });
    }
    DavisSymmetry::new(a0, Symmetry::from_projection(&e))
}

/// Whether `EA₀E = (1−E)A₀(1−E) = 0` within `tol · ‖A₀‖`.
pub fn codiagonal_projection_check(e: &HermitianMatrix, a0: &HermitianMatrix, tol: f64) -> bool {
    e.dim() == a0.dim() && codiagonal_residual(e.matrix(), a0) <= tol * a0.norm()
}

/// `J₀ = sgn(A₀)`, the isometric part of `A₀`.
pub fn j0(a0: &HermitianMatrix, tol: &Tolerances) -> Result<Symmetry> {
    sign(a0, tol.gap_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::halmos_frame;
    use crate::sample;
    use crate::spectral::{diag, zeros};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn theta_gp(theta: f64) -> GenericPair {
        sample::generic_pair_from_angles(&[theta], &identity(2), &Tolerances::default()).unwrap()
    }

    fn swap() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    #[test]
    fn pair_to_symmetry_theta() {
        let tol = Tolerances::default();
        for theta in [0.2, FRAC_PI_4, 1.3] {
            let v = pair_to_symmetry(&theta_gp(theta), &tol).unwrap();
            let (ct, st) = (theta.cos(), theta.sin());
            let expected = ComplexMatrix::from_row_slice(2, 2, &[c(ct), c(st), c(st), c(-ct)]);
            assert!(operator_norm(&(v.matrix() - expected)) < 1e-12, "theta={theta}");
        }
        let v = pair_to_symmetry(&theta_gp(FRAC_PI_4), &tol).unwrap();
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)])
            * c(FRAC_1_SQRT_2);
        assert!(operator_norm(&(v.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn symmetry_intertwines_p_and_q() {
        let tol = Tolerances::default();
        let mut rng = sample::rng(31);
        for m in [2, 6, 16] {
            let gp = sample::random_generic_pair(m, &mut rng);
            let v = pair_to_symmetry(&gp, &tol).unwrap();
            let vm = v.matrix();
            assert!(operator_norm(&(vm * gp.p0().matrix() * vm - gp.q0().matrix())) < 1e-9);
            let a = gp.a0().matrix();
            assert!(operator_norm(&(vm * a * vm + a)) < 1e-9);
        }
    }

    #[test]
    fn symmetry_to_pair_scalar() {
        let tol = Tolerances::default();
        let lambda = 0.6;
        let a0 = HermitianMatrix::from_real_diagonal(&[lambda, -lambda]);
        let v = DavisSymmetry::new(&a0, Symmetry::new(swap(), 1e-12).unwrap()).unwrap();
        let gp = symmetry_to_pair(&a0, &v, &tol).unwrap();
        let r = (1.0 - lambda * lambda).sqrt();
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0 + lambda), c(r), c(r), c(1.0 - lambda)],
        ) * c(0.5);
        assert!(operator_norm(&(gp.p0().matrix() - expected)) < 1e-14);
        assert!(operator_norm(&(gp.a0().matrix() - a0.matrix())) < 1e-14);
    }

    #[test]
    fn symmetry_to_pair_rejects_commuting() {
        let a0 = HermitianMatrix::from_real_diagonal(&[0.5, -0.5]);
        let v = Symmetry::new(diag(&[1.0, -1.0]), 1e-12).unwrap();
        assert!(matches!(
            DavisSymmetry::new(&a0, v),
            Err(Error::AnticommutationViolated { .. })
        ));
    }

    #[test]
    fn empty_symmetry_gives_empty_pair() {
        let tol = Tolerances::default();
        let a0 = HermitianMatrix::symmetrized(zeros(0, 0));
        let v = DavisSymmetry::new(&a0, Symmetry::new(zeros(0, 0), 1e-12).unwrap()).unwrap();
        let gp = symmetry_to_pair(&a0, &v, &tol).unwrap();
        assert_eq!(gp.dim(), 0);
    }

    #[test]
    fn round_trip_random() {
        let tol = Tolerances::default();
        let mut rng = sample::rng(32);
        for m in [2, 8, 32] {
            let gp = sample::random_generic_pair(m, &mut rng);
            let v = pair_to_symmetry(&gp, &tol).unwrap();
            let back = symmetry_to_pair(gp.a0(), &v, &tol).unwrap();
            assert!(gp.distance_to(&back) < 1e-9, "m={m}");
        }
    }

    #[test]
    fn subspace_examples() {
        let a0 = HermitianMatrix::from_real_diagonal(&[0.5, -0.5]);
        let v = DavisSymmetry::new(&a0, Symmetry::new(swap(), 1e-12).unwrap()).unwrap();
        let s = symmetry_to_subspace(&v, &a0).unwrap();
        assert_eq!(s.ncols(), 1);
        let expected = ComplexMatrix::from_row_slice(2, 1, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
        assert!((s.adjoint() * &expected)[(0, 0)].norm() > 1.0 - 1e-14);
        let back = subspace_to_symmetry(&s, &a0).unwrap();
        assert!(operator_norm(&(back.matrix() - swap())) < 1e-14);

        let e1 = ComplexMatrix::from_row_slice(2, 1, &[c(1.0), c(0.0)]);
        assert!(matches!(
            subspace_to_symmetry(&e1, &a0),
            Err(Error::NotCodiagonal { .. })
        ));
        assert!(matches!(
            subspace_to_symmetry(&zeros(2, 0), &a0),
            Err(Error::NotCodiagonal { .. })
        ));
    }

    #[test]
    fn subspace_has_half_dimension() {
        let tol = Tolerances::default();
        let mut rng = sample::rng(33);
        for m in [4, 10, 24] {
            let gp = sample::random_generic_pair(m, &mut rng);
            let v = pair_to_symmetry(&gp, &tol).unwrap();
            let s = symmetry_to_subspace(&v, gp.a0()).unwrap();
            assert_eq!(s.ncols(), m / 2);
            let back = subspace_to_symmetry(&s, gp.a0()).unwrap();
            assert!(operator_norm(&(back.matrix() - v.matrix())) < 1e-10);
        }
    }

    #[test]
    fn codiagonal_examples() {
        let tol = Tolerances::default();
        let gp = theta_gp(FRAC_PI_4);
        let v = pair_to_symmetry(&gp, &tol).unwrap();
        let s = symmetry_to_subspace(&v, gp.a0()).unwrap();
        let e = HermitianMatrix::symmetrized(&s * s.adjoint());
        assert!(codiagonal_projection_check(&e, gp.a0(), 1e-9));
        assert!(!codiagonal_projection_check(gp.p0(), gp.a0(), 1e-9));
        let zero = HermitianMatrix::symmetrized(zeros(2, 2));
        assert!(!codiagonal_projection_check(&zero, gp.a0(), 1e-9));
    }

    #[test]
    fn j0_examples() {
        let tol = Tolerances::default();
        let j = j0(&HermitianMatrix::from_real_diagonal(&[0.3, -0.3]), &tol).unwrap();
        assert!(operator_norm(&(j.matrix() - diag(&[1.0, -1.0]))) < 1e-15);

        let mut rng = sample::rng(34);
        let gp = sample::random_generic_pair(8, &mut rng);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let j = j0(gp.a0(), &tol).unwrap();
        assert!(operator_norm(&(frame.to_frame(j.matrix()) - frame.j0_frame())) < 1e-9);
        let v = pair_to_symmetry(&gp, &tol).unwrap();
        assert!(operator_norm(&anticommutator(v.matrix(), j.matrix())) < 1e-9);
    }

    #[test]
    fn defect_norm_is_independent_of_v() {
        let tol = Tolerances::default();
        let mut rng = sample::rng(35);
        let gp = sample::random_generic_pair(6, &mut rng);
        let d = defect(gp.a0()).unwrap().norm();
        for _ in 0..5 {
            let other = sample::random_fiber_pair(&gp, &mut rng).unwrap();
            let s = other.sum_minus_one().norm();
            assert!((s - d).abs() < 1e-10);
            let _ = pair_to_symmetry(&other, &tol).unwrap();
        }
    }
}
