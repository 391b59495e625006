//! Seeded random generators: Haar unitaries, Hermitian matrices, and random
//! points of a fiber `D_{A0}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_PI_2;

use crate::decomp::GenericPair;
use crate::error::Result;
use crate::spectral::{
    block2, c, diag, eigh, zeros, ComplexMatrix, HermitianMatrix,
};
use crate::tol::Tolerances;

pub type SampleRng = ChaCha8Rng;

/// Derives an independent stream for trial `k` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, k: u64) -> SampleRng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k + 1);
    rng
}

pub fn rng(seed: u64) -> SampleRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::symmetrized(ginibre(n, rng))
}

pub fn random_anti_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rng);
    (&g - g.adjoint()) * c(0.5)
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let v = DMatrix::from_fn(n, 1, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = ginibre(n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Angles drawn uniformly from `[margin, π/2 − margin]`.
pub fn random_angles<R: Rng + ?Sized>(h: usize, margin: f64, rng: &mut R) -> Vec<f64> {
    (0..h)
        .map(|_| rng.random_range(margin..FRAC_PI_2 - margin))
        .collect()
}

/// The pair `W*·[[1,0],[0,0]]·W`, `W*·[[C²,CS],[CS,S²]]·W` for the given
/// principal angles and unitary `W`.
pub fn halmos_pair_matrices(angles: &[f64], w: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let h = angles.len();
    let cos: Vec<f64> = angles.iter().map(|t| t.cos()).collect();
    let sin: Vec<f64> = angles.iter().map(|t| t.sin()).collect();
    let c2: Vec<f64> = cos.iter().map(|x| x * x).collect();
    let s2: Vec<f64> = sin.iter().map(|x| x * x).collect();
    let cs: Vec<f64> = cos.iter().zip(&sin).map(|(a, b)| a * b).collect();
    let p = block2(&diag(&vec![1.0; h]), &zeros(h, h), &zeros(h, h), &zeros(h, h));
    let q = block2(&diag(&c2), &diag(&cs), &diag(&cs), &diag(&s2));
    (w.adjoint() * p * w, w.adjoint() * q * w)
}

/// A certified generic pair with the given angles, rotated by `W`.
pub fn generic_pair_from_angles(
    angles: &[f64],
    w: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<GenericPair> {
    let (p, q) = halmos_pair_matrices(angles, w);
    GenericPair::new(p, q, tol)
}

/// Random generic pair of dimension `m` (even) with angles in
/// `[0.05, π/2 − 0.05]` and a Haar-random Halmos frame.
pub fn random_generic_pair<R: Rng + ?Sized>(m: usize, rng: &mut R) -> GenericPair {
    let angles = random_angles(m / 2, 0.05, rng);
    let w = random_unitary(m, rng);
    generic_pair_from_angles(&angles, &w, &Tolerances::default())
        .expect("angles bounded away from 0 and π/2 give a generic pair")
}

/// Haar-random unitary in the commutant of `a0`: block-Haar on each
/// eigenvalue cluster of `a0` (clusters at relative tolerance `cluster_tol`).
pub fn random_commutant_unitary<R: Rng + ?Sized>(
    a0: &HermitianMatrix,
    cluster_tol: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let dec = eigh(a0)?;
    let n = a0.dim();
    let scale = dec.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let mut block = zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && dec.eigenvalues[end] - dec.eigenvalues[end - 1] <= cluster_tol * scale
        {
            end += 1;
        }
        let u = random_unitary(end - start, rng);
        block
            .view_mut((start, start), (end - start, end - start))
            .copy_from(&u);
        start = end;
    }
    let v = &dec.eigenvectors;
    Ok(v * block * v.adjoint())
}

/// A random point of the fiber of `gp`, obtained by a Haar-random commutant
/// unitary acting on `gp`.
pub fn random_fiber_pair<R: Rng + ?Sized>(
    gp: &GenericPair,
    rng: &mut R,
) -> Result<GenericPair> {
    let u = random_commutant_unitary(gp.a0(), 1e-9, rng)?;
    gp.conjugated(&u, &Tolerances::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{operator_norm, unitarity_residual};

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = rng(11);
        for n in [1, 3, 16] {
            assert!(unitarity_residual(&random_unitary(n, &mut r)) < 1e-13);
        }
    }

    #[test]
    fn commutant_unitary_commutes() {
        let mut r = rng(12);
        let gp = random_generic_pair(8, &mut r);
        let u = random_commutant_unitary(gp.a0(), 1e-9, &mut r).unwrap();
        let a = gp.a0().matrix();
        assert!(operator_norm(&(&u * a - a * &u)) < 1e-12);
    }

    #[test]
    fn trial_streams_differ() {
        let a: f64 = trial_rng(5, 0).random();
        let b: f64 = trial_rng(5, 1).random();
        let a2: f64 = trial_rng(5, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
