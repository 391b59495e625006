#![allow(dead_code)]

use proptest::prelude::*;

use projpairs::sample::{self, SampleRng};
use projpairs::spectral::{block2, diag, zeros, ComplexMatrix};
use projpairs::{GenericPair, ProjectionPair};

pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Even dimension of a generic part.
pub fn even_dim() -> impl Strategy<Value = usize> {
    (1usize..=6).prop_map(|h| 2 * h)
}

pub fn generic(m: usize, seed: u64) -> (GenericPair, SampleRng) {
    let mut rng = sample::rng(seed);
    let gp = sample::random_generic_pair(m, &mut rng);
    (gp, rng)
}

/// Counts of the four non-generic summands: R(P)∩R(Q), N(P)∩N(Q),
/// R(P)∩N(Q), N(P)∩R(Q).
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub both: usize,
    pub neither: usize,
    pub p_only: usize,
    pub q_only: usize,
}

pub fn layout() -> impl Strategy<Value = Layout> {
    (0usize..3, 0usize..3, 0usize..3, 0usize..3).prop_map(|(both, neither, p_only, q_only)| Layout {
        both,
        neither,
        p_only,
        q_only,
    })
}

/// A pair whose generic part is `gp` and whose other summands follow
/// `layout`, rotated by a Haar unitary.
pub fn embedded(gp: &GenericPair, layout: Layout, rng: &mut SampleRng) -> ProjectionPair {
    let m = gp.dim();
    let mut pd = Vec::new();
    let mut qd = Vec::new();
    for (count, p, q) in [
        (layout.both, 1.0, 1.0),
        (layout.neither, 0.0, 0.0),
        (layout.p_only, 1.0, 0.0),
        (layout.q_only, 0.0, 1.0),
    ] {
        pd.extend(std::iter::repeat_n(p, count));
        qd.extend(std::iter::repeat_n(q, count));
    }
    let k = pd.len();
    let n = m + k;
    let p = block2(gp.p0().matrix(), &zeros(m, k), &zeros(k, m), &diag(&pd));
    let q = block2(gp.q0().matrix(), &zeros(m, k), &zeros(k, m), &diag(&qd));
    let u = sample::random_unitary(n, rng);
    let conj = |x: ComplexMatrix| -> ComplexMatrix {
        let y = &u * x * u.adjoint();
        (&y + y.adjoint()) * num_complex::Complex64::new(0.5, 0.0)
    };
    projpairs::decomp::validate_pair(conj(p), conj(q)).expect("rotated projections")
}
