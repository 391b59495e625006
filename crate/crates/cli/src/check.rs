//! Invariant battery run by `projpairs check`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Serialize;

use projpairs::davis::{self, pair_to_symmetry, symmetry_to_pair};
use projpairs::decomp::{self, friedrichs_cos, halmos_frame, ProjectionPair, FRAME_TOL};
use projpairs::geodesics::{exp_pair, finsler_norm, log_pair, minimality_certificate, random_horizontal};
use projpairs::orbit::{conjugation_residual, intertwining_unitary, sum_norm_invariance, Expectation};
use projpairs::sample;
use projpairs::spectral::{anticommutator, eigh, identity, operator_norm, unitarity_residual, HermitianMatrix};
use projpairs::{Error, GenericPair, Tolerances};

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: &'static str,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub trials: usize,
    pub dim: usize,
    pub generic_dim: usize,
    pub invariants: Vec<Invariant>,
    pub pass: bool,
}

struct Battery(Vec<Invariant>);

impl Battery {
    /// Records `residual ≤ bound`; NaN fails.
    fn at_most(&mut self, name: &'static str, residual: f64, bound: f64) {
        self.0.push(Invariant {
            name,
            residual,
            bound,
            pass: residual <= bound,
        });
    }

    /// Records `value > bound`.
    fn above(&mut self, name: &'static str, value: f64, bound: f64) {
        self.0.push(Invariant {
            name,
            residual: value,
            bound,
            pass: value > bound,
        });
    }

    fn max_over<T>(
        &mut self,
        name: &'static str,
        bound: f64,
        items: impl IntoIterator<Item = T>,
        f: impl FnMut(T) -> Result<f64, Error>,
    ) -> Result<(), Error> {
        let worst = items.into_iter().map(f).try_fold(0.0f64, |acc, r| {
            r.map(|x| if x.is_nan() { f64::INFINITY } else { acc.max(x) })
        })?;
        self.at_most(name, worst, bound);
        Ok(())
    }
}

pub fn run(pair: &ProjectionPair, trials: usize, seed: u64, tol: &Tolerances) -> Result<CheckReport, Error> {
    let mut b = Battery(Vec::new());
    b.at_most("kato_identity", pair.kato_residual(), 1e-10);
    let (split, gp) = match decomp::generic_part_with_split(pair, tol) {
        Ok((split, gp)) => (split, Some(gp)),
        Err(Error::EmptyGenericPart) => (decomp::three_space_split(&pair.difference(), tol)?, None),
        Err(e) => return Err(e),
    };
    let a0 = gp.as_ref().map_or_else(|| identity(0), |g| g.a0().matrix().clone());
    let a = pair.difference();
    b.at_most(
        "split_reassembles_difference",
        operator_norm(&(split.reassemble(&a0) - a.matrix())),
        1e-9,
    );
    if let Some(gp) = &gp {
        generic_battery(&mut b, pair, gp, trials, seed, tol)?;
    }
    let pass = b.0.iter().all(|i| i.pass);
    Ok(CheckReport {
        seed,
        trials,
        dim: pair.dim(),
        generic_dim: split.generic_dim(),
        invariants: b.0,
        pass,
    })
}

fn generic_battery(
    b: &mut Battery,
    pair: &ProjectionPair,
    gp: &GenericPair,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<(), Error> {
    let m = gp.dim();
    let a0 = gp.a0();
    let frame = halmos_frame(gp, tol)?;
    b.at_most("halmos_congruence", frame.residual(gp), FRAME_TOL);

    let ev = eigh(a0)?.eigenvalues;
    let asym = (0..m / 2).fold(0.0f64, |acc, k| acc.max((ev[k] + ev[m - 1 - k]).abs()));
    b.at_most("spectral_symmetry", asym, 1e-9);

    let v = pair_to_symmetry(gp, tol)?;
    b.at_most(
        "davis_anticommutation",
        operator_norm(&anticommutator(v.matrix(), a0.matrix())) / a0.norm().max(1.0),
        1e-9,
    );
    b.at_most("davis_round_trip", symmetry_to_pair(a0, &v, tol)?.distance_to(gp), 1e-9);
    let s = davis::symmetry_to_subspace(&v, a0)?;
    let v2 = davis::subspace_to_symmetry(&s, a0)?;
    b.at_most("subspace_round_trip", operator_norm(&(v2.matrix() - v.matrix())), 1e-10);
    let j0 = davis::j0(a0, tol)?;
    b.at_most("j0_anticommutation", operator_norm(&anticommutator(v.matrix(), j0.matrix())), 1e-9);

    let norm_c = frame.cos.iter().fold(0.0f64, |acc, &x| acc.max(x));
    b.at_most("friedrichs_equals_norm_c", (friedrichs_cos(pair, tol)? - norm_c).abs(), 1e-8);

    let e = Expectation::new(gp, tol)?;
    let one = identity(m);
    b.at_most("expectation_unital", operator_norm(&(e.apply(&one)? - &one)), 1e-10);

    let mut rng = sample::rng(seed);
    let mut fiber = Vec::with_capacity(trials);
    for _ in 0..trials {
        fiber.push(sample::random_fiber_pair(gp, &mut rng)?);
    }
    b.max_over("intertwiner_unitarity", 1e-10, &fiber, |g1| {
        Ok(unitarity_residual(&intertwining_unitary(gp, g1, tol)?))
    })?;
    b.max_over("transitivity", 1e-8, &fiber, |g1| {
        Ok(conjugation_residual(&intertwining_unitary(gp, g1, tol)?, gp, g1))
    })?;
    b.max_over("sum_norm_invariance", 1e-8, &fiber, |g1| {
        let (n0, n1) = sum_norm_invariance(gp, g1)?;
        Ok((n0 - n1).abs())
    })?;
    let mut straddle = f64::INFINITY;
    for g1 in &fiber {
        if g1.distance_to(gp) <= 1e-6 {
            continue;
        }
        let d = HermitianMatrix::symmetrized(
            g1.p0().matrix() + g1.q0().matrix() - gp.p0().matrix() - gp.q0().matrix(),
        );
        let ev = eigh(&d)?.eigenvalues;
        straddle = straddle.min(ev[ev.len() - 1]).min(-ev[0]);
    }
    if straddle.is_finite() {
        b.above("non_comparability_straddle", straddle, 1e-8);
    }
    b.max_over("friedrichs_constancy", 1e-8, &fiber, |g1| {
        Ok((friedrichs_cos(&g1.as_projection_pair(), tol)? - norm_c).abs())
    })?;

    let mut tangents = Vec::with_capacity(trials);
    for _ in 0..trials {
        let norm = rng.random_range(0.0..FRAC_PI_2 - 0.05);
        tangents.push(random_horizontal(&frame, norm, &mut rng));
    }
    b.max_over("log_exp_identity", 1e-8, &tangents, |ht| {
        let target = exp_pair(gp, ht, 1.0, tol)?;
        Ok(operator_norm(&(log_pair(gp, &frame, &target, tol)?.z() - ht.z())))
    })?;
    b.max_over("log_norm_bound", FRAC_PI_2 + 1e-9, &fiber, |g1| {
        Ok(finsler_norm(&log_pair(gp, &frame, g1, tol)?))
    })?;
    b.max_over("exp_log_hits_target", 1e-7, &fiber, |g1| {
        let z = log_pair(gp, &frame, g1, tol)?;
        Ok(exp_pair(gp, &z, 1.0, tol)?.distance_to(g1))
    })?;
    let mut worst_margin = 0.0f64;
    for ht in &tangents {
        match minimality_certificate(ht, 20, &mut rng) {
            Ok(r) => worst_margin = worst_margin.max(-r.margin),
            Err(Error::CertificateFailed { z_norm, perturbed_norm }) => {
                worst_margin = worst_margin.max(z_norm - perturbed_norm)
            }
            Err(e) => return Err(e),
        }
    }
    b.at_most("minimality_violation", worst_margin, 1e-9);
    Ok(())
}
