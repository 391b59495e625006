//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use projpairs::davis::{
    self, codiagonal_projection_check, pair_to_symmetry, subspace_to_symmetry,
    symmetry_to_pair, symmetry_to_subspace, DavisSymmetry,
};
use projpairs::decomp::{friedrichs_cos, halmos_frame, validate_pair, GenericPair};
use projpairs::gallery;
use projpairs::geodesics::{
    exp_pair, exp_unitary_closed_form, exp_unitary_intrinsic, finsler_norm, geodesic_distance,
    horizontal_from_block, log_pair, minimality_certificate, random_horizontal,
};
use projpairs::orbit::{conjugation_residual, intertwining_unitary, sum_norm_invariance};
use projpairs::sample::{self, SampleRng};
use projpairs::spectral::{
    anticommutator, block2, commutator, eigh, expm, identity, operator_norm, range_projection,
    unitarity_residual, zeros, ComplexMatrix, HermitianMatrix, Symmetry,
};
use projpairs::Tolerances;

const SIZES: [usize; 6] = [2, 4, 8, 16, 32, 64];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Max of a residual and whether it stayed within `bound`.
struct Worst {
    value: f64,
    bound: f64,
}

impl Worst {
    fn new(bound: f64) -> Self {
        Worst { value: 0.0, bound }
    }

    fn see(&mut self, x: f64) {
        // NaN must count as a failure
        if x.is_nan() || x > self.value {
            self.value = if x.is_nan() { f64::INFINITY } else { x };
        }
    }

    fn ok(&self) -> bool {
        self.value <= self.bound
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// A second pair over the same `A₀` via a random phase vector in the
/// ω-parametrization (independent of the commutant construction).
fn omega_partner(gp: &GenericPair, rng: &mut SampleRng) -> GenericPair {
    let om = gallery::omega_parametrization(gp.a0()).expect("random spectrum is simple");
    let phases: Vec<Complex64> = (0..om.len())
        .map(|_| Complex64::from_polar(1.0, rng.random_range(-PI..PI)))
        .collect();
    let v = DavisSymmetry::new(gp.a0(), om.symmetry(&phases).unwrap()).unwrap();
    symmetry_to_pair(gp.a0(), &v, &tol()).unwrap()
}

fn flipped(gp: &GenericPair) -> GenericPair {
    let v = pair_to_symmetry(gp, &tol()).unwrap();
    let w = DavisSymmetry::new(gp.a0(), Symmetry::new(-v.matrix().clone(), 1e-10).unwrap()).unwrap();
    symmetry_to_pair(gp.a0(), &w, &tol()).unwrap()
}

fn criterion_1() -> Outcome {
    let tol = tol();
    let mut round = Worst::new(1e-9);
    let mut anti = Worst::new(1e-9);
    for k in 0..200u64 {
        let mut rng = sample::trial_rng(1, k);
        let m = SIZES[k as usize % SIZES.len()];
        let gp = sample::random_generic_pair(m, &mut rng);
        let a0 = gp.a0();
        let scale = a0.norm();

        // pair → V → pair
        let v = pair_to_symmetry(&gp, &tol).unwrap();
        anti.see(operator_norm(&anticommutator(v.matrix(), a0.matrix())) / scale);
        let back = symmetry_to_pair(a0, &v, &tol).unwrap();
        round.see(back.distance_to(&gp));

        // V → S → V
        let s = symmetry_to_subspace(&v, a0).unwrap();
        let from_s = subspace_to_symmetry(&s, a0).unwrap();
        round.see(operator_norm(&(from_s.matrix() - v.matrix())));

        // S → E → V
        let e = HermitianMatrix::symmetrized(range_projection(&s));
        if !codiagonal_projection_check(&e, a0, 1e-9) {
            round.see(f64::INFINITY);
        }
        let from_e = e.matrix() * Complex64::new(2.0, 0.0) - identity(m);
        round.see(operator_norm(&(&from_e - v.matrix())));

        // V → Q₀ relation and J₀
        round.see(operator_norm(&(v.matrix() * gp.p0().matrix() * v.matrix() - gp.q0().matrix())));
        let j0 = davis::j0(a0, &tol).unwrap();
        anti.see(operator_norm(&anticommutator(v.matrix(), j0.matrix())));
    }
    outcome(
        round.ok() && anti.ok(),
        format!(
            "round trip {:.3e} (≤ 1e-9), anti-commutation {:.3e} (≤ 1e-9)",
            round.value, anti.value
        ),
    )
}

fn random_projection(n: usize, rank: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let u = sample::random_unitary(n, rng);
    let basis = u.columns(0, rank).into_owned();
    range_projection(&basis)
}

fn criterion_2() -> Outcome {
    let tol = tol();
    let mut kato = Worst::new(1e-10);
    let mut count = 0usize;
    let mut see = |pair: &projpairs::ProjectionPair, w: &mut Worst| {
        w.see(pair.kato_residual());
        count += 1;
    };
    for k in 0..60u64 {
        let mut rng = sample::trial_rng(2, k);
        let m = SIZES[k as usize % SIZES.len()];
        let gp = sample::random_generic_pair(m, &mut rng);
        see(&gp.as_projection_pair(), &mut kato);
        let fiber = sample::random_fiber_pair(&gp, &mut rng).unwrap();
        see(&fiber.as_projection_pair(), &mut kato);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let ht = random_horizontal(&frame, rng.random_range(0.0..2.0), &mut rng);
        let moved = exp_pair(&gp, &ht, 1.0, &tol).unwrap();
        see(&moved.as_projection_pair(), &mut kato);

        // arbitrary ranks, not necessarily in generic position
        let n = 1 + (k as usize % 12);
        let r1 = rng.random_range(0..=n);
        let r2 = rng.random_range(0..=n);
        let p = random_projection(n, r1, &mut rng);
        let q = if k % 3 == 0 { p.clone() } else { random_projection(n, r2, &mut rng) };
        see(&validate_pair(p, q).unwrap(), &mut kato);
    }
    for n in [2, 4, 8, 16, 32] {
        see(&gallery::discretized_mt(n, &tol).unwrap(), &mut kato);
    }
    for (n, i, j) in fourier_cases() {
        see(&gallery::fourier_pair(n, &i, &j).unwrap(), &mut kato);
    }
    for (a, b) in blaschke_cases() {
        let bp = gallery::blaschke_pair(&a, &b, &tol).unwrap();
        see(&bp.pair.as_projection_pair(), &mut kato);
    }
    for b in idempotent_cases() {
        let ip = gallery::idempotent_pair(&b, &tol).unwrap();
        see(&ip.pair.as_projection_pair(), &mut kato);
    }
    outcome(kato.ok(), format!("{count} pairs, max residual {:.3e} (≤ 1e-10)", kato.value))
}

fn criterion_3() -> Outcome {
    let tol = tol();
    let mut unitary = Worst::new(1e-10);
    let mut commutes = Worst::new(1e-9);
    let mut conj = Worst::new(1e-8);
    for k in 0..100u64 {
        let mut rng = sample::trial_rng(3, k);
        let m = SIZES[k as usize % SIZES.len()];
        let gp0 = sample::random_generic_pair(m, &mut rng);
        let gp1 = match k % 3 {
            0 => sample::random_fiber_pair(&gp0, &mut rng).unwrap(),
            1 => omega_partner(&gp0, &mut rng),
            _ => flipped(&gp0),
        };
        let u = intertwining_unitary(&gp0, &gp1, &tol).unwrap();
        unitary.see(unitarity_residual(&u));
        commutes.see(operator_norm(&commutator(&u, gp0.a0().matrix())));
        conj.see(conjugation_residual(&u, &gp0, &gp1));
    }
    outcome(
        unitary.ok() && commutes.ok() && conj.ok(),
        format!(
            "unitarity {:.3e} (≤ 1e-10), [U, A0] {:.3e} (≤ 1e-9), conjugation {:.3e} (≤ 1e-8)",
            unitary.value, commutes.value, conj.value
        ),
    )
}

fn criterion_4() -> Outcome {
    let tol = tol();
    let mut rng = sample::rng(4);
    let base = sample::random_generic_pair(8, &mut rng);
    let frame = halmos_frame(&base, &tol).unwrap();
    let norm_c = frame.cos.iter().fold(0.0f64, |a, &x| a.max(x));
    let mut values = Vec::with_capacity(50);
    for k in 0..50 {
        let gp = if k == 0 {
            base.clone()
        } else if k % 2 == 0 {
            sample::random_fiber_pair(&base, &mut rng).unwrap()
        } else {
            omega_partner(&base, &mut rng)
        };
        values.push(friedrichs_cos(&gp.as_projection_pair(), &tol).unwrap());
    }
    let lo = values.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let hi = values.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
    let off = values.iter().fold(0.0f64, |a, &x| a.max((x - norm_c).abs()));
    outcome(
        hi - lo <= 1e-8 && off <= 1e-8,
        format!("spread {:.3e} (≤ 1e-8), |cos − ‖C‖| {:.3e} (≤ 1e-8)", hi - lo, off),
    )
}

fn criterion_5() -> Outcome {
    let tol = tol();
    let mut closed = Worst::new(1e-9);
    let mut intrinsic = Worst::new(1e-9);
    let mut samples = 0;
    for k in 0..50u64 {
        let mut rng = sample::trial_rng(5, k);
        let m = SIZES[k as usize % 5];
        let gp = sample::random_generic_pair(m, &mut rng);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let j0 = davis::j0(gp.a0(), &tol).unwrap();
        for _ in 0..10 {
            let ht = random_horizontal(&frame, rng.random_range(0.0..3.0), &mut rng);
            let t: f64 = rng.random_range(-2.0..2.0);
            let reference = expm(&(ht.z() * Complex64::new(t, 0.0)));
            let a = exp_unitary_closed_form(&ht, t).unwrap();
            let b = exp_unitary_intrinsic(ht.z(), j0.matrix(), t).unwrap();
            closed.see(operator_norm(&(a - &reference)));
            intrinsic.see(operator_norm(&(b - &reference)));
            samples += 1;
        }
    }
    outcome(
        closed.ok() && intrinsic.ok(),
        format!(
            "{samples} samples, frame form {:.3e}, intrinsic form {:.3e} (≤ 1e-9)",
            closed.value, intrinsic.value
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = tol();
    let mut inj = Worst::new(1e-8);
    for k in 0..200u64 {
        let mut rng = sample::trial_rng(61, k);
        let m = SIZES[k as usize % 5];
        let gp = sample::random_generic_pair(m, &mut rng);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let norm = rng.random_range(0.0..FRAC_PI_2 - 0.05);
        let ht = random_horizontal(&frame, norm, &mut rng);
        let target = exp_pair(&gp, &ht, 1.0, &tol).unwrap();
        let back = log_pair(&gp, &frame, &target, &tol).unwrap();
        inj.see(operator_norm(&(back.z() - ht.z())));
    }
    let mut bound = Worst::new(FRAC_PI_2 + 1e-9);
    let mut hit = Worst::new(1e-7);
    for k in 0..100u64 {
        let mut rng = sample::trial_rng(62, k);
        let m = SIZES[k as usize % 5];
        let gp = sample::random_generic_pair(m, &mut rng);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let target = match k % 4 {
            0 => flipped(&gp),
            1 => flip_one(&gp, &mut rng),
            2 => omega_partner(&gp, &mut rng),
            _ => sample::random_fiber_pair(&gp, &mut rng).unwrap(),
        };
        let z = log_pair(&gp, &frame, &target, &tol).unwrap();
        bound.see(finsler_norm(&z));
        hit.see(exp_pair(&gp, &z, 1.0, &tol).unwrap().distance_to(&target));
    }
    outcome(
        inj.ok() && bound.ok() && hit.ok(),
        format!(
            "log∘exp {:.3e} (≤ 1e-8), max ‖Z‖ − π/2 {:.3e} (≤ 1e-9), exp(log) miss {:.3e} (≤ 1e-7)",
            inj.value,
            bound.value - FRAC_PI_2,
            hit.value
        ),
    )
}

/// Target whose Davis symmetry has one ω-phase negated.
fn flip_one(gp: &GenericPair, rng: &mut SampleRng) -> GenericPair {
    let om = gallery::omega_parametrization(gp.a0()).unwrap();
    let v = pair_to_symmetry(gp, &tol()).unwrap();
    let mut w = om.phases_of(v.matrix());
    let k = rng.random_range(0..w.len());
    w[k] = -w[k];
    let w: Vec<Complex64> = w.iter().map(|x| x / x.norm()).collect();
    let v = DavisSymmetry::new(gp.a0(), om.symmetry(&w).unwrap()).unwrap();
    symmetry_to_pair(gp.a0(), &v, &tol()).unwrap()
}

fn criterion_7() -> Outcome {
    let tol = tol();
    let mut margin = f64::INFINITY;
    let mut failures = 0;
    for k in 0..50u64 {
        let mut rng = sample::trial_rng(7, k);
        let m = SIZES[k as usize % 4];
        let gp = sample::random_generic_pair(m, &mut rng);
        let frame = halmos_frame(&gp, &tol).unwrap();
        let ht = random_horizontal(&frame, rng.random_range(0.1..3.0), &mut rng);
        match minimality_certificate(&ht, 200, &mut rng) {
            Ok(r) => margin = margin.min(r.margin),
            Err(_) => failures += 1,
        }
    }
    // scalar case: ‖Z + diag(id, id)‖ = |d| + |y|/cos θ
    let mut scalar = Worst::new(1e-10);
    let mut rng = sample::rng(70);
    for _ in 0..50 {
        let theta = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let y: f64 = rng.random_range(-2.0..2.0);
        let gp = sample::generic_pair_from_angles(&[theta], &identity(2), &tol).unwrap();
        let frame = halmos_frame(&gp, &tol).unwrap();
        let block = ComplexMatrix::from_element(1, 1, Complex64::new(0.0, y));
        let ht = horizontal_from_block(block, &frame).unwrap();
        let report = minimality_certificate(&ht, 20, &mut rng).unwrap();
        scalar.see((report.z_norm - y.abs() / theta.cos()).abs());
        for _ in 0..4 {
            let d: f64 = rng.random_range(-2.0..2.0);
            let dd = ComplexMatrix::from_element(1, 1, Complex64::new(0.0, d));
            let lift = frame.from_frame(&block2(&dd, &zeros(1, 1), &zeros(1, 1), &dd));
            let n = operator_norm(&(ht.z() + lift));
            scalar.see((n - (d.abs() + y.abs() / theta.cos())).abs());
        }
        // closed-form margin over the sampled directions is min |d| ≥ 0
        if report.margin < -1e-10 {
            scalar.see(-report.margin);
        }
    }
    outcome(
        failures == 0 && margin >= -1e-9 && scalar.ok(),
        format!(
            "{failures} certificate failures, min margin {margin:.3e} (≥ −1e-9), scalar closed form {:.3e} (≤ 1e-10)",
            scalar.value
        ),
    )
}

fn criterion_8() -> Outcome {
    let tol = tol();
    let mut sym = Worst::new(1e-8);
    let mut tri = Worst::new(1e-7);
    let mut cap = Worst::new(FRAC_PI_2 + 1e-9);
    for k in 0..100u64 {
        let mut rng = sample::trial_rng(8, k);
        let m = SIZES[k as usize % 4];
        let a = sample::random_generic_pair(m, &mut rng);
        let others: Vec<GenericPair> = (0..2)
            .map(|j| match (k + j) % 3 {
                0 => sample::random_fiber_pair(&a, &mut rng).unwrap(),
                1 => omega_partner(&a, &mut rng),
                _ => flipped(&a),
            })
            .collect();
        let pts = [a, others[0].clone(), others[1].clone()];
        let frames: Vec<_> = pts.iter().map(|p| halmos_frame(p, &tol).unwrap()).collect();
        let d = |i: usize, j: usize| geodesic_distance(&pts[i], &frames[i], &pts[j], &tol).unwrap();
        let (dab, dba) = (d(0, 1), d(1, 0));
        let (dbc, dac) = (d(1, 2), d(0, 2));
        sym.see((dab - dba).abs());
        tri.see(dac - dab - dbc);
        for x in [dab, dba, dbc, dac] {
            cap.see(x);
        }
    }
    outcome(
        sym.ok() && tri.ok() && cap.ok(),
        format!(
            "asymmetry {:.3e} (≤ 1e-8), triangle excess {:.3e} (≤ 1e-7), max distance − π/2 {:.3e} (≤ 1e-9)",
            sym.value,
            tri.value,
            cap.value - FRAC_PI_2
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut straddle = f64::INFINITY;
    let mut norms = Worst::new(1e-8);
    for k in 0..100u64 {
        let mut rng = sample::trial_rng(9, k);
        let m = SIZES[k as usize % 5];
        let gp0 = sample::random_generic_pair(m, &mut rng);
        let gp1 = if k % 2 == 0 {
            sample::random_fiber_pair(&gp0, &mut rng).unwrap()
        } else {
            omega_partner(&gp0, &mut rng)
        };
        let diff = HermitianMatrix::symmetrized(
            gp1.p0().matrix() + gp1.q0().matrix() - gp0.p0().matrix() - gp0.q0().matrix(),
        );
        let ev = eigh(&diff).unwrap().eigenvalues;
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        straddle = straddle.min(hi).min(-lo);
        let (n0, n1) = sum_norm_invariance(&gp0, &gp1).unwrap();
        norms.see((n0 - n1).abs());
    }
    outcome(
        straddle > 1e-8 && norms.ok(),
        format!(
            "smallest straddle {straddle:.3e} (> 1e-8), sum-norm gap {:.3e} (≤ 1e-8)",
            norms.value
        ),
    )
}

fn fourier_cases() -> Vec<(usize, Vec<usize>, Vec<usize>)> {
    vec![
        (4, vec![0, 1], vec![0, 1]),
        (8, vec![0, 1, 2, 3], vec![0, 1, 2, 3]),
        (12, vec![0, 1, 2, 3, 4], vec![0, 1, 11, 10]),
        (16, vec![2, 3, 5, 7, 11, 13], vec![0, 1, 2, 15, 14]),
        // scattered sets; contiguous ones this large push A's spectrum
        // against ±1
        (32, vec![0, 3, 7, 12, 18, 25, 29], vec![1, 2, 6, 13, 21, 22, 30]),
        (64, vec![0, 5, 9, 17, 23, 31, 38, 44, 51, 60], vec![2, 3, 11, 19, 27, 30, 41, 47, 55, 58]),
        (64, (0..20).step_by(3).collect(), (0..64).step_by(9).collect()),
    ]
}

fn blaschke_cases() -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let mut rng = sample::rng(100);
    let mut cases = vec![
        (vec![Complex64::new(0.3, 0.0)], vec![Complex64::new(-0.4, 0.0)]),
        (vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(0.5, 0.0)]),
    ];
    for n in 1..=5 {
        // well separated points on two rings
        let offset = rng.random_range(0.0..PI);
        let ring = |r: f64, shift: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| Complex64::from_polar(r, offset + shift + 2.0 * PI * k as f64 / n as f64))
                .collect()
        };
        cases.push((ring(0.3, 0.0), ring(0.6, PI / n as f64)));
    }
    cases
}

fn idempotent_cases() -> Vec<ComplexMatrix> {
    let mut rng = sample::rng(101);
    let mut cases = vec![identity(1), projpairs::spectral::diag(&[1.0, 2.0])];
    for k in 2..7 {
        let u = sample::random_unitary(k, &mut rng);
        let d: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        cases.push(&u * projpairs::spectral::diag(&d) * u.adjoint());
    }
    cases
}

fn criterion_10() -> Outcome {
    let tol = tol();
    let mut law = Worst::new(1e-8);
    for (n, i, j) in fourier_cases() {
        let pair = gallery::fourier_pair(n, &i, &j).unwrap();
        match projpairs::decomp::generic_part(&pair, &tol) {
            Ok(gp) => law.see(gallery::eigenvalue_law_residual(&gp).unwrap()),
            Err(_) => law.see(f64::INFINITY),
        }
    }
    let mut closed = Worst::new(1e-9);
    for b in idempotent_cases() {
        closed.see(gallery::idempotent_pair(&b, &tol).unwrap().closed_form_residual());
    }
    let mut dims_ok = true;
    for (a, b) in blaschke_cases() {
        let bp = gallery::blaschke_pair(&a, &b, &tol).unwrap();
        dims_ok &= bp.pair.dim() == 2 * a.len();
    }
    outcome(
        law.ok() && closed.ok() && dims_ok,
        format!(
            "Fourier law {:.3e} (≤ 1e-8), idempotent closed form {:.3e} (≤ 1e-9), Blaschke dim = 2N: {}",
            law.value, closed.value, dims_ok
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Davis bijection", criterion_1),
        ("Kato identity", criterion_2),
        ("transitivity", criterion_3),
        ("Friedrichs constancy", criterion_4),
        ("geodesic closed form", criterion_5),
        ("injectivity and surjectivity of log", criterion_6),
        ("minimality", criterion_7),
        ("distance metric", criterion_8),
        ("non-comparability", criterion_9),
        ("gallery conformance", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name}: {} [{:.1}s]",
            k + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
