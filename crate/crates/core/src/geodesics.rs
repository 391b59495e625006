//! Horizontal tangents, closed-form geodesics, exponential and logarithm
//! maps of the fiber, Finsler norm and distance, and minimality checks.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::sync::Arc;

use crate::davis;
use crate::decomp::{GenericPair, HalmosFrame};
use crate::error::{Error, Result};
use crate::sample;
use crate::spectral::{
    block2, c, eigh, identity, nullspace_basis, operator_norm, sign,
    split_blocks, unitary_log, zeros, ComplexMatrix, HermitianMatrix,
};
use crate::tol::Tolerances;

/// Relative residual allowed for the horizontal form.
pub const HORIZONTAL_TOL: f64 = 1e-9;
/// Branch A is used while every phase of `VV₀` is below `π − BRANCH_MARGIN`.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// `Z = W*·[[−Yτ, Y],[Y, Yτ]]·W` with `Y* = −Y` commuting with `Γ`.
#[derive(Debug, Clone)]
pub struct HorizontalTangent {
    frame: Arc<HalmosFrame>,
    y: ComplexMatrix,
    z: ComplexMatrix,
}

/// Residuals of the defining properties of a horizontal tangent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HorizontalResiduals {
    /// `‖Z + Z*‖`.
    pub anti_hermitian: f64,
    /// `‖[Y, Γ]‖`.
    pub gamma_commutator: f64,
    /// Largest pairwise commutator of the four Halmos blocks.
    pub block_commutator: f64,
    /// `‖J Z J* + Z‖` in frame coordinates, `J = [[0,1],[−1,0]]`.
    pub spectral_symmetry: f64,
}

impl HorizontalResiduals {
    pub fn max(&self) -> f64 {
        self.anti_hermitian
            .max(self.gamma_commutator)
            .max(self.block_commutator)
            .max(self.spectral_symmetry)
    }
}

fn frame_form(y: &ComplexMatrix, frame: &HalmosFrame) -> ComplexMatrix {
    let yt = y * frame.tan_matrix();
    block2(&(-&yt), y, y, &yt)
}

impl HorizontalTangent {
    pub fn frame(&self) -> &Arc<HalmosFrame> {
        &self.frame
    }

    /// The block `Y`.
    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    /// `Z` in ambient `H₀` coordinates.
    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn z_frame(&self) -> ComplexMatrix {
        frame_form(&self.y, &self.frame)
    }

    /// `Y C⁻¹`.
    pub fn y_over_c(&self) -> ComplexMatrix {
        let inv: Vec<f64> = self.frame.cos.iter().map(|x| 1.0 / x).collect();
        &self.y * crate::spectral::diag(&inv)
    }

    pub fn scaled(&self, s: f64) -> HorizontalTangent {
        HorizontalTangent {
            frame: Arc::clone(&self.frame),
            y: &self.y * c(s),
            z: &self.z * c(s),
        }
    }

    pub fn residuals(&self) -> HorizontalResiduals {
        let zf = self.z_frame();
        let [a, b, cc, d] = split_blocks(&zf);
        let blocks = [&a, &b, &cc, &d];
        let mut block_commutator = 0.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                let comm = blocks[i] * blocks[j] - blocks[j] * blocks[i];
                block_commutator = block_commutator.max(operator_norm(&comm));
            }
        }
        let h = self.frame.half();
        let j = block2(&zeros(h, h), &identity(h), &(-identity(h)), &zeros(h, h));
        HorizontalResiduals {
            anti_hermitian: operator_norm(&(&self.z + self.z.adjoint())),
            gamma_commutator: self.frame.gamma_commutator(&self.y),
            block_commutator,
            spectral_symmetry: operator_norm(&(&j * &zf * j.adjoint() + &zf)),
        }
    }
}

/// Builds the horizontal tangent with block `y` in `frame`.
pub fn horizontal_from_block(y: ComplexMatrix, frame: &Arc<HalmosFrame>) -> Result<HorizontalTangent> {
    let h = frame.half();
    if y.nrows() != h || y.ncols() != h {
        return Err(Error::DimensionMismatch {
            expected: h,
            found: y.nrows(),
        });
    }
    let scale = HORIZONTAL_TOL * operator_norm(&y).max(1.0);
    let skew = operator_norm(&(&y + y.adjoint()));
    if skew > scale {
        return Err(Error::NotHorizontal { residual: skew });
    }
    let residual = frame.gamma_commutator(&y);
    if residual > scale {
        return Err(Error::NotCommutingWithGamma { residual });
    }
    let z = frame.from_frame(&frame_form(&y, frame));
    let ht = HorizontalTangent {
        frame: Arc::clone(frame),
        y,
        z,
    };
    let residual = ht.residuals().max();
    if residual > 10.0 * scale * frame.tan.iter().fold(1.0f64, |a, &t| a.max(t)) {
        return Err(Error::NotHorizontal { residual });
    }
    Ok(ht)
}

/// Reads `Y` off an ambient anti-Hermitian `z`, checking the horizontal form
/// within `tol · max(‖z‖, 1)`, and returns the tangent with `Y` projected
/// onto the commutant of `Γ`.
pub fn horizontal_from_ambient(
    z: &ComplexMatrix,
    frame: &Arc<HalmosFrame>,
    tol: f64,
) -> Result<HorizontalTangent> {
    if z.nrows() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: z.nrows(),
        });
    }
    let scale = tol * operator_norm(z).max(1.0);
    let [z11, z12, z21, z22] = split_blocks(&frame.to_frame(z));
    let y = (&z12 + &z21) * c(0.5);
    let y = (&y - y.adjoint()) * c(0.5);
    let y = frame.project_commuting(&y);
    let yt = &y * frame.tan_matrix();
    let residual = operator_norm(&(&z12 - &z21))
        .max(operator_norm(&(&z11 + &yt)))
        .max(operator_norm(&(&z22 - &yt)))
        .max(operator_norm(&(z + z.adjoint())));
    if residual > scale {
        return Err(Error::NotHorizontal { residual });
    }
    let zz = frame.from_frame(&frame_form(&y, frame));
    Ok(HorizontalTangent {
        frame: Arc::clone(frame),
        y,
        z: zz,
    })
}

/// Finsler norm `‖YC⁻¹‖`, which equals `‖Z‖`.
pub fn finsler_norm(ht: &HorizontalTangent) -> f64 {
    operator_norm(&ht.y_over_c())
}

/// `cosh(tB)` and `sinh(tB)` for anti-Hermitian `B`, via the Hermitian
/// `H = −iB`: `cosh(tB) = cos(tH)`, `sinh(tB) = i·sin(tH)`.
fn cosh_sinh(b: &ComplexMatrix, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let h = HermitianMatrix::symmetrized(b * -Complex64::i());
    let dec = eigh(&h)?;
    let cos: Vec<f64> = dec.eigenvalues.iter().map(|x| (t * x).cos()).collect();
    let sin: Vec<f64> = dec.eigenvalues.iter().map(|x| (t * x).sin()).collect();
    Ok((dec.reassemble(&cos), dec.reassemble(&sin) * Complex64::i()))
}

/// `e^{tZ}` from `cosh(tYC⁻¹)·1 + sinh(tYC⁻¹)·Σ` in frame coordinates,
/// `Σ = [[−S, C],[C, S]]`, returned in ambient coordinates.
pub fn exp_unitary_closed_form(ht: &HorizontalTangent, t: f64) -> Result<ComplexMatrix> {
    let frame = &ht.frame;
    let (ch, sh) = cosh_sinh(&ht.y_over_c(), t)?;
    let s = frame.sin_matrix();
    let cm = frame.cos_matrix();
    let u = block2(
        &(&ch - &sh * &s),
        &(&sh * &cm),
        &(&sh * &cm),
        &(&ch + &sh * &s),
    );
    Ok(frame.from_frame(&u))
}

/// Frame-free form `e^{tZ} = cosh(tZJ₀) + sinh(tZJ₀)·J₀`.
pub fn exp_unitary_intrinsic(z: &ComplexMatrix, j0: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let zj = z * j0;
    let zj = (&zj - zj.adjoint()) * c(0.5);
    let (ch, sh) = cosh_sinh(&zj, t)?;
    Ok(ch + sh * j0)
}

/// `(e^{tZ}P₀e^{−tZ}, e^{tZ}Q₀e^{−tZ})`.
pub fn exp_pair(
    base: &GenericPair,
    ht: &HorizontalTangent,
    t: f64,
    tol: &Tolerances,
) -> Result<GenericPair> {
    let u = exp_unitary_closed_form(ht, t)?;
    base.conjugated(&u, tol)
}

/// Which construction produced a logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogBranch {
    /// `Z = ½ log(VV₀)`.
    Principal,
    /// Splitting into `h′ ⊕ h″ ⊕ h₀⁰`.
    Global,
}

/// Branch A: `½ log(VV₀)`.
fn log_principal(v: &ComplexMatrix, v0: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(unitary_log(&(v * v0), BRANCH_MARGIN)? * c(0.5))
}

/// Branch B. `h′ = N(V − V₀)` carries `Z = 0`, `h″ = N(V + V₀)` carries
/// `Z = (iπ/2)J₀`, and on the rest `Z = log(S V₀)` with `S = sgn(V₀ + V)`.
fn log_global(
    v: &ComplexMatrix,
    v0: &ComplexMatrix,
    j0: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let m = v.nrows();
    let sum = HermitianMatrix::symmetrized(v0 + v);
    let diff = HermitianMatrix::symmetrized(v0 - v);
    let flipped = nullspace_basis(&sum, tol.rank_tol)?;
    let fixed = nullspace_basis(&diff, tol.rank_tol)?;
    // the generic part of (V₀, V): complement of both nullspaces, which are
    // mutually orthogonal
    let mut outside = zeros(m, flipped.ncols() + fixed.ncols());
    for j in 0..flipped.ncols() {
        outside.set_column(j, &flipped.column(j));
    }
    for j in 0..fixed.ncols() {
        outside.set_column(flipped.ncols() + j, &fixed.column(j));
    }
    let rest = crate::spectral::complement_basis(&outside, m)?;

    let mut z = zeros(m, m);
    if flipped.ncols() > 0 {
        let jf = HermitianMatrix::symmetrized(flipped.adjoint() * j0 * &flipped);
        let jf = sign(&jf, tol.gap_tol)?;
        z += &flipped * jf.matrix() * flipped.adjoint() * Complex64::new(0.0, FRAC_PI_2);
    }
    if rest.ncols() > 0 {
        let v0r = rest.adjoint() * v0 * &rest;
        let sr = HermitianMatrix::symmetrized(rest.adjoint() * (v0 + v) * &rest);
        let s = sign(&sr, tol.gap_tol)?;
        let log = unitary_log(&(s.matrix() * v0r), tol.gap_tol)?;
        z += &rest * log * rest.adjoint();
    }
    Ok((&z - z.adjoint()) * c(0.5))
}

/// Horizontal `Z` at `base` with `exp_pair(base, Z, 1) = target` and
/// `‖Z‖ ≤ π/2`, choosing the branch automatically.
pub fn log_pair(
    base: &GenericPair,
    frame: &Arc<HalmosFrame>,
    target: &GenericPair,
    tol: &Tolerances,
) -> Result<HorizontalTangent> {
    log_pair_with_branch(base, frame, target, None, tol).map(|(ht, _)| ht)
}

/// [`log_pair`] with an optional forced branch. Returns the branch used.
pub fn log_pair_with_branch(
    base: &GenericPair,
    frame: &Arc<HalmosFrame>,
    target: &GenericPair,
    branch: Option<LogBranch>,
    tol: &Tolerances,
) -> Result<(HorizontalTangent, LogBranch)> {
    base.check_same_difference(target)?;
    let v0 = davis::pair_to_symmetry(base, tol)?;
    let v = davis::pair_to_symmetry(target, tol)?;
    let (z, used) = match branch {
        Some(LogBranch::Global) => (global(base, &v, &v0, tol)?, LogBranch::Global),
        Some(LogBranch::Principal) => (log_principal(v.matrix(), v0.matrix())?, LogBranch::Principal),
        None => match log_principal(v.matrix(), v0.matrix()) {
            Ok(z) => (z, LogBranch::Principal),
            Err(Error::BranchCut { .. }) => (global(base, &v, &v0, tol)?, LogBranch::Global),
            Err(e) => return Err(e),
        },
    };
    let ht = horizontal_from_ambient(&z, frame, 1e-7)?;
    Ok((ht, used))
}

fn global(
    base: &GenericPair,
    v: &davis::DavisSymmetry,
    v0: &davis::DavisSymmetry,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let j0 = davis::j0(base.a0(), tol)?;
    log_global(v.matrix(), v0.matrix(), j0.matrix(), tol)
}

/// Finsler distance `‖log_pair(base, target)‖`.
pub fn geodesic_distance(
    base: &GenericPair,
    frame: &Arc<HalmosFrame>,
    target: &GenericPair,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(finsler_norm(&log_pair(base, frame, target, tol)?))
}

/// A geodesic `t ↦ e^{tZ}·(P₀, Q₀)`.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub base: GenericPair,
    pub tangent: HorizontalTangent,
    pub speed: f64,
}

impl Geodesic {
    pub fn new(base: GenericPair, tangent: HorizontalTangent) -> Self {
        let speed = finsler_norm(&tangent);
        Self {
            base,
            tangent,
            speed,
        }
    }

    pub fn at(&self, t: f64, tol: &Tolerances) -> Result<GenericPair> {
        exp_pair(&self.base, &self.tangent, t, tol)
    }

    /// `steps + 1` equispaced samples on `[0, 1]`.
    pub fn sample(&self, steps: usize, tol: &Tolerances) -> Result<Vec<(f64, GenericPair)>> {
        let steps = steps.max(1);
        (0..=steps)
            .map(|k| {
                let t = k as f64 / steps as f64;
                self.at(t, tol).map(|gp| (t, gp))
            })
            .collect()
    }

    /// Writes the sampled path as CSV: `t`, the real and imaginary parts of
    /// `P(t)` and `Q(t)` row-major, and the distance from the base.
    pub fn write_csv<W: Write>(&self, out: &mut W, steps: usize, tol: &Tolerances) -> Result<()> {
        self.write_csv_with(out, steps, tol, |p, q| (p.clone(), q.clone()))
    }

    /// [`Geodesic::write_csv`] with each `(P(t), Q(t))` passed through
    /// `embed` first, e.g. to lift the generic part into a larger space.
    pub fn write_csv_with<W: Write>(
        &self,
        out: &mut W,
        steps: usize,
        tol: &Tolerances,
        embed: impl Fn(&ComplexMatrix, &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix),
    ) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidInput(e.to_string());
        let samples = self.sample(steps, tol)?;
        let mut rows = Vec::with_capacity(samples.len());
        for (t, gp) in &samples {
            let dist = geodesic_distance(&self.base, &self.tangent.frame, gp, tol)?;
            let (p, q) = embed(gp.p0().matrix(), gp.q0().matrix());
            rows.push((*t, p, q, dist));
        }
        let n = rows.first().map_or(0, |r| r.1.nrows());
        let mut header = vec!["t".to_string()];
        for name in ["p", "q"] {
            for i in 0..n {
                for j in 0..n {
                    header.push(format!("{name}_{i}_{j}_re"));
                    header.push(format!("{name}_{i}_{j}_im"));
                }
            }
        }
        header.push("distance".to_string());
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for (t, p, q, dist) in rows {
            let mut row = vec![fmt17(t)];
            for mat in [&p, &q] {
                for i in 0..n {
                    for j in 0..n {
                        row.push(fmt17(mat[(i, j)].re));
                        row.push(fmt17(mat[(i, j)].im));
                    }
                }
            }
            row.push(fmt17(dist));
            writeln!(out, "{}", row.join(",")).map_err(io)?;
        }
        Ok(())
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Outcome of a minimality check of `Z` against the isotropy directions.
#[derive(Debug, Clone, Serialize)]
pub struct MinimalityReport {
    pub z_norm: f64,
    pub trials: usize,
    pub descent_iterations: usize,
    /// Smallest `‖Z + D‖` seen over all samples and the descent.
    pub min_perturbed_norm: f64,
    /// `min ‖Z + D‖ − ‖Z‖`.
    pub margin: f64,
}

/// Tolerance for `‖Z‖ ≤ ‖Z + D‖ + CERTIFICATE_TOL`.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Anti-Hermitian `D′` commuting with `Γ`, lifted to `diag(D′, D′)`.
fn isotropy_direction(frame: &HalmosFrame, d: &ComplexMatrix) -> ComplexMatrix {
    let h = frame.half();
    frame.from_frame(&block2(d, &zeros(h, h), &zeros(h, h), d))
}

/// Projects a frame matrix onto the isotropy Lie algebra: averages the
/// diagonal blocks, keeps the anti-Hermitian part, and restricts to the
/// commutant of `Γ`.
fn project_isotropy(frame: &HalmosFrame, g: &ComplexMatrix) -> ComplexMatrix {
    let [a, _, _, d] = split_blocks(&frame.to_frame(g));
    let avg = (a + d) * c(0.5);
    let skew = (&avg - avg.adjoint()) * c(0.5);
    frame.project_commuting(&skew)
}

/// Checks `‖Z‖ ≤ ‖Z + D‖` over `trials` random isotropy directions `D`
/// and along a projected subgradient descent on `‖Z + D‖`.
pub fn minimality_certificate<R: Rng + ?Sized>(
    ht: &HorizontalTangent,
    trials: usize,
    rng: &mut R,
) -> Result<MinimalityReport> {
    const ITERATIONS: usize = 100;
    let frame = &ht.frame;
    let z = ht.z();
    let z_norm = operator_norm(z);
    let mut best = f64::INFINITY;
    let check = |d: &ComplexMatrix, best: &mut f64| -> Result<()> {
        let n = operator_norm(&(z + d));
        *best = best.min(n);
        if z_norm > n + CERTIFICATE_TOL {
            return Err(Error::CertificateFailed {
                z_norm,
                perturbed_norm: n,
            });
        }
        Ok(())
    };
    let h = frame.half();
    for _ in 0..trials {
        let raw = sample::random_anti_hermitian(h, rng);
        let dp = frame.project_commuting(&raw);
        let scale: f64 = rng.random_range(0.0..2.0) * z_norm.max(1e-3);
        let norm = operator_norm(&dp).max(f64::MIN_POSITIVE);
        let d = isotropy_direction(frame, &(dp * c(scale / norm)));
        check(&d, &mut best)?;
    }
    let mut dp = zeros(h, h);
    for k in 1..=ITERATIONS {
        let m = z + isotropy_direction(frame, &dp);
        let svd = m.clone().svd(true, true);
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        let u = svd.u.as_ref().expect("requested").column(idx).into_owned();
        let v_t = svd.v_t.as_ref().expect("requested").row(idx).into_owned();
        let grad = &u * &v_t;
        let g = project_isotropy(frame, &grad);
        let gn = operator_norm(&g);
        if gn == 0.0 {
            break;
        }
        dp -= g * c(z_norm.max(1e-3) / (k as f64 * gn));
        check(&isotropy_direction(frame, &dp), &mut best)?;
    }
    if trials == 0 {
        check(&zeros(z.nrows(), z.ncols()), &mut best)?;
    }
    Ok(MinimalityReport {
        z_norm,
        trials,
        descent_iterations: ITERATIONS,
        min_perturbed_norm: best,
        margin: best - z_norm,
    })
}

/// Random horizontal tangent with `‖Z‖ = norm`.
pub fn random_horizontal<R: Rng + ?Sized>(
    frame: &Arc<HalmosFrame>,
    norm: f64,
    rng: &mut R,
) -> HorizontalTangent {
    let h = frame.half();
    let y = frame.project_commuting(&sample::random_anti_hermitian(h, rng));
    let ht = horizontal_from_block(y, frame).expect("projected block is horizontal");
    let current = finsler_norm(&ht);
    if current == 0.0 {
        return ht;
    }
    ht.scaled(norm / current)
}
