use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use projpairs::davis::{self, DavisSymmetry};
use projpairs::decomp::{self, ProjectionPair, ThreeSpaceSplit, ThreeSpaceSplitJson};
use projpairs::gallery;
use projpairs::geodesics::{finsler_norm, log_pair_with_branch, Geodesic, LogBranch};
use projpairs::orbit::{generic_closed_range_report, ClosedRangeReport};
use projpairs::spectral::{cdiag, operator_norm, ComplexMatrix, HermitianMatrix, Symmetry};
use projpairs::{Error, GenericPair, Tolerances};

use crate::io::{self, emit, ensure_dir, read_hermitian, read_matrix, write_matrix, write_text};
use crate::{check as battery, Failure, Format, Generator, PairFiles, RunConfig, TwoPairs, EXIT_INVARIANT};

type Outcome = Result<u8, Failure>;

/// Differences of pairs compared by the geodesic commands.
const SAME_DIFFERENCE_TOL: f64 = 1e-9;

fn read_pair(p: &Path, q: &Path) -> Result<ProjectionPair, Failure> {
    let pm = read_matrix(p)?;
    let qm = read_matrix(q)?;
    Ok(decomp::validate_pair(pm, qm)?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::io(e.to_string()))
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&dir)?;
    Ok(dir)
}

#[derive(Serialize)]
struct SplitDims {
    null_a: usize,
    plus_one: usize,
    minus_one: usize,
    generic: usize,
}

impl SplitDims {
    fn of(split: &ThreeSpaceSplit) -> Self {
        SplitDims {
            null_a: split.null_a.ncols(),
            plus_one: split.plus_one.ncols(),
            minus_one: split.minus_one.ncols(),
            generic: split.generic_dim(),
        }
    }
}

#[derive(Serialize)]
struct DecomposeReport {
    dim: usize,
    dims: SplitDims,
    gamma: Vec<f64>,
    friedrichs_cos: f64,
    closed_range: Option<ClosedRangeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    split: ThreeSpaceSplitJson,
}

pub fn decompose(
    config: &RunConfig,
    pair_files: Option<(PathBuf, PathBuf)>,
    a_file: Option<PathBuf>,
    angle_threshold: f64,
) -> Outcome {
    let tol = config.tolerances()?;
    config.format_or(Format::Json, &[Format::Json])?;
    let pair = match (pair_files, a_file) {
        (Some((p, q)), None) => read_pair(&p, &q)?,
        (None, Some(a)) => {
            let a = read_hermitian(&a)?;
            let report = decomp::is_difference_of_projections(&a, &tol);
            report.witness.ok_or_else(|| {
                Failure::precondition("NotADifference", report.diagnostic.clone())
            })?
        }
        _ => return Err(Failure::input("pass either --p and --q, or --a".into())),
    };
    let split = decomp::three_space_split(&pair.difference(), &tol)?;
    let (gamma, closed_range) = if split.generic_dim() > 0 {
        let (_, gp) = decomp::generic_part_with_split(&pair, &tol)?;
        let frame = decomp::halmos_frame(&gp, &tol)?;
        let closed = generic_closed_range_report(&gp, angle_threshold, &tol)?;
        (frame.gamma.clone(), Some(closed))
    } else {
        (Vec::new(), None)
    };
    let report = DecomposeReport {
        dim: pair.dim(),
        dims: SplitDims::of(&split),
        gamma,
        friedrichs_cos: decomp::friedrichs_cos(&pair, &tol)?,
        closed_range,
        note: (split.generic_dim() == 0).then_some("D_A is a single element"),
        split: split.to_json(),
    };
    emit(config.out.as_ref(), &to_json(&report)?)?;
    Ok(0)
}

pub fn davis(
    config: &RunConfig,
    pair_files: Option<(PathBuf, PathBuf)>,
    symmetry_files: Option<(PathBuf, PathBuf)>,
) -> Outcome {
    let tol = config.tolerances()?;
    match (pair_files, symmetry_files) {
        (Some((p, q)), None) => {
            let pair = read_pair(&p, &q)?;
            let (split, gp) = decomp::generic_part_with_split(&pair, &tol)?;
            let v = davis::pair_to_symmetry(&gp, &tol)?;
            let s = davis::symmetry_to_subspace(&v, gp.a0())?;
            let e = &s * s.adjoint();
            let dir = out_dir(config)?;
            write_matrix(&dir.join("A0.json"), gp.a0().matrix())?;
            write_matrix(&dir.join("V.json"), v.matrix())?;
            write_matrix(&dir.join("S.json"), &s)?;
            write_matrix(&dir.join("E.json"), &e)?;
            write_matrix(&dir.join("H0.json"), &split.generic)?;
            Ok(0)
        }
        (None, Some((a, v))) => {
            let a0 = read_hermitian(&a)?;
            let v = read_matrix(&v)?;
            let v = Symmetry::new(v, tol.gap_tol).map_err(|e| Failure::from(e).context(Path::new("V")))?;
            let v = DavisSymmetry::new(&a0, v)?;
            let gp = davis::symmetry_to_pair(&a0, &v, &tol)?;
            let dir = out_dir(config)?;
            write_matrix(&dir.join("P.json"), gp.p0().matrix())?;
            write_matrix(&dir.join("Q.json"), gp.q0().matrix())?;
            Ok(0)
        }
        _ => Err(Failure::input("pass either --p and --q, or --a and --v".into())),
    }
}

/// A base pair, its generic basis, and a target restricted to that basis.
struct Endpoints {
    base: ProjectionPair,
    basis: ComplexMatrix,
    base_gp: GenericPair,
    target_gp: GenericPair,
}

impl Endpoints {
    fn load(pairs: &TwoPairs, tol: &Tolerances) -> Result<Self, Failure> {
        let base = read_pair(&pairs.base_p, &pairs.base_q)?;
        let target = read_pair(&pairs.target_p, &pairs.target_q)?;
        if base.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: target.dim(),
            }
            .into());
        }
        let residual = operator_norm(&(base.difference().matrix() - target.difference().matrix()));
        if residual > SAME_DIFFERENCE_TOL {
            return Err(Error::MismatchedDifference { residual }.into());
        }
        let (split, base_gp) = decomp::generic_part_with_split(&base, tol)?;
        let basis = split.generic;
        let compress = |m: &HermitianMatrix| basis.adjoint() * m.matrix() * &basis;
        let lift = |m: &ComplexMatrix| &basis * m * basis.adjoint();
        // outside H₀ the two pairs must coincide
        let outside = |full: &HermitianMatrix, generic: &ComplexMatrix| full.matrix() - lift(generic);
        let tp = compress(target.p());
        let tq = compress(target.q());
        let off = operator_norm(&(outside(target.p(), &tp) - outside(base.p(), base_gp.p0().matrix())))
            .max(operator_norm(
                &(outside(target.q(), &tq) - outside(base.q(), base_gp.q0().matrix())),
            ));
        if off > SAME_DIFFERENCE_TOL {
            return Err(Failure::precondition(
                "OutsideGenericPart",
                format!("pairs differ outside the generic part (residual {off:.3e})"),
            ));
        }
        let target_gp = GenericPair::new(
            HermitianMatrix::symmetrized(tp).into_matrix(),
            HermitianMatrix::symmetrized(tq).into_matrix(),
            tol,
        )?;
        Ok(Endpoints {
            base,
            basis,
            base_gp,
            target_gp,
        })
    }

    fn geodesic(&self, tol: &Tolerances) -> Result<(Geodesic, LogBranch), Failure> {
        let frame = decomp::halmos_frame(&self.base_gp, tol)?;
        let (z, branch) = log_pair_with_branch(&self.base_gp, &frame, &self.target_gp, None, tol)?;
        Ok((Geodesic::new(self.base_gp.clone(), z), branch))
    }
}

#[derive(Serialize)]
struct DistanceReport {
    distance: f64,
    branch: LogBranch,
    generic_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

pub fn geodesic(config: &RunConfig, pairs: &TwoPairs, steps: usize) -> Outcome {
    let tol = config.tolerances()?;
    if steps == 0 {
        return Err(Failure::input("--steps must be at least 1".into()));
    }
    let ends = Endpoints::load(pairs, &tol)?;
    let (path, branch) = ends.geodesic(&tol)?;
    let b = &ends.basis;
    let (p_base, q_base) = (ends.base.p().matrix(), ends.base.q().matrix());
    let (p0, q0) = (ends.base_gp.p0().matrix(), ends.base_gp.q0().matrix());
    let mut csv = Vec::new();
    path.write_csv_with(&mut csv, steps, &tol, |p, q| {
        (
            p_base + b * (p - p0) * b.adjoint(),
            q_base + b * (q - q0) * b.adjoint(),
        )
    })?;
    let csv_path = config.out.clone().unwrap_or_else(|| PathBuf::from("geodesic.csv"));
    write_text(&csv_path, &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    let report = DistanceReport {
        distance: path.speed,
        branch,
        generic_dim: ends.base_gp.dim(),
        steps: Some(steps),
        csv: Some(csv_path.display().to_string()),
    };
    emit(None, &to_json(&report)?)?;
    Ok(0)
}

pub fn distance(config: &RunConfig, pairs: &TwoPairs) -> Outcome {
    let tol = config.tolerances()?;
    config.format_or(Format::Json, &[Format::Json])?;
    let ends = Endpoints::load(pairs, &tol)?;
    let (path, branch) = ends.geodesic(&tol)?;
    let report = DistanceReport {
        distance: finsler_norm(&path.tangent),
        branch,
        generic_dim: ends.base_gp.dim(),
        steps: None,
        csv: None,
    };
    emit(config.out.as_ref(), &to_json(&report)?)?;
    Ok(0)
}

pub fn check(config: &RunConfig, files: &PairFiles, trials: usize) -> Outcome {
    let tol = config.tolerances()?;
    let format = config.format_or(Format::Json, &[Format::Json, Format::Csv])?;
    let pair = read_pair(&files.p, &files.q)?;
    let report = battery::run(&pair, trials, config.seed, &tol)?;
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("name,residual,bound,pass\n");
            for i in &report.invariants {
                s += &format!(
                    "{},{},{},{}\n",
                    i.name,
                    projpairs::geodesics::fmt17(i.residual),
                    projpairs::geodesics::fmt17(i.bound),
                    i.pass
                );
            }
            s
        }
    };
    emit(config.out.as_ref(), &text)?;
    Ok(if report.pass { 0 } else { EXIT_INVARIANT })
}

pub fn gallery(config: &RunConfig, generator: &Generator) -> Outcome {
    let tol = config.tolerances()?;
    let (p, q, metadata) = match generator {
        Generator::Mt { n } => {
            let pair = gallery::discretized_mt(*n, &tol)?;
            let meta = json!({ "generator": "mt", "n": n, "grid": gallery::mt_grid(*n) });
            (pair.p().clone(), pair.q().clone(), meta)
        }
        Generator::Fourier { n, i, j } => {
            let i_set = io::parse_indices(i)?;
            let j_set = io::parse_indices(j)?;
            let pair = gallery::fourier_pair(*n, &i_set, &j_set)?;
            let generic_dim = decomp::three_space_split(&pair.difference(), &tol)?.generic_dim();
            let meta = json!({
                "generator": "fourier",
                "n": n,
                "I": i_set,
                "J": j_set,
                "generic_dim": generic_dim,
            });
            (pair.p().clone(), pair.q().clone(), meta)
        }
        Generator::Blaschke { a, b } => {
            let a = io::parse_complex_list(a)?;
            let b = io::parse_complex_list(b)?;
            let bp = gallery::blaschke_pair(&a, &b, &tol)?;
            let pts = |v: &[num_complex::Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
            let meta = json!({
                "generator": "blaschke",
                "a": pts(&a),
                "b": pts(&b),
                "gram_condition": bp.gram_condition,
                "multiplicities": bp.multiplicities,
            });
            (bp.pair.p0().clone(), bp.pair.q0().clone(), meta)
        }
        Generator::Idempotent { b_diag, b_file } => {
            let b = match b_file {
                Some(path) => read_matrix(path)?,
                None if !b_diag.is_empty() => {
                    let d = io::parse_real_list(b_diag)?;
                    cdiag(&d.iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect::<Vec<_>>())
                }
                None => return Err(Failure::input("pass --b-diag or --b-file".into())),
            };
            let ip = gallery::idempotent_pair(&b, &tol)?;
            let meta = json!({
                "generator": "idempotent",
                "k": b.nrows(),
                "closed_form_residual": ip.closed_form_residual(),
            });
            (ip.pair.p0().clone(), ip.pair.q0().clone(), meta)
        }
    };
    let dir = out_dir(config)?;
    write_matrix(&dir.join("P.json"), p.matrix())?;
    write_matrix(&dir.join("Q.json"), q.matrix())?;
    let mut meta = metadata;
    meta["dim"] = json!(p.dim());
    meta["rank_tol"] = json!(tol.rank_tol);
    meta["gap_tol"] = json!(tol.gap_tol);
    write_text(&dir.join("metadata.json"), &to_json(&meta)?)?;
    Ok(0)
}
