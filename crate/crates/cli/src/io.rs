use std::fs;
use std::path::{Path, PathBuf};

use projpairs::spectral::{matrix_from_json, matrix_to_json, ComplexMatrix, HermitianMatrix};
use projpairs::Error;

use crate::Failure;

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text).map_err(|e| Failure::from(e).context(path))
}

pub fn read_hermitian(path: &Path) -> Result<HermitianMatrix, Failure> {
    HermitianMatrix::new(read_matrix(path)?).map_err(|e| Failure::from(e).context(path))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), Failure> {
    write_text(path, &(matrix_to_json(m) + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", path.display())))
}

/// Writes `text` to `out` when given, otherwise to stdout.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `"0:3,7,9:10"` into sorted distinct indices; ranges are inclusive.
pub fn parse_indices(text: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::InvalidInput(format!("bad index set {text:?}"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once(':') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Parses a complex number written as `x`, `yi`, `x+yi` or `x-yi`.
pub fn parse_complex(text: &str) -> Result<num_complex::Complex64, Error> {
    let bad = || Error::InvalidInput(format!("bad complex number {text:?}"));
    let t = text.trim().replace(' ', "");
    let Some(body) = t.strip_suffix('i') else {
        return Ok(num_complex::Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(num_complex::Complex64::new(re, im))
}

pub fn parse_complex_list(items: &[String]) -> Result<Vec<num_complex::Complex64>, Error> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.trim().is_empty())
        .map(parse_complex)
        .collect()
}

pub fn parse_real_list(items: &[String]) -> Result<Vec<f64>, Error> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad number {s:?}")))
        })
        .collect()
}
