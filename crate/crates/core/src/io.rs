//! JSON file formats. Matrices are row-major nested arrays.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lie::{DerivationData, LieAlgebraData, RawBrackets, REPORT_THRESHOLD};
use crate::linalg::{check_skew, check_symmetric, Mat};
use crate::planewave::{PlaneWaveSpec, WaveKind};

/// Symmetry and skewness tolerance for matrices read from files.
pub const LOAD_TOL: f64 = 1e-12;

type Rows = Vec<Vec<f64>>;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{what}: {e}")))
}

pub fn matrix_from_rows(rows: &Rows, what: &str) -> Result<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Schema(format!("{what}: rows have different lengths")));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn matrix_to_json(m: &Mat) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| Value::Array(row.iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

/// Round to three significant digits, for reporting residuals.
pub fn sci3(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.2e}").parse().unwrap_or(x)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    kind: WaveKind,
    n: usize,
    #[serde(rename = "F")]
    f: Rows,
    #[serde(rename = "B")]
    b: Rows,
}

/// A validated spec with diagnostics gathered while loading.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: PlaneWaveSpec,
    pub notes: Vec<String>,
}

pub fn parse_spec(text: &str) -> Result<LoadedSpec> {
    let file: SpecFile = parse(text, "spec")?;
    let f = matrix_from_rows(&file.f, "F")?;
    let b = matrix_from_rows(&file.b, "B")?;
    for (m, name) in [(&f, "F"), (&b, "B")] {
        if m.nrows() != file.n || m.ncols() != file.n {
            return Err(Error::Schema(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols(),
                n = file.n
            )));
        }
    }
    check_symmetric(&b, LOAD_TOL, "B")?;
    check_skew(&f, LOAD_TOL, "F")?;
    let mut notes = Vec::new();
    if file.kind == WaveKind::B {
        notes.push("kind b: the metric is defined for u > 0 only".to_string());
    }
    Ok(LoadedSpec { spec: PlaneWaveSpec::new(file.kind, f, b)?, notes })
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    parse_spec(&read_text(path)?)
}

pub fn spec_to_json(spec: &PlaneWaveSpec) -> Value {
    json!({
        "kind": match spec.kind() { WaveKind::A => "a", WaveKind::B => "b" },
        "n": spec.n(),
        "F": matrix_to_json(spec.f()),
        "B": matrix_to_json(spec.b()),
    })
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum MatrixFile {
        Bare(Rows),
        Wrapped { matrix: Rows },
    }
    let rows = match parse::<MatrixFile>(text, "matrix")? {
        MatrixFile::Bare(r) | MatrixFile::Wrapped { matrix: r } => r,
    };
    matrix_from_rows(&rows, "matrix")
}

pub fn load_matrix(path: &Path) -> Result<Mat> {
    parse_matrix(&read_text(path)?)
}

/// A list of matrices, bare or as `{"basis": [...]}`.
pub fn parse_basis(text: &str) -> Result<Vec<Mat>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum BasisFile {
        Bare(Vec<Rows>),
        Wrapped { basis: Vec<Rows> },
    }
    let list = match parse::<BasisFile>(text, "basis")? {
        BasisFile::Bare(l) | BasisFile::Wrapped { basis: l } => l,
    };
    list.iter().map(|r| matrix_from_rows(r, "basis element")).collect()
}

pub fn load_basis(path: &Path) -> Result<Vec<Mat>> {
    parse_basis(&read_text(path)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DerivationFile {
    lambda: f64,
    omega: Rows,
    #[serde(rename = "L")]
    l: Rows,
    c0: Option<Rows>,
    #[serde(rename = "K")]
    k: Option<Rows>,
    #[serde(rename = "T")]
    t: Option<Rows>,
}

/// `{"lambda", "omega", "L", "c0"?, "K"?, "T"?}`.
pub fn parse_derivation(text: &str) -> Result<RawBrackets> {
    let file: DerivationFile = parse(text, "derivation data")?;
    let opt = |m: &Option<Rows>, what| m.as_ref().map(|r| matrix_from_rows(r, what)).transpose();
    let data = DerivationData::new(
        file.lambda,
        matrix_from_rows(&file.omega, "omega")?,
        matrix_from_rows(&file.l, "L")?,
        opt(&file.c0, "c0")?,
    )?;
    let n = data.n();
    let k = opt(&file.k, "K")?;
    let t = opt(&file.t, "T")?;
    for (m, what) in [(&k, "K"), (&t, "T")] {
        if let Some(m) = m {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { what, expected: n, found: m.nrows() });
            }
        }
    }
    Ok(RawBrackets { data, k, t })
}

pub fn load_derivation(path: &Path) -> Result<RawBrackets> {
    parse_derivation(&read_text(path)?)
}

/// `{labels, nonzero: [[i, j, k, value], ..], jacobi_residual}` with `i < j`.
pub fn structure_to_json(alg: &LieAlgebraData) -> Value {
    let nonzero: Vec<Value> = alg
        .nonzero(REPORT_THRESHOLD)
        .into_iter()
        .map(|(i, j, k, v)| json!([i, j, k, v]))
        .collect();
    json!({
        "labels": alg.labels(),
        "nonzero": nonzero,
        "jacobi_residual": sci3(alg.jacobi_residual()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let s = parse_spec(r#"{"kind":"a","n":1,"F":[[0]],"B":[[1]]}"#).unwrap();
        assert_eq!(s.spec.n(), 1);
        assert!(s.notes.is_empty());
        let e = parse_spec(r#"{"kind":"b","n":2,"F":[[0,0],[0,0]],"B":[[1,2],[0,1]]}"#);
        assert!(matches!(e, Err(Error::NotSymmetric { .. })));
        let e = parse_spec(r#"{"kind":"a","n":2,"F":[[0,1],[1,0]],"B":[[1,0],[0,1]]}"#);
        assert!(matches!(e, Err(Error::NotSkew { .. })));
        let e = parse_spec(r#"{"kind":"a","n":2,"F":[[0]],"B":[[1]]}"#);
        assert!(matches!(e, Err(Error::Schema(_))));
    }

    #[test]
    fn rounding() {
        assert_eq!(sci3(1.23456e-13), 1.23e-13);
        assert_eq!(sci3(0.0), 0.0);
    }
}
