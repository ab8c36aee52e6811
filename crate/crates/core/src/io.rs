//! JSON file formats.
//!
//! Frame: `{"d": 2, "vectors": [[[re, im], ...], ...]}`, one inner list of
//! `d` complex entries per vector. Projection: `{"m": 4, "entries": [[[re,
//! im], ...], ...]}`, row-major. Coefficients: a plain array of reals.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameSystem, ProjectionSystem, TIGHT_TOL};
use crate::linalg::{CMatrix, CVector, HermitianMatrix, C64};
use crate::pipeline::CoefficientVector;

/// Largest `|A(i, j) - conj(A(j, i))|` accepted in a projection file.
const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    d: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionFile {
    m: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

/// The contents of a file in either schema.
#[derive(Clone, Debug)]
pub enum Document {
    Frame(FrameSystem),
    Projection(ProjectionSystem),
}

/// Adding `0.0` turns `-0.0` into `0.0`, so files never carry signed zeros.
fn pair(z: &C64) -> [f64; 2] {
    [z.re + 0.0, z.im + 0.0]
}

pub fn frame_to_json(frame: &FrameSystem) -> String {
    let file =
        FrameFile { d: frame.d(), vectors: frame.vectors().iter().map(|u| u.iter().map(pair).collect()).collect() };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn projection_to_json(p: &ProjectionSystem) -> String {
    let a = p.matrix().as_matrix();
    let entries = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| pair(&a[(i, j)])).collect()).collect();
    serde_json::to_string_pretty(&ProjectionFile { m: a.nrows(), entries }).expect("plain data serializes")
}

fn frame_from_file(file: FrameFile) -> Result<FrameSystem> {
    let vectors = file
        .vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != file.d {
                return Err(Error::InvalidInput(format!(
                    "vector {i} has {} entries, expected d = {}",
                    v.len(),
                    file.d
                )));
            }
            Ok(CVector::from_iterator(file.d, v.iter().map(|[re, im]| C64::new(*re, *im))))
        })
        .collect::<Result<Vec<_>>>()?;
    if vectors.is_empty() && file.d == 0 {
        return Err(Error::InvalidInput("empty frame".into()));
    }
    build_frame(vectors, TIGHT_TOL)
}

fn projection_from_file(file: ProjectionFile) -> Result<ProjectionSystem> {
    let m = file.m;
    if file.entries.len() != m || file.entries.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidInput(format!("entries must be {m} rows of {m} complex numbers")));
    }
    let a = CMatrix::from_fn(m, m, |i, j| {
        let [re, im] = file.entries[i][j];
        C64::new(re, im)
    });
    let asym = (&a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > HERMITIAN_TOL {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian: max |A - A*| = {asym:.3e}")));
    }
    ProjectionSystem::new(HermitianMatrix::new(a)?)
}

pub fn frame_from_json(text: &str) -> Result<FrameSystem> {
    frame_from_file(serde_json::from_str(text)?)
}

pub fn projection_from_json(text: &str) -> Result<ProjectionSystem> {
    projection_from_file(serde_json::from_str(text)?)
}

/// Parses a file that must match exactly one of the two schemas.
pub fn document_from_json(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text)?;
    let has = |k: &str| value.get(k).is_some();
    match (has("vectors"), has("entries")) {
        (true, false) => Ok(Document::Frame(frame_from_file(serde_json::from_value(value)?)?)),
        (false, true) => Ok(Document::Projection(projection_from_file(serde_json::from_value(value)?)?)),
        _ => Err(Error::InvalidInput("file is neither a frame nor a projection".into())),
    }
}

pub fn coefficients_from_json(text: &str) -> Result<CoefficientVector> {
    CoefficientVector::new(serde_json::from_str::<Vec<f64>>(text)?)
}

pub fn read_frame(path: &Path) -> Result<FrameSystem> {
    frame_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_document(path: &Path) -> Result<Document> {
    document_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientVector> {
    coefficients_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::frame_to_projection;
    use crate::generate::{diagonal_counterexample, random_tight};

    #[test]
    fn frame_round_trip_is_exact() {
        let f = random_tight(3, 9, 4).unwrap();
        let text = frame_to_json(&f);
        let g = frame_from_json(&text).unwrap();
        assert_eq!(f.vectors(), g.vectors());
        assert_eq!(text, frame_to_json(&g));
    }

    #[test]
    fn projection_round_trip_is_exact() {
        let p = frame_to_projection(&diagonal_counterexample(2).unwrap()).unwrap();
        let q = projection_from_json(&projection_to_json(&p)).unwrap();
        assert_eq!(p.matrix().as_matrix(), q.matrix().as_matrix());
    }

    #[test]
    fn documents_are_classified() {
        let f = random_tight(2, 3, 0).unwrap();
        assert!(matches!(document_from_json(&frame_to_json(&f)).unwrap(), Document::Frame(_)));
        let p = frame_to_projection(&f).unwrap();
        assert!(matches!(document_from_json(&projection_to_json(&p)).unwrap(), Document::Projection(_)));
        assert!(document_from_json(r#"{"d": 1}"#).is_err());
        assert!(document_from_json(r#"{"d": 1, "vectors": [], "entries": []}"#).is_err());
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(frame_from_json(r#"{"d": 2, "vectors": [[[1, 0]]]}"#).is_err());
        assert!(frame_from_json(r#"{"d": 1, "vectors": [[[2, 0]]]}"#).is_err());
        assert!(projection_from_json(r#"{"m": 2, "entries": [[[1, 0], [1, 0]], [[0, 0], [0, 0]]]}"#).is_err());
        assert!(projection_from_json(r#"{"m": 1, "entries": [[[0.5, 0]]]}"#).is_err());
        assert!(coefficients_from_json("[0.5, 1.5]").is_err());
        assert_eq!(coefficients_from_json("[0.5, 1]").unwrap().values(), &[0.5, 1.0]);
    }
}
