//! Versioned JSON documents for matrices and vectors. Complex numbers are
//! `[re, im]` pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexScalar, ComplexVector};
use crate::models::ModelInstance;

pub const DOCUMENT_VERSION: u32 = 1;

fn default_version() -> u32 {
    DOCUMENT_VERSION
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn scalar(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn check_version(v: u32) -> Result<()> {
    if v == DOCUMENT_VERSION {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "unsupported format_version {v}, expected {DOCUMENT_VERSION}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue_ep: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl MatrixDocument {
    pub fn from_matrix(
        m: &ComplexMatrix,
        eigenvalue_ep: Option<ComplexScalar>,
        order: Option<usize>,
    ) -> Result<Self> {
        m.check_square()?;
        let n = m.rows();
        Ok(MatrixDocument {
            format_version: DOCUMENT_VERSION,
            n,
            entries: (0..n)
                .map(|i| (0..n).map(|j| pair(m[(i, j)])).collect())
                .collect(),
            eigenvalue_ep: eigenvalue_ep.map(pair),
            order,
        })
    }

    pub fn from_model(model: &ModelInstance) -> Result<Self> {
        Self::from_matrix(&model.h0, Some(model.eigenvalue_ep), Some(model.order))
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        check_version(self.format_version)?;
        if self.entries.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but {} rows given",
                self.n,
                self.entries.len()
            )));
        }
        let rows: Vec<Vec<Complex64>> = self
            .entries
            .iter()
            .map(|row| row.iter().copied().map(scalar).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows)?;
        if m.cols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but rows have {} entries",
                self.n,
                m.cols()
            )));
        }
        Ok(m)
    }

    pub fn eigenvalue(&self) -> Option<ComplexScalar> {
        self.eigenvalue_ep.map(scalar)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixDocument = serde_json::from_str(text)?;
        doc.matrix()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_json()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDocument {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub entries: Vec<[f64; 2]>,
}

impl VectorDocument {
    pub fn from_vector(v: &ComplexVector) -> Self {
        VectorDocument {
            format_version: DOCUMENT_VERSION,
            entries: v.iter().copied().map(pair).collect(),
        }
    }

    pub fn vector(&self) -> Result<ComplexVector> {
        check_version(self.format_version)?;
        ComplexVector::new(self.entries.iter().copied().map(scalar).collect())
    }

    pub fn load(path: &Path) -> Result<ComplexVector> {
        let doc: VectorDocument = serde_json::from_str(&read(path)?)?;
        doc.vector()
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number '{}': {e}", s.trim())))
        })
        .collect()
}

/// Parses `re,im`.
pub fn parse_complex(text: &str) -> Result<ComplexScalar> {
    match parse_reals(text)?.as_slice() {
        [re, im] if re.is_finite() && im.is_finite() => Ok(Complex64::new(*re, *im)),
        [_, _] => Err(Error::NonFinite("complex number")),
        _ => Err(Error::invalid(format!("expected 're,im', got '{text}'"))),
    }
}

/// Parses `re,im,re,im,...` into a vector.
pub fn parse_inline_vector(text: &str) -> Result<ComplexVector> {
    let reals = parse_reals(text)?;
    if reals.is_empty() || reals.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "expected an even number of comma-separated reals, got {}",
            reals.len()
        )));
    }
    ComplexVector::new(
        reals
            .chunks(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::pt_trimer;

    #[test]
    fn matrix_document_round_trip() {
        let model = pt_trimer(0.5, 1.0).unwrap();
        let doc = MatrixDocument::from_model(&model).unwrap();
        let back = MatrixDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back.matrix().unwrap(), model.h0);
        assert_eq!(back.eigenvalue(), Some(model.eigenvalue_ep));
        assert_eq!(back.order, Some(3));
    }

    #[test]
    fn ragged_and_mismatched_documents_are_rejected() {
        let ragged = r#"{"format_version": 1, "n": 2, "entries": [[[1, 0], [0, 0]], [[0, 0]]]}"#;
        assert!(MatrixDocument::from_json(ragged).is_err());
        let short =
            r#"{"format_version": 1, "n": 3, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;
        assert!(matches!(
            MatrixDocument::from_json(short),
            Err(Error::DimensionMismatch(_))
        ));
        let version = r#"{"format_version": 2, "n": 1, "entries": [[[1, 0]]]}"#;
        assert!(MatrixDocument::from_json(version).is_err());
    }

    #[test]
    fn inline_vectors() {
        let v = parse_inline_vector("0,0, 1,0").unwrap();
        assert_eq!(v, ComplexVector::basis(2, 1));
        assert!(parse_inline_vector("1,0,1").is_err());
        assert!(parse_inline_vector("a,b").is_err());
        assert_eq!(parse_complex("0,-0.5").unwrap(), Complex64::new(0.0, -0.5));
        assert!(parse_complex("1").is_err());
    }

    #[test]
    fn vector_document_round_trip() {
        let v = parse_inline_vector("0.6,0,0,0.8").unwrap();
        let text = serde_json::to_string(&VectorDocument::from_vector(&v)).unwrap();
        let doc: VectorDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.vector().unwrap(), v);
    }
}
