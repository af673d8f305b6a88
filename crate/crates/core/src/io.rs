//! On-disk formats.
//!
//! **Pauli text.** One term per line, `<coefficient> <letters>`, where the
//! coefficient is a decimal real (scientific notation allowed) and the letters
//! are drawn from `IXYZ` with qubit 0 leftmost. Lines starting with `#` are
//! comments and blank lines are ignored:
//!
//! ```text
//! # two-site hopping
//! 5.0000000000000000e-1 XX
//! 5.0000000000000000e-1 YY
//! ```
//!
//! Writers emit 17 significant digits, so every `f64` survives a round trip,
//! and order terms by decreasing magnitude with ties broken by the letters
//! (`I < X < Y < Z`).
//!
//! **Tensor file.** A JSON document:
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "n_modes": 2,
//!   "constant": 0.0,
//!   "one_body": [[[re, im], ...], ...],            // n × n, row-major h_pq
//!   "two_body": [[[[[re, im], ...]]]],             // n × n × n × n, h_pqrs
//!   "convention": "half-pqrs-v1"
//! }
//! ```
//!
//! The convention tag names `H = c + Σ h_pq a†_p a_q + ½ Σ h_pqrs a†_p a†_q a_r a_s`.
//!
//! **Amplitude file.** `{"n_qubits": n, "amplitudes": [[re, im], ...]}` with
//! `2^n` entries in computational-basis order.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::FermionTensors;
use crate::pauli::{PauliString, PauliSum, PauliTerm};
use crate::report::{AnalysisReport, TABULAR_COLUMNS};
use crate::sim::StateVector;

pub const TENSOR_CONVENTION: &str = "half-pqrs-v1";
pub const TENSOR_FORMAT_VERSION: u32 = 1;

/// Imaginary parts above this make a sum unwritable as Pauli text.
pub const REAL_TOLERANCE: f64 = 1e-10;

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_pauli_text(path: impl AsRef<Path>) -> Result<PauliSum> {
    let path = path.as_ref();
    parse_pauli_text(&read_string(path)?, &path.display().to_string())
}

/// Parses the Pauli text grammar; `origin` labels diagnostics.
pub fn parse_pauli_text(text: &str, origin: &str) -> Result<PauliSum> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut terms = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(
                lineno,
                format!("expected `<coefficient> <letters>`, found {} fields", fields.len()),
            ));
        }
        let coeff: f64 = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("invalid coefficient {:?}", fields[0])))?;
        if !coeff.is_finite() {
            return Err(err(lineno, format!("non-finite coefficient {:?}", fields[0])));
        }
        let string: PauliString = fields[1]
            .parse()
            .map_err(|e| err(lineno, format!("invalid Pauli string {:?}: {e}", fields[1])))?;
        if string.num_qubits() == 0 {
            return Err(err(lineno, "empty Pauli string".into()));
        }
        match width {
            None => width = Some(string.num_qubits()),
            Some(w) if w != string.num_qubits() => {
                return Err(err(
                    lineno,
                    format!("string has {} qubits, earlier lines have {w}", string.num_qubits()),
                ))
            }
            _ => {}
        }
        terms.push(PauliTerm::real(coeff, string)?);
    }
    let Some(n) = width else {
        return Err(Error::Format {
            path: origin.to_string(),
            message: "no terms".into(),
        });
    };
    Ok(PauliSum::from_terms(n, terms)?.simplify())
}

/// Terms in the order the writer emits them.
pub fn canonical_order(h: &PauliSum) -> Vec<PauliTerm> {
    let mut terms = h.terms().to_vec();
    terms.sort_by(|a, b| {
        b.coeff
            .re
            .abs()
            .total_cmp(&a.coeff.re.abs())
            .then_with(|| a.string.cmp(&b.string))
    });
    terms
}

pub fn format_pauli_text(h: &PauliSum) -> Result<String> {
    h.real_coefficients(REAL_TOLERANCE)?;
    let mut out = format!(
        "# pauli sum: {} qubits, {} terms; qubit 0 is the leftmost letter\n",
        h.num_qubits(),
        h.len()
    );
    for t in canonical_order(h) {
        out.push_str(&format!("{:.16e} {}\n", t.coeff.re, t.string));
    }
    Ok(out)
}

pub fn write_pauli_text(h: &PauliSum, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &format_pauli_text(h)?)
}

type Pair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorDocument {
    format_version: u32,
    n_modes: usize,
    constant: f64,
    one_body: Vec<Vec<Pair>>,
    two_body: Vec<Vec<Vec<Vec<Pair>>>>,
    convention: String,
}

fn pair(c: Complex64) -> Pair {
    [c.re, c.im]
}

pub fn read_tensor_file(path: impl AsRef<Path>) -> Result<FermionTensors> {
    let path = path.as_ref();
    parse_tensor_document(&read_string(path)?, &path.display().to_string())
}

pub fn parse_tensor_document(text: &str, origin: &str) -> Result<FermionTensors> {
    let bad = |message: String| Error::Format {
        path: origin.to_string(),
        message,
    };
    let doc: TensorDocument =
        serde_json::from_str(text).map_err(|e| bad(format!("invalid tensor document: {e}")))?;
    if doc.convention != TENSOR_CONVENTION {
        return Err(bad(format!(
            "unknown convention tag {:?}, expected {TENSOR_CONVENTION:?}",
            doc.convention
        )));
    }
    if doc.format_version != TENSOR_FORMAT_VERSION {
        return Err(bad(format!("unsupported format_version {}", doc.format_version)));
    }
    let n = doc.n_modes;
    let shape_err = |what: &str| bad(format!("{what} does not have shape matching n_modes = {n}"));
    if doc.one_body.len() != n || doc.one_body.iter().any(|r| r.len() != n) {
        return Err(shape_err("one_body"));
    }
    let ok4 = doc.two_body.len() == n
        && doc.two_body.iter().all(|a| {
            a.len() == n && a.iter().all(|b| b.len() == n && b.iter().all(|c| c.len() == n))
        });
    if !ok4 {
        return Err(shape_err("two_body"));
    }
    let c = |p: &Pair| Complex64::new(p[0], p[1]);
    let t = FermionTensors {
        n_modes: n,
        constant: doc.constant,
        one_body: doc.one_body.iter().flatten().map(c).collect(),
        two_body: doc
            .two_body
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(c)
            .collect(),
    };
    t.validate()?;
    Ok(t)
}

pub fn format_tensor_document(t: &FermionTensors) -> Result<String> {
    let n = t.n_modes;
    let doc = TensorDocument {
        format_version: TENSOR_FORMAT_VERSION,
        n_modes: n,
        constant: t.constant,
        one_body: (0..n)
            .map(|p| (0..n).map(|q| pair(t.one(p, q))).collect())
            .collect(),
        two_body: (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| {
                        (0..n)
                            .map(|r| (0..n).map(|s| pair(t.two(p, q, r, s))).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        convention: TENSOR_CONVENTION.into(),
    };
    let mut text = serde_json::to_string(&doc).map_err(|e| Error::Invariant(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_tensor_file(t: &FermionTensors, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &format_tensor_document(t)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeDocument {
    n_qubits: usize,
    amplitudes: Vec<Pair>,
}

pub fn read_amplitude_file(path: impl AsRef<Path>) -> Result<StateVector> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let doc: AmplitudeDocument =
        serde_json::from_str(&read_string(path)?).map_err(|e| Error::Format {
            path: origin.clone(),
            message: format!("invalid amplitude document: {e}"),
        })?;
    StateVector::from_amplitudes(
        doc.n_qubits,
        doc.amplitudes.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
    )
}

pub fn write_amplitude_file(state: &StateVector, path: impl AsRef<Path>) -> Result<()> {
    let doc = AmplitudeDocument {
        n_qubits: state.num_qubits(),
        amplitudes: state.amplitudes().iter().map(|&c| pair(c)).collect(),
    };
    let text = serde_json::to_string(&doc).map_err(|e| Error::Invariant(e.to_string()))?;
    write_string(path.as_ref(), &(text + "\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Structured,
    Tabular,
}

pub fn format_report(r: &AnalysisReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Structured => {
            let mut text =
                serde_json::to_string_pretty(r).map_err(|e| Error::Invariant(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Tabular => format_tabular(&[r.tabular_row()], &[]),
    }
}

/// Comma-separated table with [`TABULAR_COLUMNS`] preceded by `extra`
/// leading columns; each row must carry values for both.
pub fn format_tabular(rows: &[Vec<String>], extra: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = extra
        .iter()
        .map(String::as_str)
        .chain(TABULAR_COLUMNS.iter().copied())
        .collect();
    let csv_err = |e: csv::Error| Error::Invariant(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Invariant(format!(
                "tabular row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

pub fn write_report(r: &AnalysisReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    write_string(path.as_ref(), &format_report(r, format)?)
}
