//! Built-in spin-chain Hamiltonians in the Pauli convention (no factors of ¼).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpinModel {
    /// `Σ J (X_i X_j + Y_i Y_j) + J Δ Z_i Z_j` over bonds.
    XxzChain { j: f64, delta: f64 },
    /// `-J Σ Z_i Z_j - g Σ X_i`.
    TfimChain { j: f64, g: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinModelSpec {
    #[serde(flatten)]
    pub model: SpinModel,
    pub sites: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl SpinModelSpec {
    pub fn xxz(sites: usize, j: f64, delta: f64, boundary: Boundary) -> Self {
        SpinModelSpec {
            model: SpinModel::XxzChain { j, delta },
            sites,
            boundary,
        }
    }

    pub fn tfim(sites: usize, j: f64, g: f64, boundary: Boundary) -> Self {
        SpinModelSpec {
            model: SpinModel::TfimChain { j, g },
            sites,
            boundary,
        }
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut bonds: Vec<_> = (0..l - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((l - 1, 0));
        }
        bonds
    }
}

/// Generates the model Hamiltonian. Terms are emitted bond by bond (XX, YY, ZZ
/// for XXZ; all ZZ bonds then all X fields for the Ising chain). A periodic
/// chain of two sites lists its one bond twice, so like terms are combined
/// and that bond carries twice the coupling.
pub fn generate(spec: &SpinModelSpec) -> Result<PauliSum> {
    let l = spec.sites;
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "spin chain needs at least 2 sites, got {l}"
        )));
    }
    let params: &[f64] = match &spec.model {
        SpinModel::XxzChain { j, delta } => &[*j, *delta],
        SpinModel::TfimChain { j, g } => &[*j, *g],
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite(format!("{:?}", spec.model)));
    }
    let pair = |a: usize, b: usize, p: Pauli| PauliString::from_sparse(l, [(a, p), (b, p)]);
    let mut h = PauliSum::new(l);
    match spec.model {
        SpinModel::XxzChain { j, delta } => {
            for (a, b) in spec.bonds() {
                h.push(PauliTerm::real(j, pair(a, b, Pauli::X))?)?;
                h.push(PauliTerm::real(j, pair(a, b, Pauli::Y))?)?;
                h.push(PauliTerm::real(j * delta, pair(a, b, Pauli::Z))?)?;
            }
        }
        SpinModel::TfimChain { j, g } => {
            for (a, b) in spec.bonds() {
                h.push(PauliTerm::real(-j, pair(a, b, Pauli::Z))?)?;
            }
            if g != 0.0 {
                for i in 0..l {
                    h.push(PauliTerm::real(-g, PauliString::single(l, i, Pauli::X))?)?;
                }
            }
        }
    }
    Ok(h.simplify())
}
