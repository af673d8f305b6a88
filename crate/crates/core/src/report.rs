//! The analysis report written by the driver: every derived parameter plus
//! the results of whichever analysis ran.

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = "hamsim-report-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub conventions: Conventions,
    pub hamiltonian: HamiltonianSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qpe: Option<QpeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub hbar: f64,
    pub qubit_order: String,
    pub phase: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            hbar: 1.0,
            qubit_order: "qubit 0 is the leftmost Pauli letter and the most significant bit".into(),
            phase: "U = exp(-i (H + shift) t); outcome k gives theta = k / 2^m and E = 2 pi theta / t - shift".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSummary {
    pub source: String,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub one_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSummary {
    pub method: String,
    pub order: String,
    pub steps: u64,
    pub evolution_time: f64,
    pub error_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_budget: Option<f64>,
    pub ordering: String,
    pub overridden: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub algorithm: String,
    pub width: usize,
    pub definitions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_bits: Option<usize>,
    pub evolution_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_probability: Option<f64>,
    /// Energy-error budget split `(trotter, discretization, synthesis)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_split: Option<[f64; 3]>,
    pub overridden: Vec<String>,
}

/// Counts are decimal strings; they can exceed 64 bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSummary {
    pub qubits: usize,
    pub clifford: String,
    pub t_gates: String,
    pub t_gates_structural: String,
    pub rotations: String,
    pub synthesis_budget: f64,
    pub per_rotation_tolerance: f64,
    pub t_per_rotation: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub initial_state: String,
    pub final_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_distribution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeSummary {
    pub initial_state: String,
    pub probabilities: Vec<f64>,
    pub most_likely: usize,
    pub energy_estimate: f64,
    pub window_halfwidth: f64,
    pub window_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub eigenvalues: Vec<f64>,
}

/// Column names for the comma-separated form, one row per report.
pub const TABULAR_COLUMNS: &[&str] = &[
    "source",
    "n_qubits",
    "n_terms",
    "one_norm",
    "algorithm",
    "order",
    "steps",
    "evolution_time",
    "error_bound",
    "phase_qubits",
    "width",
    "clifford",
    "t_gates",
    "rotations",
    "fidelity",
    "state_error",
    "energy_estimate",
    "window_mass",
    "ground_energy",
];

impl AnalysisReport {
    pub fn new(hamiltonian: HamiltonianSummary) -> Self {
        AnalysisReport {
            schema: REPORT_SCHEMA.into(),
            conventions: Conventions::default(),
            hamiltonian,
            encoding: None,
            circuit: None,
            resources: None,
            simulation: None,
            qpe: None,
            eigen: None,
        }
    }

    pub fn tabular_row(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        let enc = self.encoding.as_ref();
        let circ = self.circuit.as_ref();
        let res = self.resources.as_ref();
        let sim = self.simulation.as_ref();
        vec![
            self.hamiltonian.source.clone(),
            self.hamiltonian.n_qubits.to_string(),
            self.hamiltonian.n_terms.to_string(),
            self.hamiltonian.one_norm.to_string(),
            opt(circ.map(|c| c.algorithm.clone())),
            opt(enc.map(|e| e.order.clone())),
            opt(enc.map(|e| e.steps)),
            opt(circ.map(|c| c.evolution_time).or(enc.map(|e| e.evolution_time))),
            opt(enc.map(|e| e.error_bound)),
            opt(circ.and_then(|c| c.phase_qubits)),
            opt(circ.map(|c| c.width)),
            opt(res.map(|r| r.clifford.clone())),
            opt(res.map(|r| r.t_gates.clone())),
            opt(res.map(|r| r.rotations.clone())),
            opt(sim.and_then(|s| s.fidelity)),
            opt(sim.and_then(|s| s.state_error)),
            opt(self.qpe.as_ref().map(|q| q.energy_estimate)),
            opt(self.qpe.as_ref().map(|q| q.window_mass)),
            opt(self.eigen.as_ref().and_then(|e| e.eigenvalues.first().copied())),
        ]
    }
}
