//! `analyze`: load → encode → build → analyze → report.

use std::path::{Path, PathBuf};

use hamsim_core::io::{format_report, read_amplitude_file, ReportFormat};
use hamsim_core::ir::AlgorithmGraph;
use hamsim_core::qpe::{build_time_evolution, optimize_time, QpeDesign, QpeSpec};
use hamsim_core::report::{
    AnalysisReport, CircuitSummary, EigenSummary, EncodingSummary, HamiltonianSummary, QpeSummary,
    ResourceSummary, SimulationSummary,
};
use hamsim_core::resources::{ResourceCounter, ResourceEstimate};
use hamsim_core::sim::{self, Eigensystem, StateVector};
use hamsim_core::trotter::{TrotterModel, TrotterPlan, TrotterRequest};
use hamsim_core::PauliSum;

use crate::config::{
    get_key, load_config, Algorithm, AnalysisConfig, AnalysisKind, CircuitConfig, EncodingConfig, LoadedConfig,
};
use crate::error::{CliError, CliResult, Within};
use crate::hamgen::load_hamiltonian;

/// Command-line adjustments applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub format: Option<ReportFormat>,
}

impl AnalyzeOptions {
    /// Folds `--seed` and `--format` into the override list. The seed only
    /// lands when the config has an `[encoding]` section to receive it.
    pub fn effective_overrides(&self, table: &toml::Table) -> Vec<String> {
        let mut o = self.overrides.clone();
        if let Some(seed) = self.seed {
            if get_key(table, "encoding").is_some() {
                o.push(format!("encoding.seed={seed}"));
            } else {
                log::warn!("--seed ignored: the config has no [encoding] section");
            }
        }
        if let Some(f) = self.format {
            if get_key(table, "analysis").is_some() {
                let name = match f {
                    ReportFormat::Structured => "structured",
                    ReportFormat::Tabular => "tabular",
                };
                o.push(format!("analysis.format={name}"));
            }
        }
        o
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub report: AnalysisReport,
    pub path: PathBuf,
    pub text: String,
}

pub fn analyze(config_path: &Path, out_dir: &Path, opts: &AnalyzeOptions) -> CliResult<AnalyzeOutcome> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let table = crate::config::parse_table(&text, &config_path.display().to_string())?;
    let cfg = load_config(config_path, &opts.effective_overrides(&table))?;
    let report = run_analysis(&cfg)?;
    let (path, text) = write_report_file(&cfg, &report, out_dir)?;
    Ok(AnalyzeOutcome { report, path, text })
}

pub fn report_format(cfg: &LoadedConfig) -> ReportFormat {
    cfg.config
        .analysis
        .as_ref()
        .and_then(|a| a.format)
        .unwrap_or_default()
}

/// Writes the report as `<output>.json` or `<output>.csv` inside `out_dir`.
pub fn write_report_file(cfg: &LoadedConfig, report: &AnalysisReport, out_dir: &Path) -> CliResult<(PathBuf, String)> {
    let format = report_format(cfg);
    let stem = cfg
        .config
        .analysis
        .as_ref()
        .map(|a| a.output.as_str())
        .unwrap_or("report");
    let ext = match format {
        ReportFormat::Structured => "json",
        ReportFormat::Tabular => "csv",
    };
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let text = format_report(report, format).within("ham-io")?;
    let path = out_dir.join(format!("{stem}.{ext}"));
    std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
    Ok((path, text))
}

/// The built circuit and everything derived on the way.
struct Built {
    algorithm: Algorithm,
    plan: TrotterPlan,
    graph: AlgorithmGraph,
    encoding: EncodingSummary,
    circuit: CircuitSummary,
    design: Option<QpeDesign>,
    /// Synthesis budget for plain time evolution, when one is known.
    synthesis_budget: Option<f64>,
}

/// Runs the configured pipeline and returns the report without writing it.
pub fn run_analysis(cfg: &LoadedConfig) -> CliResult<AnalysisReport> {
    let analysis = cfg
        .config
        .analysis
        .as_ref()
        .ok_or_else(|| CliError::config("analysis", "section is required for analyze"))?;
    let (h, source) = load_hamiltonian(cfg)?;
    let mut report = AnalysisReport::new(HamiltonianSummary {
        source,
        n_qubits: h.num_qubits(),
        n_terms: h.len(),
        one_norm: h.coeff_one_norm(),
    });

    if analysis.kind == AnalysisKind::Eigen {
        let eig = sim::eigendecompose(&h).within("statevec-sim")?;
        report.eigen = Some(EigenSummary {
            eigenvalues: eig.values.to_vec(),
        });
        return Ok(report);
    }

    let built = build(cfg, &h, analysis)?;
    report.encoding = Some(built.encoding.clone());
    report.circuit = Some(built.circuit.clone());

    match analysis.kind {
        AnalysisKind::Resources => {
            let estimate = match &built.design {
                Some(d) => d.estimate.clone(),
                None => {
                    let budget = built.synthesis_budget.ok_or_else(|| {
                        CliError::config(
                            "analysis.synthesis_error",
                            "required for a resource count when encoding.max_error is not set",
                        )
                    })?;
                    let model = analysis.synthesis.unwrap_or_default();
                    ResourceCounter::new(&built.graph)
                        .estimate(&model, budget)
                        .within("resource-analysis")?
                }
            };
            report.resources = Some(resource_summary(&estimate));
        }
        AnalysisKind::Simulate => {
            report.simulation = Some(simulate(cfg, &h, analysis, &built)?);
        }
        AnalysisKind::QpeDistribution => {
            let design = built.design.as_ref().ok_or_else(|| {
                CliError::config("circuit.algorithm", "qpe_distribution needs algorithm = \"phase_estimation\"")
            })?;
            let psi = initial_state(cfg, analysis, h.num_qubits())?;
            let eig = sim::eigendecompose(&h).within("statevec-sim")?;
            report.qpe = Some(qpe_summary(&eig, design, &psi, describe_state(analysis, h.num_qubits()))?);
        }
        AnalysisKind::Eigen => unreachable!("handled above"),
    }
    Ok(report)
}

fn require<'a, T>(v: Option<&'a T>, key: &str, why: &str) -> CliResult<&'a T> {
    v.ok_or_else(|| CliError::config(key, why))
}

fn build(cfg: &LoadedConfig, h: &PauliSum, analysis: &AnalysisConfig) -> CliResult<Built> {
    let c = &cfg.config;
    let circuit: &CircuitConfig = require(c.circuit.as_ref(), "circuit", "section is required for this analysis")?;
    let enc: &EncodingConfig = require(c.encoding.as_ref(), "encoding", "section is required for this analysis")?;
    let ordering = enc.strategy()?;
    let request = TrotterRequest {
        order: enc.order,
        steps: enc.steps,
        ordering: ordering.clone(),
    };
    let mut enc_pinned = Vec::new();
    if enc.order.is_some() {
        enc_pinned.push("order".to_string());
    }
    if enc.steps.is_some() {
        enc_pinned.push("steps".to_string());
    }
    let synthesis = analysis.synthesis.unwrap_or_default();

    let qpe_spec = |require_all: bool| -> CliResult<Option<QpeSpec>> {
        match (circuit.max_energy_error, circuit.failure_probability) {
            (Some(eps), Some(delta)) => {
                let mut spec = QpeSpec::new(eps, delta);
                spec.split = circuit.budget_split.unwrap_or_default();
                spec.trotter = request.clone();
                spec.synthesis = synthesis;
                Ok(Some(spec))
            }
            (None, _) if require_all => Err(CliError::config(
                "circuit.max_energy_error",
                "required for phase estimation",
            )),
            (_, None) if require_all => Err(CliError::config(
                "circuit.failure_probability",
                "required for phase estimation",
            )),
            _ => Ok(None),
        }
    };

    if circuit.algorithm == Algorithm::PhaseEstimation {
        if enc.max_error.is_some() {
            log::warn!(
                "encoding.max_error is not used for phase estimation; the Trotter budget comes from circuit.budget_split"
            );
        }
        let mut spec = qpe_spec(true)?.expect("required above");
        spec.evolution_time = circuit.evolution_time;
        spec.phase_qubits = circuit.phase_qubits;
        let design = optimize_time(h, &spec).within("qpe-builder")?;
        let p = &design.params;
        let mut pinned = Vec::new();
        if circuit.evolution_time.is_some() {
            pinned.push("evolution_time".to_string());
        }
        if circuit.phase_qubits.is_some() {
            pinned.push("phase_qubits".to_string());
        }
        let budget = (enc.steps.is_none()).then(|| p.budget_split.trotter * p.energy_error * p.time);
        let encoding = encoding_summary(&design.plan, budget, enc_pinned);
        let circuit_summary = CircuitSummary {
            algorithm: circuit.algorithm.as_str().into(),
            width: design.graph.width(),
            definitions: design.graph.definitions().len(),
            phase_qubits: Some(p.phase_qubits),
            precision_bits: Some(p.precision_bits),
            confidence_bits: Some(p.confidence_bits),
            evolution_time: p.time,
            shift: Some(p.shift),
            energy_error: Some(p.energy_error),
            failure_probability: Some(p.failure_probability),
            budget_split: Some(p.budget_split.as_array()),
            overridden: pinned,
        };
        return Ok(Built {
            algorithm: circuit.algorithm,
            plan: design.plan.clone(),
            graph: design.graph.clone(),
            encoding,
            circuit: circuit_summary,
            synthesis_budget: None,
            design: Some(design),
        });
    }

    if circuit.phase_qubits.is_some() {
        return Err(CliError::config("circuit.phase_qubits", "only used with algorithm = \"phase_estimation\""));
    }
    // Without an explicit time, fall back to the time phase estimation would
    // pick for the same requirements.
    let mut pinned = Vec::new();
    let t = match circuit.evolution_time {
        Some(t) => {
            pinned.push("evolution_time".to_string());
            t
        }
        None => match qpe_spec(false)? {
            Some(spec) => optimize_time(h, &spec).within("qpe-builder")?.params.time,
            None => {
                return Err(CliError::config(
                    "circuit.evolution_time",
                    "required unless max_energy_error and failure_probability are given",
                ))
            }
        },
    };
    let budget = match (enc.max_error, enc.steps) {
        (Some(e), _) => e,
        (None, Some(_)) => f64::NAN,
        (None, None) => {
            return Err(CliError::config("encoding.max_error", "required unless encoding.steps is set"))
        }
    };
    let model = TrotterModel::new(h, &ordering).within("trotter-encode")?;
    let plan = model.plan(t, budget, &request).within("trotter-encode")?;
    let controlled = circuit.algorithm == Algorithm::ControlledTimeEvolution;
    let graph = build_time_evolution(&plan, controlled).within("trotter-encode")?;
    let encoding = encoding_summary(&plan, enc.steps.is_none().then_some(budget), enc_pinned);
    let circuit_summary = CircuitSummary {
        algorithm: circuit.algorithm.as_str().into(),
        width: graph.width(),
        definitions: graph.definitions().len(),
        phase_qubits: None,
        precision_bits: None,
        confidence_bits: None,
        evolution_time: t,
        shift: None,
        energy_error: None,
        failure_probability: None,
        budget_split: None,
        overridden: pinned,
    };
    Ok(Built {
        algorithm: circuit.algorithm,
        plan,
        graph,
        encoding,
        circuit: circuit_summary,
        design: None,
        synthesis_budget: analysis.synthesis_error.or(enc.max_error),
    })
}

fn encoding_summary(plan: &TrotterPlan, budget: Option<f64>, overridden: Vec<String>) -> EncodingSummary {
    EncodingSummary {
        method: "trotter".into(),
        order: plan.order.as_str().into(),
        steps: plan.steps,
        evolution_time: plan.time,
        error_bound: plan.error_bound,
        error_budget: budget,
        ordering: plan.ordering.describe(),
        overridden,
    }
}

pub fn resource_summary(e: &ResourceEstimate) -> ResourceSummary {
    ResourceSummary {
        qubits: e.counts.qubits,
        clifford: e.counts.clifford.to_string(),
        t_gates: e.counts.t_gates.to_string(),
        t_gates_structural: e.structural.t_gates.to_string(),
        rotations: e.counts.rotations.to_string(),
        synthesis_budget: e.synthesis_budget,
        per_rotation_tolerance: e.per_rotation_tolerance,
        t_per_rotation: e.t_per_rotation,
    }
}

fn describe_state(a: &AnalysisConfig, width: usize) -> String {
    match (&a.initial_state, &a.initial_state_file) {
        (Some(bits), _) => format!("|{bits}>"),
        (None, Some(p)) => format!("file:{}", p.display()),
        (None, None) => format!("|{}>", "0".repeat(width)),
    }
}

fn initial_state(cfg: &LoadedConfig, a: &AnalysisConfig, width: usize) -> CliResult<StateVector> {
    let psi = match (&a.initial_state, &a.initial_state_file) {
        (Some(bits), _) => StateVector::from_bitstring(bits)
            .map_err(|e| CliError::config("analysis.initial_state", e))?,
        (None, Some(p)) => read_amplitude_file(cfg.resolve(p)).within("ham-io")?,
        (None, None) => StateVector::zero(width).within("statevec-sim")?,
    };
    if psi.num_qubits() != width {
        let key = if a.initial_state_file.is_some() {
            "analysis.initial_state_file"
        } else {
            "analysis.initial_state"
        };
        return Err(CliError::config(
            key,
            format!("state has {} qubits, the circuit input needs {width}", psi.num_qubits()),
        ));
    }
    Ok(psi)
}

fn simulate(cfg: &LoadedConfig, h: &PauliSum, a: &AnalysisConfig, b: &Built) -> CliResult<SimulationSummary> {
    let n = h.num_qubits();
    match b.algorithm {
        Algorithm::PhaseEstimation => {
            let design = b.design.as_ref().expect("phase estimation has a design");
            let m = design.params.phase_qubits;
            let data = initial_state(cfg, a, n)?;
            let input = StateVector::zero(m)
                .and_then(|z| z.tensor(&data))
                .within("statevec-sim")?;
            let out = sim::run(&b.graph, &input).within("statevec-sim")?;
            Ok(SimulationSummary {
                initial_state: describe_state(a, n),
                final_norm: out.norm(),
                fidelity: None,
                state_error: None,
                phase_distribution: Some(out.leading_marginal(m).within("statevec-sim")?),
            })
        }
        Algorithm::TimeEvolution | Algorithm::ControlledTimeEvolution => {
            let controlled = b.algorithm == Algorithm::ControlledTimeEvolution;
            let width = n + usize::from(controlled);
            let psi = initial_state(cfg, a, width)?;
            let out = sim::run(&b.graph, &psi).within("statevec-sim")?;
            let eig = sim::eigendecompose(h).within("statevec-sim")?;
            let exact = if controlled {
                sim::exact_controlled_evolution(&eig, b.plan.time, &psi)
            } else {
                sim::exact_evolution_with(&eig, b.plan.time, &psi)
            }
            .within("statevec-sim")?;
            Ok(SimulationSummary {
                initial_state: describe_state(a, width),
                final_norm: out.norm(),
                fidelity: Some(sim::fidelity(&out, &exact).within("statevec-sim")?),
                state_error: Some(sim::state_distance(&out, &exact).within("statevec-sim")?),
                phase_distribution: None,
            })
        }
    }
}

/// Analytic outcome distribution. The window is centred on the eigenphase
/// of the eigenvector with the largest overlap (lowest energy on ties).
fn qpe_summary(eig: &Eigensystem, d: &QpeDesign, psi: &StateVector, label: String) -> CliResult<QpeSummary> {
    let p = &d.params;
    let probs = sim::qpe_distribution_with(eig, p.phase_qubits, p.time, p.shift, psi).within("statevec-sim")?;
    let most_likely = probs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
        .0;
    let overlaps = eig.vectors.adjoint() * psi.to_dvector();
    let dominant = overlaps
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, c)| {
            let w = c.norm_sqr();
            if w > best.1 + 1e-12 {
                (i, w)
            } else {
                best
            }
        })
        .0;
    let theta = sim::eigenphase(eig.values[dominant], p.shift, p.time);
    Ok(QpeSummary {
        initial_state: label,
        most_likely,
        energy_estimate: p.energy_of(most_likely),
        window_halfwidth: p.phase_window(),
        window_mass: sim::window_mass(&probs, theta, p.phase_window()),
        probabilities: probs,
    })
}
