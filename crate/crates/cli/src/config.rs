//! Declarative run configuration.
//!
//! Configs are TOML documents with four sections. Parsing goes through a
//! `toml::Table` first so that `--override` edits and sweep grid points can be
//! applied before the strict, typed pass. Every key is checked: unknown or
//! mistyped keys fail with the dotted path of the offending entry.

use std::path::{Path, PathBuf};

use hamsim_core::fermion::Mapping;
use hamsim_core::io::ReportFormat;
use hamsim_core::qpe::BudgetSplit;
use hamsim_core::resources::SynthesisModel;
use hamsim_core::spin::SpinModelSpec;
use hamsim_core::trotter::{OrderingStrategy, TrotterOrder};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianSource {
    PauliFile,
    TensorFile,
    SpinModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub source: HamiltonianSource,
    /// Pauli text file or tensor file, relative to the config's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Mapping>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SpinModelSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMethod {
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    AsGiven,
    Lexicographic,
    MagnitudeDescending,
    Random,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub method: EncodingMethod,
    /// Operator-norm Trotter budget for plain time evolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<TrotterOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

impl EncodingConfig {
    pub fn strategy(&self) -> CliResult<OrderingStrategy> {
        Ok(match self.ordering.unwrap_or(OrderingKind::AsGiven) {
            OrderingKind::AsGiven => OrderingStrategy::AsGiven,
            OrderingKind::Lexicographic => OrderingStrategy::Lexicographic,
            OrderingKind::MagnitudeDescending => OrderingStrategy::MagnitudeDescending,
            OrderingKind::Random => OrderingStrategy::Random {
                seed: self
                    .seed
                    .ok_or_else(|| CliError::config("encoding.seed", "required when ordering = \"random\""))?,
            },
            OrderingKind::Custom => OrderingStrategy::Custom {
                permutation: self.permutation.clone().ok_or_else(|| {
                    CliError::config("encoding.permutation", "required when ordering = \"custom\"")
                })?,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PhaseEstimation,
    TimeEvolution,
    ControlledTimeEvolution,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::PhaseEstimation => "phase_estimation",
            Algorithm::TimeEvolution => "time_evolution",
            Algorithm::ControlledTimeEvolution => "controlled_time_evolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_energy_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_split: Option<BudgetSplit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Resources,
    Simulate,
    QpeDistribution,
    Eigen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(rename = "type")]
    pub kind: AnalysisKind,
    /// Computational-basis bitstring, qubit 0 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    /// Amplitude file, used instead of `initial_state`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state_file: Option<PathBuf>,
    /// Report file stem inside the output directory.
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<ReportFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisModel>,
    /// Operator-norm synthesis budget for time-evolution circuits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis_error: Option<f64>,
}

fn default_output() -> String {
    "report".into()
}

/// A parsed config plus where it came from and which keys were overridden.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// The raw table after overrides; sweeps write this back out.
    pub table: Table,
    /// Relative paths in the config resolve against this directory.
    pub base_dir: PathBuf,
    /// File stem of the config, used to name generated files.
    pub stem: String,
    /// Dotted keys set through overrides, in the order given.
    pub overridden: Vec<String>,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Whether the dotted `key` was set through an override.
    pub fn is_overridden(&self, key: &str) -> bool {
        self.overridden.iter().any(|k| k == key)
    }
}

/// Reads `path`, applies `overrides` (each `a.b.c=value`) and validates.
pub fn load_config(path: &Path, overrides: &[String]) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table = parse_table(&text, &path.display().to_string())?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into());
    from_table(table, base_dir, stem, overrides)
}

pub fn parse_table(text: &str, origin: &str) -> CliResult<Table> {
    text.parse::<Table>()
        .map_err(|e| CliError::Config(format!("{origin}: {}", e.to_string().trim_end())))
}

/// Applies overrides to `table` and runs the typed pass.
pub fn from_table(mut table: Table, base_dir: PathBuf, stem: String, overrides: &[String]) -> CliResult<LoadedConfig> {
    let mut overridden = Vec::new();
    for o in overrides {
        let (key, value) = parse_assignment(o)?;
        set_key(&mut table, &key, value)?;
        overridden.push(key);
    }
    let config = typed(&table)?;
    validate(&config)?;
    Ok(LoadedConfig {
        config,
        table,
        base_dir,
        stem,
        overridden,
    })
}

fn typed(table: &Table) -> CliResult<RunConfig> {
    let value = Value::Table(table.clone());
    serde_path_to_error::deserialize::<_, RunConfig>(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let inner = inner.split_whitespace().collect::<Vec<_>>().join(" ");
        if path == "." || path.is_empty() {
            CliError::Config(inner)
        } else {
            CliError::Config(format!("{path}: {inner}"))
        }
    })
}

/// Splits `a.b=value`. The value is read as a TOML literal when it parses as
/// one and as a bare string otherwise, so `order=second` works unquoted.
pub fn parse_assignment(s: &str) -> CliResult<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {s:?}: expected KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("override {s:?}: malformed key")));
    }
    Ok((key.to_string(), parse_value(raw.trim())))
}

pub fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Sets a dotted key, creating intermediate tables as needed.
pub fn set_key(table: &mut Table, key: &str, value: Value) -> CliResult<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for (i, p) in parents.iter().enumerate() {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => {
                return Err(CliError::Config(format!(
                    "{}: not a section, cannot set {key}",
                    parts[..=i].join(".")
                )))
            }
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Looks up a dotted key.
pub fn get_key<'t>(table: &'t Table, key: &str) -> Option<&'t Value> {
    let mut parts = key.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn positive(key: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::config(key, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

/// Cross-field checks that serde cannot express.
fn validate(c: &RunConfig) -> CliResult<()> {
    let h = &c.hamiltonian;
    match h.source {
        HamiltonianSource::PauliFile | HamiltonianSource::TensorFile => {
            if h.path.is_none() {
                return Err(CliError::config("hamiltonian.path", "required for file sources"));
            }
            if h.model.is_some() {
                return Err(CliError::config("hamiltonian.model", "only allowed with source = \"spin_model\""));
            }
        }
        HamiltonianSource::SpinModel => {
            if h.model.is_none() {
                return Err(CliError::config("hamiltonian.model", "required when source = \"spin_model\""));
            }
            if h.path.is_some() {
                return Err(CliError::config("hamiltonian.path", "not used when source = \"spin_model\""));
            }
        }
    }
    if h.source == HamiltonianSource::TensorFile && h.mapping.is_none() {
        return Err(CliError::config("hamiltonian.mapping", "required when source = \"tensor_file\""));
    }
    if h.source != HamiltonianSource::TensorFile && h.mapping.is_some() {
        return Err(CliError::config("hamiltonian.mapping", "only allowed with source = \"tensor_file\""));
    }
    if let Some(e) = &c.encoding {
        positive("encoding.max_error", e.max_error)?;
        if e.steps == Some(0) {
            return Err(CliError::config("encoding.steps", "must be at least 1"));
        }
        e.strategy()?;
    }
    if let Some(ci) = &c.circuit {
        positive("circuit.max_energy_error", ci.max_energy_error)?;
        positive("circuit.evolution_time", ci.evolution_time)?;
        if let Some(d) = ci.failure_probability {
            if !(d > 0.0 && d < 1.0) {
                return Err(CliError::config("circuit.failure_probability", format!("must lie in (0, 1), got {d}")));
            }
        }
        if let Some(s) = &ci.budget_split {
            s.validate()
                .map_err(|e| CliError::config("circuit.budget_split", e.to_string()))?;
        }
    }
    if let Some(a) = &c.analysis {
        positive("analysis.synthesis_error", a.synthesis_error)?;
        if a.initial_state.is_some() && a.initial_state_file.is_some() {
            return Err(CliError::config(
                "analysis.initial_state_file",
                "give either initial_state or initial_state_file, not both",
            ));
        }
        if a.output.is_empty() || a.output.contains(['/', '\\']) {
            return Err(CliError::config("analysis.output", "must be a plain file stem"));
        }
        if let Some(s) = &a.synthesis {
            s.validate().map_err(|e| CliError::config("analysis.synthesis", e.to_string()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, overrides: &[&str]) -> CliResult<LoadedConfig> {
        let table = parse_table(text, "test")?;
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        from_table(table, PathBuf::from("."), "test".into(), &o)
    }

    const XXZ: &str = r#"
[hamiltonian]
source = "spin_model"
model = { kind = "xxz_chain", j = 1.0, delta = 0.5, sites = 3 }

[encoding]
method = "trotter"
max_error = 0.01

[circuit]
algorithm = "time_evolution"
evolution_time = 1.0

[analysis]
type = "resources"
"#;

    #[test]
    fn parses_minimal() {
        let c = load(XXZ, &[]).unwrap();
        assert_eq!(c.config.hamiltonian.model.unwrap().sites, 3);
        assert_eq!(c.config.analysis.unwrap().output, "report");
    }

    #[test]
    fn unknown_key_names_path() {
        let text = XXZ.replace("max_error", "max_eror");
        let err = load(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("encoding"), "{err}");
        assert!(err.contains("max_eror"), "{err}");
    }

    #[test]
    fn wrong_type_names_path() {
        let text = XXZ.replace("evolution_time = 1.0", "evolution_time = \"long\"");
        let err = load(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("circuit.evolution_time"), "{err}");
    }

    #[test]
    fn overrides_parse_literals_and_bare_strings() {
        let c = load(XXZ, &["encoding.order=second", "encoding.steps=7", "circuit.phase_qubits=6"]).unwrap();
        let e = c.config.encoding.clone().unwrap();
        assert_eq!(e.order, Some(TrotterOrder::Second));
        assert_eq!(e.steps, Some(7));
        assert_eq!(c.config.circuit.clone().unwrap().phase_qubits, Some(6));
        assert!(c.is_overridden("circuit.phase_qubits"));
    }

    #[test]
    fn override_into_scalar_fails() {
        let err = load(XXZ, &["encoding.method.x=1"]).unwrap_err().to_string();
        assert!(err.contains("encoding.method"), "{err}");
    }

    #[test]
    fn random_ordering_needs_seed() {
        let err = load(XXZ, &["encoding.ordering=random"]).unwrap_err().to_string();
        assert!(err.contains("encoding.seed"), "{err}");
        assert!(load(XXZ, &["encoding.ordering=random", "encoding.seed=3"]).is_ok());
    }

    #[test]
    fn get_key_walks_sections() {
        let c = load(XXZ, &[]).unwrap();
        assert!(get_key(&c.table, "hamiltonian.model.sites").is_some());
        assert!(get_key(&c.table, "hamiltonian.model.nope").is_none());
    }
}
