//! `hamgen`: turns the `[hamiltonian]` section into files on disk, reusing
//! earlier outputs whose inputs have not changed.
//!
//! Each stage hashes its inputs with SHA-256. `manifest.json` in the output
//! directory maps that hash to the files the stage wrote and their own
//! hashes. A stage is skipped when its input hash is listed and every recorded
//! output is still present and unmodified.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hamsim_core::io::{format_pauli_text, format_tensor_document, parse_pauli_text, parse_tensor_document};
use hamsim_core::{fermion, spin, PauliSum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{load_config, HamiltonianConfig, HamiltonianSource, LoadedConfig};
use crate::error::{CliError, CliResult, Within};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// File name inside the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stage: String,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// Keyed by input hash.
    pub entries: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        match serde_json::from_str(&text) {
            Ok(m) => Ok(m),
            Err(e) => {
                // A damaged manifest only costs recomputation.
                log::warn!("ignoring unreadable manifest {}: {e}", path.display());
                Ok(Manifest::default())
            }
        }
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    /// Outputs of `input_hash` if all of them are intact on disk.
    fn intact(&self, dir: &Path, input_hash: &str) -> Option<&ManifestEntry> {
        let entry = self.entries.get(input_hash)?;
        let ok = entry.outputs.iter().all(|o| {
            std::fs::read(dir.join(&o.path))
                .map(|bytes| sha256_hex(&[&bytes]) == o.sha256)
                .unwrap_or(false)
        });
        ok.then_some(entry)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: String,
    pub input_hash: String,
    pub reused: bool,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct HamgenOutcome {
    pub pauli_path: PathBuf,
    pub tensor_path: Option<PathBuf>,
    pub stages: Vec<StageRecord>,
}

impl HamgenOutcome {
    pub fn recomputed(&self) -> usize {
        self.stages.iter().filter(|s| !s.reused).count()
    }
}

struct Stages<'a> {
    dir: &'a Path,
    manifest: Manifest,
    records: Vec<StageRecord>,
}

impl Stages<'_> {
    /// Runs `produce` unless the manifest already has intact outputs for
    /// `input_hash`. Returns the output paths.
    fn run(
        &mut self,
        stage: &str,
        input_hash: String,
        produce: impl FnOnce() -> CliResult<Vec<(String, String)>>,
    ) -> CliResult<Vec<PathBuf>> {
        if let Some(entry) = self.manifest.intact(self.dir, &input_hash) {
            let outputs: Vec<PathBuf> = entry.outputs.iter().map(|o| self.dir.join(&o.path)).collect();
            log::info!(
                "manifest hit for stage {stage} ({}): reusing {}",
                &input_hash[..12],
                entry.outputs.iter().map(|o| o.path.as_str()).collect::<Vec<_>>().join(", ")
            );
            self.records.push(StageRecord {
                stage: stage.into(),
                input_hash,
                reused: true,
                outputs: outputs.clone(),
            });
            return Ok(outputs);
        }
        log::info!("computing stage {stage} ({})", &input_hash[..12]);
        let files = produce()?;
        let mut recs = Vec::new();
        let mut outputs = Vec::new();
        for (name, content) in files {
            let path = self.dir.join(&name);
            std::fs::write(&path, &content).map_err(|e| CliError::io(&path, e))?;
            recs.push(OutputRecord {
                sha256: sha256_hex(&[content.as_bytes()]),
                path: name,
            });
            outputs.push(path);
        }
        self.manifest.entries.insert(
            input_hash.clone(),
            ManifestEntry {
                stage: stage.into(),
                outputs: recs,
            },
        );
        self.records.push(StageRecord {
            stage: stage.into(),
            input_hash,
            reused: false,
            outputs: outputs.clone(),
        });
        Ok(outputs)
    }
}

fn mapping_name(m: fermion::Mapping) -> &'static str {
    match m {
        fermion::Mapping::JordanWigner => "jordan_wigner",
        fermion::Mapping::BravyiKitaev => "bravyi_kitaev",
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Runs `hamgen` for the config at `config_path`, writing into `out_dir`.
pub fn hamgen(config_path: &Path, out_dir: &Path, overrides: &[String]) -> CliResult<HamgenOutcome> {
    let cfg = load_config(config_path, overrides)?;
    hamgen_loaded(&cfg, out_dir)
}

pub fn hamgen_loaded(cfg: &LoadedConfig, out_dir: &Path) -> CliResult<HamgenOutcome> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let h = &cfg.config.hamiltonian;
    let mut st = Stages {
        dir: out_dir,
        manifest: Manifest::load(out_dir)?,
        records: Vec::new(),
    };
    let stem = &cfg.stem;
    let pauli_name = format!("{stem}.pauli.txt");
    let mut tensor_path = None;
    let pauli_path = match h.source {
        HamiltonianSource::SpinModel => {
            let spec = h.model.expect("validated");
            let key = serde_json::to_string(&spec).expect("spec serializes");
            let hash = sha256_hex(&[b"spin_model", key.as_bytes()]);
            st.run("pauli", hash, || {
                let sum = spin::generate(&spec).within("spin-models")?;
                Ok(vec![(pauli_name.clone(), format_pauli_text(&sum).within("ham-io")?)])
            })?
        }
        HamiltonianSource::PauliFile => {
            let src = cfg.resolve(h.path.as_deref().expect("validated"));
            let raw = read(&src)?;
            let hash = sha256_hex(&[b"pauli_file", raw.as_bytes()]);
            st.run("pauli", hash, || {
                let sum = parse_pauli_text(&raw, &src.display().to_string()).within("ham-io")?;
                Ok(vec![(pauli_name.clone(), format_pauli_text(&sum).within("ham-io")?)])
            })?
        }
        HamiltonianSource::TensorFile => {
            let src = cfg.resolve(h.path.as_deref().expect("validated"));
            let mapping = h.mapping.expect("validated");
            let raw = read(&src)?;
            let origin = src.display().to_string();
            let tensor_name = format!("{stem}.tensors.json");
            let hash = sha256_hex(&[b"tensors", raw.as_bytes()]);
            let tpaths = st.run("tensors", hash, || {
                let t = parse_tensor_document(&raw, &origin).within("ham-io")?;
                Ok(vec![(tensor_name.clone(), format_tensor_document(&t).within("ham-io")?)])
            })?;
            let normalized_path = tpaths[0].clone();
            let normalized = read(&normalized_path)?;
            let mapping_tag = mapping_name(mapping);
            let hash = sha256_hex(&[b"mapping", mapping_tag.as_bytes(), normalized.as_bytes()]);
            let pauli_name = format!("{stem}.{mapping_tag}.pauli.txt");
            let out = st.run("pauli", hash, || {
                let t = parse_tensor_document(&normalized, &normalized_path.display().to_string())
                    .within("ham-io")?;
                let sum = fermion::map_tensors(&t, mapping).within("fermion-map")?;
                Ok(vec![(pauli_name.clone(), format_pauli_text(&sum).within("ham-io")?)])
            })?;
            tensor_path = Some(normalized_path);
            out
        }
    };
    st.manifest.save(out_dir)?;
    Ok(HamgenOutcome {
        pauli_path: pauli_path[0].clone(),
        tensor_path,
        stages: st.records,
    })
}

/// Loads the Hamiltonian named by the config directly, without touching the
/// manifest. Returns the sum and a short description of its source.
pub fn load_hamiltonian(cfg: &LoadedConfig) -> CliResult<(PauliSum, String)> {
    let h: &HamiltonianConfig = &cfg.config.hamiltonian;
    match h.source {
        HamiltonianSource::SpinModel => {
            let spec = h.model.expect("validated");
            let sum = spin::generate(&spec).within("spin-models")?;
            let desc = format!("spin_model:{}", serde_json::to_string(&spec).expect("spec serializes"));
            Ok((sum, desc))
        }
        HamiltonianSource::PauliFile => {
            let rel = h.path.as_deref().expect("validated");
            let src = cfg.resolve(rel);
            let sum = parse_pauli_text(&read(&src)?, &src.display().to_string()).within("ham-io")?;
            Ok((sum, format!("pauli_file:{}", rel.display())))
        }
        HamiltonianSource::TensorFile => {
            let rel = h.path.as_deref().expect("validated");
            let src = cfg.resolve(rel);
            let mapping = h.mapping.expect("validated");
            let t = parse_tensor_document(&read(&src)?, &src.display().to_string()).within("ham-io")?;
            let sum = fermion::map_tensors(&t, mapping).within("fermion-map")?;
            Ok((sum, format!("tensor_file:{}:{}", rel.display(), mapping_name(mapping))))
        }
    }
}
