//! `sweep`: materializes one config per grid point, runs them in parallel and
//! merges the results into a single table.
//!
//! Points are numbered in row-major order of the grid, first key outermost.
//! Each point gets its own directory `point-NNNN/` holding the materialized
//! `config.toml` and its report, so concurrent runs never share a file.

use std::path::{Path, PathBuf};

use hamsim_core::io::format_tabular;
use hamsim_core::report::AnalysisReport;
use rayon::prelude::*;
use toml::{Table, Value};

use crate::analyze::{run_analysis, write_report_file};
use crate::config::{from_table, get_key, parse_table, parse_value, set_key};
use crate::error::{CliError, CliResult, Within};

pub const SWEEP_TABLE: &str = "sweep.csv";

/// One grid axis: a dotted key and the raw values it takes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

/// Parses `key=v1,v2,...`. Array values are not supported on the command line.
pub fn parse_axis(s: &str) -> CliResult<GridAxis> {
    let (key, rest) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("grid {s:?}: expected KEY=V1,V2,...")))?;
    let values: Vec<String> = rest
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(CliError::Config(format!("grid {s:?}: needs a key and at least one value")));
    }
    Ok(GridAxis {
        key: key.trim().to_string(),
        values,
    })
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub assignment: Vec<(String, String)>,
    pub dir: PathBuf,
    pub report: AnalysisReport,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub table_path: PathBuf,
    pub table: String,
}

/// Cartesian product of the axes, first axis outermost.
pub fn grid_points(axes: &[GridAxis]) -> Vec<Vec<(String, String)>> {
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

pub fn sweep(template: &Path, axes: &[GridAxis], out_dir: &Path, jobs: Option<usize>) -> CliResult<SweepOutcome> {
    if axes.is_empty() {
        return Err(CliError::Config("sweep grid is empty; give at least one --grid KEY=V1,V2".into()));
    }
    let text = std::fs::read_to_string(template).map_err(|e| CliError::io(template, e))?;
    let table = parse_table(&text, &template.display().to_string())?;
    for (i, a) in axes.iter().enumerate() {
        if get_key(&table, &a.key).is_none() {
            return Err(CliError::config(&a.key, "grid key does not exist in the template"));
        }
        if axes[..i].iter().any(|b| b.key == a.key) {
            return Err(CliError::config(&a.key, "grid key given twice"));
        }
    }
    let base_dir = template
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    let base_dir = std::fs::canonicalize(&base_dir).map_err(|e| CliError::io(&base_dir, e))?;
    let stem = template
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into());
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let assignments = grid_points(axes);
    let run_point = |(index, assignment): (usize, &Vec<(String, String)>)| -> CliResult<SweepPoint> {
        let mut t: Table = table.clone();
        for (k, v) in assignment {
            set_key(&mut t, k, parse_value(v))?;
        }
        let dir = out_dir.join(format!("point-{:04}", index + 1));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let materialized = absolutize_paths(t, &base_dir);
        let cfg_path = dir.join("config.toml");
        let text = toml::to_string(&materialized).map_err(|e| CliError::Config(format!("point {}: {e}", index + 1)))?;
        std::fs::write(&cfg_path, text).map_err(|e| CliError::io(&cfg_path, e))?;
        let cfg = from_table(materialized, dir.clone(), stem.clone(), &[])
            .map_err(|e| CliError::Config(format!("point {}: {e}", index + 1)))?;
        let report = run_analysis(&cfg)?;
        write_report_file(&cfg, &report, &dir)?;
        log::info!("sweep point {} done", index + 1);
        Ok(SweepPoint {
            index,
            assignment: assignment.clone(),
            dir,
            report,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    let results: Vec<CliResult<SweepPoint>> =
        pool.install(|| assignments.par_iter().enumerate().map(run_point).collect());
    let points = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let extra: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut row: Vec<String> = p.assignment.iter().map(|(_, v)| v.clone()).collect();
            row.extend(p.report.tabular_row());
            row
        })
        .collect();
    let table_text = format_tabular(&rows, &extra).within("ham-io")?;
    let table_path = out_dir.join(SWEEP_TABLE);
    std::fs::write(&table_path, &table_text).map_err(|e| CliError::io(&table_path, e))?;
    Ok(SweepOutcome {
        points,
        table_path,
        table: table_text,
    })
}

/// Rewrites relative file references so a materialized config still finds
/// them from its own directory.
fn absolutize_paths(mut t: Table, base: &Path) -> Table {
    for key in ["hamiltonian.path", "analysis.initial_state_file"] {
        if let Some(Value::String(p)) = get_key(&t, key) {
            let p = Path::new(p);
            if p.is_relative() {
                let abs = base.join(p).display().to_string();
                set_key(&mut t, key, Value::String(abs)).expect("parent sections exist");
            }
        }
    }
    t
}
