use std::path::{Path, PathBuf};
use std::process::Command;

use hamsim_cli::config::load_config;
use hamsim_cli::{analyze, hamgen, parse_axis, sweep, AnalyzeOptions, CliError};
use hamsim_core::io::read_pauli_text;
use hamsim_core::sim::eigendecompose;
use hamsim_core::spin::{generate, SpinModelSpec};
use hamsim_core::trotter::{derive_steps, OrderingStrategy, TrotterOrder};

/// Ground energy of the bundled minimal-basis H2 tensors, from an independent
/// dense diagonalization of the second-quantized operator.
const H2_GROUND_ENERGY: f64 = -1.137_292_613_002_561;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> PathBuf {
    configs().join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn opts(overrides: &[&str]) -> AnalyzeOptions {
    AnalyzeOptions {
        overrides: overrides.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    }
}

const XXZ3: &str = r#"
[hamiltonian]
source = "spin_model"
model = { kind = "xxz_chain", j = 1.0, delta = 0.5, sites = 3 }

[encoding]
method = "trotter"
max_error = 0.01
order = "first"

[circuit]
algorithm = "time_evolution"
evolution_time = 1.0

[analysis]
type = "resources"
"#;

fn config_error(text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.toml", text);
    match load_config(&p, &[]) {
        Err(e @ CliError::Config(_)) => {
            assert_eq!(e.exit_code(), 2);
            e.to_string()
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_name_the_key_path() {
    let e = config_error(&XXZ3.replace("max_error", "max_eror"));
    assert!(e.contains("encoding.max_eror"), "{e}");
    let e = config_error(&XXZ3.replace("evolution_time = 1.0", "evolution_time = \"soon\""));
    assert!(e.contains("circuit.evolution_time"), "{e}");
    let e = config_error(&XXZ3.replace("sites = 3", "sitez = 3"));
    assert!(e.contains("hamiltonian.model"), "{e}");
    let e = config_error(&XXZ3.replace("order = \"first\"", "order = \"third\""));
    assert!(e.contains("encoding.order"), "{e}");
    let e = config_error(&XXZ3.replace("[analysis]", "[analysys]"));
    assert!(e.contains("analysys"), "{e}");
    let e = config_error("[hamiltonian]\nsource = \"pauli_file\"\n");
    assert!(e.contains("hamiltonian.path"), "{e}");
    let e = config_error("this is = = not toml");
    assert!(e.contains("c.toml"), "{e}");
}

#[test]
fn config_parsing_never_panics_on_junk_values() {
    for (key, value) in [
        ("encoding.steps", "-3"),
        ("encoding.steps", "0"),
        ("encoding.max_error", "-1.0"),
        ("circuit.failure_probability", "1.5"),
        ("circuit.budget_split", "{ trotter = 0.5, discretization = 0.5, synthesis = 0.5 }"),
        ("analysis.output", "\"a/b\""),
        ("hamiltonian.model.kind", "\"ladder\""),
        ("encoding", "3"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", XXZ3);
        let err = load_config(&p, &[format!("{key}={value}")]).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{key}={value}: {err}");
        let first = key.split('.').next().unwrap();
        assert!(err.to_string().contains(first), "{key}={value}: {err}");
    }
}

#[test]
fn derived_steps_match_direct_call() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "xxz.toml", XXZ3);
    let out = analyze(&p, dir.path(), &opts(&[])).unwrap();
    let h = generate(&SpinModelSpec::xxz(3, 1.0, 0.5, Default::default())).unwrap();
    let plan = derive_steps(&h, 1.0, 0.01, Some(TrotterOrder::First), &OrderingStrategy::AsGiven).unwrap();
    let enc = out.report.encoding.unwrap();
    assert_eq!(enc.steps, plan.steps);
    assert_eq!(enc.error_bound, plan.error_bound);
    assert_eq!(enc.error_budget, Some(0.01));
    let res = out.report.resources.unwrap();
    assert_eq!(res.rotations, (plan.steps * 6).to_string());
}

#[test]
fn override_pins_phase_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(
        &config("xxz_qpe.toml"),
        dir.path(),
        &opts(&["circuit.phase_qubits=6", "analysis.output=pinned"]),
    )
    .unwrap();
    let c = out.report.circuit.unwrap();
    assert_eq!(c.phase_qubits, Some(6));
    assert_eq!(c.precision_bits.unwrap() + c.confidence_bits.unwrap(), 6);
    assert_eq!(c.overridden, vec!["phase_qubits".to_string()]);
    assert_eq!(out.report.qpe.unwrap().probabilities.len(), 64);
    assert!(out.path.ends_with("pinned.json"));

    let free = analyze(&config("xxz_qpe.toml"), dir.path(), &opts(&[])).unwrap();
    let fc = free.report.circuit.unwrap();
    assert_ne!(fc.phase_qubits, Some(6));
    assert!(fc.overridden.is_empty());
}

#[test]
fn override_pins_steps_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "xxz.toml", XXZ3);
    let out = analyze(&p, dir.path(), &opts(&["encoding.steps=3", "encoding.order=second"])).unwrap();
    let enc = out.report.encoding.unwrap();
    assert_eq!((enc.steps, enc.order.as_str()), (3, "second"));
    assert_eq!(enc.error_budget, None);
    assert_eq!(enc.overridden, vec!["order".to_string(), "steps".to_string()]);
}

#[test]
fn hamgen_xxz_three_sites_has_six_terms() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "xxz.toml", XXZ3);
    let out = hamgen(&p, &dir.path().join("out"), &[]).unwrap();
    let h = read_pauli_text(&out.pauli_path).unwrap();
    assert_eq!(h.len(), 6);
    assert_eq!(h.num_qubits(), 3);
}

#[test]
fn hamgen_reuses_unchanged_stages() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let first = hamgen(&config("h2_minimal.toml"), &out_dir, &[]).unwrap();
    assert_eq!(first.recomputed(), 2);
    let bytes = std::fs::read(&first.pauli_path).unwrap();

    let again = hamgen(&config("h2_minimal.toml"), &out_dir, &[]).unwrap();
    assert_eq!(again.recomputed(), 0);
    assert!(again.stages.iter().all(|s| s.reused));
    assert_eq!(std::fs::read(&again.pauli_path).unwrap(), bytes);

    // Changing only the mapping reuses the tensor stage.
    let jw = hamgen(&config("h2_minimal.toml"), &out_dir, &["hamiltonian.mapping=jordan_wigner".into()]).unwrap();
    let reused: Vec<_> = jw.stages.iter().map(|s| (s.stage.as_str(), s.reused)).collect();
    assert_eq!(reused, vec![("tensors", true), ("pauli", false)]);

    // A tampered output is regenerated.
    std::fs::write(&first.pauli_path, "1.0 Z\n").unwrap();
    let fixed = hamgen(&config("h2_minimal.toml"), &out_dir, &[]).unwrap();
    assert_eq!(fixed.recomputed(), 1);
    assert_eq!(std::fs::read(&fixed.pauli_path).unwrap(), bytes);
}

#[test]
fn hamgen_mappings_are_isospectral() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let bk = hamgen(&config("h2_minimal.toml"), &out_dir, &[]).unwrap();
    let jw = hamgen(&config("h2_minimal.toml"), &out_dir, &["hamiltonian.mapping=jordan_wigner".into()]).unwrap();
    assert_ne!(bk.pauli_path, jw.pauli_path);
    let hb = read_pauli_text(&bk.pauli_path).unwrap();
    let hj = read_pauli_text(&jw.pauli_path).unwrap();
    assert_ne!(hb, hj);
    let eb = eigendecompose(&hb).unwrap().values;
    let ej = eigendecompose(&hj).unwrap().values;
    for (a, b) in eb.iter().zip(ej.iter()) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert!((eb[0] - H2_GROUND_ENERGY).abs() < 1e-9, "{}", eb[0]);
}

#[test]
fn eigen_analysis_recovers_h2_ground_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(&config("h2_minimal.toml"), dir.path(), &opts(&[])).unwrap();
    let e = out.report.eigen.unwrap().eigenvalues;
    assert_eq!(e.len(), 16);
    assert!((e[0] - H2_GROUND_ENERGY).abs() < 1e-9);
}

#[test]
fn qpe_estimate_lands_within_energy_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(&config("xxz_qpe.toml"), dir.path(), &opts(&[])).unwrap();
    let q = out.report.qpe.unwrap();
    let c = out.report.circuit.unwrap();
    let h = generate(&SpinModelSpec::xxz(3, 1.0, 0.5, Default::default())).unwrap();
    let ground = eigendecompose(&h).unwrap().values[0];
    assert!((q.energy_estimate - ground).abs() <= c.energy_error.unwrap());
    assert!((q.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn simulate_reports_fidelity_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(&config("tfim_simulate.toml"), dir.path(), &opts(&[])).unwrap();
    let s = out.report.simulation.unwrap();
    let budget = out.report.encoding.unwrap().error_budget.unwrap();
    assert!((s.final_norm - 1.0).abs() < 1e-10);
    assert!(s.state_error.unwrap() <= budget);
    assert!(s.fidelity.unwrap() > 1.0 - budget * budget);
}

#[test]
fn controlled_evolution_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "xxz.toml", XXZ3);
    let out = analyze(
        &p,
        dir.path(),
        &opts(&[
            "circuit.algorithm=controlled_time_evolution",
            "analysis.type=simulate",
            "analysis.initial_state=\"1010\"",
        ]),
    )
    .unwrap();
    assert_eq!(out.report.circuit.unwrap().width, 4);
    assert!(out.report.simulation.unwrap().state_error.unwrap() <= 0.01);
}

#[test]
fn time_evolution_without_time_uses_phase_estimation_time() {
    let dir = tempfile::tempdir().unwrap();
    let qpe = analyze(&config("xxz_qpe.toml"), dir.path(), &opts(&[])).unwrap();
    let t_qpe = qpe.report.circuit.unwrap().evolution_time;
    let te = analyze(
        &config("xxz_qpe.toml"),
        dir.path(),
        &opts(&["circuit.algorithm=time_evolution", "encoding.max_error=0.01", "analysis.type=resources"]),
    )
    .unwrap();
    assert_eq!(te.report.circuit.unwrap().evolution_time, t_qpe);
}

#[test]
fn tabular_format_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(&[]);
    o.format = Some(hamsim_core::io::ReportFormat::Tabular);
    let out = analyze(&config("xxz_resources.toml"), dir.path(), &o).unwrap();
    assert!(out.path.extension().unwrap() == "csv");
    assert_eq!(out.text.lines().count(), 2);
}

#[test]
fn sweep_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let axes = vec![
        parse_axis("encoding.order=first,second").unwrap(),
        parse_axis("encoding.max_error=0.1,0.01").unwrap(),
    ];
    let out = sweep(&config("tfim_simulate.toml"), &axes, dir.path(), Some(2)).unwrap();
    assert_eq!(out.points.len(), 4);
    for (i, p) in out.points.iter().enumerate() {
        assert_eq!(p.index, i);
        assert!(p.dir.join("config.toml").exists());
    }
    let lines: Vec<&str> = out.table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("encoding.order,encoding.max_error,source"));
    assert!(lines[1].starts_with("first,0.1,"));
    assert!(lines[4].starts_with("second,0.01,"));

    // Parallel and serial runs give the same table.
    let serial = sweep(&config("tfim_simulate.toml"), &axes, &dir.path().join("serial"), Some(1)).unwrap();
    assert_eq!(serial.table, out.table);

    // A materialized point config reruns on its own.
    let rerun = analyze(&out.points[3].dir.join("config.toml"), &dir.path().join("rerun"), &opts(&[])).unwrap();
    assert_eq!(rerun.report, out.points[3].report);
}

#[test]
fn sweep_rejects_empty_grid_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let e = sweep(&config("tfim_simulate.toml"), &[], dir.path(), None).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let axes = vec![parse_axis("encoding.steps=1,2").unwrap()];
    let e = sweep(&config("tfim_simulate.toml"), &axes, dir.path(), None).unwrap_err();
    assert!(e.to_string().contains("encoding.steps"), "{e}");
}

fn hamsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hamsim"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = hamsim(&["analyze", config("xxz_resources.toml").to_str().unwrap(), "--out", out]);
    assert_eq!(ok.status.code(), Some(0));

    let bad_key = hamsim(&[
        "analyze",
        config("xxz_resources.toml").to_str().unwrap(),
        "--out",
        out,
        "--override",
        "circuit.evolution_tme=2",
    ]);
    assert_eq!(bad_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("circuit.evolution_tme"));

    let missing = write(
        dir.path(),
        "missing.toml",
        "[hamiltonian]\nsource = \"pauli_file\"\npath = \"nope.txt\"\n[analysis]\ntype = \"eigen\"\n",
    );
    let r = hamsim(&["analyze", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(3));

    write(dir.path(), "bad.txt", "1.0 XQ\n");
    let data_cfg = write(
        dir.path(),
        "bad.toml",
        "[hamiltonian]\nsource = \"pauli_file\"\npath = \"bad.txt\"\n[analysis]\ntype = \"eigen\"\n",
    );
    let r = hamsim(&["analyze", data_cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("ham-io"));

    // 13 phase qubits plus 3 data qubits fit; 20 more do not.
    let cap = hamsim(&[
        "analyze",
        config("xxz_qpe.toml").to_str().unwrap(),
        "--out",
        out,
        "--override",
        "circuit.phase_qubits=24",
        "--override",
        "analysis.type=simulate",
    ]);
    assert_eq!(cap.status.code(), Some(4), "{}", String::from_utf8_lossy(&cap.stderr));

    let hit = hamsim(&["hamgen", config("h2_minimal.toml").to_str().unwrap(), "--out", out]);
    assert_eq!(hit.status.code(), Some(0));
    let hit = hamsim(&["hamgen", config("h2_minimal.toml").to_str().unwrap(), "--out", out]);
    assert!(String::from_utf8_lossy(&hit.stderr).contains("manifest hit"));

    let empty = hamsim(&["sweep", config("tfim_simulate.toml").to_str().unwrap(), "--out", out]);
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn seed_flag_changes_random_ordering_only_when_random() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: u64| {
        let mut o = opts(&[]);
        o.seed = Some(seed);
        analyze(&config("xxz_resources.toml"), dir.path(), &o).unwrap().report
    };
    let a = run(7);
    let b = run(7);
    assert_eq!(a, b);
    assert_eq!(a.encoding.as_ref().unwrap().ordering, "random(seed=7)");
    assert_eq!(run(8).encoding.unwrap().ordering, "random(seed=8)");
}
