//! Phase estimation circuits against the analytic outcome distribution.

use std::f64::consts::PI;

use hamsim_core::ir::{Gate, Node};
use hamsim_core::qpe::{
    build_qpe, build_qpe_with, build_time_evolution, derive_phase_qubits, derive_time_naive, optimize_time,
    BudgetSplit, QpeParams, QpeSpec,
};
use hamsim_core::resources::ResourceCounter;
use hamsim_core::sim::{
    eigendecompose, eigenphase, exact_controlled_evolution, exact_evolution, fidelity, qpe_distribution_analytic, qpe_distribution_with,
    run, run_flat, total_variation, window_mass, StateVector,
};
use hamsim_core::spin::{generate, Boundary, SpinModelSpec};
use hamsim_core::trotter::{plan_with_steps, OrderingStrategy, TrotterOrder};
use hamsim_core::{Pauli, PauliString, PauliSum, PauliTerm};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
    let mut h = PauliSum::new(n);
    for _ in 0..terms {
        let s = PauliString::from_sparse(
            n,
            (0..n).map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])),
        );
        h.push(PauliTerm::real(rng.random_range(-1.0..1.0), s).unwrap()).unwrap();
    }
    h.simplify()
}

fn superposition(a: f64) -> StateVector {
    StateVector::from_amplitudes(1, vec![Complex64::new(a.cos(), 0.0), Complex64::new(0.0, a.sin())]).unwrap()
}

#[test]
fn analytic_matches_circuit_with_exact_unitary() {
    let omega = 0.83;
    let h = PauliSum::from_pairs(&[(omega, "Z")]).unwrap();
    let (t, shift) = derive_time_naive(&h).unwrap();
    let m = 4;
    // U = e^{-i(ωZ + shift)t} written directly as one rotation and a phase.
    let g = build_qpe_with(1, m, |g, offset| {
        let body: Vec<Node> = vec![
            Gate::pauli_rotation("Z".parse().unwrap(), vec![offset], 2.0 * omega * t).into(),
            Gate::pauli_rotation(PauliString::identity(1), vec![offset], 2.0 * shift * t).into(),
        ];
        g.add_definition("exact_u", body)
    })
    .unwrap();
    let psi = superposition(0.6);
    let input = StateVector::zero(m).unwrap().tensor(&psi).unwrap();
    let analytic = qpe_distribution_analytic(&h, m, t, shift, &psi).unwrap();
    for out in [run(&g, &input).unwrap(), run_flat(&g, &input).unwrap()] {
        let marginal = out.leading_marginal(m).unwrap();
        assert!(total_variation(&analytic, &marginal).unwrap() <= 1e-9);
    }
}

#[test]
fn commuting_trotter_qpe_matches_analytic() {
    let h = PauliSum::from_pairs(&[(0.4, "ZZ"), (-0.3, "ZI"), (0.2, "II")]).unwrap();
    let (t, shift) = derive_time_naive(&h).unwrap();
    let plan = plan_with_steps(&h, t, 2, Some(TrotterOrder::Second), &OrderingStrategy::AsGiven).unwrap();
    let params = QpeParams {
        phase_qubits: 5,
        precision_bits: 3,
        confidence_bits: 2,
        time: t,
        shift,
        energy_error: 0.1,
        failure_probability: 0.25,
        budget_split: BudgetSplit::default(),
    };
    let g = build_qpe(2, &params, &plan).unwrap();
    let mut psi = StateVector::zero(2).unwrap();
    psi.apply_gate(&Gate::h(0)).unwrap();
    psi.apply_gate(&Gate::h(1)).unwrap();
    let input = StateVector::zero(5).unwrap().tensor(&psi).unwrap();
    let circuit = run_flat(&g, &input).unwrap().leading_marginal(5).unwrap();
    let analytic = qpe_distribution_analytic(&h, 5, t, shift, &psi).unwrap();
    assert!(total_variation(&analytic, &circuit).unwrap() <= 1e-9);
}

#[test]
fn single_phase_qubit_is_a_hadamard_test() {
    let h = PauliSum::from_pairs(&[(0.5, "Z")]).unwrap();
    let t = PI / 2.0;
    let plan = plan_with_steps(&h, t, 1, None, &OrderingStrategy::AsGiven).unwrap();
    let params = QpeParams {
        phase_qubits: 1,
        precision_bits: 1,
        confidence_bits: 0,
        time: t,
        shift: 0.5,
        energy_error: 1.0,
        failure_probability: 0.5,
        budget_split: BudgetSplit::default(),
    };
    let g = build_qpe(1, &params, &plan).unwrap();
    // |1> has E = -0.5, phase 0: outcome 0. |0> has E = 0.5, phase 1/4: 50/50.
    for (bits, p0) in [("01", 1.0), ("00", 0.5)] {
        let out = run(&g, &StateVector::from_bitstring(bits).unwrap()).unwrap();
        let p = out.leading_marginal(1).unwrap();
        assert!((p[0] - p0).abs() < 1e-12, "{bits}: {p:?}");
    }
}

#[test]
fn eigenvalues_are_recovered() {
    let h = generate(&SpinModelSpec::xxz(3, 1.0, 0.5, Boundary::Open)).unwrap();
    let eig = eigendecompose(&h).unwrap();
    let (t, shift) = derive_time_naive(&h).unwrap();
    let (n_prec, a, m) = derive_phase_qubits(t, 0.05, 0.1).unwrap();
    assert_eq!(m, n_prec + a);
    let params = QpeParams {
        phase_qubits: m,
        precision_bits: n_prec,
        confidence_bits: a,
        time: t,
        shift,
        energy_error: 0.05,
        failure_probability: 0.1,
        budget_split: BudgetSplit::default(),
    };
    for j in 0..eig.values.len() {
        let psi = StateVector::from_dvector(&eig.vectors.column(j).into_owned()).unwrap();
        let p = qpe_distribution_with(&eig, m, t, shift, &psi).unwrap();
        let k = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert!((params.energy_of(k) - eig.values[j]).abs() <= 0.05, "level {j}");
    }
}

#[test]
fn controlled_evolution_examples() {
    let h = generate(&SpinModelSpec::xxz(3, 1.0, 1.0, Boundary::Open)).unwrap();
    let plan = plan_with_steps(&h, 0.9, 200, Some(TrotterOrder::Second), &OrderingStrategy::AsGiven).unwrap();
    let data = StateVector::from_bitstring("011").unwrap();
    let pure = run(&build_time_evolution(&plan, false).unwrap(), &data).unwrap();
    let exact = exact_evolution(&h, 0.9, &data).unwrap();
    assert!(fidelity(&pure, &exact).unwrap() >= 1.0 - 1e-8);
    let g = build_time_evolution(&plan, true).unwrap();
    let off = run(&g, &StateVector::from_bitstring("0011").unwrap()).unwrap();
    assert!((fidelity(&off, &StateVector::from_bitstring("0011").unwrap()).unwrap() - 1.0).abs() < 1e-12);
    let on = run(&g, &StateVector::from_bitstring("1011").unwrap()).unwrap();
    let want = StateVector::from_bitstring("1").unwrap().tensor(&pure).unwrap();
    assert!((fidelity(&on, &want).unwrap() - 1.0).abs() < 1e-12);
    // Ancilla in |+>: compare against the exact controlled evolution.
    let mut plus = StateVector::from_bitstring("0011").unwrap();
    plus.apply_gate(&Gate::h(0)).unwrap();
    let got = run(&g, &plus).unwrap();
    let exact = exact_controlled_evolution(&eigendecompose(&h).unwrap(), 0.9, &plus).unwrap();
    assert!(fidelity(&got, &exact).unwrap() >= 1.0 - 1e-8);
}

#[test]
fn repeat_counts_cost_one_analysis_per_definition() {
    let h = PauliSum::from_pairs(&[(0.5, "XX"), (0.5, "ZI")]).unwrap();
    let design = optimize_time(&h, &QpeSpec::new(0.01, 0.1)).unwrap();
    let mut counter = ResourceCounter::new(&design.graph);
    counter.structural().unwrap();
    // step and U under one control, plus the readout uncontrolled.
    assert_eq!(counter.analyses(), 3);
}

#[test]
fn optimized_time_beats_naive_time() {
    let h = generate(&SpinModelSpec::xxz(3, 1.0, 1.0, Boundary::Open)).unwrap();
    let spec = QpeSpec::new(0.05, 0.1);
    let best = optimize_time(&h, &spec).unwrap();
    let (t_naive, _) = derive_time_naive(&h).unwrap();
    let naive = optimize_time(&h, &QpeSpec { evolution_time: Some(t_naive), ..spec.clone() }).unwrap();
    assert!(best.t_count() <= naive.t_count());
    assert!(best.plan.error_bound <= spec.split.trotter * spec.energy_error * best.params.time);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn eigenphases_do_not_alias(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=4);
        let terms = rng.random_range(1..=8);
        let h = random_hamiltonian(&mut rng, n, terms);
        prop_assume!(!h.is_empty());
        let (t, shift) = derive_time_naive(&h).unwrap();
        for e in eigendecompose(&h).unwrap().values {
            let theta = (e + shift) * t / (2.0 * PI);
            prop_assert!((-1e-12..1.0).contains(&theta));
        }
    }

    #[test]
    fn success_window_holds(seed in any::<u64>(), di in 0usize..3) {
        let delta = [0.5, 0.25, 0.1][di];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=3);
        let terms = rng.random_range(1..=6);
        let h = random_hamiltonian(&mut rng, n, terms);
        prop_assume!(!h.is_empty());
        let (t, shift) = derive_time_naive(&h).unwrap();
        let eps = rng.random_range(0.05..1.0);
        let (n_prec, a, m) = derive_phase_qubits(t, eps, delta).unwrap();
        prop_assume!(m <= 8);
        let eig = eigendecompose(&h).unwrap();
        let j = rng.random_range(0..eig.values.len());
        let psi = StateVector::from_dvector(&eig.vectors.column(j).into_owned()).unwrap();
        let p = qpe_distribution_with(&eig, m, t, shift, &psi).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let theta = eigenphase(eig.values[j], shift, t);
        let mass = window_mass(&p, theta, 0.5f64.powi(n_prec as i32 + 1));
        prop_assert!(mass >= 1.0 - delta, "mass {mass} with n_prec {n_prec}, a {a}");
    }
}
