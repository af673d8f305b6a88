//! Exact single-control lowering of every primitive gate.
//!
//! Each rule returns uncontrolled primitive gates (in time order) whose
//! product equals the controlled gate exactly, global phase included; phases
//! are carried by all-identity [`GateKind::PauliRotation`] gates, which cost
//! nothing on their own and become an `Rz` on the control when controlled
//! again. Several controls are handled by applying the rule once per control.
//!
//! | gate | controlled form | Clifford | T | Rz |
//! |------|-----------------|---------:|--:|---:|
//! | X | CX | 1 | 0 | 0 |
//! | Z | CZ | 1 | 0 | 0 |
//! | Y | S† · CX · S | 3 | 0 | 0 |
//! | H | (S† H T†) · CX · (T H S) on the target | 5 | 2 | 0 |
//! | S, S† | T/T† on both, CX, T†/T, CX | 2 | 3 | 0 |
//! | T, T† | controlled phase: Rz on control + controlled Rz | 2 | 0 | 3 |
//! | Rz(θ) | Rz(θ/2) · CX · Rz(−θ/2) · CX | 2 | 0 | 2 |
//! | CX | Toffoli | 8 | 7 | 0 |
//! | CZ | doubly-controlled Z | 6 | 7 | 0 |
//! | PauliRotation | basis change + CX staircase around a controlled Rz | 2(w−1) + basis + 2 | 0 | 2 |
//! | identity rotation (global phase) | Rz on the control | 0 | 0 | 1 |

use std::f64::consts::FRAC_PI_4;

use crate::ir::{Gate, GateKind};
use crate::pauli::{Pauli, PauliString};

/// Lowers `gate` with every qubit in `controls` acting as a control.
pub fn lower_with_controls(gate: &Gate, controls: &[usize]) -> Vec<Gate> {
    let mut gates = vec![gate.clone()];
    for &c in controls {
        gates = gates.iter().flat_map(|g| lower_controlled(g, c)).collect();
    }
    gates
}

pub(crate) fn global_phase(qubits: &[usize], angle: f64) -> Gate {
    Gate::pauli_rotation(PauliString::identity(qubits.len()), qubits.to_vec(), angle)
}

fn controlled_rz(c: usize, t: usize, angle: f64) -> Vec<Gate> {
    vec![
        Gate::rz(t, angle / 2.0),
        Gate::cx(c, t),
        Gate::rz(t, -angle / 2.0),
        Gate::cx(c, t),
    ]
}

/// `diag(1, 1, 1, e^{iφ})`.
pub(crate) fn controlled_phase(c: usize, t: usize, phi: f64) -> Vec<Gate> {
    let mut out = vec![Gate::rz(c, phi / 2.0)];
    out.extend(controlled_rz(c, t, phi));
    out.push(global_phase(&[c, t], -phi / 2.0));
    out
}

fn toffoli_core(a: usize, b: usize, t: usize) -> Vec<Gate> {
    vec![
        Gate::cx(b, t),
        Gate::tdg(t),
        Gate::cx(a, t),
        Gate::t(t),
        Gate::cx(b, t),
        Gate::tdg(t),
        Gate::cx(a, t),
        Gate::t(b),
        Gate::t(t),
        Gate::cx(a, b),
        Gate::t(a),
        Gate::tdg(b),
        Gate::cx(a, b),
    ]
}

/// Single-qubit basis change taking `p` to `Z` (in time order) together with its inverse.
pub(crate) fn basis_change(q: usize, p: Pauli) -> (Vec<Gate>, Vec<Gate>) {
    match p {
        Pauli::X => (vec![Gate::h(q)], vec![Gate::h(q)]),
        Pauli::Y => (vec![Gate::sdg(q), Gate::h(q)], vec![Gate::h(q), Gate::s(q)]),
        _ => (vec![], vec![]),
    }
}

/// Exact controlled version of one primitive gate.
pub fn lower_controlled(gate: &Gate, c: usize) -> Vec<Gate> {
    let q = &gate.qubits;
    match &gate.kind {
        GateKind::X => vec![Gate::cx(c, q[0])],
        GateKind::Z => vec![Gate::cz(c, q[0])],
        GateKind::Y => vec![Gate::sdg(q[0]), Gate::cx(c, q[0]), Gate::s(q[0])],
        GateKind::H => {
            let t = q[0];
            vec![
                Gate::sdg(t),
                Gate::h(t),
                Gate::tdg(t),
                Gate::cx(c, t),
                Gate::t(t),
                Gate::h(t),
                Gate::s(t),
            ]
        }
        GateKind::S => vec![
            Gate::t(c),
            Gate::t(q[0]),
            Gate::cx(c, q[0]),
            Gate::tdg(q[0]),
            Gate::cx(c, q[0]),
        ],
        GateKind::Sdg => vec![
            Gate::tdg(c),
            Gate::tdg(q[0]),
            Gate::cx(c, q[0]),
            Gate::t(q[0]),
            Gate::cx(c, q[0]),
        ],
        GateKind::T => controlled_phase(c, q[0], FRAC_PI_4),
        GateKind::Tdg => controlled_phase(c, q[0], -FRAC_PI_4),
        GateKind::Rz { angle } => controlled_rz(c, q[0], *angle),
        GateKind::CX => {
            let (a, t) = (q[0], q[1]);
            let mut out = vec![Gate::h(t)];
            out.extend(toffoli_core(c, a, t));
            out.insert(10, Gate::h(t));
            out
        }
        GateKind::CZ => toffoli_core(c, q[0], q[1]),
        GateKind::PauliRotation { string, angle } => {
            let support: Vec<(usize, Pauli)> = string
                .letters()
                .enumerate()
                .filter(|&(_, p)| p != Pauli::I)
                .map(|(i, p)| (q[i], p))
                .collect();
            if support.is_empty() {
                // Controlled global phase e^{-iθ/2} is diag(1, e^{-iθ/2}) on the control.
                return vec![Gate::rz(c, -angle / 2.0), global_phase(q, angle / 2.0)];
            }
            let mut pre = Vec::new();
            let mut post = Vec::new();
            for &(qubit, p) in &support {
                let (i, o) = basis_change(qubit, p);
                pre.extend(i);
                post.extend(o);
            }
            let ladder: Vec<Gate> = support
                .windows(2)
                .map(|w| Gate::cx(w[0].0, w[1].0))
                .collect();
            let last = support[support.len() - 1].0;
            let mut out = pre;
            out.extend(ladder.iter().cloned());
            out.extend(controlled_rz(c, last, *angle));
            out.extend(ladder.into_iter().rev());
            out.extend(post);
            out
        }
    }
}
