//! Dense state-vector simulation plus exact-evolution, eigendecomposition
//! and phase-estimation oracles.
//!
//! Basis index bit `n − 1 − q` holds qubit `q`, so qubit 0 is the most
//! significant bit, matching the Pauli string convention.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ir::{AlgorithmGraph, DefId, Gate, GateKind, Node};
use crate::pauli::{Pauli, PauliString, PauliSum, DEFAULT_MATRIX_QUBIT_CAP};

/// Largest register the simulator will allocate.
pub const DEFAULT_SIM_QUBIT_CAP: usize = 20;

/// Norm drift tolerated before a run is declared broken.
pub const NORM_TOLERANCE: f64 = 1e-10;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_width(n)?;
        if index >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} does not fit in {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Basis state from a bitstring such as `"0110"`, qubit 0 first.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "initial state {bits:?} is not a bitstring"
                    )))
                }
            }
        }
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty initial-state bitstring".into()));
        }
        Self::basis(bits.len(), index)
    }

    /// Wraps explicit amplitudes; they must already be normalized.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_width(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes given for {n} qubits",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let state = StateVector { n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "amplitudes have norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Result<Self> {
        let n = v.len().trailing_zeros() as usize;
        Self::from_amplitudes(n, v.iter().copied().collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_vec(self.amps.clone())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Tensor product `self ⊗ other`; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_width(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector {
            n: self.n + other.n,
            amps,
        })
    }

    /// Marginal distribution of the leading `k` qubits; outcome index has
    /// qubit 0 as its most significant bit.
    pub fn leading_marginal(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.n {
            return Err(Error::LengthMismatch {
                left: k,
                right: self.n,
            });
        }
        let shift = self.n - k;
        let mut out = vec![0.0; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            out[i >> shift] += a.norm_sqr();
        }
        Ok(out)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        match qubits.iter().find(|&&q| q >= self.n) {
            Some(q) => Err(Error::MalformedCircuit(format!(
                "qubit {q} outside a {}-qubit register",
                self.n
            ))),
            None => Ok(()),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.apply_controlled(gate, &[])
    }

    /// Applies `gate` on the subspace where every qubit in `controls` is 1.
    /// This is the native controlled action, independent of the lowering
    /// rules used when flattening.
    pub fn apply_controlled(&mut self, gate: &Gate, controls: &[usize]) -> Result<()> {
        self.check_qubits(&gate.qubits)?;
        self.check_qubits(controls)?;
        let cmask = controls.iter().fold(0usize, |m, &c| m | self.bit(c));
        let q = &gate.qubits;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match &gate.kind {
            GateKind::H => self.apply_1q(q[0], cmask, [[one * s, one * s], [one * s, -one * s]]),
            GateKind::X => self.apply_1q(q[0], cmask, [[zero, one], [one, zero]]),
            GateKind::Y => self.apply_1q(q[0], cmask, [[zero, -i], [i, zero]]),
            GateKind::Z => self.apply_phase(q[0], cmask, -one),
            GateKind::S => self.apply_phase(q[0], cmask, i),
            GateKind::Sdg => self.apply_phase(q[0], cmask, -i),
            GateKind::T => self.apply_phase(q[0], cmask, Complex64::from_polar(1.0, PI / 4.0)),
            GateKind::Tdg => self.apply_phase(q[0], cmask, Complex64::from_polar(1.0, -PI / 4.0)),
            GateKind::Rz { angle } => {
                let a = Complex64::from_polar(1.0, -angle / 2.0);
                self.apply_1q(q[0], cmask, [[a, zero], [zero, a.conj()]])
            }
            GateKind::CX => {
                let cm = cmask | self.bit(q[0]);
                self.apply_1q(q[1], cm, [[zero, one], [one, zero]])
            }
            GateKind::CZ => {
                let cm = cmask | self.bit(q[0]);
                self.apply_phase(q[1], cm, -one)
            }
            GateKind::PauliRotation { string, angle } => {
                self.apply_rotation(string, q, *angle, cmask)
            }
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, cmask: usize, m: [[Complex64; 2]; 2]) {
        let bit = self.bit(q);
        for b in 0..self.amps.len() {
            if b & bit != 0 || b & cmask != cmask {
                continue;
            }
            let (a0, a1) = (self.amps[b], self.amps[b | bit]);
            self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_phase(&mut self, q: usize, cmask: usize, phase: Complex64) {
        let m = cmask | self.bit(q);
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & m == m {
                *a *= phase;
            }
        }
    }

    /// `cos(θ/2)·ψ − i·sin(θ/2)·Pψ` applied directly with index masks.
    fn apply_rotation(&mut self, string: &PauliString, qubits: &[usize], angle: f64, cmask: usize) {
        let (mut xm, mut zm) = (0usize, 0usize);
        let mut y = 0u32;
        for (letter, &q) in string.letters().zip(qubits) {
            let bit = self.bit(q);
            match letter {
                Pauli::I => {}
                Pauli::X => xm |= bit,
                Pauli::Y => {
                    xm |= bit;
                    zm |= bit;
                    y += 1;
                }
                Pauli::Z => zm |= bit,
            }
        }
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let iy = Complex64::i().powu(y % 4);
        // P|b> = φ(b)|b ^ xm>.
        let phi = |b: usize| {
            if (b & zm).count_ones() % 2 == 1 {
                -iy
            } else {
                iy
            }
        };
        let mis = Complex64::new(0.0, -s);
        if xm == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                if b & cmask == cmask {
                    *a *= c + mis * phi(b);
                }
            }
            return;
        }
        for b in 0..self.amps.len() {
            let p = b ^ xm;
            if p < b || b & cmask != cmask {
                continue;
            }
            let (ab, ap) = (self.amps[b], self.amps[p]);
            self.amps[p] = c * ap + mis * phi(b) * ab;
            self.amps[b] = c * ab + mis * phi(p) * ap;
        }
    }

    fn check_norm(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Invariant(format!("state norm drifted to {norm}")));
        }
        Ok(())
    }
}

fn check_width(n: usize) -> Result<()> {
    if n > DEFAULT_SIM_QUBIT_CAP {
        return Err(Error::cap("simulated qubits", n, DEFAULT_SIM_QUBIT_CAP));
    }
    Ok(())
}

fn check_graph(g: &AlgorithmGraph, psi: &StateVector, cap: usize) -> Result<()> {
    if g.width() != psi.n {
        return Err(Error::LengthMismatch {
            left: g.width(),
            right: psi.n,
        });
    }
    let len = g.flattened_len()?;
    if len > cap as u128 {
        return Err(Error::cap("flattened gates", len, cap));
    }
    Ok(())
}

/// Executes the nested structure: repeats are applied repeatedly and call
/// controls act natively on the callee's gates.
pub fn run(g: &AlgorithmGraph, psi0: &StateVector) -> Result<StateVector> {
    run_capped(g, psi0, crate::ir::DEFAULT_FLATTEN_CAP)
}

pub fn run_capped(g: &AlgorithmGraph, psi0: &StateVector, gate_cap: usize) -> Result<StateVector> {
    check_graph(g, psi0, gate_cap)?;
    let mut psi = psi0.clone();
    execute(g, g.root()?, &[], &mut psi)?;
    psi.check_norm()?;
    Ok(psi)
}

fn execute(g: &AlgorithmGraph, id: DefId, controls: &[usize], psi: &mut StateVector) -> Result<()> {
    for node in &g.definition(id)?.body {
        match node {
            Node::Gate(gate) => psi.apply_controlled(gate, controls)?,
            Node::Call(c) => {
                let mut inner = controls.to_vec();
                inner.extend(&c.controls);
                for _ in 0..c.repeat {
                    execute(g, c.def, &inner, psi)?;
                }
            }
        }
    }
    Ok(())
}

/// Applies [`AlgorithmGraph::flatten`] gate by gate, so controlled calls go
/// through the exact lowering rules.
pub fn run_flat(g: &AlgorithmGraph, psi0: &StateVector) -> Result<StateVector> {
    check_graph(g, psi0, crate::ir::DEFAULT_FLATTEN_CAP)?;
    let mut psi = psi0.clone();
    for gate in g.flatten()? {
        psi.apply_gate(&gate)?;
    }
    psi.check_norm()?;
    Ok(psi)
}

/// `|<ψ|φ>|²`.
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    if psi.n != phi.n {
        return Err(Error::LengthMismatch {
            left: psi.n,
            right: phi.n,
        });
    }
    let overlap: Complex64 = psi.amps.iter().zip(&phi.amps).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Euclidean distance `‖ψ − φ‖` after aligning the global phase of `φ` to `ψ`.
pub fn state_distance(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    let f = fidelity(psi, phi)?;
    // min over phases of ‖ψ − e^{iα}φ‖² = 2 − 2|<ψ|φ>|.
    Ok((2.0 - 2.0 * f.sqrt()).max(0.0).sqrt())
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn eigendecompose(h: &PauliSum) -> Result<Eigensystem> {
    if h.num_qubits() > DEFAULT_MATRIX_QUBIT_CAP {
        return Err(Error::cap("qubits for dense diagonalization", h.num_qubits(), DEFAULT_MATRIX_QUBIT_CAP));
    }
    if !h.is_hermitian(HERMITIAN_TOLERANCE) {
        return Err(Error::NotHermitian("cannot diagonalize".into()));
    }
    let m = h.to_matrix()?;
    // Symmetrize away rounding so the solver sees an exactly Hermitian input.
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let dim = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// `e^{−iHt}|ψ0>` through the eigenbasis of `h`.
pub fn exact_evolution(h: &PauliSum, t: f64, psi0: &StateVector) -> Result<StateVector> {
    let eig = eigendecompose(h)?;
    exact_evolution_with(&eig, t, psi0)
}

/// As [`exact_evolution`] with a precomputed eigensystem.
pub fn exact_evolution_with(eig: &Eigensystem, t: f64, psi0: &StateVector) -> Result<StateVector> {
    if eig.values.len() != psi0.amps.len() {
        return Err(Error::LengthMismatch {
            left: eig.values.len().trailing_zeros() as usize,
            right: psi0.n,
        });
    }
    let mut c = eig.vectors.adjoint() * psi0.to_dvector();
    for (ci, &e) in c.iter_mut().zip(&eig.values) {
        *ci *= Complex64::from_polar(1.0, -e * t);
    }
    let out = &eig.vectors * c;
    Ok(StateVector {
        n: psi0.n,
        amps: out.iter().copied().collect(),
    })
}

/// Exact controlled evolution with the control on qubit 0 in front of the
/// data register: `|0>ψ0 + |1>ψ1 → |0>ψ0 + |1>e^{−iHt}ψ1`.
pub fn exact_controlled_evolution(eig: &Eigensystem, t: f64, psi0: &StateVector) -> Result<StateVector> {
    let half = eig.values.len();
    if 2 * half != psi0.amps.len() {
        return Err(Error::LengthMismatch {
            left: half.trailing_zeros() as usize + 1,
            right: psi0.n,
        });
    }
    let ones = DVector::from_column_slice(&psi0.amps[half..]);
    let mut c = eig.vectors.adjoint() * ones;
    for (ci, &e) in c.iter_mut().zip(&eig.values) {
        *ci *= Complex64::from_polar(1.0, -e * t);
    }
    let evolved = &eig.vectors * c;
    let mut amps = psi0.amps[..half].to_vec();
    amps.extend(evolved.iter().copied());
    Ok(StateVector { n: psi0.n, amps })
}

/// `|K_M(Δ)|² = sin²(MπΔ) / (M² sin²(πΔ))`, equal to 1 at integer Δ.
pub fn qpe_kernel(m_outcomes: usize, delta: f64) -> f64 {
    let mf = m_outcomes as f64;
    let d = delta - delta.round();
    let den = (PI * d).sin();
    if den.abs() < 1e-12 {
        return 1.0;
    }
    let num = (mf * PI * d).sin();
    (num * num) / (mf * mf * den * den)
}

/// Eigenphase `θ = (E + shift)·t / 2π` reduced to `[0, 1)`.
pub fn eigenphase(energy: f64, shift: f64, t: f64) -> f64 {
    let theta = (energy + shift) * t / (2.0 * PI);
    theta - theta.floor()
}

/// Outcome distribution of textbook phase estimation with `m` phase qubits
/// on `U = e^{−i(H + shift)t}`, computed from the eigendecomposition.
pub fn qpe_distribution_analytic(
    h: &PauliSum,
    m: usize,
    t: f64,
    shift: f64,
    psi0: &StateVector,
) -> Result<Vec<f64>> {
    let eig = eigendecompose(h)?;
    qpe_distribution_with(&eig, m, t, shift, psi0)
}

pub fn qpe_distribution_with(
    eig: &Eigensystem,
    m: usize,
    t: f64,
    shift: f64,
    psi0: &StateVector,
) -> Result<Vec<f64>> {
    if m > DEFAULT_SIM_QUBIT_CAP {
        return Err(Error::cap("phase qubits", m, DEFAULT_SIM_QUBIT_CAP));
    }
    if eig.values.len() != psi0.amps.len() {
        return Err(Error::LengthMismatch {
            left: eig.values.len().trailing_zeros() as usize,
            right: psi0.n,
        });
    }
    let overlaps = eig.vectors.adjoint() * psi0.to_dvector();
    let outcomes = 1usize << m;
    let mut probs = vec![0.0; outcomes];
    for (c, &e) in overlaps.iter().zip(&eig.values) {
        let w = c.norm_sqr();
        if w < 1e-300 {
            continue;
        }
        let theta = eigenphase(e, shift, t);
        for (k, p) in probs.iter_mut().enumerate() {
            *p += w * qpe_kernel(outcomes, theta - k as f64 / outcomes as f64);
        }
    }
    Ok(probs)
}

/// Probability mass on outcomes `k` whose phase `k/2^m` lies within
/// `halfwidth` of `theta` in circular distance.
pub fn window_mass(probs: &[f64], theta: f64, halfwidth: f64) -> f64 {
    let outcomes = probs.len() as f64;
    probs
        .iter()
        .enumerate()
        .filter(|&(k, _)| {
            let d = k as f64 / outcomes - theta;
            (d - d.round()).abs() <= halfwidth + 1e-12
        })
        .map(|(_, p)| p)
        .sum()
}

/// Total-variation distance `½ Σ |p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Dense unitary of a gate sequence on `n` qubits, column `j` being the image
/// of basis state `j`.
pub fn circuit_unitary(n: usize, gates: &[Gate]) -> Result<DMatrix<Complex64>> {
    if n > DEFAULT_MATRIX_QUBIT_CAP {
        return Err(Error::cap("qubits for a dense unitary", n, DEFAULT_MATRIX_QUBIT_CAP));
    }
    let dim = 1 << n;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut psi = StateVector::basis(n, j)?;
        for g in gates {
            psi.apply_gate(g)?;
        }
        u.set_column(j, &psi.to_dvector());
    }
    Ok(u)
}
