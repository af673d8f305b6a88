//! Textbook phase estimation and plain or controlled time evolution built on
//! the Trotter encoding, plus the parameter derivations that size them.
//!
//! Convention: `U = e^{−i(H + shift)t}`. An eigenstate with energy `E` has
//! phase `θ = (E + shift)·t/2π ∈ [0, 1)`, and outcome `k` on `m` phase qubits
//! estimates `θ ≈ k/2^m`, i.e. `E ≈ 2πk/(2^m t) − shift`.
//!
//! Qubits `0..m` form the phase register, qubit 0 being the most significant
//! bit of `k`; the data register follows. Phase qubit `m − 1 − j` controls
//! `U^(2^j)`. Because `U` carries `e^{−i…}`, the register ends up holding
//! `Σ_x e^{−2πiθx}|x>` and the readout is the forward Fourier transform.

use std::f64::consts::PI;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ir::{AlgorithmGraph, DefId, Gate, Node};
use crate::pauli::PauliSum;
use crate::resources::lower::{controlled_phase, global_phase};
use crate::resources::{ResourceCounter, ResourceEstimate, SynthesisModel};
use crate::trotter::{add_step_definition, TrotterModel, TrotterPlan, TrotterRequest};

/// Safety margin `μ` in `t = π/(λ(1 + μ))`.
pub const TIME_MARGIN: f64 = 1e-3;

/// Candidate count of the evolution-time grid search.
pub const TIME_GRID_POINTS: usize = 25;

/// Largest phase register: `2^(m−1)` must fit in a `u64` repeat count.
pub const MAX_PHASE_QUBITS: usize = 64;

/// How the energy-error budget is shared between Trotter error, phase
/// discretization and rotation synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSplit {
    pub trotter: f64,
    pub discretization: f64,
    pub synthesis: f64,
}

impl Default for BudgetSplit {
    fn default() -> Self {
        BudgetSplit {
            trotter: 1.0 / 3.0,
            discretization: 1.0 / 3.0,
            synthesis: 1.0 / 3.0,
        }
    }
}

impl BudgetSplit {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.trotter, self.discretization, self.synthesis];
        if parts.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "budget split fractions must be positive, got {parts:?}"
            )));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "budget split fractions must sum to 1, got {total}"
            )));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.trotter, self.discretization, self.synthesis]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeParams {
    pub phase_qubits: usize,
    pub precision_bits: usize,
    pub confidence_bits: usize,
    pub time: f64,
    pub shift: f64,
    pub energy_error: f64,
    pub failure_probability: f64,
    pub budget_split: BudgetSplit,
}

impl QpeParams {
    /// Half-width of the success window in phase units, `2^(−n_prec−1)`.
    pub fn phase_window(&self) -> f64 {
        0.5f64.powi(self.precision_bits as i32 + 1)
    }

    /// The same window in energy units.
    pub fn energy_window(&self) -> f64 {
        self.phase_window() * 2.0 * PI / self.time
    }

    /// Energy estimate from outcome `k`.
    pub fn energy_of(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64) / ((1u128 << self.phase_qubits) as f64 * self.time) - self.shift
    }
}

/// `⌈x⌉` that ignores rounding noise just above an integer.
fn robust_ceil(x: f64) -> f64 {
    (x - 1e-12).ceil()
}

/// `(t, shift)` with `shift = λ` and `t = π/(λ(1 + μ))`, so shifted phases
/// lie in `[0, 1)`. `λ` is the coefficient 1-norm of the simplified `h`.
pub fn derive_time_naive(h: &PauliSum) -> Result<(f64, f64)> {
    let lambda = h.simplify().coeff_one_norm();
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "cannot size phase estimation for a zero Hamiltonian".into(),
        ));
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite(format!("coefficient 1-norm {lambda}")));
    }
    Ok((PI / (lambda * (1.0 + TIME_MARGIN)), lambda))
}

/// Confidence bits `⌈log2(2 + 1/(2δ))⌉`.
pub fn confidence_bits(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {delta}"
        )));
    }
    Ok(robust_ceil((2.0 + 1.0 / (2.0 * delta)).log2()).max(0.0) as usize)
}

/// `(n_prec, a_extra, m)` with `n_prec = ⌈log2(2π/(t·ε))⌉`.
pub fn derive_phase_qubits(t: f64, energy_error: f64, delta: f64) -> Result<(usize, usize, usize)> {
    if !(t > 0.0 && t.is_finite() && energy_error > 0.0 && energy_error.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "phase register sizing needs positive t and energy error, got t = {t}, ε = {energy_error}"
        )));
    }
    let a = confidence_bits(delta)?;
    let n = robust_ceil((2.0 * PI / (t * energy_error)).log2()).max(0.0) as usize;
    if n + a > MAX_PHASE_QUBITS {
        return Err(Error::cap("phase qubits", n + a, MAX_PHASE_QUBITS));
    }
    Ok((n, a, n + a))
}

/// User-facing phase-estimation requirements plus pinned overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct QpeSpec {
    pub energy_error: f64,
    pub failure_probability: f64,
    pub split: BudgetSplit,
    pub trotter: TrotterRequest,
    pub synthesis: SynthesisModel,
    pub evolution_time: Option<f64>,
    pub phase_qubits: Option<usize>,
}

impl QpeSpec {
    pub fn new(energy_error: f64, failure_probability: f64) -> Self {
        QpeSpec {
            energy_error,
            failure_probability,
            split: BudgetSplit::default(),
            trotter: TrotterRequest::default(),
            synthesis: SynthesisModel::default(),
            evolution_time: None,
            phase_qubits: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.synthesis.validate()?;
        if !(self.energy_error > 0.0 && self.energy_error.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "energy error must be positive, got {}",
                self.energy_error
            )));
        }
        confidence_bits(self.failure_probability)?;
        Ok(())
    }
}

/// Everything derived for one candidate evolution time.
#[derive(Debug, Clone)]
pub struct QpeDesign {
    pub params: QpeParams,
    pub plan: TrotterPlan,
    pub graph: AlgorithmGraph,
    pub estimate: ResourceEstimate,
}

impl QpeDesign {
    pub fn t_count(&self) -> &BigUint {
        &self.estimate.counts.t_gates
    }
}

fn design_at(model: &TrotterModel, h: &PauliSum, t: f64, shift: f64, spec: &QpeSpec) -> Result<QpeDesign> {
    let eps = spec.energy_error;
    let plan = model.plan(t, spec.split.trotter * eps * t, &spec.trotter)?;
    let (n_prec, a_extra, m) = match spec.phase_qubits {
        Some(m) => {
            if m == 0 || m > MAX_PHASE_QUBITS {
                return Err(Error::InvalidParameter(format!(
                    "phase qubits must lie in 1..={MAX_PHASE_QUBITS}, got {m}"
                )));
            }
            let a = confidence_bits(spec.failure_probability)?.min(m);
            (m - a, a, m)
        }
        None => derive_phase_qubits(t, spec.split.discretization * eps, spec.failure_probability)?,
    };
    let params = QpeParams {
        phase_qubits: m,
        precision_bits: n_prec,
        confidence_bits: a_extra,
        time: t,
        shift,
        energy_error: eps,
        failure_probability: spec.failure_probability,
        budget_split: spec.split,
    };
    let graph = build_qpe(h.num_qubits(), &params, &plan)?;
    let estimate = ResourceCounter::new(&graph).estimate(&spec.synthesis, spec.split.synthesis * eps * t)?;
    Ok(QpeDesign {
        params,
        plan,
        graph,
        estimate,
    })
}

/// Candidate times `t_naive·2^(j/4)` for `j = −12..=12`, clipped to
/// `t ≤ t_naive` and deduplicated, in increasing order.
pub fn time_grid(t_naive: f64) -> Vec<f64> {
    let half = (TIME_GRID_POINTS as i32 - 1) / 2;
    let mut grid: Vec<f64> = (-half..=half)
        .map(|j| (t_naive * 2f64.powf(j as f64 * 3.0 / half as f64)).min(t_naive))
        .collect();
    grid.dedup();
    grid
}

/// Grid search over the evolution time for the smallest post-synthesis T
/// count; ties go to the smaller time. A pinned `evolution_time` skips the
/// search but must stay inside the aliasing-safe window `t ≤ t_naive`.
pub fn optimize_time(h: &PauliSum, spec: &QpeSpec) -> Result<QpeDesign> {
    spec.validate()?;
    let (t_naive, shift) = derive_time_naive(h)?;
    let model = TrotterModel::new(h, &spec.trotter.ordering)?;
    if let Some(t) = spec.evolution_time {
        if !(t > 0.0 && t <= t_naive * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "evolution time {t} is outside the aliasing-safe range (0, {t_naive}]"
            )));
        }
        return design_at(&model, h, t, shift, spec);
    }
    let mut best: Option<QpeDesign> = None;
    for t in time_grid(t_naive) {
        let d = design_at(&model, h, t, shift, spec)?;
        if best.as_ref().is_none_or(|b| d.t_count() < b.t_count()) {
            best = Some(d);
        }
    }
    best.ok_or_else(|| Error::Invariant("empty time grid".into()))
}

/// The readout transform on qubits `0..m`: `|x> → 2^(−m/2) Σ_k e^{2πixk/2^m}|k>`.
fn fourier_gates(m: usize) -> Vec<Node> {
    let mut gates: Vec<Gate> = Vec::new();
    for i in 0..m {
        gates.push(Gate::h(i));
        for j in i + 1..m {
            let phi = 2.0 * PI / (1u128 << (j - i + 1)) as f64;
            gates.extend(controlled_phase(j, i, phi));
        }
    }
    for i in 0..m / 2 {
        let (a, b) = (i, m - 1 - i);
        gates.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
    }
    gates.into_iter().map(Node::from).collect()
}

/// Phase estimation on a `n_data`-qubit Hamiltonian with exactly one Trotter
/// step definition, one `U = step^r` definition and one readout definition.
pub fn build_qpe(n_data: usize, params: &QpeParams, plan: &TrotterPlan) -> Result<AlgorithmGraph> {
    let m = params.phase_qubits;
    if plan.num_qubits != n_data {
        return Err(Error::LengthMismatch {
            left: plan.num_qubits,
            right: n_data,
        });
    }
    let (r, shift) = (plan.steps, params.shift);
    build_qpe_with(n_data, m, |g, offset| {
        let step = add_step_definition(g, plan, offset, shift)?;
        g.add_definition("evolution", vec![Node::call(step, r)])
    })
}

/// Phase estimation around an arbitrary `U`. `add_unitary` receives the graph
/// and the data-register offset `m` and returns the id of `U`.
pub fn build_qpe_with<F>(n_data: usize, m: usize, add_unitary: F) -> Result<AlgorithmGraph>
where
    F: FnOnce(&mut AlgorithmGraph, usize) -> Result<DefId>,
{
    if m == 0 || m > MAX_PHASE_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "phase qubits must lie in 1..={MAX_PHASE_QUBITS}, got {m}"
        )));
    }
    let mut g = AlgorithmGraph::new(m + n_data);
    let u = add_unitary(&mut g, m)?;
    let readout = g.add_definition("phase_readout", fourier_gates(m))?;
    let mut body: Vec<Node> = (0..m).map(|q| Gate::h(q).into()).collect();
    for j in 0..m {
        body.push(Node::controlled_call(u, 1u64 << j, vec![m - 1 - j]));
    }
    body.push(Node::call(readout, 1));
    g.add_root("phase_estimation", body)?;
    Ok(g)
}

/// Plain time evolution, or the same controlled by an extra ancilla placed
/// at qubit 0 in front of the data register.
pub fn build_time_evolution(plan: &TrotterPlan, controlled: bool) -> Result<AlgorithmGraph> {
    if !controlled {
        return crate::trotter::build_trotter(plan);
    }
    let mut g = AlgorithmGraph::new(plan.num_qubits + 1);
    let step = add_step_definition(&mut g, plan, 1, 0.0)?;
    let u = g.add_definition("evolution", vec![Node::call(step, plan.steps)])?;
    g.add_root("controlled_time_evolution", vec![Node::controlled_call(u, 1, vec![0])])?;
    Ok(g)
}

/// A diagonal phase gate `e^{−iφ}` on the data register of an
/// `offset + n`-qubit graph, for tests that need an exact `U`.
pub fn global_phase_gate(offset: usize, n: usize, phi: f64) -> Gate {
    global_phase(&(offset..offset + n).collect::<Vec<_>>(), 2.0 * phi)
}
