//! Product-formula encodings of `e^{−iHt}` with commutator error bounds.
//!
//! Commutator spectral norms are bounded by the coefficient 1-norm of the
//! exactly computed commutator sum. With `T_γ = Σ_{γ' > γ} H_γ'` in the
//! resolved term order:
//!
//! * first order: `t²/(2r) · Σ_γ ‖[T_γ, H_γ]‖`
//! * second order: `t³/r² · (1/12 Σ_γ ‖[T_γ, [T_γ, H_γ]]‖ + 1/24 Σ_γ ‖[H_γ, [H_γ, T_γ]]‖)`
//!
//! Both bounds hold for the product taken in either direction, since the
//! reversed product is the adjoint of the forward product at time `−t`.

use indexmap::IndexMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ir::{AlgorithmGraph, DefId, Gate, Node};
use crate::pauli::{commutator_term, PauliString, PauliSum, PauliTerm};

/// Largest term count accepted by the second-order bound, whose cost grows
/// cubically in the number of terms.
pub const SECOND_ORDER_TERM_CAP: usize = 2000;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            TrotterOrder::First => "first",
            TrotterOrder::Second => "second",
        }
    }

    /// Exponentials per step for `terms` non-identity terms.
    fn rotations_per_step(self, terms: usize) -> u128 {
        match self {
            TrotterOrder::First => terms as u128,
            TrotterOrder::Second => 2 * terms as u128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderingStrategy {
    #[default]
    AsGiven,
    Lexicographic,
    MagnitudeDescending,
    /// Uniform shuffle from a `ChaCha8Rng` seeded with `seed`.
    Random { seed: u64 },
    /// `permutation[i]` is the index of the term placed at position `i`.
    Custom { permutation: Vec<usize> },
}

impl OrderingStrategy {
    pub fn describe(&self) -> String {
        match self {
            OrderingStrategy::AsGiven => "as_given".into(),
            OrderingStrategy::Lexicographic => "lexicographic".into(),
            OrderingStrategy::MagnitudeDescending => "magnitude_descending".into(),
            OrderingStrategy::Random { seed } => format!("random(seed={seed})"),
            OrderingStrategy::Custom { .. } => "custom".into(),
        }
    }
}

/// Deterministic permutation of `h`'s terms.
pub fn apply_ordering(h: &PauliSum, strategy: &OrderingStrategy) -> Result<Vec<PauliTerm>> {
    let mut terms = h.terms().to_vec();
    match strategy {
        OrderingStrategy::AsGiven => {}
        OrderingStrategy::Lexicographic => terms.sort_by(|a, b| a.string.cmp(&b.string)),
        OrderingStrategy::MagnitudeDescending => {
            terms.sort_by(|a, b| b.coeff.norm().total_cmp(&a.coeff.norm()))
        }
        OrderingStrategy::Random { seed } => {
            terms.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
        }
        OrderingStrategy::Custom { permutation } => {
            let n = terms.len();
            let mut seen = vec![false; n];
            if permutation.len() != n {
                return Err(Error::InvalidOrdering(format!(
                    "permutation has {} entries for {n} terms",
                    permutation.len()
                )));
            }
            for &i in permutation {
                if i >= n || seen[i] {
                    return Err(Error::InvalidOrdering(format!(
                        "permutation is not a bijection on 0..{n}"
                    )));
                }
                seen[i] = true;
            }
            terms = permutation.iter().map(|&i| terms[i].clone()).collect();
        }
    }
    Ok(terms)
}

type Sparse = IndexMap<PauliString, Complex64>;

fn one_norm(s: &Sparse) -> f64 {
    s.values().map(|c| c.norm()).sum()
}

/// `[Σ a, Σ b]` over sparse maps, merged exactly.
fn commutator_sparse<'a>(
    a: impl IntoIterator<Item = &'a PauliTerm> + Clone,
    b: &Sparse,
) -> Result<Sparse> {
    let mut out = Sparse::new();
    for (s, &c) in b {
        let tb = PauliTerm {
            coeff: c,
            string: s.clone(),
        };
        for ta in a.clone() {
            if let Some((coeff, string)) = commutator_term(ta, &tb)? {
                *out.entry(string).or_default() += coeff;
            }
        }
    }
    Ok(out)
}

fn single(t: &PauliTerm) -> Sparse {
    Sparse::from([(t.string.clone(), t.coeff)])
}

fn check_hermitian(terms: &[PauliTerm]) -> Result<()> {
    for t in terms {
        if t.coeff.im.abs() > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(format!(
                "coefficient {} on {}",
                t.coeff, t.string
            )));
        }
    }
    Ok(())
}

fn check_time_steps(t: f64, r: u64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be positive, got {t}")));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("Trotter steps must be at least 1".into()));
    }
    Ok(())
}

/// `Σ_γ ‖[T_γ, H_γ]‖` for the given term sequence.
pub fn first_order_constant(terms: &[PauliTerm]) -> Result<f64> {
    check_hermitian(terms)?;
    let mut total = 0.0;
    for (g, h) in terms.iter().enumerate() {
        let c = commutator_sparse(&terms[g + 1..], &single(h))?;
        total += one_norm(&c);
    }
    Ok(total)
}

/// `(Σ_γ ‖[T_γ, [T_γ, H_γ]]‖, Σ_γ ‖[H_γ, [H_γ, T_γ]]‖)` for the given term sequence.
pub fn second_order_constants(terms: &[PauliTerm]) -> Result<(f64, f64)> {
    check_hermitian(terms)?;
    if terms.len() > SECOND_ORDER_TERM_CAP {
        return Err(Error::cap("terms for the second-order bound", terms.len(), SECOND_ORDER_TERM_CAP));
    }
    let (mut outer, mut inner) = (0.0, 0.0);
    for (g, h) in terms.iter().enumerate() {
        let tail = &terms[g + 1..];
        let th = commutator_sparse(tail, &single(h))?;
        if th.is_empty() {
            continue;
        }
        outer += one_norm(&commutator_sparse(tail, &th)?);
        // [H, [H, T]] = [H, −[T, H]].
        let neg: Sparse = th.into_iter().map(|(s, c)| (s, -c)).collect();
        inner += one_norm(&commutator_sparse(std::slice::from_ref(h), &neg)?);
    }
    Ok((outer, inner))
}

/// Error constant `C` such that the bound is `C·t²/r` (first order) or
/// `C·t³/r²` (second order).
pub fn error_constant(terms: &[PauliTerm], order: TrotterOrder) -> Result<f64> {
    match order {
        TrotterOrder::First => Ok(first_order_constant(terms)? / 2.0),
        TrotterOrder::Second => {
            let (outer, inner) = second_order_constants(terms)?;
            Ok(outer / 12.0 + inner / 24.0)
        }
    }
}

fn bound_from_constant(c: f64, order: TrotterOrder, t: f64, r: u64) -> f64 {
    let r = r as f64;
    match order {
        TrotterOrder::First => c * t * t / r,
        TrotterOrder::Second => c * t * t * t / (r * r),
    }
}

/// Bound for an explicitly ordered term sequence.
pub fn bound_for_sequence(terms: &[PauliTerm], order: TrotterOrder, t: f64, r: u64) -> Result<f64> {
    check_time_steps(t, r)?;
    Ok(bound_from_constant(error_constant(terms, order)?, order, t, r))
}

/// First-order bound with the terms of `h` taken in their stored order.
pub fn bound_first_order(h: &PauliSum, t: f64, r: u64) -> Result<f64> {
    bound_for_sequence(h.terms(), TrotterOrder::First, t, r)
}

/// Second-order bound with the terms of `h` taken in their stored order.
pub fn bound_second_order(h: &PauliSum, t: f64, r: u64) -> Result<f64> {
    bound_for_sequence(h.terms(), TrotterOrder::Second, t, r)
}

/// A fully resolved product formula.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterPlan {
    pub order: TrotterOrder,
    pub steps: u64,
    pub time: f64,
    pub ordering: OrderingStrategy,
    pub error_bound: f64,
    pub terms: Vec<PauliTerm>,
    pub num_qubits: usize,
}

impl TrotterPlan {
    /// Exponentials of non-identity terms over all steps.
    pub fn rotation_count(&self) -> u128 {
        let w = self.terms.iter().filter(|t| !t.string.is_identity()).count();
        self.order.rotations_per_step(w) * u128::from(self.steps)
    }
}

/// What [`plan`] should derive and what the caller pinned.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrotterRequest {
    pub order: Option<TrotterOrder>,
    pub steps: Option<u64>,
    pub ordering: OrderingStrategy,
}

/// Smallest `r ≥ 1` with `C·t^k/r^p ≤ ε`.
fn minimal_steps(c: f64, order: TrotterOrder, t: f64, budget: f64) -> Result<u64> {
    if c == 0.0 {
        return Ok(1);
    }
    let seed = match order {
        TrotterOrder::First => c * t * t / budget,
        TrotterOrder::Second => (c * t * t * t / budget).sqrt(),
    };
    if !(seed.is_finite() && seed < 1e18) {
        return Err(Error::cap("Trotter steps", seed, 1e18));
    }
    let mut r = (seed.ceil() as u64).max(1);
    while bound_from_constant(c, order, t, r) > budget {
        r += 1;
    }
    while r > 1 && bound_from_constant(c, order, t, r - 1) <= budget {
        r -= 1;
    }
    Ok(r)
}

/// A Hamiltonian in a resolved term order together with its error
/// constants, which do not depend on `t` or `r`. Build once, plan many times.
#[derive(Debug, Clone)]
pub struct TrotterModel {
    terms: Vec<PauliTerm>,
    num_qubits: usize,
    ordering: OrderingStrategy,
    first: f64,
    second: Option<f64>,
}

impl TrotterModel {
    /// Simplifies and orders `h`, then evaluates the first-order constant and,
    /// when the term count allows, the second-order one.
    pub fn new(h: &PauliSum, ordering: &OrderingStrategy) -> Result<Self> {
        if !h.is_hermitian(HERMITIAN_TOLERANCE) {
            return Err(Error::NotHermitian("Trotter encoding needs a Hermitian operator".into()));
        }
        let terms = apply_ordering(&h.simplify(), ordering)?;
        let first = error_constant(&terms, TrotterOrder::First)?;
        let second = if terms.len() <= SECOND_ORDER_TERM_CAP {
            Some(error_constant(&terms, TrotterOrder::Second)?)
        } else {
            None
        };
        Ok(TrotterModel {
            terms,
            num_qubits: h.num_qubits(),
            ordering: ordering.clone(),
            first,
            second,
        })
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn constant(&self, order: TrotterOrder) -> Result<f64> {
        match order {
            TrotterOrder::First => Ok(self.first),
            TrotterOrder::Second => self.second.ok_or_else(|| {
                Error::cap("terms for the second-order bound", self.terms.len(), SECOND_ORDER_TERM_CAP)
            }),
        }
    }

    pub fn bound(&self, order: TrotterOrder, t: f64, r: u64) -> Result<f64> {
        check_time_steps(t, r)?;
        Ok(bound_from_constant(self.constant(order)?, order, t, r))
    }

    fn make(&self, order: TrotterOrder, t: f64, steps: u64) -> Result<TrotterPlan> {
        Ok(TrotterPlan {
            order,
            steps,
            time: t,
            ordering: self.ordering.clone(),
            error_bound: self.bound(order, t, steps)?,
            terms: self.terms.clone(),
            num_qubits: self.num_qubits,
        })
    }

    /// Smallest step count meeting `budget` in operator norm.
    ///
    /// With no order given, both orders are tried and the one needing fewer
    /// rotations wins (ties go to first order). Every rotation costs the same
    /// synthesized T count under an equal-split synthesis budget, so this is
    /// the order with the smaller lowered T count. Second order is skipped
    /// when the model has no second-order constant.
    pub fn derive_steps(&self, t: f64, budget: f64, order: Option<TrotterOrder>) -> Result<TrotterPlan> {
        check_time_steps(t, 1)?;
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "error budget must be positive, got {budget}"
            )));
        }
        let derive = |order: TrotterOrder| -> Result<TrotterPlan> {
            let r = minimal_steps(self.constant(order)?, order, t, budget)?;
            self.make(order, t, r)
        };
        match order {
            Some(o) => derive(o),
            None => {
                let first = derive(TrotterOrder::First)?;
                if self.second.is_none() || first.error_bound == 0.0 {
                    return Ok(first);
                }
                let second = derive(TrotterOrder::Second)?;
                if second.rotation_count() < first.rotation_count() {
                    Ok(second)
                } else {
                    Ok(first)
                }
            }
        }
    }

    /// Plan with a pinned step count; the order defaults to first.
    pub fn with_steps(&self, t: f64, steps: u64, order: Option<TrotterOrder>) -> Result<TrotterPlan> {
        self.make(order.unwrap_or(TrotterOrder::First), t, steps)
    }

    /// Pinned steps win over derivation; otherwise `budget` drives
    /// [`derive_steps`](Self::derive_steps).
    pub fn plan(&self, t: f64, budget: f64, request: &TrotterRequest) -> Result<TrotterPlan> {
        match request.steps {
            Some(r) => self.with_steps(t, r, request.order),
            None => self.derive_steps(t, budget, request.order),
        }
    }
}

/// One-shot [`TrotterModel::derive_steps`].
pub fn derive_steps(
    h: &PauliSum,
    t: f64,
    budget: f64,
    order: Option<TrotterOrder>,
    ordering: &OrderingStrategy,
) -> Result<TrotterPlan> {
    TrotterModel::new(h, ordering)?.derive_steps(t, budget, order)
}

/// One-shot [`TrotterModel::with_steps`].
pub fn plan_with_steps(
    h: &PauliSum,
    t: f64,
    steps: u64,
    order: Option<TrotterOrder>,
    ordering: &OrderingStrategy,
) -> Result<TrotterPlan> {
    TrotterModel::new(h, ordering)?.with_steps(t, steps, order)
}

fn rotation(term: &PauliTerm, offset: usize, angle: f64) -> Gate {
    let n = term.string.num_qubits();
    Gate::pauli_rotation(term.string.clone(), (offset..offset + n).collect(), angle)
}

/// Adds one Trotter step acting on qubits `offset..offset + n` and returns
/// its id. `shift` adds `shift·I` to the Hamiltonian as a global phase,
/// which becomes observable once the step is controlled.
pub fn add_step_definition(
    g: &mut AlgorithmGraph,
    plan: &TrotterPlan,
    offset: usize,
    shift: f64,
) -> Result<DefId> {
    let n = plan.num_qubits;
    let dt = plan.time / plan.steps as f64;
    let coeffs: Vec<f64> = plan.terms.iter().map(|t| t.coeff.re).collect();
    let mut body: Vec<Node> = Vec::new();
    let phase = |angle: f64| -> Node {
        Gate::pauli_rotation(PauliString::identity(n), (offset..offset + n).collect(), angle).into()
    };
    match plan.order {
        TrotterOrder::First => {
            for (term, c) in plan.terms.iter().zip(&coeffs) {
                body.push(rotation(term, offset, 2.0 * c * dt).into());
            }
        }
        TrotterOrder::Second => {
            for (term, c) in plan.terms.iter().zip(&coeffs) {
                body.push(rotation(term, offset, c * dt).into());
            }
            for (term, c) in plan.terms.iter().zip(&coeffs).rev() {
                body.push(rotation(term, offset, c * dt).into());
            }
        }
    }
    if shift != 0.0 {
        body.push(phase(2.0 * shift * dt));
    }
    g.add_definition("trotter_step", body)
}

/// `Call(step, repeat r)` on an `n`-qubit register.
pub fn build_trotter(plan: &TrotterPlan) -> Result<AlgorithmGraph> {
    let mut g = AlgorithmGraph::new(plan.num_qubits);
    let step = add_step_definition(&mut g, plan, 0, 0.0)?;
    g.add_root("time_evolution", vec![Node::call(step, plan.steps)])?;
    Ok(g)
}
