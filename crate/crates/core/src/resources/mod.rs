//! Clifford+T resource estimation over [`AlgorithmGraph`]s.
//!
//! Each `(definition, number of controls)` pair is analyzed once and cached;
//! a call contributes `repeat ×` the callee's counts. Rotations are kept as a
//! separate pre-synthesis category and converted to T gates afterwards with a
//! [`SynthesisModel`].

pub mod lower;

use std::cell::Cell;
use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ir::{AlgorithmGraph, DefId, Gate, GateKind, Node};
use crate::pauli::Pauli;
use lower::lower_with_controls;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceCounts {
    pub clifford: BigUint,
    pub t_gates: BigUint,
    /// Arbitrary-angle `Rz` rotations before synthesis.
    pub rotations: BigUint,
    pub qubits: usize,
}

impl ResourceCounts {
    fn gates(clifford: u64, t_gates: u64, rotations: u64) -> Self {
        ResourceCounts {
            clifford: clifford.into(),
            t_gates: t_gates.into(),
            rotations: rotations.into(),
            qubits: 0,
        }
    }

    pub fn scaled(&self, k: u64) -> Self {
        ResourceCounts {
            clifford: &self.clifford * k,
            t_gates: &self.t_gates * k,
            rotations: &self.rotations * k,
            qubits: self.qubits,
        }
    }
}

impl AddAssign<&ResourceCounts> for ResourceCounts {
    fn add_assign(&mut self, rhs: &ResourceCounts) {
        self.clifford += &rhs.clifford;
        self.t_gates += &rhs.t_gates;
        self.rotations += &rhs.rotations;
        self.qubits = self.qubits.max(rhs.qubits);
    }
}

impl Add for ResourceCounts {
    type Output = ResourceCounts;
    fn add(mut self, rhs: ResourceCounts) -> ResourceCounts {
        self += &rhs;
        self
    }
}

/// T gates per synthesized rotation at tolerance `ε`: `⌈a + b·log2(1/ε)⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisModel {
    pub a: f64,
    pub b: f64,
}

impl Default for SynthesisModel {
    fn default() -> Self {
        SynthesisModel { a: 10.0, b: 4.0 }
    }
}

impl SynthesisModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "synthesis model needs a >= 0 and b > 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn t_per_rotation(&self, tolerance: f64) -> u64 {
        let v = (self.a + self.b * (1.0 / tolerance).log2()).ceil();
        if v <= 0.0 {
            0
        } else {
            v as u64
        }
    }
}

/// Counts for one uncontrolled primitive gate.
///
/// Pauli rotations are priced as their standard decomposition: a CX staircase
/// of `2(w − 1)` gates, an `H` pair per X letter, an `S†H … HS` quadruple per
/// Y letter and one `Rz`. An all-identity rotation is a global phase and free.
pub fn lower_gate(gate: &Gate) -> ResourceCounts {
    match &gate.kind {
        GateKind::H
        | GateKind::S
        | GateKind::Sdg
        | GateKind::X
        | GateKind::Y
        | GateKind::Z
        | GateKind::CX
        | GateKind::CZ => ResourceCounts::gates(1, 0, 0),
        GateKind::T | GateKind::Tdg => ResourceCounts::gates(0, 1, 0),
        GateKind::Rz { .. } => ResourceCounts::gates(0, 0, 1),
        GateKind::PauliRotation { string, .. } => {
            let w = string.weight() as u64;
            if w == 0 {
                return ResourceCounts::default();
            }
            let basis: u64 = string
                .letters()
                .map(|p| match p {
                    Pauli::X => 2,
                    Pauli::Y => 4,
                    _ => 0,
                })
                .sum();
            ResourceCounts::gates(2 * (w - 1) + basis, 0, 1)
        }
    }
}

/// Post-synthesis estimate plus the quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEstimate {
    /// `t_gates` includes synthesized rotations; `rotations` keeps the
    /// pre-synthesis count.
    pub counts: ResourceCounts,
    pub structural: ResourceCounts,
    pub synthesis_budget: f64,
    pub per_rotation_tolerance: f64,
    pub t_per_rotation: u64,
}

/// Memoizing counter. Keep one per graph to share the cache across calls.
pub struct ResourceCounter<'g> {
    graph: &'g AlgorithmGraph,
    cache: HashMap<(DefId, usize), ResourceCounts>,
    analyses: Cell<usize>,
}

impl<'g> ResourceCounter<'g> {
    pub fn new(graph: &'g AlgorithmGraph) -> Self {
        ResourceCounter {
            graph,
            cache: HashMap::new(),
            analyses: Cell::new(0),
        }
    }

    /// Number of `(definition, control count)` bodies analyzed so far. The
    /// root body is evaluated directly and not counted.
    pub fn analyses(&self) -> usize {
        self.analyses.get()
    }

    /// Pre-synthesis counts of the whole graph; `qubits` is the graph width.
    pub fn structural(&mut self) -> Result<ResourceCounts> {
        let root = self.graph.root()?;
        let mut counts = self.body(root, 0)?;
        counts.qubits = self.graph.width();
        Ok(counts)
    }

    fn body(&mut self, id: DefId, n_controls: usize) -> Result<ResourceCounts> {
        let graph = self.graph;
        let dummy: Vec<usize> = (0..n_controls).map(|i| graph.width() + i).collect();
        let mut total = ResourceCounts::default();
        for node in &graph.definition(id)?.body {
            match node {
                Node::Gate(g) => {
                    for lowered in lower_with_controls(g, &dummy) {
                        total += &lower_gate(&lowered);
                    }
                }
                Node::Call(c) => {
                    let inner = self.cached(c.def, n_controls + c.controls.len())?;
                    total += &inner.scaled(c.repeat);
                }
            }
        }
        Ok(total)
    }

    fn cached(&mut self, id: DefId, n_controls: usize) -> Result<ResourceCounts> {
        if let Some(c) = self.cache.get(&(id, n_controls)) {
            return Ok(c.clone());
        }
        self.analyses.set(self.analyses.get() + 1);
        let counts = self.body(id, n_controls)?;
        self.cache.insert((id, n_controls), counts.clone());
        Ok(counts)
    }

    /// Structural counts with rotations synthesized at an equal share of
    /// `synthesis_budget` each.
    pub fn estimate(&mut self, model: &SynthesisModel, synthesis_budget: f64) -> Result<ResourceEstimate> {
        model.validate()?;
        if !(synthesis_budget > 0.0 && synthesis_budget.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "synthesis budget must be positive, got {synthesis_budget}"
            )));
        }
        let structural = self.structural()?;
        let mut counts = structural.clone();
        let (tolerance, per) = if structural.rotations.is_zero() {
            (synthesis_budget, 0)
        } else {
            let n = structural.rotations.to_f64().unwrap_or(f64::INFINITY);
            let tol = synthesis_budget / n;
            (tol, model.t_per_rotation(tol))
        };
        counts.t_gates += &structural.rotations * per;
        Ok(ResourceEstimate {
            counts,
            structural,
            synthesis_budget,
            per_rotation_tolerance: tolerance,
            t_per_rotation: per,
        })
    }
}

/// One-shot structural count.
pub fn count_structural(g: &AlgorithmGraph) -> Result<ResourceCounts> {
    ResourceCounter::new(g).structural()
}

/// One-shot post-synthesis estimate.
pub fn count(g: &AlgorithmGraph, model: &SynthesisModel, synthesis_budget: f64) -> Result<ResourceEstimate> {
    ResourceCounter::new(g).estimate(model, synthesis_budget)
}

/// Sum of [`lower_gate`] over an explicit gate list.
pub fn count_gates<'a>(gates: impl IntoIterator<Item = &'a Gate>) -> ResourceCounts {
    let mut total = ResourceCounts::default();
    for g in gates {
        total += &lower_gate(g);
    }
    total
}
