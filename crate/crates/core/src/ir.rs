//! Composite algorithm description: a table of reusable definitions whose
//! bodies hold primitive gates and calls to earlier definitions. A call
//! carries a repeat count and optional control qubits, so `U^p` and
//! controlled-`U` reuse the single definition of `U`.
//!
//! Definitions can only call definitions that already exist, which keeps the
//! call graph acyclic by construction.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::resources::lower::lower_with_controls;

/// Default limit on the number of primitive gates [`AlgorithmGraph::flatten`] produces.
pub const DEFAULT_FLATTEN_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefId(pub usize);

impl fmt::Display for DefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum GateKind {
    #[serde(rename = "h")]
    H,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "sdg")]
    Sdg,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "z")]
    Z,
    /// Qubits are `[control, target]`.
    #[serde(rename = "cx")]
    CX,
    #[serde(rename = "cz")]
    CZ,
    #[serde(rename = "t")]
    T,
    #[serde(rename = "tdg")]
    Tdg,
    /// `exp(-i angle/2 · Z)`.
    #[serde(rename = "rz")]
    Rz { angle: f64 },
    /// `exp(-i angle/2 · P)`; letter `i` of the string acts on `qubits[i]`.
    /// An all-identity string is a global phase.
    #[serde(rename = "pauli_rotation")]
    PauliRotation { string: PauliString, angle: f64 },
}

impl GateKind {
    fn arity(&self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            GateKind::PauliRotation { string, .. } => string.num_qubits(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    #[serde(flatten)]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate { kind, qubits }
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q])
    }
    pub fn s(q: usize) -> Self {
        Gate::new(GateKind::S, vec![q])
    }
    pub fn sdg(q: usize) -> Self {
        Gate::new(GateKind::Sdg, vec![q])
    }
    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> Self {
        Gate::new(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Gate::new(GateKind::Z, vec![q])
    }
    pub fn t(q: usize) -> Self {
        Gate::new(GateKind::T, vec![q])
    }
    pub fn tdg(q: usize) -> Self {
        Gate::new(GateKind::Tdg, vec![q])
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::CX, vec![control, target])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::CZ, vec![a, b])
    }
    pub fn rz(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Rz { angle }, vec![q])
    }
    pub fn pauli_rotation(string: PauliString, qubits: Vec<usize>, angle: f64) -> Self {
        Gate::new(GateKind::PauliRotation { string, angle }, qubits)
    }

    fn validate(&self, width: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::MalformedCircuit(format!(
                "{:?} expects {} qubits, got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        check_qubits(&self.qubits, width)?;
        match &self.kind {
            GateKind::Rz { angle } | GateKind::PauliRotation { angle, .. } if !angle.is_finite() => {
                Err(Error::NonFinite(format!("rotation angle {angle}")))
            }
            _ => Ok(()),
        }
    }
}

fn check_qubits(qubits: &[usize], width: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= width {
            return Err(Error::MalformedCircuit(format!(
                "qubit {q} outside register of width {width}"
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(Error::MalformedCircuit(format!("qubit {q} used twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Call {
    pub def: DefId,
    pub repeat: u64,
    pub controls: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Gate(Gate),
    Call(Call),
}

impl Node {
    pub fn call(def: DefId, repeat: u64) -> Self {
        Node::Call(Call {
            def,
            repeat,
            controls: Vec::new(),
        })
    }

    pub fn controlled_call(def: DefId, repeat: u64, controls: Vec<usize>) -> Self {
        Node::Call(Call {
            def,
            repeat,
            controls,
        })
    }
}

impl From<Gate> for Node {
    fn from(g: Gate) -> Self {
        Node::Gate(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub body: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmGraph {
    width: usize,
    definitions: Vec<Definition>,
    footprints: Vec<Vec<bool>>,
    root: Option<DefId>,
}

impl AlgorithmGraph {
    pub fn new(width: usize) -> Self {
        AlgorithmGraph {
            width,
            definitions: Vec::new(),
            footprints: Vec::new(),
            root: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.definitions
    }

    pub fn definition(&self, id: DefId) -> Result<&Definition> {
        self.definitions.get(id.0).ok_or(Error::DanglingReference(id.0))
    }

    pub fn root(&self) -> Result<DefId> {
        self.root
            .ok_or_else(|| Error::MalformedCircuit("graph has no root".into()))
    }

    /// Qubits touched by `id`, including the controls of nested calls.
    pub fn footprint(&self, id: DefId) -> Vec<usize> {
        (0..self.width).filter(|&q| self.footprints[id.0][q]).collect()
    }

    pub fn add_definition(&mut self, name: impl Into<String>, body: Vec<Node>) -> Result<DefId> {
        let id = self.definitions.len();
        let mut footprint = vec![false; self.width];
        for node in &body {
            match node {
                Node::Gate(g) => {
                    g.validate(self.width)?;
                    for &q in &g.qubits {
                        footprint[q] = true;
                    }
                }
                Node::Call(c) => {
                    if c.def.0 == id {
                        return Err(Error::Cycle(id));
                    }
                    if c.def.0 > id {
                        return Err(Error::DanglingReference(c.def.0));
                    }
                    if c.repeat == 0 {
                        return Err(Error::MalformedCircuit(format!(
                            "call to {} with repeat 0",
                            c.def
                        )));
                    }
                    check_qubits(&c.controls, self.width)?;
                    let callee = &self.footprints[c.def.0];
                    if let Some(&q) = c.controls.iter().find(|&&q| callee[q]) {
                        return Err(Error::MalformedCircuit(format!(
                            "control qubit {q} is used inside {}",
                            c.def
                        )));
                    }
                    for (f, &used) in footprint.iter_mut().zip(callee) {
                        *f |= used;
                    }
                    for &q in &c.controls {
                        footprint[q] = true;
                    }
                }
            }
        }
        self.definitions.push(Definition {
            name: name.into(),
            body,
        });
        self.footprints.push(footprint);
        Ok(DefId(id))
    }

    pub fn set_root(&mut self, id: DefId) -> Result<()> {
        self.definition(id)?;
        self.root = Some(id);
        Ok(())
    }

    /// Convenience for graphs whose root is a fresh definition.
    pub fn add_root(&mut self, name: impl Into<String>, body: Vec<Node>) -> Result<DefId> {
        let id = self.add_definition(name, body)?;
        self.set_root(id)?;
        Ok(id)
    }

    pub fn flatten(&self) -> Result<Vec<Gate>> {
        self.flatten_capped(DEFAULT_FLATTEN_CAP)
    }

    /// Expands every call depth-first with repeats unrolled. Controls are
    /// distributed onto each callee gate using the exact lowering rules in
    /// [`crate::resources::lower`], so the output holds only uncontrolled
    /// primitive gates.
    pub fn flatten_capped(&self, cap: usize) -> Result<Vec<Gate>> {
        let mut out = Vec::new();
        self.expand(self.root()?, &[], &mut out, cap)?;
        Ok(out)
    }

    fn expand(&self, id: DefId, controls: &[usize], out: &mut Vec<Gate>, cap: usize) -> Result<()> {
        for node in &self.definition(id)?.body {
            match node {
                Node::Gate(g) => {
                    let lowered = lower_with_controls(g, controls);
                    if out.len() + lowered.len() > cap {
                        return Err(Error::cap("flattened gates", out.len() + lowered.len(), cap));
                    }
                    out.extend(lowered);
                }
                Node::Call(c) => {
                    let mut inner_controls = controls.to_vec();
                    inner_controls.extend(&c.controls);
                    let mut body = Vec::new();
                    self.expand(c.def, &inner_controls, &mut body, cap.saturating_sub(out.len()))?;
                    let total = (body.len() as u128) * u128::from(c.repeat) + out.len() as u128;
                    if total > cap as u128 {
                        return Err(Error::cap("flattened gates", total, cap));
                    }
                    for _ in 0..c.repeat {
                        out.extend(body.iter().cloned());
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of gates [`flatten`](Self::flatten) would produce, saturating at `u128::MAX`.
    pub fn flattened_len(&self) -> Result<u128> {
        let mut memo = HashMap::new();
        self.flat_len(self.root()?, 0, &mut memo)
    }

    fn flat_len(
        &self,
        id: DefId,
        n_controls: usize,
        memo: &mut HashMap<(DefId, usize), u128>,
    ) -> Result<u128> {
        if let Some(&v) = memo.get(&(id, n_controls)) {
            return Ok(v);
        }
        let dummy: Vec<usize> = (0..n_controls).map(|i| self.width + i).collect();
        let mut total: u128 = 0;
        for node in &self.definition(id)?.body {
            let n = match node {
                Node::Gate(g) => lower_with_controls(g, &dummy).len() as u128,
                Node::Call(c) => self
                    .flat_len(c.def, n_controls + c.controls.len(), memo)?
                    .saturating_mul(u128::from(c.repeat)),
            };
            total = total.saturating_add(n);
        }
        memo.insert((id, n_controls), total);
        Ok(total)
    }

    /// Structured-text form that does not depend on the insertion order of
    /// definitions: definitions are numbered in depth-first order of first
    /// use from the root; unreachable ones follow, sorted by their content.
    pub fn canonical_json(&self) -> Result<Value> {
        let root = self.root()?;
        let mut order = Vec::new();
        let mut seen = vec![false; self.definitions.len()];
        self.visit(root, &mut seen, &mut order);
        let mut rest: Vec<usize> = (0..self.definitions.len()).filter(|&i| !seen[i]).collect();
        // Unreachable definitions may call each other; number them after
        // sorting by a reference-free fingerprint, then their callees follow.
        rest.sort_by_cached_key(|&i| {
            let d = &self.definitions[i];
            let body: Vec<Value> = d
                .body
                .iter()
                .map(|n| match n {
                    Node::Gate(g) => serde_json::to_value(g).unwrap_or(Value::Null),
                    Node::Call(c) => json!({"repeat": c.repeat, "controls": c.controls}),
                })
                .collect();
            (d.name.clone(), Value::Array(body).to_string())
        });
        for i in rest {
            self.visit(DefId(i), &mut seen, &mut order);
        }
        let index: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let defs: Vec<Value> = order
            .iter()
            .map(|&i| {
                let d = &self.definitions[i];
                let body: Vec<Value> = d
                    .body
                    .iter()
                    .map(|n| match n {
                        Node::Gate(g) => json!({"gate": g}),
                        Node::Call(c) => json!({
                            "call": index[&c.def.0],
                            "repeat": c.repeat,
                            "controls": c.controls,
                        }),
                    })
                    .collect();
                json!({"id": index[&i], "name": d.name, "body": body})
            })
            .collect();
        Ok(json!({
            "format": "hamsim-graph-v1",
            "width": self.width,
            "root": index[&root.0],
            "definitions": defs,
        }))
    }

    fn visit(&self, id: DefId, seen: &mut [bool], order: &mut Vec<usize>) {
        if seen[id.0] {
            return;
        }
        seen[id.0] = true;
        order.push(id.0);
        for n in &self.definitions[id.0].body {
            if let Node::Call(c) = n {
                self.visit(c.def, seen, order);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeat_unrolls() {
        let mut g = AlgorithmGraph::new(1);
        let d = g.add_definition("h", vec![Gate::h(0).into()]).unwrap();
        g.add_root("main", vec![Node::call(d, 3)]).unwrap();
        assert_eq!(g.flatten().unwrap(), vec![Gate::h(0), Gate::h(0), Gate::h(0)]);
        assert_eq!(g.flattened_len().unwrap(), 3);
    }

    #[test]
    fn nested_repeats_multiply() {
        let mut g = AlgorithmGraph::new(1);
        let a = g.add_definition("a", vec![Gate::x(0).into()]).unwrap();
        let b = g.add_definition("b", vec![Node::call(a, 2)]).unwrap();
        g.add_root("main", vec![Node::call(b, 4)]).unwrap();
        assert_eq!(g.flatten().unwrap().len(), 8);
    }

    #[test]
    fn controlled_rz_lowering() {
        let mut g = AlgorithmGraph::new(2);
        let d = g.add_definition("rz", vec![Gate::rz(1, 0.4).into()]).unwrap();
        g.add_root("main", vec![Node::controlled_call(d, 1, vec![0])]).unwrap();
        let flat = g.flatten().unwrap();
        let cx = flat.iter().filter(|g| g.kind == GateKind::CX).count();
        let rz = flat
            .iter()
            .filter(|g| matches!(g.kind, GateKind::Rz { .. }))
            .count();
        assert_eq!((flat.len(), cx, rz), (4, 2, 2));
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let mut g = AlgorithmGraph::new(1);
        assert!(matches!(
            g.add_definition("loop", vec![Node::call(DefId(0), 1)]),
            Err(Error::Cycle(0))
        ));
        assert!(matches!(
            g.add_definition("fwd", vec![Node::call(DefId(3), 1)]),
            Err(Error::DanglingReference(3))
        ));
    }

    #[test]
    fn empty_bodies_and_shared_callees() {
        let mut g = AlgorithmGraph::new(2);
        let empty = g.add_definition("id", vec![]).unwrap();
        let shared = g.add_definition("x", vec![Gate::x(1).into()]).unwrap();
        let a = g.add_definition("a", vec![Node::call(shared, 1), Node::call(empty, 1)]).unwrap();
        let b = g.add_definition("b", vec![Node::call(shared, 2)]).unwrap();
        g.add_root("main", vec![Node::call(a, 1), Node::call(b, 1)]).unwrap();
        assert_eq!(g.flatten().unwrap().len(), 3);
    }

    #[test]
    fn structural_errors() {
        let mut g = AlgorithmGraph::new(2);
        assert!(g.add_definition("bad", vec![Gate::h(2).into()]).is_err());
        assert!(g.add_definition("bad", vec![Gate::cx(1, 1).into()]).is_err());
        assert!(g
            .add_definition("bad", vec![Gate::new(GateKind::CX, vec![0]).into()])
            .is_err());
        assert!(g.add_definition("bad", vec![Gate::rz(0, f64::NAN).into()]).is_err());
        let d = g.add_definition("x", vec![Gate::x(1).into()]).unwrap();
        assert!(g.add_definition("bad", vec![Node::call(d, 0)]).is_err());
        assert!(g
            .add_definition("bad", vec![Node::controlled_call(d, 1, vec![1])])
            .is_err());
        assert!(g.set_root(DefId(7)).is_err());
        assert!(g.flatten().is_err());
    }

    #[test]
    fn flatten_cap() {
        let mut g = AlgorithmGraph::new(1);
        let d = g.add_definition("h", vec![Gate::h(0).into()]).unwrap();
        g.add_root("main", vec![Node::call(d, 1 << 40)]).unwrap();
        assert!(matches!(g.flatten(), Err(Error::CapExceeded { .. })));
        assert_eq!(g.flattened_len().unwrap(), 1 << 40);
        assert!(g.flatten_capped(10).is_err());
    }

    #[test]
    fn canonical_form_ignores_insertion_order() {
        let build = |swap: bool| {
            let mut g = AlgorithmGraph::new(2);
            let (a, b) = if swap {
                let b = g.add_definition("b", vec![Gate::x(1).into()]).unwrap();
                let a = g.add_definition("a", vec![Gate::h(0).into()]).unwrap();
                (a, b)
            } else {
                let a = g.add_definition("a", vec![Gate::h(0).into()]).unwrap();
                let b = g.add_definition("b", vec![Gate::x(1).into()]).unwrap();
                (a, b)
            };
            g.add_definition("unused", vec![Gate::z(0).into()]).unwrap();
            g.add_root("main", vec![Node::call(a, 2), Node::controlled_call(b, 1, vec![0])])
                .unwrap();
            g
        };
        let one = build(false).canonical_json().unwrap();
        let two = build(true).canonical_json().unwrap();
        assert_eq!(one, two);
        assert_eq!(one["definitions"][0]["name"], "main");
        assert_eq!(one["definitions"].as_array().unwrap().len(), 4);
    }
}
