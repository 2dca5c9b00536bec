//! And-inverter graphs.
//!
//! Node `0` is the constant-false node. Every AND node refers only to nodes
//! with a smaller id, so the node vector is always in topological order.

pub(crate) mod cut;
pub(crate) mod mffc;
pub(crate) mod sim;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

use crate::FxHashMap;

pub use cut::{cut_truth_table, enumerate_cuts, reconvergent_cut, Cut, CutEnumerator, DEFAULT_CUT_CAP};
pub use mffc::{mffc, mffc_bounded, FanoutCounts};
pub use sim::{BitMatrix, ShapeError};

/// Something that can create AND nodes: a graph, or a dry run that only
/// counts what would be created.
pub trait AndBuilder {
    fn and(&mut self, a: Lit, b: Lit) -> Lit;

    fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let p = self.and(a, !b);
        let q = self.and(!a, b);
        self.or(p, q)
    }

    fn and_many(&mut self, lits: &[Lit]) -> Lit {
        match lits.len() {
            0 => Lit::TRUE,
            1 => lits[0],
            n => {
                let (l, r) = lits.split_at(n / 2);
                let a = self.and_many(l);
                let b = self.and_many(r);
                self.and(a, b)
            }
        }
    }

    fn or_many(&mut self, lits: &[Lit]) -> Lit {
        match lits.len() {
            0 => Lit::FALSE,
            1 => lits[0],
            n => {
                let (l, r) = lits.split_at(n / 2);
                let a = self.or_many(l);
                let b = self.or_many(r);
                self.or(a, b)
            }
        }
    }
}

impl AndBuilder for Aig {
    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        Aig::and(self, a, b)
    }
}

/// Index of a node in an [`Aig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeId(pub u32);

impl NodeId {
    pub const CONST: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// An edge: a node id plus a complement flag, packed as `id << 1 | compl`.
///
/// The derived ordering is (node id, complemented) lexicographic, which is
/// the canonical fanin order used by structural hashing.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    #[inline]
    pub fn new(node: NodeId, complemented: bool) -> Lit {
        Lit(node.0 << 1 | complemented as u32)
    }

    #[inline]
    pub fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn node(self) -> NodeId {
        NodeId(self.0 >> 1)
    }

    #[inline]
    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    /// The same node with the complement flag cleared.
    #[inline]
    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    /// Complements the literal when `flip` is set.
    #[inline]
    pub fn xor(self, flip: bool) -> Lit {
        Lit(self.0 ^ flip as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.node())
        } else {
            write!(f, "{}", self.node())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Const,
    /// Primary input; the payload is its position in [`Aig::inputs`].
    Input(u32),
    And(Lit, Lit),
}

/// Per-node logic levels plus the depth over all outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels {
    pub per_node: Vec<u32>,
    pub depth: u32,
}

impl Levels {
    #[inline]
    pub fn of(&self, node: NodeId) -> u32 {
        self.per_node[node.index()]
    }
}

/// A combinational and-inverter graph with structural hashing.
#[derive(Clone, Debug)]
pub struct Aig {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<Lit>,
    strash: FxHashMap<(Lit, Lit), NodeId>,
    input_names: Vec<Option<String>>,
    output_names: Vec<Option<String>>,
}

impl Default for Aig {
    fn default() -> Self {
        Self::new()
    }
}

impl Aig {
    pub fn new() -> Aig {
        Aig {
            nodes: vec![Node::Const],
            inputs: Vec::new(),
            outputs: Vec::new(),
            strash: FxHashMap::default(),
            input_names: Vec::new(),
            output_names: Vec::new(),
        }
    }

    /// An empty graph with the same input interface (and names) as `self`.
    pub fn with_inputs_of(other: &Aig) -> Aig {
        let mut g = Aig::new();
        for name in &other.input_names {
            g.add_input(name.clone());
        }
        g
    }

    pub fn add_input(&mut self, name: Option<String>) -> Lit {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::Input(self.inputs.len() as u32));
        self.inputs.push(id);
        self.input_names.push(name);
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, lit: Lit, name: Option<String>) {
        debug_assert!(lit.node().index() < self.nodes.len());
        self.outputs.push(lit);
        self.output_names.push(name);
    }

    pub fn set_output(&mut self, index: usize, lit: Lit) {
        self.outputs[index] = lit;
    }

    /// Structurally hashed AND.
    ///
    /// Applies `x & 0 = 0`, `x & 1 = x`, `x & x = x` and `x & !x = 0`, then
    /// returns an existing node with the same ordered fanin pair if there is
    /// one. Otherwise allocates exactly one node.
    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == Lit::FALSE {
            return Lit::FALSE;
        }
        if a == Lit::TRUE {
            return b;
        }
        if a == b {
            return a;
        }
        if a == !b {
            return Lit::FALSE;
        }
        if let Some(&id) = self.strash.get(&(a, b)) {
            return Lit::new(id, false);
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::And(a, b));
        self.strash.insert((a, b), id);
        Lit::new(id, false)
    }

    /// Looks up `a & b` without allocating. Constant rules apply.
    pub fn find_and(&self, a: Lit, b: Lit) -> Option<Lit> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == !b {
            return Some(Lit::FALSE);
        }
        if a == Lit::TRUE {
            return Some(b);
        }
        if a == b {
            return Some(a);
        }
        self.strash.get(&(a, b)).map(|&id| Lit::new(id, false))
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    /// Three-node XOR: `!(!(a & !b) & !(!a & b))`.
    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let p = self.and(a, !b);
        let q = self.and(!a, b);
        self.or(p, q)
    }

    pub fn mux(&mut self, sel: Lit, then: Lit, other: Lit) -> Lit {
        let p = self.and(sel, then);
        let q = self.and(!sel, other);
        self.or(p, q)
    }

    pub fn maj(&mut self, a: Lit, b: Lit, c: Lit) -> Lit {
        let ab = self.and(a, b);
        let ac = self.and(a, c);
        let bc = self.and(b, c);
        let t = self.or(ab, ac);
        self.or(t, bc)
    }

    /// AND over many literals as a balanced tree.
    pub fn and_many(&mut self, lits: &[Lit]) -> Lit {
        match lits.len() {
            0 => Lit::TRUE,
            1 => lits[0],
            n => {
                let (l, r) = lits.split_at(n / 2);
                let a = self.and_many(l);
                let b = self.and_many(r);
                self.and(a, b)
            }
        }
    }

    pub fn or_many(&mut self, lits: &[Lit]) -> Lit {
        match lits.len() {
            0 => Lit::FALSE,
            1 => lits[0],
            n => {
                let (l, r) = lits.split_at(n / 2);
                let a = self.or_many(l);
                let b = self.or_many(r);
                self.or(a, b)
            }
        }
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.index()]
    }

    #[inline]
    pub fn fanins(&self, id: NodeId) -> Option<(Lit, Lit)> {
        match self.nodes[id.index()] {
            Node::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    #[inline]
    pub fn is_and(&self, id: NodeId) -> bool {
        matches!(self.nodes[id.index()], Node::And(..))
    }

    #[inline]
    pub fn is_input(&self, id: NodeId) -> bool {
        matches!(self.nodes[id.index()], Node::Input(_))
    }

    /// Total node count, including the constant and the inputs.
    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_names(&self) -> &[Option<String>] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[Option<String>] {
        &self.output_names
    }

    pub fn set_input_name(&mut self, index: usize, name: Option<String>) {
        self.input_names[index] = name;
    }

    pub fn set_output_name(&mut self, index: usize, name: Option<String>) {
        self.output_names[index] = name;
    }

    /// Number of AND nodes stored, live or not.
    pub fn num_ands(&self) -> usize {
        self.nodes.len() - 1 - self.inputs.len()
    }

    pub fn and_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::And(..)))
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Marks nodes reachable from the outputs.
    pub fn live_mask(&self) -> Vec<bool> {
        let mut live = vec![false; self.nodes.len()];
        for &o in &self.outputs {
            live[o.node().index()] = true;
        }
        for i in (0..self.nodes.len()).rev() {
            if !live[i] {
                continue;
            }
            if let Node::And(a, b) = self.nodes[i] {
                live[a.node().index()] = true;
                live[b.node().index()] = true;
            }
        }
        live
    }

    /// Number of AND nodes reachable from the outputs.
    pub fn live_and_count(&self) -> usize {
        let live = self.live_mask();
        self.nodes
            .iter()
            .zip(&live)
            .filter(|(n, &l)| l && matches!(n, Node::And(..)))
            .count()
    }

    /// Levels: inputs and the constant sit at 0, an AND at one more than its
    /// deepest fanin. Depth is taken over the output literals.
    pub fn levels(&self) -> Levels {
        let mut per_node = vec![0u32; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::And(a, b) = node {
                per_node[i] = 1 + per_node[a.node().index()].max(per_node[b.node().index()]);
            }
        }
        let depth = self
            .outputs
            .iter()
            .map(|o| per_node[o.node().index()])
            .max()
            .unwrap_or(0);
        Levels { per_node, depth }
    }

    pub fn depth(&self) -> u32 {
        self.levels().depth
    }

    /// Copies the live part of the graph into a fresh, densely numbered graph.
    /// Inputs are all kept (in order) even when unused.
    pub fn cleanup(&self) -> Aig {
        let live = self.live_mask();
        let mut g = Aig::with_inputs_of(self);
        let mut map = vec![Lit::FALSE; self.nodes.len()];
        for (k, &id) in self.inputs.iter().enumerate() {
            map[id.index()] = Lit::new(g.inputs[k], false);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            if let Node::And(a, b) = *node {
                let fa = map[a.node().index()].xor(a.is_complemented());
                let fb = map[b.node().index()].xor(b.is_complemented());
                map[i] = g.and(fa, fb);
            }
        }
        for (k, &o) in self.outputs.iter().enumerate() {
            let lit = map[o.node().index()].xor(o.is_complemented());
            g.add_output(lit, self.output_names[k].clone());
        }
        g
    }

    /// Builds the cone of `root` (in `src`) inside `self`, with `src` inputs
    /// bound to `input_map`. Used when copying or composing graphs.
    pub fn copy_cone(&mut self, src: &Aig, root: Lit, input_map: &[Lit]) -> Lit {
        let mut map: FxHashMap<NodeId, Lit> = FxHashMap::default();
        let mut stack = vec![(root.node(), false)];
        while let Some((id, expanded)) = stack.pop() {
            if map.contains_key(&id) {
                continue;
            }
            match src.nodes[id.index()] {
                Node::Const => {
                    map.insert(id, Lit::FALSE);
                }
                Node::Input(k) => {
                    map.insert(id, input_map[k as usize]);
                }
                Node::And(a, b) => {
                    if expanded {
                        let fa = map[&a.node()].xor(a.is_complemented());
                        let fb = map[&b.node()].xor(b.is_complemented());
                        let l = self.and(fa, fb);
                        map.insert(id, l);
                    } else {
                        stack.push((id, true));
                        stack.push((a.node(), false));
                        stack.push((b.node(), false));
                    }
                }
            }
        }
        map[&root.node()].xor(root.is_complemented())
    }

    /// Checks the structural invariants. Intended for tests and debug builds.
    pub fn check(&self) -> Result<(), String> {
        use alloc::format;
        let mut seen: FxHashMap<(Lit, Lit), usize> = FxHashMap::default();
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Const if i != 0 => return Err(format!("constant node at {i}")),
                Node::Input(k) if self.inputs.get(k as usize) != Some(&NodeId(i as u32)) => {
                    return Err(format!("input {i} out of place"))
                }
                Node::And(a, b) => {
                    if a.node().index() >= i || b.node().index() >= i {
                        return Err(format!("node {i} is not topologically ordered"));
                    }
                    if a >= b {
                        return Err(format!("node {i} fanins not in canonical order"));
                    }
                    if a.is_const() || b.is_const() {
                        return Err(format!("node {i} has a constant fanin"));
                    }
                    if let Some(prev) = seen.insert((a, b), i) {
                        return Err(format!("nodes {prev} and {i} share a fanin pair"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strash_identity_and_annihilation() {
        let mut g = Aig::new();
        let x = g.add_input(None);
        assert_eq!(g.and(x, Lit::TRUE), x);
        assert_eq!(g.and(Lit::TRUE, x), x);
        assert_eq!(g.and(x, !x), Lit::FALSE);
        assert_eq!(g.and(x, Lit::FALSE), Lit::FALSE);
        assert_eq!(g.and(x, x), x);
        assert_eq!(g.num_ands(), 0);
    }

    #[test]
    fn strash_hashes_repeated_pairs() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let n1 = g.and(a, b);
        assert_eq!(g.num_ands(), 1);
        let n2 = g.and(b, a);
        assert_eq!(n1, n2);
        assert_eq!(g.num_ands(), 1);
        g.check().unwrap();
    }

    #[test]
    fn levels_of_small_graphs() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        g.add_output(a, None);
        assert_eq!(g.depth(), 0);

        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let n = g.and(a, b);
        g.add_output(n, None);
        assert_eq!(g.depth(), 1);
    }

    #[test]
    fn cleanup_drops_dead_nodes_and_keeps_depth() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let ab = g.and(a, b);
        let _dead = g.and(ab, c);
        let x = g.and(a, !c);
        g.add_output(x, None);
        let depth = g.depth();
        let h = g.cleanup();
        assert_eq!(h.num_ands(), 1);
        assert!(h.depth() <= depth);
        assert_eq!(h.num_inputs(), 3);
    }
}
