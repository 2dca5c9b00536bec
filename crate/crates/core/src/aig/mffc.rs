use alloc::vec;
use alloc::vec::Vec;

use super::{Aig, Node, NodeId};

/// Reference counts over the live part of a graph: one per AND fanin edge
/// from a live node, plus one per output that points at the node.
#[derive(Clone, Debug)]
pub struct FanoutCounts {
    refs: Vec<u32>,
}

impl FanoutCounts {
    pub fn new(g: &Aig) -> FanoutCounts {
        let live = g.live_mask();
        let mut refs = vec![0u32; g.len()];
        for (i, node) in g.nodes().iter().enumerate() {
            if let (true, Node::And(a, b)) = (live[i], node) {
                refs[a.node().index()] += 1;
                refs[b.node().index()] += 1;
            }
        }
        for o in g.outputs() {
            refs[o.node().index()] += 1;
        }
        FanoutCounts { refs }
    }

    #[inline]
    pub fn get(&self, id: NodeId) -> u32 {
        self.refs[id.index()]
    }

    /// Grows the table after nodes are appended to the graph.
    pub fn resize(&mut self, len: usize) {
        self.refs.resize(len, 0);
    }

    pub fn incr(&mut self, id: NodeId) {
        self.refs[id.index()] += 1;
    }

    pub fn decr(&mut self, id: NodeId) {
        self.refs[id.index()] -= 1;
    }

    /// Dereferences the cone of `root`, stopping at `bound`, and pushes every
    /// node whose count drops to zero (plus the root) onto `out`. Counts stay
    /// modified; call [`FanoutCounts::reference`] to restore them.
    pub fn dereference(&mut self, g: &Aig, root: NodeId, bound: &[NodeId], out: &mut Vec<NodeId>) {
        self.dereference_until(g, root, |f| bound.contains(&f), out)
    }

    /// [`FanoutCounts::dereference`] with an arbitrary stopping predicate.
    pub fn dereference_until(&mut self, g: &Aig, root: NodeId, stop: impl Fn(NodeId) -> bool, out: &mut Vec<NodeId>) {
        out.push(root);
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let Some((a, b)) = g.fanins(id) else { continue };
            for f in [a.node(), b.node()] {
                self.refs[f.index()] -= 1;
                if self.refs[f.index()] == 0 && g.is_and(f) && !stop(f) {
                    out.push(f);
                    stack.push(f);
                }
            }
        }
    }

    /// Undoes [`FanoutCounts::dereference`] for the nodes it returned.
    pub fn reference(&mut self, g: &Aig, cone: &[NodeId]) {
        for &id in cone {
            if let Some((a, b)) = g.fanins(id) {
                self.refs[a.node().index()] += 1;
                self.refs[b.node().index()] += 1;
            }
        }
    }

    /// MFFC of `root` restricted to the cone above `bound`; counts are left
    /// unchanged.
    pub fn mffc(&mut self, g: &Aig, root: NodeId, bound: &[NodeId]) -> Vec<NodeId> {
        let mut cone = Vec::new();
        if !g.is_and(root) {
            return cone;
        }
        self.dereference(g, root, bound, &mut cone);
        self.reference(g, &cone);
        cone.sort_unstable();
        cone
    }
}

/// Maximum fanout-free cone of an AND node: the nodes that become dead when
/// `root` is removed. Sorted by id; always contains `root`.
pub fn mffc(g: &Aig, root: NodeId) -> Vec<NodeId> {
    FanoutCounts::new(g).mffc(g, root, &[])
}

/// MFFC that does not extend past `bound` (typically the leaves of a cut).
pub fn mffc_bounded(g: &Aig, root: NodeId, bound: &[NodeId]) -> Vec<NodeId> {
    FanoutCounts::new(g).mffc(g, root, bound)
}
