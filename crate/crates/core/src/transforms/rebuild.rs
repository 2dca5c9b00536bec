//! Shared machinery for the local passes.
//!
//! A pass walks the old graph in topological order and builds a new graph,
//! keeping a map from old nodes to new literals. For each node it may
//! replace the default translation with a different structure over the
//! translated leaves of a cut. Gains are estimated against the old graph's
//! reference counts; the final result is compacted and the pass falls back
//! to its input if the estimate turned out worse than the original.

use alloc::vec;
use alloc::vec::Vec;

use crate::aig::{Aig, AndBuilder, FanoutCounts, Lit, NodeId};

pub(crate) struct Rebuild<'a> {
    pub old: &'a Aig,
    pub ng: Aig,
    pub map: Vec<Lit>,
    pub refs: FanoutCounts,
    /// Logic level of each new node.
    pub levels: Vec<u32>,
    /// New nodes that translate old nodes dropped by an earlier replacement.
    pub stale: Vec<bool>,
    /// Old nodes already given a replacement. Their old cones no longer
    /// exist, so cone measurements stop at them.
    pub replaced: Vec<bool>,
}

impl<'a> Rebuild<'a> {
    pub fn new(old: &'a Aig) -> Rebuild<'a> {
        let ng = Aig::with_inputs_of(old);
        let mut map = vec![Lit::FALSE; old.len()];
        for (k, &id) in old.inputs().iter().enumerate() {
            map[id.index()] = Lit::new(ng.inputs()[k], false);
        }
        let levels = vec![0; ng.len()];
        let stale = vec![false; ng.len()];
        Rebuild {
            old,
            refs: FanoutCounts::new(old),
            ng,
            map,
            levels,
            stale,
            replaced: vec![false; old.len()],
        }
    }

    /// New-graph literal for an old literal.
    #[inline]
    pub fn lit(&self, l: Lit) -> Lit {
        self.map[l.node().index()].xor(l.is_complemented())
    }

    #[inline]
    pub fn level(&self, l: Lit) -> u32 {
        self.levels[l.node().index()]
    }

    /// Translates `v` unchanged.
    pub fn copy_node(&mut self, v: NodeId) {
        let (a, b) = self.old.fanins(v).expect("AND node");
        let (la, lb) = (self.lit(a), self.lit(b));
        self.map[v.index()] = self.and(la, lb);
    }

    /// Level the unchanged translation of `v` would have.
    pub fn default_level(&self, v: NodeId) -> u32 {
        let (a, b) = self.old.fanins(v).expect("AND node");
        1 + self.level(self.lit(a)).max(self.level(self.lit(b)))
    }

    /// Nodes freed by replacing `v` over a cut with `leaves`, sorted.
    pub fn mffc(&mut self, v: NodeId, leaves: &[NodeId], out: &mut Vec<NodeId>) {
        out.clear();
        let replaced = &self.replaced;
        self.refs
            .dereference_until(self.old, v, |f| leaves.contains(&f) || replaced[f.index()], out);
        self.refs.reference(self.old, out);
        out.sort_unstable();
    }

    pub fn dry_run(&self, mffc: &[NodeId]) -> DryRun<'_> {
        let mut revived: Vec<NodeId> = Vec::new();
        for &m in mffc {
            let n = self.map[m.index()].node();
            if self.ng.is_and(n) && !revived.contains(&n) {
                revived.push(n);
            }
        }
        DryRun {
            ng: &self.ng,
            levels: &self.levels,
            stale: &self.stale,
            mffc_nodes: revived,
            counted: Vec::new(),
            fake_levels: Vec::new(),
            added: 0,
        }
    }

    /// Records that `v` is now implemented by `lit`, which was built over
    /// `leaves` and replaces the cone `mffc` (bounded by those leaves).
    pub fn accept(&mut self, v: NodeId, lit: Lit, mffc: &[NodeId], leaves: &[NodeId]) {
        self.map[v.index()] = lit;
        self.replaced[v.index()] = true;
        for &m in mffc {
            if let Some((a, b)) = self.old.fanins(m) {
                self.refs.decr(a.node());
                self.refs.decr(b.node());
            }
            if m != v {
                let n = self.map[m.index()].node();
                if n.index() < self.stale.len() && n != lit.node() {
                    self.stale[n.index()] = true;
                }
            }
        }
        for &l in leaves {
            self.refs.incr(l);
        }
    }

    /// Sets outputs, compacts, and guards against growth.
    pub fn finish(mut self) -> Aig {
        for (k, &o) in self.old.outputs().iter().enumerate() {
            let l = self.lit(o);
            self.ng.add_output(l, self.old.output_names()[k].clone());
        }
        let out = self.ng.cleanup();
        if out.num_ands() > self.old.live_and_count() {
            self.old.cleanup()
        } else {
            out
        }
    }
}

impl AndBuilder for Rebuild<'_> {
    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let before = self.ng.len();
        let l = self.ng.and(a, b);
        if self.ng.len() > before {
            let lv = 1 + self.levels[a.node().index()].max(self.levels[b.node().index()]);
            self.levels.push(lv);
            self.stale.push(false);
        } else if l.node().index() < self.stale.len() {
            // Reusing a dropped node brings it back.
            self.stale[l.node().index()] = false;
        }
        l
    }
}

/// Counts the nodes a structure would add to the new graph without adding
/// them. Nodes that do not exist yet get placeholder ids past the end of
/// the graph. Existing nodes about to be freed by the replacement, or
/// already freed, are counted as added the first time they are used.
pub(crate) struct DryRun<'r> {
    ng: &'r Aig,
    levels: &'r [u32],
    stale: &'r [bool],
    mffc_nodes: Vec<NodeId>,
    counted: Vec<NodeId>,
    fake_levels: Vec<u32>,
    pub added: usize,
}

impl DryRun<'_> {
    pub fn level(&self, l: Lit) -> u32 {
        let i = l.node().index();
        if i < self.levels.len() {
            self.levels[i]
        } else {
            self.fake_levels[i - self.levels.len()]
        }
    }

    fn is_fake(&self, l: Lit) -> bool {
        l.node().index() >= self.ng.len()
    }
}

impl AndBuilder for DryRun<'_> {
    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE {
            return b;
        }
        if a == b {
            return a;
        }
        if !self.is_fake(a) && !self.is_fake(b) {
            if let Some(l) = self.ng.find_and(a, b) {
                let n = l.node();
                let freed = self.stale[n.index()] || self.mffc_nodes.contains(&n);
                if freed && !self.counted.contains(&n) {
                    self.counted.push(n);
                    self.added += 1;
                }
                return l;
            }
        }
        let lv = 1 + self.level(a).max(self.level(b));
        let id = NodeId((self.ng.len() + self.fake_levels.len()) as u32);
        self.fake_levels.push(lv);
        self.added += 1;
        Lit::new(id, false)
    }
}
