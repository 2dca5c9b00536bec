use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{Aig, Node, NodeId};
use crate::truth::{TruthTable, MAX_VARS};

/// Cuts kept per node, the trivial cut included.
pub const DEFAULT_CUT_CAP: usize = 16;

/// A cut: a root and a sorted set of at most eight leaves such that every
/// path from an input to the root passes through a leaf.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cut {
    root: NodeId,
    len: u8,
    leaves: [NodeId; MAX_VARS],
    sig: u64,
}

impl Cut {
    /// Builds a cut from leaves in any order; duplicates are removed.
    pub fn new(root: NodeId, leaves: &[NodeId]) -> Cut {
        let mut v: Vec<NodeId> = leaves.to_vec();
        v.sort_unstable();
        v.dedup();
        assert!(v.len() <= MAX_VARS, "cut has more than eight leaves");
        let mut arr = [NodeId(0); MAX_VARS];
        arr[..v.len()].copy_from_slice(&v);
        Cut {
            root,
            len: v.len() as u8,
            leaves: arr,
            sig: signature(&v),
        }
    }

    pub fn trivial(root: NodeId) -> Cut {
        Cut::new(root, &[root])
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves[..self.len as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.len == 1 && self.leaves[0] == self.root
    }

    /// True when the leaves of `self` are a subset of those of `other`.
    pub fn dominates(&self, other: &Cut) -> bool {
        if self.len > other.len || self.sig & !other.sig != 0 {
            return false;
        }
        let (a, b) = (self.leaves(), other.leaves());
        let mut j = 0;
        for &x in a {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j == b.len() || b[j] != x {
                return false;
            }
            j += 1;
        }
        true
    }

    /// Position of `leaf` in the sorted leaf list.
    pub fn position(&self, leaf: NodeId) -> Option<usize> {
        self.leaves().binary_search(&leaf).ok()
    }

    fn merge(root: NodeId, a: &Cut, b: &Cut, k: usize) -> Option<Cut> {
        if (a.sig | b.sig).count_ones() as usize > k {
            return None;
        }
        let mut out = [NodeId(0); MAX_VARS];
        let (x, y) = (a.leaves(), b.leaves());
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() || j < y.len() {
            let next = if j == y.len() || (i < x.len() && x[i] < y[j]) {
                i += 1;
                x[i - 1]
            } else if i == x.len() || y[j] < x[i] {
                j += 1;
                y[j - 1]
            } else {
                i += 1;
                j += 1;
                x[i - 1]
            };
            if n == k {
                return None;
            }
            out[n] = next;
            n += 1;
        }
        Some(Cut {
            root,
            len: n as u8,
            leaves: out,
            sig: a.sig | b.sig,
        })
    }
}

fn signature(leaves: &[NodeId]) -> u64 {
    leaves.iter().fold(0, |s, l| s | 1u64 << (l.0 % 64))
}

impl fmt::Debug for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cut({} <- {:?})", self.root, self.leaves())
    }
}

/// Bottom-up k-feasible cut enumeration over a whole graph.
#[derive(Clone, Debug)]
pub struct CutEnumerator {
    k: usize,
    cap: usize,
    cuts: Vec<Vec<Cut>>,
}

impl CutEnumerator {
    pub fn new(g: &Aig, k: usize, cap: usize) -> CutEnumerator {
        assert!((2..=MAX_VARS).contains(&k), "cut size must be in 2..=8");
        assert!(cap >= 1);
        let mut cuts: Vec<Vec<Cut>> = Vec::with_capacity(g.len());
        let mut scratch: Vec<Cut> = Vec::new();
        for (i, node) in g.nodes().iter().enumerate() {
            let id = NodeId(i as u32);
            match *node {
                Node::Const => cuts.push(vec![Cut::new(id, &[])]),
                Node::Input(_) => cuts.push(vec![Cut::trivial(id)]),
                Node::And(a, b) => {
                    scratch.clear();
                    for ca in &cuts[a.node().index()] {
                        for cb in &cuts[b.node().index()] {
                            if let Some(c) = Cut::merge(id, ca, cb, k) {
                                if !scratch.contains(&c) {
                                    scratch.push(c);
                                }
                            }
                        }
                    }
                    scratch.sort_unstable_by(|x, y| x.len.cmp(&y.len).then_with(|| x.leaves().cmp(y.leaves())));
                    let mut kept: Vec<Cut> = Vec::with_capacity(cap);
                    kept.push(Cut::trivial(id));
                    for c in &scratch {
                        if kept.len() == cap {
                            break;
                        }
                        // Sorted by size, so only earlier cuts can dominate.
                        if kept[1..].iter().any(|d| d.dominates(c)) {
                            continue;
                        }
                        kept.push(*c);
                    }
                    cuts.push(kept);
                }
            }
        }
        CutEnumerator { k, cap, cuts }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn cuts(&self, node: NodeId) -> &[Cut] {
        &self.cuts[node.index()]
    }
}

/// All retained k-feasible cuts of `node` (cap [`DEFAULT_CUT_CAP`]).
pub fn enumerate_cuts(g: &Aig, node: NodeId, k: usize) -> Vec<Cut> {
    CutEnumerator::new(g, k, DEFAULT_CUT_CAP).cuts(node).to_vec()
}

/// AND nodes strictly inside the cone of `root` bounded by `leaves`, in
/// ascending id order (the root included unless it is itself a leaf).
/// Returns `None` if the traversal escapes to an input or the constant that
/// is not a leaf.
pub(crate) fn cone_nodes(g: &Aig, root: NodeId, leaves: &[NodeId]) -> Option<Vec<NodeId>> {
    let mut cone = Vec::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if leaves.contains(&id) || cone.contains(&id) {
            continue;
        }
        match g.node(id) {
            Node::And(a, b) => {
                cone.push(id);
                stack.push(a.node());
                stack.push(b.node());
            }
            _ => return None,
        }
    }
    cone.sort_unstable();
    Some(cone)
}

/// Function of the cut root over the cut leaves, leaf `i` of the sorted leaf
/// list being variable `i`.
///
/// # Panics
/// If the leaves do not form a complete boundary of the root.
pub fn cut_truth_table(g: &Aig, cut: &Cut) -> TruthTable {
    try_cut_truth_table(g, cut.root(), cut.leaves()).expect("leaves do not bound the cone")
}

pub(crate) fn try_cut_truth_table(g: &Aig, root: NodeId, leaves: &[NodeId]) -> Option<TruthTable> {
    let n = leaves.len();
    if let Some(p) = leaves.iter().position(|&l| l == root) {
        return Some(TruthTable::var(p, n));
    }
    if root == NodeId::CONST {
        return Some(TruthTable::zero(n));
    }
    let cone = cone_nodes(g, root, leaves)?;
    let mut tts: Vec<TruthTable> = Vec::with_capacity(cone.len());
    let value = |id: NodeId, tts: &[TruthTable]| -> TruthTable {
        if let Some(p) = leaves.iter().position(|&l| l == id) {
            TruthTable::var(p, n)
        } else {
            tts[cone.binary_search(&id).expect("inside the cone")]
        }
    };
    for &id in &cone {
        let (a, b) = g.fanins(id).expect("cone holds AND nodes");
        let mut ta = value(a.node(), &tts);
        let mut tb = value(b.node(), &tts);
        if a.is_complemented() {
            ta = !ta;
        }
        if b.is_complemented() {
            tb = !tb;
        }
        tts.push(ta & tb);
    }
    tts.last().copied()
}

/// Reconvergence-driven cut of `root` with at most `k` leaves.
///
/// Starting from the fanins, repeatedly expands the leaf that adds the
/// fewest new leaves; stops when no expansion fits in `k`.
pub fn reconvergent_cut(g: &Aig, root: NodeId, k: usize) -> Cut {
    assert!((2..=MAX_VARS).contains(&k));
    let Some((a, b)) = g.fanins(root) else {
        return Cut::trivial(root);
    };
    let mut visited: Vec<NodeId> = vec![root, a.node()];
    let mut leaves: Vec<NodeId> = vec![a.node()];
    if b.node() != a.node() {
        visited.push(b.node());
        leaves.push(b.node());
    }
    loop {
        let mut best: Option<(usize, NodeId, usize)> = None;
        for (pos, &leaf) in leaves.iter().enumerate() {
            let Some((x, y)) = g.fanins(leaf) else { continue };
            let mut added = 0;
            if !visited.contains(&x.node()) {
                added += 1;
            }
            if y.node() != x.node() && !visited.contains(&y.node()) {
                added += 1;
            }
            if leaves.len() - 1 + added > k {
                continue;
            }
            let better = match best {
                None => true,
                Some((c, id, _)) => added < c || (added == c && leaf > id),
            };
            if better {
                best = Some((added, leaf, pos));
            }
        }
        let Some((_, leaf, pos)) = best else { break };
        leaves.swap_remove(pos);
        let (x, y) = g.fanins(leaf).expect("expanded leaf is an AND");
        for f in [x.node(), y.node()] {
            if !visited.contains(&f) {
                visited.push(f);
                leaves.push(f);
            }
        }
    }
    Cut::new(root, &leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::Lit;

    fn leaves_of(cuts: &[Cut]) -> Vec<Vec<u32>> {
        cuts.iter().map(|c| c.leaves().iter().map(|l| l.0).collect()).collect()
    }

    #[test]
    fn input_has_only_trivial_cut() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let cuts = enumerate_cuts(&g, a.node(), 4);
        assert_eq!(cuts.len(), 1);
        assert!(cuts[0].is_trivial());
    }

    #[test]
    fn single_and_cuts() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let n = g.and(a, b);
        let cuts = enumerate_cuts(&g, n.node(), 2);
        assert_eq!(leaves_of(&cuts), vec![vec![3], vec![1, 2]]);
    }

    #[test]
    fn balanced_tree_has_full_leaf_cut() {
        let mut g = Aig::new();
        let v: Vec<Lit> = (0..4).map(|_| g.add_input(None)).collect();
        let l = g.and(v[0], v[1]);
        let r = g.and(v[2], v[3]);
        let root = g.and(l, r);
        let cuts = enumerate_cuts(&g, root.node(), 4);
        let want = Cut::new(root.node(), &v.iter().map(|l| l.node()).collect::<Vec<_>>());
        assert!(cuts.contains(&want));
        assert_eq!(cuts.len(), 5);
    }

    #[test]
    fn truth_tables_of_small_cuts() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let n = g.and(a, b);
        assert_eq!(cut_truth_table(&g, &Cut::trivial(n.node())).to_bits_string(), "01");
        assert_eq!(
            cut_truth_table(&g, &Cut::new(n.node(), &[a.node(), b.node()])).to_bits_string(),
            "0001"
        );
        let m = g.maj(a, b, c);
        let cut = Cut::new(m.node(), &[a.node(), b.node(), c.node()]);
        let tt = cut_truth_table(&g, &cut);
        let tt = if m.is_complemented() { !tt } else { tt };
        assert_eq!(tt.to_bits_string(), "00010111");
    }

    #[test]
    fn reconvergent_cut_stays_within_k() {
        let mut g = Aig::new();
        let v: Vec<Lit> = (0..10).map(|_| g.add_input(None)).collect();
        let mut acc = v[0];
        for &x in &v[1..] {
            acc = g.and(acc, x);
        }
        let cut = reconvergent_cut(&g, acc.node(), 6);
        assert!(cut.len() <= 6);
        assert!(try_cut_truth_table(&g, acc.node(), cut.leaves()).is_some());
    }
}
