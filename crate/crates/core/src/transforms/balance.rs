use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::aig::{Aig, FanoutCounts, Lit, Node, NodeId};

/// AND-tree balancing.
///
/// Maximal multi-input ANDs are collected across uncomplemented edges into
/// single-fanout AND nodes, then rebuilt by repeatedly pairing the two
/// shallowest operands. Falls back to the input if depth would grow.
pub fn balance(g: &Aig) -> Aig {
    let old = g.cleanup();
    let refs = FanoutCounts::new(&old);

    // A node is absorbed into its consumer's supergate when its only
    // reference is an uncomplemented AND fanin edge.
    let mut complemented_ref = vec![false; old.len()];
    let mut output_ref = vec![false; old.len()];
    for id in old.and_ids() {
        let (a, b) = old.fanins(id).expect("AND node");
        for l in [a, b] {
            if l.is_complemented() {
                complemented_ref[l.node().index()] = true;
            }
        }
    }
    for o in old.outputs() {
        output_ref[o.node().index()] = true;
    }
    let absorbed = |id: NodeId| -> bool {
        old.is_and(id) && refs.get(id) == 1 && !complemented_ref[id.index()] && !output_ref[id.index()]
    };

    let mut ng = Aig::with_inputs_of(&old);
    let mut levels: Vec<u32> = vec![0; ng.len()];
    let mut map = vec![Lit::FALSE; old.len()];
    for (k, &id) in old.inputs().iter().enumerate() {
        map[id.index()] = Lit::new(ng.inputs()[k], false);
    }
    let mut leaves: Vec<Lit> = Vec::new();
    let mut stack: Vec<Lit> = Vec::new();
    for (i, node) in old.nodes().iter().enumerate() {
        let id = NodeId(i as u32);
        let Node::And(a, b) = *node else { continue };
        if absorbed(id) {
            continue;
        }
        leaves.clear();
        stack.clear();
        stack.push(a);
        stack.push(b);
        while let Some(l) = stack.pop() {
            if !l.is_complemented() && absorbed(l.node()) {
                let (x, y) = old.fanins(l.node()).expect("AND node");
                stack.push(x);
                stack.push(y);
            } else {
                leaves.push(map[l.node().index()].xor(l.is_complemented()));
            }
        }
        leaves.sort_unstable();
        leaves.dedup();
        map[i] = build_balanced(&mut ng, &mut levels, &leaves);
    }
    for (k, &o) in old.outputs().iter().enumerate() {
        let l = map[o.node().index()].xor(o.is_complemented());
        ng.add_output(l, old.output_names()[k].clone());
    }
    let out = ng.cleanup();
    if out.depth() > old.depth() {
        old
    } else {
        out
    }
}

fn build_balanced(ng: &mut Aig, levels: &mut Vec<u32>, leaves: &[Lit]) -> Lit {
    for (i, &l) in leaves.iter().enumerate() {
        if l == Lit::FALSE || leaves[i + 1..].contains(&!l) {
            return Lit::FALSE;
        }
    }
    let mut heap: BinaryHeap<Reverse<(u32, Lit)>> = leaves
        .iter()
        .filter(|&&l| l != Lit::TRUE)
        .map(|&l| Reverse((levels[l.node().index()], l)))
        .collect();
    if heap.is_empty() {
        return Lit::TRUE;
    }
    while heap.len() > 1 {
        let Reverse((_, x)) = heap.pop().expect("two operands");
        let Reverse((_, y)) = heap.pop().expect("two operands");
        let before = ng.len();
        let z = ng.and(x, y);
        if ng.len() > before {
            levels.push(1 + levels[x.node().index()].max(levels[y.node().index()]));
        }
        heap.push(Reverse((levels[z.node().index()], z)));
    }
    heap.pop().expect("one operand").0 .1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::BitMatrix;

    #[test]
    fn linear_chain_becomes_log_depth() {
        let mut g = Aig::new();
        let v: Vec<Lit> = (0..8).map(|_| g.add_input(None)).collect();
        let mut acc = v[0];
        for &x in &v[1..] {
            acc = g.and(acc, x);
        }
        g.add_output(acc, None);
        assert_eq!(g.depth(), 7);
        let h = balance(&g);
        assert_eq!(h.depth(), 3);
        assert_eq!(h.num_ands(), 7);
        let m = BitMatrix::exhaustive(8);
        assert_eq!(g.simulate(&m).unwrap(), h.simulate(&m).unwrap());
    }

    #[test]
    fn balanced_tree_keeps_depth() {
        let mut g = Aig::new();
        let v: Vec<Lit> = (0..4).map(|_| g.add_input(None)).collect();
        let l = g.and(v[0], v[1]);
        let r = g.and(v[2], v[3]);
        let t = g.and(l, r);
        g.add_output(t, None);
        assert_eq!(balance(&g).depth(), 2);
    }

    #[test]
    fn contradictory_supergate_is_false() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let x = g.and(a, b);
        let y = g.and(!a, c);
        let z = g.and(x, y);
        g.add_output(z, None);
        let h = balance(&g);
        assert_eq!(h.outputs()[0], Lit::FALSE);
    }
}
