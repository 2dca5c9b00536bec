use alloc::vec;
use alloc::vec::Vec;

use super::rebuild::Rebuild;
use crate::aig::cut::cone_nodes;
use crate::aig::{reconvergent_cut, Aig, AndBuilder, Lit, NodeId};
use crate::truth::TruthTable;

const WINDOW_LEAVES: usize = 8;
const WINDOW_NODES: usize = 150;
const MAX_PAIR_CANDIDATES: usize = 40;

/// Fanout adjacency in compressed form.
struct Fanouts {
    start: Vec<u32>,
    list: Vec<NodeId>,
}

impl Fanouts {
    fn new(g: &Aig) -> Fanouts {
        let mut count = vec![0u32; g.len() + 1];
        for id in g.and_ids() {
            let (a, b) = g.fanins(id).expect("AND node");
            count[a.node().index() + 1] += 1;
            count[b.node().index() + 1] += 1;
        }
        for i in 1..count.len() {
            count[i] += count[i - 1];
        }
        let mut fill = count.clone();
        let mut list = vec![NodeId(0); count[g.len()] as usize];
        for id in g.and_ids() {
            let (a, b) = g.fanins(id).expect("AND node");
            for f in [a.node(), b.node()] {
                list[fill[f.index()] as usize] = id;
                fill[f.index()] += 1;
            }
        }
        Fanouts { start: count, list }
    }

    fn of(&self, id: NodeId) -> &[NodeId] {
        &self.list[self.start[id.index()] as usize..self.start[id.index() + 1] as usize]
    }
}

/// Resubstitution: re-expresses a node with nodes that already exist in a
/// window around it, either directly (possibly complemented) or as an AND
/// of two of them, when this frees part of the node's cone.
pub fn resubstitute(g: &Aig) -> Aig {
    let old = g.cleanup();
    let fanouts = Fanouts::new(&old);
    let mut rb = Rebuild::new(&old);
    let mut mffc: Vec<NodeId> = Vec::new();
    let mut in_window = vec![false; old.len()];
    for v in old.and_ids() {
        if rb.refs.get(v) == 0 {
            rb.copy_node(v);
            continue;
        }
        let cut = reconvergent_cut(&old, v, WINDOW_LEAVES);
        rb.mffc(v, cut.leaves(), &mut mffc);
        let Some(cone) = cone_nodes(&old, v, cut.leaves()) else {
            rb.copy_node(v);
            continue;
        };

        // Divisors: leaves, cone nodes outside the MFFC, and side nodes
        // whose fanins are already divisors.
        let mut window: Vec<NodeId> = Vec::new();
        for &l in cut.leaves() {
            window.push(l);
        }
        window.extend(cone.iter().copied());
        for &n in &window {
            in_window[n.index()] = true;
        }
        let mut divisors: Vec<NodeId> = cut.leaves().to_vec();
        divisors.extend(
            cone.iter()
                .copied()
                .filter(|n| mffc.binary_search(n).is_err() && *n != v),
        );
        let mut k = 0;
        while k < divisors.len() && window.len() < WINDOW_NODES {
            let d = divisors[k];
            k += 1;
            for &w in fanouts.of(d) {
                if w >= v || in_window[w.index()] || rb.refs.get(w) == 0 {
                    continue;
                }
                let (a, b) = old.fanins(w).expect("AND node");
                if in_window[a.node().index()]
                    && in_window[b.node().index()]
                    && mffc.binary_search(&a.node()).is_err()
                    && mffc.binary_search(&b.node()).is_err()
                {
                    in_window[w.index()] = true;
                    window.push(w);
                    divisors.push(w);
                    if window.len() >= WINDOW_NODES {
                        break;
                    }
                }
            }
        }

        let choice = find_resub(&old, &rb, v, cut.leaves(), &window, &divisors, &mffc);
        for &n in &window {
            in_window[n.index()] = false;
        }
        match choice {
            Some(Resub::Zero((lit, d))) => rb.accept(v, lit, &mffc, &[d]),
            Some(Resub::One((p, dp), (q, dq))) => {
                let lit = rb.and(p, q);
                rb.accept(v, lit, &mffc, &[dp, dq]);
            }
            Some(Resub::OneOr((p, dp), (q, dq))) => {
                let lit = rb.or(p, q);
                rb.accept(v, lit, &mffc, &[dp, dq]);
            }
            None => rb.copy_node(v),
        }
    }
    rb.finish()
}

/// A replacement literal with the old node it stands for.
type Div = (Lit, NodeId);

enum Resub {
    Zero(Div),
    One(Div, Div),
    OneOr(Div, Div),
}

fn find_resub(
    old: &Aig,
    rb: &Rebuild<'_>,
    v: NodeId,
    leaves: &[NodeId],
    window: &[NodeId],
    divisors: &[NodeId],
    mffc: &[NodeId],
) -> Option<Resub> {
    let n = leaves.len();
    let mut order: Vec<NodeId> = window.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut tts: Vec<TruthTable> = vec![TruthTable::zero(n); order.len()];
    let pos = |id: NodeId| order.binary_search(&id).ok();
    for (i, &id) in order.iter().enumerate() {
        if let Some(p) = leaves.iter().position(|&l| l == id) {
            tts[i] = TruthTable::var(p, n);
        } else if let Some((a, b)) = old.fanins(id) {
            let ta = tts[pos(a.node())?];
            let tb = tts[pos(b.node())?];
            let ta = if a.is_complemented() { !ta } else { ta };
            let tb = if b.is_complemented() { !tb } else { tb };
            tts[i] = ta & tb;
        } else {
            return None;
        }
    }
    let target = tts[pos(v)?];
    let usable = |d: NodeId| -> Option<Lit> {
        let l = rb.map[d.index()];
        (!rb.stale[l.node().index()]).then_some(l)
    };

    for &d in divisors {
        let td = tts[pos(d)?];
        if let Some(l) = usable(d) {
            if td == target {
                return Some(Resub::Zero((l, d)));
            }
            if td == !target {
                return Some(Resub::Zero((!l, d)));
            }
        }
    }
    if mffc.len() < 2 {
        return None;
    }
    // Candidates for f = p & q must contain f; for f = p | q, be inside it.
    let mut above: Vec<(Div, TruthTable)> = Vec::new();
    let mut below: Vec<(Div, TruthTable)> = Vec::new();
    for &d in divisors {
        let Some(l) = usable(d) else { continue };
        let td = tts[pos(d)?];
        for (lit, t) in [((l, d), td), ((!l, d), !td)] {
            if (target & !t).is_zero() && above.len() < MAX_PAIR_CANDIDATES {
                above.push((lit, t));
            }
            if (t & !target).is_zero() && below.len() < MAX_PAIR_CANDIDATES {
                below.push((lit, t));
            }
        }
    }
    let mut best: Option<(usize, Resub)> = None;
    for i in 0..above.len() {
        for j in (i + 1)..above.len() {
            if above[i].1 & above[j].1 == target {
                let mut dry = rb.dry_run(mffc);
                dry.and(above[i].0 .0, above[j].0 .0);
                if dry.added < mffc.len() && best.as_ref().map_or(true, |(a, _)| dry.added < *a) {
                    best = Some((dry.added, Resub::One(above[i].0, above[j].0)));
                }
            }
        }
    }
    for i in 0..below.len() {
        for j in (i + 1)..below.len() {
            if below[i].1 | below[j].1 == target {
                let mut dry = rb.dry_run(mffc);
                dry.or(below[i].0 .0, below[j].0 .0);
                if dry.added < mffc.len() && best.as_ref().map_or(true, |(a, _)| dry.added < *a) {
                    best = Some((dry.added, Resub::OneOr(below[i].0, below[j].0)));
                }
            }
        }
    }
    best.map(|(_, r)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::BitMatrix;

    #[test]
    fn duplicated_cone_is_merged() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        // x = a & (b | c) twice, in two different shapes.
        let bc = g.or(b, c);
        let x1 = g.and(a, bc);
        let ab = g.and(a, b);
        let ac = g.and(a, c);
        let x2 = g.or(ab, ac);
        let y = g.and(x1, !c);
        let z = g.and(x2, b);
        g.add_output(y, None);
        g.add_output(z, None);
        let before = g.live_and_count();
        let h = resubstitute(&g);
        assert!(h.num_ands() < before, "{before} -> {}", h.num_ands());
        let m = BitMatrix::exhaustive(3);
        assert_eq!(g.simulate(&m).unwrap(), h.simulate(&m).unwrap());
    }

    #[test]
    fn nothing_to_share_is_a_fixpoint() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let d = g.add_input(None);
        let x = g.and(a, b);
        let y = g.and(c, d);
        let z = g.and(x, y);
        g.add_output(z, None);
        assert_eq!(resubstitute(&g).num_ands(), 3);
    }
}
