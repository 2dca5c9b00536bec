use alloc::vec::Vec;

use super::rebuild::Rebuild;
use crate::aig::{cut_truth_table, Aig, CutEnumerator, Lit, NodeId, DEFAULT_CUT_CAP};
use crate::npn::NpnLibrary;

/// DAG-aware rewriting with four-input cuts.
///
/// Each node's cuts are matched against the library structure of their NPN
/// class. The best replacement is taken when it frees more nodes than it
/// adds, counting reuse of nodes already present in the graph as free.
pub fn rewrite(g: &Aig, lib: &NpnLibrary) -> Aig {
    let old = g.cleanup();
    let cuts = CutEnumerator::new(&old, 4, DEFAULT_CUT_CAP);
    let mut rb = Rebuild::new(&old);
    let mut mffc: Vec<NodeId> = Vec::new();
    let mut leaf_lits: Vec<Lit> = Vec::with_capacity(4);
    for v in old.and_ids() {
        if rb.refs.get(v) == 0 {
            rb.copy_node(v);
            continue;
        }
        let mut best: Option<(usize, usize, u16)> = None;
        for (ci, cut) in cuts.cuts(v).iter().enumerate() {
            if cut.is_trivial() || cut.len() < 2 {
                continue;
            }
            rb.mffc(v, cut.leaves(), &mut mffc);
            if mffc.len() < 2 {
                continue;
            }
            let f = cut_truth_table(&old, cut).as_u16();
            leaf_lits.clear();
            leaf_lits.extend(cut.leaves().iter().map(|&l| rb.map[l.index()]));
            let mut dry = rb.dry_run(&mffc);
            lib.instantiate(&mut dry, f, &leaf_lits);
            let added = dry.added;
            if added < mffc.len() {
                let gain = mffc.len() - added;
                if best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, ci, f));
                }
            }
        }
        match best {
            Some((_, ci, f)) => {
                let cut = cuts.cuts(v)[ci];
                rb.mffc(v, cut.leaves(), &mut mffc);
                leaf_lits.clear();
                leaf_lits.extend(cut.leaves().iter().map(|&l| rb.map[l.index()]));
                let lit = lib.instantiate(&mut rb, f, &leaf_lits);
                rb.accept(v, lit, &mffc, cut.leaves());
            }
            None => rb.copy_node(v),
        }
    }
    rb.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::BitMatrix;

    fn equivalent(a: &Aig, b: &Aig) -> bool {
        let m = BitMatrix::exhaustive(a.num_inputs());
        a.simulate(&m).unwrap() == b.simulate(&m).unwrap()
    }

    #[test]
    fn idempotent_collapse() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let ab = g.and(a, b);
        let x = g.and(a, ab);
        g.add_output(x, None);
        let lib = NpnLibrary::builtin();
        let h = rewrite(&g, &lib);
        assert_eq!(h.num_ands(), 1);
        assert!(equivalent(&g, &h));
    }

    #[test]
    fn duplicated_mux_shrinks() {
        let mut g = Aig::new();
        let s = g.add_input(None);
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        // Two copies of a 2:1 mux built from different but equivalent shapes.
        let m1 = g.mux(s, a, b);
        let p = g.and(!s, !b);
        let q = g.and(s, !a);
        let m2 = !g.and(!p, !q);
        let m2 = !m2;
        let o1 = g.and(m1, c);
        let o2 = g.and(m2, !c);
        g.add_output(o1, None);
        g.add_output(o2, None);
        let before = g.live_and_count();
        let h = rewrite(&g, &NpnLibrary::builtin());
        assert!(h.num_ands() < before, "{} -> {}", before, h.num_ands());
        assert!(equivalent(&g, &h));
    }

    #[test]
    fn minimal_graph_is_a_fixpoint() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let ab = g.and(a, b);
        let abc = g.and(ab, c);
        g.add_output(abc, None);
        let h = rewrite(&g, &NpnLibrary::builtin());
        assert_eq!(h.num_ands(), 2);
    }
}
