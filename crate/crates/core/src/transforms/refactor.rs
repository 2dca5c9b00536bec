use alloc::boxed::Box;
use alloc::vec::Vec;

use super::rebuild::Rebuild;
use crate::aig::cut::{cone_nodes, try_cut_truth_table};
use crate::aig::{reconvergent_cut, Aig, AndBuilder, Lit, NodeId};
use crate::truth::{Cube, TruthTable};

const REFACTOR_LEAVES: usize = 8;

/// A factored form over cut variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Var {
        index: u8,
        complemented: bool,
    },
    And(Vec<Expr>),
    Or(Vec<Expr>),
    /// `l & rest`, with a shared literal pulled out of several cubes.
    Split(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn build<B: AndBuilder>(&self, g: &mut B, vars: &[Lit]) -> Lit {
        match self {
            Expr::Const(v) => Lit::FALSE.xor(*v),
            Expr::Var { index, complemented } => vars[*index as usize].xor(*complemented),
            Expr::And(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| x.build(g, vars)).collect();
                g.and_many(&lits)
            }
            Expr::Or(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| x.build(g, vars)).collect();
                g.or_many(&lits)
            }
            Expr::Split(l, q, r) => {
                let lv = l.build(g, vars);
                let qv = q.build(g, vars);
                let t = g.and(lv, qv);
                let rv = r.build(g, vars);
                g.or(t, rv)
            }
        }
    }

    pub fn eval(&self, assignment: usize) -> bool {
        match self {
            Expr::Const(v) => *v,
            Expr::Var { index, complemented } => (assignment >> index & 1 == 1) ^ complemented,
            Expr::And(xs) => xs.iter().all(|x| x.eval(assignment)),
            Expr::Or(xs) => xs.iter().any(|x| x.eval(assignment)),
            Expr::Split(l, q, r) => (l.eval(assignment) && q.eval(assignment)) || r.eval(assignment),
        }
    }
}

fn cube_expr(c: &Cube) -> Expr {
    let mut lits = Vec::new();
    for i in 0..8u8 {
        if c.pos >> i & 1 == 1 {
            lits.push(Expr::Var {
                index: i,
                complemented: false,
            });
        }
        if c.neg >> i & 1 == 1 {
            lits.push(Expr::Var {
                index: i,
                complemented: true,
            });
        }
    }
    match lits.len() {
        0 => Expr::Const(true),
        1 => lits.pop().expect("one literal"),
        _ => Expr::And(lits),
    }
}

/// Algebraic factoring of a sum of products: repeatedly pulls out the
/// literal shared by the most cubes.
pub fn factor_cubes(cubes: &[Cube]) -> Expr {
    if cubes.is_empty() {
        return Expr::Const(false);
    }
    if cubes.iter().any(|c| c.num_literals() == 0) {
        return Expr::Const(true);
    }
    if cubes.len() == 1 {
        return cube_expr(&cubes[0]);
    }
    let mut best: Option<(usize, usize, bool)> = None;
    for var in 0..8 {
        for compl in [false, true] {
            let n = cubes.iter().filter(|c| c.has(var, compl)).count();
            if n >= 2 && best.map_or(true, |(b, _, _)| n > b) {
                best = Some((n, var, compl));
            }
        }
    }
    let Some((_, var, compl)) = best else {
        return Expr::Or(cubes.iter().map(cube_expr).collect());
    };
    let (with, without): (Vec<Cube>, Vec<Cube>) = cubes.iter().partition(|c| c.has(var, compl));
    let quotient: Vec<Cube> = with.iter().map(|c| c.without(var, compl)).collect();
    let lit = Expr::Var {
        index: var as u8,
        complemented: compl,
    };
    let q = factor_cubes(&quotient);
    if without.is_empty() {
        return match q {
            Expr::And(mut xs) => {
                xs.insert(0, lit);
                Expr::And(xs)
            }
            Expr::Const(true) => lit,
            q => Expr::And(alloc::vec![lit, q]),
        };
    }
    Expr::Split(Box::new(lit), Box::new(q), Box::new(factor_cubes(&without)))
}

/// Factored form of `f`, from the smaller of the covers of `f` and `!f`.
fn factor_function(f: TruthTable) -> (Expr, bool) {
    let on = f.isop();
    let off = (!f).isop();
    let lits = |c: &[Cube]| -> u32 { c.iter().map(Cube::num_literals).sum() };
    if lits(&off) < lits(&on) {
        (factor_cubes(&off), true)
    } else {
        (factor_cubes(&on), false)
    }
}

/// Collapse-and-refactor over reconvergence-driven cuts of up to eight
/// leaves. A node is replaced when its factored form saves nodes, or keeps
/// the count and lowers the node's level.
pub fn refactor(g: &Aig) -> Aig {
    let old = g.cleanup();
    let mut rb = Rebuild::new(&old);
    let mut mffc: Vec<NodeId> = Vec::new();
    for v in old.and_ids() {
        if rb.refs.get(v) == 0 {
            rb.copy_node(v);
            continue;
        }
        let cut = reconvergent_cut(&old, v, REFACTOR_LEAVES);
        if cut.len() < 3 {
            rb.copy_node(v);
            continue;
        }
        rb.mffc(v, cut.leaves(), &mut mffc);
        let cone = cone_nodes(&old, v, cut.leaves()).map_or(0, |c| c.len());
        if mffc.len() < 2 && cone < 3 {
            rb.copy_node(v);
            continue;
        }
        let Some(f) = try_cut_truth_table(&old, v, cut.leaves()) else {
            rb.copy_node(v);
            continue;
        };
        let (expr, flip) = factor_function(f);
        let leaf_lits: Vec<Lit> = cut.leaves().iter().map(|&l| rb.map[l.index()]).collect();
        let mut dry = rb.dry_run(&mffc);
        let out = expr.build(&mut dry, &leaf_lits);
        let (added, new_level) = (dry.added, dry.level(out));
        let old_level = rb.default_level(v);
        let accept = added < mffc.len() || (added == mffc.len() && new_level < old_level);
        if accept {
            let lit = expr.build(&mut rb, &leaf_lits).xor(flip);
            rb.accept(v, lit, &mffc, cut.leaves());
        } else {
            rb.copy_node(v);
        }
    }
    rb.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::BitMatrix;

    #[test]
    fn factoring_is_exact() {
        let mut state = 7u64;
        for n in 1..=6 {
            for _ in 0..30 {
                let f = TruthTable::from_fn(n, |_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    state >> 63 == 1
                });
                let (e, flip) = factor_function(f);
                for v in 0..(1 << n) {
                    assert_eq!(e.eval(v) ^ flip, f.get(v));
                }
            }
        }
    }

    #[test]
    fn distributes_a_common_literal() {
        // (a & b) | (a & c), written with five AND nodes.
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let c = g.add_input(None);
        let ab = g.and(a, b);
        let ac = g.and(a, c);
        let x = g.and(ab, Lit::TRUE);
        let ab2 = g.and(x, a);
        let ac2 = g.and(ac, a);
        let o = g.or(ab2, ac2);
        g.add_output(o, None);
        let h = refactor(&g);
        assert!(h.num_ands() <= 3);
        assert_eq!(h.num_ands(), 2);
        let m = BitMatrix::exhaustive(3);
        assert_eq!(g.simulate(&m).unwrap(), h.simulate(&m).unwrap());
    }

    #[test]
    fn single_and_unchanged() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let x = g.and(a, b);
        g.add_output(x, None);
        assert_eq!(refactor(&g).num_ands(), 1);
    }
}
