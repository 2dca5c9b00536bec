//! Circuit generators: arithmetic blocks, trees, seeded random graphs and
//! the benchmark set used by the explorer reports.
//!
//! Multi-bit ports are little-endian: `a0` is the least significant bit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::{Aig, Lit};

fn word(g: &mut Aig, name: &str, width: usize) -> Vec<Lit> {
    (0..width).map(|i| g.add_input(Some(format!("{name}{i}")))).collect()
}

fn outputs(g: &mut Aig, name: &str, lits: &[Lit]) {
    for (i, &l) in lits.iter().enumerate() {
        g.add_output(l, Some(format!("{name}{i}")));
    }
}

fn full_add(g: &mut Aig, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
    let t = g.xor(a, b);
    let s = g.xor(t, c);
    (s, g.maj(a, b, c))
}

/// Ripple-carry sum of two words, `a.len() + 1` bits.
fn add_words(g: &mut Aig, a: &[Lit], b: &[Lit], cin: Lit) -> Vec<Lit> {
    let mut c = cin;
    let mut out = Vec::with_capacity(a.len() + 1);
    for (&x, &y) in a.iter().zip(b) {
        let (s, co) = full_add(g, x, y, c);
        out.push(s);
        c = co;
    }
    out.push(c);
    out
}

/// `a - b` over equal widths; returns (difference, borrow-free flag).
fn sub_words(g: &mut Aig, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Lit) {
    let nb: Vec<Lit> = b.iter().map(|&l| !l).collect();
    let mut s = add_words(g, a, &nb, Lit::TRUE);
    let ge = s.pop().expect("carry");
    (s, ge)
}

fn mux_words(g: &mut Aig, sel: Lit, then: &[Lit], other: &[Lit]) -> Vec<Lit> {
    then.iter().zip(other).map(|(&t, &o)| g.mux(sel, t, o)).collect()
}

fn multiply_words(g: &mut Aig, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
    let w = a.len() + b.len();
    let mut acc: Vec<Lit> = (0..w).map(|_| Lit::FALSE).collect();
    for (j, &bj) in b.iter().enumerate() {
        let pp: Vec<Lit> = a.iter().map(|&ai| g.and(ai, bj)).collect();
        let hi = (j + a.len()).min(w);
        let sum = add_words(g, &acc[j..hi], &pp, Lit::FALSE);
        for (k, s) in sum.into_iter().enumerate() {
            if j + k < w {
                acc[j + k] = s;
            }
        }
    }
    acc
}

/// `n`-bit ripple-carry adder: inputs `a`, `b`; outputs `s0..sn`.
pub fn adder(n: usize) -> Aig {
    let mut g = Aig::new();
    let a = word(&mut g, "a", n);
    let b = word(&mut g, "b", n);
    let s = add_words(&mut g, &a, &b, Lit::FALSE);
    outputs(&mut g, "s", &s);
    g
}

/// `n x n` array multiplier with a `2n`-bit product.
pub fn multiplier(n: usize) -> Aig {
    let mut g = Aig::new();
    let a = word(&mut g, "a", n);
    let b = word(&mut g, "b", n);
    let p = multiply_words(&mut g, &a, &b);
    outputs(&mut g, "p", &p);
    g
}

/// `x * x` for an `n`-bit `x`.
pub fn square(n: usize) -> Aig {
    let mut g = Aig::new();
    let a = word(&mut g, "x", n);
    let p = multiply_words(&mut g, &a, &a);
    outputs(&mut g, "y", &p);
    g
}

/// Left rotation of `2^k` data bits by a `k`-bit amount.
pub fn barrel_shifter(k: usize) -> Aig {
    let n = 1usize << k;
    let mut g = Aig::new();
    let mut d = word(&mut g, "d", n);
    let sh = word(&mut g, "s", k);
    for (stage, &s) in sh.iter().enumerate() {
        let amt = 1usize << stage;
        let rotated: Vec<Lit> = (0..n).map(|i| d[(i + n - amt) % n]).collect();
        d = mux_words(&mut g, s, &rotated, &d);
    }
    outputs(&mut g, "y", &d);
    g
}

/// Maximum of `words` unsigned `width`-bit values.
pub fn max(words: usize, width: usize) -> Aig {
    let mut g = Aig::new();
    let xs: Vec<Vec<Lit>> = (0..words).map(|i| word(&mut g, &format!("x{i}_"), width)).collect();
    let mut best = xs[0].clone();
    for x in &xs[1..] {
        let (_, ge) = sub_words(&mut g, x, &best);
        best = mux_words(&mut g, ge, x, &best);
    }
    outputs(&mut g, "y", &best);
    g
}

/// Restoring division of an `n`-bit dividend by an `n`-bit divisor:
/// quotient `q` and remainder `r`.
pub fn divider(n: usize) -> Aig {
    let mut g = Aig::new();
    let a = word(&mut g, "a", n);
    let d = word(&mut g, "d", n);
    let mut dd = d.clone();
    dd.push(Lit::FALSE);
    let mut rem: Vec<Lit> = (0..=n).map(|_| Lit::FALSE).collect();
    let mut q = alloc::vec![Lit::FALSE; n];
    for i in (0..n).rev() {
        // rem = (rem << 1) | a[i], n + 1 bits wide.
        rem.pop();
        rem.insert(0, a[i]);
        let (diff, ge) = sub_words(&mut g, &rem, &dd);
        q[i] = ge;
        rem = mux_words(&mut g, ge, &diff, &rem);
    }
    outputs(&mut g, "q", &q);
    outputs(&mut g, "r", &rem[..n]);
    g
}

/// Integer square root of a `2n`-bit value, digit by digit.
pub fn isqrt(n: usize) -> Aig {
    let mut g = Aig::new();
    let x = word(&mut g, "x", 2 * n);
    let w = n + 2;
    let mut rem: Vec<Lit> = (0..w).map(|_| Lit::FALSE).collect();
    let mut root: Vec<Lit> = Vec::new();
    for i in (0..n).rev() {
        // rem = (rem << 2) | next two bits.
        rem.truncate(w - 2);
        rem.insert(0, x[2 * i + 1]);
        rem.insert(0, x[2 * i]);
        // trial = (root << 2) | 1
        let mut trial: Vec<Lit> = alloc::vec![Lit::TRUE, Lit::FALSE];
        trial.extend(root.iter().copied());
        trial.resize(w, Lit::FALSE);
        let (diff, ge) = sub_words(&mut g, &rem, &trial);
        rem = mux_words(&mut g, ge, &diff, &rem);
        root.insert(0, ge);
    }
    outputs(&mut g, "y", &root);
    g
}

/// Outputs equal inputs.
pub fn buffer(n: usize) -> Aig {
    let mut g = Aig::new();
    let a = word(&mut g, "x", n);
    outputs(&mut g, "y", &a);
    g
}

/// Majority tree over `3^depth` inputs.
pub fn maj_tree(depth: u32) -> Aig {
    let mut g = Aig::new();
    let mut layer = word(&mut g, "x", 3usize.pow(depth));
    while layer.len() > 1 {
        layer = layer.chunks(3).map(|c| g.maj(c[0], c[1], c[2])).collect();
    }
    g.add_output(layer[0], Some("y".into()));
    g
}

/// `2^k`-to-1 multiplexer tree.
pub fn mux_tree(k: usize) -> Aig {
    let mut g = Aig::new();
    let mut layer = word(&mut g, "d", 1 << k);
    let sel = word(&mut g, "s", k);
    for &s in &sel {
        layer = layer.chunks(2).map(|c| g.mux(s, c[1], c[0])).collect();
    }
    g.add_output(layer[0], Some("y".into()));
    g
}

/// Random AND graph: each node picks two earlier signals with random
/// polarity, preferring signals nothing reads yet. The newest unread nodes
/// become the outputs.
pub fn random_aig(seed: u64, inputs: usize, nodes: usize, outputs: usize) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Aig::new();
    let mut pool: Vec<Lit> = word(&mut g, "x", inputs);
    let mut read = alloc::vec![false; pool.len()];
    let mut tries = 0;
    while g.num_ands() < nodes && tries < 64 * nodes {
        tries += 1;
        let choose = |rng: &mut ChaCha8Rng| -> usize {
            let unread: Vec<usize> = (0..pool.len()).filter(|&i| !read[i]).collect();
            let r = rng.next_u64();
            if r & 2 == 0 && !unread.is_empty() {
                unread[(r >> 2) as usize % unread.len()]
            } else {
                (r >> 2) as usize % pool.len()
            }
        };
        let i = choose(&mut rng);
        let j = choose(&mut rng);
        let r = rng.next_u32();
        let before = g.num_ands();
        let l = g.and(pool[i].xor(r & 1 == 1), pool[j].xor(r & 2 == 2));
        if g.num_ands() > before {
            read[i] = true;
            read[j] = true;
            pool.push(l);
            read.push(false);
        }
    }
    let mut outs: Vec<usize> = (inputs..pool.len()).filter(|&i| !read[i]).collect();
    if outs.is_empty() {
        outs.push(pool.len() - 1);
    }
    let keep = outs.len().saturating_sub(outputs.max(1));
    for (k, &i) in outs[keep..].iter().enumerate() {
        g.add_output(pool[i], Some(format!("y{k}")));
    }
    g
}

fn pick(rng: &mut ChaCha8Rng, pool: &[Lit]) -> Lit {
    let r = rng.next_u64();
    pool[(r >> 1) as usize % pool.len()].xor(r & 1 == 1)
}

/// Random graph with redundant logic planted in: absorptions, duplicated
/// products in other association orders, and consensus terms. The
/// function depends only on the random core; optimization should shrink it.
pub fn planted_redundancy(seed: u64, inputs: usize, nodes: usize) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut g = Aig::new();
    let mut pool: Vec<Lit> = word(&mut g, "x", inputs);
    while g.num_ands() < nodes {
        let a = pick(&mut rng, &pool);
        let b = pick(&mut rng, &pool);
        let c = pick(&mut rng, &pool);
        let l = match rng.next_u32() % 4 {
            // a & (a | b) = a, AND-ed with c.
            0 => {
                let o = g.or(a, b);
                let t = g.and(a, o);
                g.and(t, c)
            }
            // (a & b) & c and a & (b & c), OR-ed together.
            1 => {
                let ab = g.and(a, b);
                let x = g.and(ab, c);
                let bc = g.and(b, c);
                let y = g.and(a, bc);
                g.or(x, y)
            }
            // ab + !ac + bc = ab + !ac.
            2 => {
                let ab = g.and(a, b);
                let nac = g.and(!a, c);
                let bc = g.and(b, c);
                let t = g.or(ab, nac);
                g.or(t, bc)
            }
            _ => g.and(a, b),
        };
        if !l.is_const() && !pool.contains(&l.regular()) && !pool.contains(&!l.regular()) {
            pool.push(l);
        }
        if pool.len() > 4 * nodes + inputs {
            break;
        }
    }
    let outs = (inputs / 2).max(1);
    for k in 0..outs {
        let l = pool[pool.len() - 1 - k % pool.len()];
        g.add_output(l, Some(format!("y{k}")));
    }
    g
}

/// A named generated circuit.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: String,
    pub aig: Aig,
}

/// Arithmetic stand-ins for the benchmark families, sized to run in
/// seconds: adder, barrel shifter, multiplier, max, divider, square root
/// and square.
pub fn benchmark_set() -> Vec<Benchmark> {
    let b = |name: &str, aig: Aig| Benchmark { name: name.into(), aig };
    alloc::vec![
        b("adder-32", adder(32)),
        b("barrel-shifter-32", barrel_shifter(5)),
        b("multiplier-8", multiplier(8)),
        b("max-4x16", max(4, 16)),
        b("divisor-8", divider(8)),
        b("square-root-16", isqrt(8)),
        b("square-8", square(8)),
    ]
}

/// Small circuits used for functional checks.
pub fn fixture_set() -> Vec<Benchmark> {
    let b = |name: &str, aig: Aig| Benchmark { name: name.into(), aig };
    alloc::vec![
        b("buffer-4", buffer(4)),
        b("adder-2", adder(2)),
        b("adder-4", adder(4)),
        b("adder-8", adder(8)),
        b("maj-9", maj_tree(2)),
        b("maj-27", maj_tree(3)),
        b("mux-8", mux_tree(3)),
        b("mux-16", mux_tree(4)),
        b("random-200a", random_aig(1, 16, 200, 16)),
        b("random-200b", random_aig(2, 24, 200, 16)),
    ]
}

/// The large fixture for scale runs: an 18 x 18 multiplier.
pub fn scale_fixture() -> Aig {
    multiplier(18)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_bits(v: u64, n: usize) -> impl Iterator<Item = bool> {
        (0..n).map(move |i| v >> i & 1 == 1)
    }

    fn from_bits(b: &[bool]) -> u64 {
        b.iter().enumerate().map(|(i, &x)| (x as u64) << i).sum()
    }

    fn run(g: &Aig, words: &[(u64, usize)]) -> Vec<bool> {
        let ins: Vec<bool> = words.iter().flat_map(|&(v, n)| to_bits(v, n)).collect();
        g.eval(&ins)
    }

    #[test]
    fn adder_adds() {
        let g = adder(4);
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(from_bits(&run(&g, &[(a, 4), (b, 4)])), a + b);
            }
        }
    }

    #[test]
    fn multiplier_and_square() {
        let g = multiplier(4);
        let s = square(4);
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(from_bits(&run(&g, &[(a, 4), (b, 4)])), a * b);
            }
            assert_eq!(from_bits(&run(&s, &[(a, 4)])), a * a);
        }
    }

    #[test]
    fn shifter_rotates() {
        let g = barrel_shifter(3);
        for d in [0b1011_0001u64, 0xff, 0x01] {
            for s in 0..8 {
                let want = ((d << s) | (d >> (8 - s))) & 0xff;
                assert_eq!(from_bits(&run(&g, &[(d, 8), (s, 3)])), want);
            }
        }
    }

    #[test]
    fn max_divider_sqrt() {
        let m = max(3, 4);
        let d = divider(4);
        let r = isqrt(3);
        for x in 0..16u64 {
            for y in 0..16u64 {
                let z = (x * 7 + y) % 16;
                assert_eq!(from_bits(&run(&m, &[(x, 4), (y, 4), (z, 4)])), x.max(y).max(z));
                if y > 0 {
                    let o = run(&d, &[(x, 4), (y, 4)]);
                    assert_eq!(from_bits(&o[..4]), x / y);
                    assert_eq!(from_bits(&o[4..]), x % y);
                }
            }
        }
        for x in 0..64u64 {
            let want = (0..8).filter(|k| k * k <= x).max().unwrap();
            assert_eq!(from_bits(&run(&r, &[(x, 6)])), want);
        }
    }

    #[test]
    fn trees() {
        let m = maj_tree(1);
        assert_eq!(m.eval(&[true, false, true]), [true]);
        let x = mux_tree(2);
        for s in 0..4 {
            let d = 1u64 << s;
            assert_eq!(run(&x, &[(d, 4), (s, 2)]), [true]);
        }
    }

    #[test]
    fn random_graphs_are_seeded() {
        let a = random_aig(7, 10, 100, 4);
        let b = random_aig(7, 10, 100, 4);
        assert_eq!(a.num_ands(), b.num_ands());
        assert_eq!(a.outputs(), b.outputs());
        assert!(a.num_ands() >= 100);
        let p = planted_redundancy(3, 8, 100);
        assert!(p.num_ands() >= 100);
        assert!(p.check().is_ok());
    }

    #[test]
    fn scale_fixture_size() {
        let n = crate::techmap::map_to_gates(&scale_fixture());
        assert!((4000..7000).contains(&n.num_gates()), "{}", n.num_gates());
    }
}
