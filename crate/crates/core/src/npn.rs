//! NPN classification of four-input functions and the rewriting library.
//!
//! A four-input truth table is a `u16`, bit `v` holding the value at the
//! assignment whose bit `i` is variable `i`.
//!
//! A [`Transform`] maps `f` to `f'` with `f'(y) = f(x) ^ oneg` where
//! `x[perm[i]] = y[i] ^ neg_i`. Every table has exactly one canonical
//! representative (the numerically smallest table in its orbit under the
//! 768 transforms), and there are 222 classes.
//!
//! # Library file format
//!
//! Little-endian. A header of the magic `NPN4`, a `u16` version (1) and a
//! `u16` record count, followed by one record per class:
//!
//! | field        | type            |
//! |--------------|-----------------|
//! | canonical tt | `u16`           |
//! | node count   | `u8`            |
//! | flags        | `u8` (bit 0: size proven minimum) |
//! | nodes        | `count` pairs of `u8` literals |
//! | output       | `u8` literal    |
//!
//! A literal is `var * 2 + complemented`, with var 0 the constant false,
//! vars 1 to 4 the inputs and var `5 + k` the `k`-th node. Nodes only refer
//! to earlier vars.

use alloc::vec;
use alloc::vec::Vec;

use crate::aig::{Aig, AndBuilder, Lit};
use crate::truth::TruthTable;
use crate::{FxHashMap, FxHashSet};

pub const NUM_CLASSES: usize = 222;
pub const VAR_MASKS: [u16; 4] = [0xAAAA, 0xCCCC, 0xF0F0, 0xFF00];

const MAGIC: &[u8; 4] = b"NPN4";
const VERSION: u16 = 1;

/// The 24 permutations of four elements in lexicographic order.
pub const PERMS: [[u8; 4]; 24] = {
    let mut out = [[0u8; 4]; 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                let d = 6 - a - b - c;
                if a != b && a != c && b != c && d < 4 && d != a && d != b && d != c {
                    out[n] = [a as u8, b as u8, c as u8, d as u8];
                    n += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transform {
    pub perm: [u8; 4],
    pub neg: u8,
    pub oneg: bool,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        perm: [0, 1, 2, 3],
        neg: 0,
        oneg: false,
    };

    /// All 768 transforms, indexed consistently with [`Transform::pack`].
    pub fn all() -> impl Iterator<Item = Transform> {
        (0..768u16).map(Transform::unpack)
    }

    pub fn pack(self) -> u16 {
        let p = PERMS.iter().position(|q| *q == self.perm).expect("valid permutation") as u16;
        p << 5 | (self.neg as u16) << 1 | self.oneg as u16
    }

    pub fn unpack(code: u16) -> Transform {
        Transform {
            perm: PERMS[(code >> 5) as usize],
            neg: (code >> 1 & 0xF) as u8,
            oneg: code & 1 == 1,
        }
    }

    #[inline]
    fn map_assignment(&self, y: usize) -> usize {
        let mut x = 0;
        for i in 0..4 {
            let bit = (y >> i & 1) ^ (self.neg as usize >> i & 1);
            x |= bit << self.perm[i];
        }
        x
    }

    pub fn apply(&self, f: u16) -> u16 {
        let mut out = 0u16;
        for y in 0..16 {
            let v = (f >> self.map_assignment(y) & 1) ^ self.oneg as u16;
            out |= v << y;
        }
        out
    }

    /// `self` followed by `then`: `then.apply(self.apply(f))`.
    pub fn then(&self, then: &Transform) -> Transform {
        let mut perm = [0u8; 4];
        let mut neg = 0u8;
        for i in 0..4 {
            let j = then.perm[i] as usize;
            perm[i] = self.perm[j];
            neg |= ((then.neg >> i & 1) ^ (self.neg >> j & 1)) << i;
        }
        Transform {
            perm,
            neg,
            oneg: self.oneg ^ then.oneg,
        }
    }

    pub fn inverse(&self) -> Transform {
        let mut perm = [0u8; 4];
        let mut neg = 0u8;
        for i in 0..4 {
            let j = self.perm[i] as usize;
            perm[j] = i as u8;
            neg |= (self.neg >> i & 1) << j;
        }
        Transform {
            perm,
            neg,
            oneg: self.oneg,
        }
    }
}

/// Class and canonicalizing transform for every four-input table.
#[derive(Clone)]
pub struct NpnTable {
    class: Vec<u8>,
    transform: Vec<u16>,
    canon: Vec<u16>,
}

impl core::fmt::Debug for NpnTable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "NpnTable({} classes)", self.canon.len())
    }
}

impl Default for NpnTable {
    fn default() -> Self {
        Self::new()
    }
}

impl NpnTable {
    pub fn new() -> NpnTable {
        let all: Vec<Transform> = Transform::all().collect();
        let mut assigned = vec![false; 1 << 16];
        let mut orbit_canon = vec![0u16; 1 << 16];
        let mut transform = vec![0u16; 1 << 16];
        let mut canons: Vec<u16> = Vec::new();
        let mut images = vec![0u16; all.len()];
        for f in 0..=u16::MAX {
            if assigned[f as usize] {
                continue;
            }
            for (img, t) in images.iter_mut().zip(&all) {
                *img = t.apply(f);
            }
            let (best_idx, &c) = images.iter().enumerate().min_by_key(|&(_, v)| *v).expect("non-empty");
            let to_canon = all[best_idx];
            canons.push(c);
            for (t, &g) in all.iter().zip(&images) {
                if !assigned[g as usize] {
                    assigned[g as usize] = true;
                    orbit_canon[g as usize] = c;
                    transform[g as usize] = t.inverse().then(&to_canon).pack();
                }
            }
        }
        canons.sort_unstable();
        let mut class = vec![0u8; 1 << 16];
        for (f, c) in orbit_canon.iter().enumerate() {
            class[f] = canons.binary_search(c).expect("canonical table") as u8;
        }
        NpnTable {
            class,
            transform,
            canon: canons,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.canon.len()
    }

    #[inline]
    pub fn class_of(&self, f: u16) -> usize {
        self.class[f as usize] as usize
    }

    /// Transform taking `f` to its canonical representative.
    #[inline]
    pub fn transform_of(&self, f: u16) -> Transform {
        Transform::unpack(self.transform[f as usize])
    }

    pub fn canonical(&self, class: usize) -> u16 {
        self.canon[class]
    }

    pub fn canonical_of(&self, f: u16) -> u16 {
        self.canon[self.class_of(f)]
    }
}

/// Minimum-size (or best known) AND structure for one NPN class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibEntry {
    pub canon: u16,
    pub nodes: Vec<(u8, u8)>,
    pub output: u8,
    pub exact: bool,
}

impl LibEntry {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Truth table computed by the structure.
    pub fn eval(&self) -> u16 {
        let mut sig: Vec<u16> = Vec::with_capacity(5 + self.nodes.len());
        sig.push(0);
        sig.extend_from_slice(&VAR_MASKS);
        let lit = |sig: &[u16], l: u8| -> u16 {
            let v = sig[(l >> 1) as usize];
            if l & 1 == 1 {
                !v
            } else {
                v
            }
        };
        for &(a, b) in &self.nodes {
            let v = lit(&sig, a) & lit(&sig, b);
            sig.push(v);
        }
        lit(&sig, self.output)
    }

    /// Node depth of the output.
    pub fn depth(&self) -> u32 {
        let mut lv: Vec<u32> = vec![0; 5];
        for &(a, b) in &self.nodes {
            lv.push(1 + lv[(a >> 1) as usize].max(lv[(b >> 1) as usize]));
        }
        lv[(self.output >> 1) as usize]
    }

    /// Builds the structure in `g` with the given input literals; returns the
    /// output literal.
    pub fn build<B: AndBuilder>(&self, g: &mut B, inputs: [Lit; 4]) -> Lit {
        let mut sig: Vec<Lit> = Vec::with_capacity(5 + self.nodes.len());
        sig.push(Lit::FALSE);
        sig.extend_from_slice(&inputs);
        for &(a, b) in &self.nodes {
            let la = sig[(a >> 1) as usize].xor(a & 1 == 1);
            let lb = sig[(b >> 1) as usize].xor(b & 1 == 1);
            let n = g.and(la, lb);
            sig.push(n);
        }
        sig[(self.output >> 1) as usize].xor(self.output & 1 == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LibraryError {
    #[error("library data is truncated at byte {0}")]
    Truncated(usize),
    #[error("bad magic; not an NPN library")]
    BadMagic,
    #[error("unsupported library version {0}")]
    Version(u16),
    #[error("record {index}: literal {lit} refers to an undefined signal")]
    BadLiteral { index: usize, lit: u8 },
    #[error("record {index}: structure computes {got:04x}, expected {want:04x}")]
    WrongFunction { index: usize, want: u16, got: u16 },
    #[error("library has {got} classes, expected {NUM_CLASSES}")]
    ClassCount { got: usize },
    #[error("library has no entry for class with canonical table {0:04x}")]
    MissingClass(u16),
}

/// One structure per NPN class, indexed by class id.
#[derive(Clone, Debug)]
pub struct NpnLibrary {
    table: NpnTable,
    entries: Vec<LibEntry>,
}

static BUILTIN: &[u8] = include_bytes!("../data/npn4.bin");

impl NpnLibrary {
    /// The library shipped with the crate.
    pub fn builtin() -> NpnLibrary {
        NpnLibrary::decode(BUILTIN).expect("shipped library is valid")
    }

    pub fn from_entries(mut entries: Vec<LibEntry>) -> Result<NpnLibrary, LibraryError> {
        let table = NpnTable::new();
        if entries.len() != NUM_CLASSES {
            return Err(LibraryError::ClassCount { got: entries.len() });
        }
        entries.sort_by_key(|e| e.canon);
        for (i, e) in entries.iter().enumerate() {
            if e.canon != table.canonical(i) {
                return Err(LibraryError::MissingClass(table.canonical(i)));
            }
            let got = e.eval();
            if got != e.canon {
                return Err(LibraryError::WrongFunction {
                    index: i,
                    want: e.canon,
                    got,
                });
            }
        }
        Ok(NpnLibrary { table, entries })
    }

    pub fn table(&self) -> &NpnTable {
        &self.table
    }

    pub fn entries(&self) -> &[LibEntry] {
        &self.entries
    }

    pub fn entry(&self, class: usize) -> &LibEntry {
        &self.entries[class]
    }

    /// Entry for `f` plus the transform taking `f` to the entry's table.
    pub fn lookup(&self, f: u16) -> (&LibEntry, Transform) {
        (&self.entries[self.table.class_of(f)], self.table.transform_of(f))
    }

    /// Builds `f` over `leaves` (missing leaves are constant false) using the
    /// class structure.
    pub fn instantiate<B: AndBuilder>(&self, g: &mut B, f: u16, leaves: &[Lit]) -> Lit {
        let (entry, t) = self.lookup(f);
        let mut inputs = [Lit::FALSE; 4];
        for (i, inp) in inputs.iter_mut().enumerate() {
            let src = leaves.get(t.perm[i] as usize).copied().unwrap_or(Lit::FALSE);
            *inp = src.xor(t.neg >> i & 1 == 1);
        }
        entry.build(g, inputs).xor(t.oneg)
    }

    pub fn encode(&self) -> Vec<u8> {
        encode_entries(&self.entries)
    }

    pub fn decode(bytes: &[u8]) -> Result<NpnLibrary, LibraryError> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8], LibraryError> {
            let s = bytes.get(pos..pos + n).ok_or(LibraryError::Truncated(pos))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(LibraryError::BadMagic);
        }
        let v = take(2)?;
        let version = u16::from_le_bytes([v[0], v[1]]);
        if version != VERSION {
            return Err(LibraryError::Version(version));
        }
        let c = take(2)?;
        let count = u16::from_le_bytes([c[0], c[1]]) as usize;
        let mut entries = Vec::with_capacity(count);
        for index in 0..count {
            let h = take(4)?;
            let canon = u16::from_le_bytes([h[0], h[1]]);
            let n = h[2] as usize;
            let exact = h[3] & 1 == 1;
            let body = take(2 * n + 1)?;
            let mut nodes = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (body[2 * k], body[2 * k + 1]);
                let limit = 2 * (5 + k) as u8;
                for lit in [a, b] {
                    if lit >= limit {
                        return Err(LibraryError::BadLiteral { index, lit });
                    }
                }
                nodes.push((a, b));
            }
            let output = body[2 * n];
            if output >= 2 * (5 + n) as u8 {
                return Err(LibraryError::BadLiteral { index, lit: output });
            }
            entries.push(LibEntry {
                canon,
                nodes,
                output,
                exact,
            });
        }
        NpnLibrary::from_entries(entries)
    }
}

pub fn encode_entries(entries: &[LibEntry]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    for e in entries {
        out.extend_from_slice(&e.canon.to_le_bytes());
        out.push(e.nodes.len() as u8);
        out.push(e.exact as u8);
        for &(a, b) in &e.nodes {
            out.push(a);
            out.push(b);
        }
        out.push(e.output);
    }
    out
}

// ---------------------------------------------------------------------------
// Library generation.

#[inline]
fn norm(f: u16) -> u16 {
    f.min(!f)
}

fn swap_var(f: u16, i: usize) -> u16 {
    let m = VAR_MASKS[i];
    let s = 1u32 << i;
    ((f & m) >> s) | ((f & !m) << s)
}

/// Input permutation images of every table, one block of 65536 per entry of
/// [`PERMS`].
fn perm_tables() -> Vec<u16> {
    let mut out = vec![0u16; 24 << 16];
    for (p, perm) in PERMS.iter().enumerate() {
        let t = Transform {
            perm: *perm,
            neg: 0,
            oneg: false,
        };
        for f in 0..=u16::MAX {
            out[(p << 16) | f as usize] = t.apply(f);
        }
    }
    out
}

const MAX_NODES: usize = 12;

#[derive(Clone)]
struct Structure {
    nodes: Vec<(u8, u8)>,
}

impl Structure {
    fn signals(&self) -> Vec<u16> {
        let mut sig = Vec::with_capacity(5 + self.nodes.len() + 1);
        sig.push(0u16);
        sig.extend_from_slice(&VAR_MASKS);
        for &(a, b) in &self.nodes {
            let v = lit_tt(&sig, a) & lit_tt(&sig, b);
            sig.push(v);
        }
        sig
    }
}

#[inline]
fn lit_tt(sig: &[u16], l: u8) -> u16 {
    let v = sig[(l >> 1) as usize];
    if l & 1 == 1 {
        !v
    } else {
        v
    }
}

struct Generator {
    table: NpnTable,
    perm_tab: Vec<u16>,
    found: Vec<Option<LibEntry>>,
    remaining: usize,
}

impl Generator {
    fn record(&mut self, s: &Structure, out_lit: u8, f: u16) {
        let class = self.table.class_of(f);
        if self.found[class].is_some() {
            return;
        }
        // Re-express the structure over the canonical inputs.
        let t = self.table.transform_of(f);
        let mut sub = [0u8; 4];
        for i in 0..4 {
            sub[t.perm[i] as usize] = ((i as u8 + 1) << 1) | (t.neg >> i & 1);
        }
        let remap = |l: u8| -> u8 {
            let v = l >> 1;
            if (1..=4).contains(&v) {
                sub[(v - 1) as usize] ^ (l & 1)
            } else {
                l
            }
        };
        let nodes: Vec<(u8, u8)> = s.nodes.iter().map(|&(a, b)| (remap(a), remap(b))).collect();
        let entry = LibEntry {
            canon: self.table.canonical(class),
            nodes,
            output: remap(out_lit) ^ t.oneg as u8,
            exact: true,
        };
        debug_assert_eq!(entry.eval(), entry.canon);
        self.found[class] = Some(entry);
        self.remaining -= 1;
    }

    fn state_key(&self, funcs: &[u16]) -> [u16; MAX_NODES] {
        let mut best = [u16::MAX; MAX_NODES];
        let mut img = [0u16; MAX_NODES];
        let n = funcs.len();
        for p in 0..24 {
            let base = p << 16;
            for neg in 0..16usize {
                for (k, &f) in funcs.iter().enumerate() {
                    let mut g = self.perm_tab[base | f as usize];
                    for i in 0..4 {
                        if neg >> i & 1 == 1 {
                            g = swap_var(g, i);
                        }
                    }
                    img[k] = norm(g);
                }
                img[..n].sort_unstable();
                if img[..n] < best[..n] {
                    best[..n].copy_from_slice(&img[..n]);
                }
            }
        }
        best
    }

    /// Every extension of `s` by one node that computes a new function.
    fn extensions(s: &Structure, sig: &[u16], mut visit: impl FnMut(u8, u8, u16)) {
        let nsig = sig.len();
        let mut known: Vec<u16> = sig[1..].iter().map(|&f| norm(f)).collect();
        known.push(0);
        for i in 1..nsig {
            for j in (i + 1)..nsig {
                for c in 0..4u8 {
                    let (la, lb) = ((i as u8) << 1 | (c & 1), (j as u8) << 1 | (c >> 1));
                    let f = lit_tt(sig, la) & lit_tt(sig, lb);
                    if known.contains(&norm(f)) {
                        continue;
                    }
                    visit(la, lb, f);
                }
            }
        }
        let _ = s;
    }

    /// Extends `s` by exactly `depth` nodes, recording only the last.
    fn dfs(&mut self, s: &mut Structure, depth: usize) {
        let sig = s.signals();
        let mut ext: Vec<(u8, u8, u16)> = Vec::new();
        Self::extensions(s, &sig, |a, b, f| ext.push((a, b, f)));
        for (a, b, f) in ext {
            s.nodes.push((a, b));
            if depth > 1 {
                self.dfs(s, depth - 1);
            } else {
                let out = ((4 + s.nodes.len()) as u8) << 1;
                self.record(s, out, f);
            }
            s.nodes.pop();
            if self.remaining == 0 {
                return;
            }
        }
    }
}

/// Generates the rewriting library by exact bottom-up enumeration.
///
/// Sets of node functions (complements identified) are enumerated
/// breadth-first up to `stored_levels` nodes, deduplicated under input
/// negation and permutation; each stored set is then extended depth-first by
/// `extra_levels` more nodes. The first structure found for a class is
/// minimum-size. Classes not reached fall back to the smaller of a factored
/// sum-of-products and a Shannon expansion, flagged as not exact.
pub fn generate_library(stored_levels: usize, extra_levels: usize) -> NpnLibrary {
    assert!(stored_levels + extra_levels <= MAX_NODES);
    let table = NpnTable::new();
    let mut gen = Generator {
        perm_tab: perm_tables(),
        found: vec![None; table.num_classes()],
        remaining: table.num_classes(),
        table,
    };
    // Constant and single-variable classes need no nodes.
    gen.record(&Structure { nodes: Vec::new() }, 0, 0);
    gen.record(&Structure { nodes: Vec::new() }, 2, VAR_MASKS[0]);

    let mut frontier: Vec<Structure> = vec![Structure { nodes: Vec::new() }];
    for level in 0..stored_levels {
        let mut seen: FxHashSet<[u16; MAX_NODES]> = FxHashSet::default();
        let mut next: Vec<Structure> = Vec::new();
        for s in &frontier {
            let sig = s.signals();
            let mut ext: Vec<(u8, u8, u16)> = Vec::new();
            Generator::extensions(s, &sig, |a, b, f| ext.push((a, b, f)));
            for (a, b, f) in ext {
                let mut t = s.clone();
                t.nodes.push((a, b));
                let out = ((4 + t.nodes.len()) as u8) << 1;
                gen.record(&t, out, f);
                if level + 1 < stored_levels {
                    let mut funcs: Vec<u16> = sig[5..].iter().map(|&x| norm(x)).collect();
                    funcs.push(norm(f));
                    if seen.insert(gen.state_key(&funcs)) {
                        next.push(t);
                    }
                }
            }
        }
        if level + 1 < stored_levels {
            frontier = next;
        }
        if gen.remaining == 0 {
            break;
        }
    }
    // Iterative deepening keeps the first hit for each class minimum-size.
    for extra in 1..=extra_levels {
        if gen.remaining == 0 {
            break;
        }
        for s in frontier.iter_mut() {
            gen.dfs(s, extra + 1);
            if gen.remaining == 0 {
                break;
            }
        }
    }
    let table = gen.table.clone();
    let exact = gen.found;
    let entries: Vec<LibEntry> = (0..table.num_classes())
        .map(|class| match &exact[class] {
            Some(e) => e.clone(),
            None => fallback_entry(table.canonical(class), &table, &exact),
        })
        .collect();
    NpnLibrary::from_entries(entries).expect("generated library is consistent")
}

/// Heuristic structure for a class the exact search did not reach: the
/// smallest of a factored cover, a Shannon expansion, and a one-variable
/// decomposition whose cofactors come from the exact entries.
fn fallback_entry(canon: u16, table: &NpnTable, exact: &[Option<LibEntry>]) -> LibEntry {
    let tt = TruthTable::from_u64(canon as u64, 4);
    let mut candidates = vec![build_sop(tt), build_shannon(tt), build_xor_split(tt)];
    for var in 0..4 {
        candidates.push(build_decomposed(canon, var, table, exact));
    }
    let mut best: Option<Aig> = None;
    for g in candidates.into_iter().flatten() {
        let g = g.cleanup();
        if best.as_ref().map_or(true, |b| g.num_ands() < b.num_ands()) {
            best = Some(g);
        }
    }
    let g = best.expect("at least one construction");
    aig_to_entry(&g, canon)
}

/// Builds `f` from a known entry when there is one.
fn build_known(g: &mut Aig, f: u16, v: &[Lit; 4], table: &NpnTable, exact: &[Option<LibEntry>]) -> Option<Lit> {
    let entry = exact[table.class_of(f)].as_ref()?;
    let t = table.transform_of(f);
    let mut inputs = [Lit::FALSE; 4];
    for (i, inp) in inputs.iter_mut().enumerate() {
        *inp = v[t.perm[i] as usize].xor(t.neg >> i & 1 == 1);
    }
    Some(entry.build(g, inputs).xor(t.oneg))
}

fn build_decomposed(f: u16, var: usize, table: &NpnTable, exact: &[Option<LibEntry>]) -> Option<Aig> {
    let tt = TruthTable::from_u64(f as u64, 4);
    let (f0, f1) = (tt.cofactor0(var).as_u16(), tt.cofactor1(var).as_u16());
    let (mut g, v) = four_input_graph();
    let x = v[var];
    let o = if f0 == !f1 {
        let h = build_known(&mut g, f0, &v, table, exact)?;
        g.xor(x, h)
    } else {
        let lo = build_known(&mut g, f0, &v, table, exact)?;
        let hi = build_known(&mut g, f1, &v, table, exact)?;
        g.mux(x, hi, lo)
    };
    g.add_output(o, None);
    Some(g)
}

fn aig_to_entry(g: &Aig, canon: u16) -> LibEntry {
    let mut map: FxHashMap<u32, u8> = FxHashMap::default();
    map.insert(0, 0);
    for (k, id) in g.inputs().iter().enumerate() {
        map.insert(id.0, (k as u8 + 1) << 1);
    }
    let mut nodes = Vec::new();
    for id in g.and_ids() {
        let (a, b) = g.fanins(id).expect("and node");
        let la = map[&a.node().0] | a.is_complemented() as u8;
        let lb = map[&b.node().0] | b.is_complemented() as u8;
        map.insert(id.0, ((5 + nodes.len()) as u8) << 1);
        nodes.push((la, lb));
    }
    let o = g.outputs()[0];
    LibEntry {
        canon,
        nodes,
        output: map[&o.node().0] | o.is_complemented() as u8,
        exact: false,
    }
}

fn four_input_graph() -> (Aig, [Lit; 4]) {
    let mut g = Aig::new();
    let v = [
        g.add_input(None),
        g.add_input(None),
        g.add_input(None),
        g.add_input(None),
    ];
    (g, v)
}

fn sop_lit(g: &mut Aig, tt: TruthTable, v: &[Lit; 4]) -> Lit {
    let on = tt.isop();
    let off = (!tt).isop();
    let (cubes, flip) = if off.len() < on.len() { (off, true) } else { (on, false) };
    let mut terms = Vec::new();
    for c in &cubes {
        let lits: Vec<Lit> = (0..4)
            .filter_map(|i| {
                if c.pos >> i & 1 == 1 {
                    Some(v[i])
                } else if c.neg >> i & 1 == 1 {
                    Some(!v[i])
                } else {
                    None
                }
            })
            .collect();
        terms.push(g.and_many(&lits));
    }
    g.or_many(&terms).xor(flip)
}

fn build_sop(tt: TruthTable) -> Option<Aig> {
    let (mut g, v) = four_input_graph();
    let o = sop_lit(&mut g, tt, &v);
    g.add_output(o, None);
    Some(g)
}

fn shannon(g: &mut Aig, tt: TruthTable, v: &[Lit; 4]) -> Lit {
    if tt.is_zero() {
        return Lit::FALSE;
    }
    if tt.is_one() {
        return Lit::TRUE;
    }
    let var = (0..4).rev().find(|&i| tt.depends_on(i)).expect("non-constant");
    let (c0, c1) = (tt.cofactor0(var), tt.cofactor1(var));
    if c0 == !c1 {
        let lo = shannon(g, c0, v);
        return g.xor(v[var], lo);
    }
    let lo = shannon(g, c0, v);
    let hi = shannon(g, c1, v);
    g.mux(v[var], hi, lo)
}

fn build_shannon(tt: TruthTable) -> Option<Aig> {
    let (mut g, v) = four_input_graph();
    let o = shannon(&mut g, tt, &v);
    g.add_output(o, None);
    Some(g)
}

/// `f = x_i ^ h` when some variable enters linearly.
fn build_xor_split(tt: TruthTable) -> Option<Aig> {
    let i = (0..4).find(|&i| tt.cofactor0(i) == !tt.cofactor1(i))?;
    let (mut g, v) = four_input_graph();
    let rest = tt.cofactor0(i);
    let h = if (0..4).any(|j| j != i && rest.cofactor0(j) == !rest.cofactor1(j)) {
        shannon(&mut g, rest, &v)
    } else {
        sop_lit(&mut g, rest, &v)
    };
    let o = g.xor(v[i], h);
    g.add_output(o, None);
    Some(g)
}
