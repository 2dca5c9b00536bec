//! Truth tables over at most eight variables, and irredundant sum-of-products.
//!
//! A table is stored as 256 bits. Functions of fewer than eight variables are
//! replicated across the unused high variables, so every bitwise operation
//! works word by word regardless of `nvars`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::aig::sim::exhaustive_word;

pub const MAX_VARS: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable {
    words: [u64; 4],
    nvars: u8,
}

impl TruthTable {
    pub fn zero(nvars: usize) -> TruthTable {
        assert!(nvars <= MAX_VARS);
        TruthTable {
            words: [0; 4],
            nvars: nvars as u8,
        }
    }

    pub fn one(nvars: usize) -> TruthTable {
        !TruthTable::zero(nvars)
    }

    /// Projection onto variable `i`.
    pub fn var(i: usize, nvars: usize) -> TruthTable {
        assert!(i < nvars && nvars <= MAX_VARS);
        let mut words = [0; 4];
        for (w, word) in words.iter_mut().enumerate() {
            *word = exhaustive_word(i, w);
        }
        TruthTable {
            words,
            nvars: nvars as u8,
        }
    }

    /// Builds a table from its first `2^nvars` bits (bit `v` is the value at
    /// assignment `v`).
    pub fn from_fn(nvars: usize, mut f: impl FnMut(usize) -> bool) -> TruthTable {
        let mut t = TruthTable::zero(nvars);
        for v in 0..(1usize << nvars) {
            if f(v) {
                t.words[v / 64] |= 1 << (v % 64);
            }
        }
        t.replicate();
        t
    }

    /// The low `2^nvars` bits of `bits`, for up to six variables.
    pub fn from_u64(bits: u64, nvars: usize) -> TruthTable {
        assert!(nvars <= 6);
        let mut t = TruthTable::zero(nvars);
        t.words[0] = bits;
        t.replicate();
        t
    }

    /// Parses a string of `0`/`1` characters in assignment order.
    pub fn from_bits_str(s: &str) -> Option<TruthTable> {
        let len = s.len();
        if !len.is_power_of_two() || len > 256 {
            return None;
        }
        let nvars = len.trailing_zeros() as usize;
        let bytes = s.as_bytes();
        if bytes.iter().any(|&b| b != b'0' && b != b'1') {
            return None;
        }
        Some(TruthTable::from_fn(nvars, |v| bytes[v] == b'1'))
    }

    fn replicate(&mut self) {
        let n = self.nvars as usize;
        if n < 6 {
            let width = 1u32 << n;
            let mut w = self.words[0] & low_mask(width);
            let mut filled = width;
            while filled < 64 {
                w |= w << filled;
                filled *= 2;
            }
            self.words = [w; 4];
        } else if n == 6 {
            self.words = [self.words[0]; 4];
        } else if n == 7 {
            self.words[2] = self.words[0];
            self.words[3] = self.words[1];
        }
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    /// Number of meaningful bits, `2^nvars`.
    #[inline]
    pub fn len(&self) -> usize {
        1 << self.nvars
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn words(&self) -> &[u64; 4] {
        &self.words
    }

    #[inline]
    pub fn get(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words == [0; 4]
    }

    pub fn is_one(&self) -> bool {
        self.words == [!0; 4]
    }

    pub fn count_ones(&self) -> u32 {
        let full: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        full >> (MAX_VARS - self.nvars())
    }

    /// Low 16 bits, meaningful for four or fewer variables.
    pub fn as_u16(&self) -> u16 {
        self.words[0] as u16
    }

    pub fn as_u64(&self) -> u64 {
        self.words[0]
    }

    /// Reinterprets the same function over `nvars` variables (`nvars` must
    /// not drop a variable the function depends on).
    pub fn with_nvars(mut self, nvars: usize) -> TruthTable {
        assert!(nvars <= MAX_VARS);
        self.nvars = nvars as u8;
        self
    }

    pub fn cofactor0(&self, i: usize) -> TruthTable {
        let mut t = *self;
        if i < 6 {
            let shift = 1u32 << i;
            let m = !exhaustive_word(i, 0);
            for w in t.words.iter_mut() {
                let lo = *w & m;
                *w = lo | (lo << shift);
            }
        } else {
            let step = 1usize << (i - 6);
            for w in 0..4 {
                if w & step != 0 {
                    t.words[w] = t.words[w - step];
                }
            }
        }
        t
    }

    pub fn cofactor1(&self, i: usize) -> TruthTable {
        let mut t = *self;
        if i < 6 {
            let shift = 1u32 << i;
            let m = exhaustive_word(i, 0);
            for w in t.words.iter_mut() {
                let hi = *w & m;
                *w = hi | (hi >> shift);
            }
        } else {
            let step = 1usize << (i - 6);
            for w in 0..4 {
                if w & step == 0 {
                    t.words[w] = t.words[w + step];
                }
            }
        }
        t
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.cofactor0(i) != self.cofactor1(i)
    }

    /// Support as a bit mask over variables.
    pub fn support(&self) -> u8 {
        (0..self.nvars())
            .filter(|&i| self.depends_on(i))
            .fold(0, |m, i| m | 1 << i)
    }

    pub fn to_bits_string(&self) -> String {
        (0..self.len()).map(|v| if self.get(v) { '1' } else { '0' }).collect()
    }

    /// Irredundant sum of products covering exactly this function.
    pub fn isop(&self) -> Vec<Cube> {
        let mut cubes = Vec::new();
        let r = isop_rec(*self, *self, self.nvars(), &mut cubes);
        debug_assert_eq!(r, *self);
        cubes
    }
}

fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        !0
    } else {
        (1u64 << width) - 1
    }
}

macro_rules! bitop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl core::ops::$tr for TruthTable {
            type Output = TruthTable;
            fn $f(self, rhs: TruthTable) -> TruthTable {
                let mut words = [0; 4];
                for (i, w) in words.iter_mut().enumerate() {
                    *w = self.words[i] $op rhs.words[i];
                }
                TruthTable {
                    words,
                    nvars: self.nvars.max(rhs.nvars),
                }
            }
        }
    };
}

bitop!(BitAnd, bitand, &);
bitop!(BitOr, bitor, |);
bitop!(BitXor, bitxor, ^);

impl core::ops::Not for TruthTable {
    type Output = TruthTable;
    fn not(self) -> TruthTable {
        TruthTable {
            words: self.words.map(|w| !w),
            nvars: self.nvars,
        }
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({})", self.to_bits_string())
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits_string())
    }
}

/// A product term: `pos` holds variables appearing uncomplemented, `neg`
/// those appearing complemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub pos: u8,
    pub neg: u8,
}

impl Cube {
    pub const TAUTOLOGY: Cube = Cube { pos: 0, neg: 0 };

    pub fn num_literals(&self) -> u32 {
        self.pos.count_ones() + self.neg.count_ones()
    }

    pub fn has(&self, var: usize, complemented: bool) -> bool {
        let m = if complemented { self.neg } else { self.pos };
        m >> var & 1 == 1
    }

    pub fn without(mut self, var: usize, complemented: bool) -> Cube {
        if complemented {
            self.neg &= !(1 << var);
        } else {
            self.pos &= !(1 << var);
        }
        self
    }

    pub fn eval(&self, assignment: usize) -> bool {
        let a = assignment as u8;
        (a & self.pos) == self.pos && (!a & self.neg) == self.neg
    }
}

/// Minato-Morreale: an irredundant cover `R` with `lower <= R <= upper`.
fn isop_rec(lower: TruthTable, upper: TruthTable, nvars: usize, out: &mut Vec<Cube>) -> TruthTable {
    if lower.is_zero() {
        return TruthTable::zero(lower.nvars());
    }
    if upper.is_one() {
        out.push(Cube::TAUTOLOGY);
        return TruthTable::one(lower.nvars());
    }
    let v = (0..nvars)
        .rev()
        .find(|&i| lower.depends_on(i) || upper.depends_on(i))
        .expect("non-constant bounds depend on a variable");
    let (l0, l1) = (lower.cofactor0(v), lower.cofactor1(v));
    let (u0, u1) = (upper.cofactor0(v), upper.cofactor1(v));

    let start0 = out.len();
    let r0 = isop_rec(l0 & !u1, u0, v, out);
    for c in &mut out[start0..] {
        c.neg |= 1 << v;
    }
    let start1 = out.len();
    let r1 = isop_rec(l1 & !u0, u1, v, out);
    for c in &mut out[start1..] {
        c.pos |= 1 << v;
    }
    let rest = (l0 & !r0) | (l1 & !r1);
    let r2 = isop_rec(rest, u0 & u1, v, out);

    let x = TruthTable::var(v, lower.nvars().max(v + 1));
    (r0 & !x) | (r1 & x) | r2
}
