use alloc::vec;
use alloc::vec::Vec;

use super::{Aig, Node};

/// Dense bit matrix, one row per signal and one column per input vector.
/// Rows are stored as 64-bit words, column `v` at bit `v % 64` of word
/// `v / 64`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("expected {expected} input rows, got {got}")]
pub struct ShapeError {
    pub expected: usize,
    pub got: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> BitMatrix {
        let words_per_row = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    /// Every assignment of `n` variables, vector `v` giving variable `i` the
    /// value of bit `i` of `v`.
    pub fn exhaustive(n: usize) -> BitMatrix {
        assert!(n <= 24, "exhaustive matrix too large");
        let cols = 1usize << n;
        let mut m = BitMatrix::zeros(n, cols);
        for i in 0..n {
            for (w, word) in m.row_mut(i).iter_mut().enumerate() {
                *word = exhaustive_word(i, w);
            }
        }
        m.mask_tail();
        m
    }

    /// Uniform random vectors from a caller-provided word source.
    pub fn random(rows: usize, cols: usize, mut next_word: impl FnMut() -> u64) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for w in m.words.iter_mut() {
            *w = next_word();
        }
        m.mask_tail();
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, cols: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let dst = m.row_mut(i);
            let n = dst.len().min(r.len());
            dst[..n].copy_from_slice(&r[..n]);
        }
        m.mask_tail();
        m
    }

    pub(crate) fn mask_tail(&mut self) {
        let rem = self.cols % 64;
        if rem == 0 || self.words_per_row == 0 {
            return;
        }
        let mask = (1u64 << rem) - 1;
        for r in 0..self.rows {
            let last = r * self.words_per_row + self.words_per_row - 1;
            self.words[last] &= mask;
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r)[c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.row_mut(r)[c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Column `c` as a vector of bits, one per row.
    pub fn column(&self, c: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Columns on which `self` and `other` differ.
    pub fn mismatched_columns(&self, other: &BitMatrix) -> Vec<usize> {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let mut diff = vec![0u64; self.words_per_row];
        for r in 0..self.rows {
            for (d, (a, b)) in diff.iter_mut().zip(self.row(r).iter().zip(other.row(r))) {
                *d |= a ^ b;
            }
        }
        let mut out = Vec::new();
        for (w, &d) in diff.iter().enumerate() {
            let mut bits = d;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }
}

/// Word `w` of the exhaustive pattern for variable `i`.
pub(crate) fn exhaustive_word(i: usize, w: usize) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if i < 6 {
        PATTERNS[i]
    } else if (w >> (i - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

impl Aig {
    /// Bit-parallel simulation. Row `i` of `vectors` holds input `i`; row `j`
    /// of the result holds output `j`.
    pub fn simulate(&self, vectors: &BitMatrix) -> Result<BitMatrix, ShapeError> {
        if vectors.rows() != self.num_inputs() {
            return Err(ShapeError {
                expected: self.num_inputs(),
                got: vectors.rows(),
            });
        }
        let wpr = vectors.words_per_row();
        let values = self.simulate_nodes(vectors);
        let mut out = BitMatrix::zeros(self.num_outputs(), vectors.cols());
        for (j, &o) in self.outputs().iter().enumerate() {
            let src = &values[o.node().index() * wpr..(o.node().index() + 1) * wpr];
            let flip = if o.is_complemented() { !0 } else { 0 };
            for (d, s) in out.row_mut(j).iter_mut().zip(src) {
                *d = s ^ flip;
            }
        }
        out.mask_tail();
        Ok(out)
    }

    /// Simulates every node; returns a flat `len() * words_per_row` buffer.
    pub(crate) fn simulate_nodes(&self, vectors: &BitMatrix) -> Vec<u64> {
        let wpr = vectors.words_per_row();
        let mut values = vec![0u64; self.len() * wpr];
        for (i, node) in self.nodes().iter().enumerate() {
            match *node {
                Node::Const => {}
                Node::Input(k) => {
                    values[i * wpr..(i + 1) * wpr].copy_from_slice(vectors.row(k as usize));
                }
                Node::And(a, b) => {
                    let (ai, bi) = (a.node().index(), b.node().index());
                    let fa = if a.is_complemented() { !0u64 } else { 0 };
                    let fb = if b.is_complemented() { !0u64 } else { 0 };
                    for w in 0..wpr {
                        values[i * wpr + w] = (values[ai * wpr + w] ^ fa) & (values[bi * wpr + w] ^ fb);
                    }
                }
            }
        }
        values
    }

    /// Evaluates a single input vector.
    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let mut m = BitMatrix::zeros(inputs.len(), 1);
        for (i, &v) in inputs.iter().enumerate() {
            m.set(i, 0, v);
        }
        self.simulate(&m).map(|o| o.column(0)).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_gate_truth_table() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        let b = g.add_input(None);
        let n = g.and(a, b);
        g.add_output(n, None);
        let out = g.simulate(&BitMatrix::exhaustive(2)).unwrap();
        let bits: Vec<bool> = (0..4).map(|c| out.get(0, c)).collect();
        assert_eq!(bits, [false, false, false, true]);
    }

    #[test]
    fn width_mismatch_is_a_shape_error() {
        let mut g = Aig::new();
        g.add_input(None);
        let err = g.simulate(&BitMatrix::zeros(2, 4)).unwrap_err();
        assert_eq!(err, ShapeError { expected: 1, got: 2 });
    }

    #[test]
    fn exhaustive_patterns_above_six_vars() {
        let m = BitMatrix::exhaustive(8);
        for v in 0..256 {
            for i in 0..8 {
                assert_eq!(m.get(i, v), (v >> i) & 1 == 1);
            }
        }
    }
}
