//! Functional simulation of a schedule on the array.
//!
//! Values are bit-parallel: each cell holds one bit per input vector,
//! packed 64 to a word. Only cell contents drive the computation; the
//! signal labels carried by a schedule are never consulted.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::{Aig, BitMatrix, ShapeError};
use crate::mapper::{validate_schedule, Diagnostic, OutputLoc, Schedule, Slot};
use crate::topology::Topology;
use crate::FxHashMap;

/// Inputs up to this width are checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimWarning {
    pub cycle: usize,
    pub slot: Slot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutput {
    pub outputs: BitMatrix,
    pub cycles: usize,
    /// Reads of cells that were never written (they read as 0).
    pub warnings: Vec<SimWarning>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("schedule rejected: {} diagnostic(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
    #[error("input width {got}, schedule expects {expected}")]
    Shape { expected: usize, got: usize },
}

impl From<ShapeError> for SimError {
    fn from(e: ShapeError) -> Self {
        SimError::Shape {
            expected: e.expected,
            got: e.got,
        }
    }
}

/// Validates `s`, then executes it on `inputs` (one row per primary input).
pub fn run_schedule(s: &Schedule, t: &Topology, inputs: &BitMatrix) -> Result<SimOutput, SimError> {
    let diags = validate_schedule(s, t);
    if !diags.is_empty() {
        return Err(SimError::Invalid(diags));
    }
    Ok(execute(s, inputs, None)?)
}

/// Executes without validation; `trace` receives one line per compute and
/// write with the bits of the first vector.
pub fn execute(s: &Schedule, inputs: &BitMatrix, mut trace: Option<&mut String>) -> Result<SimOutput, ShapeError> {
    if inputs.rows() != s.num_inputs {
        return Err(ShapeError {
            expected: s.num_inputs,
            got: inputs.rows(),
        });
    }
    let w = inputs.words_per_row();
    let mut cells: FxHashMap<Slot, usize> = FxHashMap::default();
    let mut store: Vec<u64> = Vec::new();
    let zero = vec![0u64; w];
    let mut warnings = Vec::new();

    let cell = |cells: &mut FxHashMap<Slot, usize>, store: &mut Vec<u64>, slot: Slot| -> usize {
        *cells.entry(slot).or_insert_with(|| {
            let at = store.len();
            store.resize(at + w, 0);
            at
        })
    };
    for p in &s.preloads {
        let at = cell(&mut cells, &mut store, p.slot);
        store[at..at + w].copy_from_slice(inputs.row(p.input as usize));
    }

    let macros = s
        .cycles
        .iter()
        .flat_map(|c| {
            c.computes
                .iter()
                .map(|x| x.macro_id)
                .chain(c.writes.iter().map(|x| x.source))
        })
        .max()
        .map_or(0, |m| m as usize + 1);
    let mut latch: Vec<Vec<u64>> = vec![Vec::new(); macros];
    for (cyc, c) in s.cycles.iter().enumerate() {
        // Computes read the array as it was at the start of the cycle.
        let mut captured: Vec<(usize, Vec<u64>)> = Vec::with_capacity(c.computes.len());
        for cc in &c.computes {
            let mut out = vec![0u64; cc.lanes.len() * w];
            for (k, l) in cc.lanes.iter().enumerate() {
                let sa = Slot {
                    macro_id: cc.macro_id,
                    bank: cc.bank,
                    row: cc.row_a,
                    col: l.col_a,
                };
                let sb = Slot {
                    row: cc.row_b,
                    col: l.col_b,
                    ..sa
                };
                let a = match cells.get(&sa) {
                    Some(&at) => &store[at..at + w],
                    None => {
                        warnings.push(SimWarning { cycle: cyc, slot: sa });
                        &zero[..]
                    }
                };
                let b = match cells.get(&sb) {
                    Some(&at) => &store[at..at + w],
                    None => {
                        if sb != sa {
                            warnings.push(SimWarning { cycle: cyc, slot: sb });
                        }
                        &zero[..]
                    }
                };
                for i in 0..w {
                    out[k * w + i] = cc.op.eval_word(a[i], b[i]);
                }
            }
            if let Some(tr) = trace.as_deref_mut() {
                let bits: String = (0..cc.lanes.len())
                    .map(|k| if out[k * w] & 1 == 1 { '1' } else { '0' })
                    .collect();
                tr.push_str(&format!(
                    "{cyc} m{} {} ra={} rb={} lanes={} latch={bits}\n",
                    cc.macro_id,
                    cc.op,
                    cc.row_a,
                    cc.row_b,
                    cc.lanes.len()
                ));
            }
            captured.push((cc.macro_id as usize, out));
        }
        // Writes take the latch contents from an earlier cycle.
        for wb in &c.writes {
            let src: &[u64] = latch.get(wb.source as usize).map_or(&[], |v| v.as_slice());
            for e in &wb.entries {
                let slot = Slot {
                    macro_id: wb.macro_id,
                    bank: wb.bank,
                    row: wb.row,
                    col: e.col,
                };
                let at = cell(&mut cells, &mut store, slot);
                let from = e.lane as usize * w;
                if from + w <= src.len() {
                    store[at..at + w].copy_from_slice(&src[from..from + w]);
                } else {
                    store[at..at + w].fill(0);
                }
            }
            if let Some(tr) = trace.as_deref_mut() {
                let bits: String = wb
                    .entries
                    .iter()
                    .map(|e| {
                        let v = src.get(e.lane as usize * w).is_some_and(|x| x & 1 == 1);
                        if v {
                            '1'
                        } else {
                            '0'
                        }
                    })
                    .collect();
                tr.push_str(&format!(
                    "{cyc} m{} WRITE r={} from=m{} bits={bits}\n",
                    wb.macro_id, wb.row, wb.source
                ));
            }
        }
        for (m, out) in captured {
            latch[m] = out;
        }
    }

    let mut outputs = BitMatrix::zeros(s.outputs.len(), inputs.cols());
    for (r, o) in s.outputs.iter().enumerate() {
        match *o {
            OutputLoc::Const(v) => outputs.row_mut(r).fill(if v { !0 } else { 0 }),
            OutputLoc::Slot(slot, _) => {
                if let Some(&at) = cells.get(&slot) {
                    outputs.row_mut(r).copy_from_slice(&store[at..at + w]);
                }
            }
        }
    }
    outputs.mask_tail();
    Ok(SimOutput {
        outputs,
        cycles: s.cycles.len(),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub inputs: Vec<bool>,
    pub expected: Vec<bool>,
    pub got: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceReport {
    pub vectors: usize,
    pub exhaustive: bool,
    pub cycles: usize,
    pub mismatch_count: usize,
    /// The first few mismatching vectors.
    pub counterexamples: Vec<Counterexample>,
    pub diagnostics: Vec<String>,
    pub unwritten_reads: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatch_count == 0 && self.diagnostics.is_empty()
    }
}

const MAX_COUNTEREXAMPLES: usize = 8;

/// Test vectors for `n` inputs: every pattern when `n` is small, otherwise
/// `n_vectors` seeded random ones.
pub fn test_vectors(n: usize, n_vectors: usize, seed: u64) -> (BitMatrix, bool) {
    if n <= EXHAUSTIVE_LIMIT {
        return (BitMatrix::exhaustive(n), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (BitMatrix::random(n, n_vectors.max(1), || rng.next_u64()), false)
}

/// Runs `s` against the AIG oracle. The schedule is executed even when it
/// fails validation, so that a concrete counterexample can be reported.
pub fn check_equivalence(g: &Aig, s: &Schedule, t: &Topology, n_vectors: usize, seed: u64) -> EquivalenceReport {
    let (vectors, exhaustive) = test_vectors(g.num_inputs(), n_vectors, seed);
    let diagnostics: Vec<String> = validate_schedule(s, t).iter().map(|d| format!("{d}")).collect();
    let mut report = EquivalenceReport {
        vectors: vectors.cols(),
        exhaustive,
        cycles: s.cycles.len(),
        mismatch_count: 0,
        counterexamples: Vec::new(),
        diagnostics,
        unwritten_reads: 0,
    };
    let expected = match g.simulate(&vectors) {
        Ok(e) => e,
        Err(e) => {
            report.diagnostics.push(format!("oracle: {e:?}"));
            return report;
        }
    };
    let got = match execute(s, &vectors, None) {
        Ok(o) => o,
        Err(e) => {
            report
                .diagnostics
                .push(format!("input width {} vs {}", e.got, e.expected));
            return report;
        }
    };
    report.unwritten_reads = got.warnings.len();
    if got.outputs.rows() != expected.rows() {
        report.diagnostics.push(format!(
            "{} outputs, oracle has {}",
            got.outputs.rows(),
            expected.rows()
        ));
        return report;
    }
    let bad = expected.mismatched_columns(&got.outputs);
    report.mismatch_count = bad.len();
    for &c in bad.iter().take(MAX_COUNTEREXAMPLES) {
        report.counterexamples.push(Counterexample {
            inputs: vectors.column(c),
            expected: expected.column(c),
            got: got.outputs.column(c),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::Lit;
    use crate::mapper::{place_and_schedule, MapOptions};
    use crate::techmap::{map_to_gates, Gate, GateNetlist, GateType, OutputRef, Signal};
    use crate::topology::TopologyLibrary;

    fn one_gate(kind: GateType) -> GateNetlist {
        let fanins = if kind == GateType::Not {
            [Signal(0), Signal(0)]
        } else {
            [Signal(0), Signal(1)]
        };
        let ni = if kind == GateType::Not { 1 } else { 2 };
        GateNetlist {
            num_inputs: ni,
            gates: vec![Gate {
                kind,
                fanins,
                output: Signal(ni as u32),
                level: 1,
            }],
            outputs: vec![OutputRef::Signal(Signal(ni as u32))],
        }
    }

    #[test]
    fn nand_of_ones_stores_zero() {
        let t = TopologyLibrary::default_library().topologies()[0].clone();
        let (_, s) = place_and_schedule(&one_gate(GateType::Nand2), &t, MapOptions::default()).unwrap();
        let m = BitMatrix::from_rows(vec![vec![1], vec![1]], 1);
        let out = run_schedule(&s, &t, &m).unwrap();
        assert!(!out.outputs.get(0, 0));
        assert_eq!(out.cycles, s.len());
    }

    #[test]
    fn inverter_of_zero_stores_one() {
        let t = TopologyLibrary::default_library().topologies()[4].clone();
        let (_, s) = place_and_schedule(&one_gate(GateType::Not), &t, MapOptions::default()).unwrap();
        let m = BitMatrix::from_rows(vec![vec![0]], 1);
        assert!(run_schedule(&s, &t, &m).unwrap().outputs.get(0, 0));
    }

    fn adder2() -> Aig {
        let mut g = Aig::new();
        let a: Vec<Lit> = (0..2).map(|_| g.add_input(None)).collect();
        let b: Vec<Lit> = (0..2).map(|_| g.add_input(None)).collect();
        let s0 = g.xor(a[0], b[0]);
        let c0 = g.and(a[0], b[0]);
        let t = g.xor(a[1], b[1]);
        let s1 = g.xor(t, c0);
        let c1 = g.maj(a[1], b[1], c0);
        for o in [s0, s1, c1] {
            g.add_output(o, None);
        }
        g
    }

    #[test]
    fn adder_matches_arithmetic_on_every_topology() {
        let g = adder2();
        let n = map_to_gates(&g);
        for t in TopologyLibrary::default_library().topologies() {
            let (_, s) = place_and_schedule(&n, t, MapOptions::default()).unwrap();
            let m = BitMatrix::exhaustive(4);
            let out = run_schedule(&s, t, &m).unwrap();
            for v in 0..16 {
                let (a, b) = (v & 3, v >> 2);
                let sum = a + b;
                for bit in 0..3 {
                    assert_eq!(out.outputs.get(bit, v), sum >> bit & 1 == 1, "{} {v}", t.name());
                }
            }
            assert!(out.warnings.is_empty());
            assert!(check_equivalence(&g, &s, t, 1000, 1).passed());
        }
    }

    #[test]
    fn buffer_passes_trivially() {
        let mut g = Aig::new();
        let a = g.add_input(None);
        g.add_output(a, None);
        let n = map_to_gates(&g);
        let t = TopologyLibrary::default_library().topologies()[0].clone();
        let (_, s) = place_and_schedule(&n, &t, MapOptions::default()).unwrap();
        let r = check_equivalence(&g, &s, &t, 1000, 0);
        assert!(r.passed());
        assert_eq!(r.cycles, 0);
    }

    #[test]
    fn swapped_destination_gives_a_counterexample() {
        let g = adder2();
        let n = map_to_gates(&g);
        let lib = TopologyLibrary::default_library();
        let t = lib.find("8KBx3").unwrap();
        let (_, mut s) = place_and_schedule(&n, t, MapOptions::default()).unwrap();
        let w = s
            .cycles
            .iter_mut()
            .flat_map(|c| c.writes.iter_mut())
            .find(|w| w.entries.len() >= 2 && w.entries[0].lane != w.entries[1].lane);
        match w {
            Some(w) => {
                let c = w.entries[0].col;
                w.entries[0].col = w.entries[1].col;
                w.entries[1].col = c;
            }
            None => {
                let w = s.cycles.iter_mut().flat_map(|c| c.writes.iter_mut()).next().unwrap();
                w.entries[0].col ^= 1;
            }
        }
        let r = check_equivalence(&g, &s, t, 1000, 0);
        assert!(!r.passed());
        assert!(r.mismatch_count > 0);
        assert!(!r.counterexamples.is_empty());
    }

    #[test]
    fn trace_lists_each_action() {
        let t = TopologyLibrary::default_library().topologies()[0].clone();
        let (_, s) = place_and_schedule(&one_gate(GateType::Nand2), &t, MapOptions::default()).unwrap();
        let mut tr = String::new();
        let m = BitMatrix::from_rows(vec![vec![1], vec![0]], 1);
        execute(&s, &m, Some(&mut tr)).unwrap();
        assert_eq!(tr.lines().count(), 2);
        assert!(tr.contains("latch=1"));
    }

    #[test]
    fn random_vectors_are_seeded() {
        let (a, ex) = test_vectors(20, 1000, 5);
        let (b, _) = test_vectors(20, 1000, 5);
        assert!(!ex);
        assert_eq!(a, b);
        assert_eq!(a.cols(), 1000);
    }
}
