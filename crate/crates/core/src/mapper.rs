//! Placement and cycle-accurate scheduling on an rCiM topology.
//!
//! Gates are grouped per level and type into batches of at most
//! `capacity` lanes. Lane `i` of a batch uses column pair `i`: operand A in
//! column `2i` of the batch's A row, operand B in column `2i + 1` of its B
//! row (an inverter reads its single operand twice from column `2i`).
//! A compute cycle latches one result per lane. Latched results are then
//! written, one row per macro per cycle, straight into the staging rows
//! of every consumer batch and into the output region; a producer feeding
//! several batches is written once per destination row. A macro starts its
//! next batch only once its latch has been drained.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::techmap::{characterize, GateNetlist, GateType, LevelProfile, OutputRef, Signal};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Slot {
    pub macro_id: u32,
    pub bank: u32,
    pub row: u32,
    pub col: u32,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}.b{}.r{}.c{}", self.macro_id, self.bank, self.row, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lane {
    pub pair: u32,
    pub col_a: u32,
    pub col_b: u32,
    /// Signals the lane expects to read and the one it produces.
    pub a: Signal,
    pub b: Signal,
    pub out: Signal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComputeCycle {
    pub macro_id: u32,
    pub op: GateType,
    pub level: u32,
    pub bank: u32,
    pub row_a: u32,
    pub row_b: u32,
    pub lanes: Vec<Lane>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WriteEntry {
    pub col: u32,
    /// Lane of the source macro's latch holding the value.
    pub lane: u32,
    pub signal: Signal,
}

/// One row written from the latch of `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Writeback {
    pub macro_id: u32,
    pub bank: u32,
    pub row: u32,
    pub source: u32,
    pub entries: Vec<WriteEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cycle {
    pub computes: Vec<ComputeCycle>,
    pub writes: Vec<Writeback>,
}

/// An input value stored before the first cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Preload {
    pub slot: Slot,
    pub input: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OutputLoc {
    Const(bool),
    Slot(Slot, Signal),
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub topology: String,
    pub pipelined: bool,
    pub num_inputs: usize,
    pub preloads: Vec<Preload>,
    pub cycles: Vec<Cycle>,
    pub outputs: Vec<OutputLoc>,
    pub profile: LevelProfile,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn compute_batches(&self) -> usize {
        self.cycles.iter().map(|c| c.computes.len()).sum()
    }

    /// Sum over cycles of the number of macros computing.
    pub fn active_macro_cycles(&self) -> u64 {
        self.compute_batches() as u64
    }

    pub fn written_bits(&self) -> u64 {
        let w: usize = self
            .cycles
            .iter()
            .flat_map(|c| &c.writes)
            .map(|w| w.entries.len())
            .sum();
        (w + self.preloads.len()) as u64
    }

    pub fn op_count(&self, t: GateType) -> u64 {
        self.cycles
            .iter()
            .flat_map(|c| &c.computes)
            .filter(|c| c.op == t)
            .map(|c| c.lanes.len() as u64)
            .sum()
    }

    /// Text dump: one line per macro action per cycle.
    ///
    /// ```text
    /// 0 m0 NAND2 L1 b0 ra=1 rb=2 lanes=[0:0/1:s0,s1>s2]
    /// 1 m0 WRITE b0 r=0 from=m0 [c0<l0:s2]
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# topology {} pipelined {} inputs {} cycles {}\n",
            self.topology,
            self.pipelined,
            self.num_inputs,
            self.cycles.len()
        );
        for p in &self.preloads {
            s.push_str(&format!("preload {} i{}\n", p.slot, p.input));
        }
        for (t, c) in self.cycles.iter().enumerate() {
            for cc in &c.computes {
                s.push_str(&format!(
                    "{t} m{} {} L{} b{} ra={} rb={} lanes=[",
                    cc.macro_id, cc.op, cc.level, cc.bank, cc.row_a, cc.row_b
                ));
                for (k, l) in cc.lanes.iter().enumerate() {
                    if k > 0 {
                        s.push(' ');
                    }
                    s.push_str(&format!(
                        "{}:{}/{}:s{},s{}>s{}",
                        l.pair, l.col_a, l.col_b, l.a.0, l.b.0, l.out.0
                    ));
                }
                s.push_str("]\n");
            }
            for w in &c.writes {
                s.push_str(&format!(
                    "{t} m{} WRITE b{} r={} from=m{} [",
                    w.macro_id, w.bank, w.row, w.source
                ));
                for (k, e) in w.entries.iter().enumerate() {
                    if k > 0 {
                        s.push(' ');
                    }
                    s.push_str(&format!("c{}<l{}:s{}", e.col, e.lane, e.signal.0));
                }
                s.push_str("]\n");
            }
        }
        for (k, o) in self.outputs.iter().enumerate() {
            match o {
                OutputLoc::Const(v) => s.push_str(&format!("output {k} = {}\n", *v as u8)),
                OutputLoc::Slot(slot, sig) => s.push_str(&format!("output {k} = {slot} s{}\n", sig.0)),
            }
        }
        s
    }
}

/// Every slot each signal was stored in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Placement {
    pub slots: Vec<Vec<Slot>>,
}

impl Placement {
    pub fn of(&self, s: Signal) -> &[Slot] {
        &self.slots[s.index()]
    }

    pub fn total_slots(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapOptions {
    /// Writes may overlap computes in the same cycle.
    pub pipelined: bool,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions { pipelined: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("out of rows on macro {macro_id} while staging level {level} ({rows} rows per bank)")]
    Capacity { level: u32, macro_id: u32, rows: u32 },
    #[error("topology {0} is invalid")]
    Topology(String),
    #[error("scheduler made no progress at cycle {0}")]
    Stalled(usize),
}

struct Batch {
    op: GateType,
    level: u32,
    macro_id: u32,
    gates: Vec<usize>,
    seat: Option<Seat>,
    /// Operand cells still to be written.
    need: usize,
    /// Latest cycle one of its operands was written.
    last_write: Option<usize>,
    /// Writes of its results not yet performed.
    outstanding: usize,
    done: bool,
}

struct Job {
    dest: u32,
    bank: u32,
    row: u32,
    source_macro: u32,
    source_batch: usize,
    /// Consumer batch, or `usize::MAX` for the output region.
    target: usize,
    earliest: usize,
    entries: Vec<WriteEntry>,
}

/// Operand position of a signal in a consumer batch.
#[derive(Clone, Copy)]
struct Use {
    batch: usize,
    lane: u32,
    operand: u8,
}

/// Where a batch's operands live: lanes `offset..offset + width` of a row
/// pair (one row for inverters) shared with other batches.
#[derive(Clone, Copy)]
struct Seat {
    bin: usize,
    bank: u32,
    ra: u32,
    rb: u32,
    offset: u32,
}

struct Bin {
    macro_id: u32,
    bank: u32,
    ra: u32,
    rb: u32,
    cursor: u32,
    live: usize,
}

struct Rows {
    free: Vec<BTreeSet<(u32, u32)>>,
    rows_per_bank: u32,
    bins: Vec<Bin>,
    /// Open bin per macro: [row pairs, single rows].
    open: Vec<[Option<usize>; 2]>,
}

impl Rows {
    fn new(t: &Topology) -> Rows {
        let all: BTreeSet<(u32, u32)> = (0..t.banks).flat_map(|b| (0..t.rows).map(move |r| (b, r))).collect();
        Rows {
            free: vec![all; t.macro_count as usize],
            rows_per_bank: t.rows,
            bins: Vec::new(),
            open: vec![[None; 2]; t.macro_count as usize],
        }
    }

    /// Lanes for a batch of `width` gates on macro `m`, packed after the
    /// batches already seated in the open bin.
    fn seat(&mut self, m: u32, single: bool, width: u32, cap: u32) -> Option<Seat> {
        let kind = single as usize;
        let cur = self.open[m as usize][kind].filter(|&b| self.bins[b].cursor + width <= cap);
        let b = match cur {
            Some(b) => b,
            None => {
                let (bank, ra, rb) = if single {
                    let (bank, r) = self.take_one(m)?;
                    (bank, r, r)
                } else {
                    self.take_pair(m)?
                };
                if let Some(old) = self.open[m as usize][kind] {
                    if self.bins[old].live == 0 {
                        self.close(old);
                    }
                }
                self.bins.push(Bin {
                    macro_id: m,
                    bank,
                    ra,
                    rb,
                    cursor: 0,
                    live: 0,
                });
                let b = self.bins.len() - 1;
                self.open[m as usize][kind] = Some(b);
                b
            }
        };
        let bin = &mut self.bins[b];
        let seat = Seat {
            bin: b,
            bank: bin.bank,
            ra: bin.ra,
            rb: bin.rb,
            offset: bin.cursor,
        };
        bin.cursor += width;
        bin.live += 1;
        Some(seat)
    }

    /// A seated batch has computed; its bin's rows return to the pool once
    /// no batch uses them.
    fn leave(&mut self, b: usize) {
        self.bins[b].live -= 1;
        if self.bins[b].live > 0 {
            return;
        }
        let m = self.bins[b].macro_id as usize;
        if self.open[m].contains(&Some(b)) {
            self.bins[b].cursor = 0;
        } else {
            self.close(b);
        }
    }

    fn close(&mut self, b: usize) {
        let Bin {
            macro_id, bank, ra, rb, ..
        } = self.bins[b];
        self.give(macro_id, bank, ra);
        if rb != ra {
            self.give(macro_id, bank, rb);
        }
    }

    fn take_one(&mut self, m: u32) -> Option<(u32, u32)> {
        let first = *self.free[m as usize].iter().next()?;
        self.free[m as usize].remove(&first);
        Some(first)
    }

    /// Two rows in the same bank.
    fn take_pair(&mut self, m: u32) -> Option<(u32, u32, u32)> {
        let set = &mut self.free[m as usize];
        let mut found = None;
        let mut prev: Option<(u32, u32)> = None;
        for &(b, r) in set.iter() {
            if let Some((pb, pr)) = prev {
                if pb == b {
                    found = Some((b, pr, r));
                    break;
                }
            }
            prev = Some((b, r));
        }
        let (b, r0, r1) = found?;
        set.remove(&(b, r0));
        set.remove(&(b, r1));
        Some((b, r0, r1))
    }

    fn give(&mut self, m: u32, bank: u32, row: u32) {
        self.free[m as usize].insert((bank, row));
    }
}

/// Places `n` on `t` and builds a schedule that passes
/// [`validate_schedule`].
pub fn place_and_schedule(n: &GateNetlist, t: &Topology, opts: MapOptions) -> Result<(Placement, Schedule), MapError> {
    t.validate().map_err(|e| MapError::Topology(format!("{e}")))?;
    let cap = t.capacity() as usize;

    // Batches in level order, NAND2 / NOR2 / NOT within a level.
    let mut by_level: Vec<[Vec<usize>; 3]> = vec![Default::default(); n.depth() as usize + 1];
    for (i, g) in n.gates.iter().enumerate() {
        by_level[g.level as usize][g.kind.index()].push(i);
    }
    let mut batches: Vec<Batch> = Vec::new();
    let mut gate_pos = vec![(0usize, 0u32); n.gates.len()];
    for (level, kinds) in by_level.iter().enumerate() {
        for op in GateType::ALL {
            let macros = t.macros_for(op);
            for (k, chunk) in kinds[op.index()].chunks(cap.max(1)).enumerate() {
                let b = batches.len();
                for (lane, &gi) in chunk.iter().enumerate() {
                    gate_pos[gi] = (b, lane as u32);
                }
                batches.push(Batch {
                    op,
                    level: level as u32,
                    macro_id: macros[k % macros.len()],
                    gates: chunk.to_vec(),
                    seat: None,
                    need: 0,
                    last_write: None,
                    outstanding: 0,
                    done: false,
                });
            }
        }
    }

    // Where each signal is consumed.
    let mut uses: Vec<Vec<Use>> = vec![Vec::new(); n.num_signals()];
    for (gi, g) in n.gates.iter().enumerate() {
        let (b, lane) = gate_pos[gi];
        for (k, &f) in g.operands().iter().enumerate() {
            uses[f.index()].push(Use {
                batch: b,
                lane,
                operand: k as u8,
            });
            if !n.is_input(f) {
                batches[b].need += 1;
            }
        }
    }

    let mut rows = Rows::new(t);
    let mut placement = Placement {
        slots: vec![Vec::new(); n.num_signals()],
    };

    // Output region: one slot per distinct output signal, on the macro
    // that produces it (macro 0 for inputs).
    let mut out_slot: Vec<Option<Slot>> = vec![None; n.num_signals()];
    let mut out_cursor: Vec<Option<(u32, u32, u32)>> = vec![None; t.macro_count as usize];
    let mut outputs = Vec::with_capacity(n.outputs.len());
    for o in &n.outputs {
        match *o {
            OutputRef::Const(v) => outputs.push(OutputLoc::Const(v)),
            OutputRef::Signal(s) => {
                if out_slot[s.index()].is_none() {
                    let m = n
                        .driver(s)
                        .map_or(0, |_| batches[gate_pos[s.index() - n.num_inputs].0].macro_id);
                    let cur = match out_cursor[m as usize] {
                        Some((b, r, c)) if c < t.cols => (b, r, c),
                        _ => {
                            let (b, r) = rows.take_one(m).ok_or(MapError::Capacity {
                                level: n.level_of(s),
                                macro_id: m,
                                rows: t.rows,
                            })?;
                            (b, r, 0)
                        }
                    };
                    out_slot[s.index()] = Some(Slot {
                        macro_id: m,
                        bank: cur.0,
                        row: cur.1,
                        col: cur.2,
                    });
                    out_cursor[m as usize] = Some((cur.0, cur.1, cur.2 + 1));
                }
                outputs.push(OutputLoc::Slot(out_slot[s.index()].expect("assigned"), s));
            }
        }
    }

    let lane_col = |op: GateType, lane: u32, operand: u8| -> u32 {
        if op == GateType::Not {
            2 * lane
        } else {
            2 * lane + operand as u32
        }
    };
    let alloc = |batches: &mut Vec<Batch>, rows: &mut Rows, b: usize| -> Result<Seat, MapError> {
        if let Some(s) = batches[b].seat {
            return Ok(s);
        }
        let m = batches[b].macro_id;
        let err = MapError::Capacity {
            level: batches[b].level,
            macro_id: m,
            rows: rows.rows_per_bank,
        };
        let width = batches[b].gates.len() as u32;
        let s = rows
            .seat(m, batches[b].op == GateType::Not, width, cap as u32)
            .ok_or(err)?;
        batches[b].seat = Some(s);
        Ok(s)
    };

    // Inputs are stored before the first cycle.
    let mut preloads = Vec::new();
    for i in 0..n.num_inputs {
        for u in uses[i].clone() {
            let st = alloc(&mut batches, &mut rows, u.batch)?;
            let bt = &batches[u.batch];
            let slot = Slot {
                macro_id: bt.macro_id,
                bank: st.bank,
                row: if u.operand == 0 { st.ra } else { st.rb },
                col: lane_col(bt.op, st.offset + u.lane, u.operand),
            };
            preloads.push(Preload { slot, input: i as u32 });
            placement.slots[i].push(slot);
        }
        if let Some(slot) = out_slot[i] {
            preloads.push(Preload { slot, input: i as u32 });
            placement.slots[i].push(slot);
        }
    }

    let macro_count = t.macro_count as usize;
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); macro_count];
    for (b, bt) in batches.iter().enumerate() {
        queues[bt.macro_id as usize].push(b);
    }
    let mut head = vec![0usize; macro_count];
    let mut latch: Vec<Option<usize>> = vec![None; macro_count];
    let mut pending: Vec<Vec<Job>> = (0..macro_count).map(|_| Vec::new()).collect();
    let mut cycles: Vec<Cycle> = Vec::new();
    let mut remaining_batches = batches.len();
    let mut left_per_level = vec![0usize; by_level.len()];
    for bt in &batches {
        left_per_level[bt.level as usize] += 1;
    }
    let mut idle = 0usize;

    let mut tcyc = 0usize;
    while remaining_batches > 0 || pending.iter().any(|p| !p.is_empty()) {
        let mut cycle = Cycle::default();

        // Writes: per destination macro, the eligible job whose consumer
        // comes first.
        for d in 0..macro_count {
            let best = pending[d]
                .iter()
                .enumerate()
                .filter(|(_, j)| j.earliest <= tcyc)
                .min_by_key(|(k, j)| (j.target, *k))
                .map(|(k, _)| k);
            let Some(k) = best else { continue };
            let job = pending[d].remove(k);
            batches[job.source_batch].outstanding -= 1;
            if job.target != usize::MAX {
                let tb = &mut batches[job.target];
                tb.need -= job.entries.len();
                tb.last_write = Some(tcyc);
            }
            cycle.writes.push(Writeback {
                macro_id: job.dest,
                bank: job.bank,
                row: job.row,
                source: job.source_macro,
                entries: job.entries,
            });
        }

        // Levels execute in order: nothing of level l + 1 starts before all
        // of level l has computed.
        let open_level = left_per_level.iter().position(|&c| c > 0).unwrap_or(usize::MAX) as u32;
        if opts.pipelined || cycle.writes.is_empty() {
            for m in 0..macro_count {
                let Some(&b) = queues[m].get(head[m]) else { continue };
                let drained = latch[m].map_or(true, |p| batches[p].outstanding == 0);
                let bt = &batches[b];
                let ready = bt.level == open_level && bt.need == 0 && bt.last_write.map_or(true, |w| w < tcyc);
                if !(drained && ready) {
                    continue;
                }
                head[m] += 1;
                let st = alloc(&mut batches, &mut rows, b)?;
                let op = batches[b].op;
                let lanes: Vec<Lane> = batches[b]
                    .gates
                    .iter()
                    .enumerate()
                    .map(|(i, &gi)| {
                        let g = &n.gates[gi];
                        let pair = st.offset + i as u32;
                        Lane {
                            pair,
                            col_a: lane_col(op, pair, 0),
                            col_b: lane_col(op, pair, 1),
                            a: g.fanins[0],
                            b: g.fanins[1],
                            out: g.output,
                        }
                    })
                    .collect();
                cycle.computes.push(ComputeCycle {
                    macro_id: m as u32,
                    op,
                    level: batches[b].level,
                    bank: st.bank,
                    row_a: st.ra,
                    row_b: st.rb,
                    lanes,
                });
                rows.leave(st.bin);
                batches[b].done = true;
                remaining_batches -= 1;
                left_per_level[batches[b].level as usize] -= 1;
                latch[m] = Some(b);

                // Plan the writes of this batch's results.
                let mut jobs: Vec<Job> = Vec::new();
                let gates = batches[b].gates.clone();
                for (lane, &gi) in gates.iter().enumerate() {
                    let s = n.gates[gi].output;
                    for u in uses[s.index()].clone() {
                        let cs = alloc(&mut batches, &mut rows, u.batch)?;
                        let cb = &batches[u.batch];
                        let row = if u.operand == 0 { cs.ra } else { cs.rb };
                        let col = lane_col(cb.op, cs.offset + u.lane, u.operand);
                        let slot = Slot {
                            macro_id: cb.macro_id,
                            bank: cs.bank,
                            row,
                            col,
                        };
                        placement.slots[s.index()].push(slot);
                        push_entry(&mut jobs, slot, m as u32, b, u.batch, tcyc + 1, lane as u32, s);
                    }
                    if let Some(slot) = out_slot[s.index()] {
                        placement.slots[s.index()].push(slot);
                        push_entry(&mut jobs, slot, m as u32, b, usize::MAX, tcyc + 1, lane as u32, s);
                    }
                }
                batches[b].outstanding = jobs.len();
                for j in jobs {
                    pending[j.dest as usize].push(j);
                }
            }
        }

        if cycle.computes.is_empty() && cycle.writes.is_empty() {
            idle += 1;
            if idle > 2 {
                return Err(MapError::Stalled(tcyc));
            }
        } else {
            idle = 0;
        }
        cycles.push(cycle);
        tcyc += 1;
    }
    while cycles
        .last()
        .is_some_and(|c| c.computes.is_empty() && c.writes.is_empty())
    {
        cycles.pop();
    }

    let schedule = Schedule {
        topology: t.name(),
        pipelined: opts.pipelined,
        num_inputs: n.num_inputs,
        preloads,
        cycles,
        outputs,
        profile: characterize(n, false),
    };
    Ok((placement, schedule))
}

#[allow(clippy::too_many_arguments)]
fn push_entry(
    jobs: &mut Vec<Job>,
    slot: Slot,
    source_macro: u32,
    source_batch: usize,
    target: usize,
    earliest: usize,
    lane: u32,
    signal: Signal,
) {
    let entry = WriteEntry {
        col: slot.col,
        lane,
        signal,
    };
    if let Some(j) = jobs
        .iter_mut()
        .find(|j| j.dest == slot.macro_id && j.bank == slot.bank && j.row == slot.row && j.target == target)
    {
        j.entries.push(entry);
        return;
    }
    jobs.push(Job {
        dest: slot.macro_id,
        bank: slot.bank,
        row: slot.row,
        source_macro,
        source_batch,
        target,
        earliest,
        entries: vec![entry],
    });
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Diagnostic {
    CapacityExceeded {
        cycle: usize,
        macro_id: u32,
        lanes: usize,
        capacity: u32,
    },
    DuplicateCompute {
        cycle: usize,
        macro_id: u32,
    },
    DuplicateWrite {
        cycle: usize,
        macro_id: u32,
    },
    WrongRole {
        cycle: usize,
        macro_id: u32,
        op: GateType,
    },
    BadLane {
        cycle: usize,
        macro_id: u32,
        pair: u32,
        msg: String,
    },
    OutOfRange {
        cycle: usize,
        slot: Slot,
    },
    ReadBeforeWrite {
        cycle: usize,
        slot: Slot,
        signal: Signal,
    },
    UninitializedRead {
        cycle: usize,
        slot: Slot,
        signal: Signal,
    },
    WrongOperand {
        cycle: usize,
        slot: Slot,
        expected: Signal,
        found: Signal,
    },
    LatchStale {
        cycle: usize,
        macro_id: u32,
        lane: u32,
        signal: Signal,
    },
    GateNotComputed {
        signal: Signal,
    },
    GateComputedTwice {
        cycle: usize,
        signal: Signal,
    },
    OutputMissing {
        output: usize,
        slot: Slot,
        signal: Signal,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Diagnostic::*;
        match self {
            CapacityExceeded {
                cycle,
                macro_id,
                lanes,
                capacity,
            } => {
                write!(
                    f,
                    "cycle {cycle}: macro {macro_id} runs {lanes} lanes, capacity {capacity}"
                )
            }
            DuplicateCompute { cycle, macro_id } => write!(f, "cycle {cycle}: macro {macro_id} computes twice"),
            DuplicateWrite { cycle, macro_id } => write!(f, "cycle {cycle}: macro {macro_id} writes two rows"),
            WrongRole { cycle, macro_id, op } => write!(f, "cycle {cycle}: macro {macro_id} is not assigned {op}"),
            BadLane {
                cycle,
                macro_id,
                pair,
                msg,
            } => write!(f, "cycle {cycle}: macro {macro_id} pair {pair}: {msg}"),
            OutOfRange { cycle, slot } => write!(f, "cycle {cycle}: {slot} is outside the array"),
            ReadBeforeWrite { cycle, slot, signal } => {
                write!(
                    f,
                    "cycle {cycle}: s{} read from {slot} in the cycle it is written",
                    signal.0
                )
            }
            UninitializedRead { cycle, slot, signal } => {
                write!(f, "cycle {cycle}: s{} read from never-written {slot}", signal.0)
            }
            WrongOperand {
                cycle,
                slot,
                expected,
                found,
            } => {
                write!(f, "cycle {cycle}: {slot} holds s{}, expected s{}", found.0, expected.0)
            }
            LatchStale {
                cycle,
                macro_id,
                lane,
                signal,
            } => {
                write!(
                    f,
                    "cycle {cycle}: latch of macro {macro_id} lane {lane} does not hold s{}",
                    signal.0
                )
            }
            GateNotComputed { signal } => write!(f, "s{} is never computed", signal.0),
            GateComputedTwice { cycle, signal } => write!(f, "cycle {cycle}: s{} computed again", signal.0),
            OutputMissing { output, slot, signal } => {
                write!(f, "output {output}: {slot} does not hold s{} at the end", signal.0)
            }
        }
    }
}

/// Legality check by replaying the schedule on symbolic memory.
pub fn validate_schedule(s: &Schedule, t: &Topology) -> Vec<Diagnostic> {
    use alloc::collections::BTreeMap;
    let mut diags = Vec::new();
    let cap = t.capacity();
    let in_range =
        |slot: &Slot| slot.macro_id < t.macro_count && slot.bank < t.banks && slot.row < t.rows && slot.col < t.cols;
    // Slot contents: (signal, cycle written; None for preloads).
    let mut mem: BTreeMap<Slot, (Signal, Option<usize>)> = BTreeMap::new();
    for p in &s.preloads {
        if !in_range(&p.slot) {
            diags.push(Diagnostic::OutOfRange { cycle: 0, slot: p.slot });
        }
        mem.insert(p.slot, (Signal(p.input), None));
    }
    let mut latch: Vec<Option<(usize, Vec<Signal>)>> = vec![None; t.macro_count as usize];
    let mut computed: BTreeSet<Signal> = BTreeSet::new();
    let mut all_outputs: BTreeSet<Signal> = BTreeSet::new();
    for (cyc, c) in s.cycles.iter().enumerate() {
        let written_now: BTreeMap<Slot, Signal> = c
            .writes
            .iter()
            .flat_map(|w| {
                w.entries.iter().map(move |e| {
                    (
                        Slot {
                            macro_id: w.macro_id,
                            bank: w.bank,
                            row: w.row,
                            col: e.col,
                        },
                        e.signal,
                    )
                })
            })
            .collect();
        let mut seen_macro = BTreeSet::new();
        for cc in &c.computes {
            if !seen_macro.insert(cc.macro_id) {
                diags.push(Diagnostic::DuplicateCompute {
                    cycle: cyc,
                    macro_id: cc.macro_id,
                });
            }
            if cc.macro_id >= t.macro_count || !t.macros_for(cc.op).contains(&cc.macro_id) {
                diags.push(Diagnostic::WrongRole {
                    cycle: cyc,
                    macro_id: cc.macro_id,
                    op: cc.op,
                });
            }
            if cc.lanes.len() > cap as usize {
                diags.push(Diagnostic::CapacityExceeded {
                    cycle: cyc,
                    macro_id: cc.macro_id,
                    lanes: cc.lanes.len(),
                    capacity: cap,
                });
            }
            let mut pairs = BTreeSet::new();
            for l in &cc.lanes {
                let bad = |msg: &str| Diagnostic::BadLane {
                    cycle: cyc,
                    macro_id: cc.macro_id,
                    pair: l.pair,
                    msg: msg.into(),
                };
                if !pairs.insert(l.pair) {
                    diags.push(bad("pair used twice"));
                }
                let cols = [2 * l.pair, 2 * l.pair + 1];
                if !cols.contains(&l.col_a) || !cols.contains(&l.col_b) {
                    diags.push(bad("operand column outside the lane's pair"));
                }
                if l.pair >= cap {
                    diags.push(bad("pair beyond capacity"));
                }
                if cc.op == GateType::Not && (l.a != l.b || l.col_a != l.col_b || cc.row_a != cc.row_b) {
                    diags.push(bad("inverter must read one cell"));
                }
                for (row, col, want) in [(cc.row_a, l.col_a, l.a), (cc.row_b, l.col_b, l.b)] {
                    let slot = Slot {
                        macro_id: cc.macro_id,
                        bank: cc.bank,
                        row,
                        col,
                    };
                    if !in_range(&slot) {
                        diags.push(Diagnostic::OutOfRange { cycle: cyc, slot });
                        continue;
                    }
                    match mem.get(&slot) {
                        Some(&(sig, _)) if sig == want => {}
                        other => {
                            if written_now.get(&slot) == Some(&want) {
                                diags.push(Diagnostic::ReadBeforeWrite {
                                    cycle: cyc,
                                    slot,
                                    signal: want,
                                });
                            } else if let Some(&(found, _)) = other {
                                diags.push(Diagnostic::WrongOperand {
                                    cycle: cyc,
                                    slot,
                                    expected: want,
                                    found,
                                });
                            } else {
                                diags.push(Diagnostic::UninitializedRead {
                                    cycle: cyc,
                                    slot,
                                    signal: want,
                                });
                            }
                        }
                    }
                }
                if !computed.insert(l.out) {
                    diags.push(Diagnostic::GateComputedTwice {
                        cycle: cyc,
                        signal: l.out,
                    });
                }
            }
        }
        let mut seen_write = BTreeSet::new();
        for w in &c.writes {
            if !seen_write.insert(w.macro_id) {
                diags.push(Diagnostic::DuplicateWrite {
                    cycle: cyc,
                    macro_id: w.macro_id,
                });
            }
            let lat = latch.get(w.source as usize).and_then(|l| l.as_ref());
            for e in &w.entries {
                let ok = lat.is_some_and(|(_, sigs)| sigs.get(e.lane as usize) == Some(&e.signal));
                if !ok {
                    diags.push(Diagnostic::LatchStale {
                        cycle: cyc,
                        macro_id: w.source,
                        lane: e.lane,
                        signal: e.signal,
                    });
                }
                let slot = Slot {
                    macro_id: w.macro_id,
                    bank: w.bank,
                    row: w.row,
                    col: e.col,
                };
                if !in_range(&slot) {
                    diags.push(Diagnostic::OutOfRange { cycle: cyc, slot });
                }
                mem.insert(slot, (e.signal, Some(cyc)));
            }
        }
        for cc in &c.computes {
            if let Some(l) = latch.get_mut(cc.macro_id as usize) {
                *l = Some((cyc, cc.lanes.iter().map(|l| l.out).collect()));
            }
        }
    }
    for (k, o) in s.outputs.iter().enumerate() {
        if let OutputLoc::Slot(slot, sig) = *o {
            all_outputs.insert(sig);
            if mem.get(&slot).map(|e| e.0) != Some(sig) {
                diags.push(Diagnostic::OutputMissing {
                    output: k,
                    slot,
                    signal: sig,
                });
            }
        }
    }
    for sig in all_outputs {
        if sig.index() >= s.num_inputs && !computed.contains(&sig) {
            diags.push(Diagnostic::GateNotComputed { signal: sig });
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::Aig;
    use crate::techmap::{map_to_gates, Gate};
    use crate::topology::{TopologyLibrary, KB_BITS};

    fn single_nand() -> GateNetlist {
        GateNetlist {
            num_inputs: 2,
            gates: vec![Gate {
                kind: GateType::Nand2,
                fanins: [Signal(0), Signal(1)],
                output: Signal(2),
                level: 1,
            }],
            outputs: vec![OutputRef::Signal(Signal(2))],
        }
    }

    fn adder2() -> GateNetlist {
        let mut g = Aig::new();
        let a: Vec<_> = (0..2).map(|_| g.add_input(None)).collect();
        let b: Vec<_> = (0..2).map(|_| g.add_input(None)).collect();
        let s0 = g.xor(a[0], b[0]);
        let c0 = g.and(a[0], b[0]);
        let t = g.xor(a[1], b[1]);
        let s1 = g.xor(t, c0);
        let c1 = g.maj(a[1], b[1], c0);
        for o in [s0, s1, c1] {
            g.add_output(o, None);
        }
        map_to_gates(&g)
    }

    #[test]
    fn single_nand_is_compute_then_write() {
        for t in TopologyLibrary::default_library().topologies() {
            let (_, s) = place_and_schedule(&single_nand(), t, MapOptions::default()).unwrap();
            assert_eq!(s.len(), 2, "{}", t.name());
            assert_eq!(s.cycles[0].computes.len(), 1);
            assert_eq!(s.cycles[1].writes.len(), 1);
            assert!(validate_schedule(&s, t).is_empty());
        }
    }

    #[test]
    fn sixty_four_nands_share_one_batch() {
        let mut n = GateNetlist {
            num_inputs: 128,
            ..Default::default()
        };
        for i in 0..64u32 {
            n.gates.push(Gate {
                kind: GateType::Nand2,
                fanins: [Signal(2 * i), Signal(2 * i + 1)],
                output: Signal(128 + i),
                level: 1,
            });
            n.outputs.push(OutputRef::Signal(Signal(128 + i)));
        }
        let t = Topology::new(2 * KB_BITS, 1, 128, 128);
        let (_, s) = place_and_schedule(&n, &t, MapOptions::default()).unwrap();
        assert_eq!(s.compute_batches(), 1);
        assert!(validate_schedule(&s, &t).is_empty());
    }

    #[test]
    fn adder_schedules_validate_everywhere() {
        let n = adder2();
        for t in TopologyLibrary::default_library().topologies() {
            for pipelined in [true, false] {
                let (p, s) = place_and_schedule(&n, t, MapOptions { pipelined }).unwrap();
                let d = validate_schedule(&s, t);
                assert!(d.is_empty(), "{}: {:?}", t.name(), d);
                assert!(p.total_slots() > 0);
            }
        }
    }

    #[test]
    fn injected_faults_are_reported() {
        let t = Topology::new(2 * KB_BITS, 1, 128, 128);
        let (_, s) = place_and_schedule(&single_nand(), &t, MapOptions::default()).unwrap();
        // Pull a consumer into the cycle that writes its operand.
        let n = adder2();
        let lib = TopologyLibrary::default_library();
        let t3 = lib.find("8KBx3").unwrap();
        let (_, good) = place_and_schedule(&n, t3, MapOptions::default()).unwrap();
        let mut bad = good.clone();
        let (wc, _) = bad
            .cycles
            .iter()
            .enumerate()
            .find(|(_, c)| !c.writes.is_empty())
            .unwrap();
        let w = bad.cycles[wc].writes[0].clone();
        let (cc_cycle, cc_idx) = bad
            .cycles
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.computes.iter().enumerate().map(move |(k, cc)| (i, k, cc)))
            .find(|(i, _, cc)| {
                *i > wc
                    && cc.macro_id == w.macro_id
                    && cc.lanes.iter().any(|l| {
                        w.entries
                            .iter()
                            .any(|e| (cc.row_a == w.row && l.col_a == e.col) || (cc.row_b == w.row && l.col_b == e.col))
                    })
            })
            .map(|(i, k, _)| (i, k))
            .unwrap();
        let cc = bad.cycles[cc_cycle].computes.remove(cc_idx);
        bad.cycles[wc].computes.retain(|c| c.macro_id != cc.macro_id);
        bad.cycles[wc].computes.push(cc);
        let d = validate_schedule(&bad, t3);
        assert!(
            d.iter().any(|d| matches!(d, Diagnostic::ReadBeforeWrite { .. })),
            "{d:?}"
        );

        let mut over = s.clone();
        let lane = over.cycles[0].computes[0].lanes[0].clone();
        for k in 1..=64 {
            let mut l = lane.clone();
            l.pair = k;
            l.col_a = 2 * k;
            l.col_b = 2 * k + 1;
            l.out = Signal(1000 + k);
            over.cycles[0].computes[0].lanes.push(l);
        }
        let d = validate_schedule(&over, &t);
        assert!(d.iter().any(|d| matches!(d, Diagnostic::CapacityExceeded { .. })));
    }

    #[test]
    fn three_macro_roles_hold() {
        let n = adder2();
        let lib = TopologyLibrary::default_library();
        let t = lib.find("4KBx3").unwrap();
        let (_, s) = place_and_schedule(&n, t, MapOptions::default()).unwrap();
        for c in &s.cycles {
            for cc in &c.computes {
                assert_eq!(cc.macro_id as usize, cc.op.index());
            }
        }
    }

    #[test]
    fn row_exhaustion_is_a_capacity_error() {
        // Two rows per bank cannot stage a NAND batch plus the output region.
        let t = Topology::new(4, 1, 2, 2);
        let err = place_and_schedule(&single_nand(), &t, MapOptions::default()).unwrap_err();
        assert!(matches!(err, MapError::Capacity { level: 1, .. }));
    }
}
