//! Energy, latency and power estimation, calibration against measured
//! rows, and resonant inductor sizing.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::mapper::Schedule;
use crate::techmap::{GateType, LevelProfile};
use crate::topology::{min_memory_bits, InfeasibleError, Topology, TopologyLibrary, KB_BITS};

pub const FJ: f64 = 1e-15;
pub const PJ: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Calibration {
    /// Hz.
    pub clock_hz: f64,
    /// J per operation.
    pub e_nand: f64,
    pub e_nor: f64,
    pub e_not: f64,
    /// J per bit written by a conventional driver.
    pub e_write_bit: f64,
    /// Share of write energy the resonant driver recovers.
    pub recycle_fraction: f64,
    /// J per active macro per cycle.
    pub e_macro_overhead: f64,
    /// J per cycle.
    pub e_control: f64,
    /// F per cell on a bitline.
    pub c_bitline_per_cell: f64,
    /// Read-wordline pulse widths (s); informational.
    pub pulse_nand_s: f64,
    pub pulse_nor_s: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            clock_hz: 1e9,
            e_nand: 65.0 * FJ,
            e_nor: 116.0 * FJ,
            e_not: 65.0 * FJ,
            e_write_bit: 100.0 * FJ,
            recycle_fraction: 0.45,
            e_macro_overhead: 40.0 * PJ,
            e_control: 20.0 * FJ,
            c_bitline_per_cell: 0.1 * FJ,
            pulse_nand_s: 150e-12,
            pulse_nor_s: 350e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("calibration field {field}: {msg}")]
pub struct CalibrationValueError {
    pub field: &'static str,
    pub msg: String,
}

impl Calibration {
    pub fn op_energy(&self, t: GateType) -> f64 {
        match t {
            GateType::Nand2 => self.e_nand,
            GateType::Nor2 => self.e_nor,
            GateType::Not => self.e_not,
        }
    }

    pub fn validate(&self) -> Result<(), CalibrationValueError> {
        let fields = [
            ("clock_hz", self.clock_hz),
            ("e_nand", self.e_nand),
            ("e_nor", self.e_nor),
            ("e_not", self.e_not),
            ("e_write_bit", self.e_write_bit),
            ("recycle_fraction", self.recycle_fraction),
            ("e_macro_overhead", self.e_macro_overhead),
            ("e_control", self.e_control),
            ("c_bitline_per_cell", self.c_bitline_per_cell),
            ("pulse_nand_s", self.pulse_nand_s),
            ("pulse_nor_s", self.pulse_nor_s),
        ];
        for (field, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CalibrationValueError {
                    field,
                    msg: format!("{v} must be finite and non-negative"),
                });
            }
        }
        if self.clock_hz == 0.0 {
            return Err(CalibrationValueError {
                field: "clock_hz",
                msg: "must be positive".into(),
            });
        }
        if self.recycle_fraction >= 1.0 {
            return Err(CalibrationValueError {
                field: "recycle_fraction",
                msg: format!("{} must be below 1", self.recycle_fraction),
            });
        }
        if self.e_nand > self.e_nor {
            return Err(CalibrationValueError {
                field: "e_nand",
                msg: format!("{} exceeds e_nor {}", self.e_nand, self.e_nor),
            });
        }
        Ok(())
    }

    pub fn period_ns(&self) -> f64 {
        1e9 / self.clock_hz
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    #[default]
    Idealized,
    Scheduled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CostOptions {
    /// Writes overlap the next compute: one cycle per batch plus a final
    /// drain, instead of two cycles per batch.
    pub pipelined: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub cycles: u64,
    pub latency_ns: f64,
    pub energy_nj: f64,
    pub power_mw: f64,
    pub area_proxy_kb: f64,
    pub breakdown: EnergyBreakdown,
}

/// Energy terms in nJ.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub ops_nj: f64,
    pub write_nj: f64,
    pub macro_nj: f64,
    pub control_nj: f64,
    pub ops: u64,
    pub written_bits: u64,
    pub active_macro_cycles: u64,
}

/// The counts the energy model is linear in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Activity {
    pub ops: [u64; 3],
    pub written_bits: u64,
    pub active_macro_cycles: u64,
    pub cycles: u64,
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b.max(1))
}

/// Compute batches of one level when each type may spread over the macros
/// assigned to it and a macro runs its types one after another.
pub fn level_batches(counts: [u64; 3], t: &Topology) -> u64 {
    let c = t.capacity() as u64;
    let mut per_macro = vec![0u64; t.macro_count as usize];
    for ty in GateType::ALL {
        let ms = t.macros_for(ty);
        let g = ms.len() as u64;
        let b = ceil_div(counts[ty.index()], g * c);
        for &m in ms {
            per_macro[m as usize] += b;
        }
    }
    per_macro.into_iter().max().unwrap_or(0)
}

/// Macro-batches of one level: a batch of a type with `g` macros keeps all
/// `g` of them active.
pub fn level_macro_batches(counts: [u64; 3], t: &Topology) -> u64 {
    let c = t.capacity() as u64;
    GateType::ALL
        .iter()
        .map(|&ty| {
            let g = t.macros_for(ty).len() as u64;
            ceil_div(counts[ty.index()], g * c) * g
        })
        .sum()
}

pub fn idealized_activity(p: &LevelProfile, t: &Topology, opts: CostOptions) -> Activity {
    let mut batches = 0;
    let mut macro_batches = 0;
    for l in &p.counts {
        batches += level_batches(*l, t);
        macro_batches += level_macro_batches(*l, t);
    }
    let totals = p.totals();
    let (cycles, per_batch) = if opts.pipelined {
        (if batches > 0 { batches + 1 } else { 0 }, 1)
    } else {
        (2 * batches, 2)
    };
    Activity {
        ops: totals,
        written_bits: 2 * (totals[0] + totals[1]) + totals[2],
        active_macro_cycles: per_batch * macro_batches,
        cycles,
    }
}

pub fn scheduled_activity(s: &Schedule) -> Activity {
    let mut active = 0u64;
    for c in &s.cycles {
        let mut ms: Vec<u32> = c
            .computes
            .iter()
            .map(|x| x.macro_id)
            .chain(c.writes.iter().map(|x| x.macro_id))
            .collect();
        ms.sort_unstable();
        ms.dedup();
        active += ms.len() as u64;
    }
    Activity {
        ops: [
            s.op_count(GateType::Nand2),
            s.op_count(GateType::Nor2),
            s.op_count(GateType::Not),
        ],
        written_bits: s.written_bits(),
        active_macro_cycles: active,
        cycles: s.cycles.len() as u64,
    }
}

pub fn metrics_from_activity(a: &Activity, t: &Topology, cal: &Calibration) -> Metrics {
    let ops_j: f64 = GateType::ALL
        .iter()
        .map(|&ty| a.ops[ty.index()] as f64 * cal.op_energy(ty))
        .sum();
    let write_j = a.written_bits as f64 * cal.e_write_bit * (1.0 - cal.recycle_fraction);
    let macro_j = a.active_macro_cycles as f64 * cal.e_macro_overhead;
    let control_j = a.cycles as f64 * cal.e_control;
    let energy_nj = (ops_j + write_j + macro_j + control_j) * 1e9;
    let latency_ns = a.cycles as f64 * cal.period_ns();
    let power_mw = if latency_ns > 0.0 {
        energy_nj / latency_ns * 1e3
    } else {
        0.0
    };
    Metrics {
        cycles: a.cycles,
        latency_ns,
        energy_nj,
        power_mw,
        area_proxy_kb: t.area_kb(),
        breakdown: EnergyBreakdown {
            ops_nj: ops_j * 1e9,
            write_nj: write_j * 1e9,
            macro_nj: macro_j * 1e9,
            control_nj: control_j * 1e9,
            ops: a.ops.iter().sum(),
            written_bits: a.written_bits,
            active_macro_cycles: a.active_macro_cycles,
        },
    }
}

/// What to estimate from.
#[derive(Clone, Copy, Debug)]
pub enum ModelInput<'a> {
    Profile(&'a LevelProfile),
    Schedule(&'a Schedule),
}

impl ModelInput<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            ModelInput::Profile(_) => Mode::Idealized,
            ModelInput::Schedule(_) => Mode::Scheduled,
        }
    }

    fn gate_count(&self) -> u64 {
        match self {
            ModelInput::Profile(p) => p.gate_count(),
            ModelInput::Schedule(s) => s.profile.gate_count(),
        }
    }
}

/// Metrics of `input` on `t`. Fails when `t` is too small for the gates.
pub fn estimate_metrics(
    input: ModelInput<'_>,
    t: &Topology,
    cal: &Calibration,
    opts: CostOptions,
) -> Result<Metrics, InfeasibleError> {
    let need = min_memory_bits(input.gate_count().max(1));
    if t.total_bits() < need {
        return Err(InfeasibleError {
            required_bits: need,
            largest_bits: t.total_bits(),
        });
    }
    let a = match input {
        ModelInput::Profile(p) => idealized_activity(p, t, opts),
        ModelInput::Schedule(s) => scheduled_activity(s),
    };
    Ok(metrics_from_activity(&a, t, cal))
}

/// One row of measured results.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixtureRow {
    pub benchmark: String,
    pub scenario: String,
    pub macro_kb: f64,
    pub macro_count: u32,
    pub recipe: String,
    pub levels: u32,
    pub nand: u64,
    pub nor: u64,
    pub not: u64,
    pub power_mw: f64,
    pub latency_ns: f64,
    pub energy_nj: f64,
}

impl FixtureRow {
    pub fn label(&self) -> String {
        format!("{} {}", self.benchmark, self.scenario)
    }

    /// Per-level profile with the row's totals spread evenly.
    pub fn profile(&self) -> LevelProfile {
        LevelProfile::spread(self.levels as usize, [self.nand, self.nor, self.not])
    }

    /// The row's topology: from `lib` when present, else 256 columns.
    pub fn topology(&self, lib: Option<&TopologyLibrary>) -> Topology {
        let bits = (self.macro_kb * KB_BITS as f64) as u64;
        if let Some(t) = lib.and_then(|l| {
            l.topologies()
                .iter()
                .find(|t| t.macro_size_bits == bits && t.macro_count == self.macro_count)
        }) {
            return t.clone();
        }
        Topology::new(bits, self.macro_count, (bits / 256) as u32, 256)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityCheck {
    pub label: String,
    pub power_x_latency_nj: f64,
    pub energy_nj: f64,
    pub rel_err: f64,
    pub flagged: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 0.02;

/// Relative gap between stated energy and power times latency, per row.
pub fn check_fixture_identity(rows: &[FixtureRow]) -> Vec<IdentityCheck> {
    rows.iter()
        .map(|r| {
            let pl = r.power_mw * r.latency_ns * 1e-3;
            let rel = fabs(r.energy_nj - pl) / r.energy_nj;
            IdentityCheck {
                label: r.label(),
                power_x_latency_nj: pl,
                energy_nj: r.energy_nj,
                rel_err: rel,
                flagged: !(rel <= IDENTITY_TOLERANCE),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residual {
    pub label: String,
    pub stated_nj: f64,
    pub predicted_nj: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationFit {
    pub calibration: Calibration,
    pub residuals: Vec<Residual>,
    /// Root mean square of the relative residuals.
    pub rms_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CalibrationError {
    #[error("need at least 4 fixture rows, got {0}")]
    TooFewRows(usize),
    #[error("fixtures cannot separate the fitted terms: {0}")]
    RankDeficient(String),
    #[error("invalid defaults: {0}")]
    Defaults(String),
}

/// Upper bound on the fitted recycle fraction.
const ETA_MAX: f64 = 0.99;

/// Fits macro overhead, control energy and recycle fraction to the stated
/// energies by least squares on relative error, holding the per-operation
/// energies at their default values. Each row is modeled with its totals
/// spread evenly over its levels.
pub fn calibrate(
    rows: &[FixtureRow],
    defaults: &Calibration,
    lib: Option<&TopologyLibrary>,
    opts: CostOptions,
) -> Result<CalibrationFit, CalibrationError> {
    defaults
        .validate()
        .map_err(|e| CalibrationError::Defaults(format!("{e}")))?;
    if rows.len() < 4 {
        return Err(CalibrationError::TooFewRows(rows.len()));
    }
    // energy - ops = A * e_mo + C * e_ctrl + W * q, with q = e_w (1 - eta).
    let mut design: Vec<[f64; 3]> = Vec::with_capacity(rows.len());
    let mut target: Vec<f64> = Vec::with_capacity(rows.len());
    for r in rows {
        let t = r.topology(lib);
        let a = idealized_activity(&r.profile(), &t, opts);
        let ops_j: f64 = GateType::ALL
            .iter()
            .map(|&ty| a.ops[ty.index()] as f64 * defaults.op_energy(ty))
            .sum();
        let e = r.energy_nj * 1e-9;
        let w = 1.0 / e;
        design.push([
            a.active_macro_cycles as f64 * w,
            a.cycles as f64 * w,
            a.written_bits as f64 * w,
        ]);
        target.push((e - ops_j) * w);
    }
    // Column scaling keeps the normal equations well conditioned.
    let mut scale = [0.0f64; 3];
    for row in &design {
        for k in 0..3 {
            scale[k] = scale[k].max(fabs(row[k]));
        }
    }
    let names = ["active macro-cycles", "cycles", "written bits"];
    for k in 0..3 {
        if scale[k] == 0.0 {
            return Err(CalibrationError::RankDeficient(format!(
                "every row has zero {}",
                names[k]
            )));
        }
    }
    let x: Vec<[f64; 3]> = design
        .iter()
        .map(|r| [r[0] / scale[0], r[1] / scale[1], r[2] / scale[2]])
        .collect();
    if let Some(dep) = dependent_column(&x) {
        return Err(CalibrationError::RankDeficient(format!(
            "{} is a combination of the other terms; add rows with different macro counts or depths",
            names[dep]
        )));
    }
    let ew = defaults.e_write_bit;
    let lo = [0.0, 0.0, ew * (1.0 - ETA_MAX)];
    let hi = [f64::INFINITY, f64::INFINITY, ew];
    let lo_s = [lo[0] * scale[0], lo[1] * scale[1], lo[2] * scale[2]];
    let hi_s = [hi[0] * scale[0], hi[1] * scale[1], hi[2] * scale[2]];
    let sol = box_least_squares(&x, &target, lo_s, hi_s);
    let coef = [sol[0] / scale[0], sol[1] / scale[1], sol[2] / scale[2]];

    let mut cal = defaults.clone();
    cal.e_macro_overhead = coef[0];
    cal.e_control = coef[1];
    cal.recycle_fraction = if ew > 0.0 {
        (1.0 - coef[2] / ew).clamp(0.0, ETA_MAX)
    } else {
        defaults.recycle_fraction
    };

    let mut residuals = Vec::with_capacity(rows.len());
    let mut ss = 0.0;
    for r in rows {
        let t = r.topology(lib);
        let m = metrics_from_activity(&idealized_activity(&r.profile(), &t, opts), &t, &cal);
        let rel = (m.energy_nj - r.energy_nj) / r.energy_nj;
        ss += rel * rel;
        residuals.push(Residual {
            label: r.label(),
            stated_nj: r.energy_nj,
            predicted_nj: m.energy_nj,
            rel_err: rel,
        });
    }
    Ok(CalibrationFit {
        calibration: cal,
        residuals,
        rms_rel: sqrt(ss / rows.len() as f64),
    })
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn sqrt(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut r = if x > 1.0 { x } else { 1.0 };
    for _ in 0..200 {
        let next = 0.5 * (r + x / r);
        if next == r {
            break;
        }
        r = next;
    }
    r
}

/// Index of a column (in order) that is numerically a combination of the
/// earlier ones, by Gram-Schmidt on the columns.
fn dependent_column(x: &[[f64; 3]]) -> Option<usize> {
    let n = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..3 {
        let mut v: Vec<f64> = x.iter().map(|r| r[k]).collect();
        let norm0 = sqrt(v.iter().map(|a| a * a).sum());
        for b in &basis {
            let d: f64 = (0..n).map(|i| v[i] * b[i]).sum();
            for i in 0..n {
                v[i] -= d * b[i];
            }
        }
        let norm = sqrt(v.iter().map(|a| a * a).sum());
        if norm0 == 0.0 || norm <= 1e-9 * norm0 {
            return Some(k);
        }
        basis.push(v.iter().map(|a| a / norm).collect());
    }
    None
}

/// Minimizes |X b - y|^2 subject to lo <= b <= hi by trying every
/// assignment of each variable to free, lower or upper bound.
fn box_least_squares(x: &[[f64; 3]], y: &[f64], lo: [f64; 3], hi: [f64; 3]) -> [f64; 3] {
    let mut best: Option<(f64, [f64; 3])> = None;
    for code in 0..27u32 {
        let state = [code % 3, code / 3 % 3, code / 9];
        let mut b = [0.0f64; 3];
        let mut ok = true;
        for k in 0..3 {
            match state[k] {
                1 => b[k] = lo[k],
                2 => {
                    if !hi[k].is_finite() {
                        ok = false;
                    }
                    b[k] = hi[k];
                }
                _ => {}
            }
        }
        if !ok {
            continue;
        }
        let free: Vec<usize> = (0..3).filter(|&k| state[k] == 0).collect();
        if !free.is_empty() {
            // Normal equations over the free variables.
            let m = free.len();
            let mut a = vec![vec![0.0f64; m + 1]; m];
            for (row, &yi) in x.iter().zip(y) {
                let mut r = yi;
                for k in 0..3 {
                    if state[k] != 0 {
                        r -= row[k] * b[k];
                    }
                }
                for (i, &fi) in free.iter().enumerate() {
                    for (j, &fj) in free.iter().enumerate() {
                        a[i][j] += row[fi] * row[fj];
                    }
                    a[i][m] += row[fi] * r;
                }
            }
            match solve(a) {
                Some(sol) => {
                    for (i, &fi) in free.iter().enumerate() {
                        b[fi] = sol[i];
                    }
                }
                None => continue,
            }
            if free
                .iter()
                .any(|&k| b[k] < lo[k] - 1e-12 * fabs(lo[k]).max(1e-300) || b[k] > hi[k])
            {
                continue;
            }
        }
        let ss: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &yi)| {
                let r = row[0] * b[0] + row[1] * b[1] + row[2] * b[2] - yi;
                r * r
            })
            .sum();
        if best.map_or(true, |(s, _)| ss < s) {
            best = Some((ss, b));
        }
    }
    best.map(|(_, b)| b).unwrap_or(lo)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| fabs(a[i][col]).total_cmp(&fabs(a[j][col])))?;
        if fabs(a[piv][col]) < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InductorSpec {
    /// H.
    pub inductance: f64,
    /// F.
    pub c_total: f64,
    /// Hz.
    pub f_res: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DegenerateError {
    #[error("total capacitance is {0} F")]
    Capacitance(f64),
    #[error("resonant frequency is {0} Hz")]
    Frequency(f64),
}

/// Series inductance resonating with `c_total` at `f_res`.
pub fn inductance(c_total: f64, f_res: f64) -> Result<f64, DegenerateError> {
    if !(c_total > 0.0) || !c_total.is_finite() {
        return Err(DegenerateError::Capacitance(c_total));
    }
    if !(f_res > 0.0) || !f_res.is_finite() {
        return Err(DegenerateError::Frequency(f_res));
    }
    let w = 2.0 * PI * f_res;
    Ok(1.0 / (w * w * c_total))
}

/// One shared inductor for all write drivers of a macro: the bitline
/// capacitance of every cell adds up.
pub fn size_inductor(t: &Topology, cal: &Calibration, f_res: f64) -> Result<InductorSpec, DegenerateError> {
    let c_total = cal.c_bitline_per_cell * t.rows as f64 * t.cols as f64;
    Ok(InductorSpec {
        inductance: inductance(c_total, f_res)?,
        c_total,
        f_res,
    })
}
