//! Family energy comparisons over the benchmark set.

use rcim_core::cost::Calibration;
use rcim_core::explore::{explore, Constraints, Executor, ExplorationReport, ExploreError, ExploreOptions};
use rcim_core::gen::Benchmark;
use rcim_core::npn::NpnLibrary;
use rcim_core::TopologyLibrary;
use serde::Serialize;

/// Distance from the reference, in percentage points, still shown green.
pub const TREND_WINDOW_PP: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Green,
    Review,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    /// Macro counts compared: `to` against `from`.
    pub from: u32,
    pub to: u32,
    /// Restricts the comparison to one macro size.
    pub macro_kb: Option<f64>,
    pub measured_pct: Option<f64>,
    pub reference_pct: f64,
    pub delta_pp: Option<f64>,
    pub flag: Flag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerCircuit {
    pub circuit: String,
    pub gates: u64,
    pub levels: u32,
    pub saving_3_pct: Option<f64>,
    pub saving_6_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub circuits: Vec<PerCircuit>,
    pub comparisons: Vec<Comparison>,
}

/// Mean relative energy saving of `to`-macro over `from`-macro candidates
/// sharing recipe and macro size.
pub fn saving(reports: &[ExplorationReport], from: u32, to: u32, macro_kb: Option<f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in reports {
        let keep = |kb: f64| macro_kb.map_or(true, |k| k == kb);
        for x in r
            .candidates
            .iter()
            .filter(|c| c.macro_count == from && keep(c.macro_kb))
        {
            let y = r
                .candidates
                .iter()
                .find(|c| c.macro_count == to && c.recipe_index == x.recipe_index && c.macro_kb == x.macro_kb);
            if let Some(y) = y.filter(|_| x.metrics.energy_nj > 0.0) {
                sum += 1.0 - y.metrics.energy_nj / x.metrics.energy_nj;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn compare(
    reports: &[ExplorationReport],
    label: &str,
    from: u32,
    to: u32,
    kb: Option<f64>,
    reference: f64,
) -> Comparison {
    let measured = saving(reports, from, to, kb).map(|s| s * 100.0);
    let delta = measured.map(|m| m - reference);
    Comparison {
        label: label.to_string(),
        from,
        to,
        macro_kb: kb,
        measured_pct: measured,
        reference_pct: reference,
        delta_pp: delta,
        flag: match delta {
            Some(d) if d.abs() <= TREND_WINDOW_PP => Flag::Green,
            _ => Flag::Review,
        },
    }
}

pub fn trend_report(reports: &[ExplorationReport]) -> TrendReport {
    let circuits = reports
        .iter()
        .map(|r| {
            let w = r.winner();
            let one = |to| saving(core::slice::from_ref(r), 1, to, None).map(|s| s * 100.0);
            PerCircuit {
                circuit: r.circuit.clone(),
                gates: w.gates(),
                levels: w.levels,
                saving_3_pct: one(3),
                saving_6_pct: one(6),
            }
        })
        .collect();
    TrendReport {
        circuits,
        comparisons: vec![
            compare(reports, "three-macro vs single-macro energy saving", 1, 3, None, 40.52),
            compare(reports, "six-macro vs single-macro energy saving", 1, 6, None, 80.9),
            compare(reports, "three-macro vs single-macro at 4 KB", 1, 3, Some(4.0), 89.12),
        ],
    }
}

/// Explores every benchmark exhaustively and summarizes the families.
pub fn run_trend<E: Executor>(
    benches: &[Benchmark],
    lib: &TopologyLibrary,
    npn: &NpnLibrary,
    cal: &Calibration,
    opts: &ExploreOptions,
    exec: &E,
) -> Result<(Vec<ExplorationReport>, TrendReport), ExploreError> {
    let opts = ExploreOptions {
        exhaustive: true,
        ..opts.clone()
    };
    let reports = benches
        .iter()
        .map(|b| explore(&b.name, &b.aig, lib, npn, cal, &Constraints::default(), &opts, exec))
        .collect::<Result<Vec<_>, _>>()?;
    let t = trend_report(&reports);
    Ok((reports, t))
}

pub fn render_text(t: &TrendReport) -> String {
    use std::fmt::Write;
    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}%"));
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>7} {:>6} {:>10} {:>10}",
        "circuit", "gates", "levels", "1->3", "1->6"
    );
    for c in &t.circuits {
        let _ = writeln!(
            s,
            "{:<20} {:>7} {:>6} {:>10} {:>10}",
            c.circuit,
            c.gates,
            c.levels,
            pct(c.saving_3_pct),
            pct(c.saving_6_pct)
        );
    }
    for c in &t.comparisons {
        let flag = match c.flag {
            Flag::Green => "green",
            Flag::Review => "review",
        };
        let _ = writeln!(
            s,
            "[{flag}] {}: measured {}, reference {:.2}%",
            c.label,
            pct(c.measured_pct),
            c.reference_pct
        );
    }
    s
}
