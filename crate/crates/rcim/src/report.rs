//! Rendering of results as JSON, CSV or text.

use std::fmt::Write as _;

use rcim_core::explore::ExplorationReport;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

/// Serializes `rows` with a header line.
pub fn csv_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("flat rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

#[derive(Serialize)]
struct CandidateRow<'a> {
    recipe_index: usize,
    recipe: &'a str,
    selection: String,
    topology: &'a str,
    macro_kb: f64,
    macro_count: u32,
    total_bits: u64,
    levels: u32,
    nand2: u64,
    nor2: u64,
    not: u64,
    cycles: u64,
    power_mw: f64,
    latency_ns: f64,
    energy_nj: f64,
    area_kb: f64,
    meets_constraints: bool,
    pareto: bool,
    best: bool,
}

/// One line per candidate with gate counts and metrics.
pub fn candidates_csv(r: &ExplorationReport) -> String {
    let rows: Vec<CandidateRow> = r
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| CandidateRow {
            recipe_index: c.recipe_index,
            recipe: &c.recipe,
            selection: serde_json::to_value(c.selection)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            topology: &c.topology,
            macro_kb: c.macro_kb,
            macro_count: c.macro_count,
            total_bits: c.total_bits,
            levels: c.levels,
            nand2: c.nand,
            nor2: c.nor,
            not: c.not,
            cycles: c.metrics.cycles,
            power_mw: c.metrics.power_mw,
            latency_ns: c.metrics.latency_ns,
            energy_nj: c.metrics.energy_nj,
            area_kb: c.metrics.area_proxy_kb,
            meets_constraints: c.meets_constraints,
            pareto: r.pareto.contains(&i),
            best: i == r.best,
        })
        .collect();
    csv_rows(&rows)
}

pub fn exploration_text(r: &ExplorationReport) -> String {
    let mut s = String::new();
    let w = r.winner();
    let _ = writeln!(s, "circuit {} ({} inputs, {} outputs)", r.circuit, r.inputs, r.outputs);
    let _ = writeln!(
        s,
        "{} recipes x {} topologies, {} candidates, {} rejected",
        r.stats.n_recipes,
        r.stats.m_topologies,
        r.stats.candidates,
        r.rejected.len()
    );
    let g = &r.recipes[r.min_gates];
    let l = &r.recipes[r.min_levels];
    let _ = writeln!(
        s,
        "fewest gates:  {} ({} gates, {} levels)",
        g.recipe, g.gates, g.levels
    );
    let _ = writeln!(
        s,
        "fewest levels: {} ({} gates, {} levels)",
        l.recipe, l.gates, l.levels
    );
    let _ = writeln!(
        s,
        "best: {} on {}: {} NAND2, {} NOR2, {} NOT, {} levels",
        w.recipe, w.topology, w.nand, w.nor, w.not, w.levels
    );
    let _ = writeln!(
        s,
        "      {:.4} nJ, {:.2} ns, {:.3} mW, {} cycles",
        w.metrics.energy_nj, w.metrics.latency_ns, w.metrics.power_mw, w.metrics.cycles
    );
    let _ = writeln!(
        s,
        "inductor: {:.4e} H for {:.4e} F at {:.4e} Hz",
        r.inductor.inductance, r.inductor.c_total, r.inductor.f_res
    );
    match &r.signoff {
        Some(so) => {
            let _ = writeln!(
                s,
                "sign-off: {} ({} vectors{}, {} cycles, {} mismatches)",
                if so.passed { "pass" } else { "FAIL" },
                so.vectors,
                if so.exhaustive { ", exhaustive" } else { "" },
                so.cycles,
                so.mismatches
            );
            if let Some(d) = &so.detail {
                let _ = writeln!(s, "          {d}");
            }
        }
        None => s.push_str("sign-off: skipped\n"),
    }
    let _ = writeln!(s, "pareto front:");
    for &i in &r.pareto {
        let c = &r.candidates[i];
        let _ = writeln!(
            s,
            "  {:<14} {:<10} {:>10.4} nJ {:>10.2} ns {:>6} KB",
            c.recipe, c.topology, c.metrics.energy_nj, c.metrics.latency_ns, c.metrics.area_proxy_kb
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: &'static str,
    }

    #[test]
    fn csv_has_header() {
        let s = csv_rows(&[Row { a: 1, b: "x,y" }]);
        assert_eq!(s, "a,b\n1,\"x,y\"\n");
    }
}
