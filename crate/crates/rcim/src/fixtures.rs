//! Measured result tables used for calibration and identity checks.

use rcim_core::cost::FixtureRow;
use serde::Deserialize;

/// The shipped 18-row table: best and worst configurations of nine
/// benchmarks.
pub const MEASURED: &str = include_str!("../data/measured.csv");

#[derive(Debug, thiserror::Error)]
#[error("{source_name} record {record}: {msg}")]
pub struct FixtureError {
    pub source_name: String,
    pub record: usize,
    pub msg: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    benchmark: String,
    scenario: String,
    macro_kb: f64,
    macro_count: u32,
    recipe: String,
    levels: u32,
    nand2: u64,
    nor2: u64,
    not: u64,
    power_mw: f64,
    latency_ns: f64,
    energy_nj: f64,
}

pub fn parse_fixtures(text: &str, source_name: &str) -> Result<Vec<FixtureRow>, FixtureError> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rd.deserialize::<Record>().enumerate() {
        let r = rec.map_err(|e| FixtureError {
            source_name: source_name.to_string(),
            record: i + 1,
            msg: e.to_string(),
        })?;
        if !(r.energy_nj > 0.0) {
            return Err(FixtureError {
                source_name: source_name.to_string(),
                record: i + 1,
                msg: "energy must be positive".into(),
            });
        }
        rows.push(FixtureRow {
            benchmark: r.benchmark,
            scenario: r.scenario,
            macro_kb: r.macro_kb,
            macro_count: r.macro_count,
            recipe: r.recipe,
            levels: r.levels,
            nand: r.nand2,
            nor: r.nor2,
            not: r.not,
            power_mw: r.power_mw,
            latency_ns: r.latency_ns,
            energy_nj: r.energy_nj,
        });
    }
    Ok(rows)
}

pub fn measured() -> Vec<FixtureRow> {
    parse_fixtures(MEASURED, "measured.csv").expect("shipped table parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table() {
        let rows = measured();
        assert_eq!(rows.len(), 18);
        let m = rows
            .iter()
            .find(|r| r.benchmark == "Multiplier" && r.scenario == "worst")
            .unwrap();
        assert_eq!((m.nand, m.nor, m.not), (6447, 20545, 8639));
        assert_eq!(m.recipe, "ba,rw,rs");
        assert_eq!(m.energy_nj, 0.9022);
    }

    #[test]
    fn bad_record_is_located() {
        let text = "benchmark,scenario,macro_kb,macro_count,recipe,levels,nand2,nor2,not,power_mw,latency_ns,energy_nj\nx,best,4,1,ba,1,1,1,1,1,1,oops\n";
        let e = parse_fixtures(text, "t.csv").unwrap_err();
        assert_eq!(e.record, 1);
    }
}
