//! Topology library and calibration files (TOML).

use std::path::{Path, PathBuf};

use rcim_core::cost::{Calibration, FJ, PJ};
use rcim_core::topology::{Topology, TopologyError, KB_BITS};
use rcim_core::TopologyLibrary;
use serde::{Deserialize, Serialize};

/// The shipped library, identical to [`TopologyLibrary::default_library`].
pub const DEFAULT_LIBRARY: &str = include_str!("../data/default.topo");
pub const DEFAULT_CALIBRATION: &str = include_str!("../data/default.cal");
/// Environment variable naming the library used when none is given.
pub const LIBRARY_ENV: &str = "RCIM_LIBRARY";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Syntax { path: String, msg: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("{path}: {msg}")]
    Calibration { path: String, msg: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    topology: Vec<TopologyEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyEntry {
    macro_kb: f64,
    macro_count: u32,
    rows: u32,
    cols: u32,
    banks: Option<u32>,
    roles: Option<Roles>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Roles {
    nand2: Vec<u32>,
    nor2: Vec<u32>,
    not: Vec<u32>,
}

pub fn parse_library(text: &str, source: &str) -> Result<TopologyLibrary, ConfigError> {
    let file: LibraryFile = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        path: source.to_string(),
        msg: e.to_string(),
    })?;
    let mut ts = Vec::with_capacity(file.topology.len());
    for (i, e) in file.topology.into_iter().enumerate() {
        let bits = e.macro_kb * KB_BITS as f64;
        if !(bits >= 1.0) || bits.fract() != 0.0 {
            return Err(TopologyError {
                path: format!("{source}: topology[{i}]"),
                msg: format!("macro_kb = {} is not a whole number of bits", e.macro_kb),
            }
            .into());
        }
        let mut t = Topology::new(bits as u64, e.macro_count, e.rows, e.cols);
        if let Some(b) = e.banks {
            t.banks = b;
        }
        if let Some(r) = e.roles {
            t.roles = [r.nand2, r.nor2, r.not];
        }
        ts.push(t);
    }
    Ok(TopologyLibrary::new(ts, Some(source.to_string()))?)
}

pub fn load_library(path: &Path) -> Result<TopologyLibrary, ConfigError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: p.clone(),
        source,
    })?;
    parse_library(&text, &p)
}

/// The library named by `arg`, else by the environment, else the default.
/// A missing `default.topo` resolves to the shipped copy.
pub fn resolve_library(arg: Option<&Path>) -> Result<TopologyLibrary, ConfigError> {
    let chosen: Option<PathBuf> = arg
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(LIBRARY_ENV).map(PathBuf::from));
    match chosen {
        Some(p) if p.exists() => load_library(&p),
        Some(p) if p.file_name().is_some_and(|n| n == "default.topo") => parse_library(DEFAULT_LIBRARY, "default.topo"),
        Some(p) => load_library(&p),
        None => parse_library(DEFAULT_LIBRARY, "default.topo"),
    }
}

/// Calibration file: every key carries its unit; missing keys keep their
/// defaults.
#[derive(Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub clock_hz: Option<f64>,
    pub e_nand_fj: Option<f64>,
    pub e_nor_fj: Option<f64>,
    pub e_not_fj: Option<f64>,
    pub e_write_bit_fj: Option<f64>,
    pub recycle_fraction: Option<f64>,
    pub e_macro_overhead_pj: Option<f64>,
    pub e_control_fj: Option<f64>,
    pub c_bitline_per_cell_ff: Option<f64>,
    pub pulse_nand_ps: Option<f64>,
    pub pulse_nor_ps: Option<f64>,
}

impl CalibrationFile {
    pub fn apply(&self, base: &Calibration) -> Calibration {
        let mut c = base.clone();
        let set = |dst: &mut f64, v: Option<f64>, unit: f64| {
            if let Some(v) = v {
                *dst = v * unit;
            }
        };
        set(&mut c.clock_hz, self.clock_hz, 1.0);
        set(&mut c.e_nand, self.e_nand_fj, FJ);
        set(&mut c.e_nor, self.e_nor_fj, FJ);
        set(&mut c.e_not, self.e_not_fj, FJ);
        set(&mut c.e_write_bit, self.e_write_bit_fj, FJ);
        set(&mut c.recycle_fraction, self.recycle_fraction, 1.0);
        set(&mut c.e_macro_overhead, self.e_macro_overhead_pj, PJ);
        set(&mut c.e_control, self.e_control_fj, FJ);
        set(&mut c.c_bitline_per_cell, self.c_bitline_per_cell_ff, FJ);
        set(&mut c.pulse_nand_s, self.pulse_nand_ps, 1e-12);
        set(&mut c.pulse_nor_s, self.pulse_nor_ps, 1e-12);
        c
    }

    pub fn from_calibration(c: &Calibration) -> CalibrationFile {
        CalibrationFile {
            clock_hz: Some(c.clock_hz),
            e_nand_fj: Some(c.e_nand / FJ),
            e_nor_fj: Some(c.e_nor / FJ),
            e_not_fj: Some(c.e_not / FJ),
            e_write_bit_fj: Some(c.e_write_bit / FJ),
            recycle_fraction: Some(c.recycle_fraction),
            e_macro_overhead_pj: Some(c.e_macro_overhead / PJ),
            e_control_fj: Some(c.e_control / FJ),
            c_bitline_per_cell_ff: Some(c.c_bitline_per_cell / FJ),
            pulse_nand_ps: Some(c.pulse_nand_s / 1e-12),
            pulse_nor_ps: Some(c.pulse_nor_s / 1e-12),
        }
    }
}

pub fn parse_calibration(text: &str, source: &str) -> Result<Calibration, ConfigError> {
    let file: CalibrationFile = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        path: source.to_string(),
        msg: e.to_string(),
    })?;
    let c = file.apply(&Calibration::default());
    c.validate().map_err(|e| ConfigError::Calibration {
        path: source.to_string(),
        msg: e.to_string(),
    })?;
    Ok(c)
}

/// The calibration at `path`, or the shipped defaults.
pub fn resolve_calibration(path: Option<&Path>) -> Result<Calibration, ConfigError> {
    match path {
        None => parse_calibration(DEFAULT_CALIBRATION, "default.cal"),
        Some(p) => {
            let s = p.display().to_string();
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: s.clone(),
                source,
            })?;
            parse_calibration(&text, &s)
        }
    }
}

pub fn calibration_to_toml(c: &Calibration) -> String {
    toml::to_string(&CalibrationFile::from_calibration(c)).expect("plain numbers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_files_match_code_defaults() {
        let lib = parse_library(DEFAULT_LIBRARY, "default.topo").unwrap();
        assert_eq!(lib.topologies(), TopologyLibrary::default_library().topologies());
        let cal = parse_calibration(DEFAULT_CALIBRATION, "default.cal").unwrap();
        let d = Calibration::default();
        for (a, b) in [
            (cal.e_nand, d.e_nand),
            (cal.e_nor, d.e_nor),
            (cal.e_macro_overhead, d.e_macro_overhead),
            (cal.c_bitline_per_cell, d.c_bitline_per_cell),
            (cal.recycle_fraction, d.recycle_fraction),
        ] {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn bad_geometry_names_file_and_entry() {
        let text = "[[topology]]\nmacro_kb = 8\nmacro_count = 1\nrows = 256\ncols = 256\nbanks = 2\n";
        let e = parse_library(text, "lab.topo").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("lab.topo") && msg.contains("topology[0]"), "{msg}");
    }

    #[test]
    fn calibration_checks() {
        assert!(parse_calibration("e_nand_fj = 200.0\n", "x.cal").is_err());
        assert!(parse_calibration("recycle_fraction = 1.0\n", "x.cal").is_err());
        assert!(parse_calibration("bogus = 1\n", "x.cal").is_err());
        let c = parse_calibration("e_macro_overhead_pj = 2.5\n", "x.cal").unwrap();
        assert!((c.e_macro_overhead - 2.5e-12).abs() < 1e-24);
        let again = parse_calibration(&calibration_to_toml(&c), "y.cal").unwrap();
        assert!((again.e_macro_overhead - c.e_macro_overhead).abs() < 1e-24);
    }
}
