//! SRAM macro topologies and the sizing rule.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::techmap::GateType;

pub const KB_BITS: u64 = 8 * 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Topology {
    pub macro_size_bits: u64,
    pub macro_count: u32,
    pub rows: u32,
    pub cols: u32,
    pub banks: u32,
    /// Macros that execute each gate type, indexed by [`GateType::index`].
    pub roles: [Vec<u32>; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {msg}")]
pub struct TopologyError {
    pub path: String,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no topology holds {required_bits} bits (largest has {largest_bits})")]
pub struct InfeasibleError {
    pub required_bits: u64,
    pub largest_bits: u64,
}

impl Topology {
    /// A topology with the default role split for its macro count: all
    /// types on one macro, one macro per type, or two macros per type.
    pub fn new(macro_size_bits: u64, macro_count: u32, rows: u32, cols: u32) -> Topology {
        let banks = (macro_size_bits / (rows as u64 * cols as u64).max(1)) as u32;
        Topology {
            macro_size_bits,
            macro_count,
            rows,
            cols,
            banks,
            roles: default_roles(macro_count),
        }
    }

    pub fn macro_size_kb(&self) -> f64 {
        self.macro_size_bits as f64 / KB_BITS as f64
    }

    pub fn total_bits(&self) -> u64 {
        self.macro_size_bits * self.macro_count as u64
    }

    /// Total cache size in KB, used as the area proxy.
    pub fn area_kb(&self) -> f64 {
        self.total_bits() as f64 / KB_BITS as f64
    }

    /// Operations per cycle per macro: one per column pair of the active bank.
    pub fn capacity(&self) -> u32 {
        self.cols / 2
    }

    pub fn macros_for(&self, t: GateType) -> &[u32] {
        &self.roles[t.index()]
    }

    pub fn name(&self) -> String {
        format!("{}KBx{}", fmt_kb(self.macro_size_kb()), self.macro_count)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |msg: String| TopologyError { path: self.name(), msg };
        if self.rows == 0 || self.cols == 0 || self.banks == 0 {
            return Err(bad("rows, cols and banks must be positive".into()));
        }
        if self.cols % 2 != 0 {
            return Err(bad(format!(
                "cols = {} is odd; columns pair up per sense amplifier",
                self.cols
            )));
        }
        let geo = self.rows as u64 * self.cols as u64 * self.banks as u64;
        if geo != self.macro_size_bits {
            return Err(bad(format!(
                "rows x cols x banks = {} x {} x {} = {} bits, macro size is {} bits",
                self.rows, self.cols, self.banks, geo, self.macro_size_bits
            )));
        }
        if self.macro_count == 0 {
            return Err(bad("macro_count must be positive".into()));
        }
        let mut used = vec![0u32; self.macro_count as usize];
        for t in GateType::ALL {
            let ms = self.macros_for(t);
            if ms.is_empty() {
                return Err(bad(format!("no macro executes {t}")));
            }
            for &m in ms {
                if m >= self.macro_count {
                    return Err(bad(format!("{t} assigned to macro {m} of {}", self.macro_count)));
                }
                used[m as usize] += 1;
            }
        }
        match self.macro_count {
            1 => {}
            3 | 6 => {
                let per = self.macro_count as usize / 3;
                if GateType::ALL.iter().any(|&t| self.macros_for(t).len() != per) || used.iter().any(|&u| u != 1) {
                    return Err(bad(format!(
                        "{} macros need {per} dedicated macro(s) per gate type",
                        self.macro_count
                    )));
                }
            }
            n => return Err(bad(format!("macro_count {n} is not 1, 3 or 6"))),
        }
        Ok(())
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}x{}x{})", self.name(), self.rows, self.cols, self.banks)
    }
}

fn fmt_kb(kb: f64) -> String {
    if kb == (kb as u64) as f64 {
        format!("{}", kb as u64)
    } else {
        format!("{kb}")
    }
}

pub fn default_roles(macro_count: u32) -> [Vec<u32>; 3] {
    match macro_count {
        3 => [vec![0], vec![1], vec![2]],
        6 => [vec![0, 1], vec![2, 3], vec![4, 5]],
        _ => [vec![0], vec![0], vec![0]],
    }
}

/// Bits needed for `gate_count` gates: two operands and two outputs each.
pub fn min_memory_bits(gate_count: u64) -> u64 {
    4 * gate_count
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopologyLibrary {
    topologies: Vec<Topology>,
    pub source: Option<String>,
}

impl TopologyLibrary {
    pub fn new(topologies: Vec<Topology>, source: Option<String>) -> Result<TopologyLibrary, TopologyError> {
        let src = source.clone().unwrap_or_else(|| "library".into());
        if topologies.is_empty() {
            return Err(TopologyError {
                path: src,
                msg: "no topologies".into(),
            });
        }
        for (i, t) in topologies.iter().enumerate() {
            t.validate().map_err(|e| TopologyError {
                path: format!("{src}: topology[{i}] {}", e.path),
                msg: e.msg,
            })?;
            let prev = topologies[..i].iter().rev().find(|p| p.macro_count == t.macro_count);
            if let Some(p) = prev {
                if p.macro_size_bits >= t.macro_size_bits {
                    return Err(TopologyError {
                        path: format!("{src}: topology[{i}] {}", t.name()),
                        msg: format!("sizes must increase within the {}-macro family", t.macro_count),
                    });
                }
            }
        }
        Ok(TopologyLibrary { topologies, source })
    }

    /// {4, 8, 16, 32} KB macros, each as one, three or six macros, with
    /// 256 columns and 128 to 1024 rows.
    pub fn default_library() -> TopologyLibrary {
        let mut ts = Vec::new();
        for count in [1, 3, 6] {
            for (kb, rows) in [(4u64, 128u32), (8, 256), (16, 512), (32, 1024)] {
                ts.push(Topology::new(kb * KB_BITS, count, rows, 256));
            }
        }
        TopologyLibrary::new(ts, None).expect("default library is valid")
    }

    pub fn topologies(&self) -> &[Topology] {
        &self.topologies
    }

    pub fn len(&self) -> usize {
        self.topologies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topologies.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<&Topology> {
        self.topologies.iter().find(|t| t.name().eq_ignore_ascii_case(name))
    }
}

impl Default for TopologyLibrary {
    fn default() -> Self {
        TopologyLibrary::default_library()
    }
}

/// Topologies whose total size meets [`min_memory_bits`], in library order.
pub fn feasible_topologies(gate_count: u64, lib: &TopologyLibrary) -> Result<Vec<Topology>, InfeasibleError> {
    let need = min_memory_bits(gate_count);
    let out: Vec<Topology> = lib
        .topologies()
        .iter()
        .filter(|t| t.total_bits() >= need)
        .cloned()
        .collect();
    if out.is_empty() {
        return Err(InfeasibleError {
            required_bits: need,
            largest_bits: lib.topologies().iter().map(Topology::total_bits).max().unwrap_or(0),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_is_half_the_columns() {
        let bank = Topology::new(2 * KB_BITS, 1, 128, 128);
        assert_eq!(bank.capacity(), 64);
        assert_eq!(Topology::new(2, 1, 1, 2).capacity(), 1);
        let lib = TopologyLibrary::default_library();
        assert_eq!(lib.find("8KBx1").unwrap().capacity(), 128);
    }

    #[test]
    fn sizing_rule() {
        assert_eq!(min_memory_bits(128), 512);
        assert_eq!(min_memory_bits(1), 4);
        assert_eq!(min_memory_bits(6447 + 20545 + 8639), 142524);
    }

    #[test]
    fn default_library_shape() {
        let lib = TopologyLibrary::default_library();
        assert_eq!(lib.len(), 12);
        let kb: Vec<f64> = lib.topologies().iter().map(Topology::area_kb).collect();
        assert_eq!(kb.iter().cloned().fold(f64::MAX, f64::min), 4.0);
        assert_eq!(kb.iter().cloned().fold(0.0, f64::max), 192.0);
    }

    #[test]
    fn feasibility() {
        let lib = TopologyLibrary::default_library();
        assert_eq!(feasible_topologies(128, &lib).unwrap().len(), 12);
        let big = feasible_topologies(35631, &lib).unwrap();
        assert!(big.iter().all(|t| t.total_bits() >= 142524));
        assert!(big.iter().any(|t| t.name() == "32KBx1"));
        assert!(!big.iter().any(|t| t.name() == "4KBx1"));
        let err = feasible_topologies(192 * KB_BITS * 8 / 4 + 1, &lib).unwrap_err();
        assert_eq!(err.required_bits, 4 * (192 * KB_BITS * 8 / 4 + 1));
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        let mut t = Topology::new(8 * KB_BITS, 3, 256, 256);
        t.cols = 255;
        assert!(t.validate().is_err());
        let mut t = Topology::new(8 * KB_BITS, 3, 256, 256);
        t.roles = [vec![0], vec![0], vec![2]];
        assert!(t.validate().is_err());
        let t = Topology::new(8 * KB_BITS, 2, 256, 256);
        assert!(t.validate().is_err());
    }

    #[test]
    fn sizes_must_increase_per_family() {
        let a = Topology::new(8 * KB_BITS, 1, 256, 256);
        let b = Topology::new(4 * KB_BITS, 1, 128, 256);
        assert!(TopologyLibrary::new(vec![a, b], None).is_err());
    }
}
