//! Circuit file formats.

pub mod aiger;
pub mod blif;
pub mod verilog;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rcim_core::netlist::{Gate, NetlistError};
use rcim_core::Aig;

pub use aiger::{parse_aiger, write_aiger_ascii, write_aiger_binary, AigerError};
pub use blif::{parse_blif, BlifError};
pub use verilog::{parse_verilog_subset, VerilogError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Aiger { path: String, source: AigerError },
    #[error("{path}: {source}")]
    Verilog { path: String, source: VerilogError },
    #[error("{path}: {source}")]
    Blif { path: String, source: BlifError },
    #[error("{path}: {source}")]
    Netlist { path: String, source: NetlistError },
    #[error("{path}: unknown circuit format (expected .aag, .aig, .v or .blif)")]
    UnknownFormat { path: String },
}

/// Reads a circuit, choosing the parser by extension.
pub fn load_circuit(path: &Path) -> Result<Aig, LoadError> {
    let p = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: p.clone(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let text = || String::from_utf8_lossy(&bytes).into_owned();
    match ext.as_str() {
        "aag" | "aig" => parse_aiger(&bytes).map_err(|source| LoadError::Aiger { path: p, source }),
        "v" | "sv" => {
            let n = parse_verilog_subset(&text()).map_err(|source| LoadError::Verilog {
                path: p.clone(),
                source,
            })?;
            n.to_aig().map_err(|source| LoadError::Netlist { path: p, source })
        }
        "blif" => {
            let n = parse_blif(&text()).map_err(|source| LoadError::Blif {
                path: p.clone(),
                source,
            })?;
            n.to_aig().map_err(|source| LoadError::Netlist { path: p, source })
        }
        _ => Err(LoadError::UnknownFormat { path: p }),
    }
}

/// Writes ASCII AIGER for `.aag` paths and binary otherwise.
pub fn save_aiger(g: &Aig, path: &Path) -> std::io::Result<()> {
    let binary = path.extension().is_some_and(|e| e == "aig");
    if binary {
        std::fs::write(path, write_aiger_binary(g))
    } else {
        std::fs::write(path, write_aiger_ascii(g))
    }
}

/// Orders gate blocks so every block follows the blocks driving its
/// dependencies. A block is (signals read, signal driven, gates in order).
/// Returns the offending signal when a dependency is never driven or a
/// loop exists.
pub(crate) fn order_blocks(
    inputs: &[String],
    blocks: Vec<(Vec<String>, String, Vec<Gate>)>,
) -> Result<Vec<Gate>, String> {
    let driver: HashMap<&str, usize> = blocks.iter().enumerate().map(|(i, b)| (b.1.as_str(), i)).collect();
    let inputs: HashSet<&str> = inputs.iter().map(String::as_str).collect();
    // 0 unvisited, 1 on the stack, 2 done
    let mut state = vec![0u8; blocks.len()];
    let mut order = Vec::with_capacity(blocks.len());
    for root in 0..blocks.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (b, ref mut next)) = stack.last_mut() {
            if let Some(dep) = blocks[b].0.get(*next) {
                *next += 1;
                if inputs.contains(dep.as_str()) {
                    continue;
                }
                let Some(&d) = driver.get(dep.as_str()) else {
                    return Err(dep.clone());
                };
                match state[d] {
                    0 => {
                        state[d] = 1;
                        stack.push((d, 0));
                    }
                    1 => return Err(dep.clone()),
                    _ => {}
                }
            } else {
                state[b] = 2;
                order.push(b);
                stack.pop();
            }
        }
    }
    let mut slots: Vec<Option<Vec<Gate>>> = blocks.into_iter().map(|b| Some(b.2)).collect();
    Ok(order
        .into_iter()
        .flat_map(|i| slots[i].take().expect("each block once"))
        .collect())
}
