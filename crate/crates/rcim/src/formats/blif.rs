//! Combinational BLIF: `.model`, `.inputs`, `.outputs`, `.names` with
//! single-output cubes, `.end`.

use std::collections::HashSet;

use rcim_core::netlist::{Gate, GateOp, RawNetlist};

use super::order_blocks;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlifError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported construct `{construct}`")]
    UnsupportedConstruct { line: usize, construct: String },
}

struct Names {
    line: usize,
    signals: Vec<String>,
    cubes: Vec<(String, bool)>,
}

/// Joined logical lines (backslash continuation), comments stripped, with
/// the line each starts on.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("");
        if cur.is_empty() {
            start = i + 1;
        }
        if let Some(body) = l.trim_end().strip_suffix('\\') {
            cur.push_str(body);
            cur.push(' ');
            continue;
        }
        cur.push_str(l);
        if !cur.trim().is_empty() {
            out.push((start, cur.trim().to_string()));
        }
        cur.clear();
    }
    if !cur.trim().is_empty() {
        out.push((start, cur.trim().to_string()));
    }
    out
}

pub fn parse_blif(text: &str) -> Result<RawNetlist, BlifError> {
    let mut name = None;
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut names: Vec<Names> = Vec::new();
    let mut ended = false;
    for (line, l) in logical_lines(text) {
        if ended {
            return Err(BlifError::Parse {
                line,
                msg: "text after .end".into(),
            });
        }
        let mut words = l.split_ascii_whitespace();
        let head = words.next().expect("non-empty line");
        if !head.starts_with('.') {
            let Some(cur) = names.last_mut() else {
                return Err(BlifError::Parse {
                    line,
                    msg: format!("cube `{l}` outside .names"),
                });
            };
            let n_in = cur.signals.len() - 1;
            let (mask, val) = match (n_in, words.next()) {
                (0, None) => (String::new(), head),
                (_, Some(v)) => (head.to_string().clone(), v),
                (_, None) => {
                    return Err(BlifError::Parse {
                        line,
                        msg: format!("cube `{l}` has no output value"),
                    })
                }
            };
            let mask = if n_in == 0 { String::new() } else { mask };
            if mask.len() != n_in || !mask.chars().all(|c| matches!(c, '0' | '1' | '-')) {
                return Err(BlifError::Parse {
                    line,
                    msg: format!("cube `{l}` does not match {n_in} input(s)"),
                });
            }
            let v = match val {
                "1" => true,
                "0" => false,
                _ => {
                    return Err(BlifError::Parse {
                        line,
                        msg: format!("output value `{val}`"),
                    })
                }
            };
            if cur.cubes.first().is_some_and(|c| c.1 != v) {
                return Err(BlifError::Parse {
                    line,
                    msg: "mixed on-set and off-set cubes".into(),
                });
            }
            cur.cubes.push((mask, v));
            continue;
        }
        match head {
            ".model" => {
                if name.is_some() {
                    return Err(BlifError::UnsupportedConstruct {
                        line,
                        construct: "second .model".into(),
                    });
                }
                name = Some(words.next().unwrap_or("top").to_string());
            }
            ".inputs" => inputs.extend(words.map(String::from)),
            ".outputs" => outputs.extend(words.map(String::from)),
            ".names" => {
                let signals: Vec<String> = words.map(String::from).collect();
                if signals.is_empty() {
                    return Err(BlifError::Parse {
                        line,
                        msg: ".names without signals".into(),
                    });
                }
                names.push(Names {
                    line,
                    signals,
                    cubes: Vec::new(),
                });
            }
            ".end" => ended = true,
            ".default_input_arrival" | ".default_output_required" | ".input_arrival" | ".output_required" => {}
            other => {
                return Err(BlifError::UnsupportedConstruct {
                    line,
                    construct: other.to_string(),
                })
            }
        }
    }

    let mut blocks = Vec::with_capacity(names.len());
    let mut defined: HashSet<&str> = inputs.iter().map(String::as_str).collect();
    for n in &names {
        let out = n.signals.last().expect("non-empty").clone();
        if !defined.insert(n.signals.last().expect("non-empty")) {
            return Err(BlifError::Parse {
                line: n.line,
                msg: format!("`{out}` is defined twice"),
            });
        }
        let ins = &n.signals[..n.signals.len() - 1];
        let mut gates = Vec::new();
        let mut k = 0;
        let mut fresh = || {
            k += 1;
            format!("{out}~{k}")
        };
        let on_set = n.cubes.first().map_or(true, |c| c.1);
        let mut terms: Vec<String> = Vec::new();
        let mut negated: Vec<Option<String>> = vec![None; ins.len()];
        for (mask, _) in &n.cubes {
            let mut lits = Vec::new();
            for (i, c) in mask.chars().enumerate() {
                match c {
                    '1' => lits.push(ins[i].clone()),
                    '0' => {
                        let nn = negated[i].get_or_insert_with(|| {
                            let t = fresh();
                            gates.push(Gate {
                                op: GateOp::Not,
                                fanins: vec![ins[i].clone()],
                                output: t.clone(),
                            });
                            t
                        });
                        lits.push(nn.clone());
                    }
                    _ => {}
                }
            }
            let t = fresh();
            match lits.len() {
                0 => gates.push(Gate {
                    op: GateOp::Const1,
                    fanins: vec![],
                    output: t.clone(),
                }),
                1 => gates.push(Gate {
                    op: GateOp::Buf,
                    fanins: lits,
                    output: t.clone(),
                }),
                _ => gates.push(Gate {
                    op: GateOp::And,
                    fanins: lits,
                    output: t.clone(),
                }),
            }
            terms.push(t);
        }
        // An empty cover is constant 0; off-set covers are complemented.
        let op = match (terms.is_empty(), on_set) {
            (true, _) => GateOp::Const0,
            (false, true) => GateOp::Or,
            (false, false) => GateOp::Nor,
        };
        gates.push(Gate {
            op,
            fanins: terms,
            output: out.clone(),
        });
        blocks.push((ins.to_vec(), out, gates));
    }
    let gates = order_blocks(&inputs, blocks).map_err(|s| BlifError::Parse {
        line: names
            .iter()
            .find(|n| n.signals.last() == Some(&s))
            .map_or(0, |n| n.line),
        msg: format!("`{s}` is undefined or part of a combinational loop"),
    })?;
    Ok(RawNetlist {
        name,
        inputs,
        outputs,
        gates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_adder() {
        let src = "\
.model fa
.inputs a b \\
 c
.outputs s co
.names a b c co
11- 1
1-1 1
-11 1
.names a b c s
100 1
010 1
001 1
111 1
.end
";
        let n = parse_blif(src).unwrap();
        for v in 0..8u32 {
            let ins: Vec<bool> = (0..3).map(|i| v >> i & 1 == 1).collect();
            let sum = v.count_ones();
            assert_eq!(n.eval(&ins).unwrap(), [sum & 1 == 1, sum >= 2]);
        }
    }

    #[test]
    fn constants_and_off_set() {
        let src =
            ".model k\n.inputs a b\n.outputs one zero nand\n.names one\n1\n.names zero\n.names a b nand\n11 0\n.end\n";
        let n = parse_blif(src).unwrap();
        assert_eq!(n.eval(&[true, true]).unwrap(), [true, false, false]);
        assert_eq!(n.eval(&[true, false]).unwrap(), [true, false, true]);
    }

    #[test]
    fn rejects_latches() {
        let e = parse_blif(".model s\n.inputs a\n.outputs q\n.latch a q 0\n.end\n").unwrap_err();
        assert_eq!(
            e,
            BlifError::UnsupportedConstruct {
                line: 4,
                construct: ".latch".into()
            }
        );
    }
}
