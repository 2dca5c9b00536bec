//! AIGER reader and writer, ASCII (`aag`) and binary (`aig`), combinational
//! only.

use std::collections::HashMap;

use rcim_core::aig::{Node, NodeId};
use rcim_core::{Aig, Lit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AigerError {
    #[error("latches are not supported ({0} declared)")]
    UnsupportedSequential(u64),
    #[error("byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, AigerError> {
        Err(AigerError::Parse {
            offset: self.pos,
            msg: msg.into(),
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.data.len()
    }

    /// The rest of the current line, without the newline.
    fn line(&mut self) -> Result<&'a str, AigerError> {
        if self.at_end() {
            return self.err("unexpected end of file");
        }
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
            self.pos += 1;
        }
        let end = self.pos;
        if self.pos < self.data.len() {
            self.pos += 1;
        }
        let raw = &self.data[start..end];
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        std::str::from_utf8(raw).map_err(|_| AigerError::Parse {
            offset: start,
            msg: "line is not UTF-8".into(),
        })
    }

    fn numbers(&mut self, want: usize, what: &str) -> Result<Vec<u64>, AigerError> {
        let start = self.pos;
        let line = self.line()?;
        let nums: Result<Vec<u64>, _> = line.split_ascii_whitespace().map(str::parse::<u64>).collect();
        match nums {
            Ok(v) if v.len() == want => Ok(v),
            _ => Err(AigerError::Parse {
                offset: start,
                msg: format!("expected {want} number(s) for {what}, found `{line}`"),
            }),
        }
    }

    fn varint(&mut self) -> Result<u64, AigerError> {
        let mut x = 0u64;
        let mut shift = 0;
        loop {
            if self.at_end() {
                return self.err("truncated binary AND section");
            }
            let b = self.data[self.pos];
            self.pos += 1;
            if shift > 63 {
                return self.err("varint overflow");
            }
            x |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }
}

/// Parses either AIGER variant, chosen by the header magic.
pub fn parse_aiger(bytes: &[u8]) -> Result<Aig, AigerError> {
    let mut c = Cursor { data: bytes, pos: 0 };
    let header = c.line()?;
    let mut parts = header.split_ascii_whitespace();
    let magic = parts.next().unwrap_or("");
    let binary = match magic {
        "aag" => false,
        "aig" => true,
        _ => {
            return Err(AigerError::Parse {
                offset: 0,
                msg: format!("bad magic `{magic}`"),
            })
        }
    };
    let nums: Vec<u64> = parts
        .map(str::parse::<u64>)
        .collect::<Result<_, _>>()
        .map_err(|_| AigerError::Parse {
            offset: 0,
            msg: format!("bad header `{header}`"),
        })?;
    if nums.len() < 5 {
        return Err(AigerError::Parse {
            offset: 0,
            msg: format!("header needs M I L O A, found `{header}`"),
        });
    }
    let (m, ni, nl, no, na) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if nums[5..].iter().any(|&x| x != 0) {
        return Err(AigerError::UnsupportedSequential(nl.max(1)));
    }
    if nl > 0 {
        return Err(AigerError::UnsupportedSequential(nl));
    }
    if ni + nl + na > m {
        return Err(AigerError::Parse {
            offset: 0,
            msg: format!("M = {m} is smaller than I + L + A = {}", ni + nl + na),
        });
    }

    let mut inputs: Vec<u64> = Vec::with_capacity(ni as usize);
    if binary {
        inputs.extend((1..=ni).map(|v| 2 * v));
    } else {
        for _ in 0..ni {
            let off = c.pos;
            let l = c.numbers(1, "an input")?[0];
            if l < 2 || l & 1 == 1 || l / 2 > m {
                return Err(AigerError::Parse {
                    offset: off,
                    msg: format!("bad input literal {l}"),
                });
            }
            inputs.push(l);
        }
    }
    let mut outputs: Vec<(u64, usize)> = Vec::with_capacity(no as usize);
    for _ in 0..no {
        let off = c.pos;
        let l = c.numbers(1, "an output")?[0];
        outputs.push((l, off));
    }
    let mut ands: Vec<([u64; 3], usize)> = Vec::with_capacity(na as usize);
    for i in 0..na {
        let off = c.pos;
        if binary {
            let lhs = 2 * (ni + nl + i + 1);
            let d0 = c.varint()?;
            let d1 = c.varint()?;
            if d0 > lhs || d1 > lhs - d0 {
                return Err(AigerError::Parse {
                    offset: off,
                    msg: "AND delta out of range".into(),
                });
            }
            let r0 = lhs - d0;
            ands.push(([lhs, r0, r0 - d1], off));
        } else {
            let v = c.numbers(3, "an AND gate")?;
            ands.push(([v[0], v[1], v[2]], off));
        }
    }

    // Optional symbol table, then comments.
    let mut in_names: HashMap<usize, String> = HashMap::new();
    let mut out_names: HashMap<usize, String> = HashMap::new();
    while !c.at_end() {
        let off = c.pos;
        let line = c.line()?;
        if line == "c" || line.starts_with("c ") {
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_at(1);
        let (idx, name) = rest.split_once(' ').unwrap_or((rest, ""));
        let idx: usize = idx.parse().map_err(|_| AigerError::Parse {
            offset: off,
            msg: format!("bad symbol line `{line}`"),
        })?;
        match kind {
            "i" if idx < ni as usize => {
                in_names.insert(idx, name.to_string());
            }
            "o" if idx < no as usize => {
                out_names.insert(idx, name.to_string());
            }
            "l" | "b" | "c" | "j" | "f" => {}
            _ => {
                return Err(AigerError::Parse {
                    offset: off,
                    msg: format!("bad symbol line `{line}`"),
                })
            }
        }
    }

    let mut g = Aig::new();
    let mut var: Vec<Option<Lit>> = vec![None; m as usize + 1];
    var[0] = Some(Lit::FALSE);
    for (i, &l) in inputs.iter().enumerate() {
        let v = (l / 2) as usize;
        if var[v].is_some() {
            return Err(AigerError::Parse {
                offset: 0,
                msg: format!("variable {v} defined twice"),
            });
        }
        var[v] = Some(g.add_input(in_names.remove(&i)));
    }
    let mut def: Vec<Option<usize>> = vec![None; m as usize + 1];
    for (k, &([lhs, _, _], off)) in ands.iter().enumerate() {
        let v = (lhs / 2) as usize;
        if lhs & 1 == 1 || lhs < 2 || v > m as usize {
            return Err(AigerError::Parse {
                offset: off,
                msg: format!("bad AND output literal {lhs}"),
            });
        }
        if var[v].is_some() || def[v].is_some() {
            return Err(AigerError::Parse {
                offset: off,
                msg: format!("variable {v} defined twice"),
            });
        }
        def[v] = Some(k);
    }
    // ASCII files may list gates in any order; resolve depth first.
    let lit_of = |var: &Vec<Option<Lit>>, l: u64| var[(l / 2) as usize].map(|x| x.xor(l & 1 == 1));
    for root in 0..ands.len() {
        let mut stack: Vec<(usize, bool)> = vec![(root, false)];
        while let Some((k, expanded)) = stack.pop() {
            let ([lhs, r0, r1], off) = ands[k];
            if var[(lhs / 2) as usize].is_some() {
                continue;
            }
            for r in [r0, r1] {
                if r / 2 > m {
                    return Err(AigerError::Parse {
                        offset: off,
                        msg: format!("literal {r} exceeds M"),
                    });
                }
            }
            match (lit_of(&var, r0), lit_of(&var, r1)) {
                (Some(a), Some(b)) => {
                    var[(lhs / 2) as usize] = Some(g.and(a, b));
                }
                _ if expanded => {
                    return Err(AigerError::Parse {
                        offset: off,
                        msg: format!("combinational cycle through {lhs}"),
                    });
                }
                _ => {
                    stack.push((k, true));
                    for r in [r0, r1] {
                        if lit_of(&var, r).is_none() {
                            match def[(r / 2) as usize] {
                                Some(d) => {
                                    if stack.iter().any(|&(s, e)| s == d && e) {
                                        return Err(AigerError::Parse {
                                            offset: off,
                                            msg: format!("combinational cycle through {lhs}"),
                                        });
                                    }
                                    stack.push((d, false));
                                }
                                None => {
                                    return Err(AigerError::Parse {
                                        offset: off,
                                        msg: format!("literal {r} is never defined"),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for (i, &(l, off)) in outputs.iter().enumerate() {
        if l / 2 > m {
            return Err(AigerError::Parse {
                offset: off,
                msg: format!("output literal {l} exceeds M"),
            });
        }
        let lit = lit_of(&var, l).ok_or(AigerError::Parse {
            offset: off,
            msg: format!("output literal {l} is never defined"),
        })?;
        g.add_output(lit, out_names.remove(&i));
    }
    Ok(g)
}

/// Variable numbering for writing: inputs first, then live AND nodes in
/// topological order.
struct Numbering {
    var: Vec<u64>,
    ands: Vec<NodeId>,
}

fn number(g: &Aig) -> Numbering {
    let live = g.live_mask();
    let mut var = vec![0u64; g.len()];
    let mut next = 1;
    for &i in g.inputs() {
        var[i.index()] = next;
        next += 1;
    }
    let mut ands = Vec::new();
    for id in g.and_ids() {
        if live[id.index()] {
            var[id.index()] = next;
            next += 1;
            ands.push(id);
        }
    }
    Numbering { var, ands }
}

fn lit_code(n: &Numbering, l: Lit) -> u64 {
    2 * n.var[l.node().index()] + l.is_complemented() as u64
}

fn symbols(g: &Aig, out: &mut Vec<u8>) {
    for (i, n) in g.input_names().iter().enumerate() {
        if let Some(n) = n {
            out.extend_from_slice(format!("i{i} {n}\n").as_bytes());
        }
    }
    for (i, n) in g.output_names().iter().enumerate() {
        if let Some(n) = n {
            out.extend_from_slice(format!("o{i} {n}\n").as_bytes());
        }
    }
}

fn and_codes(g: &Aig, n: &Numbering, id: NodeId) -> (u64, u64, u64) {
    let Node::And(a, b) = g.node(id) else {
        unreachable!("numbered AND")
    };
    let (x, y) = (lit_code(n, a), lit_code(n, b));
    (2 * n.var[id.index()], x.max(y), x.min(y))
}

/// ASCII AIGER with a symbol table for named inputs and outputs.
pub fn write_aiger_ascii(g: &Aig) -> String {
    let n = number(g);
    let ni = g.num_inputs() as u64;
    let na = n.ands.len() as u64;
    let mut s = format!("aag {} {} 0 {} {}\n", ni + na, ni, g.num_outputs(), na);
    for k in 1..=ni {
        s.push_str(&format!("{}\n", 2 * k));
    }
    for &o in g.outputs() {
        s.push_str(&format!("{}\n", lit_code(&n, o)));
    }
    for &id in &n.ands {
        let (l, a, b) = and_codes(g, &n, id);
        s.push_str(&format!("{l} {a} {b}\n"));
    }
    let mut tail = Vec::new();
    symbols(g, &mut tail);
    s.push_str(std::str::from_utf8(&tail).expect("names are UTF-8"));
    s
}

/// Binary AIGER.
pub fn write_aiger_binary(g: &Aig) -> Vec<u8> {
    let n = number(g);
    let ni = g.num_inputs() as u64;
    let na = n.ands.len() as u64;
    let mut out = format!("aig {} {} 0 {} {}\n", ni + na, ni, g.num_outputs(), na).into_bytes();
    for &o in g.outputs() {
        out.extend_from_slice(format!("{}\n", lit_code(&n, o)).as_bytes());
    }
    for &id in &n.ands {
        let (l, a, b) = and_codes(g, &n, id);
        push_varint(&mut out, l - a);
        push_varint(&mut out, a - b);
    }
    symbols(g, &mut out);
    out
}

fn push_varint(out: &mut Vec<u8>, mut x: u64) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rcim_core::aig::BitMatrix;
    use rcim_core::gen;

    fn same(a: &Aig, b: &Aig) -> bool {
        let m = BitMatrix::exhaustive(a.num_inputs());
        a.simulate(&m).unwrap() == b.simulate(&m).unwrap()
    }

    #[test]
    fn buffer() {
        let g = parse_aiger(b"aag 1 1 0 1 0\n2\n2\n").unwrap();
        assert_eq!((g.num_inputs(), g.num_outputs(), g.num_ands()), (1, 1, 0));
        assert_eq!(write_aiger_ascii(&g), "aag 1 1 0 1 0\n2\n2\n");
    }

    #[test]
    fn single_and() {
        let g = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert_eq!(g.num_ands(), 1);
        for v in 0..4 {
            let a = v & 1 == 1;
            let b = v & 2 == 2;
            assert_eq!(g.eval(&[a, b]), [a && b]);
        }
        let h = parse_aiger(write_aiger_ascii(&g).as_bytes()).unwrap();
        assert!(same(&g, &h));
    }

    #[test]
    fn out_of_order_and_constants() {
        let g = parse_aiger(b"aag 4 2 0 2 2\n2\n4\n8\n1\n8 6 3\n6 2 4\n").unwrap();
        assert_eq!(g.eval(&[true, true]), [false, true]);
        assert_eq!(g.eval(&[false, true]), [false, true]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_aiger(b"aag 1 0 1 0 0\n2 3\n"),
            Err(AigerError::UnsupportedSequential(1))
        ));
        assert!(matches!(
            parse_aiger(b"aig 1 1 0"),
            Err(AigerError::Parse { offset: 0, .. })
        ));
        match parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 x\n") {
            Err(AigerError::Parse { offset, .. }) => assert_eq!(offset, 20),
            other => panic!("{other:?}"),
        }
        assert!(parse_aiger(b"aag 2 0 0 1 2\n2\n2 4 1\n4 2 1\n").is_err());
    }

    #[test]
    fn binary_round_trip() {
        for g in [gen::adder(3), gen::mux_tree(3), gen::random_aig(4, 9, 60, 5)] {
            let bin = write_aiger_binary(&g);
            let h = parse_aiger(&bin).unwrap();
            assert!(same(&g, &h));
            assert_eq!(h.input_names(), g.input_names());
            let t = parse_aiger(write_aiger_ascii(&g).as_bytes()).unwrap();
            assert!(same(&g, &t));
        }
    }
}
