//! Structural Verilog subset: one module of single-bit `input`, `output`
//! and `wire` nets driven by continuous `assign` statements over `~ & ^ |`,
//! parentheses and the constants `1'b0` / `1'b1`.
//!
//! Operator precedence, tightest first: `~`, `&`, `^`, `|`. Anything outside
//! the subset is rejected with its line number.

use std::collections::HashMap;

use rcim_core::netlist::{Gate, GateOp, RawNetlist};

use super::order_blocks;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerilogError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported construct `{construct}`")]
    UnsupportedConstruct { line: usize, construct: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Sym(char),
}

const UNSUPPORTED: &[&str] = &[
    "always",
    "reg",
    "initial",
    "posedge",
    "negedge",
    "integer",
    "parameter",
    "localparam",
    "generate",
    "function",
    "task",
    "case",
    "if",
    "else",
    "begin",
    "end",
    "logic",
    "supply0",
    "supply1",
    "tri",
    "inout",
    "assign_deassign",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, VerilogError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < b.len() {
        let c = b[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            _ if c.is_ascii_whitespace() => i += 1,
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let start = line;
                i += 2;
                loop {
                    if i + 1 >= b.len() {
                        return Err(VerilogError::Parse {
                            line: start,
                            msg: "unterminated comment".into(),
                        });
                    }
                    if b[i] == b'\n' {
                        line += 1;
                    }
                    if b[i] == b'*' && b[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            b'(' | b')' | b',' | b';' | b'=' | b'~' | b'&' | b'|' | b'^' => {
                out.push((Tok::Sym(c as char), line));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'\'' || b[i] == b'_') {
                    i += 1;
                }
                let lit = &text[start..i];
                let v = match lit.to_ascii_lowercase().as_str() {
                    "1'b0" | "1'h0" | "1'd0" | "0" => false,
                    "1'b1" | "1'h1" | "1'd1" | "1" => true,
                    _ => {
                        return Err(VerilogError::UnsupportedConstruct {
                            line,
                            construct: lit.to_string(),
                        })
                    }
                };
                out.push((Tok::Const(v), line));
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), line));
            }
            b'[' => {
                return Err(VerilogError::UnsupportedConstruct {
                    line,
                    construct: "vector range".into(),
                })
            }
            b'@' | b'#' | b'`' | b'{' | b'?' | b'!' | b'<' | b'>' | b'+' | b'-' | b'*' | b'%' => {
                return Err(VerilogError::UnsupportedConstruct {
                    line,
                    construct: (c as char).to_string(),
                });
            }
            _ => {
                return Err(VerilogError::Parse {
                    line,
                    msg: format!("unexpected character `{}`", c as char),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Input,
    Output,
    Wire,
}

enum Expr {
    Net(String, usize),
    Const(bool),
    Not(Box<Expr>),
    Bin(GateOp, Box<Expr>, Box<Expr>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Result<Tok, VerilogError> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t.ok_or(VerilogError::Parse {
            line: self.line(),
            msg: "unexpected end of input".into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), VerilogError> {
        let line = self.line();
        match self.next()? {
            Tok::Sym(s) if s == c => Ok(()),
            t => Err(VerilogError::Parse {
                line,
                msg: format!("expected `{c}`, found {}", show(&t)),
            }),
        }
    }

    fn ident(&mut self) -> Result<String, VerilogError> {
        let line = self.line();
        match self.next()? {
            Tok::Ident(s) => {
                if UNSUPPORTED.contains(&s.as_str()) {
                    return Err(VerilogError::UnsupportedConstruct { line, construct: s });
                }
                Ok(s)
            }
            t => Err(VerilogError::Parse {
                line,
                msg: format!("expected a name, found {}", show(&t)),
            }),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // or := xor ('|' xor)*; xor := and ('^' and)*; and := un ('&' un)*
    fn expr(&mut self) -> Result<Expr, VerilogError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, VerilogError> {
        const OPS: [(char, GateOp); 3] = [('|', GateOp::Or), ('^', GateOp::Xor), ('&', GateOp::And)];
        if level == OPS.len() {
            return self.unary();
        }
        let (sym, op) = OPS[level];
        let mut lhs = self.binary(level + 1)?;
        while self.eat(sym) {
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, VerilogError> {
        let line = self.line();
        match self.next()? {
            Tok::Sym('~') => Ok(Expr::Not(Box::new(self.unary()?))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Const(v) => Ok(Expr::Const(v)),
            Tok::Ident(s) => {
                if UNSUPPORTED.contains(&s.as_str()) {
                    return Err(VerilogError::UnsupportedConstruct { line, construct: s });
                }
                Ok(Expr::Net(s, line))
            }
            t => Err(VerilogError::Parse {
                line,
                msg: format!("expected an operand, found {}", show(&t)),
            }),
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Const(v) => format!("`1'b{}`", *v as u8),
        Tok::Sym(c) => format!("`{c}`"),
    }
}

/// Lowers `e` into gates; the root gate drives `target`.
fn lower(e: &Expr, target: &str, temp: &mut usize, gates: &mut Vec<Gate>, deps: &mut Vec<String>) -> String {
    let mut fresh = |temp: &mut usize| {
        *temp += 1;
        format!("{target}~{}", *temp)
    };
    fn name_of(
        e: &Expr,
        target: &str,
        temp: &mut usize,
        gates: &mut Vec<Gate>,
        deps: &mut Vec<String>,
        fresh: &mut dyn FnMut(&mut usize) -> String,
        root: bool,
    ) -> String {
        let out = if root { target.to_string() } else { String::new() };
        match e {
            Expr::Net(n, _) if !root => {
                deps.push(n.clone());
                n.clone()
            }
            Expr::Net(n, _) => {
                deps.push(n.clone());
                gates.push(Gate {
                    op: GateOp::Buf,
                    fanins: vec![n.clone()],
                    output: out.clone(),
                });
                out
            }
            Expr::Const(v) => {
                let out = if root { out } else { fresh(temp) };
                let op = if *v { GateOp::Const1 } else { GateOp::Const0 };
                gates.push(Gate {
                    op,
                    fanins: vec![],
                    output: out.clone(),
                });
                out
            }
            Expr::Not(x) => {
                let a = name_of(x, target, temp, gates, deps, fresh, false);
                let out = if root { out } else { fresh(temp) };
                gates.push(Gate {
                    op: GateOp::Not,
                    fanins: vec![a],
                    output: out.clone(),
                });
                out
            }
            Expr::Bin(op, x, y) => {
                let a = name_of(x, target, temp, gates, deps, fresh, false);
                let b = name_of(y, target, temp, gates, deps, fresh, false);
                let out = if root { out } else { fresh(temp) };
                gates.push(Gate {
                    op: *op,
                    fanins: vec![a, b],
                    output: out.clone(),
                });
                out
            }
        }
    }
    name_of(e, target, temp, gates, deps, &mut fresh, true)
}

/// Parses one module of the subset into a netlist with gates in
/// topological order.
pub fn parse_verilog_subset(text: &str) -> Result<RawNetlist, VerilogError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    match p.next()? {
        Tok::Ident(s) if s == "module" => {}
        Tok::Ident(s) if UNSUPPORTED.contains(&s.as_str()) => {
            return Err(VerilogError::UnsupportedConstruct {
                line: p.line(),
                construct: s,
            })
        }
        t => {
            return Err(VerilogError::Parse {
                line: 1,
                msg: format!("expected `module`, found {}", show(&t)),
            })
        }
    }
    let name = p.ident()?;
    let mut kinds: HashMap<String, (Kind, usize)> = HashMap::new();
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut ports: Vec<(String, usize)> = Vec::new();

    let declare = |kinds: &mut HashMap<String, (Kind, usize)>,
                   inputs: &mut Vec<String>,
                   outputs: &mut Vec<String>,
                   n: String,
                   k: Kind,
                   line: usize|
     -> Result<(), VerilogError> {
        if let Some(&(old, _)) = kinds.get(&n) {
            // A port list name may be given its direction later.
            if old != Kind::Wire || k == Kind::Wire {
                return Err(VerilogError::Parse {
                    line,
                    msg: format!("`{n}` declared twice"),
                });
            }
        }
        kinds.insert(n.clone(), (k, line));
        match k {
            Kind::Input => inputs.push(n),
            Kind::Output => outputs.push(n),
            Kind::Wire => {}
        }
        Ok(())
    };

    if p.eat('(') && !p.eat(')') {
        let mut dir: Option<Kind> = None;
        loop {
            let line = p.line();
            let mut n = p.ident()?;
            match n.as_str() {
                "input" | "output" => {
                    dir = Some(if n == "input" { Kind::Input } else { Kind::Output });
                    n = p.ident()?;
                    if n == "wire" {
                        n = p.ident()?;
                    }
                }
                "wire" => n = p.ident()?,
                _ => {}
            }
            match dir {
                Some(k) => declare(&mut kinds, &mut inputs, &mut outputs, n, k, line)?,
                None => ports.push((n, line)),
            }
            if p.eat(')') {
                break;
            }
            p.expect(',')?;
        }
    }
    p.expect(';')?;

    let mut assigns: Vec<(String, Expr, usize)> = Vec::new();
    loop {
        let line = p.line();
        let kw = p.ident()?;
        match kw.as_str() {
            "endmodule" => break,
            "input" | "output" | "wire" => {
                let k = match kw.as_str() {
                    "input" => Kind::Input,
                    "output" => Kind::Output,
                    _ => Kind::Wire,
                };
                loop {
                    let line = p.line();
                    let mut n = p.ident()?;
                    if n == "wire" && k != Kind::Wire {
                        n = p.ident()?;
                    }
                    if k == Kind::Wire && kinds.contains_key(&n) {
                        // `output y; wire y;` is legal and changes nothing.
                    } else {
                        declare(&mut kinds, &mut inputs, &mut outputs, n, k, line)?;
                    }
                    if p.eat(';') {
                        break;
                    }
                    p.expect(',')?;
                }
            }
            "assign" => {
                let target = p.ident()?;
                p.expect('=')?;
                let e = p.expr()?;
                p.expect(';')?;
                assigns.push((target, e, line));
            }
            "module" => {
                return Err(VerilogError::UnsupportedConstruct {
                    line,
                    construct: "second module".into(),
                })
            }
            _ => return Err(VerilogError::UnsupportedConstruct { line, construct: kw }),
        }
    }
    if let Some(t) = p.peek() {
        return Err(VerilogError::Parse {
            line: p.line(),
            msg: format!("text after endmodule: {}", show(t)),
        });
    }
    for (n, line) in &ports {
        if !matches!(kinds.get(n), Some((Kind::Input | Kind::Output, _))) {
            return Err(VerilogError::Parse {
                line: *line,
                msg: format!("port `{n}` has no direction"),
            });
        }
    }

    let mut blocks = Vec::with_capacity(assigns.len());
    let mut driven: HashMap<String, usize> = HashMap::new();
    for (target, e, line) in &assigns {
        match kinds.get(target) {
            None => {
                return Err(VerilogError::Parse {
                    line: *line,
                    msg: format!("`{target}` is not declared"),
                })
            }
            Some((Kind::Input, _)) => {
                return Err(VerilogError::Parse {
                    line: *line,
                    msg: format!("input `{target}` is assigned"),
                })
            }
            _ => {}
        }
        if driven.insert(target.clone(), *line).is_some() {
            return Err(VerilogError::Parse {
                line: *line,
                msg: format!("`{target}` is assigned twice"),
            });
        }
        check_nets(e, &kinds)?;
        let mut gates = Vec::new();
        let mut deps = Vec::new();
        lower(e, target, &mut 0, &mut gates, &mut deps);
        blocks.push((deps, target.clone(), gates));
    }
    for o in &outputs {
        if !driven.contains_key(o) && !inputs.contains(o) {
            let line = kinds[o].1;
            return Err(VerilogError::Parse {
                line,
                msg: format!("output `{o}` is never assigned"),
            });
        }
    }
    let gates = order_blocks(&inputs, blocks).map_err(|n| VerilogError::Parse {
        line: driven.get(&n).copied().unwrap_or(0),
        msg: format!("`{n}` is read but never assigned, or is part of a combinational loop"),
    })?;
    Ok(RawNetlist {
        name: Some(name),
        inputs,
        outputs,
        gates,
    })
}

fn check_nets(e: &Expr, kinds: &HashMap<String, (Kind, usize)>) -> Result<(), VerilogError> {
    match e {
        Expr::Net(n, line) => {
            if kinds.contains_key(n) {
                Ok(())
            } else {
                Err(VerilogError::Parse {
                    line: *line,
                    msg: format!("`{n}` is not declared"),
                })
            }
        }
        Expr::Const(_) => Ok(()),
        Expr::Not(x) => check_nets(x, kinds),
        Expr::Bin(_, x, y) => check_nets(x, kinds).and_then(|_| check_nets(y, kinds)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_inverter() {
        let n = parse_verilog_subset("module m(a, y); input a; output y; assign y = ~a; endmodule").unwrap();
        assert_eq!(n.gates.len(), 1);
        assert_eq!(n.gates[0].op, GateOp::Not);
        assert_eq!(n.gates[0].output, "y");
    }

    #[test]
    fn precedence() {
        let n =
            parse_verilog_subset("module m(input a, b, c, output y);\n assign y = a & b | c;\nendmodule\n").unwrap();
        let ops: Vec<GateOp> = n.gates.iter().map(|g| g.op).collect();
        assert_eq!(ops, [GateOp::And, GateOp::Or]);
        assert_eq!(n.gates[1].fanins[0], n.gates[0].output);
        assert_eq!(n.gates[1].fanins[1], "c");
        assert_eq!(n.gates[1].output, "y");
        let n =
            parse_verilog_subset("module m(input a, b, c, output y); assign y = a | b ^ ~c & a; endmodule").unwrap();
        for v in 0..8usize {
            let (a, b, c) = (v & 1 == 1, v & 2 == 2, v & 4 == 4);
            assert_eq!(n.eval(&[a, b, c]).unwrap(), [a | (b ^ (!c & a))]);
        }
    }

    #[test]
    fn out_of_order_assigns_and_constants() {
        let src = "module m(a, b, y, z);\ninput a, b;\noutput y, z;\nwire t;\nassign y = t ^ 1'b1;\nassign t = (a & b);\nassign z = 1'b0;\nendmodule";
        let n = parse_verilog_subset(src).unwrap();
        n.validate().unwrap();
        assert_eq!(n.eval(&[true, true]).unwrap(), [false, false]);
        assert_eq!(n.eval(&[true, false]).unwrap(), [true, false]);
    }

    #[test]
    fn rejects_outside_subset() {
        let e = parse_verilog_subset("module m(a, y);\ninput a;\noutput reg y;\nendmodule").unwrap_err();
        assert_eq!(
            e,
            VerilogError::UnsupportedConstruct {
                line: 3,
                construct: "reg".into()
            }
        );
        let e = parse_verilog_subset("module m(a, y);\ninput [3:0] a;\nendmodule").unwrap_err();
        assert!(matches!(e, VerilogError::UnsupportedConstruct { line: 2, .. }));
        let e =
            parse_verilog_subset("module m(a, y);\ninput a;\noutput y;\nalways @(a) y = a;\nendmodule").unwrap_err();
        assert!(matches!(e, VerilogError::UnsupportedConstruct { line: 4, .. }));
        let e = parse_verilog_subset("module m(a, y);\ninput a;\noutput y;\nassign y = q;\nendmodule").unwrap_err();
        assert!(matches!(e, VerilogError::Parse { line: 4, .. }));
        let e = parse_verilog_subset(
            "module m(a, y);\ninput a;\noutput y;\nwire p;\nassign y = p;\nassign p = y;\nendmodule",
        )
        .unwrap_err();
        assert!(matches!(e, VerilogError::Parse { .. }));
    }
}
