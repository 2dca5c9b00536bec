//! Generic gate-level netlists, the common form produced by the front ends.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::aig::{Aig, Lit};
use crate::FxHashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GateOp {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
    Buf,
    Const0,
    Const1,
}

impl GateOp {
    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
            GateOp::Nor => "NOR",
            GateOp::Buf => "BUF",
            GateOp::Const0 => "CONST0",
            GateOp::Const1 => "CONST1",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            GateOp::Not | GateOp::Buf => n == 1,
            GateOp::Const0 | GateOp::Const1 => n == 0,
            _ => n >= 1,
        }
    }

    /// Boolean semantics over the fanin values.
    pub fn eval(self, ins: &[bool]) -> bool {
        match self {
            GateOp::And => ins.iter().all(|&b| b),
            GateOp::Or => ins.iter().any(|&b| b),
            GateOp::Not => !ins[0],
            GateOp::Xor => ins.iter().fold(false, |acc, &b| acc ^ b),
            GateOp::Nand => !ins.iter().all(|&b| b),
            GateOp::Nor => !ins.iter().any(|&b| b),
            GateOp::Buf => ins[0],
            GateOp::Const0 => false,
            GateOp::Const1 => true,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gate {
    pub op: GateOp,
    pub fanins: Vec<String>,
    pub output: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawNetlist {
    pub name: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NetlistError {
    #[error("signal `{0}` is defined more than once")]
    DuplicateName(String),
    #[error("gate `{gate}` reads `{signal}`, which is not an input or an earlier gate output")]
    UndefinedSignal { gate: String, signal: String },
    #[error("output `{0}` is not driven")]
    UndrivenOutput(String),
    #[error("gate `{gate}`: {op} cannot take {got} fanins")]
    Arity { gate: String, op: GateOp, got: usize },
}

impl RawNetlist {
    pub fn new() -> RawNetlist {
        RawNetlist::default()
    }

    pub fn add_gate(&mut self, op: GateOp, fanins: &[&str], output: &str) {
        self.gates.push(Gate {
            op,
            fanins: fanins.iter().map(|s| String::from(*s)).collect(),
            output: String::from(output),
        });
    }

    /// Checks names, arities, ordering and that every output is driven.
    pub fn validate(&self) -> Result<(), NetlistError> {
        let mut defined: FxHashMap<&str, ()> = FxHashMap::default();
        for i in &self.inputs {
            if defined.insert(i.as_str(), ()).is_some() {
                return Err(NetlistError::DuplicateName(i.clone()));
            }
        }
        for g in &self.gates {
            if !g.op.arity_ok(g.fanins.len()) {
                return Err(NetlistError::Arity {
                    gate: g.output.clone(),
                    op: g.op,
                    got: g.fanins.len(),
                });
            }
            for f in &g.fanins {
                if !defined.contains_key(f.as_str()) {
                    return Err(NetlistError::UndefinedSignal {
                        gate: g.output.clone(),
                        signal: f.clone(),
                    });
                }
            }
            if defined.insert(g.output.as_str(), ()).is_some() {
                return Err(NetlistError::DuplicateName(g.output.clone()));
            }
        }
        for o in &self.outputs {
            if !defined.contains_key(o.as_str()) {
                return Err(NetlistError::UndrivenOutput(o.clone()));
            }
        }
        Ok(())
    }

    /// Structurally hashed AIG with the same inputs and outputs. XOR becomes
    /// three AND nodes; constants propagate.
    pub fn to_aig(&self) -> Result<Aig, NetlistError> {
        self.validate()?;
        let mut g = Aig::new();
        let mut sig: FxHashMap<&str, Lit> = FxHashMap::default();
        for name in &self.inputs {
            let l = g.add_input(Some(name.clone()));
            sig.insert(name.as_str(), l);
        }
        let mut ins: Vec<Lit> = Vec::new();
        for gate in &self.gates {
            ins.clear();
            ins.extend(gate.fanins.iter().map(|f| sig[f.as_str()]));
            let l = match gate.op {
                GateOp::And => g.and_many(&ins),
                GateOp::Or => g.or_many(&ins),
                GateOp::Nand => !g.and_many(&ins),
                GateOp::Nor => !g.or_many(&ins),
                GateOp::Not => !ins[0],
                GateOp::Buf => ins[0],
                GateOp::Xor => {
                    let mut acc = ins[0];
                    for &x in &ins[1..] {
                        acc = g.xor(acc, x);
                    }
                    acc
                }
                GateOp::Const0 => Lit::FALSE,
                GateOp::Const1 => Lit::TRUE,
            };
            sig.insert(gate.output.as_str(), l);
        }
        for o in &self.outputs {
            g.add_output(sig[o.as_str()], Some(o.clone()));
        }
        Ok(g)
    }

    /// Direct gate-by-gate evaluation; the reference the AIG conversion is
    /// checked against.
    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        self.validate()?;
        let mut val: FxHashMap<&str, bool> = FxHashMap::default();
        for (name, &v) in self.inputs.iter().zip(inputs) {
            val.insert(name.as_str(), v);
        }
        let mut ins: Vec<bool> = Vec::new();
        for gate in &self.gates {
            ins.clear();
            ins.extend(gate.fanins.iter().map(|f| val[f.as_str()]));
            val.insert(gate.output.as_str(), gate.op.eval(&ins));
        }
        Ok(self.outputs.iter().map(|o| val[o.as_str()]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn all_ops() -> RawNetlist {
        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into(), "b".into(), "c".into()];
        n.add_gate(GateOp::And, &["a", "b", "c"], "t_and");
        n.add_gate(GateOp::Or, &["a", "b"], "t_or");
        n.add_gate(GateOp::Not, &["c"], "t_not");
        n.add_gate(GateOp::Xor, &["a", "b", "c"], "t_xor");
        n.add_gate(GateOp::Nand, &["t_or", "t_not"], "t_nand");
        n.add_gate(GateOp::Nor, &["a", "t_xor"], "t_nor");
        n.add_gate(GateOp::Buf, &["t_nand"], "t_buf");
        n.add_gate(GateOp::Const0, &[], "zero");
        n.add_gate(GateOp::Const1, &[], "one");
        n.add_gate(GateOp::And, &["one", "t_buf"], "t_one");
        n.add_gate(GateOp::Or, &["zero", "t_nor"], "t_zero");
        n.outputs = [
            "t_and", "t_or", "t_not", "t_xor", "t_nand", "t_nor", "t_buf", "zero", "one", "t_one", "t_zero", "a",
        ]
        .iter()
        .map(|s| String::from(*s))
        .collect();
        n
    }

    #[test]
    fn every_op_converts_exactly() {
        let n = all_ops();
        let g = n.to_aig().unwrap();
        g.check().unwrap();
        for v in 0..8usize {
            let ins: Vec<bool> = (0..3).map(|i| v >> i & 1 == 1).collect();
            assert_eq!(g.eval(&ins), n.eval(&ins).unwrap(), "vector {v}");
        }
    }

    #[test]
    fn xor_uses_three_ands() {
        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into(), "b".into()];
        n.add_gate(GateOp::Xor, &["a", "b"], "y");
        n.outputs = vec!["y".into()];
        assert_eq!(n.to_aig().unwrap().num_ands(), 3);
    }

    #[test]
    fn validation_errors() {
        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into()];
        n.add_gate(GateOp::Not, &["b"], "y");
        assert!(matches!(n.validate(), Err(NetlistError::UndefinedSignal { .. })));

        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into()];
        n.outputs = vec!["y".into()];
        assert_eq!(n.validate(), Err(NetlistError::UndrivenOutput("y".into())));

        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into(), "a".into()];
        assert_eq!(n.validate(), Err(NetlistError::DuplicateName("a".into())));

        let mut n = RawNetlist::new();
        n.inputs = vec!["a".into(), "b".into()];
        n.add_gate(GateOp::Not, &["a", "b"], "y");
        assert!(matches!(n.validate(), Err(NetlistError::Arity { got: 2, .. })));
    }
}
