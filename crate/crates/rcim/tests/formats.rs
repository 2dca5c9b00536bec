use std::path::Path;

use proptest::prelude::*;
use rcim::formats::{load_circuit, parse_aiger, write_aiger_ascii, write_aiger_binary};
use rcim_core::aig::BitMatrix;
use rcim_core::gen;
use rcim_core::Aig;

fn fixture(name: &str) -> Aig {
    load_circuit(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

/// Inputs a0, a1, b0, b1; outputs s0, s1, s2 of a + b.
fn check_adder2(g: &Aig) {
    assert_eq!((g.num_inputs(), g.num_outputs()), (4, 3));
    for v in 0..16usize {
        let bits: Vec<bool> = (0..4).map(|i| v >> i & 1 == 1).collect();
        let (a, b) = (v & 3, v >> 2);
        let s = a + b;
        let want: Vec<bool> = (0..3).map(|i| s >> i & 1 == 1).collect();
        assert_eq!(g.eval(&bits), want, "a={a} b={b}");
    }
}

#[test]
fn adder_fixtures_compute_the_sum() {
    for f in ["adder2.v", "adder2.aag", "adder2_deep.aag", "adder2_shallow.aag"] {
        check_adder2(&fixture(f));
    }
}

#[test]
fn two_synthesized_forms_differ_in_depth() {
    let a = fixture("adder2_deep.aag");
    let b = fixture("adder2_shallow.aag");
    assert_eq!((a.num_ands(), a.depth()), (16, 8));
    assert_eq!((b.num_ands(), b.depth()), (16, 6));
}

#[test]
fn full_adder_blif() {
    let g = fixture("fa.blif");
    for v in 0..8u32 {
        let bits: Vec<bool> = (0..3).map(|i| v >> i & 1 == 1).collect();
        let n = v.count_ones();
        assert_eq!(g.eval(&bits), [n & 1 == 1, n >= 2]);
    }
}

#[test]
fn verilog_and_aiger_agree() {
    let m = BitMatrix::exhaustive(4);
    let v = fixture("adder2.v");
    assert_eq!(v.simulate(&m).unwrap(), fixture("adder2.aag").simulate(&m).unwrap());
    assert_eq!(v.input_names()[3].as_deref(), Some("b1"));
    assert_eq!(v.output_names()[2].as_deref(), Some("s2"));
}

#[test]
fn unknown_extension_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.edif");
    std::fs::write(&p, "").unwrap();
    assert!(matches!(
        load_circuit(&p),
        Err(rcim::formats::LoadError::UnknownFormat { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aiger_round_trips(seed in any::<u64>(), inputs in 1usize..12, nodes in 0usize..150, outputs in 1usize..8) {
        let g = gen::random_aig(seed, inputs, nodes, outputs);
        let m = BitMatrix::exhaustive(g.num_inputs());
        let want = g.simulate(&m).unwrap();
        for bytes in [write_aiger_ascii(&g).into_bytes(), write_aiger_binary(&g)] {
            let h = parse_aiger(&bytes).unwrap();
            prop_assert_eq!(h.num_inputs(), g.num_inputs());
            prop_assert_eq!(h.simulate(&m).unwrap(), want.clone());
            prop_assert!(h.num_ands() <= g.num_ands());
        }
    }
}
