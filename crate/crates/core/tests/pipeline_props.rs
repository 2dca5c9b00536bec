use proptest::prelude::*;
use rcim_core::aig::BitMatrix;
use rcim_core::cost::{
    estimate_metrics, idealized_activity, inductance, metrics_from_activity, scheduled_activity, Calibration,
    CostOptions, ModelInput,
};
use rcim_core::explore::{pareto_front, Candidate};
use rcim_core::gen;
use rcim_core::mapper::{place_and_schedule, validate_schedule, MapOptions};
use rcim_core::sim::run_schedule;
use rcim_core::techmap::{characterize, map_to_gates};
use rcim_core::topology::min_memory_bits;
use rcim_core::TopologyLibrary;

fn circuit() -> impl Strategy<Value = rcim_core::Aig> {
    (any::<u64>(), 3usize..10, 5usize..120, 1usize..6).prop_map(|(s, i, n, o)| gen::random_aig(s, i, n, o))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gate_mapping_preserves_function(g in circuit()) {
        let n = map_to_gates(&g);
        prop_assert!(n.validate().is_ok());
        let m = BitMatrix::exhaustive(g.num_inputs());
        prop_assert_eq!(n.simulate(&m).unwrap(), g.simulate(&m).unwrap());
        for fold in [false, true] {
            let p = characterize(&n, fold);
            prop_assert_eq!(p.gate_count(), n.num_gates() as u64);
        }
    }

    #[test]
    fn schedules_run_clean_everywhere(g in circuit(), pipelined in any::<bool>()) {
        let n = map_to_gates(&g);
        let m = BitMatrix::exhaustive(g.num_inputs());
        let want = g.simulate(&m).unwrap();
        for t in TopologyLibrary::default_library().topologies() {
            let (_, s) = place_and_schedule(&n, t, MapOptions { pipelined }).unwrap();
            let d = validate_schedule(&s, t);
            prop_assert!(d.is_empty(), "{}: {:?}", t.name(), d.first());
            let out = run_schedule(&s, t, &m).unwrap();
            prop_assert!(out.warnings.is_empty());
            prop_assert_eq!(&out.outputs, &want);
        }
    }

    #[test]
    fn scheduled_never_beats_idealized(g in circuit(), pipelined in any::<bool>()) {
        let n = map_to_gates(&g);
        let p = characterize(&n, false);
        let opts = CostOptions { pipelined };
        for t in TopologyLibrary::default_library().topologies() {
            let (_, s) = place_and_schedule(&n, t, MapOptions { pipelined }).unwrap();
            let ideal = idealized_activity(&p, t, opts);
            let sched = scheduled_activity(&s);
            prop_assert!(sched.cycles >= ideal.cycles, "{}: {} < {}", t.name(), sched.cycles, ideal.cycles);
            prop_assert_eq!(sched.ops, ideal.ops);
        }
    }

    #[test]
    fn metric_identities(g in circuit(), pipelined in any::<bool>()) {
        let cal = Calibration::default();
        let p = characterize(&map_to_gates(&g), false);
        for t in TopologyLibrary::default_library().topologies() {
            let m = estimate_metrics(ModelInput::Profile(&p), t, &cal, CostOptions { pipelined }).unwrap();
            let b = &m.breakdown;
            let sum = b.ops_nj + b.write_nj + b.macro_nj + b.control_nj;
            prop_assert!((sum - m.energy_nj).abs() <= 1e-9 * m.energy_nj.max(1e-12));
            prop_assert!((m.latency_ns - m.cycles as f64 * cal.period_ns()).abs() <= 1e-9 * m.latency_ns.max(1.0));
            if m.latency_ns > 0.0 {
                prop_assert!((m.power_mw - m.energy_nj / m.latency_ns * 1e3).abs() <= 1e-9 * m.power_mw);
            }
            prop_assert!(t.total_bits() >= min_memory_bits(p.gate_count().max(1)));
            let a = idealized_activity(&p, t, CostOptions { pipelined });
            prop_assert_eq!(metrics_from_activity(&a, t, &cal), m.clone());
        }
    }

    #[test]
    fn inductor_law(c in 1e-15f64..1e-9, f in 1e6f64..1e10) {
        let l = inductance(c, f).unwrap();
        let w = 2.0 * core::f64::consts::PI * f;
        prop_assert!((l * c * w * w - 1.0).abs() <= 1e-12);
        prop_assert_eq!(inductance(2.0 * c, f).unwrap(), l / 2.0);
    }

    #[test]
    fn pareto_members_are_undominated(pts in prop::collection::vec((1u32..20, 1u32..20, 1u32..4), 1..30)) {
        let cands: Vec<Candidate> = pts.iter().enumerate().map(|(i, &(e, l, a))| candidate(i, e as f64, l as f64, a as f64)).collect();
        let front = pareto_front(&cands);
        let key = |c: &Candidate| (c.metrics.energy_nj, c.metrics.latency_ns, c.metrics.area_proxy_kb);
        let dominates = |x: (f64, f64, f64), y: (f64, f64, f64)| x.0 <= y.0 && x.1 <= y.1 && x.2 <= y.2 && x != y;
        for (i, c) in cands.iter().enumerate() {
            let dominated = cands.iter().any(|d| dominates(key(d), key(c)));
            let dup_before = cands[..i].iter().any(|d| key(d) == key(c));
            prop_assert_eq!(front.contains(&i), !dominated && !dup_before);
        }
    }
}

fn candidate(i: usize, e: f64, l: f64, a: f64) -> Candidate {
    use rcim_core::cost::{EnergyBreakdown, Metrics};
    use rcim_core::explore::Selection;
    Candidate {
        recipe_index: i,
        recipe: format!("r{i}"),
        selection: Selection::Exhaustive,
        topology: "t".into(),
        macro_kb: a,
        macro_count: 1,
        total_bits: (a * 8192.0) as u64,
        levels: 1,
        nand: 1,
        nor: 0,
        not: 0,
        metrics: Metrics {
            cycles: 1,
            latency_ns: l,
            energy_nj: e,
            power_mw: e / l * 1e3,
            area_proxy_kb: a,
            breakdown: EnergyBreakdown::default(),
        },
        meets_constraints: true,
    }
}

#[test]
fn every_feasible_topology_maps_the_benchmarks() {
    use rcim_core::topology::feasible_topologies;
    let lib = TopologyLibrary::default_library();
    for b in gen::benchmark_set() {
        let n = map_to_gates(&b.aig);
        let (v, _) = rcim_core::sim::test_vectors(b.aig.num_inputs(), 256, 7);
        let want = b.aig.simulate(&v).unwrap();
        for t in feasible_topologies(n.num_gates() as u64, &lib).unwrap() {
            let (_, s) = place_and_schedule(&n, &t, MapOptions::default())
                .unwrap_or_else(|e| panic!("{} on {}: {e}", b.name, t.name()));
            assert_eq!(
                run_schedule(&s, &t, &v).unwrap().outputs,
                want,
                "{} on {}",
                b.name,
                t.name()
            );
        }
    }
}
