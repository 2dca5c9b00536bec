//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use rcim::exec::RayonExecutor;
use rcim::fixtures::measured;
use rcim::trend::{run_trend, Flag};
use rcim_core::cost::{check_fixture_identity, estimate_metrics, inductance, Calibration, CostOptions, ModelInput};
use rcim_core::explore::{explore, Constraints, ExploreOptions, Sequential};
use rcim_core::gen::{self, Benchmark};
use rcim_core::mapper::{place_and_schedule, validate_schedule, MapOptions};
use rcim_core::npn::NpnLibrary;
use rcim_core::sim::{run_schedule, test_vectors};
use rcim_core::techmap::{characterize, map_to_gates};
use rcim_core::topology::{min_memory_bits, Topology, KB_BITS};
use rcim_core::transforms::{apply_recipe_space, apply_transform, enumerate_recipes, sequential_map, TransformId};
use rcim_core::TopologyLibrary;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: &str, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let o = f();
    let dt = t0.elapsed();
    let in_time = limit.map_or(true, |l| dt < l);
    let pass = o.pass && in_time;
    let limit_text = limit.map_or(String::new(), |l| format!(" (limit {} s)", l.as_secs_f64()));
    println!(
        "{id} {} {title}: {} [{:.2} s{limit_text}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        dt.as_secs_f64()
    );
    pass
}

fn same_outputs(a: &rcim_core::Aig, b: &rcim_core::Aig, seed: u64) -> bool {
    let (v, _) = test_vectors(a.num_inputs(), 1000, seed);
    a.simulate(&v).unwrap() == b.simulate(&v).unwrap()
}

fn a1() -> Outcome {
    let sizes: Vec<usize> = (1..=4)
        .map(|s| enumerate_recipes(&TransformId::ALL[..s]).unwrap().len())
        .collect();
    let listed = [
        "ba", "rf", "rw", "ba,rf", "ba,rw", "rf,ba", "rf,rw", "rw,ba", "rw,rf", "ba,rf,rw", "ba,rw,rf", "rf,ba,rw",
        "rf,rw,ba", "rw,ba,rf", "rw,rf,ba",
    ];
    let want: BTreeSet<String> = listed.iter().map(|s| s.to_string()).collect();
    let s3 = enumerate_recipes(&[TransformId::Balance, TransformId::Refactor, TransformId::Rewrite]).unwrap();
    let got: BTreeSet<String> = s3.recipes().iter().map(ToString::to_string).collect();
    Outcome {
        pass: sizes == [1, 4, 15, 64] && got == want && s3.len() == 15,
        detail: format!("sizes {sizes:?}, three-option list matches: {}", got == want),
    }
}

fn a2(npn: &NpnLibrary) -> Outcome {
    let space = enumerate_recipes(&TransformId::ALL).unwrap();
    let fixtures = gen::fixture_set();
    let mut bad = Vec::new();
    let mut checks = 0;
    for (k, b) in fixtures.iter().enumerate() {
        let aigs = apply_recipe_space(&b.aig, &space, npn, sequential_map);
        for (r, h) in space.recipes().iter().zip(&aigs) {
            checks += 1;
            if !same_outputs(&b.aig, h, 0xa2 + k as u64) {
                bad.push(format!("{} under {r}", b.name));
            }
        }
    }
    Outcome {
        pass: bad.is_empty() && fixtures.len() >= 8,
        detail: format!(
            "{} recipes x {} circuits, {checks} checks, {} mismatches {:?}",
            space.len(),
            fixtures.len(),
            bad.len(),
            bad.first()
        ),
    }
}

fn a3(npn: &NpnLibrary) -> Outcome {
    let mut violations = Vec::new();
    for seed in 0..200u64 {
        let g = if seed % 4 == 3 {
            gen::planted_redundancy(seed, 8 + (seed % 7) as usize, 80 + (seed % 120) as usize)
        } else {
            gen::random_aig(
                seed,
                6 + (seed % 11) as usize,
                40 + (seed * 7 % 200) as usize,
                1 + (seed % 6) as usize,
            )
        };
        let (depth, size) = (g.depth(), g.live_and_count());
        for t in TransformId::ALL {
            let h = apply_transform(&g, t, npn);
            let ok = match t {
                TransformId::Balance => h.depth() <= depth,
                _ => h.live_and_count() <= size,
            };
            if !ok {
                violations.push(format!("seed {seed} {t}"));
            }
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!(
            "200 graphs x 4 passes, {} violations {:?}",
            violations.len(),
            violations.first()
        ),
    }
}

fn a4(lib: &TopologyLibrary) -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for b in gen::fixture_set() {
        let n = map_to_gates(&b.aig);
        let (v, _) = test_vectors(b.aig.num_inputs(), 1000, 0xa4);
        let want = b.aig.simulate(&v).unwrap();
        for t in lib.topologies() {
            for pipelined in [true, false] {
                runs += 1;
                let label = format!("{} on {} (pipelined {pipelined})", b.name, t.name());
                let s = match place_and_schedule(&n, t, MapOptions { pipelined }) {
                    Ok((_, s)) => s,
                    Err(e) => {
                        bad.push(format!("{label}: {e}"));
                        continue;
                    }
                };
                if !validate_schedule(&s, t).is_empty() {
                    bad.push(format!("{label}: invalid"));
                    continue;
                }
                match run_schedule(&s, t, &v) {
                    Ok(o) if o.outputs == want => {}
                    Ok(_) => bad.push(format!("{label}: mismatch")),
                    Err(e) => bad.push(format!("{label}: {e}")),
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{runs} schedules, {} failures {:?}", bad.len(), bad.first()),
    }
}

fn a5(lib: &TopologyLibrary, npn: &NpnLibrary, cal: &Calibration) -> Outcome {
    let opts = ExploreOptions {
        exhaustive: true,
        signoff: false,
        ..Default::default()
    };
    let mut n = 0;
    let mut bad = 0;
    for b in gen::fixture_set() {
        let r = explore(
            &b.name,
            &b.aig,
            lib,
            npn,
            cal,
            &Constraints::default(),
            &opts,
            &RayonExecutor,
        )
        .unwrap();
        for c in &r.candidates {
            n += 1;
            if c.total_bits < 4 * c.gates() {
                bad += 1;
            }
        }
    }
    let rule = min_memory_bits(128);
    Outcome {
        pass: bad == 0 && n > 0 && rule == 512,
        detail: format!("{n} candidates, {bad} undersized; 128 gates need {rule} bits"),
    }
}

fn a6() -> Outcome {
    let t = Topology::new(4 * KB_BITS, 1, 256, 128);
    let valid = t.validate().is_ok();
    Outcome {
        pass: valid && t.capacity() == 64,
        detail: format!("128 columns give {} ops per cycle", t.capacity()),
    }
}

fn a7() -> Outcome {
    let rows = measured();
    let checks = check_fixture_identity(&rows);
    let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    // Independent recomputation: mW x ns = pJ.
    let own_ok = rows
        .iter()
        .all(|r| ((r.power_mw * r.latency_ns * 1e-3) - r.energy_nj).abs() <= 0.02 * r.energy_nj);
    let m = rows
        .iter()
        .find(|r| r.benchmark == "Multiplier" && r.scenario == "worst")
        .unwrap();
    Outcome {
        pass: rows.len() == 18 && checks.iter().all(|c| !c.flagged) && own_ok,
        detail: format!(
            "18 rows, worst deviation {:.3}%; Multiplier worst {} mW x {} ns = {:.4} nJ vs {}",
            worst * 100.0,
            m.power_mw,
            m.latency_ns,
            m.power_mw * m.latency_ns * 1e-3,
            m.energy_nj
        ),
    }
}

fn a8(lib: &TopologyLibrary, cal: &Calibration) -> Outcome {
    let mut worst_e = 0.0f64;
    let mut worst_p = 0.0f64;
    let mut lat_bad = Vec::new();
    let circuits: Vec<Benchmark> = gen::fixture_set().into_iter().chain(gen::benchmark_set()).collect();
    for b in &circuits {
        let p = characterize(&map_to_gates(&b.aig), false);
        for kb in [4.0, 8.0, 16.0, 32.0] {
            let metric = |count: u32| {
                let t = lib
                    .topologies()
                    .iter()
                    .find(|t| t.macro_size_kb() == kb && t.macro_count == count)
                    .unwrap();
                estimate_metrics(ModelInput::Profile(&p), t, cal, CostOptions::default()).unwrap()
            };
            let (m1, m3, m6) = (metric(1), metric(3), metric(6));
            worst_e = worst_e.max((m3.energy_nj - m1.energy_nj).abs() / m1.energy_nj);
            worst_p = worst_p.max((m6.power_mw - 2.0 * m3.power_mw).abs() / (2.0 * m3.power_mw));
            if m3.latency_ns > m1.latency_ns || m6.latency_ns > m3.latency_ns {
                lat_bad.push(format!("{} at {kb} KB", b.name));
            }
        }
    }
    Outcome {
        pass: worst_e <= 0.01 && worst_p <= 0.05 && lat_bad.is_empty(),
        detail: format!(
            "{} circuits x 4 sizes: energy 3 vs 1 within {:.3}%, power 6 vs 2x3 within {:.2}%, latency order violations {}",
            circuits.len(),
            worst_e * 100.0,
            worst_p * 100.0,
            lat_bad.len()
        ),
    }
}

fn a9() -> Outcome {
    let mut worst = 0.0f64;
    let mut halves = true;
    for i in 0..1000 {
        let c = 1e-15 * 10f64.powf(6.0 * (i % 40) as f64 / 39.0);
        let f = 1e6 * 10f64.powf(4.0 * (i / 40) as f64 / 24.0);
        let l = inductance(c, f).unwrap();
        let w = 2.0 * std::f64::consts::PI * f;
        worst = worst.max((l * c - 1.0 / (w * w)).abs() * w * w);
        halves &= inductance(2.0 * c, f).unwrap() == l / 2.0;
    }
    Outcome {
        pass: worst <= 1e-12 && halves,
        detail: format!("1000 points, worst relative error {worst:.2e}, doubling C halves L: {halves}"),
    }
}

fn a10() -> Outcome {
    let adder = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/adder2.v");
    let adder = adder.to_str().unwrap();
    let run = |args: &[&str]| {
        let mut out = Vec::new();
        let code = rcim::cli::run(args.iter().copied(), &mut out, &mut std::io::sink());
        (code, out)
    };
    let mut same = true;
    for cfg in [
        vec!["rcim", "explore", adder],
        vec!["rcim", "explore", "gen:mux-8", "--exhaustive", "--format", "csv"],
        vec![
            "rcim",
            "explore",
            "gen:random-200b",
            "--mode",
            "scheduled",
            "--pipelined",
        ],
    ] {
        let (c1, a) = run(&cfg);
        let (c2, b) = run(&cfg);
        let mut jobs = cfg.clone();
        jobs.extend(["--jobs", "2"]);
        let (c3, c) = run(&jobs);
        same &= c1 == 0 && c2 == 0 && c3 == 0 && !a.is_empty() && a == b && a == c;
    }
    Outcome {
        pass: same,
        detail: format!("three configurations, repeat and thread-count runs byte-identical: {same}"),
    }
}

fn a11(lib: &TopologyLibrary, npn: &NpnLibrary, cal: &Calibration) -> Outcome {
    let g = gen::scale_fixture();
    let opts = ExploreOptions {
        exhaustive: true,
        ..Default::default()
    };
    let r = explore(
        "scale",
        &g,
        lib,
        npn,
        cal,
        &Constraints::default(),
        &opts,
        &RayonExecutor,
    )
    .unwrap();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let passed = r.signoff.as_ref().is_some_and(|s| s.passed);
    Outcome {
        pass: r.stats.n_recipes == 64 && r.stats.m_topologies == 12 && passed,
        detail: format!(
            "{} gates, {} recipes x {} topologies, {} candidates, winner sign-off {}, on {cores} core(s)",
            r.recipes[0].gates,
            r.stats.n_recipes,
            r.stats.m_topologies,
            r.stats.candidates,
            if passed { "pass" } else { "fail" }
        ),
    }
}

fn a12(lib: &TopologyLibrary, npn: &NpnLibrary, cal: &Calibration) -> Outcome {
    let opts = ExploreOptions {
        signoff: false,
        ..Default::default()
    };
    let (_, t) = run_trend(&gen::benchmark_set(), lib, npn, cal, &opts, &Sequential).unwrap();
    let parts: Vec<String> = t
        .comparisons
        .iter()
        .map(|c| {
            format!(
                "{}: {} vs {:.2}% [{}]",
                c.label,
                c.measured_pct.map_or("n/a".into(), |m| format!("{m:.2}%")),
                c.reference_pct,
                if c.flag == Flag::Green { "green" } else { "review" }
            )
        })
        .collect();
    // Informational: reported, never failed.
    Outcome {
        pass: t.comparisons.iter().all(|c| c.measured_pct.is_some()),
        detail: parts.join("; "),
    }
}

fn main() {
    let lib = TopologyLibrary::default_library();
    let npn = NpnLibrary::builtin();
    let cal = Calibration::default();
    let s = Duration::from_secs;
    let results = [
        check("A1", "recipe combinatorics", Some(s(1)), a1),
        check("A2", "transformation soundness", Some(s(60)), || a2(&npn)),
        check("A3", "monotone passes", Some(s(60)), || a3(&npn)),
        check("A4", "end-to-end sign-off", Some(s(300)), || a4(&lib)),
        check("A5", "sizing rule", None, || a5(&lib, &npn, &cal)),
        check("A6", "capacity rule", None, a6),
        check("A7", "fixture identity", Some(s(1)), a7),
        check("A8", "structural relations", Some(s(10)), || a8(&lib, &cal)),
        check("A9", "inductor law", Some(s(1)), a9),
        check("A10", "determinism", None, a10),
        check("A11", "scale", Some(s(60)), || a11(&lib, &npn, &cal)),
        check("A12", "trend report (informational)", None, || a12(&lib, &npn, &cal)),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
