//! End-to-end exploration: optimize with every recipe, keep the AIGs with
//! the fewest gates and the fewest levels, evaluate them on every feasible
//! topology and pick the lowest energy configuration.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::aig::Aig;
use crate::cost::{
    estimate_metrics, size_inductor, Calibration, CostOptions, DegenerateError, InductorSpec, Metrics, Mode, ModelInput,
};
use crate::mapper::{place_and_schedule, MapOptions};
use crate::npn::NpnLibrary;
use crate::sim::{check_equivalence, EquivalenceReport};
use crate::techmap::{characterize, map_to_gates, GateNetlist, LevelProfile};
use crate::topology::{feasible_topologies, InfeasibleError, Topology, TopologyLibrary};
use crate::transforms::{apply_recipe_space, enumerate_recipes, RecipeError, TransformId};

/// Runs independent work items; results come back in index order.
pub trait Executor: Sync {
    fn run<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        (0..n).map(f).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constraints {
    pub max_latency_ns: Option<f64>,
    pub max_bits: Option<u64>,
}

impl Constraints {
    pub fn admits(&self, c: &Candidate) -> bool {
        self.max_latency_ns.map_or(true, |l| c.metrics.latency_ns <= l)
            && self.max_bits.map_or(true, |b| c.total_bits <= b)
    }

    /// Summed relative overshoot; zero when admitted.
    fn violation(&self, c: &Candidate) -> f64 {
        let over = |v: f64, lim: f64| {
            if v <= lim {
                0.0
            } else if lim > 0.0 {
                (v - lim) / lim
            } else {
                1.0 + v
            }
        };
        self.max_latency_ns.map_or(0.0, |l| over(c.metrics.latency_ns, l))
            + self.max_bits.map_or(0.0, |b| over(c.total_bits as f64, b as f64))
    }
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub transforms: Vec<TransformId>,
    pub mode: Mode,
    pub pipelined: bool,
    pub fold_not: bool,
    /// Evaluate every recipe on every topology instead of the two selected AIGs.
    pub exhaustive: bool,
    /// Map and simulate the winner.
    pub signoff: bool,
    pub vectors: usize,
    pub seed: u64,
    /// Resonant frequency for inductor sizing; the clock when unset.
    pub f_res: Option<f64>,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            transforms: TransformId::ALL.to_vec(),
            mode: Mode::Idealized,
            pipelined: false,
            fold_not: false,
            exhaustive: false,
            signoff: true,
            vectors: 1000,
            seed: 0x5eed_2024,
            f_res: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RecipeResult {
    pub index: usize,
    pub recipe: String,
    pub ands: usize,
    pub nand: u64,
    pub nor: u64,
    pub not: u64,
    pub gates: u64,
    pub levels: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Selection {
    MinGates,
    MinLevels,
    Both,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Candidate {
    pub recipe_index: usize,
    pub recipe: String,
    pub selection: Selection,
    pub topology: String,
    pub macro_kb: f64,
    pub macro_count: u32,
    pub total_bits: u64,
    pub levels: u32,
    pub nand: u64,
    pub nor: u64,
    pub not: u64,
    pub metrics: Metrics,
    pub meets_constraints: bool,
}

impl Candidate {
    pub fn gates(&self) -> u64 {
        self.nand + self.nor + self.not
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Rejected {
    pub recipe_index: usize,
    pub topology: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SignOff {
    pub cycles: usize,
    pub passed: bool,
    pub vectors: usize,
    pub exhaustive: bool,
    pub mismatches: usize,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Stats {
    /// Recipes applied.
    pub n_recipes: usize,
    /// Topologies in the library.
    pub m_topologies: usize,
    /// Deepest characterized AIG.
    pub max_depth: u32,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExplorationReport {
    pub circuit: String,
    pub inputs: usize,
    pub outputs: usize,
    pub mode: Mode,
    pub pipelined: bool,
    pub constraints: Constraints,
    pub recipes: Vec<RecipeResult>,
    pub min_gates: usize,
    pub min_levels: usize,
    pub candidates: Vec<Candidate>,
    pub rejected: Vec<Rejected>,
    /// Index into `candidates`.
    pub best: usize,
    /// Indices into `candidates`, non-dominated in (energy, latency, area).
    pub pareto: Vec<usize>,
    pub inductor: InductorSpec,
    pub signoff: Option<SignOff>,
    pub stats: Stats,
}

impl ExplorationReport {
    pub fn winner(&self) -> &Candidate {
        &self.candidates[self.best]
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExploreError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Infeasible(#[from] InfeasibleError),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error(transparent)]
    Degenerate(#[from] DegenerateError),
    #[error("empty topology library")]
    EmptyLibrary,
    #[error("no candidate could be evaluated: {0}")]
    NoCandidates(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("no candidate meets the constraints{}", nearest_text(.nearest))]
pub struct ConstraintError {
    pub nearest: Option<Box<Candidate>>,
}

fn nearest_text(n: &Option<Box<Candidate>>) -> String {
    match n {
        Some(c) => format!(
            "; nearest is {} on {} at {} ns, {} bits",
            c.recipe, c.topology, c.metrics.latency_ns, c.total_bits
        ),
        None => String::new(),
    }
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.metrics
        .energy_nj
        .total_cmp(&b.metrics.energy_nj)
        .then(a.metrics.latency_ns.total_cmp(&b.metrics.latency_ns))
        .then(a.metrics.area_proxy_kb.total_cmp(&b.metrics.area_proxy_kb))
}

/// Index of the lowest energy candidate that meets `constraints`; ties go
/// to lower latency, then smaller area, then earlier position.
pub fn select_best(candidates: &[Candidate], constraints: &Constraints) -> Result<usize, ConstraintError> {
    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| constraints.admits(c))
        .min_by(|(i, a), (j, b)| rank(a, b).then(i.cmp(j)))
        .map(|(i, _)| i);
    best.ok_or_else(|| ConstraintError {
        nearest: candidates
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| {
                constraints
                    .violation(a)
                    .total_cmp(&constraints.violation(b))
                    .then(rank(a, b))
                    .then(i.cmp(j))
            })
            .map(|(_, c)| Box::new(c.clone())),
    })
}

fn dominates(a: &Metrics, b: &Metrics) -> bool {
    let le = a.energy_nj <= b.energy_nj && a.latency_ns <= b.latency_ns && a.area_proxy_kb <= b.area_proxy_kb;
    let lt = a.energy_nj < b.energy_nj || a.latency_ns < b.latency_ns || a.area_proxy_kb < b.area_proxy_kb;
    le && lt
}

/// Non-dominated candidates over (energy, latency, area); of several with
/// identical metrics only the first is kept.
pub fn pareto_front(candidates: &[Candidate]) -> Vec<usize> {
    let mut out = Vec::new();
    'outer: for (i, c) in candidates.iter().enumerate() {
        for (j, d) in candidates.iter().enumerate() {
            if dominates(&d.metrics, &c.metrics) {
                continue 'outer;
            }
            let same = d.metrics.energy_nj == c.metrics.energy_nj
                && d.metrics.latency_ns == c.metrics.latency_ns
                && d.metrics.area_proxy_kb == c.metrics.area_proxy_kb;
            if same && j < i {
                continue 'outer;
            }
        }
        out.push(i);
    }
    out
}

struct Optimized {
    aig: Aig,
    netlist: GateNetlist,
    profile: LevelProfile,
}

/// Runs the full flow on `g`.
pub fn explore<E: Executor>(
    name: &str,
    g: &Aig,
    lib: &TopologyLibrary,
    npn: &NpnLibrary,
    cal: &Calibration,
    constraints: &Constraints,
    opts: &ExploreOptions,
    exec: &E,
) -> Result<ExplorationReport, ExploreError> {
    if lib.is_empty() {
        return Err(ExploreError::EmptyLibrary);
    }
    let space = enumerate_recipes(&opts.transforms)?;
    let aigs = apply_recipe_space(g, &space, npn, |f, n| exec.run(n, f));
    let optimized: Vec<Optimized> = exec.run(aigs.len(), &|i| {
        let netlist = map_to_gates(&aigs[i]);
        let profile = characterize(&netlist, opts.fold_not);
        Optimized {
            aig: aigs[i].clone(),
            netlist,
            profile,
        }
    });
    drop(aigs);

    let recipes: Vec<RecipeResult> = optimized
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let t = o.profile.totals();
            RecipeResult {
                index: i,
                recipe: space.recipes()[i].to_string(),
                ands: o.aig.num_ands(),
                nand: t[0],
                nor: t[1],
                not: t[2],
                gates: o.profile.gate_count(),
                levels: o.profile.depth() as u32,
            }
        })
        .collect();
    let min_gates = (0..recipes.len())
        .min_by_key(|&i| (recipes[i].gates, recipes[i].levels, i))
        .expect("recipes non-empty");
    let min_levels = (0..recipes.len())
        .min_by_key(|&i| (recipes[i].levels, recipes[i].gates, i))
        .expect("recipes non-empty");

    let selected: Vec<(usize, Selection)> = if opts.exhaustive {
        (0..recipes.len()).map(|i| (i, Selection::Exhaustive)).collect()
    } else if min_gates == min_levels {
        alloc::vec![(min_gates, Selection::Both)]
    } else {
        alloc::vec![(min_gates, Selection::MinGates), (min_levels, Selection::MinLevels)]
    };

    let mut jobs: Vec<(usize, Selection, Topology)> = Vec::new();
    for &(r, sel) in &selected {
        // Even an empty circuit needs somewhere to live.
        let need = optimized[r].profile.gate_count().max(1);
        for t in feasible_topologies(need, lib)? {
            jobs.push((r, sel, t));
        }
    }
    let cost_opts = CostOptions {
        pipelined: opts.pipelined,
    };
    let evaluated: Vec<Result<Candidate, Rejected>> = exec.run(jobs.len(), &|k| {
        let (r, sel, ref t) = jobs[k];
        let o = &optimized[r];
        let reject = |reason: String| Rejected {
            recipe_index: r,
            topology: t.name(),
            reason,
        };
        let metrics = match opts.mode {
            Mode::Idealized => estimate_metrics(ModelInput::Profile(&o.profile), t, cal, cost_opts),
            Mode::Scheduled => {
                let (_, s) = place_and_schedule(
                    &o.netlist,
                    t,
                    MapOptions {
                        pipelined: opts.pipelined,
                    },
                )
                .map_err(|e| reject(format!("{e}")))?;
                estimate_metrics(ModelInput::Schedule(&s), t, cal, cost_opts)
            }
        }
        .map_err(|e| reject(format!("{e}")))?;
        let rr = &recipes[r];
        let mut c = Candidate {
            recipe_index: r,
            recipe: rr.recipe.clone(),
            selection: sel,
            topology: t.name(),
            macro_kb: t.macro_size_kb(),
            macro_count: t.macro_count,
            total_bits: t.total_bits(),
            levels: rr.levels,
            nand: rr.nand,
            nor: rr.nor,
            not: rr.not,
            metrics,
            meets_constraints: false,
        };
        c.meets_constraints = constraints.admits(&c);
        Ok(c)
    });
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    for e in evaluated {
        match e {
            Ok(c) => candidates.push(c),
            Err(r) => rejected.push(r),
        }
    }
    if candidates.is_empty() {
        return Err(ExploreError::NoCandidates(
            rejected.first().map(|r| r.reason.clone()).unwrap_or_default(),
        ));
    }
    let best = select_best(&candidates, constraints)?;
    let pareto = pareto_front(&candidates);

    let win = &candidates[best];
    let topo = lib.find(&win.topology).expect("candidate topology is in the library");
    let inductor = size_inductor(topo, cal, opts.f_res.unwrap_or(cal.clock_hz))?;

    let signoff = opts.signoff.then(|| {
        let o = &optimized[win.recipe_index];
        match place_and_schedule(
            &o.netlist,
            topo,
            MapOptions {
                pipelined: opts.pipelined,
            },
        ) {
            Ok((_, s)) => {
                let r: EquivalenceReport = check_equivalence(&o.aig, &s, topo, opts.vectors, opts.seed);
                // The optimized AIG must also match the input circuit.
                let orig = check_equivalence(g, &s, topo, opts.vectors, opts.seed);
                SignOff {
                    cycles: r.cycles,
                    passed: r.passed() && orig.passed(),
                    vectors: r.vectors,
                    exhaustive: r.exhaustive,
                    mismatches: r.mismatch_count.max(orig.mismatch_count),
                    detail: r.diagnostics.first().or(orig.diagnostics.first()).cloned(),
                }
            }
            Err(e) => SignOff {
                cycles: 0,
                passed: false,
                vectors: 0,
                exhaustive: false,
                mismatches: 0,
                detail: Some(format!("{e}")),
            },
        }
    });

    let stats = Stats {
        n_recipes: recipes.len(),
        m_topologies: lib.len(),
        max_depth: recipes.iter().map(|r| r.levels).max().unwrap_or(0),
        candidates: candidates.len(),
    };
    Ok(ExplorationReport {
        circuit: name.into(),
        inputs: g.num_inputs(),
        outputs: g.num_outputs(),
        mode: opts.mode,
        pipelined: opts.pipelined,
        constraints: *constraints,
        recipes,
        min_gates,
        min_levels,
        candidates,
        rejected,
        best,
        pareto,
        inductor,
        signoff,
        stats,
    })
}

/// Average relative energy saving of topology family `b` over family `a`
/// (by macro count) at equal macro size, over every report in which both
/// appear for the same recipe.
pub fn family_saving(reports: &[ExplorationReport], a: u32, b: u32) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in reports {
        for x in r.candidates.iter().filter(|c| c.macro_count == a) {
            if let Some(y) = r
                .candidates
                .iter()
                .find(|c| c.macro_count == b && c.recipe_index == x.recipe_index && c.macro_kb == x.macro_kb)
            {
                if x.metrics.energy_nj > 0.0 {
                    sum += 1.0 - y.metrics.energy_nj / x.metrics.energy_nj;
                    n += 1;
                }
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::EnergyBreakdown;
    use crate::gen;

    fn cand(i: usize, e: f64, l: f64, a: f64) -> Candidate {
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
    fn tie_breaks() {
        let cs = [cand(0, 1.0, 3.0, 4.0), cand(1, 1.0, 2.0, 8.0), cand(2, 1.0, 2.0, 4.0)];
        assert_eq!(select_best(&cs, &Constraints::default()).unwrap(), 2);
        assert_eq!(select_best(&cs[..1], &Constraints::default()).unwrap(), 0);
        let dup = [cand(0, 1.0, 1.0, 1.0), cand(1, 1.0, 1.0, 1.0)];
        assert_eq!(select_best(&dup, &Constraints::default()).unwrap(), 0);
    }

    #[test]
    fn planted_optimum_among_24() {
        let mut cs: Vec<Candidate> = (0..24)
            .map(|i| cand(i, 2.0 + (i * 7 % 24) as f64, 1.0 + i as f64, 4.0))
            .collect();
        cs[17].metrics.energy_nj = 0.5;
        assert_eq!(select_best(&cs, &Constraints::default()).unwrap(), 17);
        // Same planted optimum behind a latency cap that excludes it.
        let c = Constraints {
            max_latency_ns: Some(10.0),
            max_bits: None,
        };
        let want = (0..24)
            .filter(|&i| cs[i].metrics.latency_ns <= 10.0)
            .min_by(|&i, &j| cs[i].metrics.energy_nj.total_cmp(&cs[j].metrics.energy_nj))
            .unwrap();
        assert_eq!(select_best(&cs, &c).unwrap(), want);
    }

    #[test]
    fn unsatisfiable_reports_nearest() {
        let cs = [cand(0, 1.0, 3.0, 4.0), cand(1, 2.0, 2.0, 4.0)];
        let c = Constraints {
            max_latency_ns: Some(0.0),
            max_bits: None,
        };
        let e = select_best(&cs, &c).unwrap_err();
        assert_eq!(e.nearest.unwrap().recipe_index, 1);
    }

    #[test]
    fn pareto_is_non_dominated() {
        let cs = [
            cand(0, 1.0, 5.0, 4.0),
            cand(1, 2.0, 2.0, 4.0),
            cand(2, 3.0, 3.0, 4.0),
            cand(3, 1.0, 5.0, 4.0),
        ];
        assert_eq!(pareto_front(&cs), [0, 1]);
    }

    #[test]
    fn adder_end_to_end() {
        let g = gen::adder(2);
        let lib = TopologyLibrary::default_library();
        let npn = NpnLibrary::builtin();
        let r = explore(
            "adder-2",
            &g,
            &lib,
            &npn,
            &Calibration::default(),
            &Constraints::default(),
            &ExploreOptions::default(),
            &Sequential,
        )
        .unwrap();
        assert_eq!(r.recipes.len(), 64);
        assert!(r.candidates.len() <= 24 && r.candidates.len() >= 12);
        let s = r.signoff.as_ref().unwrap();
        assert!(s.passed && s.exhaustive, "{s:?}");
        for c in &r.candidates {
            assert!(c.total_bits >= 4 * c.gates());
        }
    }

    #[test]
    fn buffer_uses_the_floor() {
        let g = gen::buffer(3);
        let lib = TopologyLibrary::default_library();
        let r = explore(
            "buffer",
            &g,
            &lib,
            &NpnLibrary::builtin(),
            &Calibration::default(),
            &Constraints::default(),
            &ExploreOptions::default(),
            &Sequential,
        )
        .unwrap();
        assert_eq!(r.winner().gates(), 0);
        assert!(r.signoff.unwrap().passed);
    }

    #[test]
    fn zero_latency_is_unsatisfiable() {
        let g = gen::adder(2);
        let c = Constraints {
            max_latency_ns: Some(0.0),
            max_bits: None,
        };
        let e = explore(
            "adder-2",
            &g,
            &TopologyLibrary::default_library(),
            &NpnLibrary::builtin(),
            &Calibration::default(),
            &c,
            &ExploreOptions::default(),
            &Sequential,
        )
        .unwrap_err();
        assert!(matches!(
            e,
            ExploreError::Constraint(ConstraintError { nearest: Some(_) })
        ));
    }
}
