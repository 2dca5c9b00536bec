//! Command-line front end. Each subcommand loads its inputs, calls one
//! pipeline stage and renders the result.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rcim_core::cost::{
    calibrate, check_fixture_identity, estimate_metrics, Calibration, CalibrationError, CostOptions, Mode, ModelInput,
};
use rcim_core::explore::{explore, Constraints, ExploreError, ExploreOptions};
use rcim_core::mapper::{place_and_schedule, MapError, MapOptions};
use rcim_core::npn::{generate_library, NpnLibrary};
use rcim_core::sim::check_equivalence;
use rcim_core::techmap::{characterize, map_to_gates, LevelProfile};
use rcim_core::topology::{feasible_topologies, InfeasibleError, Topology};
use rcim_core::transforms::{apply_recipe, enumerate_recipes, Recipe, RecipeError, TransformId};
use rcim_core::{gen, Aig, TopologyLibrary};
use serde::Serialize;

use crate::config::{calibration_to_toml, resolve_calibration, resolve_library, ConfigError};
use crate::exec::{pool, RayonExecutor};
use crate::fixtures::{measured, parse_fixtures, FixtureError};
use crate::formats::{load_circuit, write_aiger_ascii, write_aiger_binary, LoadError};
use crate::report::{self, Format};
use crate::trend;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Parser, Debug)]
#[command(
    name = "rcim",
    version,
    about = "Topology exploration for resonant compute-in-memory SRAM caches"
)]
pub struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report errors on standard error as JSON.
    #[arg(long, global = true)]
    pub error_json: bool,
    /// Write data to this file instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Topology library (TOML). Falls back to $RCIM_LIBRARY, then the
    /// built-in library.
    #[arg(long, global = true)]
    pub library: Option<PathBuf>,
    /// Calibration file (TOML).
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CircuitArgs {
    /// Circuit file (.aag, .aig, .v, .blif) or `gen:NAME`.
    pub input: String,
    /// Recipe applied first, e.g. `ba,rw,rs`.
    #[arg(long, value_parser = parse_recipe)]
    pub recipe: Option<Recipe>,
}

#[derive(Args, Debug, Clone)]
pub struct TargetArgs {
    /// Topology name such as `8KBx3`; the smallest feasible one if omitted.
    #[arg(long)]
    pub topology: Option<String>,
    /// Serialize writes after computes instead of overlapping them.
    #[arg(long)]
    pub no_pipeline: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Idealized,
    Scheduled,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Idealized => Mode::Idealized,
            ModeArg::Scheduled => Mode::Scheduled,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply a recipe; writes AIGER and prints the level profile.
    Synth {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// AIGER output (.aag ASCII, .aig binary).
        #[arg(long)]
        aiger: Option<PathBuf>,
    },
    /// Per-level NAND2/NOR2/NOT histogram.
    Characterize {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        fold_not: bool,
    },
    /// Place and schedule on one topology.
    Map {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Map, execute and compare against the circuit.
    Simulate {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 1000)]
        vectors: usize,
    },
    /// Energy, latency and power on one topology.
    Estimate {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        topology: Option<String>,
        #[arg(long, value_enum, default_value = "idealized")]
        mode: ModeArg,
        #[arg(long)]
        pipelined: bool,
        #[arg(long)]
        fold_not: bool,
    },
    /// Fit the calibration to measured results.
    Calibrate {
        /// CSV of measured rows; the shipped table when omitted.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        pipelined: bool,
        /// Also write the fitted calibration as TOML.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Search recipes and topologies for the best implementation.
    Explore {
        /// Circuit file or `gen:NAME`.
        input: String,
        /// Transform options, e.g. `ba,rf,rw`.
        #[arg(long, value_parser = parse_options, default_value = "ba,rf,rw,rs")]
        options: Options,
        #[arg(long)]
        max_latency_ns: Option<f64>,
        #[arg(long)]
        max_bits: Option<u64>,
        #[arg(long, value_enum, default_value = "idealized")]
        mode: ModeArg,
        #[arg(long)]
        pipelined: bool,
        /// Every recipe on every topology.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        fold_not: bool,
        /// Skip mapping and simulating the winner.
        #[arg(long)]
        no_signoff: bool,
        #[arg(long, default_value_t = 1000)]
        vectors: usize,
        /// Resonant frequency in Hz (default: the clock).
        #[arg(long)]
        f_res: Option<f64>,
    },
    /// List the recipe space.
    Recipes {
        #[arg(long, value_parser = parse_options, default_value = "ba,rf,rw,rs")]
        options: Options,
    },
    /// Family energy comparisons over the benchmark set.
    Trend {
        #[arg(long)]
        pipelined: bool,
    },
    /// Write a generated circuit as AIGER.
    Generate {
        /// Circuit name, e.g. `adder-8`; `list` prints the names.
        name: String,
    },
    /// Regenerate the rewriting library.
    GenNpn {
        #[arg(long, default_value_t = 6)]
        stored: usize,
        #[arg(long, default_value_t = 2)]
        extra: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Options(pub Vec<TransformId>);

fn parse_options(s: &str) -> Result<Options, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse::<TransformId>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(Options)
}

fn parse_recipe(s: &str) -> Result<Recipe, String> {
    s.parse().map_err(|e: RecipeError| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fixtures(#[from] FixtureError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Infeasible(#[from] InfeasibleError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error("unknown topology `{name}`; available: {available}")]
    UnknownTopology { name: String, available: String },
    #[error("unknown generated circuit `{0}` (try `rcim generate list`)")]
    UnknownCircuit(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Usage(String),
    #[error("equivalence check failed: {0} mismatching vector(s)")]
    Mismatch(usize),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Load(_) => "load",
            CliError::Config(_) => "config",
            CliError::Fixtures(_) => "fixtures",
            CliError::Explore(ExploreError::Constraint(_)) => "constraint",
            CliError::Explore(_) => "explore",
            CliError::Map(_) => "map",
            CliError::Infeasible(_) => "infeasible",
            CliError::Calibration(_) => "calibration",
            CliError::Recipe(_) => "recipe",
            CliError::UnknownTopology { .. } => "unknown-topology",
            CliError::UnknownCircuit(_) => "unknown-circuit",
            CliError::Output(_) => "output",
            CliError::Usage(_) => "usage",
            CliError::Mismatch(_) => "mismatch",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Data goes to `out` or the `-o` file, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let error_json = cli.error_json;
    match execute(&cli) {
        Ok(data) => match write_output(cli.output.as_deref(), &data, out) {
            Ok(()) => 0,
            Err(e) => report_error(&e, error_json, err),
        },
        Err((e, data)) => {
            if let Some(d) = data {
                let _ = write_output(cli.output.as_deref(), &d, out);
            }
            report_error(&e, error_json, err)
        }
    }
}

fn report_error(e: &CliError, json: bool, err: &mut dyn Write) -> i32 {
    let code = e.exit_code();
    if json {
        let j = ErrorJson {
            error: e.kind(),
            message: e.to_string(),
            exit_code: code,
        };
        let _ = writeln!(err, "{}", serde_json::to_string(&j).expect("plain strings"));
    } else {
        let _ = writeln!(err, "error: {e}");
    }
    code
}

fn write_output(path: Option<&Path>, data: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, data).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => out.write_all(data).map_err(|e| CliError::Output(e.to_string())),
    }
}

/// Data bytes on success; on failure the error and any partial data (such
/// as a failing equivalence report).
type Outcome = Result<Vec<u8>, (CliError, Option<Vec<u8>>)>;

fn execute(cli: &Cli) -> Outcome {
    let threads = pool(cli.jobs).map_err(|e| (CliError::Usage(format!("--jobs: {e}")), None))?;
    threads.install(|| dispatch(cli))
}

fn fail<E: Into<CliError>>(e: E) -> (CliError, Option<Vec<u8>>) {
    (e.into(), None)
}

/// Circuits known by name to `gen:NAME` and `generate`.
pub fn generated_circuit(name: &str) -> Option<Aig> {
    if name == "scale" {
        return Some(gen::scale_fixture());
    }
    if let Some(b) = gen::benchmark_set()
        .into_iter()
        .chain(gen::fixture_set())
        .find(|b| b.name == name)
    {
        return Some(b.aig);
    }
    let (family, n) = name.rsplit_once('-')?;
    let n: usize = n.parse().ok()?;
    match family {
        "adder" if (1..=256).contains(&n) => Some(gen::adder(n)),
        "multiplier" if (1..=32).contains(&n) => Some(gen::multiplier(n)),
        "square" if (1..=32).contains(&n) => Some(gen::square(n)),
        "buffer" if (1..=4096).contains(&n) => Some(gen::buffer(n)),
        "divisor" if (1..=16).contains(&n) => Some(gen::divider(n)),
        "mux" if (1..=10).contains(&n) => Some(gen::mux_tree(n)),
        _ => None,
    }
}

pub fn generated_names() -> Vec<String> {
    let mut v: Vec<String> = gen::benchmark_set()
        .into_iter()
        .chain(gen::fixture_set())
        .map(|b| b.name)
        .collect();
    v.push("scale".into());
    v
}

/// Loads a circuit path or `gen:NAME`, returning a display name too.
pub fn load_input(input: &str) -> Result<(String, Aig), CliError> {
    if let Some(name) = input.strip_prefix("gen:") {
        let g = generated_circuit(name).ok_or_else(|| CliError::UnknownCircuit(name.to_string()))?;
        return Ok((name.to_string(), g));
    }
    let p = Path::new(input);
    let g = load_circuit(p)?;
    let name = p
        .file_stem()
        .map_or_else(|| input.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, g))
}

fn prepared(c: &CircuitArgs) -> Result<(String, Aig), CliError> {
    let (name, g) = load_input(&c.input)?;
    let g = match &c.recipe {
        Some(r) => apply_recipe(&g, r, &NpnLibrary::builtin()),
        None => g,
    };
    Ok((name, g))
}

fn pick_topology(lib: &TopologyLibrary, name: Option<&str>, gates: u64) -> Result<Topology, CliError> {
    match name {
        Some(n) => lib.find(n).cloned().ok_or_else(|| CliError::UnknownTopology {
            name: n.to_string(),
            available: lib
                .topologies()
                .iter()
                .map(Topology::name)
                .collect::<Vec<_>>()
                .join(", "),
        }),
        None => {
            let mut f = feasible_topologies(gates.max(1), lib)?;
            f.sort_by(|a, b| {
                a.total_bits()
                    .cmp(&b.total_bits())
                    .then(a.macro_count.cmp(&b.macro_count))
            });
            Ok(f.swap_remove(0))
        }
    }
}

#[derive(Serialize)]
struct LevelRow {
    level: usize,
    nand2: u64,
    nor2: u64,
    not: u64,
}

fn profile_rows(p: &LevelProfile) -> Vec<LevelRow> {
    (1..=p.depth())
        .map(|l| {
            let [nand2, nor2, not] = p.level(l);
            LevelRow {
                level: l,
                nand2,
                nor2,
                not,
            }
        })
        .collect()
}

fn profile_text(p: &LevelProfile) -> String {
    let [a, b, c] = p.totals();
    let mut s = format!("{} levels, {} NAND2, {} NOR2, {} NOT\n", p.depth(), a, b, c);
    for r in profile_rows(p) {
        s.push_str(&format!(
            "level {:>4}: {:>6} {:>6} {:>6}\n",
            r.level, r.nand2, r.nor2, r.not
        ));
    }
    s
}

fn render_profile(p: &LevelProfile, f: Format) -> String {
    match f {
        Format::Json => report::json(p),
        Format::Csv => report::csv_rows(&profile_rows(p)),
        Format::Text => profile_text(p),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let fmt = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Synth { circuit, aiger } => {
            let (_, g) = prepared(circuit).map_err(fail)?;
            if let Some(p) = aiger {
                crate::formats::save_aiger(&g, p)
                    .map_err(|e| fail(CliError::Output(format!("{}: {e}", p.display()))))?;
            }
            let p = characterize(&map_to_gates(&g), false);
            #[derive(Serialize)]
            struct Synth<'a> {
                recipe: Option<String>,
                ands: usize,
                aig_levels: u32,
                profile: &'a LevelProfile,
            }
            let s = Synth {
                recipe: circuit.recipe.as_ref().map(ToString::to_string),
                ands: g.live_and_count(),
                aig_levels: g.depth(),
                profile: &p,
            };
            Ok(match fmt {
                Format::Json => report::json(&s),
                Format::Csv => report::csv_rows(&profile_rows(&p)),
                Format::Text => format!("{} ANDs, depth {}\n{}", s.ands, s.aig_levels, profile_text(&p)),
            }
            .into_bytes())
        }
        Command::Characterize { circuit, fold_not } => {
            let (_, g) = prepared(circuit).map_err(fail)?;
            let p = characterize(&map_to_gates(&g), *fold_not);
            Ok(render_profile(&p, fmt).into_bytes())
        }
        Command::Map { circuit, target } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let (_, g) = prepared(circuit).map_err(fail)?;
            let n = map_to_gates(&g);
            let t = pick_topology(&lib, target.topology.as_deref(), n.num_gates() as u64).map_err(fail)?;
            let (_, s) = place_and_schedule(
                &n,
                &t,
                MapOptions {
                    pipelined: !target.no_pipeline,
                },
            )
            .map_err(fail)?;
            Ok(match fmt {
                Format::Json => report::json(&s),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct CycleRow {
                        cycle: usize,
                        computes: usize,
                        ops: usize,
                        writes: usize,
                        written_bits: usize,
                    }
                    let rows: Vec<CycleRow> = s
                        .cycles
                        .iter()
                        .enumerate()
                        .map(|(i, c)| CycleRow {
                            cycle: i,
                            computes: c.computes.len(),
                            ops: c.computes.iter().map(|k| k.lanes.len()).sum(),
                            writes: c.writes.len(),
                            written_bits: c.writes.iter().map(|w| w.entries.len()).sum(),
                        })
                        .collect();
                    report::csv_rows(&rows)
                }
                Format::Text => s.to_text(),
            }
            .into_bytes())
        }
        Command::Simulate {
            circuit,
            target,
            vectors,
        } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let (_, g) = prepared(circuit).map_err(fail)?;
            let n = map_to_gates(&g);
            let t = pick_topology(&lib, target.topology.as_deref(), n.num_gates() as u64).map_err(fail)?;
            let (_, s) = place_and_schedule(
                &n,
                &t,
                MapOptions {
                    pipelined: !target.no_pipeline,
                },
            )
            .map_err(fail)?;
            let r = check_equivalence(&g, &s, &t, *vectors, cli.seed);
            let data = match fmt {
                Format::Json => report::json(&r),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        topology: String,
                        vectors: usize,
                        exhaustive: bool,
                        cycles: usize,
                        mismatches: usize,
                        diagnostics: usize,
                        passed: bool,
                    }
                    report::csv_rows(&[Row {
                        topology: t.name(),
                        vectors: r.vectors,
                        exhaustive: r.exhaustive,
                        cycles: r.cycles,
                        mismatches: r.mismatch_count,
                        diagnostics: r.diagnostics.len(),
                        passed: r.passed(),
                    }])
                }
                Format::Text => format!(
                    "{} on {}: {} vectors{}, {} cycles, {} mismatches, {} diagnostics\n",
                    if r.passed() { "pass" } else { "FAIL" },
                    t.name(),
                    r.vectors,
                    if r.exhaustive { " (exhaustive)" } else { "" },
                    r.cycles,
                    r.mismatch_count,
                    r.diagnostics.len()
                ),
            }
            .into_bytes();
            if r.passed() {
                Ok(data)
            } else {
                Err((
                    CliError::Mismatch(r.mismatch_count.max(r.diagnostics.len())),
                    Some(data),
                ))
            }
        }
        Command::Estimate {
            circuit,
            topology,
            mode,
            pipelined,
            fold_not,
        } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let cal = resolve_calibration(cli.calibration.as_deref()).map_err(fail)?;
            let (_, g) = prepared(circuit).map_err(fail)?;
            let n = map_to_gates(&g);
            let t = pick_topology(&lib, topology.as_deref(), n.num_gates() as u64).map_err(fail)?;
            let opts = CostOptions { pipelined: *pipelined };
            let m = match Mode::from(*mode) {
                Mode::Idealized => {
                    let p = characterize(&n, *fold_not);
                    estimate_metrics(ModelInput::Profile(&p), &t, &cal, opts).map_err(fail)?
                }
                Mode::Scheduled => {
                    let (_, s) = place_and_schedule(&n, &t, MapOptions { pipelined: *pipelined }).map_err(fail)?;
                    estimate_metrics(ModelInput::Schedule(&s), &t, &cal, opts).map_err(fail)?
                }
            };
            Ok(match fmt {
                Format::Json => report::json(&m),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        topology: String,
                        cycles: u64,
                        latency_ns: f64,
                        energy_nj: f64,
                        power_mw: f64,
                        area_kb: f64,
                    }
                    report::csv_rows(&[Row {
                        topology: t.name(),
                        cycles: m.cycles,
                        latency_ns: m.latency_ns,
                        energy_nj: m.energy_nj,
                        power_mw: m.power_mw,
                        area_kb: m.area_proxy_kb,
                    }])
                }
                Format::Text => format!(
                    "{}: {} cycles, {:.2} ns, {:.4} nJ, {:.3} mW\n",
                    t.name(),
                    m.cycles,
                    m.latency_ns,
                    m.energy_nj,
                    m.power_mw
                ),
            }
            .into_bytes())
        }
        Command::Calibrate {
            fixtures,
            pipelined,
            save,
        } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let base = resolve_calibration(cli.calibration.as_deref()).map_err(fail)?;
            let rows = match fixtures {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| {
                        fail(ConfigError::Io {
                            path: p.display().to_string(),
                            source: e,
                        })
                    })?;
                    parse_fixtures(&text, &p.display().to_string()).map_err(fail)?
                }
                None => measured(),
            };
            let identity = check_fixture_identity(&rows);
            let fit = calibrate(&rows, &base, Some(&lib), CostOptions { pipelined: *pipelined }).map_err(fail)?;
            if let Some(p) = save {
                std::fs::write(p, calibration_to_toml(&fit.calibration))
                    .map_err(|e| fail(CliError::Output(format!("{}: {e}", p.display()))))?;
            }
            render_calibration(&fit.calibration, &fit.residuals, fit.rms_rel, &identity, fmt)
        }
        Command::Explore {
            input,
            options,
            max_latency_ns,
            max_bits,
            mode,
            pipelined,
            exhaustive,
            fold_not,
            no_signoff,
            vectors,
            f_res,
        } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let cal = resolve_calibration(cli.calibration.as_deref()).map_err(fail)?;
            let (name, g) = load_input(input).map_err(fail)?;
            let constraints = Constraints {
                max_latency_ns: *max_latency_ns,
                max_bits: *max_bits,
            };
            let opts = ExploreOptions {
                transforms: options.0.clone(),
                mode: (*mode).into(),
                pipelined: *pipelined,
                fold_not: *fold_not,
                exhaustive: *exhaustive,
                signoff: !*no_signoff,
                vectors: *vectors,
                seed: cli.seed,
                f_res: *f_res,
            };
            let r = explore(
                &name,
                &g,
                &lib,
                &NpnLibrary::builtin(),
                &cal,
                &constraints,
                &opts,
                &RayonExecutor,
            )
            .map_err(fail)?;
            let data = match fmt {
                Format::Json => report::json(&r),
                Format::Csv => report::candidates_csv(&r),
                Format::Text => report::exploration_text(&r),
            }
            .into_bytes();
            match &r.signoff {
                Some(so) if !so.passed => Err((CliError::Mismatch(so.mismatches), Some(data))),
                _ => Ok(data),
            }
        }
        Command::Recipes { options } => {
            let space = enumerate_recipes(&options.0).map_err(fail)?;
            Ok(match cli.format.unwrap_or(Format::Text) {
                Format::Json => report::json(&space.recipes().iter().map(ToString::to_string).collect::<Vec<_>>()),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        index: usize,
                        recipe: String,
                        symbols: String,
                    }
                    let rows: Vec<Row> = space
                        .recipes()
                        .iter()
                        .enumerate()
                        .map(|(index, r)| Row {
                            index,
                            recipe: r.to_string(),
                            symbols: r.symbols(),
                        })
                        .collect();
                    report::csv_rows(&rows)
                }
                Format::Text => space.recipes().iter().map(|r| format!("{r}\n")).collect(),
            }
            .into_bytes())
        }
        Command::Trend { pipelined } => {
            let lib = resolve_library(cli.library.as_deref()).map_err(fail)?;
            let cal = resolve_calibration(cli.calibration.as_deref()).map_err(fail)?;
            let opts = ExploreOptions {
                pipelined: *pipelined,
                signoff: false,
                seed: cli.seed,
                ..Default::default()
            };
            let (_, t) = trend::run_trend(
                &gen::benchmark_set(),
                &lib,
                &NpnLibrary::builtin(),
                &cal,
                &opts,
                &RayonExecutor,
            )
            .map_err(fail)?;
            Ok(match cli.format.unwrap_or(Format::Text) {
                Format::Json => report::json(&t),
                Format::Csv => report::csv_rows(&t.circuits),
                Format::Text => trend::render_text(&t),
            }
            .into_bytes())
        }
        Command::Generate { name } => {
            if name == "list" {
                return Ok(generated_names()
                    .into_iter()
                    .map(|n| n + "\n")
                    .collect::<String>()
                    .into_bytes());
            }
            let g = generated_circuit(name).ok_or_else(|| fail(CliError::UnknownCircuit(name.clone())))?;
            let binary = cli
                .output
                .as_deref()
                .is_some_and(|p| p.extension().is_some_and(|e| e == "aig"));
            Ok(if binary {
                write_aiger_binary(&g)
            } else {
                write_aiger_ascii(&g).into_bytes()
            })
        }
        Command::GenNpn { stored, extra } => {
            if cli.output.is_none() {
                return Err(fail(CliError::Usage("gen-npn writes binary data; pass -o FILE".into())));
            }
            if stored + extra > 12 || *stored == 0 {
                return Err(fail(CliError::Usage(
                    "need 1 <= stored and stored + extra <= 12".into(),
                )));
            }
            Ok(generate_library(*stored, *extra).encode())
        }
    }
}

fn render_calibration(
    c: &Calibration,
    residuals: &[rcim_core::cost::Residual],
    rms: f64,
    identity: &[rcim_core::cost::IdentityCheck],
    fmt: Format,
) -> Outcome {
    #[derive(Serialize)]
    struct Fit<'a> {
        calibration: crate::config::CalibrationFile,
        rms_rel: f64,
        residuals: &'a [rcim_core::cost::Residual],
        identity: &'a [rcim_core::cost::IdentityCheck],
    }
    let fit = Fit {
        calibration: crate::config::CalibrationFile::from_calibration(c),
        rms_rel: rms,
        residuals,
        identity,
    };
    Ok(match fmt {
        Format::Json => report::json(&fit),
        Format::Csv => report::csv_rows(residuals),
        Format::Text => {
            let mut s = calibration_to_toml(c);
            s.push_str(&format!("\nrms relative residual {:.4}\n", rms));
            for r in residuals {
                s.push_str(&format!(
                    "{:<28} stated {:>10.4} nJ  model {:>10.4} nJ  {:+.1}%\n",
                    r.label,
                    r.stated_nj,
                    r.predicted_nj,
                    r.rel_err * 100.0
                ));
            }
            for i in identity.iter().filter(|i| i.flagged) {
                s.push_str(&format!("identity flagged: {} ({:.2}%)\n", i.label, i.rel_err * 100.0));
            }
            s
        }
    }
    .into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("rcim").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn recipes_lists_the_space() {
        let (code, out, _) = run_cli(&["recipes", "--options", "ba,rf,rw"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 15);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _, err) = run_cli(&["recipes", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn domain_errors_exit_1_with_json() {
        let (code, _, err) = run_cli(&["--error-json", "characterize", "gen:nope"]);
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "unknown-circuit");
        assert_eq!(v["exit_code"], 1);
    }

    #[test]
    fn generated_names_resolve() {
        for n in generated_names() {
            assert!(generated_circuit(&n).is_some(), "{n}");
        }
        assert_eq!(generated_circuit("adder-3").unwrap().num_inputs(), 6);
    }
}
