//! Command-line driver.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analysis::{
    enumerate_equilibria, is_stable_tree, max_stable_tree, max_stable_tree_search, AnalysisError,
    Notion, StableTreeReport,
};
use crate::dot::{graph_at_round, to_dot, DotOptions, SnapshotError};
use crate::engine::trace::fmt_set;
use crate::engine::{run, AdversaryPolicy, EngineError, EngineState, PlacementRule, StopCondition};
use crate::gadgets::{build_reduction, CnfError, CnfFormula};
use crate::model::{Instance, NodeId, ParseError, RoutingGraph};
use crate::schedulers::{
    CoordinateScheduler, FairStabiliseScheduler, RandomScheduler, ReplayScheduler, Schedule,
    ScheduleError, Scheduler,
};

/// Exit status when the stop condition was not met or the tree is unstable.
pub const EXIT_UNMET: u8 = 2;
/// Exit status for every error.
pub const EXIT_ERROR: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "nexthop",
    version,
    about = "Simulate and analyse next-hop routing with filtering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a round-based simulation and print a summary.
    Run(RunArgs),
    /// Build the hardness network for a 3-CNF formula.
    GenGadget(GadgetArgs),
    /// Check whether a tree is stable. Exits 0 if stable, 2 if not.
    CheckStable(CheckArgs),
    /// Find a largest stable tree by exhaustive search.
    MaxStableTree(MaxArgs),
    /// List every equilibrium of a small instance.
    EnumerateEquilibria(EnumArgs),
    /// Render a routing graph as Graphviz DOT.
    ExportDot(DotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerKind {
    /// A fresh uniformly random permutation every round.
    Random,
    /// Two-colour coordination; needs empty filters.
    Coordinate,
    /// Strongly stable tree growth; needs every node to filter itself.
    FairStabilise,
    /// Permutations read from a schedule file (see --replay).
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryKind {
    /// Cycling packets stay where they stopped.
    Stay,
    /// Cycling packets move to the lowest id on their cycle.
    Min,
    /// Cycling packets move to the highest id on their cycle.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopKind {
    AllDelivered,
    Equilibrium,
    /// Always run --max-rounds rounds.
    Rounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NotionKind {
    /// Only tree arcs are constrained.
    Tree,
    /// Sink trees of equilibria.
    Equilibrium,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SchedulerKind::Random)]
    pub scheduler: SchedulerKind,
    /// Schedule file for --scheduler replay.
    #[arg(long, required_if_eq("scheduler", "replay"))]
    pub replay: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AdversaryKind::Stay)]
    pub adversary: AdversaryKind,
    /// Seed for the random scheduler.
    #[arg(long, env = "NEXTHOP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub max_rounds: u32,
    #[arg(long, value_enum, default_value_t = StopKind::AllDelivered)]
    pub stop: StopKind,
    /// Write the full event trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the executed permutations here, in replayable form.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// DIMACS CNF file; every clause must have exactly three literals.
    #[arg(long)]
    pub cnf: PathBuf,
    /// Number of padding nodes chained behind the last clause gadget.
    #[arg(long, default_value_t = 0)]
    pub padding: usize,
    /// Instance file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Label file to write; defaults to `<out>.labels`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// File of `next <v>: <w>` lines giving the tree; defaults to the sink
    /// tree of the instance's initial routing graph.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MaxArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = NotionKind::Equilibrium)]
    pub notion: NotionKind,
    /// Cap on configurations (equilibrium) or search nodes (tree).
    #[arg(long, default_value_t = 5_000_000)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct EnumArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Cap on the number of configurations examined.
    #[arg(long, default_value_t = 5_000_000)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct DotArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Trace to take the routing graph from; without it the instance's
    /// initial graph is drawn.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Round whose final graph is drawn (with --trace).
    #[arg(long, default_value_t = u32::MAX)]
    pub round: u32,
    /// Label file as written by gen-gadget.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Draw every network arc, unused ones dashed.
    #[arg(long)]
    pub all_arcs: bool,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Instance { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Cnf { path: PathBuf, source: CnfError },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{0}")]
    Input(String),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(path: &Path) -> Result<Instance, CliError> {
    Instance::parse(&read(path)?).map_err(|source| CliError::Instance {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a parsed command, writing its report to `out`. Returns the exit status.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::GenGadget(a) => cmd_gen_gadget(&a, out),
        Command::CheckStable(a) => cmd_check_stable(&a, out),
        Command::MaxStableTree(a) => cmd_max_stable_tree(&a, out),
        Command::EnumerateEquilibria(a) => cmd_enumerate(&a, out),
        Command::ExportDot(a) => cmd_export_dot(&a, out),
    }
}

fn make_scheduler(a: &RunArgs, inst: &Instance) -> Result<Box<dyn Scheduler>, CliError> {
    let net = &inst.network;
    Ok(match a.scheduler {
        SchedulerKind::Random => Box::new(RandomScheduler::new(a.seed)),
        SchedulerKind::Coordinate => {
            if !net.all_filters_empty() {
                return Err(ScheduleError::FilterMismatch {
                    scheduler: "coordinate",
                    required: "empty",
                }
                .into());
            }
            Box::new(CoordinateScheduler::new())
        }
        SchedulerKind::FairStabilise => {
            if !net.all_filters_self() {
                return Err(ScheduleError::FilterMismatch {
                    scheduler: "fair-stabilise",
                    required: "self-only",
                }
                .into());
            }
            Box::new(FairStabiliseScheduler::new())
        }
        SchedulerKind::Replay => {
            let path = a.replay.as_ref().ok_or_else(|| {
                CliError::Input("--scheduler replay needs --replay <file>".into())
            })?;
            Box::new(ReplayScheduler::new(Schedule::parse(&read(path)?)?))
        }
    })
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = load(&a.instance)?;
    let mut scheduler = make_scheduler(a, &inst)?;
    let initial = inst.initial_graph();
    let mut state = EngineState::new(Arc::new(inst.network), initial);
    let policy = match a.adversary {
        AdversaryKind::Stay => AdversaryPolicy::Stay,
        AdversaryKind::Min => AdversaryPolicy::Fixed(PlacementRule::MinId),
        AdversaryKind::Max => AdversaryPolicy::Fixed(PlacementRule::MaxId),
    };
    let stop = match a.stop {
        StopKind::AllDelivered => StopCondition::AllDelivered,
        StopKind::Equilibrium => StopCondition::Equilibrium,
        StopKind::Rounds => StopCondition::Rounds,
    };
    let outcome = run(&mut state, scheduler.as_mut(), a.max_rounds, stop, policy)?;

    if let Some(p) = &a.trace {
        write_file(p, &state.trace().render())?;
    }
    if let Some(p) = &a.schedule_out {
        write_file(p, &Schedule::from_trace(state.trace()).to_text())?;
    }

    let total = state.packets().len();
    let mut s = String::new();
    let _ = writeln!(s, "scheduler {}", scheduler.name());
    let _ = writeln!(s, "rounds {}", outcome.rounds);
    for t in 1..=state.round() {
        let d = state
            .packets()
            .iter()
            .filter(|p| p.delivered_round.is_some_and(|r| r <= t))
            .count();
        let _ = writeln!(s, "round {t}: delivered {d}/{total}");
    }
    let delivered = state.delivered_count();
    let head = match outcome.all_delivered_round {
        Some(r) => format!("delivered {delivered}/{total} by round {r}"),
        None => format!(
            "delivered {delivered}/{total} after round {}",
            state.round()
        ),
    };
    let eq = match outcome.equilibrium_round {
        Some(r) => format!("equilibrium by round {r}"),
        None => "equilibrium: no".to_string(),
    };
    let _ = writeln!(s, "{head}; {eq}");
    let _ = writeln!(s, "imperfect rounds {}", outcome.imperfect_rounds);
    let _ = writeln!(
        s,
        "stop condition {}",
        if outcome.met { "met" } else { "unmet" }
    );
    out.write_all(s.as_bytes())?;
    Ok(if outcome.met { 0 } else { EXIT_UNMET })
}

fn cmd_gen_gadget(a: &GadgetArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let f = CnfFormula::parse(&read(&a.cnf)?).map_err(|source| CliError::Cnf {
        path: a.cnf.clone(),
        source,
    })?;
    let g = build_reduction(&f, a.padding);
    write_file(&a.out, &Instance::new(g.net.clone()).to_text())?;
    let labels = a.labels.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".labels");
        p.into()
    });
    write_file(&labels, &g.labels_text())?;
    writeln!(
        out,
        "nodes {} core {} padding {} implied-epsilon {:.4}",
        g.net.n(),
        g.core_size(),
        a.padding,
        g.implied_epsilon()
    )?;
    Ok(0)
}

fn fmt_arcs(g: &RoutingGraph) -> String {
    let arcs: Vec<String> = g.arcs().map(|(u, v)| format!("{u}->{v}")).collect();
    format!("{{{}}}", arcs.join(","))
}

fn parse_tree(text: &str, n: usize) -> Result<RoutingGraph, CliError> {
    let mut g = RoutingGraph::empty(n);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::Input(format!("tree line {}: expected `next <v>: <w>`", i + 1));
        let rest = line.strip_prefix("next").ok_or_else(bad)?;
        let (v, w) = rest.split_once(':').ok_or_else(bad)?;
        let v: usize = v.trim().parse().map_err(|_| bad())?;
        let w = match w.trim() {
            "-" => None,
            s => Some(NodeId(s.parse().map_err(|_| bad())?)),
        };
        if v >= n || w.is_some_and(|w| w.0 >= n) {
            return Err(bad());
        }
        g.set(NodeId(v), w);
    }
    Ok(g)
}

fn write_report(s: &mut String, r: &StableTreeReport) {
    let _ = writeln!(s, "tree {}", fmt_arcs(&r.tree));
    let _ = writeln!(s, "size {}", r.size);
    match &r.violation {
        Some(v) => {
            let _ = writeln!(s, "stable no");
            let _ = writeln!(s, "violation {v}");
        }
        None => {
            let _ = writeln!(s, "stable yes");
        }
    }
    let ext: Vec<String> = r
        .external
        .iter()
        .map(|(x, w)| format!("{x}->{w}"))
        .collect();
    let _ = writeln!(s, "outside-valid {{{}}}", ext.join(","));
}

fn cmd_check_stable(a: &CheckArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = load(&a.instance)?;
    let net = &inst.network;
    let tree = match &a.tree {
        Some(p) => parse_tree(&read(p)?, net.n())?,
        None => inst.initial_graph().sink_tree(net.sink()),
    };
    let report = is_stable_tree(net, &tree)?;
    let mut s = String::new();
    write_report(&mut s, &report);
    out.write_all(s.as_bytes())?;
    Ok(if report.is_stable() { 0 } else { EXIT_UNMET })
}

fn cmd_max_stable_tree(a: &MaxArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = load(&a.instance)?;
    let net = &inst.network;
    let report = match a.notion {
        NotionKind::Equilibrium => max_stable_tree(net, a.budget as u128)?,
        NotionKind::Tree => {
            let (_, tree) = max_stable_tree_search(net, Notion::TreeOnly, a.budget)?;
            is_stable_tree(net, &tree)?
        }
    };
    let mut s = String::new();
    write_report(&mut s, &report);
    out.write_all(s.as_bytes())?;
    Ok(0)
}

fn cmd_enumerate(a: &EnumArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = load(&a.instance)?;
    let net = &inst.network;
    let all = enumerate_equilibria(net, a.budget as u128)?;
    let mut s = String::new();
    let _ = writeln!(s, "equilibria {}", all.len());
    for (i, g) in all.iter().enumerate() {
        let comp = g.sink_component(net.sink());
        let _ = writeln!(
            s,
            "equilibrium {i} arcs={} sink-component={}",
            fmt_arcs(g),
            fmt_set(&comp)
        );
    }
    out.write_all(s.as_bytes())?;
    Ok(0)
}

fn cmd_export_dot(a: &DotArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let inst = load(&a.instance)?;
    let mut g = inst.initial_graph();
    if let Some(p) = &a.trace {
        g = graph_at_round(&g, &read(p)?, a.round)?;
    }
    let labels: Option<Vec<String>> = match &a.labels {
        Some(p) => Some(parse_labels(&read(p)?, inst.network.n())?),
        None => None,
    };
    let opts = DotOptions {
        labels: labels.as_deref(),
        all_arcs: a.all_arcs,
    };
    let dot = to_dot(&inst.network, &g, &opts);
    match &a.out {
        Some(p) => write_file(p, &dot)?,
        None => out.write_all(dot.as_bytes())?,
    }
    Ok(0)
}

/// Reads `label <id> <role>` lines.
fn parse_labels(text: &str, n: usize) -> Result<Vec<String>, CliError> {
    let mut labels = vec![String::new(); n];
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (None, ..) => continue,
            (Some("label"), Some(id), Some(role)) => {
                let id: usize = id.parse().ok().filter(|&x| x < n).ok_or_else(|| {
                    CliError::Input(format!("labels line {}: bad node id", i + 1))
                })?;
                labels[id] = role.to_string();
            }
            _ => {
                return Err(CliError::Input(format!(
                    "labels line {}: expected `label <id> <role>`",
                    i + 1
                )))
            }
        }
    }
    Ok(labels)
}
