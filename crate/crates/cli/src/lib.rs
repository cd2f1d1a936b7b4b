//! Command dispatch for the `spnd` binary.
//!
//! Everything user-visible goes through [`run`], which writes to the given
//! output stream and returns a [`CliError`] carrying the process exit code.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use spnd_core::decompose::{decompose, DecomposeError};
use spnd_core::dp::{DpError, DpSolver, SolveError, TableMode};
use spnd_core::extensions::{expand_upgrades, map_back, solve_lattice_with, ExtensionError, GadgetMap, LatticeSpec};
use spnd_core::fptas::{fptas_bcmfp, parse_epsilon, FptasError, FptasPath};
use spnd_core::graph::{
    parse_instance, verify_solution, EdgeSet, MultiGraph, Objective, ProblemInstance, ProblemKind, Solution,
};
use spnd_core::oracle::{generate_sp, GenParams, OracleError, SubsetProfile, ORACLE_MAX_EDGES};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NOT_SP: i32 = 3;

/// A failure with its exit code; printed as `ERROR <code> <message>`.
#[derive(Debug, Error)]
#[error("ERROR {code} {message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INFEASIBLE, message: message.into() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::NotSeriesParallel { .. } => CliError { code: EXIT_NOT_SP, message: e.to_string() },
            DecomposeError::Disconnected | DecomposeError::Empty => {
                CliError { code: EXIT_NOT_SP, message: format!("not series-parallel: {e}") }
            }
            DecomposeError::Corrupt { .. } => CliError::usage(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Decompose(d) => d.into(),
            SolveError::InfeasibleDemand { .. } | SolveError::Dp(DpError::Infeasible { .. }) => {
                CliError::infeasible(e.to_string())
            }
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<ExtensionError> for CliError {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::Solve(s) => s.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<FptasError> for CliError {
    fn from(e: FptasError) -> Self {
        match e {
            FptasError::Solve(s) => s.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InfeasibleDemand { .. } => CliError::infeasible(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Bcmfp,
    Capndp,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Bcmfp => ProblemKind::Bcmfp,
            Problem::Capndp => ProblemKind::Capndp,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[default]
    Auto,
    Full,
    Pinned,
}

impl From<Mode> for TableMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => TableMode::Auto,
            Mode::Full => TableMode::Full,
            Mode::Pinned => TableMode::Pinned,
        }
    }
}

/// Budget-constrained max flow and capacitated network design on
/// series-parallel multigraphs.
#[derive(Debug, Parser)]
#[command(name = "spnd", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the decomposition tree of an instance's graph.
    Decompose { instance: PathBuf },
    /// Solve exactly with the residue dynamic program.
    Solve(SolveArgs),
    /// Approximate a budget-constrained max flow instance.
    Fptas {
        /// Accuracy as `p/q` or a decimal, e.g. `1/10` or `0.1`.
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: num_rational::BigRational,
        instance: PathBuf,
    },
    /// Solve by exhaustive subset enumeration (at most 20 edges).
    Oracle(ProblemArgs),
    /// Write a random series-parallel instance to standard output.
    Gen(GenArgs),
    /// Check a `RESULT` line against an instance.
    Verify {
        instance: PathBuf,
        /// File whose last `RESULT` line is checked; `-` reads standard input.
        result: PathBuf,
    },
    /// Compare the dynamic program with the oracle over a seed range.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Expected objective; must match the instance file when given.
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    pub instance: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: ProblemArgs,
    /// Lattice basis `d1,d2,...` restricting the residues considered.
    #[arg(long, value_delimiter = ',', requires = "k_bound")]
    pub lattice: Option<Vec<u64>>,
    /// Coefficient bound for the lattice basis.
    #[arg(long = "K", requires = "lattice")]
    pub k_bound: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    /// Maximum edge count; the count is drawn from the upper half.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub edges: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_max: u64,
    #[arg(long, default_value_t = 10)]
    pub cost_max: u64,
    #[arg(long, value_enum)]
    pub problem: Problem,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub problem: Problem,
    /// Inclusive range `a..b`; empty when `b < a`.
    #[arg(long, value_parser = parse_seed_range)]
    pub seeds: SeedRange,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub edges: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_max: u64,
    #[arg(long, default_value_t = 10)]
    pub cost_max: u64,
    /// Multiply every generated capacity by this factor.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_scale: u64,
    #[arg(long, value_enum, default_value_t)]
    pub mode: Mode,
    /// Append a column with the number of table entries evaluated.
    #[arg(long)]
    pub states: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.first..=self.last
    }
}

pub fn parse_seed_range(text: &str) -> Result<SeedRange, String> {
    let (a, b) = text.split_once("..").ok_or_else(|| format!("expected `a..b`, got `{text}`"))?;
    let num = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("bad seed `{s}`: {e}"));
    Ok(SeedRange { first: num(a)?, last: num(b)? })
}

fn load(path: &Path) -> Result<ProblemInstance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn check_problem(instance: &ProblemInstance, expected: Option<Problem>) -> Result<(), CliError> {
    let found = instance.objective.kind();
    match expected {
        Some(p) if ProblemKind::from(p) != found => Err(CliError::usage(format!(
            "--problem {} given but the instance has a {found} objective",
            ProblemKind::from(p)
        ))),
        _ => Ok(()),
    }
}

/// Replaces upgrade edges by gadgets when there are any.
fn expand(instance: ProblemInstance) -> Result<(ProblemInstance, Option<GadgetMap>), CliError> {
    if instance.upgrades.is_empty() {
        return Ok((instance, None));
    }
    let (expanded, map) = expand_upgrades(&instance)?;
    Ok((expanded, Some(map)))
}

/// Translates a solution of the expanded instance back to the input's edges.
fn interpret(graph: &MultiGraph, solution: Solution, map: Option<&GadgetMap>) -> Result<Reported, CliError> {
    match map {
        None => Ok(Reported { result: solution.result_line(graph), solution, upgrades: Vec::new() }),
        Some(map) => {
            let it = map_back(graph, &solution, map)?;
            Ok(Reported {
                result: it.interpreted_solution.result_line(&it.interpreted.graph),
                upgrades: it.upgrade_lines(map),
                solution: it.interpreted_solution,
            })
        }
    }
}

struct Reported {
    solution: Solution,
    result: String,
    upgrades: Vec<String>,
}

impl Reported {
    fn edge_list(&self) -> &str {
        self.result.rsplit_once("edges=").map_or("", |(_, e)| e)
    }

    fn write(&self, out: &mut dyn Write, problem: ProblemKind, format: Format) -> io::Result<()> {
        match format {
            Format::Text => {
                writeln!(out, "edges: {}", self.edge_list())?;
                writeln!(out, "cost: {}", self.solution.total_cost)?;
                writeln!(out, "flow: {}", self.solution.achieved_flow)?;
                for line in &self.upgrades {
                    writeln!(out, "{line}")?;
                }
                writeln!(out, "{}", self.result)
            }
            Format::Csv => {
                writeln!(out, "problem,cost,flow,edges")?;
                writeln!(
                    out,
                    "{problem},{},{},\"{}\"",
                    self.solution.total_cost,
                    self.solution.achieved_flow,
                    self.edge_list()
                )
            }
        }
    }
}

/// Runs one command, writing its report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match &config.command {
        Command::Decompose { instance } => {
            let inst = load(instance)?;
            let (inst, _) = expand(inst)?;
            let tree = decompose(&inst.graph)?;
            writeln!(out, "{tree}")?;
        }
        Command::Solve(args) => solve(args, out)?,
        Command::Fptas { epsilon, instance } => {
            let inst = load(instance)?;
            let (inst, map) = expand(inst)?;
            let outcome = fptas_bcmfp(&inst, epsilon)?;
            let reported = interpret(&inst.graph, outcome.solution, map.as_ref())?;
            let level = match &outcome.path {
                FptasPath::Ladder { level, .. } => level.to_string(),
                FptasPath::Exact | FptasPath::UnitFallback => "none".to_string(),
            };
            writeln!(out, "PATH {}", outcome.path)?;
            writeln!(out, "EPSILON_PRIME={} R={}", outcome.params.epsilon_prime, outcome.params.target)?;
            writeln!(out, "GUARANTEE flow*(1+eps) >= OPT with eps={epsilon}")?;
            writeln!(out, "M_PRIME={level}")?;
            if let FptasPath::Ladder { index, .. } = outcome.path {
                writeln!(out, "LADDER_INDEX={index} of {}", outcome.ladder_len)?;
            }
            reported.write(out, ProblemKind::Bcmfp, Format::Text)?;
        }
        Command::Oracle(args) => {
            let inst = load(&args.instance)?;
            check_problem(&inst, args.problem)?;
            let (inst, map) = expand(inst)?;
            let profile = SubsetProfile::enumerate(&inst.graph)?;
            let solution = match inst.objective {
                Objective::Budget(b) => profile.best_for_budget(&inst.graph, b),
                Objective::Demand(d) => profile.best_for_demand(&inst.graph, d)?,
            };
            interpret(&inst.graph, solution, map.as_ref())?.write(out, inst.objective.kind(), args.format)?;
        }
        Command::Gen(args) => {
            let params = gen_params(args.seed, args.edges, args.cap_max, args.cost_max, args.problem)?;
            write!(out, "{}", generate_sp(&params))?;
        }
        Command::Verify { instance, result } => verify(instance, result, out)?,
        Command::Sweep(args) => sweep(args, out)?,
    }
    Ok(())
}

fn gen_params(seed: u64, edges: u64, cap_max: u64, cost_max: u64, problem: Problem) -> Result<GenParams, CliError> {
    let edges = usize::try_from(edges).map_err(|_| CliError::usage("--edges is too large"))?;
    Ok(GenParams::new(seed, edges, cap_max, cost_max, problem.into()))
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(&args.common.instance)?;
    check_problem(&inst, args.common.problem)?;
    let (inst, map) = expand(inst)?;
    let solution = match (&args.lattice, args.k_bound) {
        (Some(basis), Some(k)) => {
            let spec = LatticeSpec::new(basis.clone(), k)?;
            solve_lattice_with(&inst, &spec, args.mode.into())?.solution
        }
        _ => {
            let solver = DpSolver::new(&inst.graph, args.mode.into())?;
            match inst.objective {
                Objective::Budget(b) => solver.bcmfp(b)?,
                Objective::Demand(d) => solver.capndp(d)?,
            }
        }
    };
    interpret(&inst.graph, solution, map.as_ref())?.write(out, inst.objective.kind(), args.common.format)?;
    Ok(())
}

/// Parses `RESULT cost=<c> flow=<f> edges=<ids>` into its three fields.
pub fn parse_result_line(line: &str) -> Option<(u64, u64, Vec<String>)> {
    let mut parts = line.strip_prefix("RESULT ")?.split(' ');
    let cost = parts.next()?.strip_prefix("cost=")?.parse().ok()?;
    let flow = parts.next()?.strip_prefix("flow=")?.parse().ok()?;
    let edges = parts.next()?.strip_prefix("edges=")?;
    if parts.next().is_some() {
        return None;
    }
    let ids = edges.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect();
    Some((cost, flow, ids))
}

fn verify(instance: &Path, result: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(instance)?;
    if !inst.upgrades.is_empty() {
        return Err(CliError::usage("verify expects an instance without upgrade edges"));
    }
    let text = if result.as_os_str() == "-" {
        io::read_to_string(io::stdin())?
    } else {
        std::fs::read_to_string(result).map_err(|e| CliError::usage(format!("{}: {e}", result.display())))?
    };
    let line =
        text.lines().rev().find(|l| l.starts_with("RESULT ")).ok_or_else(|| CliError::usage("no RESULT line found"))?;
    let (cost, flow, ids) = parse_result_line(line).ok_or_else(|| CliError::usage(format!("malformed `{line}`")))?;
    let purchased = EdgeSet::from_ids(&inst.graph, &ids).map_err(|e| CliError::usage(e.to_string()))?;
    let claimed = Solution { purchased, total_cost: cost, achieved_flow: flow };
    let report = verify_solution(&inst, &claimed).map_err(|e| CliError::usage(e.to_string()))?;
    writeln!(out, "{report}")?;
    if report.passed() {
        writeln!(out, "VERIFIED")?;
        Ok(())
    } else {
        Err(CliError::infeasible("solution fails verification"))
    }
}

/// One row of a sweep report.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub m: usize,
    pub max_flow: u64,
    pub dp: Option<Solution>,
    pub oracle: Option<Solution>,
    pub dp_ms: f64,
    pub oracle_ms: Option<f64>,
    pub entries: u64,
    /// Set when either solver failed on this row.
    pub error: Option<String>,
}

impl SweepRow {
    /// Whether the two solvers agree on the objective value; `None` when the
    /// oracle was skipped.
    pub fn matches(&self, problem: ProblemKind) -> Option<bool> {
        self.oracle_ms?;
        Some(match (&self.dp, &self.oracle) {
            (Some(d), Some(o)) => match problem {
                ProblemKind::Bcmfp => d.achieved_flow == o.achieved_flow,
                ProblemKind::Capndp => d.total_cost == o.total_cost,
            },
            (None, None) => true,
            _ => false,
        })
    }
}

/// Generates, solves and cross-checks one instance per seed.
pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for seed in args.seeds.iter() {
        let params = gen_params(seed, args.edges, args.cap_max, args.cost_max, args.problem)?;
        let inst = generate_sp(&params);
        let caps: Vec<u64> = inst.graph.capacities().iter().map(|c| c.saturating_mul(args.cap_scale)).collect();
        let graph = inst.graph.with_capacities(&caps).map_err(|e| CliError::usage(e.to_string()))?;
        let inst = match inst.objective {
            Objective::Demand(d) => ProblemInstance::new(graph, Objective::Demand(d.saturating_mul(args.cap_scale))),
            o => ProblemInstance::new(graph, o),
        };
        let g = &inst.graph;
        let mut error = None;

        let started = Instant::now();
        let (dp, entries, max_flow) = match DpSolver::new(g, args.mode.into()) {
            Ok(solver) => {
                let answer = match inst.objective {
                    Objective::Budget(b) => solver.bcmfp(b),
                    Objective::Demand(d) => solver.capndp(d),
                };
                let answer = answer.map_err(|e| error = Some(format!("dp: {e}"))).ok();
                (answer, solver.stats().entries, solver.flow_bound())
            }
            Err(e) => {
                error = Some(format!("dp: {e}"));
                (None, 0, 0)
            }
        };
        let dp_ms = started.elapsed().as_secs_f64() * 1e3;

        let (oracle, oracle_ms) = if g.edge_count() <= ORACLE_MAX_EDGES {
            let started = Instant::now();
            let answer = SubsetProfile::enumerate(g).and_then(|p| match inst.objective {
                Objective::Budget(b) => Ok(p.best_for_budget(g, b)),
                Objective::Demand(d) => p.best_for_demand(g, d),
            });
            let answer = answer.map_err(|e| error.get_or_insert(format!("oracle: {e}")).clone()).ok();
            (answer, Some(started.elapsed().as_secs_f64() * 1e3))
        } else {
            (None, None)
        };
        rows.push(SweepRow { seed, m: g.edge_count(), max_flow, dp, oracle, dp_ms, oracle_ms, entries, error });
    }
    Ok(rows)
}

fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = sweep_rows(args)?;
    let problem = ProblemKind::from(args.problem);
    match args.format {
        Format::Csv => {
            let mut header = "seed,m,F,opt_cost,opt_flow,dp_ms,oracle_ms,match".to_string();
            if args.states {
                header += ",states";
            }
            writeln!(out, "{header}")?;
            for row in &rows {
                let best = row.oracle.as_ref().or(row.dp.as_ref());
                let field = |v: Option<u64>| v.map_or(String::new(), |v| v.to_string());
                let mut line = format!(
                    "{},{},{},{},{},{:.3},{},{}",
                    row.seed,
                    row.m,
                    row.max_flow,
                    field(best.map(|s| s.total_cost)),
                    field(best.map(|s| s.achieved_flow)),
                    row.dp_ms,
                    row.oracle_ms.map_or(String::new(), |t| format!("{t:.3}")),
                    row.matches(problem).map_or(String::new(), |m| u8::from(m).to_string()),
                );
                if args.states {
                    let _ = write!(line, ",{}", row.entries);
                }
                writeln!(out, "{line}")?;
            }
        }
        Format::Text => {
            for row in &rows {
                let verdict = match row.matches(problem) {
                    Some(true) => "match",
                    Some(false) => "MISMATCH",
                    None => "unchecked",
                };
                let dp = row
                    .dp
                    .as_ref()
                    .map_or("-".to_string(), |s| format!("cost={} flow={}", s.total_cost, s.achieved_flow));
                write!(out, "seed {} m={} F={} {dp} dp={:.3}ms {verdict}", row.seed, row.m, row.max_flow, row.dp_ms)?;
                if let Some(e) = &row.error {
                    write!(out, " ({e})")?;
                }
                writeln!(out)?;
            }
            let matched = rows.iter().filter(|r| r.matches(problem) == Some(true)).count();
            writeln!(out, "{matched}/{} rows match", rows.len())?;
        }
    }
    Ok(())
}
