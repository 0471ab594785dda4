//! Command-line front end for `tecoord-core`.
//!
//! Every subcommand reads a scenario, runs one solver or mechanism, and writes
//! a canonical JSON report (sorted keys, 17 significant digits). Exit codes:
//! `0` success, `1` output I/O failure, `2` invalid input, `3` solver
//! non-convergence.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use tecoord_core::corpus::{generate_corpus, CorpusParams};
use tecoord_core::games::{supply_function_nash, SupplyGameConfig};
use tecoord_core::mechanisms::{
    check_budget_balance, check_ic_bayesian, check_ic_dominant, check_interim_ir, dagva_outcome, ssvcg_solve,
    vcg_outcome, Dagva, DiscretePrior, SsvcgFamily, Vcg,
};
use tecoord_core::stackelberg::{solve_price_stackelberg, solve_reverse_stackelberg_per_agent, LeaderObjective};
use tecoord_core::welfare::{
    clear_auction, run_primal_dual, solve_social_welfare_with, verify_competitive_equilibrium, SolverConfig, StepRule,
};
use tecoord_core::{Error, Interval, Scenario, Theta};

pub mod inputs;
pub mod render;

pub use inputs::{parse_outcome, parse_reports};
pub use render::to_canonical_json;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "tecoord",
    version,
    about = "Transactive-energy coordination solvers and mechanisms"
)]
pub struct Cli {
    /// Seed for every pseudo-random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Solver tolerance; each subcommand documents what it controls.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Report destination (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Record wall time in the report. Reports with timing are not reproducible.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Competitive equilibrium. `--tol` is the price tolerance (bisection) or
    /// the balance tolerance (primal-dual).
    Clear(ClearArgs),
    /// Price-setting leader with price-taking followers.
    Stackelberg(StackelbergArgs),
    /// Per-agent linear incentive pricing.
    ReverseStackelberg(ReverseArgs),
    /// Supply-function bidding equilibrium. `--tol` caps the certificate ε.
    SupplyGame(ScenarioArg),
    /// Run a direct mechanism and its property checks.
    Mechanism(MechanismArgs),
    /// Write seeded random scenarios.
    Corpus(CorpusArgs),
    /// Check a candidate outcome for competitive equilibrium. `--tol` is the
    /// optimality and balance tolerance.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ScenarioArg {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClearMethod {
    Bisection,
    Auction,
    PrimalDual,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Diminishing,
    Harmonic,
    Constant,
}

#[derive(Debug, Args, Serialize)]
pub struct ClearArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = ClearMethod::Auction)]
    pub method: ClearMethod,
    #[arg(long, value_enum, default_value_t = StepKind::Diminishing)]
    pub step: StepKind,
    #[arg(long, default_value_t = 0.5)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    /// CSV sidecar for the primal-dual iterates.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    Profit,
    Welfare,
}

#[derive(Debug, Args, Serialize)]
pub struct StackelbergArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Profit)]
    pub objective: ObjectiveArg,
    /// CSV sidecar for the price scan.
    #[arg(long)]
    pub scan: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReverseObjective {
    /// `λ·a − C(a)` per agent.
    Profit,
    /// `−(a − a₀)² − (λ − λ₀)²` around `--target`.
    Tracking,
}

#[derive(Debug, Args, Serialize)]
pub struct ReverseArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = ReverseObjective::Profit)]
    pub objective: ReverseObjective,
    /// Target `a,λ` for the tracking objective.
    #[arg(long, value_parser = parse_pair)]
    pub target: Option<(f64, f64)>,
    #[arg(long, default_value_t = 0.0)]
    pub price_lo: f64,
    /// Defaults to the largest α in the scenario.
    #[arg(long)]
    pub price_hi: Option<f64>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `a,λ`, found `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    Vcg,
    Dagva,
    Ssvcg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    IcDom,
    IcBayes,
    Budget,
    Ir,
}

#[derive(Debug, Args, Serialize)]
pub struct MechanismArgs {
    #[arg(long, value_enum)]
    pub kind: MechanismKind,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Reports file, or `truthful` to report the scenario's own types.
    #[arg(long, default_value = "truthful")]
    pub reports: String,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub check: Vec<CheckKind>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusShape {
    Default,
    Mechanism,
    SupplyGame,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value_t = CorpusShape::Default)]
    pub shape: CorpusShape,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Outcome file: `{"allocations": [..], "supply": y, "price": λ}`.
    #[arg(long)]
    pub outcome: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Input { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Error },

    #[error(transparent)]
    Core(#[from] Error),

    #[error("invalid {what}: {reason}")]
    Usage { what: &'static str, reason: String },
}

impl CliError {
    pub(crate) fn context(self, path: &Path) -> Self {
        match self {
            CliError::Core(source) => CliError::InFile {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        }
    }

    fn core(&self) -> Option<&Error> {
        match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => Some(e),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } => 1,
            _ if self.core().is_some_and(Error::is_convergence_failure) => 3,
            _ => 2,
        }
    }

    /// One-line diagnostic, prefixed with the error kind.
    pub fn diagnostic(&self) -> String {
        let kind = match self {
            CliError::Input { .. } => "Input",
            CliError::Output { .. } => "Output",
            CliError::Usage { .. } => "Usage",
            _ => self.core().map_or("Error", Error::kind),
        };
        format!("error[{kind}]: {self}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub artifact_version: &'static str,
    pub command: &'static str,
    pub request: Value,
    pub seed: u64,
    pub outcome: Value,
    pub properties: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        to_canonical_json(self).expect("reports contain only JSON-representable values")
    }
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn positive_tol(tol: Option<f64>, default: f64) -> Result<f64, CliError> {
    match tol {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(CliError::Usage {
            what: "--tol",
            reason: format!("must be positive and finite, found {t}"),
        }),
    }
}

/// Runs one parsed command line and returns its report. Sidecar files are
/// written here; the report itself is left to the caller.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let (command, request, outcome, properties) = match &cli.command {
        Command::Clear(args) => ("clear", value(args), clear(args, cli.tol)?, Value::Null),
        Command::Stackelberg(args) => ("stackelberg", value(args), stackelberg(args)?, Value::Null),
        Command::ReverseStackelberg(args) => ("reverse-stackelberg", value(args), reverse(args)?, Value::Null),
        Command::SupplyGame(args) => ("supply-game", value(args), supply_game(args, cli.tol)?, Value::Null),
        Command::Mechanism(args) => {
            let (outcome, properties) = mechanism(args)?;
            ("mechanism", value(args), outcome, properties)
        }
        Command::Corpus(args) => ("corpus", value(args), corpus(args, cli.seed)?, Value::Null),
        Command::Verify(args) => {
            let (outcome, properties) = verify(args, cli.tol)?;
            ("verify", value(args), outcome, properties)
        }
    };
    let mut request = request;
    if let Some(t) = cli.tol {
        request["tol"] = json!(t);
    }
    Ok(RunReport {
        artifact_version: ARTIFACT_VERSION,
        command,
        request,
        seed: cli.seed,
        outcome,
        properties,
        wall_time_seconds: cli.timing.then(|| started.elapsed().as_secs_f64()),
    })
}

/// Parses, runs and emits; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{}", e.diagnostic());
        return e.exit_code();
    }
    let result = run(&cli).and_then(|report| {
        let text = report.to_json();
        match &cli.out {
            Some(path) => write_file(path, &text)?,
            None => print!("{text}"),
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            if !cli.quiet {
                eprintln!("{}: ok", report.command);
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}

/// Caps the rayon pool at `TECOORD_THREADS` (0 or unset means automatic).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TECOORD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| CliError::Usage {
        what: "TECOORD_THREADS",
        reason: format!("expected a non-negative integer, found `{raw}`"),
    })?;
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn clear(args: &ClearArgs, tol: Option<f64>) -> Result<Value, CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    match args.method {
        ClearMethod::Bisection => {
            let opt = solve_social_welfare_with(&scenario, positive_tol(tol, 1e-8)?)?;
            Ok(json!({
                "allocations": opt.allocations,
                "supply": opt.supply,
                "price": opt.multiplier,
                "welfare": opt.welfare,
            }))
        }
        ClearMethod::Auction => {
            let out = clear_auction(&scenario)?;
            let check = verify_competitive_equilibrium(&out, &scenario, 1e-9);
            Ok(json!({
                "allocations": out.allocations,
                "supply": out.supply,
                "price": out.prices.uniform(),
                "payments": out.payments,
                "competitive": value(&check),
            }))
        }
        ClearMethod::PrimalDual => {
            let step_rule = match args.step {
                StepKind::Diminishing => StepRule::Diminishing(args.gamma0),
                StepKind::Harmonic => StepRule::Harmonic(args.gamma0),
                StepKind::Constant => StepRule::Constant(args.gamma0),
            };
            let config = SolverConfig {
                balance_tolerance: positive_tol(tol, 1e-6)?,
                max_iterations: args.max_iterations,
                step_rule,
                ..SolverConfig::default()
            };
            let trace = match run_primal_dual(&scenario, &config) {
                Ok(t) => t,
                Err(Error::NotConverged {
                    what,
                    iterations,
                    trace,
                }) => {
                    if let (Some(path), Some(t)) = (&args.trace, &trace) {
                        write_file(path, &t.to_csv())?;
                    }
                    return Err(Error::NotConverged {
                        what,
                        iterations,
                        trace,
                    }
                    .into());
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = &args.trace {
                write_file(path, &trace.to_csv())?;
            }
            let out = &trace.final_outcome;
            Ok(json!({
                "allocations": out.allocations,
                "supply": out.supply,
                "price": out.prices.uniform(),
                "imbalance": out.imbalance(),
                "iterations": trace.iterations.len(),
                "converged": trace.converged,
                "config": value(&config),
            }))
        }
    }
}

fn stackelberg(args: &StackelbergArgs) -> Result<Value, CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    let objective = match args.objective {
        ObjectiveArg::Profit => LeaderObjective::Profit,
        ObjectiveArg::Welfare => LeaderObjective::Welfare,
    };
    let sol = solve_price_stackelberg(&scenario, objective)?;
    if let Some(path) = &args.scan {
        write_file(path, &sol.scan_csv())?;
    }
    Ok(json!({
        "price": sol.price,
        "leader_payoff": sol.leader_payoff,
        "allocations": sol.outcome.allocations,
        "supply": sol.outcome.supply,
        "payments": sol.outcome.payments,
        "scan_points": sol.scan.len(),
    }))
}

fn reverse(args: &ReverseArgs) -> Result<Value, CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    let prices = Interval::new(args.price_lo, args.price_hi.unwrap_or_else(|| scenario.max_alpha()));
    if !(prices.is_bounded() && prices.lo <= prices.hi) {
        return Err(CliError::Usage {
            what: "price range",
            reason: format!("[{}, {}] is not a bounded interval", prices.lo, prices.hi),
        });
    }
    let cost = scenario.coordinator.cost;
    let solutions = match args.objective {
        ReverseObjective::Profit => {
            solve_reverse_stackelberg_per_agent(&scenario, prices, |_, a, p| p * a - cost.value(a))?
        }
        ReverseObjective::Tracking => {
            let (a0, p0) = args.target.ok_or(CliError::Usage {
                what: "--target",
                reason: "the tracking objective needs `--target a,λ`".into(),
            })?;
            solve_reverse_stackelberg_per_agent(&scenario, prices, |_, a, p| -(a - a0).powi(2) - (p - p0).powi(2))?
        }
    };
    Ok(json!({ "agents": value(&solutions) }))
}

fn supply_game(args: &ScenarioArg, tol: Option<f64>) -> Result<Value, CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    let config = SupplyGameConfig {
        epsilon_tolerance: positive_tol(tol, 1e-6)?,
        ..SupplyGameConfig::default()
    };
    Ok(value(&supply_function_nash(&scenario, &config)?))
}

fn load_reports(source: &str, scenario: &Scenario) -> Result<Vec<Theta>, CliError> {
    if source == "truthful" {
        return Ok(scenario.thetas());
    }
    let path = Path::new(source);
    let reports = parse_reports(&inputs::read_input(path)?).map_err(|e| CliError::Core(e).context(path))?;
    if reports.len() != scenario.agents.len() {
        return Err(CliError::Core(Error::InvalidInput(format!(
            "{} reports for {} agents",
            reports.len(),
            scenario.agents.len()
        )))
        .context(path));
    }
    Ok(reports)
}

fn mechanism(args: &MechanismArgs) -> Result<(Value, Value), CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    let reports = load_reports(&args.reports, &scenario)?;
    let mut properties = serde_json::Map::new();
    let outcome = match args.kind {
        MechanismKind::Vcg => {
            let out = vcg_outcome(&reports, &scenario)?;
            let grid = Vcg::with_type_grid(&scenario);
            for check in &args.check {
                let report = match check {
                    CheckKind::IcDom => value(&check_ic_dominant(&grid, &grid.messages)?),
                    CheckKind::Budget => value(&check_budget_balance(&grid, &grid.messages, 1e-9)?),
                    CheckKind::IcBayes | CheckKind::Ir => {
                        let prior = DiscretePrior::from_scenario(&scenario)?;
                        let m = Vcg::new(&scenario, prior.support.clone());
                        if *check == CheckKind::IcBayes {
                            value(&check_ic_bayesian(&m, &prior)?)
                        } else {
                            value(&check_interim_ir(&m, &prior)?)
                        }
                    }
                };
                properties.insert(check_name(*check).into(), report);
            }
            value(&out)
        }
        MechanismKind::Dagva => {
            let out = dagva_outcome(&reports, scenario.prior.as_ref(), &scenario)?;
            let m = Dagva::new(&scenario)?;
            let support = m.prior.support.clone();
            for check in &args.check {
                let report = match check {
                    CheckKind::IcDom => value(&check_ic_dominant(&m, &support)?),
                    CheckKind::IcBayes => value(&check_ic_bayesian(&m, &m.prior)?),
                    CheckKind::Budget => value(&check_budget_balance(&m, &support, 1e-12)?),
                    CheckKind::Ir => value(&check_interim_ir(&m, &m.prior)?),
                };
                properties.insert(check_name(*check).into(), report);
            }
            value(&out)
        }
        MechanismKind::Ssvcg => {
            if !args.check.is_empty() {
                return Err(CliError::Usage {
                    what: "--check",
                    reason:
                        "the scalar-strategy mechanism reports its own ε certificate; checks apply to vcg and dagva"
                            .into(),
                });
            }
            let sol = ssvcg_solve(&scenario, &SsvcgFamily::default(), &SolverConfig::default())?;
            value(&sol)
        }
    };
    Ok((
        json!({ "reports": value(&reports), "result": outcome }),
        Value::Object(properties),
    ))
}

fn check_name(c: CheckKind) -> &'static str {
    match c {
        CheckKind::IcDom => "ic-dom",
        CheckKind::IcBayes => "ic-bayes",
        CheckKind::Budget => "budget",
        CheckKind::Ir => "ir",
    }
}

fn corpus(args: &CorpusArgs, seed: u64) -> Result<Value, CliError> {
    let params = match args.shape {
        CorpusShape::Default => CorpusParams::default(),
        CorpusShape::Mechanism => CorpusParams::mechanism(),
        CorpusShape::SupplyGame => CorpusParams::supply_game(),
    };
    let scenarios = generate_corpus(seed, args.count, &params)?;
    std::fs::create_dir_all(&args.dir).map_err(|source| CliError::Output {
        path: args.dir.clone(),
        source,
    })?;
    let mut files = Vec::with_capacity(scenarios.len());
    for (k, s) in scenarios.iter().enumerate() {
        let name = format!("scenario_{:04}.json", k + 1);
        write_file(&args.dir.join(&name), &(s.to_json() + "\n"))?;
        files.push(name);
    }
    Ok(json!({ "files": files, "params": value(&params) }))
}

fn verify(args: &VerifyArgs, tol: Option<f64>) -> Result<(Value, Value), CliError> {
    let scenario = inputs::load_scenario(&args.scenario)?;
    let outcome =
        parse_outcome(&inputs::read_input(&args.outcome)?).map_err(|e| CliError::Core(e).context(&args.outcome))?;
    if outcome.allocations.len() != scenario.agents.len() {
        return Err(CliError::Core(Error::InvalidInput(format!(
            "{} allocations for {} agents",
            outcome.allocations.len(),
            scenario.agents.len()
        )))
        .context(&args.outcome));
    }
    let check = verify_competitive_equilibrium(&outcome, &scenario, positive_tol(tol, 1e-6)?);
    Ok((
        value(&outcome),
        json!({ "competitive_equilibrium": { "holds": check.holds(), "detail": value(&check) } }),
    ))
}
