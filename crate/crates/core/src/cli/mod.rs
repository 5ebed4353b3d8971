//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 numeric or guard error,
//! 3 axiom check failure. Machine-readable output goes to stdout,
//! diagnostics to stderr.

pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::axioms::{self, CheckRecord};
use crate::data_io::{self, LoadOptions, ScenarioMatrix, Transform};
use crate::models::{self, ModelSpec};
use crate::portfolio_opt;
use crate::risk_measures::{Denominator, RiskKind, RiskMeasureSpec};
use crate::shapley::{
    shapley_exact_with_limit, shapley_sampled, AttributionReport, BaselineGame, CharacteristicGame, SampleRiskGame,
    ShapleyError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_AXIOM: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    AxiomFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::AxiomFailure(_) => EXIT_AXIOM,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "riskshap", version, about = "Shapley attribution of model outputs and model risk")]
pub struct Cli {
    /// key = value file of default flags; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attribute the risk of a model's output over a scenario set
    Attribute(AttributeArgs),
    /// Attribute a single prediction f(explicand) - f(baseline)
    Bam(BamArgs),
    /// Long-only minimum-CVaR weights for a return matrix
    OptimizeCvar(OptimizeArgs),
    /// Run the axiom checks on an attribution and report verdicts
    CheckAxioms(AttributeArgs),
    /// Build call-option scenarios from a price/vol/rate history
    BsmScenario(BsmArgs),
    /// Print the worked incompatibility counterexamples
    Incompatibilities,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RiskArg {
    Std,
    Var,
    Varq,
    Cvar,
}

impl From<RiskArg> for RiskKind {
    fn from(r: RiskArg) -> Self {
        match r {
            RiskArg::Std => RiskKind::StdDev,
            RiskArg::Var => RiskKind::Variance,
            RiskArg::Varq => RiskKind::ValueAtRisk,
            RiskArg::Cvar => RiskKind::ConditionalValueAtRisk,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DenominatorArg {
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum MethodArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    None,
    LogReturn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Scenario CSV with a header row
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding row labels such as dates
    #[arg(long)]
    pub date_column: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    pub transform: TransformArg,
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            date_column: self.date_column.clone(),
            transform: match self.transform {
                TransformArg::None => Transform::None,
                TransformArg::LogReturn => Transform::LogReturn,
            },
        }
    }

    fn load(&self) -> Result<ScenarioMatrix<f64>, CliError> {
        data_io::load_csv(&self.input, &self.options()).map_err(input)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Permutations for the sampled estimator
    #[arg(long, default_value_t = 10_000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest feature count allowed for exact enumeration
    #[arg(long, default_value_t = crate::shapley::DEFAULT_MAX_PLAYERS)]
    pub max_players: usize,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Also write a horizontal bar chart of the attributions
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct AttributeArgs {
    /// Model JSON file
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "std")]
    pub risk: RiskArg,
    /// Tail probability for varq and cvar
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "population")]
    pub denominator: DenominatorArg,
    /// zeros, current (last scenario row) or comma-separated values
    #[arg(long, default_value = "zeros", allow_hyphen_values = true)]
    pub baseline: String,
    /// Target CSV; residuals y - f(x) become an extra feature
    #[arg(long, value_name = "PATH")]
    pub residuals: Option<PathBuf>,
    /// Column of the target CSV to use (default: its only numeric column)
    #[arg(long)]
    pub target_column: Option<String>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct BamArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated feature values to explain
    #[arg(long, allow_hyphen_values = true)]
    pub explicand: String,
    /// zeros or comma-separated values
    #[arg(long, default_value = "zeros", allow_hyphen_values = true)]
    pub baseline: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct BsmArgs {
    /// History CSV with price, volatility and rate levels
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub date_column: Option<String>,
    #[arg(long, default_value = "price")]
    pub price_column: String,
    #[arg(long, default_value = "vol")]
    pub vol_column: String,
    #[arg(long, default_value = "rate")]
    pub rate_column: String,
    #[arg(long, default_value_t = 800.0)]
    pub strike: f64,
    /// Option maturity in calendar days
    #[arg(long, default_value_t = 30.0)]
    pub maturity_days: f64,
    /// Where to write the scenario CSV
    #[arg(long, value_name = "PATH")]
    pub scenarios_out: PathBuf,
    /// Where to write the model JSON
    #[arg(long, value_name = "PATH")]
    pub model_out: PathBuf,
}

/// Reads a `key = value` config file into flag arguments. Booleans become
/// bare flags when true; arrays repeat the flag.
fn config_args(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| input(format!("config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let values = match value {
            toml::Value::Array(items) => items,
            other => vec![other],
        };
        for v in values {
            match v {
                toml::Value::Boolean(true) => out.push(OsString::from(&flag)),
                toml::Value::Boolean(false) => {}
                toml::Value::String(s) => {
                    out.push(OsString::from(&flag));
                    out.push(OsString::from(s));
                }
                toml::Value::Integer(i) => {
                    out.push(OsString::from(&flag));
                    out.push(OsString::from(i.to_string()));
                }
                toml::Value::Float(x) => {
                    out.push(OsString::from(&flag));
                    out.push(OsString::from(x.to_string()));
                }
                other => return Err(input(format!("config key '{key}': unsupported {} value", other.type_str()))),
            }
        }
    }
    Ok(out)
}

/// Splices config-file flags in right after the subcommand name so that
/// flags given on the command line override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = config else {
        return Ok(args);
    };
    let extra = config_args(&path)?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out: Vec<OsString> = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Attribute(a) => cmd_attribute(&a, stdout, stderr),
        Command::Bam(a) => cmd_bam(&a, stdout, stderr),
        Command::OptimizeCvar(a) => cmd_optimize_cvar(&a, stdout),
        Command::CheckAxioms(a) => cmd_check_axioms(&a, stdout, stderr),
        Command::BsmScenario(a) => cmd_bsm_scenario(&a, stdout),
        Command::Incompatibilities => {
            let report = axioms::demonstrate_incompatibilities().map_err(numeric)?;
            write!(stdout, "{report}").map_err(input)
        }
    }
}

fn parse_row(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input(format!("{what}: '{t}' is not a finite number")))
        })
        .collect()
}

fn resolve_baseline(spec: &str, m: usize, x: Option<&ScenarioMatrix<f64>>) -> Result<Vec<f64>, CliError> {
    let b = match spec.trim() {
        "zeros" => vec![0.0; m],
        "current" => match x {
            Some(x) => x.last_row().to_vec(),
            None => return Err(input("baseline 'current' needs a scenario file")),
        },
        row => parse_row(row, "baseline")?,
    };
    if b.len() != m {
        return Err(input(format!("baseline has {} values, model takes {m} features", b.len())));
    }
    Ok(b)
}

fn risk_spec(a: &AttributeArgs) -> Result<RiskMeasureSpec<f64>, CliError> {
    let kind = RiskKind::from(a.risk);
    if kind.is_tail() && a.alpha.is_none() {
        return Err(input(format!("--risk {} requires --alpha", kind.cli_name())));
    }
    let alpha = if kind.is_tail() { a.alpha } else { None };
    let denominator = match a.denominator {
        DenominatorArg::Population => Denominator::Population,
        DenominatorArg::Sample => Denominator::Sample,
    };
    Ok(RiskMeasureSpec::new(kind, alpha).map_err(input)?.with_denominator(denominator))
}

fn load_targets(a: &AttributeArgs, path: &Path) -> Result<Vec<f64>, CliError> {
    let y = data_io::load_csv::<f64>(path, &a.data.options()).map_err(input)?;
    let column = match &a.target_column {
        Some(name) => y
            .column_index(name)
            .ok_or_else(|| input(format!("target column '{name}' not found in {}", path.display())))?,
        None if y.n_cols() == 1 => 0,
        None => {
            return Err(input(format!(
                "{} has {} columns; choose one with --target-column",
                path.display(),
                y.n_cols()
            )))
        }
    };
    Ok(y.column(column))
}

/// Model, scenario matrix and SRAM game described by the flags.
fn build_risk_game(a: &AttributeArgs) -> Result<(CharacteristicGame<f64>, Vec<String>), CliError> {
    let model: ModelSpec<f64> = models::load_model(&a.model).map_err(input)?;
    let x = a.data.load()?;
    let m = model.feature_count();
    if x.n_cols() != m {
        return Err(input(format!(
            "model takes {m} features but {} has {} columns",
            a.data.input.display(),
            x.n_cols()
        )));
    }
    let mut baseline = resolve_baseline(&a.baseline, m, Some(&x))?;
    let risk = risk_spec(a)?;
    let (model, x) = match &a.residuals {
        Some(path) => {
            let y = load_targets(a, path)?;
            let augmented = data_io::compute_residuals(&model, &x, &y).map_err(input)?;
            baseline.push(0.0);
            (ModelSpec::residual_augmented(model), augmented)
        }
        None => (model, x),
    };
    let names = x.columns().to_vec();
    let game = SampleRiskGame::new(model, x, baseline, risk).map_err(input)?;
    Ok((game.into(), names))
}

fn engine_error(e: ShapleyError) -> CliError {
    match e {
        ShapleyError::Invalid(_) => input(e),
        _ => numeric(e),
    }
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(input("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(numeric)?;
            Ok(pool.install(f))
        }
    }
}

fn run_engine(game: &CharacteristicGame<f64>, e: &EngineArgs) -> Result<AttributionReport<f64>, CliError> {
    with_threads(e.threads, || match e.method {
        MethodArg::Exact => shapley_exact_with_limit(game, e.max_players),
        MethodArg::Sampled => shapley_sampled(game, e.permutations, e.seed),
    })?
    .map_err(engine_error)
}

fn emit_report(
    report: &AttributionReport<f64>,
    out: &OutputArgs,
    title: &str,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let text = match out.format {
        FormatArg::Json => report.to_json() + "\n",
        FormatArg::Csv => report.to_csv(),
    };
    stdout.write_all(text.as_bytes()).map_err(input)?;
    if let Some(path) = &out.svg {
        let labels: Vec<String> = (0..report.players()).map(|i| report.feature_name(i)).collect();
        let chart = svg::bar_chart(title, &labels, &report.attributions);
        fs::write(path, chart).map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn describe(report: &AttributionReport<f64>) -> String {
    match &report.method {
        crate::shapley::Method::Exact => "exact".to_string(),
        crate::shapley::Method::Sampled { permutations, seed } => {
            format!("sampled ({permutations} permutations, seed {seed})")
        }
    }
}

pub fn cmd_attribute(a: &AttributeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (game, names) = build_risk_game(a)?;
    let report = run_engine(&game, &a.engine)?.with_features(&names);
    let _ = writeln!(
        stderr,
        "{} attribution of {} over {} features; completeness residual {:.3e}",
        describe(&report),
        risk_spec(a)?,
        names.len(),
        report.completeness_residual
    );
    emit_report(&report, &a.output, &format!("{} attribution", risk_spec(a)?), stdout)
}

pub fn cmd_bam(a: &BamArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let model: ModelSpec<f64> = models::load_model(&a.model).map_err(input)?;
    let m = model.feature_count();
    let explicand = parse_row(&a.explicand, "explicand")?;
    if explicand.len() != m {
        return Err(input(format!("explicand has {} values, model takes {m} features", explicand.len())));
    }
    let baseline = resolve_baseline(&a.baseline, m, None)?;
    let game: CharacteristicGame<f64> = BaselineGame::new(model, explicand, baseline).map_err(input)?.into();
    let report = run_engine(&game, &a.engine)?;
    let _ = writeln!(
        stderr,
        "{} baseline attribution; f(explicand) - f(baseline) = {}",
        describe(&report),
        report.total()
    );
    emit_report(&report, &a.output, "prediction attribution", stdout)
}

pub fn cmd_optimize_cvar(a: &OptimizeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let x = a.data.load()?;
    let opt_err = |e: portfolio_opt::OptError| match e {
        portfolio_opt::OptError::Solver { .. } | portfolio_opt::OptError::Identity { .. } => numeric(e),
        _ => input(e),
    };
    let before = portfolio_opt::single_asset_cvars(&x, a.alpha).map_err(opt_err)?;
    let p = portfolio_opt::min_cvar_weights(&x, a.alpha).map_err(opt_err)?;
    let body = json!({
        "assets": x.columns(),
        "alpha": a.alpha,
        "weights": p.weights,
        "cvar_before": before,
        "cvar_after": p.optimal_cvar,
        "lp_objective": p.lp_objective,
        "iterations": p.iterations,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&body).expect("json")).map_err(input)
}

pub fn cmd_check_axioms(a: &AttributeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (game, names) = build_risk_game(a)?;
    let report = run_engine(&game, &a.engine)?.with_features(&names);
    let checks: Vec<CheckRecord> = with_threads(a.engine.threads, || axioms::check_all(&game, &report))?.map_err(numeric)?;
    let failed: Vec<&CheckRecord> = checks.iter().filter(|c| !c.passed()).collect();
    let body = json!({
        "passed": failed.is_empty(),
        "report": report,
        "checks": checks,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&body).expect("json")).map_err(input)?;
    for c in &checks {
        let _ = writeln!(stderr, "{c}");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::AxiomFailure(format!("{} axiom check(s) failed", failed.len())))
    }
}

pub fn cmd_bsm_scenario(a: &BsmArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let options = LoadOptions {
        date_column: a.date_column.clone(),
        transform: Transform::None,
    };
    let history = data_io::load_csv::<f64>(&a.input, &options).map_err(input)?;
    let col = |name: &str| {
        history
            .column_index(name)
            .map(|j| history.column(j))
            .ok_or_else(|| input(format!("column '{name}' not found in {}", a.input.display())))
    };
    let (prices, vols, rates) = (col(&a.price_column)?, col(&a.vol_column)?, col(&a.rate_column)?);
    let maturity = a.maturity_days / 365.0;
    let s = data_io::build_bsm_scenarios(&prices, &vols, &rates, a.strike, maturity).map_err(input)?;
    s.scenarios.save_csv(&a.scenarios_out).map_err(input)?;
    models::save_model(&s.model, &a.model_out)
        .map_err(|e| input(format!("cannot write {}: {e}", a.model_out.display())))?;
    let row: Vec<String> = s.baseline.iter().map(|v| v.to_string()).collect();
    let body = json!({
        "rows": s.scenarios.n_rows(),
        "strike": a.strike,
        "maturity": maturity,
        "columns": s.scenarios.columns(),
        "baseline": s.baseline,
        "baseline_row": row.join(","),
        "scenarios": a.scenarios_out,
        "model": a.model_out,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&body).expect("json")).map_err(input)
}
