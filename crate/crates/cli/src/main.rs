//! `haircut`: estimate jump-diffusion models and solve collateral haircuts.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical non-convergence,
//! 3 unattainable haircut target.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haircut_core::estimate::WindowAnchor;
use haircut_core::{DejdParams, RiskMeasure};

use config::{CriterionName, RunConfig, Step};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<haircut_core::Error> for CliError {
    fn from(e: haircut_core::Error) -> Self {
        let code = match &e {
            haircut_core::Error::Unattainable(_) => 3,
            e if e.is_numerical() => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "haircut", version, about = "Collateral haircuts from jump-diffusion return models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit 4p, 5p and 6p models to a price history (JSON output).
    Estimate(EstimateArgs),
    /// Solve haircuts for a criterion or a rating table (CSV output).
    Haircut(HaircutArgs),
    /// Haircut sensitivities to parameter shifts (CSV output).
    Sens(SensArgs),
    /// Rolling-window 6p estimates (CSV output).
    Roll(RollArgs),
    /// Empirical VaR and ES haircuts from prices (CSV output).
    Rawhc(RawArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    trading_days_per_year: Option<u32>,
    /// Target relative error of each transform inversion.
    #[arg(long)]
    inversion_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct ModelSource {
    /// Model parameter JSON file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Inline DEJD parameters: mu,sigma,lambda_up,lambda_down,eta_up,eta_down.
    #[arg(long, value_parser = parse_params)]
    params: Option<DejdParams>,
    /// Fit a 6p model to this `date,price` CSV.
    #[arg(long)]
    prices: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LossArgs {
    /// Margin period of risk in trading days.
    #[arg(long)]
    mpr: Option<u32>,
    /// Liquidity discount g in [0, 1).
    #[arg(long)]
    g: Option<f64>,
    /// Bisection tolerance in the haircut.
    #[arg(long)]
    solver_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    #[arg(long)]
    max_evaluations: Option<usize>,
    /// Relative objective spread that ends each optimizer run.
    #[arg(long)]
    optimizer_tolerance: Option<f64>,
    /// Fewest returns accepted for estimation.
    #[arg(long)]
    min_length: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// `date,price` CSV.
    #[arg(long)]
    prices: Option<PathBuf>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct HaircutArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, value_enum)]
    criterion: Option<CriterionName>,
    /// Loss probability budget (pd); omit to use a rating table.
    #[arg(long)]
    p: Option<f64>,
    /// Expected loss budget (el); omit to use a rating table.
    #[arg(long)]
    l0: Option<f64>,
    /// Confidence level (var, es, ec).
    #[arg(long)]
    q: Option<f64>,
    /// Capital budget (ec).
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Rating table: `moodys_ig`, `sp_ig` or a `rating,rate,kind` CSV path.
    #[arg(long)]
    ratings: Option<String>,
    /// Comma-separated subset of ratings.
    #[arg(long, value_delimiter = ',')]
    select: Option<Vec<String>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SensArgs {
    #[command(flatten)]
    source: ModelSource,
    /// `parameter,delta` CSV.
    #[arg(long)]
    shifts: Option<PathBuf>,
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long)]
    ratings: Option<String>,
    #[arg(long, value_delimiter = ',')]
    select: Option<Vec<String>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RollArgs {
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long)]
    window_years: Option<u32>,
    #[arg(long, value_enum)]
    step: Option<Step>,
    #[arg(long, value_enum)]
    anchor: Option<AnchorArg>,
    /// Rating whose haircut is reported per window.
    #[arg(long)]
    rating: Option<String>,
    #[arg(long)]
    ratings: Option<String>,
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RawArgs {
    #[arg(long)]
    prices: Option<PathBuf>,
    /// Decline horizon in trading days.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    var_q: Option<f64>,
    #[arg(long)]
    es_q: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Var,
    Es,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnchorArg {
    Forward,
    Trailing,
}

fn parse_params(s: &str) -> Result<DejdParams, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    let v: [f64; 6] = v.try_into().map_err(|_| "expected six comma-separated numbers".to_string())?;
    Ok(DejdParams::from_array(v))
}

impl Common {
    fn apply(&self, mut c: RunConfig) -> RunConfig {
        c.output = self.output.clone();
        c.trading_days_per_year = self.trading_days_per_year;
        c.inversion_tolerance = self.inversion_tolerance;
        c
    }
}

impl ModelSource {
    fn apply(&self, mut c: RunConfig) -> RunConfig {
        c.model = self.model.clone();
        c.params = self.params;
        c.prices = self.prices.clone();
        c
    }
}

impl LossArgs {
    fn apply(&self, mut c: RunConfig) -> RunConfig {
        c.mpr_days = self.mpr;
        c.liquidity_discount = self.g;
        c.solver_tolerance = self.solver_tolerance;
        c
    }
}

impl OptimizerArgs {
    fn apply(&self, mut c: RunConfig) -> RunConfig {
        c.max_evaluations = self.max_evaluations;
        c.optimizer_tolerance = self.optimizer_tolerance;
        c.min_length = self.min_length;
        c
    }
}

/// Flags as a config layer, plus the config file named by `--config`.
fn layers(command: &Command) -> (RunConfig, Option<&PathBuf>) {
    let base = RunConfig::default();
    match command {
        Command::Estimate(a) => {
            let mut c = a.optimizer.apply(a.common.apply(base));
            c.prices = a.prices.clone();
            (c, a.common.config.as_ref())
        }
        Command::Haircut(a) => {
            let mut c = a.loss.apply(a.source.apply(a.common.apply(base)));
            c.criterion = a.criterion;
            c.p = a.p;
            c.l0 = a.l0;
            c.q = a.q;
            c.c0 = a.c0;
            c.measure = a.measure.map(|m| match m {
                MeasureArg::Var => RiskMeasure::Var,
                MeasureArg::Es => RiskMeasure::Es,
            });
            c.ratings = a.ratings.clone();
            c.select = a.select.clone();
            (c, a.common.config.as_ref())
        }
        Command::Sens(a) => {
            let mut c = a.loss.apply(a.source.apply(a.common.apply(base)));
            c.shifts = a.shifts.clone();
            c.ratings = a.ratings.clone();
            c.select = a.select.clone();
            (c, a.common.config.as_ref())
        }
        Command::Roll(a) => {
            let mut c = a.optimizer.apply(a.loss.apply(a.common.apply(base)));
            c.prices = a.prices.clone();
            c.window_years = a.window_years;
            c.step = a.step;
            c.anchor = a.anchor.map(|a| match a {
                AnchorArg::Forward => WindowAnchor::Forward,
                AnchorArg::Trailing => WindowAnchor::Trailing,
            });
            c.rating = a.rating.clone();
            c.ratings = a.ratings.clone();
            (c, a.common.config.as_ref())
        }
        Command::Rawhc(a) => {
            let mut c = a.common.apply(base);
            c.prices = a.prices.clone();
            c.horizon_days = a.horizon;
            c.var_q = a.var_q;
            c.es_q = a.es_q;
            (c, a.common.config.as_ref())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (flags, file) = layers(&cli.command);
    let file_config = match file {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let config = flags.over(file_config);
    config.require_positive()?;
    match cli.command {
        Command::Estimate(_) => commands::estimate(config),
        Command::Haircut(_) => commands::haircut(config),
        Command::Sens(_) => commands::sens(config),
        Command::Roll(_) => commands::roll(config),
        Command::Rawhc(_) => commands::rawhc(config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
