//! Run configuration: command-line flags layered over a JSON file over defaults.

use std::path::{Path, PathBuf};

use haircut_core::estimate::WindowAnchor;
use haircut_core::{DejdParams, RiskMeasure};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CriterionName {
    /// Expected loss at or below a budget.
    El,
    /// Probability of any loss at or below a budget.
    Pd,
    /// Value-at-risk of the price decline.
    Var,
    /// Expected shortfall of the price decline.
    Es,
    /// Economic capital at or below a budget.
    Ec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Monthly,
    Quarterly,
    Semiannual,
    Annual,
}

impl Step {
    pub fn months(self) -> u32 {
        match self {
            Step::Monthly => 1,
            Step::Quarterly => 3,
            Step::Semiannual => 6,
            Step::Annual => 12,
        }
    }
}

/// Every setting a command can take. The same shape is read from `--config`
/// files and written back into outputs, with unset fields omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub prices: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub params: Option<DejdParams>,
    pub mpr_days: Option<u32>,
    pub liquidity_discount: Option<f64>,
    pub trading_days_per_year: Option<u32>,
    pub criterion: Option<CriterionName>,
    pub p: Option<f64>,
    pub l0: Option<f64>,
    pub q: Option<f64>,
    pub c0: Option<f64>,
    pub measure: Option<RiskMeasure>,
    /// Bundled table name or CSV path.
    pub ratings: Option<String>,
    pub select: Option<Vec<String>>,
    pub rating: Option<String>,
    pub shifts: Option<PathBuf>,
    pub inversion_tolerance: Option<f64>,
    pub solver_tolerance: Option<f64>,
    pub optimizer_tolerance: Option<f64>,
    pub max_evaluations: Option<usize>,
    pub min_length: Option<usize>,
    pub window_years: Option<u32>,
    pub step: Option<Step>,
    pub anchor: Option<WindowAnchor>,
    pub horizon_days: Option<usize>,
    pub var_q: Option<f64>,
    pub es_q: Option<f64>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($top:expr, $bottom:expr, $($field:ident),* $(,)?) => {
        RunConfig { $($field: $top.$field.or($bottom.$field)),* }
    };
}

fn rebase(path: &mut Option<PathBuf>, dir: &Path) {
    if let Some(p) = path {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        rebase(&mut config.prices, dir);
        rebase(&mut config.model, dir);
        rebase(&mut config.shifts, dir);
        rebase(&mut config.output, dir);
        if let Some(r) = &config.ratings {
            if haircut_core::RatingTargetTable::builtin(r).is_none() {
                config.ratings = Some(dir.join(r).to_string_lossy().into_owned());
            }
        }
        Ok(config)
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        overlay_fields!(
            self,
            lower,
            command,
            prices,
            model,
            params,
            mpr_days,
            liquidity_discount,
            trading_days_per_year,
            criterion,
            p,
            l0,
            q,
            c0,
            measure,
            ratings,
            select,
            rating,
            shifts,
            inversion_tolerance,
            solver_tolerance,
            optimizer_tolerance,
            max_evaluations,
            min_length,
            window_years,
            step,
            anchor,
            horizon_days,
            var_q,
            es_q,
            output,
        )
    }

    /// JSON with unset fields dropped.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.retain(|_, v| !v.is_null());
        }
        value
    }

    pub fn require_positive(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("inversion_tolerance", self.inversion_tolerance),
            ("solver_tolerance", self.solver_tolerance),
            ("optimizer_tolerance", self.optimizer_tolerance),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::input(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}
