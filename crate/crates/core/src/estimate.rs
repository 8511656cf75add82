//! Maximum-likelihood estimation of double-exponential jump-diffusion
//! parameters from log returns.
//!
//! Densities come from inverting the density transform over the whole sample
//! at once. Estimation is staged: jump parameters first with drift and
//! volatility fixed at their sample values, then volatility, then everything,
//! each stage warm-started from the previous one.

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DejdParams, Moments, TimeConvention};
use crate::optim::{minimize, Bounds, NelderMeadConfig};
use crate::series::{PriceSeries, ReturnSeries, MIN_ESTIMATION_LENGTH};
use crate::transform::{density_batch, InversionConfig};

pub const DENSITY_FLOOR: f64 = 1e-300;
/// Largest tolerated share of observations whose density inversion failed.
pub const MAX_FAILURE_SHARE: f64 = 1e-3;

/// Box for (μ, σ_a, λ_u, λ_d, η_u, η_d), annualized.
pub const LOWER: [f64; 6] = [-5.0, 1e-4, 0.0, 0.0, 1.0 + 1e-6, 1e-3];
pub const UPPER: [f64; 6] = [5.0, 5.0, 500.0, 500.0, 2000.0, 2000.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    /// Per-observation mean and standard deviation.
    pub mean: f64,
    pub stdev: f64,
    pub mean_annual: f64,
    pub stdev_annual: f64,
    pub skewness: f64,
    /// Raw fourth standardized moment.
    pub kurtosis: f64,
}

pub fn sample_stats(series: &ReturnSeries) -> Result<SampleStats> {
    let xs = series.returns();
    let n = xs.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("{n} returns, moments need at least 4")));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if m2 == 0.0 || m2.sqrt() <= 1e-12 * mean.abs() {
        return Err(Error::Degenerate("returns have zero variance; skewness and kurtosis are undefined".into()));
    }
    let stdev = (m2 * nf / (nf - 1.0)).sqrt();
    Ok(SampleStats {
        n,
        mean,
        stdev,
        mean_annual: mean / series.dt,
        stdev_annual: stdev / series.dt.sqrt(),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Σ log f(x_i) over the series, with densities floored at [`DENSITY_FLOOR`].
pub fn log_likelihood(params: &DejdParams, series: &ReturnSeries) -> Result<f64> {
    let config = InversionConfig::default().with_target(1e-7);
    log_likelihood_with(params, series, &config)
}

pub fn log_likelihood_with(params: &DejdParams, series: &ReturnSeries, config: &InversionConfig) -> Result<f64> {
    let model = params.to_model()?;
    if series.is_empty() {
        return Ok(0.0);
    }
    let batch = density_batch(&model, series.dt, series.returns(), config)?;
    let mut failed = 0usize;
    let mut total = 0.0;
    for v in &batch.values {
        if !(v.is_finite() && *v > 0.0) {
            failed += 1;
        }
        total += v.max(DENSITY_FLOOR).ln();
    }
    if failed as f64 > MAX_FAILURE_SHARE * series.len() as f64 {
        return Err(Error::InversionFailures {
            failed,
            total: series.len(),
        });
    }
    if failed > 0 {
        log::warn!("{failed} of {} densities floored at {DENSITY_FLOOR:e}", series.len());
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "4p")]
    FourParameter,
    #[serde(rename = "5p")]
    FiveParameter,
    #[serde(rename = "6p")]
    SixParameter,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::FourParameter => "4p",
            Stage::FiveParameter => "5p",
            Stage::SixParameter => "6p",
        }
    }

    /// Indices into (μ, σ_a, λ_u, λ_d, η_u, η_d) that are optimized.
    fn free(self) -> &'static [usize] {
        match self {
            Stage::FourParameter => &[2, 3, 4, 5],
            Stage::FiveParameter => &[1, 2, 3, 4, 5],
            Stage::SixParameter => &[0, 1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub stage: Stage,
    pub params: DejdParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub sample_stats: SampleStats,
    /// Moments of one observation period under the fitted model.
    pub model_moments: Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub optimizer: NelderMeadConfig,
    pub inversion: InversionConfig,
    pub min_length: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            optimizer: NelderMeadConfig::default(),
            inversion: InversionConfig::default().with_target(1e-7),
            min_length: MIN_ESTIMATION_LENGTH,
        }
    }
}

struct Objective<'a> {
    series: &'a ReturnSeries,
    config: &'a EstimationConfig,
}

impl Objective<'_> {
    fn loglik(&self, v: [f64; 6]) -> f64 {
        log_likelihood_with(&DejdParams::from_array(v), self.series, &self.config.inversion).unwrap_or(f64::NEG_INFINITY)
    }
}

fn clamp_to_box(v: &mut [f64; 6]) {
    for i in 0..6 {
        v[i] = v[i].clamp(LOWER[i], UPPER[i]);
    }
}

/// Jump-parameter start: the best of a small grid of intensities and sizes
/// scaled to the per-period volatility.
fn initial_guess(objective: &Objective, stats: &SampleStats) -> [f64; 6] {
    let mut best: Option<([f64; 6], f64)> = None;
    for lambda in [5.0, 20.0, 60.0] {
        for size in [1.5, 3.0] {
            let eta = 1.0 / (size * stats.stdev);
            let mut v = [stats.mean_annual, stats.stdev_annual, lambda, lambda, eta.max(2.0), eta];
            clamp_to_box(&mut v);
            let ll = objective.loglik(v);
            if best.map_or(true, |(_, b)| ll > b) {
                best = Some((v, ll));
            }
        }
    }
    best.expect("nonempty grid").0
}

fn run_stage(
    stage: Stage,
    start: [f64; 6],
    start_ll: f64,
    objective: &Objective,
    stats: SampleStats,
) -> Result<EstimationResult> {
    let free = stage.free();
    let bounds = Bounds::new(free.iter().map(|&i| LOWER[i]).collect(), free.iter().map(|&i| UPPER[i]).collect())?;
    let embed = |x: &[f64]| {
        let mut v = start;
        for (k, &i) in free.iter().enumerate() {
            v[i] = x[k];
        }
        v
    };
    let x0: Vec<f64> = free.iter().map(|&i| start[i]).collect();
    let result = minimize(|x| -objective.loglik(embed(x)), &x0, &bounds, &objective.config.optimizer)?;
    let (mut params, mut ll) = (embed(&result.x), -result.value);
    // A stage never falls below the point it was started from.
    if !(ll >= start_ll) {
        params = start;
        ll = start_ll;
    }
    let params = DejdParams::from_array(params);
    if !ll.is_finite() {
        return Err(Error::Degenerate(format!("stage {} found no finite likelihood", stage.label())));
    }
    Ok(EstimationResult {
        stage,
        params,
        log_likelihood: ll,
        converged: result.converged,
        iterations: result.iterations,
        evaluations: result.evaluations,
        sample_stats: stats,
        model_moments: params.to_model()?.cumulants(objective.series.dt)?,
    })
}

/// The 4p, 5p and 6p fits, in that order.
pub fn estimate_staged(series: &ReturnSeries) -> Result<[EstimationResult; 3]> {
    estimate_staged_with(series, &EstimationConfig::default())
}

pub fn estimate_staged_with(series: &ReturnSeries, config: &EstimationConfig) -> Result<[EstimationResult; 3]> {
    series.require_length(config.min_length)?;
    let stats = sample_stats(series)?;
    let objective = Objective { series, config };
    let start = initial_guess(&objective, &stats);
    let four = run_stage(Stage::FourParameter, start, objective.loglik(start), &objective, stats)?;
    let five = run_stage(Stage::FiveParameter, four.params.as_array(), four.log_likelihood, &objective, stats)?;
    let six = run_stage(Stage::SixParameter, five.params.as_array(), five.log_likelihood, &objective, stats)?;
    for r in [&four, &five, &six] {
        if !r.converged {
            log::warn!("stage {} stopped at the evaluation limit", r.stage.label());
        }
    }
    Ok([four, five, six])
}

/// Where each rolling window sits relative to its quarter start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowAnchor {
    /// The window begins at the quarter start.
    Forward,
    /// The window ends at the quarter start.
    Trailing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window_years: u32,
    /// Months between window starts; 3 for quarterly.
    pub step_months: u32,
    pub anchor: WindowAnchor,
    pub time_convention: TimeConvention,
    pub estimation: EstimationConfig,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window_years: 5,
            step_months: 3,
            anchor: WindowAnchor::Forward,
            time_convention: TimeConvention::default(),
            estimation: EstimationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingWindow {
    /// Quarter start the window is labelled with.
    pub label: NaiveDate,
    pub from: NaiveDate,
    /// Exclusive.
    pub to: NaiveDate,
    pub observations: usize,
    pub result: Option<EstimationResult>,
    pub notice: Option<String>,
}

fn first_step_start(date: NaiveDate, step_months: u32) -> NaiveDate {
    let month0 = date.month0() / step_months * step_months;
    let start = NaiveDate::from_ymd_opt(date.year(), month0 + 1, 1).expect("valid month");
    if start < date {
        start + Months::new(step_months)
    } else {
        start
    }
}

/// One 6p estimate per window. Windows without enough data are kept with a notice.
pub fn rolling_estimate(prices: &PriceSeries, config: &RollingConfig) -> Result<Vec<RollingWindow>> {
    if config.window_years == 0 || config.step_months == 0 || 12 % config.step_months != 0 {
        return Err(Error::invalid("window", "window_years must be positive and step_months divide 12"));
    }
    let (Some(&first), Some(&last)) = (prices.dates().first(), prices.dates().last()) else {
        return Err(Error::InsufficientData("empty price series".into()));
    };
    let window = Months::new(12 * config.window_years);
    let step = Months::new(config.step_months);
    let mut label = match config.anchor {
        WindowAnchor::Forward => first_step_start(first, config.step_months),
        WindowAnchor::Trailing => first_step_start(first + window, config.step_months),
    };
    let mut windows = Vec::new();
    loop {
        let (from, to) = match config.anchor {
            WindowAnchor::Forward => (label, label + window),
            WindowAnchor::Trailing => (label - window, label),
        };
        if to > last + chrono::Days::new(1) {
            break;
        }
        let slice = prices.between(from, to);
        let returns = slice.log_returns(config.time_convention)?;
        let mut entry = RollingWindow {
            label,
            from,
            to,
            observations: returns.len(),
            result: None,
            notice: None,
        };
        match estimate_staged_with(&returns, &config.estimation) {
            Ok([_, _, six]) => entry.result = Some(six),
            Err(e @ (Error::InsufficientData(_) | Error::Degenerate(_))) => {
                log::warn!("window {from}..{to} skipped: {e}");
                entry.notice = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
        windows.push(entry);
        label = label + step;
    }
    if windows.is_empty() {
        return Err(Error::InsufficientData(format!(
            "prices from {first} to {last} do not cover one {}-year window",
            config.window_years
        )));
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpDiffusionModel;
    use crate::simulate::simulate_returns;

    #[test]
    fn gaussian_likelihood_matches_closed_form() {
        let dt = 1.0 / 252.0;
        let xs = simulate_returns(&JumpDiffusionModel::lognormal(0.05, 0.2), dt, 300, 3).unwrap();
        let series = ReturnSeries::daily(xs.clone()).unwrap();
        let p = DejdParams::new(0.05, 0.2, 0.0, 0.0, 50.0, 50.0);
        let ll = log_likelihood(&p, &series).unwrap();
        let s = 0.2 * dt.sqrt();
        let exact: f64 = xs
            .iter()
            .map(|x| -0.5 * ((x - 0.05 * dt) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln())
            .sum();
        assert!((ll - exact).abs() < 1e-6 * xs.len() as f64, "{ll} vs {exact}");
    }

    #[test]
    fn stats_of_constant_series_are_degenerate() {
        let s = ReturnSeries::daily(vec![0.001; 300]).unwrap();
        assert!(matches!(sample_stats(&s), Err(Error::Degenerate(_))));
        assert!(sample_stats(&ReturnSeries::daily(vec![0.1, 0.2, 0.3]).unwrap()).is_err());
    }

    #[test]
    fn quarter_starts() {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
        assert_eq!(first_step_start(d(2005, 1, 1), 3), d(2005, 1, 1));
        assert_eq!(first_step_start(d(2005, 1, 3), 3), d(2005, 4, 1));
        assert_eq!(first_step_start(d(2005, 11, 30), 3), d(2006, 1, 1));
    }

    #[test]
    fn short_series_is_rejected() {
        let s = ReturnSeries::daily(vec![0.01, -0.01, 0.02, 0.0, 0.01]).unwrap();
        assert!(matches!(estimate_staged(&s), Err(Error::InsufficientData(_))));
    }
}
