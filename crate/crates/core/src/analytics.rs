//! Haircut sensitivities, liquidity add-ons and empirical VaR/ES haircuts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haircut::{HaircutSolver, RatingTarget, RatingTargetTable, TargetKind, DEFAULT_TOLERANCE};
use crate::levy::{DejdParams, JumpDiffusionModel};
use crate::loss::{LossPricer, LossSetup};
use crate::series::PriceSeries;
use crate::transform::InversionConfig;

/// Minimum number of decline observations beyond the horizon.
pub const MIN_EMPIRICAL_EXCESS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftTarget {
    Mu,
    SigmaA,
    LambdaUp,
    LambdaDown,
    EtaUp,
    EtaDown,
}

impl ShiftTarget {
    pub const ALL: [ShiftTarget; 6] = [
        ShiftTarget::Mu,
        ShiftTarget::SigmaA,
        ShiftTarget::LambdaUp,
        ShiftTarget::LambdaDown,
        ShiftTarget::EtaUp,
        ShiftTarget::EtaDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShiftTarget::Mu => "mu",
            ShiftTarget::SigmaA => "sigma_a",
            ShiftTarget::LambdaUp => "lambda_up",
            ShiftTarget::LambdaDown => "lambda_down",
            ShiftTarget::EtaUp => "eta_up",
            ShiftTarget::EtaDown => "eta_down",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for ShiftTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ShiftTarget::ALL
            .into_iter()
            .find(|t| t.name() == s || (s == "sigma" && *t == ShiftTarget::SigmaA))
            .ok_or_else(|| Error::invalid("target", format!("unknown parameter `{s}`")))
    }
}

/// Additive shift of one parameter, in its native (annualized) units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterShift {
    pub target: ShiftTarget,
    pub delta: f64,
}

impl ParameterShift {
    pub fn new(target: ShiftTarget, delta: f64) -> Self {
        Self { target, delta }
    }

    pub fn apply(&self, params: &DejdParams) -> Result<DejdParams> {
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", format!("shift {self} is not finite")));
        }
        let mut v = params.as_array();
        v[self.target.index()] += self.delta;
        let shifted = DejdParams::from_array(v);
        shifted.to_model().map_err(|e| Error::invalid("shift", format!("{self} gives an invalid model: {e}")))?;
        if shifted.sigma_a < 0.0 {
            return Err(Error::invalid("shift", format!("{self} makes the volatility negative")));
        }
        Ok(shifted)
    }

    /// Reads `parameter,delta` CSV.
    pub fn parse_csv(text: &str) -> Result<Vec<Self>> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?;
        if header.iter().collect::<Vec<_>>() != ["parameter", "delta"] {
            return Err(Error::Parse {
                line: 1,
                reason: "expected header `parameter,delta`".into(),
            });
        }
        let mut shifts = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                reason: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let target = record[0].parse::<ShiftTarget>().map_err(|e| Error::Parse { line, reason: e.to_string() })?;
            let delta: f64 = record[1].parse().map_err(|_| Error::Parse {
                line,
                reason: format!("bad delta `{}`", &record[1]),
            })?;
            shifts.push(Self::new(target, delta));
        }
        Ok(shifts)
    }
}

impl fmt::Display for ParameterShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}", self.target.name(), self.delta)
    }
}

/// Haircut changes in percentage points, one row per shift, one column per rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTable {
    pub ratings: Vec<String>,
    /// Base haircuts in percent.
    pub base: Vec<f64>,
    pub shifts: Vec<ParameterShift>,
    pub deltas: Vec<Vec<f64>>,
}

impl SensitivityTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("shift,{}\n", self.ratings.join(","));
        let row = |label: String, values: &[f64]| {
            let cells: Vec<String> = values.iter().map(|v| format!("{:.2}", v + 0.0)).collect();
            format!("{label},{}\n", cells.join(","))
        };
        out.push_str(&row("base".into(), &self.base));
        for (shift, deltas) in self.shifts.iter().zip(&self.deltas) {
            out.push_str(&row(shift.to_string(), deltas));
        }
        out
    }
}

fn table_haircuts(
    model: &JumpDiffusionModel,
    setup: &LossSetup,
    targets: &RatingTargetTable,
    inversion: &InversionConfig,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let pricer = LossPricer::new(model, *setup)?.with_config(*inversion)?;
    let rows = HaircutSolver::new(pricer).with_tolerance(tolerance)?.table(targets, None)?;
    Ok(rows.into_iter().map(|r| r.haircut).collect())
}

/// haircut(shifted) − haircut(base) per shift and rating, in percentage points.
/// Each rating uses its own target kind.
pub fn sensitivity_table(
    params: &DejdParams,
    setup: &LossSetup,
    targets: &RatingTargetTable,
    shifts: &[ParameterShift],
) -> Result<SensitivityTable> {
    sensitivity_table_with(params, setup, targets, shifts, &InversionConfig::default(), DEFAULT_TOLERANCE)
}

/// [`sensitivity_table`] with explicit inversion settings and bisection tolerance.
pub fn sensitivity_table_with(
    params: &DejdParams,
    setup: &LossSetup,
    targets: &RatingTargetTable,
    shifts: &[ParameterShift],
    inversion: &InversionConfig,
    tolerance: f64,
) -> Result<SensitivityTable> {
    let shifted: Vec<DejdParams> = shifts.iter().map(|s| s.apply(params)).collect::<Result<_>>()?;
    let base = table_haircuts(&params.to_model()?, setup, targets, inversion, tolerance)?;
    let mut deltas = Vec::with_capacity(shifts.len());
    for (shift, p) in shifts.iter().zip(&shifted) {
        let hs = if shift.delta == 0.0 {
            base.clone()
        } else {
            table_haircuts(&p.to_model()?, setup, targets, inversion, tolerance)?
        };
        deltas.push(hs.iter().zip(&base).map(|(h, b)| 100.0 * (h - b)).collect());
    }
    Ok(SensitivityTable {
        ratings: targets.entries().iter().map(|e| e.rating.clone()).collect(),
        base: base.iter().map(|h| 100.0 * h).collect(),
        shifts: shifts.to_vec(),
        deltas,
    })
}

fn solve_target(solver: &HaircutSolver, target: &RatingTarget) -> Result<f64> {
    let solution = match target.kind {
        TargetKind::El => solver.expected_loss_target(target.rate)?,
        TargetKind::Pd => solver.first_loss(target.rate)?,
    };
    Ok(solution.haircut)
}

/// haircut(g) − haircut(0) for each liquidity discount g, as fractions.
pub fn liquidity_haircut_delta(
    model: &JumpDiffusionModel,
    setup: &LossSetup,
    target: &RatingTarget,
    g_values: &[f64],
) -> Result<Vec<f64>> {
    let base_setup = setup.with_discount(0.0);
    let base = solve_target(&HaircutSolver::for_model(model, base_setup)?, target)?;
    g_values
        .iter()
        .map(|&g| {
            if g == 0.0 {
                return Ok(0.0);
            }
            let setup = base_setup.with_discount(g);
            setup.validate()?;
            Ok(solve_target(&HaircutSolver::for_model(model, setup)?, target)? - base)
        })
        .collect()
}

/// Linear interpolation between order statistics of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRisk {
    pub horizon_days: usize,
    pub q_var: f64,
    pub q_es: f64,
    /// Floored at zero.
    pub var: f64,
    pub es: f64,
    pub var_unfloored: f64,
    pub es_unfloored: f64,
    /// Number of overlapping declines used.
    pub samples: usize,
    pub notes: Vec<String>,
}

impl EmpiricalRisk {
    pub fn to_csv(&self) -> String {
        format!(
            "horizon_days,q_var,q_es,samples,var_pct,es_pct\n{},{},{},{},{:.2},{:.2}\n",
            self.horizon_days,
            self.q_var,
            self.q_es,
            self.samples,
            100.0 * self.var,
            100.0 * self.es
        )
    }
}

/// Raw VaR and ES haircuts from overlapping `horizon_days` price declines
/// y_i = 1 − P_{i+horizon}/P_i.
pub fn empirical_var_es(prices: &PriceSeries, horizon_days: usize, q_var: f64, q_es: f64) -> Result<EmpiricalRisk> {
    if horizon_days == 0 {
        return Err(Error::invalid("horizon_days", "must be at least one day"));
    }
    for (field, q) in [("q_var", q_var), ("q_es", q_es)] {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(field, format!("must lie in (0, 1), got {q}")));
        }
    }
    let p = prices.prices();
    if p.len() < horizon_days + MIN_EMPIRICAL_EXCESS {
        return Err(Error::InsufficientData(format!(
            "{} prices, need at least {} for a {horizon_days}-day horizon",
            p.len(),
            horizon_days + MIN_EMPIRICAL_EXCESS
        )));
    }
    let mut declines: Vec<f64> = p.iter().zip(&p[horizon_days..]).map(|(a, b)| 1.0 - b / a).collect();
    declines.sort_by(f64::total_cmp);
    let var_unfloored = quantile_sorted(&declines, q_var);
    let threshold = quantile_sorted(&declines, q_es);
    let tail: Vec<f64> = declines.iter().copied().filter(|y| *y > threshold).collect();
    let es_unfloored = if tail.is_empty() {
        threshold
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    let mut notes = vec!["declines use overlapping windows and are serially correlated".to_string()];
    if var_unfloored < 0.0 {
        notes.push(format!("VaR {var_unfloored:.6} is negative (no declines at this level); reported as 0"));
    }
    if es_unfloored < 0.0 {
        notes.push(format!("ES {es_unfloored:.6} is negative; reported as 0"));
    }
    Ok(EmpiricalRisk {
        horizon_days,
        q_var,
        q_es,
        var: var_unfloored.max(0.0),
        es: es_unfloored.max(0.0),
        var_unfloored,
        es_unfloored,
        samples: declines.len(),
        notes,
    })
}
