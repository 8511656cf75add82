//! Haircuts solved from credit-risk criteria on the margin-period loss.
//!
//! Every criterion is monotone in the haircut, so each solver bisects for the
//! infimum of the haircuts that satisfy it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::JumpDiffusionModel;
use crate::loss::{LossPricer, LossSetup};
use crate::transform::InversionDiagnostics;

/// Upper end of every haircut bracket.
pub const MAX_HAIRCUT: f64 = 1.0 - 1e-9;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskMeasure {
    Var,
    Es,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum HaircutCriterion {
    /// Pr(L > 0) ≤ p.
    FirstLossPd { p: f64 },
    /// E[L] ≤ l0.
    ExpectedLoss { l0: f64 },
    /// q-quantile of the price decline.
    ValueAtRisk { q: f64 },
    /// Mean price decline beyond the q-quantile.
    ExpectedShortfall { q: f64 },
    /// Loss VaR or ES at q, less expected loss, ≤ c0.
    EconomicCapital { c0: f64, measure: RiskMeasure, q: f64 },
}

fn check_open_unit(field: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")));
    }
    Ok(())
}

impl HaircutCriterion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HaircutCriterion::FirstLossPd { p } => check_open_unit("p", p),
            HaircutCriterion::ExpectedLoss { l0 } => check_open_unit("l0", l0),
            HaircutCriterion::ValueAtRisk { q } | HaircutCriterion::ExpectedShortfall { q } => check_open_unit("q", q),
            HaircutCriterion::EconomicCapital { c0, q, .. } => {
                check_open_unit("q", q)?;
                // Budgets of a full notional or more are trivially met.
                if !(c0 > 0.0) {
                    return Err(Error::invalid("c0", format!("must be positive, got {c0}")));
                }
                Ok(())
            }
        }
    }
}

/// A solved haircut with the diagnostics of the last inversion that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaircutSolution {
    pub haircut: f64,
    pub evaluations: usize,
    pub diagnostics: Option<InversionDiagnostics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    /// One-year expected loss rate.
    El,
    /// One-year default rate, used as a first-loss probability.
    Pd,
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::El => "el",
            TargetKind::Pd => "pd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTarget {
    pub rating: String,
    pub rate: f64,
    pub kind: TargetKind,
}

/// Rating label → one-year loss or default rate, best rating first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatingTargetTable {
    entries: Vec<RatingTarget>,
}

const MOODYS_IG: &str = include_str!("../data/moodys_ig.csv");
const SP_IG: &str = include_str!("../data/sp_ig.csv");

impl RatingTargetTable {
    pub fn new(entries: Vec<RatingTarget>) -> Result<Self> {
        let table = Self { entries };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(e.rate > 0.0 && e.rate < 1.0) {
                return Err(Error::invalid("rate", format!("{}: rate {} not in (0, 1)", e.rating, e.rate)));
            }
        }
        for w in self.entries.windows(2) {
            if w[1].rate <= w[0].rate {
                return Err(Error::invalid(
                    "rate",
                    format!("rates must increase down the scale: {} ({}) after {} ({})", w[1].rating, w[1].rate, w[0].rating, w[0].rate),
                ));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[RatingTarget] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, rating: &str) -> Option<&RatingTarget> {
        self.entries.iter().find(|e| e.rating == rating)
    }

    /// Subset of ratings, in the given order.
    pub fn select(&self, ratings: &[&str]) -> Result<Self> {
        let entries = ratings
            .iter()
            .map(|r| {
                self.get(r)
                    .cloned()
                    .ok_or_else(|| Error::invalid("rating", format!("unknown rating {r}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Parses `rating,rate,kind` CSV; lines starting with `#` are comments.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["rating", "rate", "kind"] {
            return Err(Error::Parse {
                line: reader.position().line(),
                reason: format!("expected header `rating,rate,kind`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut entries = Vec::new();
        for record in reader.deserialize::<RatingTarget>() {
            let entry = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                reason: e.to_string(),
            })?;
            entries.push(entry);
        }
        Self::new(entries)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rating,rate,kind\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:e},{}\n", e.rating, e.rate, e.kind));
        }
        out
    }

    /// Moody's idealized one-year expected loss rates, Aaa to Baa3.
    pub fn moodys_ig() -> Self {
        Self::from_csv(MOODYS_IG).expect("bundled table is valid")
    }

    /// S&P average one-year default rates, AAA to BBB-.
    pub fn sp_ig() -> Self {
        Self::from_csv(SP_IG).expect("bundled table is valid")
    }

    /// A bundled table by name (`moodys_ig` or `sp_ig`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "moodys_ig" => Some(Self::moodys_ig()),
            "sp_ig" => Some(Self::sp_ig()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub rating: String,
    pub rate: f64,
    pub kind: TargetKind,
    pub haircut: f64,
    pub diagnostics: Option<InversionDiagnostics>,
}

/// Smallest h in [lo, hi] with `holds(h)`, assuming `holds` is monotone in h.
/// Returns the satisfying end of the final bracket.
fn bisect_infimum<F>(lo: f64, hi: f64, tol: f64, mut holds: F) -> Result<Option<(f64, usize, Option<InversionDiagnostics>)>>
where
    F: FnMut(f64) -> Result<(bool, Option<InversionDiagnostics>)>,
{
    let (ok, diag) = holds(lo)?;
    if ok {
        return Ok(Some((lo, 1, diag)));
    }
    let (ok, mut best) = holds(hi)?;
    if !ok {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut evaluations = 2;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, diag) = holds(mid)?;
        evaluations += 1;
        if ok {
            hi = mid;
            best = diag;
        } else {
            lo = mid;
        }
    }
    Ok(Some((hi, evaluations, best)))
}

/// Haircut solvers over one loss pricer.
#[derive(Debug, Clone)]
pub struct HaircutSolver<'a> {
    pricer: LossPricer<'a>,
    tolerance: f64,
    lower: f64,
}

impl<'a> HaircutSolver<'a> {
    pub fn new(pricer: LossPricer<'a>) -> Self {
        Self {
            pricer,
            tolerance: DEFAULT_TOLERANCE,
            lower: 0.0,
        }
    }

    pub fn for_model(model: &'a JumpDiffusionModel, setup: LossSetup) -> Result<Self> {
        Ok(Self::new(LossPricer::new(model, setup)?))
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 0.1) {
            return Err(Error::invalid("tolerance", format!("must lie in (0, 0.1), got {tolerance}")));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    /// Lower end of the bisection bracket (default 0).
    pub fn with_lower_bracket(mut self, lower: f64) -> Result<Self> {
        if !(0.0..MAX_HAIRCUT).contains(&lower) {
            return Err(Error::invalid("lower", format!("bracket start {lower} outside [0, 1)")));
        }
        self.lower = lower;
        Ok(self)
    }

    pub fn pricer(&self) -> &LossPricer<'a> {
        &self.pricer
    }

    fn solve_with<F>(&self, what: impl FnOnce() -> String, holds: F) -> Result<HaircutSolution>
    where
        F: FnMut(f64) -> Result<(bool, Option<InversionDiagnostics>)>,
    {
        match bisect_infimum(self.lower, MAX_HAIRCUT, self.tolerance, holds)? {
            Some((haircut, evaluations, diagnostics)) => Ok(HaircutSolution {
                haircut,
                evaluations,
                diagnostics,
            }),
            None => Err(Error::Unattainable(what())),
        }
    }

    /// Smallest h with Pr(L > 0 | h) ≤ p.
    pub fn first_loss(&self, p: f64) -> Result<HaircutSolution> {
        check_open_unit("p", p)?;
        self.solve_with(
            || format!("first-loss probability {p} not reached below h = {MAX_HAIRCUT}"),
            |h| {
                let v = self.pricer.tail_prob(h, 0.0)?;
                Ok((v.value <= p, Some(v.diagnostics)))
            },
        )
    }

    /// Smallest h with E[L | h] ≤ l0.
    pub fn expected_loss_target(&self, l0: f64) -> Result<HaircutSolution> {
        check_open_unit("l0", l0)?;
        self.solve_with(
            || format!("expected loss {l0} not reached below h = {MAX_HAIRCUT}"),
            |h| {
                let v = self.pricer.expected_loss_detail(h)?;
                Ok((v.value <= l0, Some(v.diagnostics)))
            },
        )
    }

    fn without_discount(&self) -> Result<Self> {
        let setup = self.pricer.setup().with_discount(0.0);
        Ok(Self {
            pricer: self.pricer.with_setup(setup)?,
            tolerance: self.tolerance,
            lower: self.lower,
        })
    }

    /// q-quantile of the price decline y = 1 − B_u/B₀: the first-loss
    /// haircut at p = 1 − q with no liquidity discount.
    pub fn value_at_risk(&self, q: f64) -> Result<HaircutSolution> {
        check_open_unit("q", q)?;
        self.without_discount()?.first_loss(1.0 - q)
    }

    /// E[y | y > VaR_q] = VaR_q + E[(y − VaR_q)⁺]/(1 − q).
    pub fn expected_shortfall(&self, q: f64) -> Result<HaircutSolution> {
        let var = self.value_at_risk(q)?;
        let excess = self.pricer.put(-(1.0 - var.haircut).ln())?;
        Ok(HaircutSolution {
            haircut: var.haircut + excess.value / (1.0 - q),
            evaluations: var.evaluations + 1,
            diagnostics: Some(excess.diagnostics),
        })
    }

    /// q-quantile of the loss at haircut h, found by bisection in the loss level.
    pub fn loss_quantile(&self, h: f64, q: f64) -> Result<f64> {
        check_open_unit("q", q)?;
        let tail = 1.0 - q;
        if self.pricer.loss_tail_prob(h, 0.0)? <= tail {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0 - h);
        while hi - lo > 1e-3 * self.tolerance {
            let mid = 0.5 * (lo + hi);
            if self.pricer.loss_tail_prob(h, mid)? <= tail {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Loss VaR or ES at q less the expected loss, at haircut h.
    pub fn economic_capital(&self, h: f64, measure: RiskMeasure, q: f64) -> Result<f64> {
        let quantile = self.loss_quantile(h, q)?;
        let expected = self.pricer.expected_loss(h)?;
        let risk = match measure {
            RiskMeasure::Var => quantile,
            RiskMeasure::Es => quantile + self.pricer.stop_loss(h, quantile)?.value / (1.0 - q),
        };
        Ok(risk - expected)
    }

    /// Smallest h whose economic capital is within `c0`.
    pub fn economic_capital_target(&self, c0: f64, measure: RiskMeasure, q: f64) -> Result<HaircutSolution> {
        HaircutCriterion::EconomicCapital { c0, measure, q }.validate()?;
        self.solve_with(
            || format!("economic capital {c0} not reached below h = {MAX_HAIRCUT}"),
            |h| Ok((self.economic_capital(h, measure, q)? <= c0, None)),
        )
    }

    pub fn solve(&self, criterion: &HaircutCriterion) -> Result<HaircutSolution> {
        criterion.validate()?;
        match *criterion {
            HaircutCriterion::FirstLossPd { p } => self.first_loss(p),
            HaircutCriterion::ExpectedLoss { l0 } => self.expected_loss_target(l0),
            HaircutCriterion::ValueAtRisk { q } => self.value_at_risk(q),
            HaircutCriterion::ExpectedShortfall { q } => self.expected_shortfall(q),
            HaircutCriterion::EconomicCapital { c0, measure, q } => self.economic_capital_target(c0, measure, q),
        }
    }

    /// One haircut per rating. `kind` overrides each entry's own target kind.
    pub fn table(&self, targets: &RatingTargetTable, kind: Option<TargetKind>) -> Result<Vec<TableRow>> {
        targets.validate()?;
        let rows = targets
            .entries()
            .iter()
            .map(|e| {
                let kind = kind.unwrap_or(e.kind);
                let solution = match kind {
                    TargetKind::El => self.expected_loss_target(e.rate)?,
                    TargetKind::Pd => self.first_loss(e.rate)?,
                };
                Ok(TableRow {
                    rating: e.rating.clone(),
                    rate: e.rate,
                    kind,
                    haircut: solution.haircut,
                    diagnostics: solution.diagnostics,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for w in rows.windows(2) {
            if w[1].haircut >= w[0].haircut {
                log::warn!("haircut for {} is not below that for {}", w[1].rating, w[0].rating);
            }
        }
        Ok(rows)
    }
}

pub fn haircut_first_loss(model: &JumpDiffusionModel, setup: &LossSetup, p: f64) -> Result<f64> {
    Ok(HaircutSolver::for_model(model, *setup)?.first_loss(p)?.haircut)
}

pub fn value_at_risk(model: &JumpDiffusionModel, setup: &LossSetup, q: f64) -> Result<f64> {
    Ok(HaircutSolver::for_model(model, *setup)?.value_at_risk(q)?.haircut)
}

pub fn expected_shortfall(model: &JumpDiffusionModel, setup: &LossSetup, q: f64) -> Result<f64> {
    Ok(HaircutSolver::for_model(model, *setup)?.expected_shortfall(q)?.haircut)
}

pub fn haircut_expected_loss(model: &JumpDiffusionModel, setup: &LossSetup, l0: f64) -> Result<f64> {
    Ok(HaircutSolver::for_model(model, *setup)?.expected_loss_target(l0)?.haircut)
}

pub fn haircut_economic_capital(model: &JumpDiffusionModel, setup: &LossSetup, c0: f64, measure: RiskMeasure, q: f64) -> Result<f64> {
    Ok(HaircutSolver::for_model(model, *setup)?.economic_capital_target(c0, measure, q)?.haircut)
}

pub fn haircut_table(
    model: &JumpDiffusionModel,
    setup: &LossSetup,
    targets: &RatingTargetTable,
    kind: Option<TargetKind>,
) -> Result<Vec<TableRow>> {
    HaircutSolver::for_model(model, *setup)?.table(targets, kind)
}
