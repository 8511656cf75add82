use std::fmt::Write as _;
use std::path::Path;

use haircut_core::analytics::{empirical_var_es, sensitivity_table_with, ParameterShift};
use haircut_core::estimate::{estimate_staged_with, rolling_estimate, EstimationConfig, EstimationResult, RollingConfig, WindowAnchor};
use haircut_core::haircut::{HaircutSolution, TableRow, DEFAULT_TOLERANCE};
use haircut_core::optim::NelderMeadConfig;
use haircut_core::{
    DejdParams, HaircutSolver, InversionConfig, InversionDiagnostics, JumpDiffusionModel, LossPricer, LossSetup, PriceSeries,
    RatingTargetTable, RiskMeasure, TargetKind, TimeConvention,
};
use serde_json::json;

use crate::config::{CriterionName, RunConfig, Step};
use crate::CliError;

fn with_path<T>(path: &Path, r: haircut_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn require<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::input(format!("missing `{name}` (flag or config file)")))
}

fn time_convention(c: &mut RunConfig) -> Result<TimeConvention, CliError> {
    let days = *c.trading_days_per_year.get_or_insert(252);
    Ok(TimeConvention::new(days)?)
}

fn inversion(c: &mut RunConfig) -> Result<InversionConfig, CliError> {
    let config = InversionConfig::default().with_target(*c.inversion_tolerance.get_or_insert(1e-9));
    config.validate()?;
    Ok(config)
}

fn loss_setup(c: &mut RunConfig) -> Result<LossSetup, CliError> {
    let mut setup = LossSetup::new(*c.mpr_days.get_or_insert(10), *c.liquidity_discount.get_or_insert(0.0))?;
    setup.time_convention = time_convention(c)?;
    setup.validate()?;
    Ok(setup)
}

fn estimation_config(c: &mut RunConfig) -> Result<EstimationConfig, CliError> {
    let defaults = EstimationConfig::default();
    Ok(EstimationConfig {
        optimizer: NelderMeadConfig {
            rel_tol: *c.optimizer_tolerance.get_or_insert(defaults.optimizer.rel_tol),
            max_evaluations: *c.max_evaluations.get_or_insert(defaults.optimizer.max_evaluations),
            ..defaults.optimizer
        },
        // Densities for estimation default to a looser target than pricing.
        inversion: InversionConfig::default().with_target(c.inversion_tolerance.unwrap_or(1e-7)),
        min_length: *c.min_length.get_or_insert(defaults.min_length),
    })
}

fn read_prices(c: &RunConfig) -> Result<PriceSeries, CliError> {
    let path = require(&c.prices, "prices")?;
    with_path(path, PriceSeries::from_csv_path(path))
}

fn ratings(c: &mut RunConfig, default: &str) -> Result<RatingTargetTable, CliError> {
    let name = c.ratings.get_or_insert_with(|| default.to_string()).clone();
    let table = match RatingTargetTable::builtin(&name) {
        Some(t) => t,
        None => with_path(Path::new(&name), RatingTargetTable::from_path(Path::new(&name)))?,
    };
    match &c.select {
        Some(names) => {
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            Ok(table.select(&names)?)
        }
        None => Ok(table),
    }
}

/// The model named by exactly one of `model`, `params` or `prices`.
fn load_model(c: &mut RunConfig) -> Result<(JumpDiffusionModel, Option<EstimationResult>), CliError> {
    let sources = [c.model.is_some(), c.params.is_some(), c.prices.is_some()];
    match sources.iter().filter(|s| **s).count() {
        0 => return Err(CliError::input("no model: give one of --model, --params or --prices")),
        1 => {}
        _ => return Err(CliError::input("give exactly one of --model, --params or --prices")),
    }
    if let Some(path) = &c.model {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read model {}: {e}", path.display())))?;
        return Ok((with_path(path, JumpDiffusionModel::from_json(&text))?, None));
    }
    if let Some(p) = &c.params {
        return Ok((p.to_model()?, None));
    }
    let prices = read_prices(c)?;
    let convention = time_convention(c)?;
    let estimation = estimation_config(c)?;
    let returns = prices.log_returns(convention)?;
    let [_, _, six] = estimate_staged_with(&returns, &estimation)?;
    if !six.converged {
        log::warn!("6p estimate stopped at the evaluation limit");
    }
    Ok((six.params.to_model()?, Some(six)))
}

fn make_solver<'a>(model: &'a JumpDiffusionModel, setup: LossSetup, c: &mut RunConfig) -> Result<HaircutSolver<'a>, CliError> {
    let pricer = LossPricer::new(model, setup)?.with_config(inversion(c)?)?;
    Ok(HaircutSolver::new(pricer).with_tolerance(*c.solver_tolerance.get_or_insert(DEFAULT_TOLERANCE))?)
}

fn preamble(c: &RunConfig) -> String {
    format!("# haircut {}\n# config: {}\n", env!("CARGO_PKG_VERSION"), c.to_json())
}

fn emit(c: &RunConfig, body: &str) -> Result<(), CliError> {
    match &c.output {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v + 0.0)
}

fn diagnostics_cells(d: &Option<InversionDiagnostics>) -> String {
    match d {
        Some(d) => format!("{},{:.6},{:.3e}", d.terms, d.abscissa, d.truncation_bound),
        None => ",,".into(),
    }
}

pub fn estimate(mut c: RunConfig) -> Result<u8, CliError> {
    c.command = Some("estimate".into());
    let prices = read_prices(&c)?;
    let convention = time_convention(&mut c)?;
    let estimation = estimation_config(&mut c)?;
    let returns = prices.log_returns(convention)?;
    let stages = estimate_staged_with(&returns, &estimation)?;
    let converged = stages[2].converged;
    let document = json!({
        "tool": format!("haircut {}", env!("CARGO_PKG_VERSION")),
        "config": c.to_json(),
        "sample_stats": stages[0].sample_stats,
        "stages": stages,
    });
    let mut body = serde_json::to_string_pretty(&document).map_err(|e| CliError::input(e.to_string()))?;
    body.push('\n');
    emit(&c, &body)?;
    if !converged {
        eprintln!("warning: 6p estimation did not converge within {} evaluations", estimation.optimizer.max_evaluations);
        return Ok(2);
    }
    Ok(0)
}

fn table_body(rows: &[TableRow], addons: Option<&[TableRow]>) -> String {
    let mut out = String::from("rating,rate,kind,haircut_pct");
    if addons.is_some() {
        out.push_str(",addon_pct");
    }
    out.push_str(",terms,abscissa,truncation_bound\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(out, "{},{:e},{},{}", r.rating, r.rate, r.kind, pct(r.haircut));
        if let Some(base) = addons {
            let _ = write!(out, ",{}", pct(r.haircut - base[i].haircut));
        }
        let _ = writeln!(out, ",{}", diagnostics_cells(&r.diagnostics));
    }
    out
}

fn scalar_body(criterion: &str, parameter: f64, s: &HaircutSolution) -> String {
    format!(
        "criterion,parameter,haircut_pct,evaluations,terms,abscissa,truncation_bound\n{criterion},{parameter},{},{},{}\n",
        pct(s.haircut),
        s.evaluations,
        diagnostics_cells(&s.diagnostics)
    )
}

fn model_line(model: &JumpDiffusionModel) -> Result<String, CliError> {
    let value: serde_json::Value = serde_json::from_str(&model.to_json()?).map_err(|e| CliError::input(e.to_string()))?;
    Ok(format!("# model: {value}\n"))
}

pub fn haircut(mut c: RunConfig) -> Result<u8, CliError> {
    c.command = Some("haircut".into());
    let (model, _) = load_model(&mut c)?;
    let setup = loss_setup(&mut c)?;
    let solver = make_solver(&model, setup, &mut c)?;
    let criterion = *c.criterion.get_or_insert(CriterionName::El);
    let body = match criterion {
        CriterionName::El | CriterionName::Pd => {
            let (scalar, kind, default_table) = match criterion {
                CriterionName::El => (c.l0, TargetKind::El, "moodys_ig"),
                _ => (c.p, TargetKind::Pd, "sp_ig"),
            };
            match scalar {
                Some(budget) => {
                    let s = match kind {
                        TargetKind::El => solver.expected_loss_target(budget)?,
                        TargetKind::Pd => solver.first_loss(budget)?,
                    };
                    scalar_body(&kind.to_string(), budget, &s)
                }
                None => {
                    let table = ratings(&mut c, default_table)?;
                    let rows = solver.table(&table, Some(kind))?;
                    let base = if setup.liquidity_discount > 0.0 {
                        let zero = make_solver(&model, setup.with_discount(0.0), &mut c)?;
                        Some(zero.table(&table, Some(kind))?)
                    } else {
                        None
                    };
                    table_body(&rows, base.as_deref())
                }
            }
        }
        CriterionName::Var => {
            let q = *c.q.get_or_insert(0.99);
            scalar_body("var", q, &solver.value_at_risk(q)?)
        }
        CriterionName::Es => {
            let q = *c.q.get_or_insert(0.99);
            scalar_body("es", q, &solver.expected_shortfall(q)?)
        }
        CriterionName::Ec => {
            let c0 = *require(&c.c0, "c0")?;
            let q = *c.q.get_or_insert(0.999);
            let measure = *c.measure.get_or_insert(RiskMeasure::Var);
            scalar_body("ec", c0, &solver.economic_capital_target(c0, measure, q)?)
        }
    };
    emit(&c, &format!("{}{}{body}", preamble(&c), model_line(&model)?))?;
    Ok(0)
}

pub fn sens(mut c: RunConfig) -> Result<u8, CliError> {
    c.command = Some("sens".into());
    let (model, _) = load_model(&mut c)?;
    let params = DejdParams::from_model(&model)?;
    let setup = loss_setup(&mut c)?;
    let path = require(&c.shifts, "shifts")?.clone();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let shifts = with_path(&path, ParameterShift::parse_csv(&text))?;
    let table = ratings(&mut c, "moodys_ig")?;
    let inversion = inversion(&mut c)?;
    let tolerance = *c.solver_tolerance.get_or_insert(DEFAULT_TOLERANCE);
    let result = sensitivity_table_with(&params, &setup, &table, &shifts, &inversion, tolerance)?;
    emit(&c, &format!("{}{}{}", preamble(&c), model_line(&model)?, result.to_csv()))?;
    Ok(0)
}

pub fn roll(mut c: RunConfig) -> Result<u8, CliError> {
    c.command = Some("roll".into());
    let prices = read_prices(&c)?;
    let convention = time_convention(&mut c)?;
    let estimation = estimation_config(&mut c)?;
    let config = RollingConfig {
        window_years: *c.window_years.get_or_insert(5),
        step_months: c.step.get_or_insert(Step::Quarterly).months(),
        anchor: *c.anchor.get_or_insert(WindowAnchor::Forward),
        time_convention: convention,
        estimation,
    };
    let setup = loss_setup(&mut c)?;
    let table = ratings(&mut c, "moodys_ig")?;
    let rating = c.rating.get_or_insert_with(|| "Aa2".into()).clone();
    let target = table
        .get(&rating)
        .cloned()
        .ok_or_else(|| CliError::input(format!("rating {rating} not in table")))?;
    let windows = rolling_estimate(&prices, &config)?;
    let mut out = preamble(&c);
    out.push_str(
        "label,from,to,observations,mu,sigma_a,lambda_up,lambda_down,eta_up,eta_down,log_likelihood,converged,\
         sample_stdev_pct,sample_skewness,sample_kurtosis,model_stdev_pct,model_skewness,model_kurtosis,haircut_pct,notice\n",
    );
    let mut any_unconverged = false;
    for w in &windows {
        let _ = write!(out, "{},{},{},{},", w.label, w.from, w.to, w.observations);
        match &w.result {
            Some(r) => {
                any_unconverged |= !r.converged;
                let p = r.params;
                let model = p.to_model()?;
                let solver = make_solver(&model, setup, &mut c)?;
                let h = match target.kind {
                    TargetKind::El => solver.expected_loss_target(target.rate),
                    TargetKind::Pd => solver.first_loss(target.rate),
                };
                let h = match h {
                    Ok(s) => pct(s.haircut),
                    Err(e) => {
                        eprintln!("window {}: {e}", w.label);
                        String::new()
                    }
                };
                let annualize = r.sample_stats.stdev_annual / r.sample_stats.stdev;
                let _ = writeln!(
                    out,
                    "{:.6},{:.6},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{:.4},{:.4},{},{:.4},{:.4},{h},",
                    p.mu,
                    p.sigma_a,
                    p.lambda_up,
                    p.lambda_down,
                    p.eta_up,
                    p.eta_down,
                    r.log_likelihood,
                    r.converged,
                    pct(r.sample_stats.stdev_annual),
                    r.sample_stats.skewness,
                    r.sample_stats.kurtosis,
                    pct(r.model_moments.variance.sqrt() * annualize),
                    r.model_moments.skewness,
                    r.model_moments.kurtosis,
                );
            }
            None => {
                let notice = w.notice.clone().unwrap_or_default().replace(',', ";");
                eprintln!("window {} skipped: {notice}", w.label);
                let _ = writeln!(out, ",,,,,,,,,,,,,,,{notice}");
            }
        }
    }
    emit(&c, &out)?;
    Ok(if any_unconverged { 2 } else { 0 })
}

pub fn rawhc(mut c: RunConfig) -> Result<u8, CliError> {
    c.command = Some("rawhc".into());
    let prices = read_prices(&c)?;
    let horizon = *c.horizon_days.get_or_insert(10);
    let var_q = *c.var_q.get_or_insert(0.99);
    let es_q = *c.es_q.get_or_insert(0.975);
    let risk = empirical_var_es(&prices, horizon, var_q, es_q)?;
    let mut out = preamble(&c);
    for note in &risk.notes {
        let _ = writeln!(out, "# note: {note}");
    }
    out.push_str(&risk.to_csv());
    emit(&c, &out)?;
    Ok(0)
}
