//! Acceptance criteria. Prints one PASS/FAIL line each; run with `--nocapture`.

use std::time::{Duration, Instant};

use haircut_core::analytics::{liquidity_haircut_delta, quantile_sorted, sensitivity_table};
use haircut_core::estimate::estimate_staged;
use haircut_core::haircut::RatingTargetTable;
use haircut_core::simulate::{mean_and_standard_error, simulate_returns};
use haircut_core::transform::{decay_rate, default_abscissa, fourier_sum, relative_truncation_bound, stabilized_invert, truncation_bound, zeta};
use haircut_core::{
    DejdParams, HaircutSolver, InversionConfig, JumpDiffusionModel, LossPricer, LossSetup, ParameterShift, ReturnSeries, ShiftTarget,
    TransformKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const T: f64 = 10.0 / 252.0;
const DAY: f64 = 1.0 / 252.0;

fn six_p() -> DejdParams {
    DejdParams::new(0.1984, 0.1512, 37.53, 40.24, 71.51, 60.56)
}

fn five_p() -> DejdParams {
    DejdParams::new(0.0021, 0.1512, 36.78, 39.80, 70.27, 59.52)
}

fn bond() -> DejdParams {
    DejdParams::new(0.0729, 0.0525, 13.82, 31.90, 212.6, 225.6)
}

fn model(p: DejdParams) -> JumpDiffusionModel {
    p.to_model().unwrap()
}

fn setup(g: f64) -> LossSetup {
    LossSetup::new(10, g).unwrap()
}

type Outcome = (bool, String);

fn el_haircuts(m: &JumpDiffusionModel, ratings: &[&str]) -> Vec<f64> {
    let solver = HaircutSolver::for_model(m, setup(0.0)).unwrap();
    let table = RatingTargetTable::moodys_ig();
    ratings
        .iter()
        .map(|r| 100.0 * solver.expected_loss_target(table.get(r).unwrap().rate).unwrap().haircut)
        .collect()
}

fn compare(got: &[f64], want: &[f64], tol: f64) -> Outcome {
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol);
    let shown: Vec<String> = got.iter().zip(want).map(|(g, w)| format!("{g:.2} (want {w} ± {tol})")).collect();
    (ok, shown.join(", "))
}

fn model_mean() -> Outcome {
    let mean = 100.0 * model(six_p()).annual_mean();
    ((mean - 5.87).abs() <= 0.05, format!("{mean:.3}% (want 5.87 ± 0.05)"))
}

fn daily_moments() -> Outcome {
    let a = model(six_p()).cumulants(DAY).unwrap();
    let b = model(five_p()).cumulants(DAY).unwrap();
    let ok = (a.skewness + 0.5136).abs() <= 0.02
        && (a.kurtosis - 10.50).abs() <= 0.2
        && (b.skewness + 0.5309).abs() <= 0.02
        && (b.kurtosis - 10.74).abs() <= 0.2;
    (
        ok,
        format!(
            "6p skew {:.4} kurt {:.2}; 5p skew {:.4} kurt {:.2}",
            a.skewness, a.kurtosis, b.skewness, b.kurtosis
        ),
    )
}

fn bond_haircuts() -> Outcome {
    compare(&el_haircuts(&model(bond()), &["Aaa", "Aa1", "Aa2"]), &[6.49, 5.19, 4.68], 0.15)
}

fn sensitivities() -> Outcome {
    let rows: [(ShiftTarget, f64, [f64; 3]); 4] = [
        (ShiftTarget::SigmaA, 0.01, [0.37, 0.34, 0.32]),
        (ShiftTarget::EtaDown, -10.0, [0.26, 0.20, 0.18]),
        (ShiftTarget::Mu, 0.01, [-0.03, -0.04, -0.04]),
        (ShiftTarget::LambdaDown, 1.0, [0.07, 0.04, 0.04]),
    ];
    let mut shifts: Vec<ParameterShift> = rows.iter().map(|(t, d, _)| ParameterShift::new(*t, *d)).collect();
    shifts.push(ParameterShift::new(ShiftTarget::LambdaUp, -1.0));
    shifts.push(ParameterShift::new(ShiftTarget::EtaUp, 10.0));
    let targets = RatingTargetTable::moodys_ig().select(&["Aaa", "Aa1", "Aa2"]).unwrap();
    let table = sensitivity_table(&bond(), &setup(0.0), &targets, &shifts).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, shift) in shifts.iter().enumerate() {
        let want = rows.get(i).map_or([0.0; 3], |r| r.2);
        let got = &table.deltas[i];
        ok &= got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.05);
        detail.push(format!("{shift} {:.2}/{:.2}/{:.2}", got[0], got[1], got[2]));
    }
    (ok, detail.join("; "))
}

fn spx_haircuts() -> Outcome {
    let m = model(six_p());
    let got = el_haircuts(&m, &["Aa2", "Aa3", "A2"]);
    let (ok, detail) = compare(&got, &[18.5, 17.0, 15.5], 0.5);
    let a1 = el_haircuts(&m, &["A1"])[0];
    (ok, format!("{detail}; A1 gives {a1:.2}"))
}

fn lognormal_suite() -> Outcome {
    let n = Normal::new(0.0, 1.0).unwrap();
    let cfg = InversionConfig::default();
    let mut worst: f64 = 0.0;
    for (mu, sigma) in [(0.0, 0.2625), (0.08, 0.15), (-0.05, 0.6)] {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        let (mt, s) = (mu * T, sigma * T.sqrt());
        let law = Normal::new(mt, s).unwrap();
        for i in 0..100 {
            let z = -5.0 + 10.0 * i as f64 / 99.0;
            let x = mt + s * z;
            let pdf = stabilized_invert(TransformKind::Pdf, &m, T, x, &cfg).unwrap().value;
            let cdf = stabilized_invert(TransformKind::Cdf, &m, T, x, &cfg).unwrap().value;
            worst = worst.max((pdf / law.pdf(x) - 1.0).abs()).max((cdf / law.cdf(x) - 1.0).abs());
            let k = -mt + s * (4.0 - 6.0 * i as f64 / 99.0);
            let d = (-k - mt) / s;
            let exact = (-k).exp() * n.cdf(d) - (mt + 0.5 * s * s).exp() * n.cdf(d - s);
            let put = stabilized_invert(TransformKind::Put, &m, T, k, &cfg).unwrap().value;
            worst = worst.max((put / exact - 1.0).abs());
        }
    }
    let m = JumpDiffusionModel::lognormal(0.0, 0.2625);
    let var = HaircutSolver::for_model(&m, setup(0.0)).unwrap().value_at_risk(0.99).unwrap().haircut;
    let exact = 1.0 - (n.inverse_cdf(0.01) * 0.2625 * T.sqrt()).exp();
    let ok = worst <= 1e-6 && (var - exact).abs() <= 1e-4;
    (ok, format!("worst relative error {worst:.1e}; VaR {var:.5} vs {exact:.5}"))
}

fn monte_carlo() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, p, h, seed) in [("6p", six_p(), 0.15, 31), ("bond", bond(), 0.0519, 32)] {
        let m = model(p);
        let y: Vec<f64> = simulate_returns(&m, T, 1_000_000, seed).unwrap().into_iter().map(|x| 1.0 - x.exp()).collect();
        let pricer = LossPricer::new(&m, setup(0.0)).unwrap();
        let solver = HaircutSolver::for_model(&m, setup(0.0)).unwrap();
        let mut z = Vec::new();
        let (mc, se) = mean_and_standard_error(y.iter().map(|&d| if d > h { 1.0 } else { 0.0 }));
        z.push((pricer.loss_tail_prob(h, 0.0).unwrap() - mc) / se);
        let (mc, se) = mean_and_standard_error(y.iter().map(|&d| (d - h).max(0.0)));
        z.push((pricer.expected_loss(h).unwrap() - mc) / se);
        let q = 0.99;
        let var = solver.value_at_risk(q).unwrap().haircut;
        let es = solver.expected_shortfall(q).unwrap().haircut;
        let batches: Vec<(f64, f64)> = y
            .chunks(50_000)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_by(f64::total_cmp);
                let v = quantile_sorted(&c, q);
                let tail: Vec<f64> = c.iter().copied().filter(|&d| d > v).collect();
                (v, tail.iter().sum::<f64>() / tail.len() as f64)
            })
            .collect();
        let (mc, se) = mean_and_standard_error(batches.iter().map(|b| b.0));
        z.push((var - mc) / se);
        let (mc, se) = mean_and_standard_error(batches.iter().map(|b| b.1));
        z.push((es - mc) / se);
        ok &= z.iter().all(|v| v.abs() <= 3.0);
        detail.push(format!("{name} z = {:.2}/{:.2}/{:.2}/{:.2}", z[0], z[1], z[2], z[3]));
    }
    (ok, format!("{} (tail prob/EL/VaR/ES)", detail.join("; ")))
}

fn translation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let models = [model(six_p()), model(bond())];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 1000 {
        let m = &models[cases % 2];
        let g = rng.gen_range(0.0..0.05);
        let (h, hs, b) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.3));
        let bs = b + h - hs;
        if bs < 0.0 || bs >= 1.0 - hs {
            continue;
        }
        let pricer = LossPricer::new(m, setup(g)).unwrap();
        worst = worst.max((pricer.loss_tail_prob(h, b).unwrap() - pricer.loss_tail_prob(hs, bs).unwrap()).abs());
        cases += 1;
    }
    (worst <= 1e-10, format!("max |difference| {worst:.1e} over {cases} cases"))
}

fn truncation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kinds = [TransformKind::Pdf, TransformKind::Cdf, TransformKind::Put];
    let cfg = InversionConfig::default();
    let (mut violations, mut spread): (usize, f64) = (0, 0.0);
    let runs = 300;
    for _ in 0..runs {
        let p = DejdParams::new(
            rng.gen_range(-0.3..0.3),
            rng.gen_range(0.03..0.5),
            rng.gen_range(0.0..60.0),
            rng.gen_range(0.0..60.0),
            rng.gen_range(20.0..300.0),
            rng.gen_range(10.0..300.0),
        );
        let m = model(p);
        let c = m.cumulants(T).unwrap();
        let x = c.mean + rng.gen_range(-4.0..4.0) * c.variance.sqrt();
        let n = 1usize << rng.gen_range(4..8);
        let mut rel = Vec::new();
        for kind in kinds {
            let arg = if kind == TransformKind::Put { -x } else { x };
            let sigma = default_abscissa(kind, &m, T, arg).unwrap();
            let a = fourier_sum(kind, &m, T, arg, sigma, 1.0, n).unwrap();
            let b = fourier_sum(kind, &m, T, arg, sigma, 1.0, 4 * n).unwrap();
            let bound = truncation_bound(kind, &m, T, arg, &cfg, n).unwrap();
            if (a - b).abs() > bound + 1e-12 {
                violations += 1;
            }
            // Same x for every kind when comparing relative bounds.
            let sigma = default_abscissa(kind, &m, T, x).unwrap();
            rel.push(truncation_bound(kind, &m, T, x, &cfg, n).unwrap() / (zeta(kind, &m, T, sigma).unwrap() * (sigma * x).exp()));
        }
        let direct = relative_truncation_bound(decay_rate(&m, T), x.abs() + cfg.shift_c, n);
        for r in rel {
            spread = spread.max((r - direct).abs() / direct);
        }
    }
    (
        violations == 0 && spread <= 1e-14,
        format!("{violations} bound violations in {} inversions; relative bound spread {spread:.1e}", 3 * runs),
    )
}

fn recovery() -> Outcome {
    let truth = model(six_p());
    let series = ReturnSeries::daily(simulate_returns(&truth, DAY, 5000, 2024).unwrap()).unwrap();
    let stages = estimate_staged(&series).unwrap();
    let want = truth.cumulants(DAY).unwrap();
    let got = stages[2].model_moments;
    let ll: Vec<f64> = stages.iter().map(|s| s.log_likelihood).collect();
    let ok = (got.skewness - want.skewness).abs() <= 0.15 && (got.kurtosis - want.kurtosis).abs() <= 1.5 && ll[0] <= ll[1] && ll[1] <= ll[2];
    (
        ok,
        format!(
            "skew {:.3} (true {:.3}), kurt {:.2} (true {:.2}); LL {:.1}/{:.1}/{:.1}",
            got.skewness, want.skewness, got.kurtosis, want.kurtosis, ll[0], ll[1], ll[2]
        ),
    )
}

fn monotonicity() -> Outcome {
    let (l0, p) = (7.5e-6, 6e-4);
    let solve = |m: &JumpDiffusionModel, mpr: u32, g: f64| {
        let s = HaircutSolver::for_model(m, LossSetup::new(mpr, g).unwrap()).unwrap();
        (s.expected_loss_target(l0).unwrap().haircut, s.first_loss(p).unwrap().haircut)
    };
    let rising = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
    let base = model(bond());
    let mut failed = Vec::new();
    if !rising(&[1, 5, 10, 20].map(|d| solve(&base, d, 0.0))) {
        failed.push("mpr");
    }
    if !rising(&[0.03, 0.0525, 0.1].map(|s| solve(&model(DejdParams { sigma_a: s, ..bond() }), 10, 0.0))) {
        failed.push("sigma_a");
    }
    if !rising(&[0.0, 31.9, 60.0].map(|l| solve(&model(DejdParams { lambda_down: l, ..bond() }), 10, 0.0))) {
        failed.push("lambda_down");
    }
    if !rising(&[0.0, 0.02, 0.05].map(|g| solve(&base, 10, g))) {
        failed.push("g");
    }
    let s = HaircutSolver::for_model(&base, setup(0.0)).unwrap();
    let by_budget: Vec<(f64, f64)> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&b| (s.expected_loss_target(b).unwrap().haircut, s.first_loss(b).unwrap().haircut))
        .collect();
    if !rising(&by_budget) {
        failed.push("budget");
    }
    for q in [0.975, 0.99, 0.999] {
        if s.expected_shortfall(q).unwrap().haircut < s.value_at_risk(q).unwrap().haircut {
            failed.push("ES vs VaR");
        }
    }
    (failed.is_empty(), if failed.is_empty() { "all grids monotone".into() } else { format!("violated: {failed:?}") })
}

fn liquidity() -> Outcome {
    let target = RatingTargetTable::moodys_ig().get("Aa2").unwrap().clone();
    let adds = liquidity_haircut_delta(&model(bond()), &setup(0.0), &target, &[0.02, 0.05]).unwrap();
    let (a, b) = (100.0 * adds[0], 100.0 * adds[1]);
    ((1.0..=4.0).contains(&a) && (2.5..=10.0).contains(&b), format!("g=0.02 adds {a:.2} pts, g=0.05 adds {b:.2} pts"))
}

#[test]
fn acceptance() {
    let criteria: Vec<(u32, &str, fn() -> Outcome, Duration)> = vec![
        (1, "model mean", model_mean, Duration::from_millis(1)),
        (2, "daily moments", daily_moments, Duration::from_millis(1)),
        (3, "bond haircuts", bond_haircuts, Duration::from_secs(2)),
        (4, "sensitivities", sensitivities, Duration::from_secs(30)),
        (5, "equity index haircuts", spx_haircuts, Duration::from_secs(2)),
        (6, "lognormal closed forms", lognormal_suite, Duration::from_secs(5)),
        (7, "monte carlo", monte_carlo, Duration::from_secs(120)),
        (8, "translation identity", translation, Duration::from_secs(60)),
        (9, "truncation bound", truncation, Duration::from_secs(60)),
        (10, "estimation recovery", recovery, Duration::from_secs(600)),
        (11, "monotonicity", monotonicity, Duration::from_secs(60)),
        (12, "liquidity envelope", liquidity, Duration::from_secs(10)),
    ];
    let mut failed = Vec::new();
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        let timing = if in_time { String::new() } else { format!(" over budget {budget:?}") };
        println!("{} {id:>2} {name}: {detail} [{elapsed:.2?}{timing}]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
