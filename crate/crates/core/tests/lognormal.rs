//! Without jumps every quantity has a Gaussian or Black-Scholes closed form.

use haircut_core::haircut::HaircutSolver;
use haircut_core::transform::stabilized_invert;
use haircut_core::{InversionConfig, JumpDiffusionModel, LossPricer, LossSetup, TransformKind};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const T: f64 = 10.0 / 252.0;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

fn cases() -> Vec<(f64, f64)> {
    vec![(0.0, 0.2625), (0.08, 0.15), (-0.05, 0.6), (0.0, 0.05)]
}

#[test]
fn density_and_distribution_on_a_grid() {
    let cfg = InversionConfig::default();
    for (mu, sigma) in cases() {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        let law = Normal::new(mu * T, sigma * T.sqrt()).unwrap();
        let s = sigma * T.sqrt();
        for i in 0..100 {
            let x = mu * T + s * (-5.0 + 10.0 * i as f64 / 99.0);
            let pdf = stabilized_invert(TransformKind::Pdf, &m, T, x, &cfg).unwrap().value;
            let cdf = stabilized_invert(TransformKind::Cdf, &m, T, x, &cfg).unwrap().value;
            let (pdf0, cdf0) = (law.pdf(x), law.cdf(x));
            assert!((pdf - pdf0).abs() <= 1e-6 * pdf0, "pdf σ={sigma} x={x}: {pdf} vs {pdf0}");
            assert!((cdf - cdf0).abs() <= 1e-6 * cdf0, "cdf σ={sigma} x={x}: {cdf} vs {cdf0}");
        }
    }
}

/// E[(e^{−k} − e^X)⁺] for X ~ N(m, s²).
fn gaussian_put(m: f64, s: f64, k: f64) -> f64 {
    let n = std_normal();
    let d = (-k - m) / s;
    (-k).exp() * n.cdf(d) - (m + 0.5 * s * s).exp() * n.cdf(d - s)
}

#[test]
fn put_matches_black_scholes() {
    let cfg = InversionConfig::default();
    for (mu, sigma) in cases() {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        let s = sigma * T.sqrt();
        for i in 0..100 {
            // Strikes from 4 deviations out of the money to 2 in.
            let k = -mu * T + s * (4.0 - 6.0 * i as f64 / 99.0);
            let put = stabilized_invert(TransformKind::Put, &m, T, k, &cfg).unwrap().value;
            let exact = gaussian_put(mu * T, s, k);
            assert!((put - exact).abs() <= 1e-6 * exact, "σ={sigma} k={k}: {put} vs {exact}");
        }
    }
}

#[test]
fn at_the_money_put_with_martingale_drift() {
    // With μ = −σ²/2 the price is a martingale and the ATM put is 2Φ(σ√t/2) − 1.
    let sigma = 0.3;
    let m = JumpDiffusionModel::lognormal(-0.5 * sigma * sigma, sigma);
    let put = stabilized_invert(TransformKind::Put, &m, 1.0, 0.0, &InversionConfig::default()).unwrap().value;
    let exact = 2.0 * std_normal().cdf(0.5 * sigma) - 1.0;
    assert!((put - exact).abs() < 1e-9 * exact, "{put} vs {exact}");
}

#[test]
fn quantile_haircuts() {
    let n = std_normal();
    for (mu, sigma) in cases() {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        let solver = HaircutSolver::for_model(&m, LossSetup::new(10, 0.0).unwrap()).unwrap();
        let s = sigma * T.sqrt();
        for p in [1e-4, 1e-3, 0.01, 0.1] {
            let exact = (1.0 - (mu * T + s * n.inverse_cdf(p)).exp()).max(0.0);
            let h = solver.first_loss(p).unwrap().haircut;
            assert!((h - exact).abs() <= 1.5e-6, "σ={sigma} p={p}: {h} vs {exact}");
            let var = solver.value_at_risk(1.0 - p).unwrap().haircut;
            assert_eq!(var, h);
        }
    }
}

#[test]
fn quoted_value_at_risk() {
    let m = JumpDiffusionModel::lognormal(0.0, 0.2625);
    let solver = HaircutSolver::for_model(&m, LossSetup::new(10, 0.0).unwrap()).unwrap();
    let v = solver.value_at_risk(0.99).unwrap().haircut;
    let exact = 1.0 - (-2.326_347_874_040_841 * 0.2625 * T.sqrt()).exp();
    assert!((v - exact).abs() < 1e-4 && (v - 0.1147).abs() < 1e-3, "{v}");
}

#[test]
fn expected_shortfall_closed_form() {
    let n = std_normal();
    for (mu, sigma) in cases() {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        let solver = HaircutSolver::for_model(&m, LossSetup::new(10, 0.0).unwrap()).unwrap();
        let (mt, s) = (mu * T, sigma * T.sqrt());
        for q in [0.975, 0.99, 0.999] {
            let xq = mt + s * n.inverse_cdf(1.0 - q);
            let exact = 1.0 - (mt + 0.5 * s * s).exp() * n.cdf((xq - mt - s * s) / s) / (1.0 - q);
            let es = solver.expected_shortfall(q).unwrap().haircut;
            assert!((es - exact).abs() <= 1e-5, "σ={sigma} q={q}: {es} vs {exact}");
            assert!(es > solver.value_at_risk(q).unwrap().haircut);
        }
    }
}

#[test]
fn expected_loss_closed_form() {
    for (mu, sigma) in cases() {
        let m = JumpDiffusionModel::lognormal(mu, sigma);
        for g in [0.0, 0.03] {
            let setup = LossSetup::new(10, g).unwrap();
            let pricer = LossPricer::new(&m, setup).unwrap();
            for h in [0.0, 0.05, 0.2] {
                let k = -((1.0 - h) / (1.0 - g)).ln();
                let exact = (1.0 - g) * gaussian_put(mu * T, sigma * T.sqrt(), k);
                let el = pricer.expected_loss(h).unwrap();
                assert!((el - exact).abs() <= 1e-6 * exact + 1e-30, "σ={sigma} g={g} h={h}: {el} vs {exact}");
            }
        }
    }
}

#[test]
fn degenerate_limits() {
    let quiet = JumpDiffusionModel::lognormal(0.0, 1e-4);
    let g = 0.05;
    let solver = HaircutSolver::for_model(&quiet, LossSetup::new(10, g).unwrap()).unwrap();
    let h = solver.first_loss(0.01).unwrap().haircut;
    assert!((h - g).abs() < 1e-4, "{h}");
    let riskless = HaircutSolver::for_model(&quiet, LossSetup::new(10, 0.0).unwrap()).unwrap();
    for l0 in [1e-7, 1e-5, 1e-3] {
        assert!(riskless.expected_loss_target(l0).unwrap().haircut < 1e-4);
    }
}
