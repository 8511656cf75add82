//! Shape properties of the inverted distribution, density and put.

use haircut_core::transform::{invert, stabilized_invert, transform, truncation_bound};
use haircut_core::{DejdParams, InversionConfig, JumpDiffusionModel, TransformKind};
use num_complex::Complex64;

const T: f64 = 10.0 / 252.0;

fn bond() -> JumpDiffusionModel {
    DejdParams::new(0.0729, 0.0525, 13.82, 31.90, 212.6, 225.6).to_model().unwrap()
}

fn spx() -> JumpDiffusionModel {
    DejdParams::new(0.1984, 0.1512, 37.53, 40.24, 71.51, 60.56).to_model().unwrap()
}

fn horizon_sd(m: &JumpDiffusionModel, t: f64) -> f64 {
    m.cumulants(t).unwrap().variance.sqrt()
}

fn cdf(m: &JumpDiffusionModel, t: f64, x: f64) -> f64 {
    stabilized_invert(TransformKind::Cdf, m, t, x, &InversionConfig::default()).unwrap().value
}

fn put(m: &JumpDiffusionModel, t: f64, k: f64) -> f64 {
    stabilized_invert(TransformKind::Put, m, t, k, &InversionConfig::default()).unwrap().value
}

#[test]
fn density_transform_at_zero_is_one() {
    for m in [bond(), spx(), JumpDiffusionModel::lognormal(0.0, 1.0)] {
        let v = transform(TransformKind::Pdf, &m, T, Complex64::new(0.0, 0.0)).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
    }
    let g = JumpDiffusionModel::lognormal(0.0, 1.0);
    for s in [-2.0, 0.5, 3.0] {
        let v = transform(TransformKind::Pdf, &g, 1.0, Complex64::new(s, 0.0)).unwrap();
        assert!((v.re - (0.5 * s * s).exp()).abs() < 1e-12 * v.re);
    }
}

#[test]
fn symmetric_gaussian_median_and_put() {
    let m = JumpDiffusionModel::lognormal(0.0, 0.2);
    assert!((cdf(&m, 1.0, 0.0) - 0.5).abs() < 1e-8);
    // The at-the-money formula needs a martingale price, so drift −σ²/2.
    let martingale = JumpDiffusionModel::lognormal(-0.02, 0.2);
    let exact = 2.0 * haircut_core::special::normal_cdf(0.1) - 1.0;
    assert!((put(&martingale, 1.0, 0.0) - exact).abs() < 1e-6 * exact);
}

#[test]
fn distribution_is_monotone_with_limits() {
    for m in [bond(), spx()] {
        let mean = m.cumulants(T).unwrap().mean;
        let sd = horizon_sd(&m, T);
        let mut last = 0.0;
        for i in 0..100 {
            let x = mean + sd * (-6.0 + 12.0 * i as f64 / 99.0);
            let v = cdf(&m, T, x);
            assert!(v >= last - 1e-9, "x={x}: {v} < {last}");
            last = v;
        }
        assert!(cdf(&m, T, mean - 10.0 * sd) < 1e-6);
        assert!(cdf(&m, T, mean + 10.0 * sd) > 1.0 - 1e-6);
    }
}

#[test]
fn put_is_monotone_convex_and_above_intrinsic() {
    for m in [bond(), spx()] {
        let sd = horizon_sd(&m, T);
        let forward = (T * m.levy_exponent_real(1.0).unwrap()).exp();
        let strikes: Vec<f64> = (0..60).map(|i| (-4.0 * sd + 8.0 * sd * i as f64 / 59.0).exp()).collect();
        let values: Vec<f64> = strikes.iter().map(|k| put(&m, T, -k.ln())).collect();
        for (k, v) in strikes.iter().zip(&values) {
            assert!(*v >= (k - forward).max(0.0) - 1e-12, "K={k}: {v}");
        }
        for w in values.windows(2) {
            // Strikes increase, so k decreases and the put rises.
            assert!(w[1] >= w[0] - 1e-8);
        }
        for i in 1..strikes.len() - 1 {
            let (k0, k1, k2) = (strikes[i - 1], strikes[i], strikes[i + 1]);
            let chord = values[i - 1] + (values[i + 1] - values[i - 1]) * (k1 - k0) / (k2 - k0);
            assert!(values[i] <= chord + 1e-8, "convexity at K={k1}");
        }
    }
}

#[test]
fn stabilized_value_ignores_the_starting_shift() {
    let g = JumpDiffusionModel::lognormal(0.0, 0.2);
    let k = -(1.0f64 - 0.0519).ln();
    for c in [0.5, 1.0, 2.0] {
        let cfg = InversionConfig::default().with_shift(c);
        let v = stabilized_invert(TransformKind::Cdf, &g, 1.0, 0.0, &cfg).unwrap().value;
        assert!((v - 0.5).abs() < 1e-8, "C={c}: {v}");
    }
    let reference = put(&bond(), T, k);
    for c in [0.5, 2.0] {
        let cfg = InversionConfig::default().with_shift(c);
        let v = stabilized_invert(TransformKind::Put, &bond(), T, k, &cfg).unwrap().value;
        assert!((v - reference).abs() <= 1e-8 * reference, "C={c}: {v} vs {reference}");
    }
}

#[test]
fn far_tail_stays_a_probability() {
    for m in [bond(), spx()] {
        let v = cdf(&m, T, -10.0);
        assert!((0.0..=1.0).contains(&v), "{v}");
        let v = cdf(&m, T, 10.0);
        assert!((0.0..=1.0).contains(&v), "{v}");
    }
}

#[test]
fn truncation_bound_decreases_in_terms() {
    let cfg = InversionConfig::default();
    let m = bond();
    for kind in [TransformKind::Pdf, TransformKind::Cdf, TransformKind::Put] {
        let b32 = truncation_bound(kind, &m, T, 0.0, &cfg, 32).unwrap();
        let b64 = truncation_bound(kind, &m, T, 0.0, &cfg, 64).unwrap();
        assert!(b64 < b32);
        let lead = invert(kind, &m, T, 0.0, &cfg).unwrap().diagnostics.leading_term;
        assert!(truncation_bound(kind, &m, T, 0.0, &cfg, 4096).unwrap() < 1e-12 * lead);
    }
}

#[test]
fn diagnostics_report_the_series() {
    let inv = invert(TransformKind::Cdf, &spx(), T, -0.05, &InversionConfig::default()).unwrap();
    let d = inv.diagnostics;
    assert!(d.terms >= 16 && d.terms.is_power_of_two());
    assert!(d.truncation_bound <= 1e-9 * d.leading_term);
    assert_eq!(d.shift_c, 1.0);
}
