//! Error function family and the order-½ upper incomplete gamma function used
//! by the truncation bound of the Fourier-series inversion.
//!
//! Γ(½, z) is evaluated directly: the power series of the lower function
//! γ(½, z) below z = 1.5 and a modified-Lentz continued fraction above it.

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 500;

/// Lower incomplete gamma γ(½, z) by its power series, accurate for small z.
fn lower_gamma_half_series(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let a = 0.5;
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-z).exp() * z.sqrt()
}

/// Upper incomplete gamma Γ(½, z) by continued fraction, valid for z ≳ 1.
fn upper_gamma_half_cf(z: f64) -> f64 {
    let a = 0.5;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-z).exp() * z.sqrt() * h
}

/// Γ(½, z) = √π·erfc(√z) for z ≥ 0.
pub fn upper_incomplete_gamma_half(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::invalid("z", format!("must be nonnegative, got {z}")));
    }
    Ok(gamma_half_unchecked(z))
}

pub(crate) fn gamma_half_unchecked(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else if z < 1.5 {
        SQRT_PI - lower_gamma_half_series(z)
    } else {
        upper_gamma_half_cf(z)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        return 1.0 - erf(x);
    }
    gamma_half_unchecked(x * x) / SQRT_PI
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let v = if ax < 1.2 {
        lower_gamma_half_series(ax * ax) / SQRT_PI
    } else {
        1.0 - erfc(ax)
    };
    v.copysign(x)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
