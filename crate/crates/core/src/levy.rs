//! Mixed-exponential jump-diffusion model of collateral log returns.
//!
//! X_t = μt + σ_a W_t + Σ_{j ≤ N_t} Y_j, with N a Poisson process of intensity
//! λ and Y drawn from an up/down mixture of exponentials. All parameters are
//! annualized. The double-exponential model is the case of one exponential on
//! each side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum distance from a pole of the Levy exponent.
pub const POLE_TOLERANCE: f64 = 1e-10;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Mixture of exponential jump magnitudes on one side of zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpMixture {
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
}

impl JumpMixture {
    pub fn single(rate: f64) -> Self {
        Self {
            weights: vec![1.0],
            rates: vec![rate],
        }
    }

    pub fn new(weights: Vec<f64>, rates: Vec<f64>) -> Self {
        Self { weights, rates }
    }

    fn validate(&self, weights_field: &'static str, rates_field: &'static str) -> Result<()> {
        if self.rates.is_empty() || self.weights.len() != self.rates.len() {
            return Err(Error::invalid(
                weights_field,
                format!(
                    "{} weights for {} rates; need equal nonzero lengths",
                    self.weights.len(),
                    self.rates.len()
                ),
            ));
        }
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::invalid(
                rates_field,
                format!("rate {r} is not strictly positive"),
            ));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid(weights_field, "weights must be finite"));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::invalid(
                weights_field,
                format!("weights sum to {sum}, not 1"),
            ));
        }
        Ok(())
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_single(&self) -> bool {
        self.rates.len() == 1
    }

    /// Σ w·n!/rateⁿ, the n-th moment of the jump magnitude on this side.
    fn magnitude_moment(&self, n: u32) -> f64 {
        let factorial: f64 = (1..=n).map(f64::from).product();
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(w, r)| w * factorial / r.powi(n as i32))
            .sum()
    }
}

/// Jump-diffusion model with mixed-exponential jumps.
///
/// The down-jump probability is always `1 - p_up` and is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDiffusionModel {
    pub mu: f64,
    pub sigma_a: f64,
    pub lambda: f64,
    pub p_up: f64,
    pub up: JumpMixture,
    pub down: JumpMixture,
}

impl JumpDiffusionModel {
    /// Pure diffusion. The jump mixtures are placeholders that never contribute.
    pub fn lognormal(mu: f64, sigma_a: f64) -> Self {
        Self {
            mu,
            sigma_a,
            lambda: 0.0,
            p_up: 0.0,
            up: JumpMixture::single(50.0),
            down: JumpMixture::single(50.0),
        }
    }

    pub fn validate(&self) -> Result<&Self> {
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(self.sigma_a > 0.0 && self.sigma_a.is_finite()) {
            return Err(Error::invalid(
                "sigma_a",
                format!("must be strictly positive, got {}", self.sigma_a),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be nonnegative, got {}", self.lambda),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_up) {
            return Err(Error::invalid(
                "p_up",
                format!("must lie in [0, 1], got {}", self.p_up),
            ));
        }
        self.up.validate("up.weights", "up.rates")?;
        self.down.validate("down.weights", "down.rates")?;
        let min_up = self.up.min_rate();
        if min_up <= 1.0 {
            return Err(Error::invalid(
                "up.rates",
                format!("min up rate {min_up} must exceed 1 for a finite expected price"),
            ));
        }
        Ok(self)
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn q_down(&self) -> f64 {
        1.0 - self.p_up
    }

    pub fn lambda_up(&self) -> f64 {
        self.lambda * self.p_up
    }

    pub fn lambda_down(&self) -> f64 {
        self.lambda * self.q_down()
    }

    pub fn has_jumps(&self) -> bool {
        self.lambda > 0.0
    }

    /// Smallest up-jump rate, or +∞ when there are no jumps.
    pub fn up_pole(&self) -> f64 {
        if self.has_jumps() {
            self.up.min_rate()
        } else {
            f64::INFINITY
        }
    }

    /// Smallest down-jump rate, or +∞ when there are no jumps.
    pub fn down_pole(&self) -> f64 {
        if self.has_jumps() {
            self.down.min_rate()
        } else {
            f64::INFINITY
        }
    }

    /// E[Yⁿ] of a single jump.
    pub fn jump_moment(&self, n: u32) -> f64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        self.p_up * self.up.magnitude_moment(n) + self.q_down() * sign * self.down.magnitude_moment(n)
    }

    /// Annualized mean of the log return, G'(0) = μ + λE[Y].
    pub fn annual_mean(&self) -> f64 {
        self.mu + self.lambda * self.jump_moment(1)
    }

    /// Levy exponent G(x) with E[e^{xX_t}] = e^{G(x)t}.
    pub fn levy_exponent(&self, x: Complex64) -> Result<Complex64> {
        let diffusion = 0.5 * self.sigma_a * self.sigma_a * x * x + self.mu * x;
        if !self.has_jumps() {
            return Ok(diffusion);
        }
        let mut up = Complex64::new(0.0, 0.0);
        for (w, eta) in self.up.weights.iter().zip(&self.up.rates) {
            let gap = *eta - x;
            if gap.norm() < POLE_TOLERANCE {
                return Err(Error::PoleProximity {
                    pole: *eta,
                    distance: gap.norm(),
                });
            }
            up += *w * *eta / gap;
        }
        let mut down = Complex64::new(0.0, 0.0);
        for (w, theta) in self.down.weights.iter().zip(&self.down.rates) {
            let gap = *theta + x;
            if gap.norm() < POLE_TOLERANCE {
                return Err(Error::PoleProximity {
                    pole: -*theta,
                    distance: gap.norm(),
                });
            }
            down += *w * *theta / gap;
        }
        Ok(diffusion + self.lambda * (self.p_up * up + self.q_down() * down - 1.0))
    }

    pub fn levy_exponent_real(&self, x: f64) -> Result<f64> {
        self.levy_exponent(Complex64::new(x, 0.0)).map(|g| g.re)
    }

    /// Mean, variance, skewness and kurtosis of X_t from the cumulants
    /// k_n = t·Gⁿ(0).
    pub fn cumulants(&self, t: f64) -> Result<Moments> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("t", format!("must be positive, got {t}")));
        }
        let k1 = t * self.annual_mean();
        let k2 = t * (self.sigma_a * self.sigma_a + self.lambda * self.jump_moment(2));
        let k3 = t * self.lambda * self.jump_moment(3);
        let k4 = t * self.lambda * self.jump_moment(4);
        Ok(Moments {
            mean: k1,
            variance: k2,
            skewness: k3 / k2.powf(1.5),
            kurtosis: 3.0 + k4 / (k2 * k2),
        })
    }

    /// DEJD parameterization, if both mixtures are single exponentials.
    pub fn to_dejd(&self) -> Option<DejdParams> {
        if !(self.up.is_single() && self.down.is_single()) {
            return None;
        }
        Some(DejdParams {
            mu: self.mu,
            sigma_a: self.sigma_a,
            lambda_up: self.lambda_up(),
            lambda_down: self.lambda_down(),
            eta_up: self.up.rates[0],
            eta_down: self.down.rates[0],
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from_model(self))?)
    }
}

pub fn validate(model: &JumpDiffusionModel) -> Result<&JumpDiffusionModel> {
    model.validate()
}

pub fn levy_exponent(model: &JumpDiffusionModel, x: Complex64) -> Result<Complex64> {
    model.levy_exponent(x)
}

pub fn cumulants(model: &JumpDiffusionModel, t: f64) -> Result<Moments> {
    model.cumulants(t)
}

/// Distribution shape of X_t. `kurtosis` is the raw fourth standardized
/// moment (3 for a Gaussian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Double-exponential parameters in intensity form, λ_u = λp and λ_d = λ(1−p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DejdParams {
    pub mu: f64,
    #[serde(rename = "sigma")]
    pub sigma_a: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub eta_up: f64,
    pub eta_down: f64,
}

impl DejdParams {
    pub fn new(
        mu: f64,
        sigma_a: f64,
        lambda_up: f64,
        lambda_down: f64,
        eta_up: f64,
        eta_down: f64,
    ) -> Self {
        Self {
            mu,
            sigma_a,
            lambda_up,
            lambda_down,
            eta_up,
            eta_down,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_up >= 0.0 && self.lambda_up.is_finite()) {
            return Err(Error::invalid("lambda_up", format!("must be nonnegative, got {}", self.lambda_up)));
        }
        if !(self.lambda_down >= 0.0 && self.lambda_down.is_finite()) {
            return Err(Error::invalid("lambda_down", format!("must be nonnegative, got {}", self.lambda_down)));
        }
        if !(self.eta_up > 1.0) {
            return Err(Error::invalid("eta_up", format!("must exceed 1, got {}", self.eta_up)));
        }
        if !(self.eta_down > 0.0) {
            return Err(Error::invalid("eta_down", format!("must be positive, got {}", self.eta_down)));
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_up + self.lambda_down
    }

    pub fn to_model(&self) -> Result<JumpDiffusionModel> {
        self.validate()?;
        let lambda = self.lambda();
        let p_up = if lambda > 0.0 { self.lambda_up / lambda } else { 0.0 };
        JumpDiffusionModel {
            mu: self.mu,
            sigma_a: self.sigma_a,
            lambda,
            p_up,
            up: JumpMixture::single(self.eta_up),
            down: JumpMixture::single(self.eta_down),
        }
        .validated()
    }

    pub fn from_model(model: &JumpDiffusionModel) -> Result<Self> {
        model.to_dejd().ok_or_else(|| {
            Error::invalid("up.rates", "model has multi-exponential jumps; not a DEJD model")
        })
    }

    /// Parameters in the fixed order (μ, σ_a, λ_u, λ_d, η_u, η_d).
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.mu,
            self.sigma_a,
            self.lambda_up,
            self.lambda_down,
            self.eta_up,
            self.eta_down,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }
}

/// Flat JSON document for model parameters. DEJD models use `eta_up` and
/// `eta_down`; mixed-exponential models use the weight and rate arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    mu: f64,
    sigma: f64,
    lambda_up: f64,
    lambda_down: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_down: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    up_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    up_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    down_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    down_rates: Option<Vec<f64>>,
}

impl ModelDocument {
    fn from_model(model: &JumpDiffusionModel) -> Self {
        let mut doc = ModelDocument {
            mu: model.mu,
            sigma: model.sigma_a,
            lambda_up: model.lambda_up(),
            lambda_down: model.lambda_down(),
            eta_up: None,
            eta_down: None,
            up_weights: None,
            up_rates: None,
            down_weights: None,
            down_rates: None,
        };
        if let Some(dejd) = model.to_dejd() {
            doc.lambda_up = dejd.lambda_up;
            doc.lambda_down = dejd.lambda_down;
            doc.eta_up = Some(dejd.eta_up);
            doc.eta_down = Some(dejd.eta_down);
        } else {
            doc.up_weights = Some(model.up.weights.clone());
            doc.up_rates = Some(model.up.rates.clone());
            doc.down_weights = Some(model.down.weights.clone());
            doc.down_rates = Some(model.down.rates.clone());
        }
        doc
    }

    fn side(
        eta: Option<f64>,
        weights: Option<Vec<f64>>,
        rates: Option<Vec<f64>>,
        field: &'static str,
    ) -> Result<JumpMixture> {
        match (eta, weights, rates) {
            (Some(eta), None, None) => Ok(JumpMixture::single(eta)),
            (None, Some(w), Some(r)) => Ok(JumpMixture::new(w, r)),
            _ => Err(Error::invalid(
                field,
                "give either the single rate or both weight and rate arrays",
            )),
        }
    }

    fn into_model(self) -> Result<JumpDiffusionModel> {
        let up = Self::side(self.eta_up, self.up_weights, self.up_rates, "eta_up")?;
        let down = Self::side(self.eta_down, self.down_weights, self.down_rates, "eta_down")?;
        if up.is_single() && down.is_single() {
            return DejdParams::new(
                self.mu,
                self.sigma,
                self.lambda_up,
                self.lambda_down,
                up.rates[0],
                down.rates[0],
            )
            .to_model();
        }
        for (v, field) in [(self.lambda_up, "lambda_up"), (self.lambda_down, "lambda_down")] {
            if !(v >= 0.0) {
                return Err(Error::invalid(field, format!("must be nonnegative, got {v}")));
            }
        }
        let lambda = self.lambda_up + self.lambda_down;
        JumpDiffusionModel {
            mu: self.mu,
            sigma_a: self.sigma,
            lambda,
            p_up: if lambda > 0.0 { self.lambda_up / lambda } else { 0.0 },
            up,
            down,
        }
        .validated()
    }
}

/// Converts business-day horizons into year fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeConvention {
    pub trading_days_per_year: u32,
}

impl Default for TimeConvention {
    fn default() -> Self {
        Self {
            trading_days_per_year: 252,
        }
    }
}

impl TimeConvention {
    pub fn new(trading_days_per_year: u32) -> Result<Self> {
        if trading_days_per_year == 0 {
            return Err(Error::invalid("trading_days_per_year", "must be positive"));
        }
        Ok(Self {
            trading_days_per_year,
        })
    }

    pub fn year_fraction(&self, days: u32) -> f64 {
        f64::from(days) / f64::from(self.trading_days_per_year)
    }

    pub fn day(&self) -> f64 {
        self.year_fraction(1)
    }
}
