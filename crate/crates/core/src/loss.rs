//! Margin-period loss of a haircut collateral position, per unit of initial
//! collateral value.
//!
//! With exposure (1−h) and liquidation at a discount g, the loss after the
//! margin period is L = (1 − h − (1−g)e^X)⁺ where X is the log return over the
//! period. Tail probabilities map to the distribution function of X and the
//! expected loss to an undiscounted put on the collateral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{JumpDiffusionModel, TimeConvention};
use crate::transform::{stabilized_invert, Inversion, InversionConfig, TransformKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSetup {
    pub mpr_days: u32,
    pub liquidity_discount: f64,
    #[serde(default)]
    pub time_convention: TimeConvention,
}

impl LossSetup {
    pub fn new(mpr_days: u32, liquidity_discount: f64) -> Result<Self> {
        let setup = Self {
            mpr_days,
            liquidity_discount,
            time_convention: TimeConvention::default(),
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mpr_days == 0 {
            return Err(Error::invalid("mpr_days", "margin period must be at least one day"));
        }
        if !(0.0..1.0).contains(&self.liquidity_discount) {
            return Err(Error::invalid(
                "liquidity_discount",
                format!("must lie in [0, 1), got {}", self.liquidity_discount),
            ));
        }
        if self.time_convention.trading_days_per_year == 0 {
            return Err(Error::invalid("trading_days_per_year", "must be positive"));
        }
        Ok(())
    }

    pub fn with_discount(mut self, liquidity_discount: f64) -> Self {
        self.liquidity_discount = liquidity_discount;
        self
    }

    pub fn with_mpr(mut self, mpr_days: u32) -> Self {
        self.mpr_days = mpr_days;
        self
    }

    /// Margin period as a year fraction.
    pub fn horizon(&self) -> f64 {
        self.time_convention.year_fraction(self.mpr_days)
    }
}

fn check_haircut(h: f64) -> Result<()> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::invalid("h", format!("haircut must lie in [0, 1), got {h}")));
    }
    Ok(())
}

/// Loss distribution of one model under one setup.
#[derive(Debug, Clone)]
pub struct LossPricer<'a> {
    model: &'a JumpDiffusionModel,
    setup: LossSetup,
    config: InversionConfig,
}

impl<'a> LossPricer<'a> {
    pub fn new(model: &'a JumpDiffusionModel, setup: LossSetup) -> Result<Self> {
        model.validate()?;
        setup.validate()?;
        Ok(Self {
            model,
            setup,
            config: InversionConfig::default(),
        })
    }

    pub fn with_config(mut self, config: InversionConfig) -> Result<Self> {
        config.validate()?;
        self.config = config;
        Ok(self)
    }

    pub fn model(&self) -> &JumpDiffusionModel {
        self.model
    }

    pub fn setup(&self) -> &LossSetup {
        &self.setup
    }

    pub fn config(&self) -> &InversionConfig {
        &self.config
    }

    pub fn horizon(&self) -> f64 {
        self.setup.horizon()
    }

    /// Same model and configuration under another setup.
    pub fn with_setup(&self, setup: LossSetup) -> Result<Self> {
        setup.validate()?;
        Ok(Self {
            model: self.model,
            setup,
            config: self.config,
        })
    }

    fn g(&self) -> f64 {
        self.setup.liquidity_discount
    }

    fn zero(&self) -> Inversion {
        Inversion {
            value: 0.0,
            diagnostics: crate::transform::InversionDiagnostics {
                abscissa: f64::NAN,
                shift_c: self.config.shift_c,
                terms: 0,
                truncation_bound: 0.0,
                leading_term: 0.0,
                doublings: 0,
                clamped: false,
                negligible: true,
            },
        }
    }

    /// Pr(X ≤ x) over the margin period.
    pub fn return_cdf(&self, x: f64) -> Result<Inversion> {
        stabilized_invert(TransformKind::Cdf, self.model, self.horizon(), x, &self.config)
    }

    /// Undiscounted put E[(e^{−k} − e^X)⁺] over the margin period.
    pub fn put(&self, k: f64) -> Result<Inversion> {
        stabilized_invert(TransformKind::Put, self.model, self.horizon(), k, &self.config)
    }

    /// Pr(L ≥ b | h) = Pr(X ≤ log((1−h−b)/(1−g))).
    pub fn tail_prob(&self, h: f64, b: f64) -> Result<Inversion> {
        check_haircut(h)?;
        if !(b >= 0.0) {
            return Err(Error::invalid("b", format!("loss level must be nonnegative, got {b}")));
        }
        let room = 1.0 - h - b;
        if room <= 0.0 {
            return Ok(self.zero());
        }
        self.return_cdf((room / (1.0 - self.g())).ln())
    }

    /// E[(L − b)⁺ | h] = (1−g)·P(k) with strike (1−h−b)/(1−g).
    pub fn stop_loss(&self, h: f64, b: f64) -> Result<Inversion> {
        check_haircut(h)?;
        if !(b >= 0.0) {
            return Err(Error::invalid("b", format!("loss level must be nonnegative, got {b}")));
        }
        let room = 1.0 - h - b;
        if room <= 0.0 {
            return Ok(self.zero());
        }
        let k = -(room / (1.0 - self.g())).ln();
        let mut put = self.put(k)?;
        put.value *= 1.0 - self.g();
        Ok(put)
    }

    /// E[L | h].
    pub fn expected_loss_detail(&self, h: f64) -> Result<Inversion> {
        self.stop_loss(h, 0.0)
    }

    pub fn loss_tail_prob(&self, h: f64, b: f64) -> Result<f64> {
        self.tail_prob(h, b).map(|v| v.value)
    }

    pub fn expected_loss(&self, h: f64) -> Result<f64> {
        self.expected_loss_detail(h).map(|v| v.value)
    }
}

pub fn loss_tail_prob(model: &JumpDiffusionModel, setup: &LossSetup, h: f64, b: f64) -> Result<f64> {
    LossPricer::new(model, *setup)?.loss_tail_prob(h, b)
}

pub fn expected_loss(model: &JumpDiffusionModel, setup: &LossSetup, h: f64) -> Result<f64> {
    LossPricer::new(model, *setup)?.expected_loss(h)
}
