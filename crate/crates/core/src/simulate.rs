//! Monte Carlo sampling of jump-diffusion log returns.
//!
//! Used as an independent check on the transform pricing and to generate
//! synthetic return series. Paths are drawn in fixed-size blocks, each with its
//! own ChaCha stream, so a seed reproduces the same sample on any machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::levy::{JumpDiffusionModel, JumpMixture};

const BLOCK: usize = 1 << 16;

/// Inverse-CDF draw of a jump magnitude from a mixture of exponentials.
fn draw_magnitude<R: Rng>(rng: &mut R, mixture: &JumpMixture) -> f64 {
    let mut pick: f64 = rng.gen();
    let mut rate = *mixture.rates.last().expect("validated mixture");
    for (w, r) in mixture.weights.iter().zip(&mixture.rates) {
        if pick < *w {
            rate = *r;
            break;
        }
        pick -= w;
    }
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn check_sampleable(model: &JumpDiffusionModel) -> Result<()> {
    model.validate()?;
    for (w, field) in [(&model.up.weights, "up.weights"), (&model.down.weights, "down.weights")] {
        if w.iter().any(|w| *w < 0.0) {
            return Err(Error::invalid(field, "mixture sampling needs nonnegative weights"));
        }
    }
    Ok(())
}

struct Sampler<'a> {
    model: &'a JumpDiffusionModel,
    drift: f64,
    scale: f64,
    jumps: Option<Poisson<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(model: &'a JumpDiffusionModel, t: f64) -> Result<Self> {
        let jumps = if model.lambda * t > 0.0 {
            Some(Poisson::new(model.lambda * t).map_err(|e| Error::invalid("lambda", e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            model,
            drift: model.mu * t,
            scale: model.sigma_a * t.sqrt(),
            jumps,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let mut x = self.drift + self.scale * z;
        if let Some(poisson) = &self.jumps {
            let count = poisson.sample(rng) as u64;
            for _ in 0..count {
                if rng.gen::<f64>() < self.model.p_up {
                    x += draw_magnitude(rng, &self.model.up);
                } else {
                    x -= draw_magnitude(rng, &self.model.down);
                }
            }
        }
        x
    }
}

/// `n_paths` independent draws of X_t.
pub fn simulate_returns(model: &JumpDiffusionModel, t: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    check_sampleable(model)?;
    if !(t > 0.0) {
        return Err(Error::invalid("t", format!("horizon must be positive, got {t}")));
    }
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "need at least one path"));
    }
    let sampler = Sampler::new(model, t)?;
    let mut out = Vec::with_capacity(n_paths);
    for block in 0..n_paths.div_ceil(BLOCK) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let len = BLOCK.min(n_paths - block * BLOCK);
        out.extend((0..len).map(|_| sampler.draw(&mut rng)));
    }
    Ok(out)
}

/// A price path of `n_steps` log-return increments of length `dt`, starting at `start`.
pub fn simulate_prices(model: &JumpDiffusionModel, dt: f64, n_steps: usize, start: f64, seed: u64) -> Result<Vec<f64>> {
    if !(start > 0.0) {
        return Err(Error::invalid("start", "initial price must be positive"));
    }
    let returns = simulate_returns(model, dt, n_steps, seed)?;
    let mut prices = Vec::with_capacity(n_steps + 1);
    let mut log_price = start.ln();
    prices.push(start);
    for r in returns {
        log_price += r;
        prices.push(log_price.exp());
    }
    Ok(prices)
}

/// Sample mean and its standard error.
pub fn mean_and_standard_error(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = m2 / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
