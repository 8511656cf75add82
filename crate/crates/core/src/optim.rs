//! Box-constrained Nelder-Mead minimization.
//!
//! Trial points are projected onto the box. A converged run is restarted once
//! from its best vertex with a fresh simplex, which guards against the simplex
//! collapsing onto a face of the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("bounds", "lower and upper must be nonempty and of equal length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("bounds", "each lower bound must not exceed its upper bound"));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| *l <= *v && *v <= *u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Stop when the simplex's objective spread falls below this, relative.
    pub rel_tol: f64,
    pub max_evaluations: usize,
    /// Initial edge length as a fraction of each coordinate's magnitude.
    pub initial_step: f64,
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_evaluations: 2000,
            initial_step: 0.1,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn initial_simplex(x0: &[f64], bounds: &Bounds, step: f64) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let range = bounds.upper[i] - bounds.lower[i];
        let mut h = (step * x0[i].abs()).max(1e-3 * range.min(1.0)).max(1e-10);
        let mut v = x0.to_vec();
        if x0[i] + h > bounds.upper[i] {
            h = -h;
        }
        v[i] = (x0[i] + h).clamp(bounds.lower[i], bounds.upper[i]);
        simplex.push(v);
    }
    simplex
}

fn spread_converged(values: &[f64], rel_tol: f64) -> bool {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    hi.is_finite() && (hi - lo) <= rel_tol * 0.5 * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE
}

fn run<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    x0: &[f64],
    bounds: &Bounds,
    config: &NelderMeadConfig,
    iterations: &mut usize,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    let mut simplex = initial_simplex(x0, bounds, config.initial_step);
    let mut values: Vec<f64> = simplex.iter().map(|v| f.eval(v)).collect();

    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        let mut out: Vec<f64> = a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect();
        bounds.project(&mut out);
        out
    };

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if spread_converged(&values, config.rel_tol) {
            return (simplex.swap_remove(0), values[0], true);
        }
        if f.evaluations >= config.max_evaluations {
            return (simplex.swap_remove(0), values[0], false);
        }
        *iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = blend(&centroid, &worst, -1.0);
        let fr = f.eval(&reflected);
        if fr < values[0] {
            let expanded = blend(&centroid, &worst, -2.0);
            let fe = f.eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = blend(&centroid, &reflected, 0.5);
            let fc = f.eval(&c);
            (c, fc)
        } else {
            let c = blend(&centroid, &worst, 0.5);
            let fc = f.eval(&c);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = blend(&best, &simplex[i], 0.5);
            values[i] = f.eval(&simplex[i]);
        }
    }
}

/// Minimizes `f` over the box starting from `x0` (projected onto the box).
pub fn minimize<F>(f: F, x0: &[f64], bounds: &Bounds, config: &NelderMeadConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if x0.len() != bounds.dim() {
        return Err(Error::invalid("x0", format!("expected {} coordinates, got {}", bounds.dim(), x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("x0", "starting point must be finite"));
    }
    let mut start = x0.to_vec();
    bounds.project(&mut start);
    let mut counted = Counted { f, evaluations: 0 };
    let start_value = counted.eval(&start);
    let mut iterations = 0;
    let (mut best, mut value, mut converged) = run(&mut counted, &start, bounds, config, &mut iterations);
    // The simplex always contains the start, so the result never regresses.
    debug_assert!(value <= start_value);
    for _ in 0..config.restarts {
        if !converged {
            break;
        }
        let (x, v, c) = run(&mut counted, &best, bounds, config, &mut iterations);
        let improved = v < value - config.rel_tol * value.abs();
        if v <= value {
            best = x;
            value = v;
        }
        converged = c;
        if !improved {
            break;
        }
    }
    Ok(OptimResult {
        x: best,
        value,
        evaluations: counted.evaluations,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn unconstrained_rosenbrock() {
        let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let cfg = NelderMeadConfig {
            rel_tol: 1e-14,
            max_evaluations: 5000,
            ..Default::default()
        };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &b, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn active_bound() {
        let b = Bounds::new(vec![2.0, -1.0], vec![4.0, 1.0]).unwrap();
        let r = minimize(|x| x[0] * x[0] + (x[1] - 0.5).powi(2), &[3.0, 0.0], &b, &NelderMeadConfig::default()).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-4 && (r.x[1] - 0.5).abs() < 1e-3, "{:?}", r.x);
        assert!(b.contains(&r.x));
    }

    #[test]
    fn evaluation_cap_flags_non_convergence() {
        let b = Bounds::new(vec![-5.0; 2], vec![5.0; 2]).unwrap();
        let cfg = NelderMeadConfig {
            max_evaluations: 20,
            ..Default::default()
        };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &b, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.value <= rosenbrock(&[-1.2, 1.0]));
    }

    #[test]
    fn nan_objective_is_avoided() {
        let b = Bounds::new(vec![-1.0], vec![1.0]).unwrap();
        let r = minimize(|x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.3).powi(2) }, &[0.5], &b, &NelderMeadConfig::default()).unwrap();
        assert!((r.x[0] - 0.3).abs() < 1e-3);
    }

    #[test]
    fn bad_inputs() {
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        assert!(minimize(|x| x[0], &[0.1, 0.2], &b, &NelderMeadConfig::default()).is_err());
    }
}
