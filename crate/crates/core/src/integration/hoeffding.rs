use serde::{Deserialize, Serialize};

use super::{step_integral, StepProcess};
use crate::error::{Error, Result};
use crate::paths::SamplePath;

/// Simple strategy with its wealth process `(H.S)_t` on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimpleStrategy {
    pub process: StepProcess,
    /// Admissibility level: the strategy is meant to satisfy `(H.S)_t >= -admissibility`.
    pub admissibility: f64,
    #[serde(skip)]
    pub wealth: Vec<f64>,
}

impl SimpleStrategy {
    pub fn new(process: StepProcess, path: &SamplePath, admissibility: f64) -> Result<Self> {
        let wealth = step_integral(&process, path)?;
        Ok(Self {
            process,
            admissibility,
            wealth,
        })
    }

    pub fn min_wealth(&self) -> f64 {
        self.wealth.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_admissible(&self) -> bool {
        self.min_wealth() >= -self.admissibility
    }
}

/// Output of [`hoeffding_strategy`]: the strategy and the exponential
/// lower bound it dominates.
#[derive(Debug, Clone)]
pub struct Hoeffding {
    pub lambda: f64,
    pub strategy: SimpleStrategy,
    /// `exp(lambda sum_n h_n S_{tau_n ^ t, tau_{n+1} ^ t} - lambda^2/2 sum_{n <= N_t} b_n^2)`.
    pub bound: Vec<f64>,
}

impl Hoeffding {
    /// `min_t (1 + (H.S)_t - bound_t) / max(1, bound_t)`.
    pub fn margin(&self) -> f64 {
        self.strategy
            .wealth
            .iter()
            .zip(&self.bound)
            .map(|(w, e)| (1.0 + w - e) / e.max(1.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin() >= -tol
    }
}

fn dot(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a.iter().zip(b.iter().zip(c)).map(|(h, (x, y))| h * (x - y)).sum()
}

/// Pathwise Hoeffding strategy: positions `F_m = (1 + (H.S)_{tau_m}) f_m` with
/// `f_m = exp(-lambda^2 b_m^2 / 2) sinh(lambda b_m) / b_m * h_m`.
pub fn hoeffding_strategy(
    path: &SamplePath,
    stops: &[usize],
    h: &[Vec<f64>],
    b: &[f64],
    lambda: f64,
) -> Result<Hoeffding> {
    let d = path.dim();
    let last = path.last();
    if stops.first() != Some(&0) || stops.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidPath("stops must start at 0 and increase strictly".into()));
    }
    if stops.last().is_some_and(|&s| s > last) {
        return Err(Error::GridMismatch("stop index beyond the path grid".into()));
    }
    if h.len() != stops.len() || b.len() != stops.len() {
        return Err(Error::DimensionMismatch {
            expected: stops.len(),
            got: h.len().min(b.len()),
        });
    }
    if let Some(row) = h.iter().find(|row| row.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: row.len(),
        });
    }
    if !lambda.is_finite() || b.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("need finite lambda and b_n > 0".into()));
    }

    let end = |n: usize| stops.get(n + 1).copied().unwrap_or(last);
    for n in 0..stops.len() {
        let base = path.point(stops[n]);
        for k in stops[n] + 1..=end(n) {
            let v = dot(&h[n], path.point(k), base).abs();
            if v > b[n] * (1.0 + 1e-12) {
                return Err(Error::HoeffdingCondition {
                    interval: n,
                    index: k,
                    value: v,
                    bound: b[n],
                });
            }
        }
    }

    let mut positions = Vec::with_capacity(stops.len());
    let mut bound = vec![1.0; path.len()];
    let mut capital = 1.0;
    let (mut drift, mut penalty) = (0.0, 0.0);
    for n in 0..stops.len() {
        let bn = b[n];
        let lb = lambda * bn;
        let scale = (-0.5 * lb * lb).exp() * lb.sinh() / bn;
        let pos: Vec<f64> = h[n].iter().map(|x| capital * scale * x).collect();
        let base = path.point(stops[n]);
        penalty += 0.5 * lb * lb;
        bound[stops[n]] = (lambda * drift - penalty).exp();
        for k in stops[n] + 1..=end(n) {
            bound[k] = (lambda * (drift + dot(&h[n], path.point(k), base)) - penalty).exp();
        }
        drift += dot(&h[n], path.point(end(n)), base);
        capital += dot(&pos, path.point(end(n)), base);
        positions.push(pos);
    }
    let strategy = SimpleStrategy::new(StepProcess::new(stops.to_vec(), positions, d)?, path, 1.0)?;
    Ok(Hoeffding {
        lambda,
        strategy,
        bound,
    })
}
