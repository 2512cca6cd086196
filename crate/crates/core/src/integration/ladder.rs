use serde::{Deserialize, Serialize};

use super::{step_integral, StepProcess};
use crate::error::{Error, Result};
use crate::partitions::PartitionLadder;
use crate::paths::SamplePath;

/// Integrand of an Itô ladder.
#[derive(Debug, Clone)]
pub enum Integrand {
    /// `int S^i dS^j`.
    Coordinate { i: usize, j: usize },
    /// A d-covector valued path on the same grid, sampled at the stops.
    Sampled(SamplePath),
}

impl Integrand {
    fn step_process(&self, path: &SamplePath, stops: &[usize]) -> Result<StepProcess> {
        let d = path.dim();
        match self {
            Integrand::Coordinate { i, j } => {
                if *i >= d || *j >= d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: (*i).max(*j) + 1,
                    });
                }
                StepProcess::sample_with(path, stops, d, |k| {
                    let mut v = vec![0.0; d];
                    v[*j] = path.value(k, *i);
                    v
                })
            }
            Integrand::Sampled(f) => {
                if f.len() != path.len() || f.times() != path.times() {
                    return Err(Error::GridMismatch("integrand sampled on a different grid".into()));
                }
                if f.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: f.dim(),
                    });
                }
                StepProcess::sample_with(path, stops, d, |k| f.point(k).to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItoLevel {
    pub n: u32,
    pub threshold: f64,
    #[serde(skip)]
    pub curve: Vec<f64>,
    /// `sup_t |curve_n - curve_N|`.
    pub residual: f64,
}

/// Least-squares fit of `log residual` against `log(c_n sqrt(log(n + 2)))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItoLadder {
    pub levels: Vec<ItoLevel>,
    pub rate: Option<RateFit>,
}

impl ItoLadder {
    pub fn finest(&self) -> &ItoLevel {
        self.levels.last().expect("non-empty ladder")
    }

    /// Number of strict increases in the residual sequence.
    pub fn inversions(&self) -> usize {
        self.levels
            .windows(2)
            .filter(|w| w[1].residual > w[0].residual)
            .count()
    }
}

pub fn fit_rate(levels: &[ItoLevel]) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.residual > 0.0)
        .map(|l| {
            let x = (l.threshold * (f64::from(l.n) + 2.0).ln().sqrt()).ln();
            (x, l.residual.ln())
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(RateFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Level-n integrals with the integrand sampled at the level-n stops,
/// residuals to the finest level and the fitted rate.
pub fn ito_ladder(path: &SamplePath, ladder: &PartitionLadder, integrand: &Integrand) -> Result<ItoLadder> {
    if ladder.num_levels() < 3 {
        return Err(Error::TooFewLevels {
            required: 3,
            got: ladder.num_levels(),
        });
    }
    if ladder.last != path.last() {
        return Err(Error::GridMismatch("ladder built on a different grid".into()));
    }
    let curves = ladder
        .levels
        .iter()
        .map(|level| step_integral(&integrand.step_process(path, &level.stops)?, path))
        .collect::<Result<Vec<_>>>()?;
    let finest = curves.last().expect("at least three levels").clone();
    let levels: Vec<ItoLevel> = ladder
        .levels
        .iter()
        .zip(curves)
        .map(|(level, curve)| ItoLevel {
            n: level.n,
            threshold: level.threshold,
            residual: curve.iter().zip(&finest).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
            curve,
        })
        .collect();
    let rate = fit_rate(&levels);
    Ok(ItoLadder { levels, rate })
}
