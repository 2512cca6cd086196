use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SamplePath;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Test-path families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// `S^i_t = slope * t`.
    Linear,
    /// `S^i_t = amplitude * sin(2 pi frequency (i + 1) t / T)`.
    Sinusoid,
    /// Steps of `+-scale` per coordinate, independent fair signs.
    RandomWalk,
    /// Gaussian increments of variance `T / n_steps` per coordinate.
    Brownian,
}

impl FromStr for PathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PathKind::Linear),
            "sinusoid" => Ok(PathKind::Sinusoid),
            "random_walk" => Ok(PathKind::RandomWalk),
            "brownian" => Ok(PathKind::Brownian),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Key-value parameters of a generator. Required: `n_steps`, `T`, `d`.
pub type GenerateParams = BTreeMap<String, f64>;

fn required(params: &GenerateParams, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::MissingParam(key.to_string()))
}

fn positive_int(params: &GenerateParams, key: &str) -> Result<usize> {
    let v = required(params, key)?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::Domain(format!("`{key}` must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

/// Deterministic function of `(kind, seed, params)`; the random families
/// draw from [`SplitMix64`] seeded with `seed`, coordinates interleaved per
/// step.
pub fn generate(kind: PathKind, seed: u64, params: &GenerateParams) -> Result<SamplePath> {
    let n = positive_int(params, "n_steps")?;
    let d = positive_int(params, "d")?;
    let horizon = required(params, "T")?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Domain(format!("T must be positive, got {horizon}")));
    }
    let times: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
    let mut values = vec![0.0; (n + 1) * d];

    match kind {
        PathKind::Linear => {
            let slope = params.get("slope").copied().unwrap_or(1.0);
            for (k, t) in times.iter().enumerate() {
                values[k * d..(k + 1) * d].fill(slope * t);
            }
        }
        PathKind::Sinusoid => {
            let amp = params.get("amplitude").copied().unwrap_or(1.0);
            let freq = params.get("frequency").copied().unwrap_or(1.0);
            for (k, t) in times.iter().enumerate() {
                for i in 0..d {
                    values[k * d + i] = amp * (2.0 * PI * freq * (i + 1) as f64 * t / horizon).sin();
                }
            }
        }
        PathKind::RandomWalk => {
            let scale = required(params, "scale")?;
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::Domain(format!("scale must be positive, got {scale}")));
            }
            let mut rng = SplitMix64::new(seed);
            for k in 1..=n {
                for i in 0..d {
                    values[k * d + i] = values[(k - 1) * d + i] + scale * rng.next_sign();
                }
            }
        }
        PathKind::Brownian => {
            let sd = (horizon / n as f64).sqrt();
            let mut rng = SplitMix64::new(seed);
            for k in 1..=n {
                for i in 0..d {
                    values[k * d + i] = values[(k - 1) * d + i] + sd * rng.next_normal();
                }
            }
        }
    }
    SamplePath::new(times, values, d)
}
