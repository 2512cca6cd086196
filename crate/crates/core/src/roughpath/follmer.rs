use serde::{Deserialize, Serialize};

use super::ScalarC2;
use crate::error::{Error, Result};
use crate::partitions::{partition_points, PartitionLadder};
use crate::paths::SamplePath;
use crate::quadvar::follmer_qv_check;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollmerItoLevel {
    pub n: u32,
    pub threshold: f64,
    pub sup_residual: f64,
    #[serde(skip)]
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollmerItoReport {
    pub levels: Vec<FollmerItoLevel>,
}

impl FollmerItoReport {
    pub fn finest(&self) -> &FollmerItoLevel {
        self.levels.last().expect("non-empty")
    }

    pub fn inversions(&self) -> usize {
        self.levels
            .windows(2)
            .filter(|w| w[1].sup_residual > w[0].sup_residual)
            .count()
    }
}

/// Residual of the second-order expansion along `stops`:
/// `phi(S_t) - phi(S_0) - sum grad phi(S_{t_k}) S_{..} - 1/2 sum D^2 phi(S_{t_k}) : S_{..} (x) S_{..}`
/// with increments stopped at `t`.
pub fn expansion_residual(phi: &dyn ScalarC2, path: &SamplePath, stops: &[usize]) -> Vec<f64> {
    let d = path.dim();
    let v0 = phi.value(path.point(0));
    let mut out = vec![0.0; path.len()];
    let mut done = 0.0;
    for w in partition_points(stops, path.last()).windows(2) {
        let (a, b) = (w[0], w[1]);
        let xa = path.point(a);
        let (g, h) = (phi.gradient(xa), phi.hessian(xa));
        let mut term_b = 0.0;
        for k in a + 1..=b {
            let inc = path.increment(a, k);
            let mut term = 0.0;
            for i in 0..d {
                term += g[i] * inc[i];
                for j in 0..d {
                    term += 0.5 * h[i * d + j] * inc[i] * inc[j];
                }
            }
            out[k] = (phi.value(path.point(k)) - v0 - done - term).abs();
            term_b = term;
        }
        done += term_b;
    }
    out
}

/// Per-level residual of the pathwise Itô formula. Needs the ladder to pass
/// the Föllmer quadratic-variation check.
pub fn follmer_ito_residual(
    phi: &dyn ScalarC2,
    path: &SamplePath,
    ladder: &PartitionLadder,
) -> Result<FollmerItoReport> {
    let qv = follmer_qv_check(path, ladder)?;
    if !qv.pass {
        return Err(Error::Precondition(
            "ladder does not pass the Föllmer quadratic-variation check".into(),
        ));
    }
    let levels = ladder
        .levels
        .iter()
        .map(|level| {
            let residual = expansion_residual(phi, path, &level.stops);
            FollmerItoLevel {
                n: level.n,
                threshold: level.threshold,
                sup_residual: residual.iter().fold(0.0f64, |m, &x| m.max(x)),
                residual,
            }
        })
        .collect();
    Ok(FollmerItoReport { levels })
}
