use serde::{Deserialize, Serialize};

use super::{norm, RoughPath};
use crate::error::{Error, Result};

/// Minimal constant `C` in `|sum_{j=k}^{l-1} A(jh,(j+1)h)| <= C (l-k)^beta h^(2 alpha)`
/// over the sampled grids, with the maximizing triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DavieReport {
    pub alpha: f64,
    pub beta: f64,
    pub sup: f64,
    pub k: usize,
    pub l: usize,
    /// Block size `D` in raw steps; `h = D T / M`.
    pub block: usize,
    pub blocks_checked: usize,
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 1.0 - alpha && beta < 2.0 * alpha) {
        return Err(Error::ExponentOutOfRange(format!(
            "beta must lie in (1 - alpha, 2 alpha) = ({}, {}), got {beta}",
            1.0 - alpha,
            2.0 * alpha
        )));
    }
    Ok(())
}

/// Exact maximization over every divisor block size `D` of `steps` (or the
/// given ones) and every `0 <= k < l <= steps / D`. `area(s, t)` is evaluated
/// on raw indices `s = jD`, `t = (j+1)D`. Exponents are not checked.
pub fn davie_sup_unchecked(
    steps: usize,
    horizon: f64,
    alpha: f64,
    beta: f64,
    block_sizes: Option<&[usize]>,
    area: impl Fn(usize, usize) -> Vec<f64>,
) -> Result<DavieReport> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::Domain("need at least one step and a positive horizon".into()));
    }
    let blocks: Vec<usize> = match block_sizes {
        Some(b) => {
            if let Some(&bad) = b.iter().find(|&&b| b == 0 || steps % b != 0) {
                return Err(Error::Domain(format!("block size {bad} does not divide {steps}")));
            }
            b.to_vec()
        }
        None => (1..=steps).filter(|b| steps % b == 0).collect(),
    };
    let mut report = DavieReport {
        alpha,
        beta,
        sup: 0.0,
        k: 0,
        l: 0,
        block: 0,
        blocks_checked: blocks.len(),
    };
    for &block in &blocks {
        let n = steps / block;
        let h = horizon * block as f64 / steps as f64;
        let hpow = h.powf(2.0 * alpha);
        let pieces: Vec<Vec<f64>> = (0..n).map(|j| area(j * block, (j + 1) * block)).collect();
        let dd = pieces.first().map_or(0, Vec::len);
        let mut acc = vec![0.0; dd];
        for k in 0..n {
            acc.iter_mut().for_each(|x| *x = 0.0);
            for l in k + 1..=n {
                for (a, x) in acc.iter_mut().zip(&pieces[l - 1]) {
                    *a += x;
                }
                let r = norm(&acc) / ((l - k) as f64).powf(beta) / hpow;
                if r > report.sup {
                    report.sup = r;
                    report.k = k;
                    report.l = l;
                    report.block = block;
                }
            }
        }
    }
    Ok(report)
}

/// Davie constant of the area of `rp` on uniform sub-grids of its raw time
/// grid, with `beta` restricted to `(1 - alpha, 2 alpha)`.
pub fn davie_sup(rp: &RoughPath, alpha: f64, beta: f64, block_sizes: Option<&[usize]>) -> Result<DavieReport> {
    check_exponents(alpha, beta)?;
    let path = rp.path();
    if !path.is_uniform() {
        return Err(Error::GridMismatch("Davie sums need a uniform time grid".into()));
    }
    let horizon = path.time(path.last()) - path.time(0);
    davie_sup_unchecked(path.last(), horizon, alpha, beta, block_sizes, |s, t| rp.area(s, t))
}
