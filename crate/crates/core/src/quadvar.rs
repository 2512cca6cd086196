//! Discrete quadratic variation and covariation along crossing-time ladders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{partition_points, Level, PartitionLadder};
use crate::paths::SamplePath;

/// `V^{n,i}_t = sum_k (S^i_{t_{k+1} ^ t} - S^i_{t_k ^ t})^2` along the
/// partition induced by `stops`, evaluated at grid index `t`.
pub fn discrete_qv(path: &SamplePath, stops: &[usize], coord: usize, t: usize) -> f64 {
    covariation(path, stops, coord, coord, t)
}

/// `V^n_t = sum_i V^{n,i}_t`, each coordinate along its own stops.
pub fn discrete_qv_total(path: &SamplePath, level: &Level, t: usize) -> f64 {
    (0..path.dim())
        .map(|i| discrete_qv(path, level.coordinate_stops(i), i, t))
        .sum()
}

/// `<S^i, S^j>^n_t`: direct sum over the partition, stopped at `t`.
pub fn covariation(path: &SamplePath, stops: &[usize], i: usize, j: usize, t: usize) -> f64 {
    let pts = partition_points(stops, path.last());
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0].min(t), w[1].min(t));
        if a == b {
            break;
        }
        acc += (path.value(b, i) - path.value(a, i)) * (path.value(b, j) - path.value(a, j));
    }
    acc
}

/// `t -> <S^i, S^j>^n_t` on every grid index in one pass.
pub fn covariation_curve(path: &SamplePath, stops: &[usize], i: usize, j: usize) -> Vec<f64> {
    let pts = partition_points(stops, path.last());
    let mut out = vec![0.0; path.len()];
    let mut done = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ai, aj) = (path.value(a, i), path.value(a, j));
        for (k, slot) in out.iter_mut().enumerate().take(b + 1).skip(a + 1) {
            *slot = done + (path.value(k, i) - ai) * (path.value(k, j) - aj);
        }
        done = out[b];
    }
    out
}

/// Distribution function of `mu_n = sum_k |f_{t_k, t_{k+1}}|^2 delta_{t_k}`
/// for the scalar path `f = sum_c weights[c] S^c`, on every grid index.
pub fn follmer_distribution(path: &SamplePath, stops: &[usize], weights: &[f64]) -> Vec<f64> {
    let pts = partition_points(stops, path.last());
    let f = |k: usize| -> f64 { path.point(k).iter().zip(weights).map(|(v, w)| v * w).sum() };
    let mut out = vec![0.0; path.len()];
    let mut acc = 0.0;
    let mut next = 0;
    for (k, slot) in out.iter_mut().enumerate() {
        while next + 1 < pts.len() && pts[next] <= k {
            let inc = f(pts[next + 1]) - f(pts[next]);
            acc += inc * inc;
            next += 1;
        }
        *slot = acc;
    }
    out
}

/// Discrete covariations of one level.
#[derive(Debug, Clone)]
pub struct QvLevel {
    pub n: u32,
    pub threshold: f64,
    /// `covariation[i * d + j]`: `<S^i,S^j>^n` along the level partition.
    pub covariation: Vec<Vec<f64>>,
    /// `V^{n,i}` along each coordinate's own crossing times.
    pub coordinate_qv: Vec<Vec<f64>>,
}

/// Covariation curves for every level of a ladder. The finest level stands
/// in for the limit.
#[derive(Debug, Clone)]
pub struct QvLadder {
    pub dim: usize,
    pub levels: Vec<QvLevel>,
}

impl QvLadder {
    pub fn build(path: &SamplePath, ladder: &PartitionLadder) -> Result<Self> {
        if ladder.last != path.last() {
            return Err(Error::GridMismatch("ladder built on a different grid".into()));
        }
        let d = path.dim();
        let levels = ladder
            .levels
            .iter()
            .map(|level| {
                let mut cov = vec![Vec::new(); d * d];
                for i in 0..d {
                    for j in i..d {
                        let c = covariation_curve(path, &level.stops, i, j);
                        if i != j {
                            cov[j * d + i] = c.clone();
                        }
                        cov[i * d + j] = c;
                    }
                }
                let coordinate_qv = (0..d)
                    .map(|i| covariation_curve(path, level.coordinate_stops(i), i, i))
                    .collect();
                QvLevel {
                    n: level.n,
                    threshold: level.threshold,
                    covariation: cov,
                    coordinate_qv,
                }
            })
            .collect();
        Ok(Self { dim: d, levels })
    }

    pub fn finest(&self) -> &QvLevel {
        self.levels.last().expect("non-empty ladder")
    }

    /// Limit estimate `<S^i,S^j>` (finest level).
    pub fn limit(&self, i: usize, j: usize) -> &[f64] {
        &self.finest().covariation[i * self.dim + j]
    }

    /// Total `V^n_T = sum_i V^{n,i}_T` per level.
    pub fn total_variation_per_level(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| l.coordinate_qv.iter().map(|c| c[c.len() - 1]).sum())
            .collect()
    }
}

/// Per-level entry of a [`FollmerReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollmerLevel {
    pub n: u32,
    pub threshold: f64,
    /// `max_{i,j} sup_t |<S^i,S^j>^n_t - <S^i,S^j>^N_t|`.
    pub uniform_gap: f64,
    /// Same gap for the distribution functions of the discrete measures.
    pub measure_gap: f64,
    /// `max_{i,j} sum_k |S^i_{inc} S^j_{inc}|`: total variation of the
    /// covariation on partition points.
    pub tv: f64,
    /// `max_{i,j} 1/4 sum_k ((S^i+S^j)_{inc}^2 + (S^i-S^j)_{inc}^2)`.
    pub tv_bound: f64,
    /// `max_k |S_{t_k, t_{k+1}}|`.
    pub mesh: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollmerReport {
    pub levels: Vec<FollmerLevel>,
    pub gaps_non_increasing: bool,
    /// Levels whose gap exceeds the previous level's.
    pub gap_inversions: usize,
    pub tv_within_bound: bool,
    pub mesh_non_increasing: bool,
    pub mesh_inversions: usize,
    /// Largest covariation magnitude at the finest level; gaps are judged
    /// relative to it.
    pub scale: f64,
    pub pass: bool,
}

/// Cauchy-gap and bounded-variation report for the discrete covariations.
///
/// Uniform convergence of the distribution functions stands in for weak
/// convergence of the discrete measures (the limit is continuous).
pub fn follmer_qv_check(path: &SamplePath, ladder: &PartitionLadder) -> Result<FollmerReport> {
    if ladder.num_levels() < 2 {
        return Err(Error::TooFewLevels {
            required: 2,
            got: ladder.num_levels(),
        });
    }
    let qv = QvLadder::build(path, ladder)?;
    let d = path.dim();
    let finest = qv.finest();
    let finest_stops = &ladder.finest().stops;

    // weight vectors for f^i and f^i + f^j
    let mut weight_sets: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut w = vec![0.0; d];
            w[i] += 1.0;
            if j != i {
                w[j] += 1.0;
            }
            weight_sets.push(w);
        }
    }
    let finest_measures: Vec<Vec<f64>> = weight_sets
        .iter()
        .map(|w| follmer_distribution(path, finest_stops, w))
        .collect();

    let scale = finest
        .covariation
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let sup_gap = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

    let mut levels = Vec::with_capacity(qv.levels.len());
    let mut tv_within_bound = true;
    for (level, lq) in ladder.levels.iter().zip(&qv.levels) {
        let uniform_gap = lq
            .covariation
            .iter()
            .zip(&finest.covariation)
            .fold(0.0f64, |m, (a, b)| m.max(sup_gap(a, b)));
        let measure_gap = weight_sets
            .iter()
            .zip(&finest_measures)
            .fold(0.0f64, |m, (w, fin)| m.max(sup_gap(&follmer_distribution(path, &level.stops, w), fin)));

        let pts = partition_points(&level.stops, path.last());
        let (mut tv, mut tv_bound, mut mesh) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..d {
            for j in i..d {
                let (mut v, mut b) = (0.0, 0.0);
                for w in pts.windows(2) {
                    let x = path.value(w[1], i) - path.value(w[0], i);
                    let y = path.value(w[1], j) - path.value(w[0], j);
                    v += (x * y).abs();
                    b += 0.25 * ((x + y) * (x + y) + (x - y) * (x - y));
                }
                if v > b * (1.0 + 1e-12) {
                    tv_within_bound = false;
                }
                tv = tv.max(v);
                tv_bound = tv_bound.max(b);
            }
        }
        for w in pts.windows(2) {
            mesh = mesh.max(path.increment_norm(w[0], w[1]));
        }
        levels.push(FollmerLevel {
            n: level.n,
            threshold: level.threshold,
            uniform_gap,
            measure_gap,
            tv,
            tv_bound,
            mesh,
        });
    }

    let slack = 1e-12 * (1.0 + scale);
    let gap_inversions = levels
        .windows(2)
        .filter(|w| w[1].uniform_gap > w[0].uniform_gap + slack)
        .count();
    let mesh_inversions = levels
        .windows(2)
        .filter(|w| w[1].mesh > w[0].mesh * (1.0 + 1e-12))
        .count();
    // Sampling noise can lift a single level above its predecessor; decay
    // overall (second-finest gap below the coarsest) is still required.
    let n = levels.len();
    let decays = n < 3 || levels[n - 2].uniform_gap < levels[0].uniform_gap + slack;
    let mesh_decays = levels[n - 1].mesh <= levels[0].mesh * (1.0 + 1e-12);
    Ok(FollmerReport {
        pass: gap_inversions <= 1 && decays && mesh_inversions <= 1 && mesh_decays && tv_within_bound,
        levels,
        gaps_non_increasing: gap_inversions == 0,
        gap_inversions,
        tv_within_bound,
        mesh_non_increasing: mesh_inversions == 0,
        mesh_inversions,
        scale,
    })
}
