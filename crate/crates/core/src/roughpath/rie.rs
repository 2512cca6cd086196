use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{check_p, norm};
use crate::error::{Error, Result};
use crate::integration::MatrixCurve;
use crate::partitions::PartitionLadder;
use crate::paths::{pvar_control_on, two_param_control, SamplePath};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieLevel {
    pub points: usize,
    /// `max_k |S_{t_k, t_{k+1}}|`.
    pub mesh: f64,
    /// `max_{k<l} |D(k,l)|^{p/2} / c~(t_k, t_l)` against the unscaled control.
    pub term: f64,
}

/// Outcome of the uniform bound on discrete area deviations
/// `D^n(k,l) = sum_{j=k}^{l-1} S_{t_k,t_j} (x) S_{t_j,t_{j+1}}` along a
/// partition sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieReport {
    pub p: f64,
    pub applicable: bool,
    pub pass: bool,
    pub reason: String,
    /// Points in the union grid the control is tabulated on.
    pub grid_points: usize,
    /// Constant `K` with `c = K c~`; `c~` is the p-variation control of `S`
    /// plus the p/2-variation control of the finest-level area.
    pub scale: f64,
    /// `sup_n sup_{k<l} |D^n(k,l)|^{p/2} / c(t_k, t_l)` with the scaled control.
    pub sup_ratio: f64,
    pub levels: Vec<RieLevel>,
    pub partition_sizes: Vec<usize>,
    pub path_len: usize,
    #[serde(skip)]
    fingerprint: u64,
}

impl RieReport {
    /// Whether this report was computed for `partitions` of `path`.
    pub fn covers(&self, path: &SamplePath, partitions: &[Vec<usize>]) -> bool {
        self.path_len == path.len()
            && self.partition_sizes == partitions.iter().map(Vec::len).collect::<Vec<_>>()
            && self.fingerprint == fingerprint(path, partitions)
    }
}

fn fingerprint(path: &SamplePath, partitions: &[Vec<usize>]) -> u64 {
    let mut h = DefaultHasher::new();
    partitions.hash(&mut h);
    for x in path.values() {
        x.to_bits().hash(&mut h);
    }
    h.finish()
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Checks the uniform coarse-grained p/2-variation bound on `partitions`
/// (partition points, coarse to fine). The union of all partition points is
/// the control grid; tabulation is cubic in its size.
pub fn check_rie(path: &SamplePath, partitions: &[Vec<usize>], p: f64) -> Result<RieReport> {
    check_p(p)?;
    if partitions.is_empty() {
        return Err(Error::TooFewLevels { required: 1, got: 0 });
    }
    let last = path.last();
    for pts in partitions {
        if pts.first() != Some(&0) || pts.last() != Some(&last) || pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridMismatch(
                "partition must run from index 0 to the last grid index, strictly increasing".into(),
            ));
        }
    }
    let d = path.dim();
    let meshes: Vec<f64> = partitions
        .iter()
        .map(|pts| pts.windows(2).fold(0.0f64, |m, w| m.max(path.increment_norm(w[0], w[1]))))
        .collect();
    let mut report = RieReport {
        p,
        applicable: true,
        pass: false,
        reason: String::new(),
        grid_points: 0,
        scale: 1.0,
        sup_ratio: 0.0,
        levels: Vec::new(),
        partition_sizes: partitions.iter().map(Vec::len).collect(),
        path_len: path.len(),
        fingerprint: fingerprint(path, partitions),
    };
    if let Some(n) = meshes.windows(2).position(|w| w[1] > w[0]) {
        report.applicable = false;
        report.reason = format!("mesh oscillation increases from level {} to {}", n, n + 1);
        report.levels = partitions
            .iter()
            .zip(&meshes)
            .map(|(pts, &mesh)| RieLevel {
                points: pts.len(),
                mesh,
                term: f64::NAN,
            })
            .collect();
        return Ok(report);
    }

    let mut union: Vec<usize> = partitions.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut pos = vec![usize::MAX; path.len()];
    for (k, &g) in union.iter().enumerate() {
        pos[g] = k;
    }
    let finest = MatrixCurve::ito(path, partitions.last().expect("non-empty"));
    let area = |s: usize, t: usize| -> f64 {
        let (is, it) = (finest.at(s), finest.at(t));
        let (xs, xt) = (path.point(s), path.point(t));
        let mut r2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let a = it[i * d + j] - is[i * d + j] - xs[i] * (xt[j] - xs[j]);
                r2 += a * a;
            }
        }
        r2.sqrt()
    };
    let control = pvar_control_on(path, p, &union)?.add(&two_param_control(&union, p / 2.0, area)?)?;

    let half = p / 2.0;
    let mut dev = vec![0.0; d * d];
    for (pts, &mesh) in partitions.iter().zip(&meshes) {
        let curve = MatrixCurve::ito(path, pts);
        let mut term = 0.0f64;
        for (k, &a) in pts.iter().enumerate() {
            let (ia, xa) = (curve.at(a), path.point(a));
            for &b in &pts[k + 1..] {
                let (ib, xb) = (curve.at(b), path.point(b));
                for i in 0..d {
                    for j in 0..d {
                        dev[i * d + j] = ib[i * d + j] - ia[i * d + j] - xa[i] * (xb[j] - xa[j]);
                    }
                }
                term = term.max(ratio(norm(&dev).powf(half), control.get(pos[a], pos[b])));
            }
        }
        report.levels.push(RieLevel {
            points: pts.len(),
            mesh,
            term,
        });
    }
    report.grid_points = union.len();
    let raw = report.levels.iter().fold(0.0f64, |m, l| m.max(l.term));
    if raw.is_finite() {
        report.scale = raw.max(1.0);
        report.sup_ratio = raw / report.scale;
        report.pass = report.sup_ratio <= 1.0 + 1e-9;
        report.reason = if raw <= 1.0 {
            "bounded by the unscaled control".into()
        } else {
            format!("bounded by the control scaled by {raw}")
        };
    } else {
        report.scale = f64::INFINITY;
        report.sup_ratio = f64::INFINITY;
        report.reason = "nonzero deviation where the control vanishes".into();
    }
    Ok(report)
}

/// [`check_rie`] along the partitions of a crossing ladder.
pub fn check_rie_ladder(path: &SamplePath, ladder: &PartitionLadder, p: f64) -> Result<RieReport> {
    if ladder.last != path.last() {
        return Err(Error::GridMismatch("ladder built on a different grid".into()));
    }
    check_rie(path, &ladder.partitions(), p)
}

#[cfg(test)]
mod tests {
    use super::super::tests::walk;
    use super::*;
    use crate::partitions::{dyadic_ladder, LadderMode};

    fn uniform(n: usize, step: usize) -> Vec<usize> {
        (0..=n).step_by(step).collect()
    }

    #[test]
    fn constant_path_ratio_zero() {
        let path = SamplePath::scalar((0..=64).map(|k| k as f64).collect(), vec![1.5; 65]).unwrap();
        let r = check_rie(&path, &[uniform(64, 16), uniform(64, 4), uniform(64, 1)], 2.5).unwrap();
        assert!(r.applicable && r.pass);
        assert_eq!(r.sup_ratio, 0.0);
        assert_eq!(r.scale, 1.0);
    }

    #[test]
    fn linear_path_uniform_partitions() {
        let n = 64;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let path = SamplePath::scalar(t.clone(), t).unwrap();
        let parts = [uniform(n, 16), uniform(n, 8), uniform(n, 2), uniform(n, 1)];
        let r = check_rie(&path, &parts, 2.5).unwrap();
        assert!(r.pass);
        // the p-variation part alone already dominates: |D| = |S_{s,t}|^2 / 2 - ...
        assert!(r.levels.iter().all(|l| l.term <= 1.0));
    }

    #[test]
    fn walk_with_crossing_ladder() {
        for seed in 0..4 {
            let path = walk(seed, 2048, 1.0 / 32.0, 1);
            let ladder = dyadic_ladder(&path, 1..=3, LadderMode::PerCoordinateMerged).unwrap();
            let r = check_rie_ladder(&path, &ladder, 2.5).unwrap();
            assert!(r.applicable && r.pass, "{r:?}");
            assert!(r.sup_ratio <= 1.0 + 1e-9);
            assert!(r.covers(&path, &ladder.partitions()));
            assert!(!r.covers(&path, &ladder.partitions()[1..]));
        }
    }

    #[test]
    fn increasing_mesh_not_applicable() {
        let path = walk(9, 256, 0.1, 1);
        let r = check_rie(&path, &[uniform(256, 1), uniform(256, 64)], 2.5).unwrap();
        assert!(!r.applicable && !r.pass);
        assert!(check_rie(&path, &[uniform(256, 1)], 3.5).is_err());
        assert!(check_rie(&path, &[vec![0, 10]], 2.5).is_err());
    }
}
