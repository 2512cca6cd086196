//! Crossing-time partitions: for a threshold `c > 0`, stop whenever the path
//! has moved by at least `c` since the previous stop.
//!
//! Crossings are detected on grid points only; the recorded stop is the
//! first grid index at which the oscillation reaches the threshold. On paths
//! whose increments are exact multiples of the threshold the detected times
//! are the exact crossing times.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::SamplePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMode {
    /// Per-coordinate crossing times, merged by set union.
    #[default]
    PerCoordinateMerged,
    /// Crossings of the Euclidean norm `|S_t - S_{tau_k}|`.
    VectorNorm,
}

/// Crossing times of coordinate `coord`.
pub fn coordinate_crossing_times(path: &SamplePath, coord: usize, threshold: f64) -> Vec<usize> {
    let mut stops = vec![0];
    let mut anchor = path.value(0, coord);
    for k in 1..path.len() {
        let v = path.value(k, coord);
        if (v - anchor).abs() >= threshold {
            stops.push(k);
            anchor = v;
        }
    }
    stops
}

fn norm_crossing_times(path: &SamplePath, threshold: f64) -> Vec<usize> {
    let mut stops = vec![0];
    let mut anchor = 0;
    for k in 1..path.len() {
        if path.increment_norm(anchor, k) >= threshold {
            stops.push(k);
            anchor = k;
        }
    }
    stops
}

/// Sorted union of strictly increasing index lists.
pub fn merge_stops(lists: &[&[usize]]) -> Vec<usize> {
    let mut all: Vec<usize> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
    }
    Ok(())
}

/// Stop indices of one level. Always starts with index 0.
pub fn crossing_times(path: &SamplePath, threshold: f64, mode: LadderMode) -> Result<Vec<usize>> {
    check_threshold(threshold)?;
    Ok(match mode {
        LadderMode::PerCoordinateMerged => {
            let per: Vec<Vec<usize>> = (0..path.dim())
                .map(|i| coordinate_crossing_times(path, i, threshold))
                .collect();
            let refs: Vec<&[usize]> = per.iter().map(Vec::as_slice).collect();
            merge_stops(&refs)
        }
        LadderMode::VectorNorm => norm_crossing_times(path, threshold),
    })
}

/// `stops` followed by the final grid index when it is not already a stop:
/// the partition `0 = t_0 < ... < t_N = T` induced by a stop list.
pub fn partition_points(stops: &[usize], last: usize) -> Vec<usize> {
    let mut pts = stops.to_vec();
    if pts.last() != Some(&last) {
        pts.push(last);
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Level number `n` (for dyadic ladders, threshold `2^-n`).
    pub n: u32,
    pub threshold: f64,
    pub stops: Vec<usize>,
    /// Per-coordinate stop lists (merged mode only).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_coordinate: Vec<Vec<usize>>,
}

impl Level {
    /// Stops used by the discrete quadratic variation of coordinate `i`:
    /// the coordinate's own crossing times in merged mode, the level stops
    /// otherwise.
    pub fn coordinate_stops(&self, i: usize) -> &[usize] {
        self.per_coordinate.get(i).map_or(&self.stops, Vec::as_slice)
    }

    /// Number of stops `sigma_k != 0` with `sigma_k <= t`.
    pub fn count(&self, t: usize) -> usize {
        self.stops.partition_point(|&k| k <= t) - 1
    }
}

/// Levels of crossing-time partitions with strictly decreasing thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionLadder {
    pub mode: LadderMode,
    pub levels: Vec<Level>,
    /// Final grid index of the underlying path.
    pub last: usize,
}

impl PartitionLadder {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: usize) -> Result<&Level> {
        self.levels.get(level).ok_or(Error::LevelOutOfRange {
            level,
            levels: self.levels.len(),
        })
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().expect("ladder has at least one level")
    }

    /// Partition points (stops plus the terminal index) of a level.
    pub fn partition(&self, level: usize) -> Result<Vec<usize>> {
        Ok(partition_points(&self.level(level)?.stops, self.last))
    }

    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.levels
            .iter()
            .map(|l| partition_points(&l.stops, self.last))
            .collect()
    }

    /// Checks the structural invariants and, for merged ladders, that every
    /// per-coordinate stop is the first grid index where the oscillation
    /// since the previous stop reaches the threshold.
    pub fn validate(&self, path: &SamplePath) -> Result<()> {
        if self.last != path.last() {
            return Err(Error::GridMismatch("ladder built on a different grid".into()));
        }
        for (idx, w) in self.levels.windows(2).enumerate() {
            if !(w[1].threshold < w[0].threshold) {
                return Err(Error::NonDecreasingThresholds {
                    level: idx + 1,
                    previous: w[0].threshold,
                    next: w[1].threshold,
                });
            }
        }
        for level in &self.levels {
            if level.stops.first() != Some(&0)
                || level.stops.windows(2).any(|w| w[1] <= w[0])
                || level.stops.last().is_some_and(|&k| k > self.last)
            {
                return Err(Error::Precondition(format!(
                    "level {} stops must start at 0 and increase strictly",
                    level.n
                )));
            }
            for (i, stops) in level.per_coordinate.iter().enumerate() {
                check_first_crossings(path, i, level.threshold, stops)?;
            }
        }
        Ok(())
    }

    pub fn export(&self, path: &SamplePath) -> LadderExport {
        LadderExport {
            schema_version: 1,
            mode: self.mode,
            levels: self
                .levels
                .iter()
                .map(|l| LevelExport {
                    n: l.n,
                    threshold: l.threshold,
                    stop_indices: l.stops.clone(),
                    stop_times: l.stops.iter().map(|&k| path.time(k)).collect(),
                })
                .collect(),
        }
    }
}

fn check_first_crossings(path: &SamplePath, coord: usize, threshold: f64, stops: &[usize]) -> Result<()> {
    let bounds = partition_points(stops, path.last());
    for (k, w) in bounds.windows(2).enumerate() {
        let anchor = path.value(w[0], coord);
        let is_stop = k + 1 < stops.len();
        let end = if is_stop { w[1] } else { w[1] + 1 };
        for j in w[0] + 1..end {
            if (path.value(j, coord) - anchor).abs() >= threshold {
                return Err(Error::Precondition(format!(
                    "coordinate {coord}: oscillation reaches {threshold} at {j} before the next stop"
                )));
            }
        }
        if is_stop && (path.value(w[1], coord) - anchor).abs() < threshold {
            return Err(Error::Precondition(format!(
                "coordinate {coord}: stop {} does not reach the threshold",
                w[1]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelExport {
    pub n: u32,
    pub threshold: f64,
    pub stop_indices: Vec<usize>,
    pub stop_times: Vec<f64>,
}

/// JSON form of a ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderExport {
    pub schema_version: u32,
    pub mode: LadderMode,
    pub levels: Vec<LevelExport>,
}

/// Ladder with levels numbered `1, 2, ...`.
pub fn build_ladder(path: &SamplePath, thresholds: &[f64], mode: LadderMode) -> Result<PartitionLadder> {
    let numbered: Vec<(u32, f64)> = thresholds
        .iter()
        .enumerate()
        .map(|(k, &c)| (k as u32 + 1, c))
        .collect();
    build_ladder_numbered(path, &numbered, mode)
}

/// Ladder with explicit level numbers.
pub fn build_ladder_numbered(path: &SamplePath, levels: &[(u32, f64)], mode: LadderMode) -> Result<PartitionLadder> {
    if levels.is_empty() {
        return Err(Error::TooFewLevels { required: 1, got: 0 });
    }
    for (idx, w) in levels.windows(2).enumerate() {
        if !(w[1].1 < w[0].1) {
            return Err(Error::NonDecreasingThresholds {
                level: idx + 1,
                previous: w[0].1,
                next: w[1].1,
            });
        }
    }
    let mut out = Vec::with_capacity(levels.len());
    for &(n, threshold) in levels {
        check_threshold(threshold)?;
        let (stops, per_coordinate) = match mode {
            LadderMode::PerCoordinateMerged => {
                let per: Vec<Vec<usize>> = (0..path.dim())
                    .map(|i| coordinate_crossing_times(path, i, threshold))
                    .collect();
                let refs: Vec<&[usize]> = per.iter().map(Vec::as_slice).collect();
                (merge_stops(&refs), per)
            }
            LadderMode::VectorNorm => (norm_crossing_times(path, threshold), Vec::new()),
        };
        out.push(Level {
            n,
            threshold,
            stops,
            per_coordinate,
        });
    }
    let ladder = PartitionLadder {
        mode,
        levels: out,
        last: path.last(),
    };
    ladder.validate(path)?;
    Ok(ladder)
}

/// Thresholds `2^-n` for `n` in `ns`.
pub fn dyadic_ladder(path: &SamplePath, ns: RangeInclusive<u32>, mode: LadderMode) -> Result<PartitionLadder> {
    let levels: Vec<(u32, f64)> = ns.map(|n| (n, (-(n as f64)).exp2())).collect();
    build_ladder_numbered(path, &levels, mode)
}

/// `N^n_t`: number of stops `sigma^n_k != 0` with `sigma^n_k <= t`.
pub fn count_stops(ladder: &PartitionLadder, level: usize, t: usize) -> Result<usize> {
    let l = ladder.level(level)?;
    if t > ladder.last {
        return Err(Error::Domain(format!("grid index {t} beyond the path")));
    }
    Ok(l.count(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{generate, PathKind};

    fn linear(n: usize) -> SamplePath {
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        SamplePath::scalar(times.clone(), times).unwrap()
    }

    fn walk(seed: u64, n: usize, scale: f64, d: usize) -> SamplePath {
        let params = [("n_steps", n as f64), ("T", 1.0), ("d", d as f64), ("scale", scale)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        generate(PathKind::RandomWalk, seed, &params).unwrap()
    }

    #[test]
    fn linear_quarters() {
        let p = linear(64);
        let stops = crossing_times(&p, 0.25, LadderMode::PerCoordinateMerged).unwrap();
        let times: Vec<f64> = stops.iter().map(|&k| p.time(k)).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn constant_path_has_only_origin() {
        let p = SamplePath::scalar(vec![0.0, 0.5, 1.0], vec![2.0; 3]).unwrap();
        assert_eq!(crossing_times(&p, 0.1, LadderMode::VectorNorm).unwrap(), vec![0]);
        let ladder = build_ladder(&p, &[0.5, 0.25], LadderMode::PerCoordinateMerged).unwrap();
        assert_eq!(count_stops(&ladder, 1, 2).unwrap(), 0);
    }

    #[test]
    fn walk_crosses_every_step() {
        let p = walk(3, 50, 0.5, 1);
        let stops = crossing_times(&p, 0.5, LadderMode::PerCoordinateMerged).unwrap();
        assert_eq!(stops, (0..=50).collect::<Vec<_>>());
    }

    #[test]
    fn dyadic_linear_ladder() {
        let p = linear(1024);
        let ladder = dyadic_ladder(&p, 1..=8, LadderMode::PerCoordinateMerged).unwrap();
        for (k, level) in ladder.levels.iter().enumerate() {
            let n = k as u32 + 1;
            assert_eq!(level.n, n);
            assert_eq!(ladder.partition(k).unwrap().len() - 1, 1 << n);
        }
        let two = ladder.levels.iter().position(|l| l.n == 2).unwrap();
        assert_eq!(count_stops(&ladder, two, 1024).unwrap(), 4);
        let q = linear(1000);
        let coarse = dyadic_ladder(&q, 2..=2, LadderMode::PerCoordinateMerged).unwrap();
        assert_eq!(count_stops(&coarse, 0, q.grid_index(0.6).unwrap()).unwrap(), 2);
        assert!(count_stops(&ladder, 99, 0).is_err());
    }

    #[test]
    fn one_level_ladder_is_crossing_times() {
        let p = walk(5, 400, 0.125, 2);
        let ladder = build_ladder(&p, &[0.25], LadderMode::PerCoordinateMerged).unwrap();
        assert_eq!(
            ladder.levels[0].stops,
            crossing_times(&p, 0.25, LadderMode::PerCoordinateMerged).unwrap()
        );
    }

    #[test]
    fn merged_is_union_of_coordinates() {
        let p = walk(8, 500, 0.125, 3);
        let ladder = build_ladder(&p, &[0.5, 0.25], LadderMode::PerCoordinateMerged).unwrap();
        for level in &ladder.levels {
            let refs: Vec<&[usize]> = level.per_coordinate.iter().map(Vec::as_slice).collect();
            assert_eq!(level.stops, merge_stops(&refs));
        }
    }

    #[test]
    fn counts_nested_on_walk() {
        let p = walk(13, 4096, 1.0 / 64.0, 1);
        let ladder = dyadic_ladder(&p, 1..=6, LadderMode::PerCoordinateMerged).unwrap();
        let counts: Vec<usize> = (0..ladder.num_levels())
            .map(|l| count_stops(&ladder, l, p.last()).unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
        // dyadic crossings of a lattice walk are nested as sets
        for w in ladder.levels.windows(2) {
            assert!(w[0].stops.iter().all(|k| w[1].stops.binary_search(k).is_ok()));
        }
    }

    #[test]
    fn rejects_bad_thresholds() {
        let p = linear(8);
        assert!(matches!(
            build_ladder(&p, &[0.25, 0.5], LadderMode::VectorNorm),
            Err(Error::NonDecreasingThresholds { .. })
        ));
        assert!(build_ladder(&p, &[0.25, 0.25], LadderMode::VectorNorm).is_err());
        assert!(crossing_times(&p, 0.0, LadderMode::VectorNorm).is_err());
    }

    #[test]
    fn vector_norm_mode() {
        // diagonal unit-speed path in 2d: norm grows like sqrt(2) t
        let times: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let rows: Vec<Vec<f64>> = times.iter().map(|&t| vec![t, t]).collect();
        let p = SamplePath::from_rows(times, &rows).unwrap();
        let stops = crossing_times(&p, 0.5, LadderMode::VectorNorm).unwrap();
        // first k with k/100 * sqrt 2 >= 0.5 is 36
        assert_eq!(stops, vec![0, 36, 72]);
    }
}
