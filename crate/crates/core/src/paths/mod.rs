//! Sampled paths, their p-variation and control functions, and the seeded
//! path families used throughout the test-suite.

mod generate;
mod io;
mod variation;

pub use generate::{generate, GenerateParams, PathKind};
pub use io::{format_f64, read_csv, write_csv};
pub use variation::{
    p_variation, p_variation_on, pvar_control, pvar_control_on,
    two_param_control, two_param_variation, variation_from, ControlFunction,
};

use crate::error::{Error, Result};

/// A d-dimensional path sampled on a finite, strictly increasing time grid
/// `0 = t_0 < ... < t_m = T`. Between grid points the path is read as
/// piecewise linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl SamplePath {
    /// Builds a path from grid times and row-major values (`times.len() * dim`).
    pub fn new(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be at least 1".into()));
        }
        if times.len() < 2 {
            return Err(Error::InvalidPath(
                "need at least two grid points".into(),
            ));
        }
        if values.len() != times.len() * dim {
            return Err(Error::InvalidPath(format!(
                "expected {} values for {} points in dimension {}, got {}",
                times.len() * dim,
                times.len(),
                dim,
                values.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath(format!(
                "grid must start at 0, starts at {}",
                times[0]
            )));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!(
                "non-finite value at row {}",
                k / dim
            )));
        }
        Ok(Self { times, values, dim })
    }

    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(k) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rows[k].len(),
            });
        }
        Self::new(times, rows.concat(), dim)
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(times, values, 1)
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.last()]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, idx: usize) -> f64 {
        self.times[idx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The d-vector at grid index `idx`.
    pub fn point(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn value(&self, idx: usize, coord: usize) -> f64 {
        self.values[idx * self.dim + coord]
    }

    /// `f(t) - f(s)` for grid indices `s <= t`.
    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        debug_assert!(s <= t);
        self.point(t)
            .iter()
            .zip(self.point(s))
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Euclidean norm of the increment between two grid indices.
    pub fn increment_norm(&self, s: usize, t: usize) -> f64 {
        self.point(t)
            .iter()
            .zip(self.point(s))
            .map(|(b, a)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Values of one coordinate along the whole grid.
    pub fn coordinate(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k, coord)).collect()
    }

    /// Grid index of time `t`; `t` must coincide with a grid point up to
    /// `1e-12 * T`.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.horizon();
        let pos = self.times.partition_point(|&x| x < t - tol);
        if pos < self.len() && (self.times[pos] - t).abs() <= tol {
            Ok(pos)
        } else {
            Err(Error::Domain(format!("time {t} is not a grid point")))
        }
    }

    /// Whether the time grid is uniform (up to rounding).
    pub fn is_uniform(&self) -> bool {
        let h = self.horizon() / self.last() as f64;
        self.times
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-9 * h)
    }

    /// Restriction of the path to a sub-grid of indices, times kept as-is.
    pub fn restrict(&self, indices: &[usize]) -> Result<SamplePath> {
        let times = indices.iter().map(|&k| self.times[k]).collect();
        let values = indices
            .iter()
            .flat_map(|&k| self.point(k).iter().copied())
            .collect();
        SamplePath::new(times, values, self.dim)
    }

    /// Maps a d-dimensional path through `f` pointwise.
    pub fn map_rows(&self, out_dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<SamplePath> {
        let mut values = Vec::with_capacity(self.len() * out_dim);
        for k in 0..self.len() {
            let row = f(self.point(k));
            if row.len() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        SamplePath::new(self.times.clone(), values, out_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SamplePath::scalar(vec![0.0], vec![1.0]).is_err());
        assert!(SamplePath::scalar(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SamplePath::scalar(vec![0.1, 1.0], vec![1.0, 2.0]).is_err());
        assert!(SamplePath::scalar(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SamplePath::scalar(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(SamplePath::new(vec![0.0, 1.0], vec![], 0).is_err());
    }

    #[test]
    fn increments_and_lookup() {
        let p = SamplePath::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 2.0, 3.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(p.increment(0, 2), vec![1.0, 0.0]);
        assert_eq!(p.grid_index(0.5).unwrap(), 1);
        assert!(p.grid_index(0.25).is_err());
        assert_eq!(p.coordinate(1), vec![1.0, 3.0, 1.0]);
        assert!(p.is_uniform());
    }
}
