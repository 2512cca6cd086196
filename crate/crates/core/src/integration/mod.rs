//! Step-function integrals, the Itô ladder and the superhedging certificates.

mod certificate;
mod hoeffding;
mod ladder;

pub use certificate::{isometry_certificate, Certificate, CertificateLevel, Verdict};
pub use hoeffding::{hoeffding_strategy, Hoeffding, SimpleStrategy};
pub use ladder::{fit_rate, ito_ladder, Integrand, ItoLadder, ItoLevel, RateFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::partition_points;
use crate::paths::SamplePath;

/// Piecewise-constant d-covector process: `positions[n]` is held on
/// `[stops[n], stops[n+1])`, the last one up to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProcess {
    stops: Vec<usize>,
    positions: Vec<f64>,
    dim: usize,
}

impl StepProcess {
    pub fn new(stops: Vec<usize>, positions: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if stops.first() != Some(&0) {
            return Err(Error::InvalidPath("step process must start at index 0".into()));
        }
        if stops.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath("stop indices must be strictly increasing".into()));
        }
        if positions.len() != stops.len() {
            return Err(Error::DimensionMismatch {
                expected: stops.len(),
                got: positions.len(),
            });
        }
        let mut flat = Vec::with_capacity(stops.len() * dim);
        for p in &positions {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPath("non-finite position".into()));
            }
            flat.extend_from_slice(p);
        }
        Ok(Self {
            stops,
            positions: flat,
            dim,
        })
    }

    pub fn constant(value: Vec<f64>) -> Self {
        let dim = value.len();
        Self {
            stops: vec![0],
            positions: value,
            dim,
        }
    }

    /// `F_n = S_{tau_n}`: left-point sampling of the path itself.
    pub fn sample_path(path: &SamplePath, stops: &[usize]) -> Result<Self> {
        Self::sample_with(path, stops, path.dim(), |k| path.point(k).to_vec())
    }

    /// `F_n = f(tau_n)` for a grid function `f`.
    pub fn sample_with(
        path: &SamplePath,
        stops: &[usize],
        dim: usize,
        f: impl Fn(usize) -> Vec<f64>,
    ) -> Result<Self> {
        let stops = partition_points(stops, path.last());
        let stops = if stops.len() > 1 { stops[..stops.len() - 1].to_vec() } else { stops };
        let positions = stops.iter().map(|&k| f(k)).collect();
        Self::new(stops, positions, dim)
    }

    pub fn stops(&self) -> &[usize] {
        &self.stops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn position(&self, n: usize) -> &[f64] {
        &self.positions[n * self.dim..(n + 1) * self.dim]
    }

    /// Value held at grid index `k`.
    pub fn value_at(&self, k: usize) -> &[f64] {
        let n = self.stops.partition_point(|&s| s <= k) - 1;
        self.position(n)
    }

    /// `sup_n |F_n|` over positions in force on `[0, last]`.
    pub fn sup_norm(&self, last: usize) -> f64 {
        (0..self.len())
            .filter(|&n| self.stops[n] <= last)
            .map(|n| self.position(n).iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// The same process with extra stops inserted; values are unchanged.
    pub fn refine(&self, extra: &[usize]) -> Result<Self> {
        let mut stops: Vec<usize> = self.stops.iter().chain(extra).copied().collect();
        stops.sort_unstable();
        stops.dedup();
        let positions = stops.iter().map(|&k| self.value_at(k).to_vec()).collect();
        Self::new(stops, positions, self.dim)
    }

    /// `alpha F + beta G` on the merged stops.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut stops: Vec<usize> = self.stops.iter().chain(&other.stops).copied().collect();
        stops.sort_unstable();
        stops.dedup();
        let positions = stops
            .iter()
            .map(|&k| {
                self.value_at(k)
                    .iter()
                    .zip(other.value_at(k))
                    .map(|(x, y)| alpha * x + beta * y)
                    .collect()
            })
            .collect();
        Self::new(stops, positions, self.dim)
    }
}

/// `(F.S)_t = sum_n F_n S_{tau_n ^ t, tau_{n+1} ^ t}` on every grid index.
pub fn step_integral(f: &StepProcess, path: &SamplePath) -> Result<Vec<f64>> {
    if f.dim != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            got: f.dim,
        });
    }
    let last = path.last();
    if f.stops.last().is_some_and(|&s| s > last) {
        return Err(Error::GridMismatch("stop index beyond the path grid".into()));
    }
    let mut out = vec![0.0; path.len()];
    let mut done = 0.0;
    for n in 0..f.len() {
        let a = f.stops[n];
        let b = f.stops.get(n + 1).copied().unwrap_or(last);
        let pos = f.position(n);
        let base = path.point(a);
        for (k, slot) in out.iter_mut().enumerate().take(b + 1).skip(a + 1) {
            let inc: f64 = pos
                .iter()
                .zip(path.point(k).iter().zip(base))
                .map(|(p, (x, y))| p * (x - y))
                .sum();
            *slot = done + inc;
        }
        done = out[b];
    }
    Ok(out)
}

/// Matrix-valued curve `t -> M^{ij}_t` on the path grid. Row index is the
/// integrand coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCurve {
    dim: usize,
    data: Vec<f64>,
}

impl MatrixCurve {
    /// Left-point integral `(S^n . S)^{ij}_t = sum_k S^i_{t_k} S^j_{t_k ^ t, t_{k+1} ^ t}`
    /// along the partition induced by `stops`.
    pub fn ito(path: &SamplePath, stops: &[usize]) -> Self {
        Self::along(path, stops, 0.0)
    }

    /// Trapezoid sums `sum_k (S^i_{t_k ^ t} + S^i_{t_{k+1} ^ t}) / 2 * S^j_{t_k ^ t, t_{k+1} ^ t}`,
    /// i.e. the integral of the piecewise-linear interpolation against itself.
    pub fn trapezoid(path: &SamplePath, stops: &[usize]) -> Self {
        Self::along(path, stops, 0.5)
    }

    fn along(path: &SamplePath, stops: &[usize], theta: f64) -> Self {
        let d = path.dim();
        let pts = partition_points(stops, path.last());
        let mut data = vec![0.0; path.len() * d * d];
        let mut done = vec![0.0; d * d];
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let base = path.point(a).to_vec();
            for k in a + 1..=b {
                let x = path.point(k);
                let row = &mut data[k * d * d..(k + 1) * d * d];
                for i in 0..d {
                    let left = base[i] + theta * (x[i] - base[i]);
                    for j in 0..d {
                        row[i * d + j] = done[i * d + j] + left * (x[j] - base[j]);
                    }
                }
            }
            done.copy_from_slice(&data[b * d * d..(b + 1) * d * d]);
        }
        Self { dim: d, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.dim * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, t: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.data[t * dd..(t + 1) * dd]
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.at(t)[i * self.dim + j]
    }

    /// The `(i, j)` entry as a curve.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.len()).map(|t| self.get(t, i, j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{crossing_times, LadderMode};
    use crate::paths::{generate, PathKind};
    use crate::quadvar::discrete_qv;
    use proptest::prelude::*;

    fn walk(seed: u64, n: usize, scale: f64, d: usize) -> SamplePath {
        let params = [("n_steps", n as f64), ("T", 1.0), ("d", d as f64), ("scale", scale)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        generate(PathKind::RandomWalk, seed, &params).unwrap()
    }

    #[test]
    fn trivial_integrands() {
        let p = walk(3, 100, 0.25, 1);
        let one = step_integral(&StepProcess::constant(vec![1.0]), &p).unwrap();
        let zero = step_integral(&StepProcess::constant(vec![0.0]), &p).unwrap();
        for t in 0..p.len() {
            assert_eq!(one[t], p.value(t, 0) - p.value(0, 0));
            assert_eq!(zero[t], 0.0);
        }
    }

    #[test]
    fn rejects_bad_processes() {
        let p = walk(3, 10, 0.25, 2);
        assert!(step_integral(&StepProcess::constant(vec![1.0]), &p).is_err());
        assert!(StepProcess::new(vec![1], vec![vec![1.0]], 1).is_err());
        assert!(StepProcess::new(vec![0, 0], vec![vec![1.0]; 2], 1).is_err());
        assert!(StepProcess::new(vec![0, 3], vec![vec![1.0]], 1).is_err());
        let far = StepProcess::new(vec![0, 50], vec![vec![1.0, 0.0]; 2], 2).unwrap();
        assert!(step_integral(&far, &p).is_err());
    }

    #[test]
    fn closed_form_at_every_level() {
        let p = walk(8, 2000, 1.0 / 64.0, 1);
        let s0 = p.value(0, 0);
        let st = p.value(p.last(), 0);
        for n in 0..=6 {
            let stops = crossing_times(&p, (-(n as f64)).exp2(), LadderMode::PerCoordinateMerged).unwrap();
            let f = StepProcess::sample_path(&p, &stops).unwrap();
            let integral = step_integral(&f, &p).unwrap()[p.last()];
            let qv = discrete_qv(&p, &stops, 0, p.last());
            let rhs = 0.5 * (st * st - s0 * s0);
            assert!((integral + 0.5 * qv - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn matrix_curve_matches_scalar_integrals() {
        let p = walk(12, 400, 0.125, 2);
        let stops = crossing_times(&p, 0.25, LadderMode::PerCoordinateMerged).unwrap();
        let m = MatrixCurve::ito(&p, &stops);
        for i in 0..2 {
            for j in 0..2 {
                let f = StepProcess::sample_with(&p, &stops, 2, |k| {
                    let mut v = vec![0.0; 2];
                    v[j] = p.value(k, i);
                    v
                })
                .unwrap();
                let curve = step_integral(&f, &p).unwrap();
                assert_eq!(curve, m.entry(i, j));
            }
        }
    }

    #[test]
    fn trapezoid_is_ito_plus_half_covariation() {
        let p = walk(13, 300, 0.125, 2);
        let stops = crossing_times(&p, 0.25, LadderMode::PerCoordinateMerged).unwrap();
        let ito = MatrixCurve::ito(&p, &stops);
        let strat = MatrixCurve::trapezoid(&p, &stops);
        for i in 0..2 {
            for j in 0..2 {
                let cov = crate::quadvar::covariation_curve(&p, &stops, i, j);
                for t in 0..p.len() {
                    let gap = strat.get(t, i, j) - ito.get(t, i, j) - 0.5 * cov[t];
                    assert!(gap.abs() < 1e-12);
                }
            }
        }
    }

    fn dyadic_process(seed: u64, len: usize) -> StepProcess {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let mut stops = vec![0];
        for k in 1..len {
            if rng.next_f64() < 0.2 {
                stops.push(k);
            }
        }
        let positions = stops
            .iter()
            .map(|_| vec![(rng.next_u64() % 17) as f64 / 8.0 - 1.0])
            .collect();
        StepProcess::new(stops, positions, 1).unwrap()
    }

    proptest! {
        #[test]
        fn linearity_is_exact(seed in 0u64..1000, alpha in -4i32..4, beta in -4i32..4) {
            let p = walk(seed, 150, 1.0 / 32.0, 1);
            let f = dyadic_process(seed ^ 0xabc, 150);
            let g = dyadic_process(seed ^ 0xdef, 150);
            let (a, b) = (alpha as f64 / 2.0, beta as f64 / 4.0);
            let lhs = step_integral(&f.combine(a, &g, b).unwrap(), &p).unwrap();
            let fi = step_integral(&f, &p).unwrap();
            let gi = step_integral(&g, &p).unwrap();
            for t in 0..p.len() {
                prop_assert_eq!(lhs[t], a * fi[t] + b * gi[t]);
            }
        }

        #[test]
        fn refinement_invariance(seed in 0u64..1000, extra in proptest::collection::vec(0usize..150, 0..20)) {
            let p = walk(seed, 150, 1.0 / 32.0, 1);
            let f = dyadic_process(seed, 150);
            let before = step_integral(&f, &p).unwrap();
            let after = step_integral(&f.refine(&extra).unwrap(), &p).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
