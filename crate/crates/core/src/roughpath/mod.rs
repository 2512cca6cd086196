//! Itô rough paths, controlled paths and rough-path integrals.

mod controlled;
mod davie;
mod follmer;
mod functions;
mod integral;
mod rie;

pub use controlled::{controlled_from_bv, controlled_from_phi, ControlledPath};
pub use davie::{davie_sup, davie_sup_unchecked, DavieReport};
pub use follmer::{follmer_ito_residual, FollmerItoLevel, FollmerItoReport};
pub use functions::{Elementary, ScalarC2, VectorField};
pub use integral::{
    interpolated_area, rough_integral_compensated, rough_integral_riemann, stratonovich_integral,
    CompensatedIntegral, IntegralLevel, LocalBound, RiemannIntegral, RiemannLevel, Stratonovich,
};
pub use rie::{check_rie, check_rie_ladder, RieLevel, RieReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integration::MatrixCurve;
use crate::partitions::{partition_points, PartitionLadder};
use crate::paths::{pvar_control_on, two_param_control, ControlFunction, SamplePath};

/// Frobenius norm.
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::ExponentOutOfRange(format!("p must lie in (2, 3), got {p}")));
    }
    Ok(())
}

/// Dense table of a d x d valued two-index function on a grid of path
/// indices; entries with `i <= j` only.
#[derive(Debug, Clone)]
pub struct AreaTable {
    grid: Vec<usize>,
    dim: usize,
    pub(crate) data: Vec<f64>,
}

impl AreaTable {
    pub fn from_fn(grid: Vec<usize>, dim: usize, f: impl Fn(usize, usize) -> Vec<f64>) -> Self {
        let m = grid.len();
        let dd = dim * dim;
        let mut data = vec![0.0; m * m * dd];
        for i in 0..m {
            for j in i..m {
                let v = f(grid[i], grid[j]);
                data[(i * m + j) * dd..(i * m + j + 1) * dd].copy_from_slice(&v);
            }
        }
        Self { grid, dim, data }
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at grid positions `i <= j`.
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let (m, dd) = (self.grid.len(), self.dim * self.dim);
        &self.data[(i * m + j) * dd..(i * m + j + 1) * dd]
    }
}

/// Partition points of the finest ladder level with at most `max_points`
/// points; the coarsest level thinned to `max_points` if none qualifies.
pub fn report_grid(path: &SamplePath, ladder: &PartitionLadder, max_points: usize) -> Vec<usize> {
    let max_points = max_points.max(2);
    let parts = ladder.partitions();
    if let Some(pts) = parts.iter().rev().find(|pts| pts.len() <= max_points) {
        return pts.clone();
    }
    let coarsest = parts.first().cloned().unwrap_or_else(|| partition_points(&[0], path.last()));
    let stride = coarsest.len().div_ceil(max_points - 1);
    let mut grid: Vec<usize> = coarsest.iter().step_by(stride).copied().collect();
    if grid.last() != coarsest.last() {
        grid.push(*coarsest.last().expect("non-empty"));
    }
    grid
}

/// `(S, A)` with `A(s,t) = I_t - I_s - S_s (x) S_{s,t}`, `I` the finest-level
/// left-point integral of `S` against itself.
#[derive(Debug, Clone)]
pub struct RoughPath {
    path: SamplePath,
    ito: MatrixCurve,
    finest_stops: Vec<usize>,
    grid: Vec<usize>,
    p: f64,
    control: ControlFunction,
    chen_residual_max: f64,
}

/// Default bound on report-grid size; control tabulation is cubic in it.
pub const DEFAULT_REPORT_POINTS: usize = 257;

impl RoughPath {
    /// Itô rough path on the report grid chosen by [`report_grid`].
    pub fn build(path: &SamplePath, ladder: &PartitionLadder, p: f64, max_report_points: usize) -> Result<Self> {
        let grid = report_grid(path, ladder, max_report_points);
        Self::build_on(path, ladder, p, grid)
    }

    pub fn build_on(path: &SamplePath, ladder: &PartitionLadder, p: f64, grid: Vec<usize>) -> Result<Self> {
        check_p(p)?;
        if ladder.last != path.last() {
            return Err(Error::GridMismatch("ladder built on a different grid".into()));
        }
        if grid.first() != Some(&0) || grid.windows(2).any(|w| w[1] <= w[0]) || grid.last() > Some(&path.last()) {
            return Err(Error::GridMismatch("report grid must start at 0 and increase strictly".into()));
        }
        let finest_stops = ladder.finest().stops.clone();
        let ito = MatrixCurve::ito(path, &finest_stops);
        let mut rp = Self {
            path: path.clone(),
            ito,
            finest_stops,
            control: ControlFunction::zero(grid.clone()),
            grid,
            p,
            chen_residual_max: 0.0,
        };
        let (worst, triple) = rp.chen_residual();
        if worst > 1e-12 {
            let (s, u, t) = triple;
            return Err(Error::Chen {
                s,
                u,
                t,
                residual: worst,
            });
        }
        rp.chen_residual_max = worst;
        let cs = pvar_control_on(path, p, &rp.grid)?;
        let ca = two_param_control(&rp.grid, p / 2.0, |s, t| norm(&rp.area(s, t)))?;
        rp.control = cs.add(&ca)?;
        Ok(rp)
    }

    pub fn path(&self) -> &SamplePath {
        &self.path
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn finest_stops(&self) -> &[usize] {
        &self.finest_stops
    }

    pub fn ito_curve(&self) -> &MatrixCurve {
        &self.ito
    }

    pub fn control(&self) -> &ControlFunction {
        &self.control
    }

    pub fn chen_residual_max(&self) -> f64 {
        self.chen_residual_max
    }

    /// `A(s,t)` for any raw grid indices `s <= t`, row-major d x d.
    pub fn area(&self, s: usize, t: usize) -> Vec<f64> {
        let d = self.dim();
        let (is, it) = (self.ito.at(s), self.ito.at(t));
        let (xs, xt) = (self.path.point(s), self.path.point(t));
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = it[i * d + j] - is[i * d + j] - xs[i] * (xt[j] - xs[j]);
            }
        }
        a
    }

    pub fn area_table(&self) -> AreaTable {
        AreaTable::from_fn(self.grid.clone(), self.dim(), |s, t| self.area(s, t))
    }

    /// Worst relative Chen residual over report-grid triples, with the triple
    /// (as path indices).
    pub fn chen_residual(&self) -> (f64, (usize, usize, usize)) {
        let d = self.dim();
        let table = self.area_table();
        let m = self.grid.len();
        let mut worst = (0.0, (0, 0, 0));
        for s in 0..m {
            for u in s..m {
                let su = self.path.increment(self.grid[s], self.grid[u]);
                let asu = table.get(s, u);
                for t in u..m {
                    let ut = self.path.increment(self.grid[u], self.grid[t]);
                    let (ast, aut) = (table.get(s, t), table.get(u, t));
                    let mut r2 = 0.0;
                    for i in 0..d {
                        for j in 0..d {
                            let k = i * d + j;
                            let r = ast[k] - asu[k] - aut[k] - su[i] * ut[j];
                            r2 += r * r;
                        }
                    }
                    let rel = r2.sqrt() / (norm(ast) + norm(&su) * norm(&ut) + 1.0);
                    if rel > worst.0 {
                        worst = (rel, (self.grid[s], self.grid[u], self.grid[t]));
                    }
                }
            }
        }
        worst
    }

    pub fn export(&self) -> RoughPathExport {
        let table = self.area_table();
        let m = self.grid.len();
        let mut area = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                area.push(table.get(i, j).to_vec());
            }
        }
        RoughPathExport {
            schema_version: 1,
            p: self.p,
            dim: self.dim(),
            grid_indices: self.grid.clone(),
            times: self.grid.iter().map(|&k| self.path.time(k)).collect(),
            values: self.grid.iter().map(|&k| self.path.point(k).to_vec()).collect(),
            area_layout: "upper_triangle_row_major".into(),
            area,
            control_total: self.control.total(),
            chen_residual_max: self.chen_residual_max,
        }
    }
}

/// JSON form of a rough path on its report grid. `area` lists `A(t_i, t_j)`
/// for `i <= j` in row-major order of `(i, j)`, each flattened row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoughPathExport {
    pub schema_version: u32,
    pub p: f64,
    pub dim: usize,
    pub grid_indices: Vec<usize>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub area_layout: String,
    pub area: Vec<Vec<f64>>,
    pub control_total: f64,
    pub chen_residual_max: f64,
}

/// [`RoughPath::build`] with the default report-grid size.
pub fn build_ito_rough_path(path: &SamplePath, ladder: &PartitionLadder, p: f64) -> Result<RoughPath> {
    RoughPath::build(path, ladder, p, DEFAULT_REPORT_POINTS)
}
