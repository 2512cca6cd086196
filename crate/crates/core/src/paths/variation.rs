use super::SamplePath;
use crate::error::{Error, Result};

/// Best partition sums starting at grid position `start`.
///
/// `out[j - start]` is the supremum over all sub-partitions
/// `start = k_0 < ... < k_n = j` of `sum weight(k_i, k_{i+1})`. Exact on the
/// grid, O((end - start)^2).
pub fn variation_from(start: usize, end: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut best = vec![0.0; end - start + 1];
    for j in start + 1..=end {
        let mut b = f64::NEG_INFINITY;
        for i in start..j {
            let v = best[i - start] + weight(i, j);
            if v > b {
                b = v;
            }
        }
        best[j - start] = b;
    }
    best
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p-variation needs p >= 1, got {p}")));
    }
    Ok(())
}

/// `||f||_{p-var,[s,t]}` over grid sub-partitions of `[s, t]`.
pub fn p_variation(path: &SamplePath, p: f64, s: usize, t: usize) -> Result<f64> {
    check_exponent(p)?;
    if s > t || t >= path.len() {
        return Err(Error::Domain(format!(
            "window [{s}, {t}] is not a grid window of a path with {} points",
            path.len()
        )));
    }
    let best = variation_from(s, t, |a, b| path.increment_norm(a, b).powf(p));
    Ok(best[t - s].powf(1.0 / p))
}

/// p-variation over the sub-grid `indices` (strictly increasing grid indices).
pub fn p_variation_on(path: &SamplePath, p: f64, indices: &[usize]) -> Result<f64> {
    check_exponent(p)?;
    check_sub_grid(path, indices)?;
    if indices.len() < 2 {
        return Ok(0.0);
    }
    let best = variation_from(0, indices.len() - 1, |a, b| {
        path.increment_norm(indices[a], indices[b]).powf(p)
    });
    Ok(best[indices.len() - 1].powf(1.0 / p))
}

/// Variation of a two-parameter function given through its norm on grid
/// positions `0..m`: `(sup sum |g(t_k, t_{k+1})|^r)^{1/r}`. Any `r > 0`.
pub fn two_param_variation(m: usize, r: f64, norm: impl Fn(usize, usize) -> f64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    let best = variation_from(0, m - 1, |a, b| norm(a, b).powf(r));
    best[m - 1].powf(1.0 / r)
}

fn check_sub_grid(path: &SamplePath, indices: &[usize]) -> Result<()> {
    if indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sub-grid indices must be strictly increasing".into()));
    }
    if indices.last().is_some_and(|&k| k >= path.len()) {
        return Err(Error::Domain("sub-grid index beyond the path".into()));
    }
    Ok(())
}

/// A control function tabulated on a grid of path indices.
///
/// Stored densely: `table[i * m + j]` holds `c(grid[i], grid[j])` for `i <= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction {
    grid: Vec<usize>,
    table: Vec<f64>,
}

impl ControlFunction {
    /// `c(s, t) = sup sum weight` over sub-partitions of `[s, t]`, i.e. the
    /// `exponent`-th power of the variation of the two-parameter function
    /// whose norm is `norm`. Superadditive by construction.
    pub fn from_two_param(grid: Vec<usize>, exponent: f64, norm: impl Fn(usize, usize) -> f64) -> Self {
        let m = grid.len();
        let mut table = vec![0.0; m * m];
        let weights: Vec<f64> = {
            // cache the pairwise weights once; O(m^2) memory is accepted
            let mut w = vec![0.0; m * m];
            for i in 0..m {
                for j in i + 1..m {
                    w[i * m + j] = norm(i, j).powf(exponent);
                }
            }
            w
        };
        for s in 0..m {
            let best = variation_from(s, m - 1, |a, b| weights[a * m + b]);
            table[s * m + s..s * m + m].copy_from_slice(&best);
        }
        Self { grid, table }
    }

    pub fn zero(grid: Vec<usize>) -> Self {
        let m = grid.len();
        Self {
            grid,
            table: vec![0.0; m * m],
        }
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    /// Value at grid positions `i <= j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        self.table[i * self.grid.len() + j]
    }

    /// Value at path indices `s <= t`, both on the grid.
    pub fn at(&self, s: usize, t: usize) -> Result<f64> {
        let i = self.position(s)?;
        let j = self.position(t)?;
        if i > j {
            return Err(Error::Domain(format!("control needs s <= t, got {s} > {t}")));
        }
        Ok(self.get(i, j))
    }

    pub fn position(&self, idx: usize) -> Result<usize> {
        self.grid
            .binary_search(&idx)
            .map_err(|_| Error::Domain(format!("index {idx} is not on the control grid")))
    }

    pub fn total(&self) -> f64 {
        let m = self.grid.len();
        if m == 0 {
            0.0
        } else {
            self.get(0, m - 1)
        }
    }

    pub fn add(&self, other: &ControlFunction) -> Result<ControlFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("controls live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            table: self.table.iter().zip(&other.table).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, k: f64) -> ControlFunction {
        Self {
            grid: self.grid.clone(),
            table: self.table.iter().map(|v| v * k).collect(),
        }
    }

    /// Largest `c(s,u) + c(u,t) - c(s,t)` over all grid triples; superadditive
    /// iff this is `<= 0` (up to rounding).
    pub fn max_superadditivity_excess(&self) -> f64 {
        let m = self.grid.len();
        let mut worst = f64::NEG_INFINITY;
        for s in 0..m {
            for u in s..m {
                let csu = self.get(s, u);
                for t in u..m {
                    let e = csu + self.get(u, t) - self.get(s, t);
                    if e > worst {
                        worst = e;
                    }
                }
            }
        }
        worst
    }

    /// Diagonal vanishes and superadditivity holds within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        (0..self.grid.len()).all(|i| self.get(i, i) == 0.0)
            && self.table.iter().all(|&v| v >= 0.0)
            && self.max_superadditivity_excess() <= tol
    }
}

/// `c(s,t) = ||f||^p_{p-var,[s,t]}` on the full path grid.
pub fn pvar_control(path: &SamplePath, p: f64) -> Result<ControlFunction> {
    let grid: Vec<usize> = (0..path.len()).collect();
    pvar_control_on(path, p, &grid)
}

/// `c(s,t) = ||f||^p_{p-var,[s,t]}` restricted to a sub-grid of path indices.
pub fn pvar_control_on(path: &SamplePath, p: f64, grid: &[usize]) -> Result<ControlFunction> {
    check_exponent(p)?;
    check_sub_grid(path, grid)?;
    Ok(ControlFunction::from_two_param(grid.to_vec(), p, |i, j| {
        path.increment_norm(grid[i], grid[j])
    }))
}

/// Control of a two-parameter function: `c(s,t) = ||g||^r_{r-var,[s,t]}`.
pub fn two_param_control(grid: &[usize], r: f64, norm: impl Fn(usize, usize) -> f64) -> Result<ControlFunction> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("variation exponent must be positive, got {r}")));
    }
    Ok(ControlFunction::from_two_param(grid.to_vec(), r, |i, j| norm(grid[i], grid[j])))
}
