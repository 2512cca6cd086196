use serde::Serialize;

use super::{norm, RoughPath, VectorField};
use crate::error::{Error, Result};
use crate::paths::{two_param_variation, SamplePath};

/// Controlled path `(F, F')` for a d-covector integrand: `F` is d-valued,
/// `F'` is d x d with `F'^{ij} = dF^i / dS^j`, and
/// `R_F(s,t) = F_{s,t} - F'_s S_{s,t}`.
#[derive(Debug, Clone)]
pub struct ControlledPath {
    path: SamplePath,
    f: Vec<f64>,
    fprime: Vec<f64>,
    p: f64,
    q: f64,
    r: f64,
    norm_grid: Vec<usize>,
    fprime_qvar: f64,
    remainder_rvar: f64,
}

/// Exponents and norms of a controlled path, for reports.
#[derive(Debug, Clone, Serialize)]
pub struct ControlledSummary {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub fprime_qvar: f64,
    pub remainder_rvar: f64,
}

impl ControlledPath {
    /// `f` is `len x d`, `fprime` is `len x d x d`, both row-major on the
    /// grid of `rp`. Norms are evaluated on the report grid of `rp`.
    pub fn new(rp: &RoughPath, f: Vec<f64>, fprime: Vec<f64>, q: f64) -> Result<Self> {
        let path = rp.path();
        let (n, d) = (path.len(), path.dim());
        if f.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: f.len(),
            });
        }
        if fprime.len() != n * d * d {
            return Err(Error::DimensionMismatch {
                expected: n * d * d,
                got: fprime.len(),
            });
        }
        if f.iter().chain(&fprime).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("controlled path has non-finite values".into()));
        }
        let p = rp.p();
        if !(q > 0.0) || 2.0 / p + 1.0 / q <= 1.0 {
            return Err(Error::ExponentOutOfRange(format!("need 2/p + 1/q > 1, got p = {p}, q = {q}")));
        }
        let r = 1.0 / (1.0 / p + 1.0 / q);
        let mut cp = Self {
            path: path.clone(),
            f,
            fprime,
            p,
            q,
            r,
            norm_grid: rp.grid().to_vec(),
            fprime_qvar: 0.0,
            remainder_rvar: 0.0,
        };
        let g = &cp.norm_grid;
        cp.fprime_qvar = cp.fprime_variation(g);
        cp.remainder_rvar = cp.remainder_variation(g);
        if !cp.fprime_qvar.is_finite() || !cp.remainder_rvar.is_finite() {
            return Err(Error::Precondition("controlled path norms are not finite".into()));
        }
        Ok(cp)
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn path(&self) -> &SamplePath {
        &self.path
    }

    pub fn f(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.f[k * d..(k + 1) * d]
    }

    pub fn fprime(&self, k: usize) -> &[f64] {
        let dd = self.dim() * self.dim();
        &self.fprime[k * dd..(k + 1) * dd]
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn fprime_qvar(&self) -> f64 {
        self.fprime_qvar
    }

    pub fn remainder_rvar(&self) -> f64 {
        self.remainder_rvar
    }

    /// `||F'||_{q-var} + ||R_F||_{r-var}` on the norm grid.
    pub fn norm(&self) -> f64 {
        self.fprime_qvar + self.remainder_rvar
    }

    pub fn summary(&self) -> ControlledSummary {
        ControlledSummary {
            p: self.p,
            q: self.q,
            r: self.r,
            fprime_qvar: self.fprime_qvar,
            remainder_rvar: self.remainder_rvar,
        }
    }

    pub fn remainder(&self, s: usize, t: usize) -> Vec<f64> {
        let d = self.dim();
        let (fs, ft, fp) = (self.f(s), self.f(t), self.fprime(s));
        let inc = self.path.increment(s, t);
        (0..d)
            .map(|i| ft[i] - fs[i] - (0..d).map(|j| fp[i * d + j] * inc[j]).sum::<f64>())
            .collect()
    }

    /// `||F'||_{q-var}` over the sub-grid `grid` of path indices.
    pub fn fprime_variation(&self, grid: &[usize]) -> f64 {
        two_param_variation(grid.len(), self.q, |a, b| {
            let (x, y) = (self.fprime(grid[a]), self.fprime(grid[b]));
            norm(&x.iter().zip(y).map(|(u, v)| v - u).collect::<Vec<_>>())
        })
    }

    /// `||R_F||_{r-var}` over the sub-grid `grid` of path indices.
    pub fn remainder_variation(&self, grid: &[usize]) -> f64 {
        two_param_variation(grid.len(), self.r, |a, b| norm(&self.remainder(grid[a], grid[b])))
    }

    /// Same path with `F` and `F'` scaled and added: `alpha X + beta Y`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64, rp: &RoughPath) -> Result<Self> {
        if other.f.len() != self.f.len() {
            return Err(Error::GridMismatch("controlled paths on different grids".into()));
        }
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        Self::new(rp, mix(&self.f, &other.f), mix(&self.fprime, &other.fprime), self.q.max(other.q))
    }
}

/// `F = phi(S)`, `F' = D phi(S)`, with `q = p / eps`.
pub fn controlled_from_phi(rp: &RoughPath, phi: &dyn VectorField, eps: f64) -> Result<ControlledPath> {
    let p = rp.p();
    if !(eps > 0.0 && eps <= 1.0) || (2.0 + eps) / p <= 1.0 {
        return Err(Error::ExponentOutOfRange(format!(
            "need eps in (0, 1] and (2 + eps)/p > 1, got eps = {eps}, p = {p}"
        )));
    }
    let path = rp.path();
    let d = path.dim();
    let mut f = Vec::with_capacity(path.len() * d);
    let mut fprime = Vec::with_capacity(path.len() * d * d);
    for k in 0..path.len() {
        let x = path.point(k);
        let v = phi.value(x);
        let j = phi.jacobian(x);
        if v.len() != d || j.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        f.extend(v);
        fprime.extend(j);
    }
    ControlledPath::new(rp, f, fprime, p / eps)
}

/// `(F, F') = (G, 0)` for a path `G` of finite `r`-variation with
/// `1/p + 1/r > 1`; then `1/q = 1/r - 1/p`.
pub fn controlled_from_bv(g: &SamplePath, rp: &RoughPath, r: f64) -> Result<ControlledPath> {
    let p = rp.p();
    let path = rp.path();
    if g.times() != path.times() {
        return Err(Error::GridMismatch("integrand sampled on a different grid".into()));
    }
    if g.dim() != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            got: g.dim(),
        });
    }
    if !(r >= 1.0) || 1.0 / p + 1.0 / r <= 1.0 {
        return Err(Error::ExponentOutOfRange(format!(
            "need r >= 1 and 1/p + 1/r > 1, got p = {p}, r = {r}"
        )));
    }
    let var = crate::paths::p_variation_on(g, r, rp.grid())?;
    if !var.is_finite() {
        return Err(Error::Precondition("integrand has infinite r-variation on the grid".into()));
    }
    let d = path.dim();
    let q = 1.0 / (1.0 / r - 1.0 / p);
    ControlledPath::new(rp, g.values().to_vec(), vec![0.0; path.len() * d * d], q)
}

#[cfg(test)]
mod tests {
    use super::super::tests::walk;
    use super::super::Elementary;
    use super::*;
    use crate::partitions::{dyadic_ladder, LadderMode};

    fn rough(seed: u64, d: usize, p: f64) -> RoughPath {
        let path = walk(seed, 400, 1.0 / 16.0, d);
        let ladder = dyadic_ladder(&path, 1..=4, LadderMode::PerCoordinateMerged).unwrap();
        RoughPath::build(&path, &ladder, p, 80).unwrap()
    }

    #[test]
    fn identity_has_zero_remainder() {
        let rp = rough(1, 2, 2.5);
        let cp = controlled_from_phi(&rp, &Elementary::Identity, 1.0).unwrap();
        assert_eq!(cp.fprime(7), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(cp.remainder(3, 300), vec![0.0, 0.0]);
        assert_eq!(cp.remainder_rvar(), 0.0);
        assert_eq!(cp.fprime_qvar(), 0.0);
    }

    #[test]
    fn square_remainder_is_increment_squared() {
        let rp = rough(2, 1, 2.5);
        let cp = controlled_from_phi(&rp, &Elementary::Square, 1.0).unwrap();
        let s = rp.path();
        for (a, b) in [(0, 400), (10, 20), (99, 100)] {
            let inc = s.value(b, 0) - s.value(a, 0);
            assert_eq!(cp.remainder(a, b)[0], inc * inc);
        }
    }

    #[test]
    fn sin_norms_finite_with_expected_exponents() {
        let rp = rough(3, 1, 2.5);
        let cp = controlled_from_phi(&rp, &Elementary::Sin, 1.0).unwrap();
        assert_eq!(cp.q(), 2.5);
        assert!((cp.r() - 1.25).abs() < 1e-15);
        assert!(cp.norm().is_finite() && cp.norm() > 0.0);
    }

    #[test]
    fn exponent_conditions() {
        let rp = rough(4, 1, 2.5);
        assert!(controlled_from_phi(&rp, &Elementary::Sin, 0.0).is_err());
        assert!(controlled_from_phi(&rp, &Elementary::Sin, 1.5).is_err());
        let rp29 = rough(4, 1, 2.9);
        // (2 + 0.5) / 2.9 < 1
        assert_eq!(
            controlled_from_phi(&rp29, &Elementary::Sin, 0.5).unwrap_err().code(),
            "exponent_out_of_range"
        );
    }

    #[test]
    fn bounded_variation_integrands() {
        let rp = rough(5, 1, 2.5);
        let s = rp.path();
        let constant = SamplePath::scalar(s.times().to_vec(), vec![2.0; s.len()]).unwrap();
        let cp = controlled_from_bv(&constant, &rp, 1.0).unwrap();
        assert_eq!(cp.remainder(0, 400), vec![0.0]);
        let clock = SamplePath::scalar(s.times().to_vec(), s.times().to_vec()).unwrap();
        for p in [2.1, 2.5, 2.9] {
            let rpp = rough(5, 1, p);
            let cp = controlled_from_bv(&clock, &rpp, 1.0).unwrap();
            assert_eq!(cp.remainder(5, 50)[0], clock.value(50, 0) - clock.value(5, 0));
        }
        let cp = controlled_from_bv(&clock, &rp, 1.5).unwrap();
        assert!((1.0_f64 / 2.5 + 1.0 / 1.5 - 1.0666666666666667).abs() < 1e-15);
        assert!((cp.q() - 1.0 / (1.0 / 1.5 - 1.0 / 2.5)).abs() < 1e-12);
        assert!(controlled_from_bv(&clock, &rp, 2.0).is_err());
    }
}
