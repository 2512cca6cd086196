use serde::{Deserialize, Serialize};

use super::{norm, AreaTable, ControlledPath, RieReport, RoughPath};
use crate::error::{Error, Result};
use crate::integration::MatrixCurve;
use crate::paths::{two_param_variation, SamplePath};
use crate::quadvar::QvLadder;

fn check_partition(pts: &[usize], last: usize) -> Result<()> {
    if pts.first() != Some(&0) || pts.last() != Some(&last) || pts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch(
            "partition must run from index 0 to the last grid index, strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_shared(cp: &ControlledPath, rp: &RoughPath) -> Result<()> {
    if cp.path().times() != rp.path().times() || cp.path().values() != rp.path().values() {
        return Err(Error::GridMismatch("controlled path and rough path differ".into()));
    }
    Ok(())
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn mesh(path: &SamplePath, pts: &[usize]) -> f64 {
    pts.windows(2).fold(0.0f64, |m, w| m.max(path.increment_norm(w[0], w[1])))
}

/// `F_a S_{a,b} + F'_a A(a,b)`, the compensator contracted as `sum_ij F'^{ij} A^{ji}`.
fn compensated_term(cp: &ControlledPath, rp: &RoughPath, a: usize, b: usize, compensate: bool) -> f64 {
    let d = cp.dim();
    let inc = rp.path().increment(a, b);
    let fa = cp.f(a);
    let mut v: f64 = fa.iter().zip(&inc).map(|(x, y)| x * y).sum();
    if compensate {
        let area = rp.area(a, b);
        let fp = cp.fprime(a);
        for i in 0..d {
            for j in 0..d {
                v += fp[i * d + j] * area[j * d + i];
            }
        }
    }
    v
}

/// Sums over `pts`, stopped at every grid index.
fn riemann_curve(cp: &ControlledPath, rp: &RoughPath, pts: &[usize], compensate: bool) -> Vec<f64> {
    let mut out = vec![0.0; cp.len()];
    let mut done = 0.0;
    for w in pts.windows(2) {
        for k in w[0] + 1..=w[1] {
            out[k] = done + compensated_term(cp, rp, w[0], k, compensate);
        }
        done = out[w[1]];
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegralLevel {
    pub points: usize,
    pub mesh: f64,
    #[serde(skip)]
    pub curve: Vec<f64>,
    /// `sup_t` distance to the finest partition's curve.
    pub gap_to_finest: f64,
}

/// Local error bound of the compensated sums on finest-partition intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalBound {
    pub intervals: usize,
    /// Largest `|err| / bound` over intervals with a nonzero bound: the
    /// empirical constant.
    pub max_ratio: f64,
    pub max_error: f64,
    /// Intervals with a zero bound but a nonzero error.
    pub unbounded: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompensatedIntegral {
    pub levels: Vec<IntegralLevel>,
    pub local_bound: LocalBound,
}

impl CompensatedIntegral {
    pub fn finest(&self) -> &IntegralLevel {
        self.levels.last().expect("non-empty")
    }
}

fn local_bound(cp: &ControlledPath, rp: &RoughPath, pts: &[usize]) -> LocalBound {
    let path = rp.path();
    let p = rp.p();
    let mut out = LocalBound {
        intervals: pts.len() - 1,
        max_ratio: 0.0,
        max_error: 0.0,
        unbounded: 0,
    };
    for w in pts.windows(2) {
        let (s, t) = (w[0], w[1]);
        let raw: Vec<usize> = (s..=t).collect();
        // reference: compensated sums along the raw grid
        let reference: f64 = raw.windows(2).map(|v| compensated_term(cp, rp, v[0], v[1], true)).sum();
        let err = (reference - compensated_term(cp, rp, s, t, true)).abs();
        let sv = two_param_variation(raw.len(), p, |a, b| path.increment_norm(raw[a], raw[b]));
        let av = two_param_variation(raw.len(), p / 2.0, |a, b| norm(&rp.area(raw[a], raw[b])));
        let bound = sv * cp.remainder_variation(&raw) + av * cp.fprime_variation(&raw);
        out.max_error = out.max_error.max(err);
        if bound > 0.0 {
            out.max_ratio = out.max_ratio.max(err / bound);
        } else if err > 1e-14 {
            out.unbounded += 1;
        }
    }
    out
}

/// Compensated Riemann sums `sum [F_{s1} S_{s1,s2} + F'_{s1} A(s1,s2)]` along
/// each partition (partition points, coarse to fine).
pub fn rough_integral_compensated(
    cp: &ControlledPath,
    rp: &RoughPath,
    partitions: &[Vec<usize>],
) -> Result<CompensatedIntegral> {
    check_shared(cp, rp)?;
    if partitions.is_empty() {
        return Err(Error::TooFewLevels { required: 1, got: 0 });
    }
    let last = rp.path().last();
    for pts in partitions {
        check_partition(pts, last)?;
    }
    let curves: Vec<Vec<f64>> = partitions.iter().map(|pts| riemann_curve(cp, rp, pts, true)).collect();
    let finest = curves.last().expect("non-empty").clone();
    let levels = partitions
        .iter()
        .zip(curves)
        .map(|(pts, curve)| IntegralLevel {
            points: pts.len(),
            mesh: mesh(rp.path(), pts),
            gap_to_finest: sup_gap(&curve, &finest),
            curve,
        })
        .collect();
    Ok(CompensatedIntegral {
        levels,
        local_bound: local_bound(cp, rp, partitions.last().expect("non-empty")),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannLevel {
    pub points: usize,
    pub mesh: f64,
    #[serde(skip)]
    pub curve: Vec<f64>,
    /// `sup_t` distance to the compensated sums on the same partition.
    pub gap_to_compensated: f64,
    /// The same gap divided by `sup_t |compensated curve|` on the finest partition.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannIntegral {
    pub levels: Vec<RiemannLevel>,
    pub compensated: CompensatedIntegral,
}

impl RiemannIntegral {
    pub fn finest(&self) -> &RiemannLevel {
        self.levels.last().expect("non-empty")
    }

    pub fn gaps_non_increasing(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[1].gap_to_compensated <= w[0].gap_to_compensated * (1.0 + 1e-12) + 1e-300)
    }
}

/// Plain left-point Riemann sums `sum F_{t_k} S_{t_k ^ t, t_{k+1} ^ t}`.
/// Refuses to run unless `rie` is a passed check for these partitions.
pub fn rough_integral_riemann(
    cp: &ControlledPath,
    rp: &RoughPath,
    partitions: &[Vec<usize>],
    rie: &RieReport,
) -> Result<RiemannIntegral> {
    if !rie.pass {
        return Err(Error::Precondition(
            "Riemann-sum convergence needs a passed (Rie) check".into(),
        ));
    }
    if !rie.covers(rp.path(), partitions) {
        return Err(Error::GridMismatch("(Rie) report was computed for other partitions".into()));
    }
    let compensated = rough_integral_compensated(cp, rp, partitions)?;
    let scale = compensated
        .finest()
        .curve
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let levels = partitions
        .iter()
        .zip(&compensated.levels)
        .map(|(pts, comp)| {
            let curve = riemann_curve(cp, rp, pts, false);
            let gap = sup_gap(&curve, &comp.curve);
            RiemannLevel {
                points: pts.len(),
                mesh: comp.mesh,
                gap_to_compensated: gap,
                relative_gap: if scale > 0.0 { gap / scale } else { gap },
                curve,
            }
        })
        .collect();
    Ok(RiemannIntegral { levels, compensated })
}

/// Stratonovich integral `int S o dS` on the finest partition of `rp`,
/// assembled from trapezoid sums, and its distance to `int S dS + 1/2 <S>`.
#[derive(Debug, Clone)]
pub struct Stratonovich {
    pub curve: MatrixCurve,
    /// `max_{t,i,j} |strat - ito - <S^i,S^j>/2| / (1 + |strat|)`.
    pub bridge_gap: f64,
}

pub fn stratonovich_integral(rp: &RoughPath, qv: &QvLadder) -> Result<Stratonovich> {
    let path = rp.path();
    let d = path.dim();
    let finest = qv.finest();
    if qv.dim != d || finest.covariation.first().map(Vec::len) != Some(path.len()) {
        return Err(Error::GridMismatch("quadratic variation computed on another grid".into()));
    }
    let curve = MatrixCurve::trapezoid(path, rp.finest_stops());
    let ito = rp.ito_curve();
    let mut gap = 0.0f64;
    for t in 0..path.len() {
        for i in 0..d {
            for j in 0..d {
                let s = curve.get(t, i, j);
                let r = s - ito.get(t, i, j) - 0.5 * finest.covariation[i * d + j][t];
                gap = gap.max(r.abs() / (1.0 + s.abs()));
            }
        }
    }
    Ok(Stratonovich { curve, bridge_gap: gap })
}

/// `A~^n(s,t) = int_s^t S~^n_{s,r} dS~^n_r` for the piecewise-linear
/// interpolation of `S` on partition points `pts`, tabulated on `pts`.
pub fn interpolated_area(path: &SamplePath, pts: &[usize]) -> Result<AreaTable> {
    check_partition(pts, path.last())?;
    let d = path.dim();
    let m = pts.len();
    let mut table = AreaTable::from_fn(pts.to_vec(), d, |_, _| vec![0.0; d * d]);
    let dd = d * d;
    for a in 0..m {
        let mut acc = vec![0.0; dd];
        for k in a..m - 1 {
            let from_a = path.increment(pts[a], pts[k]);
            let step = path.increment(pts[k], pts[k + 1]);
            for i in 0..d {
                for j in 0..d {
                    acc[i * d + j] += 0.5 * step[i] * step[j] + from_a[i] * step[j];
                }
            }
            let idx = (a * m + k + 1) * dd;
            table_data(&mut table)[idx..idx + dd].copy_from_slice(&acc);
        }
    }
    Ok(table)
}

fn table_data(t: &mut AreaTable) -> &mut Vec<f64> {
    &mut t.data
}

#[cfg(test)]
mod tests {
    use super::super::tests::walk;
    use super::super::{check_rie_ladder, controlled_from_bv, controlled_from_phi, Elementary};
    use super::*;
    use crate::partitions::{dyadic_ladder, LadderMode};
    use crate::quadvar::{covariation_curve, QvLadder};

    fn setup(seed: u64, d: usize) -> (SamplePath, crate::partitions::PartitionLadder, RoughPath) {
        let path = walk(seed, 512, 1.0 / 32.0, d);
        let ladder = dyadic_ladder(&path, 1..=5, LadderMode::PerCoordinateMerged).unwrap();
        let rp = RoughPath::build(&path, &ladder, 2.5, 80).unwrap();
        (path, ladder, rp)
    }

    #[test]
    fn identity_single_interval_is_ito() {
        let (path, _, rp) = setup(1, 1);
        let cp = controlled_from_phi(&rp, &Elementary::Identity, 1.0).unwrap();
        let r = rough_integral_compensated(&cp, &rp, &[vec![0, 512]]).unwrap();
        for t in [1, 100, 512] {
            let direct = path.value(0, 0) * (path.value(t, 0) - path.value(0, 0)) + rp.area(0, t)[0];
            assert_eq!(r.levels[0].curve[t], direct);
            let ito = rp.ito_curve().get(t, 0, 0);
            assert!((r.levels[0].curve[t] - ito).abs() < 1e-13);
        }
        assert!(rough_integral_compensated(&cp, &rp, &[vec![0, 10]]).is_err());
    }

    #[test]
    fn constant_integrand_every_level() {
        let (path, ladder, rp) = setup(2, 1);
        let g = SamplePath::scalar(path.times().to_vec(), vec![3.0; path.len()]).unwrap();
        let cp = controlled_from_bv(&g, &rp, 1.0).unwrap();
        let parts = ladder.partitions();
        let rie = check_rie_ladder(&path, &ladder, 2.5).unwrap();
        assert!(rie.pass);
        let r = rough_integral_riemann(&cp, &rp, &parts, &rie).unwrap();
        for (lvl, comp) in r.levels.iter().zip(&r.compensated.levels) {
            assert_eq!(lvl.gap_to_compensated, 0.0);
            for t in 0..path.len() {
                assert!((comp.curve[t] - 3.0 * (path.value(t, 0) - path.value(0, 0))).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn identity_riemann_gap_is_half_qv_gap() {
        let (path, ladder, rp) = setup(3, 1);
        let cp = controlled_from_phi(&rp, &Elementary::Identity, 1.0).unwrap();
        let parts = ladder.partitions();
        let rie = check_rie_ladder(&path, &ladder, 2.5).unwrap();
        let r = rough_integral_riemann(&cp, &rp, &parts, &rie).unwrap();
        let qn = covariation_curve(&path, &ladder.finest().stops, 0, 0);
        for (level, lvl) in ladder.levels.iter().zip(&r.levels) {
            let q = covariation_curve(&path, &level.stops, 0, 0);
            let expected = sup_gap(&q, &qn) * 0.5;
            assert!((lvl.gap_to_compensated - expected).abs() < 1e-12);
            let st = |t: usize| path.value(t, 0);
            for t in [0, 77, 512] {
                let closed = 0.5 * (st(t) * st(t) - st(0) * st(0) - q[t]);
                assert!((lvl.curve[t] - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn riemann_refuses_without_rie() {
        let (path, ladder, rp) = setup(4, 1);
        let cp = controlled_from_phi(&rp, &Elementary::Sin, 1.0).unwrap();
        let mut rie = check_rie_ladder(&path, &ladder, 2.5).unwrap();
        rie.pass = false;
        let err = rough_integral_riemann(&cp, &rp, &ladder.partitions(), &rie).unwrap_err();
        assert_eq!(err.code(), "precondition_failed");
    }

    #[test]
    fn linearity_and_young_consistency() {
        let (path, ladder, rp) = setup(5, 2);
        let parts = ladder.partitions();
        let x = controlled_from_phi(&rp, &Elementary::Sin, 1.0).unwrap();
        let y = controlled_from_phi(&rp, &Elementary::Square, 1.0).unwrap();
        let z = x.combine(0.5, &y, -2.0, &rp).unwrap();
        let ix = rough_integral_compensated(&x, &rp, &parts).unwrap();
        let iy = rough_integral_compensated(&y, &rp, &parts).unwrap();
        let iz = rough_integral_compensated(&z, &rp, &parts).unwrap();
        for l in 0..parts.len() {
            for t in 0..path.len() {
                let lin = 0.5 * ix.levels[l].curve[t] - 2.0 * iy.levels[l].curve[t];
                assert!((iz.levels[l].curve[t] - lin).abs() < 1e-12 * (1.0 + lin.abs()));
            }
        }
        // F' = 0: compensator vanishes, both sums coincide
        let g = path.map_rows(2, |r| vec![r[0].cos(), r[1] * r[1]]).unwrap();
        let cp = controlled_from_bv(&g, &rp, 1.0).unwrap();
        let rie = check_rie_ladder(&path, &ladder, 2.5).unwrap();
        let r = rough_integral_riemann(&cp, &rp, &parts, &rie).unwrap();
        assert!(r.levels.iter().all(|l| l.gap_to_compensated == 0.0));
    }

    #[test]
    fn local_bound_reported() {
        let (_, ladder, rp) = setup(6, 1);
        let cp = controlled_from_phi(&rp, &Elementary::Sin, 1.0).unwrap();
        let r = rough_integral_compensated(&cp, &rp, &ladder.partitions()[..3]).unwrap();
        assert!(r.local_bound.max_ratio.is_finite());
        assert_eq!(r.local_bound.unbounded, 0);
    }

    #[test]
    fn stratonovich_bridge_and_one_dimensional_closed_form() {
        let (path, ladder, rp) = setup(7, 1);
        let qv = QvLadder::build(&path, &ladder).unwrap();
        let s = stratonovich_integral(&rp, &qv).unwrap();
        assert!(s.bridge_gap < 1e-12);
        let st = |t: usize| path.value(t, 0);
        for t in [0, 33, 256, 512] {
            let closed = 0.5 * (st(t) * st(t) - st(0) * st(0));
            assert!((s.curve.get(t, 0, 0) - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolated_area_chen_and_segments() {
        let (path, ladder, _) = setup(8, 2);
        let pts = ladder.partitions()[2].clone();
        let table = interpolated_area(&path, &pts).unwrap();
        let m = pts.len();
        for k in 0..m - 1 {
            let inc = path.increment(pts[k], pts[k + 1]);
            let a = table.get(k, k + 1);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i * 2 + j] - 0.5 * inc[i] * inc[j]).abs() < 1e-15);
                }
            }
        }
        for (s, u, t) in [(0, 1, m - 1), (0, m / 2, m - 1), (1, 2, 3)] {
            let (su, ut) = (path.increment(pts[s], pts[u]), path.increment(pts[u], pts[t]));
            for i in 0..2 {
                for j in 0..2 {
                    let r = table.get(s, t)[i * 2 + j] - table.get(s, u)[i * 2 + j] - table.get(u, t)[i * 2 + j]
                        - su[i] * ut[j];
                    assert!(r.abs() < 1e-12);
                }
            }
        }
    }
}
