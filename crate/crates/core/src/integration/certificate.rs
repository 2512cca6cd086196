use serde::{Deserialize, Serialize};

use super::{hoeffding_strategy, step_integral, StepProcess};
use crate::error::{Error, Result};
use crate::partitions::{merge_stops, PartitionLadder};
use crate::paths::SamplePath;
use crate::quadvar::discrete_qv_total;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    VacuousPass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::VacuousPass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateLevel {
    pub n: u32,
    pub threshold: f64,
    /// Per-interval bound is `kappa * a * sqrt(d) * c_n`.
    pub kappa: f64,
    pub intervals: usize,
    /// `sum_k b_k^2` over the whole horizon.
    pub sum_b2: f64,
    /// Worst relative margin of `1 + (H.S) >= E` over both signs of lambda.
    pub margin: f64,
    pub admissible: bool,
    /// `max_t (E^{lambda} + E^{-lambda}) / 2`.
    pub achieved: f64,
}

/// Superhedging certificate for the bound on `sup |(F.S)|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub dim: usize,
    /// `[lambda*, -lambda*]` with `lambda* = b / (a sqrt(c) d)`.
    pub lambda_grid: Vec<f64>,
    /// `2 exp(-b^2 / (2d))`.
    pub price_bound: f64,
    /// `exp(b^2 / (2d)) / 2`.
    pub target: f64,
    pub sup_integral: f64,
    pub trigger: f64,
    pub triggered: bool,
    pub sup_f: f64,
    pub qv_finest: f64,
    pub levels: Vec<CertificateLevel>,
    pub reaches_target: bool,
    /// Finest-level exponential bounds for `lambda*` and `-lambda*`.
    #[serde(skip)]
    pub lower_bounds: Vec<Vec<f64>>,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

/// Builds the `E^{+-lambda, n}` processes of the isometry bound on `path`
/// via Hoeffding strategies and checks every recorded inequality.
pub fn isometry_certificate(
    f: &StepProcess,
    path: &SamplePath,
    ladder: &PartitionLadder,
    a: f64,
    b: f64,
    c: f64,
) -> Result<Certificate> {
    if ![a, b, c].iter().all(|x| *x > 0.0 && x.is_finite()) {
        return Err(Error::Domain("a, b, c must be positive".into()));
    }
    if f.dim() != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            got: f.dim(),
        });
    }
    if ladder.last != path.last() {
        return Err(Error::GridMismatch("ladder built on a different grid".into()));
    }
    let d = path.dim();
    let df = d as f64;
    let last = path.last();
    let lambda = b / (a * c.sqrt() * df);
    let integral = step_integral(f, path)?;
    let sup_integral = integral.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let trigger = a * b * c.sqrt();
    let sup_f = f.sup_norm(last);
    let qv_finest = discrete_qv_total(path, ladder.finest(), last);

    let mut cert = Certificate {
        a,
        b,
        c,
        dim: d,
        lambda_grid: vec![lambda, -lambda],
        price_bound: 2.0 * (-b * b / (2.0 * df)).exp(),
        target: 0.5 * (b * b / (2.0 * df)).exp(),
        sup_integral,
        trigger,
        triggered: sup_integral >= trigger,
        sup_f,
        qv_finest,
        levels: Vec::new(),
        reaches_target: false,
        lower_bounds: Vec::new(),
        verdict: Verdict::NotApplicable,
        reason: None,
    };
    if sup_f > a * (1.0 + 1e-12) {
        cert.reason = Some(format!("sup |F| = {sup_f} exceeds a = {a}"));
        return Ok(cert);
    }
    if qv_finest > c {
        cert.reason = Some(format!("finest-level quadratic variation {qv_finest} exceeds c = {c}"));
        return Ok(cert);
    }

    let f_stops: Vec<usize> = f.stops().iter().copied().filter(|&s| s < last).collect();
    let mut failure = None;
    for level in &ladder.levels {
        let level_stops: Vec<usize> = level.stops.iter().copied().filter(|&s| s < last).collect();
        let rho = merge_stops(&[&level_stops, &f_stops]);
        let h: Vec<Vec<f64>> = rho.iter().map(|&k| f.value_at(k).to_vec()).collect();

        let base = a * df.sqrt() * level.threshold;
        let nested = f_stops.iter().all(|s| level_stops.binary_search(s).is_ok());
        let mut kappa: f64 = if d == 1 && nested { 1.0 } else { 2.0 };
        for (k, &start) in rho.iter().enumerate() {
            let end = rho.get(k + 1).copied().unwrap_or(last);
            let x0 = path.point(start);
            for t in start + 1..=end {
                let v: f64 = h[k].iter().zip(path.point(t).iter().zip(x0)).map(|(h, (x, y))| h * (x - y)).sum();
                kappa = kappa.max(v.abs() / base);
            }
        }
        let bk = kappa * base;
        let bounds = vec![bk; rho.len()];
        let plus = hoeffding_strategy(path, &rho, &h, &bounds, lambda)?;
        let minus = hoeffding_strategy(path, &rho, &h, &bounds, -lambda)?;
        let margin = plus.margin().min(minus.margin());
        let admissible = plus.strategy.is_admissible() && minus.strategy.is_admissible();
        let achieved = plus
            .bound
            .iter()
            .zip(&minus.bound)
            .map(|(x, y)| 0.5 * (x + y))
            .fold(0.0, f64::max);
        if failure.is_none() && (margin < -1e-9 || !admissible) {
            failure = Some(format!("superhedging inequality fails at level {} (margin {margin})", level.n));
        }
        cert.levels.push(CertificateLevel {
            n: level.n,
            threshold: level.threshold,
            kappa,
            intervals: rho.len(),
            sum_b2: bk * bk * rho.len() as f64,
            margin,
            admissible,
            achieved,
        });
        cert.lower_bounds = vec![plus.bound, minus.bound];
    }

    let finest = cert.levels.last().expect("ladder has levels");
    cert.reaches_target = finest.achieved >= cert.target * (1.0 - 1e-9);
    cert.verdict = match (failure, cert.triggered) {
        (Some(reason), _) => {
            cert.reason = Some(reason);
            Verdict::Fail
        }
        (None, false) => Verdict::VacuousPass,
        (None, true) if cert.reaches_target => Verdict::Pass,
        (None, true) => {
            cert.reason = Some(format!(
                "finest level reaches {} < target {}",
                finest.achieved, cert.target
            ));
            Verdict::Fail
        }
    };
    Ok(cert)
}
