use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::LadderMode;
use crate::paths::{GenerateParams, PathKind};
use crate::roughpath::Elementary;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    Generated {
        kind: PathKind,
        #[serde(default)]
        seed: u64,
        params: GenerateParams,
    },
    Csv {
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LadderRule {
    /// Thresholds `2^-n` for `n = from..=to`.
    Dyadic { from: u32, to: u32 },
    /// Strictly decreasing thresholds, numbered from 1.
    Explicit { thresholds: Vec<f64> },
}

// `deny_unknown_fields` does not combine with `flatten`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderSpec {
    #[serde(flatten)]
    pub rule: LadderRule,
    #[serde(default)]
    pub mode: LadderMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    #[serde(default = "default_p")]
    pub p: f64,
    /// Variation exponent of `F'`; for phi integrands this fixes `eps = p / q`.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Defaults to `1 / p`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Defaults to the midpoint of `(1 - alpha, 2 alpha)`.
    #[serde(default)]
    pub beta: Option<f64>,
}

fn default_p() -> f64 {
    2.5
}

impl Default for Exponents {
    fn default() -> Self {
        Self {
            p: default_p(),
            q: None,
            epsilon: None,
            alpha: None,
            beta: None,
        }
    }
}

impl Exponents {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.p)
    }

    pub fn beta(&self) -> f64 {
        let a = self.alpha();
        self.beta.unwrap_or(0.5 * ((1.0 - a) + 2.0 * a))
    }

    pub fn epsilon(&self) -> f64 {
        match (self.epsilon, self.q) {
            (Some(e), _) => e,
            (None, Some(q)) => self.p / q,
            (None, None) => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandSpec {
    /// `int S^i dS^j`.
    Coordinate {
        #[serde(default)]
        i: usize,
        #[serde(default)]
        j: usize,
    },
    /// `F = phi(S)` coordinatewise, `F' = diag(phi'(S))`.
    Phi { name: Elementary },
    /// A path of bounded r-variation, `F' = 0`.
    Bv {
        csv: PathBuf,
        #[serde(default = "one")]
        r: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for IntegrandSpec {
    fn default() -> Self {
        IntegrandSpec::Coordinate { i: 0, j: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Chen,
    Rie,
    Riemann,
    Follmer,
    Hoeffding,
    Isometry,
    Davie,
    ItoLadder,
    Stratonovich,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Chen => "chen",
            Check::Rie => "rie",
            Check::Riemann => "riemann",
            Check::Follmer => "follmer",
            Check::Hoeffding => "hoeffding",
            Check::Isometry => "isometry",
            Check::Davie => "davie",
            Check::ItoLadder => "ito_ladder",
            Check::Stratonovich => "stratonovich",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoeffdingSpec {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_lambdas() -> Vec<f64> {
    vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for HoeffdingSpec {
    fn default() -> Self {
        Self {
            lambdas: default_lambdas(),
            tolerance: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometrySpec {
    /// Defaults to `sup |F|` of the sampled integrand.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "one")]
    pub b: f64,
    /// Defaults to the finest-level quadratic variation at the horizon.
    #[serde(default)]
    pub c: Option<f64>,
}

impl Default for IsometrySpec {
    fn default() -> Self {
        Self { a: None, b: 1.0, c: None }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DavieSpec {
    /// Block sizes in raw steps; all divisors when absent.
    #[serde(default)]
    pub blocks: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub path: PathSpec,
    pub ladder: LadderSpec,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub checks: BTreeSet<Check>,
    #[serde(default)]
    pub hoeffding: HoeffdingSpec,
    #[serde(default)]
    pub isometry: IsometrySpec,
    #[serde(default)]
    pub davie: DavieSpec,
    /// Bound on the rough-path report grid size.
    #[serde(default = "default_report_points")]
    pub report_points: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_report_points() -> usize {
    crate::roughpath::DEFAULT_REPORT_POINTS
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; relative CSV paths are resolved
    /// against the file's directory.
    pub fn from_file(file: impl AsRef<Path>) -> Result<Self> {
        let file = file.as_ref();
        let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = file.parent() {
            cfg.resolve_relative(dir);
        }
        Ok(cfg)
    }

    fn resolve_relative(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let PathSpec::Csv { csv } = &mut self.path {
            fix(csv);
        }
        if let IntegrandSpec::Bv { csv, .. } = &mut self.integrand {
            fix(csv);
        }
    }

    pub fn set_seed(&mut self, new_seed: u64) {
        if let PathSpec::Generated { seed, .. } = &mut self.path {
            *seed = new_seed;
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.path {
            PathSpec::Generated { seed, .. } => Some(*seed),
            PathSpec::Csv { .. } => None,
        }
    }

    /// Exponent and shape constraints, checked before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let e = &self.exponents;
        let p = e.p;
        if !(p > 2.0 && p < 3.0) {
            return Err(Error::ExponentOutOfRange(format!("p must lie in (2, 3), got {p}")));
        }
        if let Some(q) = e.q {
            if !(q > 0.0) || 2.0 / p + 1.0 / q <= 1.0 {
                return Err(Error::ExponentOutOfRange(format!("need 2/p + 1/q > 1, got p = {p}, q = {q}")));
            }
        }
        if matches!(self.integrand, IntegrandSpec::Phi { .. }) {
            let eps = e.epsilon();
            if !(eps > 0.0 && eps <= 1.0) || (2.0 + eps) / p <= 1.0 {
                return Err(Error::ExponentOutOfRange(format!(
                    "epsilon must lie in (0, 1] with (2 + epsilon)/p > 1, got {eps}"
                )));
            }
        }
        if let IntegrandSpec::Bv { r, .. } = self.integrand {
            if !(r >= 1.0) || 1.0 / p + 1.0 / r <= 1.0 {
                return Err(Error::ExponentOutOfRange(format!("need r >= 1 and 1/p + 1/r > 1, got r = {r}")));
            }
        }
        if self.checks.contains(&Check::Davie) || e.beta.is_some() || e.alpha.is_some() {
            let (a, b) = (e.alpha(), e.beta());
            if !(a > 0.0 && b > 1.0 - a && b < 2.0 * a) {
                return Err(Error::ExponentOutOfRange(format!(
                    "beta must lie in (1 - alpha, 2 alpha) = ({}, {}), got {b}",
                    1.0 - a,
                    2.0 * a
                )));
            }
        }
        match &self.ladder.rule {
            LadderRule::Dyadic { from, to } => {
                if from > to || *to > 60 {
                    return Err(Error::Config(format!("dyadic levels need from <= to <= 60, got {from}..{to}")));
                }
            }
            LadderRule::Explicit { thresholds } => {
                if thresholds.is_empty() {
                    return Err(Error::Config("explicit ladder needs thresholds".into()));
                }
            }
        }
        if self.checks.contains(&Check::Riemann) && !self.checks.contains(&Check::Rie) {
            return Err(Error::Config("the riemann check needs the rie check".into()));
        }
        if self.hoeffding.lambdas.iter().any(|l| !l.is_finite()) || !(self.hoeffding.tolerance >= 0.0) {
            return Err(Error::Config("hoeffding lambdas must be finite, tolerance >= 0".into()));
        }
        if self.report_points < 2 {
            return Err(Error::Config("report_points must be at least 2".into()));
        }
        Ok(())
    }
}
