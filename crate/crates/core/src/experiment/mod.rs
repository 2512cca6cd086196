//! JSON-configured experiment runner.
//!
//! Every verb writes into one output directory and finishes with
//! `summary.json`; outputs are a deterministic function of the config.

mod config;

pub use config::{
    Check, DavieSpec, ExperimentConfig, Exponents, HoeffdingSpec, IntegrandSpec, IsometrySpec, LadderRule,
    LadderSpec, PathSpec, SCHEMA_VERSION,
};

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integration::{hoeffding_strategy, isometry_certificate, ito_ladder, Integrand, StepProcess};
use crate::partitions::{build_ladder, dyadic_ladder, partition_points, PartitionLadder};
use crate::paths::{format_f64, generate, SamplePath};
use crate::quadvar::{discrete_qv_total, follmer_qv_check, QvLadder};
use crate::roughpath::{
    check_rie_ladder, controlled_from_bv, controlled_from_phi, davie_sup, rough_integral_compensated,
    rough_integral_riemann, stratonovich_integral, ControlledPath, RieReport, RoughPath, VectorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    /// Path and ladder only.
    Generate,
    /// Adds quadratic variation and integral curves.
    Integrate,
    /// Adds the rough-path export.
    Roughpath,
    /// Runs the configured checks.
    Verify,
    /// Everything.
    Study,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Generate => "generate",
            Verb::Integrate => "integrate",
            Verb::Roughpath => "roughpath",
            Verb::Verify => "verify",
            Verb::Study => "study",
        }
    }

    fn integrates(self) -> bool {
        matches!(self, Verb::Integrate | Verb::Study)
    }

    fn exports_rough_path(self) -> bool {
        matches!(self, Verb::Roughpath | Verb::Study)
    }

    fn checks(self) -> bool {
        matches!(self, Verb::Verify | Verb::Study)
    }
}

impl FromStr for Verb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generate" => Ok(Verb::Generate),
            "integrate" => Ok(Verb::Integrate),
            "roughpath" => Ok(Verb::Roughpath),
            "verify" => Ok(Verb::Verify),
            "study" => Ok(Verb::Study),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    VacuousPass,
    Fail,
    NotApplicable,
}

impl CheckVerdict {
    pub fn is_pass(self) -> bool {
        matches!(self, CheckVerdict::Pass | CheckVerdict::VacuousPass)
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub verdict: CheckVerdict,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathInfo {
    pub source: String,
    pub seed: Option<u64>,
    pub points: usize,
    pub dim: usize,
    pub horizon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelInfo {
    pub n: u32,
    pub threshold: f64,
    pub stops: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateInfo {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub inversions: usize,
    pub finest_residual: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub verb: Verb,
    pub path: PathInfo,
    pub levels: Vec<LevelInfo>,
    /// Finest-level quadratic variation at the horizon, summed over coordinates.
    pub qv_limit: Option<f64>,
    pub chen_residual_max: Option<f64>,
    pub rate: Option<RateInfo>,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub files: Vec<String>,
    pub all_pass: bool,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let file = self.dir.join(name);
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(&file).map_err(|e| Error::io(&file, e))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let file = self.dir.join(name);
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&file, e))
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(self.dir.join(name), e))
    }

    /// `level,t,value` for a family of per-level curves.
    fn curves<'a>(
        &mut self,
        name: &str,
        path: &SamplePath,
        curves: impl Iterator<Item = (u32, &'a [f64])>,
    ) -> Result<()> {
        let rows = curves.flat_map(|(n, c)| {
            c.iter()
                .enumerate()
                .map(move |(k, v)| vec![n.to_string(), format_f64(path.time(k)), format_f64(*v)])
        });
        self.csv(name, &["level", "t", "value"], rows)
    }
}

pub fn load_path(spec: &PathSpec) -> Result<SamplePath> {
    match spec {
        PathSpec::Generated { kind, seed, params } => generate(*kind, *seed, params),
        PathSpec::Csv { csv } => SamplePath::read_csv_file(csv),
    }
}

pub fn build_configured_ladder(path: &SamplePath, spec: &LadderSpec) -> Result<PartitionLadder> {
    match &spec.rule {
        LadderRule::Dyadic { from, to } => dyadic_ladder(path, *from..=*to, spec.mode),
        LadderRule::Explicit { thresholds } => build_ladder(path, thresholds, spec.mode),
    }
}

/// Grid values of the integrand as a d-covector path.
fn integrand_values(spec: &IntegrandSpec, path: &SamplePath) -> Result<SamplePath> {
    let d = path.dim();
    match spec {
        IntegrandSpec::Coordinate { i, j } => {
            if *i >= d || *j >= d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: (*i).max(*j) + 1,
                });
            }
            path.map_rows(d, |x| {
                let mut v = vec![0.0; d];
                v[*j] = x[*i];
                v
            })
        }
        IntegrandSpec::Phi { name } => path.map_rows(d, |x| name.value(x)),
        IntegrandSpec::Bv { csv, .. } => {
            let g = SamplePath::read_csv_file(csv)?;
            if g.times() != path.times() {
                return Err(Error::GridMismatch("integrand path sampled on a different grid".into()));
            }
            if g.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
            }
            Ok(g)
        }
    }
}

fn controlled(cfg: &ExperimentConfig, rp: &RoughPath, values: &SamplePath) -> Result<ControlledPath> {
    let d = rp.dim();
    match &cfg.integrand {
        IntegrandSpec::Coordinate { i, j } => {
            let mut fprime = vec![0.0; rp.path().len() * d * d];
            for row in fprime.chunks_mut(d * d) {
                row[j * d + i] = 1.0;
            }
            ControlledPath::new(rp, values.values().to_vec(), fprime, cfg.exponents.q.unwrap_or(rp.p()))
        }
        IntegrandSpec::Phi { name } => controlled_from_phi(rp, name, cfg.exponents.epsilon()),
        IntegrandSpec::Bv { r, .. } => controlled_from_bv(values, rp, *r),
    }
}

fn outcome(verdict: CheckVerdict, details: Value) -> CheckOutcome {
    CheckOutcome { verdict, details }
}

/// Largest single-step increment, per coordinate.
fn max_raw_step(path: &SamplePath) -> f64 {
    (0..path.last()).fold(0.0f64, |m, k| {
        path.increment(k, k + 1).iter().fold(m, |m, x| m.max(x.abs()))
    })
}

fn hoeffding_check(cfg: &ExperimentConfig, path: &SamplePath, ladder: &PartitionLadder, f: &StepProcess) -> Result<CheckOutcome> {
    let level = ladder.finest();
    // Each coordinate moves by less than the threshold between stops, plus at
    // most one raw step at the stop.
    let bound = level.threshold + max_raw_step(path);
    let h: Vec<Vec<f64>> = (0..f.len()).map(|n| f.position(n).to_vec()).collect();
    let b: Vec<f64> = h
        .iter()
        .map(|row| (row.iter().map(|x| x.abs()).sum::<f64>() * bound).max(bound))
        .collect();
    let scale = f.sup_norm(path.last()).max(1.0);
    let mut runs = Vec::new();
    let mut ok = true;
    for &lambda in &cfg.hoeffding.lambdas {
        let r = hoeffding_strategy(path, f.stops(), &h, &b, lambda)?;
        let holds = r.holds(cfg.hoeffding.tolerance * scale);
        ok &= holds;
        runs.push(json!({"lambda": lambda, "holds": holds, "margin": r.margin(), "admissible": r.strategy.is_admissible()}));
    }
    Ok(outcome(
        CheckVerdict::from_bool(ok),
        json!({"level": level.n, "intervals": h.len(), "runs": runs}),
    ))
}

fn verdict_of(v: crate::integration::Verdict) -> CheckVerdict {
    use crate::integration::Verdict;
    match v {
        Verdict::Pass => CheckVerdict::Pass,
        Verdict::VacuousPass => CheckVerdict::VacuousPass,
        Verdict::Fail => CheckVerdict::Fail,
        Verdict::NotApplicable => CheckVerdict::NotApplicable,
    }
}

/// Runs `verb` for `cfg`, writing into `out_dir`.
pub fn run(cfg: &ExperimentConfig, verb: Verb, out_dir: &Path) -> Result<Summary> {
    cfg.validate()?;
    let mut out = Output::new(out_dir)?;
    let path = load_path(&cfg.path)?;
    let ladder = build_configured_ladder(&path, &cfg.ladder)?;
    let last = path.last();

    crate::paths::write_csv(&path, out.create("path.csv")?)?;
    out.json("ladder.json", &ladder.export(&path))?;

    let mut summary = Summary {
        schema_version: SCHEMA_VERSION,
        verb,
        path: PathInfo {
            source: match &cfg.path {
                PathSpec::Generated { kind, .. } => serde_json::to_value(kind)?.as_str().unwrap_or_default().to_string(),
                PathSpec::Csv { csv } => csv.display().to_string(),
            },
            seed: cfg.seed(),
            points: path.len(),
            dim: path.dim(),
            horizon: path.horizon(),
        },
        levels: ladder
            .levels
            .iter()
            .map(|l| LevelInfo {
                n: l.n,
                threshold: l.threshold,
                stops: l.stops.len(),
            })
            .collect(),
        qv_limit: None,
        chen_residual_max: None,
        rate: None,
        checks: BTreeMap::new(),
        files: Vec::new(),
        all_pass: true,
    };
    if verb == Verb::Generate {
        return finish(summary, out);
    }

    let d = path.dim();
    let checks = if verb.checks() { cfg.checks.clone() } else { Default::default() };
    let wants = |c: Check| checks.contains(&c);
    let qv = QvLadder::build(&path, &ladder)?;
    summary.qv_limit = Some((0..d).map(|i| qv.finest().covariation[i * d + i][last]).sum());
    let values = integrand_values(&cfg.integrand, &path)?;

    if verb.integrates() {
        let rows = ladder.levels.iter().zip(&qv.levels).flat_map(|(level, lq)| {
            let path = &path;
            (0..d).flat_map(move |i| {
                (0..d).flat_map(move |j| {
                    lq.covariation[i * d + j].iter().enumerate().map(move |(k, v)| {
                        vec![
                            level.n.to_string(),
                            format_f64(level.threshold),
                            i.to_string(),
                            j.to_string(),
                            format_f64(path.time(k)),
                            format_f64(*v),
                        ]
                    })
                })
            })
        });
        out.csv("qv.csv", &["level", "threshold", "i", "j", "t", "value"], rows)?;
    }

    if (verb.integrates() || wants(Check::ItoLadder)) && ladder.num_levels() >= 3 {
        let integrand = match cfg.integrand {
            IntegrandSpec::Coordinate { i, j } => Integrand::Coordinate { i, j },
            _ => Integrand::Sampled(values.clone()),
        };
        let il = ito_ladder(&path, &ladder, &integrand)?;
        if verb.integrates() {
            out.curves("ito_ladder.csv", &path, ladder.levels.iter().zip(&il.levels).map(|(l, x)| (l.n, &x.curve[..])))?;
        }
        if let Some(rate) = &il.rate {
            summary.rate = Some(RateInfo {
                slope: rate.slope,
                intercept: rate.intercept,
                points: rate.points,
                inversions: il.inversions(),
                finest_residual: il.finest().residual,
            });
        }
        if wants(Check::ItoLadder) {
            let ok = il.inversions() <= 1 && il.rate.as_ref().is_some_and(|r| (0.7..=1.3).contains(&r.slope));
            summary.checks.insert(
                Check::ItoLadder.name().into(),
                outcome(CheckVerdict::from_bool(ok), serde_json::to_value(&il)?),
            );
        }
    } else if wants(Check::ItoLadder) {
        summary.checks.insert(
            Check::ItoLadder.name().into(),
            outcome(CheckVerdict::NotApplicable, json!({"reason": "needs at least 3 levels"})),
        );
    }

    let needs_rp = verb.integrates()
        || verb.exports_rough_path()
        || [Check::Chen, Check::Rie, Check::Riemann, Check::Davie, Check::Stratonovich]
            .iter()
            .any(|&c| wants(c));
    let rp = if needs_rp {
        Some(RoughPath::build(&path, &ladder, cfg.exponents.p, cfg.report_points)?)
    } else {
        None
    };
    if let Some(rp) = &rp {
        summary.chen_residual_max = Some(rp.chen_residual_max());
        if verb.exports_rough_path() {
            out.json("roughpath.json", &rp.export())?;
        }
        if wants(Check::Chen) {
            let r = rp.chen_residual_max();
            summary.checks.insert(
                Check::Chen.name().into(),
                outcome(CheckVerdict::from_bool(r < 1e-12), json!({"chen_residual_max": r, "grid_points": rp.grid().len()})),
            );
        }
    }

    let mut rie: Option<RieReport> = None;
    if wants(Check::Rie) {
        let r = check_rie_ladder(&path, &ladder, cfg.exponents.p)?;
        let verdict = if !r.applicable {
            CheckVerdict::NotApplicable
        } else {
            CheckVerdict::from_bool(r.pass)
        };
        out.json("rie.json", &r)?;
        summary.checks.insert(Check::Rie.name().into(), outcome(verdict, json!({"sup_ratio": r.sup_ratio, "scale": r.scale, "reason": r.reason})));
        rie = Some(r);
    }

    if let Some(rp) = &rp {
        if verb.integrates() || wants(Check::Riemann) {
            let cp = controlled(cfg, rp, &values)?;
            let parts = ladder.partitions();
            let comp = rough_integral_compensated(&cp, rp, &parts)?;
            if verb.integrates() {
                out.curves(
                    "compensated.csv",
                    &path,
                    ladder.levels.iter().zip(&comp.levels).map(|(l, x)| (l.n, &x.curve[..])),
                )?;
                out.json("controlled.json", &json!({"controlled": cp.summary(), "compensated": comp}))?;
            }
            match rie.as_ref().filter(|r| r.pass) {
                Some(report) => {
                    let riem = rough_integral_riemann(&cp, rp, &parts, report)?;
                    if verb.integrates() {
                        out.curves(
                            "riemann.csv",
                            &path,
                            ladder.levels.iter().zip(&riem.levels).map(|(l, x)| (l.n, &x.curve[..])),
                        )?;
                    }
                    if wants(Check::Riemann) {
                        let gaps: Vec<f64> = riem.levels.iter().map(|l| l.relative_gap).collect();
                        let ok = riem.gaps_non_increasing() && riem.finest().relative_gap < 1e-3;
                        summary.checks.insert(
                            Check::Riemann.name().into(),
                            outcome(CheckVerdict::from_bool(ok), json!({"relative_gaps": gaps})),
                        );
                    }
                }
                None if wants(Check::Riemann) => {
                    summary.checks.insert(
                        Check::Riemann.name().into(),
                        outcome(CheckVerdict::NotApplicable, json!({"reason": "(Rie) check did not pass"})),
                    );
                }
                None => {}
            }
        }
        if wants(Check::Stratonovich) {
            let s = stratonovich_integral(rp, &qv)?;
            summary.checks.insert(
                Check::Stratonovich.name().into(),
                outcome(CheckVerdict::from_bool(s.bridge_gap <= 1e-9), json!({"bridge_gap": s.bridge_gap})),
            );
        }
        if wants(Check::Davie) {
            let (alpha, beta) = (cfg.exponents.alpha(), cfg.exponents.beta());
            let r = davie_sup(rp, alpha, beta, cfg.davie.blocks.as_deref())?;
            out.json("davie.json", &r)?;
            summary.checks.insert(
                Check::Davie.name().into(),
                outcome(CheckVerdict::from_bool(r.sup.is_finite()), serde_json::to_value(&r)?),
            );
        }
    }

    if wants(Check::Follmer) {
        match follmer_qv_check(&path, &ladder) {
            Ok(r) => {
                out.json("follmer.json", &r)?;
                summary.checks.insert(Check::Follmer.name().into(), outcome(CheckVerdict::from_bool(r.pass), serde_json::to_value(&r)?));
            }
            Err(Error::TooFewLevels { .. }) => {
                summary.checks.insert(
                    Check::Follmer.name().into(),
                    outcome(CheckVerdict::NotApplicable, json!({"reason": "needs at least 2 levels"})),
                );
            }
            Err(e) => return Err(e),
        }
    }

    if wants(Check::Hoeffding) || wants(Check::Isometry) {
        let stops = partition_points(&ladder.finest().stops, last);
        let f = StepProcess::sample_with(&path, &stops, d, |k| values.point(k).to_vec())?;
        if wants(Check::Hoeffding) {
            let o = hoeffding_check(cfg, &path, &ladder, &f)?;
            out.json("hoeffding.json", &o.details)?;
            summary.checks.insert(Check::Hoeffding.name().into(), o);
        }
        if wants(Check::Isometry) {
            let a = cfg.isometry.a.unwrap_or_else(|| f.sup_norm(last)).max(f64::MIN_POSITIVE);
            let c = cfg
                .isometry
                .c
                .unwrap_or_else(|| discrete_qv_total(&path, ladder.finest(), last))
                .max(f64::MIN_POSITIVE);
            let cert = isometry_certificate(&f, &path, &ladder, a, cfg.isometry.b, c)?;
            out.json("isometry.json", &cert)?;
            summary.checks.insert(
                Check::Isometry.name().into(),
                outcome(
                    verdict_of(cert.verdict),
                    json!({"price_bound": cert.price_bound, "triggered": cert.triggered, "reason": cert.reason}),
                ),
            );
        }
    }

    finish(summary, out)
}

fn finish(mut summary: Summary, mut out: Output) -> Result<Summary> {
    summary.all_pass = summary.checks.values().all(|c| c.verdict.is_pass());
    out.files.push("summary.json".into());
    summary.files = out.files.clone();
    out.files.pop();
    out.json("summary.json", &summary)?;
    Ok(summary)
}
