//! Study drivers: size, power, parameter-freeness and limit matching.
//!
//! A study simulates ensembles of stationary paths, computes the requested
//! statistics under the hypothesized model and compares them against
//! calibrated thresholds or against each other. Replicate `r` of arm `a` at
//! ladder rung `k` always uses stream `(seed, a << 40 | k << 32 | r)`, so rows
//! do not depend on thread scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, check_budget, CalibrationTable};
use crate::config::{check_theta, law_for, Model, ModelSpec};
use crate::error::{Error, Result};
use crate::estimators::mle;
use crate::limits::{LawId, LimitSampler};
use crate::model::{InvariantLaw, ScalarFn, Theta};
use crate::simulate::{simulate_stationary, step_count, RngStream, Trajectory};
use crate::statistics::{param_stats, simple_stats, StatisticKind, DEFAULT_GRID_POINTS};

pub const CONFIG_VERSION: u64 = 1;
pub const MIN_STUDY_REPLICATES: usize = 50;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_CALIBRATION_REPLICATES: usize = 20_000;
pub const DEFAULT_LIMIT_REPLICATES: usize = 10_000;
/// Level of the two-sample KS comparisons.
pub const KS_LEVEL: f64 = 0.01;

// Seeds for calibration and limit draws are derived from the study seed but
// never coincide with it.
const CALIBRATION_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;
const LIMIT_SEED_MIX: u64 = 0xd1b5_4a32_d192_ed03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Size,
    Power,
    ParamFree,
    LimitMatch,
}

/// A data-generating process: a model and, for a family, its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Theta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Pre-computed tables by law id.
    #[serde(default)]
    pub tables: BTreeMap<String, PathBuf>,
    #[serde(default = "yes")]
    pub autocalibrate: bool,
    #[serde(default = "default_calibration_replicates")]
    pub n_replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn yes() -> bool {
    true
}

fn default_calibration_replicates() -> usize {
    DEFAULT_CALIBRATION_REPLICATES
}

fn default_limit_replicates() -> usize {
    DEFAULT_LIMIT_REPLICATES
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_version() -> u64 {
    CONFIG_VERSION
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            tables: BTreeMap::new(),
            autocalibrate: true,
            n_replicates: DEFAULT_CALIBRATION_REPLICATES,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_version")]
    pub version: u64,
    pub study: StudyKind,
    /// Model under the hypothesis (size, power, limitmatch).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Parameter of the family model used to simulate under the hypothesis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Theta>,
    /// Data-generating process of a power study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Arm>,
    /// Ensembles compared by a paramfree study; each is tested under its own model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<Arm>,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Horizons of a power study; defaults to `[T]`.
    #[serde(rename = "T_ladder", default, skip_serializing_if = "Vec::is_empty")]
    pub horizon_ladder: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_replicates: usize,
    pub stats: Vec<StatisticKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default = "default_limit_replicates")]
    pub limit_replicates: usize,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Weight the increment sup-statistic by `1/sigma(X)`.
    #[serde(default)]
    pub ks_weight_by_sigma: bool,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("study config: {e}")))?;
        if let Some(v) = value.get("version") {
            match v.as_u64() {
                Some(CONFIG_VERSION) => {}
                Some(other) => return Err(Error::UnsupportedVersion(other)),
                None => return Err(Error::parse("study config: `version` must be an integer")),
            }
        }
        serde_json::from_value(value).map_err(|e| Error::parse(format!("study config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn calibration_seed(&self) -> u64 {
        self.calibration.seed.unwrap_or(self.seed ^ CALIBRATION_SEED_MIX)
    }

    fn horizons(&self) -> Vec<f64> {
        if self.study == StudyKind::Power && !self.horizon_ladder.is_empty() {
            self.horizon_ladder.clone()
        } else {
            vec![self.horizon]
        }
    }

    /// Checks the whole configuration and builds every model, without
    /// simulating anything.
    pub fn validate(&self) -> Result<ResolvedStudy> {
        if self.n_replicates < MIN_STUDY_REPLICATES {
            return Err(Error::validation(format!(
                "n_replicates must be at least {MIN_STUDY_REPLICATES}, got {}",
                self.n_replicates
            )));
        }
        if self.stats.is_empty() {
            return Err(Error::validation("at least one statistic is required"));
        }
        for &t in &self.horizons() {
            step_count(t, self.dt)?;
        }
        if self.grid_points < 2 {
            return Err(Error::validation("grid_points must be at least 2"));
        }
        let needs_levels = matches!(self.study, StudyKind::Size | StudyKind::Power);
        if needs_levels && self.epsilons.is_empty() {
            return Err(Error::validation("size and power studies need `epsilons`"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::validation(format!("levels must lie in (0,1), got {e}")));
        }
        let hypothesis = |what: &str| -> Result<&ModelSpec> {
            self.model
                .as_ref()
                .ok_or_else(|| Error::validation(format!("a {what} study needs `model`")))
        };
        // (data-generating arm, model under test)
        let pairs: Vec<(Arm, ModelSpec)> = match self.study {
            StudyKind::Size | StudyKind::LimitMatch => {
                let m = hypothesis(if self.study == StudyKind::Size { "size" } else { "limitmatch" })?;
                vec![(
                    Arm {
                        model: m.clone(),
                        theta: self.theta,
                    },
                    m.clone(),
                )]
            }
            StudyKind::Power => {
                let m = hypothesis("power")?;
                let truth = self
                    .truth
                    .clone()
                    .ok_or_else(|| Error::validation("a power study needs `truth`"))?;
                vec![(truth, m.clone())]
            }
            StudyKind::ParamFree => {
                if self.arms.len() < 2 {
                    return Err(Error::validation(format!(
                        "a paramfree study needs at least 2 arms, got {}",
                        self.arms.len()
                    )));
                }
                self.arms.iter().map(|a| (a.clone(), a.model.clone())).collect()
            }
        };
        let mut arms = Vec::new();
        let mut laws: Vec<(LawId, usize)> = Vec::new();
        for (arm, test_spec) in pairs {
            let truth = arm.model.build()?;
            if let Model::Family(m) = &truth {
                let theta = arm
                    .theta
                    .ok_or_else(|| Error::validation(format!("family arm `{}` needs `theta`", arm.model)))?;
                check_theta(m, &theta)?;
            }
            let tested = if test_spec == arm.model { truth.clone() } else { test_spec.build()? };
            for &kind in &self.stats {
                let law = law_for(kind, &tested)?;
                if !laws.iter().any(|(l, _)| *l == law) {
                    laws.push((law, arms.len()));
                }
            }
            arms.push(ResolvedArm {
                spec: arm,
                truth,
                tested,
            });
        }
        for path in self.calibration.tables.values() {
            if !path.exists() {
                return Err(Error::validation(format!("calibration table {} does not exist", path.display())));
            }
        }
        if needs_levels {
            for (law, _) in &laws {
                let id = law.to_string();
                if !self.calibration.tables.contains_key(&id) {
                    if !self.calibration.autocalibrate {
                        return Err(Error::validation(format!(
                            "no calibration table for `{id}` and autocalibration is off"
                        )));
                    }
                    check_budget(&self.epsilons, self.calibration.n_replicates)?;
                }
            }
        }
        if self.study == StudyKind::LimitMatch && self.limit_replicates < MIN_STUDY_REPLICATES {
            return Err(Error::validation("limit_replicates is too small"));
        }
        Ok(ResolvedStudy {
            config: self.clone(),
            arms,
            laws,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedArm {
    pub spec: Arm,
    pub truth: Model,
    pub tested: Model,
}

/// A validated study ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedStudy {
    pub config: StudyConfig,
    pub arms: Vec<ResolvedArm>,
    // Each law with the index of an arm whose tested model resolves it.
    laws: Vec<(LawId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub replicate: usize,
    pub kind: StatisticKind,
    pub value: f64,
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    /// Arm index, or `limit` for limit-sampler draws.
    pub arm: String,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub arm: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub stat: StatisticKind,
    pub law_id: String,
    pub epsilon: f64,
    pub threshold: f64,
    pub rejections: usize,
    pub n: usize,
    pub rate: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub stat: StatisticKind,
    pub a: String,
    pub b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub distance: f64,
    pub critical_value: f64,
    pub level: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSummary {
    pub arm: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub stat: StatisticKind,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSummary {
    pub law_id: String,
    pub source: String,
    pub n_replicates: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: u64,
    pub study: StudyKind,
    pub rates: Vec<RateSummary>,
    pub ks: Vec<KsSummary>,
    pub means: Vec<MeanSummary>,
    pub tables: Vec<TableSummary>,
    pub config: StudyConfig,
    pub wall_clock_seconds: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value `sqrt(-ln(level/2)/2) sqrt((n+m)/(nm))`.
pub fn ks_critical(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(0.5 * level).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

fn stream_id(arm: usize, rung: usize, replicate: usize) -> u64 {
    ((arm as u64) << 40) | ((rung as u64) << 32) | replicate as u64
}

fn simulate_arm(arm: &ResolvedArm, horizon: f64, dt: f64, stream: RngStream) -> Result<Trajectory> {
    match &arm.truth {
        Model::Family(m) => {
            let theta = arm.spec.theta.expect("validated");
            let drift = m.trend_fn(theta);
            let sigma = m.sigma;
            simulate_stationary(&m.at(theta), |x| drift(x), |_| sigma, horizon, dt, stream)
        }
        Model::Simple(m) => {
            let (drift, diffusion): (ScalarFn, ScalarFn) = (m.drift_fn(), m.diffusion_fn());
            simulate_stationary(m as &dyn InvariantLaw, |x| drift(x), |x| diffusion(x), horizon, dt, stream)
        }
    }
}

fn replicate_rows(
    cfg: &StudyConfig,
    arm_index: usize,
    arm: &ResolvedArm,
    rung: usize,
    horizon: f64,
    replicate: usize,
) -> Result<Vec<Row>> {
    let stream = RngStream::new(cfg.seed, stream_id(arm_index, rung, replicate));
    let traj = simulate_arm(arm, horizon, cfg.dt, stream)?;
    let (stats, theta) = match &arm.tested {
        Model::Family(m) => {
            let est = mle(&traj, m)?.theta;
            (param_stats(&traj, m, &est, &cfg.stats, cfg.grid_points)?, Some(est))
        }
        Model::Simple(m) => (simple_stats(&traj, m, &cfg.stats, cfg.ks_weight_by_sigma, cfg.grid_points)?, None),
    };
    Ok(stats
        .into_iter()
        .map(|s| Row {
            replicate,
            kind: s.kind,
            value: s.value,
            alpha_hat: theta.map(|t| t.alpha),
            beta_hat: theta.map(|t| t.beta),
            arm: arm_index.to_string(),
            horizon,
        })
        .collect())
}

/// Runs `n` replicates of every arm and rung; rows come back in
/// (arm, rung, replicate, statistic) order.
fn ensemble(study: &ResolvedStudy) -> Result<Vec<Row>> {
    let cfg = &study.config;
    let mut rows = Vec::new();
    for (a, arm) in study.arms.iter().enumerate() {
        for (k, &horizon) in cfg.horizons().iter().enumerate() {
            let chunk: Vec<Vec<Row>> = (0..cfg.n_replicates)
                .into_par_iter()
                .map(|r| replicate_rows(cfg, a, arm, k, horizon, r))
                .collect::<Result<_>>()?;
            rows.extend(chunk.into_iter().flatten());
        }
    }
    Ok(rows)
}

fn sampler_for(study: &ResolvedStudy, law: &LawId, arm: usize) -> Result<LimitSampler> {
    let simple = match &study.arms[arm].tested {
        Model::Simple(m) => Some(m),
        _ => None,
    };
    LimitSampler::new(law, simple)
}

fn thresholds(study: &ResolvedStudy, notes: &mut Vec<String>) -> Result<BTreeMap<String, (CalibrationTable, String)>> {
    let cfg = &study.config;
    let mut out = BTreeMap::new();
    for (law, arm) in &study.laws {
        let id = law.to_string();
        let sampler = sampler_for(study, law, *arm)?;
        let (table, source) = match cfg.calibration.tables.get(&id) {
            Some(path) => {
                let table = CalibrationTable::load(path)?;
                if table.law_id != id {
                    return Err(Error::validation(format!(
                        "table {} is for `{}`, expected `{id}`",
                        path.display(),
                        table.law_id
                    )));
                }
                if table.grid != sampler.grid() {
                    return Err(Error::validation(format!(
                        "table {} was built on a different sampler grid",
                        path.display()
                    )));
                }
                for &e in &cfg.epsilons {
                    table.threshold(e)?;
                }
                (table, path.display().to_string())
            }
            None => {
                let table = calibrate(&sampler, &cfg.epsilons, cfg.calibration.n_replicates, cfg.calibration_seed())?;
                notes.push(format!(
                    "thresholds for `{id}` calibrated inline from {} draws",
                    cfg.calibration.n_replicates
                ));
                (table, "inline".to_string())
            }
        };
        out.insert(id, (table, source));
    }
    Ok(out)
}

fn values_of<'a>(rows: &'a [Row], arm: &'a str, horizon: f64, kind: StatisticKind) -> impl Iterator<Item = f64> + 'a {
    rows.iter()
        .filter(move |r| r.arm == arm && r.horizon == horizon && r.kind == kind)
        .map(|r| r.value)
}

fn means(rows: &[Row], cfg: &StudyConfig, arms: &[String]) -> Vec<MeanSummary> {
    let mut out = Vec::new();
    for arm in arms {
        let horizons = if arm == "limit" { vec![f64::INFINITY] } else { cfg.horizons() };
        for &h in &horizons {
            for &kind in &cfg.stats {
                let v: Vec<f64> = values_of(rows, arm, h, kind).collect();
                if v.is_empty() {
                    continue;
                }
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
                out.push(MeanSummary {
                    arm: arm.clone(),
                    horizon: h,
                    stat: kind,
                    n: v.len(),
                    mean,
                    sd: var.sqrt(),
                });
            }
        }
    }
    out
}

/// Runs a validated study.
pub fn run_study(study: &ResolvedStudy) -> Result<StudyReport> {
    let start = Instant::now();
    let cfg = &study.config;
    let mut notes = vec![
        "rejection-rate standard errors are sqrt(r(1-r)/n)".to_string(),
        format!("two-sample KS comparisons use the asymptotic critical value at level {KS_LEVEL}"),
    ];
    let mut rows = ensemble(study)?;
    let mut rates = Vec::new();
    let mut ks = Vec::new();
    let mut tables = Vec::new();
    let mut arm_names: Vec<String> = (0..study.arms.len()).map(|a| a.to_string()).collect();

    match cfg.study {
        StudyKind::Size | StudyKind::Power => {
            let calibrated = thresholds(study, &mut notes)?;
            for (id, (table, source)) in &calibrated {
                tables.push(TableSummary {
                    law_id: id.clone(),
                    source: source.clone(),
                    n_replicates: table.n_replicates,
                    seed: table.seed,
                    epsilons: table.epsilons.clone(),
                    thresholds: table.thresholds.clone(),
                });
            }
            for (a, arm) in study.arms.iter().enumerate() {
                for &h in &cfg.horizons() {
                    for &kind in &cfg.stats {
                        let id = law_for(kind, &arm.tested)?.to_string();
                        let table = &calibrated[&id].0;
                        let values: Vec<f64> = values_of(&rows, &a.to_string(), h, kind).collect();
                        for &eps in &cfg.epsilons {
                            let threshold = table.threshold(eps)?;
                            let rejections = values.iter().filter(|&&v| v > threshold).count();
                            let n = values.len();
                            let rate = rejections as f64 / n as f64;
                            rates.push(RateSummary {
                                arm: a,
                                horizon: h,
                                stat: kind,
                                law_id: id.clone(),
                                epsilon: eps,
                                threshold,
                                rejections,
                                n,
                                rate,
                                se: (rate * (1.0 - rate) / n as f64).sqrt(),
                            });
                        }
                    }
                }
            }
        }
        StudyKind::ParamFree => {
            for &kind in &cfg.stats {
                for i in 0..study.arms.len() {
                    for j in i + 1..study.arms.len() {
                        let a: Vec<f64> = values_of(&rows, &i.to_string(), cfg.horizon, kind).collect();
                        let b: Vec<f64> = values_of(&rows, &j.to_string(), cfg.horizon, kind).collect();
                        ks.push(compare(kind, &i.to_string(), &j.to_string(), &a, &b));
                    }
                }
            }
        }
        StudyKind::LimitMatch => {
            let limit_seed = cfg.seed ^ LIMIT_SEED_MIX;
            for &kind in &cfg.stats {
                let law = law_for(kind, &study.arms[0].tested)?;
                let sampler = sampler_for(study, &law, 0)?;
                let draws = sampler.sample_many(cfg.limit_replicates, limit_seed)?;
                let a: Vec<f64> = values_of(&rows, "0", cfg.horizon, kind).collect();
                ks.push(compare(kind, "0", "limit", &a, &draws));
                rows.extend(draws.into_iter().enumerate().map(|(r, value)| Row {
                    replicate: r,
                    kind,
                    value,
                    alpha_hat: None,
                    beta_hat: None,
                    arm: "limit".to_string(),
                    horizon: f64::INFINITY,
                }));
                notes.push(format!("limit law `{law}` sampled with {} draws", cfg.limit_replicates));
            }
            arm_names.push("limit".to_string());
        }
    }
    let means = means(&rows, cfg, &arm_names);
    Ok(StudyReport {
        rows,
        summary: Summary {
            version: CONFIG_VERSION,
            study: cfg.study,
            rates,
            ks,
            means,
            tables,
            config: cfg.clone(),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            notes,
        },
    })
}

fn compare(kind: StatisticKind, a_name: &str, b_name: &str, a: &[f64], b: &[f64]) -> KsSummary {
    let distance = ks_distance(a, b);
    let critical_value = ks_critical(a.len(), b.len(), KS_LEVEL);
    KsSummary {
        stat: kind,
        a: a_name.to_string(),
        b: b_name.to_string(),
        n_a: a.len(),
        n_b: b.len(),
        distance,
        critical_value,
        level: KS_LEVEL,
        exceeds: distance > critical_value,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl StudyReport {
    /// `replicate,stat_kind,norm,value,alpha_hat,beta_hat,arm,T`, one row per
    /// replicate and statistic; limit draws carry `arm = limit` and `T = inf`.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("replicate,stat_kind,norm,value,alpha_hat,beta_hat,arm,T\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{},{},{},{}",
                r.replicate,
                r.kind.family(),
                r.kind.norm(),
                r.value,
                fmt_opt(r.alpha_hat),
                fmt_opt(r.beta_hat),
                r.arm,
                r.horizon
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Writes `rows.csv` and `summary.json` into `dir`, creating it.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let rows = dir.join("rows.csv");
        std::fs::write(&rows, self.rows_csv()).map_err(|e| Error::io(&rows, e))?;
        let summary = dir.join("summary.json");
        std::fs::write(&summary, self.summary_json() + "\n").map_err(|e| Error::io(&summary, e))
    }
}

/// Validates and runs.
pub fn run(cfg: &StudyConfig) -> Result<StudyReport> {
    run_study(&cfg.validate()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_basics() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_distance(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
        assert!((ks_critical(100, 100, 0.01) - 1.6276 * (0.02f64).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn stream_ids_are_disjoint() {
        assert_ne!(stream_id(0, 1, 0), stream_id(1, 0, 0));
        assert_ne!(stream_id(0, 0, 1), stream_id(0, 1, 0));
    }

    #[test]
    fn config_validation() {
        let base = r#"{"study":"size","model":"simple:ou","T":10,"n_replicates":50,"stats":["ADF"],"epsilons":[0.1],"seed":1}"#;
        let cfg = StudyConfig::from_json(base).unwrap();
        assert!(cfg.validate().is_ok());
        let mut bad = cfg.clone();
        bad.n_replicates = 10;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.epsilons = vec![0.9999];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.calibration.autocalibrate = false;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.stats = vec!["ParamEDF:CvM".parse().unwrap()];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.study = StudyKind::ParamFree;
        assert!(bad.validate().is_err());
        assert!(matches!(
            StudyConfig::from_json(&base.replace("{\"study\"", "{\"version\":2,\"study\"")),
            Err(Error::UnsupportedVersion(2))
        ));
        assert!(StudyConfig::from_json(&base.replace("\"seed\"", "\"bogus\":1,\"seed\"")).is_err());
        let family = r#"{"study":"size","model":"family:gamma=1","T":10,"n_replicates":50,"stats":["ParamEDF:CvM"],"epsilons":[0.1],"seed":1}"#;
        assert!(StudyConfig::from_json(family).unwrap().validate().is_err(), "family arm without theta");
    }
}
