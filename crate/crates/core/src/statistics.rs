//! Cramér–von Mises and Kolmogorov–Smirnov type statistics.
//!
//! Every `dF` integral is taken in probability scale: with `t = F(x)` the
//! statistic becomes an integral over `(0, 1)`, evaluated by the trapezoid
//! rule on `t_j = j / (m + 1)`. Sup-norms use the same points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimators::{cumulative_below, edf, local_time_density};
use crate::model::{InvariantLaw, ParametricModel, SimpleModel, Theta};
use crate::numeric::trapezoid;
use crate::simulate::Trajectory;

pub const DEFAULT_GRID_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatFamily {
    /// Composite hypothesis, empirical distribution function.
    ParamEdf,
    /// Composite hypothesis, empirical density.
    ParamDensity,
    /// Simple hypothesis, empirical density.
    SimpleDensity,
    /// Simple hypothesis, asymptotically distribution-free integral statistic.
    Adf,
    /// Simple hypothesis, sup of the increment process.
    KsIncrement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Norm {
    CvM,
    Ks,
}

/// A statistic family together with its norm. `Adf` only exists with the
/// integral norm and `KsIncrement` only with the sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatisticKind {
    family: StatFamily,
    norm: Norm,
}

impl StatisticKind {
    pub fn new(family: StatFamily, norm: Norm) -> Result<Self> {
        match (family, norm) {
            (StatFamily::Adf, Norm::Ks) => Err(Error::validation("ADF is an integral statistic; use ADF:CvM")),
            (StatFamily::KsIncrement, Norm::CvM) => {
                Err(Error::validation("KSIncrement is a sup statistic; use KSIncrement:KS"))
            }
            _ => Ok(StatisticKind { family, norm }),
        }
    }

    pub fn family(&self) -> StatFamily {
        self.family
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// True for the statistics of the composite hypothesis.
    pub fn is_composite(&self) -> bool {
        matches!(self.family, StatFamily::ParamEdf | StatFamily::ParamDensity)
    }
}

impl fmt::Display for StatFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatFamily::ParamEdf => "ParamEDF",
            StatFamily::ParamDensity => "ParamDensity",
            StatFamily::SimpleDensity => "SimpleDensity",
            StatFamily::Adf => "ADF",
            StatFamily::KsIncrement => "KSIncrement",
        })
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::CvM => "CvM",
            Norm::Ks => "KS",
        })
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.norm)
    }
}

impl FromStr for StatFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ParamEDF" => StatFamily::ParamEdf,
            "ParamDensity" => StatFamily::ParamDensity,
            "SimpleDensity" => StatFamily::SimpleDensity,
            "ADF" => StatFamily::Adf,
            "KSIncrement" => StatFamily::KsIncrement,
            _ => return Err(Error::parse(format!("unknown statistic `{s}`"))),
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "CvM" => Norm::CvM,
            "KS" => Norm::Ks,
            _ => return Err(Error::parse(format!("unknown norm `{s}` (expected CvM or KS)"))),
        })
    }
}

impl FromStr for StatisticKind {
    type Err = Error;
    /// Parses `Family:Norm`, e.g. `ParamEDF:CvM`. `ADF` and `KSIncrement`
    /// may omit the norm.
    fn from_str(s: &str) -> Result<Self> {
        let (family, norm) = match s.split_once(':') {
            Some((f, n)) => (f.parse()?, n.parse()?),
            None => {
                let family: StatFamily = s.parse()?;
                let norm = match family {
                    StatFamily::Adf => Norm::CvM,
                    StatFamily::KsIncrement => Norm::Ks,
                    _ => return Err(Error::parse(format!("statistic `{s}` needs a norm, e.g. `{s}:CvM`"))),
                };
                (family, norm)
            }
        };
        StatisticKind::new(family, norm)
    }
}

impl Serialize for StatisticKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StatisticKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatMeta {
    pub grid_size: usize,
    pub theta_hat: Option<Theta>,
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatValue {
    pub value: f64,
    pub kind: StatisticKind,
    pub meta: StatMeta,
}

/// Probability levels `t_j = j / (m + 1)` and the matching quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl QuantileGrid {
    pub fn new<L: InvariantLaw + ?Sized>(law: &L, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::validation(format!("quantile grid needs at least 2 points, got {m}")));
        }
        let t: Vec<f64> = (1..=m).map(|j| j as f64 / (m + 1) as f64).collect();
        let x = t.iter().map(|&p| law.quantile(p)).collect::<Result<Vec<_>>>()?;
        Ok(QuantileGrid { t, x })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Reduces a field sampled at the interior levels `t` (with values `left` at
/// `t = 0` and `right` at `t = 1`) by either norm.
pub fn reduce(norm: Norm, t: &[f64], field: &[f64], left: f64, right: f64) -> f64 {
    match norm {
        Norm::CvM => {
            let mut ts = Vec::with_capacity(t.len() + 2);
            let mut sq = Vec::with_capacity(t.len() + 2);
            ts.push(0.0);
            sq.push(left * left);
            for (&ti, &v) in t.iter().zip(field) {
                ts.push(ti);
                sq.push(v * v);
            }
            ts.push(1.0);
            sq.push(right * right);
            trapezoid(&ts, &sq)
        }
        Norm::Ks => field.iter().fold(left.abs().max(right.abs()), |m, v| m.max(v.abs())),
    }
}

fn meta(traj: &Trajectory, grid: &QuantileGrid, theta_hat: Option<Theta>) -> StatMeta {
    StatMeta {
        grid_size: grid.len(),
        theta_hat,
        horizon: traj.horizon(),
        dt: traj.dt(),
    }
}

/// Composite-hypothesis statistics at the plug-in `theta_hat`.
///
/// Normalizations: `ParamEDF` uses `tau T` (CvM) or `sqrt(tau T)` (KS) with
/// `tau = beta^(2/(gamma+1)) sigma^(2(gamma-1)/(gamma+1))`; `ParamDensity`
/// uses `sigma^2 T` or `sigma sqrt(T)`.
pub fn param_stat(
    traj: &Trajectory,
    model: &ParametricModel,
    theta_hat: &Theta,
    kind: StatisticKind,
    grid_points: usize,
) -> Result<StatValue> {
    Ok(param_stats(traj, model, theta_hat, &[kind], grid_points)?.remove(0))
}

/// Several composite statistics sharing one grid and one set of curves.
pub fn param_stats(
    traj: &Trajectory,
    model: &ParametricModel,
    theta_hat: &Theta,
    kinds: &[StatisticKind],
    grid_points: usize,
) -> Result<Vec<StatValue>> {
    model.require_supported()?;
    if let Some(k) = kinds.iter().find(|k| !k.is_composite()) {
        return Err(Error::validation(format!("{k} is not a composite-hypothesis statistic")));
    }
    let grid = QuantileGrid::new(&model.at(*theta_hat), grid_points)?;
    let t_len = traj.horizon();
    let need_edf = kinds.iter().any(|k| k.family == StatFamily::ParamEdf);
    let need_density = kinds.iter().any(|k| k.family == StatFamily::ParamDensity);
    let edf_dev: Vec<f64> = if need_edf {
        edf(traj, &grid.x).into_iter().zip(&grid.t).map(|(e, t)| e - t).collect()
    } else {
        Vec::new()
    };
    let density_dev: Vec<f64> = if need_density {
        let sigma = model.sigma;
        local_time_density(traj, &grid.x, |_| sigma)
            .into_iter()
            .zip(&grid.x)
            .map(|(d, &x)| d - model.invariant_density(theta_hat, x))
            .collect()
    } else {
        Vec::new()
    };
    let tau = model.time_factor(theta_hat);
    let sigma = model.sigma;
    Ok(kinds
        .iter()
        .map(|&kind| {
            let (field, scale) = match kind.family {
                StatFamily::ParamEdf => (&edf_dev, tau * t_len),
                _ => (&density_dev, sigma * sigma * t_len),
            };
            let raw = reduce(kind.norm, &grid.t, field, 0.0, 0.0);
            let value = match kind.norm {
                Norm::CvM => scale * raw,
                Norm::Ks => scale.sqrt() * raw,
            };
            StatValue {
                value,
                kind,
                meta: meta(traj, &grid, Some(*theta_hat)),
            }
        })
        .collect())
}

/// `T int (f_hat - f)^2 dF` (CvM) or `sqrt(T) sup |f_hat - f|` (KS) for a
/// simple hypothesis.
pub fn simple_density_stat(traj: &Trajectory, model: &SimpleModel, norm: Norm, grid_points: usize) -> Result<StatValue> {
    let grid = QuantileGrid::new(model, grid_points)?;
    simple_density_on(traj, model, norm, &grid)
}

pub(crate) fn simple_density_on(traj: &Trajectory, model: &SimpleModel, norm: Norm, grid: &QuantileGrid) -> Result<StatValue> {
    let t_len = traj.horizon();
    let dev: Vec<f64> = local_time_density(traj, &grid.x, |x| model.diffusion(x))
        .into_iter()
        .zip(&grid.x)
        .map(|(d, &x)| d - model.density(x))
        .collect();
    let raw = reduce(norm, &grid.t, &dev, 0.0, 0.0);
    let value = match norm {
        Norm::CvM => t_len * raw,
        Norm::Ks => t_len.sqrt() * raw,
    };
    Ok(StatValue {
        value,
        kind: StatisticKind::new(StatFamily::SimpleDensity, norm)?,
        meta: meta(traj, grid, None),
    })
}

/// `(1/sqrt T) sum_k 1{X_k < x} w(X_k) (dX_k - S0(X_k) dt)` on the grid, plus
/// its limit as `x -> infinity`.
fn increment_process(traj: &Trajectory, model: &SimpleModel, grid: &QuantileGrid, weight_by_sigma: bool) -> Result<(Vec<f64>, f64)> {
    let values = traj.values();
    let dt = traj.dt();
    let scale = 1.0 / traj.horizon().sqrt();
    let mut weights = Vec::with_capacity(values.len() - 1);
    for (k, w) in values.windows(2).enumerate() {
        let x = w[0];
        let inc = w[1] - x - model.drift(x) * dt;
        let wgt = if weight_by_sigma {
            let s = model.diffusion(x);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::validation(format!(
                    "diffusion must be positive along the path, sigma({x}) = {s} at step {k}"
                )));
            }
            1.0 / s
        } else {
            1.0
        };
        weights.push(scale * wgt * inc);
    }
    let total = weights.iter().sum();
    Ok((cumulative_below(values, |k| weights[k], &grid.x), total))
}

/// `int ( (1/sqrt T) int 1{X_t < x} / sigma(X_t) [dX_t - S0(X_t) dt] )^2 dF_{S0}(x)`.
pub fn adf_stat(traj: &Trajectory, model: &SimpleModel, grid_points: usize) -> Result<StatValue> {
    let grid = QuantileGrid::new(model, grid_points)?;
    adf_on(traj, model, &grid)
}

pub(crate) fn adf_on(traj: &Trajectory, model: &SimpleModel, grid: &QuantileGrid) -> Result<StatValue> {
    let (field, total) = increment_process(traj, model, grid, true)?;
    Ok(StatValue {
        value: reduce(Norm::CvM, &grid.t, &field, 0.0, total),
        kind: StatisticKind::new(StatFamily::Adf, Norm::CvM)?,
        meta: meta(traj, grid, None),
    })
}

/// `sup_x (1/sqrt T) | int 1{X_t < x} (dX_t - S0(X_t) dt) |`, optionally with
/// the `1/sigma(X_t)` weight.
pub fn ks_increment_stat(traj: &Trajectory, model: &SimpleModel, weight_by_sigma: bool, grid_points: usize) -> Result<StatValue> {
    let grid = QuantileGrid::new(model, grid_points)?;
    ks_increment_on(traj, model, weight_by_sigma, &grid)
}

pub(crate) fn ks_increment_on(
    traj: &Trajectory,
    model: &SimpleModel,
    weight_by_sigma: bool,
    grid: &QuantileGrid,
) -> Result<StatValue> {
    let (field, total) = increment_process(traj, model, grid, weight_by_sigma)?;
    Ok(StatValue {
        value: reduce(Norm::Ks, &grid.t, &field, 0.0, total),
        kind: StatisticKind::new(StatFamily::KsIncrement, Norm::Ks)?,
        meta: meta(traj, grid, None),
    })
}

/// Simple-hypothesis statistics sharing one quantile grid.
pub fn simple_stats(
    traj: &Trajectory,
    model: &SimpleModel,
    kinds: &[StatisticKind],
    weight_by_sigma: bool,
    grid_points: usize,
) -> Result<Vec<StatValue>> {
    let grid = QuantileGrid::new(model, grid_points)?;
    kinds
        .iter()
        .map(|kind| match kind.family {
            StatFamily::SimpleDensity => simple_density_on(traj, model, kind.norm, &grid),
            StatFamily::Adf => adf_on(traj, model, &grid),
            StatFamily::KsIncrement => ks_increment_on(traj, model, weight_by_sigma, &grid),
            _ => Err(Error::validation(format!("{kind} is not a simple-hypothesis statistic"))),
        })
        .collect()
}
