//! Model specifications, coefficient tables and the law registry.
//!
//! Grammar:
//!
//! ```text
//! family:gamma=<g>[,sigma=<s>][,box=<a1>:<a2>x<b1>:<b2>]
//! simple:<builtin>[,alpha=<a>][,beta=<b>][,shift=<c>][,sigma=<s>|,sigma_table=<csv>][,trunc=<lo>:<hi>]
//! simple:table=<csv>[,sigma=<s>|,sigma_table=<csv>][,trunc=<lo>:<hi>]
//! ```
//!
//! Built-in drifts: `ou` `-beta (x - alpha)`, `switching` `-beta sgn(x - alpha)`,
//! `cubic` `-beta (x - alpha)^3`, `shifted-ou` `-beta (x - shift)` and
//! `nonlinear-demo` `-x (1 + 0.8 cos x)`. Tables are CSV files with header
//! `x,s0` (drift) or `x,sigma`, interpolated linearly and extended linearly
//! beyond their ends.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::limits::LawId;
use crate::model::{make_family, make_simple_model, sgn, ParametricModel, Regime, ScalarFn, SimpleModel, Theta, ThetaBox, Truncation};
use crate::statistics::{StatFamily, StatisticKind};

pub const DEFAULT_BOX: [f64; 4] = [-2.0, 2.0, 0.5, 3.0];
pub const DEFAULT_SHIFT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Ou,
    Switching,
    Cubic,
    ShiftedOu,
    NonlinearDemo,
}

impl Builtin {
    fn name(&self) -> &'static str {
        match self {
            Builtin::Ou => "ou",
            Builtin::Switching => "switching",
            Builtin::Cubic => "cubic",
            Builtin::ShiftedOu => "shifted-ou",
            Builtin::NonlinearDemo => "nonlinear-demo",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ou" => Builtin::Ou,
            "switching" => Builtin::Switching,
            "cubic" => Builtin::Cubic,
            "shifted-ou" => Builtin::ShiftedOu,
            "nonlinear-demo" => Builtin::NonlinearDemo,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriftSource {
    Builtin { kind: Builtin, alpha: f64, beta: f64, shift: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionSource {
    Constant(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Family { gamma: f64, sigma: f64, theta_box: ThetaBox },
    Simple { drift: DriftSource, diffusion: DiffusionSource, truncation: Truncation },
}

/// A constructed model.
#[derive(Debug, Clone)]
pub enum Model {
    Family(ParametricModel),
    Simple(SimpleModel),
}

impl Model {
    pub fn as_family(&self) -> Result<&ParametricModel> {
        match self {
            Model::Family(m) => Ok(m),
            Model::Simple(m) => Err(Error::validation(format!("`{}` is not a parametric family", m.label()))),
        }
    }

    pub fn as_simple(&self) -> Result<&SimpleModel> {
        match self {
            Model::Simple(m) => Ok(m),
            Model::Family(_) => Err(Error::validation("a simple-hypothesis model (simple:...) is required")),
        }
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(format!("`{key}` expects a finite number, got `{value}`")))
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| Error::parse(format!("`{key}` expects `lo:hi`, got `{value}`")))?;
    Ok((parse_num(key, a)?, parse_num(key, b)?))
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("model spec `{s}` must start with `family:` or `simple:`")))?;
        let mut items = rest.split(',').map(str::trim).filter(|t| !t.is_empty());
        match head {
            "family" => {
                let mut gamma = None;
                let mut sigma = 1.0;
                let mut bx = DEFAULT_BOX;
                for item in items {
                    let (k, v) = item
                        .split_once('=')
                        .ok_or_else(|| Error::parse(format!("expected key=value, got `{item}`")))?;
                    match k {
                        "gamma" => gamma = Some(parse_num(k, v)?),
                        "sigma" => sigma = parse_num(k, v)?,
                        "box" => {
                            let (a, b) = v
                                .split_once('x')
                                .ok_or_else(|| Error::parse(format!("`box` expects `a1:a2xb1:b2`, got `{v}`")))?;
                            let (a1, a2) = parse_pair(k, a)?;
                            let (b1, b2) = parse_pair(k, b)?;
                            bx = [a1, a2, b1, b2];
                        }
                        _ => return Err(Error::parse(format!("unknown family option `{k}`"))),
                    }
                }
                let gamma = gamma.ok_or_else(|| Error::parse("family spec needs `gamma=`"))?;
                Ok(ModelSpec::Family {
                    gamma,
                    sigma,
                    theta_box: ThetaBox::new(bx[0], bx[1], bx[2], bx[3])?,
                })
            }
            "simple" => {
                let first = items.next().ok_or_else(|| Error::parse("simple spec needs a drift"))?;
                let mut drift = if let Some(path) = first.strip_prefix("table=") {
                    if path.is_empty() {
                        return Err(Error::parse("`table=` needs a path"));
                    }
                    DriftSource::Table(PathBuf::from(path))
                } else {
                    let kind = Builtin::parse(first).ok_or_else(|| Error::parse(format!("unknown drift `{first}`")))?;
                    DriftSource::Builtin {
                        kind,
                        alpha: 0.0,
                        beta: 1.0,
                        shift: DEFAULT_SHIFT,
                    }
                };
                let mut diffusion = DiffusionSource::Constant(1.0);
                let mut truncation = Truncation::Auto;
                for item in items {
                    let (k, v) = item
                        .split_once('=')
                        .ok_or_else(|| Error::parse(format!("expected key=value, got `{item}`")))?;
                    match (k, &mut drift) {
                        ("alpha", DriftSource::Builtin { alpha, .. }) => *alpha = parse_num(k, v)?,
                        ("beta", DriftSource::Builtin { beta, .. }) => *beta = parse_num(k, v)?,
                        ("shift", DriftSource::Builtin { shift, .. }) => *shift = parse_num(k, v)?,
                        ("sigma", _) => diffusion = DiffusionSource::Constant(parse_num(k, v)?),
                        ("sigma_table", _) if !v.is_empty() => diffusion = DiffusionSource::Table(PathBuf::from(v)),
                        ("trunc", _) => {
                            let (lo, hi) = parse_pair(k, v)?;
                            truncation = Truncation::Fixed { lo, hi };
                        }
                        _ => return Err(Error::parse(format!("unknown or misplaced simple option `{k}`"))),
                    }
                }
                if let DiffusionSource::Constant(s) = diffusion {
                    if s <= 0.0 {
                        return Err(Error::validation(format!("sigma must be > 0, got {s}")));
                    }
                }
                Ok(ModelSpec::Simple {
                    drift,
                    diffusion,
                    truncation,
                })
            }
            _ => Err(Error::parse(format!("unknown model kind `{head}` (expected family or simple)"))),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Family { gamma, sigma, theta_box: b } => write!(
                f,
                "family:gamma={gamma},sigma={sigma},box={}:{}x{}:{}",
                b.a1, b.a2, b.b1, b.b2
            ),
            ModelSpec::Simple {
                drift,
                diffusion,
                truncation,
            } => {
                f.write_str("simple:")?;
                match drift {
                    DriftSource::Builtin { kind, alpha, beta, shift } => {
                        write!(f, "{},alpha={alpha},beta={beta}", kind.name())?;
                        if *kind == Builtin::ShiftedOu {
                            write!(f, ",shift={shift}")?;
                        }
                    }
                    DriftSource::Table(p) => write!(f, "table={}", p.display())?,
                }
                match diffusion {
                    DiffusionSource::Constant(s) => write!(f, ",sigma={s}")?,
                    DiffusionSource::Table(p) => write!(f, ",sigma_table={}", p.display())?,
                }
                if let Truncation::Fixed { lo, hi } = truncation {
                    write!(f, ",trunc={lo}:{hi}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Piecewise-linear function through tabulated points, extended linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CoefficientTable {
    /// Parses a two-column CSV whose header is `x,<column>`.
    pub fn parse(text: &str, column: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != column {
            return Err(Error::parse(format!("table must have header `x,{column}`")));
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(e.to_string()))?;
            let num = |j: usize| -> Result<f64> {
                record
                    .get(j)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(format!("row {}: expected two finite numbers", i + 1)))
            };
            x.push(num(0)?);
            y.push(num(1)?);
        }
        if x.len() < 2 {
            return Err(Error::parse("table needs at least two rows"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parse("table abscissae must be strictly increasing"));
        }
        Ok(CoefficientTable { x, y })
    }

    pub fn load(path: &Path, column: &str) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::parse(format!("{} is not UTF-8", path.display())))?;
        Ok((Self::parse(text, column)?, bytes))
    }

    pub fn eval(&self, v: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&x| x <= v).clamp(1, n - 1) - 1;
        let (x0, x1, y0, y1) = (self.x[i], self.x[i + 1], self.y[i], self.y[i + 1]);
        y0 + (y1 - y0) * (v - x0) / (x1 - x0)
    }

    pub fn into_fn(self) -> ScalarFn {
        Arc::new(move |v| self.eval(v))
    }
}

fn content_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl ModelSpec {
    pub fn family_gamma(&self) -> Option<f64> {
        match self {
            ModelSpec::Family { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    /// Files the spec refers to.
    pub fn files(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        if let ModelSpec::Simple { drift, diffusion, .. } = self {
            if let DriftSource::Table(p) = drift {
                out.push(p.as_path());
            }
            if let DiffusionSource::Table(p) = diffusion {
                out.push(p.as_path());
            }
        }
        out
    }

    /// Builds the model, reading any tables. Table contents enter the simple
    /// model's label, so its law id changes when a table changes.
    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Family { gamma, sigma, theta_box } => Ok(Model::Family(make_family(*gamma, *sigma, *theta_box)?)),
            ModelSpec::Simple {
                drift,
                diffusion,
                truncation,
            } => {
                let mut label = self.to_string();
                let drift_fn: ScalarFn = match drift {
                    DriftSource::Builtin { kind, alpha, beta, shift } => {
                        let (a, b, c) = (*alpha, *beta, *shift);
                        match kind {
                            Builtin::Ou => Arc::new(move |x| -b * (x - a)),
                            Builtin::Switching => Arc::new(move |x| -b * sgn(x - a)),
                            Builtin::Cubic => Arc::new(move |x| -b * (x - a).powi(3)),
                            Builtin::ShiftedOu => Arc::new(move |x| -b * (x - c)),
                            Builtin::NonlinearDemo => Arc::new(|x: f64| -x * (1.0 + 0.8 * x.cos())),
                        }
                    }
                    DriftSource::Table(path) => {
                        let (table, bytes) = CoefficientTable::load(path, "s0")?;
                        label.push_str(&format!("#{}", content_hash(&bytes)));
                        table.into_fn()
                    }
                };
                let diffusion_fn: ScalarFn = match diffusion {
                    DiffusionSource::Constant(s) => {
                        let s = *s;
                        Arc::new(move |_| s)
                    }
                    DiffusionSource::Table(path) => {
                        let (table, bytes) = CoefficientTable::load(path, "sigma")?;
                        label.push_str(&format!("#{}", content_hash(&bytes)));
                        table.into_fn()
                    }
                };
                Ok(Model::Simple(make_simple_model(drift_fn, diffusion_fn, *truncation, label)?))
            }
        }
    }
}

/// The limit law that calibrates `kind` under `model`.
pub fn law_for(kind: StatisticKind, model: &Model) -> Result<LawId> {
    let norm = kind.norm();
    match (kind.family(), model) {
        (StatFamily::ParamEdf, Model::Family(m)) => {
            m.require_supported()?;
            Ok(LawId::ParamEdf { gamma: m.gamma, norm })
        }
        (StatFamily::ParamDensity, Model::Family(m)) => {
            m.require_supported()?;
            Ok(LawId::ParamDensity { gamma: m.gamma, norm })
        }
        (StatFamily::SimpleDensity, Model::Simple(m)) => Ok(LawId::SimpleDensity {
            hash: m.fingerprint(),
            norm,
        }),
        (StatFamily::Adf, Model::Simple(_)) => Ok(LawId::Wiener(crate::limits::WFunctional::IntSquare)),
        (StatFamily::KsIncrement, Model::Simple(_)) => Ok(LawId::Wiener(crate::limits::WFunctional::SupAbs)),
        (_, Model::Family(_)) => Err(Error::validation(format!(
            "{kind} is a simple-hypothesis statistic; use a simple:... model"
        ))),
        (_, Model::Simple(_)) => Err(Error::validation(format!(
            "{kind} is a composite-hypothesis statistic; use a family:... model"
        ))),
    }
}

/// Every (statistic, model class) pairing, for documentation and the
/// `defaults` dump.
pub fn registry() -> Vec<(&'static str, &'static str)> {
    vec![
        ("ParamEDF:CvM", "Delta:gamma=<g>"),
        ("ParamEDF:KS", "Delta_ks:gamma=<g>"),
        ("ParamDensity:CvM", "delta:gamma=<g>"),
        ("ParamDensity:KS", "delta_ks:gamma=<g>"),
        ("SimpleDensity:CvM", "delta_S0:<model-hash>"),
        ("SimpleDensity:KS", "delta_S0_ks:<model-hash>"),
        ("ADF:CvM", "int_w2"),
        ("KSIncrement:KS", "sup_abs_w"),
    ]
}

/// Parses `a,b` into a parameter value.
pub fn parse_theta(s: &str) -> Result<Theta> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::parse(format!("theta expects `alpha,beta`, got `{s}`")))?;
    Ok(Theta::new(parse_num("theta", a.trim())?, parse_num("theta", b.trim())?))
}

/// Checks that a family parameter is usable for simulation.
pub fn check_theta(model: &ParametricModel, theta: &Theta) -> Result<()> {
    if !(theta.beta > 0.0) {
        return Err(Error::validation(format!("beta must be > 0, got {}", theta.beta)));
    }
    if model.regime == Regime::Unsupported {
        return Err(Error::UnsupportedRegime { gamma: model.gamma });
    }
    Ok(())
}
