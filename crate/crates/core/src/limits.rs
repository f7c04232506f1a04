//! Monte Carlo samplers for the limit laws of the statistics.
//!
//! The composite-hypothesis limits are functionals of Gaussian fields over
//! the standardized state space, all driven by one two-sided Wiener process
//! `W`. On a grid of cells `z_i` with increments `dW_i` and
//! `g_i = dW_i / sqrt(f0(z_i))`:
//!
//! ```text
//! Phi(y)  = 2 sum [F0(z) F0(y) - F0(min(z, y))] g
//! Phi~(y) = 2 sum [F0(z) - 1{z > y}] g
//! Pi      = sum |z|^(gamma-1) sqrt(f0(z)) dW
//! Psi     = sum sgn(z) |z|^gamma sqrt(f0(z)) dW
//! eta0(y)  = Phi(y) + f0(y) Pi / (gamma a) + y f0(y) Psi / ((gamma+1) b)
//! zeta0(y) = [Phi~(y) - 2 sgn(y)|y|^gamma Pi / (gamma a)
//!             + (1 - 2|y|^(gamma+1)) Psi / ((gamma+1) b)] f0(y)
//! ```
//!
//! The `Pi` terms are dropped when `gamma < 1/2`. Both sums over `z` split at
//! `y` into a prefix and a suffix sum, so one draw costs `O(cells + points)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sgn, stationary_moments, InvariantLaw, Regime, SimpleModel, UnitLaw};
use crate::simulate::{wiener_increments, RngStream, WienerGrid};
use crate::statistics::{reduce, Norm, StatFamily, StatisticKind, DEFAULT_GRID_POINTS};

/// Tail mass of `f0` left outside `[-L, L]`.
pub const FIELD_TAIL_MASS: f64 = 1e-8;
/// Cell width as a fraction of `L`.
pub const FIELD_DZ_FRACTION: f64 = 0.005;
pub const DEFAULT_WALK_STEPS: usize = 1000;
const MIN_WALK_STEPS: usize = 100;

/// Discretization of a sampler; part of every calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SamplerGrid {
    Field {
        #[serde(rename = "L")]
        half_width: f64,
        dz: f64,
        m_y: usize,
    },
    Walk {
        n_steps: usize,
    },
}

impl SamplerGrid {
    fn validate(&self) -> Result<()> {
        match *self {
            SamplerGrid::Field { half_width, dz, m_y } => {
                if !(half_width > 0.0 && half_width.is_finite()) || !(dz > 0.0 && dz <= half_width) {
                    return Err(Error::validation(format!("invalid field grid L={half_width}, dz={dz}")));
                }
                if m_y < 2 {
                    return Err(Error::validation(format!("m_y must be at least 2, got {m_y}")));
                }
            }
            SamplerGrid::Walk { n_steps } => {
                if n_steps < MIN_WALK_STEPS {
                    return Err(Error::validation(format!(
                        "random walk needs at least {MIN_WALK_STEPS} steps, got {n_steps}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Functionals of a standard Wiener process on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WFunctional {
    /// `int_0^1 w(t)^2 dt`.
    IntSquare,
    /// `sup_{0<=t<=1} |w(t)|`.
    SupAbs,
}

/// Stable name of a limit law.
#[derive(Debug, Clone, PartialEq)]
pub enum LawId {
    /// `ParamEDF` limit: `"Delta:gamma=<g>"` (CvM), `"Delta_ks:gamma=<g>"` (KS).
    ParamEdf { gamma: f64, norm: Norm },
    /// `ParamDensity` limit: `"delta:gamma=<g>"`, `"delta_ks:gamma=<g>"`.
    ParamDensity { gamma: f64, norm: Norm },
    /// `SimpleDensity` limit for one model: `"delta_S0:<hash>"`, `"delta_S0_ks:<hash>"`.
    SimpleDensity { hash: String, norm: Norm },
    /// `"int_w2"` or `"sup_abs_w"`.
    Wiener(WFunctional),
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ks = |norm: &Norm| if *norm == Norm::Ks { "_ks" } else { "" };
        match self {
            LawId::ParamEdf { gamma, norm } => write!(f, "Delta{}:gamma={gamma}", ks(norm)),
            LawId::ParamDensity { gamma, norm } => write!(f, "delta{}:gamma={gamma}", ks(norm)),
            LawId::SimpleDensity { hash, norm } => write!(f, "delta_S0{}:{hash}", ks(norm)),
            LawId::Wiener(WFunctional::IntSquare) => f.write_str("int_w2"),
            LawId::Wiener(WFunctional::SupAbs) => f.write_str("sup_abs_w"),
        }
    }
}

impl FromStr for LawId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownLaw(s.to_string());
        match s {
            "int_w2" => return Ok(LawId::Wiener(WFunctional::IntSquare)),
            "sup_abs_w" => return Ok(LawId::Wiener(WFunctional::SupAbs)),
            _ => {}
        }
        let (head, tail) = s.split_once(':').ok_or_else(unknown)?;
        let gamma = || -> Result<f64> {
            let g: f64 = tail
                .strip_prefix("gamma=")
                .and_then(|g| g.parse().ok())
                .ok_or_else(unknown)?;
            if g.is_finite() && g >= 0.0 {
                Ok(g)
            } else {
                Err(unknown())
            }
        };
        let hash = || -> Result<String> {
            if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_hexdigit()) {
                Ok(tail.to_string())
            } else {
                Err(unknown())
            }
        };
        Ok(match head {
            "Delta" => LawId::ParamEdf { gamma: gamma()?, norm: Norm::CvM },
            "Delta_ks" => LawId::ParamEdf { gamma: gamma()?, norm: Norm::Ks },
            "delta" => LawId::ParamDensity { gamma: gamma()?, norm: Norm::CvM },
            "delta_ks" => LawId::ParamDensity { gamma: gamma()?, norm: Norm::Ks },
            "delta_S0" => LawId::SimpleDensity { hash: hash()?, norm: Norm::CvM },
            "delta_S0_ks" => LawId::SimpleDensity { hash: hash()?, norm: Norm::Ks },
            _ => return Err(unknown()),
        })
    }
}

impl LawId {
    /// The statistic family and norm this law calibrates.
    pub fn statistic(&self) -> StatisticKind {
        let (family, norm) = match self {
            LawId::ParamEdf { norm, .. } => (StatFamily::ParamEdf, *norm),
            LawId::ParamDensity { norm, .. } => (StatFamily::ParamDensity, *norm),
            LawId::SimpleDensity { norm, .. } => (StatFamily::SimpleDensity, *norm),
            LawId::Wiener(WFunctional::IntSquare) => (StatFamily::Adf, Norm::CvM),
            LawId::Wiener(WFunctional::SupAbs) => (StatFamily::KsIncrement, Norm::Ks),
        };
        StatisticKind::new(family, norm).expect("law ids map to valid kinds")
    }

    pub fn default_grid(&self, simple: Option<&SimpleModel>) -> Result<SamplerGrid> {
        match self {
            LawId::ParamEdf { gamma, .. } | LawId::ParamDensity { gamma, .. } => default_param_grid(*gamma),
            LawId::SimpleDensity { .. } => {
                let model = simple.ok_or_else(|| Error::validation(format!("law `{self}` needs its simple model")))?;
                Ok(default_simple_grid(model))
            }
            LawId::Wiener(_) => Ok(SamplerGrid::Walk {
                n_steps: DEFAULT_WALK_STEPS,
            }),
        }
    }
}

pub fn default_param_grid(gamma: f64) -> Result<SamplerGrid> {
    let half_width = UnitLaw::new(gamma)?.truncation(FIELD_TAIL_MASS)?;
    Ok(SamplerGrid::Field {
        half_width,
        dz: FIELD_DZ_FRACTION * half_width,
        m_y: DEFAULT_GRID_POINTS,
    })
}

/// The simple-model field lives on the model's truncated support, cut into
/// `1 / FIELD_DZ_FRACTION` cells.
pub fn default_simple_grid(model: &SimpleModel) -> SamplerGrid {
    let (lo, hi) = model.support();
    let half_width = 0.5 * (hi - lo);
    SamplerGrid::Field {
        half_width,
        dz: FIELD_DZ_FRACTION * half_width,
        m_y: DEFAULT_GRID_POINTS,
    }
}

/// One realization of the composite-hypothesis fields on the quantile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitField {
    /// Probability levels `t_j = F0(y_j)`.
    pub t_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub eta0: Vec<f64>,
    pub zeta0: Vec<f64>,
    /// Zero in the low-gamma regime.
    pub pi: f64,
    pub psi: f64,
    pub gamma: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub value: f64,
    pub law_id: String,
    pub grid: SamplerGrid,
}

/// Precomputed geometry for the composite fields.
#[derive(Debug, Clone)]
pub struct ParamFieldPlan {
    gamma: f64,
    regime: Regime,
    half_width: f64,
    dz: f64,
    cdf_z: Vec<f64>,
    inv_sqrt_f: Vec<f64>,
    pi_weight: Vec<f64>,
    psi_weight: Vec<f64>,
    t: Vec<f64>,
    y: Vec<f64>,
    f_y: Vec<f64>,
    // Number of cell midpoints below each y.
    split: Vec<usize>,
    pi_coef: f64,
    psi_coef: f64,
}

impl ParamFieldPlan {
    pub fn new(gamma: f64, grid: SamplerGrid) -> Result<Self> {
        grid.validate()?;
        let SamplerGrid::Field { half_width, dz, m_y } = grid else {
            return Err(Error::validation("composite limit laws need a field grid"));
        };
        let regime = Regime::classify(gamma);
        if regime == Regime::Unsupported {
            return Err(Error::UnsupportedRegime { gamma });
        }
        let unit = UnitLaw::new(gamma)?;
        let moments = stationary_moments(gamma)?;
        // Same cell geometry as `wiener_increments`.
        let cells = ((2.0 * half_width / dz) - 1e-9).ceil().max(1.0) as usize;
        let dz = 2.0 * half_width / cells as f64;
        let mid: Vec<f64> = (0..cells).map(|i| -half_width + (i as f64 + 0.5) * dz).collect();
        let f_z: Vec<f64> = mid.iter().map(|&z| unit.density(z)).collect();
        let cdf_z = mid.iter().map(|&z| unit.cdf(z)).collect();
        let inv_sqrt_f = f_z.iter().map(|f| 1.0 / f.sqrt()).collect();
        let pi_weight = if regime == Regime::HighGamma {
            mid.iter().zip(&f_z).map(|(&z, f)| z.abs().powf(gamma - 1.0) * f.sqrt()).collect()
        } else {
            vec![0.0; cells]
        };
        let psi_weight = mid
            .iter()
            .zip(&f_z)
            .map(|(&z, f)| sgn(z) * z.abs().powf(gamma) * f.sqrt())
            .collect();
        let t: Vec<f64> = (1..=m_y).map(|j| j as f64 / (m_y + 1) as f64).collect();
        let y = t.iter().map(|&p| unit.quantile(p)).collect::<Result<Vec<_>>>()?;
        let f_y = y.iter().map(|&v| unit.density(v)).collect();
        let split = y.iter().map(|&v| mid.partition_point(|&z| z < v)).collect();
        let pi_coef = match (regime, moments.a) {
            (Regime::HighGamma, Some(a)) => 1.0 / (gamma * a),
            _ => 0.0,
        };
        Ok(ParamFieldPlan {
            gamma,
            regime,
            half_width,
            dz,
            cdf_z,
            inv_sqrt_f,
            pi_weight,
            psi_weight,
            t,
            y,
            f_y,
            split,
            pi_coef,
            psi_coef: 1.0 / ((gamma + 1.0) * moments.b),
        })
    }

    pub fn cells(&self) -> usize {
        self.cdf_z.len()
    }

    /// Fields driven by the given increments, one per cell.
    pub fn field(&self, increments: &[f64]) -> Result<LimitField> {
        if increments.len() != self.cells() {
            return Err(Error::validation(format!(
                "expected {} increments, got {}",
                self.cells(),
                increments.len()
            )));
        }
        let n = self.cells();
        // prefix[p] = sum_{i<p} F g, suffix[p] = sum_{i>=p} (1 - F) g.
        let mut prefix = vec![0.0; n + 1];
        let mut suffix = vec![0.0; n + 1];
        for i in 0..n {
            let g = increments[i] * self.inv_sqrt_f[i];
            prefix[i + 1] = prefix[i] + self.cdf_z[i] * g;
        }
        for i in (0..n).rev() {
            let g = increments[i] * self.inv_sqrt_f[i];
            suffix[i] = suffix[i + 1] + (1.0 - self.cdf_z[i]) * g;
        }
        let pi: f64 = self.pi_weight.iter().zip(increments).map(|(w, d)| w * d).sum();
        let psi: f64 = self.psi_weight.iter().zip(increments).map(|(w, d)| w * d).sum();
        let u = pi * self.pi_coef;
        let v = psi * self.psi_coef;
        let k = self.gamma + 1.0;
        let mut eta0 = Vec::with_capacity(self.y.len());
        let mut zeta0 = Vec::with_capacity(self.y.len());
        for j in 0..self.y.len() {
            let (y, t, f, p) = (self.y[j], self.t[j], self.f_y[j], self.split[j]);
            let phi = 2.0 * ((t - 1.0) * prefix[p] - t * suffix[p]);
            let phi_tilde = 2.0 * (prefix[p] - suffix[p]);
            let ay = y.abs();
            eta0.push(phi + f * u + y * f * v);
            zeta0.push((phi_tilde - 2.0 * sgn(y) * ay.powf(self.gamma) * u + (1.0 - 2.0 * ay.powf(k)) * v) * f);
        }
        Ok(LimitField {
            t_grid: self.t.clone(),
            y_grid: self.y.clone(),
            eta0,
            zeta0,
            pi,
            psi,
            gamma: self.gamma,
            regime: self.regime,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LimitField> {
        let grid = wiener_increments(self.half_width, self.dz, rng)?;
        self.field(&grid.increments)
    }

    /// `int eta0^2 f0 dy` / `sup |eta0|` (EDF) or the same for `zeta0` (density).
    pub fn reduce(&self, field: &LimitField, family: StatFamily, norm: Norm) -> f64 {
        let values = if family == StatFamily::ParamEdf { &field.eta0 } else { &field.zeta0 };
        reduce(norm, &self.t, values, 0.0, 0.0)
    }
}

/// Precomputed geometry for the simple-hypothesis field
/// `zeta(x) = 2 f(x) sum [F(z) - 1{z > x}] / (sigma(z) sqrt(f(z))) dW(z)`.
#[derive(Debug, Clone)]
pub struct SimpleFieldPlan {
    lo: f64,
    hi: f64,
    cells: usize,
    cdf_z: Vec<f64>,
    weight: Vec<f64>,
    t: Vec<f64>,
    f_x: Vec<f64>,
    split: Vec<usize>,
}

impl SimpleFieldPlan {
    pub fn new(model: &SimpleModel, grid: SamplerGrid) -> Result<Self> {
        grid.validate()?;
        let SamplerGrid::Field { half_width, dz, m_y } = grid else {
            return Err(Error::validation("simple-model limit laws need a field grid"));
        };
        let (slo, shi) = model.support();
        let center = 0.5 * (slo + shi);
        let (lo, hi) = (center - half_width, center + half_width);
        let cells = ((2.0 * half_width / dz) - 1e-9).ceil().max(1.0) as usize;
        let h = (hi - lo) / cells as f64;
        let mid: Vec<f64> = (0..cells).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let mut cdf_z = Vec::with_capacity(cells);
        let mut weight = Vec::with_capacity(cells);
        for &z in &mid {
            let f = model.density(z);
            let s = model.diffusion(z);
            cdf_z.push(model.cdf(z));
            // Cells with no mass carry no variance.
            weight.push(if f > 0.0 { 1.0 / (s * f.sqrt()) } else { 0.0 });
        }
        let t: Vec<f64> = (1..=m_y).map(|j| j as f64 / (m_y + 1) as f64).collect();
        let x = t.iter().map(|&p| model.quantile(p)).collect::<Result<Vec<_>>>()?;
        let f_x = x.iter().map(|&v| model.density(v)).collect();
        let split = x.iter().map(|&v| mid.partition_point(|&z| z <= v)).collect();
        Ok(SimpleFieldPlan {
            lo,
            hi,
            cells,
            cdf_z,
            weight,
            t,
            f_x,
            split,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// `zeta(x_j)` on the quantile grid for the given increments.
    pub fn field(&self, increments: &[f64]) -> Result<Vec<f64>> {
        if increments.len() != self.cells {
            return Err(Error::validation(format!(
                "expected {} increments, got {}",
                self.cells,
                increments.len()
            )));
        }
        let n = self.cells;
        let mut prefix = vec![0.0; n + 1];
        let mut suffix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + self.cdf_z[i] * self.weight[i] * increments[i];
        }
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + (1.0 - self.cdf_z[i]) * self.weight[i] * increments[i];
        }
        Ok(self
            .split
            .iter()
            .zip(&self.f_x)
            .map(|(&p, &f)| 2.0 * f * (prefix[p] - suffix[p]))
            .collect())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let half = 0.5 * (self.hi - self.lo);
        let grid = wiener_increments(half, (self.hi - self.lo) / self.cells as f64, rng)?;
        self.field(&grid.increments)
    }

    pub fn reduce(&self, field: &[f64], norm: Norm) -> f64 {
        reduce(norm, &self.t, field, 0.0, 0.0)
    }
}

/// One draw of a composite-hypothesis limit law.
pub fn sample_param_limit<R: Rng + ?Sized>(
    gamma: f64,
    kind: StatisticKind,
    grid: SamplerGrid,
    rng: &mut R,
) -> Result<LimitSample> {
    let law = match kind.family() {
        StatFamily::ParamEdf => LawId::ParamEdf { gamma, norm: kind.norm() },
        StatFamily::ParamDensity => LawId::ParamDensity { gamma, norm: kind.norm() },
        _ => return Err(Error::validation(format!("{kind} has no composite-hypothesis limit"))),
    };
    let plan = ParamFieldPlan::new(gamma, grid)?;
    let field = plan.draw(rng)?;
    Ok(LimitSample {
        value: plan.reduce(&field, kind.family(), kind.norm()),
        law_id: law.to_string(),
        grid,
    })
}

/// One draw of `int zeta^2 dF` (CvM) or `sup |zeta|` (KS) for a simple model.
pub fn sample_simple_limit<R: Rng + ?Sized>(
    model: &SimpleModel,
    norm: Norm,
    grid: SamplerGrid,
    rng: &mut R,
) -> Result<LimitSample> {
    let plan = SimpleFieldPlan::new(model, grid)?;
    let field = plan.draw(rng)?;
    Ok(LimitSample {
        value: plan.reduce(&field, norm),
        law_id: LawId::SimpleDensity {
            hash: model.fingerprint(),
            norm,
        }
        .to_string(),
        grid,
    })
}

fn w_functional<R: Rng + ?Sized>(kind: WFunctional, n_steps: usize, rng: &mut R) -> f64 {
    let sd = (1.0 / n_steps as f64).sqrt();
    let mut w = 0.0f64;
    let mut acc = 0.0;
    let mut sup = 0.0f64;
    for _ in 0..n_steps {
        let prev = w;
        w += sd * rng.sample::<f64, _>(StandardNormal);
        match kind {
            WFunctional::IntSquare => acc += 0.5 * (prev * prev + w * w),
            WFunctional::SupAbs => sup = sup.max(w.abs()),
        }
    }
    match kind {
        WFunctional::IntSquare => acc / n_steps as f64,
        WFunctional::SupAbs => sup,
    }
}

/// One draw of a Wiener functional from a Gaussian random walk.
pub fn sample_w_functional<R: Rng + ?Sized>(kind: WFunctional, n_steps: usize, rng: &mut R) -> Result<LimitSample> {
    let grid = SamplerGrid::Walk { n_steps };
    grid.validate()?;
    Ok(LimitSample {
        value: w_functional(kind, n_steps, rng),
        law_id: LawId::Wiener(kind).to_string(),
        grid,
    })
}

#[derive(Debug, Clone)]
enum Plan {
    Param(Arc<ParamFieldPlan>, StatFamily, Norm),
    Simple(Arc<SimpleFieldPlan>, Norm),
    Walk(WFunctional, usize),
}

/// A resolved law with its precomputed discretization, ready for bulk draws.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    law: LawId,
    grid: SamplerGrid,
    plan: Plan,
}

impl LimitSampler {
    /// Resolves a law at its default grid. Simple-model laws need the model,
    /// whose fingerprint must match the law id.
    pub fn new(law: &LawId, simple: Option<&SimpleModel>) -> Result<Self> {
        let grid = law.default_grid(simple)?;
        Self::with_grid(law, grid, simple)
    }

    pub fn with_grid(law: &LawId, grid: SamplerGrid, simple: Option<&SimpleModel>) -> Result<Self> {
        grid.validate()?;
        let plan = match law {
            LawId::ParamEdf { gamma, norm } => {
                Plan::Param(Arc::new(ParamFieldPlan::new(*gamma, grid)?), StatFamily::ParamEdf, *norm)
            }
            LawId::ParamDensity { gamma, norm } => {
                Plan::Param(Arc::new(ParamFieldPlan::new(*gamma, grid)?), StatFamily::ParamDensity, *norm)
            }
            LawId::SimpleDensity { hash, norm } => {
                let model = simple.ok_or_else(|| Error::validation(format!("law `{law}` needs its simple model")))?;
                if model.fingerprint() != *hash {
                    return Err(Error::validation(format!(
                        "law `{law}` does not belong to model `{}` (fingerprint {})",
                        model.label(),
                        model.fingerprint()
                    )));
                }
                Plan::Simple(Arc::new(SimpleFieldPlan::new(model, grid)?), *norm)
            }
            LawId::Wiener(kind) => match grid {
                SamplerGrid::Walk { n_steps } => Plan::Walk(*kind, n_steps),
                _ => return Err(Error::validation(format!("law `{law}` needs a random-walk grid"))),
            },
        };
        Ok(LimitSampler {
            law: law.clone(),
            grid,
            plan,
        })
    }

    /// Sampler for the simple-density law of `model`.
    pub fn for_simple(model: &SimpleModel, norm: Norm) -> Result<Self> {
        let law = LawId::SimpleDensity {
            hash: model.fingerprint(),
            norm,
        };
        Self::new(&law, Some(model))
    }

    pub fn law(&self) -> &LawId {
        &self.law
    }

    pub fn grid(&self) -> SamplerGrid {
        self.grid
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.plan {
            Plan::Param(plan, family, norm) => Ok(plan.reduce(&plan.draw(rng)?, *family, *norm)),
            Plan::Simple(plan, norm) => Ok(plan.reduce(&plan.draw(rng)?, *norm)),
            Plan::Walk(kind, n) => Ok(w_functional(*kind, *n, rng)),
        }
    }

    /// `n` draws, draw `i` on stream `(seed, i)`, computed in parallel and
    /// returned in index order.
    pub fn sample_many(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| self.sample(&mut RngStream::new(seed, i).rng()))
            .collect()
    }
}

/// Direct Wiener-grid access for tests and diagnostics.
pub fn param_field_from_grid(gamma: f64, wiener: &WienerGrid, m_y: usize) -> Result<LimitField> {
    let plan = ParamFieldPlan::new(
        gamma,
        SamplerGrid::Field {
            half_width: wiener.half_width(),
            dz: wiener.dz,
            m_y,
        },
    )?;
    plan.field(&wiener.increments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_id_round_trip() {
        for s in [
            "Delta:gamma=1",
            "Delta_ks:gamma=0.3",
            "delta:gamma=0",
            "delta_ks:gamma=2",
            "delta_S0:0a1b2c3d4e5f6789",
            "delta_S0_ks:ff",
            "int_w2",
            "sup_abs_w",
        ] {
            let law: LawId = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        for s in ["", "Delta", "Delta:gamma=x", "delta:gamma=-1", "delta_S0:xyz", "int_w3", "foo:gamma=1"] {
            assert!(matches!(s.parse::<LawId>(), Err(Error::UnknownLaw(_))), "{s}");
        }
    }

    #[test]
    fn laws_map_to_statistics() {
        let law: LawId = "Delta:gamma=1".parse().unwrap();
        assert_eq!(law.statistic().to_string(), "ParamEDF:CvM");
        let law: LawId = "sup_abs_w".parse().unwrap();
        assert_eq!(law.statistic().to_string(), "KSIncrement:KS");
    }

    #[test]
    fn zero_increments_give_zero_field() {
        let plan = ParamFieldPlan::new(1.0, default_param_grid(1.0).unwrap()).unwrap();
        let field = plan.field(&vec![0.0; plan.cells()]).unwrap();
        assert!(field.eta0.iter().chain(&field.zeta0).all(|&v| v == 0.0));
        assert_eq!(plan.reduce(&field, StatFamily::ParamEdf, Norm::CvM), 0.0);
    }

    #[test]
    fn unsupported_regime_is_refused() {
        let grid = SamplerGrid::Field {
            half_width: 5.0,
            dz: 0.05,
            m_y: 100,
        };
        assert!(matches!(ParamFieldPlan::new(0.5, grid), Err(Error::UnsupportedRegime { .. })));
    }
}
