//! Monte Carlo thresholds `c_eps` with `P(limit > c_eps) = eps`, persisted as
//! versioned JSON tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::limits::{LawId, LimitSampler, SamplerGrid};
use crate::statistics::StatValue;

pub const TABLE_VERSION: u64 = 1;
pub const MIN_REPLICATES: usize = 1000;
/// Each tail used for a threshold must hold at least this many draws.
pub const MIN_TAIL_DRAWS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub law_id: String,
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub n_replicates: usize,
    pub seed: u64,
    pub grid: SamplerGrid,
    pub created_at: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    Accept,
}

fn check_epsilons(epsilons: &[f64]) -> Result<Vec<f64>> {
    if epsilons.is_empty() {
        return Err(Error::validation("at least one level eps is required"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::validation(format!("levels must lie in (0,1), got {e}")));
    }
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

/// Refuses budgets whose smaller tail at some level holds fewer than
/// [`MIN_TAIL_DRAWS`] draws.
pub fn check_budget(epsilons: &[f64], n_replicates: usize) -> Result<()> {
    if n_replicates < MIN_REPLICATES {
        return Err(Error::validation(format!(
            "calibration needs at least {MIN_REPLICATES} replicates, got {n_replicates}"
        )));
    }
    for &e in epsilons {
        let tail = n_replicates as f64 * e.min(1.0 - e);
        if tail < MIN_TAIL_DRAWS {
            return Err(Error::validation(format!(
                "{n_replicates} replicates are too few for eps={e}: need n*min(eps,1-eps) >= {MIN_TAIL_DRAWS}"
            )));
        }
    }
    Ok(())
}

/// Empirical `(1 - eps)`-quantile: the order statistic of rank
/// `ceil((1 - eps) n)` (1-based).
pub fn upper_quantile(sorted: &[f64], eps: f64) -> f64 {
    let n = sorted.len();
    let rank = ((1.0 - eps) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Draws `n_replicates` limit samples and tabulates their upper quantiles.
pub fn calibrate(sampler: &LimitSampler, epsilons: &[f64], n_replicates: usize, seed: u64) -> Result<CalibrationTable> {
    let epsilons = check_epsilons(epsilons)?;
    check_budget(&epsilons, n_replicates)?;
    let mut draws = sampler.sample_many(n_replicates, seed)?;
    if let Some(v) = draws.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("limit sampler produced {v}")));
    }
    draws.sort_by(f64::total_cmp);
    let thresholds: Vec<f64> = epsilons.iter().map(|&e| upper_quantile(&draws, e)).collect();
    if thresholds.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Numerical(format!(
            "thresholds are not strictly decreasing in eps ({thresholds:?}); increase the replicate count"
        )));
    }
    Ok(CalibrationTable {
        law_id: sampler.law().to_string(),
        epsilons,
        thresholds,
        n_replicates,
        seed,
        grid: sampler.grid(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

/// Resolves a law id without a simple model and calibrates it.
pub fn calibrate_law(law_id: &str, epsilons: &[f64], n_replicates: usize, seed: u64) -> Result<CalibrationTable> {
    let law: LawId = law_id.parse()?;
    calibrate(&LimitSampler::new(&law, None)?, epsilons, n_replicates, seed)
}

impl CalibrationTable {
    pub fn law(&self) -> Result<LawId> {
        self.law_id.parse()
    }

    pub fn threshold(&self, epsilon: f64) -> Result<f64> {
        self.epsilons
            .iter()
            .position(|&e| (e - epsilon).abs() <= 1e-12 * epsilon.max(1e-300))
            .map(|i| self.thresholds[i])
            .ok_or_else(|| {
                Error::validation(format!(
                    "eps={epsilon} is not in the table for `{}` (available: {:?})",
                    self.law_id, self.epsilons
                ))
            })
    }

    fn validate(&self) -> Result<()> {
        self.law()?;
        check_epsilons(&self.epsilons)?;
        if self.epsilons.len() != self.thresholds.len() {
            return Err(Error::parse("epsilons and thresholds differ in length"));
        }
        if self.epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parse("epsilons must be sorted and distinct"));
        }
        if self.thresholds.iter().any(|t| !t.is_finite()) || self.thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::parse("thresholds must be finite and strictly decreasing"));
        }
        if self.n_replicates < MIN_REPLICATES {
            return Err(Error::parse(format!("n_replicates must be at least {MIN_REPLICATES}")));
        }
        let law = self.law()?;
        match (&law, self.grid) {
            (LawId::Wiener(_), SamplerGrid::Walk { .. }) => {}
            (LawId::Wiener(_), _) | (_, SamplerGrid::Walk { .. }) => {
                return Err(Error::parse(format!("grid does not fit law `{}`", self.law_id)))
            }
            _ => {}
        }
        Ok(())
    }

    /// JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let num = |v: f64| format!("{v:.16e}");
        let list = |vs: &[f64]| vs.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", ");
        let grid = match self.grid {
            SamplerGrid::Field { half_width, dz, m_y } => {
                format!("{{\"L\": {}, \"dz\": {}, \"m_y\": {m_y}}}", num(half_width), num(dz))
            }
            SamplerGrid::Walk { n_steps } => format!("{{\"n_steps\": {n_steps}}}"),
        };
        format!(
            "{{\n  \"version\": {TABLE_VERSION},\n  \"law_id\": {},\n  \"epsilons\": [{}],\n  \"thresholds\": [{}],\n  \"n_replicates\": {},\n  \"seed\": {},\n  \"grid\": {grid},\n  \"created_at\": {}\n}}\n",
            serde_json::to_string(&self.law_id).expect("string"),
            list(&self.epsilons),
            list(&self.thresholds),
            self.n_replicates,
            self.seed,
            serde_json::to_string(&self.created_at).expect("string"),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::parse(format!("calibration table: {e}")))?;
        let version = value
            .get("version")
            .ok_or_else(|| Error::parse("calibration table: missing `version`"))?
            .as_u64()
            .ok_or_else(|| Error::parse("calibration table: `version` must be a non-negative integer"))?;
        if version != TABLE_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let table: CalibrationTable = serde_json::from_value(value).map_err(|e| Error::parse(format!("calibration table: {e}")))?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `Reject` iff the statistic strictly exceeds `c_eps`. The statistic must be
/// of the kind the table's law calibrates.
pub fn decide(stat: &StatValue, table: &CalibrationTable, epsilon: f64) -> Result<Decision> {
    let law = table.law()?;
    if law.statistic() != stat.kind {
        return Err(Error::LawMismatch {
            stat: stat.kind.to_string(),
            law: table.law_id.clone(),
        });
    }
    let c = table.threshold(epsilon)?;
    Ok(if stat.value > c { Decision::Reject } else { Decision::Accept })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistic_rank() {
        let sorted: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&sorted, 0.05), 95.0);
        assert_eq!(upper_quantile(&sorted, 0.5), 50.0);
        assert_eq!(upper_quantile(&sorted, 0.999), 1.0);
    }

    #[test]
    fn budget_refusals() {
        assert!(check_budget(&[0.05], 999).is_err());
        assert!(check_budget(&[0.01], 1000).is_err());
        assert!(check_budget(&[0.02], 1000).is_ok());
        assert!(check_budget(&[0.9999], 100_000).is_err());
        assert!(check_epsilons(&[1.0]).is_err());
        assert!(check_epsilons(&[]).is_err());
    }
}
