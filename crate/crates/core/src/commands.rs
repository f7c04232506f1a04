//! Validated commands of the `ergofit` binary and their execution.
//!
//! The command line is parsed into a [`Command`], validated up front (files,
//! model specs, statistic/law pairing) and only then executed. A validated
//! command serializes to JSON and parses back to the same value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::calibration::{calibrate, check_budget, decide, CalibrationTable, Decision};
use crate::config::{check_theta, law_for, registry, Model, ModelSpec};
use crate::error::{Error, Result};
use crate::estimators::{mle, DEFAULT_ALPHA_GRID};
use crate::harness::{self, StudyConfig};
use crate::limits::{self, LawId, LimitSampler, SamplerGrid};
use crate::model::InvariantLaw;
use crate::simulate::{sample_stationary_init, simulate_path, step_count, RngStream, Trajectory};
use crate::statistics::{param_stat, simple_stats, StatisticKind, DEFAULT_GRID_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Simulate {
        model: ModelSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<crate::model::Theta>,
        #[serde(rename = "T")]
        horizon: f64,
        dt: f64,
        seed: u64,
        #[serde(default)]
        stream: u64,
        /// Fixed start; the stationary law is sampled when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<f64>,
        out: PathBuf,
    },
    Calibrate {
        law: String,
        epsilons: Vec<f64>,
        n_replicates: usize,
        seed: u64,
        /// Needed for simple-model laws.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<ModelSpec>,
        out: PathBuf,
    },
    Test {
        traj: PathBuf,
        stat: StatisticKind,
        model: ModelSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<PathBuf>,
        epsilon: f64,
        autocalibrate: bool,
        calibration_replicates: usize,
        calibration_seed: u64,
        grid_points: usize,
        ks_weight_by_sigma: bool,
    },
    Study {
        config: Box<StudyConfig>,
        out: PathBuf,
    },
    Defaults,
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::validation(format!("file {} does not exist", path.display())))
    }
}

fn require_spec_files(spec: &ModelSpec) -> Result<()> {
    spec.files().into_iter().try_for_each(require_file)
}

impl Command {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("command: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("commands serialize")
    }

    /// Fail-fast checks: referenced files exist, models build, the
    /// statistic has a law under the model and the budgets are sane.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Simulate {
                model, theta, horizon, dt, x0, ..
            } => {
                require_spec_files(model)?;
                step_count(*horizon, *dt)?;
                if let Some(x) = x0 {
                    if !x.is_finite() {
                        return Err(Error::validation("x0 must be finite"));
                    }
                }
                if let Model::Family(m) = model.build()? {
                    let theta = theta.ok_or_else(|| Error::validation("a family model needs --theta alpha,beta"))?;
                    check_theta(&m, &theta)?;
                }
                Ok(())
            }
            Command::Calibrate {
                law,
                epsilons,
                n_replicates,
                model,
                ..
            } => {
                let law: LawId = law.parse()?;
                let mut sorted = epsilons.clone();
                sorted.sort_by(f64::total_cmp);
                if let Some(e) = sorted.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                    return Err(Error::validation(format!("levels must lie in (0,1), got {e}")));
                }
                check_budget(&sorted, *n_replicates)?;
                let built = match model {
                    Some(spec) => {
                        require_spec_files(spec)?;
                        Some(spec.build()?)
                    }
                    None => None,
                };
                let simple = built.as_ref().map(Model::as_simple).transpose()?;
                LimitSampler::new(&law, simple)?;
                Ok(())
            }
            Command::Test {
                traj,
                stat,
                model,
                table,
                epsilon,
                autocalibrate,
                calibration_replicates,
                grid_points,
                ..
            } => {
                require_file(traj)?;
                require_spec_files(model)?;
                if !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return Err(Error::validation(format!("eps must lie in (0,1), got {epsilon}")));
                }
                if *grid_points < 2 {
                    return Err(Error::validation("grid points must be at least 2"));
                }
                let built = model.build()?;
                law_for(*stat, &built)?;
                match table {
                    Some(path) => require_file(path),
                    None if !autocalibrate => Err(Error::validation(
                        "no --table given and autocalibration is disabled (--no-autocalibrate)",
                    )),
                    None => check_budget(&[*epsilon], *calibration_replicates),
                }
            }
            Command::Study { config, .. } => config.validate().map(|_| ()),
            Command::Defaults => Ok(()),
        }
    }

    /// Executes a validated command; returns what should go to stdout.
    pub fn execute(&self) -> Result<String> {
        match self {
            Command::Simulate {
                model,
                theta,
                horizon,
                dt,
                seed,
                stream,
                x0,
                out,
            } => {
                let built = model.build()?;
                let mut rng = RngStream::new(*seed, *stream).rng();
                let traj = match &built {
                    Model::Family(m) => {
                        let theta = theta.ok_or_else(|| Error::validation("a family model needs --theta"))?;
                        let x0 = match x0 {
                            Some(x) => *x,
                            None => sample_stationary_init(&m.at(theta), &mut rng)?,
                        };
                        let sigma = m.sigma;
                        simulate_path(|x| m.trend(&theta, x), |_| sigma, x0, *horizon, *dt, &mut rng)?
                    }
                    Model::Simple(m) => {
                        let x0 = match x0 {
                            Some(x) => *x,
                            None => sample_stationary_init(m as &dyn InvariantLaw, &mut rng)?,
                        };
                        simulate_path(|x| m.drift(x), |x| m.diffusion(x), x0, *horizon, *dt, &mut rng)?
                    }
                };
                traj.save_csv(out)?;
                Ok(json!({"out": out, "steps": traj.steps(), "T": traj.horizon()}).to_string())
            }
            Command::Calibrate {
                law,
                epsilons,
                n_replicates,
                seed,
                model,
                out,
            } => {
                let law: LawId = law.parse()?;
                let built = model.as_ref().map(ModelSpec::build).transpose()?;
                let simple = built.as_ref().map(Model::as_simple).transpose()?;
                let table = calibrate(&LimitSampler::new(&law, simple)?, epsilons, *n_replicates, *seed)?;
                table.save(out)?;
                Ok(json!({
                    "out": out,
                    "law_id": table.law_id,
                    "epsilons": table.epsilons,
                    "thresholds": table.thresholds,
                })
                .to_string())
            }
            Command::Test {
                traj,
                stat,
                model,
                table,
                epsilon,
                calibration_replicates,
                calibration_seed,
                grid_points,
                ks_weight_by_sigma,
                ..
            } => {
                let path = Trajectory::load_csv(traj)?;
                let built = model.build()?;
                let law = law_for(*stat, &built)?;
                let (value, theta_hat) = match &built {
                    Model::Family(m) => {
                        let est = mle(&path, m)?;
                        (param_stat(&path, m, &est.theta, *stat, *grid_points)?, Some(est))
                    }
                    Model::Simple(m) => (
                        simple_stats(&path, m, &[*stat], *ks_weight_by_sigma, *grid_points)?.remove(0),
                        None,
                    ),
                };
                let table = match table {
                    Some(p) => {
                        let t = CalibrationTable::load(p)?;
                        if t.law_id != law.to_string() {
                            return Err(Error::LawMismatch {
                                stat: stat.to_string(),
                                law: t.law_id,
                            });
                        }
                        t
                    }
                    None => {
                        let simple = built.as_simple().ok();
                        calibrate(
                            &LimitSampler::new(&law, simple)?,
                            &[*epsilon],
                            *calibration_replicates,
                            *calibration_seed,
                        )?
                    }
                };
                let decision = decide(&value, &table, *epsilon)?;
                let mut verdict = json!({
                    "statistic": stat.to_string(),
                    "value": value.value,
                    "law_id": table.law_id,
                    "epsilon": epsilon,
                    "threshold": table.threshold(*epsilon)?,
                    "decision": match decision { Decision::Reject => "reject", Decision::Accept => "accept" },
                });
                if let Some(est) = theta_hat {
                    verdict["theta_hat"] = json!({
                        "alpha_hat": est.theta.alpha,
                        "beta_hat": est.theta.beta,
                        "boundary_hit": est.boundary_hit,
                    });
                }
                Ok(serde_json::to_string_pretty(&verdict).expect("json"))
            }
            Command::Study { config, out } => {
                let report = harness::run(config)?;
                report.write(out)?;
                Ok(json!({
                    "out": out,
                    "rows": report.rows.len(),
                    "wall_clock_seconds": report.summary.wall_clock_seconds,
                })
                .to_string())
            }
            Command::Defaults => Ok(serde_json::to_string_pretty(&defaults()?).expect("json")),
        }
    }
}

/// Every effective default, as printed by `ergofit defaults`.
pub fn defaults() -> Result<serde_json::Value> {
    let mut field = serde_json::Map::new();
    for gamma in [0.0, 0.3, 1.0, 2.0, 3.0] {
        if let SamplerGrid::Field { half_width, dz, m_y } = limits::default_param_grid(gamma)? {
            field.insert(format!("gamma={gamma}"), json!({"L": half_width, "dz": dz, "m_y": m_y}));
        }
    }
    Ok(json!({
        "dt": harness::DEFAULT_DT,
        "grid_points": DEFAULT_GRID_POINTS,
        "alpha_grid": DEFAULT_ALPHA_GRID,
        "field_tail_mass": limits::FIELD_TAIL_MASS,
        "field_dz_fraction": limits::FIELD_DZ_FRACTION,
        "m_y": DEFAULT_GRID_POINTS,
        "n_steps": limits::DEFAULT_WALK_STEPS,
        "field_grids": field,
        "calibration_replicates": harness::DEFAULT_CALIBRATION_REPLICATES,
        "limit_replicates": harness::DEFAULT_LIMIT_REPLICATES,
        "min_study_replicates": harness::MIN_STUDY_REPLICATES,
        "min_calibration_replicates": crate::calibration::MIN_REPLICATES,
        "ks_level": harness::KS_LEVEL,
        "laws": registry().into_iter().map(|(s, l)| json!({"stat": s, "law_id": l})).collect::<Vec<_>>(),
    }))
}
