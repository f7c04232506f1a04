//! Occupation-time estimators and the maximum likelihood estimator of the
//! family parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{signed_pow, ParametricModel, Regime, Theta};
use crate::numeric::golden_max;
use crate::simulate::Trajectory;

pub const DEFAULT_ALPHA_GRID: usize = 2001;

/// Empirical distribution function and empirical density on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCurves {
    pub x_grid: Vec<f64>,
    pub edf: Vec<f64>,
    pub density: Vec<f64>,
}

impl EmpiricalCurves {
    pub fn new<D: Fn(f64) -> f64>(traj: &Trajectory, x_grid: &[f64], sigma: D) -> Self {
        EmpiricalCurves {
            x_grid: x_grid.to_vec(),
            edf: edf(traj, x_grid),
            density: local_time_density(traj, x_grid, sigma),
        }
    }
}

/// `S_j = sum_k w_k 1{X_k < x_j}` over the left endpoints `X_0..X_{n-1}`,
/// for a sorted grid.
pub(crate) fn cumulative_below<W: Fn(usize) -> f64>(values: &[f64], weight: W, x_grid: &[f64]) -> Vec<f64> {
    debug_assert!(x_grid.windows(2).all(|w| w[0] <= w[1]));
    let mut bucket = vec![0.0; x_grid.len() + 1];
    for (k, &x) in values[..values.len() - 1].iter().enumerate() {
        // First grid point strictly above x.
        let j = x_grid.partition_point(|&g| g <= x);
        bucket[j] += weight(k);
    }
    let mut acc = 0.0;
    bucket[..x_grid.len()]
        .iter()
        .map(|b| {
            acc += b;
            acc
        })
        .collect()
}

/// Fraction of time the path spends strictly below each grid point, from the
/// left endpoints of each step. The grid must be sorted.
pub fn edf(traj: &Trajectory, x_grid: &[f64]) -> Vec<f64> {
    let n = traj.steps() as f64;
    cumulative_below(traj.values(), |_| 1.0, x_grid)
        .into_iter()
        .map(|s| (s / n).clamp(0.0, 1.0))
        .collect()
}

/// Local time `Lambda_T(x)` from the discretized Tanaka–Meyer identity
/// `|X_T - x| - |X_0 - x| - sum sgn(X_k - x) dX_k`.
///
/// Each step contributes `|b - x| - |a - x| - sgn(a - x)(b - a)`, which is
/// non-negative and vanishes unless `x` lies between `a = X_k` and
/// `b = X_{k+1}`; only those grid points are visited. The grid must be sorted.
pub fn local_time(traj: &Trajectory, x_grid: &[f64]) -> Vec<f64> {
    let mut lt = vec![0.0; x_grid.len()];
    for w in traj.values().windows(2) {
        let (a, b) = (w[0], w[1]);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let start = x_grid.partition_point(|&g| g < lo);
        for (j, &x) in x_grid.iter().enumerate().skip(start) {
            if x > hi {
                break;
            }
            lt[j] += if a > x {
                2.0 * (x - b).max(0.0)
            } else if a < x {
                2.0 * (b - x).max(0.0)
            } else {
                (b - a).abs()
            };
        }
    }
    lt
}

/// Empirical density `Lambda_T(x) / (T sigma(x)^2)`.
pub fn local_time_density<D: Fn(f64) -> f64>(traj: &Trajectory, x_grid: &[f64], sigma: D) -> Vec<f64> {
    let t = traj.horizon();
    local_time(traj, x_grid)
        .into_iter()
        .zip(x_grid)
        .map(|(l, &x)| {
            let s = sigma(x);
            (l / (t * s * s)).max(0.0)
        })
        .collect()
}

/// Maximum likelihood estimate with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta: Theta,
    /// `(alpha, profile log-likelihood)` on the search grid, when requested.
    pub profile_values: Option<Vec<(f64, f64)>>,
    /// Whether `alpha_hat`, `beta_hat` sit on an edge of the box.
    pub boundary_hit: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub alpha_grid: usize,
    pub keep_profile: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            alpha_grid: DEFAULT_ALPHA_GRID,
            keep_profile: false,
        }
    }
}

/// The sufficient pair `A(alpha) = sum g dX / sigma^2` and
/// `B(alpha) = sum g^2 dt / sigma^2`, with `g(x) = sgn(x - alpha)|x - alpha|^gamma`,
/// so that the log-likelihood is `-beta A - beta^2 B / 2`.
enum Sufficient {
    /// `gamma` in {1, 3}: polynomial in alpha through centred power sums.
    Polynomial { degree: u32, center: f64, sx_dx: Vec<f64>, sx: Vec<f64> },
    /// `gamma = 0`: sorted left endpoints with suffix sums of increments.
    Sign { sorted: Vec<f64>, suffix_dx: Vec<f64>, total_dx: f64 },
    Direct { gamma: f64 },
}

struct LikelihoodParts<'a> {
    values: &'a [f64],
    dt: f64,
    inv_var: f64,
    kind: Sufficient,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl<'a> LikelihoodParts<'a> {
    fn new(traj: &'a Trajectory, model: &ParametricModel) -> Self {
        let values = traj.values();
        let left = &values[..values.len() - 1];
        let gamma = model.gamma;
        let kind = if gamma == 1.0 || gamma == 3.0 {
            let degree = gamma as u32;
            let center = left.iter().sum::<f64>() / left.len() as f64;
            let mut sx_dx = vec![0.0; degree as usize + 1];
            let mut sx = vec![0.0; 2 * degree as usize + 1];
            for w in values.windows(2) {
                let u = w[0] - center;
                let d = w[1] - w[0];
                let mut p = 1.0;
                for j in 0..sx.len() {
                    if j < sx_dx.len() {
                        sx_dx[j] += p * d;
                    }
                    sx[j] += p;
                    p *= u;
                }
            }
            Sufficient::Polynomial { degree, center, sx_dx, sx }
        } else if gamma == 0.0 {
            let mut pairs: Vec<(f64, f64)> = values.windows(2).map(|w| (w[0], w[1] - w[0])).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut suffix_dx = vec![0.0; pairs.len() + 1];
            for i in (0..pairs.len()).rev() {
                suffix_dx[i] = suffix_dx[i + 1] + pairs[i].1;
            }
            Sufficient::Sign {
                sorted: pairs.iter().map(|p| p.0).collect(),
                total_dx: suffix_dx[0],
                suffix_dx,
            }
        } else {
            Sufficient::Direct { gamma }
        };
        LikelihoodParts {
            values,
            dt: traj.dt(),
            inv_var: 1.0 / (model.sigma * model.sigma),
            kind,
        }
    }

    fn parts(&self, alpha: f64) -> (f64, f64) {
        let (a, b) = match &self.kind {
            Sufficient::Polynomial { degree, center, sx_dx, sx } => {
                // (u - s)^p = sum_j C(p, j) u^j (-s)^(p - j), with s = alpha - center.
                let s = alpha - center;
                let expand = |p: u32, sums: &[f64]| {
                    (0..=p)
                        .map(|j| binomial(p, j) * sums[j as usize] * (-s).powi((p - j) as i32))
                        .sum::<f64>()
                };
                (expand(*degree, sx_dx), expand(2 * degree, sx) * self.dt)
            }
            Sufficient::Sign { sorted, suffix_dx, total_dx } => {
                let below = sorted.partition_point(|&x| x < alpha);
                let above = sorted.partition_point(|&x| x <= alpha);
                let up = suffix_dx[above];
                let down = total_dx - suffix_dx[below];
                (up - down, (below + sorted.len() - above) as f64 * self.dt)
            }
            Sufficient::Direct { gamma } => {
                let mut a = 0.0;
                let mut b = 0.0;
                for w in self.values.windows(2) {
                    let g = signed_pow(w[0] - alpha, *gamma);
                    a += g * (w[1] - w[0]);
                    b += g * g;
                }
                (a, b * self.dt)
            }
        };
        (a * self.inv_var, b * self.inv_var)
    }
}

/// Girsanov log-likelihood `(1/sigma^2) sum S dX - (1/(2 sigma^2)) sum S^2 dt`
/// with left-endpoint sums.
pub fn log_likelihood(traj: &Trajectory, model: &ParametricModel, theta: &Theta) -> f64 {
    let inv_var = 1.0 / (model.sigma * model.sigma);
    let dt = traj.dt();
    let (mut first, mut second) = (0.0, 0.0);
    for w in traj.values().windows(2) {
        let s = model.trend(theta, w[0]);
        first += s * (w[1] - w[0]);
        second += s * s;
    }
    inv_var * (first - 0.5 * second * dt)
}

fn profile_beta(a: f64, b: f64, b1: f64, b2: f64) -> f64 {
    if b > 0.0 {
        (-a / b).clamp(b1, b2)
    } else {
        b1
    }
}

/// MLE over the model's box: `beta_hat(alpha)` in closed form, `alpha_hat` by
/// grid search on the profile likelihood, refined by golden section when
/// `gamma > 1/2`.
pub fn mle(traj: &Trajectory, model: &ParametricModel) -> Result<ThetaEstimate> {
    mle_with(traj, model, MleOptions::default())
}

pub fn mle_with(traj: &Trajectory, model: &ParametricModel, options: MleOptions) -> Result<ThetaEstimate> {
    model.require_supported()?;
    let bx = model.theta_box;
    let parts = LikelihoodParts::new(traj, model);
    let profile = |alpha: f64| {
        let (a, b) = parts.parts(alpha);
        let beta = profile_beta(a, b, bx.b1, bx.b2);
        (-beta * a - 0.5 * beta * beta * b, beta, b)
    };
    let points = if bx.a1 == bx.a2 { 1 } else { options.alpha_grid.max(2) };
    let step = if points > 1 { (bx.a2 - bx.a1) / (points - 1) as f64 } else { 0.0 };
    let alpha_at = |i: usize| if i + 1 == points { bx.a2 } else { bx.a1 + step * i as f64 };

    let mut best = (0, f64::NEG_INFINITY);
    let mut any_information = false;
    let mut kept = options.keep_profile.then(|| Vec::with_capacity(points));
    for i in 0..points {
        let alpha = alpha_at(i);
        let (value, _, b) = profile(alpha);
        any_information |= b > 0.0;
        if let Some(kept) = kept.as_mut() {
            kept.push((alpha, value));
        }
        if value > best.1 {
            best = (i, value);
        }
    }
    if !any_information {
        return Err(Error::Estimation("the path carries no information on beta (B(alpha) = 0)".into()));
    }
    if !best.1.is_finite() {
        return Err(Error::Estimation("profile likelihood is not finite".into()));
    }
    let mut alpha = alpha_at(best.0);
    if model.regime == Regime::HighGamma && points > 2 {
        let lo = alpha_at(best.0.saturating_sub(1));
        let hi = alpha_at((best.0 + 1).min(points - 1));
        let (refined, value) = golden_max(|a| profile(a).0, lo, hi, 1e-9 * (1.0 + alpha.abs()));
        if value > best.1 {
            alpha = refined;
        }
    }
    let beta = profile(alpha).1;
    let theta = Theta::new(alpha, beta);
    Ok(ThetaEstimate {
        theta,
        profile_values: kept,
        boundary_hit: [alpha == bx.a1 || alpha == bx.a2, beta == bx.b1 || beta == bx.b2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_family, ThetaBox};

    fn path(values: Vec<f64>, dt: f64) -> Trajectory {
        Trajectory::new(0.0, dt, values).unwrap()
    }

    #[test]
    fn edf_of_constant_path() {
        let p = path(vec![0.5; 11], 0.1);
        assert_eq!(edf(&p, &[0.0, 0.5, 0.6]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn local_time_single_crossing() {
        // A single step from -1 to 1 contributes 2(1 - x) on (-1, 1] and 2 at the start.
        let p = path(vec![-1.0, 1.0], 1.0);
        let lt = local_time(&p, &[-2.0, -1.0, 0.0, 0.5, 1.0, 2.0]);
        assert_eq!(lt, vec![0.0, 2.0, 2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn likelihood_fast_paths_match_direct_sums() {
        let values: Vec<f64> = (0..200).map(|k| (k as f64 * 0.37).sin() * 1.3 + 0.2).collect();
        let p = path(values, 0.05);
        for gamma in [0.0, 1.0, 3.0, 2.0] {
            let model = make_family(gamma, 0.7, ThetaBox::new(-2.0, 2.0, 0.1, 5.0).unwrap()).unwrap();
            let parts = LikelihoodParts::new(&p, &model);
            let direct = LikelihoodParts {
                kind: Sufficient::Direct { gamma },
                ..LikelihoodParts::new(&p, &model)
            };
            for alpha in [-1.5, -0.2, 0.2, 0.9] {
                let (a, b) = parts.parts(alpha);
                let (ad, bd) = direct.parts(alpha);
                assert!((a - ad).abs() < 1e-9 * (1.0 + ad.abs()), "gamma {gamma} alpha {alpha}");
                assert!((b - bd).abs() < 1e-9 * (1.0 + bd.abs()));
                let theta = Theta::new(alpha, 1.7);
                let ll = log_likelihood(&p, &model, &theta);
                assert!((ll - (-1.7 * ad - 0.5 * 1.7 * 1.7 * bd)).abs() < 1e-9 * (1.0 + ll.abs()));
            }
        }
    }

    #[test]
    fn degenerate_box_is_returned() {
        let p = path((0..50).map(|k| (k as f64).cos()).collect(), 0.1);
        let model = make_family(1.0, 1.0, ThetaBox::new(0.3, 0.3, 2.0, 2.0).unwrap()).unwrap();
        let est = mle(&p, &model).unwrap();
        assert_eq!(est.theta, Theta::new(0.3, 2.0));
        assert_eq!(est.boundary_hit, [true, true]);
    }

    #[test]
    fn flat_path_gives_lower_beta() {
        let p = path(vec![0.0; 20], 0.1);
        let model = make_family(1.0, 1.0, ThetaBox::new(-1.0, 1.0, 0.5, 3.0).unwrap()).unwrap();
        let est = mle(&p, &model).unwrap();
        assert_eq!(est.theta.beta, 0.5);
        assert!(est.boundary_hit[1]);
        let model = make_family(0.0, 1.0, ThetaBox::new(0.0, 0.0, 0.5, 3.0).unwrap()).unwrap();
        assert!(matches!(mle(&p, &model), Err(Error::Estimation(_))));
    }

    #[test]
    fn unsupported_regime_is_refused() {
        let p = path(vec![0.0, 1.0, 0.5], 0.1);
        let model = make_family(0.5, 1.0, ThetaBox::new(-1.0, 1.0, 0.5, 3.0).unwrap()).unwrap();
        assert!(matches!(mle(&p, &model), Err(Error::UnsupportedRegime { .. })));
    }
}
