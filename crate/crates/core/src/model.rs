//! Invariant laws of the diffusions under test.
//!
//! The parametric family is
//! `dX = -beta * sgn(X - alpha) * |X - alpha|^gamma dt + sigma dW`,
//! whose stationary law is known in closed form. A [`SimpleModel`] carries an
//! arbitrary drift and diffusion; its stationary law is obtained numerically.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{brent_root, integrate, integrate_panels, integrate_rel};

/// Real-valued coefficient function shared across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(x) |x|^p`, with the `p = 0` and `p = 1` cases kept exact.
#[inline]
pub(crate) fn signed_pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 0.0 {
        sgn(x)
    } else {
        sgn(x) * x.abs().powf(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub alpha: f64,
    pub beta: f64,
}

impl Theta {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Theta { alpha, beta }
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

/// Closed parameter rectangle `[a1, a2] x [b1, b2]` with `b1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaBox {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ThetaBox {
    /// A degenerate box (`a1 == a2` or `b1 == b2`) is accepted; it pins the
    /// corresponding coordinate.
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        if ![a1, a2, b1, b2].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("parameter box must be finite"));
        }
        if a1 > a2 || b1 > b2 {
            return Err(Error::validation(format!(
                "invalid parameter box [{a1}, {a2}] x [{b1}, {b2}]"
            )));
        }
        if b1 <= 0.0 {
            return Err(Error::validation(format!("parameter box needs b1 > 0, got {b1}")));
        }
        Ok(ThetaBox { a1, a2, b1, b2 })
    }

    pub fn contains(&self, theta: &Theta) -> bool {
        (self.a1..=self.a2).contains(&theta.alpha) && (self.b1..=self.b2).contains(&theta.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `0 <= gamma < 1/2`: the location estimate converges faster than
    /// `sqrt(T)` and drops out of the limit.
    LowGamma,
    /// `gamma > 1/2`.
    HighGamma,
    /// `gamma == 1/2`.
    Unsupported,
}

impl Regime {
    pub fn classify(gamma: f64) -> Regime {
        if (gamma - 0.5).abs() < 1e-12 {
            Regime::Unsupported
        } else if gamma < 0.5 {
            Regime::LowGamma
        } else {
            Regime::HighGamma
        }
    }
}

/// The standardized law `f0`, `F0` of the family at `theta = (0, 1)`,
/// `sigma = 1`: `f0(y) = exp(-2|y|^(gamma+1) / (gamma+1)) / G_gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitLaw {
    gamma: f64,
    log_g: f64,
}

impl UnitLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::validation(format!("gamma must be >= 0, got {gamma}")));
        }
        let k = gamma + 1.0;
        let log_g = (gamma / k) * (2.0 / k).ln() + ln_gamma(1.0 / k);
        Ok(UnitLaw { gamma, log_g })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `G_gamma = (2/(gamma+1))^(gamma/(gamma+1)) * Gamma(1/(gamma+1))`.
    pub fn normalizer(&self) -> f64 {
        self.log_g.exp()
    }

    pub fn density(&self, y: f64) -> f64 {
        let k = self.gamma + 1.0;
        (-2.0 * y.abs().powf(k) / k - self.log_g).exp()
    }

    /// Upper tail `P(xi > |y|)`, accurate far into the tail.
    fn tail(&self, y: f64) -> f64 {
        let y = y.abs();
        if y == 0.0 {
            return 0.5;
        }
        if y.is_infinite() {
            return 0.0;
        }
        let k = self.gamma + 1.0;
        0.5 * gamma_ur(1.0 / k, 2.0 * y.powf(k) / k)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y > 0.0 {
            1.0 - self.tail(y)
        } else {
            self.tail(y)
        }
    }

    /// `1 - F0(y)`, computed without cancellation.
    pub fn sf(&self, y: f64) -> f64 {
        self.cdf(-y)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::validation(format!("probability must lie in (0,1), got {p}")));
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        let y = self.upper_quantile(p.min(1.0 - p))?;
        Ok(if p > 0.5 { y } else { -y })
    }

    /// `y >= 0` with `P(xi > y) = q`, for `0 < q <= 1/2`; stays accurate for
    /// tail probabilities far below machine epsilon.
    fn upper_quantile(&self, q: f64) -> Result<f64> {
        let target = q.ln();
        let g = |y: f64| self.tail(y).ln() - target;
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Numerical(format!("tail quantile bracket failed for q={q}")));
            }
        }
        brent_root(g, 0.0, hi, 1e-15, 0.0)
    }

    /// Half-width `L` with `P(|xi| > L) = mass`.
    pub fn truncation(&self, mass: f64) -> Result<f64> {
        if !(mass > 0.0 && mass <= 1.0) {
            return Err(Error::validation(format!("tail mass must lie in (0,1], got {mass}")));
        }
        self.upper_quantile(0.5 * mass)
    }

    /// `E|xi|^p` by quadrature, `p > -1`.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if p <= -1.0 {
            return Err(Error::validation(format!(
                "E|xi|^{p} is not integrable (exponent must exceed -1)"
            )));
        }
        let upper = self.truncation(1e-17)?;
        let tol = 1e-13;
        let half = if p < 0.0 {
            // z = u^(1/(p+1)) removes the singularity at the origin.
            let q = 1.0 / (p + 1.0);
            integrate(|u: f64| self.density(u.powf(q)) * q, 0.0, upper.powf(p + 1.0), tol)
        } else {
            integrate_panels(
                |z: f64| z.powf(p) * self.density(z),
                &[0.0, 0.25 * upper, 0.5 * upper, upper],
                tol,
            )
        };
        Ok(2.0 * half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryMoments {
    /// `E0|xi|^(2 gamma - 2)`; `None` in the low-gamma regime.
    pub a: Option<f64>,
    /// `E0|xi|^(2 gamma)`.
    pub b: f64,
}

/// Moments `a` and `b` of the unit law, by quadrature.
pub fn stationary_moments(gamma: f64) -> Result<StationaryMoments> {
    let law = UnitLaw::new(gamma)?;
    let b = law.abs_moment(2.0 * gamma)?;
    let a = match Regime::classify(gamma) {
        Regime::HighGamma => Some(law.abs_moment(2.0 * gamma - 2.0)?),
        _ => None,
    };
    Ok(StationaryMoments { a, b })
}

/// Something with a strictly increasing stationary distribution function.
pub trait InvariantLaw: Send + Sync {
    fn density(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn quantile(&self, p: f64) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricModel {
    pub gamma: f64,
    pub sigma: f64,
    pub theta_box: ThetaBox,
    pub regime: Regime,
    unit: UnitLaw,
}

/// Builds the family with known `gamma`, `sigma` and parameter box.
pub fn make_family(gamma: f64, sigma: f64, theta_box: ThetaBox) -> Result<ParametricModel> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::validation(format!("sigma must be > 0, got {sigma}")));
    }
    let unit = UnitLaw::new(gamma)?;
    Ok(ParametricModel {
        gamma,
        sigma,
        theta_box,
        regime: Regime::classify(gamma),
        unit,
    })
}

impl ParametricModel {
    pub fn unit_law(&self) -> &UnitLaw {
        &self.unit
    }

    /// Fails for `gamma = 1/2`, for which no limit theory is available.
    pub fn require_supported(&self) -> Result<()> {
        if self.regime == Regime::Unsupported {
            Err(Error::UnsupportedRegime { gamma: self.gamma })
        } else {
            Ok(())
        }
    }

    pub fn trend(&self, theta: &Theta, x: f64) -> f64 {
        -theta.beta * signed_pow(x - theta.alpha, self.gamma)
    }

    /// Trend as a shareable closure, for simulation.
    pub fn trend_fn(&self, theta: Theta) -> ScalarFn {
        let gamma = self.gamma;
        Arc::new(move |x| -theta.beta * signed_pow(x - theta.alpha, gamma))
    }

    /// Scale `c = beta^(1/(gamma+1)) sigma^(-2/(gamma+1))` with `y = c (x - alpha)`.
    pub fn scale(&self, theta: &Theta) -> f64 {
        let k = self.gamma + 1.0;
        theta.beta.powf(1.0 / k) * self.sigma.powf(-2.0 / k)
    }

    pub fn standardize(&self, theta: &Theta, x: f64) -> f64 {
        self.scale(theta) * (x - theta.alpha)
    }

    pub fn destandardize(&self, theta: &Theta, y: f64) -> f64 {
        theta.alpha + y / self.scale(theta)
    }

    /// Ratio `T_* / T = beta^(2/(gamma+1)) sigma^(2(gamma-1)/(gamma+1))`.
    pub fn time_factor(&self, theta: &Theta) -> f64 {
        let k = self.gamma + 1.0;
        theta.beta.powf(2.0 / k) * self.sigma.powf(2.0 * (self.gamma - 1.0) / k)
    }

    pub fn invariant_density(&self, theta: &Theta, x: f64) -> f64 {
        let c = self.scale(theta);
        c * self.unit.density(c * (x - theta.alpha))
    }

    pub fn invariant_cdf(&self, theta: &Theta, x: f64) -> f64 {
        self.unit.cdf(self.standardize(theta, x))
    }

    pub fn invariant_quantile(&self, theta: &Theta, p: f64) -> Result<f64> {
        Ok(self.destandardize(theta, self.unit.quantile(p)?))
    }

    pub fn at(&self, theta: Theta) -> FamilyMember<'_> {
        FamilyMember { model: self, theta }
    }
}

/// A family model with its parameter fixed.
#[derive(Debug, Clone, Copy)]
pub struct FamilyMember<'a> {
    pub model: &'a ParametricModel,
    pub theta: Theta,
}

impl InvariantLaw for FamilyMember<'_> {
    fn density(&self, x: f64) -> f64 {
        self.model.invariant_density(&self.theta, x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.model.invariant_cdf(&self.theta, x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        self.model.invariant_quantile(&self.theta, p)
    }
}

/// How the support of a [`SimpleModel`] is truncated for quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Grow a symmetric window around the origin until the tails are negligible.
    Auto,
    Fixed { lo: f64, hi: f64 },
}

const SIMPLE_CELLS: usize = 4096;
const TAIL_MASS: f64 = 1e-8;

/// Simple-hypothesis model with known drift `S0` and diffusion `sigma(x)`.
///
/// The stationary law `f(x) = exp(2 int_0^x S0/sigma^2) / (G sigma(x)^2)` is
/// tabulated on a dense grid: the exponent integral is accumulated cell by
/// cell and interpolated with cubic Hermite pieces (its derivative
/// `2 S0/sigma^2` is known exactly), and the density is integrated per cell.
#[derive(Clone)]
pub struct SimpleModel {
    label: String,
    drift: ScalarFn,
    diffusion: ScalarFn,
    lo: f64,
    hi: f64,
    h: f64,
    exponent: Vec<f64>,
    // One-sided exponent slopes inside each cell, so kinks on nodes stay exact.
    slope_right: Vec<f64>,
    slope_left: Vec<f64>,
    shift: f64,
    cum_mass: Vec<f64>,
    mass: f64,
    log_normalizer: f64,
    warnings: Vec<String>,
}

impl fmt::Debug for SimpleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimpleModel")
            .field("label", &self.label)
            .field("support", &(self.lo, self.hi))
            .field("log_normalizer", &self.log_normalizer)
            .field("warnings", &self.warnings)
            .finish()
    }
}

/// Builds a simple-hypothesis model. `label` identifies the model in law ids
/// and reports.
pub fn make_simple_model(
    drift: ScalarFn,
    diffusion: ScalarFn,
    truncation: Truncation,
    label: impl Into<String>,
) -> Result<SimpleModel> {
    let label = label.into();
    match truncation {
        Truncation::Fixed { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(format!("invalid truncation [{lo}, {hi}]")));
            }
            let model = SimpleModel::build(label, drift, diffusion, lo, hi)?;
            let tail = model.outside_mass()?;
            if !(tail <= TAIL_MASS) {
                return Err(Error::validation(format!(
                    "invariant density not normalizable on [{lo}, {hi}]: estimated mass outside {tail:e}"
                )));
            }
            Ok(model)
        }
        Truncation::Auto => {
            let mut half = 2.0;
            let mut previous = f64::INFINITY;
            while half <= 2048.0 {
                match SimpleModel::build(label.clone(), drift.clone(), diffusion.clone(), -half, half) {
                    Ok(model) => {
                        let outside = model.outside_mass().unwrap_or(f64::INFINITY);
                        if outside <= 1e-3 * TAIL_MASS {
                            return Ok(model);
                        }
                        // Tail mass of a normalizable density shrinks as the
                        // window grows.
                        if half >= 8.0 && !(outside < previous) {
                            break;
                        }
                        previous = outside;
                    }
                    Err(e @ Error::Validation(_)) => return Err(e),
                    Err(_) => {}
                }
                half *= 2.0;
            }
            Err(Error::validation(format!(
                "invariant density of `{label}` is not normalizable (no truncation up to +/-2048 captures its mass)"
            )))
        }
    }
}

impl SimpleModel {
    fn build(label: String, drift: ScalarFn, diffusion: ScalarFn, lo: f64, hi: f64) -> Result<Self> {
        let n = SIMPLE_CELLS;
        let h = (hi - lo) / n as f64;
        let node = |i: usize| lo + h * i as f64;
        let ratio = {
            let (drift, diffusion) = (drift.clone(), diffusion.clone());
            move |x: f64| {
                let s = diffusion(x);
                2.0 * drift(x) / (s * s)
            }
        };
        for i in 0..=n {
            let x = node(i);
            let s = diffusion(x);
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::validation(format!("diffusion must be positive, sigma({x}) = {s}")));
            }
            if !drift(x).is_finite() {
                return Err(Error::validation(format!("drift is not finite at x = {x}")));
            }
        }
        let mut exponent = vec![0.0; n + 1];
        for i in 0..n {
            exponent[i + 1] = exponent[i] + integrate(&ratio, node(i), node(i + 1), 1e-14);
        }
        let eps = 1e-7 * h;
        let slope_right: Vec<f64> = (0..n).map(|i| ratio(node(i) + eps)).collect();
        let slope_left: Vec<f64> = (0..n).map(|i| ratio(node(i + 1) - eps)).collect();
        let mut model = SimpleModel {
            label,
            drift,
            diffusion,
            lo,
            hi,
            h,
            exponent,
            slope_right,
            slope_left,
            shift: 0.0,
            cum_mass: vec![0.0; n + 1],
            mass: 0.0,
            log_normalizer: 0.0,
            warnings: Vec::new(),
        };
        // Anchor the exponent at the origin when it lies in the support.
        if lo < 0.0 && hi > 0.0 {
            let e0 = model.exponent_at(0.0);
            model.exponent.iter_mut().for_each(|e| *e -= e0);
        }
        let shift = (0..=n)
            .map(|i| model.exponent[i] - 2.0 * (model.diffusion)(node(i)).ln())
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::Numerical("invariant density exponent is not finite".into()));
        }
        model.shift = shift;
        // The shift puts the peak of the integrand near 1/sigma^2; cells far
        // below it only need absolute accuracy.
        let peak = (0..=n).map(|i| model.unnormalized(node(i))).fold(0.0, f64::max);
        let cell_tol = 1e-15 * peak * h;
        let mut acc = 0.0;
        for i in 0..n {
            acc += integrate(|x| model.unnormalized(x), node(i), node(i + 1), cell_tol);
            model.cum_mass[i + 1] = acc;
        }
        if !(acc.is_finite() && acc > 0.0) {
            return Err(Error::Numerical("invariant density has no mass".into()));
        }
        model.mass = acc;
        model.log_normalizer = acc.ln() + shift;
        model.check_tail_sign(0.5 * lo.abs().max(hi.abs()));
        Ok(model)
    }

    fn exponent_at(&self, x: f64) -> f64 {
        let n = self.exponent.len() - 1;
        let u = ((x - self.lo) / self.h).clamp(0.0, n as f64);
        let i = (u.floor() as usize).min(n - 1);
        let s = u - i as f64;
        let (e0, e1) = (self.exponent[i], self.exponent[i + 1]);
        let (d0, d1) = (self.slope_right[i] * self.h, self.slope_left[i] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * e0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * e1
            + (s3 - s2) * d1
    }

    fn unnormalized(&self, x: f64) -> f64 {
        let s = (self.diffusion)(x);
        (self.exponent_at(x) - self.shift).exp() / (s * s)
    }

    /// Estimated probability mass outside the truncation window, from a
    /// direct (nested) quadrature over windows of half the support width on
    /// each side.
    fn outside_mass(&self) -> Result<f64> {
        let w = 0.5 * (self.hi - self.lo);
        let ratio = |x: f64| {
            let s = (self.diffusion)(x);
            2.0 * (self.drift)(x) / (s * s)
        };
        let e_lo = self.exponent[0];
        let e_hi = *self.exponent.last().unwrap();
        let left = |x: f64| {
            let e = e_lo - integrate(ratio, x, self.lo, 1e-10);
            let s = (self.diffusion)(x);
            (e - self.shift).exp() / (s * s)
        };
        let right = |x: f64| {
            let e = e_hi + integrate(ratio, self.hi, x, 1e-10);
            let s = (self.diffusion)(x);
            (e - self.shift).exp() / (s * s)
        };
        let outside = integrate_rel(left, self.lo - w, self.lo, 1e-8) + integrate_rel(right, self.hi, self.hi + w, 1e-8);
        if !outside.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(outside / (self.mass + outside))
    }

    fn check_tail_sign(&mut self, radius: f64) {
        let probes = 64;
        for j in 0..=probes {
            for y in [
                radius + (self.hi - radius) * j as f64 / probes as f64,
                -radius + (self.lo + radius) * j as f64 / probes as f64,
            ] {
                if y < self.lo || y > self.hi {
                    continue;
                }
                let s = (self.diffusion)(y);
                if !(sgn(y) * (self.drift)(y) / (s * s) < 0.0) {
                    self.warnings.push(format!(
                        "tail-sign condition fails: sgn(y) S0(y)/sigma(y)^2 >= 0 at y = {y} (radius {radius})"
                    ));
                    return;
                }
            }
        }
    }

    /// Re-runs the tail-sign check with an explicit radius.
    pub fn with_tail_radius(mut self, radius: f64) -> Self {
        self.warnings.clear();
        self.check_tail_sign(radius);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        (self.diffusion)(x)
    }

    pub fn drift_fn(&self) -> ScalarFn {
        self.drift.clone()
    }

    pub fn diffusion_fn(&self) -> ScalarFn {
        self.diffusion.clone()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `G(S0)` with the exponent anchored at the origin (or at the left end
    /// of the support if the origin is outside it).
    pub fn normalizer(&self) -> f64 {
        self.log_normalizer.exp()
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Stable identifier of the model configuration, used in law ids.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.label.as_bytes());
        hasher.update(self.lo.to_le_bytes());
        hasher.update(self.hi.to_le_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `1 - F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 1.0;
        }
        if x >= self.hi {
            return 0.0;
        }
        let (i, partial) = self.partial(x);
        ((self.mass - self.cum_mass[i]) - partial) / self.mass
    }

    fn partial(&self, x: f64) -> (usize, f64) {
        let n = self.exponent.len() - 1;
        let i = (((x - self.lo) / self.h).floor() as usize).min(n - 1);
        let xi = self.lo + self.h * i as f64;
        (i, integrate_rel(|u| self.unnormalized(u), xi, x, 1e-14))
    }
}

impl InvariantLaw for SimpleModel {
    fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        self.unnormalized(x) / self.mass
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let (i, partial) = self.partial(x);
        ((self.cum_mass[i] + partial) / self.mass).min(1.0)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::validation(format!("probability must lie in (0,1), got {p}")));
        }
        let target = p * self.mass;
        let i = self.cum_mass.partition_point(|&c| c <= target).clamp(1, self.cum_mass.len() - 1) - 1;
        let a = self.lo + self.h * i as f64;
        let b = a + self.h;
        let g = |x: f64| self.cdf(x) - p;
        let (ga, gb) = (g(a), g(b));
        if ga >= 0.0 {
            return Ok(a);
        }
        if gb <= 0.0 {
            return Ok(b);
        }
        brent_root(g, a, b, 1e-15 * (1.0 + a.abs()), 1e-14)
    }
}
