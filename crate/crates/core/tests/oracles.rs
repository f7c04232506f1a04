//! Checks against independent closed forms and quadratures.

use std::f64::consts::PI;

use ergofit::estimators::mle;
use ergofit::limits::{LawId, LimitSampler, SamplerGrid};
use ergofit::model::{make_family, stationary_moments, Theta, ThetaBox, UnitLaw};
use ergofit::simulate::{simulate_path, RngStream};
use statrs::function::gamma::gamma;

/// `int_0^inf y^p exp(-2 y^k / k) dy`.
fn half_moment(p: f64, k: f64) -> f64 {
    (k / 2.0).powf((p + 1.0) / k) * gamma((p + 1.0) / k) / k
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn unit_law_normalizer_and_moments() {
    for gamma_ in [0.0, 0.3, 1.0, 2.0, 3.0] {
        let k = gamma_ + 1.0;
        let law = UnitLaw::new(gamma_).unwrap();
        let g = 2.0 * half_moment(0.0, k);
        assert!((law.normalizer() - g).abs() <= 1e-10 * g, "gamma={gamma_}");
        let b = half_moment(2.0 * gamma_, k) / half_moment(0.0, k);
        let m = stationary_moments(gamma_).unwrap();
        assert!((m.b - b).abs() <= 1e-8, "gamma={gamma_}: {} vs {b}", m.b);
        if gamma_ >= 1.0 {
            let a = half_moment(2.0 * gamma_ - 2.0, k) / half_moment(0.0, k);
            assert!((m.a.unwrap() - a).abs() <= 1e-8);
        }
    }
}

#[test]
fn unit_law_cdf_matches_quadrature() {
    for gamma_ in [0.3, 2.0, 3.0] {
        let law = UnitLaw::new(gamma_).unwrap();
        for y in [-2.0f64, -0.7, -0.1, 0.4, 1.3] {
            // Mass between 0 and y, by substitution y = u^2 on each side of the kink.
            let s: f64 = if y < 0.0 { -1.0 } else { 1.0 };
            let part = simpson(|u| 2.0 * u * law.density(s * u * u), 0.0, y.abs().sqrt(), 4000);
            let expected = 0.5 + s * part;
            assert!((law.cdf(y) - expected).abs() <= 1e-10, "gamma={gamma_} y={y}");
            assert!((law.quantile(expected).unwrap() - y).abs() <= 1e-8);
        }
    }
}

#[test]
fn laplace_case_closed_form() {
    let law = UnitLaw::new(0.0).unwrap();
    for y in [-3.0f64, -0.5, 0.0, 0.25, 2.0] {
        let cdf = if y < 0.0 { 0.5 * (2.0 * y).exp() } else { 1.0 - 0.5 * (-2.0 * y).exp() };
        assert!((law.cdf(y) - cdf).abs() <= 1e-13);
        assert!((law.density(y) - (-2.0 * y.abs()).exp()).abs() <= 1e-13);
    }
}

#[test]
fn gaussian_case_density() {
    let m = make_family(1.0, 0.8, ThetaBox::new(-2.0, 2.0, 0.5, 3.0).unwrap()).unwrap();
    let th = Theta::new(0.3, 1.7);
    let var = 0.64 / (2.0 * 1.7);
    for x in [-1.0f64, 0.0, 0.3, 0.9, 2.0] {
        let g = (-(x - 0.3) * (x - 0.3) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
        assert!((m.invariant_density(&th, x) - g).abs() <= 1e-12);
    }
}

/// Ornstein-Uhlenbeck joint MLE as the least-squares solution for
/// `S(x) = a - b x`: `theta = (a / b, b)`.
#[test]
fn ou_mle_matches_linear_regression() {
    let model = make_family(1.0, 1.0, ThetaBox::new(-2.0, 2.0, 0.5, 3.0).unwrap()).unwrap();
    let truth = Theta::new(0.4, 1.3);
    for seed in 0..5 {
        let mut rng = RngStream::new(seed, 9).rng();
        let traj = simulate_path(|x| model.trend(&truth, x), |_| 1.0, 0.4, 200.0, 0.01, &mut rng).unwrap();
        let v = traj.values();
        let dt = traj.dt();
        let (mut s1, mut sx, mut sxx, mut sd, mut sxd) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for w in v.windows(2) {
            let (x, d) = (w[0], w[1] - w[0]);
            s1 += dt;
            sx += x * dt;
            sxx += x * x * dt;
            sd += d;
            sxd += x * d;
        }
        // Maximize a*sd - b*sxd - (a^2 s1 - 2ab sx + b^2 sxx)/2.
        let det = s1 * sxx - sx * sx;
        let a = (sd * sxx - sxd * sx) / det;
        let b = (sd * sx - sxd * s1) / det;
        let est = mle(&traj, &model).unwrap().theta;
        assert!((est.beta - b).abs() <= 1e-6, "seed {seed}: {} vs {b}", est.beta);
        assert!((est.alpha - a / b).abs() <= 1e-5, "seed {seed}: {} vs {}", est.alpha, a / b);
    }
}

/// `P(sup_{[0,1]} |W| <= x)` by its alternating series.
fn sup_abs_cdf(x: f64) -> f64 {
    (0..60)
        .map(|n| {
            let m = (2 * n + 1) as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign / m * (-(m * m) * PI * PI / (8.0 * x * x)).exp()
        })
        .sum::<f64>()
        * 4.0
        / PI
}

#[test]
fn sup_abs_w_sampler_matches_series() {
    let law: LawId = "sup_abs_w".parse().unwrap();
    let sampler = LimitSampler::with_grid(&law, SamplerGrid::Walk { n_steps: 4000 }, None).unwrap();
    let mut draws = sampler.sample_many(4000, 11).unwrap();
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let d = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = sup_abs_cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    // 1% Kolmogorov critical value plus a margin for the walk's downward bias.
    assert!(d <= 1.63 / n.sqrt() + 0.02, "KS distance {d}");
}

#[test]
fn int_w2_sampler_moments() {
    let law: LawId = "int_w2".parse().unwrap();
    let draws = LimitSampler::new(&law, None).unwrap().sample_many(20_000, 5).unwrap();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // The mean has variance 1/(3n).
    assert!((mean - 0.5).abs() <= 3.0 * (1.0 / (3.0 * n)).sqrt(), "{mean}");
    assert!((var - 1.0 / 3.0).abs() <= 0.03, "{var}");
}
