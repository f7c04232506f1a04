//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p ergofit --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ergofit::estimators::{edf, local_time_density};
use ergofit::harness::{self, StudyConfig, StudyReport};
use ergofit::limits::{default_param_grid, LawId, LimitSampler, ParamFieldPlan, SamplerGrid};
use ergofit::model::{make_family, stationary_moments, Theta, ThetaBox};
use ergofit::simulate::{simulate_stationary, wiener_increments, RngStream};
use statrs::distribution::{ContinuousCDF, Normal};

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Check {
            pass,
            detail: detail.into(),
        }
    }
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

fn study(json: &str) -> (StudyConfig, StudyReport) {
    let cfg = StudyConfig::from_json(json).expect("config parses");
    let report = harness::run(&cfg).expect("study runs");
    (cfg, report)
}

fn analytic_laws() -> Check {
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.3, 1.0, 2.0, 3.0] {
        for sigma in [1.0, 0.7] {
            let m = make_family(gamma, sigma, ThetaBox::new(-2.0, 2.0, 0.5, 3.0).unwrap()).unwrap();
            for alpha in [-1.5, 0.0, 1.2] {
                for beta in [0.6, 1.0, 2.5] {
                    let th = Theta::new(alpha, beta);
                    // Substitution x = alpha +/- u^2 removes the kink at alpha.
                    let side = |s: f64| {
                        simpson(|u| 2.0 * u * m.invariant_density(&th, alpha + s * u * u), 0.0, 6.0, 20_000)
                    };
                    worst = worst.max((side(1.0) + side(-1.0) - 1.0).abs());
                }
            }
        }
    }
    let mut gauss: f64 = 0.0;
    for sigma in [1.0, 0.7] {
        let m = make_family(1.0, sigma, ThetaBox::new(-2.0, 2.0, 0.5, 3.0).unwrap()).unwrap();
        for (alpha, beta) in [(0.0, 1.0), (0.5, 2.0), (-1.0, 0.6)] {
            let var: f64 = sigma * sigma / (2.0 * beta);
            for i in 0..=200 {
                let x = alpha - 4.0 + 0.04 * i as f64;
                let g = (-(x - alpha) * (x - alpha) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
                gauss = gauss.max((m.invariant_density(&Theta::new(alpha, beta), x) - g).abs());
            }
        }
    }
    let mom = stationary_moments(1.0).unwrap();
    let mom_err = (mom.a.unwrap() - 1.0).abs().max((mom.b - 0.5).abs());
    Check::new(
        worst <= 1e-8 && gauss <= 1e-12 && mom_err <= 1e-8,
        format!("max|int f - 1| = {worst:.2e}, max gaussian gap = {gauss:.2e}, moments gap = {mom_err:.2e}"),
    )
}

fn estimator_representations() -> Check {
    let m = make_family(1.0, 1.0, ThetaBox::new(-2.0, 2.0, 0.5, 3.0).unwrap()).unwrap();
    let th = Theta::new(0.0, 1.0);
    let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    let drift = m.trend_fn(th);
    let grid: Vec<f64> = (0..=600).map(|i| -3.0 + 0.01 * i as f64).collect();
    let (mut edf_ok, mut dens_ok, mut worst_identity, mut worst_f0): (usize, usize, f64, f64) = (0, 0, 0.0, 0.0);
    for r in 0..20 {
        let traj = simulate_stationary(&m.at(th), |x| drift(x), |_| 1.0, 1000.0, 0.01, RngStream::new(2024, r)).unwrap();
        let f_hat = edf(&traj, &grid);
        let sup = grid.iter().zip(&f_hat).map(|(&x, f)| (f - normal.cdf(x)).abs()).fold(0.0, f64::max);
        edf_ok += usize::from(sup <= 0.05);
        let f0 = local_time_density(&traj, &[0.0], |_| 1.0)[0];
        let gap = (f0 - 1.0 / PI.sqrt()).abs();
        worst_f0 = worst_f0.max(gap);
        dens_ok += usize::from(gap <= 0.07);

        let lo = traj.values().iter().cloned().fold(f64::INFINITY, f64::min) - 0.05;
        let hi = traj.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.05;
        let h = 0.005;
        let fine: Vec<f64> = (0..=((hi - lo) / h).ceil() as usize).map(|i| lo + h * i as f64).collect();
        let dens = local_time_density(&traj, &fine, |_| 1.0);
        let cum = edf(&traj, &fine);
        let mut integral = 0.0;
        for j in 1..fine.len() {
            integral += 0.5 * h * (dens[j - 1] + dens[j]);
            worst_identity = worst_identity.max((integral - cum[j]).abs());
        }
    }
    Check::new(
        edf_ok >= 18 && dens_ok >= 18 && worst_identity <= 0.02,
        format!(
            "sup|F_hat - F| <= 0.05 in {edf_ok}/20, |f_hat(0) - 1/sqrt(pi)| <= 0.07 in {dens_ok}/20 (worst {worst_f0:.3}), cumulative identity gap {worst_identity:.4}"
        ),
    )
}

fn limit_moments() -> Check {
    let draws = LimitSampler::new(&"int_w2".parse::<LawId>().unwrap(), None)
        .unwrap()
        .sample_many(100_000, 77)
        .unwrap();
    let (mean, var) = mean_var(&draws);
    let mut ok = (0.49..=0.51).contains(&mean) && (0.31..=0.35).contains(&var);
    let mut detail = format!("int_w2 mean {mean:.4} var {var:.4}");

    // b = E|xi|^(2 gamma): 1 for gamma = 0 and 1/2 for the N(0, 1/2) law at gamma = 1.
    for (gamma, b) in [(0.0, 1.0), (1.0, 0.5)] {
        let grid = default_param_grid(gamma).unwrap();
        let SamplerGrid::Field { half_width, dz, .. } = grid else { unreachable!() };
        let plan = ParamFieldPlan::new(gamma, grid).unwrap();
        let n = 20_000;
        let mut psi = Vec::with_capacity(n);
        let mut cross = Vec::with_capacity(n);
        for i in 0..n as u64 {
            let mut rng = RngStream::new(91, i).rng();
            let field = plan.field(&wiener_increments(half_width, dz, &mut rng).unwrap().increments).unwrap();
            psi.push(field.psi);
            cross.push(field.pi * field.psi);
        }
        let second: Vec<f64> = psi.iter().map(|p| p * p).collect();
        let (v, v_var) = mean_var(&second);
        let se = (v_var / n as f64).sqrt();
        let pass = (v - b).abs() <= 3.0 * se;
        ok &= pass;
        detail += &format!("; gamma={gamma}: var(Psi) {v:.4} vs b={b} (se {se:.4})");
        if gamma == 1.0 {
            let (c, c_var) = mean_var(&cross);
            let se = (c_var / n as f64).sqrt();
            ok &= c.abs() <= 3.0 * se;
            detail += &format!(", E[Pi Psi] {c:.4} (se {se:.4})");
        }
    }
    Check::new(ok, detail)
}

fn rate(report: &StudyReport, horizon: f64) -> f64 {
    report.summary.rates.iter().find(|r| r.horizon == horizon).expect("rate row").rate
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Check)> = Vec::new();
    let mut reruns: Vec<(&str, StudyConfig, String)> = Vec::new();

    results.push((1, "analytic law checks", analytic_laws()));
    results.push((2, "estimator representations", estimator_representations()));
    results.push((3, "limit-sampler moments", limit_moments()));

    // 4. Size.
    let (cfg_adf, adf) = study(
        r#"{"version": 1, "study": "size", "model": "simple:ou", "T": 500, "n_replicates": 500,
            "stats": ["ADF:CvM"], "epsilons": [0.1], "seed": 41}"#,
    );
    let (cfg_cvm, cvm) = study(
        r#"{"version": 1, "study": "size", "model": "family:gamma=1", "theta": {"alpha": 0.5, "beta": 1.0},
            "T": 500, "n_replicates": 300, "stats": ["ParamEDF:CvM"], "epsilons": [0.1], "seed": 42}"#,
    );
    let (r_adf, r_cvm) = (rate(&adf, 500.0), rate(&cvm, 500.0));
    results.push((
        4,
        "size",
        Check::new(
            (r_adf - 0.10).abs() <= 0.04 && (r_cvm - 0.10).abs() <= 0.05,
            format!("ADF rate {r_adf:.3} (0.10 +/- 0.04), ParamEDF CvM rate {r_cvm:.3} (0.10 +/- 0.05)"),
        ),
    ));
    reruns.push(("size ADF", cfg_adf, adf.rows_csv()));
    reruns.push(("size ParamEDF", cfg_cvm, cvm.rows_csv()));

    // 5. Parameter-freeness with a negative control.
    let (cfg_pf, pf) = study(
        r#"{"version": 1, "study": "paramfree", "T": 500, "n_replicates": 300, "stats": ["ParamEDF:CvM"], "seed": 43,
            "arms": [{"model": "family:gamma=1", "theta": {"alpha": 0.0, "beta": 1.0}},
                     {"model": "family:gamma=1", "theta": {"alpha": 1.5, "beta": 2.5}}]}"#,
    );
    let (cfg_nc, nc) = study(
        r#"{"version": 1, "study": "paramfree", "T": 500, "n_replicates": 300, "stats": ["ParamEDF:CvM"], "seed": 44,
            "arms": [{"model": "family:gamma=1", "theta": {"alpha": 0.0, "beta": 1.0}},
                     {"model": "family:gamma=0", "theta": {"alpha": 0.0, "beta": 1.0}}]}"#,
    );
    let (same, diff) = (&pf.summary.ks[0], &nc.summary.ks[0]);
    results.push((
        5,
        "parameter-freeness",
        Check::new(
            !same.exceeds && diff.exceeds,
            format!(
                "KS {:.4} vs critical {:.4} across theta; negative control KS {:.4} vs {:.4}",
                same.distance, same.critical_value, diff.distance, diff.critical_value
            ),
        ),
    ));
    reruns.push(("paramfree", cfg_pf, pf.rows_csv()));
    reruns.push(("paramfree control", cfg_nc, nc.rows_csv()));

    // 6. Limit match.
    let (cfg_lm_s, lm_s) = study(
        r#"{"version": 1, "study": "limitmatch", "model": "simple:ou", "T": 500, "n_replicates": 500,
            "stats": ["ADF:CvM", "KSIncrement"], "seed": 45}"#,
    );
    let (cfg_lm_p, lm_p) = study(
        r#"{"version": 1, "study": "limitmatch", "model": "family:gamma=1", "theta": {"alpha": 0.5, "beta": 1.0},
            "T": 500, "n_replicates": 300, "stats": ["ParamEDF:CvM"], "seed": 46}"#,
    );
    let ks: Vec<_> = lm_s.summary.ks.iter().chain(&lm_p.summary.ks).collect();
    results.push((
        6,
        "limit match",
        Check::new(
            ks.iter().all(|k| k.distance <= 0.12),
            ks.iter()
                .map(|k| format!("{} KS {:.4}", k.stat, k.distance))
                .collect::<Vec<_>>()
                .join(", ")
                + " (bound 0.12)",
        ),
    ));
    reruns.push(("limitmatch simple", cfg_lm_s, lm_s.rows_csv()));
    reruns.push(("limitmatch family", cfg_lm_p, lm_p.rows_csv()));

    // 7. Consistency.
    let (cfg_pw, pw) = study(
        r#"{"version": 1, "study": "power", "model": "simple:ou", "truth": {"model": "simple:cubic"},
            "T": 1000, "n_replicates": 200, "stats": ["ADF:CvM"], "epsilons": [0.05], "seed": 47}"#,
    );
    let (cfg_ld, ld) = study(
        r#"{"version": 1, "study": "power", "model": "family:gamma=1", "truth": {"model": "simple:nonlinear-demo"},
            "T": 1000, "T_ladder": [125, 250, 500, 1000], "n_replicates": 200, "stats": ["ParamEDF:CvM"],
            "epsilons": [0.05], "seed": 48}"#,
    );
    let power = rate(&pw, 1000.0);
    let ladder: Vec<f64> = [125.0, 250.0, 500.0, 1000.0].iter().map(|&t| rate(&ld, t)).collect();
    let monotone = ladder.windows(2).all(|w| w[1] >= w[0]) && ladder[3] > ladder[0];
    results.push((
        7,
        "consistency",
        Check::new(
            power >= 0.9 && monotone,
            format!("ADF power vs -x^3 {power:.3} (>= 0.9); composite ladder T=125..1000 {ladder:?}"),
        ),
    ));
    reruns.push(("power ADF", cfg_pw, pw.rows_csv()));
    reruns.push(("power ladder", cfg_ld, ld.rows_csv()));

    // 8. Determinism.
    let mut differing = Vec::new();
    for (name, cfg, rows) in &reruns {
        if harness::run(cfg).expect("rerun").rows_csv() != *rows {
            differing.push(*name);
        }
    }
    results.push((
        8,
        "determinism",
        Check::new(
            differing.is_empty(),
            if differing.is_empty() {
                format!("{} studies reproduce rows.csv bitwise", reruns.len())
            } else {
                format!("rows differ for {differing:?}")
            },
        ),
    ));

    let mut failed = 0;
    for (id, name, check) in &results {
        let tag = if check.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name}: {}", check.detail);
        failed += usize::from(!check.pass);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
