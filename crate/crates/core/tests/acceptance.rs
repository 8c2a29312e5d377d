//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use gamma_dde::analysis::moment_poly::DEFAULT_IMAG_TOL;
use gamma_dde::analysis::{
    dominant_eigenvalue, estimate_order, fcrk_convergence, fm_polynomial, gm_checks, growth_rate, integer_jump,
    linear_test_reference, logistic_test_reference, mgf_error_order, ErrorNorm,
};
use gamma_dde::approximations::{approximate, fixed_hypoexp, smoothed_hypoexp};
use gamma_dde::epi::{self, mle_fit, serial_density, synthetic_data, FitBounds, SirParams};
use gamma_dde::ode::{OdeConfig, Tolerances};
use gamma_dde::optim::NelderMeadOptions;
use gamma_dde::problems::{
    gamma_dde, linear_chain, linear_dde, linear_rhs, logistic_chain, logistic_dde, EigenProblem, LOGISTIC_TAU,
};
use gamma_dde::quadrature::{integrate_half_line, open_simpson, KernelTransform, DEFAULT_XI};
use gamma_dde::{fcrk4_solve, ApproxConfig, GammaKernel, HistoryFunction, InitMode, QuadConfig, Result, Rng, Variant};
use rand::Rng as _;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

const ORDER_BAND: (f64, f64) = (3.7, 4.3);

fn in_band(slope: f64) -> bool {
    (ORDER_BAND.0..=ORDER_BAND.1).contains(&slope)
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let steps = [0.1, 0.05, 0.025, 0.0125];
    let mut pass = true;
    let mut detail = Vec::new();
    for j in [1.0, 4.0, 7.0] {
        let problem = linear_dde(j, 1.0, HistoryFunction::Constant(1.0), 10.0)?;
        let r = fcrk_convergence(&problem, &steps, DEFAULT_XI, ErrorNorm::Discrete, |t| linear_test_reference(j, t))?;
        pass &= in_band(r.slope);
        detail.push(format!("j={j}: slope {:.3}", r.slope));
    }
    let elapsed = start.elapsed();
    pass &= within(Duration::from_secs(60), elapsed);
    outcome(pass, format!("{} ({elapsed:.1?})", detail.join(", ")))
}

fn criterion_2() -> Result<Outcome> {
    let start = Instant::now();
    let steps = [0.1, 0.05, 0.025, 0.0125];
    let mut pass = true;
    let mut detail = Vec::new();
    for j in [3.0, 8.0, 14.0] {
        let problem = logistic_dde(j, LOGISTIC_TAU, HistoryFunction::Constant(1.0), 10.0)?;
        let r = fcrk_convergence(&problem, &steps, DEFAULT_XI, ErrorNorm::Discrete, |t| logistic_test_reference(j, t))?;
        pass &= in_band(r.slope);
        detail.push(format!("j={j}: slope {:.3}", r.slope));
    }
    let elapsed = start.elapsed();
    pass &= within(Duration::from_secs(120), elapsed);
    outcome(pass, format!("{} ({elapsed:.1?})", detail.join(", ")))
}

fn criterion_3() -> Result<Outcome> {
    let steps = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, (tau, j, beta)) in [(4.65, 2.15, 0.5), (3.76, 3.70, 0.35), (4.25, 2.25, 0.71)].into_iter().enumerate() {
        let e = EigenProblem::new(tau, j, beta)?;
        let r = fcrk_convergence(&e.dde(10.0)?, &steps, DEFAULT_XI, ErrorNorm::Discrete, |t| {
            Ok(t.iter().map(|&s| e.exact(s)).collect())
        })?;
        pass &= in_band(r.slope);
        detail.push(format!("({tau}, {j}, {beta}): slope {:.3}", r.slope));
        if k == 1 {
            let floor = r.points.iter().filter(|p| p.0 < 1e-2).map(|p| p.1).fold(0.0, f64::max);
            pass &= floor < 1e-12;
            detail.push(format!("max error for h < 1e-2: {floor:.2e}"));
        }
    }
    outcome(pass, detail.join(", "))
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = Rng::seeded(4);
    let cfg = ApproxConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let j = rng.random_range(1.01..30.0);
        let tau = rng.random_range(0.1..10.0);
        for p in [fixed_hypoexp(j, tau)?, smoothed_hypoexp(j, tau)?] {
            worst = worst.max((p.mean() / tau - 1.0).abs()).max((p.variance() / (tau * tau / j) - 1.0).abs());
        }
    }
    let mut exact = true;
    for j in 2..=20 {
        let tau = rng.random_range(0.1..10.0);
        for v in Variant::ALL {
            let r = j as f64 / tau;
            exact &= approximate(v, j as f64, tau, &cfg)?.rates().iter().all(|&x| x == r);
        }
    }
    outcome(worst < 1e-12 && exact, format!("worst relative moment error {worst:.2e}, integer shapes exact: {exact}"))
}

fn criterion_5() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for j in [1.5, 2.5, 3.3, 6.7] {
        for (v, target) in [(Variant::Erlang, 2.0), (Variant::Fixed, 3.0), (Variant::Smoothed, 3.0)] {
            match mgf_error_order(j, 1.0, v)? {
                Some(s) => {
                    pass &= (s - target).abs() <= 0.2;
                    detail.push(format!("{}({j}) {s:.3}", v.name()));
                }
                None => pass = false,
            }
        }
    }
    for j in [2.0, 3.0, 5.0] {
        for v in [Variant::Erlang, Variant::Fixed, Variant::Smoothed] {
            pass &= mgf_error_order(j, 1.0, v)?.is_none();
        }
    }
    let elapsed = start.elapsed();
    pass &= within(Duration::from_secs(1), elapsed);
    outcome(pass, format!("{} ({elapsed:.1?})", detail.join(", ")))
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_6() -> Result<Outcome> {
    let (t_end, h) = (10.0, 0.02);
    let tol = OdeConfig::adaptive(Tolerances::uniform(1e-12));
    let cfg = ApproxConfig::default();
    let mut pass = true;
    let mut detail = Vec::new();
    let cases = [(true, 2.57), (true, 3.48), (true, 6.5), (false, 2.82), (false, 4.72), (false, 6.45)];
    for (linear, j) in cases {
        let (tau, history) = if linear {
            (1.0, HistoryFunction::Exponential { c: 0.1, rho: 0.1 })
        } else {
            (LOGISTIC_TAU, HistoryFunction::Constant(0.5))
        };
        let dde = if linear {
            linear_dde(j, tau, history.clone(), t_end)?
        } else {
            logistic_dde(j, tau, history.clone(), t_end)?
        };
        let sol = fcrk4_solve(&dde, h, &QuadConfig::for_step(h))?;
        let times = sol.times();
        let x = sol.mesh_component(0);
        let dev = |v: Variant| -> Result<f64> {
            let p = approximate(v, j, tau, &cfg)?;
            let chain = if linear {
                linear_chain(p, history.clone(), t_end, InitMode::KernelConsistent)?
            } else {
                logistic_chain(p, history.clone(), t_end, InitMode::KernelConsistent)?
            };
            let y = chain.solve(&times[1..], &tol)?.component(0);
            Ok(max_deviation(&y, &x[1..]).max((chain.initial[0] - x[0]).abs()))
        };
        let (erlang, fixed, smoothed) = (dev(Variant::Erlang)?, dev(Variant::Fixed)?, dev(Variant::Smoothed)?);
        let ok = fixed < erlang && smoothed < erlang && 5.0 * fixed <= erlang && 5.0 * smoothed <= erlang;
        pass &= ok;
        detail.push(format!(
            "{} j={j}: erlang/fixed {:.2}, erlang/smoothed {:.2}{}",
            if linear { "linear" } else { "nonlinear" },
            erlang / fixed,
            erlang / smoothed,
            if ok { "" } else { " <-" }
        ));
    }
    outcome(pass, detail.join(", "))
}

fn criterion_7() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = ApproxConfig::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (j, alpha, beta) in [(2.5, 0.89, -1.15), (4.495, 0.825, -1.175)] {
        let h = 0.1;
        let dde = gamma_dde(linear_rhs(alpha, beta), j, 1.0, HistoryFunction::Constant(1.0), 400.0)?;
        let sol = fcrk4_solve(&dde, h, &QuadConfig::for_step(h))?;
        let g = growth_rate(&sol.times(), &sol.mesh_component(0))?;
        let hyp = dominant_eigenvalue(alpha, beta, &approximate(Variant::Fixed, j, 1.0, &cfg)?)?.re;
        let erl = dominant_eigenvalue(alpha, beta, &approximate(Variant::Erlang, j, 1.0, &cfg)?)?.re;
        pass &= g.signum() == hyp.signum() && g.signum() != erl.signum();
        detail.push(format!("j={j}: dde {g:+.5}, hypoexp {hyp:+.5}, erlang {erl:+.5}"));
    }
    let elapsed = start.elapsed();
    pass &= within(Duration::from_secs(60), elapsed);
    outcome(pass, format!("{} ({elapsed:.1?})", detail.join(", ")))
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = Rng::seeded(8);
    let mut pass = true;
    let mut checked = 0;
    for _ in 0..50 {
        let fj: f64 = rng.random_range(1e-6..1.0 - 1e-6);
        for m in 1..=8 {
            let roots = fm_polynomial(m, fj)?.real_roots(DEFAULT_IMAG_TOL)?;
            pass &= (1..=2).contains(&roots.len()) && roots.iter().all(|&r| r > 0.0);
            pass &= gm_checks(m, fj)?.passed();
            if m == 2 {
                // normalized stage means a/ν, a/μ of the smoothed chain with {j} = fj
                let (j, tau) = (2.0 + fj, 1.7);
                let s = smoothed_hypoexp(j, tau)?;
                let a = j / tau;
                let mut means = [a / s.nu, a / s.mu];
                means.sort_by(f64::total_cmp);
                pass &= roots.len() == 2 && (roots[0] - means[0]).abs() < 1e-10 && (roots[1] - means[1]).abs() < 1e-10;
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    pass &= within(Duration::from_secs(5), elapsed);
    outcome(pass, format!("{checked} (m, {{j}}) pairs ({elapsed:.1?})"))
}

fn criterion_9() -> Result<Outcome> {
    let mut rng = Rng::seeded(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let j = rng.random_range(1.5..30.0);
        let a = rng.random_range(0.1..10.0);
        let tr = KernelTransform::new(GammaKernel::new(j, a)?);
        let mass: f64 = tr.nodes(f64::INFINITY, 16).iter().map(|n| n.weight).sum();
        worst = worst.max((mass - 1.0).abs());
    }
    let points: Vec<(f64, f64)> = [4, 8, 16, 32]
        .iter()
        .map(|&p| (1.0 / p as f64, (open_simpson(|x| x.powi(4), 0.0, 1.0, p) - 0.2).abs()))
        .collect();
    let slope = estimate_order(&points)?.slope;
    outcome(
        worst < 1e-4 && (slope - 4.0).abs() <= 0.1,
        format!("worst normalization error {worst:.2e}, open Simpson slope {slope:.4}"),
    )
}

fn criterion_10() -> Result<Outcome> {
    let start = Instant::now();
    let truth = SirParams::new(0.5, 5.0, 4.0, 1e-3);

    let mut mass: f64 = 0.0;
    for (variant, j) in [(Variant::Fixed, 4.0), (Variant::Fixed, 2.6), (Variant::SmoothedRegularized, 3.4)] {
        let mut p = truth.clone();
        (p.variant, p.j) = (variant, j);
        let chain = epi::build_sir_chain(&p)?;
        let times: Vec<f64> = (1..=120).map(f64::from).collect();
        for s in chain.solve(&times, 1e-12)?.states {
            mass = mass.max((s.iter().sum::<f64>() - 1.0).abs());
        }
    }

    let mut rng = Rng::seeded(10);
    let mut norm: f64 = 0.0;
    for _ in 0..20 {
        let (j, tau) = (rng.random_range(1.2..15.0), rng.random_range(0.5..10.0));
        norm = norm.max((integrate_half_line(|t| serial_density(j, tau, t).unwrap(), 1e-12) - 1.0).abs());
    }

    let data = synthetic_data(&truth, 100, &mut Rng::seeded(1))?;
    let mut init = truth.clone();
    (init.beta, init.tau, init.j, init.eps) = (0.4, 4.0, 3.0, 2e-3);
    let fit = mle_fit(&data, &init, &FitBounds::default(), &NelderMeadOptions::default())?;
    let recovered = (fit.beta / truth.beta - 1.0).abs() < 0.1
        && (fit.tau / truth.tau - 1.0).abs() < 0.1
        && (fit.j - truth.j).abs() <= 1.0;

    let elapsed = start.elapsed();
    let pass = mass < 1e-10 && norm < 1e-8 && recovered && within(Duration::from_secs(180), elapsed);
    outcome(
        pass,
        format!(
            "mass drift {mass:.1e}, serial normalization {norm:.1e}, fit β {:.4} τ {:.4} j {:.3} ({elapsed:.1?})",
            fit.beta, fit.tau, fit.j
        ),
    )
}

fn criterion_11() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for j0 in [2.0, 3.0, 4.0] {
        let (fixed, smoothed) = integer_jump(j0, 1.0, 4.0, 1e-6)?;
        pass &= smoothed <= fixed;
        detail.push(format!("j0={j0}: fixed {fixed:.2e}, smoothed {smoothed:.2e}"));
    }
    outcome(pass, detail.join(", "))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("FCRK order, linear test", criterion_1),
        ("FCRK order, nonlinear test", criterion_2),
        ("eigenfunction convergence and floor", criterion_3),
        ("moment matching", criterion_4),
        ("MGF error orders", criterion_5),
        ("approximation dominance", criterion_6),
        ("stability divergence", criterion_7),
        ("moment polynomial properties", criterion_8),
        ("quadrature", criterion_9),
        ("epi pipeline", criterion_10),
        ("survival jump", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("criterion {:>2} {}: {name}: {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
