//! Command-line front end.  Every subcommand writes CSV or JSON to standard
//! output (or `--output`); diagnostics go to standard error.
//!
//! Options can also come from a JSON object passed with `--config`, whose keys
//! are the snake_case option names of the subcommand; flags override the file.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::moment_poly::DEFAULT_IMAG_TOL;
use crate::analysis::{
    dominant_eigenvalue, estimate_order, fcrk_convergence, fm_polynomial, gm_checks, growth_rate, integer_jump,
    linear_test_reference, logistic_test_reference, mgf_error_order, survival_compare, ErrorNorm,
};
use crate::approximations::{approximate, ApproxConfig, Variant};
use crate::chain::{ChainOdeProblem, HistoryFunction, InitMode, ScalarRhs};
use crate::distributions::{GammaKernel, Rng};
use crate::epi::{self, EpiData, FitBounds, SirParams};
use crate::error::{invalid, Error, Result};
use crate::fcrk::{fcrk4_solve, DdeProblem};
use crate::ode::{OdeConfig, Tolerances};
use crate::optim::NelderMeadOptions;
use crate::problems::{linear_rhs, logistic_rhs, EigenProblem, LINEAR_ALPHA, LINEAR_BETA, LOGISTIC_K, LOGISTIC_TAU};
use crate::quadrature::{QuadConfig, DEFAULT_XI};

#[derive(Debug, Parser)]
#[command(
    name = "gamma-dde",
    version,
    about = "Solvers and approximations for gamma distributed delay differential equations"
)]
pub struct Cli {
    /// JSON file with default option values for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with the FCRK method or a chain approximation.
    Solve(SolveArgs),
    /// Observed order of the FCRK method over a list of step sizes.
    Convergence(ConvergenceArgs),
    /// Gamma DDE against its fixed, smoothed and Erlang chain approximations.
    Compare(CompareArgs),
    /// Growth rate of the gamma DDE against the chains' dominant eigenvalues.
    Stability(StabilityArgs),
    /// Order of the MGF error of each approximation.
    MgfOrder(MgfOrderArgs),
    /// Gamma survival against its hypoexponential approximations.
    Survival(SurvivalArgs),
    /// Roots of the moment-matching polynomial and the g_m identities.
    MomentPoly(MomentPolyArgs),
    /// SIR model with a hypoexponential infectious period.
    #[command(subcommand)]
    Epi(EpiCommand),
}

#[derive(Debug, Subcommand)]
pub enum EpiCommand {
    /// Write synthetic cases.csv and serial.csv.
    Simulate(EpiSimulateArgs),
    /// Log-likelihood of data files at given parameters.
    Loglik(EpiLoglikArgs),
    /// Maximum-likelihood fit of data files.
    Fit(EpiFitArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveArgs {
    /// linear, nonlinear, linear_gamma or custom-linear.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub j: Option<f64>,
    /// Mean delay.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Coefficient of X for custom-linear.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Coefficient of the delayed term (custom-linear, linear_gamma).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// `c` (constant), `exp:c:rho` (c e^{rho s}) or `point:m`.
    #[arg(long, allow_hyphen_values = true)]
    pub history: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// fcrk4 or chain.
    #[arg(long)]
    pub method: Option<String>,
    /// Step size; also the output stride.
    #[arg(long)]
    pub h: Option<f64>,
    /// Quadrature coupling constant.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Chain variant: erlang, fixed, smoothed or smoothed_regularized.
    #[arg(long)]
    pub variant: Option<String>,
    /// Chain solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Chain initial data: paper_literal or kernel_consistent.
    #[arg(long)]
    pub init_mode: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceArgs {
    /// linear, nonlinear or linear_gamma.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub j: Option<f64>,
    /// Mean delay (linear_gamma only).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Delayed-term coefficient (linear_gamma only).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Comma separated step sizes.
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Skip the solver and use errors `1e-2 h^p` with this `p`.
    #[arg(long)]
    pub synthetic_order: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    /// linear or nonlinear.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub history: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgfOrderArgs {
    /// Comma separated shapes.
    #[arg(long, value_delimiter = ',')]
    pub j: Option<Vec<f64>>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivalArgs {
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comma separated integers; switches to the jump table at time `--t`.
    #[arg(long, value_delimiter = ',')]
    pub jumps: Option<Vec<f64>>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentPolyArgs {
    #[arg(long)]
    pub m: Option<usize>,
    /// Fractional part of j, in (0, 1).
    #[arg(long)]
    pub fj: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpiModelArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Population scale M.
    #[arg(long)]
    pub population: Option<f64>,
    /// Number of daily observations.
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpiSimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: EpiModelArgs,
    /// Number of serial intervals.
    #[arg(long)]
    pub serial_count: Option<usize>,
    /// Directory receiving cases.csv and serial.csv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpiLoglikArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: EpiModelArgs,
    #[arg(long)]
    pub cases: Option<PathBuf>,
    #[arg(long)]
    pub serial: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpiFitArgs {
    /// Starting point of the search.
    #[command(flatten)]
    #[serde(flatten)]
    pub model: EpiModelArgs,
    #[arg(long)]
    pub cases: Option<PathBuf>,
    #[arg(long)]
    pub serial: Option<PathBuf>,
    #[arg(long)]
    pub j_min: Option<f64>,
    #[arg(long)]
    pub j_max: Option<f64>,
    #[arg(long)]
    pub max_evals: Option<usize>,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 3 for numerical failures, 2 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => Some(serde_json::from_str::<Value>(&fs::read_to_string(path)?)?),
        None => None,
    };
    let out = match &cli.command {
        Command::Solve(a) => cmd_solve(&merge(a, file.as_ref())?)?,
        Command::Convergence(a) => cmd_convergence(&merge(a, file.as_ref())?)?,
        Command::Compare(a) => cmd_compare(&merge(a, file.as_ref())?)?,
        Command::Stability(a) => cmd_stability(&merge(a, file.as_ref())?)?,
        Command::MgfOrder(a) => cmd_mgf_order(&merge(a, file.as_ref())?)?,
        Command::Survival(a) => cmd_survival(&merge(a, file.as_ref())?)?,
        Command::MomentPoly(a) => cmd_moment_poly(&merge(a, file.as_ref())?)?,
        Command::Epi(EpiCommand::Simulate(a)) => cmd_epi_simulate(&merge(a, file.as_ref())?, cli.seed)?,
        Command::Epi(EpiCommand::Loglik(a)) => cmd_epi_loglik(&merge(a, file.as_ref())?)?,
        Command::Epi(EpiCommand::Fit(a)) => cmd_epi_fit(&merge(a, file.as_ref())?)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, out)?,
        None => io::stdout().lock().write_all(out.as_bytes())?,
    }
    Ok(())
}

/// Overlays the flags that were given on top of the config file values.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> Result<T> {
    let mut base = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return invalid("the config file must hold a JSON object"),
        None => Map::new(),
    };
    if let Value::Object(m) = serde_json::to_value(flags)? {
        base.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_line(fields: &[f64]) -> String {
    let mut s = fields.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn json_string(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        invalid(format!("--{name} must be positive and finite (got {v})"))
    }
}

/// Parses `c`, `const:c`, `exp:c:rho` or `point:m`.
pub fn parse_history(s: &str) -> Result<HistoryFunction> {
    let bad = || Error::InvalidParameter(format!("cannot parse history '{s}' (expected c, exp:c:rho or point:m)"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let f = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
    match parts.as_slice() {
        [_] => Ok(HistoryFunction::Constant(f(0)?)),
        ["const" | "constant", _] => Ok(HistoryFunction::Constant(f(1)?)),
        ["exp", _, _] => Ok(HistoryFunction::Exponential { c: f(1)?, rho: f(2)? }),
        ["point", _] => Ok(HistoryFunction::PointMass(f(1)?)),
        _ => Err(bad()),
    }
}

struct ProblemSpec {
    rhs: ScalarRhs,
    j: f64,
    tau: f64,
    history: HistoryFunction,
}

fn problem_spec(
    name: &str,
    j: Option<f64>,
    tau: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    history: Option<&str>,
) -> Result<ProblemSpec> {
    let j = positive("j", j.unwrap_or(1.0))?;
    let (rhs, tau, default_history) = match name {
        "linear" => (linear_rhs(LINEAR_ALPHA, LINEAR_BETA), tau.unwrap_or(1.0), HistoryFunction::Constant(1.0)),
        "nonlinear" | "logistic" => {
            (logistic_rhs(LOGISTIC_K), tau.unwrap_or(LOGISTIC_TAU), HistoryFunction::Constant(1.0))
        }
        "custom-linear" | "custom_linear" => {
            let (Some(a), Some(b)) = (alpha, beta) else {
                return invalid("custom-linear needs --alpha and --beta");
            };
            (linear_rhs(a, b), tau.unwrap_or(1.0), HistoryFunction::Constant(1.0))
        }
        "linear_gamma" | "linear-gamma" => {
            let Some(b) = beta else {
                return invalid("linear_gamma needs --beta");
            };
            let e = EigenProblem::new(tau.unwrap_or(1.0), j, b)?;
            (linear_rhs(-e.a, e.beta), e.tau, HistoryFunction::Exponential { c: 1.0, rho: e.lambda })
        }
        other => return invalid(format!("unknown problem '{other}' (linear, nonlinear, linear_gamma, custom-linear)")),
    };
    let tau = positive("tau", tau)?;
    let history = match history {
        Some(h) => parse_history(h)?,
        None => default_history,
    };
    Ok(ProblemSpec { rhs, j, tau, history })
}

pub fn cmd_solve(a: &SolveArgs) -> Result<String> {
    let spec =
        problem_spec(a.problem.as_deref().unwrap_or("linear"), a.j, a.tau, a.alpha, a.beta, a.history.as_deref())?;
    let t0 = a.t0.unwrap_or(0.0);
    let t_end = a.t_end.unwrap_or(10.0);
    if !(t_end > t0) {
        return invalid(format!("need t_end > t0 (got {t0}, {t_end})"));
    }
    let h = positive("h", a.h.unwrap_or(0.05))?;
    let mut out = String::new();
    match a.method.as_deref().unwrap_or("fcrk4") {
        "fcrk4" | "fcrk" => {
            let xi = positive("xi", a.xi.unwrap_or(DEFAULT_XI))?;
            let rhs = spec.rhs.clone();
            let prob = DdeProblem::scalar(
                move |x, i| rhs(x, i),
                GammaKernel::with_mean(spec.j, spec.tau)?,
                spec.history,
                t0,
                t_end,
            )?;
            let sol = fcrk4_solve(&prob, h, &QuadConfig::coupled(h, xi))?;
            out.push_str("t,x\n");
            for (n, t) in sol.times().into_iter().enumerate() {
                out.push_str(&csv_line(&[t, sol.mesh_value(n)[0]]));
            }
        }
        "chain" => {
            let variant = Variant::parse(a.variant.as_deref().unwrap_or("fixed"))?;
            let mode = InitMode::parse(a.init_mode.as_deref().unwrap_or("paper_literal"))?;
            let params = approximate(variant, spec.j, spec.tau, &ApproxConfig::default())?;
            let prob = ChainOdeProblem::build(spec.rhs, params, spec.history, t0, t_end, mode)?;
            let steps = ((t_end - t0) / h - 1e-9).ceil() as usize;
            let times: Vec<f64> = (1..=steps).map(|k| if k == steps { t_end } else { t0 + k as f64 * h }).collect();
            let tol = positive("tol", a.tol.unwrap_or(1e-10))?;
            let traj = prob.solve(&times, &OdeConfig::adaptive(Tolerances::uniform(tol)))?;
            out.push_str("t,x");
            for i in 1..prob.dimension() {
                out.push_str(&format!(",B{i}"));
            }
            out.push('\n');
            let mut row = vec![t0];
            row.extend(&prob.initial);
            out.push_str(&csv_line(&row));
            for (t, y) in traj.times.iter().zip(&traj.states) {
                row.clear();
                row.push(*t);
                row.extend(y);
                out.push_str(&csv_line(&row));
            }
        }
        other => return invalid(format!("unknown method '{other}' (fcrk4, chain)")),
    }
    Ok(out)
}

pub fn cmd_convergence(a: &ConvergenceArgs) -> Result<String> {
    let steps = a.h.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025, 0.0125]);
    for &h in &steps {
        positive("h", h)?;
    }
    let report = if let Some(p) = a.synthetic_order {
        let points: Vec<(f64, f64)> = steps.iter().map(|&h| (h, 1e-2 * h.powf(p))).collect();
        estimate_order(&points)?
    } else {
        let problem = a.problem.as_deref().unwrap_or("linear");
        let j = positive("j", a.j.unwrap_or(1.0))?;
        let t_end = positive("t_end", a.t_end.unwrap_or(10.0))?;
        let xi = positive("xi", a.xi.unwrap_or(DEFAULT_XI))?;
        let norm = ErrorNorm::Discrete;
        match problem {
            "linear" | "nonlinear" | "logistic" => {
                if a.tau.is_some() || a.beta.is_some() {
                    return invalid("the linear and nonlinear test problems have fixed τ and coefficients");
                }
                let linear = problem == "linear";
                let spec = problem_spec(problem, Some(j), None, None, None, None)?;
                let rhs = spec.rhs.clone();
                let prob = DdeProblem::scalar(
                    move |x, i| rhs(x, i),
                    GammaKernel::with_mean(j, spec.tau)?,
                    spec.history,
                    0.0,
                    t_end,
                )?;
                if linear {
                    fcrk_convergence(&prob, &steps, xi, norm, |t| linear_test_reference(j, t))?
                } else {
                    fcrk_convergence(&prob, &steps, xi, norm, |t| logistic_test_reference(j, t))?
                }
            }
            "linear_gamma" | "linear-gamma" => {
                let e = EigenProblem::new(a.tau.unwrap_or(1.0), j, a.beta.unwrap_or(0.5))?;
                let prob = e.dde(t_end)?;
                fcrk_convergence(&prob, &steps, xi, norm, |t| Ok(t.iter().map(|&s| e.exact(s)).collect()))?
            }
            other => return invalid(format!("unknown problem '{other}' (linear, nonlinear, linear_gamma)")),
        }
    };
    let mut out = String::from("h,max_error,slope\n");
    for &(h, e) in &report.points {
        out.push_str(&csv_line(&[h, e, report.slope]));
    }
    Ok(out)
}

pub fn cmd_compare(a: &CompareArgs) -> Result<String> {
    let problem = a.problem.as_deref().unwrap_or("linear");
    let default_history = if matches!(problem, "linear") { "exp:0.1:0.1" } else { "0.5" };
    let spec = problem_spec(problem, a.j, a.tau, None, None, Some(a.history.as_deref().unwrap_or(default_history)))?;
    if !(spec.j > 1.0) {
        return invalid(format!("the smoothed approximation needs j > 1 (got {})", spec.j));
    }
    let t_end = positive("t_end", a.t_end.unwrap_or(10.0))?;
    let h = positive("h", a.h.unwrap_or(0.02))?;
    let tol = positive("tol", a.tol.unwrap_or(1e-12))?;
    let rhs = spec.rhs.clone();
    let prob = DdeProblem::scalar(
        move |x, i| rhs(x, i),
        GammaKernel::with_mean(spec.j, spec.tau)?,
        spec.history.clone(),
        0.0,
        t_end,
    )?;
    let sol = fcrk4_solve(&prob, h, &QuadConfig::for_step(h))?;
    let times = sol.times();
    let reference = sol.mesh_component(0);
    let variants = [Variant::Fixed, Variant::Smoothed, Variant::Erlang];
    let columns: Vec<Vec<f64>> = variants
        .par_iter()
        .map(|&v| -> Result<Vec<f64>> {
            let params = approximate(v, spec.j, spec.tau, &ApproxConfig::default())?;
            let chain = ChainOdeProblem::build(
                spec.rhs.clone(),
                params,
                spec.history.clone(),
                0.0,
                t_end,
                InitMode::KernelConsistent,
            )?;
            let mut x = vec![chain.initial[0]];
            x.extend(chain.solve(&times[1..], &OdeConfig::adaptive(Tolerances::uniform(tol)))?.component(0));
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("t,gamma_dde,fixed,smoothed,erlang\n");
    for (k, &t) in times.iter().enumerate() {
        out.push_str(&csv_line(&[t, reference[k], columns[0][k], columns[1][k], columns[2][k]]));
    }
    for (v, col) in variants.iter().zip(&columns) {
        let dev = col.iter().zip(&reference).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        eprintln!("max_deviation,{},{}", v.name(), num(dev));
    }
    Ok(out)
}

fn sign(x: f64) -> &'static str {
    if x > 0.0 {
        "+"
    } else if x < 0.0 {
        "-"
    } else {
        "0"
    }
}

pub fn cmd_stability(a: &StabilityArgs) -> Result<String> {
    let j = positive("j", a.j.unwrap_or(2.5))?;
    let tau = positive("tau", a.tau.unwrap_or(1.0))?;
    let alpha = a.alpha.unwrap_or(0.89);
    let beta = a.beta.unwrap_or(-1.15);
    let h = positive("h", a.h.unwrap_or(0.1))?;
    let t_end = positive("t_end", a.t_end.unwrap_or(400.0))?;
    let prob = DdeProblem::scalar(
        move |x, i| alpha * x + beta * i,
        GammaKernel::with_mean(j, tau)?,
        HistoryFunction::Constant(1.0),
        0.0,
        t_end,
    )?;
    let sol = fcrk4_solve(&prob, h, &QuadConfig::for_step(h))?;
    let gamma = match growth_rate(&sol.times(), &sol.mesh_component(0)) {
        Ok(g) => json!({ "growth_rate": g, "sign": sign(g) }),
        Err(e) => json!({ "growth_rate": null, "sign": null, "note": e.to_string() }),
    };
    let mut report = json!({ "j": j, "tau": tau, "alpha": alpha, "beta": beta, "gamma": gamma });
    let gamma_sign = report["gamma"]["sign"].clone();
    for (key, v) in [("hypoexp", Variant::Fixed), ("smoothed", Variant::Smoothed), ("erlang", Variant::Erlang)] {
        let lam = dominant_eigenvalue(alpha, beta, &approximate(v, j, tau, &ApproxConfig::default())?)?;
        report[key] = json!({
            "eigenvalue_re": lam.re,
            "eigenvalue_im": lam.im,
            "sign": sign(lam.re),
            "matches_gamma": gamma_sign.as_str().map(|s| s == sign(lam.re)),
        });
    }
    json_string(&report)
}

pub fn cmd_mgf_order(a: &MgfOrderArgs) -> Result<String> {
    let shapes = a.j.clone().unwrap_or_else(|| vec![1.5, 2.5, 3.3, 6.7]);
    let tau = positive("tau", a.tau.unwrap_or(1.0))?;
    let jobs: Vec<(f64, Variant)> =
        shapes.iter().flat_map(|&j| [Variant::Erlang, Variant::Fixed, Variant::Smoothed].map(|v| (j, v))).collect();
    let rows: Vec<Option<f64>> = jobs.par_iter().map(|&(j, v)| mgf_error_order(j, tau, v)).collect::<Result<_>>()?;
    let mut out = String::from("j,variant,slope,identically_zero\n");
    for ((j, v), slope) in jobs.iter().zip(rows) {
        let slope = slope.map(num).unwrap_or_default();
        let zero = slope.is_empty();
        out.push_str(&format!("{},{},{slope},{zero}\n", num(*j), v.name()));
    }
    Ok(out)
}

pub fn cmd_survival(a: &SurvivalArgs) -> Result<String> {
    let tau = positive("tau", a.tau.unwrap_or(1.0))?;
    if let Some(jumps) = &a.jumps {
        let t = positive("t", a.t.unwrap_or(4.0))?;
        let delta = positive("delta", a.delta.unwrap_or(1e-6))?;
        let mut out = String::from("j0,jump_fixed,jump_smoothed\n");
        for &j0 in jumps {
            let (f, s) = integer_jump(j0, tau, t, delta)?;
            out.push_str(&csv_line(&[j0, f, s]));
        }
        return Ok(out);
    }
    let j = positive("j", a.j.unwrap_or(2.5))?;
    let t_end = positive("t_end", a.t_end.unwrap_or(5.0))?;
    let dt = positive("dt", a.dt.unwrap_or(0.05))?;
    let n = (t_end / dt - 1e-9).ceil() as usize;
    let mut out = String::from("t,exact,fixed,smoothed\n");
    for k in 0..=n {
        let t = (k as f64 * dt).min(t_end);
        let (u, yf, ys) = survival_compare(j, tau, t)?;
        out.push_str(&csv_line(&[t, u, yf, ys]));
    }
    Ok(out)
}

pub fn cmd_moment_poly(a: &MomentPolyArgs) -> Result<String> {
    let m = a.m.unwrap_or(5);
    let fj = a.fj.unwrap_or(0.37);
    let poly = fm_polynomial(m, fj)?;
    let roots = poly.roots()?;
    let real = poly.real_roots(DEFAULT_IMAG_TOL)?;
    let checks = gm_checks(m, fj)?;
    json_string(&json!({
        "m": m,
        "fj": fj,
        "coefficients": poly.coeffs,
        "roots": roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "real_roots": real.len(),
        "real_root_values": real,
        "all_real_roots_positive": real.iter().all(|&r| r > 0.0),
        "gm_checks_passed": checks.passed(),
        "gm_checks": checks,
    }))
}

fn sir_params(a: &EpiModelArgs, default_variant: Variant) -> Result<SirParams> {
    let mut p = SirParams::new(a.beta.unwrap_or(0.5), a.tau.unwrap_or(5.0), a.j.unwrap_or(4.0), a.eps.unwrap_or(1e-3));
    if let Some(m) = a.population {
        p.population = m;
    }
    if let Some(days) = a.days {
        p.obs_times = (1..=days).map(|k| k as f64).collect();
    }
    p.variant = match &a.variant {
        Some(v) => Variant::parse(v)?,
        None => default_variant,
    };
    p.validate()?;
    Ok(p)
}

fn read_epi_data(cases: Option<&Path>, serial: Option<&Path>) -> Result<EpiData> {
    let Some(cases) = cases else {
        return invalid("--cases is required");
    };
    epi::read_data(cases, serial)
}

pub fn cmd_epi_simulate(a: &EpiSimulateArgs, seed: u64) -> Result<String> {
    let p = sir_params(&a.model, Variant::Fixed)?;
    let data = epi::synthetic_data(&p, a.serial_count.unwrap_or(100), &mut Rng::seeded(seed))?;
    let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let (cases, serial) = (dir.join("cases.csv"), dir.join("serial.csv"));
    epi::write_cases(&cases, &data)?;
    epi::write_serial(&serial, &data)?;
    json_string(&json!({
        "cases": cases,
        "serial": serial,
        "total_cases": data.cases.iter().sum::<u64>(),
        "serial_count": data.serial.len(),
        "seed": seed,
    }))
}

pub fn cmd_epi_loglik(a: &EpiLoglikArgs) -> Result<String> {
    let p = sir_params(&a.model, Variant::Fixed)?;
    let data = read_epi_data(a.cases.as_deref(), a.serial.as_deref())?;
    json_string(&json!({ "loglik": epi::log_likelihood(&p, &data)? }))
}

pub fn cmd_epi_fit(a: &EpiFitArgs) -> Result<String> {
    let mut start = a.model.clone();
    start.beta = start.beta.or(Some(0.4));
    start.tau = start.tau.or(Some(4.0));
    start.j = start.j.or(Some(3.0));
    start.eps = start.eps.or(Some(2e-3));
    let p = sir_params(&start, Variant::SmoothedRegularized)?;
    let data = read_epi_data(a.cases.as_deref(), a.serial.as_deref())?;
    let d = FitBounds::default();
    let bounds = FitBounds { j_min: a.j_min.unwrap_or(d.j_min), j_max: a.j_max.unwrap_or(d.j_max) };
    let mut opts = NelderMeadOptions::default();
    if let Some(n) = a.max_evals {
        opts.max_evals = n;
    }
    let report = epi::mle_fit(&data, &p, &bounds, &opts)?;
    json_string(&serde_json::to_value(report)?)
}
