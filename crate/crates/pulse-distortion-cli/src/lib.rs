//! Scenario loading and command bodies behind the `pulse-distortion` binary.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use config::{Redshift, Scenario};
use pulse_distortion::analytic::{gaussian_linear_lambda, gaussian_quadratic_lambda, ClosedForms, OptimalOverlaps};
use pulse_distortion::optimize::{maximize_shift_from, OptimizeConfig};
use pulse_distortion::overlap::{lambda_pure_with, overlap_mixed_with, Which};
use pulse_distortion::profiles::ProfileKind;
use pulse_distortion::spacetime::classical_redshift_from;
use pulse_distortion::states::{apply_redshift, fidelity, grid_purity, mixed_state, pure_state, purity, FrequencyGrid};
use pulse_distortion::validation::{self, Level};
use pulse_distortion::{Coefficients, Complex64};
use rayon::prelude::*;
use std::fmt::Write as _;

pub const CSV_HEADER: &str = "param,chi,delta1,z_bar_opt,delta_omega_opt_rad_s,delta_p_opt,delta_m_opt,eta,naive_delta_p,n_evals";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] pulse_distortion::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("validation failed")]
    ValidationFailed,
}

impl CliError {
    /// 1 validation failure, 2 configuration or input error, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed => 1,
            CliError::Run(pulse_distortion::Error::NonConvergence(_)) => 3,
            _ => 2,
        }
    }
}

/// Seventeen significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Optimizer overrides taken from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub shift_tol: Option<f64>,
}

impl RunOptions {
    fn optimizer(&self, s: &Scenario) -> Result<OptimizeConfig, CliError> {
        let mut cfg = OptimizeConfig::for_profile(s.profile.kind, s.profile.d_tilde);
        if let Some(t) = self.shift_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("--tolerance must be positive, got {t}")));
            }
            cfg.shift_tol = t;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    /// Distortion below double-precision resolution of the integrals; the
    /// closed form carries the result.
    ClosedForm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// One optimized scenario, as written to a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub param: Option<f64>,
    pub redshift: Redshift,
    pub z_bar_opt: f64,
    pub delta_omega_opt: f64,
    /// N-photon Δ_p at the optimum.
    pub delta_p_opt: f64,
    pub delta_m_opt: f64,
    pub eta: f64,
    /// N-photon Δ_p after the rigid shift alone.
    pub naive_delta_p: f64,
    pub n_evals: usize,
    pub method: Method,
    /// Single-photon ln Δ_p at the optimum.
    pub ln_delta_p_single: f64,
    pub ln_delta_m: f64,
    /// Closed-form optimum for Gaussian profiles.
    pub analytic: Option<OptimalOverlaps>,
    pub warning: Option<String>,
}

impl Evaluation {
    pub fn csv_row(&self) -> String {
        let param = self.param.map(fmt_num).unwrap_or_default();
        format!(
            "{param},{},{},{},{},{},{},{},{},{}",
            fmt_num(self.redshift.chi),
            fmt_num(self.redshift.delta1),
            fmt_num(self.z_bar_opt),
            fmt_num(self.delta_omega_opt),
            fmt_num(self.delta_p_opt),
            fmt_num(self.delta_m_opt),
            fmt_num(self.eta),
            fmt_num(self.naive_delta_p),
            self.n_evals
        )
    }
}

/// Single-photon Λ described by ln|Λ| and arg Λ.
#[derive(Debug, Clone, Copy)]
struct Amplitude {
    ln_modulus: f64,
    arg: f64,
}

impl Amplitude {
    fn from_lambda(l: Complex64) -> Amplitude {
        Amplitude {
            ln_modulus: l.norm().ln(),
            arg: l.arg(),
        }
    }

    /// N-photon ln Δ_p. 1 − ReΛ is rebuilt from ln|Λ| and arg Λ so that it
    /// survives when it is far below machine epsilon.
    fn ln_pure(&self, s: &Scenario) -> Result<f64, CliError> {
        let modulus = self.ln_modulus.exp();
        let half = (0.5 * self.arg).sin();
        let real_deficit = -self.ln_modulus.exp_m1() + 2.0 * modulus * half * half;
        Ok(s.photons.ln_pure_from_deficits(self.ln_modulus, real_deficit, modulus * self.arg.sin())?)
    }
}

fn closed_form(s: &Scenario, cm1: f64) -> Result<Option<(OptimalOverlaps, Amplitude, Amplitude)>, CliError> {
    let cf = ClosedForms::new(Coefficients::EXACT);
    let chi = 1.0 + cm1;
    let phi = s.profile.phi_tilde;
    let z0 = s.z0();
    Ok(match s.profile.kind {
        ProfileKind::GaussianLinear => {
            let opt = cf.gaussian_linear_optimal_from(cm1, phi)?;
            let at = |z: f64| -> Result<Amplitude, CliError> {
                Ok(Amplitude {
                    ln_modulus: cf.gaussian_linear_logs(cm1, phi, z)?.0,
                    arg: gaussian_linear_lambda(chi, phi, z)?.arg(),
                })
            };
            Some((opt, at(opt.z_bar_opt)?, at(0.0)?))
        }
        ProfileKind::GaussianQuadratic => {
            let opt = cf.gaussian_quadratic_optimal_from(cm1, phi, z0)?;
            let at = |z: f64| -> Result<Amplitude, CliError> {
                Ok(Amplitude {
                    ln_modulus: cf.gaussian_quadratic_logs(cm1, phi, z0, z)?.0,
                    arg: gaussian_quadratic_lambda(chi, phi, z0, z)?.arg(),
                })
            };
            Some((opt, at(opt.z_bar_opt)?, at(0.0)?))
        }
        _ => None,
    })
}

/// Optimizes the frequency shift for a scenario.
pub fn evaluate(s: &Scenario, opts: &RunOptions) -> Result<Evaluation, CliError> {
    let red = s.redshift()?;
    let cm1 = red.chi_minus_one;
    let profile = s.profile()?;
    let frame = s.frame()?;
    let cfg = opts.optimizer(s)?;
    let pure = maximize_shift_from(&profile, cm1, Which::Pure, &frame, &cfg)?;
    let mixed = maximize_shift_from(&profile, cm1, Which::Mixed, &frame, &cfg)?;
    let (naive, naive_evals) = lambda_pure_with(&profile, red.chi, 0.0, &cfg.quadrature)?;
    let n_evals = pure.n_evals + mixed.n_evals + naive_evals;
    let closed = closed_form(s, cm1)?;
    let flat = pure.flat_objective || mixed.flat_objective;
    if !flat && !(pure.converged && mixed.converged) {
        return Err(pulse_distortion::Error::NonConvergence(format!(
            "optimal shift not located to {:e} (pure at {}, mixed at {})",
            cfg.shift_tol, pure.z_bar_opt, mixed.z_bar_opt
        ))
        .into());
    }

    let (method, z_bar_opt, at_opt, at_naive, ln_m, warning) = match (&closed, flat) {
        (Some((opt, a_opt, a_naive)), true) => (Method::ClosedForm, opt.z_bar_opt, *a_opt, *a_naive, opt.ln_delta_m, None),
        _ => {
            let warning = flat.then(|| {
                format!(
                    "distortion at chi - 1 = {cm1:e} is below double-precision resolution for {}; results are not resolved",
                    s.profile.kind
                )
            });
            (
                Method::Quadrature,
                pure.z_bar_opt,
                Amplitude::from_lambda(pure.lambda_opt),
                Amplitude::from_lambda(naive),
                mixed.delta_m_opt.ln(),
                warning,
            )
        }
    };
    let ln_p = at_opt.ln_pure(s)?;
    let ln_naive = at_naive.ln_pure(s)?;
    Ok(Evaluation {
        param: None,
        redshift: red,
        z_bar_opt,
        delta_omega_opt: classical_redshift_from(z_bar_opt, cm1, frame.sigma, frame.z0()),
        delta_p_opt: ln_p.exp(),
        delta_m_opt: ln_m.exp(),
        eta: (ln_p - ln_m).exp_m1(),
        naive_delta_p: ln_naive.exp(),
        n_evals,
        method,
        ln_delta_p_single: at_opt.ln_modulus,
        ln_delta_m: ln_m,
        analytic: closed.map(|c| c.0),
        warning,
    })
}

pub fn cmd_redshift(s: &Scenario) -> Result<String, CliError> {
    let r = s.redshift()?;
    let omega0 = s.frame.omega0_rad_s;
    let mut out = String::new();
    let mut line = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {}", fmt_num(v));
    };
    line("chi", r.chi);
    line("chi_minus_one", r.chi_minus_one);
    line("delta1", r.delta1);
    if let Some(d2) = r.delta2 {
        line("delta2", d2);
    }
    if let Some((n1, n2)) = r.near_limit {
        line("near_limit_delta1", n1);
        line("near_limit_delta2", n2);
    }
    line("kappa", r.kappa);
    line("kappa_omega0_rad_s", r.kappa * omega0);
    line("naive_shift_rad_s", -r.kappa * omega0);
    if let config::SpacetimeSpec::Geometry {
        r_a_m,
        separation_m,
        near_limit_guard,
        ..
    } = s.spacetime
    {
        if r.delta2.is_none() {
            let _ = writeln!(out, "# r_s/r is too large for the series; delta1 is chi - 1");
        }
        if r.near_limit.is_none() {
            let _ = writeln!(
                out,
                "# close-separation expansion skipped: L/r_a = {} is not below {}",
                fmt_num(separation_m / r_a_m),
                fmt_num(near_limit_guard)
            );
        }
    }
    Ok(out)
}

/// Overlaps at a given shift z̄.
pub fn cmd_overlap(s: &Scenario, z_bar: f64, opts: &RunOptions) -> Result<String, CliError> {
    let r = s.redshift()?;
    let profile = s.profile()?;
    let q = opts.optimizer(s)?.quadrature;
    let (lambda, _) = lambda_pure_with(&profile, r.chi, z_bar, &q)?;
    let (m, _) = overlap_mixed_with(&profile, r.chi, z_bar, &q)?;
    let (p_n, _) = s.photons.apply(lambda, m)?;
    let mut out = String::new();
    let mut line = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {}", fmt_num(v));
    };
    line("chi", r.chi);
    line("z_bar", z_bar);
    line("delta_omega_rad_s", classical_redshift_from(z_bar, r.chi_minus_one, s.frame.sigma_rad_s, s.frame.omega0_rad_s / s.frame.sigma_rad_s));
    line("lambda_re", lambda.re);
    line("lambda_im", lambda.im);
    line("delta_p", lambda.norm());
    line("delta_m", m);
    line("delta_p_photons", p_n);
    let cf = ClosedForms::new(Coefficients::EXACT);
    let closed = match s.profile.kind {
        ProfileKind::GaussianLinear => Some(cf.gaussian_linear_logs(r.chi_minus_one, s.profile.phi_tilde, z_bar)?),
        ProfileKind::GaussianQuadratic => Some(cf.gaussian_quadratic_logs(r.chi_minus_one, s.profile.phi_tilde, s.z0(), z_bar)?),
        _ => None,
    };
    if let Some((lp, lm)) = closed {
        line("closed_form_delta_p", lp.exp());
        line("closed_form_delta_m", lm.exp());
    }
    Ok(out)
}

/// Text report for one optimization.
pub fn optimize_report(e: &Evaluation, s: &Scenario) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {}", fmt_num(v));
    };
    line("chi", e.redshift.chi);
    line("chi_minus_one", e.redshift.chi_minus_one);
    line("delta1", e.redshift.delta1);
    line("z_bar_opt", e.z_bar_opt);
    line("delta_omega_opt_rad_s", e.delta_omega_opt);
    line("delta_p_opt", e.delta_p_opt);
    line("delta_m_opt", e.delta_m_opt);
    line("eta", e.eta);
    line("naive_delta_p", e.naive_delta_p);
    line("deficit_p_single", -e.ln_delta_p_single.exp_m1());
    line("deficit_m", -e.ln_delta_m.exp_m1());
    if let Some(a) = &e.analytic {
        line("closed_form_z_bar_opt", a.z_bar_opt);
        line("closed_form_deficit_p", a.deficit_p());
        line("closed_form_deficit_m", a.deficit_m());
        line("closed_form_gap_p", (e.ln_delta_p_single - a.ln_delta_p).abs());
    }
    let _ = writeln!(out, "n_evals = {}", e.n_evals);
    let _ = writeln!(out, "method = \"{}\"", e.method.name());
    let _ = writeln!(out, "photons = \"{} n_mean={}\"", s.photons.kind, fmt_num(s.photons.n_mean));
    out
}

pub fn csv(rows: &[Evaluation]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Evaluates every point of the scenario's sweep, in axis order.
pub fn sweep(s: &Scenario, opts: &RunOptions) -> Result<Vec<Evaluation>, CliError> {
    let spec = s.sweep.ok_or_else(|| CliError::Config("the scenario has no sweep section".into()))?;
    spec.values()
        .into_par_iter()
        .map(|v| {
            let point = s.with_param(spec.param, v)?;
            let mut e = evaluate(&point, opts)?;
            e.param = Some(v);
            Ok(e)
        })
        .collect()
}

/// Purity and grid fidelities before and after redshift.
pub fn cmd_purity(s: &Scenario, opts: &RunOptions) -> Result<String, CliError> {
    let r = s.redshift()?;
    let profile = s.profile()?;
    let n = (s.grid.span / s.grid.lambda).round() as usize;
    let grid = FrequencyGrid::centered(n.max(1), s.grid.lambda)?;
    let q = opts.optimizer(s)?.quadrature;
    let emitted_p = pure_state(&profile, &grid)?;
    let emitted_m = mixed_state(&profile, &grid)?;
    let received_p = apply_redshift(&profile, &emitted_p, r.chi, 0.0)?;
    let received_m = apply_redshift(&profile, &emitted_m, r.chi, 0.0)?;
    let (lambda, _) = lambda_pure_with(&profile, r.chi, 0.0, &q)?;
    let (m, _) = overlap_mixed_with(&profile, r.chi, 0.0, &q)?;
    let fp = fidelity(&emitted_p, &received_p)?;
    let fm = fidelity(&emitted_m, &received_m)?;
    let mut out = String::new();
    let mut line = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {}", fmt_num(v));
    };
    line("chi", r.chi);
    line("grid_lambda", s.grid.lambda);
    line("purity_pure_emitted", purity(&emitted_p));
    line("purity_pure_received", purity(&received_p));
    line("purity_mixed_emitted", purity(&emitted_m));
    line("purity_mixed_received", purity(&received_m));
    line("grid_purity_mixed_received", grid_purity(&received_m));
    line("residue_received", received_p.residue.abs().max(received_m.residue.abs()));
    line("grid_delta_p", fp);
    line("quadrature_delta_p", lambda.norm());
    line("grid_delta_m", fm);
    line("quadrature_delta_m", m);
    let _ = writeln!(out, "grid_bins = {n}");
    Ok(out)
}

/// Runs the validation battery, optionally with one coefficient perturbed.
pub fn cmd_validate(level: Level, perturb: Option<(&str, f64)>) -> Result<(String, bool), CliError> {
    let coeffs = match perturb {
        None => Coefficients::EXACT,
        Some((name, rel)) => Coefficients::EXACT.perturbed(name, rel).ok_or_else(|| {
            CliError::Config(format!("unknown coefficient '{name}' (expected one of {})", Coefficients::NAMES.join(", ")))
        })?,
    };
    let report = validation::run_with(level, &coeffs);
    Ok((format!("{report}\n"), report.passed()))
}
