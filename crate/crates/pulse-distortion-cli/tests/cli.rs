//! End-to-end behaviour of the `pulse-distortion` binary and its scenario layer.

use pulse_distortion_cli::config::{Scenario, SpacetimeSpec, SweepParam, PRESETS};
use pulse_distortion_cli::{evaluate, sweep, CliError, RunOptions, CSV_HEADER};
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulse-distortion")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pulse-distortion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
        .parse()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweep_header_is_fixed() {
    let o = bin(&["sweep", "--preset", "desk-scale"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(CSV_HEADER, "param,chi,delta1,z_bar_opt,delta_omega_opt_rad_s,delta_p_opt,delta_m_opt,eta,naive_delta_p,n_evals");
    assert_eq!(out.lines().count(), 11);
}

#[test]
fn sweep_is_deterministic_across_workers() {
    let one = stdout(&bin(&["sweep", "--preset", "desk-scale", "--workers", "1"]));
    let four = stdout(&bin(&["sweep", "--preset", "desk-scale", "--workers", "4"]));
    let again = stdout(&bin(&["sweep", "--preset", "desk-scale", "--workers", "4"]));
    assert_eq!(one, four);
    assert_eq!(four, again);
}

#[test]
fn rows_follow_axis_order() {
    let csv = stdout(&bin(&["sweep", "--preset", "earth-geo"]));
    let params = column(&csv, "param");
    assert_eq!(params.len(), 12);
    assert!(params.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn presets_round_trip_through_dump() {
    for (name, _) in PRESETS {
        let s = Scenario::preset(name).unwrap();
        assert_eq!(Scenario::parse(&s.dump()).unwrap(), s, "{name}");
        let dumped = stdout(&bin(&["dump-config", "--preset", name]));
        let path = scratch(&format!("{name}.toml"), &dumped);
        let again = stdout(&bin(&["dump-config", "--config", path.to_str().unwrap()]));
        assert_eq!(dumped, again, "{name}");
    }
}

#[test]
fn round_trip_keeps_overrides() {
    let s = Scenario::parse("spacetime.delta1 = 1e-10\nprofile.kind = \"gaussian-quadratic\"\nprofile.z0 = 7.5\nphotons.kind = \"squeezed\"\nphotons.n_mean = 0.25\n").unwrap();
    assert_eq!(s.spacetime, SpacetimeSpec::Delta1(1e-10));
    assert_eq!(Scenario::parse(&s.dump()).unwrap(), s);
}

#[test]
fn config_errors_exit_2() {
    let bad_key = scratch("bad-key.toml", "profile.phi = 1.0\n");
    let o = bin(&["optimize", "--config", bad_key.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'profile.phi'"));

    let both = scratch("both.toml", "spacetime.chi = 1.01\nspacetime.r_a_m = 6.371e6\nspacetime.separation_m = 10.0\n");
    assert_eq!(bin(&["redshift", "--config", both.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["redshift", "--preset", "nowhere"]).status.code(), Some(2));
    assert_eq!(bin(&["redshift", "--chi", "-1"]).status.code(), Some(2));

    let unused_axis = scratch("axis.toml", "sweep.param = \"d_tilde\"\nsweep.start = 1.0\n");
    assert_eq!(bin(&["sweep", "--preset", "desk-scale", "--config", unused_axis.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["sweep", "--preset", "earth-surface-lab"]).status.code(), Some(2));
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(CliError::ValidationFailed.exit_code(), 1);
    assert_eq!(CliError::Config("x".into()).exit_code(), 2);
    assert_eq!(CliError::Run(pulse_distortion::Error::NonConvergence("x".into())).exit_code(), 3);
    assert_eq!(CliError::Run(pulse_distortion::Error::Domain("x".into())).exit_code(), 2);
}

#[test]
fn validate_passes_and_catches_a_seeded_fault() {
    let o = bin(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = bin(&["validate", "--perturb", "gauss_prefactor=1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn flat_geometry_gives_unit_redshift() {
    let flat = scratch("flat.toml", "spacetime.r_a_m = 6.371e6\nspacetime.separation_m = 4e5\nspacetime.r_s_m = 0.0\n");
    let out = stdout(&bin(&["redshift", "--config", flat.to_str().unwrap()]));
    assert_eq!(value(&out, "chi"), 1.0);
    for key in ["delta1", "delta2", "kappa", "kappa_omega0_rad_s"] {
        assert_eq!(value(&out, key), 0.0, "{key}");
    }
}

#[test]
fn delta1_is_linear_in_schwarzschild_radius() {
    let base = Scenario::preset("earth-leo").unwrap();
    let big = base.with_param(SweepParam::SchwarzschildRadius, 8.87e3).unwrap();
    let (a, b) = (base.redshift().unwrap(), big.redshift().unwrap());
    assert!((b.near_limit.unwrap().0 / a.near_limit.unwrap().0 - 1e6).abs() < 1e-6 * 1e6);
    assert!((b.delta1 / a.delta1 - 1e6).abs() < 1e-2 * 1e6);
    assert!(b.delta2.is_none());
}

#[test]
fn unit_chi_leaves_overlaps_at_one() {
    let out = stdout(&bin(&["optimize", "--preset", "desk-scale", "--chi", "1"]));
    for key in ["delta_p_opt", "delta_m_opt", "naive_delta_p"] {
        assert!((value(&out, key) - 1.0).abs() < 1e-12, "{key}");
    }
    assert!(value(&out, "z_bar_opt").abs() < 1e-8);
}

#[test]
fn linear_optimum_matches_closed_form() {
    let out = stdout(&bin(&["optimize", "--preset", "desk-scale"]));
    assert!(value(&out, "z_bar_opt").abs() < 1e-8);
    assert!(value(&out, "closed_form_gap_p") < 1e-7);
    let kappa_omega0 = stdout(&bin(&["redshift", "--preset", "desk-scale"]));
    let want = -value(&kappa_omega0, "kappa_omega0_rad_s");
    assert!(((value(&out, "delta_omega_opt_rad_s") - want) / want).abs() < 1e-8);
}

#[test]
fn quadratic_phase_beats_rigid_shift() {
    let s = Scenario::parse("spacetime.chi = 1.001\nprofile.kind = \"gaussian-quadratic\"\nprofile.phi_tilde = 0.5\nprofile.z0 = 100.0\n").unwrap();
    let e = evaluate(&s, &RunOptions::default()).unwrap();
    assert!(e.naive_delta_p < e.delta_p_opt);
    let a = e.analytic.unwrap();
    assert!(((e.z_bar_opt - a.z_bar_opt) / a.z_bar_opt).abs() < 1e-6);
}

#[test]
fn near_earth_eta_follows_phase_penalty() {
    let spec = "sweep.param = \"phi_tilde\"\nsweep.start = 0.0\nsweep.stop = 3.0\nsweep.count = 31\n";
    let path = scratch("phi-sweep.toml", spec);
    let csv = stdout(&bin(&["sweep", "--preset", "earth-leo", "--config", path.to_str().unwrap()]));
    let phi = column(&csv, "param");
    let eta = column(&csv, "eta");
    let delta1 = column(&csv, "delta1");
    assert_eq!(phi.len(), 31);
    assert_eq!(eta[0], 0.0);
    for i in 1..31 {
        let want = -2.0 * phi[i] * phi[i] * delta1[i] * delta1[i];
        assert!(((eta[i] - want) / want).abs() < 0.01, "phi={} eta={} want={want}", phi[i], eta[i]);
    }
}

#[test]
fn coherent_sweep_follows_exponential_law() {
    let base = Scenario::parse("photons.kind = \"coherent\"\nphotons.n_mean = 1.0\nsweep.param = \"n_mean\"\nsweep.start = 0.0\nsweep.stop = 200.0\nsweep.count = 5\n").unwrap();
    let rows = sweep(&base, &RunOptions::default()).unwrap();
    let single = evaluate(&Scenario::parse("photons.kind = \"coherent\"\nphotons.n_mean = 1.0\n").unwrap(), &RunOptions::default()).unwrap();
    // Λ is real at the unshifted optimum of the linear-phase Gaussian
    let real_deficit = -single.ln_delta_p_single.exp_m1();
    for r in &rows {
        let n = r.param.unwrap();
        let want = (-real_deficit * n).exp();
        assert!(((r.delta_p_opt - want) / want).abs() < 1e-10, "N={n}");
        assert_eq!(r.delta_m_opt, rows[0].delta_m_opt);
    }
}

#[test]
fn single_point_sweep_has_one_row() {
    let s = Scenario::parse("sweep.param = \"chi\"\nsweep.start = 1.02\nsweep.count = 1\n").unwrap();
    let rows = sweep(&s, &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].redshift.chi, 1.02);
}

#[test]
fn out_flag_writes_csv() {
    let dir = std::env::temp_dir().join(format!("pulse-distortion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("optimum.csv");
    let o = bin(&["optimize", "--preset", "earth-leo", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn purity_report_is_invariant() {
    let out = stdout(&bin(&["purity", "--preset", "desk-scale"]));
    assert!((value(&out, "purity_mixed_emitted") - value(&out, "purity_mixed_received")).abs() < 1e-9);
    assert_eq!(value(&out, "purity_pure_received"), 1.0);
    assert!((value(&out, "grid_delta_m") - value(&out, "quadrature_delta_m")).abs() < 1e-4);
}
