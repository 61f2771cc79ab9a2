//! Scenario files: flat `section.key = value` lines (valid TOML), layered
//! over a preset or the built-in baseline.

use crate::{fmt_num, CliError};
use pulse_distortion::multiphoton::PhotonStatistics;
use pulse_distortion::profiles::{DimensionfulFrame, Profile, ProfileKind, ProfileParams};
use pulse_distortion::spacetime::{
    chi_minus_one, delta_expansion, delta_near_limit_with, kappa_from_chi_minus_one, SpacetimeConfig, EARTH_SCHWARZSCHILD_RADIUS_M,
};
use pulse_distortion::Coefficients;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Shipped presets, by name.
pub const PRESETS: [(&str, &str); 4] = [
    ("earth-leo", include_str!("../presets/earth-leo.toml")),
    ("earth-geo", include_str!("../presets/earth-geo.toml")),
    ("earth-surface-lab", include_str!("../presets/earth-surface-lab.toml")),
    ("desk-scale", include_str!("../presets/desk-scale.toml")),
];

pub fn preset_text(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("unknown preset '{name}' (available: {})", names.join(", ")))
        })
}

/// Where the redshift factor comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacetimeSpec {
    Geometry {
        r_a_m: f64,
        separation_m: f64,
        r_s_m: f64,
        /// Largest L/r_a for the close-separation expansion.
        near_limit_guard: f64,
    },
    /// Explicit χ.
    Chi(f64),
    /// Explicit δ₁ with χ = 1 + δ₁, exact in χ − 1.
    Delta1(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    pub omega0_rad_s: f64,
    pub sigma_rad_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub phi_tilde: f64,
    /// Phase-centre offset; ω₀/σ when absent.
    pub z0: Option<f64>,
    pub sigma_tilde: f64,
    pub d_tilde: f64,
    pub delta_z0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Window width λ.
    pub lambda: f64,
    /// Grid span in envelope widths.
    pub span: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

impl SweepScale {
    fn name(self) -> &'static str {
        match self {
            SweepScale::Linear => "linear",
            SweepScale::Log => "log",
        }
    }
}

impl FromStr for SweepScale {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "linear" => Ok(SweepScale::Linear),
            "log" => Ok(SweepScale::Log),
            _ => Err(CliError::Config(format!("sweep.scale must be linear or log, got '{s}'"))),
        }
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Chi,
    Delta1,
    RA,
    Separation,
    SchwarzschildRadius,
    PhiTilde,
    Z0,
    SigmaTilde,
    DTilde,
    DeltaZ0,
    NMean,
    Omega0,
    Sigma,
}

impl SweepParam {
    pub const ALL: [SweepParam; 13] = [
        SweepParam::Chi,
        SweepParam::Delta1,
        SweepParam::RA,
        SweepParam::Separation,
        SweepParam::SchwarzschildRadius,
        SweepParam::PhiTilde,
        SweepParam::Z0,
        SweepParam::SigmaTilde,
        SweepParam::DTilde,
        SweepParam::DeltaZ0,
        SweepParam::NMean,
        SweepParam::Omega0,
        SweepParam::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Chi => "chi",
            SweepParam::Delta1 => "delta1",
            SweepParam::RA => "r_a_m",
            SweepParam::Separation => "separation_m",
            SweepParam::SchwarzschildRadius => "r_s_m",
            SweepParam::PhiTilde => "phi_tilde",
            SweepParam::Z0 => "z0",
            SweepParam::SigmaTilde => "sigma_tilde",
            SweepParam::DTilde => "d_tilde",
            SweepParam::DeltaZ0 => "delta_z0",
            SweepParam::NMean => "n_mean",
            SweepParam::Omega0 => "omega0_rad_s",
            SweepParam::Sigma => "sigma_rad_s",
        }
    }
}

impl FromStr for SweepParam {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        SweepParam::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            CliError::Config(format!("unknown sweep parameter '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    /// Axis values in order.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    SweepScale::Linear => self.start + t * (self.stop - self.start),
                    SweepScale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }

    fn check(&self) -> Result<(), CliError> {
        if self.count == 0 {
            return Err(CliError::Config("sweep.count must be at least 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config("sweep bounds must be finite".into()));
        }
        if self.scale == SweepScale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::Config("a log sweep needs positive bounds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub spacetime: SpacetimeSpec,
    pub frame: FrameSpec,
    pub profile: ProfileSpec,
    pub photons: PhotonStatistics,
    pub grid: GridSpec,
    pub sweep: Option<SweepSpec>,
}

/// Redshift quantities resolved from a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Redshift {
    pub chi: f64,
    pub chi_minus_one: f64,
    /// First-order term; χ − 1 for explicit overrides or when r_s/r is too
    /// large for the series.
    pub delta1: f64,
    /// Second-order term, when the series applies.
    pub delta2: Option<f64>,
    /// Close-separation (δ₁, δ₂) when L/r_a is below the guard.
    pub near_limit: Option<(f64, f64)>,
    pub kappa: f64,
}

impl Scenario {
    /// Values used for keys that neither the preset nor the file sets.
    pub fn baseline() -> Scenario {
        Scenario {
            spacetime: SpacetimeSpec::Chi(1.05),
            frame: FrameSpec {
                omega0_rad_s: 1.215e15,
                sigma_rad_s: 1e12,
            },
            profile: ProfileSpec {
                kind: ProfileKind::GaussianLinear,
                phi_tilde: 1.0,
                z0: None,
                sigma_tilde: 10.0,
                d_tilde: 2.0,
                delta_z0: 0.0,
            },
            photons: PhotonStatistics::single(),
            grid: GridSpec {
                lambda: 1.0 / 64.0,
                span: 32.0,
            },
            sweep: None,
        }
    }

    /// Parses `text` over the baseline.
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        Scenario::baseline().overlay(text)
    }

    /// Loads a named preset.
    pub fn preset(name: &str) -> Result<Scenario, CliError> {
        Scenario::parse(preset_text(name)?)
    }

    /// Applies the keys in `text` on top of `self`.
    pub fn overlay(&self, text: &str) -> Result<Scenario, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &toml::Value::Table(table), &mut flat)?;
        let mut s = *self;
        s.apply(&flat)?;
        s.check()?;
        Ok(s)
    }

    fn apply(&mut self, kv: &BTreeMap<String, Value>) -> Result<(), CliError> {
        let geometry_keys = ["spacetime.r_a_m", "spacetime.separation_m", "spacetime.r_s_m", "spacetime.near_limit_guard"];
        let has_geometry = geometry_keys.iter().any(|k| kv.contains_key(*k));
        let overrides = ["spacetime.chi", "spacetime.delta1"].iter().filter(|k| kv.contains_key(**k)).count();
        if overrides > 1 || (overrides == 1 && has_geometry) {
            return Err(CliError::Config(
                "set either the geometry (r_a_m, separation_m, r_s_m) or one of spacetime.chi / spacetime.delta1".into(),
            ));
        }
        if has_geometry {
            let (mut r_a, mut sep, mut r_s, mut guard) = match self.spacetime {
                SpacetimeSpec::Geometry {
                    r_a_m,
                    separation_m,
                    r_s_m,
                    near_limit_guard,
                } => (Some(r_a_m), Some(separation_m), r_s_m, near_limit_guard),
                _ => (None, None, EARTH_SCHWARZSCHILD_RADIUS_M, 1e-2),
            };
            if let Some(v) = kv.get("spacetime.r_a_m") {
                r_a = Some(v.num("spacetime.r_a_m")?);
            }
            if let Some(v) = kv.get("spacetime.separation_m") {
                sep = Some(v.num("spacetime.separation_m")?);
            }
            if let Some(v) = kv.get("spacetime.r_s_m") {
                r_s = v.num("spacetime.r_s_m")?;
            }
            if let Some(v) = kv.get("spacetime.near_limit_guard") {
                guard = v.num("spacetime.near_limit_guard")?;
            }
            let (Some(r_a_m), Some(separation_m)) = (r_a, sep) else {
                return Err(CliError::Config("geometry needs both spacetime.r_a_m and spacetime.separation_m".into()));
            };
            self.spacetime = SpacetimeSpec::Geometry {
                r_a_m,
                separation_m,
                r_s_m: r_s,
                near_limit_guard: guard,
            };
        }
        if let Some(v) = kv.get("spacetime.chi") {
            self.spacetime = SpacetimeSpec::Chi(v.num("spacetime.chi")?);
        }
        if let Some(v) = kv.get("spacetime.delta1") {
            self.spacetime = SpacetimeSpec::Delta1(v.num("spacetime.delta1")?);
        }
        let mut sweep = self.sweep;
        let sweep_keys = ["sweep.param", "sweep.start", "sweep.stop", "sweep.count", "sweep.scale"];
        if sweep_keys.iter().any(|k| kv.contains_key(*k)) {
            let base = sweep.unwrap_or(SweepSpec {
                param: SweepParam::PhiTilde,
                start: f64::NAN,
                stop: f64::NAN,
                count: 0,
                scale: SweepScale::Linear,
            });
            let mut s = base;
            if sweep.is_none() && !(kv.contains_key("sweep.param") && kv.contains_key("sweep.start")) {
                return Err(CliError::Config("a sweep needs at least sweep.param and sweep.start".into()));
            }
            if let Some(v) = kv.get("sweep.param") {
                s.param = v.text("sweep.param")?.parse()?;
            }
            if let Some(v) = kv.get("sweep.start") {
                s.start = v.num("sweep.start")?;
            }
            s.stop = match kv.get("sweep.stop") {
                Some(v) => v.num("sweep.stop")?,
                None if s.stop.is_nan() => s.start,
                None => s.stop,
            };
            s.count = match kv.get("sweep.count") {
                Some(v) => v.count("sweep.count")?,
                None if s.count == 0 => 1,
                None => s.count,
            };
            if let Some(v) = kv.get("sweep.scale") {
                s.scale = v.text("sweep.scale")?.parse()?;
            }
            sweep = Some(s);
        }
        self.sweep = sweep;
        for (key, v) in kv {
            match key.as_str() {
                k if k.starts_with("spacetime.") && (geometry_keys.contains(&k) || k == "spacetime.chi" || k == "spacetime.delta1") => {}
                k if sweep_keys.contains(&k) => {}
                "frame.omega0_rad_s" => self.frame.omega0_rad_s = v.num(key)?,
                "frame.sigma_rad_s" => self.frame.sigma_rad_s = v.num(key)?,
                "profile.kind" => self.profile.kind = v.text(key)?.parse().map_err(lib_config)?,
                "profile.phi_tilde" => self.profile.phi_tilde = v.num(key)?,
                "profile.z0" => self.profile.z0 = Some(v.num(key)?),
                "profile.sigma_tilde" => self.profile.sigma_tilde = v.num(key)?,
                "profile.d_tilde" => self.profile.d_tilde = v.num(key)?,
                "profile.delta_z0" => self.profile.delta_z0 = v.num(key)?,
                "photons.kind" => self.photons.kind = v.text(key)?.parse().map_err(lib_config)?,
                "photons.n_mean" => self.photons.n_mean = v.num(key)?,
                "grid.lambda" => self.grid.lambda = v.num(key)?,
                "grid.span" => self.grid.span = v.num(key)?,
                _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
            }
        }
        Ok(())
    }

    /// Checks everything that does not need a numerical evaluation.
    pub fn check(&self) -> Result<(), CliError> {
        match self.spacetime {
            SpacetimeSpec::Geometry {
                r_a_m,
                separation_m,
                r_s_m,
                near_limit_guard,
            } => {
                SpacetimeConfig::with_separation(r_a_m, separation_m, r_s_m).map_err(lib_config)?;
                if !(near_limit_guard > 0.0) {
                    return Err(CliError::Config("spacetime.near_limit_guard must be positive".into()));
                }
            }
            SpacetimeSpec::Chi(chi) if !(chi > 0.0 && chi.is_finite()) => {
                return Err(CliError::Config(format!("spacetime.chi must be positive, got {chi}")));
            }
            SpacetimeSpec::Delta1(d) if !(d > -1.0 && d.is_finite()) => {
                return Err(CliError::Config(format!("spacetime.delta1 must exceed -1, got {d}")));
            }
            _ => {}
        }
        self.frame().map_err(lib_config)?;
        self.profile().map_err(lib_config)?;
        self.photons.check().map_err(lib_config)?;
        if !(self.grid.lambda > 0.0 && self.grid.span > 0.0) {
            return Err(CliError::Config("grid.lambda and grid.span must be positive".into()));
        }
        if let Some(s) = &self.sweep {
            s.check()?;
            self.param_in_use(s.param)?;
        }
        Ok(())
    }

    fn param_in_use(&self, p: SweepParam) -> Result<(), CliError> {
        let kind = self.profile.kind;
        let geometry = matches!(self.spacetime, SpacetimeSpec::Geometry { .. });
        let ok = match p {
            SweepParam::RA | SweepParam::Separation | SweepParam::SchwarzschildRadius => geometry,
            SweepParam::Z0 => kind.is_quadratic() && !kind.is_comb(),
            SweepParam::SigmaTilde | SweepParam::DTilde => kind.is_comb(),
            SweepParam::DeltaZ0 => kind == ProfileKind::CombQuadratic,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "sweep parameter '{}' does not enter this scenario ({}, {})",
                p.name(),
                kind,
                if geometry { "geometry" } else { "explicit chi" }
            )))
        }
    }

    /// The scenario with one parameter replaced.
    pub fn with_param(&self, p: SweepParam, value: f64) -> Result<Scenario, CliError> {
        self.param_in_use(p)?;
        let mut s = *self;
        if let SpacetimeSpec::Geometry {
            r_a_m,
            separation_m,
            r_s_m,
            ..
        } = &mut s.spacetime
        {
            match p {
                SweepParam::RA => *r_a_m = value,
                SweepParam::Separation => *separation_m = value,
                SweepParam::SchwarzschildRadius => *r_s_m = value,
                _ => {}
            }
        }
        match p {
            SweepParam::Chi => s.spacetime = SpacetimeSpec::Chi(value),
            SweepParam::Delta1 => s.spacetime = SpacetimeSpec::Delta1(value),
            SweepParam::PhiTilde => s.profile.phi_tilde = value,
            SweepParam::Z0 => s.profile.z0 = Some(value),
            SweepParam::SigmaTilde => s.profile.sigma_tilde = value,
            SweepParam::DTilde => s.profile.d_tilde = value,
            SweepParam::DeltaZ0 => s.profile.delta_z0 = value,
            SweepParam::NMean => s.photons.n_mean = value,
            SweepParam::Omega0 => s.frame.omega0_rad_s = value,
            SweepParam::Sigma => s.frame.sigma_rad_s = value,
            _ => {}
        }
        s.sweep = None;
        s.check()?;
        Ok(s)
    }

    pub fn frame(&self) -> pulse_distortion::Result<DimensionfulFrame> {
        DimensionfulFrame::new(self.frame.omega0_rad_s, self.frame.sigma_rad_s)
    }

    /// Phase-centre offset actually used by the profile.
    pub fn z0(&self) -> f64 {
        self.profile.z0.unwrap_or(self.frame.omega0_rad_s / self.frame.sigma_rad_s)
    }

    pub fn profile_params(&self) -> ProfileParams {
        let p = &self.profile;
        let mut params = ProfileParams::new(p.kind);
        params.phi_tilde = p.phi_tilde;
        params.z0 = if p.kind == ProfileKind::GaussianQuadratic { self.z0() } else { 0.0 };
        params.sigma_tilde = p.sigma_tilde;
        params.d_tilde = p.d_tilde;
        params.delta_z0 = p.delta_z0;
        params
    }

    pub fn profile(&self) -> pulse_distortion::Result<Profile> {
        Profile::from_params_with(&self.profile_params(), &Coefficients::EXACT)
    }

    pub fn redshift(&self) -> pulse_distortion::Result<Redshift> {
        let (cm1, delta1, delta2, near_limit) = match self.spacetime {
            SpacetimeSpec::Chi(chi) => (chi - 1.0, chi - 1.0, None, None),
            SpacetimeSpec::Delta1(d) => (d, d, None, None),
            SpacetimeSpec::Geometry {
                r_a_m,
                separation_m,
                r_s_m,
                near_limit_guard,
            } => {
                let cfg = SpacetimeConfig::with_separation(r_a_m, separation_m, r_s_m)?;
                let cm1 = chi_minus_one(&cfg)?;
                let near = delta_near_limit_with(r_a_m, separation_m, r_s_m, near_limit_guard, &Coefficients::EXACT).ok();
                match delta_expansion(&cfg) {
                    Ok((d1, d2)) => (cm1, d1, Some(d2), near),
                    Err(pulse_distortion::Error::Validity(_)) => (cm1, cm1, None, near),
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(Redshift {
            chi: 1.0 + cm1,
            chi_minus_one: cm1,
            delta1,
            delta2,
            near_limit,
            kappa: kappa_from_chi_minus_one(cm1),
        })
    }

    /// Flat dotted listing that [`Scenario::parse`] reads back unchanged.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        match self.spacetime {
            SpacetimeSpec::Geometry {
                r_a_m,
                separation_m,
                r_s_m,
                near_limit_guard,
            } => {
                line("spacetime.r_a_m", fmt_num(r_a_m));
                line("spacetime.separation_m", fmt_num(separation_m));
                line("spacetime.r_s_m", fmt_num(r_s_m));
                line("spacetime.near_limit_guard", fmt_num(near_limit_guard));
            }
            SpacetimeSpec::Chi(chi) => line("spacetime.chi", fmt_num(chi)),
            SpacetimeSpec::Delta1(d) => line("spacetime.delta1", fmt_num(d)),
        }
        line("frame.omega0_rad_s", fmt_num(self.frame.omega0_rad_s));
        line("frame.sigma_rad_s", fmt_num(self.frame.sigma_rad_s));
        let p = &self.profile;
        line("profile.kind", quote(p.kind.name()));
        line("profile.phi_tilde", fmt_num(p.phi_tilde));
        if let Some(z0) = p.z0 {
            line("profile.z0", fmt_num(z0));
        }
        line("profile.sigma_tilde", fmt_num(p.sigma_tilde));
        line("profile.d_tilde", fmt_num(p.d_tilde));
        line("profile.delta_z0", fmt_num(p.delta_z0));
        line("photons.kind", quote(self.photons.kind.name()));
        line("photons.n_mean", fmt_num(self.photons.n_mean));
        line("grid.lambda", fmt_num(self.grid.lambda));
        line("grid.span", fmt_num(self.grid.span));
        if let Some(s) = &self.sweep {
            line("sweep.param", quote(s.param.name()));
            line("sweep.start", fmt_num(s.start));
            line("sweep.stop", fmt_num(s.stop));
            line("sweep.count", s.count.to_string());
            line("sweep.scale", quote(s.scale.name()));
        }
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

fn lib_config(e: pulse_distortion::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Value {
    fn num(&self, key: &str) -> Result<f64, CliError> {
        match self {
            Value::Num(x) => Ok(*x),
            Value::Int(i) => Ok(*i as f64),
            Value::Text(_) => Err(CliError::Config(format!("'{key}' must be a number"))),
        }
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        match self {
            Value::Int(i) if *i >= 0 => Ok(*i as usize),
            Value::Num(x) if *x >= 0.0 && x.fract() == 0.0 => Ok(*x as usize),
            _ => Err(CliError::Config(format!("'{key}' must be a non-negative integer"))),
        }
    }

    fn text(&self, key: &str) -> Result<&str, CliError> {
        match self {
            Value::Text(s) => Ok(s),
            _ => Err(CliError::Config(format!("'{key}' must be a string"))),
        }
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, Value>) -> Result<(), CliError> {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
        }
        toml::Value::Float(x) => {
            out.insert(prefix.into(), Value::Num(*x));
        }
        toml::Value::Integer(i) => {
            out.insert(prefix.into(), Value::Int(*i));
        }
        toml::Value::String(s) => {
            out.insert(prefix.into(), Value::Text(s.clone()));
        }
        _ => return Err(CliError::Config(format!("'{prefix}' must be a number or a string"))),
    }
    Ok(())
}
