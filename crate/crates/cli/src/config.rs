//! Run configuration: TOML schema, scenario defaults and validation.

use crate::error::CliError;
use crate::scenarios::Scenario;
use ratiosense_core::estimators::{EXACT_NU_WARNING, MAX_EXACT_NU};
use ratiosense_core::NoiseParams;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

/// Largest `omega_c * tau` for which short-time formulas are trusted.
pub const SHORT_TIME_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub t_total: Option<f64>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub omega_c: Option<f64>,
    pub speed: Option<f64>,
    pub alpha_list: Option<Vec<f64>>,
    pub s_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub x0_range: Option<[f64; 2]>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub tau: Option<f64>,
    pub tau_range: Option<[f64; 2]>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Standard,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateChoice {
    Ghz,
    Css,
    Oat,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub estimator: Option<EstimatorChoice>,
    pub state: Option<StateChoice>,
    pub nu: Option<u64>,
    pub nu_list: Option<Vec<u64>>,
    pub shots: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub plot: Option<bool>,
}

/// Fully populated parameters for one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub seed: u64,
    pub t_total: f64,
    pub alpha: f64,
    pub s: f64,
    pub omega_c: f64,
    pub speed: f64,
    pub alpha_list: Vec<f64>,
    pub s_list: Vec<f64>,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub x0_range: [f64; 2],
    pub x0_points: usize,
    pub tau: f64,
    pub tau_range: [f64; 2],
    pub tau_points: usize,
    pub estimator: EstimatorChoice,
    pub state: StateChoice,
    pub nu: u64,
    pub nu_list: Vec<u64>,
    pub shots: usize,
    pub out_dir: PathBuf,
    pub plot: bool,
}

impl Resolved {
    pub fn noise(&self) -> Result<NoiseParams, CliError> {
        self.noise_with(self.alpha, self.s)
    }

    pub fn noise_with(&self, alpha: f64, s: f64) -> Result<NoiseParams, CliError> {
        Ok(NoiseParams::with_speed(alpha, s, self.omega_c, self.speed)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub level: Level,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.level {
            Level::Info => "info",
            Level::Warning => "warning",
            Level::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

pub fn load(path: &Path) -> Result<(RunConfig, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse(&text)?;
    Ok((config, text))
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Fills unspecified fields with the scenario defaults.
pub fn resolve(config: &RunConfig) -> Result<Resolved, CliError> {
    let scenario =
        Scenario::from_name(&config.scenario).ok_or_else(|| CliError::UnknownScenario(config.scenario.clone()))?;
    let m = &config.measurement;
    let d = scenario.defaults(m.state);
    Ok(Resolved {
        scenario,
        seed: config.seed.unwrap_or(d.seed),
        t_total: config.t_total.unwrap_or(d.t_total),
        alpha: config.noise.alpha.unwrap_or(d.alpha),
        s: config.noise.s.unwrap_or(d.s),
        omega_c: config.noise.omega_c.unwrap_or(d.omega_c),
        speed: config.noise.speed.unwrap_or(d.speed),
        alpha_list: config.noise.alpha_list.clone().unwrap_or(d.alpha_list),
        s_list: config.noise.s_list.clone().unwrap_or(d.s_list),
        n: config.geometry.n.unwrap_or(d.n),
        n_list: config.geometry.n_list.clone().unwrap_or(d.n_list),
        x0_range: config.geometry.x0_range.unwrap_or(d.x0_range),
        x0_points: config.geometry.points.unwrap_or(d.x0_points),
        tau: config.time.tau.unwrap_or(d.tau),
        tau_range: config.time.tau_range.unwrap_or(d.tau_range),
        tau_points: config.time.points.unwrap_or(d.tau_points),
        estimator: m.estimator.unwrap_or(d.estimator),
        state: d.state,
        nu: m.nu.unwrap_or(d.nu),
        nu_list: m.nu_list.clone().unwrap_or(d.nu_list),
        shots: m.shots.unwrap_or(d.shots),
        out_dir: config.output.dir.clone().unwrap_or(d.out_dir),
        plot: config.output.plot.unwrap_or(false),
    })
}

fn positive(out: &mut Vec<Diagnostic>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(Diagnostic {
            level: Level::Error,
            message: format!("{name} must be positive and finite, got {v}"),
        });
    }
}

fn push(out: &mut Vec<Diagnostic>, level: Level, message: String) {
    out.push(Diagnostic { level, message });
}

/// Non-mutating checks of a resolved configuration.
pub fn validate(r: &Resolved) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let uses = r.scenario.uses();
    positive(&mut out, "t_total", r.t_total);
    positive(&mut out, "omega_c", r.omega_c);
    positive(&mut out, "noise.speed", r.speed);
    positive(&mut out, "noise.alpha", r.alpha);
    for &a in &r.alpha_list {
        if !(a.is_finite() && a >= 0.0) {
            push(
                &mut out,
                Level::Error,
                format!("alpha_list entries must be non-negative, got {a}"),
            );
        }
    }
    let s_values: Vec<f64> = if uses.s_list { r.s_list.clone() } else { vec![r.s] };
    for &s in &s_values {
        if !(s.is_finite() && s >= 0.0) {
            push(
                &mut out,
                Level::Error,
                format!("spectral exponent s must be non-negative, got {s}"),
            );
        } else if s == 0.0 {
            push(
                &mut out,
                Level::Info,
                "s = 0: spatial correlator reduces to 1/(1+x^2), evaluated in closed cos/arctan form".into(),
            );
        } else if s.fract() != 0.0 {
            push(
                &mut out,
                Level::Info,
                format!("s = {s}: non-integer order, correlator uses the cos/arctan form"),
            );
        }
    }
    if uses.n_list {
        if r.n_list.is_empty() {
            push(
                &mut out,
                Level::Error,
                "geometry.n_list is empty: nothing to sweep".into(),
            );
        }
        if r.n_list.windows(2).any(|w| w[0] >= w[1]) {
            push(
                &mut out,
                Level::Error,
                "geometry.n_list must be strictly ascending".into(),
            );
        }
        if r.n_list.iter().any(|&n| n < 2) {
            push(
                &mut out,
                Level::Error,
                "geometry.n_list entries must be at least 2".into(),
            );
        }
    }
    if uses.n && r.n < 2 {
        push(&mut out, Level::Error, "geometry.n must be at least 2".into());
    }
    if uses.x0 {
        positive(&mut out, "geometry.x0_range[0]", r.x0_range[0]);
        if r.x0_range[1] <= r.x0_range[0] {
            push(&mut out, Level::Error, "geometry.x0_range must be increasing".into());
        }
        if r.x0_points < 2 {
            push(&mut out, Level::Error, "geometry.points must be at least 2".into());
        }
    }
    if uses.tau_range {
        positive(&mut out, "time.tau_range[0]", r.tau_range[0]);
        if r.tau_range[1] <= r.tau_range[0] {
            push(&mut out, Level::Error, "time.tau_range must be increasing".into());
        }
        if r.tau_points < 2 {
            push(&mut out, Level::Error, "time.points must be at least 2".into());
        }
        if r.omega_c * r.tau_range[1] > SHORT_TIME_LIMIT && uses.short_time {
            push(
                &mut out,
                Level::Warning,
                format!(
                    "omega_c * tau_max = {} exceeds {SHORT_TIME_LIMIT}; short-time formulas lose accuracy",
                    r.omega_c * r.tau_range[1]
                ),
            );
        }
    }
    if uses.tau {
        positive(&mut out, "time.tau", r.tau);
    }
    let nus: Vec<u64> = if uses.nu_list {
        r.nu_list.clone()
    } else if uses.nu {
        vec![r.nu]
    } else {
        vec![]
    };
    for nu in nus {
        if nu == 0 {
            push(&mut out, Level::Error, "nu must be at least 1".into());
        } else if nu > MAX_EXACT_NU {
            let level = if r.shots > 0 { Level::Warning } else { Level::Error };
            push(
                &mut out,
                level,
                format!("nu = {nu} exceeds the exact enumeration cap {MAX_EXACT_NU}; only Monte Carlo (shots > 0) is available"),
            );
        } else if nu > EXACT_NU_WARNING && r.estimator == EstimatorChoice::Ratio {
            push(
                &mut out,
                Level::Warning,
                format!(
                    "nu = {nu}: exact ratio enumeration visits up to (nu+1)^2 = {} outcome pairs",
                    (nu + 1) * (nu + 1)
                ),
            );
        }
    }
    if uses.s_list && r.s_list.is_empty() {
        push(&mut out, Level::Error, "noise.s_list is empty".into());
    }
    if uses.alpha_list && r.alpha_list.is_empty() {
        push(&mut out, Level::Error, "noise.alpha_list is empty".into());
    }
    out.sort_by_key(|d| std::cmp::Reverse(d.level));
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.level == Level::Error)
}
