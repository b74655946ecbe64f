//! Run configuration: sectioned `key = value` text (TOML syntax) with the
//! units spelled out in the key names.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::scan::{StirapSettings, Truncation};
use crate::dynamics::{PropagationOptions, PropagationPath};
use crate::greens::{linspace, EmitterSpec, FitWindow, NanoparticleModel};
use crate::hamiltonian::LossConvention;
use crate::units;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// `Ω₀T`.
    pub area: f64,
    pub tau_over_t: f64,
    pub t_ns: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            area: 60.0,
            tau_over_t: 0.7,
            t_ns: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub threshold: f64,
    /// Fixed number of modes; chosen from the partial LDOS when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            n_max: 60,
            threshold: 2e-3,
            n_modes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    #[default]
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub rank_tol: f64,
    pub loss_convention: LossConvention,
    pub path: PathKind,
    pub full_rescale: f64,
    pub window_multiplier: f64,
    pub trajectory_samples: usize,
    pub max_steps: usize,
    pub fit_halfwidths: f64,
    pub fit_points: usize,
    pub ldos_omega_min_ev: f64,
    pub ldos_omega_max_ev: f64,
    pub ldos_points: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let p = PropagationOptions::default();
        let w = FitWindow::default();
        Self {
            rtol: p.rtol,
            rank_tol: crate::lowdin::DEFAULT_RANK_TOL,
            loss_convention: LossConvention::HalfWidth,
            path: PathKind::Reduced,
            full_rescale: 200.0,
            window_multiplier: p.window_multiplier,
            trajectory_samples: p.samples,
            max_steps: p.max_steps,
            fit_halfwidths: w.halfwidths,
            fit_points: w.points,
            ldos_omega_min_ev: 1.5,
            ldos_omega_max_ev: 4.5,
            ldos_points: 601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub phi_start_rad: f64,
    pub phi_stop_rad: f64,
    pub phi_points: usize,
    /// Explicit angles; overrides the start/stop/points triple.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_values_rad: Option<Vec<f64>>,
    pub areas: Vec<f64>,
    pub mode_counts: Vec<usize>,
    pub distances_nm: Vec<f64>,
    pub distance_phi_rad: f64,
    /// Smallest area regarded as adiabatic when summarizing scans.
    pub adiabatic_area_min: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            phi_start_rad: 0.0,
            phi_stop_rad: PI,
            phi_points: 61,
            phi_values_rad: None,
            areas: vec![20.0, 40.0, 60.0, 80.0, 100.0, 120.0],
            mode_counts: vec![1, 3, 10, 25],
            distances_nm: vec![2.0, 7.0],
            distance_phi_rad: PI,
            adiabatic_area_min: 80.0,
        }
    }
}

impl ScanConfig {
    pub fn phi_grid(&self) -> Vec<f64> {
        match &self.phi_values_rad {
            Some(v) => v.clone(),
            None if self.phi_points == 0 => Vec::new(),
            None => linspace(self.phi_start_rad, self.phi_stop_rad, self.phi_points),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub nanoparticle: NanoparticleModel,
    pub emitters: Vec<EmitterSpec>,
    #[serde(default)]
    pub pulses: PulseConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub scan: ScanConfig,
}

impl RunConfig {
    pub fn fit_window(&self) -> FitWindow {
        FitWindow {
            halfwidths: self.numerics.fit_halfwidths,
            points: self.numerics.fit_points,
        }
    }

    pub fn path(&self) -> PropagationPath {
        match self.numerics.path {
            PathKind::Reduced => PropagationPath::Reduced,
            PathKind::Full => PropagationPath::Full {
                rescale: self.numerics.full_rescale,
            },
        }
    }

    pub fn propagation(&self) -> PropagationOptions {
        PropagationOptions {
            rtol: self.numerics.rtol,
            window_multiplier: self.numerics.window_multiplier,
            samples: self.numerics.trajectory_samples,
            max_steps: self.numerics.max_steps,
        }
    }

    pub fn stirap_settings(&self) -> StirapSettings {
        StirapSettings {
            tau_over_t: self.pulses.tau_over_t,
            width_t: units::ns_to_internal(self.pulses.t_ns),
            path: self.path(),
            propagation: self.propagation(),
            rank_tol: self.numerics.rank_tol,
            convention: self.numerics.loss_convention,
        }
    }

    pub fn truncation(&self) -> Truncation {
        Truncation {
            threshold: self.truncation.threshold,
            n_max: self.truncation.n_max,
        }
    }

    /// Angle between the two emitters.
    pub fn phi(&self) -> f64 {
        match self.emitters.as_slice() {
            [a, b, ..] => a.angle_to(b),
            _ => 0.0,
        }
    }

    /// Effective configuration as text, parseable by [`parse_config`].
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Line (1-based) of `key` inside the `occurrence`-th `[section]` or
/// `[[section]]` header, or of the key at top level when `section` is empty.
fn locate(text: &str, section: &str, occurrence: usize, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut seen = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
            if name == section {
                seen += 1;
            }
            current = name;
            continue;
        }
        let in_section = if section.is_empty() {
            current.is_empty()
        } else {
            current == section && seen == occurrence + 1
        };
        if in_section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    // fall back to the section header itself
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            t.starts_with('[') && t.trim_matches(|c| c == '[' || c == ']').trim() == section
        })
        .nth(occurrence)
        .map(|(i, _)| i + 1)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_error(
    text: &str,
    section: &str,
    occurrence: usize,
    field: &str,
    msg: String,
) -> ConfigError {
    ConfigError {
        line: locate(text, section, occurrence, field),
        message: format!(
            "`{}{field}`: {msg}",
            if section.is_empty() {
                String::new()
            } else {
                format!("{section}.")
            }
        ),
    }
}

/// Parses, fills defaults and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    validate(&cfg, text)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, text: &str) -> Result<(), ConfigError> {
    use crate::greens::GreensError;
    if let Err(GreensError::InvalidModel { field, reason }) = cfg.nanoparticle.validate() {
        return Err(field_error(text, "nanoparticle", 0, field, reason));
    }
    if cfg.emitters.is_empty() {
        return Err(ConfigError {
            line: None,
            message: "at least one [[emitters]] entry is required".into(),
        });
    }
    for (i, e) in cfg.emitters.iter().enumerate() {
        if let Err(GreensError::InvalidEmitter { field, reason }) = e.validate() {
            return Err(field_error(text, "emitters", i, field, reason));
        }
    }
    if cfg.emitters.len() >= 2
        && cfg
            .emitters
            .iter()
            .any(|e| e.omega_eg_ev != cfg.emitters[0].omega_eg_ev)
    {
        return Err(field_error(
            text,
            "emitters",
            1,
            "omega_eg_ev",
            "driven runs need identical emitter transition energies".into(),
        ));
    }
    let p = &cfg.pulses;
    let checks: [(&str, &str, bool, &str); 12] = [
        ("pulses", "area", p.area > 0.0, "must be positive"),
        (
            "pulses",
            "tau_over_t",
            p.tau_over_t > 0.0,
            "must be positive",
        ),
        ("pulses", "t_ns", p.t_ns > 0.0, "must be positive"),
        (
            "truncation",
            "n_max",
            cfg.truncation.n_max >= 1,
            "must be at least 1",
        ),
        (
            "truncation",
            "threshold",
            cfg.truncation.threshold > 0.0 && cfg.truncation.threshold < 1.0,
            "must lie in (0, 1)",
        ),
        (
            "truncation",
            "n_modes",
            cfg.truncation.n_modes.is_none_or(|n| n >= 1),
            "must be at least 1",
        ),
        (
            "numerics",
            "rtol",
            cfg.numerics.rtol > 0.0 && cfg.numerics.rtol < 1e-2,
            "must lie in (0, 1e-2)",
        ),
        (
            "numerics",
            "rank_tol",
            cfg.numerics.rank_tol > 0.0 && cfg.numerics.rank_tol < 1.0,
            "must lie in (0, 1)",
        ),
        (
            "numerics",
            "full_rescale",
            cfg.numerics.full_rescale >= 1.0,
            "must be at least 1",
        ),
        (
            "numerics",
            "fit_points",
            cfg.numerics.fit_points >= 5,
            "must be at least 5",
        ),
        (
            "numerics",
            "ldos_omega_max_ev",
            cfg.numerics.ldos_omega_min_ev > 0.0
                && cfg.numerics.ldos_omega_max_ev > cfg.numerics.ldos_omega_min_ev,
            "must exceed ldos_omega_min_ev > 0",
        ),
        (
            "numerics",
            "window_multiplier",
            cfg.numerics.window_multiplier > 0.0,
            "must be positive",
        ),
    ];
    for (section, field, ok, msg) in checks {
        if !ok {
            return Err(field_error(text, section, 0, field, msg.into()));
        }
    }
    if !finite_fields(cfg) {
        return Err(ConfigError {
            line: None,
            message: "pulse and numerics values must be finite".into(),
        });
    }
    if cfg.scan.areas.iter().any(|a| !(*a > 0.0)) {
        return Err(field_error(
            text,
            "scan",
            0,
            "areas",
            "areas must be positive".into(),
        ));
    }
    Ok(())
}

fn finite_fields(cfg: &RunConfig) -> bool {
    let p = &cfg.pulses;
    let n = &cfg.numerics;
    [
        p.area,
        p.tau_over_t,
        p.t_ns,
        n.rtol,
        n.rank_tol,
        n.full_rescale,
        n.window_multiplier,
    ]
    .iter()
    .all(|v| v.is_finite())
}

/// Names of the embedded presets.
pub const PRESETS: [&str; 5] = ["fig2", "fig5", "fig6", "fig7", "fig9"];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => include_str!("../presets/fig2.cfg"),
        "fig5" => include_str!("../presets/fig5.cfg"),
        "fig6" => include_str!("../presets/fig6.cfg"),
        "fig7" => include_str!("../presets/fig7.cfg"),
        "fig9" => include_str!("../presets/fig9.cfg"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Option<RunConfig> {
    preset_text(name).map(|t| parse_config(t).expect("embedded presets are valid"))
}
