//! Subcommand implementations behind the `plasmon-stirap` binary.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde_json::json;

use crate::config::{parse_config, preset_text, ConfigError, RunConfig, PRESETS};
use crate::dynamics::scan::{distance_study, scan_angle_area, truncation_study, ScanCell};
use crate::dynamics::{transfer_efficiency, PropagationPath};
use crate::greens::{self, linspace};
use crate::hamiltonian::{adiabatic_eliminate, DrivenSystem};
use crate::lowdin::{canonical_orthonormalize, overlap_for_mode};
use crate::output::{fmt_f64, ArtifactWriter, Manifest};
use crate::system::{run_stirap, CouplingTable};
use crate::units;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Ldos,
    Modes,
    Couplings,
    Stirap,
    Scan,
    Truncation,
    Distances,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Ldos,
        Subcommand::Modes,
        Subcommand::Couplings,
        Subcommand::Stirap,
        Subcommand::Scan,
        Subcommand::Truncation,
        Subcommand::Distances,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ldos => "ldos",
            Subcommand::Modes => "modes",
            Subcommand::Couplings => "couplings",
            Subcommand::Stirap => "stirap",
            Subcommand::Scan => "scan",
            Subcommand::Truncation => "truncation",
            Subcommand::Distances => "distances",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("numerical failure: {0}")]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

/// Where the configuration text comes from.
#[derive(Debug, Clone)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

pub fn load_config_text(source: &ConfigSource) -> Result<String, CliError> {
    match source {
        ConfigSource::File(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display()))),
        ConfigSource::Preset(name) => preset_text(name).map(str::to_string).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown preset `{name}` (known: {})",
                PRESETS.join(", ")
            ))
        }),
    }
}

/// Number of modes: the configured override or the LDOS-based choice.
pub fn mode_count(cfg: &RunConfig) -> Result<usize, Error> {
    match cfg.truncation.n_modes {
        Some(n) => Ok(n),
        None => Ok(greens::select_modes(
            &cfg.nanoparticle,
            &cfg.emitters,
            cfg.truncation.threshold,
            cfg.truncation.n_max,
        )?),
    }
}

fn require_two_emitters(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.emitters.len() != 2 {
        return Err(CliError::Usage(format!(
            "this subcommand needs exactly 2 emitters, config has {}",
            cfg.emitters.len()
        )));
    }
    Ok(())
}

/// Checks that depend only on the configuration, so that usage errors never
/// leave partial output behind.
fn precheck(name: Subcommand, cfg: &RunConfig) -> Result<(), CliError> {
    let empty = |what: &str| Err(CliError::Usage(format!("{what} grid is empty")));
    match name {
        Subcommand::Ldos | Subcommand::Modes => Ok(()),
        Subcommand::Couplings | Subcommand::Stirap => require_two_emitters(cfg),
        Subcommand::Scan | Subcommand::Truncation => {
            require_two_emitters(cfg)?;
            if cfg.scan.phi_grid().is_empty() {
                return empty("phi");
            }
            if cfg.scan.areas.is_empty() {
                return empty("area");
            }
            if name == Subcommand::Truncation && cfg.scan.mode_counts.is_empty() {
                return empty("mode_counts");
            }
            Ok(())
        }
        Subcommand::Distances => {
            require_two_emitters(cfg)?;
            if cfg.scan.distances_nm.is_empty() {
                return empty("distance");
            }
            if cfg.scan.distances_nm.iter().any(|d| !(*d > 0.0)) {
                return Err(CliError::Usage("distances_nm must be positive".into()));
            }
            Ok(())
        }
    }
}

/// Parses `config_text`, runs `name` and writes its artifacts plus the
/// manifest into `out` (or the configured output directory).
pub fn run_subcommand(
    name: Subcommand,
    config_text: &str,
    out: Option<&Path>,
) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let cfg = parse_config(config_text)?;
    precheck(name, &cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.clone());
    // compute everything before touching the filesystem
    let files = match name {
        Subcommand::Ldos => ldos(&cfg)?,
        Subcommand::Modes => modes(&cfg)?,
        Subcommand::Couplings => couplings(&cfg)?,
        Subcommand::Stirap => stirap(&cfg)?,
        Subcommand::Scan => scan(&cfg)?,
        Subcommand::Truncation => truncation(&cfg)?,
        Subcommand::Distances => distances(&cfg)?,
    };
    let mut writer = ArtifactWriter::create(&dir)?;
    writer.write("config.echo.cfg", &cfg.echo())?;
    for (file, contents) in &files {
        writer.write(file, contents)?;
    }
    Ok(writer.finish(name.name(), config_text, start.elapsed().as_secs_f64())?)
}

type Files = Vec<(String, String)>;

fn json_text(v: serde_json::Value) -> String {
    serde_json::to_string_pretty(&v).expect("json serializes") + "\n"
}

fn ldos(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let model = &cfg.nanoparticle;
    let grid = linspace(
        cfg.numerics.ldos_omega_min_ev,
        cfg.numerics.ldos_omega_max_ev,
        cfg.numerics.ldos_points.max(2),
    );
    let mut table = String::from("emitter,n,omega_ev,ldos\n");
    let mut peaks = String::from("emitter,n,omega_peak_ev,peak_ldos\n");
    for (i, e) in cfg.emitters.iter().enumerate() {
        for n in 1..=n_modes {
            for &w in &grid {
                let v = greens::partial_ldos(model, e, n, w)?;
                let _ = writeln!(table, "{i},{n},{},{}", fmt_f64(w), fmt_f64(v));
            }
            let (w, v) = greens::peak_partial_ldos(model, e, n)?;
            let _ = writeln!(peaks, "{i},{n},{},{}", fmt_f64(w), fmt_f64(v));
        }
    }
    let summary = json!({ "n_modes": n_modes, "emitters": cfg.emitters.len() });
    Ok(vec![
        ("ldos.csv".into(), table),
        ("ldos_peaks.csv".into(), peaks),
        ("summary.json".into(), json_text(summary)),
    ])
}

fn modes(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let res =
        greens::resolve_resonances(&cfg.nanoparticle, &cfg.emitters, n_modes, &cfg.fit_window())?;
    let mut out = String::from("n,omega_n_ev,gamma_n_ev");
    for i in 0..cfg.emitters.len() {
        let _ = write!(out, ",g_{}_ev", i + 1);
    }
    out.push_str(",residual\n");
    for r in &res {
        let _ = write!(
            out,
            "{},{},{}",
            r.mode_n,
            fmt_f64(r.omega_n),
            fmt_f64(r.gamma_n)
        );
        for g in &r.g_amplitudes {
            let _ = write!(out, ",{}", fmt_f64(*g));
        }
        let _ = writeln!(out, ",{}", fmt_f64(r.residual));
    }
    let worst = res.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(vec![
        ("modes.csv".into(), out),
        (
            "summary.json".into(),
            json_text(json!({ "n_modes": n_modes, "max_relative_residual": worst })),
        ),
    ])
}

fn couplings(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let table = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n_modes, &cfg.fit_window())?;
    let mut out = String::from(
        "n,mu12,lambda1,lambda2,rank,g11_re,g11_im,g12_re,g12_im,g21_re,g21_im,g22_re,g22_im\n",
    );
    for r in &table.resonances {
        let m = overlap_for_mode(&cfg.nanoparticle, &cfg.emitters, r.mode_n, r.omega_n)?;
        let local: Vec<_> = r
            .g_amplitudes
            .iter()
            .map(|&g| num_complex::Complex64::new(g, 0.0))
            .collect();
        let dec = canonical_orthonormalize(&m, &local, cfg.numerics.rank_tol)?;
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.mode_n,
            fmt_f64(m.mu(0, 1).re),
            fmt_f64(dec.lambdas[0]),
            fmt_f64(dec.lambdas[1]),
            dec.rank
        );
        for i in 0..2 {
            for j in 0..2 {
                let g = if j < dec.rank {
                    dec.kappa_bright[(i, j)]
                } else {
                    num_complex::Complex64::new(0.0, 0.0)
                };
                let _ = write!(out, ",{},{}", fmt_f64(g.re), fmt_f64(g.im));
            }
        }
        out.push('\n');
    }
    let h = table.effective(
        None,
        n_modes,
        cfg.numerics.rank_tol,
        cfg.numerics.loss_convention,
    )?;
    let reduced = adiabatic_eliminate(&h)?;
    let j = reduced.cross_coupling();
    let (s1, s2) = (reduced.self_energy(0), reduced.self_energy(1));
    let summary = json!({
        "n_modes": n_modes,
        "dimension": h.dim(),
        "phi_rad": cfg.phi(),
        "cross_coupling_ev": [j.re, j.im],
        "self_energy_1_ev": [s1.re, s1.im],
        "self_energy_2_ev": [s2.re, s2.im],
    });
    Ok(vec![
        ("couplings.csv".into(), out),
        ("hamiltonian.csv".into(), h.to_csv()),
        ("reduced.csv".into(), reduced.to_csv()),
        ("summary.json".into(), json_text(summary)),
    ])
}

fn path_name(p: PropagationPath) -> String {
    match p {
        PropagationPath::Reduced => "reduced".into(),
        PropagationPath::Full { rescale } => format!("full(rescale={rescale})"),
    }
}

fn stirap(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let table = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n_modes, &cfg.fit_window())?;
    let settings = cfg.stirap_settings();
    let h = table.effective(None, n_modes, settings.rank_tol, settings.convention)?;
    let traj = run_stirap(
        &h,
        &settings.pulses(cfg.pulses.area),
        settings.path,
        &settings.propagation,
    )?;
    let mut csv = String::from("t");
    for l in &traj.labels {
        let _ = write!(csv, ",{l}");
    }
    csv.push_str(",norm\n");
    for (k, t) in traj.times.iter().enumerate() {
        let _ = write!(csv, "{}", fmt_f64(units::internal_to_ns(*t)));
        let pops = traj.populations(k);
        for p in &pops {
            let _ = write!(csv, ",{}", fmt_f64(*p));
        }
        let _ = writeln!(csv, ",{}", fmt_f64(pops.iter().sum()));
    }
    let last = traj.times.len() - 1;
    let summary = json!({
        "efficiency": transfer_efficiency(&traj),
        "phi_rad": cfg.phi(),
        "n_modes": n_modes,
        "dimension": h.dim(),
        "path": path_name(settings.path),
        "area": cfg.pulses.area,
        "tau_over_t": cfg.pulses.tau_over_t,
        "t_ns": cfg.pulses.t_ns,
        "final_norm": traj.norm_sqr(last),
        "peak_plasmon_population": match settings.path {
            PropagationPath::Reduced => None,
            PropagationPath::Full { .. } => Some(traj.stats.peak_plasmon_population),
        },
        "accepted_steps": traj.stats.accepted_steps,
        "rejected_steps": traj.stats.rejected_steps,
    });
    Ok(vec![
        ("trajectory.csv".into(), csv),
        ("summary.json".into(), json_text(summary)),
    ])
}

fn cells_csv(header: &str, prefix: Option<usize>, cells: &[ScanCell], out: &mut String) {
    if out.is_empty() {
        out.push_str(header);
    }
    for c in cells {
        if let Some(m) = prefix {
            let _ = write!(out, "{m},");
        }
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(c.phi),
            fmt_f64(c.area),
            fmt_f64(c.efficiency),
            c.status
        );
    }
}

fn scan(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let table = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n_modes, &cfg.fit_window())?;
    let settings = cfg.stirap_settings();
    let cells = scan_angle_area(
        &table,
        n_modes,
        &settings,
        &cfg.scan.phi_grid(),
        &cfg.scan.areas,
    )?;
    let mut csv = String::new();
    cells_csv("phi,area,efficiency,status\n", None, &cells, &mut csv);
    let failed = cells.iter().filter(|c| !c.is_ok()).count();
    let summary = json!({
        "n_modes": n_modes,
        "cells": cells.len(),
        "failed_cells": failed,
        "path": path_name(settings.path),
    });
    Ok(vec![
        ("scan.csv".into(), csv),
        ("summary.json".into(), json_text(summary)),
    ])
}

fn truncation(cfg: &RunConfig) -> Result<Files, Error> {
    let n_modes = mode_count(cfg)?;
    let top = cfg.scan.mode_counts.iter().copied().max().unwrap_or(1);
    if top > n_modes {
        return Err(Error::Setup(format!(
            "mode count {top} exceeds the {n_modes} modes selected for this geometry"
        )));
    }
    let table = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n_modes, &cfg.fit_window())?;
    let settings = cfg.stirap_settings();
    let scans = truncation_study(
        &table,
        &settings,
        &cfg.scan.mode_counts,
        &cfg.scan.phi_grid(),
        &cfg.scan.areas,
    )?;
    let mut csv = String::new();
    for s in &scans {
        cells_csv(
            "modes,phi,area,efficiency,status\n",
            Some(s.mode_count),
            &s.cells,
            &mut csv,
        );
    }
    let summary = json!({
        "n_modes": n_modes,
        "mode_counts": cfg.scan.mode_counts,
        "path": path_name(settings.path),
    });
    Ok(vec![
        ("truncation.csv".into(), csv),
        ("summary.json".into(), json_text(summary)),
    ])
}

fn distances(cfg: &RunConfig) -> Result<Files, Error> {
    let settings = cfg.stirap_settings();
    let rows = distance_study(
        &cfg.nanoparticle,
        &cfg.emitters,
        &cfg.fit_window(),
        cfg.truncation(),
        &settings,
        &cfg.scan.distances_nm,
        cfg.scan.distance_phi_rad,
        cfg.pulses.area,
    )?;
    let mut csv = String::from("distance_nm,n_prime,efficiency,status\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(r.distance_nm),
            r.n_prime,
            fmt_f64(r.efficiency),
            r.status
        );
    }
    let summary = json!({
        "phi_rad": cfg.scan.distance_phi_rad,
        "area": cfg.pulses.area,
        "path": path_name(settings.path),
    });
    Ok(vec![
        ("distances.csv".into(), csv),
        ("summary.json".into(), json_text(summary)),
    ])
}
