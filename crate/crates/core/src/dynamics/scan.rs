//! Parameter scans over angle, pulse area, mode truncation and distance.
//! Cells run in parallel; results always come back in grid order.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{transfer_efficiency, PropagationOptions, PropagationPath, PulsePair};
use crate::greens::{self, EmitterSpec, FitWindow, NanoparticleModel};
use crate::hamiltonian::{EffectiveHamiltonian, LossConvention};
use crate::system::{run_stirap, CouplingTable};
use crate::Error;

/// Everything about a STIRAP run except the area and geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirapSettings {
    pub tau_over_t: f64,
    /// Pulse width `T` in ħ/eV.
    pub width_t: f64,
    pub path: PropagationPath,
    pub propagation: PropagationOptions,
    pub rank_tol: f64,
    pub convention: LossConvention,
}

impl StirapSettings {
    pub fn pulses(&self, area: f64) -> PulsePair {
        PulsePair::from_area(area, self.tau_over_t, self.width_t)
    }

    /// Transfer efficiency for one Hamiltonian and area.
    pub fn efficiency(&self, h: &EffectiveHamiltonian, area: f64) -> Result<f64, Error> {
        let traj = run_stirap(h, &self.pulses(area), self.path, &self.propagation)?;
        Ok(transfer_efficiency(&traj))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            // keep CSV fields free of separators
            CellStatus::Failed(msg) => write!(f, "error: {}", msg.replace([',', '\n'], ";")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub phi: f64,
    pub area: f64,
    /// `NaN` when the cell failed.
    pub efficiency: f64,
    pub status: CellStatus,
}

impl ScanCell {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

fn cell(phi: f64, area: f64, result: Result<f64, Error>) -> ScanCell {
    match result {
        Ok(efficiency) => ScanCell {
            phi,
            area,
            efficiency,
            status: CellStatus::Ok,
        },
        Err(e) => ScanCell {
            phi,
            area,
            efficiency: f64::NAN,
            status: CellStatus::Failed(e.to_string()),
        },
    }
}

fn require_nonempty(name: &str, grid: &[f64]) -> Result<(), Error> {
    if grid.is_empty() {
        Err(Error::Setup(format!("{name} grid is empty")))
    } else {
        Ok(())
    }
}

/// Efficiency for every `(φ, Ω₀T)` pair, `φ`-major.
pub fn scan_angle_area(
    table: &CouplingTable,
    n_modes: usize,
    settings: &StirapSettings,
    phi_grid: &[f64],
    area_grid: &[f64],
) -> Result<Vec<ScanCell>, Error> {
    require_nonempty("phi", phi_grid)?;
    require_nonempty("area", area_grid)?;
    let hams: Vec<Result<EffectiveHamiltonian, Error>> = phi_grid
        .par_iter()
        .map(|&phi| table.effective(Some(phi), n_modes, settings.rank_tol, settings.convention))
        .collect();
    let jobs: Vec<(usize, f64)> = (0..phi_grid.len())
        .flat_map(|i| area_grid.iter().map(move |&a| (i, a)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, area)| {
            let result = match &hams[i] {
                Ok(h) => settings.efficiency(h, area),
                Err(e) => Err(e.clone()),
            };
            cell(phi_grid[i], area, result)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationScan {
    pub mode_count: usize,
    pub cells: Vec<ScanCell>,
}

/// Repeats [`scan_angle_area`] keeping only modes `1..=m` for each `m`.
pub fn truncation_study(
    table: &CouplingTable,
    settings: &StirapSettings,
    mode_counts: &[usize],
    phi_grid: &[f64],
    area_grid: &[f64],
) -> Result<Vec<TruncationScan>, Error> {
    if mode_counts.is_empty() {
        return Err(Error::Setup("mode_counts is empty".into()));
    }
    if let Some(&bad) = mode_counts.iter().find(|&&m| m == 0 || m > table.n_modes()) {
        return Err(Error::Setup(format!(
            "mode count {bad} outside 1..={}",
            table.n_modes()
        )));
    }
    mode_counts
        .iter()
        .map(|&m| {
            Ok(TruncationScan {
                mode_count: m,
                cells: scan_angle_area(table, m, settings, phi_grid, area_grid)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub distance_nm: f64,
    pub n_prime: usize,
    pub efficiency: f64,
    pub status: CellStatus,
}

/// Mode-selection inputs for [`distance_study`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub threshold: f64,
    pub n_max: usize,
}

/// Places both emitters at each distance, picks `n′` from the partial LDOS
/// and runs STIRAP at angle `phi` and pulse area `area`.
#[allow(clippy::too_many_arguments)]
pub fn distance_study(
    model: &NanoparticleModel,
    emitters: &[EmitterSpec],
    window: &FitWindow,
    truncation: Truncation,
    settings: &StirapSettings,
    d_grid: &[f64],
    phi: f64,
    area: f64,
) -> Result<Vec<DistanceRow>, Error> {
    require_nonempty("distance", d_grid)?;
    if let Some(&bad) = d_grid.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::Setup(format!("distance {bad} nm must be positive")));
    }
    Ok(d_grid
        .par_iter()
        .map(|&d| {
            let placed: Vec<EmitterSpec> = emitters
                .iter()
                .map(|e| EmitterSpec {
                    distance_nm: d,
                    ..*e
                })
                .collect();
            let run = || -> Result<(usize, f64), (usize, Error)> {
                let n_prime =
                    greens::select_modes(model, &placed, truncation.threshold, truncation.n_max)
                        .map_err(|e| (0, e.into()))?;
                let eff = CouplingTable::build(model, &placed, n_prime, window)
                    .and_then(|t| {
                        t.effective(Some(phi), n_prime, settings.rank_tol, settings.convention)
                    })
                    .and_then(|h| settings.efficiency(&h, area))
                    .map_err(|e| (n_prime, e))?;
                Ok((n_prime, eff))
            };
            match run() {
                Ok((n_prime, efficiency)) => DistanceRow {
                    distance_nm: d,
                    n_prime,
                    efficiency,
                    status: CellStatus::Ok,
                },
                Err((n_prime, e)) => DistanceRow {
                    distance_nm: d,
                    n_prime,
                    efficiency: f64::NAN,
                    status: CellStatus::Failed(e.to_string()),
                },
            }
        })
        .collect())
}
