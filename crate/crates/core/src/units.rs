//! Physical constants and unit conversions.
//!
//! Internally ħ = 1: energies are in eV, times in ħ/eV, lengths in nm.
//! Dipoles enter in Debye and are converted to SI only where the coupling
//! prefactor is formed.

/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// One Debye in C·m.
pub const DEBYE_C_M: f64 = 3.335_640_952e-30;

/// Vacuum permittivity in F/m.
pub const EPS0_F_M: f64 = 8.854_187_812_8e-12;

/// Elementary charge in C.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;

/// Converts nanoseconds to internal time units (ħ/eV).
pub fn ns_to_internal(ns: f64) -> f64 {
    ns * 1e-9 / HBAR_EV_S
}

/// Converts internal time units (ħ/eV) to nanoseconds.
pub fn internal_to_ns(t: f64) -> f64 {
    t * HBAR_EV_S * 1e9
}

/// Vacuum wavenumber in nm⁻¹ for a photon energy in eV.
pub fn wavenumber_nm(omega_ev: f64) -> f64 {
    omega_ev / HBAR_C_EV_NM
}

/// `d² / (π ε₀)` expressed in eV·nm³ for a dipole given in Debye.
///
/// Multiplying by `k² · Im G` (both in nm units) yields `ħ|κ|²` in eV.
pub fn dipole_coupling_prefactor(dipole_debye: f64) -> f64 {
    let d = dipole_debye * DEBYE_C_M;
    d * d / (std::f64::consts::PI * EPS0_F_M) / ELEMENTARY_CHARGE_C * 1e27
}
