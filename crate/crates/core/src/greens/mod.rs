//! Quasistatic multipole response of a Drude nanosphere and the per-mode
//! emitter coupling spectra derived from it.
//!
//! Only radially oriented dipoles are handled. For those, the `rr` component
//! of mode `n` of the scattered Green tensor between two points at radii
//! `r1`, `r2` separated by the angle `γ` is
//!
//! ```text
//! G_n(r1, r2) = C · (c/ω)² · (n+1)² · α_n(ω) · P_n(cos γ) / (r1 r2)^(n+2)
//! ```
//!
//! with `α_n` the multipole polarizability and `C = green_scale / (4π ε_b)`.

mod fit;
mod legendre;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units;

pub use fit::{fit_lorentzian, lorentzian_amplitude, ModeFit};
pub use legendre::legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("{what} must be positive, got {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("mode {n} has an exact pole at omega = {omega} eV (lossless metal)")]
    Singular { n: usize, omega: f64 },
    #[error("radial position {r_nm} nm is not outside the sphere of radius {radius_nm} nm")]
    Geometry { r_nm: f64, radius_nm: f64 },
    #[error("invalid nanoparticle parameter `{field}`: {reason}")]
    InvalidModel { field: &'static str, reason: String },
    #[error("invalid emitter parameter `{field}`: {reason}")]
    InvalidEmitter { field: &'static str, reason: String },
    #[error("frequency grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("mode {n}: spectrum peak at {peak_omega} eV sits on the grid boundary")]
    FitWindow { n: usize, peak_omega: f64 },
    #[error("mode {n}: Lorentzian fit did not converge (relative residual {residual:.3e})")]
    Fit { n: usize, residual: f64 },
    #[error("mode {n} has no resonance for these Drude parameters")]
    NoResonance { n: usize },
}

fn default_green_scale() -> f64 {
    1.0
}

/// Sphere radius, Drude metal and embedding medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NanoparticleModel {
    pub radius_nm: f64,
    pub eps_inf: f64,
    pub omega_p_ev: f64,
    pub gamma_p_ev: f64,
    pub eps_background: f64,
    /// Overall multiplier on the Green-tensor normalization `1/(4π ε_b)`.
    #[serde(default = "default_green_scale")]
    pub green_scale: f64,
}

impl NanoparticleModel {
    /// Silver-like placeholder parameters used by the shipped presets.
    pub fn silver_like(radius_nm: f64) -> Self {
        Self {
            radius_nm,
            eps_inf: 6.0,
            omega_p_ev: 9.0,
            gamma_p_ev: 0.07,
            eps_background: 2.13,
            green_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), GreensError> {
        let bad = |field, reason: &str| GreensError::InvalidModel {
            field,
            reason: reason.to_string(),
        };
        if !(self.radius_nm > 0.0 && self.radius_nm.is_finite()) {
            return Err(bad("radius_nm", "must be positive"));
        }
        if !(self.omega_p_ev > 0.0 && self.omega_p_ev.is_finite()) {
            return Err(bad("omega_p_ev", "must be positive"));
        }
        if !(self.gamma_p_ev >= 0.0 && self.gamma_p_ev.is_finite()) {
            return Err(bad("gamma_p_ev", "must be non-negative"));
        }
        if !(self.eps_inf >= 1.0 && self.eps_inf.is_finite()) {
            return Err(bad("eps_inf", "must be at least 1"));
        }
        if !(self.eps_background >= 1.0 && self.eps_background.is_finite()) {
            return Err(bad("eps_background", "must be at least 1"));
        }
        if !(self.green_scale > 0.0 && self.green_scale.is_finite()) {
            return Err(bad("green_scale", "must be positive"));
        }
        Ok(())
    }

    /// Green-tensor normalization constant `C`.
    pub fn green_constant(&self) -> f64 {
        self.green_scale / (4.0 * PI * self.eps_background)
    }

    /// Resonance of mode `n`: the root of `Re[n ε_m + (n+1) ε_b]`.
    pub fn resonance_estimate(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let target = self.eps_inf + (nf + 1.0) / nf * self.eps_background;
        let w2 = self.omega_p_ev * self.omega_p_ev / target - self.gamma_p_ev * self.gamma_p_ev;
        (w2 > 0.0).then(|| w2.sqrt())
    }

    /// Half-width of `|κ_n|²` around resonance from the linearized
    /// denominator, `Im ε_m / (dRe ε_m/dω)`.
    pub fn linewidth_estimate(&self, n: usize) -> Option<f64> {
        let w = self.resonance_estimate(n)?;
        let wp2 = self.omega_p_ev * self.omega_p_ev;
        let d = w * w + self.gamma_p_ev * self.gamma_p_ev;
        let im = wp2 * self.gamma_p_ev / (w * d);
        let slope = 2.0 * wp2 * w / (d * d);
        Some(im / slope)
    }
}

/// A radially oriented three-level emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSpec {
    /// Distance from the metal surface.
    pub distance_nm: f64,
    pub polar_angle_rad: f64,
    pub dipole_debye: f64,
    pub omega_eg_ev: f64,
    pub omega_fg_ev: f64,
}

impl EmitterSpec {
    pub fn validate(&self) -> Result<(), GreensError> {
        let bad = |field, reason: &str| GreensError::InvalidEmitter {
            field,
            reason: reason.to_string(),
        };
        if !(self.distance_nm > 0.0 && self.distance_nm.is_finite()) {
            return Err(bad("distance_nm", "must be positive"));
        }
        if !self.polar_angle_rad.is_finite() {
            return Err(bad("polar_angle_rad", "must be finite"));
        }
        if !(self.dipole_debye > 0.0 && self.dipole_debye.is_finite()) {
            return Err(bad("dipole_debye", "must be positive"));
        }
        if !(self.omega_eg_ev > 0.0 && self.omega_eg_ev.is_finite()) {
            return Err(bad("omega_eg_ev", "must be positive"));
        }
        if !(self.omega_fg_ev >= 0.0 && self.omega_fg_ev < self.omega_eg_ev) {
            return Err(bad("omega_fg_ev", "must satisfy 0 <= omega_fg < omega_eg"));
        }
        Ok(())
    }

    /// Distance from the sphere centre.
    pub fn radial_position(&self, model: &NanoparticleModel) -> f64 {
        model.radius_nm + self.distance_nm
    }

    /// Angle between the position vectors of two emitters.
    pub fn angle_to(&self, other: &EmitterSpec) -> f64 {
        (self.polar_angle_rad - other.polar_angle_rad).abs()
    }
}

/// `|κ_{ω,n}(r)|` sampled on a frequency grid. Values are real and
/// non-negative (the phase of `κ` is a free convention).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpectrum {
    pub mode_n: usize,
    pub emitter_index: usize,
    pub samples: Vec<(f64, Complex64)>,
}

/// Fitted Lorentzian parameters of one mode plus its per-emitter amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeResonance {
    pub mode_n: usize,
    pub omega_n: f64,
    /// Lorentzian half-width.
    pub gamma_n: f64,
    /// `g_n(r_i)` per emitter, in eV.
    pub g_amplitudes: Vec<f64>,
    /// Worst relative RMS residual across the per-emitter fits.
    pub residual: f64,
}

/// Frequency window used to sample and fit each mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    /// Half-extent of the window in units of the estimated half-width.
    pub halfwidths: f64,
    pub points: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            halfwidths: 3.0,
            points: 201,
        }
    }
}

impl FitWindow {
    pub fn grid(&self, model: &NanoparticleModel, n: usize) -> Result<Vec<f64>, GreensError> {
        let centre = model
            .resonance_estimate(n)
            .ok_or(GreensError::NoResonance { n })?;
        let width = model
            .linewidth_estimate(n)
            .filter(|w| *w > 0.0)
            .ok_or(GreensError::Singular { n, omega: centre })?;
        let lo = (centre - self.halfwidths * width).max(1e-6);
        let hi = centre + self.halfwidths * width;
        Ok(linspace(lo, hi, self.points.max(3)))
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

fn check_omega(omega: f64) -> Result<(), GreensError> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(GreensError::Domain {
            what: "omega",
            value: omega,
        })
    }
}

fn check_mode(n: usize) -> Result<(), GreensError> {
    if n == 0 {
        Err(GreensError::Domain {
            what: "mode index",
            value: 0.0,
        })
    } else {
        Ok(())
    }
}

/// Drude permittivity `ε_m(ω) = ε_∞ − ω_p² / (ω² + iγ_p ω)`.
pub fn drude_permittivity(model: &NanoparticleModel, omega: f64) -> Result<Complex64, GreensError> {
    check_omega(omega)?;
    let denom = Complex64::new(omega * omega, model.gamma_p_ev * omega);
    Ok(model.eps_inf - model.omega_p_ev * model.omega_p_ev / denom)
}

/// Dimensionless multipole factor `n(ε_m − ε_b) / (n ε_m + (n+1) ε_b)`.
fn polarizability_factor(
    model: &NanoparticleModel,
    n: usize,
    omega: f64,
) -> Result<Complex64, GreensError> {
    check_mode(n)?;
    let eps = drude_permittivity(model, omega)?;
    let nf = n as f64;
    let eb = model.eps_background;
    let den = nf * eps + (nf + 1.0) * eb;
    let scale = nf * eps.norm() + (nf + 1.0) * eb;
    if model.gamma_p_ev == 0.0 && den.norm() <= 1e-14 * scale {
        return Err(GreensError::Singular { n, omega });
    }
    Ok(nf * (eps - eb) / den)
}

/// Multipole polarizability `α_n(ω)` of the sphere, in nm^(2n+1).
pub fn mode_polarizability(
    model: &NanoparticleModel,
    n: usize,
    omega: f64,
) -> Result<Complex64, GreensError> {
    let f = polarizability_factor(model, n, omega)?;
    Ok(f * model.radius_nm.powi(2 * n as i32 + 1))
}

/// `Im[r̂·G_n(r1, r2)·r̂]` in nm⁻¹ for radial unit dipoles at radii `r1`,
/// `r2` (nm from the centre) separated by the angle `gamma_angle_rad`.
pub fn im_green_radial(
    model: &NanoparticleModel,
    n: usize,
    omega: f64,
    r1_nm: f64,
    r2_nm: f64,
    gamma_angle_rad: f64,
) -> Result<f64, GreensError> {
    check_mode(n)?;
    for r in [r1_nm, r2_nm] {
        if !(r > model.radius_nm) {
            return Err(GreensError::Geometry {
                r_nm: r,
                radius_nm: model.radius_nm,
            });
        }
    }
    let f = polarizability_factor(model, n, omega)?;
    let k = units::wavenumber_nm(omega);
    let big_r = model.radius_nm;
    let rr = r1_nm * r2_nm;
    // R^(2n+1) / (r1 r2)^(n+2), arranged to stay finite for large n.
    let radial = (big_r * big_r / rr).powi(n as i32) * big_r / (rr * rr);
    let nf = n as f64;
    let angular = legendre(n, gamma_angle_rad.cos());
    Ok(model.green_constant() / (k * k) * (nf + 1.0).powi(2) * f.im * radial * angular)
}

/// `ħ|κ_{ω,n}(r)|²` in eV for a radial emitter.
fn kappa_squared(
    model: &NanoparticleModel,
    emitter: &EmitterSpec,
    n: usize,
    omega: f64,
) -> Result<f64, GreensError> {
    let r = emitter.radial_position(model);
    let img = im_green_radial(model, n, omega, r, r, 0.0)?;
    let k = units::wavenumber_nm(omega);
    Ok(units::dipole_coupling_prefactor(emitter.dipole_debye) * k * k * img)
}

/// Samples `κ_{ω,n}(r)` for one emitter on `omega_grid`.
pub fn coupling_spectrum(
    model: &NanoparticleModel,
    emitter: &EmitterSpec,
    emitter_index: usize,
    n: usize,
    omega_grid: &[f64],
) -> Result<CouplingSpectrum, GreensError> {
    if omega_grid.is_empty() || omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GreensError::BadGrid);
    }
    let samples = omega_grid
        .iter()
        .map(|&w| {
            let k2 = kappa_squared(model, emitter, n, w)?;
            Ok((w, Complex64::new(k2.max(0.0).sqrt(), 0.0)))
        })
        .collect::<Result<Vec<_>, GreensError>>()?;
    Ok(CouplingSpectrum {
        mode_n: n,
        emitter_index,
        samples,
    })
}

/// Partial LDOS of mode `n` at the emitter, normalized to the vacuum value
/// `Im G_0 = k / 6π`.
pub fn partial_ldos(
    model: &NanoparticleModel,
    emitter: &EmitterSpec,
    n: usize,
    omega: f64,
) -> Result<f64, GreensError> {
    let r = emitter.radial_position(model);
    let img = im_green_radial(model, n, omega, r, r, 0.0)?;
    let k = units::wavenumber_nm(omega);
    Ok(img / (k / (6.0 * PI)))
}

/// Maximum over frequency of the partial LDOS of mode `n`, located by
/// golden-section search around the resonance. Returns `(omega, value)`.
pub fn peak_partial_ldos(
    model: &NanoparticleModel,
    emitter: &EmitterSpec,
    n: usize,
) -> Result<(f64, f64), GreensError> {
    if model.gamma_p_ev == 0.0 {
        return Err(GreensError::InvalidModel {
            field: "gamma_p_ev",
            reason: "peak LDOS is unbounded for a lossless metal".into(),
        });
    }
    let centre = model
        .resonance_estimate(n)
        .ok_or(GreensError::NoResonance { n })?;
    let width = model.linewidth_estimate(n).unwrap_or(model.gamma_p_ev);
    let (mut a, mut b) = ((centre - 6.0 * width).max(1e-6), centre + 6.0 * width);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |w: f64| partial_ldos(model, emitter, n, w);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * centre {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let w = 0.5 * (a + b);
    Ok((w, f(w)?))
}

/// Truncation index: the smallest `n′ ≤ n_max` such that for every emitter
/// all modes above `n′` have a peak partial LDOS below `threshold` times that
/// emitter's largest peak.
pub fn select_modes(
    model: &NanoparticleModel,
    emitters: &[EmitterSpec],
    threshold: f64,
    n_max: usize,
) -> Result<usize, GreensError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(GreensError::Domain {
            what: "threshold (must lie in (0,1))",
            value: threshold,
        });
    }
    let n_max = n_max.max(1);
    let mut n_prime = 1;
    for emitter in emitters {
        let peaks = (1..=n_max)
            .map(|n| peak_partial_ldos(model, emitter, n).map(|p| p.1))
            .collect::<Result<Vec<_>, _>>()?;
        let top = peaks.iter().cloned().fold(0.0, f64::max);
        if let Some(last) = peaks.iter().rposition(|&p| p >= threshold * top) {
            n_prime = n_prime.max(last + 1);
        }
    }
    if n_prime == n_max {
        log::warn!("mode truncation clamped to n_max = {n_max}");
    }
    Ok(n_prime)
}

/// Samples, fits and collects the Lorentzian parameters of modes
/// `1..=n_modes` for every emitter.
pub fn resolve_resonances(
    model: &NanoparticleModel,
    emitters: &[EmitterSpec],
    n_modes: usize,
    window: &FitWindow,
) -> Result<Vec<ModeResonance>, GreensError> {
    (1..=n_modes)
        .map(|n| {
            let grid = window.grid(model, n)?;
            let fits = emitters
                .iter()
                .enumerate()
                .map(|(i, e)| fit_lorentzian(&coupling_spectrum(model, e, i, n, &grid)?))
                .collect::<Result<Vec<_>, _>>()?;
            let first = fits.first().ok_or(GreensError::BadGrid)?;
            for f in &fits[1..] {
                if (f.omega_n - first.omega_n).abs() > 1e-6 * first.omega_n {
                    log::warn!(
                        "mode {n}: per-emitter resonance fits disagree ({} vs {} eV)",
                        first.omega_n,
                        f.omega_n
                    );
                }
            }
            Ok(ModeResonance {
                mode_n: n,
                omega_n: first.omega_n,
                gamma_n: first.gamma_n,
                g_amplitudes: fits.iter().map(|f| f.g).collect(),
                residual: fits.iter().map(|f| f.residual).fold(0.0, f64::max),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lossless_unit() -> NanoparticleModel {
        NanoparticleModel {
            radius_nm: 8.0,
            eps_inf: 1.0,
            omega_p_ev: 9.0,
            gamma_p_ev: 0.0,
            eps_background: 1.0,
            green_scale: 1.0,
        }
    }

    fn emitter(d: f64) -> EmitterSpec {
        EmitterSpec {
            distance_nm: d,
            polar_angle_rad: 0.0,
            dipole_debye: 10.0,
            omega_eg_ev: 1.9,
            omega_fg_ev: 0.3,
        }
    }

    #[test]
    fn drude_zero_crossing_and_frohlich_point() {
        let m = lossless_unit();
        assert!(drude_permittivity(&m, 9.0).unwrap().norm() < 1e-15);
        let e = drude_permittivity(&m, 9.0 / 3f64.sqrt()).unwrap();
        assert_relative_eq!(e.re, -2.0, epsilon = 1e-13);
        assert_eq!(e.im, 0.0);
    }

    #[test]
    fn drude_high_frequency_limit() {
        let m = NanoparticleModel::silver_like(8.0);
        let e = drude_permittivity(&m, 1e3 * m.omega_p_ev).unwrap();
        assert!((e - m.eps_inf).norm() / m.eps_inf < 1e-5);
        assert!(e.im >= 0.0);
    }

    #[test]
    fn drude_rejects_nonpositive_frequency() {
        let m = NanoparticleModel::silver_like(8.0);
        assert!(matches!(
            drude_permittivity(&m, 0.0),
            Err(GreensError::Domain { .. })
        ));
        assert!(drude_permittivity(&m, -1.0).is_err());
    }

    #[test]
    fn index_matched_sphere_is_invisible() {
        let mut m = lossless_unit();
        m.eps_inf = 2.0;
        let w = m.omega_p_ev; // eps_m = 1 = eps_b
        for n in 1..6 {
            assert!(mode_polarizability(&m, n, w).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn exact_pole_is_reported() {
        let m = lossless_unit();
        // eps_m = -2 exactly at omega_p / sqrt(3) for the dipole
        let w = 9.0 / 3f64.sqrt();
        let e = drude_permittivity(&m, w).unwrap();
        if (e.re + 2.0).abs() < 1e-15 {
            assert!(matches!(
                mode_polarizability(&m, 1, w),
                Err(GreensError::Singular { .. })
            ));
        }
    }

    #[test]
    fn resonance_matches_bisection_root() {
        let m = lossless_unit();
        for n in 1..12 {
            let nf = n as f64;
            let re_den = |w: f64| {
                let e = drude_permittivity(&m, w).unwrap();
                nf * e.re + (nf + 1.0) * m.eps_background
            };
            let (mut a, mut b) = (1.0, 9.0);
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if re_den(a) * re_den(c) <= 0.0 {
                    b = c
                } else {
                    a = c
                }
            }
            let root = 0.5 * (a + b);
            let expected = 9.0 * (nf / (2.0 * nf + 1.0)).sqrt();
            assert_relative_eq!(root, expected, max_relative = 1e-12);
            assert_relative_eq!(m.resonance_estimate(n).unwrap(), root, max_relative = 1e-12);
        }
    }

    #[test]
    fn polarizability_scales_with_radius_power() {
        let mut m = NanoparticleModel::silver_like(4.0);
        let a1 = mode_polarizability(&m, 3, 3.0).unwrap();
        m.radius_nm = 8.0;
        let a2 = mode_polarizability(&m, 3, 3.0).unwrap();
        assert_relative_eq!((a2 / a1).re, 128.0, max_relative = 1e-12);
        assert!(a2.im > 0.0);
    }

    #[test]
    fn green_sign_and_power_laws() {
        let m = NanoparticleModel::silver_like(8.0);
        let w = 3.0;
        for n in 1..8 {
            let g0 = im_green_radial(&m, n, w, 10.0, 10.0, 0.0).unwrap();
            assert!(g0 > 0.0);
            let gpi = im_green_radial(&m, n, w, 10.0, 10.0, PI).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(gpi, sign * g0, max_relative = 1e-12);
            let far = im_green_radial(&m, n, w, 20.0, 10.0, 0.0).unwrap();
            assert_relative_eq!(g0 / far, 2f64.powi(n as i32 + 2), max_relative = 1e-12);
        }
    }

    #[test]
    fn green_rejects_points_inside_sphere() {
        let m = NanoparticleModel::silver_like(8.0);
        assert!(matches!(
            im_green_radial(&m, 1, 3.0, 8.0, 10.0, 0.0),
            Err(GreensError::Geometry { .. })
        ));
    }

    #[test]
    fn coupling_power_laws() {
        let m = NanoparticleModel::silver_like(8.0);
        let grid = [2.8, 3.0];
        let n = 2;
        let near = emitter(2.0);
        let mut far = near;
        far.distance_nm = 12.0; // r doubles from 10 to 20 nm
        let a = coupling_spectrum(&m, &near, 0, n, &grid).unwrap();
        let b = coupling_spectrum(&m, &far, 0, n, &grid).unwrap();
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            let ratio = sb.1.norm_sqr() / sa.1.norm_sqr();
            assert_relative_eq!(ratio, 2f64.powi(-(2 * n as i32 + 4)), max_relative = 1e-12);
        }
        let mut strong = near;
        strong.dipole_debye = 20.0;
        let c = coupling_spectrum(&m, &strong, 0, n, &grid).unwrap();
        for (sa, sc) in a.samples.iter().zip(&c.samples) {
            assert_relative_eq!(sc.1.norm_sqr() / sa.1.norm_sqr(), 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn dipole_spectrum_peaks_at_resonance_root() {
        let m = NanoparticleModel::silver_like(8.0);
        let grid = linspace(1.5, 4.0, 251);
        let step = grid[1] - grid[0];
        let s = coupling_spectrum(&m, &emitter(2.0), 0, 1, &grid).unwrap();
        let mags: Vec<f64> = s.samples.iter().map(|x| x.1.norm()).collect();
        let top = mags
            .iter()
            .position(|&v| v == mags.iter().cloned().fold(0.0, f64::max))
            .unwrap();
        assert!(mags[..=top].windows(2).all(|w| w[1] > w[0]));
        assert!(mags[top..].windows(2).all(|w| w[1] < w[0]));
        let (peak, _) = s
            .samples
            .iter()
            .map(|(w, k)| (*w, k.norm()))
            .fold((0.0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        // bisection oracle on Re[eps_m + 2 eps_b]
        let re_den = |w: f64| drude_permittivity(&m, w).unwrap().re + 2.0 * m.eps_background;
        let (mut a, mut b) = (1.5, 4.0);
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if re_den(a) * re_den(c) <= 0.0 {
                b = c
            } else {
                a = c
            }
        }
        assert!((peak - 0.5 * (a + b)).abs() <= step);
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let m = NanoparticleModel::silver_like(8.0);
        assert_eq!(
            coupling_spectrum(&m, &emitter(2.0), 0, 1, &[]),
            Err(GreensError::BadGrid)
        );
        assert_eq!(
            coupling_spectrum(&m, &emitter(2.0), 0, 1, &[3.0, 2.9]),
            Err(GreensError::BadGrid)
        );
    }

    #[test]
    fn ldos_decreases_with_distance_and_order() {
        let m = NanoparticleModel::silver_like(8.0);
        for n in 1..10 {
            let w = m.resonance_estimate(n).unwrap();
            let near = partial_ldos(&m, &emitter(2.0), n, w).unwrap();
            let far = partial_ldos(&m, &emitter(7.0), n, w).unwrap();
            assert!(near > 0.0 && far < near);
        }
        let peaks: Vec<f64> = (1..=80)
            .map(|n| peak_partial_ldos(&m, &emitter(2.0), n).unwrap().1)
            .collect();
        let top = peaks.iter().cloned().fold(0.0, f64::max);
        let argmax = peaks.iter().position(|&p| p == top).unwrap();
        assert!(argmax > 0, "dipole should not be the largest peak at 2 nm");
        assert!(peaks[argmax..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn select_modes_validates_threshold() {
        let m = NanoparticleModel::silver_like(8.0);
        assert!(select_modes(&m, &[emitter(2.0)], 0.0, 40).is_err());
        assert!(select_modes(&m, &[emitter(2.0)], 1.0, 40).is_err());
    }

    #[test]
    fn model_validation_names_field() {
        let mut m = NanoparticleModel::silver_like(8.0);
        m.radius_nm = -1.0;
        match m.validate() {
            Err(GreensError::InvalidModel { field, .. }) => assert_eq!(field, "radius_nm"),
            other => panic!("unexpected {other:?}"),
        }
        let mut e = emitter(2.0);
        e.omega_fg_ev = 2.0;
        assert!(e.validate().is_err());
    }
}
