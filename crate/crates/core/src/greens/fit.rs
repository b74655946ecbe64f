//! Levenberg–Marquardt fit of `|κ(ω)|` to a Lorentzian amplitude profile
//!
//! `|κ(ω)| = g · sqrt(γ/2π) / sqrt((ω − ω_n)² + γ²)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::{CouplingSpectrum, GreensError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeFit {
    pub mode_n: usize,
    pub omega_n: f64,
    pub gamma_n: f64,
    pub g: f64,
    /// RMS residual relative to the RMS of the data.
    pub residual: f64,
}

pub fn lorentzian_amplitude(g: f64, omega_n: f64, gamma: f64, omega: f64) -> f64 {
    let d = (omega - omega_n).powi(2) + gamma * gamma;
    g * (gamma / (2.0 * PI)).sqrt() / d.sqrt()
}

fn residuals_and_jacobian(
    p: &Vector3<f64>,
    xs: &[f64],
    ys: &[f64],
) -> (Vec<f64>, Vec<Vector3<f64>>) {
    let (g, w0, gam) = (p[0], p[1], p[2]);
    let mut r = Vec::with_capacity(xs.len());
    let mut jac = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let d = (x - w0).powi(2) + gam * gam;
        let m = lorentzian_amplitude(g, w0, gam, x);
        r.push(m - y);
        jac.push(Vector3::new(
            m / g,
            m * (x - w0) / d,
            m * (0.5 / gam - gam / d),
        ));
    }
    (r, jac)
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn initial_guess(xs: &[f64], ys: &[f64], n: usize) -> Result<Vector3<f64>, GreensError> {
    let (imax, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(GreensError::BadGrid)?;
    if imax == 0 || imax + 1 == xs.len() || ymax <= 0.0 {
        return Err(GreensError::FitWindow {
            n,
            peak_omega: xs[imax],
        });
    }
    // half maximum of |κ|² on each side, linearly interpolated
    let half = 0.5 * ymax * ymax;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if ys[i] * ys[i] <= half {
                let (y0, y1) = (ys[prev] * ys[prev], ys[i] * ys[i]);
                let t = (y0 - half) / (y0 - y1);
                return Some((xs[prev] + t * (xs[i] - xs[prev]) - xs[imax]).abs());
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..xs.len()));
    let gamma = match (left, right) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.5 * (xs[xs.len() - 1] - xs[0]),
    };
    let g = ymax * (2.0 * PI * gamma).sqrt();
    Ok(Vector3::new(g, xs[imax], gamma))
}

/// Fits the magnitude of a sampled coupling spectrum.
pub fn fit_lorentzian(spectrum: &CouplingSpectrum) -> Result<ModeFit, GreensError> {
    let n = spectrum.mode_n;
    let xs: Vec<f64> = spectrum.samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = spectrum.samples.iter().map(|s| s.1.norm()).collect();
    if xs.len() < 4 {
        return Err(GreensError::BadGrid);
    }
    let mut p = initial_guess(&xs, &ys, n)?;
    let (mut r, mut jac) = residuals_and_jacobian(&p, &xs, &ys);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..500 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (ji, ri) in jac.iter().zip(&r) {
            jtj += ji * ji.transpose();
            jtr += ji * *ri;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..3 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            if trial[0] <= 0.0 || trial[2] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let (rt, jt) = residuals_and_jacobian(&trial, &xs, &ys);
            let ct = cost(&rt);
            if ct <= c {
                let small_step = (0..3).all(|k| step[k].abs() <= 1e-12 * p[k].abs().max(1e-300));
                let small_gain = c - ct <= 1e-24 * c.max(1e-300);
                p = trial;
                r = rt;
                jac = jt;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                converged = small_step || small_gain;
                break;
            }
            lambda *= 10.0;
        }
        if converged || !accepted {
            // no descent direction left: at a (numerical) minimum
            converged = true;
            break;
        }
    }
    let rms_data = (ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64).sqrt();
    let residual = (c / ys.len() as f64).sqrt() / rms_data.max(1e-300);
    if !converged || !p.iter().all(|v| v.is_finite()) {
        return Err(GreensError::Fit { n, residual });
    }
    Ok(ModeFit {
        mode_n: n,
        omega_n: p[1],
        gamma_n: p[2],
        g: p[0],
        residual,
    })
}
