//! Gaussian STIRAP pulses and propagation of `i dψ/dt = H(t) ψ` (ħ = 1).

pub mod ode;
pub mod scan;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::{BasisLabel, DrivenSystem};
use ode::{OdeError, OdeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{source}; largest plasmon detuning {max_detuning:.4} eV, consider shifting the frame by {suggested_shift:.4} eV")]
    Propagation {
        source: OdeError,
        max_detuning: f64,
        suggested_shift: f64,
    },
    #[error("initial state has dimension {got}, system has {expected}")]
    StateDimension { expected: usize, got: usize },
    #[error("initial state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("pulse width must be positive")]
    PulseWidth,
    #[error("time span must be increasing")]
    TimeSpan,
}

/// Counterintuitive Gaussian pair: Stokes peaks at `−τ`, pump at `+τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    /// Peak Rabi frequency (eV).
    pub omega0: f64,
    /// Half-delay (ħ/eV).
    pub tau: f64,
    /// Width `T` (ħ/eV).
    pub width_t: f64,
}

impl PulsePair {
    /// Pulses with area `Ω₀T = area` and delay ratio `τ/T`.
    pub fn from_area(area: f64, tau_over_t: f64, width_t: f64) -> Self {
        Self {
            omega0: area / width_t,
            tau: tau_over_t * width_t,
            width_t,
        }
    }

    pub fn area(&self) -> f64 {
        self.omega0 * self.width_t
    }

    /// Default window `[−mT − τ, mT + τ]`.
    pub fn window(&self, multiplier: f64) -> (f64, f64) {
        let half = multiplier * self.width_t + self.tau;
        (-half, half)
    }

    /// Same dimensionless groups with `T` and `τ` divided by `s`.
    pub fn compressed(&self, s: f64) -> Self {
        Self {
            omega0: self.omega0 * s,
            tau: self.tau / s,
            width_t: self.width_t / s,
        }
    }
}

/// `(P(t), S(t))`.
pub fn evaluate_pulses(p: &PulsePair, t: f64) -> (f64, f64) {
    let g = |x: f64| p.omega0 * (-(x / p.width_t).powi(2)).exp();
    (g(t - p.tau), g(t + p.tau))
}

/// Source of the pump and Stokes envelopes.
pub trait Drive: Sync {
    fn envelopes(&self, t: f64) -> (f64, f64);
}

impl Drive for PulsePair {
    fn envelopes(&self, t: f64) -> (f64, f64) {
        evaluate_pulses(self, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationOptions {
    pub rtol: f64,
    /// Window half-width in units of `T`, beyond `τ`.
    pub window_multiplier: f64,
    /// Number of stored time samples.
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            window_multiplier: 3.0,
            samples: 301,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PropagationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest increase of `‖ψ‖²` over a single accepted step.
    pub max_norm_increase: f64,
    /// Largest total plasmon population seen at any accepted step.
    pub peak_plasmon_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub labels: Vec<BasisLabel>,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    pub stats: PropagationStats,
}

impl Trajectory {
    pub fn population(&self, sample: usize, label: BasisLabel) -> f64 {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map_or(0.0, |k| self.amplitudes[sample][k].norm_sqr())
    }

    pub fn populations(&self, sample: usize) -> Vec<f64> {
        self.amplitudes[sample]
            .iter()
            .map(|z| z.norm_sqr())
            .collect()
    }

    pub fn norm_sqr(&self, sample: usize) -> f64 {
        self.populations(sample).iter().sum()
    }

    pub fn final_population(&self, label: BasisLabel) -> f64 {
        self.population(self.times.len() - 1, label)
    }
}

/// Final `|⟨GF|ψ⟩|²`.
pub fn transfer_efficiency(traj: &Trajectory) -> f64 {
    traj.final_population(BasisLabel::GF).clamp(0.0, 1.0)
}

/// Basis vector for `label`.
pub fn basis_state<S: DrivenSystem + ?Sized>(sys: &S, label: BasisLabel) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); sys.dim()];
    if let Some(k) = sys.index_of(label) {
        psi[k] = Complex64::new(1.0, 0.0);
    }
    psi
}

/// Propagates `psi0` from `t_span.0` to `t_span.1` under the static matrix
/// plus the drive envelopes, storing `opts.samples` equally spaced states.
pub fn propagate<S, D>(
    sys: &S,
    drive: &D,
    psi0: &[Complex64],
    t_span: (f64, f64),
    opts: &PropagationOptions,
) -> Result<Trajectory, DynamicsError>
where
    S: DrivenSystem + ?Sized,
    D: Drive + ?Sized,
{
    let dim = sys.dim();
    if psi0.len() != dim {
        return Err(DynamicsError::StateDimension {
            expected: dim,
            got: psi0.len(),
        });
    }
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(DynamicsError::NotNormalized(norm0.sqrt()));
    }
    if !(t_span.1 > t_span.0) {
        return Err(DynamicsError::TimeSpan);
    }
    let slots = sys.drive_slots();
    let h = sys.static_matrix();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let z = h[(i, j)];
            if z != Complex64::new(0.0, 0.0) {
                // -i H
                entries.push((i, j, Complex64::new(z.im, -z.re)));
            }
        }
    }
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        dy.iter_mut().for_each(|d| *d = Complex64::new(0.0, 0.0));
        for &(i, j, z) in &entries {
            dy[i] += z * y[j];
        }
        let (p, s) = drive.envelopes(t);
        for ((i, j), v) in [(slots.pump, p), (slots.stokes, s)] {
            let miv = Complex64::new(0.0, -v);
            dy[i] += miv * y[j];
            dy[j] += miv * y[i];
        }
    };

    let n_samples = opts.samples.max(2);
    let (t0, t1) = t_span;
    let times: Vec<f64> = (0..n_samples)
        .map(|k| {
            if k + 1 == n_samples {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (n_samples - 1) as f64
            }
        })
        .collect();
    let plasmonic: Vec<usize> = (0..dim)
        .filter(|&k| sys.basis()[k].is_plasmonic())
        .collect();
    let mut stats = PropagationStats::default();
    let observer = |_t: f64, y0: &[Complex64], y1: &[Complex64]| {
        let n0: f64 = y0.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = y1.iter().map(|z| z.norm_sqr()).sum();
        stats.max_norm_increase = stats.max_norm_increase.max(n1 - n0);
        let pl = plasmonic.iter().fold(0.0, |acc, &k| acc + y1[k].norm_sqr());
        stats.peak_plasmon_population = stats.peak_plasmon_population.max(pl);
    };
    let mut ode_opts = OdeOptions::with_rtol(opts.rtol);
    ode_opts.max_steps = opts.max_steps;
    let result = ode::integrate(rhs, t0, psi0, &times, &ode_opts, observer);
    let (mut amplitudes, ode_stats) = match result {
        Ok(r) => r,
        Err(source) => {
            let detunings: Vec<f64> = plasmonic.iter().map(|&k| h[(k, k)].re).collect();
            let max_detuning = detunings.iter().map(|d| d.abs()).fold(0.0, f64::max);
            let (lo, hi) = detunings
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| {
                    (a.min(d), b.max(d))
                });
            let suggested_shift = if detunings.is_empty() {
                0.0
            } else {
                0.5 * (lo + hi)
            };
            return Err(DynamicsError::Propagation {
                source,
                max_detuning,
                suggested_shift,
            });
        }
    };
    stats.accepted_steps = ode_stats.accepted;
    stats.rejected_steps = ode_stats.rejected;
    // the observer does not see the initial state
    amplitudes[0] = psi0.to_vec();
    Ok(Trajectory {
        labels: sys.basis().to_vec(),
        times,
        amplitudes,
        stats,
    })
}

/// Which model the scans integrate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PropagationPath {
    /// Adiabatically eliminated 4×4 model at the configured `T`.
    #[default]
    Reduced,
    /// Full single-excitation model with `T`, `τ` divided by `rescale`,
    /// `Ω₀` multiplied by it and the emitter–plasmon couplings by its square
    /// root, which leaves `Ω₀T`, `τ/T`, `g²T/Δ` and `γ/Δ` unchanged.
    Full { rescale: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{DriveSlots, ReducedModel};
    use nalgebra::DMatrix;

    #[test]
    fn pulse_values() {
        let p = PulsePair::from_area(60.0, 0.7, 10.0);
        assert_eq!(evaluate_pulses(&p, p.tau).0, p.omega0);
        assert_eq!(evaluate_pulses(&p, -p.tau).1, p.omega0);
        let (a, b) = evaluate_pulses(&p, 0.0);
        assert_eq!(a, b);
        assert!((a / p.omega0 - (-0.49f64).exp()).abs() < 1e-15);
        assert!((a / p.omega0 - 0.6126).abs() < 1e-4);
        assert!((p.area() - 60.0).abs() < 1e-12);
    }

    struct Plain {
        basis: Vec<BasisLabel>,
        h: DMatrix<Complex64>,
    }

    impl DrivenSystem for Plain {
        fn basis(&self) -> &[BasisLabel] {
            &self.basis
        }
        fn static_matrix(&self) -> &DMatrix<Complex64> {
            &self.h
        }
        fn drive_slots(&self) -> DriveSlots {
            DriveSlots {
                pump: (0, 1),
                stokes: (0, 1),
            }
        }
    }

    #[test]
    fn rejects_bad_initial_state() {
        let r = ReducedModel {
            basis: vec![
                BasisLabel::FG,
                BasisLabel::EG,
                BasisLabel::GE,
                BasisLabel::GF,
            ],
            h: DMatrix::zeros(4, 4),
        };
        let p = PulsePair::from_area(1.0, 0.5, 1.0);
        let opts = PropagationOptions::default();
        let psi = vec![Complex64::new(0.0, 0.0); 4];
        assert!(matches!(
            propagate(&r, &p, &psi, (0.0, 1.0), &opts),
            Err(DynamicsError::NotNormalized(_))
        ));
        assert!(matches!(
            propagate(&r, &p, &psi[..3], (0.0, 1.0), &opts),
            Err(DynamicsError::StateDimension { .. })
        ));
    }

    #[test]
    fn undriven_two_level_rabi_period() {
        let g = 0.3;
        let z = Complex64::new(0.0, 0.0);
        let sys = Plain {
            basis: vec![BasisLabel::EG, BasisLabel::Bright { branch: 1, mode: 1 }],
            h: DMatrix::from_row_slice(
                2,
                2,
                &[z, Complex64::new(g, 0.0), Complex64::new(g, 0.0), z],
            ),
        };
        let off = PulsePair {
            omega0: 0.0,
            tau: 0.0,
            width_t: 1.0,
        };
        let period = std::f64::consts::PI / g;
        let opts = PropagationOptions {
            rtol: 1e-10,
            samples: 5,
            ..Default::default()
        };
        let psi0 = basis_state(&sys, BasisLabel::EG);
        let tr = propagate(&sys, &off, &psi0, (0.0, period), &opts).unwrap();
        let half = tr.population(2, BasisLabel::Bright { branch: 1, mode: 1 });
        assert!((half - 1.0).abs() < 1e-8);
        assert!((tr.final_population(BasisLabel::EG) - 1.0).abs() < 1e-8);
    }
}
