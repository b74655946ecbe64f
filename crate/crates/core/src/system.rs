//! Glue from nanoparticle and emitter parameters to driven Hamiltonians.

use num_complex::Complex64;

use crate::dynamics::{
    basis_state, propagate, Drive, PropagationOptions, PropagationPath, PulsePair, Trajectory,
};
use crate::greens::{self, EmitterSpec, FitWindow, ModeResonance, NanoparticleModel};
use crate::hamiltonian::{
    adiabatic_eliminate, assemble_effective, BasisLabel, EffectiveHamiltonian, LossConvention,
};
use crate::lowdin::{canonical_orthonormalize, overlap_for_mode};
use crate::Error;

/// Lorentzian parameters of modes `1..=n` for a fixed pair of emitter
/// distances. Angles do not enter: they only change the mode overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    pub model: NanoparticleModel,
    pub emitters: Vec<EmitterSpec>,
    pub resonances: Vec<ModeResonance>,
}

impl CouplingTable {
    pub fn build(
        model: &NanoparticleModel,
        emitters: &[EmitterSpec],
        n_modes: usize,
        window: &FitWindow,
    ) -> Result<Self, Error> {
        model.validate()?;
        for e in emitters {
            e.validate()?;
        }
        let resonances = greens::resolve_resonances(model, emitters, n_modes, window)?;
        Ok(Self {
            model: *model,
            emitters: emitters.to_vec(),
            resonances,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.resonances.len()
    }

    /// Emitters with the second one placed at angle `phi` from the first.
    pub fn placed(&self, phi: Option<f64>) -> Vec<EmitterSpec> {
        let mut e = self.emitters.clone();
        if let (Some(phi), true) = (phi, e.len() >= 2) {
            e[1].polar_angle_rad = e[0].polar_angle_rad + phi;
        }
        e
    }

    /// Effective Hamiltonian keeping modes `1..=n_modes`.
    pub fn effective(
        &self,
        phi: Option<f64>,
        n_modes: usize,
        rank_tol: f64,
        convention: LossConvention,
    ) -> Result<EffectiveHamiltonian, Error> {
        if self.emitters.len() != 2 {
            return Err(Error::Setup(format!(
                "driven runs need exactly 2 emitters, got {}",
                self.emitters.len()
            )));
        }
        let emitters = self.placed(phi);
        let m = n_modes.min(self.n_modes());
        let resonances = &self.resonances[..m];
        let decs = resonances
            .iter()
            .map(|r| {
                let overlap = overlap_for_mode(&self.model, &emitters, r.mode_n, r.omega_n)?;
                let local: Vec<Complex64> = r
                    .g_amplitudes
                    .iter()
                    .map(|&g| Complex64::new(g, 0.0))
                    .collect();
                canonical_orthonormalize(&overlap, &local, rank_tol)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(assemble_effective(
            resonances,
            &decs,
            emitters[0].omega_eg_ev,
            convention,
        )?)
    }
}

/// Runs one STIRAP sequence from `FG`. For the full path the returned
/// trajectory times are mapped back to the uncompressed time axis.
pub fn run_stirap(
    h: &EffectiveHamiltonian,
    pulses: &PulsePair,
    path: PropagationPath,
    opts: &PropagationOptions,
) -> Result<Trajectory, Error> {
    run_from(h, pulses, BasisLabel::FG, path, opts)
}

/// Like [`run_stirap`] with an arbitrary drive and initial state.
pub fn run_from<D: WindowedDrive>(
    h: &EffectiveHamiltonian,
    drive: &D,
    initial: BasisLabel,
    path: PropagationPath,
    opts: &PropagationOptions,
) -> Result<Trajectory, Error> {
    let span = drive.window(opts.window_multiplier);
    match path {
        PropagationPath::Reduced => {
            let r = adiabatic_eliminate(h)?;
            let psi0 = basis_state(&r, initial);
            Ok(propagate(&r, drive, &psi0, span, opts)?)
        }
        PropagationPath::Full { rescale } => {
            if !(rescale >= 1.0) {
                return Err(Error::Setup(format!(
                    "full-model rescale {rescale} must be >= 1"
                )));
            }
            let hs = h.with_coupling_scale(rescale.sqrt());
            let fast = drive.compressed(rescale);
            let psi0 = basis_state(&hs, initial);
            let span = (span.0 / rescale, span.1 / rescale);
            let mut traj = propagate(&hs, &fast, &psi0, span, opts)?;
            traj.times.iter_mut().for_each(|t| *t *= rescale);
            Ok(traj)
        }
    }
}

/// Drives whose time axis can be compressed for the full-model path.
pub trait WindowedDrive: Drive + Sized {
    fn window(&self, multiplier: f64) -> (f64, f64);
    fn compressed(&self, s: f64) -> Self;
}

impl WindowedDrive for PulsePair {
    fn window(&self, multiplier: f64) -> (f64, f64) {
        PulsePair::window(self, multiplier)
    }
    fn compressed(&self, s: f64) -> Self {
        PulsePair::compressed(self, s)
    }
}

/// Pulse pair with the pump and Stokes legs exchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Swapped(pub PulsePair);

impl Drive for Swapped {
    fn envelopes(&self, t: f64) -> (f64, f64) {
        let (p, s) = self.0.envelopes(t);
        (s, p)
    }
}

impl WindowedDrive for Swapped {
    fn window(&self, multiplier: f64) -> (f64, f64) {
        self.0.window(multiplier)
    }
    fn compressed(&self, s: f64) -> Self {
        Swapped(self.0.compressed(s))
    }
}
