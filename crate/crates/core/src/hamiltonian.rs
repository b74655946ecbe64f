//! Single-excitation effective Hamiltonian for two driven emitters and its
//! adiabatic reduction onto the emitter states.
//!
//! Frame: rotating at the pump/Stokes carriers with `ω_eg` subtracted, so
//! the emitter states sit at zero energy and mode `n` at `Δ_n = ω_n − ω_eg`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::greens::ModeResonance;
use crate::lowdin::LowdinDecomposition;
use crate::output::fmt_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("no plasmon modes to assemble")]
    NoModes,
    #[error("{resonances} resonances but {decompositions} decompositions")]
    ModeCount {
        resonances: usize,
        decompositions: usize,
    },
    #[error("mode {mode}: expected 2 emitters, got {got}")]
    EmitterCount { mode: usize, got: usize },
    #[error("plasmonic block is singular; cannot eliminate")]
    SingularBlock,
    #[error("basis is missing state {0}")]
    MissingState(BasisLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    /// `|f,g;[0]⟩`
    FG,
    /// `|e,g;[0]⟩`
    EG,
    /// One plasmon in bright branch `branch` of mode `mode` (both 1-based).
    Bright { branch: usize, mode: usize },
    /// `|g,e;[0]⟩`
    GE,
    /// `|g,f;[0]⟩`
    GF,
}

impl BasisLabel {
    pub fn is_plasmonic(&self) -> bool {
        matches!(self, BasisLabel::Bright { .. })
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::FG => f.write_str("FG"),
            BasisLabel::EG => f.write_str("EG"),
            BasisLabel::GE => f.write_str("GE"),
            BasisLabel::GF => f.write_str("GF"),
            BasisLabel::Bright { branch, mode } => write!(f, "B{branch}_{mode}"),
        }
    }
}

/// Ordered basis `FG, EG, B(1, 1..n′), B(2, …), …, GE, GF`. Branch `j` only
/// contains the modes with at least `j` independent bright combinations.
pub fn enumerate_basis(n_prime: usize, n_ind_per_mode: &[usize]) -> Vec<BasisLabel> {
    let n_ind = |mode: usize| n_ind_per_mode.get(mode - 1).copied().unwrap_or(1);
    let branches = (1..=n_prime).map(n_ind).max().unwrap_or(0);
    let mut basis = vec![BasisLabel::FG, BasisLabel::EG];
    for branch in 1..=branches {
        basis.extend(
            (1..=n_prime)
                .filter(|&mode| n_ind(mode) >= branch)
                .map(|mode| BasisLabel::Bright { branch, mode }),
        );
    }
    basis.extend([BasisLabel::GE, BasisLabel::GF]);
    basis
}

/// Whether the plasmon diagonal carries `−iγ_n/2` or `−iγ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossConvention {
    #[default]
    HalfWidth,
    FullWidth,
}

impl LossConvention {
    pub fn factor(self) -> f64 {
        match self {
            LossConvention::HalfWidth => 0.5,
            LossConvention::FullWidth => 1.0,
        }
    }
}

/// Matrix positions receiving the pump and Stokes envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriveSlots {
    pub pump: (usize, usize),
    pub stokes: (usize, usize),
}

/// A static matrix plus two real drive envelopes inserted symmetrically.
pub trait DrivenSystem {
    fn basis(&self) -> &[BasisLabel];
    fn static_matrix(&self) -> &DMatrix<Complex64>;
    fn drive_slots(&self) -> DriveSlots;

    fn dim(&self) -> usize {
        self.basis().len()
    }

    fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.basis().iter().position(|&b| b == label)
    }

    /// Static matrix with the drive envelopes inserted.
    fn with_drive(&self, pump_rabi: f64, stokes_rabi: f64) -> DMatrix<Complex64> {
        let mut h = self.static_matrix().clone();
        let s = self.drive_slots();
        for ((i, j), v) in [(s.pump, pump_rabi), (s.stokes, stokes_rabi)] {
            h[(i, j)] += v;
            h[(j, i)] += v;
        }
        h
    }

    /// `row_label,col_label,re,im` for every nonzero static entry.
    fn to_csv(&self) -> String {
        let h = self.static_matrix();
        let basis = self.basis();
        let mut out = String::from("row_label,col_label,re,im\n");
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                let z = h[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        basis[i],
                        basis[j],
                        fmt_f64(z.re),
                        fmt_f64(z.im)
                    ));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub basis: Vec<BasisLabel>,
    pub h_static: DMatrix<Complex64>,
    pub drive_slots: DriveSlots,
    /// `Δ_n = ω_n − ω_eg` per retained mode.
    pub delta_n: Vec<f64>,
    pub gamma_n: Vec<f64>,
    /// Rate `Γ_k` such that `h_static + i·diag(Γ)` is Hermitian.
    pub loss: Vec<f64>,
}

impl DrivenSystem for EffectiveHamiltonian {
    fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }
    fn static_matrix(&self) -> &DMatrix<Complex64> {
        &self.h_static
    }
    fn drive_slots(&self) -> DriveSlots {
        self.drive_slots
    }
}

impl EffectiveHamiltonian {
    pub fn n_modes(&self) -> usize {
        self.delta_n.len()
    }

    /// Hermitian part `h_static + i·diag(loss)`.
    pub fn hermitian_part(&self) -> DMatrix<Complex64> {
        let mut h = self.h_static.clone();
        for (k, l) in self.loss.iter().enumerate() {
            h[(k, k)] += Complex64::new(0.0, *l);
        }
        h
    }

    /// Copy with every emitter–plasmon coupling multiplied by `factor`.
    pub fn with_coupling_scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            for j in 0..out.dim() {
                if out.basis[i].is_plasmonic() != out.basis[j].is_plasmonic() {
                    out.h_static[(i, j)] *= factor;
                }
            }
        }
        out
    }

    /// Copy keeping only modes `1..=m`.
    pub fn truncated(&self, m: usize) -> Self {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&k| match self.basis[k] {
                BasisLabel::Bright { mode, .. } => mode <= m,
                _ => true,
            })
            .collect();
        let m = m.min(self.n_modes());
        EffectiveHamiltonian {
            basis: keep.iter().map(|&k| self.basis[k]).collect(),
            h_static: self.h_static.select_rows(&keep).select_columns(&keep),
            drive_slots: DriveSlots {
                pump: (0, 1),
                stokes: (keep.len() - 2, keep.len() - 1),
            },
            delta_n: self.delta_n[..m].to_vec(),
            gamma_n: self.gamma_n[..m].to_vec(),
            loss: keep.iter().map(|&k| self.loss[k]).collect(),
        }
    }
}

/// Builds the static matrix from per-mode Lorentzian parameters and
/// overlap decompositions evaluated at each mode's resonance.
pub fn assemble_effective(
    resonances: &[ModeResonance],
    decs: &[LowdinDecomposition],
    omega_eg: f64,
    convention: LossConvention,
) -> Result<EffectiveHamiltonian, HamiltonianError> {
    if resonances.is_empty() {
        return Err(HamiltonianError::NoModes);
    }
    if resonances.len() != decs.len() {
        return Err(HamiltonianError::ModeCount {
            resonances: resonances.len(),
            decompositions: decs.len(),
        });
    }
    for (r, d) in resonances.iter().zip(decs) {
        let got = r.g_amplitudes.len();
        if got != 2 || d.t.nrows() != 2 {
            return Err(HamiltonianError::EmitterCount {
                mode: r.mode_n,
                got: if got != 2 { got } else { d.t.nrows() },
            });
        }
    }
    let ranks: Vec<usize> = decs.iter().map(|d| d.rank).collect();
    let basis = enumerate_basis(resonances.len(), &ranks);
    let dim = basis.len();
    let eg = 1;
    let ge = dim - 2;
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut loss = vec![0.0; dim];
    let delta_n: Vec<f64> = resonances.iter().map(|r| r.omega_n - omega_eg).collect();
    let gamma_n: Vec<f64> = resonances.iter().map(|r| r.gamma_n).collect();
    for (k, label) in basis.iter().enumerate() {
        let BasisLabel::Bright { branch, mode } = *label else {
            continue;
        };
        let (res, dec) = (&resonances[mode - 1], &decs[mode - 1]);
        let j = branch - 1;
        let rate = convention.factor() * res.gamma_n;
        h[(k, k)] = Complex64::new(delta_n[mode - 1], -rate);
        loss[k] = rate;
        for (emitter, row) in [(0, eg), (1, ge)] {
            let g = res.g_amplitudes[emitter] * dec.lambdas[j].sqrt() * dec.t[(emitter, j)].conj();
            h[(row, k)] = g;
            h[(k, row)] = g.conj();
        }
    }
    Ok(EffectiveHamiltonian {
        basis,
        h_static: h,
        drive_slots: DriveSlots {
            pump: (0, 1),
            stokes: (dim - 2, dim - 1),
        },
        delta_n,
        gamma_n,
        loss,
    })
}

/// Drive snapshot of the full model.
pub fn add_drive(h: &EffectiveHamiltonian, pump_rabi: f64, stokes_rabi: f64) -> DMatrix<Complex64> {
    h.with_drive(pump_rabi, stokes_rabi)
}

/// 4×4 model over `FG, EG, GE, GF` left after eliminating every plasmon.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub basis: Vec<BasisLabel>,
    pub h: DMatrix<Complex64>,
}

impl ReducedModel {
    /// Self-energy on `EG` (`emitter = 0`) or `GE` (`emitter = 1`).
    pub fn self_energy(&self, emitter: usize) -> Complex64 {
        self.h[(1 + emitter, 1 + emitter)]
    }

    /// Plasmon-mediated coupling from `GE` into `EG`.
    pub fn cross_coupling(&self) -> Complex64 {
        self.h[(1, 2)]
    }
}

impl DrivenSystem for ReducedModel {
    fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }
    fn static_matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }
    fn drive_slots(&self) -> DriveSlots {
        DriveSlots {
            pump: (0, 1),
            stokes: (2, 3),
        }
    }
}

/// `H_PP − H_PQ H_QQ⁻¹ H_QP` with `Q` the plasmonic states.
pub fn adiabatic_eliminate(h: &EffectiveHamiltonian) -> Result<ReducedModel, HamiltonianError> {
    let p_labels = [
        BasisLabel::FG,
        BasisLabel::EG,
        BasisLabel::GE,
        BasisLabel::GF,
    ];
    let p: Vec<usize> = p_labels
        .iter()
        .map(|&l| h.index_of(l).ok_or(HamiltonianError::MissingState(l)))
        .collect::<Result<_, _>>()?;
    let q: Vec<usize> = (0..h.dim())
        .filter(|&k| h.basis[k].is_plasmonic())
        .collect();
    let m = &h.h_static;
    let hpp = m.select_rows(&p).select_columns(&p);
    if q.is_empty() {
        return Ok(ReducedModel {
            basis: p_labels.to_vec(),
            h: hpp,
        });
    }
    let hqq = m.select_rows(&q).select_columns(&q);
    let hpq = m.select_rows(&p).select_columns(&q);
    let hqp = m.select_rows(&q).select_columns(&p);
    let scale = hqq.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = hqq.lu();
    let x = lu.solve(&hqp).ok_or(HamiltonianError::SingularBlock)?;
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || scale == 0.0 {
        return Err(HamiltonianError::SingularBlock);
    }
    Ok(ReducedModel {
        basis: p_labels.to_vec(),
        h: hpp - hpq * x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowdin::{canonical_orthonormalize, two_emitter_closed_form, OverlapMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_mode(mu: f64, g1: f64, g2: f64, omega_n: f64, gamma: f64) -> EffectiveHamiltonian {
        let res = ModeResonance {
            mode_n: 1,
            omega_n,
            gamma_n: gamma,
            g_amplitudes: vec![g1, g2],
            residual: 0.0,
        };
        let m = OverlapMatrix::two_mode(c(mu, 0.0)).unwrap();
        let dec = canonical_orthonormalize(&m, &[c(g1, 0.0), c(g2, 0.0)], 1e-10).unwrap();
        assemble_effective(&[res], &[dec], 2.0, LossConvention::HalfWidth).unwrap()
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(enumerate_basis(1, &[2]).len(), 6);
        assert_eq!(enumerate_basis(25, &[2; 25]).len(), 54);
        assert_eq!(enumerate_basis(25, &[1; 25]).len(), 29);
        let b = enumerate_basis(2, &[2, 1]);
        assert_eq!(
            b,
            vec![
                BasisLabel::FG,
                BasisLabel::EG,
                BasisLabel::Bright { branch: 1, mode: 1 },
                BasisLabel::Bright { branch: 1, mode: 2 },
                BasisLabel::Bright { branch: 2, mode: 1 },
                BasisLabel::GE,
                BasisLabel::GF
            ]
        );
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let h = single_mode(0.4, 0.0, 0.0, 3.0, 0.07);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.h_static[(i, j)], c(0.0, 0.0));
                }
            }
        }
        assert_eq!(h.h_static[(2, 2)], c(1.0, -0.035));
    }

    #[test]
    fn symmetric_pair_matches_hand_built_matrix() {
        // mu slightly below one keeps both branches
        let (mu, g, w, gam) = (0.9, 0.01, 2.5, 0.07);
        let h = single_mode(mu, g, g, w, gam);
        let k = two_emitter_closed_form(c(mu, 0.0), c(g, 0.0), c(g, 0.0)).unwrap();
        let z = c(0.0, 0.0);
        let d = c(w - 2.0, -gam / 2.0);
        #[rustfmt::skip]
        let expect = DMatrix::from_row_slice(6, 6, &[
            z, z, z, z, z, z,
            z, z, k[0], k[1], z, z,
            z, k[0].conj(), d, z, k[2].conj(), z,
            z, k[1].conj(), z, d, k[3].conj(), z,
            z, z, k[2], k[3], z, z,
            z, z, z, z, z, z,
        ]);
        assert!((&h.h_static - expect).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn antiparallel_overlap_flips_branch_one_sign() {
        let h = single_mode(-0.95, 0.01, 0.01, 2.5, 0.07);
        let b = h
            .index_of(BasisLabel::Bright { branch: 1, mode: 1 })
            .unwrap();
        let (g11, g21) = (h.h_static[(1, b)], h.h_static[(4, b)]);
        assert!(g11.re < 0.0 && g21.re > 0.0);
    }

    #[test]
    fn drive_inserts_hermitian_pairs() {
        let h = single_mode(0.5, 0.01, 0.02, 2.5, 0.07);
        assert_eq!(add_drive(&h, 0.0, 0.0), h.h_static);
        let d = add_drive(&h, 1.0, 0.0) - &h.h_static;
        let nz: Vec<_> = d
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(k, _)| k)
            .collect();
        assert_eq!(nz.len(), 2);
        assert_eq!(d[(0, 1)], c(1.0, 0.0));
        assert_eq!(d[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn hermiticity_split() {
        let h = single_mode(0.3, 0.01, 0.02, 2.5, 0.07);
        let herm = h.hermitian_part();
        assert!((&herm - herm.adjoint()).iter().all(|z| z.norm() < 1e-15));
        assert!(h.loss.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn resonant_single_mode_self_energy() {
        let (g, gam) = (0.01, 0.07);
        let h = single_mode(1.0, g, g, 2.0, gam);
        let r = adiabatic_eliminate(&h).unwrap();
        let expect = c(0.0, -2.0 * g * g / gam);
        assert!((r.self_energy(0) - expect).norm() < 1e-15);
        assert!((r.cross_coupling().norm() - r.self_energy(0).norm()).abs() < 1e-15);
    }

    #[test]
    fn elimination_needs_nonsingular_block() {
        let mut h = single_mode(0.5, 0.01, 0.01, 2.0, 0.07);
        for k in 2..4 {
            h.h_static[(k, k)] = c(0.0, 0.0);
        }
        assert_eq!(
            adiabatic_eliminate(&h),
            Err(HamiltonianError::SingularBlock)
        );
    }

    #[test]
    fn truncation_drops_higher_modes() {
        let mk = |n| ModeResonance {
            mode_n: n,
            omega_n: 2.5 + 0.1 * n as f64,
            gamma_n: 0.07,
            g_amplitudes: vec![0.01, 0.01],
            residual: 0.0,
        };
        let m = OverlapMatrix::two_mode(c(0.5, 0.0)).unwrap();
        let dec = canonical_orthonormalize(&m, &[c(1.0, 0.0); 2], 1e-10).unwrap();
        let full = assemble_effective(
            &[mk(1), mk(2), mk(3)],
            &[dec.clone(), dec.clone(), dec.clone()],
            2.0,
            LossConvention::HalfWidth,
        )
        .unwrap();
        let one = assemble_effective(&[mk(1)], &[dec], 2.0, LossConvention::HalfWidth).unwrap();
        assert_eq!(full.truncated(1), one);
        assert_eq!(full.truncated(3), full);
    }
}
