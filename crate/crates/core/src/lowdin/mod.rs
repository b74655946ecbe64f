//! Canonical (Löwdin) orthonormalization of possibly linearly dependent
//! mode operators, driven entirely by their overlap matrix.
//!
//! Index convention: `M[(i, j)] = ⟨a_i|a_j⟩`, so for the mode overlaps
//! `μ^{i,j}` of the emitters, `M[(i, j)] = μ^{j,i}`. The first row of `M`
//! therefore reads `(1, μ^{2,1}, …, μ^{N,1})`.

mod jacobi;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::greens::{self, EmitterSpec, GreensError, NanoparticleModel};

/// Default relative eigenvalue threshold separating independent and
/// dependent directions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const CLUSTER_TOL: f64 = 1e-10;
const PHASE_TIE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LowdinError {
    #[error("overlap matrix must be square and non-empty, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("overlap matrix not Hermitian at ({i}, {j}): deviation {deviation:.3e}")]
    NotHermitian { i: usize, j: usize, deviation: f64 },
    #[error("overlap matrix diagonal entry {i} is {value}, expected 1")]
    Diagonal { i: usize, value: Complex64 },
    #[error("vector {index} is zero")]
    ZeroVector { index: usize },
    #[error("vector {index} is not normalized (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },
    #[error("vectors have inconsistent lengths")]
    Ragged,
    #[error("eigenvalue {lambda:.3e} is negative beyond tolerance; matrix is not a Gram matrix")]
    NotPositive { lambda: f64 },
    #[error("Jacobi eigensolver did not converge")]
    Eigensolver,
    #[error("overlap matrix has numerical rank zero")]
    RankZero,
    #[error("expected {expected} local couplings, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("|mu12| = {0} exceeds 1")]
    OverlapMagnitude(f64),
    #[error("closed form needs a phase mu12/|mu12|, undefined for mu12 = 0")]
    PhaseUndefined,
    #[error(transparent)]
    Greens(#[from] GreensError),
}

/// Hermitian overlap (metric) matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    entries: DMatrix<Complex64>,
}

impl OverlapMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, LowdinError> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(LowdinError::Shape { rows, cols });
        }
        for i in 0..rows {
            let d = entries[(i, i)];
            if (d - 1.0).norm() > HERMITIAN_TOL {
                return Err(LowdinError::Diagonal { i, value: d });
            }
            for j in i + 1..rows {
                let deviation = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(LowdinError::NotHermitian { i, j, deviation });
                }
            }
        }
        Ok(Self { entries })
    }

    /// Two-mode overlap matrix `[[1, μ^{21}], [μ^{12}, 1]]`.
    pub fn two_mode(mu12: Complex64) -> Result<Self, LowdinError> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(DMatrix::from_row_slice(
            2,
            2,
            &[one, mu12.conj(), mu12, one],
        ))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `μ^{i,j}` with the coupling-formula index order (the transpose of `M`).
    pub fn mu(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(j, i)]
    }
}

/// Pairwise inner products `⟨v_i|v_j⟩` of unit vectors.
pub fn gram_matrix(vectors: &[DVector<Complex64>]) -> Result<OverlapMatrix, LowdinError> {
    let n = vectors.len();
    if n == 0 {
        return Err(LowdinError::Shape { rows: 0, cols: 0 });
    }
    let len = vectors[0].len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != len {
            return Err(LowdinError::Ragged);
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(LowdinError::ZeroVector { index });
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(LowdinError::NotNormalized { index, norm });
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            vectors[i].dotc(&vectors[j])
        }
    });
    OverlapMatrix::new(m)
}

/// Eigensystem of an overlap matrix with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    /// Unitary matrix whose columns are the eigenvectors.
    pub t: DMatrix<Complex64>,
    pub lambdas: Vec<f64>,
    pub rank: usize,
}

/// Diagonalizes `M` and counts eigenvalues above `rank_tol · λ_max`.
///
/// Eigenvectors inside a degenerate cluster are rebuilt by Gram–Schmidt on
/// the cluster projector applied to the unit vectors in index order, and every
/// column is rephased so that its largest entry (the last one among ties) is
/// real and positive.
pub fn eigendecompose_rank(m: &OverlapMatrix, rank_tol: f64) -> Result<Eigensystem, LowdinError> {
    let n = m.dim();
    let (vals, vecs) = jacobi::hermitian_eigen(m.entries()).ok_or(LowdinError::Eigensolver)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let lambdas: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let mut t = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);

    let lmax = lambdas[0].abs().max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && lambdas[end - 1] - lambdas[end] <= CLUSTER_TOL * lmax.max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            rebuild_cluster(&mut t, start, end);
        }
        start = end;
    }
    for j in 0..n {
        fix_phase(&mut t, j);
    }

    let floor = rank_tol * lmax;
    if let Some(&bad) = lambdas.iter().find(|&&l| l < -floor.max(rank_tol)) {
        return Err(LowdinError::NotPositive { lambda: bad });
    }
    let rank = lambdas.iter().filter(|&&l| l > floor).count();
    if let Some(&l) = lambdas[..rank].last() {
        if l < 1e3 * floor {
            log::info!("eigenvalue {l:.3e} kept just above the rank threshold {floor:.3e}");
        }
    }
    Ok(Eigensystem { t, lambdas, rank })
}

fn rebuild_cluster(t: &mut DMatrix<Complex64>, start: usize, end: usize) {
    let n = t.nrows();
    let block = t.columns(start, end - start).into_owned();
    let projector = &block * block.adjoint();
    let mut built: Vec<DVector<Complex64>> = Vec::with_capacity(end - start);
    for k in 0..n {
        if built.len() == end - start {
            break;
        }
        let mut w: DVector<Complex64> = projector.column(k).into_owned();
        for b in &built {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            built.push(w / Complex64::new(norm, 0.0));
        }
    }
    for (offset, b) in built.into_iter().enumerate() {
        t.set_column(start + offset, &b);
    }
}

fn fix_phase(t: &mut DMatrix<Complex64>, j: usize) {
    let col = t.column(j);
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(pivot) = (0..col.len())
        .rev()
        .find(|&i| col[i].norm() >= (1.0 - PHASE_TIE_TOL) * max)
    else {
        return;
    };
    let z = col[pivot];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    t.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    t[(pivot, j)] = Complex64::new(t[(pivot, j)].norm(), 0.0);
}

/// Result of the canonical orthonormalization for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LowdinDecomposition {
    pub overlap: OverlapMatrix,
    pub t: DMatrix<Complex64>,
    pub lambdas: Vec<f64>,
    pub rank: usize,
    /// `beta[(j, i)] = λ_j^{-1/2} T^{i,j}`: coefficient of `a_i` in `b_j`.
    pub beta: DMatrix<Complex64>,
    /// `kappa_bright[(i, j)] = κ(r_i) λ_j^{1/2} conj(T^{i,j})`.
    pub kappa_bright: DMatrix<Complex64>,
}

pub fn canonical_orthonormalize(
    m: &OverlapMatrix,
    kappa_locals: &[Complex64],
    rank_tol: f64,
) -> Result<LowdinDecomposition, LowdinError> {
    let n = m.dim();
    if kappa_locals.len() != n {
        return Err(LowdinError::Dimension {
            expected: n,
            got: kappa_locals.len(),
        });
    }
    let eig = eigendecompose_rank(m, rank_tol)?;
    let rank = eig.rank;
    if rank == 0 {
        return Err(LowdinError::RankZero);
    }
    let t = &eig.t;
    let beta = DMatrix::from_fn(rank, n, |j, i| t[(i, j)] / eig.lambdas[j].sqrt());
    let kappa_bright = DMatrix::from_fn(n, rank, |i, j| {
        kappa_locals[i] * eig.lambdas[j].sqrt() * t[(i, j)].conj()
    });
    Ok(LowdinDecomposition {
        overlap: m.clone(),
        t: eig.t,
        lambdas: eig.lambdas,
        rank,
        beta,
        kappa_bright,
    })
}

/// Synthesis matrix `s[(i, j)] = λ_j^{1/2} conj(T^{i,j})` expressing the
/// original operators through the orthonormal ones, `a_i = Σ_j s_ij b_j`.
pub fn reconstruct_originals(dec: &LowdinDecomposition) -> DMatrix<Complex64> {
    let n = dec.t.nrows();
    DMatrix::from_fn(n, dec.rank, |i, j| {
        dec.lambdas[j].sqrt() * dec.t[(i, j)].conj()
    })
}

/// Closed-form couplings `(κ^{11}, κ^{12}, κ^{21}, κ^{22})` for two emitters.
pub fn two_emitter_closed_form(
    mu12: Complex64,
    kappa1: Complex64,
    kappa2: Complex64,
) -> Result<[Complex64; 4], LowdinError> {
    let raw = mu12.norm();
    if raw > 1.0 + 1e-12 {
        return Err(LowdinError::OverlapMagnitude(raw));
    }
    if raw == 0.0 {
        return Err(LowdinError::PhaseUndefined);
    }
    let mag = raw.min(1.0);
    let phase = mu12 / raw;
    let plus = ((1.0 + mag) / 2.0).sqrt();
    let minus = ((1.0 - mag) / 2.0).sqrt();
    Ok([
        kappa1 * phase * plus,
        -kappa1 * phase * minus,
        kappa2 * plus,
        kappa2 * minus,
    ])
}

/// Normalized overlap `μ^{i,j}` of mode `n` excited by two radial emitters.
pub fn mode_overlap(
    model: &NanoparticleModel,
    emitter_i: &EmitterSpec,
    emitter_j: &EmitterSpec,
    n: usize,
    omega: f64,
) -> Result<Complex64, LowdinError> {
    let ri = emitter_i.radial_position(model);
    let rj = emitter_j.radial_position(model);
    let gamma = emitter_i.angle_to(emitter_j);
    let cross = greens::im_green_radial(model, n, omega, ri, rj, gamma)?;
    let gii = greens::im_green_radial(model, n, omega, ri, ri, 0.0)?;
    let gjj = greens::im_green_radial(model, n, omega, rj, rj, 0.0)?;
    let norm = (gii * gjj).sqrt();
    if !(norm > 0.0) {
        return Err(GreensError::Singular { n, omega }.into());
    }
    Ok(Complex64::new((cross / norm).clamp(-1.0, 1.0), 0.0))
}

/// Overlap matrix of mode `n` at frequency `omega` for a set of emitters.
pub fn overlap_for_mode(
    model: &NanoparticleModel,
    emitters: &[EmitterSpec],
    n: usize,
    omega: f64,
) -> Result<OverlapMatrix, LowdinError> {
    let k = emitters.len();
    let mut m = DMatrix::from_element(k, k, Complex64::new(1.0, 0.0));
    for i in 0..k {
        for j in 0..k {
            if i != j {
                m[(i, j)] = mode_overlap(model, &emitters[j], &emitters[i], n, omega)?;
            }
        }
    }
    OverlapMatrix::new(m)
}
