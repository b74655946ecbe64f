mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;

use common::{c, emitter, silver};
use plasmon_stirap::greens::FitWindow;
use plasmon_stirap::hamiltonian::{add_drive, BasisLabel, DrivenSystem, LossConvention};
use plasmon_stirap::lowdin::DEFAULT_RANK_TOL;
use plasmon_stirap::system::CouplingTable;

fn physical(phi: f64) -> plasmon_stirap::hamiltonian::EffectiveHamiltonian {
    let t = CouplingTable::build(
        &silver(),
        &[emitter(2.0, 0.0), emitter(4.0, 0.0)],
        8,
        &FitWindow::default(),
    )
    .unwrap();
    t.effective(Some(phi), 8, DEFAULT_RANK_TOL, LossConvention::HalfWidth)
        .unwrap()
}

#[test]
fn structural_zeros_follow_the_ladder() {
    let h = physical(0.7);
    assert_eq!(h.dim(), 2 * 8 + 4);
    let m = add_drive(&h, 0.3, 0.4);
    let idx = |l| h.index_of(l).unwrap();
    let (fg, eg, ge, gf) = (
        idx(BasisLabel::FG),
        idx(BasisLabel::EG),
        idx(BasisLabel::GE),
        idx(BasisLabel::GF),
    );
    assert_eq!((fg, gf), (0, h.dim() - 1));
    let zero = c(0.0, 0.0);
    for k in 0..h.dim() {
        if k != eg {
            assert_eq!(m[(fg, k)], zero, "FG row at {k}");
        }
        if k != ge {
            assert_eq!(m[(gf, k)], zero, "GF row at {k}");
        }
    }
    assert_eq!(m[(eg, ge)], zero);
    assert_eq!(m[(eg, eg)], zero);
    for (i, a) in h.basis.iter().enumerate() {
        for (j, b) in h.basis.iter().enumerate() {
            if i != j && a.is_plasmonic() && b.is_plasmonic() {
                assert_eq!(m[(i, j)], zero, "{a} -> {b}");
            }
        }
    }
}

#[test]
fn hermitian_part_and_loss_split_the_matrix() {
    let h = physical(1.3);
    let herm = h.hermitian_part();
    assert!((&herm - herm.adjoint()).iter().all(|z| z.norm() < 1e-15));
    for (k, l) in h.loss.iter().enumerate() {
        assert!(*l >= 0.0);
        assert_eq!(h.basis[k].is_plasmonic(), *l > 0.0);
        assert!((h.h_static[(k, k)].im + l).abs() < 1e-15);
    }
}

fn det(m: DMatrix<Complex64>) -> Complex64 {
    m.lu().determinant()
}

#[test]
fn reordering_the_basis_keeps_the_spectrum() {
    let h = physical(0.4);
    let m = add_drive(&h, 2e-3, 1e-3);
    let n = m.nrows();
    // reversed order, which swaps the roles of the two emitters' labels
    let perm: Vec<usize> = (0..n).rev().collect();
    let p = m.select_rows(&perm).select_columns(&perm);
    for z in [c(0.1, 0.0), c(2.0, -0.05), c(-0.3, 0.2)] {
        let shift = DMatrix::from_diagonal_element(n, n, z);
        let a = det(&m - &shift);
        let b = det(&p - &shift);
        assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300), "{a} vs {b}");
    }
}
