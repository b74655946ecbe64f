mod common;

use std::f64::consts::PI;

use common::{emitter, silver};
use plasmon_stirap::cli::mode_count;
use plasmon_stirap::config::preset;
use plasmon_stirap::dynamics::scan::{distance_study, scan_angle_area, truncation_study};
use plasmon_stirap::dynamics::{transfer_efficiency, PropagationPath};
use plasmon_stirap::greens::{select_modes, FitWindow};
use plasmon_stirap::hamiltonian::{adiabatic_eliminate, BasisLabel, LossConvention};
use plasmon_stirap::lowdin::DEFAULT_RANK_TOL;
use plasmon_stirap::system::{run_from, run_stirap, CouplingTable, Swapped};

fn table(d1: f64, d2: f64, n: usize) -> CouplingTable {
    CouplingTable::build(
        &silver(),
        &[emitter(d1, 0.0), emitter(d2, 0.0)],
        n,
        &FitWindow::default(),
    )
    .unwrap()
}

#[test]
fn equal_distances_make_the_reverse_process_identical() {
    let t = table(3.0, 3.0, 12);
    let cfg = preset("fig5").unwrap();
    let s = cfg.stirap_settings();
    let pulses = s.pulses(60.0);
    for phi in [0.0, 0.1, PI] {
        let h = t
            .effective(Some(phi), 12, DEFAULT_RANK_TOL, LossConvention::HalfWidth)
            .unwrap();
        let fwd = run_stirap(&h, &pulses, s.path, &s.propagation).unwrap();
        let back = run_from(&h, &Swapped(pulses), BasisLabel::GF, s.path, &s.propagation).unwrap();
        let a = fwd.final_population(BasisLabel::GF);
        let b = back.final_population(BasisLabel::FG);
        assert!((a - b).abs() < 1e-6, "phi {phi}: {a} vs {b}");
    }
}

#[test]
fn plasmons_stay_nearly_empty_during_transfer() {
    let cfg = preset("fig5").unwrap();
    let n = mode_count(&cfg).unwrap();
    let t = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n, &cfg.fit_window()).unwrap();
    let h = t
        .effective(Some(0.0), n, DEFAULT_RANK_TOL, LossConvention::HalfWidth)
        .unwrap();
    let path = PropagationPath::Full {
        rescale: cfg.numerics.full_rescale,
    };
    let s = cfg.stirap_settings();
    let traj = run_stirap(&h, &s.pulses(cfg.pulses.area), path, &s.propagation).unwrap();
    assert!(traj.stats.peak_plasmon_population <= 0.05);
    assert!(transfer_efficiency(&traj) > 0.9);
    let mid = traj.times.len() / 2;
    assert!(traj.population(mid, BasisLabel::GF) > 0.0);
    assert!((0..traj.times.len()).all(|k| traj.norm_sqr(k) <= 1.0 + 1e-12));
}

#[test]
fn wide_angles_block_the_transfer() {
    let cfg = preset("fig6").unwrap();
    let n = mode_count(&cfg).unwrap();
    let t = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n, &cfg.fit_window()).unwrap();
    let phis: Vec<f64> = cfg
        .scan
        .phi_grid()
        .into_iter()
        .filter(|&p| p >= PI / 4.0)
        .collect();
    let cells = scan_angle_area(&t, n, &cfg.stirap_settings(), &phis, &cfg.scan.areas).unwrap();
    assert_eq!(cells.len(), phis.len() * cfg.scan.areas.len());
    for c in &cells {
        assert!(c.is_ok());
        assert!(
            c.efficiency <= 0.1,
            "phi {} area {}: {}",
            c.phi,
            c.area,
            c.efficiency
        );
    }
}

#[test]
fn straight_line_transfer_improves_with_area() {
    let cfg = preset("fig6").unwrap();
    let n = mode_count(&cfg).unwrap();
    let t = CouplingTable::build(&cfg.nanoparticle, &cfg.emitters, n, &cfg.fit_window()).unwrap();
    let cells = scan_angle_area(&t, n, &cfg.stirap_settings(), &[0.0], &[100.0, 120.0]).unwrap();
    assert!(cells.iter().all(|c| c.efficiency >= 0.9));
}

#[test]
fn keeping_every_mode_reproduces_the_scan() {
    let t = table(2.0, 4.0, 10);
    let cfg = preset("fig7").unwrap();
    let s = cfg.stirap_settings();
    let phis = [0.0, PI / 3.0, PI];
    let areas = [40.0, 90.0];
    let scan = scan_angle_area(&t, 10, &s, &phis, &areas).unwrap();
    let trunc = truncation_study(&t, &s, &[1, 10], &phis, &areas).unwrap();
    assert_eq!(trunc[1].cells, scan);
    for (a, b) in trunc[1].cells.iter().zip(&scan) {
        assert_eq!(a.efficiency.to_bits(), b.efficiency.to_bits());
    }
    assert!(truncation_study(&t, &s, &[11], &phis, &areas).is_err());
}

#[test]
fn distant_emitters_behave_like_the_dipole_only_model() {
    let cfg = preset("fig9").unwrap();
    let model = cfg.nanoparticle;
    let far = [40.0, 80.0, 120.0, 160.0, 240.0, 320.0]
        .into_iter()
        .find(|&d| {
            select_modes(
                &model,
                &[emitter(d, 0.0)],
                cfg.truncation.threshold,
                cfg.truncation.n_max,
            )
            .unwrap()
                == 1
        })
        .expect("some distance keeps only the dipole");
    // the far-field coupling is tiny, so stretch the pulses until the
    // passage is adiabatic again
    let mut s = cfg.stirap_settings();
    s.width_t *= 1e7;
    let rows = distance_study(
        &model,
        &cfg.emitters,
        &cfg.fit_window(),
        cfg.truncation(),
        &s,
        &[far],
        PI,
        90.0,
    )
    .unwrap();
    assert_eq!(rows[0].n_prime, 1);
    let t = CouplingTable::build(
        &model,
        &[emitter(far, 0.0), emitter(far, 0.0)],
        1,
        &cfg.fit_window(),
    )
    .unwrap();
    let m1 = truncation_study(&t, &s, &[1], &[PI], &[90.0]).unwrap();
    assert!((rows[0].efficiency - m1[0].cells[0].efficiency).abs() < 1e-12);
    assert!(rows[0].efficiency > 0.5);
}

#[test]
fn distance_study_reproduces_blockade_and_partial_transfer() {
    let cfg = preset("fig9").unwrap();
    let rows = distance_study(
        &cfg.nanoparticle,
        &cfg.emitters,
        &cfg.fit_window(),
        cfg.truncation(),
        &cfg.stirap_settings(),
        &cfg.scan.distances_nm,
        cfg.scan.distance_phi_rad,
        cfg.pulses.area,
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].efficiency <= 0.05, "{:?}", rows[0]);
    assert!((rows[1].efficiency - 0.5).abs() <= 0.15, "{:?}", rows[1]);
    assert!(rows[0].n_prime > rows[1].n_prime);
}

#[test]
fn interference_of_modes_sets_the_exchange_coupling() {
    let t = table(2.0, 2.0, 25);
    let aligned = adiabatic_eliminate(
        &t.effective(Some(0.0), 25, DEFAULT_RANK_TOL, LossConvention::HalfWidth)
            .unwrap(),
    )
    .unwrap();
    let j = aligned.cross_coupling().norm();
    assert!((j - aligned.self_energy(0).norm()).abs() < 1e-12 * j);
    assert!((j - aligned.self_energy(1).norm()).abs() < 1e-12 * j);

    let opposite = adiabatic_eliminate(
        &t.effective(Some(PI), 25, DEFAULT_RANK_TOL, LossConvention::HalfWidth)
            .unwrap(),
    )
    .unwrap();
    let j = opposite.cross_coupling().norm();
    let scale = (opposite.self_energy(0).norm() * opposite.self_energy(1).norm()).sqrt();
    assert!(j < 0.1 * scale, "|J| = {j}, scale {scale}");
}
