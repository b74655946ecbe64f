#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use plasmon_stirap::greens::{EmitterSpec, NanoparticleModel};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn normalized(v: DVector<Complex64>) -> DVector<Complex64> {
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn random_unit_vector(rng: &mut StdRng, dim: usize) -> DVector<Complex64> {
    normalized(DVector::from_fn(dim, |_, _| random_complex(rng)))
}

/// `n` unit vectors of which `k` are random combinations of the others,
/// shuffled into a random order.
pub fn dependent_set(rng: &mut StdRng, n: usize, k: usize, dim: usize) -> Vec<DVector<Complex64>> {
    let free: Vec<_> = (0..n - k).map(|_| random_unit_vector(rng, dim)).collect();
    let mut all = free.clone();
    for _ in 0..k {
        let mut v = DVector::from_element(dim, c(0.0, 0.0));
        for f in &free {
            v += f * random_complex(rng);
        }
        all.push(normalized(v));
    }
    for i in (1..all.len()).rev() {
        let j = rng.random_range(0..=i);
        all.swap(i, j);
    }
    all
}

/// `P_n(cos θ)` from its Fourier cosine series, whose coefficients are all
/// positive and sum to one.
pub fn legendre_cos_series(n: usize, theta: f64) -> f64 {
    let a = |k: usize| {
        let mut v = 1.0;
        for j in 1..=k {
            v *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        v
    };
    (0..=n)
        .map(|k| a(k) * a(n - k) * ((n as f64 - 2.0 * k as f64) * theta).cos())
        .sum()
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn silver() -> NanoparticleModel {
    NanoparticleModel::silver_like(8.0)
}

pub fn emitter(distance_nm: f64, angle: f64) -> EmitterSpec {
    EmitterSpec {
        distance_nm,
        polar_angle_rad: angle,
        dipole_debye: 10.0,
        omega_eg_ev: 1.9,
        omega_fg_ev: 0.3,
    }
}
