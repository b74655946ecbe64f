//! Adaptive Dormand–Prince 5(4) for complex linear systems.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps at t = {t:.6e}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("non-finite state at t = {t:.6e}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-3,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrates `y' = f(t, y)` from `t0`, returning the state at every entry
/// of the increasing `samples` (all `≥ t0`). `on_step(t, y_old, y_new)` is
/// called after every accepted step.
pub fn integrate<F, O>(
    f: F,
    t0: f64,
    y0: &[Complex64],
    samples: &[f64],
    opts: &OdeOptions,
    mut on_step: O,
) -> Result<(Vec<Vec<Complex64>>, OdeStats), OdeError>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64], &[Complex64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(samples.len());
    let mut stats = OdeStats::default();

    f(t, &y, &mut k[0]);
    let span = samples.last().map_or(0.0, |&s| s - t0).abs();
    let fnorm = k[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ynorm = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = if fnorm > 0.0 {
        (0.01 * ynorm.max(opts.atol) / fnorm).min(span.max(f64::MIN_POSITIVE))
    } else {
        span.max(1.0) * 1e-3
    };

    for &target in samples {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(OdeError::TooManySteps {
                    t,
                    max_steps: opts.max_steps,
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(OdeError::StepUnderflow { t, h: step });
            }

            let (k1, rest) = k.split_at_mut(1);
            let k1 = &k1[0];
            axpy(&mut tmp, &y, step, &[(A21, k1)]);
            f(t + C2 * step, &tmp, &mut rest[0]);
            axpy(&mut tmp, &y, step, &[(A31, k1), (A32, &rest[0])]);
            f(t + C3 * step, &tmp, &mut rest[1]);
            axpy(
                &mut tmp,
                &y,
                step,
                &[(A41, k1), (A42, &rest[0]), (A43, &rest[1])],
            );
            f(t + C4 * step, &tmp, &mut rest[2]);
            axpy(
                &mut tmp,
                &y,
                step,
                &[(A51, k1), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
            );
            f(t + C5 * step, &tmp, &mut rest[3]);
            axpy(
                &mut tmp,
                &y,
                step,
                &[
                    (A61, k1),
                    (A62, &rest[0]),
                    (A63, &rest[1]),
                    (A64, &rest[2]),
                    (A65, &rest[3]),
                ],
            );
            f(t + step, &tmp, &mut rest[4]);
            axpy(
                &mut ynew,
                &y,
                step,
                &[
                    (A71, k1),
                    (A73, &rest[1]),
                    (A74, &rest[2]),
                    (A75, &rest[3]),
                    (A76, &rest[4]),
                ],
            );
            f(t + step, &ynew, &mut rest[5]);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = step
                    * (E1 * k1[i]
                        + E3 * rest[1][i]
                        + E4 * rest[2][i]
                        + E5 * rest[3][i]
                        + E6 * rest[4][i]
                        + E7 * rest[5][i]);
                let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                if ynew.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) && step < 1e-300 {
                    return Err(OdeError::NonFinite { t });
                }
                h = step * 0.1;
                stats.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                on_step(t + step, &y, &ynew);
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut ynew);
                k.swap(0, 6);
                stats.accepted += 1;
                // a step shortened to hit a sample says nothing about the next h
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(OdeError::StepUnderflow { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay_and_rotation() {
        let lam = Complex64::new(-0.3, 2.0);
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = lam * y[0];
        let samples = [0.5, 1.0, 5.0];
        let opts = OdeOptions::with_rtol(1e-10);
        let (ys, stats) = integrate(
            f,
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &samples,
            &opts,
            |_, _, _| {},
        )
        .unwrap();
        for (t, y) in samples.iter().zip(&ys) {
            let exact = (lam * t).exp();
            assert!((y[0] - exact).norm() < 1e-9 * exact.norm().max(1e-3));
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn hits_sample_times_exactly() {
        let f = |_t: f64, _y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(1.0, 0.0);
        let samples = [0.1, 0.2, 0.3];
        let (ys, _) = integrate(
            f,
            0.0,
            &[Complex64::new(0.0, 0.0)],
            &samples,
            &OdeOptions::with_rtol(1e-8),
            |_, _, _| {},
        )
        .unwrap();
        for (t, y) in samples.iter().zip(&ys) {
            assert!((y[0].re - t).abs() < 1e-14);
        }
    }
}
