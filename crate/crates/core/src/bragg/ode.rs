//! Dormand–Prince 5(4) with PI step-size control for complex state vectors.

use num_complex::Complex64;

use crate::{Error, Result};

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded 4th-order error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_steps: 2_000_000 }
    }
}

impl Dopri5 {
    /// Integrates y' = f(t, y) from `t0` to `t1` in place.
    pub fn integrate<F>(&self, mut f: F, t0: f64, t1: f64, y: &mut [Complex64]) -> Result<OdeStats>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        let mut stats = OdeStats::default();
        if t1 == t0 || n == 0 {
            return Ok(stats);
        }
        let span = t1 - t0;
        let dir = span.signum();
        let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::default(); n]);
        let mut tmp = vec![Complex64::default(); n];
        let mut ynew = vec![Complex64::default(); n];

        let mut t = t0;
        f(t, y, &mut k[0]);
        let mut h = self.initial_step(span.abs(), y, &k[0]) * dir;
        let mut err_prev: f64 = 1e-4;

        while (t1 - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integration(format!("exceeded {} steps", self.max_steps)));
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }
            let stage = |tmp: &mut [Complex64], k: &[Vec<Complex64>; 7], coeffs: &[(usize, f64)]| {
                for i in 0..n {
                    let mut acc = y[i];
                    for &(j, a) in coeffs {
                        acc += k[j][i] * (h * a);
                    }
                    tmp[i] = acc;
                }
            };
            stage(&mut tmp, &k, &[(0, A21)]);
            f(t + C2 * h, &tmp, &mut k[1]);
            stage(&mut tmp, &k, &[(0, A31), (1, A32)]);
            f(t + C3 * h, &tmp, &mut k[2]);
            stage(&mut tmp, &k, &[(0, A41), (1, A42), (2, A43)]);
            f(t + C4 * h, &tmp, &mut k[3]);
            stage(&mut tmp, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            f(t + C5 * h, &tmp, &mut k[4]);
            stage(&mut tmp, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            f(t + h, &tmp, &mut k[5]);
            stage(&mut ynew, &k, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
            f(t + h, &ynew, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7)
                    * h;
                let sc = self.atol + self.rtol * y[i].norm().max(ynew[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration("non-finite error estimate".into()));
            }

            if err <= 1.0 {
                t += h;
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                stats.accepted += 1;
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                h *= fac.clamp(0.2, 5.0);
                err_prev = err.max(1e-4);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).max(0.2);
            }
            if h.abs() < 1e-14 * span.abs() {
                return Err(Error::Integration("step size underflow".into()));
            }
        }
        Ok(stats)
    }

    fn initial_step(&self, span: f64, y: &[Complex64], dy: &[Complex64]) -> f64 {
        let n = y.len() as f64;
        let d0 = (y.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt();
        let d1 = (dy.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        h.min(0.1 * span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase_rotation() {
        // y' = -iωy  →  y(t) = e^{-iωt}
        let w = 3.7;
        let mut y = vec![Complex64::new(1.0, 0.0)];
        Dopri5::default()
            .integrate(|_, y, dy| dy[0] = Complex64::new(0.0, -w) * y[0], 0.0, 2.0, &mut y)
            .unwrap();
        let exact = Complex64::from_polar(1.0, -w * 2.0);
        assert!((y[0] - exact).norm() < 1e-9);
    }

    #[test]
    fn integrates_backwards() {
        let mut y = vec![Complex64::new(1.0, 0.0)];
        Dopri5::default()
            .integrate(|_, y, dy| dy[0] = -y[0], 1.0, 0.0, &mut y)
            .unwrap();
        assert!((y[0].re - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn two_level_rabi_flop() {
        // resonant constant drive Ω for t = π/Ω transfers all population
        let om = 2.0;
        let mut y = vec![Complex64::new(1.0, 0.0), Complex64::default()];
        Dopri5::default()
            .integrate(
                |_, y, dy| {
                    let mi = Complex64::new(0.0, -0.5 * om);
                    dy[0] = mi * y[1];
                    dy[1] = mi * y[0];
                },
                0.0,
                std::f64::consts::PI / om,
                &mut y,
            )
            .unwrap();
        assert!((y[1].norm_sqr() - 1.0).abs() < 1e-10);
    }
}
