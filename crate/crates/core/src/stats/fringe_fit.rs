use std::f64::consts::PI;

use serde::Serialize;

use super::linalg::{inverse3, mat_vec, Mat3};
use crate::interferometer::FringePoint;
use crate::model::InterferometerConfig;
use crate::{Error, Result};

/// Least-squares fringe parameters. `phase` is the interferometer phase at
/// `alpha_ref`, wrapped to (−π, π]; `covariance` is over
/// (offset, contrast, phase).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeFit {
    pub offset: f64,
    pub contrast: f64,
    pub phase: f64,
    pub alpha_ref: f64,
    pub covariance: Mat3,
    pub residual_rms: f64,
    pub points: usize,
}

impl FringeFit {
    pub fn phase_sigma(&self) -> f64 {
        self.covariance[2][2].sqrt()
    }

    pub fn predict(&self, alpha: f64, config: &InterferometerConfig) -> f64 {
        let theta = config.bragg_order as f64 * config.pulse_separation.powi(2) * (alpha - self.alpha_ref);
        self.offset - 0.5 * self.contrast * (self.phase - theta).cos()
    }

    /// Acceleration consistent with the fitted phase, within one fringe
    /// period of the reference chirp.
    pub fn gravity(&self, config: &InterferometerConfig) -> f64 {
        let nt2 = config.bragg_order as f64 * config.pulse_separation.powi(2);
        (self.alpha_ref + self.phase / nt2) / config.k_eff
    }
}

pub(crate) fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Fits P(α) = offset − (contrast/2)·cos(nT²(k_eff·g − α)) with the period
/// fixed by the sequence timing. Linear in (offset, A cos φ, A sin φ).
pub fn sine_fringe_fit(points: &[FringePoint], config: &InterferometerConfig) -> Result<FringeFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!("fringe fit needs ≥ 5 points, got {}", points.len())));
    }
    let nt2 = config.bragg_order as f64 * config.pulse_separation.powi(2);
    let alpha_ref = points[0].alpha;
    let rows: Vec<([f64; 3], f64)> = points
        .iter()
        .map(|p| {
            let theta = nt2 * (p.alpha - alpha_ref);
            ([1.0, theta.cos(), theta.sin()], p.probability)
        })
        .collect();
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (r, y) in &rows {
        for i in 0..3 {
            xty[i] += r[i] * y;
            for j in 0..3 {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = inverse3(&xtx).ok_or_else(|| Error::Fit("rank-deficient design: chirp values do not span a fringe".into()))?;
    let [a, b, c] = mat_vec(&inv, &xty);

    let ssr: f64 = rows
        .iter()
        .map(|(r, y)| (y - (a * r[0] + b * r[1] + c * r[2])).powi(2))
        .sum();
    let dof = points.len() - 3;
    let s2 = if dof > 0 { ssr / dof as f64 } else { 0.0 };

    let r2 = b * b + c * c;
    let contrast = 2.0 * r2.sqrt();
    if !(contrast > 1e-10 * a.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::UnconstrainedPhase);
    }
    let phase = wrap_phase((-c).atan2(-b));

    // Jacobian of (offset, contrast, phase) w.r.t. (a, b, c)
    let jac = [[1.0, 0.0, 0.0], [0.0, 4.0 * b / contrast, 4.0 * c / contrast], [0.0, -c / r2, b / r2]];
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    v += jac[i][k] * inv[k][l] * jac[j][l];
                }
            }
            cov[i][j] = s2 * v;
        }
    }
    if !cov[2][2].is_finite() {
        return Err(Error::UnconstrainedPhase);
    }
    Ok(FringeFit {
        offset: a,
        contrast,
        phase,
        alpha_ref,
        covariance: cov,
        residual_rms: (ssr / points.len() as f64).sqrt(),
        points: points.len(),
    })
}
