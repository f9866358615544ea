//! Quadratic Zeeman bias from the spatial separation of the two arms.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bragg::roots::brent_root;
use crate::model::{HyperfineState, InterferometerConfig, PhysicalConstants, Trajectory, PLANCK};
use crate::{Error, Result};

/// Solenoid field per unit current: 90 mG at 100 mA.
pub const DEFAULT_BIAS_SCALE: f64 = 9e-5;
/// Nominal solenoid current (A).
pub const NOMINAL_CURRENT: f64 = 0.1;
/// Differential bias the shipped profile is calibrated to (units of g).
pub const DEFAULT_TARGET_BIAS: f64 = -2.1e-10;
/// Relative depth of the solenoid field step in the shipped profile, solved
/// by [`calibrate_gradient_fraction`].
pub const DEFAULT_GRADIENT_FRACTION: f64 = 2.933_726_325_226_226e-3;

const STEP_CENTER: f64 = 0.62;
const STEP_WIDTH: f64 = 0.05;
const RESIDUAL_FIELD: f64 = 1e-7;
const RESIDUAL_GRADIENT: f64 = 5e-8;

/// Field magnitude on a vertical grid, split into a part that scales with
/// the solenoid current and a current-independent residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticProfile {
    z: Vec<f64>,
    /// Solenoid field per ampere (T/A).
    per_amp: Vec<f64>,
    /// Residual field (T).
    residual: Vec<f64>,
    /// Solenoid current (A).
    pub current: f64,
    /// Nominal field per unit current (T/A).
    pub bias_scale: f64,
    b2: Vec<f64>,
}

impl MagneticProfile {
    pub fn new(z: Vec<f64>, per_amp: Vec<f64>, residual: Vec<f64>, current: f64) -> Result<Self> {
        if z.len() < 2 || per_amp.len() != z.len() || residual.len() != z.len() {
            return Err(Error::InvalidInput("profile needs ≥ 2 nodes and equal-length columns".into()));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("profile grid must be strictly increasing in z".into()));
        }
        if !(current >= 0.0) {
            return Err(Error::InvalidInput("solenoid current must be non-negative".into()));
        }
        let mut p = Self { z, per_amp, residual, current, bias_scale: DEFAULT_BIAS_SCALE, b2: Vec::new() };
        p.refresh()?;
        Ok(p)
    }

    /// A field that does not depend on the solenoid current.
    pub fn from_samples(z: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let zeros = vec![0.0; z.len()];
        Self::new(z, zeros, b, 0.0)
    }

    pub fn uniform(lo: f64, hi: f64, b: f64) -> Result<Self> {
        Self::from_samples(vec![lo, hi], vec![b, b])
    }

    /// Shipped profile: a smooth solenoid field with a localized step near
    /// the top of the fountain, plus a weak residual gradient.
    pub fn solenoid(gradient_fraction: f64, current: f64) -> Result<Self> {
        let n = 401;
        let z: Vec<f64> = (0..n).map(|i| 0.4 + 0.4 * i as f64 / (n - 1) as f64).collect();
        let per_amp = z
            .iter()
            .map(|&z| DEFAULT_BIAS_SCALE * (1.0 + gradient_fraction * ((z - STEP_CENTER) / STEP_WIDTH).tanh()))
            .collect();
        let residual = z.iter().map(|&z| RESIDUAL_FIELD + RESIDUAL_GRADIENT * (z - STEP_CENTER)).collect();
        Self::new(z, per_amp, residual, current)
    }

    pub fn default_calibrated() -> Self {
        Self::solenoid(DEFAULT_GRADIENT_FRACTION, NOMINAL_CURRENT).expect("shipped profile is valid")
    }

    pub fn with_current(&self, current: f64) -> Result<Self> {
        Self::new(self.z.clone(), self.per_amp.clone(), self.residual.clone(), current)
            .map(|p| Self { bias_scale: self.bias_scale, ..p })
    }

    fn refresh(&mut self) -> Result<()> {
        self.b2 = self
            .per_amp
            .iter()
            .zip(&self.residual)
            .map(|(a, r)| {
                let b = self.current * a + r;
                b * b
            })
            .collect();
        if self
            .per_amp
            .iter()
            .zip(&self.residual)
            .any(|(a, r)| !(self.current * a + r >= 0.0))
        {
            return Err(Error::InvalidInput("field magnitude must be non-negative everywhere".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    /// Solenoid contribution at the nominal scale, `bias_scale · current`.
    pub fn bias_field(&self) -> f64 {
        self.bias_scale * self.current
    }

    fn locate(&self, z: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.domain();
        if !(z >= lo && z <= hi) {
            return Err(Error::OutOfDomain { z_m: z, lo_m: lo, hi_m: hi });
        }
        let i = self.z.partition_point(|&x| x <= z).clamp(1, self.z.len() - 1) - 1;
        Ok((i, (z - self.z[i]) / (self.z[i + 1] - self.z[i])))
    }

    /// B² at `z`, linear between nodes.
    pub fn b_squared(&self, z: f64) -> Result<f64> {
        let (i, f) = self.locate(z)?;
        Ok(self.b2[i] + (self.b2[i + 1] - self.b2[i]) * f)
    }

    pub fn field(&self, z: f64) -> Result<f64> {
        self.b_squared(z).map(f64::sqrt)
    }

    /// Same profile with `c` added to B² at every node.
    pub fn with_b2_offset(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.b2.iter_mut().for_each(|v| *v += c);
        p
    }

    /// Reads `z_m B_tesla [residual_tesla]` rows and an optional
    /// `current_a = value` line. `B_tesla` is the total field at that current;
    /// the residual column (default 0) is the part that does not scale with it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut current = 0.0;
        let (mut z, mut b, mut r) = (Vec::new(), Vec::new(), Vec::new());
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))
            };
            if let Some((k, v)) = line.split_once('=') {
                if k.trim() != "current_a" {
                    return Err(Error::Parse(format!("line {}: unknown key {}", ln + 1, k.trim())));
                }
                current = num(v)?;
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&cols.len()) {
                return Err(Error::Parse(format!("line {}: expected 2 or 3 columns", ln + 1)));
            }
            z.push(num(cols[0])?);
            b.push(num(cols[1])?);
            r.push(if cols.len() == 3 { num(cols[2])? } else { 0.0 });
        }
        if current > 0.0 {
            let per_amp = b.iter().zip(&r).map(|(b, r)| (b - r) / current).collect();
            Self::new(z, per_amp, r, current)
        } else {
            Self::from_samples(z, b)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("# z_m B_tesla residual_tesla\n");
        let _ = writeln!(s, "current_a = {}", self.current);
        for i in 0..self.z.len() {
            let b = self.current * self.per_amp[i] + self.residual[i];
            let _ = writeln!(s, "{} {} {}", self.z[i], b, self.residual[i]);
        }
        s
    }
}

/// Quadratic Zeeman energy (J) of an m_F = 0 clock state. The two states
/// shift oppositely, each by half the clock-transition shift.
pub fn zeeman_potential(state: HyperfineState, b: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::InvalidInput("field magnitude must be non-negative".into()));
    }
    Ok(state.zeeman_sign() * 0.5 * PLANCK * constants.clock_quadratic_coeff * b * b)
}

// 5-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];
const PANELS_PER_HALF: usize = 200;

/// Acceleration-equivalent bias (units of g) on one state from the
/// potential difference between the arms, first order in the potential.
pub fn zeeman_bias(
    profile: &MagneticProfile,
    trajectory: &Trajectory,
    state: HyperfineState,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let (zlo, zhi) = trajectory.z_range();
    let (plo, phi) = profile.domain();
    if zlo < plo {
        return Err(Error::OutOfDomain { z_m: zlo, lo_m: plo, hi_m: phi });
    }
    if zhi > phi {
        return Err(Error::OutOfDomain { z_m: zhi, lo_m: plo, hi_m: phi });
    }
    let t = trajectory.pulse_separation;
    let coeff = state.zeeman_sign() * 0.5 * PLANCK * constants.clock_quadratic_coeff;
    // the arm kink at t = T is a panel edge
    let mut integral = 0.0;
    for (a, b) in [(0.0, t), (t, 2.0 * t)] {
        let h = (b - a) / PANELS_PER_HALF as f64;
        for p in 0..PANELS_PER_HALF {
            let mid = a + h * (p as f64 + 0.5);
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let s = mid + 0.5 * h * x;
                let du = profile.b_squared(trajectory.z_upper(s))? - profile.b_squared(trajectory.z_lower(s))?;
                integral += 0.5 * h * w * du;
            }
        }
    }
    let phase_per_g = constants.hbar * config.scale_factor();
    Ok(coeff * integral / phase_per_g / constants.g_nominal)
}

/// bias(F=1) − bias(F=2), units of g.
pub fn zeeman_differential(
    profile: &MagneticProfile,
    trajectory: &Trajectory,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<f64> {
    Ok(zeeman_bias(profile, trajectory, HyperfineState::F1, config, constants)?
        - zeeman_bias(profile, trajectory, HyperfineState::F2, config, constants)?)
}

/// Solves for the solenoid step depth that gives `target` differential bias
/// (units of g) at `current`.
pub fn calibrate_gradient_fraction(
    target: f64,
    current: f64,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let traj = Trajectory::symmetric_about_apex(config, constants);
    brent_root(
        |eps| {
            let p = MagneticProfile::solenoid(eps, current)?;
            Ok(zeeman_differential(&p, &traj, config, constants)? - target)
        },
        0.0,
        0.5,
        1e-14,
        0.0,
        200,
    )
    .map_err(|_| Error::Calibration(format!("no step depth reaches {target:e} g")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationPoint {
    pub current_a: f64,
    pub bias_field_t: f64,
    pub delta_g: f64,
}

/// Δg ≈ c0 + c1·I + c2·I².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * x * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationCurve {
    pub points: Vec<ModulationPoint>,
    pub fit: QuadraticFit,
}

/// Differential bias as a function of solenoid current.
pub fn zeeman_modulation_curve(
    profile: &MagneticProfile,
    currents: &[f64],
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<ModulationCurve> {
    if currents.len() < 3 {
        return Err(Error::InsufficientData("quadratic fit needs at least 3 currents".into()));
    }
    if currents.iter().any(|&i| !(i >= 0.0)) {
        return Err(Error::InvalidInput("currents must be non-negative".into()));
    }
    let traj = Trajectory::symmetric_about_apex(config, constants);
    let points = currents
        .iter()
        .map(|&i| {
            let p = profile.with_current(i)?;
            Ok(ModulationPoint {
                current_a: i,
                bias_field_t: p.bias_field(),
                delta_g: zeeman_differential(&p, &traj, config, constants)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.current_a).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.delta_g).collect();
    let fit = fit_quadratic(&xs, &ys)?;
    Ok(ModulationCurve { points, fit })
}

pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<QuadraticFit> {
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::Fit("all abscissae are zero".into()));
    }
    // fit on x/scale for conditioning
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (x, y) in xs.iter().zip(ys) {
        let u = x / scale;
        let row = [1.0, u, u * u];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let c = crate::stats::linalg::solve3(&ata, &aty).ok_or_else(|| Error::Fit("singular quadratic design".into()))?;
    let fit = QuadraticFit { c0: c[0], c1: c[1] / scale, c2: c[2] / (scale * scale), r_squared: 0.0 };
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - fit.eval(*x)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(QuadraticFit { r_squared, ..fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rb87_constants;

    fn setup() -> (PhysicalConstants, InterferometerConfig, Trajectory) {
        let c = rb87_constants();
        let cfg = InterferometerConfig::nominal(&c);
        let t = Trajectory::symmetric_about_apex(&cfg, &c);
        (c, cfg, t)
    }

    #[test]
    fn potential_is_quadratic_and_antisymmetric() {
        let c = rb87_constants();
        assert_eq!(zeeman_potential(HyperfineState::F1, 0.0, &c).unwrap(), 0.0);
        for b in [1e-7, 9e-6, 3e-5] {
            let u1 = zeeman_potential(HyperfineState::F1, b, &c).unwrap();
            let u2 = zeeman_potential(HyperfineState::F2, b, &c).unwrap();
            assert_eq!(u1, -u2);
            let u4 = zeeman_potential(HyperfineState::F2, 2.0 * b, &c).unwrap();
            assert!((u4 / u2 - 4.0).abs() < 1e-14);
        }
        // clock shift h·K_q·B² at 1 G is 575.15 Hz
        let du = zeeman_potential(HyperfineState::F2, 1e-4, &c).unwrap()
            - zeeman_potential(HyperfineState::F1, 1e-4, &c).unwrap();
        assert!((du / PLANCK - 575.15).abs() < 1e-9);
        assert!(zeeman_potential(HyperfineState::F1, -1e-6, &c).is_err());
    }

    #[test]
    fn uniform_field_gives_exactly_zero() {
        let (c, cfg, t) = setup();
        let p = MagneticProfile::uniform(0.4, 0.8, 9e-6).unwrap();
        for s in HyperfineState::BOTH {
            assert_eq!(zeeman_bias(&p, &t, s, &cfg, &c).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_b_squared_matches_closed_form() {
        let (c, cfg, t) = setup();
        // B² = a + G·z is reproduced exactly by linear interpolation
        let grad = 7.8e-12;
        let z: Vec<f64> = (0..41).map(|i| 0.4 + 0.01 * i as f64).collect();
        let b: Vec<f64> = z.iter().map(|z| (8.1e-11 + grad * (z - 0.6)).sqrt()).collect();
        let p = MagneticProfile::from_samples(z, b).unwrap();
        // ∫(z_up − z_low)dt = v_rec·T², phase scale ħ·n·k_eff·T², and
        // ħ·k_eff = m·v_rec for n = 1: bias = sign·h·K_q·G/(2m)
        let oracle = PLANCK * 575.15e8 * grad / (2.0 * 1.443_160_648e-25) / 9.794;
        let b2 = zeeman_bias(&p, &t, HyperfineState::F2, &cfg, &c).unwrap();
        let b1 = zeeman_bias(&p, &t, HyperfineState::F1, &cfg, &c).unwrap();
        assert!((b2 - oracle).abs() < 1e-9 * oracle, "{b2:e} vs {oracle:e}");
        assert_eq!(b1, -b2);
    }

    #[test]
    fn invariant_under_constant_b_squared_offset() {
        let (c, cfg, t) = setup();
        let p = MagneticProfile::default_calibrated();
        let a = zeeman_differential(&p, &t, &cfg, &c).unwrap();
        let b = zeeman_differential(&p.with_b2_offset(4e-10), &t, &cfg, &c).unwrap();
        assert!((a - b).abs() < 1e-12, "{a:e} {b:e}");
    }

    #[test]
    fn shipped_profile_reproduces_calibrated_bias() {
        let (c, cfg, t) = setup();
        let d = zeeman_differential(&MagneticProfile::default_calibrated(), &t, &cfg, &c).unwrap();
        assert!((d - DEFAULT_TARGET_BIAS).abs() < 1e-13, "{d:e}");
    }

    #[test]
    fn frozen_step_depth_matches_recalibration() {
        let (c, cfg, _) = setup();
        let eps = calibrate_gradient_fraction(DEFAULT_TARGET_BIAS, NOMINAL_CURRENT, &cfg, &c).unwrap();
        assert!((eps - DEFAULT_GRADIENT_FRACTION).abs() < 1e-9 * eps.abs(), "{eps:.15e}");
    }

    #[test]
    fn out_of_domain_trajectory_rejected() {
        let (c, cfg, t) = setup();
        let p = MagneticProfile::uniform(0.6, 0.8, 9e-6).unwrap();
        assert!(matches!(
            zeeman_bias(&p, &t, HyperfineState::F1, &cfg, &c),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn modulation_is_quadratic_dominated() {
        let (c, cfg, _) = setup();
        let currents: Vec<f64> = (0..=6).map(|i| 0.05 * i as f64).collect();
        let curve = zeeman_modulation_curve(&MagneticProfile::default_calibrated(), &currents, &cfg, &c).unwrap();
        let imax = 0.3;
        assert!((curve.fit.c2 * imax * imax).abs() > 10.0 * (curve.fit.c1 * imax).abs());
        assert!(curve.fit.r_squared > 0.999);
        let at100 = curve.points.iter().find(|p| (p.current_a - 0.1).abs() < 1e-12).unwrap();
        assert!((at100.bias_field_t - 9e-6).abs() < 1e-18);
        assert!(zeeman_modulation_curve(&MagneticProfile::default_calibrated(), &[0.1], &cfg, &c).is_err());
    }

    #[test]
    fn zero_current_leaves_residual_baseline() {
        let (c, cfg, t) = setup();
        let p = MagneticProfile::default_calibrated().with_current(0.0).unwrap();
        let base = zeeman_differential(&p, &t, &cfg, &c).unwrap();
        // residual B·dB/dz only
        let oracle = -PLANCK * 575.15e8 * 2.0 * RESIDUAL_GRADIENT * (RESIDUAL_FIELD + RESIDUAL_GRADIENT * (0.63 - STEP_CENTER))
            / 1.443_160_648e-25
            / 9.794;
        assert!(base < 0.0 && (base - oracle).abs() < 0.05 * oracle.abs(), "{base:e} {oracle:e}");
    }

    #[test]
    fn table_round_trip() {
        let (c, cfg, t) = setup();
        let p = MagneticProfile::default_calibrated();
        let back = MagneticProfile::parse(&p.to_table()).unwrap();
        let a = zeeman_differential(&p, &t, &cfg, &c).unwrap();
        let b = zeeman_differential(&back, &t, &cfg, &c).unwrap();
        assert!((a - b).abs() < 1e-15);
        let shipped = MagneticProfile::parse(include_str!("../../data/bias_profile.txt")).unwrap();
        let s = zeeman_differential(&shipped, &t, &cfg, &c).unwrap();
        assert!((s - DEFAULT_TARGET_BIAS).abs() < 1e-13, "{s:e}");
        assert!(MagneticProfile::parse("0.1 1e-6\n0.1 1e-6").is_err());
        assert!(MagneticProfile::parse("0.1 1e-6 2 3").is_err());
    }
}
