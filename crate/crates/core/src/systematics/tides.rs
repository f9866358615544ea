//! Harmonic solid-earth tide model and the bias it leaves on alternating
//! state measurements.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Channel, SystematicShift};
use crate::{Error, Result};

/// 1 µGal in m/s².
const MICROGAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TideConstituent {
    pub name: String,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Gravity amplitude (m/s²).
    pub amplitude: f64,
    /// Phase at t = 0 (rad).
    pub phase: f64,
}

impl TideConstituent {
    pub fn from_period_hours(name: &str, period_h: f64, amplitude: f64, phase: f64) -> Self {
        Self { name: name.to_string(), omega: 2.0 * PI / (period_h * 3600.0), amplitude, phase }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TideModel {
    pub constituents: Vec<TideConstituent>,
    /// Static offset (m/s²).
    pub site_offset: f64,
}

impl TideModel {
    pub fn new(constituents: Vec<TideConstituent>, site_offset: f64) -> Result<Self> {
        let m = Self { constituents, site_offset };
        m.validate()?;
        Ok(m)
    }

    /// Six principal lines with mid-latitude body-tide amplitudes.
    pub fn mid_latitude() -> Self {
        let lines = [
            ("M2", 12.420_601_2, 55.0, 1.16),
            ("S2", 12.0, 25.0, 1.50),
            ("N2", 12.658_347_5, 11.0, 4.69),
            ("K1", 23.934_472_1, 40.0, 5.38),
            ("O1", 25.819_338_7, 29.0, 5.92),
            ("P1", 24.065_887_7, 13.0, 0.28),
        ];
        Self {
            constituents: lines
                .iter()
                .map(|&(n, p, a, ph)| TideConstituent::from_period_hours(n, p, a * MICROGAL, ph))
                .collect(),
            site_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.constituents.iter().enumerate() {
            if !(c.amplitude >= 0.0) {
                return Err(Error::InvalidInput(format!("constituent {} has a negative amplitude", c.name)));
            }
            if !(c.omega > 0.0) || !c.phase.is_finite() {
                return Err(Error::InvalidInput(format!("constituent {} needs ω > 0 and a finite phase", c.name)));
            }
            if self.constituents[..i].iter().any(|o| o.omega == c.omega) {
                return Err(Error::InvalidInput(format!("duplicate frequency for constituent {}", c.name)));
            }
        }
        if !self.site_offset.is_finite() {
            return Err(Error::InvalidInput("site offset must be finite".into()));
        }
        Ok(())
    }

    pub fn longest_period(&self) -> f64 {
        self.constituents.iter().map(TideConstituent::period).fold(0.0, f64::max)
    }

    /// Parses a constituent table: `name period_h amplitude_ugal phase_rad`
    /// per line, plus an optional `site_offset_m_s2 = value` line. `#` starts
    /// a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut constituents = Vec::new();
        let mut site_offset = 0.0;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if key.trim() != "site_offset_m_s2" {
                    return Err(Error::Parse(format!("line {}: unknown key {}", ln + 1, key.trim())));
                }
                site_offset = parse_num(value, ln)?;
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns, found {}", ln + 1, cols.len())));
            }
            let period = parse_num(cols[1], ln)?;
            if !(period > 0.0) {
                return Err(Error::Parse(format!("line {}: period must be positive", ln + 1)));
            }
            constituents.push(TideConstituent::from_period_hours(
                cols[0],
                period,
                parse_num(cols[2], ln)? * MICROGAL,
                parse_num(cols[3], ln)?,
            ));
        }
        Self::new(constituents, site_offset)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("# name period_h amplitude_ugal phase_rad\n");
        for c in &self.constituents {
            let _ = writeln!(s, "{} {} {} {}", c.name, c.period() / 3600.0, c.amplitude / MICROGAL, c.phase);
        }
        let _ = writeln!(s, "site_offset_m_s2 = {}", self.site_offset);
        s
    }
}

fn parse_num(s: &str, ln: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))
}

/// Tidal gravity (m/s²) at time `t` (s).
pub fn tide_g(t: f64, model: &TideModel) -> f64 {
    model.site_offset
        + model
            .constituents
            .iter()
            .map(|c| c.amplitude * (c.omega * t + c.phase).cos())
            .sum::<f64>()
}

/// Analytic time derivative of [`tide_g`] (m/s³).
pub fn tide_rate(t: f64, model: &TideModel) -> f64 {
    -model
        .constituents
        .iter()
        .map(|c| c.amplitude * c.omega * (c.omega * t + c.phase).sin())
        .sum::<f64>()
}

/// Antiderivative of the varying part of [`tide_g`].
fn tide_integral(t: f64, model: &TideModel) -> f64 {
    model
        .constituents
        .iter()
        .map(|c| c.amplitude / c.omega * (c.omega * t + c.phase).sin())
        .sum()
}

/// Mean of tide_g(t + lag) − tide_g(t) over [0, window], in units of
/// `g_nominal`. The uncertainty is the largest single-pair difference seen
/// in the window.
pub fn tide_alternation_bias(model: &TideModel, lag: f64, window: f64, g_nominal: f64) -> Result<SystematicShift> {
    if !(lag > 0.0) {
        return Err(Error::InvalidInput("lag must be positive".into()));
    }
    let longest = model.longest_period();
    if !(window >= longest) {
        return Err(Error::WindowTooShort { window_s: window, period_s: longest });
    }
    let i = |t| tide_integral(t, model);
    let mean = (i(window + lag) - i(lag) - i(window) + i(0.0)) / window;

    // sample densely enough to resolve the semidiurnal extrema
    let n = ((window / 60.0).ceil() as usize).max(2);
    let max_diff = (0..=n)
        .map(|k| {
            let t = window * k as f64 / n as f64;
            (tide_g(t + lag, model) - tide_g(t, model)).abs()
        })
        .fold(0.0, f64::max);
    Ok(SystematicShift {
        channel: Channel::Tide,
        value: mean / g_nominal,
        uncertainty: max_diff / g_nominal,
        note: Some(format!("window {window} s, lag {lag} s; uncertainty is the largest single-pair difference")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: f64 = 9.794;
    const HOURS_63: f64 = 63.0 * 3600.0;

    fn single(name: &str, period_h: f64) -> TideModel {
        TideModel::new(vec![TideConstituent::from_period_hours(name, period_h, 5e-7, 0.3)], 0.0).unwrap()
    }

    #[test]
    fn zero_amplitudes_give_site_offset() {
        let mut m = TideModel::mid_latitude();
        for c in &mut m.constituents {
            c.amplitude = 0.0;
        }
        m.site_offset = 1.5e-6;
        for t in [0.0, 1234.5, 1e5] {
            assert_eq!(tide_g(t, &m), 1.5e-6);
        }
    }

    #[test]
    fn m2_alone_is_periodic() {
        let m = single("M2", 12.420_601_2);
        let p = 12.420_601_2 * 3600.0;
        for t in [0.0, 1000.0, 33_333.0] {
            assert!((tide_g(t + p, &m) - tide_g(t, &m)).abs() < 1e-18);
        }
        assert!((tide_g(0.0, &m) - 5e-7 * 0.3f64.cos()).abs() < 1e-20);
    }

    #[test]
    fn default_peak_to_peak_over_63_hours() {
        let m = TideModel::mid_latitude();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=226_800 {
            let v = tide_g(k as f64, &m);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let ptp = (hi - lo) / G;
        assert!((1e-7..=3e-7).contains(&ptp), "{ptp:e}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = TideModel::mid_latitude();
        let h = 0.1;
        for t in [0.0, 5_000.0, 71_000.0, 200_000.0] {
            // fourth-order central difference
            let fd = (-tide_g(t + 2.0 * h, &m) + 8.0 * tide_g(t + h, &m) - 8.0 * tide_g(t - h, &m)
                + tide_g(t - 2.0 * h, &m))
                / (12.0 * h);
            let an = tide_rate(t, &m);
            assert!(((fd - an) / an).abs() < 1e-9, "{t}: {fd:e} vs {an:e}");
        }
    }

    #[test]
    fn constant_tide_has_no_lag_bias() {
        let mut m = TideModel::mid_latitude();
        for c in &mut m.constituents {
            c.amplitude = 0.0;
        }
        m.site_offset = 3e-6;
        let s = tide_alternation_bias(&m, 2.0, HOURS_63, G).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn default_lag_bias_level() {
        let s = tide_alternation_bias(&TideModel::mid_latitude(), 2.0, HOURS_63, G).unwrap();
        assert!(s.value.abs() <= 1e-11 && s.value.abs() >= 1e-12, "{:e}", s.value);
        // brute-force mean over one-second steps
        let m = TideModel::mid_latitude();
        let n = 226_800;
        let brute: f64 = (0..n)
            .map(|k| {
                let t = k as f64 + 0.5;
                tide_g(t + 2.0, &m) - tide_g(t, &m)
            })
            .sum::<f64>()
            / n as f64
            / G;
        assert!((brute - s.value).abs() < 1e-3 * s.value.abs(), "{brute:e} {:e}", s.value);
    }

    #[test]
    fn lag_bias_is_linear_for_short_lags() {
        let m = TideModel::mid_latitude();
        let a = tide_alternation_bias(&m, 1.0, HOURS_63, G).unwrap().value;
        let b = tide_alternation_bias(&m, 2.0, HOURS_63, G).unwrap().value;
        assert!((b / a - 2.0).abs() < 1e-3);
    }

    #[test]
    fn short_window_rejected() {
        let r = tide_alternation_bias(&TideModel::mid_latitude(), 2.0, 20.0 * 3600.0, G);
        assert!(matches!(r, Err(Error::WindowTooShort { .. })));
        assert!(tide_alternation_bias(&TideModel::mid_latitude(), 0.0, HOURS_63, G).is_err());
    }

    #[test]
    fn table_round_trip() {
        let m = TideModel::mid_latitude();
        let back = TideModel::parse(&m.to_table()).unwrap();
        for (a, b) in m.constituents.iter().zip(&back.constituents) {
            assert_eq!(a.name, b.name);
            assert!((a.omega - b.omega).abs() < 1e-15 * a.omega);
            assert!((a.amplitude - b.amplitude).abs() < 1e-20);
        }
        assert!(TideModel::parse("M2 12.42 50").is_err());
        assert!(TideModel::parse("M2 12.42 50 0\nM2b 12.42 10 0").is_err());
        assert!(TideModel::parse("M2 12.42 -5 0").is_err());
    }

    #[test]
    fn shipped_table_matches_default() {
        let text = include_str!("../../data/tides_mid_latitude.txt");
        let m = TideModel::parse(text).unwrap();
        let d = TideModel::mid_latitude();
        for t in [0.0, 1e4, 2e5] {
            assert!((tide_g(t, &m) - tide_g(t, &d)).abs() < 1e-15);
        }
    }
}
