//! CSV tables (one header line) and JSON reports.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::campaign::CampaignOutput;
use crate::interferometer::ShotRecord;
use crate::stats::{AllanSeries, Estimate};
use crate::systematics::SystematicShift;
use crate::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Serializes `rows` as CSV with a header line taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    std::fs::write(path, to_csv(rows)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotRow {
    pub timestamp_s: f64,
    pub state_f: u8,
    pub alpha_rad_s2: f64,
    pub probability: f64,
    pub shot_role: &'static str,
}

impl From<&ShotRecord> for ShotRow {
    fn from(r: &ShotRecord) -> Self {
        Self {
            timestamp_s: r.timestamp,
            state_f: r.state.f_number(),
            alpha_rad_s2: r.alpha,
            probability: r.probability,
            shot_role: r.role.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllanRow {
    pub tau_s: f64,
    pub adev_g: f64,
    pub terms: usize,
}

pub fn allan_rows(a: &AllanSeries) -> Vec<AllanRow> {
    a.taus
        .iter()
        .zip(&a.deviations)
        .zip(&a.terms)
        .map(|((&tau_s, &adev_g), &terms)| AllanRow { tau_s, adev_g, terms })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllanSummary {
    /// Amplitude of the τ^(−1/2) fit, i.e. σ at 1 s (g).
    pub sigma_1s: f64,
    pub sigma_long: Option<f64>,
    pub long_tau_s: f64,
    pub slope_exponent: Option<f64>,
    pub fit_max_tau_s: f64,
}

/// Machine-readable summary of a campaign; all differential values in g.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub duration_s: f64,
    pub pairs: usize,
    pub bins: usize,
    pub delta_g_stat: Estimate,
    pub budget: Vec<SystematicShift>,
    pub corrected_value: f64,
    pub corrected_uncertainty: f64,
    pub eta: Estimate,
    pub k_tilde: Estimate,
    pub r_diff: Estimate,
    pub mean_phase_f1: f64,
    pub mean_phase_f2: f64,
    pub allan: AllanSummary,
    pub notices: Vec<String>,
}

impl CampaignReport {
    pub fn new(out: &CampaignOutput, duration_s: f64, long_tau: f64) -> Self {
        let r = &out.result;
        Self {
            seed: out.seed,
            duration_s,
            pairs: out.pairs.len(),
            bins: r.binned_series.len(),
            delta_g_stat: r.delta_g_stat,
            budget: r.budget.rows.clone(),
            corrected_value: r.budget.corrected_value,
            corrected_uncertainty: r.budget.corrected_uncertainty,
            eta: r.eta,
            k_tilde: r.k_tilde,
            r_diff: r.r_diff,
            mean_phase_f1: r.mean_phase[0],
            mean_phase_f2: r.mean_phase[1],
            allan: AllanSummary {
                sigma_1s: out.allan.slope_fit,
                sigma_long: out.allan.at(long_tau),
                long_tau_s: long_tau,
                slope_exponent: out.allan.slope_exponent,
                fit_max_tau_s: out.allan.fit_max_tau,
            },
            notices: r.notices.clone(),
        }
    }
}

/// Writes records.csv, binned.csv, allan.csv, budget.txt and report.json.
pub fn write_campaign(dir: &Path, out: &CampaignOutput, duration_s: f64, long_tau: f64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> =
        ["records.csv", "binned.csv", "allan.csv", "budget.txt", "report.json"].iter().map(|f| dir.join(f)).collect();
    let shots: Vec<ShotRow> = out.records.iter().map(ShotRow::from).collect();
    write_csv(&paths[0], &shots)?;
    write_csv(&paths[1], &out.result.binned_series)?;
    write_csv(&paths[2], &allan_rows(&out.allan))?;
    std::fs::write(&paths[3], out.result.budget.to_table())?;
    write_json(&paths[4], &CampaignReport::new(out, duration_s, long_tau))?;
    Ok(paths)
}
