use std::fmt;
use std::path::PathBuf;

use hfuff::bragg::{rabi_sweep, two_photon_rabi, CalibratedPulses};
use hfuff::campaign::{run_full_campaign, systematic_rows, CampaignOutput, LONG_TAU};
use hfuff::config::RunConfig;
use hfuff::interferometer::{fringe_scan, pair_period, ShotEnvironment, ShotModel, TARGET_SENSITIVITY};
use hfuff::output::{allan_rows, write_campaign, write_csv, write_json};
use hfuff::stats::sine_fringe_fit;
use hfuff::systematics::{zeeman_modulation_curve, Channel, SystematicShift, DEFAULT_TARGET_BIAS, NOMINAL_CURRENT};
use hfuff::{HyperfineState, Trajectory};
use serde::Serialize;

use crate::Failure;

/// Detuning the measured ratio of Rabi frequencies is balanced at (Hz).
const REFERENCE_DETUNING_HZ: f64 = 3.1817e9;

pub(crate) struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

type Checks = Result<Vec<Check>, Failure>;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.output_path();
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("{what}: {x:?}: {e}"))))
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    detuning_hz: f64,
    rabi_f1_rad_s: f64,
    rabi_f2_rad_s: f64,
    difference_rad_s: f64,
}

pub(crate) fn detuning(cfg: &RunConfig, bracket: Option<&str>, sweep: bool) -> Checks {
    let bracket = match bracket {
        Some(s) => match parse_list(s, "--bracket")?.as_slice() {
            [lo, hi] => (*lo, *hi),
            _ => return Err(Failure::Usage("--bracket expects LO,HI".into())),
        },
        None => cfg.bracket(),
    };
    let c = cfg.constants()?;
    let field = cfg.laser(0.0)?;
    let d = hfuff::bragg::balanced_detuning_solve_in(&field, &c, bracket)?;
    let at = field.with_detuning(d);
    let o1 = two_photon_rabi(HyperfineState::F1, &at, &c)?;
    let o2 = two_photon_rabi(HyperfineState::F2, &at, &c)?;
    println!("balanced_detuning_hz = {d:.6e}");
    println!("balanced_detuning_ghz = {:.6}", d * 1e-9);
    println!("rabi_f1_rad_s = {o1:.6e}");
    println!("rabi_f2_rad_s = {o2:.6e}");

    if sweep {
        let rows: Vec<SweepRow> = rabi_sweep(&field, &c, bracket, cfg.sweep_points)?
            .into_iter()
            .map(|p| SweepRow {
                detuning_hz: p.detuning_hz,
                rabi_f1_rad_s: p.rabi_f1,
                rabi_f2_rad_s: p.rabi_f2,
                difference_rad_s: p.rabi_f1 - p.rabi_f2,
            })
            .collect();
        let crossings = rows.windows(2).filter(|w| w[0].difference_rad_s.signum() != w[1].difference_rad_s.signum()).count();
        let path = out_dir(cfg)?.join("detuning_sweep.csv");
        write_csv(&path, &rows)?;
        println!("sign_changes = {crossings}");
        println!("wrote {}", path.display());
    }
    Ok(vec![Check::new(
        "balanced detuning",
        (d - REFERENCE_DETUNING_HZ).abs() <= 5e6,
        format!("{:.4} GHz, reference {:.4} GHz ± 5 MHz", d * 1e-9, REFERENCE_DETUNING_HZ * 1e-9),
    )])
}

#[derive(Serialize)]
struct FringeRow {
    state_f: u8,
    alpha_rad_s2: f64,
    probability: f64,
    timestamp_s: f64,
    fit: f64,
    residual: f64,
}

#[derive(Serialize)]
struct FringeFitRow {
    state_f: u8,
    offset: f64,
    contrast: f64,
    phase_rad: f64,
    phase_sigma_rad: f64,
    alpha_ref_rad_s2: f64,
    gravity_m_s2: f64,
    residual_rms: f64,
}

#[derive(Serialize)]
struct FringeMeta {
    seed: u64,
    points_per_state: usize,
    duration_s: f64,
    noise: bool,
}

pub(crate) fn fringe(cfg: &RunConfig, states: &[HyperfineState]) -> Checks {
    let c = cfg.constants()?;
    let ic = cfg.interferometer()?;
    let model = ShotModel { config: ic, noise: cfg.noise()?, shape: cfg.shape()?, environment: ShotEnvironment::quiet(cfg.gravity) };
    let center = ic.k_eff * c.g_nominal;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &s in states {
        let pts = fringe_scan(s, center, cfg.points_per_period, cfg.periods, &model, cfg.seed)?;
        let fit = sine_fringe_fit(&pts, &ic)?;
        for p in &pts {
            let f = fit.predict(p.alpha, &ic);
            rows.push(FringeRow {
                state_f: s.f_number(),
                alpha_rad_s2: p.alpha,
                probability: p.probability,
                timestamp_s: p.timestamp,
                fit: f,
                residual: p.probability - f,
            });
        }
        fits.push(FringeFitRow {
            state_f: s.f_number(),
            offset: fit.offset,
            contrast: fit.contrast,
            phase_rad: fit.phase,
            phase_sigma_rad: fit.phase_sigma(),
            alpha_ref_rad_s2: fit.alpha_ref,
            gravity_m_s2: fit.gravity(&ic),
            residual_rms: fit.residual_rms,
        });
    }
    let n = cfg.points_per_period * cfg.periods;
    let meta = FringeMeta { seed: cfg.seed, points_per_state: n, duration_s: n as f64 * pair_period(&ic), noise: cfg.noise_enabled };
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("fringe_points.csv"), &rows)?;
    write_csv(&dir.join("fringe_fit.csv"), &fits)?;
    write_json(&dir.join("fringe.json"), &meta)?;
    for f in &fits {
        println!(
            "F={}: offset {:.4} contrast {:.4} phase {:+.4} ± {:.4} rad",
            f.state_f, f.offset, f.contrast, f.phase_rad, f.phase_sigma_rad
        );
    }
    println!("scan duration {} s", meta.duration_s);

    let mut checks = Vec::new();
    if let [a, b] = fits.as_slice() {
        let mean = 0.5 * (a.contrast + b.contrast);
        checks.push(Check::new(
            "similar contrast",
            (a.contrast - b.contrast).abs() < 0.1 * mean,
            format!("{:.4} vs {:.4}", a.contrast, b.contrast),
        ));
    }
    if !cfg.noise_enabled {
        let worst = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
        checks.push(Check::new("noiseless residuals", worst < 1e-12, format!("max |residual| {worst:.3e}")));
    }
    Ok(checks)
}

fn stability_checks(out: &CampaignOutput) -> Vec<Check> {
    let a = &out.allan;
    let mut checks = vec![Check::new(
        "sensitivity at 1 s",
        (a.slope_fit / TARGET_SENSITIVITY - 1.0).abs() <= 0.15,
        format!("{:.3e} g, target {TARGET_SENSITIVITY:.1e} ± 15%", a.slope_fit),
    )];
    if let Some(long) = a.at(LONG_TAU) {
        checks.push(Check::new("long-term stability", long < 1e-9, format!("σ({LONG_TAU} s) = {long:.3e} g")));
    }
    if let Some(e) = a.slope_exponent {
        checks.push(Check::new("white-noise slope", (e + 0.5).abs() < 0.1, format!("exponent {e:.3}")));
    }
    checks
}

pub(crate) fn allan(cfg: &RunConfig) -> Checks {
    let setup = cfg.campaign()?;
    let out = run_full_campaign(&setup, cfg.seed)?;
    let path = out_dir(cfg)?.join("allan.csv");
    write_csv(&path, &allan_rows(&out.allan))?;
    println!("sigma_1s_g = {:.4e}", out.allan.slope_fit);
    if let Some(v) = out.allan.at(LONG_TAU) {
        println!("sigma_{LONG_TAU}s_g = {v:.4e}");
    }
    if let Some(e) = out.allan.slope_exponent {
        println!("slope_exponent = {e:.4}");
    }
    println!("wrote {}", path.display());
    Ok(if cfg.noise_enabled { stability_checks(&out) } else { Vec::new() })
}

pub(crate) fn campaign(cfg: &RunConfig) -> Checks {
    let setup = cfg.campaign()?;
    let out = run_full_campaign(&setup, cfg.seed)?;
    let dir = out_dir(cfg)?;
    write_campaign(&dir, &out, setup.duration_s, LONG_TAU)?;
    let r = &out.result;
    print!("{}", r.budget.to_table());
    println!("pairs = {}, bins = {}", out.pairs.len(), r.binned_series.len());
    println!("eta = {:.3e} ± {:.3e}", r.eta.value, r.eta.uncertainty);
    println!("k_tilde = {:.3e} ± {:.3e}", r.k_tilde.value, r.k_tilde.uncertainty);
    println!("r1 - r2 = {:.3e} ± {:.3e}", r.r_diff.value, r.r_diff.uncertainty);
    for n in &r.notices {
        eprintln!("notice: {n}");
    }
    println!("wrote {}", dir.display());

    let mut checks = Vec::new();
    if cfg.noise_enabled {
        let u = r.delta_g_stat.uncertainty;
        checks.push(Check::new("statistical uncertainty", (2.0e-10..=3.2e-10).contains(&u), format!("{u:.3e} g")));
        checks.extend(stability_checks(&out));
        let expected = -4.0 * setup.k_tilde_injected;
        let pull = (r.eta.value - expected) / r.eta.uncertainty;
        checks.push(Check::new("eta consistent with injection", pull.abs() <= 3.0, format!("pull {pull:+.2}")));
    } else if !setup.systematics.enabled() {
        let worst = r.binned_series.iter().map(|b| b.delta_g.abs()).fold(0.0, f64::max);
        let expected = (4.0 * setup.k_tilde_injected).abs();
        checks.push(Check::new("quiet bins", worst <= expected * (1.0 + 1e-9), format!("max |Δg| {worst:.3e} g")));
    }
    Ok(checks)
}

#[derive(Serialize)]
struct ModulationRow {
    current_a: f64,
    bias_field_t: f64,
    bias_field_mg: f64,
    delta_g: f64,
    fit: f64,
}

#[derive(Serialize)]
struct ModulationMeta {
    c0: f64,
    c1: f64,
    c2: f64,
    r_squared: f64,
    bias_scale_mg_per_100ma: f64,
    delta_g_at_nominal: f64,
}

pub(crate) fn zeeman_modulation(cfg: &RunConfig, currents: Option<&str>) -> Checks {
    let currents = match currents {
        Some(s) => parse_list(s, "--currents")?,
        None => cfg.currents.clone(),
    };
    let c = cfg.constants()?;
    let ic = cfg.interferometer()?;
    let profile = cfg.magnetic_profile()?;
    let curve = zeeman_modulation_curve(&profile, &currents, &ic, &c)?;
    let rows: Vec<ModulationRow> = curve
        .points
        .iter()
        .map(|p| ModulationRow {
            current_a: p.current_a,
            bias_field_t: p.bias_field_t,
            bias_field_mg: p.bias_field_t * 1e7,
            delta_g: p.delta_g,
            fit: curve.fit.eval(p.current_a),
        })
        .collect();
    let nominal = profile.with_current(NOMINAL_CURRENT)?;
    let traj = Trajectory::symmetric_about_apex(&ic, &c);
    let at_nominal = hfuff::systematics::zeeman_differential(&nominal, &traj, &ic, &c)?;
    let meta = ModulationMeta {
        c0: curve.fit.c0,
        c1: curve.fit.c1,
        c2: curve.fit.c2,
        r_squared: curve.fit.r_squared,
        bias_scale_mg_per_100ma: nominal.bias_field() * 1e7,
        delta_g_at_nominal: at_nominal,
    };
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("zeeman_modulation.csv"), &rows)?;
    write_json(&dir.join("zeeman_fit.json"), &meta)?;
    for r in &rows {
        println!("{:>7.3} A  {:>7.2} mG  Δg = {:+.4e} g", r.current_a, r.bias_field_mg, r.delta_g);
    }
    println!("fit: {:.4e} + {:.4e}·I + {:.4e}·I²  (R² = {:.6})", meta.c0, meta.c1, meta.c2, meta.r_squared);

    let imax = currents.iter().cloned().fold(0.0, f64::max);
    Ok(vec![
        Check::new(
            "quadratic dominated",
            (curve.fit.c2 * imax * imax).abs() > 10.0 * (curve.fit.c1 * imax).abs(),
            format!("|c2·I²| = {:.3e}, |c1·I| = {:.3e}", (curve.fit.c2 * imax * imax).abs(), (curve.fit.c1 * imax).abs()),
        ),
        Check::new(
            "bias field at 100 mA",
            (meta.bias_scale_mg_per_100ma - 90.0).abs() < 1e-6,
            format!("{:.3} mG", meta.bias_scale_mg_per_100ma),
        ),
        Check::new(
            "nominal Zeeman bias",
            (at_nominal / DEFAULT_TARGET_BIAS - 1.0).abs() <= 0.1,
            format!("{at_nominal:.4e} g"),
        ),
    ])
}

pub(crate) fn budget(cfg: &RunConfig, stat: Option<&str>) -> Checks {
    let (v, u) = match stat {
        Some(s) => match parse_list(s, "--stat")?.as_slice() {
            [v, u] => (*v, *u),
            _ => return Err(Failure::Usage("--stat expects VALUE,SIGMA".into())),
        },
        None => (0.0, 0.0),
    };
    let setup = cfg.campaign()?;
    let b = systematic_rows(&setup, SystematicShift::new(Channel::Statistical, v, u)?)?;
    print!("{}", b.to_table());
    let path = out_dir(cfg)?.join("budget.json");
    write_json(&path, &b)?;
    println!("wrote {}", path.display());
    let rss = b.rows.iter().map(|r| r.uncertainty.powi(2)).sum::<f64>().sqrt();
    Ok(vec![Check::new(
        "root-sum-square total",
        (rss - b.corrected_uncertainty).abs() <= 1e-12 * rss.max(1e-30),
        format!("{:.4e} g", b.corrected_uncertainty),
    )])
}

pub(crate) fn constants(cfg: &RunConfig) -> Checks {
    let c = cfg.constants()?;
    let ic = cfg.interferometer()?;
    print!("{}", c.dump());
    let pulses = CalibratedPulses::for_config(&ic, &c)?;
    let derived = [
        ("k_eff", ic.k_eff, "1/m"),
        ("scale_factor", ic.scale_factor(), "rad/(m/s^2)"),
        ("chirp_period", ic.chirp_period(), "rad/s^2"),
        ("pair_period", pair_period(&ic), "s"),
        ("pi_pulse_sigma", ic.pi_pulse_sigma(), "s"),
        ("pi_peak_rabi", pulses.pi.peak_rabi, "rad/s"),
        ("half_pi_peak_rabi", pulses.half_pi.peak_rabi, "rad/s"),
        ("launch_velocity", ic.launch_velocity, "m/s"),
    ];
    for (k, v, unit) in derived {
        println!("{k} = {v:.12e}  # {unit}");
    }
    println!("# resolved configuration");
    print!("{}", cfg.dump());
    Ok(Vec::new())
}
