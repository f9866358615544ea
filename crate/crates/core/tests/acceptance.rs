//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL criterion N` line before asserting.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use hfuff::bragg::{diffraction_efficiency, CalibratedPulses};
use hfuff::campaign::{assemble_budget, run_full_campaign, CampaignSetup, LONG_TAU};
use hfuff::config::RunConfig;
use hfuff::interferometer::{
    fringe_scan, mz_phase, FringeShape, NoiseModel, ShotEnvironment, ShotModel, TARGET_SENSITIVITY,
};
use hfuff::model::rb87_constants;
use hfuff::output::write_campaign;
use hfuff::stats::sine_fringe_fit;
use hfuff::systematics::{
    tide_alternation_bias, zeeman_differential, zeeman_modulation_curve, Channel, MagneticProfile, SystematicShift,
    TideModel, DEFAULT_TARGET_BIAS,
};
use hfuff::{HyperfineState, InterferometerConfig, Trajectory};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const REFERENCE_DETUNING_HZ: f64 = 3.1817e9;
const DETUNING_TOLERANCE_HZ: f64 = 5e6;
const DETUNING_MAX_SECONDS: f64 = 1.0;
const EFFICIENCY_TARGET: f64 = 0.88;
const EFFICIENCY_TOLERANCE: f64 = 0.03;
const EFFICIENCY_SAMPLES: usize = 500;
const EFFICIENCY_MAX_SECONDS: f64 = 10.0;
const FIT_RELATIVE_TOLERANCE: f64 = 1e-10;
const PERIOD_TOLERANCE: f64 = 1e-12;
const SENSITIVITY_TOLERANCE: f64 = 0.15;
const LONG_TERM_LIMIT: f64 = 1e-9;
const SLOPE_TOLERANCE: f64 = 0.1;
const STABILITY_MAX_SECONDS: f64 = 60.0;
const STAT_RANGE: (f64, f64) = (2.0e-10, 3.2e-10);
const NULL_SEEDS: u64 = 10;
const NULL_SIGMAS: f64 = 2.0;
const CAMPAIGN_MAX_SECONDS: f64 = 300.0;
const ZEEMAN_TOLERANCE: f64 = 0.10;
const FIELD_AT_100MA_T: f64 = 9e-6;
const BUDGET_VALUE: f64 = 0.9e-10;
const BUDGET_UNCERTAINTY: f64 = 2.7e-10;
const BUDGET_ROUNDING: f64 = 0.05e-10;
const INJECTED_K_TILDE: f64 = 1e-8;
const RECOVERY_SIGMAS: f64 = 3.0;
const TIDE_LIMIT: f64 = 1e-11;
const TIDE_LEVEL: f64 = 3e-12;
/// "Near the level": within a factor of two either way.
const TIDE_LEVEL_FACTOR: f64 = 2.0;

// Written past the test harness capture so the lines show up in a plain
// `cargo test` log.
fn report(n: u32, passed: bool, detail: String) -> bool {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} criterion {n}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn default_setup() -> CampaignSetup {
    RunConfig::default().campaign().expect("default configuration is valid")
}

#[test]
fn criterion_01_balanced_detuning() {
    let start = Instant::now();
    let d = RunConfig::default().balanced_detuning().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (d - REFERENCE_DETUNING_HZ).abs() <= DETUNING_TOLERANCE_HZ && secs < DETUNING_MAX_SECONDS;
    assert!(report(
        1,
        ok,
        format!(
            "Δ* = {:.4} GHz (want {:.4} ± {:.3} GHz), {secs:.3} s",
            d * 1e-9,
            REFERENCE_DETUNING_HZ * 1e-9,
            DETUNING_TOLERANCE_HZ * 1e-9
        ),
    ));
}

#[test]
fn criterion_02_diffraction_efficiency() {
    let c = rb87_constants();
    let cfg = InterferometerConfig::nominal(&c);
    let start = Instant::now();
    let pulses = CalibratedPulses::for_config(&cfg, &c).unwrap();
    let e = diffraction_efficiency(&pulses.pi, cfg.momentum_width, EFFICIENCY_SAMPLES, &cfg, &c).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (e - EFFICIENCY_TARGET).abs() <= EFFICIENCY_TOLERANCE && secs < EFFICIENCY_MAX_SECONDS;
    assert!(report(
        2,
        ok,
        format!("transfer {e:.4} (want {EFFICIENCY_TARGET} ± {EFFICIENCY_TOLERANCE}), {secs:.2} s for {EFFICIENCY_SAMPLES} samples"),
    ));
}

#[test]
fn criterion_03_fringe_identity() {
    let c = rb87_constants();
    let strategy = (0.05f64..0.9, 0.2f64..0.8, 0.2f64..3.0, any::<bool>(), 1u32..4, 0.05f64..0.3);
    let mut runner = TestRunner::new(Config { cases: 64, failure_persistence: None, ..Config::default() });
    let worst = RefCell::new([0.0f64; 4]);
    let result = runner.run(&strategy, |(contrast, offset, phase_mag, negative, order, t)| {
        let contrast = contrast.min(2.0 * offset.min(1.0 - offset));
        prop_assume!(contrast > 0.05);
        let mut cfg = InterferometerConfig::nominal(&c);
        cfg.bragg_order = order;
        cfg.pulse_separation = t;
        cfg.ladder_half_size = order as usize + 3;
        let shape = FringeShape::new(contrast, offset).unwrap();
        let model = ShotModel { config: cfg, noise: NoiseModel::none(), shape, environment: ShotEnvironment::quiet(c.g_nominal) };
        let points_per_period = 20;
        let nt2 = order as f64 * t * t;
        let target = if negative { -phase_mag } else { phase_mag };
        // choose the scan so that the first point sits at the target phase
        let first = c.g_nominal * cfg.k_eff - target / nt2;
        let center = first + cfg.chirp_period();
        let pts = fringe_scan(HyperfineState::F1, center, points_per_period, 2, &model, 5).unwrap();
        let fit = sine_fringe_fit(&pts, &cfg).unwrap();
        let phase = mz_phase(c.g_nominal, pts[0].alpha, &cfg);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let errs = [rel(fit.offset, offset), rel(fit.contrast, contrast), rel(fit.phase, phase)];
        let period = cfg.chirp_period();
        let period_err = rel(period, 2.0 * PI / nt2);
        for (w, e) in worst.borrow_mut().iter_mut().zip(errs.iter().chain([period_err].iter())) {
            *w = w.max(*e);
        }
        prop_assert!(errs.iter().all(|&e| e <= FIT_RELATIVE_TOLERANCE), "{errs:?}");
        prop_assert!(period_err <= PERIOD_TOLERANCE, "period {period_err:e}");
        Ok(())
    });
    let worst = worst.into_inner();
    let detail = match &result {
        Ok(()) => format!(
            "64 cases; worst relative error offset {:.1e}, contrast {:.1e}, phase {:.1e}; period {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
        Err(e) => format!("{e}"),
    };
    assert!(report(3, result.is_ok(), detail));
}

#[test]
fn criterion_04_stability() {
    let setup = default_setup();
    let start = Instant::now();
    let out = run_full_campaign(&setup, RunConfig::default().seed).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let a = &out.allan;
    let one = a.slope_fit;
    let long = a.at(LONG_TAU).unwrap();
    let slope = a.slope_exponent.unwrap();
    let ok = (one / TARGET_SENSITIVITY - 1.0).abs() <= SENSITIVITY_TOLERANCE
        && long < LONG_TERM_LIMIT
        && (slope + 0.5).abs() <= SLOPE_TOLERANCE
        && secs < STABILITY_MAX_SECONDS;
    assert!(report(
        4,
        ok,
        format!("σ(1 s) = {one:.3e} g, σ({LONG_TAU} s) = {long:.3e} g, slope {slope:.3}, {secs:.1} s"),
    ));
}

#[test]
fn criterion_05_campaign_statistics() {
    let setup = default_setup();
    let start = Instant::now();
    let runs: Vec<_> = (1..=NULL_SEEDS).map(|s| run_full_campaign(&setup, s).unwrap().result).collect();
    let secs = start.elapsed().as_secs_f64();
    let stat = runs[0].delta_g_stat.uncertainty;
    let n = runs.len() as f64;
    let mean_eta = runs.iter().map(|r| r.eta.value).sum::<f64>() / n;
    let sigma = runs.iter().map(|r| r.eta.uncertainty).sum::<f64>() / n;
    let bound = NULL_SIGMAS * sigma / n.sqrt();
    let ok = (STAT_RANGE.0..=STAT_RANGE.1).contains(&stat) && mean_eta.abs() <= bound && secs < CAMPAIGN_MAX_SECONDS;
    assert!(report(
        5,
        ok,
        format!(
            "stat σ = {stat:.3e} g; mean corrected η over {NULL_SEEDS} seeds {mean_eta:+.3e} (limit ±{bound:.3e}); {secs:.1} s"
        ),
    ));
}

#[test]
fn criterion_06_zeeman_channel() {
    let c = rb87_constants();
    let cfg = InterferometerConfig::nominal(&c);
    let t = Trajectory::symmetric_about_apex(&cfg, &c);
    let shipped = MagneticProfile::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/bias_profile.txt")).unwrap();
    let bias = zeeman_differential(&shipped, &t, &cfg, &c).unwrap();
    let currents: Vec<f64> = (0..=6).map(|i| 0.05 * i as f64).collect();
    let curve = zeeman_modulation_curve(&shipped, &currents, &cfg, &c).unwrap();
    let imax = 0.3;
    let quad = (curve.fit.c2 * imax * imax).abs();
    let lin = (curve.fit.c1 * imax).abs();
    let field = shipped.with_current(0.1).unwrap().bias_field();
    let uniform = MagneticProfile::uniform(0.3, 0.9, 9e-6).unwrap();
    let zero = zeeman_differential(&uniform, &t, &cfg, &c).unwrap();
    let ok = (bias / DEFAULT_TARGET_BIAS - 1.0).abs() <= ZEEMAN_TOLERANCE
        && quad > 10.0 * lin
        && (field - FIELD_AT_100MA_T).abs() < 1e-15
        && zero == 0.0;
    assert!(report(
        6,
        ok,
        format!(
            "bias {bias:.4e} g; |c2·I²| {quad:.2e} vs |c1·I| {lin:.2e}; {:.2} mG at 100 mA; uniform field {zero:e}",
            field * 1e7
        ),
    ));
}

#[test]
fn criterion_07_budget_arithmetic() {
    let row = |ch, v: f64, u: f64| SystematicShift::new(ch, v * 1e-10, u * 1e-10).unwrap();
    let b = assemble_budget(
        row(Channel::Statistical, -1.2, 2.6),
        row(Channel::QuadraticZeeman, -2.1, 0.5),
        row(Channel::AcStark, 0.0, 0.2),
        row(Channel::Tide, 0.0, 0.03),
    )
    .unwrap();
    let ok = (b.corrected_value - BUDGET_VALUE).abs() <= 1e-12 * BUDGET_VALUE
        && (b.corrected_uncertainty - BUDGET_UNCERTAINTY).abs() <= BUDGET_ROUNDING;
    assert!(report(
        7,
        ok,
        format!("corrected ({:.4} ± {:.4})e-10 g", b.corrected_value * 1e10, b.corrected_uncertainty * 1e10),
    ));
}

#[test]
fn criterion_08_violation_recovery() {
    let mut setup = default_setup();
    setup.k_tilde_injected = INJECTED_K_TILDE;
    let r = run_full_campaign(&setup, RunConfig::default().seed).unwrap().result;
    let pull = (r.k_tilde.value - INJECTED_K_TILDE) / r.k_tilde.uncertainty;
    let identity = r.k_tilde.value == -r.eta.value / 4.0 && r.k_tilde.uncertainty == r.eta.uncertainty / 4.0;
    let ok = pull.abs() <= RECOVERY_SIGMAS && identity;
    assert!(report(
        8,
        ok,
        format!(
            "k̃ = {:.4e} ± {:.2e} for k̃₀ = {INJECTED_K_TILDE:e} (pull {pull:+.2}); k̃ = −η/4 exact: {identity}",
            r.k_tilde.value, r.k_tilde.uncertainty
        ),
    ));
}

#[test]
fn criterion_09_tide_lag_bias() {
    let c = rb87_constants();
    let model = TideModel::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tides_mid_latitude.txt")).unwrap();
    let s = tide_alternation_bias(&model, 2.0, 63.0 * 3600.0, c.g_nominal).unwrap();
    let v = s.value.abs();
    let ok = (TIDE_LEVEL / TIDE_LEVEL_FACTOR..=TIDE_LIMIT).contains(&v) && v <= TIDE_LEVEL * TIDE_LEVEL_FACTOR;
    assert!(report(
        9,
        ok,
        format!("lag bias {:.3e} g (limit {TIDE_LIMIT:e}, level {TIDE_LEVEL:e} within ×{TIDE_LEVEL_FACTOR})", s.value),
    ));
}

#[test]
fn criterion_10_determinism() {
    let setup = default_setup();
    let seed = RunConfig::default().seed;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let out = run_full_campaign(&setup, seed).unwrap();
        files.push(write_campaign(d.path(), &out, setup.duration_s, LONG_TAU).unwrap());
    }
    let mut bytes = 0;
    let mut same = true;
    for (a, b) in files[0].iter().zip(&files[1]) {
        let (x, y) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        bytes += x.len();
        same &= x == y;
    }
    assert!(report(10, same, format!("{} files, {bytes} bytes compared", files[0].len())));
}
