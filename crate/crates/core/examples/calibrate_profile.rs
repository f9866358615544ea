//! Re-solves the step depth of the shipped bias profile and rewrites
//! `data/bias_profile.txt`. Run with `cargo run --release -p hfuff --example calibrate_profile`.

use std::path::Path;

use hfuff::model::rb87_constants;
use hfuff::systematics::{
    calibrate_gradient_fraction, MagneticProfile, DEFAULT_GRADIENT_FRACTION, DEFAULT_TARGET_BIAS,
    NOMINAL_CURRENT,
};
use hfuff::InterferometerConfig;

fn main() -> hfuff::Result<()> {
    let c = rb87_constants();
    let cfg = InterferometerConfig::nominal(&c);
    let eps = calibrate_gradient_fraction(DEFAULT_TARGET_BIAS, NOMINAL_CURRENT, &cfg, &c)?;
    println!("step depth {eps:.15e} (frozen {DEFAULT_GRADIENT_FRACTION:.15e})");

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let profile = MagneticProfile::solenoid(eps, NOMINAL_CURRENT)?;
    std::fs::write(data.join("bias_profile.txt"), profile.to_table())?;
    println!("wrote {}", data.join("bias_profile.txt").display());
    Ok(())
}
