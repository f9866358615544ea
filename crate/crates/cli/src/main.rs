//! `uffsim`: command-line front end of the dual-state free-fall simulator.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hfuff::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "uffsim", version, about = "Dual-hyperfine-state Bragg interferometer free-fall test simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Campaign length in hours
    #[arg(long, global = true)]
    hours: Option<f64>,
    /// Override any configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Exit with status 3 if the command's self-checks fail
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateArg {
    #[value(name = "1")]
    F1,
    #[value(name = "2")]
    F2,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the detuning that equalises the two Bragg Rabi frequencies
    Detuning {
        /// Search bracket in Hz, "LO,HI"
        #[arg(long, value_name = "LO,HI")]
        bracket: Option<String>,
        /// Also write the Rabi-frequency sweep as CSV
        #[arg(long)]
        sweep: bool,
    },
    /// Simulate and fit a chirp-scanned fringe per state
    Fringe {
        #[arg(long, value_enum, default_value = "both")]
        state: StateArg,
        #[arg(long, value_enum)]
        noise: Option<Switch>,
    },
    /// Allan deviation of the simulated differential series
    Allan {
        #[arg(long, value_enum)]
        noise: Option<Switch>,
    },
    /// Full differential campaign: records, bins, Allan deviation, budget
    Campaign {
        #[arg(long, value_enum)]
        noise: Option<Switch>,
        #[arg(long, value_enum)]
        systematics: Option<Switch>,
    },
    /// Differential Zeeman bias versus bias-solenoid current
    ZeemanModulation {
        /// Currents in A, comma separated
        #[arg(long, value_name = "I1,I2,...")]
        currents: Option<String>,
    },
    /// Systematic error budget from the modelled channels
    Budget {
        /// Statistical row "VALUE,SIGMA" in units of g
        #[arg(long, value_name = "VALUE,SIGMA", allow_hyphen_values = true)]
        stat: Option<String>,
    },
    /// Print constants, derived quantities and the resolved configuration
    Constants,
}

pub(crate) enum Failure {
    Usage(String),
    Numerical(String),
    Check(Vec<String>),
}

impl From<hfuff::Error> for Failure {
    fn from(e: hfuff::Error) -> Self {
        use hfuff::Error as E;
        match e {
            E::InvalidInput(_) | E::Parse(_) | E::WindowTooShort { .. } | E::InsufficientData(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn resolve_config(common: &Common, command: &Command) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.display().to_string();
    }
    if let Some(h) = common.hours {
        cfg.hours = h;
    }
    let (noise, systematics) = match command {
        Command::Fringe { noise, .. } | Command::Allan { noise } => (*noise, None),
        Command::Campaign { noise, systematics } => (*noise, *systematics),
        _ => (None, None),
    };
    if let Some(n) = noise {
        cfg.noise_enabled = n == Switch::On;
    }
    if let Some(s) = systematics {
        cfg.systematics_enabled = s == Switch::On;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve_config(&cli.common, &cli.command)?;
    let checks = match cli.command {
        Command::Detuning { bracket, sweep } => commands::detuning(&cfg, bracket.as_deref(), sweep)?,
        Command::Fringe { state, .. } => {
            let states: &[hfuff::HyperfineState] = match state {
                StateArg::F1 => &[hfuff::HyperfineState::F1],
                StateArg::F2 => &[hfuff::HyperfineState::F2],
                StateArg::Both => &hfuff::HyperfineState::BOTH,
            };
            commands::fringe(&cfg, states)?
        }
        Command::Allan { .. } => commands::allan(&cfg)?,
        Command::Campaign { .. } => commands::campaign(&cfg)?,
        Command::ZeemanModulation { currents } => commands::zeeman_modulation(&cfg, currents.as_deref())?,
        Command::Budget { stat } => commands::budget(&cfg, stat.as_deref())?,
        Command::Constants => commands::constants(&cfg)?,
    };
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.to_string()).collect();
    if cli.common.check {
        for c in &checks {
            println!("{c}");
        }
        if !failed.is_empty() {
            return Err(Failure::Check(failed));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(failed)) => {
            eprintln!("{} self-check(s) failed", failed.len());
            ExitCode::from(3)
        }
    }
}
