//! Command-line surface and config-file handling. Flags override file
//! values; unknown file keys are rejected.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qbanyan",
    version,
    about = "Heralded optical switching primitives and self-routing Banyan fabrics",
    propagate_version = true
)]
pub struct Cli {
    /// TOML config file providing defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Write the report here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Detector quantum efficiency in [0, 1]
    #[arg(long, global = true)]
    pub eta: Option<f64>,

    /// Detector dark count probability per window in [0, 1)
    #[arg(long, global = true)]
    pub dark: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WiringArg {
    Omega,
    Butterfly,
}

impl WiringArg {
    pub fn to_core(self) -> qbanyan_core::Wiring {
        match self {
            WiringArg::Omega => qbanyan_core::Wiring::OmegaShuffle,
            WiringArg::Butterfly => qbanyan_core::Wiring::Butterfly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Classical,
    Quantum,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one heralded channel analytically: Fredkin, fusion or fission
    Gate(GateArgs),
    /// Run the 2x2 switch unit, one control row or the whole truth table
    Unit(UnitArgs),
    /// Route a permutation through an NxN fabric
    Route(RouteArgs),
    /// Seeded Monte Carlo over unit or network heralding
    Stats(StatsArgs),
    /// Census of blocked/unsupported permutations
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
pub struct GateArgs {
    /// Heralded controlled-swap of two qubits
    #[arg(long)]
    pub fredkin: bool,
    /// Fuse two qubits into one time-bin carrier photon
    #[arg(long)]
    pub fuse: bool,
    /// Split a fused payload back into two qubits
    #[arg(long)]
    pub fission: bool,
    /// Fredkin control bit
    #[arg(long)]
    pub control: Option<u8>,
    /// First input qubit as re,im,re,im (beta_h then beta_v)
    #[arg(long, value_name = "AMPS")]
    pub q1: Option<String>,
    /// Second input qubit as re,im,re,im
    #[arg(long, value_name = "AMPS")]
    pub q2: Option<String>,
    /// Fused input coefficients as eight comma-separated reals
    /// (bin0 H, bin0 V, bin1 H, bin1 V, each re,im)
    #[arg(long, value_name = "AMPS")]
    pub coeffs: Option<String>,
    /// Enable feed-forward (fusion/fission at 1/8 instead of 1/32)
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    /// Disable feed-forward
    #[arg(long = "no-ff", overrides_with = "ff")]
    pub no_ff: bool,
}

#[derive(Debug, Args)]
pub struct UnitArgs {
    /// Verify all eight truth-table rows and report pass/fail per row
    #[arg(long)]
    pub table1: bool,
    /// Fusion-engage control bit f
    #[arg(long)]
    pub f: Option<u8>,
    /// Fredkin cross control bit F
    #[arg(long)]
    pub cross: Option<u8>,
    /// Fused-output port select bit s (1 routes to b7)
    #[arg(long)]
    pub select: Option<u8>,
    /// Input qubit on a7 as re,im,re,im
    #[arg(long, value_name = "AMPS")]
    pub q7: Option<String>,
    /// Input qubit on a8 as re,im,re,im
    #[arg(long, value_name = "AMPS")]
    pub q8: Option<String>,
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    #[arg(long = "no-ff", overrides_with = "ff")]
    pub no_ff: bool,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    /// Number of ports (power of two, at least 4)
    #[arg(long)]
    pub n: Option<usize>,
    /// Destination permutation: packet i enters port i, exits perm[i]
    #[arg(long, value_name = "P0,P1,...")]
    pub perm: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub wiring: Option<WiringArg>,
    /// Echoed into the report for reproducibility bookkeeping
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    #[arg(long = "no-ff", overrides_with = "ff")]
    pub no_ff: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Sample a single switch unit
    #[arg(long, conflicts_with = "network")]
    pub unit: bool,
    /// Sample whole-network routing instances
    #[arg(long)]
    pub network: bool,
    /// Draw the fusion control uniformly each trial (unit mode)
    #[arg(long, conflicts_with = "f")]
    pub f_uniform: bool,
    /// Fix the fusion control (unit mode)
    #[arg(long)]
    pub f: Option<u8>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub wiring: Option<WiringArg>,
    /// Fixed traffic permutation (network mode); default is uniform random
    #[arg(long, value_name = "P0,P1,...")]
    pub perm: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Mandatory for stochastic runs
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run trials on one thread (results are identical either way)
    #[arg(long)]
    pub serial: bool,
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    #[arg(long = "no-ff", overrides_with = "ff")]
    pub no_ff: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub wiring: Option<WiringArg>,
    /// Sample this many permutations instead of exhausting N!
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Config-file keys, identical to the flag names. Unknown keys are
/// rejected with the offending name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub eta: Option<f64>,
    pub dark: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub n: Option<usize>,
    pub wiring: Option<String>,
    pub mode: Option<String>,
    pub perm: Option<Vec<usize>>,
    pub ff: Option<bool>,
    pub serial: Option<bool>,
    pub control: Option<u8>,
    pub q1: Option<String>,
    pub q2: Option<String>,
    pub q7: Option<String>,
    pub q8: Option<String>,
    pub coeffs: Option<String>,
    pub samples: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {path:?}: {e}")))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config file {path:?}: {e}")))
    }

    pub fn format_arg(&self) -> Result<Option<FormatArg>, CliError> {
        match self.format.as_deref() {
            None => Ok(None),
            Some("json") => Ok(Some(FormatArg::Json)),
            Some("csv") => Ok(Some(FormatArg::Csv)),
            Some(other) => Err(CliError::Usage(format!(
                "config key `format` has unknown value `{other}` (expected json or csv)"
            ))),
        }
    }

    pub fn wiring_arg(&self) -> Result<Option<WiringArg>, CliError> {
        match self.wiring.as_deref() {
            None => Ok(None),
            Some("omega") => Ok(Some(WiringArg::Omega)),
            Some("butterfly") => Ok(Some(WiringArg::Butterfly)),
            Some(other) => Err(CliError::Usage(format!(
                "config key `wiring` has unknown value `{other}` (expected omega or butterfly)"
            ))),
        }
    }

    pub fn mode_arg(&self) -> Result<Option<ModeArg>, CliError> {
        match self.mode.as_deref() {
            None => Ok(None),
            Some("classical") => Ok(Some(ModeArg::Classical)),
            Some("quantum") => Ok(Some(ModeArg::Quantum)),
            Some(other) => Err(CliError::Usage(format!(
                "config key `mode` has unknown value `{other}` (expected classical or quantum)"
            ))),
        }
    }
}

/// Feed-forward resolution: explicit flag beats file value beats default on.
pub fn resolve_ff(flag_on: bool, flag_off: bool, file: Option<bool>) -> bool {
    if flag_on {
        true
    } else if flag_off {
        false
    } else {
        file.unwrap_or(true)
    }
}

/// Parses "re,im,re,im" into a qubit.
pub fn parse_qubit(text: &str, flag: &str) -> Result<qbanyan_core::QubitSpec, CliError> {
    let parts = parse_reals(text, flag, 4)?;
    qbanyan_core::QubitSpec::new(
        num_complex::Complex64::new(parts[0], parts[1]),
        num_complex::Complex64::new(parts[2], parts[3]),
    )
    .map_err(|e| CliError::Domain(format!("--{flag}: {e}")))
}

/// Parses eight reals into fused-state coefficients on the given carrier.
pub fn parse_fused(
    text: &str,
    flag: &str,
    carrier: &str,
) -> Result<qbanyan_core::FusedState, CliError> {
    let parts = parse_reals(text, flag, 8)?;
    let c = |i: usize| num_complex::Complex64::new(parts[2 * i], parts[2 * i + 1]);
    qbanyan_core::FusedState::new(carrier, [c(0), c(1), c(2), c(3)])
        .map_err(|e| CliError::Domain(format!("--{flag}: {e}")))
}

fn parse_reals(text: &str, flag: &str, expect: usize) -> Result<Vec<f64>, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let parts = parts
        .map_err(|e| CliError::Usage(format!("--{flag} expects comma-separated reals: {e}")))?;
    if parts.len() != expect {
        return Err(CliError::Usage(format!(
            "--{flag} expects {expect} comma-separated reals, got {}",
            parts.len()
        )));
    }
    Ok(parts)
}

/// Parses "0,1,2,..." into a permutation vector.
pub fn parse_perm(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("--perm expects comma-separated ports: {e}")))
        })
        .collect()
}

pub fn parse_bit(value: u8, flag: &str) -> Result<bool, CliError> {
    match value {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(CliError::Usage(format!(
            "--{flag} expects 0 or 1, got {other}"
        ))),
    }
}
