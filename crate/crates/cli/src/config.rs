//! Command-line flags and how they combine with the optional JSON config file.
//!
//! The config file is a JSON object keyed by subcommand name, each entry
//! holding settings named like the long flags:
//!
//! ```json
//! { "simulate": { "n": 100, "seed": 7, "init": "uniform_disk" } }
//! ```
//!
//! A flag given on the command line wins over the file.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or configuration; exit code 2.
    Usage(String),
    /// A computation or output step failed; exit code 1.
    Failed(String),
}

impl From<dislo_core::Error> for CliError {
    fn from(e: dislo_core::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dislo", version, about = "Numerical laboratory for anisotropic dislocation walls")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with per-subcommand settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact constants of the equilibrium problem as JSON.
    Constants(ConstantsArgs),
    /// Minimise the discrete energy and report wall diagnostics.
    Simulate(SimulateArgs),
    /// Check the Euler–Lagrange conditions of the semicircle wall.
    VerifyEl(VerifyElArgs),
    /// Compare direct and spectral interaction energies and check the sign
    /// structure of the transformed kernel.
    VerifyFourier(VerifyFourierArgs),
    /// Evaluate F = V*m1 + |x|^2/2 at points read from CSV.
    Field(FieldArgs),
    /// Probe convexity of the grid energy along a segment of densities.
    Convexity(ConvexityArgs),
}

impl Command {
    pub fn config_key(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Simulate(_) => "simulate",
            Command::VerifyEl(_) => "verify-el",
            Command::VerifyFourier(_) => "verify-fourier",
            Command::Field(_) => "field",
            Command::Convexity(_) => "convexity",
        }
    }
}

macro_rules! settings {
    ($(#[$m:meta])* pub struct $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, Args, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $($(#[$fm])* #[arg(long)] pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Fill every setting not given as a flag from `file`.
            pub fn merge(&mut self, file: $name) {
                $(if self.$field.is_none() { self.$field = file.$field; })*
            }
        }
    };
}

settings! {
    pub struct ConstantsArgs {
        /// Also write the JSON to this file.
        report: PathBuf,
    }
}

settings! {
    pub struct SimulateArgs {
        /// Number of particles.
        n: usize,
        /// PRNG seed (default 0).
        seed: u64,
        /// uniform_disk, circle_law or perturbed_wall.
        init: String,
        max_iters: usize,
        grad_tol: f64,
        initial_step: f64,
        backtrack_factor: f64,
        armijo_c: f64,
        /// Final configuration CSV.
        out: PathBuf,
        /// Per-iteration CSV.
        trajectory: PathBuf,
        /// Static SVG scatter of the final configuration.
        svg: PathBuf,
        report: PathBuf,
    }
}

settings! {
    pub struct VerifyElArgs {
        xmax: f64,
        step: f64,
        tol: f64,
        /// Points on the support for the equality check.
        support_points: usize,
        /// Random points for the symmetry check.
        symmetry_samples: usize,
        /// Closed form vs quadrature along the x2-axis, as CSV.
        axis_csv: PathBuf,
        report: PathBuf,
    }
}

settings! {
    pub struct VerifyFourierArgs {
        /// Grid resolution N; the refinement check also runs 2N.
        grid: usize,
        /// Half-width L of the box [-L, L]^2.
        #[serde(rename = "box")]
        r#box: f64,
        cases: usize,
        /// Relative tolerance of the direct/spectral agreement.
        tol: f64,
        /// Resolution used for the pairing sign checks.
        pairing_grid: usize,
        report: PathBuf,
    }
}

settings! {
    pub struct FieldArgs {
        /// CSV with columns x1,x2.
        points: PathBuf,
        out: PathBuf,
        tol: f64,
    }
}

settings! {
    pub struct ConvexityArgs {
        k: usize,
        grid: usize,
        #[serde(rename = "box")]
        r#box: f64,
        /// Half-width of the smoothed semicircle column.
        column_width: f64,
        report: PathBuf,
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    constants: Option<serde_json::Value>,
    #[serde(default)]
    simulate: Option<serde_json::Value>,
    #[serde(default, rename = "verify-el")]
    verify_el: Option<serde_json::Value>,
    #[serde(default, rename = "verify-fourier")]
    verify_fourier: Option<serde_json::Value>,
    #[serde(default)]
    field: Option<serde_json::Value>,
    #[serde(default)]
    convexity: Option<serde_json::Value>,
}

fn section<T: for<'de> Deserialize<'de> + Default>(
    key: &str,
    v: Option<serde_json::Value>,
) -> Result<T, CliError> {
    match v {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v)
            .map_err(|e| CliError::Usage(format!("config section {key:?}: {e}"))),
    }
}

/// Apply the config file (if any) beneath the flags of `command`.
pub fn apply_config(command: &mut Command, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let key = command.config_key();
    match command {
        Command::Constants(a) => a.merge(section(key, file.constants)?),
        Command::Simulate(a) => a.merge(section(key, file.simulate)?),
        Command::VerifyEl(a) => a.merge(section(key, file.verify_el)?),
        Command::VerifyFourier(a) => a.merge(section(key, file.verify_fourier)?),
        Command::Field(a) => a.merge(section(key, file.field)?),
        Command::Convexity(a) => a.merge(section(key, file.convexity)?),
    }
    Ok(())
}
