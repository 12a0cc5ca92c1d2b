use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modespec::{Engine, ErrorKind, GridSpec, PhysicalFrame, ScanConfig};

mod commands;
mod tables;

/// Mode-spectrum analysis with passive first-order optics.
#[derive(Debug, Parser)]
#[command(name = "modespec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Mode waist w0 in metres.
    #[arg(long, global = true, default_value_t = 1.0e-4)]
    pub w0: f64,

    /// Reduced wavelength λ/2π in metres.
    #[arg(long, global = true, default_value_t = 1.0e-7)]
    pub lambdabar: f64,

    /// Samples per axis of the square grid.
    #[arg(long = "grid", global = true, default_value_t = 512)]
    pub grid: usize,

    /// Half-width of the grid window in units of w0.
    #[arg(long = "window", global = true, default_value_t = 8.0)]
    pub window: f64,

    /// Scan samples along φ₊.
    #[arg(long, global = true, default_value_t = 10)]
    pub k_plus: usize,

    /// Scan samples along φ₋.
    #[arg(long, global = true, default_value_t = 10)]
    pub k_minus: usize,

    /// Scan engine: analytic, kernel or train.
    #[arg(long, global = true, default_value = "kernel")]
    pub engine: Engine,

    /// Highest total mode order kept in decompositions and reconstructions.
    #[arg(long, global = true)]
    pub max_order: Option<u32>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Seed for randomly generated beams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl Common {
    pub fn frame(&self) -> modespec::Result<PhysicalFrame> {
        PhysicalFrame::new(self.w0, self.lambdabar)
    }

    pub fn grid_spec(&self) -> modespec::Result<GridSpec> {
        GridSpec::square(self.grid, self.window)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            k_plus: self.k_plus,
            k_minus: self.k_minus,
            ..ScanConfig::default().with_engine(self.engine)
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project a beam on the HG basis (the oracle path).
    Decompose(commands::DecomposeArgs),
    /// Tabulate the lens operation curves and write designed trains.
    DesignLenses(commands::DesignArgs),
    /// Simulate the identity- and parity-compensated intensity scans of a beam.
    SimulateScan(commands::ScanArgs),
    /// Recover mode weights from a pair of scans.
    Reconstruct(commands::ReconstructArgs),
    /// Sweep a lens displacement and fit the error growth.
    MisalignmentStudy(commands::MisalignmentArgs),
    /// Per-mode comparison of two weight or spectrum files.
    Compare(commands::CompareArgs),
}

/// A result outside its numerical tolerance.
#[derive(Debug)]
pub struct ToleranceFailure(pub String);

impl std::fmt::Display for ToleranceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ToleranceFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ToleranceFailure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<modespec::Error>().map(modespec::Error::kind) {
        Some(ErrorKind::Numerical) => 1,
        Some(ErrorKind::Design) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<()> {
        std::fs::create_dir_all(&cli.common.out)?;
        match &cli.command {
            Command::Decompose(a) => commands::decompose(&cli.common, a),
            Command::DesignLenses(a) => commands::design_lenses(&cli.common, a),
            Command::SimulateScan(a) => commands::simulate_scan(&cli.common, a),
            Command::Reconstruct(a) => commands::reconstruct(&cli.common, a),
            Command::MisalignmentStudy(a) => commands::misalignment_study(&cli.common, a),
            Command::Compare(a) => commands::compare(&cli.common, a),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
