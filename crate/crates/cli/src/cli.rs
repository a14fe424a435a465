//! Argument definitions and dispatch for the `boxdeconv` binary.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "boxdeconv", version, about = "Sparse deconvolution with a box kernel")]
pub struct Cli {
    /// Flat key=value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convolve a signal (text) or image (.pgm/.bdf) with a box.
    Conv(ConvArgs),
    /// Recover a signal from box measurements.
    Recover(RecoverArgs),
    /// Run seeded recovery trials over a grid and write CSV.
    Phase(PhaseArgs),
    /// Simulate the pixel-shift scan of a target image.
    Scan(ScanArgs),
    /// TV-regularized reconstruction of a scanned image.
    Tv2d(Tv2dArgs),
    /// Print and verify a basis of the operator kernel.
    Kernel(KernelArgs),
    /// Write seeded synthetic inputs.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Debug, Args)]
pub struct ConvArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    /// valid or circular (images: valid only)
    #[arg(long)]
    pub mode: Option<String>,
    /// Output file; 1D results go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Measurement signal file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Signal length; inferred from the measurements when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub mode: Option<String>,
    /// l1 (sparse signal) or tv1d (sparse derivative)
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Signal lengths, e.g. `12,20,24` or `10..30`.
    #[arg(long)]
    pub n: Option<UsizeList>,
    #[arg(long)]
    pub k: Option<UsizeList>,
    /// Sparsity levels, e.g. `1..5`.
    #[arg(long)]
    pub sparsity: Option<UsizeList>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<String>,
    /// Trial CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Use residue-class indicator signals instead of random ones.
    #[arg(long)]
    pub adversarial: bool,
    /// Add a wall-time column (the CSV is then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Target image (.pgm or .bdf).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measurement image; PGM output stores window means (sum / k^2).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write PGM as ASCII (P2) instead of binary (P5).
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args)]
pub struct Tv2dArgs {
    /// Measurement image; PGM input holds window means (sum / k^2).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub log_every: Option<usize>,
    /// preconditioned or scalar
    #[arg(long)]
    pub step: Option<String>,
    /// Ground truth for PSNR and relative error.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Peak value for PSNR.
    #[arg(long)]
    pub peak: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Convergence log as CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCommand {
    /// Random sparse signal.
    Signal {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        sparsity: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Piecewise-constant target of random rectangles.
    Target {
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 4)]
        rects: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Comma-separated values and inclusive ranges `a..b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

impl FromStr for UsizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("`{v}` is not a nonnegative integer"))
            };
            if let Some((a, b)) = part.split_once("..") {
                let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            } else {
                out.push(parse(part)?);
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(UsizeList(out))
    }
}

/// Runs the command line in `args` and returns the process exit code.
/// Errors are reported on stderr as one `error[tag]: message` line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).report_line());
            return 2;
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("{}", e.report_line());
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Conv(a) => commands::conv(a, &cfg, out),
        Command::Recover(a) => commands::recover(a, &cfg, out),
        Command::Phase(a) => commands::phase(a, &cfg, out),
        Command::Scan(a) => commands::scan(a, &cfg, out),
        Command::Tv2d(a) => commands::tv2d(a, &cfg, out),
        Command::Kernel(a) => commands::kernel(a, &cfg, out),
        Command::Generate(g) => commands::generate(g, &cfg, out),
    }
}
