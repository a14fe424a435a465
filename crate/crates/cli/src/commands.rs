//! Subcommand implementations. Each writes its report to `out` and files
//! to the paths it was given.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use boxdeconv::boxconv::apply2d;
use boxdeconv::imaging2d::{psnr, relative_error, simulate_scan, tv_reconstruct, ScanConfig, StepRule, TvConfig, TvLog};
use boxdeconv::linalg::norm_inf;
use boxdeconv::recovery::{basis_pursuit, sparse_derivative_recover, RecoveryConfig, RecoveryResult, SupportSet};
use boxdeconv::{BoxOperator, Image2D, Mode};

use crate::cli::{ConvArgs, GenerateCommand, KernelArgs, PhaseArgs, RecoverArgs, ScanArgs, Tv2dArgs, UsizeList};
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::formats::{format_signal, read_image, read_signal, write_image, write_signal, ImageFormat, PgmOptions};
use crate::phase::{format_summary_table, run_phase, summarize, write_csv, write_summary_csv, ExperimentSpec};
use crate::synth::{rectangles_target, sparse_signal};

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| CliError::io("stdout", e))?
    };
}

/// Penalty minimized by `recover`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `|x|_1`
    L1,
    /// `|D x|_1`, for piecewise-constant signals.
    Tv1d,
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Objective::L1),
            "tv1d" => Ok(Objective::Tv1d),
            other => Err(format!("unknown objective {other:?}, expected l1 or tv1d")),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::L1 => "l1",
            Objective::Tv1d => "tv1d",
        })
    }
}

fn pick_mode(flag: Option<String>, cfg: &ConfigFile) -> CliResult<Mode> {
    let text = cfg.pick(flag, "mode", "valid".to_string())?;
    text.parse::<Mode>().map_err(|e| CliError::Usage(e.to_string()))
}

fn pick_list(flag: Option<UsizeList>, cfg: &ConfigFile, key: &str, default: &[usize]) -> CliResult<Vec<usize>> {
    Ok(cfg
        .pick_opt(flag, key)?
        .map(|l| l.0)
        .unwrap_or_else(|| default.to_vec()))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

/// PGM files hold window means, so sums are scaled by `k^2` on the way out
/// and back in; BDF1 stores raw values.
fn measurement_pgm(k: usize, ascii: bool) -> PgmOptions {
    PgmOptions {
        ascii,
        peak: (k * k) as f64,
        ..PgmOptions::default()
    }
}

fn read_measurement(path: &Path, k: usize) -> CliResult<Image2D> {
    let img = read_image(path)?;
    match ImageFormat::from_path(path)? {
        ImageFormat::Bdf1 => Ok(img),
        ImageFormat::Pgm => {
            let scale = (k * k) as f64;
            let (h, w) = img.dims();
            Ok(Image2D::new(h, w, img.into_vec().into_iter().map(|v| v * scale).collect())?)
        }
    }
}

pub fn conv(a: ConvArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let input: PathBuf = cfg.require(a.input, "input")?;
    let k: usize = cfg.require(a.k, "k")?;
    let mode = pick_mode(a.mode, cfg)?;
    let dest: Option<PathBuf> = cfg.pick_opt(a.out, "out")?;

    if ImageFormat::is_image_path(&input) {
        if mode != Mode::Valid {
            return Err(CliError::Usage("images support only the valid mode".into()));
        }
        let dest = dest.ok_or_else(|| CliError::Usage("image output needs --out".into()))?;
        let x = read_image(&input)?;
        let y = apply2d(&x, k)?;
        write_image(&dest, &y, &measurement_pgm(k, false))?;
        say!(out, "conv: {}x{} image, k={k} -> {}x{}", x.height(), x.width(), y.height(), y.width());
        return Ok(());
    }

    let x = read_signal(&input)?;
    let op = BoxOperator::new(k, x.len(), mode)?;
    let y = op.apply(&x)?;
    let summary = format!("conv: n={} k={k} mode={mode} -> {} values", x.len(), y.len());
    match dest {
        Some(path) => {
            write_signal(&path, &y)?;
            say!(out, "{summary}");
        }
        None => {
            eprintln!("{summary}");
            out.write_all(format_signal(&y).as_bytes())
                .map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(())
}

/// Solves for `x` with `op(x) = y`. `n` defaults to the length implied by
/// the measurements.
pub fn recover_signal(
    y: &[f64],
    n: Option<usize>,
    k: usize,
    mode: Mode,
    objective: Objective,
    cfg: &RecoveryConfig,
) -> CliResult<RecoveryResult> {
    if k == 0 {
        return Err(CliError::Dimension("box width k must be at least 1".into()));
    }
    let implied = match mode {
        Mode::Valid => y.len() + k - 1,
        Mode::Circular => y.len(),
    };
    let n = n.unwrap_or(implied);
    if n != implied {
        return Err(CliError::Dimension(format!(
            "{} measurements imply n={implied} for k={k} ({mode}), but n={n} was given",
            y.len()
        )));
    }
    let op = BoxOperator::new(k, n, mode)?;
    Ok(match objective {
        Objective::L1 => basis_pursuit(&op, y, cfg)?,
        Objective::Tv1d => sparse_derivative_recover(&op, y, cfg)?,
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn recover(a: RecoverArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let input: PathBuf = cfg.require(a.input, "input")?;
    let k: usize = cfg.require(a.k, "k")?;
    let n: Option<usize> = cfg.pick_opt(a.n, "n")?;
    let mode = pick_mode(a.mode, cfg)?;
    let objective: Objective = cfg.pick(a.objective, "objective", "l1".to_string())?
        .parse()
        .map_err(CliError::Usage)?;
    let dest: Option<PathBuf> = cfg.pick_opt(a.out, "out")?;

    let y = read_signal(&input)?;
    let rcfg = RecoveryConfig::default();
    let r = recover_signal(&y, n, k, mode, objective, &rcfg)?;
    let xhat = r.xhat.as_slice();
    let support = SupportSet::of(xhat, 0.0);

    say!(out, "recover: n={} k={k} mode={mode} objective={objective}", xhat.len());
    say!(out, "objective: {}", r.l1_norm);
    say!(out, "verdict: {}", r.unique);
    say!(out, "residual: {}", r.residual);
    say!(out, "support: {}", support.one_based().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
    if let Some(c) = &r.certificate {
        say!(out, "tie: {} | {}", join(&c.first), join(&c.second));
    }
    match dest {
        Some(path) => write_signal(&path, xhat)?,
        None => say!(out, "xhat: {}", join(xhat)),
    }
    Ok(())
}

/// Phase-transition settings from flags and config, with defaults matching
/// the `n = 24, k = 4` comparison.
pub fn phase_spec(a: &PhaseArgs, cfg: &ConfigFile) -> CliResult<ExperimentSpec> {
    Ok(ExperimentSpec {
        ns: pick_list(a.n.clone(), cfg, "n", &[24])?,
        ks: pick_list(a.k.clone(), cfg, "k", &[4])?,
        sparsities: pick_list(a.sparsity.clone(), cfg, "sparsity", &[1, 2, 3, 4, 5, 6])?,
        trials: cfg.pick(a.trials, "trials", 100)?,
        seed: cfg.pick(a.seed, "seed", 0)?,
        mode: pick_mode(a.mode.clone(), cfg)?,
        adversarial: a.adversarial,
        timing: a.timing,
    })
}

pub fn phase(a: PhaseArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let spec = phase_spec(&a, cfg)?;
    let dest: Option<PathBuf> = cfg.pick_opt(a.out.clone(), "out")?;
    let summary_path: Option<PathBuf> = cfg.pick_opt(a.summary.clone(), "summary")?;

    let records = run_phase(&spec, &RecoveryConfig::default())?;
    let cells = summarize(&records);
    let table = format_summary_table(&cells);
    match &dest {
        Some(path) => {
            write_csv(create(path)?, &records, spec.timing)?;
            out.write_all(table.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
        }
        None => {
            write_csv(&mut *out, &records, spec.timing)?;
            eprint!("{table}");
        }
    }
    if let Some(path) = summary_path {
        write_summary_csv(create(&path)?, &cells)?;
    }
    Ok(())
}

pub fn scan(a: ScanArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let input: PathBuf = cfg.require(a.input, "input")?;
    let k: usize = cfg.require(a.k, "k")?;
    let noise_sigma: f64 = cfg.pick(a.noise_sigma, "noise-sigma", 0.0)?;
    let seed: u64 = cfg.pick(a.seed, "seed", 0)?;
    let dest: PathBuf = cfg.require(a.out, "out")?;

    let target = read_image(&input)?;
    let y = simulate_scan(&target, &ScanConfig { k, noise_sigma }, seed)?;
    write_image(&dest, &y, &measurement_pgm(k, a.ascii))?;
    say!(
        out,
        "scan: target {}x{}, k={k}, noise_sigma={noise_sigma} -> measurement {}x{}",
        target.height(),
        target.width(),
        y.height(),
        y.width()
    );
    Ok(())
}

fn write_tv_log(path: &Path, log: &TvLog) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let csv_err = |e: csv::Error| CliError::Parse(format!("writing CSV: {e}"));
    w.write_record(["iteration", "objective", "current", "data_term", "tv_term", "change"])
        .map_err(csv_err)?;
    for c in &log.checkpoints {
        w.write_record([
            c.iteration.to_string(),
            c.objective.to_string(),
            c.current.to_string(),
            c.data_term.to_string(),
            c.tv_term.to_string(),
            c.change.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn tv2d(a: Tv2dArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let input: PathBuf = cfg.require(a.input, "input")?;
    let k: usize = cfg.require(a.k, "k")?;
    let defaults = TvConfig::default();
    let step = match cfg.pick(a.step, "step", "preconditioned".to_string())?.to_ascii_lowercase().as_str() {
        "preconditioned" | "pre" => StepRule::Preconditioned,
        "scalar" => StepRule::scalar(k),
        other => {
            return Err(CliError::Usage(format!(
                "unknown step rule {other:?}, expected preconditioned or scalar"
            )))
        }
    };
    let tv_cfg = TvConfig {
        lambda: cfg.pick(a.lambda, "lambda", defaults.lambda)?,
        max_iters: cfg.pick(a.iters, "iters", defaults.max_iters)?,
        tol: cfg.pick(a.tol, "tol", defaults.tol)?,
        log_every: cfg.pick(a.log_every, "log-every", defaults.log_every)?,
        step,
    };
    let target_path: Option<PathBuf> = cfg.pick_opt(a.target, "target")?;
    let peak: f64 = cfg.pick(a.peak, "peak", 1.0)?;
    let dest: Option<PathBuf> = cfg.pick_opt(a.out, "out")?;

    let y = read_measurement(&input, k)?;
    if k == 0 {
        return Err(CliError::Dimension("box width k must be at least 1".into()));
    }
    let (h, w) = (y.height() + k - 1, y.width() + k - 1);
    let result = tv_reconstruct(&y, k, h, w, &tv_cfg)?;
    let last = result.log.checkpoints.last();
    say!(
        out,
        "tv2d: measurement {}x{}, k={k} -> {h}x{w}, lambda={}",
        y.height(),
        y.width(),
        tv_cfg.lambda
    );
    say!(
        out,
        "iterations: {} converged: {} objective: {}",
        result.log.iterations,
        result.log.converged,
        last.map_or(f64::NAN, |c| c.objective)
    );
    if let Some(path) = target_path {
        let target = read_image(&path)?;
        let p = psnr(&result.image, &target, peak)?;
        let rel = relative_error(&result.image, &target)?;
        say!(out, "psnr_db: {p} relative_error: {rel}");
    }
    if let Some(path) = a.log {
        write_tv_log(&path, &result.log)?;
    }
    if let Some(path) = dest {
        let opts = PgmOptions {
            ascii: a.ascii,
            peak,
            ..PgmOptions::default()
        };
        write_image(&path, &result.image, &opts)?;
    }
    Ok(())
}

pub fn kernel(a: KernelArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let k: usize = cfg.require(a.k, "k")?;
    let n: usize = cfg.require(a.n, "n")?;
    let mode = pick_mode(a.mode, cfg)?;
    let op = BoxOperator::new(k, n, mode)?;
    let vectors = op.kernel_vectors();
    if vectors.is_empty() {
        say!(out, "kernel is trivial");
        return Ok(());
    }
    say!(out, "kernel of the {mode} box, k={k} n={n}: dimension {}", vectors.len());
    let mut failed = 0;
    for (i, v) in vectors.iter().enumerate() {
        let image = norm_inf(&op.apply(v)?);
        let ok = image <= boxdeconv::boxconv::kernel_tolerance(v);
        failed += usize::from(!ok);
        say!(
            out,
            "v{}: {}  |Av|_inf = {image}  {}",
            i + 1,
            join(v),
            if ok { "ok" } else { "FAILED" }
        );
    }
    if failed > 0 {
        return Err(CliError::Solver(format!("{failed} kernel vectors failed verification")));
    }
    say!(out, "verified: A v = 0 for all {} vectors", vectors.len());
    Ok(())
}

pub fn generate(g: GenerateCommand, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    match g {
        GenerateCommand::Signal { n, sparsity, seed, out: dest } => {
            let n: usize = cfg.require(n, "n")?;
            let sparsity: usize = cfg.pick(sparsity, "sparsity", 1)?;
            let seed: u64 = cfg.pick(seed, "seed", 0)?;
            let x = sparse_signal(n, sparsity, seed)?;
            match cfg.pick_opt::<PathBuf>(dest, "out")? {
                Some(path) => write_signal(&path, &x)?,
                None => out
                    .write_all(format_signal(&x).as_bytes())
                    .map_err(|e| CliError::io("stdout", e))?,
            }
        }
        GenerateCommand::Target { height, width, rects, seed, out: dest } => {
            let seed: u64 = cfg.pick(seed, "seed", 0)?;
            let dest: PathBuf = cfg.require(dest, "out")?;
            let img = rectangles_target(height, width, rects, seed)?;
            write_image(&dest, &img, &PgmOptions::default())?;
            say!(out, "target: {height}x{width} with {rects} rectangles -> {}", dest.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objectives_parse() {
        assert_eq!("L1".parse::<Objective>().unwrap(), Objective::L1);
        assert_eq!("tv1d".parse::<Objective>().unwrap(), Objective::Tv1d);
        assert!("l2".parse::<Objective>().is_err());
    }

    #[test]
    fn recover_infers_and_checks_length() {
        let cfg = RecoveryConfig::default();
        let r = recover_signal(&[5.0, 5.0, 5.0, 0.0], None, 3, Mode::Valid, Objective::L1, &cfg).unwrap();
        assert_eq!(r.xhat.as_slice().len(), 6);
        let err = recover_signal(&[5.0, 5.0, 5.0, 0.0], Some(7), 3, Mode::Valid, Objective::L1, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
