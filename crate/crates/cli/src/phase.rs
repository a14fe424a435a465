//! Phase-transition harness: seeded basis-pursuit trials over a grid of
//! `(n, k, sparsity)` cells.
//!
//! # CSV schema
//!
//! One row per trial, in `(n, k, sparsity, trial)` order, with columns
//!
//! | column | meaning |
//! |---|---|
//! | `n`, `k`, `mode`, `sparsity`, `trial` | cell and trial index |
//! | `seed` | per-trial seed derived from the root seed |
//! | `recovered` | `true` iff the solve succeeded and `|xhat - x|_inf <= 1e-6` |
//! | `l1_objective` | `|xhat|_1` (`NaN` when the solve failed) |
//! | `error_inf` | `|xhat - x|_inf` (`NaN` when the solve failed) |
//! | `verdict` | `Unique`, `TieDetected` or `Unknown` (empty on failure) |
//! | `witness` | for ties, 1-based supports of the two certificate points as `a;b/c;d` |
//! | `status` | `ok`, `infeasible`, `solver`, or `input` |
//! | `wall_time_s` | only with timing enabled, which makes the file non-reproducible |
//!
//! Floats are printed in shortest round-trip form, so equal runs give
//! byte-identical files.

use std::io::Write;
use std::time::Instant;

use boxdeconv::linalg::{max_abs_diff, norm1};
use boxdeconv::recovery::{basis_pursuit, random_sparse_signal, trial_seed, RecoveryConfig, RecoveryError};
use boxdeconv::{BoxOperator, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub sparsities: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Replace random signals with indicators of one residue class (the
    /// worst case for the recovery bound).
    pub adversarial: bool,
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        if self.ns.is_empty() || self.ks.is_empty() || self.sparsities.is_empty() {
            return Err(CliError::Usage("n, k and sparsity lists must be non-empty".into()));
        }
        for &n in &self.ns {
            for &k in &self.ks {
                if k == 0 || k > n {
                    return Err(CliError::Dimension(format!("box width k={k} does not fit n={n}")));
                }
                for &s in &self.sparsities {
                    if s > n {
                        return Err(CliError::Dimension(format!("sparsity {s} exceeds n={n}")));
                    }
                    if self.adversarial && s > n.div_ceil(k) {
                        return Err(CliError::Dimension(format!(
                            "adversarial sparsity {s} exceeds the residue class size {} for n={n}, k={k}",
                            n.div_ceil(k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut cells = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                for &s in &self.sparsities {
                    cells.push((n, k, s));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub sparsity: usize,
    pub trial: usize,
    pub seed: u64,
    pub recovered: bool,
    pub l1_objective: f64,
    pub error_inf: f64,
    pub verdict: String,
    pub witness: String,
    pub status: String,
    pub wall_time_s: Option<f64>,
}

/// Ones on the first `s` indices of residue class `r` (class 0 when `r`
/// has fewer than `s` members).
pub fn residue_class_signal(n: usize, k: usize, s: usize, r: usize) -> Vec<f64> {
    let r = if n.saturating_sub(r).div_ceil(k) >= s { r } else { 0 };
    let mut x = vec![0.0; n];
    for i in (r..n).step_by(k).take(s) {
        x[i] = 1.0;
    }
    x
}

pub fn run_trial(spec: &ExperimentSpec, n: usize, k: usize, s: usize, trial: usize, cfg: &RecoveryConfig) -> TrialRecord {
    let start = Instant::now();
    let seed = trial_seed(spec.seed, n, k, s, trial);
    let x = if spec.adversarial {
        residue_class_signal(n, k, s, trial % k)
    } else {
        random_sparse_signal(n, s, &mut ChaCha8Rng::seed_from_u64(seed))
    };
    let mut record = TrialRecord {
        n,
        k,
        mode: spec.mode,
        sparsity: s,
        trial,
        seed,
        recovered: false,
        l1_objective: f64::NAN,
        error_inf: f64::NAN,
        verdict: String::new(),
        witness: String::new(),
        status: String::new(),
        wall_time_s: None,
    };
    let outcome = BoxOperator::new(k, n, spec.mode)
        .map_err(RecoveryError::from)
        .and_then(|op| {
            let y = op.apply(&x)?;
            basis_pursuit(&op, &y, cfg)
        });
    match outcome {
        Ok(r) => {
            let err = max_abs_diff(r.xhat.as_slice(), &x);
            record.recovered = err <= RECOVERY_TOL;
            record.l1_objective = norm1(r.xhat.as_slice());
            record.error_inf = err;
            record.verdict = r.unique.to_string();
            if let Some(c) = &r.certificate {
                let support = |p: &[f64]| {
                    p.iter()
                        .enumerate()
                        .filter(|(_, v)| v.abs() > cfg.tol_zero)
                        .map(|(i, _)| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                };
                record.witness = format!("{}/{}", support(&c.first), support(&c.second));
            }
            record.status = "ok".into();
        }
        Err(RecoveryError::Infeasible { .. }) => record.status = "infeasible".into(),
        Err(RecoveryError::Solver { .. }) => record.status = "solver".into(),
        Err(RecoveryError::Input(_)) => record.status = "input".into(),
    }
    if spec.timing {
        record.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    record
}

/// Runs every trial, in parallel, and returns the records in
/// `(n, k, sparsity, trial)` order.
pub fn run_phase(spec: &ExperimentSpec, cfg: &RecoveryConfig) -> CliResult<Vec<TrialRecord>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, usize, usize)> = spec
        .cells()
        .into_iter()
        .flat_map(|(n, k, s)| (0..spec.trials).map(move |t| (n, k, s, t)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(n, k, s, t)| run_trial(spec, n, k, s, t, cfg))
        .collect())
}

pub fn write_csv<W: Write>(out: W, records: &[TrialRecord], timing: bool) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "n", "k", "mode", "sparsity", "trial", "seed", "recovered", "l1_objective", "error_inf",
        "verdict", "witness", "status",
    ];
    if timing {
        header.push("wall_time_s");
    }
    let csv_err = |e: csv::Error| CliError::Parse(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            r.n.to_string(),
            r.k.to_string(),
            r.mode.to_string(),
            r.sparsity.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.recovered.to_string(),
            r.l1_objective.to_string(),
            r.error_inf.to_string(),
            r.verdict.clone(),
            r.witness.clone(),
            r.status.clone(),
        ];
        if timing {
            row.push(r.wall_time_s.map(|t| t.to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub k: usize,
    pub sparsity: usize,
    pub trials: usize,
    pub recovered: usize,
    pub rate: f64,
    /// `floor(n / k)`: recovery is guaranteed strictly below it.
    pub bound: usize,
    /// `n / (2 (k - 1))`, the older coherence-based threshold.
    pub coherence_threshold: f64,
}

pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some(c) if (c.n, c.k, c.sparsity) == (r.n, r.k, r.sparsity) => {
                c.trials += 1;
                c.recovered += r.recovered as usize;
            }
            _ => out.push(CellSummary {
                n: r.n,
                k: r.k,
                sparsity: r.sparsity,
                trials: 1,
                recovered: r.recovered as usize,
                rate: 0.0,
                bound: r.n / r.k,
                coherence_threshold: if r.k > 1 {
                    r.n as f64 / (2.0 * (r.k - 1) as f64)
                } else {
                    f64::INFINITY
                },
            }),
        }
    }
    for c in &mut out {
        c.rate = c.recovered as f64 / c.trials as f64;
    }
    out
}

pub fn write_summary_csv<W: Write>(out: W, cells: &[CellSummary]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Parse(format!("writing CSV: {e}"));
    w.write_record([
        "n",
        "k",
        "sparsity",
        "trials",
        "recovered",
        "rate",
        "floor_n_over_k",
        "n_over_2k_minus_2",
    ])
    .map_err(csv_err)?;
    for c in cells {
        w.write_record([
            c.n.to_string(),
            c.k.to_string(),
            c.sparsity.to_string(),
            c.trials.to_string(),
            c.recovered.to_string(),
            c.rate.to_string(),
            c.bound.to_string(),
            c.coherence_threshold.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))
}

pub fn format_summary_table(cells: &[CellSummary]) -> String {
    let mut s = format!(
        "{:>6} {:>4} {:>9} {:>7} {:>8} {:>11} {:>12}\n",
        "n", "k", "sparsity", "trials", "rate", "floor(n/k)", "n/(2(k-1))"
    );
    for c in cells {
        s.push_str(&format!(
            "{:>6} {:>4} {:>9} {:>7} {:>8.3} {:>11} {:>12.3}\n",
            c.n, c.k, c.sparsity, c.trials, c.rate, c.bound, c.coherence_threshold
        ));
    }
    s
}
