//! Sparse recovery from box measurements and the checkers around it.
//!
//! - [`basis_pursuit`] minimizes `|x|_1` subject to `op(x) = y`.
//! - [`sparse_derivative_recover`] minimizes `|Dx|_1` with `D` the forward
//!   difference, for piecewise-constant signals.
//! - [`detect_tie`] decides whether a minimizer is unique: a support smaller
//!   than `floor(n / k)` certifies uniqueness; otherwise a search over the
//!   operator kernel looks for a second minimizer.
//! - [`nullspace_property_check`], [`tightness_pair`] and [`l0_oracle`]
//!   make the recovery bound, its tightness, and the matching
//!   combinatorial limit executable.

mod l0;
mod nsp;
mod pursuit;
mod signals;
mod tie;
mod tightness;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::boxconv::Signal1D;
use crate::error::{dim_err, Error};
use crate::lpsolve::{SolveReport, SolverConfig};

pub use l0::{l0_oracle, L0Solution, L0Solutions, L0_MAX_LEN};
pub use nsp::{nullspace_property_check, NullspaceOutcome};
pub use pursuit::{basis_pursuit, sparse_derivative_recover};
pub use signals::{random_sparse_signal, trial_seed};
pub use tie::{detect_tie, Certificate, TieVerdict};
pub use tightness::{tightness_pair, TightnessPair};

/// Tuning for recovery and tie detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub lp: SolverConfig,
    /// Entries smaller than this are snapped to exactly zero after solving.
    pub tol_zero: f64,
    /// Two penalty values closer than this count as equal.
    pub tol_tie: f64,
    /// Random kernel directions tried by the tie search after the basis
    /// directions.
    pub random_directions: usize,
    /// Seed for those random directions.
    pub seed: u64,
    /// Largest signal length whose operator is materialized for the LP.
    pub materialize_limit: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            lp: SolverConfig::default(),
            tol_zero: 1e-7,
            tol_tie: 1e-7,
            random_directions: 64,
            seed: 0x5eed_b0c5,
            materialize_limit: crate::boxconv::DEFAULT_MATERIALIZE_LIMIT,
        }
    }
}

/// Whether the recovered signal is the only minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Uniqueness {
    /// Certified: the support is below `floor(n / k)`.
    Unique,
    /// A second minimizer was found; see the certificate.
    TieDetected,
    /// Neither certified nor refuted.
    Unknown,
}

impl fmt::Display for Uniqueness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Uniqueness::Unique => "Unique",
            Uniqueness::TieDetected => "TieDetected",
            Uniqueness::Unknown => "Unknown",
        })
    }
}

/// Sorted set of distinct 0-based indices into a signal of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSet {
    n: usize,
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> crate::Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("support indices must be distinct".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(dim_err!("support index {last} out of range for n={n}"));
            }
        }
        Ok(Self { n, indices })
    }

    /// Indices where `|x_i| > tol`.
    pub fn of(x: &[f64], tol: f64) -> Self {
        Self {
            n: x.len(),
            indices: (0..x.len()).filter(|&i| x[i].abs() > tol).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Indices shifted to the 1-based convention.
    pub fn one_based(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().map(|i| i + 1)
    }
}

/// Outcome of [`basis_pursuit`] or [`sparse_derivative_recover`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub xhat: Signal1D,
    /// Minimized penalty at `xhat`: `|xhat|_1`, or `|D xhat|_1` for the
    /// sparse-derivative objective.
    pub l1_norm: f64,
    /// `|op(xhat) - y|_inf`
    pub residual: f64,
    pub unique: Uniqueness,
    pub certificate: Option<Certificate>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoveryError {
    #[error("measurements are not in the range of the operator (least-squares residual {least_squares_residual:.3e})")]
    Infeasible { least_squares_residual: f64 },
    #[error("linear program did not reach optimality ({:?} after {} iterations)", .report.status, .report.iterations)]
    Solver { report: Box<SolveReport> },
    #[error(transparent)]
    Input(#[from] Error),
}
