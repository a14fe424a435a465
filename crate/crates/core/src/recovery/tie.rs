//! Searching the operator kernel for a second minimizer.
//!
//! Every feasible point is `xhat + z` with `z` in the kernel, so a tie is a
//! nonzero kernel vector along which the penalty stays flat. Two searches
//! run in order:
//!
//! 1. *Face directions.* Keep the sign pattern of the penalized vector
//!    `T xhat` (`T` is the identity for l1, `D` for the derivative
//!    penalty): a kernel vector `z` with `(T z)_i = 0` off the support and
//!    `sign(T xhat) . T z = 0` on it leaves the penalty exactly constant.
//!    Such a `z` exists whenever `xhat` lies inside a flat optimal face,
//!    which is where interior-point solutions land. The two ends of the flat
//!    segment are then pushed to vertices of the face.
//! 2. *Line search.* Along each kernel basis vector and a batch of random
//!    kernel combinations, the penalty `t -> |T (xhat + t z)|_1` is convex
//!    and piecewise linear; its breakpoints are scanned outward from `t = 0`
//!    to find how far it stays within `tol_tie` of the start.
//!
//! The search is sound but not complete: finding nothing yields
//! [`Uniqueness::Unknown`], never [`Uniqueness::Unique`].

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RecoveryConfig, SupportSet, Uniqueness};
use crate::boxconv::BoxOperator;
use crate::linalg::{max_abs_diff, norm1, norm_inf, DenseMatrix};

/// Two distinct feasible points whose penalties agree within `tol_tie`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub first_norm: f64,
    pub second_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieVerdict {
    pub verdict: Uniqueness,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Penalty {
    L1,
    /// `|Dx|_1` with `(Dx)_i = x_{i+1} - x_i`.
    Derivative,
}

impl Penalty {
    pub(crate) fn transform(self, x: &[f64]) -> Vec<f64> {
        match self {
            Penalty::L1 => x.to_vec(),
            Penalty::Derivative => x.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    pub(crate) fn value(self, x: &[f64]) -> f64 {
        norm1(&self.transform(x))
    }
}

/// Uniqueness verdict for an l1 minimizer `xhat` of `op(x) = y`.
///
/// `Unique` is returned only when `|supp(xhat)| < floor(n / k)`, where the
/// recovery guarantee applies to any feasible point.
pub fn detect_tie(op: &BoxOperator, y: &[f64], xhat: &[f64], cfg: &RecoveryConfig) -> TieVerdict {
    let support = SupportSet::of(xhat, cfg.tol_zero);
    if support.len() < op.n() / op.k() {
        return TieVerdict {
            verdict: Uniqueness::Unique,
            certificate: None,
        };
    }
    verdict_from(find_tie(op, y, xhat, Penalty::L1, cfg))
}

pub(crate) fn verdict_from(certificate: Option<Certificate>) -> TieVerdict {
    TieVerdict {
        verdict: if certificate.is_some() {
            Uniqueness::TieDetected
        } else {
            Uniqueness::Unknown
        },
        certificate,
    }
}

pub(crate) fn find_tie(
    op: &BoxOperator,
    y: &[f64],
    xhat: &[f64],
    penalty: Penalty,
    cfg: &RecoveryConfig,
) -> Option<Certificate> {
    if xhat.len() != op.n() || y.len() != op.output_len() {
        return None;
    }
    let kernel = op.kernel_vectors();
    if kernel.is_empty() {
        return None;
    }
    let search = TieSearch {
        op,
        y,
        xhat,
        penalty,
        cfg,
        kernel: &kernel,
        f0: penalty.value(xhat),
    };

    if let Some(z) = search.face_direction(xhat) {
        let (lo, hi) = search.flat_extent(xhat, &z);
        let ends = [axpy(xhat, hi, &z), axpy(xhat, lo, &z)];
        let vertices = [search.purify(ends[0].clone()), search.purify(ends[1].clone())];
        for [a, b] in [vertices, ends] {
            if let Some(c) = search.certify(a, b) {
                return Some(c);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random = (0..cfg.random_directions).map(|_| {
        let mut z = vec![0.0; op.n()];
        for v in &kernel {
            let c: f64 = rng.random_range(-1.0..1.0);
            for (zz, &vv) in z.iter_mut().zip(v) {
                *zz += c * vv;
            }
        }
        z
    });
    for z in kernel.iter().cloned().chain(random) {
        if norm_inf(&z) == 0.0 {
            continue;
        }
        let (lo, hi) = search.flat_extent(xhat, &z);
        if let Some(c) = search.certify(axpy(xhat, lo, &z), axpy(xhat, hi, &z)) {
            return Some(c);
        }
    }
    None
}

struct TieSearch<'a> {
    op: &'a BoxOperator,
    y: &'a [f64],
    xhat: &'a [f64],
    penalty: Penalty,
    cfg: &'a RecoveryConfig,
    kernel: &'a [Vec<f64>],
    f0: f64,
}

impl TieSearch<'_> {
    fn tie_tol(&self) -> f64 {
        self.cfg.tol_tie * (1.0 + self.f0)
    }

    /// Kernel vector that keeps the penalty constant by preserving the sign
    /// pattern of `T x`, normalized to unit max-norm.
    fn face_direction(&self, x: &[f64]) -> Option<Vec<f64>> {
        let tx = self.penalty.transform(x);
        let images: Vec<Vec<f64>> = self.kernel.iter().map(|v| self.penalty.transform(v)).collect();
        let d = self.kernel.len();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut signed = vec![0.0; d];
        for (i, &t) in tx.iter().enumerate() {
            if t.abs() > self.cfg.tol_zero {
                let s = t.signum();
                for (acc, w) in signed.iter_mut().zip(&images) {
                    *acc += s * w[i];
                }
            } else {
                rows.push(images.iter().map(|w| w[i]).collect());
            }
        }
        rows.push(signed);
        let constraints = DenseMatrix::from_rows(&rows).ok()?;
        for c in constraints.nullspace(1e-9) {
            let mut z = vec![0.0; x.len()];
            for (v, &ci) in self.kernel.iter().zip(&c) {
                for (zz, &vv) in z.iter_mut().zip(v) {
                    *zz += ci * vv;
                }
            }
            let scale = norm_inf(&z);
            if scale == 0.0 || norm_inf(&self.penalty.transform(&z)) <= 1e-12 * scale {
                continue;
            }
            for zz in &mut z {
                *zz /= scale;
            }
            return Some(z);
        }
        None
    }

    /// Interval `[lo, hi]` around 0 on which the penalty along `z` stays
    /// within `tol_tie` of its value at `x`, read off the breakpoints.
    fn flat_extent(&self, x: &[f64], z: &[f64]) -> (f64, f64) {
        let a = self.penalty.transform(x);
        let b = self.penalty.transform(z);
        let f = |t: f64| a.iter().zip(&b).map(|(ai, bi)| (ai + t * bi).abs()).sum::<f64>();
        let start = f(0.0);
        let limit = start + self.tie_tol();
        let bscale = norm_inf(&b);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (ai, bi) in a.iter().zip(&b) {
            if bi.abs() <= 1e-14 * bscale {
                continue;
            }
            let t = -ai / bi;
            if t > 0.0 {
                pos.push(t);
            } else if t < 0.0 {
                neg.push(t);
            }
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(|p, q| q.total_cmp(p));
        let walk = |ts: &[f64]| {
            let mut reach = 0.0;
            for &t in ts {
                if f(t) <= limit {
                    reach = t;
                } else {
                    break;
                }
            }
            reach
        };
        (walk(&neg), walk(&pos))
    }

    /// Follows face directions until none is left, ending on a vertex of
    /// the flat face that contains `x`.
    fn purify(&self, mut x: Vec<f64>) -> Vec<f64> {
        for _ in 0..=x.len() {
            let Some(z) = self.face_direction(&x) else { break };
            let (lo, hi) = self.flat_extent(&x, &z);
            let t = if hi > 0.0 { hi } else { lo };
            if t == 0.0 {
                break;
            }
            x = axpy(&x, t, &z);
            if self.penalty == Penalty::L1 {
                let snap = 1e-12 * (1.0 + norm_inf(&x));
                for v in &mut x {
                    if v.abs() <= snap {
                        *v = 0.0;
                    }
                }
            }
        }
        x
    }

    fn certify(&self, first: Vec<f64>, second: Vec<f64>) -> Option<Certificate> {
        let distinct = 1e-6 * (1.0 + norm_inf(self.xhat));
        if max_abs_diff(&first, &second) <= distinct {
            return None;
        }
        let feas_tol = 1e-7 * (1.0 + norm_inf(self.y));
        let feasible = |p: &[f64]| {
            self.op
                .apply(p)
                .map(|ap| max_abs_diff(&ap, self.y) <= feas_tol)
                .unwrap_or(false)
        };
        if !feasible(&first) || !feasible(&second) {
            return None;
        }
        let first_norm = self.penalty.value(&first);
        let second_norm = self.penalty.value(&second);
        let tol = self.tie_tol();
        if (first_norm - self.f0).abs() > tol || (second_norm - self.f0).abs() > tol {
            return None;
        }
        Some(Certificate {
            first,
            second,
            first_norm,
            second_norm,
        })
    }
}

fn axpy(x: &[f64], t: f64, z: &[f64]) -> Vec<f64> {
    x.iter().zip(z).map(|(a, b)| a + t * b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxconv::Mode;

    fn cfg() -> RecoveryConfig {
        RecoveryConfig::default()
    }

    #[test]
    fn tightness_vertex_yields_the_shifted_indicator() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let x = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let v = detect_tie(&op, &[1.0; 4], &x, &cfg());
        assert_eq!(v.verdict, Uniqueness::TieDetected);
        let c = v.certificate.unwrap();
        let pair = [c.first.clone(), c.second.clone()];
        assert!(pair.contains(&x.to_vec()));
        assert!(pair.contains(&vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]));
        assert_eq!(c.first_norm, 2.0);
        assert_eq!(c.second_norm, 2.0);
    }

    #[test]
    fn face_center_is_pushed_to_vertices() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let center = [1.0 / 3.0; 6];
        let v = detect_tie(&op, &[1.0; 4], &center, &cfg());
        assert_eq!(v.verdict, Uniqueness::TieDetected);
        let c = v.certificate.unwrap();
        let indicators: Vec<Vec<f64>> = (0..3)
            .map(|r| (0..6).map(|i| if i % 3 == r { 1.0 } else { 0.0 }).collect())
            .collect();
        for p in [&c.first, &c.second] {
            assert!(
                indicators.iter().any(|ind| max_abs_diff(ind, p) < 1e-12),
                "{p:?} is not a residue indicator"
            );
        }
        assert!(max_abs_diff(&c.first, &c.second) > 0.5);
    }

    #[test]
    fn small_support_is_certified_unique() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let v = detect_tie(&op, &[5.0, 5.0, 5.0, 0.0], &[0.0, 0.0, 5.0, 0.0, 0.0, 0.0], &cfg());
        assert_eq!(v.verdict, Uniqueness::Unique);
        assert!(v.certificate.is_none());
    }

    #[test]
    fn unique_large_support_is_never_called_unique() {
        // Support of size floor(n/k) = 2 with unequal values: the l1
        // minimizer for these measurements is unique, but the bound does
        // not certify it.
        let op = BoxOperator::valid(3, 6).unwrap();
        let x = [2.0, 0.0, 0.0, 0.0, 0.0, -3.0];
        let y = op.apply(&x).unwrap();
        let v = detect_tie(&op, &y, &x, &cfg());
        assert_ne!(v.verdict, Uniqueness::Unique);
    }

    #[test]
    fn trivial_kernel_gives_unknown() {
        // gcd(3, 7) = 1: the circular operator is injective, yet the support
        // is too large for the bound.
        let op = BoxOperator::new(3, 7, Mode::Circular).unwrap();
        let x = [1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        let y = op.apply(&x).unwrap();
        let v = detect_tie(&op, &y, &x, &cfg());
        assert_eq!(v.verdict, Uniqueness::Unknown);
    }
}
