use alloc::vec::Vec;

use super::SupportSet;
use crate::boxconv::{in_kernel, Mode};
use crate::error::{dim_err, Error, Result};
use crate::linalg::norm1;

/// Result of [`nullspace_property_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceOutcome {
    /// `gap < 0`: every support of size at most `s` carries strictly less
    /// than half of `|z|_1`.
    pub holds: bool,
    /// `max over |S| <= s of |z_S|_1 - |z_{S^c}|_1`.
    pub gap: f64,
    /// A support attaining the maximum.
    pub worst: SupportSet,
}

/// Worst-case split of a kernel vector `z` over supports of size `s`.
///
/// `z` is `k`-periodic, so the largest entries repeat along one residue
/// class. Take `i` as the position of the largest `|z_j|` within the first
/// period; when that residue class has at least `s` members the worst
/// support is `s` of them, giving `|z_S|_1 = s |z_i|`. Otherwise (only
/// possible once `s` reaches `floor(n / k)`) the `s` largest entries are
/// taken directly. Both choices maximize `2 |z_S|_1 - |z|_1`, so the gap
/// is exact.
pub fn nullspace_property_check(k: usize, n: usize, s: usize, z: &[f64]) -> Result<NullspaceOutcome> {
    if z.len() != n {
        return Err(dim_err!("kernel vector has length {}, expected {}", z.len(), n));
    }
    if k == 0 || k > n {
        return Err(dim_err!("box width k={k} invalid for n={n}"));
    }
    if s > n {
        return Err(Error::Precondition(alloc::format!("support size {s} exceeds n={n}")));
    }
    if z.iter().all(|&v| v == 0.0) {
        return Err(Error::Precondition("kernel vector must be nonzero".into()));
    }
    if !in_kernel(z, k, Mode::Valid)? {
        return Err(Error::Precondition("vector is not in the kernel of the box operator".into()));
    }

    let i = (0..k).fold(0, |best, j| if z[j].abs() > z[best].abs() { j } else { best });
    let class: Vec<usize> = (i..n).step_by(k).collect();
    let indices: Vec<usize> = if s <= class.len() {
        class[..s].to_vec()
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));
        order.truncate(s);
        order
    };
    let worst = SupportSet::from_indices(n, indices)?;
    let on_support: f64 = worst.indices().iter().map(|&j| z[j].abs()).sum();
    let gap = 2.0 * on_support - norm1(z);
    Ok(NullspaceOutcome {
        holds: gap < 0.0,
        gap,
        worst,
    })
}
