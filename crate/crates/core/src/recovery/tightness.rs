use alloc::vec::Vec;

use crate::error::{dim_err, Result};

/// Two distinct signals with the same measurements and the same l1 norm.
///
/// `x` is the indicator of residue class 0 and `z` the indicator of residue
/// class 1 (0-based), so each has `n / k` ones and every window of `k`
/// consecutive samples, wrapped or not, contains exactly one of them:
/// `op(x) = op(z) = 1` for both the valid and circular operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightnessPair {
    pub x: Vec<i64>,
    pub z: Vec<i64>,
}

/// Requires `k > 1` dividing `n`.
pub fn tightness_pair(k: usize, n: usize) -> Result<TightnessPair> {
    if k < 2 || n == 0 || !n.is_multiple_of(k) {
        return Err(dim_err!("tightness construction needs k > 1 dividing n, got k={k}, n={n}"));
    }
    let indicator = |r: usize| (0..n).map(|i| i64::from(i % k == r)).collect();
    Ok(TightnessPair {
        x: indicator(0),
        z: indicator(1),
    })
}
