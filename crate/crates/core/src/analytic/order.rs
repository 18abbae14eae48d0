//! k-th smallest of pairwise sums and the two rank inequalities that sandwich
//! it.
//!
//! For sequences `a`, `b` of length `n` and ascending order statistics
//! `a_(j)`, `b_(j)`:
//!
//! ```text
//! max_{i ∈ [k]}      a_(k−i+1) + b_(i)  ≤  kth-min_i (a_i + b_i)
//! kth-min_i (a_i + b_i)  ≤  min_{i ∈ [n]∖[k−1]} a_(n+k−i) + b_(i)
//! ```

use crate::error::{Error, Result};

fn check(a: &[f64], b: &[f64], k: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::range(
            "b",
            format!("length {} differs from a's length {}", b.len(), a.len()),
        ));
    }
    if k == 0 || k > a.len() {
        return Err(Error::range(
            "k",
            format!("need 1 <= k <= {}, got {k}", a.len()),
        ));
    }
    Ok(())
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Exact k-th smallest (1-based) of `{a_i + b_i}`.
pub fn kth_min_sum(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    check(a, b, k)?;
    let mut sums: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    Ok(kth_smallest_in_place(&mut sums, k))
}

/// k-th smallest (1-based) by partial selection; reorders `values`.
pub(crate) fn kth_smallest_in_place(values: &mut [f64], k: usize) -> f64 {
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Lower rank bound `max_{i∈[k]} (a_(k−i+1) + b_(i))`.
pub fn prop1_lower(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    check(a, b, k)?;
    let (a, b) = (sorted(a), sorted(b));
    Ok((1..=k)
        .map(|i| a[k - i] + b[i - 1])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Upper rank bound `min_{i∈[n]∖[k−1]} (a_(n+k−i) + b_(i))`.
pub fn prop2_upper(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    check(a, b, k)?;
    let n = a.len();
    let (a, b) = (sorted(a), sorted(b));
    Ok((k..=n)
        .map(|i| a[n + k - i - 1] + b[i - 1])
        .fold(f64::INFINITY, f64::min))
}
