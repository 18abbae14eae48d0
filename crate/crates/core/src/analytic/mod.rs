//! Closed-form latency bounds.
//!
//! All bounds come from the same recipe: the job finishes at the k-th
//! smallest of `X_i + S_i`, the rank inequalities in [`order`] sandwich that
//! value between sums of individual order statistics, and Jensen's
//! inequality moves the expectation inside the max/min. Order statistics of
//! exponentials have means `(H_n − H_{n−i})/rate`; Erlang ones come from
//! [`erlang`].

pub mod erlang;
pub mod order;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{uncoded_erasure, SystemParams};

pub use erlang::{
    erlang_coefficients, erlang_order_stat_means, shared_order_stat_means, ErlangOrderStatTable,
    OrderStatMethod,
};
pub use order::{kth_min_sum, prop1_lower, prop2_upper};

/// Relative tolerance between the exhaustive lower bound and its two-branch
/// reduced form.
const BRANCH_TOLERANCE: f64 = 1e-12;

/// Harmonic number `H_j`, with `H_0 = 0`.
pub fn harmonic(j: usize) -> f64 {
    (1..=j).map(|i| 1.0 / i as f64).sum()
}

/// `[H_0, H_1, ..., H_n]`.
pub fn harmonic_table(n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    h.push(0.0);
    for i in 1..=n {
        acc += 1.0 / i as f64;
        h.push(acc);
    }
    h
}

/// Lower and upper bound on `E[T]` together with the inner indices that
/// attain them (1-based, smallest index on ties).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub argmax_index_lower: usize,
    pub argmin_index_upper: usize,
}

impl BoundPair {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }
}

fn arg_extreme(values: impl Iterator<Item = (usize, f64)>, maximize: bool) -> (usize, f64) {
    let mut best = (
        0,
        if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
    );
    for (i, v) in values {
        let better = if maximize { v > best.1 } else { v < best.1 };
        if better {
            best = (i, v);
        }
    }
    best
}

/// Rank-inequality bounds for one inner product per worker (`k = m`).
///
/// ```text
/// L = max_{i∈[k]}       (H_n − H_{n−k+i−1})/μ1 + (H_n − H_{n−i})/((1−ε)μ2)
/// U = min_{i∈[n]∖[k−1]} (H_n − H_{i−k})/μ1     + (H_n − H_{n−i})/((1−ε)μ2)
/// ```
///
/// The lower bound is convex in `i`, so its maximum sits at an endpoint: the
/// `i = k` term when `ε ≥ 1 − μ1/μ2` (communication is the slower stage),
/// the `i = 1` term otherwise. The exhaustive maximum is checked against that
/// two-branch form.
pub fn bounds_max_k(params: &SystemParams) -> Result<BoundPair> {
    if params.k != params.m {
        return Err(Error::Precondition(format!(
            "bounds_max_k needs k = m, got k = {}, m = {}",
            params.k, params.m
        )));
    }
    let (n, k) = (params.n, params.k);
    let h = harmonic_table(n);
    let comm = params.effective_comm_rate();
    let mu1 = params.mu1;

    let (li, lower) = arg_extreme(
        (1..=k).map(|i| {
            (
                i,
                (h[n] - h[n - k + i - 1]) / mu1 + (h[n] - h[n - i]) / comm,
            )
        }),
        true,
    );
    let (ui, upper) = arg_extreme(
        (k..=n).map(|i| (i, (h[n] - h[i - k]) / mu1 + (h[n] - h[n - i]) / comm)),
        false,
    );

    let spread = h[n] - h[n - k];
    let reduced = if params.epsilon >= 1.0 - mu1 / params.mu2 {
        1.0 / (n as f64 * mu1) + spread / comm
    } else {
        spread / mu1 + 1.0 / (n as f64 * comm)
    };
    if (reduced - lower).abs() > BRANCH_TOLERANCE * lower.abs() {
        return Err(Error::Consistency(format!(
            "exhaustive lower bound {lower} disagrees with two-branch form {reduced} \
             at n = {n}, k = {k}, eps = {}",
            params.epsilon
        )));
    }

    Ok(BoundPair {
        lower,
        upper,
        argmax_index_lower: li,
        argmin_index_upper: ui,
    })
}

/// Rank-inequality bounds for any `k`, using Erlang(m/k) order statistics
/// for the communication stage.
pub fn bounds_general_k(params: &SystemParams) -> Result<BoundPair> {
    crate::model::validate(params)?;
    let table = shared_order_stat_means(params.n, params.shard_len());
    bounds_general_k_with(params, &table)
}

/// [`bounds_general_k`] with a precomputed order-statistic table, which must
/// match `(n, m/k)`.
pub fn bounds_general_k_with(
    params: &SystemParams,
    table: &ErlangOrderStatTable,
) -> Result<BoundPair> {
    crate::model::validate(params)?;
    if table.n != params.n || table.shape != params.shard_len() {
        return Err(Error::Precondition(format!(
            "order-statistic table is for n = {}, shape = {}; need n = {}, shape = {}",
            table.n,
            table.shape,
            params.n,
            params.shard_len()
        )));
    }
    let (n, k) = (params.n, params.k);
    let h = harmonic_table(n);
    let scale = params.m as f64 / (k as f64 * params.mu1);
    let comm = params.effective_comm_rate();

    let (li, lower) = arg_extreme(
        (1..=k).map(|i| (i, scale * (h[n] - h[n - k + i - 1]) + table.mean(i) / comm)),
        true,
    );
    let (ui, upper) = arg_extreme(
        (k..=n).map(|i| (i, scale * (h[n] - h[i - k]) + table.mean(i) / comm)),
        false,
    );
    Ok(BoundPair {
        lower,
        upper,
        argmax_index_lower: li,
        argmin_index_upper: ui,
    })
}

/// Bounds on the uncoded run-time, where the workload is spread evenly over
/// all `n` workers and the master waits for every one of them.
///
/// For `k = m` each worker holds a `k/n` fraction of one inner product: its
/// computation and per-packet rates scale by `n/k` and its packets see the
/// shorter-packet erasure probability [`uncoded_erasure`]. Otherwise each
/// worker holds `m/n` whole inner products (requires `n | m`) and the bounds
/// are the general ones evaluated at `k = n`.
pub fn uncoded_bounds(params: &SystemParams) -> Result<BoundPair> {
    crate::model::validate(params)?;
    let n = params.n;
    let h = harmonic_table(n);
    if params.k == params.m {
        let eps_short = uncoded_erasure(params.epsilon, params.k, n)?;
        let share = params.k as f64 / n as f64;
        let comm = (1.0 - eps_short) * params.mu2;
        let (li, lower) = arg_extreme(
            (1..=n).map(|i| {
                (
                    i,
                    share * (h[n] - h[i - 1]) / params.mu1 + share * (h[n] - h[n - i]) / comm,
                )
            }),
            true,
        );
        let upper = share * (h[n] / params.mu1 + h[n] / comm);
        Ok(BoundPair {
            lower,
            upper,
            argmax_index_lower: li,
            argmin_index_upper: n,
        })
    } else {
        if params.m % n != 0 {
            return Err(Error::Divisibility {
                divisor: n,
                dividend: params.m,
                context: "uncoded split of m inner products over n workers",
            });
        }
        let spread = SystemParams { k: n, ..*params };
        let table = shared_order_stat_means(n, params.m / n);
        bounds_general_k_with(&spread, &table)
    }
}

/// Large-`n` approximations of the `k = m` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBounds {
    /// Two-branch lower bound with `H_n − H_{n−k} ≈ log(n/(n−k))`.
    pub lower: f64,
    /// Upper bound evaluated at the real-valued stationary index.
    pub upper: f64,
    /// `i* = (μ1 k + (1−ε)μ2 n) / (μ1 + (1−ε)μ2)`.
    pub i_star: f64,
    /// `n → ∞` limit of the lower bound at fixed rate `R = k/n`.
    pub lower_limit: f64,
}

/// Diagnostic large-`n` forms of the `k = m` bounds. The exact integer
/// search in [`bounds_max_k`] is authoritative; these are only for checking
/// how quickly the exact values settle.
pub fn asymptotic_bounds(params: &SystemParams) -> Result<AsymptoticBounds> {
    crate::model::validate(params)?;
    if params.k != params.m {
        return Err(Error::Precondition("asymptotic bounds need k = m".into()));
    }
    if params.k >= params.n {
        return Err(Error::range(
            "k",
            "asymptotic bounds need a code rate k/n < 1",
        ));
    }
    let (n, k) = (params.n as f64, params.k as f64);
    let mu1 = params.mu1;
    let comm = params.effective_comm_rate();
    let spread = (n / (n - k)).ln();
    let comm_limited = params.epsilon >= 1.0 - mu1 / params.mu2;
    let lower = if comm_limited {
        1.0 / (n * mu1) + spread / comm
    } else {
        spread / mu1 + 1.0 / (n * comm)
    };
    let limit_rate = if comm_limited { comm } else { mu1 };
    let i_star = (mu1 * k + comm * n) / (mu1 + comm);
    let upper = (n / (i_star - k)).ln() / mu1 + (n / (n - i_star)).ln() / comm;
    Ok(AsymptoticBounds {
        lower,
        upper,
        i_star,
        lower_limit: (1.0 / (1.0 - params.code_rate())).ln() / limit_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: usize, k: usize, m: usize, mu1: f64, mu2: f64, eps: f64) -> SystemParams {
        SystemParams::new(n, k, m, mu1, mu2, eps).unwrap()
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
        let t = harmonic_table(4);
        assert_eq!(t.len(), 5);
        assert!((t[4] - harmonic(4)).abs() < 1e-15);
    }

    #[test]
    fn max_k_hand_values() {
        let b = bounds_max_k(&p(2, 1, 1, 1.0, 1.0, 0.0)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-15);
        assert!((b.upper - 2.0).abs() < 1e-15);
        assert_eq!(b.argmax_index_lower, 1);
        // both i = 1 and i = 2 give 2.0; the smaller index wins
        assert_eq!(b.argmin_index_upper, 1);

        let b = bounds_max_k(&p(1, 1, 1, 1.0, 1.0, 0.5)).unwrap();
        assert!((b.lower - 3.0).abs() < 1e-15);
        assert!((b.upper - 3.0).abs() < 1e-15);
    }

    #[test]
    fn max_k_preconditions() {
        assert!(matches!(
            bounds_max_k(&p(5, 2, 4, 1.0, 1.0, 0.0)),
            Err(Error::Precondition(_))
        ));
        assert!(SystemParams::new(100, 500, 500, 10.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn lower_argmax_regimes() {
        // communication slower: (1−ε)μ2 = 0.9 < μ1 = 10 → i = k
        let b = bounds_max_k(&p(50, 20, 20, 10.0, 1.0, 0.1)).unwrap();
        assert_eq!(b.argmax_index_lower, 20);
        // computation slower: (1−ε)μ2 = 9 > μ1 = 1 → i = 1
        let b = bounds_max_k(&p(50, 20, 20, 1.0, 10.0, 0.1)).unwrap();
        assert_eq!(b.argmax_index_lower, 1);
    }

    #[test]
    fn bounds_increase_with_erasure() {
        // every term carries 1/((1−ε)μ2), so both bounds grow with ε
        for &(n, k, mu1, mu2) in &[(10, 5, 1.0, 1.0), (20, 10, 10.0, 1.0), (20, 3, 1.0, 10.0)] {
            let mut prev = bounds_max_k(&p(n, k, k, mu1, mu2, 0.0)).unwrap();
            for step in 1..=5 {
                let b = bounds_max_k(&p(n, k, k, mu1, mu2, step as f64 / 10.0)).unwrap();
                assert!(b.lower > prev.lower && b.upper > prev.upper);
                prev = b;
            }
        }
    }

    #[test]
    fn general_k_reduces_to_max_k() {
        for &(n, k) in &[(2, 1), (5, 2), (10, 5), (20, 10), (20, 20), (17, 4)] {
            for &eps in &[0.0, 0.3] {
                for &(mu1, mu2) in &[(1.0, 1.0), (10.0, 1.0), (1.0, 10.0)] {
                    let prm = p(n, k, k, mu1, mu2, eps);
                    let a = bounds_max_k(&prm).unwrap();
                    let b = bounds_general_k(&prm).unwrap();
                    assert!(
                        (a.lower - b.lower).abs() <= 1e-9 * a.lower,
                        "{prm:?} {a:?} {b:?}"
                    );
                    assert!(
                        (a.upper - b.upper).abs() <= 1e-9 * a.upper,
                        "{prm:?} {a:?} {b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn general_k_hand_values() {
        let b = bounds_general_k(&p(2, 1, 1, 1.0, 1.0, 0.0)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 2.0).abs() < 1e-12);
        // shape-2 table [1.25, 2.75]: L = 2·(H2−H1) + 1.25,
        // U = min(2·H2 + 1.25, 2·(H2−H1) + 2.75) = min(4.25, 3.75)
        let b = bounds_general_k(&p(2, 1, 2, 1.0, 1.0, 0.0)).unwrap();
        assert!((b.lower - 2.25).abs() < 1e-12, "{}", b.lower);
        assert!((b.upper - 3.75).abs() < 1e-12, "{}", b.upper);
        assert_eq!(b.argmin_index_upper, 2);
    }

    #[test]
    fn general_k_rejects_mismatched_table() {
        let prm = p(4, 2, 4, 1.0, 1.0, 0.0);
        let wrong = erlang_order_stat_means(4, 3);
        assert!(bounds_general_k_with(&prm, &wrong).is_err());
    }

    #[test]
    fn uncoded_hand_values() {
        let b = uncoded_bounds(&p(1, 1, 1, 1.0, 1.0, 0.0)).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-15 && (b.upper - 2.0).abs() < 1e-15);
        // k/n = 1, ε' = ε: L = max(H2 + (H2−H1), (H2−H1) + H2) = 2, U = 2·H2 = 3
        let b = uncoded_bounds(&p(2, 2, 2, 1.0, 1.0, 0.0)).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-15, "{}", b.lower);
        assert!((b.upper - 3.0).abs() < 1e-15, "{}", b.upper);
    }

    #[test]
    fn uncoded_general_path_needs_divisibility() {
        assert!(matches!(
            uncoded_bounds(&p(6, 2, 4, 1.0, 1.0, 0.1)),
            Err(Error::Divisibility {
                divisor: 6,
                dividend: 4,
                ..
            })
        ));
        let b = uncoded_bounds(&p(4, 2, 8, 1.0, 1.0, 0.1)).unwrap();
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn uncoded_paths_agree_when_k_equals_n() {
        // k = m = n: both paths describe the same uncoded system
        let prm = p(6, 6, 6, 2.0, 3.0, 0.2);
        let a = uncoded_bounds(&prm).unwrap();
        let b = bounds_general_k(&prm).unwrap();
        assert!((a.lower - b.lower).abs() < 1e-9 && (a.upper - b.upper).abs() < 1e-9);
    }

    #[test]
    fn coded_advantage_grows_with_n() {
        let ratio = |n: usize| {
            let prm = p(n, n / 2, n / 2, 1.0, 1.0, 0.1);
            uncoded_bounds(&prm).unwrap().lower / bounds_max_k(&prm).unwrap().upper
        };
        let r: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| ratio(n)).collect();
        assert!(r.windows(2).all(|w| w[1] > w[0]), "{r:?}");
    }

    #[test]
    fn asymptotics() {
        let a = asymptotic_bounds(&p(400, 200, 200, 1.0, 1.0, 0.0)).unwrap();
        assert!((a.i_star - 300.0).abs() < 1e-9);

        let prm = p(10_000, 5_000, 5_000, 10.0, 1.0, 0.1);
        let a = asymptotic_bounds(&prm).unwrap();
        let exact = bounds_max_k(&prm).unwrap();
        assert!((a.lower - exact.lower).abs() < 0.02 * exact.lower);
        let expect = 1.0 / (10_000.0 * 10.0) + (2.0f64).ln() / 0.9;
        assert!((a.lower - expect).abs() < 1e-12);
        assert!((a.lower_limit - (2.0f64).ln() / 0.9).abs() < 1e-12);
        assert!((a.upper - exact.upper).abs() < 0.02 * exact.upper);

        assert!(asymptotic_bounds(&p(5, 5, 5, 1.0, 1.0, 0.0)).is_err());
        assert!(asymptotic_bounds(&p(6, 2, 4, 1.0, 1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn branch_form_and_ordering(
            n in 1usize..60,
            k_frac in 0.0f64..1.0,
            mu1 in 0.1f64..20.0,
            mu2 in 0.1f64..20.0,
            eps in 0.0f64..0.95,
        ) {
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let prm = p(n, k, k, mu1, mu2, eps);
            // Err(Consistency) would surface here
            let b = bounds_max_k(&prm).unwrap();
            prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
            prop_assert!((1..=k).contains(&b.argmax_index_lower));
            prop_assert!((k..=n).contains(&b.argmin_index_upper));
            let comm_limited = eps >= 1.0 - mu1 / mu2;
            if k > 1 && (eps - (1.0 - mu1 / mu2)).abs() > 1e-9 {
                prop_assert_eq!(b.argmax_index_lower, if comm_limited { k } else { 1 });
            }
        }

        #[test]
        fn erlang_sum_identity(n in 1usize..=20, shape in 1usize..=12) {
            let t = erlang_order_stat_means(n, shape);
            prop_assert_eq!(t.method, OrderStatMethod::ClosedForm);
            let total: f64 = t.means.iter().sum();
            let expect = (n * shape) as f64;
            prop_assert!((total - expect).abs() <= 1e-6 * expect);
            prop_assert!(t.means.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
