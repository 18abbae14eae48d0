//! Expected order statistics of i.i.d. unit-rate Erlang variables.
//!
//! For `G_1..G_n ~ Erlang(s, 1)` the i-th smallest has mean
//!
//! ```text
//! E[G_(i)] = n! / ((i−1)! (n−i)! Γ(s))
//!            · Σ_{p=0}^{i−1} (−1)^p C(i−1, p)
//!              Σ_{q=0}^{(s−1)(n−i+p)} a_q(s, n−i+p) Γ(s+q+1) / (n−i+p+1)^{s+q+1}
//! ```
//!
//! where `a_q(x, y)` is the coefficient of `t^q` in `(Σ_{j<x} t^j / j!)^y`.
//! The inner sums are positive and are accumulated in log space; the outer
//! sum alternates and can cancel catastrophically. Entries whose evaluation
//! loses too many digits are recomputed by simulation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::sampling::{erlang_unit, trial_rng};

/// Largest polynomial degree `(s−1)(n−1)` evaluated in closed form.
pub const CLOSED_FORM_MAX_DEGREE: usize = 2000;

/// Trials used when an entry falls back to simulation.
pub const FALLBACK_TRIALS: u64 = 1_000_000;

/// Largest tolerated ratio between the biggest alternating term and the
/// result. Beyond it fewer than ~7 significant digits survive.
const CANCELLATION_LIMIT: f64 = 1e9;

const FALLBACK_CHUNK: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderStatMethod {
    ClosedForm,
    MonteCarloFallback,
}

impl std::fmt::Display for OrderStatMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrderStatMethod::ClosedForm => "closed_form",
            OrderStatMethod::MonteCarloFallback => "monte_carlo_fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErlangOrderStatTable {
    pub n: usize,
    pub shape: usize,
    /// `means[i-1] = E[G_(i)]`.
    pub means: Vec<f64>,
    /// `monte_carlo_fallback` if any entry came from simulation.
    pub method: OrderStatMethod,
    /// Per-entry provenance.
    pub entry_methods: Vec<OrderStatMethod>,
}

impl ErlangOrderStatTable {
    /// Mean of the `i`-th smallest, 1-based.
    pub fn mean(&self, i: usize) -> f64 {
        self.means[i - 1]
    }

    /// CSV with columns `i,mean,method`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "mean", "method"])?;
        for (idx, (mean, method)) in self.means.iter().zip(&self.entry_methods).enumerate() {
            w.write_record([(idx + 1).to_string(), mean.to_string(), method.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coefficients `a_0..a_{(x−1)y}` of `(Σ_{j=0}^{x−1} t^j / j!)^y`.
pub fn erlang_coefficients(x: usize, y: usize) -> Vec<f64> {
    let base = truncated_exp(x);
    let mut poly = vec![1.0];
    for _ in 0..y {
        poly = convolve(&poly, &base);
    }
    poly
}

fn truncated_exp(x: usize) -> Vec<f64> {
    let mut base = Vec::with_capacity(x);
    let mut term = 1.0;
    for j in 0..x {
        if j > 0 {
            term /= j as f64;
        }
        base.push(term);
    }
    base
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn ln_factorials(upto: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(upto + 1);
    let mut acc = 0.0;
    t.push(0.0);
    for j in 1..=upto {
        acc += (j as f64).ln();
        t.push(acc);
    }
    t
}

fn log_sum_exp(logs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logs.map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// Closed-form means; `None` marks entries that were unstable or skipped.
fn closed_form_means(n: usize, shape: usize) -> Vec<Option<f64>> {
    if (shape - 1) * (n - 1) > CLOSED_FORM_MAX_DEGREE {
        return vec![None; n];
    }
    let max_degree = (shape - 1) * (n - 1);
    let lnf = ln_factorials(n + shape + max_degree + 1);
    let ln_choose = |a: usize, b: usize| lnf[a] - lnf[b] - lnf[a - b];

    // log of the positive inner sum, indexed by y = n − i + p ∈ [0, n−1]
    let base = truncated_exp(shape);
    let mut poly = vec![1.0];
    let mut inner = Vec::with_capacity(n);
    for y in 0..n {
        if y > 0 {
            poly = convolve(&poly, &base);
        }
        let ln_y1 = ((y + 1) as f64).ln();
        let logs = poly
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(q, &a)| a.ln() + lnf[shape + q] - (shape + q + 1) as f64 * ln_y1);
        inner.push(log_sum_exp(logs));
    }

    (1..=n)
        .map(|i| {
            let ln_pre = lnf[n] - lnf[i - 1] - lnf[n - i] - lnf[shape - 1];
            let mut sum = 0.0f64;
            let mut comp = 0.0f64;
            let mut biggest = 0.0f64;
            for p in 0..i {
                let magnitude = (ln_pre + ln_choose(i - 1, p) + inner[n - i + p]).exp();
                let term = if p % 2 == 0 { magnitude } else { -magnitude };
                biggest = biggest.max(magnitude);
                // Neumaier summation
                let t = sum + term;
                if sum.abs() >= term.abs() {
                    comp += (sum - t) + term;
                } else {
                    comp += (term - t) + sum;
                }
                sum = t;
            }
            let value = sum + comp;
            let stable = value.is_finite() && value > 0.0 && biggest / value <= CANCELLATION_LIMIT;
            stable.then_some(value)
        })
        .collect()
}

/// Simulated order-statistic means with a fixed seed per `(n, shape)`.
fn simulated_means(n: usize, shape: usize, trials: u64) -> Vec<f64> {
    let seed = 0x0e71_a4c0_0000_0000 ^ ((n as u64) << 20) ^ shape as u64;
    let chunks = trials.div_ceil(FALLBACK_CHUNK);
    let gamma = rand_distr::Gamma::new(shape as f64, 1.0).expect("positive shape");
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; n];
            let mut draws = vec![0.0; n];
            let end = ((c + 1) * FALLBACK_CHUNK).min(trials);
            for t in c * FALLBACK_CHUNK..end {
                let mut rng = trial_rng(seed, t);
                for d in draws.iter_mut() {
                    *d = gamma.sample(&mut rng);
                }
                draws.sort_unstable_by(f64::total_cmp);
                for (a, d) in acc.iter_mut().zip(&draws) {
                    *a += d;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter().map(|s| s / trials as f64).collect()
}

/// `E[G_(i)]` for `i = 1..=n`, `G ~ Erlang(shape, 1)`.
///
/// Shape 1 uses the exponential identity `H_n − H_{n−i}`, which is what the
/// alternating sum evaluates to there.
///
/// # Panics
///
/// If `n` or `shape` is zero.
pub fn erlang_order_stat_means(n: usize, shape: usize) -> ErlangOrderStatTable {
    erlang_order_stat_means_with(n, shape, FALLBACK_TRIALS)
}

/// Memoized [`erlang_order_stat_means`]. Tables depend only on `(n, shape)`,
/// so sweeps over erasure probability or rates reuse them.
pub fn shared_order_stat_means(n: usize, shape: usize) -> Arc<ErlangOrderStatTable> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<ErlangOrderStatTable>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache lock").get(&(n, shape)) {
        return Arc::clone(t);
    }
    // computed outside the lock; a racing duplicate is identical anyway
    let table = Arc::new(erlang_order_stat_means(n, shape));
    Arc::clone(
        cache
            .lock()
            .expect("cache lock")
            .entry((n, shape))
            .or_insert(table),
    )
}

pub(crate) fn erlang_order_stat_means_with(
    n: usize,
    shape: usize,
    fallback_trials: u64,
) -> ErlangOrderStatTable {
    assert!(n >= 1 && shape >= 1, "need n >= 1 and shape >= 1");
    if shape == 1 {
        // the alternating sum collapses to the exponential identity
        let h = super::harmonic_table(n);
        let means = (1..=n).map(|i| h[n] - h[n - i]).collect();
        return ErlangOrderStatTable {
            n,
            shape,
            means,
            method: OrderStatMethod::ClosedForm,
            entry_methods: vec![OrderStatMethod::ClosedForm; n],
        };
    }
    let mut entries = closed_form_means(n, shape);

    // a closed-form entry below its predecessor is also treated as unstable
    for i in 1..n {
        if let (Some(prev), Some(cur)) = (entries[i - 1], entries[i]) {
            if cur < prev {
                entries[i] = None;
                entries[i - 1] = None;
            }
        }
    }

    if entries.iter().all(Option::is_some) {
        let means: Vec<f64> = entries.into_iter().map(Option::unwrap).collect();
        return ErlangOrderStatTable {
            n,
            shape,
            entry_methods: vec![OrderStatMethod::ClosedForm; n],
            means,
            method: OrderStatMethod::ClosedForm,
        };
    }

    let simulated = simulated_means(n, shape, fallback_trials);
    let mut means = Vec::with_capacity(n);
    let mut entry_methods = Vec::with_capacity(n);
    for (entry, sim) in entries.iter().zip(&simulated) {
        match entry {
            Some(v) => {
                means.push(*v);
                entry_methods.push(OrderStatMethod::ClosedForm);
            }
            None => {
                means.push(*sim);
                entry_methods.push(OrderStatMethod::MonteCarloFallback);
            }
        }
    }
    if means.windows(2).any(|w| w[1] < w[0]) {
        means = simulated;
        entry_methods = vec![OrderStatMethod::MonteCarloFallback; n];
    }
    ErlangOrderStatTable {
        n,
        shape,
        means,
        method: OrderStatMethod::MonteCarloFallback,
        entry_methods,
    }
}

/// Draws one sorted sample of `n` unit Erlang variables. Used by tests that
/// need an independent oracle.
#[doc(hidden)]
pub fn sample_sorted_erlangs<R: Rng + ?Sized>(n: usize, shape: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| erlang_unit(shape as u64, rng)).collect();
    v.sort_unstable_by(f64::total_cmp);
    v
}
