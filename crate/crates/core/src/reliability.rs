//! Limited retransmissions: success probabilities, censored run-times and
//! latency quantiles.
//!
//! With at most `γ` transmissions per worker, a worker either delivers its
//! `m/k` packets after `C_i ≤ γ` attempts, taking `Erlang(C_i, μ2)` time, or
//! fails and never delivers. The job run-time `T′` is the k-th smallest of
//! `X_i + S′_i` and is infinite when fewer than `k` workers deliver.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::order::kth_smallest_in_place;
use crate::error::{Error, Result};
use crate::model::sampling::{exp_unit, worker_rng};
use crate::model::{validate, EstimateWithCI, SystemParams, TransmissionCap};
use crate::montecarlo::MIN_TRIALS;

/// Exact success probabilities under a transmission cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProfile {
    /// One worker delivers all of its packets.
    pub p: f64,
    /// At least `k` of `n` workers deliver.
    pub p_s: f64,
    pub gamma: TransmissionCap,
}

/// Probability that one worker delivers, and its complement, each summed
/// directly so that neither is formed by cancellation.
fn worker_success_and_failure(packets: usize, epsilon: f64, cap: TransmissionCap) -> (f64, f64) {
    let gamma = match cap {
        TransmissionCap::Unlimited => return (1.0, 0.0),
        TransmissionCap::Limited(g) => g as usize,
    };
    if gamma < packets {
        return (0.0, 1.0);
    }
    if epsilon == 0.0 {
        return (1.0, 0.0);
    }
    let s = packets as f64;
    let ln_succ = s * (-epsilon).ln_1p();
    let ln_eps = epsilon.ln();
    let allowed = gamma - packets;

    // term i: C(s+i−1, i) (1−ε)^s ε^i, built by the ratio (s+i−1)/i · ε
    let mut ln_term = ln_succ;
    let mut head = 0.0;
    let mut i = 0usize;
    loop {
        head += ln_term.exp();
        if i == allowed {
            break;
        }
        i += 1;
        ln_term += ((s + i as f64 - 1.0) / i as f64).ln() + ln_eps;
    }
    if head <= 0.5 {
        return (head, 1.0 - head);
    }
    // tail i > γ − m/k; terms eventually shrink geometrically at rate ε
    let mut tail = 0.0;
    loop {
        i += 1;
        ln_term += ((s + i as f64 - 1.0) / i as f64).ln() + ln_eps;
        let term = ln_term.exp();
        tail += term;
        let past_mode = (s + i as f64 - 1.0) * epsilon < i as f64;
        if past_mode && (term <= tail * 1e-17 || term == 0.0) {
            break;
        }
    }
    (1.0 - tail, tail)
}

/// `p = Σ_{i=0}^{γ−m/k} C(m/k+i−1, i) (1−ε)^{m/k} ε^i`; zero when
/// `γ < m/k`, one when the cap is unlimited.
pub fn worker_success_prob(params: &SystemParams, cap: TransmissionCap) -> f64 {
    worker_success_and_failure(params.shard_len(), params.epsilon, cap).0
}

/// `P(Binomial(n, p) ≥ k)`, term by term in log space. Sums whichever tail
/// is smaller so that results near one are not formed by accumulation.
fn binomial_tail_at_least(n: usize, k: usize, p: f64, q: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return 1.0;
    }
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let term =
        |i: usize, ln_choose: f64| (ln_choose + i as f64 * ln_p + (n - i) as f64 * ln_q).exp();
    // P(X < k), with ln C(n, i) built upward from ln C(n, 0) = 0
    let mut ln_choose = 0.0;
    let mut below = 0.0;
    for i in 0..k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64 / i as f64).ln();
        }
        below += term(i, ln_choose);
    }
    if below <= 0.5 {
        return (1.0 - below).max(0.0);
    }
    let mut above = 0.0;
    for i in k..=n {
        ln_choose += ((n - i + 1) as f64 / i as f64).ln();
        above += term(i, ln_choose);
    }
    above.min(1.0)
}

/// `P_s = Σ_{i=k}^{n} C(n, i) (1−p)^{n−i} p^i`.
pub fn system_success_prob(params: &SystemParams, cap: TransmissionCap) -> SuccessProfile {
    let (p, q) = worker_success_and_failure(params.shard_len(), params.epsilon, cap);
    SuccessProfile {
        p,
        p_s: binomial_tail_at_least(params.n, params.k, p, q),
        gamma: cap,
    }
}

/// Smallest finite `γ ≤ ceiling` with `P_s ≥ target`.
pub fn min_gamma_for_success(params: &SystemParams, target: f64, ceiling: u32) -> Option<u32> {
    let floor = params.shard_len() as u32;
    (floor..=ceiling)
        .find(|&g| system_success_prob(params, TransmissionCap::Limited(g)).p_s >= target)
}

/// A run-time or communication time that may never finish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensoredRuntime {
    Finite(f64),
    Infinite,
}

impl CensoredRuntime {
    pub fn value(self) -> f64 {
        match self {
            CensoredRuntime::Finite(t) => t,
            CensoredRuntime::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, CensoredRuntime::Finite(_))
    }
}

/// One worker's transmission record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Delivery {
    /// Attempts used; meaningful only when `delivered`.
    pub attempts: u64,
    /// Total air time of those attempts.
    pub time: f64,
    pub delivered: bool,
}

/// Sends `packets` packets, at most `limit` attempts.
///
/// Each attempt draws a uniform `u` (erased iff `u < ε`) and a unit
/// exponential duration. Fixing the draws and raising `ε` can only turn
/// successes into erasures, so outcomes are coupled monotonically across
/// erasure probabilities as well as caps.
pub(crate) fn transmit<R: Rng + ?Sized>(
    packets: u64,
    epsilon: f64,
    mu2: f64,
    limit: Option<u64>,
    rng: &mut R,
) -> Delivery {
    let mut delivered = 0u64;
    let mut attempts = 0u64;
    let mut time = 0.0;
    while delivered < packets {
        if limit.is_some_and(|l| attempts >= l) {
            return Delivery {
                attempts,
                time: time / mu2,
                delivered: false,
            };
        }
        let u: f64 = rng.random();
        time += exp_unit(rng);
        attempts += 1;
        if u >= epsilon {
            delivered += 1;
        }
    }
    Delivery {
        attempts,
        time: time / mu2,
        delivered: true,
    }
}

/// `S′_i`: infinite when the cap runs out before all `m/k` packets arrive.
pub fn sample_censored_comm_time<R: Rng + ?Sized>(
    params: &SystemParams,
    cap: TransmissionCap,
    rng: &mut R,
) -> CensoredRuntime {
    let d = transmit(
        params.shard_len() as u64,
        params.epsilon,
        params.mu2,
        cap.limit().map(u64::from),
        rng,
    );
    if d.delivered {
        CensoredRuntime::Finite(d.time)
    } else {
        CensoredRuntime::Infinite
    }
}

/// Latency quantile `T^(α) = min{τ : Pr[T′ ≤ τ] ≥ 1−α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LatencyQuantile {
    /// `lower`/`upper` are order statistics bracketing the population
    /// quantile with roughly 95% confidence; `upper` may be infinite.
    Feasible { value: f64, lower: f64, upper: f64 },
    /// Fewer than `(1−α)·trials` trials finished.
    Infeasible { success_fraction: f64 },
}

impl LatencyQuantile {
    pub fn value(&self) -> Option<f64> {
        match self {
            LatencyQuantile::Feasible { value, .. } => Some(*value),
            LatencyQuantile::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LatencyQuantile::Feasible { .. })
    }
}

/// Censored run-times of one Monte Carlo batch, evaluated at several caps.
///
/// Every cap sees the same per-worker transmission paths, so estimates are
/// coupled across caps: a trial finished by time `τ` under cap `γ` is also
/// finished under any larger cap.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredRuntimes {
    pub params: SystemParams,
    pub seed: u64,
    pub trials: u64,
    caps: Vec<TransmissionCap>,
    /// `sorted[c]`: run-times under `caps[c]`, ascending, infinities last.
    sorted: Vec<Vec<f64>>,
}

impl CensoredRuntimes {
    /// Simulates `trials` trials. Worker `j` of trial `t` draws from
    /// `worker_rng(seed, t, j)`: first its computation time, then one
    /// `(u, y)` pair per transmission attempt.
    pub fn simulate(
        params: &SystemParams,
        caps: &[TransmissionCap],
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        validate(params)?;
        if trials < MIN_TRIALS {
            return Err(Error::range(
                "trials",
                format!("need at least {MIN_TRIALS}, got {trials}"),
            ));
        }
        if caps.is_empty() {
            return Err(Error::range("caps", "need at least one transmission cap"));
        }
        let mut caps = caps.to_vec();
        caps.sort_unstable();
        caps.dedup();
        let limit = caps
            .iter()
            .map(|c| c.limit().map(u64::from))
            .max_by(|a, b| match (a, b) {
                (None, None) => std::cmp::Ordering::Equal,
                (None, _) => std::cmp::Ordering::Greater,
                (_, None) => std::cmp::Ordering::Less,
                (Some(x), Some(y)) => x.cmp(y),
            })
            .flatten();

        let (n, k) = (params.n, params.k);
        let packets = params.shard_len() as u64;
        let comp_rate = params.computation_rate();
        let per_trial: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut finish = Vec::with_capacity(n);
                for j in 0..n {
                    let mut rng = worker_rng(seed, t, j);
                    let x = exp_unit(&mut rng) / comp_rate;
                    let d = transmit(packets, params.epsilon, params.mu2, limit, &mut rng);
                    if d.delivered {
                        finish.push((x + d.time, d.attempts));
                    }
                }
                let mut scratch = Vec::with_capacity(n);
                caps.iter()
                    .map(|cap| {
                        scratch.clear();
                        scratch.extend(
                            finish
                                .iter()
                                .filter(|(_, a)| cap.allows(*a))
                                .map(|(t, _)| *t),
                        );
                        if scratch.len() < k {
                            f64::INFINITY
                        } else {
                            kth_smallest_in_place(&mut scratch, k)
                        }
                    })
                    .collect()
            })
            .collect();

        let sorted = (0..caps.len())
            .map(|c| {
                let mut v: Vec<f64> = per_trial.iter().map(|row| row[c]).collect();
                v.sort_unstable_by(f64::total_cmp);
                v
            })
            .collect();
        Ok(Self {
            params: *params,
            seed,
            trials,
            caps,
            sorted,
        })
    }

    pub fn caps(&self) -> &[TransmissionCap] {
        &self.caps
    }

    fn column(&self, cap: TransmissionCap) -> Result<&[f64]> {
        self.caps
            .binary_search(&cap)
            .map(|c| self.sorted[c].as_slice())
            .map_err(|_| Error::range("cap", format!("{cap} was not simulated")))
    }

    /// Ascending run-times under `cap`, infinities last.
    pub fn runtimes(&self, cap: TransmissionCap) -> Result<&[f64]> {
        self.column(cap)
    }

    /// Estimate of `Pr[T′ ≤ τ]`; unfinished trials count as misses.
    pub fn cdf(&self, cap: TransmissionCap, tau: f64) -> Result<EstimateWithCI> {
        let col = self.column(cap)?;
        let hits = col.partition_point(|&t| t <= tau) as u64;
        Ok(EstimateWithCI::from_count(hits, self.trials, self.seed))
    }

    /// Fraction of trials with a finite run-time.
    pub fn success_fraction(&self, cap: TransmissionCap) -> Result<EstimateWithCI> {
        self.cdf(cap, f64::MAX)
    }

    /// Lower empirical `(1−α)`-quantile: the `⌈(1−α)N⌉`-th smallest run-time
    /// with unfinished trials ranked above every finished one.
    pub fn quantile(&self, cap: TransmissionCap, alpha: f64) -> Result<LatencyQuantile> {
        check_alpha(alpha)?;
        let col = self.column(cap)?;
        let n = col.len();
        let rank = order_rank(n, 1.0 - alpha);
        let value = col[rank - 1];
        if !value.is_finite() {
            let finished = col.partition_point(|t| t.is_finite());
            return Ok(LatencyQuantile::Infeasible {
                success_fraction: finished as f64 / n as f64,
            });
        }
        // distribution-free bracket: ranks (1−α)N ± 2·sqrt(N α (1−α))
        let spread = 2.0 * (n as f64 * alpha * (1.0 - alpha)).sqrt();
        let lo_rank = ((1.0 - alpha) * n as f64 - spread).floor().max(1.0) as usize;
        let hi_rank = (((1.0 - alpha) * n as f64 + spread).ceil() as usize).min(n);
        Ok(LatencyQuantile::Feasible {
            value,
            lower: col[lo_rank.min(rank) - 1],
            upper: col[hi_rank.max(rank) - 1],
        })
    }
}

/// `⌈q·n⌉` clamped to `[1, n]`, robust to `q·n` landing a hair above an
/// integer.
fn order_rank(n: usize, q: f64) -> usize {
    ((q * n as f64 - 1e-9).ceil().max(1.0) as usize).min(n)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::range(
            "alpha",
            format!("need 0 < alpha < 1, got {alpha}"),
        ));
    }
    Ok(())
}

/// Estimate of `Pr[T′ ≤ τ]` under `cap`.
pub fn runtime_cdf(
    params: &SystemParams,
    cap: TransmissionCap,
    tau: f64,
    trials: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::range("tau", format!("need tau > 0, got {tau}")));
    }
    CensoredRuntimes::simulate(params, &[cap], trials, seed)?.cdf(cap, tau)
}

/// Estimate of `T^(α)` under `cap`.
pub fn latency_quantile(
    params: &SystemParams,
    cap: TransmissionCap,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<LatencyQuantile> {
    check_alpha(alpha)?;
    CensoredRuntimes::simulate(params, &[cap], trials, seed)?.quantile(cap, alpha)
}

/// Exact upper bound on `Pr[T′ ≤ τ]` that needs no simulation.
///
/// A worker finishes by `τ` only if both its computation time and its first
/// `m/k` attempts fit in `τ`, so its chance is at most
/// `min(P(X ≤ τ), P(Erlang(m/k, μ2) ≤ τ))`; the job then needs `k` such
/// workers out of `n`.
pub fn runtime_cdf_upper_bound(params: &SystemParams, tau: f64) -> f64 {
    if tau.is_infinite() {
        return 1.0;
    }
    let comp = -(-params.computation_rate() * tau).exp_m1();
    let comm = erlang_cdf(params.shard_len() as u64, params.mu2, tau);
    let w = comp.min(comm);
    binomial_tail_at_least(params.n, params.k, w, 1.0 - w)
}

/// `P(Erlang(s, λ) ≤ t) = P(Poisson(λt) ≥ s)`.
fn erlang_cdf(shape: u64, rate: f64, t: f64) -> f64 {
    let x = rate * t;
    if x <= 0.0 {
        return 0.0;
    }
    // P(Poisson(x) < s) summed in log space
    let mut ln_term = -x;
    let mut below = 0.0;
    for j in 0..shape {
        if j > 0 {
            ln_term += x.ln() - (j as f64).ln();
        }
        below += ln_term.exp();
    }
    (1.0 - below).clamp(0.0, 1.0)
}

/// Row of the success-probability figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub k: usize,
    pub gamma: TransmissionCap,
    pub epsilon: f64,
    pub p: f64,
    pub p_s: f64,
}

impl SuccessRow {
    pub fn new(params: &SystemParams, cap: TransmissionCap) -> Self {
        let prof = system_success_prob(params, cap);
        Self {
            k: params.k,
            gamma: cap,
            epsilon: params.epsilon,
            p: prof.p,
            p_s: prof.p_s,
        }
    }
}

/// Row of the `Pr[T′ ≤ τ]` figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyProbRow {
    pub k: usize,
    pub gamma: TransmissionCap,
    pub epsilon: f64,
    pub tau: f64,
    pub prob: f64,
    pub std_error: f64,
    pub p_s: f64,
}

/// `Pr[T′ ≤ τ]` for each `(k, γ)`; one simulation per `k` covers every `γ`.
pub fn latency_prob_grid(
    base: &SystemParams,
    ks: &[usize],
    caps: &[TransmissionCap],
    tau: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<LatencyProbRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        let params = base.with_k(k)?;
        let usable: Vec<TransmissionCap> = caps
            .iter()
            .copied()
            .filter(|c| !matches!(c.limit(), Some(g) if (g as usize) < params.shard_len()))
            .collect();
        let sim = if usable.is_empty() {
            None
        } else {
            Some(CensoredRuntimes::simulate(&params, &usable, trials, seed)?)
        };
        for &cap in caps {
            let est = match &sim {
                Some(s) if usable.contains(&cap) => s.cdf(cap, tau)?,
                _ => EstimateWithCI::from_count(0, trials, seed),
            };
            rows.push(LatencyProbRow {
                k,
                gamma: cap,
                epsilon: params.epsilon,
                tau,
                prob: est.mean,
                std_error: est.std_error,
                p_s: system_success_prob(&params, cap).p_s,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sampling::trial_rng;
    use TransmissionCap::{Limited, Unlimited};

    fn p(n: usize, k: usize, m: usize, eps: f64) -> SystemParams {
        SystemParams::new(n, k, m, 1.0, 5.0, eps).unwrap()
    }

    #[test]
    fn worker_success_examples() {
        assert!((worker_success_prob(&p(4, 4, 4, 0.3), Limited(2)) - 0.91).abs() < 1e-14);
        assert!((worker_success_prob(&p(4, 1, 3, 0.3), Limited(3)) - 0.343).abs() < 1e-14);
        assert!((worker_success_prob(&p(4, 1, 3, 0.3), Limited(5)) - 0.83692).abs() < 1e-14);
        assert_eq!(worker_success_prob(&p(4, 1, 3, 0.3), Limited(2)), 0.0);
        assert_eq!(worker_success_prob(&p(4, 1, 3, 0.3), Unlimited), 1.0);
    }

    #[test]
    fn complement_is_accurate_near_one() {
        // 1 − p = ε^γ for one packet
        let (pp, q) = worker_success_and_failure(1, 0.1, Limited(15));
        assert!((q - 1e-15).abs() < 1e-27, "{q}");
        assert_eq!(pp, 1.0 - q);
        let (pp, q) = worker_success_and_failure(3, 0.3, Limited(3));
        assert!((pp - 0.343).abs() < 1e-15 && (q - 0.657).abs() < 1e-15);
    }

    #[test]
    fn p_s_edge_cases() {
        let prm = p(1, 1, 3, 0.3);
        let prof = system_success_prob(&prm, Limited(5));
        assert_eq!(prof.p_s, prof.p);
        assert_eq!(
            system_success_prob(&p(40, 10, 120, 0.3), Limited(11)).p_s,
            0.0
        );
        assert!(system_success_prob(&p(40, 10, 120, 1e-9), Limited(12)).p_s > 1.0 - 1e-6);
        assert_eq!(
            system_success_prob(&p(40, 10, 120, 0.0), Limited(12)).p_s,
            1.0
        );
    }

    #[test]
    fn binomial_tail_matches_direct_sum() {
        let (n, pp) = (12usize, 0.37f64);
        for k in 0..=n {
            let mut direct = 0.0;
            for i in k..=n {
                let c: f64 = (0..i).map(|j| (n - j) as f64 / (i - j) as f64).product();
                direct += c * pp.powi(i as i32) * (1.0 - pp).powi((n - i) as i32);
            }
            assert!((binomial_tail_at_least(n, k, pp, 1.0 - pp) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn minimum_gamma_for_ninety_nine_percent() {
        let g = |k| min_gamma_for_success(&p(40, k, 120, 0.3), 0.99, 200).unwrap();
        assert!(g(30) <= 13);
        assert!(g(40) <= 13);
        assert!(g(10) > 13);
    }

    #[test]
    fn p_grows_with_k_and_p_s_falls_with_k_at_fixed_p() {
        let ks = [1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40];
        let ps: Vec<f64> = ks
            .iter()
            .map(|&k| worker_success_prob(&p(40, k, 120, 0.3), Limited(20)))
            .collect();
        assert!(ps.windows(2).all(|w| w[0] <= w[1]));
        let tails: Vec<f64> = (1..=40)
            .map(|k| binomial_tail_at_least(40, k, 0.8, 0.2))
            .collect();
        assert!(tails.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn censored_comm_time_failure_rate() {
        let prm = p(4, 1, 3, 0.3);
        let trials = 400_000;
        let mut rng = trial_rng(3, 0);
        let (mut fails, mut sum_at_min, mut count_at_min) = (0u64, 0.0, 0u64);
        for _ in 0..trials {
            match sample_censored_comm_time(&prm, Limited(5), &mut rng) {
                CensoredRuntime::Infinite => fails += 1,
                CensoredRuntime::Finite(t) => {
                    sum_at_min += t;
                    count_at_min += 1;
                }
            }
        }
        let est = EstimateWithCI::from_count(fails, trials, 3);
        assert!(est.covers(1.0 - 0.83692, 3.0), "{est:?}");
        // delivered times average E[C | C ≤ 5] / μ2
        let mean_c = (3.0 * 0.343 + 4.0 * 3.0 * 0.343 * 0.3 + 5.0 * 6.0 * 0.343 * 0.09) / 0.83692;
        let mean_t = sum_at_min / count_at_min as f64;
        assert!((mean_t - mean_c / 5.0).abs() < 0.005, "{mean_t}");
    }

    #[test]
    fn transmit_conditional_mean() {
        let mut rng = trial_rng(9, 0);
        let (mut sum, mut count) = (0.0, 0u64);
        for _ in 0..200_000 {
            let d = transmit(2, 0.4, 2.0, Some(10), &mut rng);
            if d.delivered && d.attempts == 4 {
                sum += d.time;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        assert!((mean - 2.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn cdf_bounded_by_p_s_and_monotone_in_gamma() {
        let prm = p(40, 20, 120, 0.3);
        let caps: Vec<TransmissionCap> = (6..=14).map(Limited).chain([Unlimited]).collect();
        let sim = CensoredRuntimes::simulate(&prm, &caps, 4_000, 17).unwrap();
        let mut prev = 0.0;
        for &cap in &caps {
            let est = sim.cdf(cap, 8.6).unwrap();
            assert!(est.mean >= prev);
            prev = est.mean;
            let ps = system_success_prob(&prm, cap).p_s;
            let frac = sim.success_fraction(cap).unwrap().mean;
            let se = (ps * (1.0 - ps) / 4_000.0).sqrt();
            assert!(
                (frac - ps).abs() <= 4.0 * se + 1e-3,
                "{cap}: {frac} vs {ps}"
            );
            assert!(est.mean <= sim.success_fraction(cap).unwrap().mean);
        }
    }

    #[test]
    fn quantile_conventions() {
        // n = k, γ = m/k, ε = 0.5: P_s = 0.125^3 ≈ 0.002
        let prm = SystemParams::new(3, 3, 9, 1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            latency_quantile(&prm, Limited(3), 0.05, 1000, 1).unwrap(),
            LatencyQuantile::Infeasible { .. }
        ));
        let prm = p(10, 5, 10, 0.2);
        let sim = CensoredRuntimes::simulate(&prm, &[Limited(4)], 2000, 5).unwrap();
        let col = sim.runtimes(Limited(4)).unwrap();
        assert_eq!(
            sim.quantile(Limited(4), 0.9999).unwrap().value(),
            Some(col[0])
        );
        let q = sim.quantile(Limited(4), 0.1).unwrap();
        if let LatencyQuantile::Feasible {
            value,
            lower,
            upper,
        } = q
        {
            assert_eq!(value, col[1799]);
            assert!(lower <= value && value <= upper);
            // the quantile is the smallest τ whose empirical CDF reaches 0.9
            assert!(sim.cdf(Limited(4), value).unwrap().mean >= 0.9);
            assert!(sim.cdf(Limited(4), col[1798]).unwrap().mean < 0.9 || col[1798] == value);
        } else {
            panic!("{q:?}");
        }
        assert!(sim.quantile(Limited(4), 1.0).is_err());
        assert!(sim.cdf(Limited(5), 1.0).is_err());
    }

    #[test]
    fn order_rank_guards_float_noise() {
        assert_eq!(order_rank(100_000, 0.97), 97_000);
        assert_eq!(order_rank(100, 1.0 - 0.03), 97);
        assert_eq!(order_rank(10, 0.0001), 1);
    }

    #[test]
    fn unlimited_matches_plain_runtime() {
        let prm = p(10, 5, 10, 0.3);
        let sim = CensoredRuntimes::simulate(&prm, &[Unlimited], 50_000, 2).unwrap();
        let a = sim.cdf(Unlimited, 1.5).unwrap();
        let plain = crate::montecarlo::map_trials(50_000, 77, |rng| {
            (crate::montecarlo::sample_runtime(&prm, rng) <= 1.5) as u8 as f64
        });
        let b = EstimateWithCI::from_samples(&plain, 77);
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * se, "{a:?} {b:?}");
    }

    #[test]
    fn upper_bound_dominates_estimate() {
        for k in [10, 20, 30, 40] {
            let prm = p(40, k, 120, 0.3);
            let est = runtime_cdf(&prm, Limited(13), 8.6, 2_000, 4).unwrap();
            assert!(est.mean <= runtime_cdf_upper_bound(&prm, 8.6) + 1e-12);
        }
        assert!((erlang_cdf(1, 2.0, 0.5) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((erlang_cdf(2, 1.0, 1.0) - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn simulation_is_scheduling_independent() {
        let prm = p(12, 4, 12, 0.2);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| CensoredRuntimes::simulate(&prm, &[Limited(5)], 3_000, 6).unwrap());
        let b =
            three.install(|| CensoredRuntimes::simulate(&prm, &[Limited(5)], 3_000, 6).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn grid_rows() {
        let rows = latency_prob_grid(
            &p(40, 10, 120, 0.3),
            &[10, 40],
            &[Limited(6), Limited(13)],
            8.6,
            500,
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].prob, 0.0);
        assert_eq!(rows[0].p_s, 0.0);
    }
}
