//! Seeded Monte Carlo for the unlimited-retransmission run-time.
//!
//! Each worker computes for `X_i ~ Exp((k/m)·μ1)` and then ships `m/k`
//! packets; packet `r` needs `N_r ~ Geometric(1−ε)` attempts of
//! `Exp(μ2)` duration each. The job ends at the k-th smallest `X_i + S_i`.
//! Communication is sampled from those retransmission counts rather than
//! from the closed-form law of `S_i`, so the closed form stays testable.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::order::kth_smallest_in_place;
use crate::error::{Error, Result};
use crate::model::sampling::{erlang_unit, exp_unit, trial_rng, TransmissionCounter};
use crate::model::{uncoded_erasure, EstimateWithCI, SystemParams};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const MIN_TRIALS: u64 = 100;

/// How a worker's communication time is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommSampling {
    /// Geometric attempt counts per packet, then the sum of that many
    /// exponential durations.
    #[default]
    Structural,
    /// Shortcut: `Erlang(m/k, (1−ε)·μ2)` directly.
    Shortcut,
}

/// Per-worker times of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerTimes {
    pub compute: Vec<f64>,
    pub comm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Always finite with unlimited retransmissions.
    pub runtime: f64,
    pub per_worker: Option<Vec<(f64, f64)>>,
}

/// Samples workers' computation and communication times.
///
/// Precomputes the per-packet laws once; reuse it across trials.
#[derive(Debug)]
pub struct WorkerSampler {
    n: usize,
    comp_rate: f64,
    comm_rate: f64,
    packets: u64,
    mode: CommSampling,
    counter: TransmissionCounterHandle,
}

// TransmissionCounter holds rand_distr types without Debug
struct TransmissionCounterHandle(TransmissionCounter);

impl std::fmt::Debug for TransmissionCounterHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TransmissionCounter")
    }
}

impl WorkerSampler {
    pub fn new(params: &SystemParams, mode: CommSampling) -> Self {
        Self::from_rates(
            params.n,
            params.computation_rate(),
            params.mu2,
            params.shard_len() as u64,
            params.epsilon,
            mode,
        )
    }

    fn from_rates(
        n: usize,
        comp_rate: f64,
        mu2: f64,
        packets: u64,
        epsilon: f64,
        mode: CommSampling,
    ) -> Self {
        let comm_rate = match mode {
            CommSampling::Structural => mu2,
            CommSampling::Shortcut => (1.0 - epsilon) * mu2,
        };
        Self {
            n,
            comp_rate,
            comm_rate,
            packets,
            mode,
            counter: TransmissionCounterHandle(TransmissionCounter::new(packets, 1.0 - epsilon)),
        }
    }

    /// Communication time of one worker.
    pub fn comm_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let attempts = match self.mode {
            CommSampling::Structural => self.counter.0.sample(rng),
            CommSampling::Shortcut => self.packets,
        };
        erlang_unit(attempts, rng) / self.comm_rate
    }

    pub fn compute_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        exp_unit(rng) / self.comp_rate
    }

    /// Fills `compute` and `comm` with one draw per worker.
    pub fn fill<R: Rng + ?Sized>(&self, compute: &mut [f64], comm: &mut [f64], rng: &mut R) {
        for (x, s) in compute.iter_mut().zip(comm.iter_mut()) {
            *x = self.compute_time(rng);
            *s = self.comm_time(rng);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WorkerTimes {
        let mut compute = vec![0.0; self.n];
        let mut comm = vec![0.0; self.n];
        self.fill(&mut compute, &mut comm, rng);
        WorkerTimes { compute, comm }
    }
}

/// `X_i ~ Exp((k/m)·μ1)` and structurally sampled `S_i` for every worker.
pub fn sample_worker_times<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> WorkerTimes {
    WorkerSampler::new(params, CommSampling::Structural).sample(rng)
}

/// One draw of `T = kth-min_i (X_i + S_i)`.
pub fn sample_runtime<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> f64 {
    run_trial(params, CommSampling::Structural, false, rng).runtime
}

pub fn run_trial<R: Rng + ?Sized>(
    params: &SystemParams,
    mode: CommSampling,
    keep_workers: bool,
    rng: &mut R,
) -> TrialOutcome {
    let times = WorkerSampler::new(params, mode).sample(rng);
    let runtime = crate::analytic::kth_min_sum(&times.compute, &times.comm, params.k)
        .expect("validated parameters give 1 <= k <= n");
    TrialOutcome {
        runtime,
        per_worker: keep_workers.then(|| times.compute.into_iter().zip(times.comm).collect()),
    }
}

/// Runs `trials` independent trials and returns their values in trial order.
///
/// Trial `t` sees `trial_rng(seed, t)`, so the vector does not depend on how
/// rayon schedules the work.
pub fn map_trials<F>(trials: u64, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut crate::model::sampling::TrialRng) -> f64 + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(seed, t)))
        .collect()
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::range(
            "trials",
            format!("need at least {MIN_TRIALS}, got {trials}"),
        ));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[T]` with structural communication sampling.
pub fn estimate_expected_runtime(
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    estimate_expected_runtime_with(params, trials, seed, CommSampling::Structural)
}

pub fn estimate_expected_runtime_with(
    params: &SystemParams,
    trials: u64,
    seed: u64,
    mode: CommSampling,
) -> Result<EstimateWithCI> {
    crate::model::validate(params)?;
    check_trials(trials)?;
    let sampler = WorkerSampler::new(params, mode);
    let k = params.k;
    let n = params.n;
    let values = map_trials(trials, seed, |rng| {
        let mut compute = vec![0.0; n];
        let mut comm = vec![0.0; n];
        sampler.fill(&mut compute, &mut comm, rng);
        for (c, s) in compute.iter_mut().zip(&comm) {
            *c += s;
        }
        kth_smallest_in_place(&mut compute, k)
    });
    Ok(EstimateWithCI::from_samples(&values, seed))
}

/// Sampler for the uncoded baseline: the job is split evenly across all `n`
/// workers and finishes when the slowest one delivers.
///
/// With `k = m`, each worker holds `k/n` of one inner product: rates scale by
/// `n/k` and packets see the shorter-packet erasure [`uncoded_erasure`].
/// Otherwise each worker holds `m/n` whole inner products (requires `n | m`).
pub fn uncoded_sampler(params: &SystemParams, mode: CommSampling) -> Result<WorkerSampler> {
    crate::model::validate(params)?;
    let n = params.n;
    if params.k == params.m {
        let speedup = n as f64 / params.k as f64;
        let eps_short = uncoded_erasure(params.epsilon, params.k, n)?;
        Ok(WorkerSampler::from_rates(
            n,
            speedup * params.mu1,
            speedup * params.mu2,
            1,
            eps_short,
            mode,
        ))
    } else {
        if params.m % n != 0 {
            return Err(Error::Divisibility {
                divisor: n,
                dividend: params.m,
                context: "uncoded split of m inner products over n workers",
            });
        }
        let share = params.m / n;
        Ok(WorkerSampler::from_rates(
            n,
            params.mu1 / share as f64,
            params.mu2,
            share as u64,
            params.epsilon,
            mode,
        ))
    }
}

/// Monte Carlo estimate of `E[max_i (X_i + S_i)]` for the uncoded baseline.
pub fn estimate_uncoded_runtime(
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_trials(trials)?;
    let sampler = uncoded_sampler(params, CommSampling::Structural)?;
    let values = map_trials(trials, seed, |rng| {
        (0..params.n)
            .map(|_| sampler.compute_time(rng) + sampler.comm_time(rng))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(EstimateWithCI::from_samples(&values, seed))
}

/// Kolmogorov–Smirnov distance between `samples` and `Exp(rate)`.
pub fn ks_statistic_exponential(samples: &[f64], rate: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = -(-rate * x).exp_m1();
            let above = (i + 1) as f64 / n - cdf;
            let below = cdf - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level `alpha` (two-sided).
pub fn ks_critical_value(samples: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (samples as f64).sqrt()
}

/// Row of the Monte Carlo CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub param_hash: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
}

impl EstimateRow {
    pub fn new(params: &SystemParams, estimate: &EstimateWithCI) -> Self {
        Self {
            param_hash: param_hash(params),
            n: params.n,
            k: params.k,
            m: params.m,
            mu1: params.mu1,
            mu2: params.mu2,
            epsilon: params.epsilon,
            trials: estimate.trials,
            seed: estimate.seed,
            mean: estimate.mean,
            std_error: estimate.std_error,
        }
    }
}

/// First 16 hex digits of SHA-256 over the canonical parameter string.
pub fn param_hash(params: &SystemParams) -> String {
    let canonical = format!(
        "n={};k={};m={};mu1={:?};mu2={:?};epsilon={:?}",
        params.n, params.k, params.m, params.mu1, params.mu2, params.epsilon
    );
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_estimate_rows<W: std::io::Write>(out: W, rows: &[EstimateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
