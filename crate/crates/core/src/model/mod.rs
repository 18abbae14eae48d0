//! Shared parameter types and the sampling contract used by every stochastic
//! engine.
//!
//! A job multiplies an `m × d` matrix by a vector. The matrix is split into
//! `k` row blocks, expanded to `n` coded blocks with an `(n, k)` MDS code, and
//! each worker computes `m / k` inner products before shipping them back one
//! packet per inner product over an erasure link.

pub mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuple `(n, k, m, μ1, μ2, ε)` that drives every engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of workers.
    pub n: usize,
    /// MDS code dimension: any `k` worker results decode the job.
    pub k: usize,
    /// Total number of inner products in the job.
    pub m: usize,
    /// Computation rate of a single inner product.
    pub mu1: f64,
    /// Transmission rate of a single packet.
    pub mu2: f64,
    /// Packet erasure probability.
    pub epsilon: f64,
}

impl SystemParams {
    pub fn new(n: usize, k: usize, m: usize, mu1: f64, mu2: f64, epsilon: f64) -> Result<Self> {
        let params = Self {
            n,
            k,
            m,
            mu1,
            mu2,
            epsilon,
        };
        validate(&params)?;
        Ok(params)
    }

    /// Inner products (and packets) handled by each worker, `m / k`.
    pub fn shard_len(&self) -> usize {
        self.m / self.k
    }

    /// Rate of a worker's total computation time, `(k/m)·μ1`.
    pub fn computation_rate(&self) -> f64 {
        self.mu1 * self.k as f64 / self.m as f64
    }

    /// Per-packet delivery rate once retransmissions are folded in, `(1−ε)·μ2`.
    pub fn effective_comm_rate(&self) -> f64 {
        (1.0 - self.epsilon) * self.mu2
    }

    /// Code rate `k / n`.
    pub fn code_rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.n, k, self.m, self.mu1, self.mu2, self.epsilon)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.k, self.m, self.mu1, self.mu2, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.m, self.mu1, self.mu2, epsilon)
    }

    pub fn workload(&self) -> Workload {
        Workload {
            n: self.n,
            m: self.m,
            mu1: self.mu1,
            mu2: self.mu2,
            epsilon: self.epsilon,
        }
    }
}

/// Checks every [`SystemParams`] invariant.
///
/// Shards must be whole: `k` has to divide `m` exactly, there is no rounding.
pub fn validate(params: &SystemParams) -> Result<()> {
    if params.n == 0 {
        return Err(Error::range("n", "need at least one worker"));
    }
    if params.k == 0 || params.k > params.n {
        return Err(Error::range(
            "k",
            format!("need 1 <= k <= n, got k = {}, n = {}", params.k, params.n),
        ));
    }
    if params.m == 0 {
        return Err(Error::range("m", "need at least one inner product"));
    }
    if params.m % params.k != 0 {
        return Err(Error::Divisibility {
            divisor: params.k,
            dividend: params.m,
            context: "k must divide m so every shard has m/k rows",
        });
    }
    check_rate("mu1", params.mu1)?;
    check_rate("mu2", params.mu2)?;
    check_erasure(params.epsilon)
}

pub(crate) fn check_rate(name: &'static str, rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::range(
            name,
            format!("rate must be positive and finite, got {rate}"),
        ))
    }
}

pub(crate) fn check_erasure(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::range(
            "epsilon",
            format!("need 0 <= epsilon < 1, got {epsilon}"),
        ))
    }
}

/// Erasure probability seen by an uncoded worker whose packets are `k/n` as
/// long as a coded worker's.
///
/// With a bit error rate `ε_b` and coded packet length `l`, the coded erasure
/// probability is `ε = 1 − (1−ε_b)^l` and the uncoded one is
/// `ε' = 1 − (1−ε_b)^{(k/n)·l}`. Substituting `(1−ε_b)^l = 1−ε` gives
/// `ε' = 1 − (1−ε)^{k/n}`, so neither `l` nor `ε_b` is needed.
pub fn uncoded_erasure(epsilon: f64, k: usize, n: usize) -> Result<f64> {
    check_erasure(epsilon)?;
    if k == 0 || k > n {
        return Err(Error::range(
            "k",
            format!("need 1 <= k <= n, got k = {k}, n = {n}"),
        ));
    }
    let shrink = k as f64 / n as f64;
    // -expm1(shrink * ln(1-ε)) keeps precision for tiny ε
    Ok(-(shrink * (-epsilon).ln_1p()).exp_m1())
}

/// A [`SystemParams`] with the code dimension left open, as searched over by
/// the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub n: usize,
    pub m: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub epsilon: f64,
}

impl Workload {
    pub fn with_k(&self, k: usize) -> Result<SystemParams> {
        SystemParams::new(self.n, k, self.m, self.mu1, self.mu2, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// Divisors of `m` that do not exceed `n`, ascending.
    pub fn divisor_ks(&self) -> Vec<usize> {
        (1..=self.n.min(self.m))
            .filter(|k| self.m % k == 0)
            .collect()
    }
}

/// Per-worker transmission cap `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissionCap {
    Limited(u32),
    Unlimited,
}

impl TransmissionCap {
    pub fn limit(self) -> Option<u32> {
        match self {
            TransmissionCap::Limited(g) => Some(g),
            TransmissionCap::Unlimited => None,
        }
    }

    pub fn allows(self, transmissions: u64) -> bool {
        match self {
            TransmissionCap::Limited(g) => transmissions <= u64::from(g),
            TransmissionCap::Unlimited => true,
        }
    }
}

impl std::fmt::Display for TransmissionCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransmissionCap::Limited(g) => write!(f, "{g}"),
            TransmissionCap::Unlimited => f.write_str("unlimited"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetransmissionPolicy {
    pub gamma: TransmissionCap,
    /// System bandwidth cap on `gamma`.
    pub gamma_t: Option<u32>,
}

impl RetransmissionPolicy {
    pub fn unlimited() -> Self {
        Self {
            gamma: TransmissionCap::Unlimited,
            gamma_t: None,
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if let TransmissionCap::Limited(g) = self.gamma {
            if (g as usize) < params.shard_len() {
                return Err(Error::range(
                    "gamma",
                    format!("gamma = {g} is below m/k = {}", params.shard_len()),
                ));
            }
            if let Some(gt) = self.gamma_t {
                if g > gt {
                    return Err(Error::range(
                        "gamma",
                        format!("gamma = {g} exceeds gamma_t = {gt}"),
                    ));
                }
            }
        }
        if self.gamma_t == Some(0) {
            return Err(Error::range("gamma_t", "must be positive"));
        }
        Ok(())
    }
}

/// Constraints shared by the allocation problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub alpha: f64,
    pub delta: f64,
    /// Latency budget; `f64::INFINITY` when unconstrained.
    pub tau_t: f64,
}

impl ConstraintSet {
    pub fn new(alpha: f64, delta: f64, tau_t: f64) -> Result<Self> {
        let c = Self {
            alpha,
            delta,
            tau_t,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::range(
                "alpha",
                format!("need 0 < alpha < 1, got {}", self.alpha),
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::range(
                "delta",
                format!("need 0 <= delta <= 1, got {}", self.delta),
            ));
        }
        if self.tau_t.is_nan() || self.tau_t <= 0.0 {
            return Err(Error::range(
                "tau_t",
                format!("need tau_t > 0, got {}", self.tau_t),
            ));
        }
        Ok(())
    }
}

/// A Monte Carlo point estimate with its normal-approximation standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// `sample_std / sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    /// Summarizes samples in slice order, so the result is a pure function of
    /// the sample vector.
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let trials = samples.len();
        let n = trials as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if trials > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            trials: trials as u64,
            seed,
        }
    }

    /// Estimate of a probability from a success count.
    pub fn from_count(successes: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let p = successes as f64 / n;
        // sample variance of the 0/1 indicators
        let var = if trials > 1 {
            p * (1.0 - p) * n / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean: p,
            std_error: (var / n).sqrt(),
            trials,
            seed,
        }
    }

    /// Whether `value` lies within `z` standard errors of the mean.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.std_error
    }
}

/// The JSON parameter document accepted by the CLI and the FFI layer.
///
/// Absent optional keys mean "unlimited" (`gamma`, `gamma_t`, `tau_t`) or
/// "unset" (`alpha`, `delta`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_t: Option<f64>,
}

impl ParamsDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn system(&self) -> Result<SystemParams> {
        SystemParams::new(self.n, self.k, self.m, self.mu1, self.mu2, self.epsilon)
    }

    pub fn policy(&self) -> RetransmissionPolicy {
        RetransmissionPolicy {
            gamma: self
                .gamma
                .map_or(TransmissionCap::Unlimited, TransmissionCap::Limited),
            gamma_t: self.gamma_t,
        }
    }

    /// Constraint set, or `None` when `alpha` or `delta` is unset.
    pub fn constraints(&self) -> Result<Option<ConstraintSet>> {
        match (self.alpha, self.delta) {
            (Some(alpha), Some(delta)) => {
                ConstraintSet::new(alpha, delta, self.tau_t.unwrap_or(f64::INFINITY)).map(Some)
            }
            _ => Ok(None),
        }
    }
}
