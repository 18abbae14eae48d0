//! Exhaustive search over code dimension `k` and transmission cap `γ`.
//!
//! Three allocation problems share one evaluation scheme:
//!
//! * `min_latency`: minimize `T^(α)` subject to `γ ≤ γ_t`, `P_s ≥ 1−δ`.
//! * `min_bandwidth`: minimize `γ` subject to `P_s ≥ 1−δ`, `T^(α) ≤ τ_t`.
//! * `max_success`: maximize `P_s` subject to `γ ≤ γ_t`, `T^(α) ≤ τ_t`.
//!
//! `P_s` is exact, so success constraints are decided without noise. Latency
//! enters through a Monte Carlo batch per `k` that is shared by every `γ` and
//! every problem. A probabilistic constraint passes only when its estimate
//! clears the threshold by `margin` standard errors; pairs that clear it
//! without that margin are reported as marginal and left out of the optimum.
//! Ties are broken lexicographically by `(objective, γ, k)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytic::{bounds_general_k, BoundPair};
use crate::error::{Error, Result};
use crate::model::{ConstraintSet, EstimateWithCI, SystemParams, TransmissionCap, Workload};
use crate::montecarlo::{estimate_expected_runtime, DEFAULT_TRIALS};
use crate::reliability::{
    runtime_cdf_upper_bound, system_success_prob, CensoredRuntimes, LatencyQuantile,
};

/// Caps are searched up to the first `γ` whose per-worker failure
/// probability drops below this when no bandwidth limit is given.
const SATURATION_FAILURE: f64 = 1e-12;

/// Candidate `(k, γ)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpace {
    /// Ascending; each divides `m` and is at most `n`.
    pub k_candidates: Vec<usize>,
    /// Largest `γ` considered; `None` searches each `k` up to saturation.
    pub gamma_ceiling: Option<u32>,
}

impl DesignSpace {
    /// All divisors of `m` not exceeding `n`.
    pub fn divisors(workload: &Workload) -> Self {
        Self {
            k_candidates: workload.divisor_ks(),
            gamma_ceiling: None,
        }
    }

    pub fn with_ks(workload: &Workload, ks: &[usize]) -> Result<Self> {
        let mut ks = ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let space = Self {
            k_candidates: ks,
            gamma_ceiling: None,
        };
        space.validate(workload)?;
        Ok(space)
    }

    pub fn with_gamma_ceiling(mut self, ceiling: Option<u32>) -> Self {
        self.gamma_ceiling = ceiling;
        self
    }

    pub fn validate(&self, workload: &Workload) -> Result<()> {
        if self.k_candidates.is_empty() {
            return Err(Error::range("k_candidates", "design space has no k"));
        }
        for &k in &self.k_candidates {
            workload.with_k(k)?;
        }
        Ok(())
    }

    /// Candidate caps `m/k ..= ceiling` for one `k`; empty when the ceiling
    /// is below `m/k`.
    pub fn gammas_for(&self, params: &SystemParams) -> Vec<u32> {
        let floor = params.shard_len() as u32;
        let ceiling = self
            .gamma_ceiling
            .unwrap_or_else(|| saturation_gamma(params));
        (floor..=ceiling).collect()
    }
}

/// Smallest `γ ≥ m/k` at which a worker fails with probability below
/// `1e-12`.
pub fn saturation_gamma(params: &SystemParams) -> u32 {
    let mut g = params.shard_len() as u32;
    while 1.0 - crate::reliability::worker_success_prob(params, TransmissionCap::Limited(g))
        > SATURATION_FAILURE
        && g < u32::MAX
    {
        g += 1;
    }
    g
}

/// Monte Carlo settings for the latency side of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub trials: u64,
    /// Shared by every `(ε, k, γ)` cell, which couples them.
    pub seed: u64,
    /// Standard errors an estimate must clear a threshold by.
    pub margin: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            margin: 2.0,
        }
    }
}

/// Outcome of a noisy constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Estimate meets the threshold but not by the required margin.
    Marginal,
    Fail,
    /// Rejected exactly, without simulation.
    Excluded,
}

fn verdict(est: &EstimateWithCI, threshold: f64, margin: f64) -> Verdict {
    if est.mean - margin * est.std_error >= threshold {
        Verdict::Pass
    } else if est.mean >= threshold {
        Verdict::Marginal
    } else {
        Verdict::Fail
    }
}

/// One evaluated `(k, γ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub k: usize,
    pub gamma: u32,
    pub p_s: f64,
    pub verdict: Verdict,
    /// Estimate behind the verdict: `T^(α)` for `min_latency`, otherwise
    /// `Pr[T′ ≤ τ_t]`.
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
}

/// Per-`ε` evaluation state: one censored simulation per `k`, created on
/// first use.
struct Evaluator<'a> {
    workload: Workload,
    space: &'a DesignSpace,
    settings: SearchSettings,
    sims: BTreeMap<usize, CensoredRuntimes>,
}

impl<'a> Evaluator<'a> {
    fn new(workload: Workload, space: &'a DesignSpace, settings: SearchSettings) -> Result<Self> {
        space.validate(&workload)?;
        Ok(Self {
            workload,
            space,
            settings,
            sims: BTreeMap::new(),
        })
    }

    fn params(&self, k: usize) -> Result<SystemParams> {
        self.workload.with_k(k)
    }

    fn pairs(&self, gamma_limit: Option<u32>) -> Result<Vec<(SystemParams, u32)>> {
        let mut out = Vec::new();
        for &k in &self.space.k_candidates {
            let params = self.params(k)?;
            for g in self.space.gammas_for(&params) {
                if within_limit(gamma_limit, g) {
                    out.push((params, g));
                }
            }
        }
        Ok(out)
    }

    fn sim(&mut self, params: &SystemParams) -> Result<&CensoredRuntimes> {
        let k = params.k;
        if !self.sims.contains_key(&k) {
            let caps: Vec<TransmissionCap> = self
                .space
                .gammas_for(params)
                .into_iter()
                .map(TransmissionCap::Limited)
                .collect();
            let sim = CensoredRuntimes::simulate(
                params,
                &caps,
                self.settings.trials,
                self.settings.seed,
            )?;
            self.sims.insert(k, sim);
        }
        Ok(&self.sims[&k])
    }

    /// `Pr[T′ ≤ τ] ≥ 1−α`, deciding exactly when an exact bound settles it.
    fn latency_check(
        &mut self,
        params: &SystemParams,
        gamma: u32,
        alpha: f64,
        tau: f64,
    ) -> Result<CandidateReport> {
        let cap = TransmissionCap::Limited(gamma);
        let p_s = system_success_prob(params, cap).p_s;
        let mut report = CandidateReport {
            k: params.k,
            gamma,
            p_s,
            verdict: Verdict::Excluded,
            estimate: None,
            std_error: None,
        };
        // Pr[T′ ≤ τ] ≤ min(P_s, computation/first-attempt bound)
        if p_s < 1.0 - alpha || runtime_cdf_upper_bound(params, tau) < 1.0 - alpha {
            return Ok(report);
        }
        let margin = self.settings.margin;
        let est = self.sim(params)?.cdf(cap, tau)?;
        report.verdict = verdict(&est, 1.0 - alpha, margin);
        report.estimate = Some(est.mean);
        report.std_error = Some(est.std_error);
        Ok(report)
    }
}

fn within_limit(limit: Option<u32>, g: u32) -> bool {
    match limit {
        Some(limit) => g <= limit,
        None => true,
    }
}

/// The optimizing pair of a problem, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub k: usize,
    pub gamma: u32,
    pub p_s: f64,
    /// `T^(α)` at the pair, with its order-statistic bracket.
    pub t_alpha: Option<f64>,
    pub t_alpha_lower: Option<f64>,
    pub t_alpha_upper: Option<f64>,
    /// `Pr[T′ ≤ τ_t]` at the pair when a latency budget applies.
    pub latency_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub optimum: Option<Choice>,
    pub candidates: Vec<CandidateReport>,
}

impl SearchOutcome {
    pub fn is_feasible(&self) -> bool {
        self.optimum.is_some()
    }

    pub fn has_marginal(&self) -> bool {
        self.candidates
            .iter()
            .any(|c| c.verdict == Verdict::Marginal)
    }
}

fn quantile_choice(
    sim: &CensoredRuntimes,
    params: &SystemParams,
    gamma: u32,
    alpha: f64,
) -> Result<Choice> {
    let cap = TransmissionCap::Limited(gamma);
    let q = sim.quantile(cap, alpha)?;
    let (t, lo, hi) = match q {
        LatencyQuantile::Feasible {
            value,
            lower,
            upper,
        } => (Some(value), Some(lower), Some(upper)),
        LatencyQuantile::Infeasible { .. } => (None, None, None),
    };
    Ok(Choice {
        k: params.k,
        gamma,
        p_s: system_success_prob(params, cap).p_s,
        t_alpha: t,
        t_alpha_lower: lo,
        t_alpha_upper: hi,
        latency_prob: None,
    })
}

fn min_latency_in(
    ev: &mut Evaluator<'_>,
    gamma_t: u32,
    delta: f64,
    alpha: f64,
) -> Result<SearchOutcome> {
    let mut candidates = Vec::new();
    let mut best: Option<(f64, u32, usize, Choice)> = None;
    for (params, g) in ev.pairs(Some(gamma_t))? {
        let cap = TransmissionCap::Limited(g);
        let p_s = system_success_prob(&params, cap).p_s;
        let mut report = CandidateReport {
            k: params.k,
            gamma: g,
            p_s,
            verdict: Verdict::Excluded,
            estimate: None,
            std_error: None,
        };
        // T^(α) is finite only if P_s ≥ 1−α
        if p_s < 1.0 - delta || p_s < 1.0 - alpha {
            candidates.push(report);
            continue;
        }
        let margin = ev.settings.margin;
        let sim = ev.sim(&params)?;
        let finished = sim.success_fraction(cap)?;
        report.verdict = verdict(&finished, 1.0 - alpha, margin);
        let choice = quantile_choice(sim, &params, g, alpha)?;
        if choice.t_alpha.is_none() {
            report.verdict = Verdict::Fail;
        }
        report.estimate = choice.t_alpha;
        if report.verdict == Verdict::Pass {
            let t = choice.t_alpha.expect("feasible quantile");
            let key = (t, g, params.k);
            if beats(best.as_ref(), |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some((t, g, params.k, choice));
            }
        }
        candidates.push(report);
    }
    Ok(SearchOutcome {
        optimum: best.map(|b| b.3),
        candidates,
    })
}

/// Whether a candidate replaces the incumbent (always, when there is none).
fn beats<T>(incumbent: Option<&T>, better: impl FnOnce(&T) -> bool) -> bool {
    match incumbent {
        Some(b) => better(b),
        None => true,
    }
}

/// Minimizes `T^(α)` over pairs with `γ ≤ γ_t` and exact `P_s ≥ 1−δ`.
pub fn min_latency(
    workload: &Workload,
    space: &DesignSpace,
    gamma_t: u32,
    delta: f64,
    alpha: f64,
    settings: &SearchSettings,
) -> Result<SearchOutcome> {
    ConstraintSet::new(alpha, delta, f64::INFINITY)?;
    let mut ev = Evaluator::new(*workload, space, *settings)?;
    min_latency_in(&mut ev, gamma_t, delta, alpha)
}

fn min_bandwidth_in(
    ev: &mut Evaluator<'_>,
    gamma_limit: Option<u32>,
    delta: f64,
    alpha: f64,
    tau_t: f64,
) -> Result<SearchOutcome> {
    let mut candidates = Vec::new();
    let mut best: Option<(u32, usize, Choice)> = None;
    for (params, g) in ev.pairs(gamma_limit)? {
        if best.as_ref().is_some_and(|b| g > b.0) {
            // cannot beat the incumbent
            continue;
        }
        let p_s = system_success_prob(&params, TransmissionCap::Limited(g)).p_s;
        if p_s < 1.0 - delta {
            candidates.push(CandidateReport {
                k: params.k,
                gamma: g,
                p_s,
                verdict: Verdict::Excluded,
                estimate: None,
                std_error: None,
            });
            continue;
        }
        let report = ev.latency_check(&params, g, alpha, tau_t)?;
        if report.verdict == Verdict::Pass && beats(best.as_ref(), |b| (g, params.k) < (b.0, b.1)) {
            let sim = ev.sim(&params)?;
            let mut choice = quantile_choice(sim, &params, g, alpha)?;
            choice.latency_prob = report.estimate;
            best = Some((g, params.k, choice));
        }
        candidates.push(report);
    }
    Ok(SearchOutcome {
        optimum: best.map(|b| b.2),
        candidates,
    })
}

/// Minimizes `γ` subject to exact `P_s ≥ 1−δ` and `Pr[T′ ≤ τ_t] ≥ 1−α`,
/// which is the same event as `T^(α) ≤ τ_t`.
pub fn min_bandwidth(
    workload: &Workload,
    space: &DesignSpace,
    delta: f64,
    alpha: f64,
    tau_t: f64,
    settings: &SearchSettings,
) -> Result<SearchOutcome> {
    ConstraintSet::new(alpha, delta, tau_t)?;
    let mut ev = Evaluator::new(*workload, space, *settings)?;
    min_bandwidth_in(&mut ev, None, delta, alpha, tau_t)
}

fn max_success_in(
    ev: &mut Evaluator<'_>,
    gamma_t: u32,
    alpha: f64,
    tau_t: f64,
) -> Result<SearchOutcome> {
    let mut candidates = Vec::new();
    let mut best: Option<(f64, u32, usize, Choice)> = None;
    for (params, g) in ev.pairs(Some(gamma_t))? {
        let report = ev.latency_check(&params, g, alpha, tau_t)?;
        if report.verdict == Verdict::Pass {
            let p_s = report.p_s;
            // maximize P_s, then smaller γ, then smaller k
            if beats(best.as_ref(), |b| (-p_s, g, params.k) < (-b.0, b.1, b.2)) {
                let sim = ev.sim(&params)?;
                let mut choice = quantile_choice(sim, &params, g, alpha)?;
                choice.latency_prob = report.estimate;
                best = Some((p_s, g, params.k, choice));
            }
        }
        candidates.push(report);
    }
    Ok(SearchOutcome {
        optimum: best.map(|b| b.3),
        candidates,
    })
}

/// Maximizes exact `P_s` subject to `γ ≤ γ_t` and `Pr[T′ ≤ τ_t] ≥ 1−α`.
/// Without a qualifying pair the optimum is absent and `P_s` counts as 0.
pub fn max_success(
    workload: &Workload,
    space: &DesignSpace,
    gamma_t: u32,
    alpha: f64,
    tau_t: f64,
    settings: &SearchSettings,
) -> Result<SearchOutcome> {
    ConstraintSet::new(alpha, 0.0, tau_t)?;
    let mut ev = Evaluator::new(*workload, space, *settings)?;
    max_success_in(&mut ev, gamma_t, alpha, tau_t)
}

/// Code rate minimizing the general-`k` upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDesign {
    pub r_star: f64,
    pub k_star: usize,
    pub u_min: f64,
    /// `(k, bounds)` for every candidate, ascending in `k`.
    pub bounds: Vec<(usize, BoundPair)>,
}

/// Evaluates the upper bound at every candidate `k` and returns the
/// minimizer (smaller `k` on ties) with `R* = k*/n`.
pub fn optimal_rate_upper_bound(workload: &Workload, space: &DesignSpace) -> Result<RateDesign> {
    space.validate(workload)?;
    let bounds = space
        .k_candidates
        .iter()
        .map(|&k| Ok((k, bounds_general_k(&workload.with_k(k)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let (k_star, best) = bounds
        .iter()
        .fold(None::<(usize, BoundPair)>, |acc, &(k, b)| match acc {
            Some((_, a)) if a.upper <= b.upper => acc,
            _ => Some((k, b)),
        })
        .expect("non-empty design space");
    Ok(RateDesign {
        r_star: k_star as f64 / workload.n as f64,
        k_star,
        u_min: best.upper,
        bounds,
    })
}

/// Monte Carlo `E[T]` per candidate, for checking a rate design.
pub fn achievable_runtimes(
    workload: &Workload,
    space: &DesignSpace,
    trials: u64,
    seed: u64,
) -> Result<Vec<(usize, EstimateWithCI)>> {
    space
        .k_candidates
        .iter()
        .map(|&k| {
            Ok((
                k,
                estimate_expected_runtime(&workload.with_k(k)?, trials, seed)?,
            ))
        })
        .collect()
}

/// One point of an achievable curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievablePoint {
    pub epsilon: f64,
    pub k_star: Option<usize>,
    pub gamma_star: Option<u32>,
    /// `T^(α)` at the chosen pair; `None` when infeasible.
    pub t_alpha: Option<f64>,
    /// Exact success probability at the chosen pair; 0 when infeasible.
    pub p_s: f64,
    /// Some pair met a noisy constraint without the required margin.
    pub marginal: bool,
}

impl AchievablePoint {
    fn from_outcome(epsilon: f64, outcome: &SearchOutcome) -> Self {
        match outcome.optimum {
            Some(c) => Self {
                epsilon,
                k_star: Some(c.k),
                gamma_star: Some(c.gamma),
                t_alpha: c.t_alpha,
                p_s: c.p_s,
                marginal: outcome.has_marginal(),
            },
            None => Self {
                epsilon,
                k_star: None,
                gamma_star: None,
                t_alpha: None,
                p_s: 0.0,
                marginal: outcome.has_marginal(),
            },
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.k_star.is_some()
    }
}

/// Optimal points of the three problems at one erasure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub min_latency: AchievablePoint,
    pub min_bandwidth: AchievablePoint,
    pub max_success: AchievablePoint,
}

/// Constraints of a sweep. `gamma_t` also bounds the bandwidth search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConstraints {
    pub gamma_t: u32,
    pub alpha: f64,
    pub delta: f64,
    pub tau_t: f64,
}

/// Solves all three problems at every `ε` in the grid. Each `ε` runs one
/// simulation per `k`, with caps up to `γ_t`, shared by the three problems.
pub fn sweep_epsilon(
    base: &Workload,
    space: &DesignSpace,
    constraints: &SweepConstraints,
    epsilon_grid: &[f64],
    settings: &SearchSettings,
) -> Result<Vec<SweepPoint>> {
    ConstraintSet::new(constraints.alpha, constraints.delta, constraints.tau_t)?;
    let space = space.clone().with_gamma_ceiling(Some(constraints.gamma_t));
    epsilon_grid
        .iter()
        .map(|&eps| {
            let workload = base.with_epsilon(eps);
            crate::model::check_erasure(eps)?;
            let mut ev = Evaluator::new(workload, &space, *settings)?;
            let c = constraints;
            let a = min_latency_in(&mut ev, c.gamma_t, c.delta, c.alpha)?;
            let b = min_bandwidth_in(&mut ev, Some(c.gamma_t), c.delta, c.alpha, c.tau_t)?;
            let s = max_success_in(&mut ev, c.gamma_t, c.alpha, c.tau_t)?;
            Ok(SweepPoint {
                epsilon: eps,
                min_latency: AchievablePoint::from_outcome(eps, &a),
                min_bandwidth: AchievablePoint::from_outcome(eps, &b),
                max_success: AchievablePoint::from_outcome(eps, &s),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct LatencyCurveRow {
    epsilon: f64,
    t_alpha: Option<f64>,
    k_star: Option<usize>,
    gamma_star: Option<u32>,
    feasible: bool,
}

#[derive(Serialize)]
struct BandwidthCurveRow {
    epsilon: f64,
    gamma_star: Option<u32>,
    k_star: Option<usize>,
}

#[derive(Serialize)]
struct SuccessCurveRow {
    epsilon: f64,
    p_s: f64,
    k_star: Option<usize>,
    gamma_star: Option<u32>,
}

/// `epsilon,t_alpha,k_star,gamma_star,feasible`; empty cells when infeasible.
pub fn write_latency_curve<W: std::io::Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        let a = &p.min_latency;
        w.serialize(LatencyCurveRow {
            epsilon: p.epsilon,
            t_alpha: a.t_alpha,
            k_star: a.k_star,
            gamma_star: a.gamma_star,
            feasible: a.is_feasible(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `epsilon,gamma_star,k_star`.
pub fn write_bandwidth_curve<W: std::io::Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        let b = &p.min_bandwidth;
        w.serialize(BandwidthCurveRow {
            epsilon: p.epsilon,
            gamma_star: b.gamma_star,
            k_star: b.k_star,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `epsilon,p_s,k_star,gamma_star`.
pub fn write_success_curve<W: std::io::Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        let c = &p.max_success;
        w.serialize(SuccessCurveRow {
            epsilon: p.epsilon,
            p_s: c.p_s,
            k_star: c.k_star,
            gamma_star: c.gamma_star,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(eps: f64) -> Workload {
        SystemParams::new(40, 10, 120, 1.0, 5.0, eps)
            .unwrap()
            .workload()
    }

    fn settings(trials: u64) -> SearchSettings {
        SearchSettings {
            trials,
            seed: 7,
            margin: 2.0,
        }
    }

    #[test]
    fn divisor_space_and_gammas() {
        let space = DesignSpace::divisors(&wl(0.3));
        assert_eq!(
            space.k_candidates,
            vec![1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40]
        );
        let capped = space.clone().with_gamma_ceiling(Some(7));
        assert_eq!(capped.gammas_for(&wl(0.3).with_k(20).unwrap()), vec![6, 7]);
        assert!(capped.gammas_for(&wl(0.3).with_k(10).unwrap()).is_empty());
        assert!(DesignSpace::with_ks(&wl(0.3), &[7]).is_err());
        let prm = wl(0.3).with_k(40).unwrap();
        let g = saturation_gamma(&prm);
        assert!(
            1.0 - crate::reliability::worker_success_prob(&prm, TransmissionCap::Limited(g))
                <= 1e-12
        );
        assert!(
            1.0 - crate::reliability::worker_success_prob(&prm, TransmissionCap::Limited(g - 1))
                > 1e-12
        );
    }

    #[test]
    fn tiny_bandwidth_is_infeasible() {
        let space = DesignSpace::divisors(&wl(0.3));
        let out = min_latency(&wl(0.3), &space, 2, 0.01, 0.03, &settings(1000)).unwrap();
        assert!(!out.is_feasible());
        assert!(out.candidates.is_empty());
    }

    #[test]
    fn error_free_bandwidth_is_shard_length() {
        let space = DesignSpace::with_ks(&wl(0.0), &[10, 20, 30, 40]).unwrap();
        let out = min_bandwidth(&wl(0.0), &space, 1.0, 0.5, f64::INFINITY, &settings(500)).unwrap();
        let c = out.optimum.unwrap();
        assert_eq!((c.k, c.gamma), (40, 3));
    }

    #[test]
    fn rate_design_singleton_and_shift() {
        let w = SystemParams::new(100, 100, 500, 1.0, 10.0, 0.0)
            .unwrap()
            .workload();
        let only = DesignSpace::with_ks(&w, &[100]).unwrap();
        let d = optimal_rate_upper_bound(&w, &only).unwrap();
        assert_eq!((d.k_star, d.r_star), (100, 1.0));

        let space = DesignSpace::with_ks(&w, &[20, 25, 50, 100]).unwrap();
        let clean = optimal_rate_upper_bound(&w, &space).unwrap();
        let noisy = optimal_rate_upper_bound(&w.with_epsilon(0.5), &space).unwrap();
        assert!(noisy.r_star <= clean.r_star);
        assert!(clean.bounds.iter().all(|(_, b)| b.upper >= clean.u_min));
    }

    #[test]
    fn verdict_margins() {
        let est = |mean: f64, se: f64| EstimateWithCI {
            mean,
            std_error: se,
            trials: 100,
            seed: 0,
        };
        assert_eq!(verdict(&est(0.99, 0.004), 0.97, 2.0), Verdict::Pass);
        assert_eq!(verdict(&est(0.975, 0.004), 0.97, 2.0), Verdict::Marginal);
        assert_eq!(verdict(&est(0.96, 0.004), 0.97, 2.0), Verdict::Fail);
        assert_eq!(verdict(&est(0.97, 0.004), 0.97, 0.0), Verdict::Pass);
    }

    #[test]
    fn curves_csv_headers() {
        let points = sweep_epsilon(
            &wl(0.0),
            &DesignSpace::with_ks(&wl(0.0), &[20, 40]).unwrap(),
            &SweepConstraints {
                gamma_t: 7,
                alpha: 0.05,
                delta: 0.01,
                tau_t: 10.0,
            },
            &[0.0, 0.5],
            &settings(500),
        )
        .unwrap();
        let mut a = Vec::new();
        write_latency_curve(&mut a, &points).unwrap();
        let a = String::from_utf8(a).unwrap();
        assert!(a.starts_with("epsilon,t_alpha,k_star,gamma_star,feasible\n"));
        assert!(a.lines().nth(2).unwrap().ends_with(",,,false"));
        let mut b = Vec::new();
        write_bandwidth_curve(&mut b, &points).unwrap();
        assert!(String::from_utf8(b)
            .unwrap()
            .starts_with("epsilon,gamma_star,k_star\n"));
        let mut c = Vec::new();
        write_success_curve(&mut c, &points).unwrap();
        let c = String::from_utf8(c).unwrap();
        assert!(c.starts_with("epsilon,p_s,k_star,gamma_star\n"));
        assert!(c.lines().nth(2).unwrap().starts_with("0.5,0.0,,"));
        // error-free point: γ* = m/k* and P_s = 1
        let b0 = points[0].min_bandwidth;
        assert_eq!(b0.gamma_star.unwrap() as usize, 120 / b0.k_star.unwrap());
        assert_eq!(points[0].max_success.p_s, 1.0);
    }
}
