//! Cross-checks of the analytic engines against each other and against
//! simulation.
//!
//! Every check is deterministic for a given seed. Statistical checks use a
//! 4-standard-error band (family-wise over the whole suite), except the KS
//! test, which uses its own level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::erlang::FALLBACK_TRIALS;
use crate::analytic::{
    bounds_general_k, bounds_max_k, kth_min_sum, prop1_lower, prop2_upper, shared_order_stat_means,
    OrderStatMethod,
};
use crate::ctmc;
use crate::error::Result;
use crate::model::sampling::trial_rng;
use crate::model::{SystemParams, TransmissionCap};
use crate::montecarlo::{
    estimate_expected_runtime, ks_critical_value, ks_statistic_exponential, map_trials,
    CommSampling, WorkerSampler,
};
use crate::reliability::{system_success_prob, CensoredRuntimes};

pub const DEFAULT_VALIDATION_TRIALS: u64 = 20_000;
const Z: f64 = 4.0;
const KS_LEVEL: f64 = 0.01;
const BATTERY_SIZE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSettings {
    pub trials: u64,
    pub seed: u64,
    /// Deliberately wrong engines: the chain and the samplers ignore
    /// erasures while the bounds keep them. The suite must catch this.
    pub inject_fault: bool,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self {
            trials: DEFAULT_VALIDATION_TRIALS,
            seed: 0,
            inject_fault: false,
        }
    }
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub case: String,
    pub observed: f64,
    pub expected_low: f64,
    pub expected_high: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub settings: ValidationSettings,
    pub results: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.results {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Pass/fail counts per check name, in suite order.
    pub fn summary(&self) -> Vec<(String, usize, usize)> {
        let mut out: Vec<(String, usize, usize)> = Vec::new();
        for r in &self.results {
            let idx = match out.iter().position(|(c, _, _)| *c == r.check) {
                Some(i) => i,
                None => {
                    out.push((r.check.clone(), 0, 0));
                    out.len() - 1
                }
            };
            if r.passed {
                out[idx].1 += 1;
            } else {
                out[idx].2 += 1;
            }
        }
        out
    }
}

fn case(p: &SystemParams) -> String {
    format!(
        "n={} k={} m={} mu1={} mu2={} eps={}",
        p.n, p.k, p.m, p.mu1, p.mu2, p.epsilon
    )
}

fn result(check: &str, case: String, observed: f64, low: f64, high: f64) -> CheckResult {
    CheckResult {
        check: check.into(),
        case,
        observed,
        expected_low: low,
        expected_high: high,
        passed: low <= observed && observed <= high,
    }
}

struct Suite {
    settings: ValidationSettings,
    results: Vec<CheckResult>,
}

impl Suite {
    /// What the engines simulate or solve for `p`.
    fn engine(&self, p: &SystemParams) -> SystemParams {
        if self.settings.inject_fault {
            SystemParams { epsilon: 0.0, ..*p }
        } else {
            *p
        }
    }

    fn max_k_grid() -> Result<Vec<SystemParams>> {
        let mut out = Vec::new();
        for &(n, k) in &[(4, 2), (10, 5), (20, 10), (30, 30)] {
            for &(mu1, mu2) in &[(1.0, 1.0), (10.0, 1.0), (1.0, 10.0)] {
                for &eps in &[0.0, 0.3, 0.6] {
                    out.push(SystemParams::new(n, k, k, mu1, mu2, eps)?);
                }
            }
        }
        Ok(out)
    }

    fn chain_vs_monte_carlo(&mut self) -> Result<()> {
        for p in Self::max_k_grid()? {
            let e = self.engine(&p);
            let exact = ctmc::expected_runtime(&e)?;
            let mc = estimate_expected_runtime(&e, self.settings.trials, self.settings.seed)?;
            let band = Z * mc.std_error;
            self.results.push(result(
                "chain_vs_monte_carlo",
                case(&p),
                mc.mean,
                exact - band,
                exact + band,
            ));
        }
        Ok(())
    }

    fn chain_within_bounds(&mut self) -> Result<()> {
        for p in Self::max_k_grid()? {
            let exact = ctmc::expected_runtime(&self.engine(&p))?;
            let b = bounds_max_k(&p)?;
            let slack = 1e-9 * b.upper;
            self.results.push(result(
                "chain_within_bounds",
                case(&p),
                exact,
                b.lower - slack,
                b.upper + slack,
            ));
        }
        Ok(())
    }

    /// At `k = m` a worker ships one packet, and its communication time is
    /// exponential with the erasure-thinned rate.
    fn communication_law(&mut self) -> Result<()> {
        let n = self.settings.trials.max(100_000);
        for &eps in &[0.2, 0.5] {
            for &mu2 in &[1.0, 5.0] {
                let p = SystemParams::new(1, 1, 1, 1.0, mu2, eps)?;
                let sampler = WorkerSampler::new(&self.engine(&p), CommSampling::Structural);
                let samples = map_trials(n, self.settings.seed, |rng| sampler.comm_time(rng));
                let d = ks_statistic_exponential(&samples, (1.0 - eps) * mu2);
                self.results.push(result(
                    "communication_law_ks",
                    format!("eps={eps} mu2={mu2} samples={n}"),
                    d,
                    0.0,
                    ks_critical_value(samples.len(), KS_LEVEL),
                ));
            }
        }
        Ok(())
    }

    /// Random instances of the rank inequalities on the k-th smallest sum.
    fn rank_inequalities(&mut self) -> Result<()> {
        let seed = self.settings.seed;
        let mut worst_lower = f64::NEG_INFINITY;
        let mut worst_upper = f64::NEG_INFINITY;
        for t in 0..BATTERY_SIZE {
            let mut rng = trial_rng(seed ^ 0x5eed_ba77, t);
            let n = rng.random_range(1..=12usize);
            let k = rng.random_range(1..=n);
            let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let exact = kth_min_sum(&a, &b, k)?;
            worst_lower = worst_lower.max(prop1_lower(&a, &b, k)? - exact);
            worst_upper = worst_upper.max(exact - prop2_upper(&a, &b, k)?);
        }
        let case = format!("{BATTERY_SIZE} random instances");
        self.results.push(result(
            "rank_lower_inequality",
            case.clone(),
            worst_lower,
            f64::NEG_INFINITY,
            1e-12,
        ));
        self.results.push(result(
            "rank_upper_inequality",
            case,
            worst_upper,
            f64::NEG_INFINITY,
            1e-12,
        ));
        Ok(())
    }

    fn general_k_within_bounds(&mut self) -> Result<()> {
        for &k in &[5, 10, 20] {
            for &(mu1, mu2, eps) in &[(1.0, 10.0, 0.0), (1.0, 10.0, 0.3), (1.0, 1.0, 0.5)] {
                let p = SystemParams::new(20, k, 100, mu1, mu2, eps)?;
                let b = bounds_general_k(&p)?;
                let mc = estimate_expected_runtime(
                    &self.engine(&p),
                    self.settings.trials,
                    self.settings.seed,
                )?;
                let band = Z * mc.std_error;
                self.results.push(result(
                    "general_k_within_bounds",
                    case(&p),
                    mc.mean,
                    b.lower - band,
                    b.upper + band,
                ));
            }
        }
        Ok(())
    }

    /// The order statistics of `n` draws sum to `n` times the mean.
    fn order_statistic_sum(&mut self) -> Result<()> {
        for &(n, shape) in &[(10, 1), (20, 5), (40, 3), (100, 2)] {
            let table = shared_order_stat_means(n, shape);
            let total: f64 = (1..=n).map(|i| table.mean(i)).sum();
            let target = (n * shape) as f64;
            // simulated entries carry the fallback's sampling error
            let band = match table.method {
                OrderStatMethod::ClosedForm => 1e-6 * target,
                OrderStatMethod::MonteCarloFallback => {
                    Z * (target / FALLBACK_TRIALS as f64).sqrt() + 1e-6 * target
                }
            };
            self.results.push(result(
                "order_statistic_sum",
                format!("n={n} shape={shape} method={}", table.method),
                total,
                target - band,
                target + band,
            ));
        }
        Ok(())
    }

    fn success_probability(&mut self) -> Result<()> {
        for &(k, gamma, eps) in &[(10, 12, 0.3), (20, 8, 0.3), (40, 6, 0.2), (20, 5, 0.5)] {
            let p = SystemParams::new(40, k, 120, 1.0, 5.0, eps)?;
            let cap = TransmissionCap::Limited(gamma);
            let exact = system_success_prob(&p, cap).p_s;
            let sim = CensoredRuntimes::simulate(
                &self.engine(&p),
                &[cap],
                self.settings.trials,
                self.settings.seed,
            )?;
            let frac = sim.success_fraction(cap)?;
            let se = (exact * (1.0 - exact) / self.settings.trials as f64).sqrt();
            let band = Z * se + 1e-3;
            self.results.push(result(
                "success_probability",
                format!("{} gamma={gamma}", case(&p)),
                frac.mean,
                exact - band,
                exact + band,
            ));
        }
        Ok(())
    }
}

/// Runs every check.
pub fn run_validation(settings: &ValidationSettings) -> Result<ValidationReport> {
    let mut suite = Suite {
        settings: *settings,
        results: Vec::new(),
    };
    suite.chain_vs_monte_carlo()?;
    suite.chain_within_bounds()?;
    suite.communication_law()?;
    suite.rank_inequalities()?;
    suite.general_k_within_bounds()?;
    suite.order_statistic_sum()?;
    suite.success_probability()?;
    Ok(ValidationReport {
        settings: *settings,
        results: suite.results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts() {
        let report = ValidationReport {
            settings: ValidationSettings::default(),
            results: vec![
                result("a", "x".into(), 1.0, 0.0, 2.0),
                result("a", "y".into(), 3.0, 0.0, 2.0),
                result("b", "z".into(), 1.0, 1.0, 1.0),
            ],
        };
        assert!(!report.passed());
        assert_eq!(
            report.summary(),
            vec![("a".into(), 1, 1), ("b".into(), 1, 0)]
        );
        assert_eq!(report.failures().count(), 1);
    }
}
