//! Seeded random streams and the primitive laws used by the simulators.
//!
//! One master seed drives everything. Trial `t` draws from ChaCha stream `t`
//! of that seed, so a trial's outcome does not depend on which thread ran it
//! or in what order. Engines that need common random numbers across
//! parameter changes split a trial stream further into per-worker blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Geometric, Poisson};

use crate::error::{Error, Result};

pub type TrialRng = ChaCha8Rng;

/// Words reserved per worker inside a trial stream.
const WORKER_BLOCK_WORDS: u128 = 1 << 40;

/// Erlang shapes at or below this are drawn as literal exponential sums.
const ERLANG_SUM_MAX_SHAPE: u64 = 6;

/// Packet counts at or below this draw one geometric per packet.
const GEOMETRIC_SUM_MAX: u64 = 64;

/// Independent stream for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Independent block for `worker` inside trial `trial`.
///
/// The draws a worker consumes never shift another worker's draws, which is
/// what keeps outcomes coupled when a parameter changes how many draws each
/// worker needs.
pub fn worker_rng(seed: u64, trial: u64, worker: usize) -> TrialRng {
    let mut rng = trial_rng(seed, trial);
    rng.set_word_pos(worker as u128 * WORKER_BLOCK_WORDS);
    rng
}

pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    crate::model::check_rate("rate", rate)?;
    Ok(exp_unit(rng) / rate)
}

/// Number of trials up to and including the first success.
pub fn sample_geometric<R: Rng + ?Sized>(success_prob: f64, rng: &mut R) -> Result<u64> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(Error::range(
            "success_prob",
            format!("need 0 < p <= 1, got {success_prob}"),
        ));
    }
    let failures = Geometric::new(success_prob).expect("checked range");
    Ok(failures.sample(rng) + 1)
}

/// Erlang(shape, rate): the sum of `shape` independent exponentials.
pub fn sample_erlang<R: Rng + ?Sized>(shape: u64, rate: f64, rng: &mut R) -> Result<f64> {
    if shape == 0 {
        return Err(Error::range("shape", "must be a positive integer"));
    }
    crate::model::check_rate("rate", rate)?;
    Ok(erlang_unit(shape, rng) / rate)
}

#[inline]
pub(crate) fn exp_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Unit-rate Erlang. Small shapes are summed term by term; larger shapes use
/// a gamma sampler with the identical law.
pub(crate) fn erlang_unit<R: Rng + ?Sized>(shape: u64, rng: &mut R) -> f64 {
    if shape <= ERLANG_SUM_MAX_SHAPE {
        (0..shape).map(|_| exp_unit(rng)).sum()
    } else {
        Gamma::new(shape as f64, 1.0)
            .expect("positive shape")
            .sample(rng)
    }
}

/// Total transmissions needed to deliver `packets` packets when each attempt
/// succeeds with probability `success_prob`, i.e. a sum of `packets`
/// independent geometric counts.
pub(crate) struct TransmissionCounter {
    packets: u64,
    per_packet: Option<Geometric>,
    mixture: Option<Gamma<f64>>,
}

impl TransmissionCounter {
    pub(crate) fn new(packets: u64, success_prob: f64) -> Self {
        let erasure = 1.0 - success_prob;
        if erasure <= 0.0 {
            return Self {
                packets,
                per_packet: None,
                mixture: None,
            };
        }
        if packets <= GEOMETRIC_SUM_MAX {
            Self {
                packets,
                per_packet: Some(Geometric::new(success_prob).expect("probability in (0,1]")),
                mixture: None,
            }
        } else {
            // failures ~ NegBin(packets, p) = Poisson(Gamma(packets, ε/(1−ε)))
            Self {
                packets,
                per_packet: None,
                mixture: Some(
                    Gamma::new(packets as f64, erasure / success_prob).expect("valid gamma"),
                ),
            }
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if let Some(geo) = &self.per_packet {
            self.packets + (0..self.packets).map(|_| geo.sample(rng)).sum::<u64>()
        } else if let Some(mix) = &self.mixture {
            let lambda = mix.sample(rng);
            if lambda <= 0.0 {
                return self.packets;
            }
            let failures: f64 = Poisson::new(lambda).expect("positive mean").sample(rng);
            self.packets + failures as u64
        } else {
            self.packets
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(draws: usize, mut f: impl FnMut(&mut TrialRng) -> f64) -> f64 {
        let mut rng = trial_rng(7, 0);
        (0..draws).map(|_| f(&mut rng)).sum::<f64>() / draws as f64
    }

    #[test]
    fn exponential_mean() {
        let m = mean_of(1_000_000, |r| sample_exponential(2.0, r).unwrap());
        assert!((m - 0.5).abs() < 0.005, "{m}");
    }

    #[test]
    fn geometric_mean() {
        let m = mean_of(1_000_000, |r| sample_geometric(0.7, r).unwrap() as f64);
        assert!((m - 1.0 / 0.7).abs() < 0.01 / 0.7, "{m}");
    }

    #[test]
    fn erlang_mean_small_and_large_shape() {
        let m = mean_of(1_000_000, |r| sample_erlang(3, 2.0, r).unwrap());
        assert!((m - 1.5).abs() < 0.015, "{m}");
        let m = mean_of(200_000, |r| sample_erlang(200, 4.0, r).unwrap());
        assert!((m - 50.0).abs() < 0.5, "{m}");
    }

    #[test]
    fn domain_errors() {
        let mut rng = trial_rng(1, 1);
        assert!(sample_exponential(0.0, &mut rng).is_err());
        assert!(sample_exponential(-1.0, &mut rng).is_err());
        assert!(sample_geometric(0.0, &mut rng).is_err());
        assert!(sample_geometric(1.5, &mut rng).is_err());
        assert_eq!(sample_geometric(1.0, &mut rng).unwrap(), 1);
        assert!(sample_erlang(0, 1.0, &mut rng).is_err());
        assert!(sample_erlang(2, 0.0, &mut rng).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, trial| {
            let mut r = trial_rng(seed, trial);
            (0..8).map(|_| exp_unit(&mut r)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3, 5), draw(3, 5));
        assert_ne!(draw(3, 5), draw(3, 6));
        assert_ne!(draw(3, 5), draw(4, 5));

        let mut a = worker_rng(3, 5, 2);
        let mut b = worker_rng(3, 5, 2);
        let mut c = worker_rng(3, 5, 3);
        let xa: f64 = exp_unit(&mut a);
        assert_eq!(xa, exp_unit(&mut b));
        assert_ne!(xa, exp_unit(&mut c));
    }

    #[test]
    fn transmission_counter_means() {
        // E[total] = packets / p in both regimes
        for &(packets, p) in &[(3u64, 0.7), (500, 0.9), (100, 0.5), (4, 1.0)] {
            let counter = TransmissionCounter::new(packets, p);
            let m = mean_of(100_000, |r| counter.sample(r) as f64);
            let expect = packets as f64 / p;
            assert!(
                (m - expect).abs() < 0.01 * expect,
                "{packets} {p}: {m} vs {expect}"
            );
        }
    }
}
