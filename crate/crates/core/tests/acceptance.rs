//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion.
//!
//! Criterion 2b asks for bounds that are nonincreasing in ε. Every bound
//! term scales with 1/((1−ε)μ2), so the bounds increase instead; the check is
//! evaluated as stated and is expected to fail. Any other failure, or 2b
//! unexpectedly passing, makes the target exit nonzero.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};

use codedlat::analytic::{
    bounds_general_k, bounds_max_k, erlang_order_stat_means, kth_min_sum, prop1_lower, prop2_upper,
    OrderStatMethod,
};
use codedlat::ctmc::{expected_hitting_time, expected_runtime, ChainSpec};
use codedlat::model::uncoded_erasure;
use codedlat::montecarlo::{
    estimate_expected_runtime, estimate_uncoded_runtime, ks_critical_value,
    ks_statistic_exponential, map_trials, CommSampling, WorkerSampler,
};
use codedlat::optimizer::{sweep_epsilon, DesignSpace, SearchSettings, SweepConstraints};
use codedlat::reliability::{min_gamma_for_success, CensoredRuntimes};
use codedlat::{SystemParams, TransmissionCap};

const TRIALS: u64 = 100_000;
const SEED: u64 = 20_240_601;
const EXPECTED_RED: &[&str] = &["2b"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

const MAX_K_GRID: [(usize, usize); 4] = [(2, 1), (5, 2), (10, 5), (20, 10)];
const RATES: [(f64, f64); 3] = [(1.0, 1.0), (10.0, 1.0), (1.0, 10.0)];

fn max_k_params(eps_values: &[f64]) -> Vec<SystemParams> {
    let mut out = Vec::new();
    for &(n, k) in &MAX_K_GRID {
        for &eps in eps_values {
            for &(mu1, mu2) in &RATES {
                out.push(SystemParams::new(n, k, k, mu1, mu2, eps).unwrap());
            }
        }
    }
    out
}

fn c1_chain_exactness() -> Outcome {
    let hand = expected_hitting_time(&ChainSpec::new(2, 1, 1.0, 1.0).unwrap());
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for p in max_k_params(&[0.0, 0.3]) {
        let exact = expected_runtime(&p).unwrap();
        let mc = estimate_expected_runtime(&p, TRIALS, SEED).unwrap();
        let z = (mc.mean - exact).abs() / mc.std_error;
        worst = worst.max(z);
        if z > 3.0 {
            bad.push(format!(
                "n={} k={} eps={} mu=({},{}) z={z:.2}",
                p.n, p.k, p.epsilon, p.mu1, p.mu2
            ));
        }
    }
    let hand_ok = hand == 1.25;
    outcome(
        bad.is_empty() && hand_ok,
        format!("24 points, worst |z| = {worst:.2}; hand check E[T] = {hand}; violations {bad:?}"),
    )
}

fn c2a_max_k_sandwich() -> Outcome {
    let mut bad = 0;
    let mut count = 0;
    for p in max_k_params(&[0.0, 0.3]) {
        let exact = expected_runtime(&p).unwrap();
        let b = bounds_max_k(&p).unwrap();
        count += 1;
        if !(b.lower <= exact && exact <= b.upper) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{count} points, {bad} violations"))
}

fn c2b_bounds_nonincreasing_in_epsilon() -> Outcome {
    let grid: Vec<f64> = (0..=5).map(|i| i as f64 / 10.0).collect();
    let mut increases = 0;
    let mut total = 0;
    for &(n, k) in &MAX_K_GRID {
        for &(mu1, mu2) in &RATES {
            let b: Vec<_> = grid
                .iter()
                .map(|&e| bounds_max_k(&SystemParams::new(n, k, k, mu1, mu2, e).unwrap()).unwrap())
                .collect();
            for w in b.windows(2) {
                total += 2;
                increases +=
                    usize::from(w[1].lower > w[0].lower) + usize::from(w[1].upper > w[0].upper);
            }
        }
    }
    outcome(
        increases == 0,
        format!("{increases} of {total} consecutive bound pairs increase with epsilon"),
    )
}

fn c3_general_k_sandwich() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    let mut worst_rel: f64 = 0.0;
    for &(n, m) in &[(20usize, 100usize), (100, 500)] {
        let ks: Vec<usize> = (1..=n).filter(|k| m % k == 0).collect();
        for &k in &ks {
            for &eps in &[0.0, 0.1, 0.3] {
                let p = SystemParams::new(n, k, m, 1.0, 10.0, eps).unwrap();
                let b = bounds_general_k(&p).unwrap();
                let mc = estimate_expected_runtime(&p, TRIALS, SEED).unwrap();
                let slack = 3.0 * mc.std_error;
                count += 1;
                if !(b.lower - slack <= mc.mean && mc.mean <= b.upper + slack) {
                    bad.push(format!(
                        "n={n} m={m} k={k} eps={eps}: {} not in [{}, {}]",
                        mc.mean, b.lower, b.upper
                    ));
                }
            }
        }
        for &eps in &[0.0, 0.1, 0.3] {
            let p = SystemParams::new(n, n / 2, n / 2, 1.0, 10.0, eps).unwrap();
            let g = bounds_general_k(&p).unwrap();
            let t = bounds_max_k(&p).unwrap();
            worst_rel = worst_rel
                .max(((g.lower - t.lower) / t.lower).abs())
                .max(((g.upper - t.upper) / t.upper).abs());
        }
    }
    outcome(
        bad.is_empty() && worst_rel <= 1e-9,
        format!("{count} Monte Carlo points, violations {bad:?}; reduction worst relative gap {worst_rel:.2e}"),
    )
}

fn c4_single_packet_law() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for &eps in &[0.2, 0.5] {
        for &mu2 in &[1.0, 5.0] {
            let p = SystemParams::new(1, 1, 1, 1.0, mu2, eps).unwrap();
            let sampler = WorkerSampler::new(&p, CommSampling::Structural);
            let s = map_trials(TRIALS, SEED, |rng| sampler.comm_time(rng));
            let rate = (1.0 - eps) * mu2;
            let d = ks_statistic_exponential(&s, rate);
            let crit = ks_critical_value(s.len(), 0.01);
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let rel = (mean * rate - 1.0).abs();
            ok &= d <= crit && rel <= 0.01;
            lines.push(format!(
                "eps={eps} mu2={mu2}: D={d:.4} (crit {crit:.4}) mean err {:.3}%",
                rel * 100.0
            ));
        }
    }
    outcome(ok, lines.join("; "))
}

fn c5_rank_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let pareto = Pareto::new(1.0, 1.2).unwrap();
    let mut bad = 0;
    for t in 0..10_000 {
        let n = rng.random_range(1..=20usize);
        let k = rng.random_range(1..=n);
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            if t % 2 == 0 {
                rng.random::<f64>()
            } else {
                pareto.sample(rng)
            }
        };
        let a: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let exact = kth_min_sum(&a, &b, k).unwrap();
        let lo = prop1_lower(&a, &b, k).unwrap();
        let hi = prop2_upper(&a, &b, k).unwrap();
        if !(lo <= exact && exact <= hi) {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("10000 instances (half uniform, half Pareto 1.2), {bad} violations"),
    )
}

fn c6_min_gamma() -> Outcome {
    let g = |k: usize| {
        let p = SystemParams::new(40, k, 120, 1.0, 5.0, 0.3).unwrap();
        min_gamma_for_success(&p, 0.99, 1000)
    };
    let (g10, g30, g40) = (g(10), g(30), g(40));
    let within = |x: Option<u32>| x.is_some_and(|v| v <= 13);
    outcome(
        within(g30) && within(g40) && !within(g10),
        format!("min gamma: k=10 {g10:?}, k=30 {g30:?}, k=40 {g40:?}"),
    )
}

fn c7_only_k20_meets_latency() -> Outcome {
    let cap = TransmissionCap::Limited(13);
    let mut lines = Vec::new();
    let mut passing = Vec::new();
    let mut clear_fail = true;
    for &k in &[10, 20, 30, 40] {
        let p = SystemParams::new(40, k, 120, 1.0, 5.0, 0.3).unwrap();
        let est = CensoredRuntimes::simulate(&p, &[cap], TRIALS, SEED)
            .unwrap()
            .cdf(cap, 8.6)
            .unwrap();
        let meets = est.mean - 2.0 * est.std_error >= 0.97;
        if meets {
            passing.push(k);
        } else {
            clear_fail &= est.mean + 2.0 * est.std_error < 0.97;
        }
        lines.push(format!("k={k}: {:.4} (se {:.4})", est.mean, est.std_error));
    }
    outcome(passing == [20] && clear_fail, lines.join("; "))
}

fn c8_cap_convergence() -> Outcome {
    let p = SystemParams::new(40, 20, 120, 1.0, 5.0, 0.3).unwrap();
    let mut caps: Vec<TransmissionCap> = (6..=30).map(TransmissionCap::Limited).collect();
    caps.push(TransmissionCap::Unlimited);
    let sim = CensoredRuntimes::simulate(&p, &caps, TRIALS, SEED).unwrap();
    let probs: Vec<f64> = (6..=30)
        .map(|g| sim.cdf(TransmissionCap::Limited(g), 8.6).unwrap().mean)
        .collect();
    let monotone = probs.windows(2).all(|w| w[1] >= w[0]);
    let at30 = sim.cdf(TransmissionCap::Limited(30), 8.6).unwrap();
    let inf = sim.cdf(TransmissionCap::Unlimited, 8.6).unwrap();
    let close = (at30.mean - inf.mean).abs() <= 3.0 * inf.std_error;
    outcome(
        monotone && close,
        format!(
            "nondecreasing over gamma 6..=30: {monotone}; gamma=6 {:.4}, gamma=30 {:.5}, unlimited {:.5} (se {:.5})",
            probs[0], at30.mean, inf.mean, inf.std_error
        ),
    )
}

fn c9_log_separation() -> Outcome {
    let (eps, mu1, mu2) = (0.1, 1.0, 1.0);
    let ns = [20usize, 40, 80, 160];
    let mut ratios = Vec::new();
    let mut coded = Vec::new();
    for &n in &ns {
        let p = SystemParams::new(n, n / 2, n / 2, mu1, mu2, eps).unwrap();
        let c = estimate_expected_runtime(&p, TRIALS, SEED).unwrap().mean;
        let u = estimate_uncoded_runtime(&p, TRIALS, SEED).unwrap().mean;
        coded.push(c);
        ratios.push(u / c);
    }
    // doubling n adds about ln 2 over the slowest uncoded rate to the
    // uncoded mean, while the coded mean levels off
    let eps_short = uncoded_erasure(eps, 1, 2).unwrap();
    let step = std::f64::consts::LN_2 * 0.5 / mu1.min((1.0 - eps_short) * mu2);
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let mut within = true;
    let mut incs = Vec::new();
    for j in 0..ns.len() - 1 {
        let observed = ratios[j + 1] - ratios[j];
        let predicted = step / coded[j + 1];
        within &= (observed - predicted).abs() <= 0.3 * predicted;
        incs.push(format!("{observed:.3} vs {predicted:.3}"));
    }
    outcome(
        increasing && within,
        format!(
            "ratios {:?}; increments (observed vs predicted) {incs:?}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn c10_optimal_curve_shapes() -> Outcome {
    let w = SystemParams::new(40, 1, 120, 1.0, 5.0, 0.0)
        .unwrap()
        .workload();
    let space = DesignSpace::divisors(&w);
    let constraints = SweepConstraints {
        gamma_t: 7,
        alpha: 0.05,
        delta: 0.01,
        tau_t: 10.0,
    };
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    let settings = SearchSettings {
        trials: TRIALS,
        seed: SEED,
        margin: 2.0,
    };
    let pts = sweep_epsilon(&w, &space, &constraints, &grid, &settings).unwrap();
    let t: Vec<f64> = pts.iter().filter_map(|p| p.min_latency.t_alpha).collect();
    let g: Vec<u32> = pts
        .iter()
        .filter_map(|p| p.min_bandwidth.gamma_star)
        .collect();
    let ps: Vec<f64> = pts.iter().map(|p| p.max_success.p_s).collect();
    let t_ok = t.windows(2).all(|w| w[1] >= w[0]);
    let g_ok = g.windows(2).all(|w| w[1] >= w[0]);
    let threshold = ps.iter().position(|&p| p == 0.0);
    let sharp = threshold
        .is_some_and(|i| ps[i..].iter().all(|&p| p == 0.0) && ps[..i].iter().all(|&p| p > 0.0));
    outcome(
        t_ok && g_ok && sharp && !t.is_empty(),
        format!(
            "T^(alpha) {t:.3?}; gamma* {g:?}; P_s = 0 from eps = {:?}",
            threshold.map(|i| grid[i])
        ),
    )
}

/// Independent simulation of the expected order statistics for every
/// `n ≤ 20` and shape `≤ 12`. One trial draws 20 workers × 12 unit
/// exponentials; cumulative sums give every shape and prefixes give every
/// `n`, so each table entry sees `trials` i.i.d. samples.
fn simulate_order_stats(trials: u64, seed: u64) -> Vec<Vec<Vec<(f64, f64)>>> {
    const N: usize = 20;
    const S: usize = 12;
    // acc[s-1][n-1][i-1] = (sum, sum of squares)
    let mut acc: Vec<Vec<Vec<(f64, f64)>>> =
        vec![(0..N).map(|n| vec![(0.0, 0.0); n + 1]).collect(); S];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = [[0.0f64; S]; N];
    let mut sorted = [0.0f64; N];
    for _ in 0..trials {
        for row in g.iter_mut() {
            let mut total = 0.0;
            for cell in row.iter_mut() {
                total += -(1.0 - rng.random::<f64>()).ln();
                *cell = total;
            }
        }
        for s in 0..S {
            for n in 0..N {
                let x = g[n][s];
                let mut pos = n;
                while pos > 0 && sorted[pos - 1] > x {
                    sorted[pos] = sorted[pos - 1];
                    pos -= 1;
                }
                sorted[pos] = x;
                for (cell, &v) in acc[s][n].iter_mut().zip(&sorted[..=n]) {
                    cell.0 += v;
                    cell.1 += v * v;
                }
            }
        }
    }
    acc
}

fn c11_erlang_table() -> Outcome {
    let trials = 1_000_000u64;
    let sim = simulate_order_stats(trials, SEED);
    let mut non_closed = Vec::new();
    let mut not_monotone = 0;
    let mut worst_sum: f64 = 0.0;
    let mut outside = Vec::new();
    let mut entries = 0;
    for n in 1..=20usize {
        for s in 1..=12usize {
            let table = erlang_order_stat_means(n, s);
            if table.method != OrderStatMethod::ClosedForm {
                non_closed.push((n, s));
            }
            not_monotone += table.means.windows(2).filter(|w| w[1] < w[0]).count();
            let total: f64 = table.means.iter().sum();
            worst_sum = worst_sum.max((total / (n * s) as f64 - 1.0).abs());
            for i in 1..=n {
                let (sum, sq) = sim[s - 1][n - 1][i - 1];
                let mean = sum / trials as f64;
                let var = (sq / trials as f64 - mean * mean).max(0.0);
                let se = (var / trials as f64).sqrt();
                entries += 1;
                let z = (table.mean(i) - mean).abs() / se;
                if z > 3.0 {
                    outside.push(format!("n={n} s={s} i={i} z={z:.2}"));
                }
            }
        }
    }
    let t22 = erlang_order_stat_means(2, 2);
    let exact22 = (t22.mean(1) - 1.25).abs() <= 1e-9 && (t22.mean(2) - 2.75).abs() <= 1e-9;
    outcome(
        non_closed.is_empty() && not_monotone == 0 && worst_sum <= 1e-6 && outside.is_empty() && exact22,
        format!(
            "240 tables; non-closed-form {non_closed:?}; decreasing steps {not_monotone}; worst sum error {worst_sum:.1e}; \
             {} of {entries} entries beyond 3 SE {outside:?}; (2,2) = ({}, {})",
            outside.len(),
            t22.mean(1),
            t22.mean(2)
        ),
    )
}

fn main() {
    type Criterion = (&'static str, &'static str, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        (
            "1",
            "chain hitting time matches Monte Carlo",
            c1_chain_exactness,
        ),
        ("2a", "chain value inside max-k bounds", c2a_max_k_sandwich),
        (
            "2b",
            "max-k bounds nonincreasing in epsilon",
            c2b_bounds_nonincreasing_in_epsilon,
        ),
        (
            "3",
            "Monte Carlo inside general-k bounds; k = m reduction",
            c3_general_k_sandwich,
        ),
        (
            "4",
            "single-packet communication time is exponential",
            c4_single_packet_law,
        ),
        (
            "5",
            "rank inequalities on random instances",
            c5_rank_inequalities,
        ),
        ("6", "minimum gamma for P_s >= 0.99", c6_min_gamma),
        (
            "7",
            "only k = 20 meets Pr[T' <= 8.6] >= 0.97",
            c7_only_k20_meets_latency,
        ),
        (
            "8",
            "latency probability converges in gamma",
            c8_cap_convergence,
        ),
        (
            "9",
            "uncoded / coded ratio grows like log n",
            c9_log_separation,
        ),
        (
            "10",
            "optimal curve shapes over epsilon",
            c10_optimal_curve_shapes,
        ),
        ("11", "Erlang order-statistic table", c11_erlang_table),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.passed { "PASS" } else { "FAIL" };
        let expected_red = EXPECTED_RED.contains(&id);
        let note = match (o.passed, expected_red) {
            (false, true) => " (expected: criterion contradicts the model)",
            (true, true) => " (unexpected pass)",
            _ => "",
        };
        println!(
            "criterion {id:>3} {status}{note} [{secs:.1}s] {name}: {}",
            o.detail
        );
        if o.passed == expected_red {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
