//! Figure-style experiments: a serializable description, a runner that
//! produces CSV tables, and the named presets.

use serde::{Deserialize, Serialize};

use crate::analytic::{bounds_general_k, bounds_max_k, uncoded_bounds, BoundPair};
use crate::ctmc;
use crate::error::{Error, Result};
use crate::model::{ParamsDocument, SystemParams, TransmissionCap, Workload};
use crate::montecarlo::{estimate_expected_runtime, estimate_uncoded_runtime};
use crate::optimizer::{
    achievable_runtimes, optimal_rate_upper_bound, sweep_epsilon, write_bandwidth_curve,
    write_latency_curve, write_success_curve, DesignSpace, SearchSettings, SweepConstraints,
};
use crate::plot::ChartSpec;
use crate::reliability::{
    latency_prob_grid, min_gamma_for_success, system_success_prob, CensoredRuntimes,
    LatencyQuantile, SuccessRow,
};

/// The CLI subcommands an experiment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Bounds,
    Ratedesign,
    Reliability,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Ratedesign => "ratedesign",
            Command::Reliability => "reliability",
            Command::Optimize => "optimize",
        }
    }
}

/// A `(k, γ)` curve of the success-versus-erasure figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGamma {
    pub k: usize,
    pub gamma: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Bounds (and the exact chain value when `k = m`) over worker counts.
    BoundsVsN {
        k: usize,
        m: usize,
        mu1: f64,
        mu2: f64,
        epsilon: f64,
        n_grid: Vec<usize>,
    },
    /// Bounds (and the exact chain value when `k = m`) over erasure
    /// probabilities.
    BoundsVsEpsilon {
        n: usize,
        k: usize,
        m: usize,
        mu1: f64,
        mu2: f64,
        epsilon_grid: Vec<f64>,
    },
    /// Coded versus uncoded run-time at a fixed code rate `k/n`, `k = m`.
    UncodedRatio {
        rate: f64,
        epsilon: f64,
        mu1: f64,
        mu2: f64,
        n_grid: Vec<usize>,
    },
    /// Upper bound per code rate, with Monte Carlo `E[T]` alongside.
    RateDesign {
        n: usize,
        m: usize,
        mu1: f64,
        mu2: f64,
        epsilon_grid: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k_candidates: Option<Vec<usize>>,
        #[serde(default = "yes")]
        monte_carlo: bool,
    },
    SuccessVsEpsilon {
        n: usize,
        m: usize,
        series: Vec<KGamma>,
        epsilon_grid: Vec<f64>,
    },
    SuccessVsGamma {
        n: usize,
        m: usize,
        epsilon: f64,
        ks: Vec<usize>,
        gamma_grid: Vec<u32>,
        delta: f64,
    },
    SuccessVsK {
        n: usize,
        m: usize,
        epsilon: f64,
        ks: Vec<usize>,
        gamma: u32,
    },
    /// `Pr[T′ ≤ τ]` over `k` and `γ`.
    LatencyProb {
        n: usize,
        m: usize,
        mu1: f64,
        mu2: f64,
        epsilon: f64,
        ks: Vec<usize>,
        gamma_grid: Vec<u32>,
        tau: f64,
    },
    /// Reliability figures at one operating point.
    ReliabilityPoint {
        params: ParamsDocument,
        gamma: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    /// The three allocation problems over an erasure grid.
    OptimalCurves {
        n: usize,
        m: usize,
        mu1: f64,
        mu2: f64,
        gamma_t: u32,
        tau_t: f64,
        alpha: f64,
        delta: f64,
        epsilon_grid: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k_candidates: Option<Vec<usize>>,
    },
}

fn yes() -> bool {
    true
}

/// One CSV output and how to chart it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub stem: String,
    pub csv: Vec<u8>,
    pub chart: ChartSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// An optimization found no feasible design anywhere.
    pub infeasible: bool,
}

fn chart(
    title: &str,
    x: &str,
    y: &[&str],
    group: Option<&str>,
    x_label: &str,
    y_label: &str,
) -> ChartSpec {
    ChartSpec {
        title: title.into(),
        x: x.into(),
        y: y.iter().map(|s| s.to_string()).collect(),
        group: group.map(Into::into),
        x_label: x_label.into(),
        y_label: y_label.into(),
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Serialize)]
struct BoundsRow {
    x: f64,
    n: usize,
    k: usize,
    m: usize,
    epsilon: f64,
    lower: f64,
    upper: f64,
    markov: Option<f64>,
}

fn bounds_row(params: &SystemParams, x: f64) -> Result<BoundsRow> {
    let (b, markov) = if params.k == params.m {
        (bounds_max_k(params)?, Some(ctmc::expected_runtime(params)?))
    } else {
        (bounds_general_k(params)?, None)
    };
    Ok(BoundsRow {
        x,
        n: params.n,
        k: params.k,
        m: params.m,
        epsilon: params.epsilon,
        lower: b.lower,
        upper: b.upper,
        markov,
    })
}

#[derive(Serialize)]
struct UncodedRow {
    n: usize,
    k: usize,
    coded_lower: f64,
    coded_upper: f64,
    coded_mc: f64,
    coded_se: f64,
    uncoded_lower: f64,
    uncoded_upper: f64,
    uncoded_mc: f64,
    uncoded_se: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct RateRow {
    epsilon: f64,
    k: usize,
    rate: f64,
    lower: f64,
    upper: f64,
    mc_mean: Option<f64>,
    mc_stderr: Option<f64>,
    optimal: bool,
}

#[derive(Serialize)]
struct MinGammaRow {
    k: usize,
    min_gamma: Option<u32>,
    target: f64,
}

#[derive(Serialize)]
struct PointRow {
    n: usize,
    k: usize,
    m: usize,
    mu1: f64,
    mu2: f64,
    epsilon: f64,
    gamma: u32,
    p: f64,
    p_s: f64,
    tau: Option<f64>,
    prob: Option<f64>,
    prob_se: Option<f64>,
    alpha: Option<f64>,
    t_alpha: Option<f64>,
    t_alpha_lower: Option<f64>,
    t_alpha_upper: Option<f64>,
}

fn workload(n: usize, m: usize, mu1: f64, mu2: f64, epsilon: f64) -> Result<Workload> {
    // validated through any admissible k; k = 1 always divides m
    Ok(SystemParams::new(n, 1, m, mu1, mu2, epsilon)?.workload())
}

fn space(w: &Workload, ks: &Option<Vec<usize>>) -> Result<DesignSpace> {
    match ks {
        Some(ks) => DesignSpace::with_ks(w, ks),
        None => Ok(DesignSpace::divisors(w)),
    }
}

fn non_empty<T>(name: &'static str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::range(name, "grid is empty"));
    }
    Ok(())
}

impl Experiment {
    pub fn command(&self) -> Command {
        match self {
            Experiment::BoundsVsN { .. }
            | Experiment::BoundsVsEpsilon { .. }
            | Experiment::UncodedRatio { .. } => Command::Bounds,
            Experiment::RateDesign { .. } => Command::Ratedesign,
            Experiment::SuccessVsEpsilon { .. }
            | Experiment::SuccessVsGamma { .. }
            | Experiment::SuccessVsK { .. }
            | Experiment::LatencyProb { .. }
            | Experiment::ReliabilityPoint { .. } => Command::Reliability,
            Experiment::OptimalCurves { .. } => Command::Optimize,
        }
    }

    /// Whether the run draws random numbers (and so depends on seed and
    /// trials).
    pub fn is_stochastic(&self) -> bool {
        !matches!(
            self,
            Experiment::BoundsVsN { .. }
                | Experiment::BoundsVsEpsilon { .. }
                | Experiment::SuccessVsEpsilon { .. }
                | Experiment::SuccessVsGamma { .. }
                | Experiment::SuccessVsK { .. }
        ) && !matches!(
            self,
            Experiment::RateDesign {
                monte_carlo: false,
                ..
            }
        )
    }

    /// The single-point experiment a plain parameter document stands for
    /// under `command`.
    pub fn from_params(command: Command, doc: &ParamsDocument) -> Result<Self> {
        let p = doc.system()?;
        Ok(match command {
            Command::Bounds => Experiment::BoundsVsN {
                k: p.k,
                m: p.m,
                mu1: p.mu1,
                mu2: p.mu2,
                epsilon: p.epsilon,
                n_grid: vec![p.n],
            },
            Command::Ratedesign => Experiment::RateDesign {
                n: p.n,
                m: p.m,
                mu1: p.mu1,
                mu2: p.mu2,
                epsilon_grid: vec![p.epsilon],
                k_candidates: None,
                monte_carlo: true,
            },
            Command::Reliability => Experiment::ReliabilityPoint {
                params: doc.clone(),
                gamma: doc.gamma.ok_or_else(|| {
                    Error::range("gamma", "the reliability command needs a finite gamma")
                })?,
                tau: doc.tau_t,
                alpha: doc.alpha,
            },
            Command::Optimize => {
                let missing =
                    |name: &'static str| Error::range(name, "required by the optimize command");
                Experiment::OptimalCurves {
                    n: p.n,
                    m: p.m,
                    mu1: p.mu1,
                    mu2: p.mu2,
                    gamma_t: doc.gamma_t.ok_or_else(|| missing("gamma_t"))?,
                    tau_t: doc.tau_t.ok_or_else(|| missing("tau_t"))?,
                    alpha: doc.alpha.ok_or_else(|| missing("alpha"))?,
                    delta: doc.delta.ok_or_else(|| missing("delta"))?,
                    epsilon_grid: vec![p.epsilon],
                    k_candidates: None,
                }
            }
        })
    }

    /// Runs the experiment. `stem` names the output tables.
    pub fn run(&self, stem: &str, trials: u64, seed: u64) -> Result<RunOutput> {
        let mut infeasible = false;
        let tables = match self {
            Experiment::BoundsVsN {
                k,
                m,
                mu1,
                mu2,
                epsilon,
                n_grid,
            } => {
                non_empty("n_grid", n_grid)?;
                let rows = n_grid
                    .iter()
                    .map(|&n| {
                        bounds_row(
                            &SystemParams::new(n, *k, *m, *mu1, *mu2, *epsilon)?,
                            n as f64,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("Bounds on E[T], k={k}, m={m}, eps={epsilon}"),
                        "x",
                        &["lower", "upper", "markov"],
                        None,
                        "n",
                        "E[T]",
                    ),
                }]
            }
            Experiment::BoundsVsEpsilon {
                n,
                k,
                m,
                mu1,
                mu2,
                epsilon_grid,
            } => {
                non_empty("epsilon_grid", epsilon_grid)?;
                let rows = epsilon_grid
                    .iter()
                    .map(|&e| bounds_row(&SystemParams::new(*n, *k, *m, *mu1, *mu2, e)?, e))
                    .collect::<Result<Vec<_>>>()?;
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("Bounds on E[T] vs erasure, n={n}, k={k}, m={m}"),
                        "x",
                        &["lower", "upper", "markov"],
                        None,
                        "epsilon",
                        "E[T]",
                    ),
                }]
            }
            Experiment::UncodedRatio {
                rate,
                epsilon,
                mu1,
                mu2,
                n_grid,
            } => {
                non_empty("n_grid", n_grid)?;
                let mut rows = Vec::new();
                for &n in n_grid {
                    let kf = rate * n as f64;
                    if (kf - kf.round()).abs() > 1e-9 {
                        return Err(Error::range(
                            "rate",
                            format!("rate * n = {kf} is not an integer"),
                        ));
                    }
                    let k = kf.round() as usize;
                    let params = SystemParams::new(n, k, k, *mu1, *mu2, *epsilon)?;
                    let coded: BoundPair = bounds_max_k(&params)?;
                    let unc = uncoded_bounds(&params)?;
                    let cm = estimate_expected_runtime(&params, trials, seed)?;
                    let um = estimate_uncoded_runtime(&params, trials, seed)?;
                    rows.push(UncodedRow {
                        n,
                        k,
                        coded_lower: coded.lower,
                        coded_upper: coded.upper,
                        coded_mc: cm.mean,
                        coded_se: cm.std_error,
                        uncoded_lower: unc.lower,
                        uncoded_upper: unc.upper,
                        uncoded_mc: um.mean,
                        uncoded_se: um.std_error,
                        ratio: um.mean / cm.mean,
                    });
                }
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("Uncoded / coded run-time, R={rate}, eps={epsilon}"),
                        "n",
                        &["ratio"],
                        None,
                        "n",
                        "E[T_uncoded] / E[T]",
                    ),
                }]
            }
            Experiment::RateDesign {
                n,
                m,
                mu1,
                mu2,
                epsilon_grid,
                k_candidates,
                monte_carlo,
            } => {
                non_empty("epsilon_grid", epsilon_grid)?;
                let mut rows = Vec::new();
                for &e in epsilon_grid {
                    let w = workload(*n, *m, *mu1, *mu2, e)?;
                    let sp = space(&w, k_candidates)?;
                    let design = optimal_rate_upper_bound(&w, &sp)?;
                    let mc = if *monte_carlo {
                        Some(achievable_runtimes(&w, &sp, trials, seed)?)
                    } else {
                        None
                    };
                    for (idx, (k, b)) in design.bounds.iter().enumerate() {
                        let est = mc.as_ref().map(|v| v[idx].1);
                        rows.push(RateRow {
                            epsilon: e,
                            k: *k,
                            rate: *k as f64 / *n as f64,
                            lower: b.lower,
                            upper: b.upper,
                            mc_mean: est.map(|x| x.mean),
                            mc_stderr: est.map(|x| x.std_error),
                            optimal: *k == design.k_star,
                        });
                    }
                }
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("Upper bound vs code rate, n={n}, m={m}"),
                        "rate",
                        &["upper"],
                        Some("epsilon"),
                        "R = k/n",
                        "upper bound on E[T]",
                    ),
                }]
            }
            Experiment::SuccessVsEpsilon {
                n,
                m,
                series,
                epsilon_grid,
            } => {
                non_empty("epsilon_grid", epsilon_grid)?;
                non_empty("series", series)?;
                let mut rows = Vec::new();
                for s in series {
                    for &e in epsilon_grid {
                        let params = SystemParams::new(*n, s.k, *m, 1.0, 1.0, e)?;
                        rows.push(SuccessRow::new(&params, TransmissionCap::Limited(s.gamma)));
                    }
                }
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("P_s vs erasure, n={n}, m={m}"),
                        "epsilon",
                        &["p_s"],
                        Some("k"),
                        "epsilon",
                        "P_s",
                    ),
                }]
            }
            Experiment::SuccessVsGamma {
                n,
                m,
                epsilon,
                ks,
                gamma_grid,
                delta,
            } => {
                non_empty("ks", ks)?;
                non_empty("gamma_grid", gamma_grid)?;
                let mut rows = Vec::new();
                let mut mins = Vec::new();
                let top = *gamma_grid.iter().max().expect("non-empty");
                for &k in ks {
                    let params = SystemParams::new(*n, k, *m, 1.0, 1.0, *epsilon)?;
                    for &g in gamma_grid {
                        rows.push(SuccessRow::new(&params, TransmissionCap::Limited(g)));
                    }
                    mins.push(MinGammaRow {
                        k,
                        min_gamma: min_gamma_for_success(&params, 1.0 - delta, top),
                        target: 1.0 - delta,
                    });
                }
                vec![
                    Table {
                        stem: stem.into(),
                        csv: to_csv(&rows)?,
                        chart: chart(
                            &format!("P_s vs transmission cap, n={n}, m={m}, eps={epsilon}"),
                            "gamma",
                            &["p_s"],
                            Some("k"),
                            "gamma",
                            "P_s",
                        ),
                    },
                    Table {
                        stem: format!("{stem}_min_gamma"),
                        csv: to_csv(&mins)?,
                        chart: chart(
                            &format!("Smallest gamma with P_s >= {}", 1.0 - delta),
                            "k",
                            &["min_gamma"],
                            None,
                            "k",
                            "gamma",
                        ),
                    },
                ]
            }
            Experiment::SuccessVsK {
                n,
                m,
                epsilon,
                ks,
                gamma,
            } => {
                non_empty("ks", ks)?;
                let rows = ks
                    .iter()
                    .map(|&k| {
                        let params = SystemParams::new(*n, k, *m, 1.0, 1.0, *epsilon)?;
                        Ok(SuccessRow::new(&params, TransmissionCap::Limited(*gamma)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: chart(
                        &format!("P_s vs k, n={n}, m={m}, eps={epsilon}, gamma={gamma}"),
                        "k",
                        &["p_s"],
                        None,
                        "k",
                        "P_s",
                    ),
                }]
            }
            Experiment::LatencyProb {
                n,
                m,
                mu1,
                mu2,
                epsilon,
                ks,
                gamma_grid,
                tau,
            } => {
                non_empty("ks", ks)?;
                non_empty("gamma_grid", gamma_grid)?;
                let base = SystemParams::new(*n, 1, *m, *mu1, *mu2, *epsilon)?;
                let caps: Vec<TransmissionCap> = gamma_grid
                    .iter()
                    .map(|&g| TransmissionCap::Limited(g))
                    .collect();
                let rows = latency_prob_grid(&base, ks, &caps, *tau, trials, seed)?;
                let by_k = gamma_grid.len() == 1;
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&rows)?,
                    chart: if by_k {
                        chart(
                            &format!("Pr[T' <= {tau}] vs k, gamma={}", gamma_grid[0]),
                            "k",
                            &["prob"],
                            None,
                            "k",
                            "probability",
                        )
                    } else {
                        chart(
                            &format!("Pr[T' <= {tau}] vs gamma, eps={epsilon}"),
                            "gamma",
                            &["prob"],
                            Some("k"),
                            "gamma",
                            "probability",
                        )
                    },
                }]
            }
            Experiment::ReliabilityPoint {
                params,
                gamma,
                tau,
                alpha,
            } => {
                let p = params.system()?;
                let cap = TransmissionCap::Limited(*gamma);
                crate::model::RetransmissionPolicy {
                    gamma: cap,
                    gamma_t: params.gamma_t,
                }
                .validate(&p)?;
                let prof = system_success_prob(&p, cap);
                let mut row = PointRow {
                    n: p.n,
                    k: p.k,
                    m: p.m,
                    mu1: p.mu1,
                    mu2: p.mu2,
                    epsilon: p.epsilon,
                    gamma: *gamma,
                    p: prof.p,
                    p_s: prof.p_s,
                    tau: *tau,
                    prob: None,
                    prob_se: None,
                    alpha: *alpha,
                    t_alpha: None,
                    t_alpha_lower: None,
                    t_alpha_upper: None,
                };
                if tau.is_some() || alpha.is_some() {
                    let sim = CensoredRuntimes::simulate(&p, &[cap], trials, seed)?;
                    if let Some(t) = tau {
                        let est = sim.cdf(cap, *t)?;
                        row.prob = Some(est.mean);
                        row.prob_se = Some(est.std_error);
                    }
                    if let Some(a) = alpha {
                        if let LatencyQuantile::Feasible {
                            value,
                            lower,
                            upper,
                        } = sim.quantile(cap, *a)?
                        {
                            row.t_alpha = Some(value);
                            row.t_alpha_lower = Some(lower);
                            row.t_alpha_upper = Some(upper);
                        }
                    }
                }
                vec![Table {
                    stem: stem.into(),
                    csv: to_csv(&[row])?,
                    chart: chart("P_s", "gamma", &["p_s"], None, "gamma", "P_s"),
                }]
            }
            Experiment::OptimalCurves {
                n,
                m,
                mu1,
                mu2,
                gamma_t,
                tau_t,
                alpha,
                delta,
                epsilon_grid,
                k_candidates,
            } => {
                non_empty("epsilon_grid", epsilon_grid)?;
                let w = workload(*n, *m, *mu1, *mu2, epsilon_grid[0])?;
                let sp = space(&w, k_candidates)?;
                let constraints = SweepConstraints {
                    gamma_t: *gamma_t,
                    alpha: *alpha,
                    delta: *delta,
                    tau_t: *tau_t,
                };
                let settings = SearchSettings {
                    trials,
                    seed,
                    ..SearchSettings::default()
                };
                let points = sweep_epsilon(&w, &sp, &constraints, epsilon_grid, &settings)?;
                infeasible = points.iter().all(|p| {
                    !p.min_latency.is_feasible()
                        && !p.min_bandwidth.is_feasible()
                        && !p.max_success.is_feasible()
                });
                let mut a = Vec::new();
                write_latency_curve(&mut a, &points)?;
                let mut b = Vec::new();
                write_bandwidth_curve(&mut b, &points)?;
                let mut c = Vec::new();
                write_success_curve(&mut c, &points)?;
                vec![
                    Table {
                        stem: format!("{stem}a"),
                        csv: a,
                        chart: chart(
                            "Optimal T^(alpha) vs erasure",
                            "epsilon",
                            &["t_alpha"],
                            None,
                            "epsilon",
                            "T^(alpha)",
                        ),
                    },
                    Table {
                        stem: format!("{stem}b"),
                        csv: b,
                        chart: chart(
                            "Optimal gamma vs erasure",
                            "epsilon",
                            &["gamma_star"],
                            None,
                            "epsilon",
                            "gamma",
                        ),
                    },
                    Table {
                        stem: format!("{stem}c"),
                        csv: c,
                        chart: chart(
                            "Optimal P_s vs erasure",
                            "epsilon",
                            &["p_s"],
                            None,
                            "epsilon",
                            "P_s",
                        ),
                    },
                ]
            }
        };
        Ok(RunOutput { tables, infeasible })
    }
}

/// A named, pinned experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub experiment: Experiment,
    /// Values not fixed by the figure's stated parameters.
    pub assumed: Vec<&'static str>,
}

impl Preset {
    /// Table stem; the optimal-curve preset writes `fig10a..c`.
    pub fn stem(&self) -> &'static str {
        match self.experiment {
            Experiment::OptimalCurves { .. } => "fig10",
            _ => self.name,
        }
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

pub const PRESET_NAMES: [&str; 15] = [
    "fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig9a", "fig9b",
    "fig10", "fig10a", "fig10b", "fig10c",
];

pub fn preset(name: &str) -> Option<Preset> {
    let ks = vec![10, 20, 30, 40];
    let p = match name {
        "fig2a" | "fig2b" => {
            let (mu1, mu2) = if name == "fig2a" {
                (10.0, 1.0)
            } else {
                (1.0, 10.0)
            };
            Preset {
                name: if name == "fig2a" { "fig2a" } else { "fig2b" },
                experiment: Experiment::BoundsVsN {
                    k: 500,
                    m: 500,
                    mu1,
                    mu2,
                    epsilon: 0.1,
                    n_grid: (500..=1500).step_by(50).collect(),
                },
                assumed: vec!["n grid 500..=1500 step 50"],
            }
        }
        "fig3" => Preset {
            name: "fig3",
            experiment: Experiment::BoundsVsEpsilon {
                n: 750,
                k: 500,
                m: 500,
                mu1: 10.0,
                mu2: 1.0,
                epsilon_grid: grid(0.0, 0.5, 0.025),
            },
            assumed: vec!["n = 750", "epsilon grid 0..=0.5 step 0.025"],
        },
        "fig4" => Preset {
            name: "fig4",
            experiment: Experiment::UncodedRatio {
                rate: 0.5,
                epsilon: 0.1,
                mu1: 1.0,
                mu2: 1.0,
                n_grid: vec![20, 40, 80, 160, 320],
            },
            assumed: vec![
                "whole preset: coded vs uncoded comparison at R = 1/2, eps = 0.1, mu1 = mu2 = 1",
            ],
        },
        "fig5" => Preset {
            name: "fig5",
            experiment: Experiment::RateDesign {
                n: 100,
                m: 500,
                mu1: 1.0,
                mu2: 10.0,
                epsilon_grid: vec![0.0, 0.1, 0.3, 0.5],
                k_candidates: None,
                monte_carlo: true,
            },
            assumed: vec![
                "epsilon grid {0, 0.1, 0.3, 0.5}",
                "k candidates: divisors of m up to n",
            ],
        },
        "fig6" => Preset {
            name: "fig6",
            experiment: Experiment::SuccessVsEpsilon {
                n: 40,
                m: 120,
                series: vec![
                    KGamma { k: 10, gamma: 12 },
                    KGamma { k: 20, gamma: 8 },
                    KGamma { k: 40, gamma: 6 },
                ],
                epsilon_grid: grid(0.0, 0.6, 0.01),
            },
            assumed: vec![
                "legend (k, gamma) = (10, 12), (20, 8), (40, 6)",
                "epsilon grid 0..=0.6 step 0.01",
            ],
        },
        "fig7" => Preset {
            name: "fig7",
            experiment: Experiment::SuccessVsGamma {
                n: 40,
                m: 120,
                epsilon: 0.3,
                ks,
                gamma_grid: (1..=30).collect(),
                delta: 0.01,
            },
            assumed: vec!["gamma grid 1..=30"],
        },
        "fig8" => Preset {
            name: "fig8",
            experiment: Experiment::LatencyProb {
                n: 40,
                m: 120,
                mu1: 1.0,
                mu2: 5.0,
                epsilon: 0.3,
                ks,
                gamma_grid: vec![13],
                tau: 8.6,
            },
            assumed: vec!["k candidates {10, 20, 30, 40}"],
        },
        "fig9" | "fig9a" => Preset {
            name: "fig9",
            experiment: Experiment::LatencyProb {
                n: 40,
                m: 120,
                mu1: 1.0,
                mu2: 5.0,
                epsilon: 0.3,
                ks,
                gamma_grid: (3..=30).collect(),
                tau: 8.6,
            },
            assumed: vec!["gamma grid 3..=30", "k candidates {10, 20, 30, 40}"],
        },
        "fig9b" => Preset {
            name: "fig9b",
            experiment: Experiment::SuccessVsK {
                n: 40,
                m: 120,
                epsilon: 0.3,
                ks: vec![1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40],
                gamma: 8,
            },
            assumed: vec!["k candidates: divisors of m up to n"],
        },
        "fig10" | "fig10a" | "fig10b" | "fig10c" => Preset {
            name: "fig10",
            experiment: Experiment::OptimalCurves {
                n: 40,
                m: 120,
                mu1: 1.0,
                mu2: 5.0,
                gamma_t: 7,
                tau_t: 10.0,
                alpha: 0.05,
                delta: 0.01,
                epsilon_grid: grid(0.0, 0.5, 0.05),
                k_candidates: None,
            },
            assumed: vec![
                "epsilon grid 0..=0.5 step 0.05",
                "gamma_t also bounds the bandwidth search",
                "k candidates: divisors of m up to n",
            ],
        },
        _ => return None,
    };
    Some(p)
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub stem: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: u64,
    pub output_dir: String,
    #[serde(default)]
    pub assumed: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
}
