//! Exact `E[T]` for one inner product per worker (`k = m`).
//!
//! State `(u, v)`: `u` workers have finished computing, `v` results have
//! reached the master. Computation completes at rate `(n−u)·μ1`; each of the
//! `u − v` workers still transmitting delivers at rate `(1−ε)·μ2`, because a
//! geometric number of exponential attempts is again exponential. The job is
//! done on first reaching `v = k`.
//!
//! Every transition raises `u + v` by one, so the chain is acyclic and
//! first-step analysis is a single backward sweep over `(n+1)(k+1)` states.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_rate, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkovState {
    /// Workers done computing.
    pub u: usize,
    /// Results received by the master.
    pub v: usize,
}

impl MarkovState {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub k: usize,
    /// Per-worker computation rate.
    pub comp_rate: f64,
    /// Per-worker delivery rate including retransmissions.
    pub comm_rate: f64,
}

impl ChainSpec {
    pub fn new(n: usize, k: usize, comp_rate: f64, comm_rate: f64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::range(
                "k",
                format!("need 1 <= k <= n, got k = {k}, n = {n}"),
            ));
        }
        check_rate("comp_rate", comp_rate)?;
        check_rate("comm_rate", comm_rate)?;
        Ok(Self {
            n,
            k,
            comp_rate,
            comm_rate,
        })
    }

    /// The chain for a `k = m` system: rates `μ1` and `(1−ε)·μ2`.
    pub fn from_params(params: &SystemParams) -> Result<Self> {
        if params.k != params.m {
            return Err(Error::Precondition(format!(
                "the Markov chain models one inner product per worker (k = m), got k = {}, m = {}",
                params.k, params.m
            )));
        }
        Self::new(params.n, params.k, params.mu1, params.effective_comm_rate())
    }

    pub fn state_count(&self) -> usize {
        (self.n + 1) * (self.k + 1)
    }

    pub fn is_absorbing(&self, state: MarkovState) -> bool {
        state.v == self.k
    }
}

/// Outgoing edges of `state`. Empty on the absorbing set `v = k`.
pub fn transitions(state: MarkovState, spec: &ChainSpec) -> Vec<(MarkovState, f64)> {
    let MarkovState { u, v } = state;
    let mut out = Vec::with_capacity(2);
    if spec.is_absorbing(state) {
        return out;
    }
    if v <= u && u < spec.n {
        out.push((
            MarkovState::new(u + 1, v),
            (spec.n - u) as f64 * spec.comp_rate,
        ));
    }
    if v < u.min(spec.k) {
        out.push((MarkovState::new(u, v + 1), (u - v) as f64 * spec.comm_rate));
    }
    out
}

/// Expected hitting time of `{v = k}` from `(0, 0)`.
///
/// Rows are swept in decreasing `u`, each row in decreasing `v`; only the
/// current and the next row are kept.
pub fn expected_hitting_time(spec: &ChainSpec) -> f64 {
    let (n, k) = (spec.n, spec.k);
    // next[v] = E[(u+1, v)], cur[v] = E[(u, v)]; absorbing entries stay 0
    let mut next = vec![0.0f64; k + 1];
    let mut cur = vec![0.0f64; k + 1];
    for u in (0..=n).rev() {
        cur[k] = 0.0;
        for v in (0..k.min(u + 1)).rev() {
            let comp = if u < n {
                (n - u) as f64 * spec.comp_rate
            } else {
                0.0
            };
            let comm = if v < u {
                (u - v) as f64 * spec.comm_rate
            } else {
                0.0
            };
            let total = comp + comm;
            let mut e = 1.0 / total;
            if comp > 0.0 {
                e += comp / total * next[v];
            }
            if comm > 0.0 {
                e += comm / total * cur[v + 1];
            }
            cur[v] = e;
        }
        std::mem::swap(&mut next, &mut cur);
    }
    next[0]
}

/// Expected run-time of a `k = m` system via the chain.
pub fn expected_runtime(params: &SystemParams) -> Result<f64> {
    Ok(expected_hitting_time(&ChainSpec::from_params(params)?))
}

/// One `E[T]` per worker count, in the order given.
pub fn hitting_time_curve(
    ns: &[usize],
    k: usize,
    mu1: f64,
    mu2: f64,
    epsilon: f64,
) -> Result<Vec<(usize, f64)>> {
    ns.iter()
        .map(|&n| {
            let params = SystemParams::new(n, k, k, mu1, mu2, epsilon)?;
            Ok((n, expected_runtime(&params)?))
        })
        .collect()
}

/// Graphviz rendering of the reachable transition diagram.
pub fn to_dot(spec: &ChainSpec) -> String {
    let mut s = String::from("digraph ctmc {\n  rankdir=LR;\n  node [shape=circle];\n");
    for u in 0..=spec.n {
        for v in 0..=u.min(spec.k) {
            let state = MarkovState::new(u, v);
            let shape = if spec.is_absorbing(state) {
                ", shape=doublecircle"
            } else {
                ""
            };
            let _ = writeln!(s, "  \"{u},{v}\" [label=\"({u},{v})\"{shape}];");
            for (to, rate) in transitions(state, spec) {
                let _ = writeln!(
                    s,
                    "  \"{u},{v}\" -> \"{},{}\" [label=\"{rate}\"];",
                    to.u, to.v
                );
            }
        }
    }
    s.push_str("}\n");
    s
}
