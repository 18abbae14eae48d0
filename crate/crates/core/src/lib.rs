//! Latency and reliability analysis for MDS-coded
//! distributed matrix-vector multiplication over packet erasure channels.
//!
//! `n` workers each hold one coded shard of `m/k` rows. A worker computes its
//! shard, then ships one packet per row over a channel that erases each
//! packet with probability `ε`; the master decodes once any `k` workers have
//! delivered everything.

// `is_multiple_of` is newer than the supported toolchain
#![allow(clippy::manual_is_multiple_of)]

pub mod analytic;
pub mod ctmc;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod plot;
pub mod reliability;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    ConstraintSet, EstimateWithCI, ParamsDocument, RetransmissionPolicy, SystemParams,
    TransmissionCap, Workload,
};
