//! Hybrid quantum-classical intrusion detection on UNSW-NB15 flows.
//!
//! The crate covers the whole experiment: CSV ingestion and preprocessing
//! ([`data`]), statevector simulation of the angle-encoded,
//! strongly-entangling embedding circuit ([`quantum`]), from-scratch
//! logistic regression and SMO-trained SVMs ([`classical`]), binary
//! classification metrics ([`metrics`]) and the seeded, manifest-tracked
//! experiment driver behind the `hqids` binary ([`pipeline`]).

pub mod data;
pub mod digest;
pub mod quantum;
pub mod classical;
pub mod metrics;
pub mod pipeline;
