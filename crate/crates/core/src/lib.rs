//! Diversity-based answer aggregation and its evaluation statistics.
//!
//! This crate holds the pure algorithmic side: answer normalization and
//! majority voting, agreement-based cascade routing, question-answering
//! metrics with bootstrap intervals, soft-matched relation scoring,
//! spectral clustering of confusion matrices, Pareto filtering, the
//! carbon estimate and report rendering. It is `no_std` and only needs
//! `alloc`; transports, files and the command line live in
//! `consensus-runner`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cluster;
pub mod error;
pub mod footprint;
pub mod metrics;
pub mod normalize;
pub mod output;
pub mod pareto;
pub mod relation;
pub mod report;
pub mod routing;
pub mod sample;
pub mod vote;

mod math;

pub use error::{Error, Result};
pub use normalize::normalize_answer;
pub use output::{parse_structured_output, OutputSchema};
pub use routing::{route, CascadeOutcome, Routing, RoutingThresholds};
pub use sample::{ParseFailure, ParseFailureReason, ParsedOutput, SampleResponse};
pub use vote::{majority_vote, oracle_hit, AggregateDecision, VoteResult};
