//! Question-answering metrics and the statistics reported around them.

pub mod answer;
pub mod bootstrap;
pub mod calibration;
pub mod strata;
pub mod variance;

pub use answer::{exact_match, flag_format_mismatch, mean_chain_length, token_f1};
pub use bootstrap::{bootstrap_ci, bootstrap_statistic_ci, MetricPoint};
pub use calibration::{auc_roc, ece};
pub use strata::{stratify, stratify_by_agreement, AgreementStratum, StratumInput, StratumLabel};
pub use variance::{inter_run_stats, RunSeries};
