//! Random discrepancy and symmetric binary perceptron instances, exact and
//! online solvers, solution-landscape searches, and the first-moment exponent
//! calculus that predicts when those landscapes fragment.

pub mod discrepancy;
pub mod error;
mod gray;
pub mod instance;
pub mod landscape;
pub mod online;
pub mod rng;
pub mod sign;
pub mod theory;

pub use discrepancy::{
    count_within, disc_value, enumerate_solutions, enumerate_within, exact_discrepancy, sbp_membership,
    sbp_threshold, DiscrepancyResult, DEFAULT_ENUMERATE_MAX_N, DEFAULT_EXACT_MAX_N,
};
pub use error::{Error, Result};
pub use instance::{
    generate, interpolate, resample_suffix, suffix_len, BodyFormat, Disorder, EnsembleMode, EnsembleSpec, Entries,
    Instance,
};
pub use online::{run_online, OnlineAlg, OnlineAlgorithm, OnlineRun, OnlineState};
pub use sign::{overlap_from_hamming, SignVector};
