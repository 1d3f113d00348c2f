//! Mechanical checks of the existence and non-existence results.

pub mod counterexample;
pub mod sweep;

pub use counterexample::{
    build_table2_profile, default_completions, search_completions, search_completions_with,
    verify_counterexample, CompletionSearch, CounterexampleReport,
};
pub use sweep::{
    verify_existence_exhaustive, verify_existence_random, ExistenceReport, SweepError, SweepMode,
    SweepOptions, Witness,
};
