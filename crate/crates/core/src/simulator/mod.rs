//! Monte Carlo engine: trial generation, relay selection, inter-satellite
//! routing and coverage estimation.

pub mod estimate;
pub mod routing;
pub mod trial;
pub mod types;

pub use estimate::{
    estimate_coverage, estimate_coverage_with_workers, estimate_link_coverage, run_trials, LinkSelector,
};
pub use routing::{greedy_route, greedy_route_in, path_length};
pub use trial::{run_combined_trial, run_trial, run_tsr_trial, run_tssr_between, run_tssr_trial, PreparedScenario};
pub use types::{CoverageEstimate, FailureReason, OutageBreakdown, TrialOutcome};
