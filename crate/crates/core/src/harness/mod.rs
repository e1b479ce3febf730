//! Scenario orchestration: mobility, Monte Carlo campaigns, RMSE aggregation,
//! feasibility calculations and the self-check suite.

pub mod feasibility;
pub mod mobility;
pub mod monte_carlo;
pub mod output;
pub mod scenario;
pub mod trial;
pub mod validate;

pub use feasibility::{
    feasibility, feasibility_with, sampling_curve, stationarity_time, stationarity_time_with, FeasibilityReport,
    FeasibilityRequest, StationarityGeometry, StationarityQuery, StationarityTime,
};
pub use mobility::{integrate_truth, mobility_profile, MobilityConfig, MotionSample, TruthState};
pub use monte_carlo::{run_monte_carlo, run_trials, ErrorAccumulator, RmseSeries};
pub use scenario::{ScenarioConfig, PRESETS};
pub use trial::{build_estimators, run_trial, run_trial_with_seed, trial_seed, Scenario, StepRecord, TrialEvent, TrialOutput,
    TrialStream,
};
