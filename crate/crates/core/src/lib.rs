//! Core model of the human/autonomous-searcher grid experiment.
//!
//! Everything in this crate is a pure function of its inputs and a 64-bit
//! seed: the same experiment seed always yields the same trial schedule,
//! outlier layouts and searcher trajectories, bit for bit.

pub mod design;
pub mod error;
pub mod kinematics;
pub mod rng;
pub mod search;
pub mod series;
pub mod synthetic;
pub mod trial;
pub mod world;

pub use design::{
    assign_group, build_plan, normalize_trust, ExperimentPlan, Group, Questionnaire, SurveyResponse,
};
pub use error::CoreError;
pub use kinematics::{step_spotlight, FrameState, Keys};
pub use search::{
    lawnmower_path, omniscient_path, optimal_encounter_time, random_path, searcher_path,
};
pub use series::{ExogSelector, TrustSeries};
pub use trial::{
    as_report, count_intersections, place_outliers, simulate_trial, trial_score, Capability,
    SearchOutcome, SearcherColor, SearcherConfig, Strategy, TrialConfig,
};
pub use world::{GridCell, WorldConfig};
