#![allow(dead_code)]

use std::sync::OnceLock;

use trustgrid_pipeline::{export_text, ingest_str, simulate_cohort, CohortConfig, SessionData};

pub const EXPERIMENT_SEED: u64 = 31;

/// Plays a bot cohort into a fresh store and returns its export.
pub fn cohort_export(sessions: usize, cohort_seed: u64) -> String {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CohortConfig {
        sessions,
        cohort_seed,
        experiment_seed: EXPERIMENT_SEED,
        ..CohortConfig::default()
    };
    let (svc, played) = simulate_cohort(&cfg, dir.path()).unwrap();
    assert_eq!(played.len(), sessions);
    export_text(&svc, false).unwrap()
}

/// Four complete bot sessions, two per group, generated once.
pub fn sample() -> &'static [SessionData] {
    static SAMPLE: OnceLock<Vec<SessionData>> = OnceLock::new();
    SAMPLE.get_or_init(|| ingest_str(&cohort_export(4, 5)).unwrap())
}
