//! Group-mean trust series.

use trustgrid_core::design::{MAIN_TRIALS, PRACTICE_TRIALS};
use trustgrid_core::{build_plan, normalize_trust, Group, TrustSeries, WorldConfig};

use crate::error::PipelineError;
use crate::ingest::SessionData;

/// Per-trial mean of normalized trust over the kept sessions of `group`.
/// All sessions of a group share one plan, so the exogenous columns come
/// from rebuilding it from the common experiment seed.
pub fn build_series(
    sessions: &[SessionData],
    group: Group,
    world: &WorldConfig,
) -> Result<TrustSeries, PipelineError> {
    let members: Vec<&SessionData> = sessions
        .iter()
        .filter(|s| s.session.group == group)
        .collect();
    let Some(first) = members.first() else {
        return Err(PipelineError::EmptyGroup(group));
    };
    let seed = first.session.experiment_seed;
    if let Some(other) = members.iter().find(|s| s.session.experiment_seed != seed) {
        return Err(PipelineError::MixedSeeds(
            seed,
            other.session.experiment_seed,
        ));
    }

    let mut sums = vec![0.0; MAIN_TRIALS];
    for s in &members {
        let bad = |message: String| PipelineError::Session {
            session_id: s.id().to_string(),
            message,
        };
        if s.trials.len() != PRACTICE_TRIALS + MAIN_TRIALS {
            return Err(bad(format!("{} trials recorded", s.trials.len())));
        }
        for (k, t) in s.trials[PRACTICE_TRIALS..].iter().enumerate() {
            let likert = t
                .survey
                .trust()
                .ok_or_else(|| bad(format!("trial {} has no trust answer", t.trial_index)))?;
            sums[k] += normalize_trust(i64::from(likert))?;
        }
    }
    let n = members.len() as f64;
    let values = sums.into_iter().map(|s| s / n).collect();
    let plan = build_plan(seed, group, world);
    Ok(TrustSeries::from_plan(&plan, values)?)
}
