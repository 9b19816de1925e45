//! Session exclusion rules. Each excluded session gets exactly one
//! primary reason, checked in the order Incomplete, OutOfProtocolBreak,
//! UnreasonableAnswers. Verdicts depend only on the session itself.

use serde::{Deserialize, Serialize};
use trustgrid_server::SessionStatus;

use crate::ingest::SessionData;

/// Cells in the 7x7 grid, the most outliers any trial could hold.
pub const MAX_PLAUSIBLE_ESTIMATE: u32 = 49;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExclusionThresholds {
    /// Longest allowed gap between consecutive trial submissions.
    pub max_gap_minutes: f64,
    /// Largest plausible answer to "how many outliers in total".
    pub max_total_estimate: u32,
    /// Number of implausible answers that excludes a session.
    pub unreasonable_trials: usize,
}

impl Default for ExclusionThresholds {
    fn default() -> Self {
        Self {
            max_gap_minutes: 10.0,
            max_total_estimate: MAX_PLAUSIBLE_ESTIMATE,
            unreasonable_trials: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    Incomplete,
    OutOfProtocolBreak,
    UnreasonableAnswers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub session_id: String,
    pub reason: ExclusionReason,
    pub evidence: String,
}

pub fn verdict(s: &SessionData, th: &ExclusionThresholds) -> Option<ExclusionReport> {
    let report = |reason, evidence: String| {
        Some(ExclusionReport {
            session_id: s.id().to_string(),
            reason,
            evidence,
        })
    };

    if s.session.status != SessionStatus::Complete {
        return report(
            ExclusionReason::Incomplete,
            format!(
                "status {:?} after {} trials",
                s.session.status,
                s.trials.len()
            ),
        );
    }

    let longest = s
        .trials
        .windows(2)
        .map(|w| {
            (
                w[1].trial_index,
                (w[1].server_recv_at - w[0].server_recv_at).num_milliseconds() as f64 / 60_000.0,
            )
        })
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((at, minutes)) = longest.filter(|(_, m)| *m > th.max_gap_minutes) {
        return report(
            ExclusionReason::OutOfProtocolBreak,
            format!(
                "{minutes:.1} min gap before trial {at} (threshold {} min)",
                th.max_gap_minutes
            ),
        );
    }

    let bad: Vec<u32> = s
        .trials
        .iter()
        .filter(|t| {
            t.survey.total_estimate > th.max_total_estimate
                || t.survey.found_count > t.result.truth_count
        })
        .map(|t| t.trial_index)
        .collect();
    if bad.len() >= th.unreasonable_trials {
        return report(
            ExclusionReason::UnreasonableAnswers,
            format!(
                "{} implausible answers (trials {:?}; threshold {}, total estimate limit {})",
                bad.len(),
                bad,
                th.unreasonable_trials,
                th.max_total_estimate
            ),
        );
    }
    None
}

/// Splits sessions into kept ones and exclusion reports.
pub fn exclude(
    sessions: Vec<SessionData>,
    th: &ExclusionThresholds,
) -> (Vec<SessionData>, Vec<ExclusionReport>) {
    let mut kept = Vec::new();
    let mut reports = Vec::new();
    for s in sessions {
        match verdict(&s, th) {
            Some(r) => {
                tracing::info!(session_id = %r.session_id, reason = ?r.reason, evidence = %r.evidence, "excluded");
                reports.push(r);
            }
            None => kept.push(s),
        }
    }
    (kept, reports)
}
