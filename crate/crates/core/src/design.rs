//! Blocked two-group design, questionnaire content and trust scoring.

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::rng::{derive_seed, substream, tag};
use crate::trial::{Capability, SearcherConfig, Strategy, TrialConfig};
use crate::world::WorldConfig;

pub const PRACTICE_TRIALS: usize = 9;
pub const BLOCKS: usize = 3;
pub const BLOCK_LEN: usize = 21;
pub const MAIN_TRIALS: usize = BLOCKS * BLOCK_LEN;
pub const TOTAL_TRIALS: usize = PRACTICE_TRIALS + MAIN_TRIALS;

/// Group 0 holds the strategy constant within a block, group 1 the
/// capability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    G0,
    G1,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::G0, Group::G1];

    pub fn index(self) -> usize {
        self as usize
    }

    fn stream_tag(self) -> u64 {
        match self {
            Group::G0 => tag::GROUP0,
            Group::G1 => tag::GROUP1,
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Group::G0 => "G0",
            Group::G1 => "G1",
        })
    }
}

impl std::str::FromStr for Group {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "G0" | "g0" | "0" => Ok(Group::G0),
            "G1" | "g1" | "1" => Ok(Group::G1),
            _ => Err(CoreError::InvalidParameter(format!("unknown group {s:?}"))),
        }
    }
}

/// Groups alternate in order of arrival.
pub fn assign_group(session_ordinal: u64) -> Group {
    if session_ordinal % 2 == 0 {
        Group::G0
    } else {
        Group::G1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiment_seed: u64,
    pub group: Group,
    pub practice: Vec<TrialConfig>,
    pub blocks: Vec<Vec<TrialConfig>>,
}

impl ExperimentPlan {
    pub fn trial(&self, index: usize) -> Option<&TrialConfig> {
        if index < PRACTICE_TRIALS {
            self.practice.get(index)
        } else {
            let m = index - PRACTICE_TRIALS;
            self.blocks.get(m / BLOCK_LEN)?.get(m % BLOCK_LEN)
        }
    }

    pub fn main_trials(&self) -> impl Iterator<Item = &TrialConfig> {
        self.blocks.iter().flatten()
    }

    pub fn all_trials(&self) -> impl Iterator<Item = &TrialConfig> {
        self.practice.iter().chain(self.main_trials())
    }

    pub fn len(&self) -> usize {
        self.practice.len() + self.blocks.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Block of a trial index, `None` for practice trials.
    pub fn block_of(index: usize) -> Option<usize> {
        (PRACTICE_TRIALS..TOTAL_TRIALS)
            .contains(&index)
            .then(|| (index - PRACTICE_TRIALS) / BLOCK_LEN)
    }
}

/// Builds the shared plan for a group. Practice trials are identical for
/// both groups; main trials depend only on `(experiment_seed, group)`.
pub fn build_plan(experiment_seed: u64, group: Group, world: &WorldConfig) -> ExperimentPlan {
    let practice = (0..PRACTICE_TRIALS as u32)
        .map(|i| {
            let seed = derive_seed(experiment_seed, &[tag::PRACTICE, u64::from(i)]);
            TrialConfig::new(i, seed, None, world)
        })
        .collect();

    let mut block_levels = [0usize, 1, 2];
    block_levels.shuffle(&mut substream(
        experiment_seed,
        &[group.stream_tag(), tag::BLOCK_ORDER],
    ));

    let blocks = block_levels
        .iter()
        .enumerate()
        .map(|(b, &blocked)| {
            let mut varied: Vec<usize> = (0..3).flat_map(|l| [l; BLOCK_LEN / 3]).collect();
            varied.shuffle(&mut substream(
                experiment_seed,
                &[group.stream_tag(), tag::WITHIN_BLOCK, b as u64],
            ));
            varied
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    let (strategy, capability) = match group {
                        Group::G0 => (Strategy::ALL[blocked], Capability::ALL[v]),
                        Group::G1 => (Strategy::ALL[v], Capability::ALL[blocked]),
                    };
                    let index = (PRACTICE_TRIALS + b * BLOCK_LEN + j) as u32;
                    let seed =
                        derive_seed(experiment_seed, &[group.stream_tag(), u64::from(index)]);
                    TrialConfig::new(
                        index,
                        seed,
                        Some(SearcherConfig::new(strategy, capability)),
                        world,
                    )
                })
                .collect()
        })
        .collect();

    ExperimentPlan {
        experiment_seed,
        group,
        practice,
        blocks,
    }
}

/// Prompts shown between trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub task_q1: String,
    pub as_report_line: String,
    pub task_q2: String,
    pub trust_statements: [TrustStatement; 3],
    pub scale_min: u8,
    pub scale_max: u8,
    pub scale_min_label: String,
    pub scale_max_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustStatement {
    pub text: String,
    pub measure: String,
}

impl Default for Questionnaire {
    fn default() -> Self {
        let st = |text: &str, measure: &str| TrustStatement {
            text: text.into(),
            measure: measure.into(),
        };
        Self {
            task_q1: "How many outliers did you find with your spotlight this trial?".into(),
            as_report_line: "The {color} autonomous searcher reports finding {x} outliers".into(),
            task_q2: "How many total outliers were hidden in the entire grid this trial?".into(),
            trust_statements: [
                st(
                    "I am familiar with the autonomous searcher's strategy.",
                    "strategy",
                ),
                st("The autonomous searcher is reliable.", "capability"),
                st("I trust the autonomous searcher.", "trust"),
            ],
            scale_min: 1,
            scale_max: 9,
            scale_min_label: "Not at All".into(),
            scale_max_label: "Extremely".into(),
        }
    }
}

impl Questionnaire {
    pub fn report_line(&self, color: &str, reported: u32) -> String {
        self.as_report_line
            .replace("{color}", color)
            .replace("{x}", &reported.to_string())
    }
}

/// Index of the modeled trust statement within `likert`.
pub const TRUST_STATEMENT: usize = 2;

/// Answers to one inter-trial questionnaire. Practice trials have no
/// searcher and therefore no Likert answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub trial_index: u32,
    pub found_count: u32,
    pub total_estimate: u32,
    pub likert: Option<[u8; 3]>,
    pub timestamp: DateTime<Utc>,
}

impl SurveyResponse {
    pub fn validate(&self, has_searcher: bool) -> Result<(), CoreError> {
        match (&self.likert, has_searcher) {
            (Some(l), true) => {
                if let Some(bad) = l.iter().find(|v| !(1..=9).contains(*v)) {
                    return Err(CoreError::LikertOutOfRange(i64::from(*bad)));
                }
                Ok(())
            }
            (None, false) => Ok(()),
            (None, true) => Err(CoreError::InvalidParameter(
                "trust survey incomplete".into(),
            )),
            (Some(_), false) => Err(CoreError::InvalidParameter(
                "practice trials take no trust survey".into(),
            )),
        }
    }

    pub fn trust(&self) -> Option<u8> {
        self.likert.map(|l| l[TRUST_STATEMENT])
    }
}

/// Maps the 1..=9 scale affinely onto [0, 1].
pub fn normalize_trust(likert: i64) -> Result<f64, CoreError> {
    if !(1..=9).contains(&likert) {
        return Err(CoreError::LikertOutOfRange(likert));
    }
    Ok((likert - 1) as f64 / 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn plan(seed: u64, g: Group) -> ExperimentPlan {
        build_plan(seed, g, &WorldConfig::default())
    }

    #[test]
    fn groups_alternate() {
        assert_eq!(assign_group(0), Group::G0);
        assert_eq!(assign_group(1), Group::G1);
        assert_eq!(assign_group(7), Group::G1);
        assert_eq!(assign_group(8), Group::G0);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_trust(1).unwrap(), 0.0);
        assert_eq!(normalize_trust(9).unwrap(), 1.0);
        assert_eq!(normalize_trust(5).unwrap(), 0.5);
        assert!(normalize_trust(0).is_err());
        assert!(normalize_trust(10).is_err());
        let v: Vec<f64> = (1..=9).map(|l| normalize_trust(l).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn plan_layout() {
        let p = plan(3, Group::G0);
        assert_eq!(p.practice.len(), 9);
        assert_eq!(p.blocks.len(), 3);
        assert!(p.blocks.iter().all(|b| b.len() == 21));
        assert_eq!(p.len(), 72);
        assert!(p.practice.iter().all(|t| t.searcher.is_none()));
        assert_eq!(p.trial(9).unwrap().trial_index, 9);
        assert!(p.trial(9).unwrap().searcher.is_some());
        assert_eq!(p.trial(71).unwrap().trial_index, 71);
        assert!(p.trial(72).is_none());
        for (i, t) in p.all_trials().enumerate() {
            assert_eq!(t.trial_index as usize, i);
        }
    }

    #[test]
    fn g0_blocks_hold_strategy() {
        let p = plan(11, Group::G0);
        for block in &p.blocks {
            let s = block[0].strategy();
            assert!(block.iter().all(|t| t.strategy() == s));
            let mut counts = BTreeMap::new();
            for t in block {
                *counts.entry(t.capability().unwrap()).or_insert(0) += 1;
            }
            assert_eq!(counts.values().copied().collect::<Vec<_>>(), vec![7, 7, 7]);
        }
    }

    #[test]
    fn g1_blocks_hold_capability() {
        let p = plan(11, Group::G1);
        for block in &p.blocks {
            let c = block[0].capability();
            assert!(block.iter().all(|t| t.capability() == c));
        }
    }

    #[test]
    fn plans_are_shared_and_practice_identical_across_groups() {
        assert_eq!(plan(5, Group::G0), plan(5, Group::G0));
        assert_eq!(plan(5, Group::G0).practice, plan(5, Group::G1).practice);
        assert_ne!(plan(5, Group::G0).blocks, plan(5, Group::G1).blocks);
    }

    #[test]
    fn report_line_text() {
        let q = Questionnaire::default();
        assert_eq!(
            q.report_line("blue", 4),
            "The blue autonomous searcher reports finding 4 outliers"
        );
        assert_eq!(
            q.trust_statements[TRUST_STATEMENT].text,
            "I trust the autonomous searcher."
        );
    }

    #[test]
    fn survey_validation() {
        let mut s = SurveyResponse {
            trial_index: 9,
            found_count: 3,
            total_estimate: 8,
            likert: Some([5, 5, 10]),
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
        };
        assert_eq!(s.validate(true), Err(CoreError::LikertOutOfRange(10)));
        s.likert = Some([1, 9, 5]);
        assert!(s.validate(true).is_ok());
        assert!(s.validate(false).is_err());
        s.likert = None;
        assert!(s.validate(true).is_err());
        assert!(s.validate(false).is_ok());
    }
}
