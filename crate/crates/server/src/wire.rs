//! Request, response, storage and export records. Field names here are
//! the wire contract shared with the browser client and the pipeline.

use chrono::{DateTime, Utc};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use trustgrid_core::{
    FrameState, GridCell, Group, Keys, Questionnaire, SearcherColor, Strategy, SurveyResponse,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Complete,
    Abandoned,
}

impl SessionStatus {
    /// Statuses only move forward: Active to Complete or Abandoned.
    pub fn can_become(self, next: SessionStatus) -> bool {
        self == next || self == SessionStatus::Active
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub group: Group,
    pub created_at: DateTime<Utc>,
    pub status: SessionStatus,
    pub trial_cursor: u32,
    pub cumulative_score: u32,
}

/// Frames on the wire are compact arrays `[t, x, y, vx, vy, keys]`.
/// Floats round-trip bit-exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frames(pub Vec<FrameState>);

type FrameTuple = (f64, f64, f64, f64, f64, u8);

impl Serialize for Frames {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            self.0
                .iter()
                .map(|f| (f.t, f.pos[0], f.pos[1], f.vel[0], f.vel[1], f.keys.0)),
        )
    }
}

impl<'de> Deserialize<'de> for Frames {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<FrameTuple> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|(t, x, y, vx, vy, k)| {
                let keys = Keys(k);
                if !keys.is_valid() {
                    return Err(D::Error::custom(format!("invalid key mask {k}")));
                }
                Ok(FrameState {
                    t,
                    pos: [x, y],
                    vel: [vx, vy],
                    keys,
                })
            })
            .collect::<Result<_, _>>()
            .map(Frames)
    }
}

/// The searcher as shown to subjects: strategy and colour, never the
/// capability behind the colour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicSearcher {
    pub strategy: Strategy,
    pub color: SearcherColor,
    pub color_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialView {
    pub session_id: String,
    pub trial_index: u32,
    /// 0-based main block, absent for practice trials.
    pub block: Option<usize>,
    pub rng_seed: u64,
    pub outlier_cells: Vec<GridCell>,
    pub searcher: Option<PublicSearcher>,
    pub trial_duration: f64,
    pub warning_lead: f64,
    pub questionnaire: Questionnaire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBatch {
    pub frames: Frames,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchAck {
    pub trial_index: u32,
    pub staged_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub trial_index: u32,
    pub color: SearcherColor,
    pub color_name: String,
    pub reported: u32,
    pub line: String,
}

/// Frames may come inline or from earlier batches for the same trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Frames>,
    pub survey: SurveyResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u32,
    pub truth_count: u32,
    pub subject_intersections: u32,
    pub searcher_reported: Option<u32>,
    pub report_line: Option<String>,
    pub score_delta: u32,
    pub cumulative_score: u32,
    pub trial_cursor: u32,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreView {
    pub session_id: String,
    pub cumulative_score: u32,
    pub trial_cursor: u32,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

/// First record of every session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub ordinal: u64,
    pub group: Group,
    pub experiment_seed: u64,
    pub created_at: DateTime<Utc>,
    /// Set for sessions played by bots.
    #[serde(default)]
    pub synthetic: bool,
}

/// One accepted trial, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub session_id: String,
    pub trial_index: u32,
    pub frames: Frames,
    pub survey: SurveyResponse,
    pub server_recv_at: DateTime<Utc>,
    pub result: TrialResult,
}

/// Lines of a session log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StoredEvent {
    Created(SessionHeader),
    Trial(TrialLog),
    Status {
        status: SessionStatus,
        at: DateTime<Utc>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub session_id: String,
    pub ordinal: u64,
    pub group: Group,
    pub experiment_seed: u64,
    pub created_at: DateTime<Utc>,
    pub status: SessionStatus,
    pub trial_cursor: u32,
    pub cumulative_score: u32,
    #[serde(default)]
    pub synthetic: bool,
}

/// Query of `POST /sessions`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewSession {
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialExport {
    pub session_id: String,
    pub trial_index: u32,
    pub server_recv_at: DateTime<Utc>,
    pub survey: SurveyResponse,
    pub result: TrialResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Frames>,
}

/// One line of the export stream. Sessions come in creation order, each
/// followed by its trials in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ExportRecord {
    Session(SessionExport),
    Trial(TrialExport),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportFilter {
    /// Omit frame arrays when false.
    pub frames: Option<bool>,
    pub group: Option<Group>,
    pub status: Option<SessionStatus>,
    pub session_id: Option<String>,
}

impl ExportFilter {
    pub fn include_frames(&self) -> bool {
        self.frames.unwrap_or(true)
    }
}
