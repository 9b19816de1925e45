//! Parsing of the server's line-delimited export.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use trustgrid_server::{ExportRecord, SessionExport, TrialExport};

use crate::error::PipelineError;

/// A session header with its trials in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionData {
    pub session: SessionExport,
    pub trials: Vec<TrialExport>,
}

impl SessionData {
    pub fn id(&self) -> &str {
        &self.session.session_id
    }
}

pub fn ingest(reader: impl BufRead) -> Result<Vec<SessionData>, PipelineError> {
    let mut out: Vec<SessionData> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExportRecord = serde_json::from_str(&line)
            .map_err(|source| PipelineError::Parse { line: n, source })?;
        match rec {
            ExportRecord::Session(session) => {
                if out
                    .iter()
                    .any(|s| s.session.session_id == session.session_id)
                {
                    return Err(PipelineError::Layout {
                        line: n,
                        message: format!("session {} repeated", session.session_id),
                    });
                }
                out.push(SessionData {
                    session,
                    trials: Vec::new(),
                });
            }
            ExportRecord::Trial(t) => {
                let Some(cur) = out
                    .last_mut()
                    .filter(|s| s.session.session_id == t.session_id)
                else {
                    return Err(PipelineError::Layout {
                        line: n,
                        message: format!("trial for {} outside its session block", t.session_id),
                    });
                };
                if t.trial_index as usize != cur.trials.len() {
                    return Err(PipelineError::Layout {
                        line: n,
                        message: format!(
                            "trial {} where {} was expected",
                            t.trial_index,
                            cur.trials.len()
                        ),
                    });
                }
                cur.trials.push(t);
            }
        }
    }
    Ok(out)
}

pub fn ingest_str(text: &str) -> Result<Vec<SessionData>, PipelineError> {
    ingest(text.as_bytes())
}

/// Writes sessions back in export form.
pub fn to_export_lines(sessions: &[SessionData]) -> Result<String, PipelineError> {
    let mut out = String::new();
    for s in sessions {
        out.push_str(&serde_json::to_string(&ExportRecord::Session(
            s.session.clone(),
        ))?);
        out.push('\n');
        for t in &s.trials {
            out.push_str(&serde_json::to_string(&ExportRecord::Trial(t.clone()))?);
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        assert!(ingest_str("").unwrap().is_empty());
        assert!(ingest_str("\n\n").unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = ingest_str("\n{\"record\":\"nope\"}\n").unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 2, .. }), "{err}");
    }
}
