//! Session lifecycle and trial ingestion, independent of transport.
//!
//! Each session has its own lock, so operations on one session are
//! serialised while sessions proceed independently. The trial cursor is
//! never stored: it is the number of trial records in the session log,
//! which keeps it from running ahead of durable data.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Arc, Mutex, RwLock};

use trustgrid_core::design::TOTAL_TRIALS;
use trustgrid_core::kinematics::first_illegal_frame;
use trustgrid_core::search::start_frame;
use trustgrid_core::{
    assign_group, build_plan, simulate_trial, trial_score, ExperimentPlan, FrameState, Group,
    Questionnaire, TrialConfig,
};

use crate::clock::{Clock, IdSource};
use crate::config::ServerConfig;
use crate::error::ServerError;
use crate::store::Store;
use crate::wire::{
    BatchAck, ExportFilter, ExportRecord, Frames, NewSession, PublicSearcher, ReportLine,
    ScoreView, SessionExport, SessionHeader, SessionRecord, SessionStatus, StoredEvent,
    SubmitRequest, TrialExport, TrialLog, TrialResult, TrialView,
};

struct Session {
    header: SessionHeader,
    plan: Arc<ExperimentPlan>,
    abandoned: bool,
    trials: Vec<TrialLog>,
    staged: BTreeMap<u32, Vec<FrameState>>,
}

impl Session {
    fn cursor(&self) -> u32 {
        self.trials.len() as u32
    }

    fn status(&self) -> SessionStatus {
        if self.trials.len() == TOTAL_TRIALS {
            SessionStatus::Complete
        } else if self.abandoned {
            SessionStatus::Abandoned
        } else {
            SessionStatus::Active
        }
    }

    fn score(&self) -> u32 {
        self.trials.last().map_or(0, |t| t.result.cumulative_score)
    }

    fn record(&self) -> SessionRecord {
        SessionRecord {
            session_id: self.header.session_id.clone(),
            group: self.header.group,
            created_at: self.header.created_at,
            status: self.status(),
            trial_cursor: self.cursor(),
            cumulative_score: self.score(),
        }
    }

    fn require_active(&self) -> Result<(), ServerError> {
        match self.status() {
            SessionStatus::Active => Ok(()),
            s => Err(ServerError::NotActive(s)),
        }
    }

    /// The plan trial at `index`, which must be the current one.
    fn current(&self, index: u32) -> Result<&TrialConfig, ServerError> {
        let trial = self
            .plan
            .trial(index as usize)
            .ok_or(ServerError::UnknownTrial(index))?;
        self.require_active()?;
        if index != self.cursor() {
            return Err(ServerError::OutOfOrder {
                expected: self.cursor(),
                got: index,
            });
        }
        Ok(trial)
    }
}

pub struct Service {
    config: ServerConfig,
    store: Store,
    questionnaire: Questionnaire,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdSource>,
    plans: Mutex<HashMap<(u64, Group), Arc<ExperimentPlan>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    /// Next ordinal; the lock also serialises session creation.
    next_ordinal: Mutex<u64>,
}

impl Service {
    /// Opens the store and rebuilds every session from its log.
    pub fn open(
        config: ServerConfig,
        store: Store,
        clock: Arc<dyn Clock>,
        ids: Arc<dyn IdSource>,
    ) -> Result<Self, ServerError> {
        config.validate()?;
        let svc = Self {
            questionnaire: Questionnaire::default(),
            next_ordinal: Mutex::new(store.next_ordinal()?),
            plans: Mutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
            config,
            store,
            clock,
            ids,
        };
        let loaded = svc.store.load()?;
        let mut map = svc.sessions.write().expect("session map");
        for ls in loaded {
            let plan = svc.plan(ls.header.experiment_seed, ls.header.group);
            let mut session = Session {
                header: ls.header,
                plan,
                abandoned: false,
                trials: Vec::new(),
                staged: BTreeMap::new(),
            };
            for ev in ls.events {
                match ev {
                    StoredEvent::Trial(log) => {
                        if log.trial_index != session.cursor() {
                            return Err(ServerError::Inconsistent(format!(
                                "session {} stores trial {} at position {}",
                                session.header.session_id,
                                log.trial_index,
                                session.cursor()
                            )));
                        }
                        session.trials.push(log);
                    }
                    StoredEvent::Status {
                        status: SessionStatus::Abandoned,
                        ..
                    } => session.abandoned = true,
                    StoredEvent::Status { .. } => {}
                    StoredEvent::Created(_) => {
                        return Err(ServerError::Inconsistent("repeated created record".into()));
                    }
                }
            }
            map.insert(
                session.header.session_id.clone(),
                Arc::new(Mutex::new(session)),
            );
        }
        drop(map);
        tracing::info!(sessions = svc.session_count(), "store loaded");
        Ok(svc)
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn questionnaire(&self) -> &Questionnaire {
        &self.questionnaire
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    fn plan(&self, seed: u64, group: Group) -> Arc<ExperimentPlan> {
        self.plans
            .lock()
            .expect("plan cache")
            .entry((seed, group))
            .or_insert_with(|| Arc::new(build_plan(seed, group, &self.config.world)))
            .clone()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServerError> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ServerError::UnknownSession(id.to_string()))
    }

    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, ServerError>,
    ) -> Result<T, ServerError> {
        let s = self.session(id)?;
        let mut guard = s.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn create_session(&self) -> Result<SessionRecord, ServerError> {
        self.create_session_with(NewSession::default())
    }

    pub fn create_session_with(&self, opts: NewSession) -> Result<SessionRecord, ServerError> {
        let mut next = self.next_ordinal.lock().expect("ordinal lock");
        let ordinal = *next;
        let session_id = loop {
            let id = self.ids.next_id();
            if !self.sessions.read().expect("session map").contains_key(&id) {
                break id;
            }
        };
        let group = assign_group(ordinal);
        let header = SessionHeader {
            session_id: session_id.clone(),
            ordinal,
            group,
            experiment_seed: self.config.experiment_seed,
            created_at: self.clock.now(),
            synthetic: opts.synthetic,
        };
        self.store.create_session(&header)?;
        *next += 1;
        let plan = self.plan(header.experiment_seed, group);
        let session = Session {
            header,
            plan,
            abandoned: false,
            trials: Vec::new(),
            staged: BTreeMap::new(),
        };
        let record = session.record();
        self.sessions
            .write()
            .expect("session map")
            .insert(session_id.clone(), Arc::new(Mutex::new(session)));
        tracing::info!(%session_id, ordinal, %group, "session created");
        Ok(record)
    }

    pub fn session_record(&self, id: &str) -> Result<SessionRecord, ServerError> {
        self.with_session(id, |s| Ok(s.record()))
    }

    pub fn get_trial(&self, id: &str, index: u32) -> Result<TrialView, ServerError> {
        self.with_session(id, |s| {
            let trial = s.current(index)?;
            let w = &self.config.world;
            Ok(TrialView {
                session_id: id.to_string(),
                trial_index: index,
                block: ExperimentPlan::block_of(index as usize),
                rng_seed: trial.rng_seed,
                outlier_cells: trial.outlier_cells.clone(),
                searcher: trial.searcher.map(|c| PublicSearcher {
                    strategy: c.strategy,
                    color: c.color,
                    color_name: c.color.name().to_string(),
                }),
                trial_duration: w.trial_duration,
                warning_lead: w.warning_lead,
                questionnaire: self.questionnaire.clone(),
            })
        })
    }

    /// The searcher's report for the current trial, shown between the two
    /// task questions.
    pub fn report_line(&self, id: &str, index: u32) -> Result<ReportLine, ServerError> {
        self.with_session(id, |s| {
            let trial = s.current(index)?;
            let cfg = trial.searcher.ok_or(ServerError::NoSearcher(index))?;
            let reported = simulate_trial(trial, &self.config.world, None).reported_by_as;
            Ok(ReportLine {
                trial_index: index,
                color: cfg.color,
                color_name: cfg.color.name().to_string(),
                reported,
                line: self.questionnaire.report_line(cfg.color.name(), reported),
            })
        })
    }

    /// Stages a batch of at most two seconds of frames for the current
    /// trial. Staged frames are validated as a whole at submission.
    pub fn stage_frames(
        &self,
        id: &str,
        index: u32,
        frames: Vec<FrameState>,
    ) -> Result<BatchAck, ServerError> {
        let batch_limit = 2 * self.config.world.tick_rate as usize + 1;
        if frames.len() > batch_limit {
            return Err(ServerError::Frames(format!(
                "batch of {} frames exceeds {batch_limit}",
                frames.len()
            )));
        }
        self.with_session(id, |s| {
            s.current(index)?;
            let staged = s.staged.entry(index).or_default();
            if staged.len() + frames.len() > self.config.max_frames() {
                return Err(ServerError::Frames(format!(
                    "more than {} frames",
                    self.config.max_frames()
                )));
            }
            staged.extend(frames);
            Ok(BatchAck {
                trial_index: index,
                staged_frames: staged.len(),
            })
        })
    }

    pub fn submit_trial(
        &self,
        id: &str,
        index: u32,
        req: SubmitRequest,
    ) -> Result<TrialResult, ServerError> {
        self.with_session(id, |s| {
            if let Some(prev) = s.trials.get(index as usize) {
                let same_frames = req.frames.as_ref().is_none_or(|f| *f == prev.frames);
                return if same_frames && req.survey == prev.survey {
                    Ok(prev.result.clone())
                } else {
                    Err(ServerError::Conflict(index))
                };
            }
            let trial = s.current(index)?;
            let has_searcher = trial.searcher.is_some();
            if req.survey.trial_index != index {
                return Err(ServerError::Frames(format!(
                    "survey is for trial {}",
                    req.survey.trial_index
                )));
            }
            req.survey.validate(has_searcher)?;
            let frames = match req.frames {
                Some(f) => f.0,
                None => s
                    .staged
                    .get(&index)
                    .cloned()
                    .ok_or_else(|| ServerError::Frames("no frames".into()))?,
            };
            self.validate_frames(&frames)?;

            let outcome = simulate_trial(trial, &self.config.world, Some(&frames));
            let score_delta = trial_score(req.survey.total_estimate, outcome.truth_count);
            let cursor = index + 1;
            let result = TrialResult {
                trial_index: index,
                truth_count: outcome.truth_count,
                subject_intersections: outcome.intersected_by_subject.unwrap_or(0),
                searcher_reported: has_searcher.then_some(outcome.reported_by_as),
                report_line: trial.searcher.map(|c| {
                    self.questionnaire
                        .report_line(c.color.name(), outcome.reported_by_as)
                }),
                score_delta,
                cumulative_score: s.score() + score_delta,
                trial_cursor: cursor,
                status: if cursor as usize == TOTAL_TRIALS {
                    SessionStatus::Complete
                } else {
                    SessionStatus::Active
                },
            };
            let log = TrialLog {
                session_id: id.to_string(),
                trial_index: index,
                frames: Frames(frames),
                survey: req.survey,
                server_recv_at: self.clock.now(),
                result: result.clone(),
            };
            self.store.append(id, &StoredEvent::Trial(log.clone()))?;
            s.trials.push(log);
            s.staged.remove(&index);
            tracing::debug!(
                session_id = id,
                trial = index,
                score = result.score_delta,
                "trial accepted"
            );
            Ok(result)
        })
    }

    fn validate_frames(&self, frames: &[FrameState]) -> Result<(), ServerError> {
        let w = &self.config.world;
        let bad = |m: String| Err(ServerError::Frames(m));
        if frames.is_empty() {
            return bad("no frames".into());
        }
        if frames.len() > self.config.max_frames() {
            return bad(format!(
                "{} frames exceed the limit of {}",
                frames.len(),
                self.config.max_frames()
            ));
        }
        if let Some(i) = frames
            .iter()
            .position(|f| !(f.t.is_finite() && f.pos.iter().chain(&f.vel).all(|v| v.is_finite())))
        {
            return bad(format!("frame {i} has non-finite values"));
        }
        let jitter = self.config.time_jitter;
        if frames[0].t.abs() > jitter {
            return bad(format!("first frame at t = {}", frames[0].t));
        }
        if let Some(i) = frames.windows(2).position(|p| {
            let dt = p[1].t - p[0].t;
            !(dt > 0.0 && (dt - w.dt()).abs() <= jitter)
        }) {
            return bad(format!(
                "frame {} is not one tick after its predecessor",
                i + 1
            ));
        }
        if let Some(i) = first_illegal_frame(frames, &start_frame(w), w) {
            return bad(format!(
                "frame {i} does not replay from its predecessor and keys"
            ));
        }
        Ok(())
    }

    pub fn score(&self, id: &str) -> Result<ScoreView, ServerError> {
        self.with_session(id, |s| {
            Ok(ScoreView {
                session_id: id.to_string(),
                cumulative_score: s.score(),
                trial_cursor: s.cursor(),
                status: s.status(),
            })
        })
    }

    /// Marks a session abandoned. Repeating the call is harmless; a
    /// complete session cannot be abandoned.
    pub fn abandon(&self, id: &str) -> Result<SessionRecord, ServerError> {
        self.with_session(id, |s| {
            let from = s.status();
            if !from.can_become(SessionStatus::Abandoned) {
                return Err(ServerError::Transition {
                    from,
                    to: SessionStatus::Abandoned,
                });
            }
            if from == SessionStatus::Active {
                let ev = StoredEvent::Status {
                    status: SessionStatus::Abandoned,
                    at: self.clock.now(),
                };
                self.store.append(id, &ev)?;
                s.abandoned = true;
                s.staged.clear();
                tracing::info!(session_id = id, cursor = s.cursor(), "session abandoned");
            }
            Ok(s.record())
        })
    }

    /// Sessions in creation order, each followed by its trials. Every
    /// session is read under its own lock.
    pub fn export(&self, filter: &ExportFilter) -> Vec<ExportRecord> {
        let mut sessions: Vec<Arc<Mutex<Session>>> = self
            .sessions
            .read()
            .expect("session map")
            .values()
            .cloned()
            .collect();
        sessions.sort_by_key(|s| s.lock().expect("session lock").header.ordinal);
        let mut out = Vec::new();
        for s in sessions {
            let s = s.lock().expect("session lock");
            let h = &s.header;
            if filter.group.is_some_and(|g| g != h.group)
                || filter.status.is_some_and(|st| st != s.status())
                || filter
                    .session_id
                    .as_ref()
                    .is_some_and(|id| *id != h.session_id)
            {
                continue;
            }
            out.push(ExportRecord::Session(SessionExport {
                session_id: h.session_id.clone(),
                ordinal: h.ordinal,
                group: h.group,
                experiment_seed: h.experiment_seed,
                created_at: h.created_at,
                status: s.status(),
                trial_cursor: s.cursor(),
                cumulative_score: s.score(),
                synthetic: h.synthetic,
            }));
            out.extend(s.trials.iter().map(|t| {
                ExportRecord::Trial(TrialExport {
                    session_id: t.session_id.clone(),
                    trial_index: t.trial_index,
                    server_recv_at: t.server_recv_at,
                    survey: t.survey.clone(),
                    result: t.result.clone(),
                    frames: filter.include_frames().then(|| t.frames.clone()),
                })
            }));
        }
        out
    }

    pub fn write_export(
        &self,
        filter: &ExportFilter,
        mut w: impl Write,
    ) -> Result<(), ServerError> {
        for rec in self.export(filter) {
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
