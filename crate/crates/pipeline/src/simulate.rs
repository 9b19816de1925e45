//! Bot cohorts played through an in-process experiment service.

use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration};
use serde::{Deserialize, Serialize};
use trustgrid_core::design::PRACTICE_TRIALS;
use trustgrid_core::rng::{derive_seed, tag};
use trustgrid_core::synthetic::{
    bot_play_trial, gen_trust_arimax, likert_from_trust, BotKind, BotPolicy, SyntheticTrustParams,
};
use trustgrid_core::{build_plan, Group, SurveyResponse, WorldConfig};
use trustgrid_server::{
    ExportFilter, Frames, NewSession, SeededIds, ServerConfig, Service, SteppingClock, Store,
    SubmitRequest,
};

use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub sessions: usize,
    pub experiment_seed: u64,
    /// Seeds bot behaviour, trust noise and session ids.
    pub cohort_seed: u64,
    pub trust: SyntheticTrustParams,
    /// Bot kinds, cycled over sessions.
    pub bots: Vec<BotKind>,
    pub skill: f64,
    /// Every n-th session uploads its frames in two-second batches instead
    /// of with the submission; 0 disables batching.
    pub batch_every: usize,
    pub world: WorldConfig,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            sessions: 20,
            experiment_seed: 0,
            cohort_seed: 1,
            trust: SyntheticTrustParams::default(),
            bots: vec![
                BotKind::LawnmowerComplement,
                BotKind::RandomWalk,
                BotKind::Overlapper,
            ],
            skill: 0.8,
            batch_every: 4,
            world: WorldConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotSession {
    pub session_id: String,
    pub group: Group,
    pub bot: BotKind,
    pub batched: bool,
}

/// Plays `cfg.sessions` complete sessions into the store at `data_dir`.
pub fn simulate_cohort(
    cfg: &CohortConfig,
    data_dir: &Path,
) -> Result<(Service, Vec<BotSession>), PipelineError> {
    if cfg.bots.is_empty() {
        return Err(PipelineError::Session {
            session_id: String::new(),
            message: "no bot kinds configured".into(),
        });
    }
    let server_cfg = ServerConfig {
        data_dir: data_dir.to_path_buf(),
        experiment_seed: cfg.experiment_seed,
        world: cfg.world,
        ..ServerConfig::default()
    };
    let start = DateTime::from_timestamp(1_704_067_200, 0).expect("valid epoch");
    let clock = SteppingClock::new(start, Duration::seconds(15));
    let ids = SeededIds::new(derive_seed(cfg.cohort_seed, &[tag::SESSION_ID]));
    let svc = Service::open(
        server_cfg,
        Store::open(data_dir)?,
        Arc::new(clock),
        Arc::new(ids),
    )?;

    let mut played = Vec::with_capacity(cfg.sessions);
    for i in 0..cfg.sessions {
        let bot = cfg.bots[i % cfg.bots.len()];
        let batched = cfg.batch_every > 0 && i % cfg.batch_every == cfg.batch_every - 1;
        played.push(play_session(&svc, cfg, i as u64, bot, batched)?);
    }
    Ok((svc, played))
}

fn play_session(
    svc: &Service,
    cfg: &CohortConfig,
    i: u64,
    bot: BotKind,
    batched: bool,
) -> Result<BotSession, PipelineError> {
    let record = svc.create_session_with(NewSession { synthetic: true })?;
    let id = record.session_id.clone();
    let plan = build_plan(cfg.experiment_seed, record.group, &cfg.world);
    let trust = gen_trust_arimax(
        &cfg.trust,
        &plan,
        derive_seed(cfg.cohort_seed, &[tag::TRUST, i]),
    )?;
    let policy = BotPolicy {
        kind: bot,
        skill: cfg.skill,
    };
    let bot_seed = derive_seed(cfg.cohort_seed, &[tag::BOT, i]);
    let batch = 2 * cfg.world.tick_rate as usize + 1;

    for trial in plan.all_trials() {
        let index = trial.trial_index;
        svc.get_trial(&id, index)?;
        let play = bot_play_trial(&policy, trial, &cfg.world, bot_seed)?;
        let likert = (index as usize >= PRACTICE_TRIALS).then(|| {
            let v = likert_from_trust(trust.values[index as usize - PRACTICE_TRIALS]);
            [v; 3]
        });
        if likert.is_some() {
            svc.report_line(&id, index)?;
        }
        let survey = SurveyResponse {
            trial_index: index,
            found_count: play.found_count,
            total_estimate: play.total_estimate,
            likert,
            timestamp: record.created_at + Duration::seconds(30 * i64::from(index + 1)),
        };
        let frames = if batched {
            for chunk in play.frames.chunks(batch) {
                svc.stage_frames(&id, index, chunk.to_vec())?;
            }
            None
        } else {
            Some(Frames(play.frames))
        };
        svc.submit_trial(&id, index, SubmitRequest { frames, survey })?;
    }
    tracing::info!(session_id = %id, group = %record.group, ?bot, batched, "bot session complete");
    Ok(BotSession {
        session_id: id,
        group: record.group,
        bot,
        batched,
    })
}

/// Export lines of every session in `svc`.
pub fn export_text(svc: &Service, with_frames: bool) -> Result<String, PipelineError> {
    let mut buf = Vec::new();
    svc.write_export(
        &ExportFilter {
            frames: Some(with_frames),
            ..ExportFilter::default()
        },
        &mut buf,
    )?;
    Ok(String::from_utf8(buf).expect("export is UTF-8"))
}
