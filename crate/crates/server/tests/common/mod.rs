#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration};
use trustgrid_core::synthetic::{bot_play_trial, BotKind, BotPolicy};
use trustgrid_core::{build_plan, FrameState, Group, SurveyResponse, WorldConfig};
use trustgrid_server::{
    Frames, SeededIds, ServerConfig, Service, SteppingClock, Store, SubmitRequest,
};

pub const SEED: u64 = 2024;

pub fn config(dir: &Path) -> ServerConfig {
    ServerConfig {
        data_dir: dir.to_path_buf(),
        experiment_seed: SEED,
        ..ServerConfig::default()
    }
}

pub fn open(dir: &Path) -> Service {
    let clock = SteppingClock::new(
        DateTime::from_timestamp(1_700_000_000, 0).unwrap(),
        Duration::seconds(20),
    );
    Service::open(
        config(dir),
        Store::open(dir).unwrap(),
        Arc::new(clock),
        Arc::new(SeededIds::new(9)),
    )
    .unwrap()
}

pub fn frames_for(group: Group, index: u32, kind: BotKind) -> Vec<FrameState> {
    let world = WorldConfig::default();
    let plan = build_plan(SEED, group, &world);
    let trial = plan.trial(index as usize).unwrap();
    bot_play_trial(&BotPolicy { kind, skill: 1.0 }, trial, &world, 5)
        .unwrap()
        .frames
}

pub fn survey(index: u32, practice: bool, likert: u8) -> SurveyResponse {
    SurveyResponse {
        trial_index: index,
        found_count: 3,
        total_estimate: 9,
        likert: (!practice).then_some([likert, likert, likert]),
        timestamp: DateTime::from_timestamp(1_700_000_000 + i64::from(index) * 30, 0).unwrap(),
    }
}

pub fn request(group: Group, index: u32) -> SubmitRequest {
    SubmitRequest {
        frames: Some(Frames(frames_for(group, index, BotKind::RandomWalk))),
        survey: survey(index, index < 9, 5),
    }
}

/// Plays a whole session with a random-walk bot.
pub fn play_all(svc: &Service, id: &str, group: Group) {
    for i in 0..72 {
        svc.get_trial(id, i).unwrap();
        svc.submit_trial(id, i, request(group, i)).unwrap();
    }
}
