mod common;

use std::collections::HashSet;

use common::{open, play_all, request, survey};
use trustgrid_core::{Group, Keys};
use trustgrid_server::{
    ExportFilter, ExportRecord, Fault, Frames, ServerError, SessionStatus, SubmitRequest,
};

#[test]
fn groups_alternate_from_first_session() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let groups: Vec<Group> = (0..4)
        .map(|_| svc.create_session().unwrap().group)
        .collect();
    assert_eq!(groups, [Group::G0, Group::G1, Group::G0, Group::G1]);
}

#[test]
fn ten_thousand_unique_ids() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let ids: HashSet<String> = (0..10_000)
        .map(|_| svc.create_session().unwrap().session_id)
        .collect();
    assert_eq!(ids.len(), 10_000);
}

#[test]
fn reopening_the_store_continues_ordinals() {
    let dir = tempfile::tempdir().unwrap();
    let first = open(dir.path()).create_session().unwrap();
    let second = open(dir.path()).create_session().unwrap();
    assert_ne!(first.session_id, second.session_id);
    assert_eq!((first.group, second.group), (Group::G0, Group::G1));
}

#[test]
fn practice_then_main_trials() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    for i in 0..9 {
        let t = svc.get_trial(&id, i).unwrap();
        assert!(t.searcher.is_none() && t.block.is_none());
        assert!(matches!(
            svc.report_line(&id, i),
            Err(ServerError::NoSearcher(_))
        ));
        svc.submit_trial(&id, i, request(Group::G0, i)).unwrap();
    }
    let t = svc.get_trial(&id, 9).unwrap();
    assert!(t.searcher.is_some());
    assert_eq!(t.block, Some(0));
    let line = svc.report_line(&id, 9).unwrap();
    assert!(line.line.starts_with(&format!(
        "The {} autonomous searcher reports finding",
        line.color_name
    )));
}

#[test]
fn skipping_ahead_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    assert!(matches!(
        svc.get_trial(&id, 1),
        Err(ServerError::OutOfOrder {
            expected: 0,
            got: 1
        })
    ));
    assert!(matches!(
        svc.submit_trial(&id, 3, request(Group::G0, 3)),
        Err(ServerError::OutOfOrder { .. })
    ));
    assert!(matches!(
        svc.get_trial(&id, 72),
        Err(ServerError::UnknownTrial(72))
    ));
    assert!(matches!(
        svc.get_trial("nope", 0),
        Err(ServerError::UnknownSession(_))
    ));
}

#[test]
fn duplicate_submit_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    let a = svc.submit_trial(&id, 0, request(Group::G0, 0)).unwrap();
    let b = svc.submit_trial(&id, 0, request(Group::G0, 0)).unwrap();
    assert_eq!(a, b);
    let score = svc.score(&id).unwrap();
    assert_eq!(score.trial_cursor, 1);
    assert_eq!(score.cumulative_score, a.cumulative_score);

    let mut changed = request(Group::G0, 0);
    changed.survey.total_estimate += 1;
    assert!(matches!(
        svc.submit_trial(&id, 0, changed),
        Err(ServerError::Conflict(0))
    ));
}

#[test]
fn likert_out_of_scale_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    for i in 0..9 {
        svc.submit_trial(&id, i, request(Group::G0, i)).unwrap();
    }
    let mut req = request(Group::G0, 9);
    req.survey = survey(9, false, 10);
    assert!(matches!(
        svc.submit_trial(&id, 9, req),
        Err(ServerError::Survey(_))
    ));
    assert_eq!(svc.score(&id).unwrap().trial_cursor, 9);
}

#[test]
fn tampered_frames_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    let good = request(Group::G0, 0);
    let frames = good.frames.clone().unwrap().0;

    let mut moved = frames.clone();
    moved[100].pos[0] += 1e-9;
    let mut rekeyed = frames.clone();
    rekeyed[50].keys = Keys(rekeyed[50].keys.0 ^ Keys::RIGHT.0);
    let mut retimed = frames.clone();
    retimed[10].t += 0.02;
    let mut long = frames.clone();
    while long.len() <= 631 {
        let last = *long.last().unwrap();
        long.push(trustgrid_core::step_spotlight(
            &last,
            Keys::NONE,
            &trustgrid_core::WorldConfig::default(),
        ));
    }
    for bad in [moved, rekeyed, retimed, long, Vec::new()] {
        let req = SubmitRequest {
            frames: Some(Frames(bad)),
            survey: good.survey.clone(),
        };
        assert!(matches!(
            svc.submit_trial(&id, 0, req),
            Err(ServerError::Frames(_))
        ));
    }
    // a shortened but legal log is accepted
    let req = SubmitRequest {
        frames: Some(Frames(frames[..300].to_vec())),
        survey: good.survey.clone(),
    };
    svc.submit_trial(&id, 0, req).unwrap();
}

#[test]
fn staged_batches_equal_inline_upload() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let a = svc.create_session().unwrap().session_id;
    let _ = svc.create_session().unwrap();
    let c = svc.create_session().unwrap().session_id;
    let req = request(Group::G0, 0);
    let frames = req.frames.clone().unwrap().0;
    for chunk in frames.chunks(60) {
        svc.stage_frames(&a, 0, chunk.to_vec()).unwrap();
    }
    assert!(matches!(
        svc.stage_frames(&a, 0, frames[..70].to_vec()),
        Err(ServerError::Frames(_))
    ));
    let staged = svc
        .submit_trial(
            &a,
            0,
            SubmitRequest {
                frames: None,
                survey: req.survey.clone(),
            },
        )
        .unwrap();
    let inline = svc.submit_trial(&c, 0, req).unwrap();
    assert_eq!(staged, inline);
}

#[test]
fn full_session_completes_and_freezes() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    let id = svc.create_session().unwrap().session_id;
    play_all(&svc, &id, Group::G0);
    let rec = svc.session_record(&id).unwrap();
    assert_eq!(
        (rec.status, rec.trial_cursor),
        (SessionStatus::Complete, 72)
    );
    assert!(matches!(
        svc.get_trial(&id, 71),
        Err(ServerError::NotActive(SessionStatus::Complete))
    ));
    assert!(matches!(
        svc.abandon(&id),
        Err(ServerError::Transition { .. })
    ));
    // the final submission can still be repeated
    assert_eq!(
        svc.submit_trial(&id, 71, request(Group::G0, 71))
            .unwrap()
            .status,
        SessionStatus::Complete
    );
}

#[test]
fn abandonment_is_terminal_and_persistent() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let svc = open(dir.path());
        let id = svc.create_session().unwrap().session_id;
        svc.submit_trial(&id, 0, request(Group::G0, 0)).unwrap();
        assert_eq!(svc.abandon(&id).unwrap().status, SessionStatus::Abandoned);
        assert_eq!(svc.abandon(&id).unwrap().status, SessionStatus::Abandoned);
        assert!(matches!(
            svc.get_trial(&id, 1),
            Err(ServerError::NotActive(SessionStatus::Abandoned))
        ));
        id
    };
    let svc = open(dir.path());
    let rec = svc.session_record(&id).unwrap();
    assert_eq!(
        (rec.status, rec.trial_cursor),
        (SessionStatus::Abandoned, 1)
    );
}

#[test]
fn crash_never_leaves_cursor_ahead_of_logs() {
    for fault in [
        Fault::FailBeforeWrite,
        Fault::TornWrite,
        Fault::FailAfterWrite,
    ] {
        let dir = tempfile::tempdir().unwrap();
        let (id, first) = {
            let svc = open(dir.path());
            let id = svc.create_session().unwrap().session_id;
            let first = svc.submit_trial(&id, 0, request(Group::G0, 0)).unwrap();
            svc.store().inject_fault(fault);
            assert!(svc.submit_trial(&id, 1, request(Group::G0, 1)).is_err());
            // in-process state never advances past a failed write
            assert_eq!(svc.score(&id).unwrap().trial_cursor, 1);
            (id, first)
        };
        // restart from disk
        let svc = open(dir.path());
        let stored = svc
            .export(&ExportFilter::default())
            .iter()
            .filter(|r| matches!(r, ExportRecord::Trial(_)))
            .count() as u32;
        let cursor = svc.score(&id).unwrap().trial_cursor;
        assert_eq!(cursor, stored, "{fault:?}");
        let expected = if fault == Fault::FailAfterWrite { 2 } else { 1 };
        assert_eq!(cursor, expected, "{fault:?}");
        // retrying the trial either reproduces the stored result or accepts it now
        let retry = svc.submit_trial(&id, 1, request(Group::G0, 1)).unwrap();
        assert_eq!(retry.trial_cursor, 2);
        assert_eq!(
            retry.cumulative_score,
            first.cumulative_score + retry.score_delta
        );
        assert_eq!(svc.score(&id).unwrap().trial_cursor, 2);
    }
}

#[test]
fn export_counts_filters_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path());
    assert!(svc.export(&ExportFilter::default()).is_empty());
    let a = svc.create_session().unwrap().session_id;
    let b = svc.create_session().unwrap().session_id;
    play_all(&svc, &a, Group::G0);
    play_all(&svc, &b, Group::G1);

    let all = svc.export(&ExportFilter::default());
    let trials: Vec<_> = all
        .iter()
        .filter(|r| matches!(r, ExportRecord::Trial(_)))
        .collect();
    assert_eq!(trials.len(), 2 * 72);
    // ordering by (session, trial)
    let keys: Vec<(String, u32)> = all
        .iter()
        .filter_map(|r| match r {
            ExportRecord::Trial(t) => Some((t.session_id.clone(), t.trial_index)),
            _ => None,
        })
        .collect();
    assert_eq!(keys[0], (a.clone(), 0));
    assert_eq!(keys[72], (b.clone(), 0));
    assert!(keys[..72].windows(2).all(|w| w[0].1 + 1 == w[1].1));

    let mut text = Vec::new();
    svc.write_export(&ExportFilter::default(), &mut text)
        .unwrap();
    let parsed: Vec<ExportRecord> = String::from_utf8(text)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(parsed, all);

    let g1 = svc.export(&ExportFilter {
        group: Some(Group::G1),
        frames: Some(false),
        ..Default::default()
    });
    assert_eq!(g1.len(), 73);
    assert!(g1.iter().all(|r| match r {
        ExportRecord::Session(s) => s.session_id == b,
        ExportRecord::Trial(t) => t.frames.is_none(),
    }));
}
