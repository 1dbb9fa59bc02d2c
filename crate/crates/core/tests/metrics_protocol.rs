use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use vfr_core::avatar::{GarmentSpec, UserSpec};
use vfr_core::io::{read_video, run_to_directory, write_anchor};
use vfr_core::metrics::{
    evaluate_protocol, gpt_score_video, score_video, GptEndpoint, GptScores, GPT_MAX_FRAMES,
};
use vfr_core::pipeline::{GenerationRequest, MotionSource, Task, VariantFlags};
use vfr_core::{Error, Frame, GenerationConfig, VideoSegment};

const GOOD: &str = r#"{"try_on":81,"user":77.5,"motion":90,"visual":64,"overall":80}"#;

/// Serves one canned reply per connection and records request bodies.
fn serve(replies: Vec<(u16, &'static str)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/score", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line.trim().is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            reader.read_exact(&mut req).unwrap();
            log.lock().unwrap().push(String::from_utf8(req).unwrap());
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn small_video(n: usize) -> VideoSegment {
    let frames = (0..n)
        .map(|t| Frame::filled(8, 8, [(t % 200) as u8, 40, 90]))
        .collect();
    VideoSegment::new(frames, 24, 0).unwrap()
}

#[test]
fn malformed_replies_are_retried() {
    let (url, seen) = serve(vec![
        (200, "not json"),
        (200, r#"{"try_on":5}"#),
        (200, GOOD),
    ]);
    let scores = gpt_score_video(&small_video(10), &GptEndpoint::parse(&url).unwrap()).unwrap();
    assert_eq!(
        scores,
        GptScores {
            try_on: 81.0,
            user: 77.5,
            motion: 90.0,
            visual: 64.0,
            overall: 80.0,
        }
    );
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn persistent_failure_reports_the_last_reply() {
    let (url, seen) = serve(vec![(500, "busy"), (503, "busy"), (200, "still not json")]);
    let err = gpt_score_video(&small_video(4), &GptEndpoint::parse(&url).unwrap()).unwrap_err();
    match err {
        Error::ScoringFailed { raw, .. } => assert_eq!(raw.as_deref(), Some("still not json")),
        other => panic!("expected ScoringFailed, got {other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn long_video_submits_sixteen_frames() {
    let (url, seen) = serve(vec![(200, GOOD)]);
    gpt_score_video(&small_video(240), &GptEndpoint::parse(&url).unwrap()).unwrap();
    let body: serde_json::Value = serde_json::from_str(&seen.lock().unwrap()[0]).unwrap();
    let frames = body["frames"].as_array().unwrap();
    assert_eq!(frames.len(), GPT_MAX_FRAMES);
    assert_eq!(body["frame_count"], 240);
    let idx: Vec<u64> = frames
        .iter()
        .map(|f| f["index"].as_u64().unwrap())
        .collect();
    assert_eq!(idx[..3], [0, 15, 30]);
    assert!(body["rubric"].as_str().unwrap().len() > 20);
}

fn request(task: Task, flags: VariantFlags) -> GenerationRequest {
    GenerationRequest::new(
        UserSpec::default(),
        GarmentSpec::builtin("dress").unwrap(),
        MotionSource::Task {
            task,
            seconds: None,
        },
        flags,
        GenerationConfig {
            seed: 3,
            ..Default::default()
        },
    )
}

#[test]
fn protocol_on_an_anchor_matches_in_memory_scores() {
    let dir = tempfile::tempdir().unwrap();
    write_anchor(&request(Task::Anchor360, VariantFlags::FULL), dir.path()).unwrap();
    let stub = GptEndpoint::parse("stub:1,2,3,4,5").unwrap();
    let report = evaluate_protocol(dir.path(), Task::Anchor360, Some(&stub)).unwrap();
    let (video, _) = read_video(dir.path()).unwrap();
    assert_eq!(report.scores(), score_video(&video).unwrap());
    assert_eq!(report.gpt_scores.unwrap().overall, 5.0);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    assert_eq!(
        vfr_core::metrics::MetricsReport::from_json(&report.to_json()).unwrap(),
        report
    );
}

#[test]
fn protocol_on_a_task3_video_warns_about_the_wrong_task() {
    let dir = tempfile::tempdir().unwrap();
    run_to_directory(
        &request(Task::InteractionTemplate, VariantFlags::NO_REFINE),
        dir.path(),
    )
    .unwrap();
    let report = evaluate_protocol(dir.path(), Task::InteractionTemplate, None).unwrap();
    assert_eq!(report.frame_count, 720);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    assert!(report.gpt_scores.is_none());
    for s in [
        report.subject_consistency,
        report.background_consistency,
        report.motion_smoothness,
    ] {
        assert!((0.0..=100.0).contains(&s));
    }
    let wrong = evaluate_protocol(dir.path(), Task::CasualOrbit, None).unwrap();
    assert_eq!(wrong.warnings.len(), 2, "{:?}", wrong.warnings);
}
