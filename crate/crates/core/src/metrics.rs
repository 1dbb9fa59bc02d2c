//! Video quality scores: subject and background consistency from masked
//! color histograms, motion smoothness from a drop-and-interpolate proxy, and
//! an optional external GPT rubric scorer.
//!
//! The histogram and interpolation proxies stand in for learned feature
//! extractors. They rank failure modes; absolute values are not comparable to
//! scores from learned models.

use std::path::Path;
use std::time::Duration;

use base64::Engine as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avatar::BACKGROUND;
use crate::config::GenerationConfig;
use crate::error::{Error, Result};
use crate::frame::{frame_l1_distance, Frame, VideoSegment};
use crate::io::{encode_png, VideoReader};
use crate::pipeline::Task;

pub const REPORT_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 512;
/// Unmasked pixels farther than this from the studio background (Euclidean,
/// channels in 0..1) count as subject.
pub const FALLBACK_THRESHOLD: f64 = 24.0 / 255.0;
/// Mean L1 reconstruction error that scores zero smoothness.
pub const SMOOTHNESS_NORMALIZER: f64 = 0.5;
pub const GPT_MAX_FRAMES: usize = 16;
pub const GPT_ATTEMPTS: usize = 3;
pub const GPT_ENDPOINT_ENV: &str = "VFR_GPT_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Subject,
    Background,
}

fn bin_of(p: &[u8]) -> usize {
    (usize::from(p[0] >> 5) << 6) | (usize::from(p[1] >> 5) << 3) | usize::from(p[2] >> 5)
}

fn fallback_is_subject(p: &[u8]) -> bool {
    let d2: f64 = (0..3)
        .map(|c| (f64::from(p[c]) - f64::from(BACKGROUND[c])).powi(2))
        .sum();
    d2.sqrt() / 255.0 > FALLBACK_THRESHOLD
}

fn normalized(counts: &[u32]) -> Vec<f64> {
    let norm = counts
        .iter()
        .map(|&c| f64::from(c) * f64::from(c))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| f64::from(c) / norm).collect()
}

/// Subject and background descriptors of one frame.
fn descriptors(frame: &Frame) -> (Vec<f64>, Vec<f64>) {
    let mut subject = vec![0u32; HISTOGRAM_BINS];
    let mut background = vec![0u32; HISTOGRAM_BINS];
    for (i, p) in frame.pixels().chunks_exact(3).enumerate() {
        let is_subject = match frame.mask() {
            Some(m) => m[i] == 1,
            None => fallback_is_subject(p),
        };
        let hist = if is_subject {
            &mut subject
        } else {
            &mut background
        };
        hist[bin_of(p)] += 1;
    }
    (normalized(&subject), normalized(&background))
}

/// 8×8×8 RGB histogram of the region's pixels, L2-normalized; an empty
/// region gives the zero vector. Frames without a mask fall back to distance
/// from the background color.
pub fn descriptor(frame: &Frame, region: Region) -> Vec<f64> {
    let (s, b) = descriptors(frame);
    match region {
        Region::Subject => s,
        Region::Background => b,
    }
}

/// Cosine of two descriptors; zero when either is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return if a.iter().any(|&v| v != 0.0) {
            1.0
        } else {
            0.0
        };
    }
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(0.0, 1.0)
}

fn consistency_term(first: &[f64], prev: &[f64], cur: &[f64]) -> f64 {
    0.5 * (cosine(cur, first) + cosine(cur, prev))
}

fn consistency_score(sum: f64, terms: usize) -> f64 {
    (100.0 * sum / terms as f64).clamp(0.0, 100.0)
}

fn consistency(video: &VideoSegment, region: Region) -> Result<f64> {
    if video.len() < 2 {
        return Err(Error::invalid("consistency needs at least 2 frames"));
    }
    let descs: Vec<Vec<f64>> = video
        .frames()
        .par_iter()
        .map(|f| descriptor(f, region))
        .collect();
    let terms: Vec<f64> = (1..descs.len())
        .into_par_iter()
        .map(|t| consistency_term(&descs[0], &descs[t - 1], &descs[t]))
        .collect();
    Ok(consistency_score(terms.iter().sum(), terms.len()))
}

pub fn subject_consistency(video: &VideoSegment) -> Result<f64> {
    consistency(video, Region::Subject)
}

pub fn background_consistency(video: &VideoSegment) -> Result<f64> {
    consistency(video, Region::Background)
}

/// Rounded-half-up mean of two frames.
fn midpoint(a: &Frame, b: &Frame) -> Result<Frame> {
    let px = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| (u16::from(x) + u16::from(y)).div_ceil(2) as u8)
        .collect();
    Frame::new(a.width(), a.height(), px, None)
}

fn interpolation_error(before: &Frame, actual: &Frame, after: &Frame) -> Result<f64> {
    frame_l1_distance(&midpoint(before, after)?, actual)
}

fn smoothness_score(sum: f64, terms: usize) -> f64 {
    (100.0 * (1.0 - sum / terms as f64 / SMOOTHNESS_NORMALIZER)).clamp(0.0, 100.0)
}

/// Each odd frame with two neighbors is rebuilt from them and compared to
/// the real one.
pub fn motion_smoothness(video: &VideoSegment) -> Result<f64> {
    if video.len() < 3 {
        return Err(Error::invalid("motion smoothness needs at least 3 frames"));
    }
    let f = video.frames();
    let errors = (1..f.len() - 1)
        .into_par_iter()
        .step_by(2)
        .map(|i| interpolation_error(&f[i - 1], &f[i], &f[i + 1]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(smoothness_score(errors.iter().sum(), errors.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub subject_consistency: f64,
    pub background_consistency: f64,
    pub motion_smoothness: f64,
}

pub fn score_video(video: &VideoSegment) -> Result<Scores> {
    Ok(Scores {
        subject_consistency: subject_consistency(video)?,
        background_consistency: background_consistency(video)?,
        motion_smoothness: motion_smoothness(video)?,
    })
}

/// The same three scores from a frame stream, holding at most three frames.
/// Results match [`score_video`] bit for bit.
#[derive(Default)]
pub struct ScoreAccumulator {
    count: usize,
    first: Option<(Vec<f64>, Vec<f64>)>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    sums: (f64, f64),
    before: Option<Frame>,
    middle: Option<Frame>,
    smooth_sum: f64,
    smooth_terms: usize,
}

impl ScoreAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frames_seen(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        let d = descriptors(&frame);
        if let (Some(first), Some(prev)) = (&self.first, &self.prev) {
            self.sums.0 += consistency_term(&first.0, &prev.0, &d.0);
            self.sums.1 += consistency_term(&first.1, &prev.1, &d.1);
        }
        if self.first.is_none() {
            self.first = Some(d.clone());
        }
        self.prev = Some(d);
        if self.count.is_multiple_of(2) {
            if let (Some(b), Some(m)) = (&self.before, &self.middle) {
                self.smooth_sum += interpolation_error(b, m, &frame)?;
                self.smooth_terms += 1;
            }
            self.before = Some(frame);
            self.middle = None;
        } else {
            self.middle = Some(frame);
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<Scores> {
        if self.count < 3 {
            return Err(Error::invalid("scoring needs at least 3 frames"));
        }
        Ok(Scores {
            subject_consistency: consistency_score(self.sums.0, self.count - 1),
            background_consistency: consistency_score(self.sums.1, self.count - 1),
            motion_smoothness: smoothness_score(self.smooth_sum, self.smooth_terms),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GptScores {
    pub try_on: f64,
    pub user: f64,
    pub motion: f64,
    pub visual: f64,
    pub overall: f64,
}

impl GptScores {
    fn values(&self) -> [f64; 5] {
        [
            self.try_on,
            self.user,
            self.motion,
            self.visual,
            self.overall,
        ]
    }

    fn check(self) -> std::result::Result<Self, String> {
        match self.values().iter().find(|v| !(0.0..=100.0).contains(*v)) {
            Some(v) => Err(format!("score {v} outside [0, 100]")),
            None => Ok(self),
        }
    }
}

pub const GPT_RUBRIC: &str = "You are rating a virtual try-on video from the sampled frames. \
Score each aspect from 0 to 100. try_on: does the garment keep its color, pattern and fit across \
all frames? user: does the person keep their identity, skin, hair and accessories? motion: does \
the person follow a plausible continuous motion without jumps? visual: is the image free of \
artifacts, flicker and blur? overall: your overall judgement. Reply with one JSON object with the \
numeric fields try_on, user, motion, visual and overall, and nothing else.";

#[derive(Debug, Clone, PartialEq)]
pub enum GptEndpoint {
    /// Returns fixed scores without any I/O.
    Stub(GptScores),
    Http {
        url: String,
        timeout: Duration,
    },
}

impl GptEndpoint {
    /// `stub:a,b,c,d,e` or an `http(s)://` URL.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("stub:") {
            let v: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("stub scores: {e}")))?;
            let [try_on, user, motion, visual, overall] = v[..] else {
                return Err(Error::invalid("stub needs five comma-separated scores"));
            };
            let scores = GptScores {
                try_on,
                user,
                motion,
                visual,
                overall,
            };
            return scores
                .check()
                .map(GptEndpoint::Stub)
                .map_err(Error::invalid);
        }
        if spec.starts_with("http://") || spec.starts_with("https://") {
            return Ok(GptEndpoint::Http {
                url: spec.to_string(),
                timeout: Duration::from_secs(60),
            });
        }
        Err(Error::invalid(format!(
            "GPT endpoint must be stub:... or an http(s) URL, got {spec:?}"
        )))
    }

    /// From the environment variable, if set and non-empty.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var(GPT_ENDPOINT_ENV) {
            Ok(v) if !v.trim().is_empty() => Self::parse(v.trim()).map(Some),
            _ => Ok(None),
        }
    }
}

/// `min(n, 16)` indices spread uniformly: `floor(j·n/m)`.
pub fn gpt_sample_indices(n: usize) -> Vec<usize> {
    let m = n.min(GPT_MAX_FRAMES);
    (0..m).map(|j| j * n / m).collect()
}

#[derive(Serialize)]
struct GptFrame {
    index: usize,
    png_base64: String,
}

#[derive(Serialize)]
struct GptRequest<'a> {
    rubric: &'a str,
    frame_count: usize,
    frames: Vec<GptFrame>,
}

fn request_body(frames: &[(usize, Frame)], total: usize) -> Result<String> {
    let frames = frames
        .iter()
        .map(|(i, f)| {
            Ok(GptFrame {
                index: *i,
                png_base64: base64::engine::general_purpose::STANDARD.encode(encode_png(f)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let req = GptRequest {
        rubric: GPT_RUBRIC,
        frame_count: total,
        frames,
    };
    Ok(serde_json::to_string(&req)?)
}

enum Attempt {
    Transport(String),
    Reply { status: u16, body: String },
}

fn post(url: &str, timeout: Duration, body: &str) -> Attempt {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(timeout))
        .build()
        .into();
    let resp = agent
        .post(url)
        .header("content-type", "application/json")
        .send(body);
    match resp {
        Ok(mut r) => {
            let status = r.status().as_u16();
            match r.body_mut().read_to_string() {
                Ok(body) => Attempt::Reply { status, body },
                Err(e) => Attempt::Transport(e.to_string()),
            }
        }
        Err(e) => Attempt::Transport(e.to_string()),
    }
}

fn parse_reply(body: &str) -> std::result::Result<GptScores, String> {
    serde_json::from_str::<GptScores>(body.trim())
        .map_err(|e| e.to_string())
        .and_then(GptScores::check)
}

/// Submits `frames` (already sampled, tagged with their video index) and
/// parses the five scores. Transport failures, non-success statuses and
/// unparseable replies are retried; after the last attempt the error carries
/// the final raw reply.
pub fn gpt_score(
    frames: &[(usize, Frame)],
    total: usize,
    endpoint: &GptEndpoint,
) -> Result<GptScores> {
    let (url, timeout) = match endpoint {
        GptEndpoint::Stub(s) => return Ok(*s),
        GptEndpoint::Http { url, timeout } => (url, *timeout),
    };
    if frames.len() > GPT_MAX_FRAMES {
        return Err(Error::invalid(format!(
            "at most {GPT_MAX_FRAMES} frames per request"
        )));
    }
    let body = request_body(frames, total)?;
    let mut last = Error::ScoringFailed {
        reason: "no attempt made".into(),
        raw: None,
    };
    for attempt in 1..=GPT_ATTEMPTS {
        last = match post(url, timeout, &body) {
            Attempt::Transport(e) => Error::ScoringFailed {
                reason: format!("transport: {e}"),
                raw: None,
            },
            Attempt::Reply { status, body } if !(200..300).contains(&status) => {
                Error::ScoringFailed {
                    reason: format!("HTTP status {status}"),
                    raw: Some(body),
                }
            }
            Attempt::Reply { body, .. } => match parse_reply(&body) {
                Ok(s) => return Ok(s),
                Err(e) => Error::ScoringFailed {
                    reason: format!("unparseable reply: {e}"),
                    raw: Some(body),
                },
            },
        };
        log::warn!("GPT scoring attempt {attempt}/{GPT_ATTEMPTS} failed: {last}");
    }
    Err(last)
}

/// Samples a whole video and scores it.
pub fn gpt_score_video(video: &VideoSegment, endpoint: &GptEndpoint) -> Result<GptScores> {
    let frames: Vec<(usize, Frame)> = gpt_sample_indices(video.len())
        .into_iter()
        .map(|i| (i, video.frames()[i].clone()))
        .collect();
    gpt_score(&frames, video.len(), endpoint)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub task: Option<u8>,
    pub variant: String,
    pub config_fingerprint: String,
    pub fps: u32,
    pub frame_count: usize,
    pub subject_consistency: f64,
    pub background_consistency: f64,
    pub motion_smoothness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpt_scores: Option<GptScores>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn scores(&self) -> Scores {
        Scores {
            subject_consistency: self.subject_consistency,
            background_consistency: self.background_consistency,
            motion_smoothness: self.motion_smoothness,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format("report", e.to_string()))
    }
}

/// Warning text when `seconds` is outside the task's duration range widened
/// by one segment each way.
pub fn duration_warning(task: Task, seconds: f64) -> Option<String> {
    let cfg = GenerationConfig::default();
    let slack = cfg.segment_len_frames as f64 / f64::from(cfg.base_fps);
    let (lo, hi) = task.duration_range();
    let (lo, hi) = (f64::from(lo) - slack, f64::from(hi) + slack);
    (seconds < lo || seconds > hi).then(|| {
        format!(
            "duration {seconds:.2}s is outside task {} range [{lo}, {hi}]s",
            task.id()
        )
    })
}

/// Scores a video directory for `task`, streaming its frames. GPT scores are
/// attached only when an endpoint is given.
pub fn evaluate_protocol(
    dir: &Path,
    task: Task,
    gpt: Option<&GptEndpoint>,
) -> Result<MetricsReport> {
    let reader = VideoReader::open(dir)?;
    let manifest = reader.manifest().clone();
    let n = manifest.frame_count;
    let mut warnings = Vec::new();
    if let Some(w) = duration_warning(task, manifest.duration_s()) {
        log::warn!("{w}");
        warnings.push(w);
    }
    if let Some(t) = manifest.task.filter(|&t| t != task.id()) {
        warnings.push(format!(
            "video was generated for task {t}, evaluated as task {}",
            task.id()
        ));
    }
    if manifest.partial {
        warnings.push("video is partial".into());
    }
    let wanted = gpt.map(|_| gpt_sample_indices(n)).unwrap_or_default();
    let mut sampled = Vec::with_capacity(wanted.len());
    let mut acc = ScoreAccumulator::new();
    for (i, frame) in reader.enumerate() {
        let frame = frame?;
        if wanted.binary_search(&i).is_ok() {
            sampled.push((i, frame.clone()));
        }
        acc.push(frame)?;
    }
    let scores = acc.finish()?;
    let gpt_scores = match gpt {
        Some(e) => Some(gpt_score(&sampled, n, e)?),
        None => None,
    };
    Ok(MetricsReport {
        format_version: REPORT_VERSION,
        task: Some(task.id()),
        variant: manifest.variant,
        config_fingerprint: manifest.config_fingerprint,
        fps: manifest.fps,
        frame_count: n,
        subject_consistency: scores.subject_consistency,
        background_consistency: scores.background_consistency,
        motion_smoothness: scores.motion_smoothness,
        gpt_scores,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn video(frames: Vec<Frame>) -> VideoSegment {
        VideoSegment::new(frames, 8, 0).unwrap()
    }

    fn solid(rgb: [u8; 3]) -> Frame {
        Frame::filled(4, 4, rgb)
            .with_mask(Some(vec![1; 16]))
            .unwrap()
    }

    #[test]
    fn one_hot_and_empty_descriptors() {
        let d = descriptor(&solid([255, 0, 0]), Region::Subject);
        assert_eq!(d[7 << 6], 1.0);
        assert_eq!(d.iter().filter(|&&v| v != 0.0).count(), 1);
        assert!(descriptor(&solid([255, 0, 0]), Region::Background)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn half_red_half_green() {
        let mut px = vec![];
        for i in 0..8 {
            px.extend_from_slice(if i < 4 { &[255, 0, 0] } else { &[0, 255, 0] });
        }
        let f = Frame::new(4, 2, px, Some(vec![1; 8])).unwrap();
        let d = descriptor(&f, Region::Subject);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d[7 << 6] - h).abs() < 1e-15 && (d[7 << 3] - h).abs() < 1e-15);
        let norm: f64 = d.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fallback_mask_splits_on_background_distance() {
        let mut px = vec![];
        px.extend_from_slice(&BACKGROUND);
        px.extend_from_slice(&[210, 210, 215]); // 17.3 away
        px.extend_from_slice(&[220, 220, 215]); // 30 away
        px.extend_from_slice(&[10, 10, 10]);
        let f = Frame::new(2, 2, px, None).unwrap();
        let s = descriptor(&f, Region::Subject);
        let b = descriptor(&f, Region::Background);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // subject: the far two pixels, in different bins
        assert!((s[0] - h).abs() < 1e-15);
        assert!((s[bin_of(&[220, 220, 215])] - h).abs() < 1e-15);
        assert_eq!(b[bin_of(&BACKGROUND)], 1.0);
    }

    #[test]
    fn constant_video_is_fully_consistent() {
        let v = video(vec![solid([40, 90, 200]); 6]);
        assert_eq!(subject_consistency(&v).unwrap(), 100.0);
        let v = video(vec![Frame::filled(4, 4, BACKGROUND); 6]);
        assert_eq!(background_consistency(&v).unwrap(), 100.0);
        assert_eq!(motion_smoothness(&v).unwrap(), 100.0);
    }

    #[test]
    fn red_then_green_scores_zero() {
        let v = video(vec![solid([255, 0, 0]), solid([0, 255, 0])]);
        assert_eq!(subject_consistency(&v).unwrap(), 0.0);
    }

    #[test]
    fn three_mixed_frames_match_hand_oracle() {
        // per-frame bin counts (subject, all pixels masked):
        //   f0: 3 red, 1 green       -> (3, 1, 0) / sqrt(10)
        //   f1: 2 red, 2 green       -> (1, 1, 0) / sqrt(2)
        //   f2: 2 red, 1 green, 1 blue -> (2, 1, 1) / sqrt(6)
        // cos(f1,f0) = 4/sqrt(20); cos(f2,f0) = 7/sqrt(60); cos(f2,f1) = 3/sqrt(12)
        // SC = 100 * mean(cos(f1,f0), (cos(f2,f0) + cos(f2,f1)) / 2)
        let (r, g, b) = ([255, 0, 0], [0, 255, 0], [0, 0, 255]);
        let make = |px: [[u8; 3]; 4]| Frame::new(2, 2, px.concat(), Some(vec![1; 4])).unwrap();
        let v = video(vec![
            make([r, r, r, g]),
            make([r, r, g, g]),
            make([r, r, g, b]),
        ]);
        let c10 = 4.0 / 20f64.sqrt();
        let c20 = 7.0 / 60f64.sqrt();
        let c21 = 3.0 / 12f64.sqrt();
        let want = 100.0 * (c10 + 0.5 * (c20 + c21)) / 2.0;
        assert!((subject_consistency(&v).unwrap() - want).abs() < 1e-9);
        assert!((want - 88.9644).abs() < 1e-4);
    }

    #[test]
    fn background_flip_lowers_background_consistency() {
        let mut frames = vec![Frame::filled(4, 4, BACKGROUND); 4];
        frames.extend(vec![Frame::filled(4, 4, [20, 200, 205]); 4]);
        let frames = frames
            .into_iter()
            .map(|f| f.with_mask(Some(vec![0; 16])).unwrap())
            .collect();
        assert!(background_consistency(&video(frames)).unwrap() < 100.0);
    }

    #[test]
    fn smoothness_examples() {
        let ramp = video(
            (0..20)
                .map(|t| solid([t * 10, 255 - t * 12, 7 * t]))
                .collect(),
        );
        assert!(motion_smoothness(&ramp).unwrap() >= 99.6);
        let alt = video(
            (0..9)
                .map(|t| solid(if t % 2 == 0 { [0; 3] } else { [255; 3] }))
                .collect(),
        );
        assert_eq!(motion_smoothness(&alt).unwrap(), 0.0);
    }

    #[test]
    fn too_short_videos_are_errors() {
        let one = video(vec![solid([1, 2, 3])]);
        assert!(subject_consistency(&one).is_err());
        let two = video(vec![solid([1, 2, 3]); 2]);
        assert!(motion_smoothness(&two).is_err());
        assert!(ScoreAccumulator::new().finish().is_err());
    }

    #[test]
    fn stub_endpoint_echoes_scores() {
        let e = GptEndpoint::parse("stub:90,88,84,86,87").unwrap();
        let s = gpt_score_video(&video(vec![solid([0; 3]); 3]), &e).unwrap();
        assert_eq!(s.values(), [90.0, 88.0, 84.0, 86.0, 87.0]);
        assert!(GptEndpoint::parse("stub:1,2,3").is_err());
        assert!(GptEndpoint::parse("stub:1,2,3,4,101").is_err());
        assert!(GptEndpoint::parse("ftp://x").is_err());
    }

    #[test]
    fn sampling_takes_sixteen_uniform_frames() {
        let idx = gpt_sample_indices(240);
        assert_eq!(idx.len(), 16);
        assert_eq!(idx[..3], [0, 15, 30]);
        assert_eq!(*idx.last().unwrap(), 225);
        assert_eq!(gpt_sample_indices(5), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn duration_tolerance_is_one_segment() {
        assert!(duration_warning(Task::CasualOrbit, 30.0).is_none());
        assert!(duration_warning(Task::CasualOrbit, 35.0).is_none());
        assert!(duration_warning(Task::CasualOrbit, 35.5).is_some());
        assert!(duration_warning(Task::InteractionTemplate, 90.0).is_none());
        assert!(duration_warning(Task::FreeMotion, 61.0).is_none());
        assert!(duration_warning(Task::Anchor360, 30.0).is_some());
    }

    fn fuzz_video() -> impl Strategy<Value = VideoSegment> {
        (1u32..5, 1u32..5, 3usize..7, any::<bool>()).prop_flat_map(|(w, h, n, masked)| {
            let px = (w * h * 3) as usize;
            let mp = (w * h) as usize;
            proptest::collection::vec(
                (
                    proptest::collection::vec(any::<u8>(), px),
                    proptest::collection::vec(0u8..2, mp),
                ),
                n,
            )
            .prop_map(move |fs| {
                let frames = fs
                    .into_iter()
                    .map(|(p, m)| Frame::new(w, h, p, masked.then_some(m)).unwrap())
                    .collect();
                VideoSegment::new(frames, 8, 0).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn streaming_matches_in_memory(v in fuzz_video()) {
            let mut acc = ScoreAccumulator::new();
            for f in v.frames() {
                acc.push(f.clone()).unwrap();
            }
            prop_assert_eq!(acc.finish().unwrap(), score_video(&v).unwrap());
        }

        #[test]
        fn cosine_is_symmetric_and_bounded(
            a in proptest::collection::vec(0.0f64..1.0, 8),
            b in proptest::collection::vec(0.0f64..1.0, 8),
        ) {
            let c = cosine(&a, &b);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(c, cosine(&b, &a));
        }
    }
}
