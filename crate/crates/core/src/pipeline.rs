//! The auto-regressive orchestrator: plans overlapping segments, feeds each
//! one its conditions according to the variant, stitches, refines and streams
//! the frames out.

use serde::{Deserialize, Serialize};

use crate::avatar::{GarmentSpec, UserSpec};
use crate::config::GenerationConfig;
use crate::error::{Error, Result};
use crate::frame::{Frame, VideoSegment};
use crate::generation::{
    extract_digest, generate_segment, render_anchor, AnchorDigest, ConditionSet, GeneratedSegment,
    Prefix,
};
use crate::motion::{
    make_anchor_track, make_casual_orbit_track, make_free_motion_track,
    make_interaction_template_track, MotionTrack, ANCHOR_SECONDS, CASUAL_SECONDS, FREE_SECONDS,
    TEMPLATE_SECONDS,
};
use crate::refiner::refine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StitchMode {
    Conditioned,
    Outpaint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantFlags {
    pub use_anchor: bool,
    pub use_prefix: bool,
    pub use_refiner: bool,
    pub stitch_mode: StitchMode,
}

impl VariantFlags {
    pub const FULL: Self = Self::new(true, true, true, StitchMode::Conditioned);
    pub const NO_PREFIX: Self = Self::new(true, false, true, StitchMode::Outpaint);
    pub const NO_ANCHOR: Self = Self::new(false, true, true, StitchMode::Conditioned);
    pub const DRESS_AND_DANCE: Self = Self::new(false, false, true, StitchMode::Outpaint);
    pub const NO_REFINE: Self = Self::new(true, true, false, StitchMode::Conditioned);

    /// Every named variant with its short name, in reporting order.
    pub const ALL: [(&'static str, Self); 5] = [
        ("full", Self::FULL),
        ("np", Self::NO_PREFIX),
        ("na", Self::NO_ANCHOR),
        ("dnd", Self::DRESS_AND_DANCE),
        ("nr", Self::NO_REFINE),
    ];

    pub const fn new(
        use_anchor: bool,
        use_prefix: bool,
        use_refiner: bool,
        stitch_mode: StitchMode,
    ) -> Self {
        VariantFlags {
            use_anchor,
            use_prefix,
            use_refiner,
            stitch_mode,
        }
    }

    /// Parses a variant name, case-insensitively. `d&d` is accepted for `dnd`.
    pub fn from_name(name: &str) -> Result<Self> {
        let key = name.to_ascii_lowercase();
        let key = if key == "d&d" { "dnd".to_string() } else { key };
        Self::ALL
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, f)| *f)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown variant '{name}' (expected full, np, na, dnd or nr)"
                ))
            })
    }

    /// Short name of a named variant, or `custom`.
    pub fn name(&self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(_, f)| f == self)
            .map_or("custom", |(n, _)| n)
    }
}

/// One planned segment: global start frame, length, and how many leading
/// frames it shares with the previous segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub start: usize,
    pub len: usize,
    pub prefix_len: usize,
}

impl SegmentSpan {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub spans: Vec<SegmentSpan>,
}

impl SegmentPlan {
    pub fn total_frames(&self) -> usize {
        self.spans.last().map_or(0, SegmentSpan::end)
    }
}

/// Segments of `l` frames advancing by `l - k`. The last one is cut to end at
/// `total`; if that leaves it with `k` or fewer new frames it is folded into
/// its predecessor instead.
pub fn plan_segments(total: usize, l: usize, k: usize) -> Result<SegmentPlan> {
    if total == 0 {
        return Err(Error::invalid("nothing to plan: zero frames"));
    }
    if k == 0 || k >= l {
        return Err(Error::invalid(format!("overlap {k} must be in (0, {l})")));
    }
    let mut spans = vec![SegmentSpan {
        start: 0,
        len: l.min(total),
        prefix_len: 0,
    }];
    while let Some(last) = spans.last().copied().filter(|s| s.end() < total) {
        let start = last.end() - k;
        let len = l.min(total - start);
        if start + l >= total && len - k <= k {
            spans.last_mut().expect("nonempty").len = total - last.start;
        } else {
            spans.push(SegmentSpan {
                start,
                len,
                prefix_len: k,
            });
        }
    }
    Ok(SegmentPlan { spans })
}

/// The four evaluation tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// 5 s turntable in the A pose; doubles as the anchor.
    Anchor360,
    /// 30 s casual orbit.
    CasualOrbit,
    /// 90 s scripted interactions.
    InteractionTemplate,
    /// Free motion, 25 to 60 s.
    FreeMotion,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::Anchor360,
        Task::CasualOrbit,
        Task::InteractionTemplate,
        Task::FreeMotion,
    ];

    pub fn from_id(id: u8) -> Result<Task> {
        Task::ALL
            .get(usize::from(id).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::invalid(format!("task must be 1-4, got {id}")))
    }

    pub fn id(self) -> u8 {
        self as u8 + 1
    }

    pub fn default_seconds(self) -> u32 {
        match self {
            Task::Anchor360 => ANCHOR_SECONDS,
            Task::CasualOrbit => CASUAL_SECONDS,
            Task::InteractionTemplate => TEMPLATE_SECONDS,
            Task::FreeMotion => FREE_SECONDS,
        }
    }

    /// Accepted durations in seconds, inclusive.
    pub fn duration_range(self) -> (u32, u32) {
        match self {
            Task::FreeMotion => (25, 60),
            t => (t.default_seconds(), t.default_seconds()),
        }
    }

    /// The task's motion track; `seconds` overrides the default length except
    /// for the fixed anchor orbit.
    pub fn track(self, config: &GenerationConfig, seconds: Option<u32>) -> MotionTrack {
        let secs = seconds.unwrap_or(self.default_seconds());
        match self {
            Task::Anchor360 => make_anchor_track(config),
            Task::CasualOrbit => make_casual_orbit_track(secs, config),
            Task::InteractionTemplate => make_interaction_template_track(secs, config),
            Task::FreeMotion => make_free_motion_track(secs, config),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotionSource {
    Track(MotionTrack),
    Task { task: Task, seconds: Option<u32> },
}

#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub user: UserSpec,
    pub garment: GarmentSpec,
    pub motion: MotionSource,
    pub flags: VariantFlags,
    /// Carries the seed.
    pub config: GenerationConfig,
}

impl GenerationRequest {
    pub fn new(
        user: UserSpec,
        garment: GarmentSpec,
        motion: MotionSource,
        flags: VariantFlags,
        config: GenerationConfig,
    ) -> Self {
        GenerationRequest {
            user,
            garment,
            motion,
            flags,
            config,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.user.validate()?;
        if let MotionSource::Track(t) = &self.motion {
            if t.fps() != self.config.base_fps {
                return Err(Error::invalid(format!(
                    "track runs at {} fps, config expects {}",
                    t.fps(),
                    self.config.base_fps
                )));
            }
        }
        Ok(())
    }

    pub fn task(&self) -> Option<Task> {
        match self.motion {
            MotionSource::Task { task, .. } => Some(task),
            MotionSource::Track(_) => None,
        }
    }

    pub fn track(&self) -> MotionTrack {
        match &self.motion {
            MotionSource::Track(t) => t.clone(),
            MotionSource::Task { task, seconds } => task.track(&self.config, *seconds),
        }
    }
}

/// The anchor clip at base rate, its digest, and the track it follows.
#[derive(Debug, Clone)]
pub struct AnchorOutput {
    pub video: VideoSegment,
    pub digest: AnchorDigest,
    pub track: MotionTrack,
}

/// Renders the 360° anchor with the seed's canonical appearance and extracts
/// its digest.
pub fn generate_anchor(request: &GenerationRequest) -> Result<AnchorOutput> {
    request.validate()?;
    let cfg = &request.config;
    let (video, track) = render_anchor(&request.user, &request.garment, cfg, cfg.seed)?;
    let digest = extract_digest(&video, &track, &request.garment, &request.user, cfg)?;
    Ok(AnchorOutput {
        video,
        digest,
        track,
    })
}

/// Where `run` sends finished frames, in global order.
pub trait FrameSink {
    fn write_frame(&mut self, index: u64, frame: &Frame) -> Result<()>;
}

impl FrameSink for Vec<Frame> {
    fn write_frame(&mut self, index: u64, frame: &Frame) -> Result<()> {
        if index != self.len() as u64 {
            return Err(Error::invalid(format!(
                "frame {index} out of order, expected {}",
                self.len()
            )));
        }
        self.push(frame.clone());
        Ok(())
    }
}

/// Counts frames the run holds at once.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGauge {
    pub current: usize,
    pub peak: usize,
}

impl FrameGauge {
    fn hold(&mut self, n: usize) {
        self.current += n;
        self.peak = self.peak.max(self.current);
    }

    fn release(&mut self, n: usize) {
        self.current -= n;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: String,
    pub seed: u64,
    pub fps: u32,
    pub width: u32,
    pub height: u32,
    /// Frames emitted at `fps`.
    pub frame_count: usize,
    pub base_frame_count: usize,
    pub plan: SegmentPlan,
    /// Output frame index at which each segment's fresh frames begin.
    pub boundaries: Vec<u64>,
    /// Most 8 FPS frames resident at once (segment being built plus the
    /// carried overlap).
    pub peak_generation_frames: usize,
    /// Most frames the refiner held at once.
    pub peak_refiner_frames: usize,
    pub config_fingerprint: String,
    #[serde(skip)]
    pub anchor: Option<AnchorDigest>,
}

/// Runs the request and streams every output frame to `sink`. The anchor is
/// rendered first when the variant uses one; a task-1 request outputs the
/// anchor itself.
///
/// On a failing segment the error is `Error::Segment` and `sink` keeps every
/// frame emitted before it.
pub fn run_with_sink(request: &GenerationRequest, sink: &mut dyn FrameSink) -> Result<RunReport> {
    request.validate()?;
    let cfg = &request.config;
    let flags = request.flags;
    let seed = cfg.seed;
    let (l, k) = (cfg.segment_len_frames, cfg.overlap_frames);
    let mut report = RunReport {
        variant: flags.name().to_string(),
        seed,
        fps: if flags.use_refiner {
            cfg.refined_fps
        } else {
            cfg.base_fps
        },
        width: cfg.width,
        height: cfg.height,
        frame_count: 0,
        base_frame_count: 0,
        plan: SegmentPlan { spans: vec![] },
        boundaries: vec![],
        peak_generation_frames: 0,
        peak_refiner_frames: 0,
        config_fingerprint: cfg.fingerprint(),
        anchor: None,
    };
    let mut gen_gauge = FrameGauge::default();
    let mut ref_gauge = FrameGauge::default();
    let mut out = Emitter {
        sink,
        next: 0,
        refine: flags.use_refiner,
        overlap: k,
    };

    if request.task() == Some(Task::Anchor360) {
        let anchor = generate_anchor(request)?;
        let n = anchor.video.len();
        gen_gauge.hold(n);
        report.plan = SegmentPlan {
            spans: vec![SegmentSpan {
                start: 0,
                len: n,
                prefix_len: 0,
            }],
        };
        report.boundaries.push(0);
        out.segment(&anchor.video, 0, true, &mut ref_gauge)
            .map_err(|e| segment_error(0, e))?;
        gen_gauge.release(n);
        report.base_frame_count = n;
        report.anchor = Some(anchor.digest);
    } else {
        let track = request.track();
        let plan = plan_segments(track.len(), l, k)?;
        let digest = if flags.use_anchor {
            Some(generate_anchor(request)?.digest)
        } else {
            None
        };
        // the previous segment's last `k` frames and its end state
        let mut carry: Option<(Vec<Frame>, GeneratedSegment)> = None;
        for (idx, span) in plan.spans.iter().enumerate() {
            let last = idx + 1 == plan.spans.len();
            let seg = generate_one(
                request,
                &track,
                span,
                idx,
                digest.as_ref(),
                carry.as_ref(),
                &mut gen_gauge,
            )
            .map_err(|e| segment_error(idx, e))?;
            let fresh = (span.start + span.prefix_len) as u64;
            report
                .boundaries
                .push(if flags.use_refiner { 3 * fresh } else { fresh });
            let video =
                VideoSegment::new(seg.video.frames().to_vec(), cfg.base_fps, span.start as u64)?;
            out.segment(&video, span.prefix_len, last, &mut ref_gauge)
                .map_err(|e| segment_error(idx, e))?;
            if let Some((tail, _)) = carry.take() {
                gen_gauge.release(tail.len());
            }
            let frames = seg.video.frames();
            let tail = frames[frames.len() - k.min(frames.len())..].to_vec();
            gen_gauge.hold(tail.len());
            gen_gauge.release(frames.len());
            carry = Some((
                tail,
                GeneratedSegment {
                    video: VideoSegment::new(vec![], cfg.base_fps, 0)?,
                    end_state: seg.end_state,
                },
            ));
        }
        report.base_frame_count = plan.total_frames();
        report.plan = plan;
        report.anchor = digest;
    }
    report.frame_count = out.next as usize;
    report.peak_generation_frames = gen_gauge.peak;
    report.peak_refiner_frames = ref_gauge.peak;
    Ok(report)
}

/// Runs the request and collects the output in memory.
pub fn run_in_memory(request: &GenerationRequest) -> Result<(VideoSegment, RunReport)> {
    let mut frames: Vec<Frame> = Vec::new();
    let report = run_with_sink(request, &mut frames)?;
    Ok((VideoSegment::new(frames, report.fps, 0)?, report))
}

fn segment_error(index: usize, e: Error) -> Error {
    match e {
        Error::Segment { .. } => e,
        e => Error::Segment {
            index,
            source: Box::new(e),
        },
    }
}

/// Generates and stitches one planned segment. The returned video holds all
/// `span.len` frames, overlap included.
fn generate_one(
    request: &GenerationRequest,
    track: &MotionTrack,
    span: &SegmentSpan,
    idx: usize,
    digest: Option<&AnchorDigest>,
    carry: Option<&(Vec<Frame>, GeneratedSegment)>,
    gauge: &mut FrameGauge,
) -> Result<GeneratedSegment> {
    let cfg = &request.config;
    let flags = request.flags;
    let slice = track.slice(span.start, span.len)?;
    let conditioned = flags.use_prefix && flags.stitch_mode == StitchMode::Conditioned;
    let cond = ConditionSet {
        user: &request.user,
        garment: &request.garment,
        anchor: digest,
        prefix: carry.filter(|_| conditioned).map(|(tail, prev)| Prefix {
            frames: tail,
            state: &prev.end_state,
        }),
    };
    let mut seg = generate_segment(&cond, &slice, &flags, cfg, cfg.seed, idx as u64)?;
    gauge.hold(seg.video.len());
    if let (Some((tail, _)), StitchMode::Outpaint) = (carry, flags.stitch_mode) {
        let mut frames = seg.video.into_frames();
        let k = span.prefix_len;
        if cfg.crossfade {
            fade_seam(&mut frames, tail, k);
        }
        frames[..k].clone_from_slice(&tail[..k]);
        seg.video = VideoSegment::new(frames, cfg.base_fps, 0)?;
    }
    Ok(seg)
}

/// Spreads the jump between the carried overlap and the fresh generation over
/// the `k` frames after it: the difference at the last overlap frame fades out
/// linearly.
fn fade_seam(frames: &mut [Frame], tail: &[Frame], k: usize) {
    let seam: Vec<i16> = tail[k - 1]
        .pixels()
        .iter()
        .zip(frames[k - 1].pixels())
        .map(|(&a, &b)| i16::from(a) - i16::from(b))
        .collect();
    let n = k.min(frames.len() - k);
    for j in 0..n {
        let w = (k - j) as f64 / (k + 1) as f64;
        for (v, &d) in frames[k + j].pixels_mut().iter_mut().zip(&seam) {
            *v = (f64::from(*v) + w * f64::from(d)).round().clamp(0.0, 255.0) as u8;
        }
    }
}

/// Sends each segment's share of the output to the sink.
struct Emitter<'a> {
    sink: &'a mut dyn FrameSink,
    next: u64,
    refine: bool,
    overlap: usize,
}

impl Emitter<'_> {
    /// Without refinement a segment emits its frames after the overlap. With
    /// it, the segment is refined as a whole and hands over to the next one
    /// two frames before its end, inside the overlap. Both refinements agree
    /// there because neither touches its edge frames.
    fn segment(
        &mut self,
        video: &VideoSegment,
        prefix_len: usize,
        last: bool,
        gauge: &mut FrameGauge,
    ) -> Result<()> {
        if !self.refine {
            for f in &video.frames()[prefix_len..] {
                self.emit(f)?;
            }
            return Ok(());
        }
        let refined = refine(video)?;
        // denoised copy plus the upsampled output
        let held = video.len() + refined.len();
        gauge.hold(held);
        let from = match prefix_len {
            0 => 0,
            // too short to hold back: take over right after the shared frame
            1 | 2 => 3 * prefix_len - 2,
            _ => 3 * (prefix_len - 2),
        };
        let to = if last {
            refined.len()
        } else if self.overlap < 3 {
            refined.len() - 2
        } else {
            refined.len() - 6
        };
        for f in &refined.frames()[from..to] {
            self.emit(f)?;
        }
        gauge.release(held);
        Ok(())
    }

    fn emit(&mut self, frame: &Frame) -> Result<()> {
        self.sink.write_frame(self.next, frame)?;
        self.next += 1;
        Ok(())
    }
}
