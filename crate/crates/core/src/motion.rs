//! Pose tracks that drive generation, their line-oriented file format, and the
//! canonical tracks of the four evaluation tasks.
//!
//! File format: an optional header `#vfr-track v1 fps=<n>` followed by one JSON
//! object per line:
//!
//! ```text
//! #vfr-track v1 fps=8
//! {"t":0,"root":[0.5,0.55],"yaw_deg":0.0,"joints":{"shoulder_l":45.0,...},"scale":0.8}
//! ```

use std::f64::consts::{PI, TAU};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::config::GenerationConfig;
use crate::error::{Error, Result};

pub const JOINT_LIMIT_DEG: f64 = 170.0;
pub const MAX_YAW_STEP_DEG: f64 = 30.0;
pub const MAX_ROOT_STEP: f64 = 0.1;
const HEADER_PREFIX: &str = "#vfr-track v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joints {
    pub shoulder_l: f64,
    pub shoulder_r: f64,
    pub elbow_l: f64,
    pub elbow_r: f64,
    pub hip_l: f64,
    pub hip_r: f64,
    pub knee_l: f64,
    pub knee_r: f64,
}

impl Joints {
    /// Neutral "A" pose: arms angled down and out, legs slightly apart.
    pub const A_POSE: Joints = Joints {
        shoulder_l: 45.0,
        shoulder_r: 45.0,
        elbow_l: 5.0,
        elbow_r: 5.0,
        hip_l: 8.0,
        hip_r: 8.0,
        knee_l: 0.0,
        knee_r: 0.0,
    };

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.shoulder_l,
            self.shoulder_r,
            self.elbow_l,
            self.elbow_r,
            self.hip_l,
            self.hip_r,
            self.knee_l,
            self.knee_r,
        ]
    }

    fn from_array(a: [f64; 8]) -> Self {
        Joints {
            shoulder_l: a[0],
            shoulder_r: a[1],
            elbow_l: a[2],
            elbow_r: a[3],
            hip_l: a[4],
            hip_r: a[5],
            knee_l: a[6],
            knee_r: a[7],
        }
    }
}

/// Avatar pose at one frame. Joint angles are in degrees; shoulders and hips
/// measure outward rotation from hanging straight down, elbows and knees add
/// to their parent limb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFrame {
    pub t: u64,
    pub root: [f64; 2],
    pub yaw_deg: f64,
    pub joints: Joints,
    pub scale: f64,
}

/// Wraps any angle into `[0, 360)`.
pub fn wrap_deg(yaw: f64) -> f64 {
    let w = yaw.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Shortest angular distance in degrees.
pub fn yaw_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionTrack {
    poses: Vec<PoseFrame>,
    fps: u32,
}

impl MotionTrack {
    /// Builds a track, normalizing yaw and enforcing every track invariant.
    pub fn new(poses: Vec<PoseFrame>, fps: u32) -> Result<Self> {
        let mut poses = poses;
        for p in &mut poses {
            p.yaw_deg = wrap_deg(p.yaw_deg);
        }
        validate(&poses, fps, |i| i + 1)?;
        Ok(MotionTrack { poses, fps })
    }

    pub fn poses(&self) -> &[PoseFrame] {
        &self.poses
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.poses.len() as f64 / f64::from(self.fps)
    }

    /// Re-indexed copy of frames `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<MotionTrack> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.poses.len() && len > 0)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "slice [{start}, +{len}) outside track of {}",
                    self.poses.len()
                ))
            })?;
        let poses = self.poses[start..end]
            .iter()
            .enumerate()
            .map(|(i, p)| PoseFrame { t: i as u64, ..*p })
            .collect();
        Ok(MotionTrack {
            poses,
            fps: self.fps,
        })
    }

    /// Truncated copy of the first `len` frames.
    pub fn truncated(&self, len: usize) -> Result<MotionTrack> {
        self.slice(0, len.min(self.poses.len()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER_PREFIX} fps={}\n", self.fps);
        for p in &self.poses {
            out.push_str(&serde_json::to_string(p).expect("pose serializes"));
            out.push('\n');
        }
        out
    }
}

fn validate(poses: &[PoseFrame], fps: u32, line_of: impl Fn(usize) -> usize) -> Result<()> {
    if poses.is_empty() {
        return Err(Error::Track("empty track".into()));
    }
    if fps == 0 {
        return Err(Error::Track("fps must be positive".into()));
    }
    for (i, p) in poses.iter().enumerate() {
        let line = line_of(i);
        let fail = |m: String| Err(Error::Track(format!("{m} at line {line}")));
        if p.t != i as u64 {
            return fail("non-contiguous frame index".into());
        }
        if !(p.root[0].is_finite() && p.root[1].is_finite())
            || !(0.0..=1.0).contains(&p.root[0])
            || !(0.0..=1.0).contains(&p.root[1])
        {
            return fail(format!("root {:?} outside [0,1]^2", p.root));
        }
        if !p.yaw_deg.is_finite() {
            return fail("non-finite yaw".into());
        }
        if !(p.scale > 0.0 && p.scale <= 1.0) {
            return fail(format!("scale {} outside (0,1]", p.scale));
        }
        if let Some(j) = p
            .joints
            .as_array()
            .iter()
            .find(|a| !a.is_finite() || a.abs() > JOINT_LIMIT_DEG)
        {
            return fail(format!("joint angle {j} beyond ±{JOINT_LIMIT_DEG}"));
        }
        if i > 0 {
            let prev = &poses[i - 1];
            let dy = yaw_delta(prev.yaw_deg, p.yaw_deg);
            if dy > MAX_YAW_STEP_DEG + 1e-9 {
                return fail(format!("yaw step {dy:.3}° exceeds {MAX_YAW_STEP_DEG}°"));
            }
            let dr = (p.root[0] - prev.root[0]).hypot(p.root[1] - prev.root[1]);
            if dr > MAX_ROOT_STEP + 1e-12 {
                return fail(format!("root step {dr:.4} exceeds {MAX_ROOT_STEP}"));
            }
        }
    }
    Ok(())
}

/// Parses and validates a track file. Without a header the fps defaults to 8.
pub fn parse_motion_track(reader: impl BufRead) -> Result<MotionTrack> {
    let mut fps = 8u32;
    let mut poses = Vec::new();
    let mut lines_of = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if idx == 0 && trimmed.starts_with(HEADER_PREFIX) {
                fps = parse_header_fps(rest).ok_or_else(|| {
                    Error::Track(format!("malformed header at line {line_no}: {trimmed}"))
                })?;
            }
            continue;
        }
        let mut pose: PoseFrame = serde_json::from_str(trimmed)
            .map_err(|e| Error::Track(format!("malformed record at line {line_no}: {e}")))?;
        pose.yaw_deg = wrap_deg(pose.yaw_deg);
        poses.push(pose);
        lines_of.push(line_no);
    }
    validate(&poses, fps, |i| lines_of[i])?;
    Ok(MotionTrack { poses, fps })
}

fn parse_header_fps(rest: &str) -> Option<u32> {
    rest.split_whitespace()
        .find_map(|tok| tok.strip_prefix("fps="))
        .and_then(|v| v.parse().ok())
        .filter(|&f| f > 0)
}

pub const ANCHOR_ROOT: [f64; 2] = [0.5, 0.55];
pub const DEFAULT_SCALE: f64 = 0.8;
pub const ANCHOR_SECONDS: u32 = 5;
pub const CASUAL_SECONDS: u32 = 30;
pub const TEMPLATE_SECONDS: u32 = 90;
pub const FREE_SECONDS: u32 = 50;

/// Task 1 turntable: one full turn in "A" pose over five seconds.
pub fn make_anchor_track(config: &GenerationConfig) -> MotionTrack {
    let n = (ANCHOR_SECONDS * config.base_fps) as usize;
    let poses = (0..n)
        .map(|t| PoseFrame {
            t: t as u64,
            root: ANCHOR_ROOT,
            yaw_deg: 360.0 * t as f64 / n as f64,
            joints: Joints::A_POSE,
            scale: DEFAULT_SCALE,
        })
        .collect();
    MotionTrack {
        poses,
        fps: config.base_fps,
    }
}

// Casual orbit choreography.
const ORBIT_YAW_WOBBLE_DEG: f64 = 10.0;
const ORBIT_YAW_WOBBLE_HZ: f64 = 0.125;
const ORBIT_ROOT_AMPLITUDE: f64 = 0.05;
const ORBIT_ROOT_HZ: f64 = 0.25;
const ORBIT_ARM_SWING_DEG: f64 = 20.0;
const ORBIT_ARM_HZ: f64 = 0.5;

/// Task 2: a slow full turn with a wobble, swaying root and swinging arms.
pub fn make_casual_orbit_track(duration_s: u32, config: &GenerationConfig) -> MotionTrack {
    let fps = f64::from(config.base_fps);
    let n = (duration_s * config.base_fps) as usize;
    let poses = (0..n)
        .map(|t| {
            let s = t as f64 / fps;
            let yaw = 360.0 * t as f64 / n as f64
                + ORBIT_YAW_WOBBLE_DEG * (TAU * ORBIT_YAW_WOBBLE_HZ * s).sin();
            let sway = (TAU * ORBIT_ROOT_HZ * s).sin();
            let arm = ORBIT_ARM_SWING_DEG * (TAU * ORBIT_ARM_HZ * s).sin();
            PoseFrame {
                t: t as u64,
                root: [
                    ANCHOR_ROOT[0] + ORBIT_ROOT_AMPLITUDE * sway,
                    ANCHOR_ROOT[1] + 0.005 * (2.0 * TAU * ORBIT_ROOT_HZ * s).sin(),
                ],
                yaw_deg: wrap_deg(yaw),
                joints: Joints {
                    shoulder_l: 25.0 + arm,
                    shoulder_r: 25.0 - arm,
                    elbow_l: 15.0 + 0.5 * arm,
                    elbow_r: 15.0 - 0.5 * arm,
                    hip_l: 6.0 + 0.2 * arm,
                    hip_r: 6.0 - 0.2 * arm,
                    knee_l: 4.0,
                    knee_r: 4.0,
                },
                scale: DEFAULT_SCALE,
            }
        })
        .collect();
    MotionTrack {
        poses,
        fps: config.base_fps,
    }
}

#[derive(Clone, Copy)]
struct Key {
    yaw: f64,
    root: [f64; 2],
    joints: [f64; 8],
}

const REST: [f64; 8] = [20.0, 20.0, 5.0, 5.0, 6.0, 6.0, 0.0, 0.0];
const ARMS_UP: [f64; 8] = [150.0, 150.0, 10.0, 10.0, 6.0, 6.0, 0.0, 0.0];
const CROSSED: [f64; 8] = [-35.0, -35.0, -110.0, -110.0, 6.0, 6.0, 0.0, 0.0];
const HANDS_ON_HIPS: [f64; 8] = [40.0, 40.0, -100.0, -100.0, 10.0, 10.0, 5.0, 5.0];
const REACH_LEFT: [f64; 8] = [120.0, -20.0, 0.0, -90.0, 12.0, 4.0, 10.0, 0.0];
const REACH_RIGHT: [f64; 8] = [-20.0, 120.0, -90.0, 0.0, 4.0, 12.0, 0.0, 10.0];

/// The twelve phases of the hand-body interaction script, as 13 keyframes.
fn template_keys() -> [Key; 13] {
    let k = |yaw: f64, joints: [f64; 8]| Key {
        yaw,
        root: ANCHOR_ROOT,
        joints,
    };
    [
        k(0.0, REST),
        k(0.0, ARMS_UP),         // raise arms facing camera
        k(90.0, ARMS_UP),        // turn with arms raised
        k(90.0, CROSSED),        // cross arms over torso
        k(180.0, CROSSED),       // turn away, arms crossed
        k(180.0, HANDS_ON_HIPS), // hands to hips
        k(270.0, HANDS_ON_HIPS), // turn, hands on hips
        k(270.0, REACH_LEFT),    // reach across
        k(360.0, REACH_RIGHT),   // facing camera, swap reach
        k(360.0, CROSSED),       // hug torso
        k(540.0, ARMS_UP),       // half turn while lifting
        k(630.0, HANDS_ON_HIPS), // quarter turn
        k(720.0, REST),          // back to rest
    ]
}

/// Task 3: fixed twelve-phase script of turns and arm gestures, including
/// arms crossing the torso. Starts and ends in the same pose.
pub fn make_interaction_template_track(duration_s: u32, config: &GenerationConfig) -> MotionTrack {
    let n = (duration_s * config.base_fps) as usize;
    let keys = template_keys();
    let phases = keys.len() - 1;
    let last = (n.max(2) - 1) as f64;
    let key_t: Vec<f64> = (0..keys.len())
        .map(|i| (i as f64 * last / phases as f64).round())
        .collect();
    let poses = (0..n)
        .map(|t| {
            let tf = t as f64;
            let i = key_t
                .iter()
                .rposition(|&kt| kt <= tf)
                .unwrap_or(0)
                .min(phases - 1);
            let (a, b) = (keys[i], keys[i + 1]);
            let key = if tf == key_t[i] {
                a
            } else if tf == key_t[i + 1] {
                b
            } else {
                // cosine ease keeps joint speed continuous across phases
                let w = (tf - key_t[i]) / (key_t[i + 1] - key_t[i]);
                let w = 0.5 - 0.5 * (PI * w).cos();
                let lerp = |x: f64, y: f64| x + (y - x) * w;
                Key {
                    yaw: lerp(a.yaw, b.yaw),
                    root: [lerp(a.root[0], b.root[0]), lerp(a.root[1], b.root[1])],
                    joints: std::array::from_fn(|j| lerp(a.joints[j], b.joints[j])),
                }
            };
            PoseFrame {
                t: t as u64,
                root: key.root,
                yaw_deg: wrap_deg(key.yaw),
                joints: Joints::from_array(key.joints),
                scale: DEFAULT_SCALE,
            }
        })
        .collect();
    MotionTrack {
        poses,
        fps: config.base_fps,
    }
}

/// Task 4 stand-in: deterministic free-form motion built from incommensurate
/// oscillations of every joint, wandering yaw and root.
pub fn make_free_motion_track(duration_s: u32, config: &GenerationConfig) -> MotionTrack {
    let fps = f64::from(config.base_fps);
    let n = (duration_s * config.base_fps) as usize;
    const FREQS: [f64; 8] = [0.31, 0.43, 0.57, 0.37, 0.23, 0.29, 0.41, 0.47];
    const AMPS: [f64; 8] = [60.0, 60.0, 50.0, 50.0, 12.0, 12.0, 15.0, 15.0];
    const BASE: [f64; 8] = [50.0, 50.0, -20.0, -20.0, 8.0, 8.0, 8.0, 8.0];
    let poses = (0..n)
        .map(|t| {
            let s = t as f64 / fps;
            let joints =
                std::array::from_fn(|j| BASE[j] + AMPS[j] * (TAU * FREQS[j] * s + j as f64).sin());
            let yaw = 120.0 * (TAU * 0.03 * s).sin() + 40.0 * (TAU * 0.11 * s).sin();
            PoseFrame {
                t: t as u64,
                root: [
                    0.5 + 0.08 * (TAU * 0.07 * s).sin(),
                    0.55 + 0.02 * (TAU * 0.13 * s).sin(),
                ],
                yaw_deg: wrap_deg(yaw),
                joints: Joints::from_array(joints),
                scale: DEFAULT_SCALE,
            }
        })
        .collect();
    MotionTrack {
        poses,
        fps: config.base_fps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn record(t: u64, yaw: f64) -> String {
        let p = PoseFrame {
            t,
            root: ANCHOR_ROOT,
            yaw_deg: yaw,
            joints: Joints::A_POSE,
            scale: 0.8,
        };
        serde_json::to_string(&p).unwrap()
    }

    fn round_trip(track: &MotionTrack) -> MotionTrack {
        parse_motion_track(Cursor::new(track.to_text())).unwrap()
    }

    #[test]
    fn yaw_wraps_on_parse() {
        let track = parse_motion_track(Cursor::new(record(0, 370.0))).unwrap();
        assert_eq!(track.poses()[0].yaw_deg, 10.0);
        assert_eq!(track.fps(), 8);
    }

    #[test]
    fn gap_in_t_is_reported_with_line() {
        let text = format!("{}\n{}\n", record(0, 0.0), record(2, 0.0));
        let err = parse_motion_track(Cursor::new(text)).unwrap_err();
        assert!(
            err.to_string()
                .contains("non-contiguous frame index at line 2"),
            "{err}"
        );
    }

    #[test]
    fn empty_stream_rejected() {
        let err = parse_motion_track(Cursor::new("")).unwrap_err();
        assert!(err.to_string().contains("empty track"));
        let err = parse_motion_track(Cursor::new("#vfr-track v1 fps=8\n")).unwrap_err();
        assert!(err.to_string().contains("empty track"));
    }

    #[test]
    fn malformed_record_names_line() {
        let text = format!("#vfr-track v1 fps=8\n{}\n{{\"t\":1}}\n", record(0, 0.0));
        let err = parse_motion_track(Cursor::new(text)).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn bound_violations_rejected() {
        let text = format!("{}\n{}\n", record(0, 0.0), record(1, 45.0));
        assert!(parse_motion_track(Cursor::new(text)).is_err());
        // crossing 0/360 is a small step
        let text = format!("{}\n{}\n", record(0, 350.0), record(1, 5.0));
        assert!(parse_motion_track(Cursor::new(text)).is_ok());
    }

    #[test]
    fn header_sets_fps() {
        let text = format!("#vfr-track v1 fps=24\n{}\n", record(0, 0.0));
        assert_eq!(parse_motion_track(Cursor::new(text)).unwrap().fps(), 24);
        let text = format!("#vfr-track v1 fps=zero\n{}\n", record(0, 0.0));
        assert!(parse_motion_track(Cursor::new(text)).is_err());
    }

    #[test]
    fn anchor_track_schedule() {
        let cfg = GenerationConfig::default();
        let a = make_anchor_track(&cfg);
        assert_eq!(a.len(), 40);
        assert_eq!(a.poses()[0].yaw_deg, 0.0);
        assert_eq!(a.poses()[0].joints, Joints::A_POSE);
        assert_eq!(a.poses()[20].yaw_deg, 180.0);
        assert_eq!(a.poses()[1].yaw_deg - a.poses()[0].yaw_deg, 9.0);
        assert!(a.poses().iter().all(|p| p.root == ANCHOR_ROOT));
    }

    #[test]
    fn anchor_yaws_fill_bins_evenly_when_divisible() {
        for bins in [4usize, 5, 8, 10, 20] {
            let a = make_anchor_track(&GenerationConfig::default());
            let mut counts = vec![0usize; bins];
            for p in a.poses() {
                counts[(p.yaw_deg / (360.0 / bins as f64)) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == 40 / bins), "{bins}: {counts:?}");
        }
    }

    #[test]
    fn canonical_tracks_validate_and_round_trip() {
        let cfg = GenerationConfig::default();
        let tracks = [
            make_anchor_track(&cfg),
            make_casual_orbit_track(CASUAL_SECONDS, &cfg),
            make_interaction_template_track(TEMPLATE_SECONDS, &cfg),
            make_free_motion_track(FREE_SECONDS, &cfg),
        ];
        for t in &tracks {
            MotionTrack::new(t.poses().to_vec(), t.fps()).unwrap();
            assert_eq!(&round_trip(t), t);
        }
        assert_eq!(tracks[1].len(), 240);
        assert_eq!(tracks[2].len(), 720);
    }

    #[test]
    fn template_returns_to_rest_and_is_fixed() {
        let cfg = GenerationConfig::default();
        let a = make_interaction_template_track(TEMPLATE_SECONDS, &cfg);
        assert_eq!(a.poses()[0].root, a.poses()[719].root);
        assert_eq!(a.poses()[0].yaw_deg, a.poses()[719].yaw_deg);
        assert_eq!(a.poses()[0].joints, a.poses()[719].joints);
        assert_eq!(a, make_interaction_template_track(TEMPLATE_SECONDS, &cfg));
        let crossed = a
            .poses()
            .iter()
            .any(|p| p.joints.shoulder_l < 0.0 && p.joints.elbow_l < -90.0);
        assert!(crossed);
    }

    #[test]
    fn casual_orbit_bounds() {
        let cfg = GenerationConfig::default();
        let a = make_casual_orbit_track(CASUAL_SECONDS, &cfg);
        assert_eq!(a.poses()[0].yaw_deg, 0.0);
        let max_step = a
            .poses()
            .windows(2)
            .map(|w| yaw_delta(w[0].yaw_deg, w[1].yaw_deg))
            .fold(0.0, f64::max);
        assert!(max_step <= MAX_YAW_STEP_DEG);
        let xs: Vec<f64> = a.poses().iter().map(|p| p.root[0]).collect();
        let amp = xs.iter().fold(0.0f64, |m, x| m.max((x - 0.5).abs()));
        assert!((amp - 0.05).abs() < 1e-9);
    }

    #[test]
    fn slice_reindexes() {
        let cfg = GenerationConfig::default();
        let a = make_casual_orbit_track(CASUAL_SECONDS, &cfg);
        let s = a.slice(32, 40).unwrap();
        assert_eq!(s.poses()[0].t, 0);
        assert_eq!(s.poses()[0].yaw_deg, a.poses()[32].yaw_deg);
        assert!(a.slice(230, 20).is_err());
    }
}
