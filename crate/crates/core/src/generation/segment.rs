use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::digest::{
    brightness_grid, hue_grid, yaw_bin, AnchorDigest, AppearanceInverter, BRIGHTNESS_STEPS,
    HUE_STEPS, PHASE_CANDIDATES,
};
use super::dynamics::{step_appearance, step_sway, AppearanceMode, SwayParams};
use crate::avatar::{
    to_u8, wrap_hue, AppearanceState, GarmentSpec, PartAppearance, Renderer, SwayState, UserSpec,
};
use crate::config::GenerationConfig;
use crate::error::{Error, Result};
use crate::frame::{Frame, VideoSegment};
use crate::motion::{make_anchor_track, MotionTrack, PoseFrame};
use crate::pipeline::VariantFlags;
use crate::rng::{derive_rng, RngStream};

/// Dynamics state after the last frame of a segment; what a prefix carries
/// into the next segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub appearance: AppearanceState,
    pub sway: SwayState,
    /// Noise words consumed by the segment that produced this state.
    pub last_noise_seed_marker: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Prefix<'a> {
    pub frames: &'a [Frame],
    pub state: &'a BoundaryState,
}

#[derive(Debug, Clone, Copy)]
pub struct ConditionSet<'a> {
    pub user: &'a UserSpec,
    pub garment: &'a GarmentSpec,
    pub anchor: Option<&'a AnchorDigest>,
    pub prefix: Option<Prefix<'a>>,
}

#[derive(Debug, Clone)]
pub struct GeneratedSegment {
    pub video: VideoSegment,
    pub end_state: BoundaryState,
}

/// Snaps an appearance onto the inversion lattice.
pub fn snap_to_grid(p: PartAppearance) -> PartAppearance {
    let hue_step = 2.0 * std::f64::consts::PI / HUE_STEPS as f64;
    let i = ((p.hue_shift - hue_grid(0)) / hue_step).round() as usize % HUE_STEPS;
    let j = ((p.brightness - 0.5) * (BRIGHTNESS_STEPS - 1) as f64)
        .round()
        .clamp(0.0, (BRIGHTNESS_STEPS - 1) as f64) as usize;
    let k = (p.phase * PHASE_CANDIDATES as f64).round() as usize % PHASE_CANDIDATES;
    PartAppearance {
        hue_shift: hue_grid(i),
        brightness: brightness_grid(j),
        phase: k as f64 / PHASE_CANDIDATES as f64,
    }
}

/// The seed's identity appearance, drawn once per seed and snapped onto the
/// inversion lattice so the anchor digest inverts back to it exactly.
pub fn canonical_appearance(seed: u64, garment: &GarmentSpec) -> AppearanceState {
    let mut rng = derive_rng(seed, 0, "canonical").expect("static tag");
    let parts = garment
        .covered_parts()
        .iter()
        .map(|_| {
            let h = wrap_hue(0.6 * rng.next_gaussian());
            let b = (1.0 + 0.12 * rng.next_gaussian()).clamp(0.6, 1.4);
            let phase = rng.next_f64();
            snap_to_grid(PartAppearance {
                hue_shift: h,
                brightness: b,
                phase,
            })
        })
        .collect();
    AppearanceState { parts }
}

/// An unconditioned generation's starting appearance: the canonical identity
/// perturbed by a per-segment draw.
pub fn fresh_appearance(seed: u64, segment_index: u64, garment: &GarmentSpec) -> AppearanceState {
    let canonical = canonical_appearance(seed, garment);
    let mut rng = derive_rng(seed, segment_index, "fresh").expect("static tag");
    let parts = canonical
        .parts
        .iter()
        .map(|p| PartAppearance {
            hue_shift: wrap_hue(p.hue_shift + 0.25 * rng.next_gaussian()),
            brightness: (p.brightness + 0.06 * rng.next_gaussian()).clamp(0.5, 1.5),
            phase: {
                let f = (p.phase + 0.08 * rng.next_gaussian()).rem_euclid(1.0);
                if f >= 1.0 {
                    0.0
                } else {
                    f
                }
            },
        })
        .collect();
    AppearanceState { parts }
}

fn add_noise(frame: &mut Frame, amplitude: f64, rng: &mut RngStream) {
    if amplitude == 0.0 {
        return;
    }
    let scale = amplitude * 255.0;
    for v in frame.pixels_mut() {
        let n = ((2.0 * rng.next_f64() - 1.0) * scale + 0.5).floor();
        *v = to_u8(f64::from(*v) + n);
    }
}

/// Renders poses `[first_new, n)` starting from `state`, which is the state at
/// frame `first_new - 1` (or at frame 0 itself when `first_new == 0`).
///
/// Dynamics run sequentially, rendering is parallel, noise is applied in frame
/// order from `noise`.
#[allow(clippy::too_many_arguments)]
pub fn render_sequence(
    poses: &[PoseFrame],
    first_new: usize,
    state: BoundaryState,
    mode: AppearanceMode,
    user: &UserSpec,
    garment: &GarmentSpec,
    config: &GenerationConfig,
    drift: &mut RngStream,
    noise: &mut RngStream,
) -> (Vec<Frame>, BoundaryState) {
    let params = SwayParams::from(config);
    let dt = config.dt();
    let fps = f64::from(config.base_fps);
    let mut states = Vec::with_capacity(poses.len().saturating_sub(first_new));
    let (mut appearance, mut sway) = (state.appearance, state.sway);
    for i in first_new..poses.len() {
        if i > 0 {
            appearance = step_appearance(&appearance, mode, drift, config);
            // lateral root speed in scene units per second
            let v = (poses[i].root[0] - poses[i - 1].root[0]) * fps;
            sway = step_sway(&sway, v, dt, &params);
        }
        states.push((appearance.clone(), sway.clone()));
    }
    let renderer = Renderer {
        garment,
        user,
        width: config.width,
        height: config.height,
        sway_shear: config.sway_shear,
    };
    let mut frames: Vec<Frame> = poses[first_new..]
        .par_iter()
        .zip(states.par_iter())
        .map(|(pose, (a, s))| renderer.render(pose, a, s))
        .collect();
    for f in &mut frames {
        add_noise(f, config.noise_amplitude, noise);
    }
    let end = BoundaryState {
        appearance,
        sway,
        last_noise_seed_marker: noise.counter(),
    };
    (frames, end)
}

/// Generates one segment of `track_slice.len()` frames.
///
/// With an anchor the appearance is recovered from the digest (whose bin at
/// the slice's first yaw must be populated) and held fixed. Without one it random-walks from the prefix
/// state, or from a fresh draw. Sway continues from the prefix state only when
/// prefix conditioning is on. With an active prefix the first `K` output
/// frames are the prefix frames verbatim.
pub fn generate_segment(
    condition: &ConditionSet<'_>,
    track_slice: &MotionTrack,
    flags: &VariantFlags,
    config: &GenerationConfig,
    seed: u64,
    segment_index: u64,
) -> Result<GeneratedSegment> {
    let garment = condition.garment;
    if flags.use_anchor && condition.anchor.is_none() {
        return Err(Error::invalid(
            "variant requires an anchor digest but none was supplied",
        ));
    }
    if !flags.use_anchor && condition.anchor.is_some() {
        log::warn!("anchor digest supplied to a variant without anchor conditioning; ignored");
    }
    if !flags.use_prefix && condition.prefix.is_some() {
        log::warn!("prefix supplied to a variant without prefix conditioning; ignored");
    }
    let prefix = condition.prefix.filter(|_| flags.use_prefix);
    if let Some(p) = &prefix {
        if p.frames.len() != config.overlap_frames {
            return Err(Error::invalid(format!(
                "prefix has {} frames, expected {}",
                p.frames.len(),
                config.overlap_frames
            )));
        }
        if p.frames.len() >= track_slice.len() {
            return Err(Error::invalid("track slice must extend past the prefix"));
        }
        if p.frames
            .iter()
            .any(|f| f.width() != config.width || f.height() != config.height)
        {
            return Err(Error::invalid("prefix frame size does not match config"));
        }
    }
    let poses = track_slice.poses();

    let (appearance, mode) = match condition.anchor.filter(|_| flags.use_anchor) {
        Some(digest) => {
            let bin = yaw_bin(poses[0].yaw_deg, digest.yaw_bins);
            let inverter = AppearanceInverter::new(garment);
            let parts = garment
                .covered_parts()
                .iter()
                .map(|&part| {
                    digest.populated(part, bin)?;
                    inverter.solve(digest, part)
                })
                .collect::<Result<Vec<_>>>()?;
            (AppearanceState { parts }, AppearanceMode::Locked)
        }
        None => match &prefix {
            Some(p) => (p.state.appearance.clone(), AppearanceMode::Walk),
            None => (
                fresh_appearance(seed, segment_index, garment),
                AppearanceMode::Walk,
            ),
        },
    };
    appearance.validate(garment)?;
    let sway = match &prefix {
        Some(p) => p.state.sway.clone(),
        None => SwayState::rest(garment),
    };
    let first_new = prefix.map_or(0, |p| p.frames.len());
    let start = BoundaryState {
        appearance,
        sway,
        last_noise_seed_marker: 0,
    };
    let mut drift = derive_rng(seed, segment_index, "drift")?;
    let mut noise = derive_rng(seed, segment_index, "noise")?;
    let (new_frames, end_state) = render_sequence(
        poses,
        first_new,
        start,
        mode,
        condition.user,
        garment,
        config,
        &mut drift,
        &mut noise,
    );
    let mut frames = Vec::with_capacity(poses.len());
    if let Some(p) = prefix {
        frames.extend(p.frames.iter().cloned());
    }
    frames.extend(new_frames);
    Ok(GeneratedSegment {
        video: VideoSegment::new(frames, config.base_fps, 0)?,
        end_state,
    })
}

/// Renders the 360° anchor orbit with the seed's canonical appearance held
/// fixed and no prefix. Returns the video and the track it follows.
pub fn render_anchor(
    user: &UserSpec,
    garment: &GarmentSpec,
    config: &GenerationConfig,
    seed: u64,
) -> Result<(VideoSegment, MotionTrack)> {
    let track = make_anchor_track(config);
    let start = BoundaryState {
        appearance: canonical_appearance(seed, garment),
        sway: SwayState::rest(garment),
        last_noise_seed_marker: 0,
    };
    let mut drift = derive_rng(seed, 0, "anchor-drift")?;
    let mut noise = derive_rng(seed, 0, "anchor-noise")?;
    let (frames, _) = render_sequence(
        track.poses(),
        0,
        start,
        AppearanceMode::Locked,
        user,
        garment,
        config,
        &mut drift,
        &mut noise,
    );
    Ok((VideoSegment::new(frames, config.base_fps, 0)?, track))
}
