//! The segment generator: appearance drift and garment sway dynamics, anchor
//! digest extraction and inversion, and the per-segment generation call.

mod digest;
mod dynamics;
mod segment;

pub use digest::{
    brightness_grid, coverage_u_bins, extract_digest, hue_grid, invert_appearance, recover_phase,
    yaw_bin, AnchorDigest, AppearanceInverter, DigestBin, DigestCell, BRIGHTNESS_STEPS, HUE_STEPS,
    PHASE_CANDIDATES,
};
pub use dynamics::{step_appearance, step_sway, AppearanceMode, SwayParams};
pub use segment::{
    canonical_appearance, fresh_appearance, generate_segment, render_anchor, render_sequence,
    snap_to_grid, BoundaryState, ConditionSet, GeneratedSegment, Prefix,
};
