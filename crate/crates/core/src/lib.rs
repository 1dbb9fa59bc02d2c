//! Long virtual try-on video generation, built as a chain of short overlapping
//! segments.
//!
//! Each segment is produced by a procedural avatar generator conditioned on an
//! optional *prefix* (the last frames of the video so far) and an optional
//! *anchor digest* (per-view appearance statistics measured from a 360° turntable
//! clip). An immediate refiner denoises every segment and lifts it from 8 to
//! 24 FPS. The [`metrics`] module scores the result with subject/background
//! consistency and motion smoothness.
//!
//! The crate is deterministic end to end: every random draw comes from an
//! [`rng::RngStream`] keyed by `(seed, segment_index, purpose)`.

pub mod avatar;
pub mod config;
pub mod error;
pub mod frame;
pub mod generation;
pub mod io;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod refiner;
pub mod rng;

pub use config::GenerationConfig;
pub use error::{Error, Result};
pub use frame::{Frame, VideoSegment};
