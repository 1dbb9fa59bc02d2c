use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{DEFAULT_HEIGHT, DEFAULT_WIDTH};

/// Every tunable of a generation run. Serialized as a flat key-value document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub base_fps: u32,
    pub refined_fps: u32,
    pub width: u32,
    pub height: u32,
    /// Frames per generated segment.
    pub segment_len_frames: usize,
    /// Frames shared between consecutive segments.
    pub overlap_frames: usize,
    /// Per-frame standard deviation of the hue random walk (radians).
    pub drift_sigma: f64,
    /// Per-pixel uniform noise amplitude as a fraction of full scale.
    pub noise_amplitude: f64,
    pub yaw_bins: usize,
    pub seed: u64,
    /// Natural frequency of the garment sway oscillator (rad/s).
    pub sway_omega: f64,
    pub sway_damping: f64,
    /// Coupling from root velocity (scene units per second) into sway acceleration.
    pub sway_gain: f64,
    /// Horizontal texture shear, in texture widths, per radian of sway.
    pub sway_shear: f64,
    /// Blend the overlap instead of overwriting it in outpaint stitching.
    pub crossfade: bool,
    /// Allow a width:height ratio other than 5:8.
    pub allow_any_aspect: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            base_fps: 8,
            refined_fps: 24,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            segment_len_frames: 40,
            overlap_frames: 8,
            drift_sigma: 0.02,
            noise_amplitude: 6.0 / 255.0,
            yaw_bins: 12,
            seed: 0,
            sway_omega: 6.0,
            sway_damping: 2.0,
            sway_gain: 40.0,
            sway_shear: 1.0,
            crossfade: false,
            allow_any_aspect: false,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.base_fps != 8 {
            return bad(format!("base_fps must be 8, got {}", self.base_fps));
        }
        if self.refined_fps != 3 * self.base_fps {
            return bad(format!(
                "refined_fps must be 3 x base_fps, got {}",
                self.refined_fps
            ));
        }
        if self.width == 0 || self.height == 0 {
            return bad("frame size must be nonzero".into());
        }
        if !self.allow_any_aspect && self.width as u64 * 8 != self.height as u64 * 5 {
            return bad(format!(
                "{}x{} is not 5:8; set allow_any_aspect to override",
                self.width, self.height
            ));
        }
        if self.overlap_frames == 0 || self.overlap_frames >= self.segment_len_frames {
            return bad(format!(
                "need 0 < overlap_frames < segment_len_frames, got K={} L={}",
                self.overlap_frames, self.segment_len_frames
            ));
        }
        if self.yaw_bins < 4 {
            return bad(format!("yaw_bins must be >= 4, got {}", self.yaw_bins));
        }
        if !(self.drift_sigma >= 0.0 && self.drift_sigma.is_finite()) {
            return bad("drift_sigma must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.noise_amplitude) {
            return bad("noise_amplitude must lie in [0, 1]".into());
        }
        for (name, v) in [
            ("sway_omega", self.sway_omega),
            ("sway_damping", self.sway_damping),
            ("sway_gain", self.sway_gain),
            ("sway_shear", self.sway_shear),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.base_fps)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: GenerationConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_owned()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Stable hash of the effective configuration (hex, 16 chars).
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = GenerationConfig::default();
        c.validate().unwrap();
        assert_eq!(c.segment_len_frames as u32 / c.base_fps, 5);
    }

    #[test]
    fn overlap_must_be_inside_segment() {
        let mut c = GenerationConfig {
            overlap_frames: 40,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.overlap_frames = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn aspect_enforced_unless_overridden() {
        let mut c = GenerationConfig {
            width: 100,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.allow_any_aspect = true;
        c.validate().unwrap();
        let full = GenerationConfig {
            width: 720,
            height: 1152,
            ..Default::default()
        };
        full.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = GenerationConfig {
            seed: 99,
            drift_sigma: 0.05,
            ..Default::default()
        };
        let back = GenerationConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        let partial = GenerationConfig::from_toml_str("seed = 3\n").unwrap();
        assert_eq!(partial.seed, 3);
        assert_eq!(partial.segment_len_frames, 40);
        assert!(GenerationConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = GenerationConfig::default();
        let b = GenerationConfig {
            seed: 1,
            ..Default::default()
        };
        assert_eq!(a.fingerprint(), GenerationConfig::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
