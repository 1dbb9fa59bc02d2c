use crate::error::{Error, Result};

/// Output resolution of the neural system this pipeline mirrors (5:8 aspect).
pub const PAPER_WIDTH: u32 = 720;
pub const PAPER_HEIGHT: u32 = 1152;
/// Desk-scale default, same aspect.
pub const DEFAULT_WIDTH: u32 = 90;
pub const DEFAULT_HEIGHT: u32 = 144;

/// 8-bit RGB raster with an optional binary subject mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    mask: Option<Vec<u8>>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, mask: Option<Vec<u8>>) -> Result<Self> {
        let n = width as usize * height as usize;
        if width == 0 || height == 0 {
            return Err(Error::invalid("frame dimensions must be nonzero"));
        }
        if pixels.len() != n * 3 {
            return Err(Error::invalid(format!(
                "pixel buffer has {} bytes, expected {}",
                pixels.len(),
                n * 3
            )));
        }
        if let Some(m) = &mask {
            if m.len() != n {
                return Err(Error::invalid(format!(
                    "mask has {} entries, expected {n}",
                    m.len()
                )));
            }
            if m.iter().any(|&v| v > 1) {
                return Err(Error::invalid("mask entries must be 0 or 1"));
            }
        }
        Ok(Frame {
            width,
            height,
            pixels,
            mask,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let n = width as usize * height as usize;
        let pixels = rgb.iter().copied().cycle().take(n * 3).collect();
        Frame {
            width,
            height,
            pixels,
            mask: None,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn mask(&self) -> Option<&[u8]> {
        self.mask.as_deref()
    }

    pub fn with_mask(mut self, mask: Option<Vec<u8>>) -> Result<Self> {
        if let Some(m) = &mask {
            if m.len() != self.pixel_count() {
                return Err(Error::invalid("mask size does not match frame"));
            }
            if m.iter().any(|&v| v > 1) {
                return Err(Error::invalid("mask entries must be 0 or 1"));
            }
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn rgb(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn into_parts(self) -> (u32, u32, Vec<u8>, Option<Vec<u8>>) {
        (self.width, self.height, self.pixels, self.mask)
    }
}

/// Mean absolute per-channel difference, normalized to `[0, 1]`.
pub fn frame_l1_distance(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::invalid(format!(
            "frame size mismatch: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let sum: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| u64::from(x.abs_diff(y)))
        .sum();
    Ok(sum as f64 / (a.pixels.len() as f64 * 255.0))
}

/// An ordered run of equally sized frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSegment {
    frames: Vec<Frame>,
    fps: u32,
    start_index: u64,
}

impl VideoSegment {
    pub fn new(frames: Vec<Frame>, fps: u32, start_index: u64) -> Result<Self> {
        if fps != 8 && fps != 24 {
            return Err(Error::invalid(format!("unsupported fps {fps}")));
        }
        if let Some(first) = frames.first() {
            let has_mask = first.mask.is_some();
            for (i, f) in frames.iter().enumerate() {
                if !f.same_shape(first) {
                    return Err(Error::invalid(format!("frame {i} has a different size")));
                }
                if f.mask.is_some() != has_mask {
                    return Err(Error::invalid(format!(
                        "frame {i} differs in mask presence"
                    )));
                }
            }
        }
        Ok(VideoSegment {
            frames,
            fps,
            start_index,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn has_masks(&self) -> bool {
        self.frames.first().is_some_and(|f| f.mask.is_some())
    }
}
