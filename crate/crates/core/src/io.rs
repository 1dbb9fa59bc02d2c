//! On-disk artifacts: numbered PNG frame sequences with a JSON manifest,
//! digest files, user/garment spec files, and the multiview camera export.
//!
//! A directory's `manifest.json` is always written last, through a rename, so
//! a reader that finds a manifest also finds every frame it lists.

use std::fs::{self, File};
use std::io::{BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::avatar::{GarmentClass, GarmentSpec, Texture, UserSpec};
use crate::error::{Error, Result};
use crate::frame::{Frame, VideoSegment};
use crate::generation::AnchorDigest;
use crate::pipeline::{
    generate_anchor, run_with_sink, FrameSink, GenerationRequest, RunReport, SegmentSpan, Task,
};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIGEST_FILE: &str = "digest.json";
pub const CAMERA_FILE: &str = "transforms.json";
pub const FRAME_PATTERN: &str = "frame_%06d.png";
pub const MASK_PATTERN: &str = "mask_%06d.png";

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.png")
}

pub fn mask_file_name(index: u64) -> String {
    format!("mask_{index:06}.png")
}

/// What a directory holds, written after its frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    pub format_version: u32,
    pub fps: u32,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    pub frame_pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_pattern: Option<String>,
    pub seed: u64,
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<u8>,
    /// Output frame index where each segment's fresh frames start.
    #[serde(default)]
    pub segment_boundaries: Vec<u64>,
    #[serde(default)]
    pub segments: Vec<SegmentSpan>,
    /// Digest file (relative to the directory) when one was written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    /// Per-frame subject yaw; present for anchor orbits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaws: Option<Vec<f64>>,
    /// CRC32 of each frame file's bytes, as 8 hex digits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksums: Option<Vec<String>>,
    pub config_fingerprint: String,
    pub partial: bool,
}

impl VideoManifest {
    /// Manifest fields for a finished run; frame count and checksums are
    /// filled in by the writer.
    pub fn for_run(report: &RunReport, task: Option<Task>) -> Self {
        VideoManifest {
            format_version: FORMAT_VERSION,
            fps: report.fps,
            width: report.width,
            height: report.height,
            frame_count: 0,
            frame_pattern: FRAME_PATTERN.into(),
            mask_pattern: None,
            seed: report.seed,
            variant: report.variant.clone(),
            task: task.map(Task::id),
            segment_boundaries: report.boundaries.clone(),
            segments: report.plan.spans.clone(),
            digest: None,
            yaws: None,
            checksums: None,
            config_fingerprint: report.config_fingerprint.clone(),
            partial: false,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.frame_count as f64 / f64::from(self.fps)
    }
}

/// Lossless RGB8 PNG.
pub fn encode_png(frame: &Frame) -> Result<Vec<u8>> {
    encode(
        frame.width(),
        frame.height(),
        png::ColorType::Rgb,
        frame.pixels(),
    )
}

fn encode(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, width, height);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Fast);
    enc.write_header()?.write_image_data(data)?;
    Ok(out)
}

/// Masks are stored as 8-bit gray, 0 or 255.
fn encode_mask(frame: &Frame, mask: &[u8]) -> Result<Vec<u8>> {
    let gray: Vec<u8> = mask.iter().map(|&m| m * 255).collect();
    encode(
        frame.width(),
        frame.height(),
        png::ColorType::Grayscale,
        &gray,
    )
}

/// Decodes an 8-bit PNG to `(width, height, samples per pixel, data)`.
fn decode(bytes: &[u8]) -> Result<(u32, u32, usize, Vec<u8>)> {
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Png(format!(
            "unsupported bit depth {:?}",
            info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    let channels = info.color_type.samples();
    Ok((info.width, info.height, channels, buf))
}

/// Decodes an RGB or RGBA PNG into a frame without mask (alpha is dropped).
pub fn decode_png(bytes: &[u8]) -> Result<Frame> {
    let (w, h, channels, data) = decode(bytes)?;
    let pixels = match channels {
        3 => data,
        4 => data
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect(),
        1 => data.iter().flat_map(|&v| [v, v, v]).collect(),
        n => return Err(Error::Png(format!("unsupported channel count {n}"))),
    };
    Frame::new(w, h, pixels, None)
}

fn decode_mask(bytes: &[u8], width: u32, height: u32) -> Result<Vec<u8>> {
    let (w, h, channels, data) = decode(bytes)?;
    if (w, h, channels) != (width, height, 1) {
        return Err(Error::format(
            "mask",
            format!("{w}x{h}x{channels}, expected {width}x{height} gray"),
        ));
    }
    Ok(data.into_iter().map(|v| u8::from(v >= 128)).collect())
}

fn crc_hex(bytes: &[u8]) -> String {
    format!("{:08x}", crc32fast::hash(bytes))
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
        f.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_owned()),
        _ => Error::Io(e),
    })
}

/// Streams frames into a directory. Refuses a directory that already holds a
/// manifest or frame files.
pub struct FrameWriter {
    dir: PathBuf,
    count: u64,
    masks: Option<bool>,
    size: Option<(u32, u32)>,
    checksums: Vec<String>,
}

impl FrameWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            if !entry.file_type()?.is_file() {
                continue;
            }
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name == MANIFEST_FILE || (name.starts_with("frame_") && name.ends_with(".png")) {
                return Err(Error::invalid(format!(
                    "{} already contains a video ({name})",
                    dir.display()
                )));
            }
        }
        Ok(FrameWriter {
            dir: dir.to_owned(),
            count: 0,
            masks: None,
            size: None,
            checksums: vec![],
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn frames_written(&self) -> u64 {
        self.count
    }

    /// Writes the manifest (with the frame count, checksums and mask pattern
    /// filled in) and returns it.
    pub fn finish(self, mut manifest: VideoManifest) -> Result<VideoManifest> {
        manifest.frame_count = self.count as usize;
        manifest.checksums = Some(self.checksums);
        manifest.mask_pattern = self.masks.filter(|&m| m).map(|_| MASK_PATTERN.into());
        if let Some((w, h)) = self.size {
            manifest.width = w;
            manifest.height = h;
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomically(&self.dir.join(MANIFEST_FILE), text.as_bytes())?;
        Ok(manifest)
    }
}

impl FrameSink for FrameWriter {
    fn write_frame(&mut self, index: u64, frame: &Frame) -> Result<()> {
        if index != self.count {
            return Err(Error::invalid(format!(
                "frame {index} out of order, expected {}",
                self.count
            )));
        }
        let size = (frame.width(), frame.height());
        if *self.size.get_or_insert(size) != size {
            return Err(Error::invalid(format!("frame {index} changes size")));
        }
        let has_mask = frame.mask().is_some();
        if *self.masks.get_or_insert(has_mask) != has_mask {
            return Err(Error::invalid(format!(
                "frame {index} changes mask presence"
            )));
        }
        let bytes = encode_png(frame)?;
        fs::write(self.dir.join(frame_file_name(index)), &bytes)?;
        self.checksums.push(crc_hex(&bytes));
        if let Some(mask) = frame.mask() {
            fs::write(
                self.dir.join(mask_file_name(index)),
                encode_mask(frame, mask)?,
            )?;
        }
        self.count += 1;
        Ok(())
    }
}

/// Writes a whole segment and its manifest.
pub fn write_video(
    segment: &VideoSegment,
    manifest: VideoManifest,
    dir: &Path,
) -> Result<VideoManifest> {
    let mut w = FrameWriter::create(dir)?;
    for (i, f) in segment.frames().iter().enumerate() {
        w.write_frame(i as u64, f)?;
    }
    w.finish(VideoManifest {
        fps: segment.fps(),
        ..manifest
    })
}

pub fn read_manifest(dir: &Path) -> Result<VideoManifest> {
    let text = read_file(&dir.join(MANIFEST_FILE))?;
    let m: VideoManifest =
        serde_json::from_slice(&text).map_err(|e| Error::format("manifest", e.to_string()))?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::format(
            "manifest",
            format!(
                "format version {} (expected {FORMAT_VERSION})",
                m.format_version
            ),
        ));
    }
    if m.frame_pattern != FRAME_PATTERN {
        return Err(Error::format(
            "manifest",
            format!("unknown frame pattern {}", m.frame_pattern),
        ));
    }
    if let Some(c) = &m.checksums {
        if c.len() != m.frame_count {
            return Err(Error::format(
                "manifest",
                "checksum list does not match frame count",
            ));
        }
    }
    Ok(m)
}

/// Reads frames one at a time, verifying each against its checksum.
pub struct VideoReader {
    dir: PathBuf,
    manifest: VideoManifest,
    next: usize,
}

impl VideoReader {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest = read_manifest(dir)?;
        Ok(VideoReader {
            dir: dir.to_owned(),
            manifest,
            next: 0,
        })
    }

    pub fn manifest(&self) -> &VideoManifest {
        &self.manifest
    }

    fn load(&self, i: usize) -> Result<Frame> {
        let name = frame_file_name(i as u64);
        let bytes = read_file(&self.dir.join(&name))?;
        if let Some(c) = &self.manifest.checksums {
            if crc_hex(&bytes) != c[i] {
                return Err(Error::Checksum { file: name });
            }
        }
        let frame = decode_png(&bytes)?;
        if (frame.width(), frame.height()) != (self.manifest.width, self.manifest.height) {
            return Err(Error::format("frame", format!("{name} has the wrong size")));
        }
        if self.manifest.mask_pattern.is_some() {
            let mbytes = read_file(&self.dir.join(mask_file_name(i as u64)))?;
            let mask = decode_mask(&mbytes, frame.width(), frame.height())?;
            return frame.with_mask(Some(mask));
        }
        Ok(frame)
    }
}

impl Iterator for VideoReader {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.manifest.frame_count {
            return None;
        }
        let r = self.load(self.next);
        self.next += 1;
        Some(r)
    }
}

/// Loads and verifies every frame.
pub fn read_video(dir: &Path) -> Result<(VideoSegment, VideoManifest)> {
    let reader = VideoReader::open(dir)?;
    let manifest = reader.manifest().clone();
    let frames = reader.collect::<Result<Vec<_>>>()?;
    Ok((VideoSegment::new(frames, manifest.fps, 0)?, manifest))
}

pub fn write_digest(digest: &AnchorDigest, path: &Path) -> Result<()> {
    write_atomically(path, digest.to_json().as_bytes())
}

pub fn read_digest(path: &Path) -> Result<AnchorDigest> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::format("digest", e.to_string()))?;
    AnchorDigest::from_json(&text)
}

/// Runs a request into `dir`. When a segment fails, the frames written so
/// far get a manifest flagged `partial` and the error is returned.
pub fn run_to_directory(request: &GenerationRequest, dir: &Path) -> Result<VideoManifest> {
    let mut writer = FrameWriter::create(dir)?;
    match run_with_sink(request, &mut writer) {
        Ok(report) => {
            let mut manifest = VideoManifest::for_run(&report, request.task());
            if let Some(d) = &report.anchor {
                write_digest(d, &dir.join(DIGEST_FILE))?;
                manifest.digest = Some(DIGEST_FILE.into());
            }
            writer.finish(manifest)
        }
        Err(e) => {
            let cfg = &request.config;
            let partial = VideoManifest {
                format_version: FORMAT_VERSION,
                fps: if request.flags.use_refiner {
                    cfg.refined_fps
                } else {
                    cfg.base_fps
                },
                width: cfg.width,
                height: cfg.height,
                frame_count: 0,
                frame_pattern: FRAME_PATTERN.into(),
                mask_pattern: None,
                seed: cfg.seed,
                variant: request.flags.name().into(),
                task: request.task().map(Task::id),
                segment_boundaries: vec![],
                segments: vec![],
                digest: None,
                yaws: None,
                checksums: None,
                config_fingerprint: cfg.fingerprint(),
                partial: true,
            };
            writer.finish(partial)?;
            Err(e)
        }
    }
}

/// Renders the 360° anchor at base rate into `dir` with its digest and
/// per-frame yaws.
pub fn write_anchor(request: &GenerationRequest, dir: &Path) -> Result<VideoManifest> {
    let anchor = generate_anchor(request)?;
    let cfg = &request.config;
    let mut writer = FrameWriter::create(dir)?;
    for (i, f) in anchor.video.frames().iter().enumerate() {
        writer.write_frame(i as u64, f)?;
    }
    write_digest(&anchor.digest, &dir.join(DIGEST_FILE))?;
    writer.finish(VideoManifest {
        format_version: FORMAT_VERSION,
        fps: cfg.base_fps,
        width: cfg.width,
        height: cfg.height,
        frame_count: 0,
        frame_pattern: FRAME_PATTERN.into(),
        mask_pattern: None,
        seed: cfg.seed,
        variant: "anchor".into(),
        task: Some(Task::Anchor360.id()),
        segment_boundaries: vec![0],
        segments: vec![SegmentSpan {
            start: 0,
            len: anchor.video.len(),
            prefix_len: 0,
        }],
        digest: Some(DIGEST_FILE.into()),
        yaws: Some(anchor.track.poses().iter().map(|p| p.yaw_deg).collect()),
        checksums: None,
        config_fingerprint: cfg.fingerprint(),
        partial: false,
    })
}

/// Orbit camera used for multiview export.
pub const ORBIT_RADIUS: f64 = 2.5;
pub const ORBIT_ELEVATION_DEG: f64 = 0.0;
pub const CAMERA_FOV_X_DEG: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub file_path: String,
    pub yaw_deg: f64,
    /// Camera-to-world, row-major.
    pub transform_matrix: [[f64; 4]; 4],
}

/// A `transforms.json` camera file: one orbit camera per frame, looking at
/// the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraTrackExport {
    pub camera_angle_x: f64,
    pub w: u32,
    pub h: u32,
    pub orbit_radius: f64,
    pub elevation_deg: f64,
    pub frames: Vec<CameraFrame>,
}

/// Camera-to-world pose for a subject turned by `yaw_deg`: equivalently the
/// camera orbits the other way around a still subject.
pub fn orbit_pose(yaw_deg: f64, radius: f64, elevation_deg: f64) -> [[f64; 4]; 4] {
    let (a, e) = ((-yaw_deg).to_radians(), elevation_deg.to_radians());
    let pos = [
        radius * e.cos() * a.sin(),
        radius * e.sin(),
        radius * e.cos() * a.cos(),
    ];
    // looking at the origin; OpenGL convention (camera looks down -z)
    let norm = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let back = norm(pos);
    let right = norm(cross([0.0, 1.0, 0.0], back));
    let up = cross(back, right);
    [
        [right[0], up[0], back[0], pos[0]],
        [right[1], up[1], back[1], pos[1]],
        [right[2], up[2], back[2], pos[2]],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// True when `yaws` step evenly around the full circle from 0.
fn is_full_orbit(yaws: &[f64]) -> bool {
    let n = yaws.len();
    if n < 2 {
        return false;
    }
    let step = 360.0 / n as f64;
    yaws.iter()
        .enumerate()
        .all(|(i, &y)| (y - step * i as f64).abs() < 1e-6)
}

/// Copies an anchor's frames into `out` and writes `transforms.json`.
pub fn export_multiview(anchor_dir: &Path, out: &Path) -> Result<CameraTrackExport> {
    let manifest = read_manifest(anchor_dir)?;
    let yaws = match &manifest.yaws {
        Some(y) if y.len() == manifest.frame_count && is_full_orbit(y) => y.clone(),
        Some(_) => {
            return Err(Error::NotAnchor(format!(
                "{}: yaws do not cover [0, 360) evenly",
                anchor_dir.display()
            )))
        }
        None => {
            return Err(Error::NotAnchor(format!(
                "{}: no per-frame yaws",
                anchor_dir.display()
            )))
        }
    };
    fs::create_dir_all(out)?;
    let mut frames = Vec::with_capacity(yaws.len());
    for (i, frame) in VideoReader::open(anchor_dir)?.enumerate() {
        let name = frame_file_name(i as u64);
        fs::write(out.join(&name), encode_png(&frame?)?)?;
        frames.push(CameraFrame {
            file_path: name,
            yaw_deg: yaws[i],
            transform_matrix: orbit_pose(yaws[i], ORBIT_RADIUS, ORBIT_ELEVATION_DEG),
        });
    }
    let export = CameraTrackExport {
        camera_angle_x: CAMERA_FOV_X_DEG.to_radians(),
        w: manifest.width,
        h: manifest.height,
        orbit_radius: ORBIT_RADIUS,
        elevation_deg: ORBIT_ELEVATION_DEG,
        frames,
    };
    let text = serde_json::to_string_pretty(&export).expect("export serializes");
    write_atomically(&out.join(CAMERA_FILE), text.as_bytes())?;
    Ok(export)
}

/// Checks a camera file the way a reconstruction tool would read it: field
/// types, rigid 4×4 poses, and that every referenced image exists.
pub fn validate_camera_file(path: &Path) -> Result<CameraTrackExport> {
    let bytes = read_file(path)?;
    let export: CameraTrackExport =
        serde_json::from_slice(&bytes).map_err(|e| Error::format("camera file", e.to_string()))?;
    let bad = |m: String| Err(Error::format("camera file", m));
    if !(export.camera_angle_x > 0.0 && export.camera_angle_x < std::f64::consts::PI) {
        return bad(format!(
            "camera_angle_x {} out of range",
            export.camera_angle_x
        ));
    }
    if export.frames.is_empty() {
        return bad("no frames".into());
    }
    let base = path.parent().unwrap_or(Path::new("."));
    for f in &export.frames {
        let m = &f.transform_matrix;
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return bad(format!("{}: last row is not [0, 0, 0, 1]", f.file_path));
        }
        // rotation columns orthonormal
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|r| m[r][a] * m[r][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-9 {
                    return bad(format!("{}: rotation is not orthonormal", f.file_path));
                }
            }
        }
        if !base.join(&f.file_path).is_file() {
            return bad(format!("{} is missing", f.file_path));
        }
    }
    Ok(export)
}

/// `UserSpec` from a flat TOML document; missing keys take defaults.
pub fn load_user_spec(path: &Path) -> Result<UserSpec> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|e| Error::format("user spec", e.to_string()))?;
    let spec: UserSpec =
        toml::from_str(&text).map_err(|e| Error::format("user spec", e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GarmentFile {
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    class: Option<GarmentClass>,
    /// PNG path, relative to the spec file.
    #[serde(default)]
    texture: Option<PathBuf>,
}

/// `GarmentSpec` from a flat TOML document: either `builtin = "top"`, or
/// `class` plus a `texture` PNG path relative to the file.
pub fn load_garment_spec(path: &Path) -> Result<GarmentSpec> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|e| Error::format("garment spec", e.to_string()))?;
    let file: GarmentFile =
        toml::from_str(&text).map_err(|e| Error::format("garment spec", e.to_string()))?;
    match (file.builtin, file.class, file.texture) {
        (Some(name), None, None) => GarmentSpec::builtin(&name)
            .ok_or_else(|| Error::format("garment spec", format!("unknown builtin {name:?}"))),
        (None, Some(class), Some(tex)) => {
            let tex_path = path.parent().unwrap_or(Path::new(".")).join(tex);
            Ok(GarmentSpec::new(load_texture(&tex_path)?, class))
        }
        _ => Err(Error::format(
            "garment spec",
            "give either `builtin`, or both `class` and `texture`",
        )),
    }
}

pub fn load_texture(path: &Path) -> Result<Texture> {
    let frame = decode_png(&read_file(path)?)?;
    let texels = frame
        .pixels()
        .chunks_exact(3)
        .map(|p| [p[0], p[1], p[2]])
        .collect();
    Texture::new(frame.width(), frame.height(), texels)
}

/// Resolves a garment argument: a builtin name or a spec file path.
pub fn resolve_garment(arg: &str) -> Result<GarmentSpec> {
    match GarmentSpec::builtin(arg) {
        Some(g) => Ok(g),
        None => load_garment_spec(Path::new(arg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_are_zero_padded() {
        assert_eq!(frame_file_name(0), "frame_000000.png");
        assert_eq!(frame_file_name(239), "frame_000239.png");
        assert_eq!(mask_file_name(17), "mask_000017.png");
    }

    #[test]
    fn png_round_trip_is_lossless() {
        let px: Vec<u8> = (0..5 * 8 * 3).map(|i| (i * 37 % 256) as u8).collect();
        let f = Frame::new(5, 8, px, None).unwrap();
        assert_eq!(decode_png(&encode_png(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn full_orbit_detection() {
        let yaws: Vec<f64> = (0..40).map(|i| 9.0 * i as f64).collect();
        assert!(is_full_orbit(&yaws));
        assert!(!is_full_orbit(&yaws[..39]));
        let mut skewed = yaws.clone();
        skewed[5] += 1.0;
        assert!(!is_full_orbit(&skewed));
    }

    #[test]
    fn orbit_pose_is_rigid_and_looks_at_origin() {
        for yaw in [0.0, 9.0, 135.0, 351.0] {
            let m = orbit_pose(yaw, 2.5, 0.0);
            let pos = [m[0][3], m[1][3], m[2][3]];
            let dist = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
            assert!((dist - 2.5).abs() < 1e-12);
            // camera looks down its -z column, i.e. toward the origin
            let back = [m[0][2], m[1][2], m[2][2]];
            for i in 0..3 {
                assert!((back[i] * 2.5 - pos[i]).abs() < 1e-12);
            }
        }
    }
}
