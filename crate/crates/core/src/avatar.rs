//! Procedural articulated avatar renderer.
//!
//! The body is a fixed 2D skeleton of rectangles and capsules. Yaw narrows the
//! trunk and slides the visible band of the garment texture, so a full turn
//! walks the whole texture past the camera. Garment parts are textured through
//! [`apply_appearance`]; the sway angle of each garment part shears its texture
//! mapping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::motion::PoseFrame;

pub const BACKGROUND: [u8; 3] = [200, 200, 205];
const GLASSES: [u8; 3] = [28, 28, 34];
const SLIPPERS: [u8; 3] = [176, 58, 92];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Head,
    Torso,
    UpperArmL,
    LowerArmL,
    UpperArmR,
    LowerArmR,
    Hips,
    UpperLegL,
    LowerLegL,
    UpperLegR,
    LowerLegR,
}

impl Part {
    pub const ALL: [Part; 11] = [
        Part::Head,
        Part::Torso,
        Part::UpperArmL,
        Part::LowerArmL,
        Part::UpperArmR,
        Part::LowerArmR,
        Part::Hips,
        Part::UpperLegL,
        Part::LowerLegL,
        Part::UpperLegR,
        Part::LowerLegR,
    ];

    /// Back-to-front drawing order; later parts occlude earlier ones.
    pub const PAINT_ORDER: [Part; 11] = [
        Part::UpperLegL,
        Part::LowerLegL,
        Part::UpperLegR,
        Part::LowerLegR,
        Part::Hips,
        Part::Torso,
        Part::UpperArmL,
        Part::LowerArmL,
        Part::UpperArmR,
        Part::LowerArmR,
        Part::Head,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    fn label(self) -> u8 {
        self as u8 + 1
    }

    fn from_label(label: u8) -> Option<Part> {
        Part::ALL.get(usize::from(label).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Part::Head => "head",
            Part::Torso => "torso",
            Part::UpperArmL => "upper_arm_l",
            Part::LowerArmL => "lower_arm_l",
            Part::UpperArmR => "upper_arm_r",
            Part::LowerArmR => "lower_arm_r",
            Part::Hips => "hips",
            Part::UpperLegL => "upper_leg_l",
            Part::LowerLegL => "lower_leg_l",
            Part::UpperLegR => "upper_leg_r",
            Part::LowerLegR => "lower_leg_r",
        }
    }
}

impl std::fmt::Display for Part {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSpec {
    pub skin_rgb: [u8; 3],
    pub hair_rgb: [u8; 3],
    /// Color of whatever the user wears on parts the garment does not cover.
    pub base_rgb: [u8; 3],
    pub glasses: bool,
    pub slippers: bool,
    pub arm_thickness: f64,
    pub leg_thickness: f64,
    pub torso_width: f64,
    pub leg_length: f64,
}

impl Default for UserSpec {
    fn default() -> Self {
        UserSpec {
            skin_rgb: [224, 172, 140],
            hair_rgb: [62, 42, 30],
            base_rgb: [72, 72, 84],
            glasses: true,
            slippers: true,
            arm_thickness: 1.0,
            leg_thickness: 1.0,
            torso_width: 1.0,
            leg_length: 1.0,
        }
    }
}

impl UserSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("arm_thickness", self.arm_thickness),
            ("leg_thickness", self.leg_thickness),
            ("torso_width", self.torso_width),
            ("leg_length", self.leg_length),
        ] {
            if !(0.5..=1.5).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0.5, 1.5]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Texture {
    width: u32,
    height: u32,
    texels: Vec<[u8; 3]>,
}

impl Texture {
    pub fn new(width: u32, height: u32, texels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || texels.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "texture {width}x{height} needs {} texels, got {}",
                width as usize * height as usize,
                texels.len()
            )));
        }
        Ok(Texture {
            width,
            height,
            texels,
        })
    }

    pub fn uniform(rgb: [u8; 3]) -> Self {
        Texture {
            width: 4,
            height: 4,
            texels: vec![rgb; 16],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let texels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Texture {
            width,
            height,
            texels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn texels(&self) -> &[[u8; 3]] {
        &self.texels
    }

    pub fn get(&self, col: u32, row: u32) -> [u8; 3] {
        self.texels[(row * self.width + col) as usize]
    }

    /// Column index sampled at horizontal coordinate `u` (wrapped into `[0, 1)`).
    pub fn column_at(&self, u: f64) -> u32 {
        let c = (u.rem_euclid(1.0) * f64::from(self.width)) as u32;
        c.min(self.width - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarmentClass {
    Top,
    Bottoms,
    Dress,
}

impl GarmentClass {
    pub fn covered_parts(self) -> &'static [Part] {
        match self {
            GarmentClass::Top => &[Part::Torso, Part::UpperArmL, Part::UpperArmR],
            GarmentClass::Bottoms => &[
                Part::Hips,
                Part::UpperLegL,
                Part::LowerLegL,
                Part::UpperLegR,
                Part::LowerLegR,
            ],
            GarmentClass::Dress => &[Part::Torso, Part::Hips, Part::UpperLegL, Part::UpperLegR],
        }
    }
}

impl std::str::FromStr for GarmentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(GarmentClass::Top),
            "bottoms" => Ok(GarmentClass::Bottoms),
            "dress" => Ok(GarmentClass::Dress),
            _ => Err(Error::invalid(format!("unknown garment class {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarmentSpec {
    pub texture: Texture,
    pub class: GarmentClass,
}

impl GarmentSpec {
    pub fn new(texture: Texture, class: GarmentClass) -> Self {
        GarmentSpec { texture, class }
    }

    pub fn covered_parts(&self) -> &'static [Part] {
        self.class.covered_parts()
    }

    pub fn covers(&self, part: Part) -> bool {
        self.covered_parts().contains(&part)
    }

    /// Slot of `part` in appearance/sway vectors.
    pub fn slot(&self, part: Part) -> Option<usize> {
        self.covered_parts().iter().position(|&p| p == part)
    }

    /// Built-in garments: `top`, `bottoms`, `dress`, plus `plain` (uniform top)
    /// and `striped` (two-color vertical stripes, top).
    pub fn builtin(name: &str) -> Option<GarmentSpec> {
        let (class, base_hue) = match name {
            "top" => (GarmentClass::Top, 205.0),
            "bottoms" => (GarmentClass::Bottoms, 32.0),
            "dress" => (GarmentClass::Dress, 330.0),
            "plain" => {
                return Some(GarmentSpec::new(
                    Texture::uniform(hsv_to_rgb8(150.0, 0.6, 0.55)),
                    GarmentClass::Top,
                ))
            }
            "striped" => {
                let a = hsv_to_rgb8(0.0, 0.8, 0.6);
                let b = hsv_to_rgb8(120.0, 0.8, 0.6);
                let tex = Texture::from_fn(32, 32, |x, _| if x < 16 { a } else { b });
                return Some(GarmentSpec::new(tex, GarmentClass::Top));
            }
            _ => return None,
        };
        Some(GarmentSpec::new(balanced_texture(base_hue), class))
    }

    pub const BUILTIN_NAMES: [&'static str; 3] = ["top", "bottoms", "dress"];
}

/// 36×3 texture whose every column has the same mean color under any hue
/// rotation or brightness scale, while the hue content varies across three
/// 12-column bands.
///
/// Rows cycle base, accent, complement; the accent pair is chosen by the band
/// `x / 12`. Complementary colors of equal saturation and value sum to the
/// same gray in every channel, and stay complementary under the appearance
/// transform, so which columns a view samples never moves its mean. Keeping
/// the fine structure on rows matters: a thin part samples every few columns
/// and would alias against any short period along `x`.
pub fn balanced_texture(base_hue: f64) -> Texture {
    const ACCENT_HUES: [f64; 3] = [10.0, 130.0, 250.0];
    let base = hsv_to_rgb8(base_hue, 0.6, 0.7);
    Texture::from_fn(36, BALANCED_ROWS, |x, y| {
        let accent = ACCENT_HUES[(x / 12) as usize];
        match y % 3 {
            0 => base,
            1 => hsv_to_rgb8(accent, ACCENT_SATURATION, 0.6),
            _ => hsv_to_rgb8(accent + 180.0, ACCENT_SATURATION, 0.6),
        }
    })
}

/// One period of the row cycle, which is one dither group.
const BALANCED_ROWS: u32 = 3;
const ACCENT_SATURATION: f64 = 0.25;

/// Per covered part: hue rotation (radians), value scale and texture phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartAppearance {
    pub hue_shift: f64,
    pub brightness: f64,
    pub phase: f64,
}

impl PartAppearance {
    pub const IDENTITY: PartAppearance = PartAppearance {
        hue_shift: 0.0,
        brightness: 1.0,
        phase: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        (-PI..PI).contains(&self.hue_shift)
            && (0.5..=1.5).contains(&self.brightness)
            && (0.0..1.0).contains(&self.phase)
    }
}

/// Appearance of every covered part, in the garment's covered-part order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppearanceState {
    pub parts: Vec<PartAppearance>,
}

impl AppearanceState {
    pub fn identity(garment: &GarmentSpec) -> Self {
        AppearanceState {
            parts: vec![PartAppearance::IDENTITY; garment.covered_parts().len()],
        }
    }

    pub fn validate(&self, garment: &GarmentSpec) -> Result<()> {
        if self.parts.len() != garment.covered_parts().len() {
            return Err(Error::invalid(format!(
                "appearance has {} entries for {} covered parts",
                self.parts.len(),
                garment.covered_parts().len()
            )));
        }
        if let Some(p) = self.parts.iter().find(|p| !p.is_valid()) {
            return Err(Error::invalid(format!("appearance out of range: {p:?}")));
        }
        Ok(())
    }
}

pub const MAX_SWAY: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SwayOscillator {
    pub angle: f64,
    pub velocity: f64,
}

/// Sway of every garment region (one per covered part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwayState {
    pub regions: Vec<SwayOscillator>,
}

impl SwayState {
    pub fn rest(garment: &GarmentSpec) -> Self {
        SwayState {
            regions: vec![SwayOscillator::default(); garment.covered_parts().len()],
        }
    }
}

/// Wraps a hue rotation into `[-π, π)`.
pub fn wrap_hue(h: f64) -> f64 {
    let w = (h + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| f64::from(c) / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    (h, s, max)
}

pub fn hsv_to_rgb8(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = h.rem_euclid(360.0);
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0).rem_euclid(2.0) - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    [r, g, b].map(|ch| to_u8((ch + m) * 255.0))
}

/// Round half-up into 8 bits.
pub fn to_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Hue histogram bin (8 bins of 45°).
pub fn hue_bin(rgb: [u8; 3]) -> usize {
    let (h, _, _) = rgb_to_hsv(rgb);
    ((h / 45.0) as usize).min(7)
}

/// Hue-rotate by `h` radians and scale value by `b`.
pub fn transform_color(rgb: [u8; 3], h: f64, b: f64) -> [u8; 3] {
    if h == 0.0 && b == 1.0 {
        return rgb;
    }
    let (hue, s, v) = rgb_to_hsv(rgb);
    hsv_to_rgb8(hue + h.to_degrees(), s, (v * b).min(1.0))
}

/// A texture with an appearance applied: `sample(u, v)` reads the texel at
/// `(frac(u + φ), v)`, hue-rotated and brightness-scaled.
#[derive(Debug, Clone)]
pub struct AppearanceLookup {
    transformed: Texture,
    phase: f64,
}

impl AppearanceLookup {
    /// `dither` picks the row within the group `v` falls in.
    pub fn sample(&self, u: f64, v: f64, dither: u32) -> [u8; 3] {
        let t = &self.transformed;
        let col = t.column_at(u + self.phase);
        t.get(col, texture_row(v, t.height, dither))
    }

    pub fn transformed(&self) -> &Texture {
        &self.transformed
    }
}

pub fn apply_appearance(texture: &Texture, h: f64, b: f64, phase: f64) -> AppearanceLookup {
    let texels = texture
        .texels
        .iter()
        .map(|&c| transform_color(c, h, b))
        .collect();
    AppearanceLookup {
        transformed: Texture {
            width: texture.width,
            height: texture.height,
            texels,
        },
        phase,
    }
}

// Skeleton layout in avatar-height units, y pointing down from the root (pelvis).
const HEAD_Y: f64 = -0.42;
const HEAD_R: f64 = 0.07;
const TORSO_TOP: f64 = -0.35;
const TORSO_BOTTOM: f64 = -0.03;
const TORSO_HALF_W: f64 = 0.10;
const HIPS_BOTTOM: f64 = 0.07;
const HIPS_HALF_W: f64 = 0.095;
const SHOULDER: (f64, f64) = (0.085, -0.32);
const HIP_JOINT: (f64, f64) = (0.05, 0.05);
const UPPER_ARM_LEN: f64 = 0.17;
const LOWER_ARM_LEN: f64 = 0.16;
const ARM_R: f64 = 0.0225;
const UPPER_LEG_LEN: f64 = 0.21;
const LOWER_LEG_LEN: f64 = 0.21;
const LEG_R: f64 = 0.032;
/// Fraction of the texture width visible across a part.
pub const VISIBLE_BAND: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Rect {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    Capsule {
        ax: f64,
        ay: f64,
        dx: f64,
        dy: f64,
        len: f64,
        r: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
    },
}

/// Local coordinates of a pixel inside its part.
#[derive(Debug, Clone, Copy, Default)]
struct Local {
    /// Across the part, `[0, 1]`.
    s: f64,
    /// Along the part, `[0, 1]`.
    t_frac: f64,
}

impl Shape {
    /// Pixel-space bounding box.
    fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Shape::Capsule {
                ax,
                ay,
                dx,
                dy,
                len,
                r,
            } => {
                let (bx, by) = (ax + dx * len, ay + dy * len);
                (
                    ax.min(bx) - r,
                    ax.max(bx) + r,
                    ay.min(by) - r,
                    ay.max(by) + r,
                )
            }
            Shape::Circle { cx, cy, r } => (cx - r, cx + r, cy - r, cy + r),
        }
    }

    fn local(&self, x: f64, y: f64) -> Option<Local> {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => {
                (x >= x0 && x < x1 && y >= y0 && y < y1).then(|| Local {
                    s: (x - x0) / (x1 - x0),
                    t_frac: (y - y0) / (y1 - y0),
                })
            }
            Shape::Capsule {
                ax,
                ay,
                dx,
                dy,
                len,
                r,
            } => {
                let (px, py) = (x - ax, y - ay);
                let along = px * dx + py * dy;
                let across = -px * dy + py * dx;
                let tc = along.clamp(0.0, len);
                let (qx, qy) = (px - tc * dx, py - tc * dy);
                (qx * qx + qy * qy <= r * r).then(|| Local {
                    s: (across / (2.0 * r) + 0.5).clamp(0.0, 1.0),
                    t_frac: if len > 0.0 { tc / len } else { 0.0 },
                })
            }
            Shape::Circle { cx, cy, r } => {
                let (px, py) = (x - cx, y - cy);
                (px * px + py * py <= r * r).then(|| Local {
                    s: (px / (2.0 * r) + 0.5).clamp(0.0, 1.0),
                    t_frac: (py + r) / (2.0 * r),
                })
            }
        }
    }
}

struct Skeleton {
    shapes: Vec<(Part, Shape)>,
    /// Avatar height in pixels.
    unit: f64,
    root: (f64, f64),
}

fn yaw_width_factor(yaw_deg: f64) -> f64 {
    0.55 + 0.45 * yaw_deg.to_radians().cos().abs()
}

fn build_skeleton(pose: &PoseFrame, user: &UserSpec, width: u32, height: u32) -> Skeleton {
    let unit = pose.scale * f64::from(height);
    let root = (
        pose.root[0] * f64::from(width),
        pose.root[1] * f64::from(height),
    );
    let px = |x: f64, y: f64| (root.0 + x * unit, root.1 + y * unit);
    let wf = yaw_width_factor(pose.yaw_deg) * user.torso_width;
    let j = &pose.joints;

    let mut shapes = Vec::with_capacity(11);
    let rect = |x0: f64, x1: f64, y0: f64, y1: f64| {
        let (a, b) = (px(x0, y0), px(x1, y1));
        Shape::Rect {
            x0: a.0,
            x1: b.0,
            y0: a.1,
            y1: b.1,
        }
    };
    let capsule = |from: (f64, f64), angle_deg: f64, side: f64, len: f64, r: f64| {
        let a = angle_deg.to_radians();
        let (dx, dy) = (side * a.sin(), a.cos());
        let start = px(from.0, from.1);
        let shape = Shape::Capsule {
            ax: start.0,
            ay: start.1,
            dx,
            dy,
            len: len * unit,
            r: r * unit,
        };
        (shape, (from.0 + dx * len, from.1 + dy * len))
    };

    let leg_len = user.leg_length;
    let leg_r = LEG_R * user.leg_thickness;
    let arm_r = ARM_R * user.arm_thickness;
    for (side, hip, knee, upper, lower) in [
        (-1.0, j.hip_l, j.knee_l, Part::UpperLegL, Part::LowerLegL),
        (1.0, j.hip_r, j.knee_r, Part::UpperLegR, Part::LowerLegR),
    ] {
        let joint = (side * HIP_JOINT.0 * wf, HIP_JOINT.1);
        let (s1, knee_pt) = capsule(joint, hip, side, UPPER_LEG_LEN * leg_len, leg_r);
        let (s2, _) = capsule(knee_pt, hip + knee, side, LOWER_LEG_LEN * leg_len, leg_r);
        shapes.push((upper, s1));
        shapes.push((lower, s2));
    }
    shapes.push((
        Part::Hips,
        rect(
            -HIPS_HALF_W * wf,
            HIPS_HALF_W * wf,
            TORSO_BOTTOM,
            HIPS_BOTTOM,
        ),
    ));
    shapes.push((
        Part::Torso,
        rect(
            -TORSO_HALF_W * wf,
            TORSO_HALF_W * wf,
            TORSO_TOP,
            TORSO_BOTTOM,
        ),
    ));
    for (side, sh, el, upper, lower) in [
        (
            -1.0,
            j.shoulder_l,
            j.elbow_l,
            Part::UpperArmL,
            Part::LowerArmL,
        ),
        (
            1.0,
            j.shoulder_r,
            j.elbow_r,
            Part::UpperArmR,
            Part::LowerArmR,
        ),
    ] {
        let joint = (side * SHOULDER.0 * wf, SHOULDER.1);
        let (s1, elbow_pt) = capsule(joint, sh, side, UPPER_ARM_LEN, arm_r);
        let (s2, _) = capsule(elbow_pt, sh + el, side, LOWER_ARM_LEN, arm_r);
        shapes.push((upper, s1));
        shapes.push((lower, s2));
    }
    let (hx, hy) = px(0.0, HEAD_Y);
    shapes.push((
        Part::Head,
        Shape::Circle {
            cx: hx,
            cy: hy,
            r: HEAD_R * unit,
        },
    ));
    debug_assert_eq!(
        shapes.iter().map(|s| s.0).collect::<Vec<_>>(),
        Part::PAINT_ORDER
    );
    Skeleton { shapes, unit, root }
}

/// Per-pixel part labels (0 = background) plus local coordinates.
struct Rasterized {
    labels: Vec<u8>,
    locals: Vec<Local>,
}

fn rasterize(skel: &Skeleton, width: u32, height: u32) -> Rasterized {
    let n = width as usize * height as usize;
    let mut labels = vec![0u8; n];
    let mut locals = vec![Local::default(); n];
    for (part, shape) in &skel.shapes {
        let (x0, x1, y0, y1) = shape.bbox();
        let xa = (x0.floor().max(0.0)) as u32;
        let xb = (x1.ceil().min(f64::from(width))) as u32;
        let ya = (y0.floor().max(0.0)) as u32;
        let yb = (y1.ceil().min(f64::from(height))) as u32;
        for y in ya..yb {
            for x in xa..xb {
                if let Some(l) = shape.local(f64::from(x) + 0.5, f64::from(y) + 0.5) {
                    let i = y as usize * width as usize + x as usize;
                    labels[i] = part.label();
                    locals[i] = l;
                }
            }
        }
    }
    Rasterized { labels, locals }
}

/// Texture `u` of a garment pixel at rest, before phase: the visible band
/// starts at `yaw / 360` and spans `VISIBLE_BAND` across the part.
pub fn texture_u(yaw_deg: f64, across: f64) -> f64 {
    yaw_deg / 360.0 + VISIBLE_BAND * across
}

/// Texture row for the along-part coordinate `v ∈ [0, 1]`: `v` picks an
/// aligned group of three rows and `dither` (0..3) the row inside it.
pub fn texture_row(v: f64, rows: u32, dither: u32) -> u32 {
    let groups = rows.div_ceil(3);
    let group = ((v.clamp(0.0, 1.0) * f64::from(groups)) as u32).min(groups - 1);
    (3 * group + dither % 3).min(rows - 1)
}

/// Row dither for texture lookups. Each part's pixels are ranked by their
/// across-part coordinate and the `k`-th gets `k mod 3`. Thin parts sample
/// only a few texture rows and columns, and their texel mix would swing with
/// every sub-pixel move; cycling through a three-row group in across order
/// keeps row-periodic patterns balanced to within one pixel over the whole
/// part and over any across-part slice of it.
fn row_dithers(labels: &[u8], locals: &[Local]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    order.sort_by(|&a, &b| {
        (labels[a], locals[a].s, a)
            .partial_cmp(&(labels[b], locals[b].s, b))
            .expect("surface coordinates are finite")
    });
    let mut dither = vec![0; labels.len()];
    let mut seen = [0u32; 256];
    for i in order {
        let k = &mut seen[usize::from(labels[i])];
        dither[i] = *k % 3;
        *k += 1;
    }
    dither
}

/// Disjoint per-part masks for a pose (occlusion resolved front-to-back).
#[derive(Debug, Clone, PartialEq)]
pub struct PartRegions {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    /// `[across, along]` surface coordinates, both in `[0, 1]`.
    surface: Vec<[f64; 2]>,
    dither: Vec<u32>,
}

impl PartRegions {
    pub fn part_at(&self, x: u32, y: u32) -> Option<Part> {
        Part::from_label(self.labels[y as usize * self.width as usize + x as usize])
    }

    /// Texture row offset of pixel `i`, as used by the renderer.
    pub fn dither(&self, i: usize) -> u32 {
        self.dither[i]
    }

    pub fn parts(&self) -> impl Iterator<Item = Option<Part>> + '_ {
        self.labels.iter().map(|&l| Part::from_label(l))
    }

    pub fn mask(&self, part: Part) -> Vec<bool> {
        self.labels.iter().map(|&l| l == part.label()).collect()
    }

    pub fn count(&self, part: Part) -> usize {
        self.labels.iter().filter(|&&l| l == part.label()).count()
    }

    /// Surface coordinates `[across, along]` of pixel `i` (row-major).
    pub fn surface(&self, i: usize) -> [f64; 2] {
        self.surface[i]
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }
}

pub fn part_regions(pose: &PoseFrame, width: u32, height: u32) -> PartRegions {
    part_regions_for(pose, &UserSpec::default(), width, height)
}

pub fn part_regions_for(pose: &PoseFrame, user: &UserSpec, width: u32, height: u32) -> PartRegions {
    let skel = build_skeleton(pose, user, width, height);
    let raster = rasterize(&skel, width, height);
    PartRegions {
        width,
        height,
        surface: raster.locals.iter().map(|l| [l.s, l.t_frac]).collect(),
        dither: row_dithers(&raster.labels, &raster.locals),
        labels: raster.labels,
    }
}

/// Render settings that do not change between frames.
#[derive(Debug, Clone)]
pub struct Renderer<'a> {
    pub garment: &'a GarmentSpec,
    pub user: &'a UserSpec,
    pub width: u32,
    pub height: u32,
    pub sway_shear: f64,
}

impl Renderer<'_> {
    pub fn render(
        &self,
        pose: &PoseFrame,
        appearance: &AppearanceState,
        sway: &SwayState,
    ) -> Frame {
        let (w, h) = (self.width, self.height);
        let skel = build_skeleton(pose, self.user, w, h);
        let raster = rasterize(&skel, w, h);
        let covered = self.garment.covered_parts();
        let lookups: Vec<AppearanceLookup> = appearance
            .parts
            .iter()
            .map(|a| apply_appearance(&self.garment.texture, a.hue_shift, a.brightness, a.phase))
            .collect();
        let cos_yaw = pose.yaw_deg.to_radians().cos();
        let head_r = HEAD_R * skel.unit;
        let head_cy = skel.root.1 + HEAD_Y * skel.unit;

        let dither = row_dithers(&raster.labels, &raster.locals);
        let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
        let mut mask = Vec::with_capacity(w as usize * h as usize);
        for (i, (&label, local)) in raster.labels.iter().zip(&raster.locals).enumerate() {
            let Some(part) = Part::from_label(label) else {
                pixels.extend_from_slice(&BACKGROUND);
                mask.push(0);
                continue;
            };
            let rgb = if let Some(slot) = covered.iter().position(|&p| p == part) {
                let psi = sway.regions.get(slot).map_or(0.0, |o| o.angle);
                let u = texture_u(pose.yaw_deg, local.s) + self.sway_shear * psi * local.t_frac;
                lookups[slot].sample(u, local.t_frac, dither[i])
            } else {
                let y = (i / w as usize) as f64 + 0.5;
                let x = (i % w as usize) as f64 + 0.5;
                self.bare_color(part, local, x, y, cos_yaw, &skel, head_cy, head_r)
            };
            pixels.extend_from_slice(&rgb);
            mask.push(1);
        }
        Frame::new(w, h, pixels, Some(mask)).expect("renderer sizes are consistent")
    }

    #[allow(clippy::too_many_arguments)]
    fn bare_color(
        &self,
        part: Part,
        local: &Local,
        x: f64,
        y: f64,
        cos_yaw: f64,
        skel: &Skeleton,
        head_cy: f64,
        head_r: f64,
    ) -> [u8; 3] {
        let u = self.user;
        match part {
            Part::Head => {
                let rel_y = (y - head_cy) / head_r;
                let rel_x = (x - skel.root.0) / head_r;
                // hairline drops as the head turns away from the camera
                let hairline = -0.35 + 1.2 * (-cos_yaw).max(0.0);
                if rel_y < hairline {
                    u.hair_rgb
                } else if u.glasses
                    && cos_yaw > 0.0
                    && (-0.05..0.2).contains(&rel_y)
                    && rel_x.abs() < 0.8 * cos_yaw
                {
                    GLASSES
                } else {
                    u.skin_rgb
                }
            }
            Part::Torso | Part::Hips => u.base_rgb,
            Part::LowerLegL | Part::LowerLegR if u.slippers && local.t_frac > 0.85 => SLIPPERS,
            _ => u.skin_rgb,
        }
    }
}

/// Renders one frame with unit sway shear.
pub fn render_frame(
    pose: &PoseFrame,
    appearance: &AppearanceState,
    sway: &SwayState,
    garment: &GarmentSpec,
    user: &UserSpec,
    width: u32,
    height: u32,
) -> Frame {
    Renderer {
        garment,
        user,
        width,
        height,
        sway_shear: 1.0,
    }
    .render(pose, appearance, sway)
}
