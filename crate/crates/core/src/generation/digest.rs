//! Anchor digest: per-view, per-part color statistics measured from pixels,
//! and the grid searches that invert them back to appearance parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::avatar::{
    hue_bin, part_regions_for, texture_row, texture_u, transform_color, GarmentSpec, Part,
    PartAppearance, Texture, UserSpec,
};
use crate::config::GenerationConfig;
use crate::error::{Error, Result};
use crate::frame::VideoSegment;
use crate::motion::MotionTrack;

pub const HUE_STEPS: usize = 64;
pub const BRIGHTNESS_STEPS: usize = 64;
pub const PHASE_CANDIDATES: usize = 16;
const DIGEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigestCell {
    pub mean_rgb: [f64; 3],
    pub hue_hist: [f64; 8],
    /// Pixels accumulated.
    pub count: u64,
    /// Sparse `[u_bin * texture_rows + row, pixels]` pairs: where on the
    /// texture, before phase, the counted pixels land. Comes from the track
    /// geometry, not from pixel values.
    pub coverage: Vec<[u32; 2]>,
}

impl DigestCell {
    fn empty() -> Self {
        DigestCell {
            mean_rgb: [0.0; 3],
            hue_hist: [0.0; 8],
            count: 0,
            coverage: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigestBin {
    /// Yaw of every frame that contributed, in order of appearance.
    pub yaws: Vec<f64>,
    /// One cell per covered part, in the garment's covered-part order.
    pub cells: Vec<DigestCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorDigest {
    pub version: u32,
    pub yaw_bins: usize,
    pub parts: Vec<Part>,
    /// `[columns, rows]` of the garment texture the coverage refers to.
    pub texture_size: [u32; 2],
    /// Resolution of the coverage `u` axis; a multiple of both the texture
    /// width and the phase candidate count.
    pub u_bins: u32,
    pub bins: Vec<DigestBin>,
}

impl AnchorDigest {
    pub fn cell(&self, part: Part, bin: usize) -> Option<&DigestCell> {
        let slot = self.parts.iter().position(|&p| p == part)?;
        self.bins.get(bin)?.cells.get(slot)
    }

    fn slot(&self, part: Part) -> Result<usize> {
        self.parts
            .iter()
            .position(|&p| p == part)
            .ok_or(Error::Coverage {
                part: part.to_string(),
                bin: 0,
            })
    }

    /// A populated cell or a coverage error naming the bin.
    pub fn populated(&self, part: Part, bin: usize) -> Result<&DigestCell> {
        match self.cell(part, bin) {
            Some(c) if c.count > 0 => Ok(c),
            _ => Err(Error::Coverage {
                part: part.to_string(),
                bin,
            }),
        }
    }

    pub fn is_fully_covered(&self) -> bool {
        self.bins
            .iter()
            .all(|b| b.cells.iter().all(|c| c.count > 0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("digest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: AnchorDigest = serde_json::from_str(text)?;
        if d.version != DIGEST_VERSION {
            return Err(Error::format(
                "digest",
                format!("unsupported version {}", d.version),
            ));
        }
        if d.bins.len() != d.yaw_bins || d.bins.iter().any(|b| b.cells.len() != d.parts.len()) {
            return Err(Error::format(
                "digest",
                "bin/part table has the wrong shape",
            ));
        }
        let [w, rows] = d.texture_size;
        if w == 0 || rows == 0 || d.u_bins != coverage_u_bins(w) {
            return Err(Error::format("digest", "bad coverage resolution"));
        }
        let limit = d.u_bins * rows;
        let bad = d
            .bins
            .iter()
            .flat_map(|b| &b.cells)
            .flat_map(|c| &c.coverage)
            .any(|&[idx, _]| idx >= limit);
        if bad {
            return Err(Error::format("digest", "coverage index out of range"));
        }
        Ok(d)
    }
}

pub fn yaw_bin(yaw_deg: f64, bins: usize) -> usize {
    let width = 360.0 / bins as f64;
    ((yaw_deg.rem_euclid(360.0) / width) as usize).min(bins - 1)
}

/// Smallest `u` resolution on which every texture column boundary and every
/// phase-candidate shift fall on whole bins.
pub fn coverage_u_bins(texture_width: u32) -> u32 {
    let (mut a, mut b) = (texture_width, PHASE_CANDIDATES as u32);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    texture_width / a * PHASE_CANDIDATES as u32
}

pub fn extract_digest(
    video: &VideoSegment,
    track: &MotionTrack,
    garment: &GarmentSpec,
    user: &UserSpec,
    config: &GenerationConfig,
) -> Result<AnchorDigest> {
    if video.len() != track.len() {
        return Err(Error::invalid(format!(
            "video has {} frames but track has {}",
            video.len(),
            track.len()
        )));
    }
    if !video.has_masks() {
        return Err(Error::invalid("digest extraction needs subject masks"));
    }
    let parts = garment.covered_parts().to_vec();
    let nbins = config.yaw_bins;
    let tex = &garment.texture;
    let u_bins = coverage_u_bins(tex.width());
    let rows = tex.height();
    let mut sums = vec![vec![([0u64; 3], [0u64; 8], 0u64); parts.len()]; nbins];
    let mut coverage =
        vec![vec![std::collections::BTreeMap::<u32, u32>::new(); parts.len()]; nbins];
    let mut yaws = vec![Vec::new(); nbins];
    for (frame, pose) in video.frames().iter().zip(track.poses()) {
        let bin = yaw_bin(pose.yaw_deg, nbins);
        yaws[bin].push(pose.yaw_deg);
        let regions = part_regions_for(pose, user, frame.width(), frame.height());
        let mask = frame.mask().expect("checked above");
        for (i, part) in regions.parts().enumerate() {
            let Some(slot) = part.and_then(|p| parts.iter().position(|&q| q == p)) else {
                continue;
            };
            if mask[i] == 0 {
                continue;
            }
            let px = &frame.pixels()[i * 3..i * 3 + 3];
            let rgb = [px[0], px[1], px[2]];
            let acc = &mut sums[bin][slot];
            for (sum, &v) in acc.0.iter_mut().zip(&rgb) {
                *sum += u64::from(v);
            }
            acc.1[hue_bin(rgb)] += 1;
            acc.2 += 1;
            let [across, along] = regions.surface(i);
            let u = texture_u(pose.yaw_deg, across).rem_euclid(1.0);
            let ub = ((u * f64::from(u_bins)) as u32).min(u_bins - 1);
            *coverage[bin][slot]
                .entry(ub * rows + texture_row(along, rows, regions.dither(i)))
                .or_insert(0) += 1;
        }
    }
    let bins = sums
        .into_iter()
        .zip(coverage)
        .zip(yaws)
        .map(|((cells, cov), yaws)| DigestBin {
            yaws,
            cells: cells
                .into_iter()
                .zip(cov)
                .map(|((rgb, hist, n), cov)| {
                    if n == 0 {
                        return DigestCell::empty();
                    }
                    let nf = n as f64;
                    DigestCell {
                        mean_rgb: rgb.map(|s| s as f64 / nf),
                        hue_hist: hist.map(|h| h as f64 / nf),
                        count: n,
                        coverage: cov.into_iter().map(|(k, v)| [k, v]).collect(),
                    }
                })
                .collect(),
        })
        .collect();
    Ok(AnchorDigest {
        version: DIGEST_VERSION,
        yaw_bins: nbins,
        parts,
        texture_size: [tex.width(), rows],
        u_bins,
        bins,
    })
}

pub fn hue_grid(i: usize) -> f64 {
    -PI + 2.0 * PI * i as f64 / HUE_STEPS as f64
}

pub fn brightness_grid(j: usize) -> f64 {
    0.5 + j as f64 / (BRIGHTNESS_STEPS - 1) as f64
}

/// Grid searches over one garment's texture. Colors are handled per distinct
/// texel value, so a prediction costs one pass over the palette.
#[derive(Debug, Clone)]
pub struct AppearanceInverter {
    width: u32,
    rows: u32,
    palette: Vec<[u8; 3]>,
    /// Palette index of each texel, row-major.
    texel_palette: Vec<usize>,
    /// Palette frequencies over the whole texture.
    texture_weights: Vec<f64>,
    /// Transformed palette per grid point, indexed
    /// `(i * BRIGHTNESS_STEPS + j) * palette.len() + p`.
    grid_palette: Vec<[u8; 3]>,
    /// Hue bin of each `grid_palette` entry.
    grid_bins: Vec<u8>,
}

impl AppearanceInverter {
    pub fn new(garment: &GarmentSpec) -> Self {
        let tex: &Texture = &garment.texture;
        let mut palette: Vec<[u8; 3]> = Vec::new();
        let texel_palette: Vec<usize> = tex
            .texels()
            .iter()
            .map(|&t| match palette.iter().position(|&c| c == t) {
                Some(p) => p,
                None => {
                    palette.push(t);
                    palette.len() - 1
                }
            })
            .collect();
        let mut texture_weights = vec![0.0; palette.len()];
        for &p in &texel_palette {
            texture_weights[p] += 1.0;
        }
        let total = texel_palette.len() as f64;
        texture_weights.iter_mut().for_each(|w| *w /= total);
        let mut grid_palette = Vec::with_capacity(HUE_STEPS * BRIGHTNESS_STEPS * palette.len());
        for i in 0..HUE_STEPS {
            for j in 0..BRIGHTNESS_STEPS {
                let (h, b) = (hue_grid(i), brightness_grid(j));
                grid_palette.extend(palette.iter().map(|&c| transform_color(c, h, b)));
            }
        }
        let grid_bins = grid_palette.iter().map(|&c| hue_bin(c) as u8).collect();
        AppearanceInverter {
            grid_bins,
            width: tex.width(),
            rows: tex.height(),
            palette,
            texel_palette,
            texture_weights,
            grid_palette,
        }
    }

    fn grid_colors(&self, idx: usize) -> &[[u8; 3]] {
        let n = self.palette.len();
        &self.grid_palette[idx * n..(idx + 1) * n]
    }

    fn grid_hue_bins(&self, idx: usize) -> &[u8] {
        let n = self.palette.len();
        &self.grid_bins[idx * n..(idx + 1) * n]
    }

    /// Mean transformed texture color at grid point `(i, j)`.
    pub fn grid_mean(&self, i: usize, j: usize) -> [f64; 3] {
        weighted_mean(
            self.grid_colors(i * BRIGHTNESS_STEPS + j),
            &self.texture_weights,
        )
    }

    /// Nearest grid point to `mean` in RGB L2, predicting each grid point from
    /// the whole texture. Ties go to the lower index.
    pub fn nearest(&self, mean: [f64; 3]) -> (f64, f64) {
        self.nearest_weighted(mean, &self.texture_weights)
    }

    /// Nearest grid point with the prediction weighted by palette frequencies
    /// `weights`.
    pub fn nearest_weighted(&self, mean: [f64; 3], weights: &[f64]) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0usize);
        for idx in 0..HUE_STEPS * BRIGHTNESS_STEPS {
            let m = weighted_mean(self.grid_colors(idx), weights);
            let d = (0..3).map(|k| (m[k] - mean[k]).powi(2)).sum::<f64>();
            if d < best.0 {
                best = (d, idx);
            }
        }
        (
            hue_grid(best.1 / BRIGHTNESS_STEPS),
            brightness_grid(best.1 % BRIGHTNESS_STEPS),
        )
    }

    pub fn invert(&self, digest: &AnchorDigest, part: Part, bin: usize) -> Result<(f64, f64)> {
        Ok(self.nearest(digest.populated(part, bin)?.mean_rgb))
    }

    fn check_digest(&self, digest: &AnchorDigest) -> Result<()> {
        if digest.texture_size != [self.width, self.rows] {
            return Err(Error::invalid(format!(
                "digest was extracted for a {}x{} texture, garment has {}x{}",
                digest.texture_size[0], digest.texture_size[1], self.width, self.rows
            )));
        }
        Ok(())
    }

    /// Palette frequencies seen by a cell's pixels at phase `k / 16`.
    pub fn view_weights(&self, digest: &AnchorDigest, cell: &DigestCell, k: usize) -> Vec<f64> {
        let shift = k * digest.u_bins as usize / PHASE_CANDIDATES;
        self.shifted_weights(digest, cell, shift)
    }

    /// Palette frequencies with the texture shifted by `shift` coverage bins.
    fn shifted_weights(&self, digest: &AnchorDigest, cell: &DigestCell, shift: usize) -> Vec<f64> {
        let n = digest.u_bins as usize;
        let rows = self.rows as usize;
        let per_col = n / self.width as usize;
        let mut weights = vec![0.0; self.palette.len()];
        let mut total = 0.0;
        for &[idx, count] in &cell.coverage {
            let (ub, row) = (idx as usize / rows, idx as usize % rows);
            let col = ((ub + shift) % n) / per_col;
            weights[self.texel_palette[row * self.width as usize + col]] += f64::from(count);
            total += f64::from(count);
        }
        if total > 0.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        weights
    }

    /// Hue histogram predicted for palette frequencies `weights` under `(h, b)`.
    pub fn predicted_histogram(&self, weights: &[f64], h: f64, b: f64) -> [f64; 8] {
        let mut hist = [0.0; 8];
        for (&c, &w) in self.palette.iter().zip(weights) {
            hist[hue_bin(transform_color(c, h, b))] += w;
        }
        hist
    }

    /// Best of the phase candidates `k / 16`, by L1 distance between predicted
    /// and measured hue histograms summed over every populated bin of `part`
    /// (weighted by pixel count). Ties go to the smaller `k`.
    pub fn recover_phase(&self, digest: &AnchorDigest, part: Part, hb: (f64, f64)) -> Result<f64> {
        self.check_digest(digest)?;
        let slot = digest.slot(part)?;
        let cells: Vec<&DigestCell> = digest
            .bins
            .iter()
            .map(|bin| &bin.cells[slot])
            .filter(|c| c.count > 0)
            .collect();
        if cells.is_empty() {
            return Err(Error::Coverage {
                part: part.to_string(),
                bin: 0,
            });
        }
        let mut best = (f64::INFINITY, 0usize);
        for k in 0..PHASE_CANDIDATES {
            let d = self.histogram_distance(digest, &cells, k, hb);
            if d < best.0 {
                best = (d, k);
            }
        }
        Ok(best.1 as f64 / PHASE_CANDIDATES as f64)
    }

    /// Count-weighted L1 distance between predicted and measured hue
    /// histograms over `cells`, at phase `k / 16`.
    fn histogram_distance(
        &self,
        digest: &AnchorDigest,
        cells: &[&DigestCell],
        k: usize,
        hb: (f64, f64),
    ) -> f64 {
        let shift = k * digest.u_bins as usize / PHASE_CANDIDATES;
        self.histogram_distance_at(digest, cells, shift, hb)
    }

    fn histogram_distance_at(
        &self,
        digest: &AnchorDigest,
        cells: &[&DigestCell],
        shift: usize,
        hb: (f64, f64),
    ) -> f64 {
        cells
            .iter()
            .map(|cell| {
                let pred = self.predicted_histogram(
                    &self.shifted_weights(digest, cell, shift),
                    hb.0,
                    hb.1,
                );
                let l1: f64 = pred
                    .iter()
                    .zip(&cell.hue_hist)
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                l1 * cell.count as f64
            })
            .sum()
    }

    /// Full recovery of one part's appearance from every populated bin.
    ///
    /// Mean colors fix `(h, b)` for each phase candidate `k / 16`. Balanced
    /// textures make means nearly phase-blind, so the phase is then chosen at
    /// coverage resolution by hue-histogram distance, letting `(h, b)` move up
    /// to two grid steps from the candidate's mean fit so that colors near a
    /// hue-bin edge land on the right side. A last mean fit at that phase
    /// settles `(h, b)`. Ties go to smaller indices throughout.
    pub fn solve(&self, digest: &AnchorDigest, part: Part) -> Result<PartAppearance> {
        self.check_digest(digest)?;
        let slot = digest.slot(part)?;
        let cells: Vec<&DigestCell> = digest
            .bins
            .iter()
            .map(|bin| &bin.cells[slot])
            .filter(|c| c.count > 0)
            .collect();
        if cells.is_empty() {
            return Err(Error::Coverage {
                part: part.to_string(),
                bin: 0,
            });
        }
        let n = digest.u_bins as usize;
        let step = n / PHASE_CANDIDATES;
        let total: f64 = cells.iter().map(|c| c.count as f64).sum();
        let shares: Vec<f64> = cells.iter().map(|c| c.count as f64 / total).collect();
        let views: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|shift| {
                cells
                    .iter()
                    .map(|c| self.shifted_weights(digest, c, shift))
                    .collect()
            })
            .collect();

        let fits: Vec<usize> = (0..PHASE_CANDIDATES)
            .map(|k| self.fit_means(&cells, &shares, &views[k * step]))
            .collect();
        let mut pick = (f64::INFINITY, 0usize);
        for (shift, weights) in views.iter().enumerate() {
            let center = fits[((shift + step / 2) / step) % PHASE_CANDIDATES];
            let (ci, cj) = (center / BRIGHTNESS_STEPS, center % BRIGHTNESS_STEPS);
            for di in -2i64..=2 {
                let i = (ci as i64 + di).rem_euclid(HUE_STEPS as i64) as usize;
                for j in cj.saturating_sub(2)..=(cj + 2).min(BRIGHTNESS_STEPS - 1) {
                    let d = self.grid_histogram_distance(
                        &cells,
                        &shares,
                        weights,
                        i * BRIGHTNESS_STEPS + j,
                    );
                    if d < pick.0 {
                        pick = (d, shift);
                    }
                }
            }
        }
        let shift = pick.1;
        let idx = self.fit_means(&cells, &shares, &views[shift]);
        Ok(PartAppearance {
            hue_shift: hue_grid(idx / BRIGHTNESS_STEPS),
            brightness: brightness_grid(idx % BRIGHTNESS_STEPS),
            phase: shift as f64 / n as f64,
        })
    }

    /// Grid point minimizing the share-weighted squared mean-color error of
    /// `cells` seen through palette frequencies `weights` (one per cell).
    fn fit_means(&self, cells: &[&DigestCell], shares: &[f64], weights: &[Vec<f64>]) -> usize {
        let mut best = (f64::INFINITY, 0usize);
        for idx in 0..HUE_STEPS * BRIGHTNESS_STEPS {
            let colors = self.grid_colors(idx);
            let mut d = 0.0;
            for ((cell, share), w) in cells.iter().zip(shares).zip(weights) {
                let m = weighted_mean(colors, w);
                d += share
                    * (0..3)
                        .map(|k| (m[k] - cell.mean_rgb[k]).powi(2))
                        .sum::<f64>();
                if d >= best.0 {
                    break;
                }
            }
            if d < best.0 {
                best = (d, idx);
            }
        }
        best.1
    }

    fn grid_histogram_distance(
        &self,
        cells: &[&DigestCell],
        shares: &[f64],
        weights: &[Vec<f64>],
        idx: usize,
    ) -> f64 {
        let bins = self.grid_hue_bins(idx);
        let mut total = 0.0;
        for ((cell, share), w) in cells.iter().zip(shares).zip(weights) {
            let mut pred = [0.0; 8];
            for (&bin, &wt) in bins.iter().zip(w) {
                pred[bin as usize] += wt;
            }
            total += share
                * pred
                    .iter()
                    .zip(&cell.hue_hist)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
        }
        total
    }
}

fn weighted_mean(colors: &[[u8; 3]], weights: &[f64]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for (c, &w) in colors.iter().zip(weights) {
        if w > 0.0 {
            for k in 0..3 {
                m[k] += f64::from(c[k]) * w;
            }
        }
    }
    m
}

/// Grid-search inversion of a digest cell's mean color to `(hue_shift, brightness)`.
pub fn invert_appearance(
    digest: &AnchorDigest,
    part: Part,
    yaw_bin: usize,
    garment: &GarmentSpec,
) -> Result<(f64, f64)> {
    AppearanceInverter::new(garment).invert(digest, part, yaw_bin)
}

/// Recovers the texture phase of `part`, given its recovered `(h, b)`.
pub fn recover_phase(
    digest: &AnchorDigest,
    part: Part,
    garment: &GarmentSpec,
    hb: (f64, f64),
) -> Result<f64> {
    AppearanceInverter::new(garment).recover_phase(digest, part, hb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_bins_are_half_open() {
        assert_eq!(yaw_bin(45.0, 12), 1);
        assert_eq!(yaw_bin(0.0, 12), 0);
        assert_eq!(yaw_bin(29.999, 12), 0);
        assert_eq!(yaw_bin(30.0, 12), 1);
        assert_eq!(yaw_bin(359.9, 12), 11);
        assert_eq!(yaw_bin(-10.0, 12), 11);
        assert_eq!(yaw_bin(720.0, 12), 0);
    }

    #[test]
    fn coverage_resolution_holds_columns_and_phase_steps() {
        assert_eq!(coverage_u_bins(36), 144);
        assert_eq!(coverage_u_bins(32), 32);
        assert_eq!(coverage_u_bins(1), 16);
        for w in 1..100 {
            let n = coverage_u_bins(w);
            assert_eq!(n % w, 0);
            assert_eq!(n % PHASE_CANDIDATES as u32, 0);
        }
    }

    #[test]
    fn grid_axes_cover_their_ranges() {
        assert_eq!(hue_grid(0), -PI);
        assert!((hue_grid(HUE_STEPS - 1) - (PI - 2.0 * PI / 64.0)).abs() < 1e-12);
        assert_eq!(brightness_grid(0), 0.5);
        assert_eq!(brightness_grid(BRIGHTNESS_STEPS - 1), 1.5);
    }

    #[test]
    fn exact_grid_mean_returns_its_grid_point() {
        let garment = GarmentSpec::builtin("top").unwrap();
        let inv = AppearanceInverter::new(&garment);
        for (i, j) in [(0, 0), (17, 40), (32, 63), (63, 5)] {
            let (h, b) = inv.nearest(inv.grid_mean(i, j));
            assert_eq!((h, b), (hue_grid(i), brightness_grid(j)));
        }
    }

    #[test]
    fn grid_means_are_distinct_for_builtin_textures() {
        for name in GarmentSpec::BUILTIN_NAMES {
            let inv = AppearanceInverter::new(&GarmentSpec::builtin(name).unwrap());
            let mut keys: Vec<[u64; 3]> = (0..HUE_STEPS)
                .flat_map(|i| (0..BRIGHTNESS_STEPS).map(move |j| (i, j)))
                .map(|(i, j)| inv.grid_mean(i, j).map(f64::to_bits))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            assert_eq!(keys.len(), HUE_STEPS * BRIGHTNESS_STEPS, "{name}");
        }
    }

    #[test]
    fn json_rejects_wrong_shape_and_version() {
        let d = AnchorDigest {
            version: DIGEST_VERSION,
            yaw_bins: 2,
            parts: vec![Part::Torso],
            texture_size: [36, 36],
            u_bins: 144,
            bins: vec![
                DigestBin {
                    yaws: vec![0.0],
                    cells: vec![DigestCell::empty()],
                };
                2
            ],
        };
        assert_eq!(AnchorDigest::from_json(&d.to_json()).unwrap(), d);
        let mut bad = d.clone();
        bad.bins.pop();
        assert!(AnchorDigest::from_json(&bad.to_json()).is_err());
        let mut bad = d.clone();
        bad.version = 9;
        assert!(AnchorDigest::from_json(&bad.to_json()).is_err());
        let mut bad = d.clone();
        bad.u_bins = 100;
        assert!(AnchorDigest::from_json(&bad.to_json()).is_err());
        let mut bad = d;
        bad.bins[0].cells[0].coverage.push([144 * 36, 1]);
        assert!(AnchorDigest::from_json(&bad.to_json()).is_err());
    }

    #[test]
    fn mismatched_texture_is_rejected() {
        let top = GarmentSpec::builtin("top").unwrap();
        let striped = GarmentSpec::builtin("striped").unwrap();
        let d = AnchorDigest {
            version: DIGEST_VERSION,
            yaw_bins: 1,
            parts: top.covered_parts().to_vec(),
            texture_size: [36, 36],
            u_bins: 144,
            bins: vec![DigestBin {
                yaws: vec![0.0],
                cells: vec![DigestCell::empty(); 3],
            }],
        };
        let inv = AppearanceInverter::new(&striped);
        assert!(matches!(
            inv.solve(&d, Part::Torso),
            Err(Error::InvalidArgument(_))
        ));
    }
}
