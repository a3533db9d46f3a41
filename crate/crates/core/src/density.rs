//! Density map construction and the density-map file format.
//!
//! Head annotations become density maps by dropping a geometry-adaptive
//! Gaussian on each head: the kernel width follows the mean distance to the
//! nearest neighbors, so dense clusters get tight kernels and isolated
//! people get wide ones. Kernels are truncated at four sigma and
//! renormalized over the cells they actually cover — including at map
//! borders — so every person contributes exactly unit mass and summation
//! over the map *is* the count.
//!
//! Maps live at 1/4 of the image resolution, the output resolution of the
//! networks; ground truth is rendered directly at that scale. Rendering
//! uses f64 internally and stores f32 cells.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Downsampling factor between image pixels and density-map cells.
pub const DENSITY_SCALE: u32 = 4;

/// Nearest-neighbor count for adaptive kernel widths.
pub const SIGMA_NEIGHBORS: usize = 3;

/// Multiplier on the mean neighbor distance.
pub const SIGMA_BETA: f64 = 0.3;

/// Kernel width (in grid units) when a point has fewer than
/// [`SIGMA_NEIGHBORS`] neighbors.
pub const SIGMA_FALLBACK: f64 = 4.0;

/// Lower clamp on kernel widths; coincident points must not collapse to a
/// delta spike.
pub const SIGMA_MIN: f64 = 0.5;

/// Person category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Sitting,
    Standing,
}

impl Category {
    pub const ALL: [Category; 2] = [Category::Sitting, Category::Standing];

    pub fn name(self) -> &'static str {
        match self {
            Category::Sitting => "sitting",
            Category::Standing => "standing",
        }
    }
}

/// One annotated person: head position in full-resolution pixel
/// coordinates plus the category label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonAnnotation {
    pub head: [f64; 2],
    pub category: Category,
}

/// Nonnegative scalar grid whose sum is a (fractional) person count.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    h: usize,
    w: usize,
    scale: u32,
    cells: Vec<f32>,
}

impl DensityMap {
    pub fn zeros(h: usize, w: usize, scale: u32) -> Self {
        DensityMap { h, w, scale, cells: vec![0.0; h * w] }
    }

    /// Wrap raw cells, enforcing the nonnegativity invariant.
    pub fn from_cells(h: usize, w: usize, scale: u32, cells: Vec<f32>) -> Result<Self> {
        if cells.len() != h * w {
            return Err(Error::InvalidData(format!(
                "density map {}x{} needs {} cells, got {}",
                h,
                w,
                h * w,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidData(format!("density map cell {bad} violates nonnegativity")));
        }
        Ok(DensityMap { h, w, scale, cells })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn cells(&self) -> &[f32] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.cells[row * self.w + col]
    }

    /// Total mass, accumulated in 64-bit.
    pub fn count(&self) -> f64 {
        crate::scalar::sum_f64(&self.cells)
    }

    /// View as a `1 x H x W` network tensor.
    pub fn to_tensor<S: crate::Scalar>(&self) -> crate::Tensor<S> {
        let data: Vec<S> = self.cells.iter().map(|&v| S::of(v as f64)).collect();
        crate::Tensor::leaf(&[1, self.h, self.w], data, false)
            .expect("cell count matches shape by construction")
    }

    /// Rebuild from a `1 x H x W` (or `H x W`) tensor of nonnegative values.
    pub fn from_tensor<S: crate::Scalar>(t: &crate::Tensor<S>, scale: u32) -> Result<Self> {
        let shape = t.shape();
        let (h, w) = match shape.as_slice() {
            [1, h, w] => (*h, *w),
            [h, w] => (*h, *w),
            other => {
                return Err(Error::shape(
                    "density_from_tensor",
                    format!("expected 1 x H x W, got {:?}", other),
                ))
            }
        };
        let cells: Vec<f32> = t.to_vec().iter().map(|v| v.as_f64() as f32).collect();
        DensityMap::from_cells(h, w, scale, cells)
    }
}

/// Adaptive kernel width per point: `beta` times the mean distance to the
/// `k` nearest neighbors, floored at [`SIGMA_MIN`]. Points with fewer than
/// `k` neighbors get `fallback_sigma`. Units follow the input coordinates.
pub fn adaptive_sigmas(points: &[[f64; 2]], k: usize, beta: f64, fallback_sigma: f64) -> Vec<f64> {
    if points.len() <= k {
        return vec![fallback_sigma.max(SIGMA_MIN); points.len()];
    }
    let mut sigmas = Vec::with_capacity(points.len());
    let mut dists = Vec::with_capacity(points.len() - 1);
    for (i, p) in points.iter().enumerate() {
        dists.clear();
        for (j, q) in points.iter().enumerate() {
            if i != j {
                dists.push(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        dists.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
        let mean: f64 = dists[..k].iter().sum::<f64>() / k as f64;
        sigmas.push((beta * mean).max(SIGMA_MIN));
    }
    sigmas
}

/// Render annotations into a density map at `1/scale` resolution.
///
/// Each head drops a Gaussian centered at `(x/scale, y/scale)` with an
/// adaptive sigma measured in output-grid units, truncated at four sigma
/// and renormalized over the in-bounds cells it covers, so each person
/// contributes exactly unit mass regardless of clipping.
pub fn render_density(
    annotations: &[PersonAnnotation],
    image_size: (usize, usize),
    scale: u32,
) -> Result<DensityMap> {
    let (ih, iw) = image_size;
    let s = scale as usize;
    if s == 0 || ih % s != 0 || iw % s != 0 {
        return Err(Error::InvalidData(format!(
            "image size {ih}x{iw} is not divisible by scale {scale}"
        )));
    }
    let (h, w) = (ih / s, iw / s);
    for a in annotations {
        let [x, y] = a.head;
        if !(0.0..iw as f64).contains(&x) || !(0.0..ih as f64).contains(&y) {
            return Err(Error::InvalidData(format!(
                "head ({x}, {y}) outside {ih}x{iw} image"
            )));
        }
    }

    let points: Vec<[f64; 2]> =
        annotations.iter().map(|a| [a.head[0] / s as f64, a.head[1] / s as f64]).collect();
    let sigmas = adaptive_sigmas(&points, SIGMA_NEIGHBORS, SIGMA_BETA, SIGMA_FALLBACK);

    let mut grid = vec![0.0f64; h * w];
    let mut weights: Vec<(usize, f64)> = Vec::new();
    for (p, sigma) in points.iter().zip(&sigmas) {
        let sigma = sigma.min(h as f64);
        let radius = 4.0 * sigma;
        let (cx, cy) = (p[0], p[1]);
        // Cells whose center falls within the truncation radius.
        let col0 = ((cx - radius - 0.5).ceil().max(0.0)) as usize;
        let col1 = ((cx + radius - 0.5).floor().min((w - 1) as f64)) as usize;
        let row0 = ((cy - radius - 0.5).ceil().max(0.0)) as usize;
        let row1 = ((cy + radius - 0.5).floor().min((h - 1) as f64)) as usize;
        let inv2s2 = 1.0 / (2.0 * sigma * sigma);
        let r2 = radius * radius;

        weights.clear();
        let mut total = 0.0;
        for row in row0..=row1 {
            let dy = (row as f64 + 0.5) - cy;
            for col in col0..=col1 {
                let dx = (col as f64 + 0.5) - cx;
                let d2 = dx * dx + dy * dy;
                if d2 <= r2 {
                    let g = (-d2 * inv2s2).exp();
                    weights.push((row * w + col, g));
                    total += g;
                }
            }
        }
        // The cell containing the center is always within the radius
        // (center-to-cell-center distance <= sqrt(2)/2 < 4 * SIGMA_MIN).
        debug_assert!(total > 0.0);
        for &(idx, g) in &weights {
            grid[idx] += g / total;
        }
    }

    let cells: Vec<f32> = grid.iter().map(|&v| v as f32).collect();
    DensityMap::from_cells(h, w, scale, cells)
}

// ── file format ─────────────────────────────────────────────────────────

const MAGIC: &[u8; 4] = b"CCDM";
const VERSION: u32 = 1;

pub fn write_map(path: &Path, map: &DensityMap) -> Result<()> {
    let mut buf = Vec::with_capacity(20 + map.cells.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(map.h as u32).to_le_bytes());
    buf.extend_from_slice(&(map.w as u32).to_le_bytes());
    buf.extend_from_slice(&map.scale.to_le_bytes());
    for v in &map.cells {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_map(path: &Path) -> Result<DensityMap> {
    let display = path.display().to_string();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|_| Error::MissingArtifact(display.clone()))?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 20 {
        return Err(Error::format(&display, "file truncated"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::format(&display, "bad magic, not a density map"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::format(&display, format!("unsupported version {version}")));
    }
    let (h, w, scale) = (u32_at(8) as usize, u32_at(12) as usize, u32_at(16));
    let expected = 20 + h * w * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            &display,
            format!("expected {} bytes for {}x{} cells, file has {}", expected, h, w, bytes.len()),
        ));
    }
    let cells: Vec<f32> = bytes[20..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DensityMap::from_cells(h, w, scale, cells).map_err(|e| Error::format(&display, e.to_string()))
}

/// Export as binary 8-bit PGM normalized so the hottest cell maps to 255.
/// An all-zero map exports as all zeros.
pub fn write_pgm(path: &Path, map: &DensityMap) -> Result<()> {
    let max = map.cells.iter().cloned().fold(0.0f32, f32::max);
    let mut buf = format!("P5\n{} {}\n255\n", map.w, map.h).into_bytes();
    buf.extend(map.cells.iter().map(|&v| {
        if max > 0.0 {
            (v / max * 255.0).round() as u8
        } else {
            0
        }
    }));
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}
