//! Dense prediction over patch embeddings and the background-ratio filter.
//!
//! Each patch is labeled with the best match among the top-K predicted
//! classes and the background prompt. A sample is kept for querying only
//! when the share of background cells is strictly above `alpha`.

use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingSample;
use crate::embedding::{self, PatchGrid, Probabilities};
use crate::error::{IttaError, Result};
use crate::registry::{topk_indices, ClassId, ClassRegistry, BACKGROUND_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmapMode {
    /// Argmax directly on the patch grid.
    #[default]
    PatchLevel,
    /// Bilinearly upsample per-class similarity maps, then argmax per pixel.
    Upsampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    pub height: usize,
    pub width: usize,
    /// Row-major labels; [`BACKGROUND_ID`] marks background.
    pub labels: Vec<ClassId>,
    pub source: SegmapMode,
}

impl SegmentationMap {
    pub fn get(&self, row: usize, col: usize) -> ClassId {
        self.labels[row * self.width + col]
    }
}

/// Segments `patches` over `topK(probs) ∪ {background}`.
///
/// Candidates are scanned in registry order with background last, and only
/// a strictly larger similarity displaces the current best. So on an exact
/// tie a class beats background and a lower registry index beats a higher
/// one.
pub fn segment_patches(
    patches: &PatchGrid,
    probs: &Probabilities,
    registry: &ClassRegistry,
    k: usize,
    upsample_to: Option<(usize, usize)>,
) -> Result<SegmentationMap> {
    if k == 0 {
        return Err(IttaError::config("topk must be at least 1"));
    }
    if probs.len() != registry.len() {
        return Err(IttaError::Dimension {
            expected: registry.len(),
            found: probs.len(),
        });
    }
    if patches.dim() != registry.dim() {
        return Err(IttaError::Dimension {
            expected: registry.dim(),
            found: patches.dim(),
        });
    }
    let mut candidates = topk_indices(probs.as_slice(), k);
    candidates.sort_unstable();
    let mut labels: Vec<ClassId> = candidates.iter().map(|&i| registry.entry(i).class_id).collect();
    labels.push(BACKGROUND_ID);
    let texts: Vec<&[f64]> = candidates
        .iter()
        .map(|&i| registry.entry(i).vector.as_slice())
        .chain(std::iter::once(registry.background().vector.as_slice()))
        .collect();

    let (h, w) = (patches.height(), patches.width());
    // sims[c][cell]
    let mut sims = vec![Vec::with_capacity(h * w); texts.len()];
    for f in patches.features() {
        let norm = f.norm();
        if norm == 0.0 {
            return Err(IttaError::DegenerateInput("zero patch feature".into()));
        }
        for (row, t) in sims.iter_mut().zip(&texts) {
            row.push(embedding::dot(f.as_slice(), t) / norm);
        }
    }

    let (out_h, out_w, source) = match upsample_to {
        None => (h, w, SegmapMode::PatchLevel),
        Some((oh, ow)) => {
            if oh == 0 || ow == 0 {
                return Err(IttaError::config("upsample size must be positive"));
            }
            for map in sims.iter_mut() {
                *map = bilinear_resize(map, h, w, oh, ow);
            }
            (oh, ow, SegmapMode::Upsampled)
        }
    };

    let cells = out_h * out_w;
    let out = (0..cells)
        .map(|cell| {
            let mut best = 0;
            for c in 1..sims.len() {
                if sims[c][cell] > sims[best][cell] {
                    best = c;
                }
            }
            labels[best]
        })
        .collect();
    Ok(SegmentationMap {
        height: out_h,
        width: out_w,
        labels: out,
        source,
    })
}

/// [`segment_patches`] on a sample, which must carry a patch grid.
pub fn segment_sample(
    sample: &EmbeddingSample,
    probs: &Probabilities,
    registry: &ClassRegistry,
    k: usize,
    upsample_to: Option<(usize, usize)>,
) -> Result<SegmentationMap> {
    let grid = sample.patches.as_ref().ok_or(IttaError::MissingPatches)?;
    segment_patches(grid, probs, registry, k, upsample_to)
}

/// Half-pixel-centre bilinear resize (no corner alignment), with source
/// coordinates clamped at the borders.
pub fn bilinear_resize(src: &[f64], h: usize, w: usize, out_h: usize, out_w: usize) -> Vec<f64> {
    debug_assert_eq!(src.len(), h * w);
    let axis = |out: usize, n_in: usize, n_out: usize| {
        let s = ((out as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).max(0.0);
        let i0 = (s.floor() as usize).min(n_in - 1);
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, s - i0 as f64)
    };
    let mut out = Vec::with_capacity(out_h * out_w);
    for oy in 0..out_h {
        let (y0, y1, ly) = axis(oy, h, out_h);
        for ox in 0..out_w {
            let (x0, x1, lx) = axis(ox, w, out_w);
            let top = (1.0 - lx) * src[y0 * w + x0] + lx * src[y0 * w + x1];
            let bottom = (1.0 - lx) * src[y1 * w + x0] + lx * src[y1 * w + x1];
            out.push((1.0 - ly) * top + ly * bottom);
        }
    }
    out
}

/// Share of cells labeled background.
pub fn background_ratio(map: &SegmentationMap) -> f64 {
    if map.labels.is_empty() {
        return 0.0;
    }
    let bg = map.labels.iter().filter(|&&l| l == BACKGROUND_ID).count();
    bg as f64 / map.labels.len() as f64
}

/// Keeps the sample when its background ratio is strictly above `alpha`.
pub fn segassist_select(ratio: f64, alpha: f64) -> bool {
    ratio > alpha
}
