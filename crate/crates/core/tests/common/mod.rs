//! Test-only oracles. Each one recomputes a quantity from its definition
//! without going through the library code path it checks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use itta::dataset::{synth_generate, SynthConfig, SynthDataset};
use itta::embedding::{FeatureVector, PatchGrid, Probabilities};
use itta::metrics::DetectionTimeline;
use itta::{ClassId, ClassRegistry, BACKGROUND_ID};

/// Recounts both cumulative sets at every index and sums the rectangles.
pub fn icdd_brute_force(tl: &DetectionTimeline) -> f64 {
    let u = tl.introductions.len();
    if u == 0 {
        return 0.0;
    }
    let t = tl.stream_length;
    let mut gap: u64 = 0;
    for i in 1..=t {
        let gt = tl.introductions.values().filter(|&&x| x <= i).count() as u64;
        let det = tl.detections.values().filter(|&&x| x <= i).count() as u64;
        gap += gt - det;
    }
    gap as f64 / (u as f64 * t as f64)
}

/// Per-patch argmax over `topK ∪ {background}` by explicit enumeration.
pub fn segment_brute_force(
    grid: &PatchGrid,
    probs: &Probabilities,
    registry: &ClassRegistry,
    k: usize,
) -> Vec<ClassId> {
    let p = probs.as_slice();
    let mut ranked: Vec<(usize, f64)> = p.iter().copied().enumerate().collect();
    // descending probability, lower index first on ties
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut chosen: Vec<usize> = ranked.iter().take(k).map(|r| r.0).collect();
    chosen.sort();
    grid.features()
        .iter()
        .map(|f| {
            let cos = |t: &FeatureVector| {
                let num: f64 = f.as_slice().iter().zip(t.as_slice()).map(|(a, b)| a * b).sum();
                num / f.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
            };
            let mut best_label = BACKGROUND_ID;
            let mut best_sim = cos(&registry.background().vector);
            // classes win exact ties against background and against
            // higher registry indices, so scan them from the top down with >=
            for &i in chosen.iter().rev() {
                let s = cos(&registry.entry(i).vector);
                if s >= best_sim {
                    best_sim = s;
                    best_label = registry.entry(i).class_id;
                }
            }
            best_label
        })
        .collect()
}

/// 1-D interpolation matrix (out × in) built from the tent kernel at
/// half-pixel-centre source coordinates clamped to `[0, n_in - 1]`.
fn tent_matrix(n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    (0..n_out)
        .map(|o| {
            let src = ((o as f64 + 0.5) * (n_in as f64 / n_out as f64) - 0.5)
                .clamp(0.0, (n_in - 1) as f64);
            (0..n_in)
                .map(|i| (1.0 - (src - i as f64).abs()).max(0.0))
                .collect()
        })
        .collect()
}

/// Bilinear resize as `Wy · M · Wxᵀ`.
pub fn bilinear_oracle(src: &[f64], h: usize, w: usize, oh: usize, ow: usize) -> Vec<f64> {
    let wy = tent_matrix(h, oh);
    let wx = tent_matrix(w, ow);
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for i in 0..h {
                for j in 0..w {
                    acc += wy[y][i] * src[i * w + j] * wx[x][j];
                }
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

/// Upsampled segmentation recomputed through the tent-matrix oracle.
pub fn segment_upsampled_oracle(
    grid: &PatchGrid,
    probs: &Probabilities,
    registry: &ClassRegistry,
    k: usize,
    oh: usize,
    ow: usize,
) -> Vec<ClassId> {
    let p = probs.as_slice();
    let mut ranked: Vec<(usize, f64)> = p.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut chosen: Vec<usize> = ranked.iter().take(k).map(|r| r.0).collect();
    chosen.sort();
    let mut labels: Vec<ClassId> = chosen.iter().map(|&i| registry.entry(i).class_id).collect();
    labels.push(BACKGROUND_ID);
    let texts: Vec<&FeatureVector> = chosen
        .iter()
        .map(|&i| &registry.entry(i).vector)
        .chain(std::iter::once(&registry.background().vector))
        .collect();
    let maps: Vec<Vec<f64>> = texts
        .iter()
        .map(|t| {
            let sims: Vec<f64> = grid
                .features()
                .iter()
                .map(|f| {
                    let num: f64 = f.as_slice().iter().zip(t.as_slice()).map(|(a, b)| a * b).sum();
                    num / f.norm()
                })
                .collect();
            bilinear_oracle(&sims, grid.height(), grid.width(), oh, ow)
        })
        .collect();
    (0..oh * ow)
        .map(|cell| {
            let mut best = 0;
            for c in 1..maps.len() {
                if maps[c][cell] > maps[best][cell] {
                    best = c;
                }
            }
            labels[best]
        })
        .collect()
}

/// Replays an observe sequence and returns, per class, the sorted
/// entropies the cache should hold: the `cap` smallest gated-in values.
pub fn tda_replay_oracle(
    events: &[(ClassId, f64)],
    cap: usize,
    gate: [f64; 2],
) -> BTreeMap<ClassId, Vec<f64>> {
    let mut all: BTreeMap<ClassId, Vec<f64>> = BTreeMap::new();
    for &(c, h) in events {
        if h >= gate[0] && h <= gate[1] {
            all.entry(c).or_default().push(h);
        }
    }
    for v in all.values_mut() {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.truncate(cap);
    }
    all
}

/// Synthetic configuration for the SegAssist trend runs.
pub fn trend_config(seed: u64) -> SynthConfig {
    SynthConfig {
        d: 64,
        num_seen: 40,
        num_unseen: 10,
        samples_per_class: 50,
        unseen_bg_pull: 0.9,
        seen_bg_pull: 0.2,
        noise_sigma: 0.1,
        seed,
        ..SynthConfig::default()
    }
}

pub fn synth(cfg: &SynthConfig) -> SynthDataset {
    synth_generate(cfg).expect("valid synthetic config")
}

/// Logit scale used for synthetic runs at d = 64.
///
/// Cross-class cosine similarities of random unit vectors spread as
/// `1/sqrt(d)`, about 0.125 at d = 64 versus roughly 0.025 for real
/// 512-d CLIP features. Scaling by 20 instead of 100 gives the same logit
/// spread, so MSP thresholds like 0.2 select a comparable share of samples.
pub const SYNTH_LOGIT_SCALE: f64 = 20.0;
