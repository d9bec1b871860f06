//! Segment uncertain samples and show background ratios by class group.

use itta::active::{background_ratio, segassist_select, segment_sample};
use itta::dataset::{synth_generate, SynthConfig};
use itta::{classify, ClassRegistry};

fn main() -> itta::Result<()> {
    let synth = synth_generate(&SynthConfig {
        unseen_bg_pull: 0.9,
        seen_bg_pull: 0.2,
        ..SynthConfig::default()
    })?;
    let ds = &synth.dataset;
    let seen = synth
        .stream
        .seen_class_ids
        .iter()
        .map(|&c| ds.class(c).cloned().expect("seen class"))
        .collect();
    let registry = ClassRegistry::new(seen, ds.background.clone())?;

    // [seen, unseen] x [uncertain, kept, ratio sum]
    let mut acc = [[0.0f64; 3]; 2];
    for sample in &ds.samples {
        let (probs, _) = classify(&sample.global, &registry, 20.0)?;
        if probs.max() >= 0.2 {
            continue;
        }
        let ratio = background_ratio(&segment_sample(sample, &probs, &registry, 5, None)?);
        let row = &mut acc[!registry.contains(sample.class_id) as usize];
        row[0] += 1.0;
        row[1] += segassist_select(ratio, 0.95) as u8 as f64;
        row[2] += ratio;
    }
    for (name, row) in ["seen", "unseen"].iter().zip(acc) {
        println!(
            "{name:>6}: {} uncertain, {} pass alpha=0.95, mean background ratio {:.3}",
            row[0],
            row[1],
            row[2] / row[0].max(1.0)
        );
    }
    Ok(())
}
