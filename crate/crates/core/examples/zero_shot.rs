//! Classify a few synthetic samples against the initial registry.

use itta::dataset::{synth_generate, SynthConfig};
use itta::tta::zs_predict;
use itta::{topk_classes, ClassRegistry};

fn main() -> itta::Result<()> {
    let synth = synth_generate(&SynthConfig::default())?;
    let ds = &synth.dataset;
    let seen = synth
        .stream
        .seen_class_ids
        .iter()
        .map(|&c| ds.class(c).cloned().expect("seen class"))
        .collect();
    let registry = ClassRegistry::new(seen, ds.background.clone())?;

    for sample in ds.samples.iter().step_by(400) {
        let p = zs_predict(sample, &registry, 20.0)?;
        println!(
            "true {:>2}  predicted {:>2}  msp {:.3}  top3 {:?}",
            sample.class_id,
            p.class_id,
            p.probabilities.max(),
            topk_classes(&p.probabilities, &registry, 3)
        );
    }
    Ok(())
}
