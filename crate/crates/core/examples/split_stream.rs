//! Split classes into seen and unseen and order the stream.

use itta::dataset::{build_stream, synth_generate, unseen_class_count, ShufflePolicy, SynthConfig};

fn main() -> itta::Result<()> {
    let ds = synth_generate(&SynthConfig::default())?.dataset;
    let n = ds.class_ids().len();
    for ratio in [0.25, 1.0] {
        println!("ratio {ratio}: {} of {n} classes unseen", unseen_class_count(n, ratio));
    }

    for policy in [ShufflePolicy::Uniform, ShufflePolicy::FileOrder, ShufflePolicy::Staged { onset: 0.5 }] {
        let s = build_stream(&ds, 0.25, 1, policy)?;
        let first_unseen = s
            .order
            .iter()
            .position(|&i| s.unseen_class_ids.contains(&ds.samples[i].class_id))
            .map_or(0, |p| p + 1);
        println!(
            "{policy:?}: unseen {:?}, first unseen sample at {first_unseen}",
            s.unseen_class_ids
        );
    }
    Ok(())
}
