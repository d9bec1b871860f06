//! Write a synthetic dataset to disk and read it back.

use itta::dataset::{synth_generate, Dataset, SynthConfig};

fn main() -> itta::Result<()> {
    let dir = std::env::temp_dir().join("itta-dataset-io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("synth.ittb");

    let synth = synth_generate(&SynthConfig {
        samples_per_class: 10,
        ..SynthConfig::default()
    })?;
    let bytes = synth.dataset.save(&path)?;
    synth.stream.save(dir.join("synth.stream.json"))?;

    let back = Dataset::load(&path)?;
    let h = &back.header;
    println!(
        "{} bytes: d={} classes={} samples={} patches={}x{}",
        bytes, h.dim, h.num_classes, h.num_samples, h.patch_h, h.patch_w
    );
    println!("identical after round trip: {}", back == synth.dataset);
    Ok(())
}
