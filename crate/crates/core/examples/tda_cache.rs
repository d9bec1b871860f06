//! Compare zero-shot and cache-adapted predictions over one stream.

use itta::dataset::{synth_generate, SynthConfig};
use itta::tta::{TdaConfig, TdaEngine, TtaEngine, ZeroShot};
use itta::ClassRegistry;

fn main() -> itta::Result<()> {
    let synth = synth_generate(&SynthConfig {
        noise_sigma: 0.15,
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

    let scale = 20.0;
    let zs = ZeroShot::new(scale);
    let mut tda = TdaEngine::new(TdaConfig::default(), scale, &registry)?;
    let (mut zs_ok, mut tda_ok, mut n) = (0, 0, 0);
    for &i in &synth.stream.order {
        let sample = &ds.samples[i];
        if !registry.contains(sample.class_id) {
            continue;
        }
        n += 1;
        zs_ok += (zs.predict(sample, &registry)?.class_id == sample.class_id) as usize;
        let p = tda.predict(sample, &registry)?;
        tda_ok += (p.class_id == sample.class_id) as usize;
        tda.observe(sample, &p)?;
    }
    println!("seen-class samples: {n}");
    println!("zero-shot accuracy: {:.2}%", 100.0 * zs_ok as f64 / n as f64);
    println!("tda accuracy:       {:.2}%", 100.0 * tda_ok as f64 / n as f64);
    println!("cache entries:      {}", tda.cache().total_entries());
    Ok(())
}
