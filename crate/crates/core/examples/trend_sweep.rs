//! MSP against SegAssist over several seeds and logit scales.
//!
//! Usage: `cargo run --release --example trend_sweep -- [seeds]`

use itta::active::Strategy;
use itta::dataset::{synth_generate, SynthConfig};
use itta::runner::{run_batch, RunConfig};

fn main() -> itta::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    println!("scale  strategy   unseen-frac      hm    icdd");
    for scale in [100.0, 20.0, 15.0] {
        let mut sums = [[0.0f64; 3]; 2];
        for seed in 0..seeds {
            let synth = synth_generate(&SynthConfig {
                unseen_bg_pull: 0.9,
                seen_bg_pull: 0.2,
                seed,
                ..SynthConfig::default()
            })?;
            let configs: Vec<RunConfig> = [Strategy::Msp, Strategy::Segassist]
                .into_iter()
                .map(|strategy| RunConfig {
                    strategy,
                    logit_scale: scale,
                    seed,
                    ..RunConfig::default()
                })
                .collect();
            for (sum, out) in sums.iter_mut().zip(run_batch(&synth.dataset, &synth.stream, &configs)) {
                let r = out?.report;
                sum[0] += r.unseen_query_fraction().unwrap_or(0.0);
                sum[1] += r.hm.unwrap_or(0.0);
                sum[2] += r.icdd;
            }
        }
        for (name, s) in ["msp", "segassist"].iter().zip(sums) {
            let n = seeds as f64;
            println!("{scale:>5}  {name:<9} {:>12.3} {:>7.2} {:>7.4}", s[0] / n, s[1] / n, s[2] / n);
        }
    }
    Ok(())
}
