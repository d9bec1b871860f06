//! Run every strategy under both engines and tabulate the results.

use itta::active::Strategy;
use itta::dataset::{synth_generate, SynthConfig};
use itta::runner::{compare_runs, run_batch, RunConfig};
use itta::tta::TtaKind;

fn main() -> itta::Result<()> {
    let synth = synth_generate(&SynthConfig::default())?;
    let mut configs = Vec::new();
    for tta in [TtaKind::Zseval, TtaKind::Tda] {
        for strategy in [Strategy::Random, Strategy::Msp, Strategy::Entropy, Strategy::Margin, Strategy::Segassist] {
            configs.push(RunConfig {
                tta,
                strategy,
                logit_scale: 20.0,
                ..RunConfig::default()
            });
        }
    }
    let reports = run_batch(&synth.dataset, &synth.stream, &configs)
        .into_iter()
        .map(|r| r.map(|o| o.report))
        .collect::<itta::Result<Vec<_>>>()?;
    print!("{}", compare_runs(&reports)?.to_text());
    Ok(())
}
