use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use itta::active::Strategy;
use itta::dataset::{build_stream, synth_generate, Dataset, ShufflePolicy, SynthConfig};
use itta::runner::{compare_runs, emit_report, read_report, run_stream, RunConfig};
use itta::tta::TtaKind;
use itta::Result;

#[derive(Parser)]
#[command(name = "itta", version, about = "Incremental test-time adaptation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stream and write report, event log and curves.
    Run(Box<RunArgs>),
    /// Generate a synthetic dataset (plus its stream sidecar).
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Stream sidecar path; defaults to `<out>.stream.json`.
        #[arg(long)]
        stream_out: Option<PathBuf>,
    },
    /// Split a dataset's classes into seen/unseen and order its samples.
    Split {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        unseen_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep file order instead of shuffling.
        #[arg(long)]
        file_order: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate HM and ICDD across reports.
    Compare {
        reports: Vec<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dataset files, concatenated in order.
    #[arg(long, value_delimiter = ',')]
    dataset: Vec<PathBuf>,
    #[arg(long)]
    stream: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    tta: Option<TtaKind>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    entropy_thresh: Option<f64>,
    #[arg(long)]
    margin_thresh: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long)]
    budget_rate: Option<f64>,
    #[arg(long)]
    budget_window: Option<u64>,
    #[arg(long)]
    logit_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long)]
    curve_stride: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if !self.dataset.is_empty() {
            cfg.datasets = self.dataset;
        }
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag { $field = v; })*
            };
        }
        set! {
            strategy => cfg.strategy,
            tta => cfg.tta,
            tau => cfg.tau_msp,
            entropy_thresh => cfg.tau_entropy,
            margin_thresh => cfg.tau_margin,
            alpha => cfg.alpha,
            topk => cfg.topk,
            budget_rate => cfg.budget_rate,
            budget_window => cfg.budget_window,
            logit_scale => cfg.logit_scale,
            seed => cfg.seed,
            curve_stride => cfg.output.curve_stride,
        }
        if self.stream.is_some() {
            cfg.stream = self.stream;
        }
        if self.out.is_some() {
            cfg.output.report = self.out;
        }
        if self.events.is_some() {
            cfg.output.events = self.events;
        }
        if self.curves.is_some() {
            cfg.output.curves = self.curves;
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = (*args).into_config()?;
            let outcome = run_stream(&cfg)?;
            for path in emit_report(&outcome, &cfg.output)? {
                log::info!("wrote {}", path.display());
            }
            if cfg.output.report.is_none() {
                println!("{}", serde_json::to_string_pretty(&outcome.report)?);
            }
        }
        Command::Synth {
            config,
            out,
            stream_out,
        } => {
            let cfg: SynthConfig = match config {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => SynthConfig::default(),
            };
            let synth = synth_generate(&cfg)?;
            let bytes = synth.dataset.save(&out)?;
            let sidecar = stream_out.unwrap_or_else(|| out.with_extension("stream.json"));
            synth.stream.save(&sidecar)?;
            log::info!("wrote {} ({bytes} bytes) and {}", out.display(), sidecar.display());
        }
        Command::Split {
            dataset,
            unseen_ratio,
            seed,
            file_order,
            out,
        } => {
            let ds = Dataset::load(dataset)?;
            let policy = if file_order {
                ShufflePolicy::FileOrder
            } else {
                ShufflePolicy::Uniform
            };
            build_stream(&ds, unseen_ratio, seed, policy)?.save(out)?;
        }
        Command::Compare { reports, csv } => {
            let reports = reports
                .iter()
                .map(|p| read_report(p))
                .collect::<Result<Vec<_>>>()?;
            let table = compare_runs(&reports)?;
            for w in &table.warnings {
                log::warn!("{w}");
            }
            if csv {
                print!("{}", table.to_csv());
            } else {
                print!("{}", table.to_text());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
