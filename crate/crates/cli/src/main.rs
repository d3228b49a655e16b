mod cmd;
mod config;
mod error;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vibforge::spectro::Colormap;

use crate::cmd::data::{IngestArgs, SpectrumArgs};
use crate::cmd::model::PredictArgs;
use crate::config::{read_file_config, ExperimentConfig, FileConfig, Overrides};
use crate::error::{CliError, CliResult};
use crate::record::Run;

#[derive(Debug, Parser)]
#[command(
    name = "vibforge",
    version,
    about = "Bearing-vibration spectrogram benchmark pipeline"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Experiment settings shared by every subcommand. Each overrides the config file.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML experiment config.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for all outputs and run records [default: .]
    #[arg(long, short = 'o', global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Catalog manifest [default: <output-dir>/catalog.csv]
    #[arg(long, global = true, value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Root for relative signal paths [default: $VIBFORGE_DATA_DIR, else the catalog's directory]
    #[arg(long, global = true, value_name = "DIR")]
    data_root: Option<PathBuf>,
    /// Root seed for every random stream [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch stages [default: available cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Segment length in seconds [default: 0.25]
    #[arg(long, global = true, conflicts_with = "segment_samples")]
    segment_seconds: Option<f64>,
    /// Segment length as a fixed sample count.
    #[arg(long, global = true)]
    segment_samples: Option<usize>,
    /// Fold division: by-load or by-severity [default: by-load]
    #[arg(long, global = true)]
    rule: Option<String>,
    /// Fraction of non-test segments moved to validation [default: 0.2]
    #[arg(long, global = true)]
    val_fraction: Option<f64>,
    /// Keep the top-k ANOVA F features.
    #[arg(long, global = true)]
    select_k: Option<usize>,
    #[arg(long, global = true, value_enum)]
    colormap: Option<ColormapArg>,
    /// Render high energy bright instead of dark.
    #[arg(long, global = true)]
    no_invert: bool,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    max_epochs: Option<usize>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    /// L2 penalty coefficient.
    #[arg(long, global = true)]
    l2: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ColormapArg {
    Grayscale,
    Viridis,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a catalog from a dataset file tree.
    Ingest {
        /// Adapter id: cwru, uored_vafcls, hust, paderborn or synthetic.
        #[arg(long)]
        adapter: String,
        /// Dataset root [default: --data-root]
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long)]
        sampling_rate: Option<f64>,
        /// Glob selecting the signal variable inside MAT files.
        #[arg(long)]
        channel_pattern: Option<String>,
    },
    /// Write the per-segment table (segments.csv) from the actual signals.
    Segment {
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Render every segment to a PNG and write images.csv.
    Spectrogram {
        #[command(flatten)]
        filter: FilterArgs,
        /// Fill the manifest's fold column from folds.csv.
        #[arg(long)]
        with_folds: bool,
    },
    /// Assign segments to folds (folds.csv).
    Folds {
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Write train/val/test manifests per round (splits/round-<r>.csv).
    Splits {
        #[arg(long)]
        round: Option<usize>,
    },
    /// Pooled spectrogram features for every segment (features.csv).
    Features {
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// ANOVA F feature selection on each round's training rows.
    Select {
        #[arg(long)]
        round: Option<usize>,
    },
    /// Train the softmax baseline per round and predict the test fold.
    TrainBaseline {
        #[arg(long)]
        round: Option<usize>,
    },
    /// Apply a saved model to a feature table.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Feature table [default: <output-dir>/features.csv, else computed]
        #[arg(long)]
        features: Option<PathBuf>,
        /// Restrict to the test rows of this split manifest.
        #[arg(long)]
        split: Option<PathBuf>,
        /// Output path relative to the output directory.
        #[arg(long, default_value = "predictions.csv")]
        out: String,
    },
    /// Score per-round prediction CSVs against the fold plan.
    Evaluate {
        /// Method name recorded in the metrics.
        #[arg(long, default_value = "softmax")]
        method: String,
        /// Directory of round-<r>.csv prediction files [default: <output-dir>/predictions]
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Combine metrics files into a Markdown results table (report.md).
    Report {
        /// Metrics JSON files [default: every file in <output-dir>/metrics]
        #[arg(long = "metrics")]
        metrics: Vec<PathBuf>,
    },
    /// Generate a synthetic benchmark fixture (catalog.csv + signals/).
    Synth {
        #[arg(long, default_value = "mini")]
        preset: String,
    },
    /// Frame-averaged magnitude spectra per recording (spectrum.csv).
    Spectrum {
        /// Recording ids [default: every recording passing the filters]
        #[arg(long = "recording")]
        recordings: Vec<String>,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 1600)]
        frame: usize,
        /// [default: frame / 2]
        #[arg(long)]
        hop: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Catalog filter clause key=value, e.g. dataset=cwru or load=0; repeatable.
    #[arg(long = "filter", value_name = "KEY=VALUE")]
    filters: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Segment { .. } => "segment",
            Command::Spectrogram { .. } => "spectrogram",
            Command::Folds { .. } => "folds",
            Command::Splits { .. } => "splits",
            Command::Features { .. } => "features",
            Command::Select { .. } => "select",
            Command::TrainBaseline { .. } => "train-baseline",
            Command::Predict { .. } => "predict",
            Command::Evaluate { .. } => "evaluate",
            Command::Report { .. } => "report",
            Command::Synth { .. } => "synth",
            Command::Spectrum { .. } => "spectrum",
        }
    }
}

fn resolve_config(g: GlobalArgs) -> CliResult<ExperimentConfig> {
    let file = match &g.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        catalog: g.catalog,
        data_root: g.data_root,
        output_dir: g.output_dir,
        seed: g.seed,
        jobs: g.jobs,
        segment_seconds: g.segment_seconds,
        segment_samples: g.segment_samples,
        select_k: g.select_k,
        colormap: g.colormap.map(|c| match c {
            ColormapArg::Grayscale => Colormap::Grayscale,
            ColormapArg::Viridis => Colormap::Viridis,
        }),
        invert: g.no_invert.then_some(false),
        rule: g.rule,
        val_fraction: g.val_fraction,
        learning_rate: g.learning_rate,
        max_epochs: g.max_epochs,
        batch_size: g.batch_size,
        l2_lambda: g.l2,
    };
    ExperimentConfig::resolve(file, flags)
}

fn execute(cli: Cli) -> CliResult<()> {
    let name = cli.command.name();
    let config = resolve_config(cli.global)?;
    let mut run = Run::new(&config, name);
    match cli.command {
        Command::Ingest {
            adapter,
            root,
            sampling_rate,
            channel_pattern,
        } => cmd::data::ingest_cmd(
            &mut run,
            IngestArgs {
                adapter,
                root,
                sampling_rate,
                channel_pattern,
            },
        )?,
        Command::Segment { filter } => cmd::data::segment_cmd(&mut run, &filter.filters)?,
        Command::Spectrogram { filter, with_folds } => {
            cmd::images::spectrogram_cmd(&mut run, &filter.filters, with_folds)?
        }
        Command::Folds { filter } => cmd::split::folds_cmd(&mut run, &filter.filters)?,
        Command::Splits { round } => cmd::split::splits_cmd(&mut run, round)?,
        Command::Features { filter } => cmd::model::features_cmd(&mut run, &filter.filters)?,
        Command::Select { round } => cmd::model::select_cmd(&mut run, round)?,
        Command::TrainBaseline { round } => cmd::model::train_cmd(&mut run, round)?,
        Command::Predict {
            model,
            features,
            split,
            out,
        } => cmd::model::predict_cmd(
            &mut run,
            PredictArgs {
                model,
                features,
                split,
                out,
            },
        )?,
        Command::Evaluate {
            method,
            predictions,
        } => cmd::evaluate::evaluate_cmd(&mut run, &method, predictions)?,
        Command::Report { metrics } => cmd::evaluate::report_cmd(&mut run, metrics)?,
        Command::Synth { preset } => cmd::data::synth_cmd(&mut run, &preset)?,
        Command::Spectrum {
            recordings,
            filter,
            frame,
            hop,
        } => cmd::data::spectrum_cmd(
            &mut run,
            SpectrumArgs {
                recordings,
                filters: filter.filters,
                frame,
                hop,
            },
        )?,
    }
    run.finish()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first).line());
            eprint!("{}", e.render());
            return ExitCode::from(1);
        }
    };
    std::panic::set_hook(Box::new(|_| {}));
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            eprintln!("{}", CliError::internal("INTERNAL", msg).line());
            ExitCode::from(3)
        }
    }
}
