//! `eyestate` command-line front-end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O or runtime
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eyestate::bench::{ExperimentId, ReportFormat};
use eyestate::connectivity::StateFilter;
use eyestate::ingest::InputFormat;
use eyestate::learners::ClassifierKind;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "eyestate", version, about = "EEG eye-state data reduction and classifier benchmarking")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Recording to read (ARFF or CSV).
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, global = true)]
    format: Option<InputFormat>,
    /// CSV input has no header row.
    #[arg(long, global = true)]
    no_header: bool,
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(1..))]
    sample_rate: u32,
    #[arg(long, global = true, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
    /// Input is already outlier-free and centered.
    #[arg(long, global = true)]
    skip_preprocess: bool,
    /// Outlier threshold as a multiple of the channel's mean absolute value.
    #[arg(long, global = true, default_value_t = 10.0, value_parser = parse_factor)]
    outlier_factor: f64,
    /// Epoch window length in timepoints.
    #[arg(long, global = true, default_value_t = 384, value_parser = at_least::<2>)]
    window_len: usize,
    /// Number of epoch windows.
    #[arg(long, global = true, default_value_t = 20, value_parser = at_least::<1>)]
    window_count: usize,
    /// Channels kept by mRMR selection.
    #[arg(long, global = true, default_value_t = 9, value_parser = at_least::<1>)]
    n_select: usize,
    /// Histogram bins for mutual information.
    #[arg(long, global = true, default_value_t = 16, value_parser = parse_bins)]
    bins: usize,
    /// Cross-validation folds.
    #[arg(long, global = true, default_value_t = 5, value_parser = at_least::<2>)]
    folds: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Timing repeats; the median is reported.
    #[arg(long, global = true, default_value_t = 3, value_parser = at_least::<1>)]
    repeats: usize,
    /// Output directory.
    #[arg(long, short, global = true, env = "EYESTATE_OUT", default_value = "eyestate-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-channel statistics, label counts and transition count.
    Summarize,
    /// Outlier removal and centering; writes the cleaned recording.
    Preprocess,
    /// Correlation matrices and thresholded channel graphs.
    Graph {
        /// Thresholds, comma separated, each in (-1, 1).
        #[arg(long, value_delimiter = ',', default_values = ["0.6", "0.7", "0.8"], value_parser = parse_tau)]
        tau: Vec<f64>,
        /// Eye states: 0, 1 or all, comma separated.
        #[arg(long, value_delimiter = ',', default_values = ["0", "1"])]
        state: Vec<StateFilter>,
    },
    /// mRMR channel ranking over the whole recording and per epoch window.
    Select,
    /// Transition-centered epoch windows.
    Epoch {
        /// Window whose plot data is exported.
        #[arg(long, default_value_t = 0)]
        plot_window: usize,
    },
    /// Classifier benchmark for one experiment or the whole grid.
    Bench {
        /// base, A, B, C or all.
        #[arg(long, short, default_value = "base", value_parser = parse_experiments)]
        experiment: Experiments,
        /// Previously written base report to compute gains against.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Subset of knn, logreg, svc, rf.
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<ClassifierKind>>,
        /// Fixed KNN neighbour count instead of the grid search.
        #[arg(long, value_parser = at_least::<1>)]
        knn_k: Option<usize>,
        /// Random forest size.
        #[arg(long, default_value_t = 100, value_parser = at_least::<1>)]
        trees: usize,
    },
    /// Re-emits saved benchmark reports as JSON, CSV or a markdown table.
    Report {
        /// Full reports (`bench_*_full.json`).
        #[arg(long, required = true, num_args = 1..)]
        from: Vec<PathBuf>,
        /// json, csv or md.
        #[arg(long = "to", default_value = "md")]
        to: ReportFormat,
        /// Print instead of writing into the output directory.
        #[arg(long)]
        stdout: bool,
    },
    /// Writes a deterministic synthetic recording.
    Synth {
        /// Destination (.arff or .csv).
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 14980, value_parser = at_least::<2>)]
        length: usize,
        #[arg(long, default_value_t = 7)]
        synth_seed: u64,
        /// Skip the injected spikes.
        #[arg(long)]
        no_spikes: bool,
    },
}

#[derive(Clone, Debug)]
struct Experiments(Vec<ExperimentId>);

fn parse_experiments(s: &str) -> Result<Experiments, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Experiments(ExperimentId::ALL.to_vec()));
    }
    s.parse().map(|id| Experiments(vec![id])).map_err(|e: eyestate::Error| e.to_string())
}

fn at_least<const MIN: usize>(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("{s:?} is not a non-negative integer"))?;
    if v < MIN {
        return Err(format!("must be at least {MIN}"));
    }
    Ok(v)
}

fn parse_factor(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(v > 1.0 && v.is_finite()) {
        return Err("must be a finite number above 1".into());
    }
    Ok(v)
}

fn parse_bins(s: &str) -> Result<usize, String> {
    let v = at_least::<2>(s)?;
    if v > u16::MAX as usize {
        return Err(format!("must be at most {}", u16::MAX));
    }
    Ok(v)
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(v > -1.0 && v < 1.0) {
        return Err("must lie strictly between -1 and 1".into());
    }
    Ok(v)
}

impl Cli {
    fn run_config(&self) -> RunConfig {
        let c = &self.common;
        let (name, args) = match &self.command {
            Command::Summarize => ("summarize", serde_json::json!({})),
            Command::Preprocess => ("preprocess", serde_json::json!({})),
            Command::Graph { tau, state } => (
                "graph",
                serde_json::json!({ "tau": tau, "state": state.iter().map(|s| s.to_string()).collect::<Vec<_>>() }),
            ),
            Command::Select => ("select", serde_json::json!({})),
            Command::Epoch { plot_window } => ("epoch", serde_json::json!({ "plot_window": plot_window })),
            Command::Bench { experiment, base, classifiers, knn_k, trees } => (
                "bench",
                serde_json::json!({
                    "experiment": experiment.0.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "base": base,
                    "classifiers": classifiers,
                    "knn_k": knn_k,
                    "trees": trees,
                }),
            ),
            Command::Report { from, to, .. } => ("report", serde_json::json!({ "from": from, "to": format!("{to:?}") })),
            Command::Synth { output, length, synth_seed, no_spikes } => (
                "synth",
                serde_json::json!({ "output": output, "length": length, "synth_seed": synth_seed, "no_spikes": no_spikes }),
            ),
        };
        RunConfig {
            command: name.into(),
            input: c.input.clone(),
            format: c.format.map(|f| format!("{f:?}").to_lowercase()),
            has_header: !c.no_header,
            sample_rate_hz: c.sample_rate,
            precision: format!("{:?}", c.precision).to_lowercase(),
            skip_preprocess: c.skip_preprocess,
            outlier_factor: c.outlier_factor,
            window_len: c.window_len,
            window_count: c.window_count,
            n_select: c.n_select,
            bins: c.bins,
            folds: c.folds,
            seed: c.seed,
            repeats: c.repeats,
            out_dir: c.out.clone(),
            args,
        }
    }
}

fn dispatch<T: eyestate::Scalar>(cli: &Cli, cfg: &RunConfig) -> anyhow::Result<()> {
    match &cli.command {
        Command::Summarize => commands::summarize::<T>(cfg),
        Command::Preprocess => commands::preprocess::<T>(cfg),
        Command::Graph { tau, state } => commands::graph::<T>(cfg, tau, state),
        Command::Select => commands::select::<T>(cfg),
        Command::Epoch { plot_window } => commands::epoch::<T>(cfg, *plot_window),
        Command::Bench { experiment, base, classifiers, knn_k, trees } => commands::bench::<T>(
            cfg,
            &experiment.0,
            base.as_deref(),
            classifiers.as_deref(),
            *knn_k,
            *trees,
        ),
        Command::Report { from, to, stdout } => commands::report(cfg, from, *to, *stdout),
        Command::Synth { output, length, synth_seed, no_spikes } => {
            commands::synth(cfg, output, *length, *synth_seed, *no_spikes)
        }
    }
}

/// Data errors (bad file contents, invalid pipeline inputs) exit with 3;
/// everything else, including I/O, with 4.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<eyestate::Error>() {
            return if e.is_io() { 4 } else { 3 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    4
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let needs_input = !matches!(cli.command, Command::Report { .. } | Command::Synth { .. });
    if needs_input && cli.common.input.is_none() {
        eprintln!("error: the argument '--input <INPUT>' is required for this command");
        return ExitCode::from(2);
    }
    let cfg = cli.run_config();
    let result = match cli.common.precision {
        Precision::F64 => dispatch::<f64>(&cli, &cfg),
        Precision::F32 => dispatch::<f32>(&cli, &cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
