use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eyestate::bench::{
    self, emit_report, parse_report, run_experiment, ExperimentConfig, ExperimentId, ExperimentReport,
    ReportFormat,
};
use eyestate::connectivity::{
    adjacency, average_degree, cluster_order, correlation_matrix, export_graph, linkage, GraphFormat, StateFilter,
};
use eyestate::epochs::{slice_windows, window_plot_csv};
use eyestate::ingest::{parse_arff, parse_csv, summarize as summary_stats, write_arff, write_csv, InputFormat, Recording};
use eyestate::learners::ClassifierKind;
use eyestate::preprocess::{prepare, OutlierReport};
use eyestate::selection::{mrmr_over_segments, mrmr_rank, HistogramConfig};
use eyestate::synth::{synthetic_recording, SynthConfig};
use eyestate::Scalar;
use serde::Serialize;

use crate::config::RunConfig;

fn announce(path: PathBuf) {
    println!("wrote {}", path.display());
}

fn load<T: Scalar>(cfg: &RunConfig) -> Result<Recording<T>> {
    let path = cfg.input()?;
    let file = File::open(path).with_context(|| format!("cannot open input {}", path.display()))?;
    let format = match &cfg.format {
        Some(f) => f.parse()?,
        None => InputFormat::from_path(path),
    };
    let reader = BufReader::new(file);
    let rec = match format {
        InputFormat::Arff => parse_arff(reader, cfg.sample_rate_hz),
        InputFormat::Csv => parse_csv(reader, cfg.has_header, cfg.sample_rate_hz),
    };
    rec.with_context(|| format!("cannot read recording {}", path.display()))
}

/// Loaded recording, cleaned unless the input is declared clean already.
fn load_prepared<T: Scalar>(cfg: &RunConfig) -> Result<(Recording<T>, Option<OutlierReport>)> {
    let rec = load::<T>(cfg)?;
    if cfg.skip_preprocess {
        return Ok((rec, None));
    }
    let (rec, report) = prepare(&rec, cfg.outlier_factor)?;
    Ok((rec, Some(report)))
}

pub fn summarize<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let rec = load::<T>(cfg)?;
    let stats = summary_stats(&rec);
    println!(
        "{} timepoints x {} channels, labels 0/1: {}/{}, {} transitions",
        stats.length,
        rec.n_channels(),
        stats.label_counts[0],
        stats.label_counts[1],
        stats.transitions
    );
    announce(cfg.write_json("summary.json", &stats)?);
    announce(cfg.write_hash_commented("label_counts.csv", &stats.label_counts_csv())?);
    Ok(())
}

pub fn preprocess<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let rec = load::<T>(cfg)?;
    let (clean, report) = prepare(&rec, cfg.outlier_factor)?;
    println!("removed {} of {} timepoints, {} remain", report.removed(), rec.len(), clean.len());
    let mut buf = Vec::new();
    write_csv(&clean, &mut buf)?;
    announce(cfg.write_hash_commented("preprocessed.csv", &String::from_utf8(buf)?)?);
    announce(cfg.write_json("outliers.json", &report)?);
    Ok(())
}

#[derive(Serialize)]
struct GraphEntry {
    state: String,
    tau: f64,
    edges: usize,
    average_degree: f64,
    degrees: Vec<(String, usize)>,
}

#[derive(Serialize)]
struct StateClustering {
    state: String,
    rows: usize,
    /// Channel order after average-linkage clustering.
    leaf_order: Vec<String>,
    merges: Vec<eyestate::connectivity::Merge>,
}

#[derive(Serialize)]
struct GraphSummary {
    clustering: Vec<StateClustering>,
    graphs: Vec<GraphEntry>,
}

pub fn graph<T: Scalar>(cfg: &RunConfig, taus: &[f64], states: &[StateFilter]) -> Result<()> {
    let (rec, _) = load_prepared::<T>(cfg)?;
    let mut summary = GraphSummary { clustering: Vec::new(), graphs: Vec::new() };
    for &state in states {
        let corr = correlation_matrix(&rec, state)?;
        let order = cluster_order(&corr);
        announce(cfg.write_hash_commented(&format!("corr_state{state}.csv"), &corr.permuted(&order).to_csv())?);
        summary.clustering.push(StateClustering {
            state: state.to_string(),
            rows: rec.labels().iter().filter(|&&l| state.matches(l)).count(),
            leaf_order: order.iter().map(|&i| corr.labels[i].clone()).collect(),
            merges: linkage(&corr),
        });
        for &tau in taus {
            let g = adjacency(&corr, T::lit(tau), state)?;
            let stem = format!("graph_state{state}_tau{tau}");
            announce(cfg.write_dot(&format!("{stem}.dot"), &export_graph(&g, GraphFormat::Dot))?);
            announce(cfg.write_hash_commented(&format!("{stem}.edges"), &export_graph(&g, GraphFormat::EdgeList))?);
            println!("state {state}, tau {tau}: {} edges, average degree {:.3}", g.edge_count(), average_degree(&g));
            summary.graphs.push(GraphEntry {
                state: state.to_string(),
                tau,
                edges: g.edge_count(),
                average_degree: average_degree(&g),
                degrees: (0..g.size()).map(|i| (g.labels[i].clone(), g.degree(i))).collect(),
            });
        }
    }
    announce(cfg.write_json("graph_summary.json", &summary)?);
    Ok(())
}

#[derive(Serialize)]
struct SelectionOutput {
    /// Greedy order over the whole recording.
    recording_order: Vec<String>,
    recording_scores: Vec<f64>,
    /// Full ranking inside each epoch window.
    window_orders: Vec<Vec<String>>,
    /// Averaged window ranking, best first.
    averaged_order: Vec<String>,
    /// Channels used by experiments A and B.
    selected: Vec<String>,
}

pub fn select<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let (rec, _) = load_prepared::<T>(cfg)?;
    let hist = HistogramConfig::new(cfg.bins)?;
    let whole = mrmr_rank(&rec, &hist, cfg.n_select)?;
    announce(cfg.write_hash_commented("mrmr_steps.csv", &whole.to_csv())?);

    let epochs = slice_windows(&rec, cfg.window_len, cfg.window_count, cfg.seed)?;
    let segments = (0..epochs.windows.len()).map(|w| epochs.window_recording(w)).collect::<eyestate::Result<Vec<_>>>()?;
    let (rankings, aggregate) = mrmr_over_segments(&segments, &hist)?;
    announce(cfg.write_hash_commented("mrmr_windows.csv", &aggregate.to_csv())?);

    let averaged_order: Vec<String> = aggregate.ranked().into_iter().map(|i| aggregate.channels[i].name.clone()).collect();
    let selected = averaged_order[..cfg.n_select.min(averaged_order.len())].to_vec();
    println!("selected: {}", selected.join(" "));
    let out = SelectionOutput {
        recording_order: whole.selected_names(),
        recording_scores: whole.scores.iter().map(|s| s.as_f64()).collect(),
        window_orders: rankings.iter().map(|r| r.selected_names()).collect(),
        averaged_order,
        selected,
    };
    announce(cfg.write_json("selection.json", &out)?);
    Ok(())
}

pub fn epoch<T: Scalar>(cfg: &RunConfig, plot_window: usize) -> Result<()> {
    let (rec, _) = load_prepared::<T>(cfg)?;
    let set = slice_windows(&rec, cfg.window_len, cfg.window_count, cfg.seed)?;
    let manifest = set.manifest();
    println!("{} windows of {} timepoints, {} rows", manifest.window_count, manifest.window_len, manifest.rows);
    announce(cfg.write_hash_commented("epochs.csv", &set.to_csv())?);
    announce(cfg.write_json("epoch_manifest.json", &manifest)?);
    let Some(w) = set.windows.get(plot_window) else {
        bail!(eyestate::Error::InvalidParameter {
            name: "plot-window",
            message: format!("only {} windows exist", set.windows.len()),
        });
    };
    announce(cfg.write_hash_commented("window_plot.csv", &window_plot_csv(&rec, w.start, w.end)?)?);
    Ok(())
}

fn write_bench_outputs(cfg: &RunConfig, report: &ExperimentReport) -> Result<()> {
    let id = report.experiment;
    announce(cfg.write_json(&format!("bench_{id}.json"), &report.deterministic_value())?);
    announce(cfg.write_hash_commented(&format!("bench_{id}_folds.csv"), &bench::report_csv(report))?);
    announce(cfg.write_json(&format!("bench_{id}_timing.json"), &report.timing_value())?);
    announce(cfg.write_json(&format!("bench_{id}_full.json"), report)?);
    announce(cfg.write_markdown(&format!("bench_{id}_table.md"), &bench::report_markdown(report))?);
    for r in &report.records {
        println!(
            "experiment {id} {:>6}: F1 {:.4}, {:.3} s, gain {}, speed-up {}",
            r.classifier.label(),
            r.mean_f1,
            r.wall_clock_seconds,
            r.f1_gain.map_or("n/a".into(), |g| format!("{g:+.4}")),
            r.speedup_gain.map_or("n/a".into(), |s| format!("{s:.2}x")),
        );
    }
    Ok(())
}

pub fn bench<T: Scalar>(
    cfg: &RunConfig,
    experiments: &[ExperimentId],
    base: Option<&Path>,
    classifiers: Option<&[ClassifierKind]>,
    knn_k: Option<usize>,
    trees: usize,
) -> Result<()> {
    let (rec, _) = load_prepared::<T>(cfg)?;
    let exp = ExperimentConfig {
        folds: cfg.folds,
        seed: cfg.seed,
        repeats: cfg.repeats,
        n_select: cfg.n_select,
        window_len: cfg.window_len,
        window_count: cfg.window_count,
        bins: cfg.bins,
        knn_k,
        rf_trees: trees,
        classifiers: classifiers.map_or_else(|| ClassifierKind::ALL.to_vec(), <[_]>::to_vec),
        ..ExperimentConfig::default()
    };
    let loaded_base = match base {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read base report {}", path.display()))?;
            Some(parse_report(&text).with_context(|| format!("invalid base report {}", path.display()))?)
        }
        None => None,
    };
    // without a saved base, the base experiment runs first and the others are compared against it
    let base_report = match loaded_base {
        Some(b) => b,
        None => {
            eprintln!("running experiment base");
            let b = run_experiment(ExperimentId::Base, &rec, &exp, None)?;
            write_bench_outputs(cfg, &b)?;
            b
        }
    };
    for &id in experiments.iter().filter(|&&id| base.is_some() || id != ExperimentId::Base) {
        eprintln!("running experiment {id}");
        let report = run_experiment(id, &rec, &exp, Some(&base_report))?;
        write_bench_outputs(cfg, &report)?;
    }
    Ok(())
}

pub fn report(cfg: &RunConfig, from: &[PathBuf], format: ReportFormat, stdout: bool) -> Result<()> {
    let reports = from
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read report {}", p.display()))?;
            parse_report(&text).with_context(|| format!("invalid report {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match format {
        ReportFormat::Json => serde_json::to_string_pretty(&reports)? + "\n",
        ReportFormat::Csv => {
            let mut out = String::new();
            for (i, r) in reports.iter().enumerate() {
                let csv = emit_report(r, format)?;
                // one header for the concatenated table
                out.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |(_, rest)| rest) });
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            for r in &reports {
                out.push_str(&format!("## Experiment {}\n\n{}\n", r.experiment, emit_report(r, format)?));
            }
            out
        }
    };
    if stdout {
        print!("{body}");
        return Ok(());
    }
    let path = match format {
        ReportFormat::Json => cfg.write_json("report.json", &reports)?,
        ReportFormat::Csv => cfg.write_hash_commented("report.csv", &body)?,
        ReportFormat::Markdown => cfg.write_markdown("report.md", &body)?,
    };
    announce(path);
    Ok(())
}

pub fn synth(cfg: &RunConfig, output: &Path, length: usize, seed: u64, no_spikes: bool) -> Result<()> {
    let mut sc = SynthConfig { length, seed, sample_rate_hz: cfg.sample_rate_hz, ..SynthConfig::default() };
    sc.spikes.retain(|&(t, _, _)| !no_spikes && t < length);
    let rec = synthetic_recording(&sc)?;
    let file = File::create(output).with_context(|| format!("cannot create {}", output.display()))?;
    let writer = std::io::BufWriter::new(file);
    match InputFormat::from_path(output) {
        InputFormat::Arff => write_arff(&rec, "synthetic_eye_state", writer)?,
        InputFormat::Csv => write_csv(&rec, writer)?,
    }
    println!("wrote {} ({} timepoints x {} channels)", output.display(), rec.len(), rec.n_channels());
    Ok(())
}
