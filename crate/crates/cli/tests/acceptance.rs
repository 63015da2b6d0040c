//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.
//!
//! The recording is taken from `EYESTATE_UCI_ARFF`, then from
//! `data/eeg_eye_state.arff` at the workspace root. When neither exists the
//! suite generates the synthetic surrogate with `eyestate synth`; checks that
//! only make sense on the real recording are then reported as BLOCKED, which
//! turns into a failure when `EYESTATE_REQUIRE_DATASET=1`.
//!
//! Numeric arguments restrict the run to those criteria, e.g.
//! `cargo test --test acceptance -- 3 4`.

use std::cell::OnceCell;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use eyestate::bench::{parse_report, ExperimentId, ExperimentReport};
use eyestate::connectivity::{adjacency, correlation_matrix, StateFilter};
use eyestate::ingest::parse_arff;
use eyestate::learners::forest::rf_train;
use eyestate::learners::logreg::logistic_objective;
use eyestate::learners::svc::svc_solve;
use eyestate::learners::{ClassifierKind, Dataset, ForestParams, MaxFeatures, SvcParams};
use eyestate::preprocess::{center, remove_outliers};
use eyestate::selection::{
    entropy_codes, mrmr_rank_features, mutual_information, mutual_information_codes, Discretized, HistogramConfig,
};
use eyestate::Recording;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

struct Context {
    bin: PathBuf,
    data: PathBuf,
    real: bool,
    work: PathBuf,
    /// Output directory and duration of the full benchmark grid, shared by
    /// criteria 9 and 10.
    grid: OnceCell<Result<(PathBuf, Duration), String>>,
}

impl Context {
    fn tag(&self) -> &'static str {
        if self.real {
            ""
        } else {
            " [surrogate]"
        }
    }

    fn run(&self, out: &str, args: &[&str]) -> Result<PathBuf, String> {
        let dir = self.work.join(out);
        let output = Command::new(&self.bin)
            .args(args)
            .arg("--input")
            .arg(&self.data)
            .arg("--out")
            .arg(&dir)
            .output()
            .map_err(|e| format!("cannot start eyestate: {e}"))?;
        if !output.status.success() {
            return Err(format!(
                "eyestate {} exited with {}: {}",
                args.join(" "),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ));
        }
        Ok(dir)
    }

    fn grid(&self) -> Result<(PathBuf, Duration), String> {
        self.grid
            .get_or_init(|| {
                let start = Instant::now();
                let dir = self.run("grid", &["bench", "--experiment", "all", "--seed", "42"])?;
                Ok((dir, start.elapsed()))
            })
            .clone()
    }

    fn load(&self) -> Recording {
        let file = fs::File::open(&self.data).expect("dataset readable");
        parse_arff(std::io::BufReader::new(file), 128).expect("dataset parses")
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Data rows of a written CSV: lines after the config comment and header.
fn csv_rows(path: &Path) -> Result<usize, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).count().saturating_sub(1))
}

fn criterion_1(ctx: &Context) -> Result<Outcome, String> {
    let dir = ctx.run("c1", &["summarize"])?;
    let summary = read_json(&dir.join("summary.json"))?;
    let rows = summary["length"].as_u64().unwrap_or(0);
    let channels = summary["channels"].as_array().map_or(0, Vec::len);
    let dir = ctx.run("c1", &["preprocess", "--outlier-factor", "10"])?;
    let removed = read_json(&dir.join("outliers.json"))?["removed_indices"].as_array().map_or(0, Vec::len);
    let kept = csv_rows(&dir.join("preprocessed.csv"))?;
    let ok = channels == 14 && rows == 14980 && removed == 3 && kept == 14977;
    let detail = format!("{channels} channels x {rows} rows, {removed} outliers removed, {kept} rows left");
    if ok && !ctx.real {
        return Ok(Outcome {
            status: Status::Blocked,
            detail: format!("{detail} on the surrogate; the recording itself is not present"),
        });
    }
    Ok(Outcome::check(ok, detail))
}

fn criterion_2(ctx: &Context) -> Result<Outcome, String> {
    let dir = ctx.run("c2", &["epoch"])?;
    let manifest = read_json(&dir.join("epoch_manifest.json"))?;
    let windows: Vec<(u64, u64)> = manifest["windows"]
        .as_array()
        .ok_or("manifest has no windows")?
        .iter()
        .map(|w| (w["start"].as_u64().unwrap_or(0), w["end"].as_u64().unwrap_or(0)))
        .collect();
    let lengths_ok = windows.iter().all(|&(s, e)| e - s == 384);
    let disjoint = windows.windows(2).all(|p| p[0].1 <= p[1].0);
    let rows = csv_rows(&dir.join("epochs.csv"))?;
    let ok = windows.len() == 20 && lengths_ok && disjoint && rows == 7680 && manifest["rows"] == 7680;
    Ok(Outcome::check(
        ok,
        format!(
            "{} windows, all 384 long: {lengths_ok}, disjoint: {disjoint}, {rows} rows{}",
            windows.len(),
            ctx.tag()
        ),
    ))
}

/// Mutual information straight from the definition: the double sum of
/// `p(x,y) ln(p(x,y) / (p(x) p(y)))` over every cell of the joint histogram.
fn brute_force_mi(a: &Discretized, b: &Discretized) -> f64 {
    let n = a.codes.len() as f64;
    let mut total = 0.0;
    for x in 0..a.bins {
        for y in 0..b.bins {
            let nxy = a.codes.iter().zip(&b.codes).filter(|&(&i, &j)| i as usize == x && j as usize == y).count() as f64;
            if nxy == 0.0 {
                continue;
            }
            let nx = a.codes.iter().filter(|&&i| i as usize == x).count() as f64;
            let ny = b.codes.iter().filter(|&&j| j as usize == y).count() as f64;
            let pxy = nxy / n;
            total += pxy * (pxy / ((nx / n) * (ny / n))).ln();
        }
    }
    total
}

fn brute_force_entropy(a: &Discretized) -> f64 {
    let n = a.codes.len() as f64;
    (0..a.bins)
        .map(|x| a.codes.iter().filter(|&&i| i as usize == x).count() as f64 / n)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if rng.random_bool(0.3) {
        // few distinct values, so bins and ties matter
        (0..n).map(|_| rng.random_range(0..6) as f64).collect()
    } else {
        (0..n).map(|_| rng.random_range(-50.0..50.0)).collect()
    }
}

fn criterion_3(_: &Context) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut worst_self: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..80);
        let cfg = HistogramConfig::new(rng.random_range(2..20)).map_err(|e| e.to_string())?;
        let x = random_series(&mut rng, n);
        let y = random_series(&mut rng, n);
        let mi = mutual_information(&x, &y, &cfg).map_err(|e| e.to_string())?.nats;
        let (a, b) = (Discretized::continuous(&x, &cfg), Discretized::continuous(&y, &cfg));
        worst = worst.max((mi - brute_force_mi(&a, &b)).abs());
        let self_mi = mutual_information(&x, &x, &cfg).map_err(|e| e.to_string())?.nats;
        worst_self = worst_self.max((self_mi - brute_force_entropy(&a)).abs());
        worst_self = worst_self.max((self_mi - entropy_codes::<f64>(&a)).abs());
    }
    Ok(Outcome::check(
        worst < 1e-12 && worst_self < 1e-12,
        format!("100 inputs, max |MI - brute force| = {worst:.1e}, max |MI(x,x) - H(x)| = {worst_self:.1e}"),
    ))
}

/// Per-step argmax over every remaining feature, recomputing relevance and
/// redundancy from scratch at each step. Ties go to the lowest index.
fn exhaustive_mrmr(features: &[Vec<f64>], labels: &[u8], cfg: &HistogramConfig) -> (Vec<usize>, Vec<f64>) {
    let coded: Vec<Discretized> = features.iter().map(|f| Discretized::continuous(f, cfg)).collect();
    let target = Discretized::labels(labels);
    let mut order: Vec<usize> = Vec::new();
    let mut scores = Vec::new();
    while order.len() < features.len() {
        let mut best: Option<(usize, f64)> = None;
        for f in (0..features.len()).filter(|f| !order.contains(f)) {
            let relevance: f64 = mutual_information_codes(&coded[f], &target).unwrap();
            let score = if order.is_empty() {
                relevance
            } else {
                let mut redundancy = 0.0;
                for &s in &order {
                    redundancy += mutual_information_codes::<f64>(&coded[f], &coded[s]).unwrap();
                }
                relevance - redundancy / order.len() as f64
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((f, score));
            }
        }
        let (f, s) = best.unwrap();
        order.push(f);
        scores.push(s);
    }
    (order, scores)
}

fn criterion_4(_: &Context) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = HistogramConfig::default();
    let mut mismatches = 0;
    for _ in 0..50 {
        let d = rng.random_range(2..=5);
        let n = rng.random_range(20..120);
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        let features: Vec<Vec<f64>> = (0..d)
            .map(|_| labels.iter().map(|&l| f64::from(l) * rng.random_range(0.0..3.0) + rng.random_range(-2.0..2.0)).collect())
            .collect();
        let names: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
        let ranking = mrmr_rank_features(&names, &features, &labels, &cfg, d).map_err(|e| e.to_string())?;
        let (order, scores) = exhaustive_mrmr(&features, &labels, &cfg);
        if ranking.order != order || ranking.scores != scores {
            mismatches += 1;
        }
    }
    Ok(Outcome::check(mismatches == 0, format!("50 trials with 2 to 5 features, {mismatches} mismatches in order or score")))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn criterion_5(ctx: &Context) -> Result<Outcome, String> {
    let (kept, _) = remove_outliers(&ctx.load(), 10.0).map_err(|e| e.to_string())?;
    let centered = center(&kept).map_err(|e| e.to_string())?;
    let corr = correlation_matrix(&centered, StateFilter::All).map_err(|e| e.to_string())?;
    let c = corr.size();
    let mut worst: f64 = 0.0;
    let mut shape_ok = true;
    for i in 0..c {
        shape_ok &= corr.get(i, i) == 1.0;
        for j in 0..c {
            shape_ok &= corr.get(i, j) == corr.get(j, i);
            if i < j {
                worst = worst.max((corr.get(i, j) - pearson(&kept.channel(i).values, &kept.channel(j).values)).abs());
            }
        }
    }
    let mut monotone = true;
    let mut edge_counts = Vec::new();
    for state in [0u8, 1] {
        let corr = correlation_matrix(&centered, StateFilter::State(state)).map_err(|e| e.to_string())?;
        let mut previous: Option<Vec<(usize, usize)>> = None;
        for tau in [0.6, 0.7, 0.8] {
            let g = adjacency(&corr, tau, StateFilter::State(state)).map_err(|e| e.to_string())?;
            let edges = g.edges();
            // the graph must be exactly the closed threshold of the matrix
            for i in 0..c {
                for j in 0..c {
                    monotone &= g.has_edge(i, j) == (i != j && corr.get(i, j) >= tau);
                }
            }
            if let Some(prev) = &previous {
                monotone &= edges.iter().all(|e| prev.contains(e));
            }
            edge_counts.push(edges.len());
            previous = Some(edges);
        }
    }
    Ok(Outcome::check(
        worst < 1e-12 && shape_ok && monotone,
        format!(
            "max |r - Pearson| = {worst:.1e}, symmetric with unit diagonal: {shape_ok}, nested over tau 0.6/0.7/0.8: {monotone} (edges {edge_counts:?}){}",
            ctx.tag()
        ),
    ))
}

fn criterion_6(_: &Context) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(10..80);
        let d = rng.random_range(1..8);
        let scale = [0.1, 1.0, 5.0][rng.random_range(0..3)];
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| scale * unit.sample(&mut rng)).collect()).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        let data = Dataset::from_rows(&rows, labels).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..d).map(|_| unit.sample(&mut rng)).collect();
        let b = unit.sample(&mut rng);
        let l2 = [0.0, 1e-3, 0.5][rng.random_range(0..3)];
        let analytic = logistic_objective(&data, &w, b, l2);
        let mut numeric = Vec::with_capacity(d + 1);
        let h = 1e-5;
        for k in 0..=d {
            let (mut wp, mut wm, mut bp, mut bm) = (w.clone(), w.clone(), b, b);
            if k < d {
                wp[k] += h;
                wm[k] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            let fp = logistic_objective(&data, &wp, bp, l2).value;
            let fm = logistic_objective(&data, &wm, bm, l2).value;
            numeric.push((fp - fm) / (2.0 * h));
        }
        let mut exact = analytic.grad_weights.clone();
        exact.push(analytic.grad_bias);
        let diff: f64 = exact.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = diff / (norm(&exact) + norm(&numeric)).max(1e-12);
        worst = worst.max(rel);
    }
    Ok(Outcome::check(worst < 1e-5, format!("50 problems, max relative gradient error {worst:.1e}")))
}

fn criterion_7(_: &Context) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let labels: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| {
            let c = if l == 1 { 1.0 } else { -1.0 };
            vec![c + unit.sample(&mut rng), c + unit.sample(&mut rng)]
        })
        .collect();
    let data = Dataset::from_rows(&rows, labels.clone()).map_err(|e| e.to_string())?;
    let c = 10.0;
    let gamma = 0.5;
    let sol = svc_solve(&data, &SvcParams { c, gamma, ..SvcParams::default() }).map_err(|e| e.to_string())?;
    let in_box = sol.alpha.iter().all(|&a| (0.0..=c).contains(&a));
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
    let mut residual: f64 = 0.0;
    let mut at_bound = 0;
    for i in 0..rows.len() {
        let f: f64 = (0..rows.len())
            .map(|j| {
                let d2: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum();
                sol.alpha[j] * y[j] * (-gamma * d2).exp()
            })
            .sum::<f64>()
            - sol.rho;
        let margin = y[i] * f;
        let a = sol.alpha[i];
        let v = if a <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if a >= c {
            at_bound += 1;
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        residual = residual.max(v);
    }
    Ok(Outcome::check(
        in_box && residual < 1e-3 && balance.abs() < 1e-9,
        format!(
            "200 points, C = 10: duals in [0, 10]: {in_box}, {} support vectors ({at_bound} at C), max KKT residual {residual:.1e}, |sum a_i y_i| = {:.1e}",
            sol.diagnostics.n_support,
            balance.abs()
        ),
    ))
}

/// A plain CART classification tree: Gini impurity, every feature, midpoint
/// thresholds, grown until leaves are pure or cannot be split.
enum PlainTree {
    Leaf(u8),
    Split { feature: usize, threshold: f64, left: Box<PlainTree>, right: Box<PlainTree> },
}

impl PlainTree {
    fn grow(rows: &[Vec<f64>], labels: &[u8], idx: &[usize]) -> PlainTree {
        let ones = idx.iter().filter(|&&i| labels[i] == 1).count();
        let zeros = idx.len() - ones;
        let leaf = PlainTree::Leaf(u8::from(ones > zeros));
        if ones == 0 || zeros == 0 || idx.len() < 2 {
            return leaf;
        }
        // best split maximizes sum over children of (sum of squared class counts / size),
        // compared as exact fractions; the first best (by feature, then threshold) wins
        let mut best: Option<(usize, f64, i128, i128)> = None;
        for feature in 0..rows[0].len() {
            let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][feature]).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            for pair in values.windows(2) {
                let mut threshold = pair[0] + (pair[1] - pair[0]) / 2.0;
                if threshold >= pair[1] {
                    threshold = pair[0];
                }
                let mut left = [0i128; 2];
                let mut right = [0i128; 2];
                for &i in idx {
                    let side = if rows[i][feature] <= threshold { &mut left } else { &mut right };
                    side[labels[i] as usize] += 1;
                }
                let (nl, nr) = (left[0] + left[1], right[0] + right[1]);
                let num = (left[0] * left[0] + left[1] * left[1]) * nr + (right[0] * right[0] + right[1] * right[1]) * nl;
                let den = nl * nr;
                if best.is_none_or(|(_, _, bn, bd)| num * bd > bn * den) {
                    best = Some((feature, threshold, num, den));
                }
            }
        }
        let Some((feature, threshold, _, _)) = best else { return leaf };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][feature] <= threshold);
        PlainTree::Split {
            feature,
            threshold,
            left: Box::new(PlainTree::grow(rows, labels, &l)),
            right: Box::new(PlainTree::grow(rows, labels, &r)),
        }
    }

    fn predict(&self, x: &[f64]) -> u8 {
        match self {
            PlainTree::Leaf(l) => *l,
            PlainTree::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

fn criterion_8(_: &Context) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disagreements = 0;
    let mut checked = 0;
    for set in 0..5 {
        let n = rng.random_range(40..150);
        let d = rng.random_range(2..6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|f| if f % 2 == 0 { rng.random_range(0..8) as f64 } else { rng.random_range(-3.0..3.0) })
                    .collect()
            })
            .collect();
        let labels: Vec<u8> =
            rows.iter().map(|r| u8::from(r[0] + r[1] > 3.0) ^ u8::from(rng.random_bool(0.15))).collect();
        let data = Dataset::from_rows(&rows, labels.clone()).map_err(|e| e.to_string())?;
        let params = ForestParams {
            n_trees: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            seed: set,
            ..ForestParams::default()
        };
        let forest = rf_train(&data, &params).map_err(|e| e.to_string())?;
        let oracle = PlainTree::grow(&rows, &labels, &(0..n).collect::<Vec<_>>());
        let queries = rows.iter().cloned().chain((0..300).map(|_| {
            (0..d).map(|_| rng.random_range(-1.0..9.0)).collect::<Vec<f64>>()
        }));
        for q in queries {
            checked += 1;
            if forest.predict_row(&q) != oracle.predict(&q) {
                disagreements += 1;
            }
        }
    }
    Ok(Outcome::check(
        disagreements == 0,
        format!("5 datasets, {checked} predictions compared, {disagreements} disagreements"),
    ))
}

fn load_report(dir: &Path, id: ExperimentId) -> Result<ExperimentReport, String> {
    let path = dir.join(format!("bench_{id}_full.json"));
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_report(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn mean_seconds(report: &ExperimentReport, kind: ClassifierKind) -> Result<f64, String> {
    report
        .record(kind)
        .map(|r| r.wall_clock_seconds)
        .ok_or_else(|| format!("experiment {} has no {} record", report.experiment, kind.label()))
}

fn criterion_9(ctx: &Context) -> Result<Outcome, String> {
    let (grid_dir, grid_time) = ctx.grid()?;
    let grid_dir = grid_dir.as_path();
    let base = load_report(grid_dir, ExperimentId::Base)?;
    let b = load_report(grid_dir, ExperimentId::B)?;
    let mut detail = String::new();
    let mut ok = grid_time < Duration::from_secs(30 * 60);
    for kind in [ClassifierKind::Knn, ClassifierKind::Svc] {
        let ratio = mean_seconds(&base, kind)? / mean_seconds(&b, kind)?;
        ok &= ratio > 1.0;
        let _ = write!(detail, "{} B speed-up {ratio:.2}x, ", kind.label());
    }
    let _ = write!(detail, "full grid {:.0} s (5 folds, 3 repeats){}", grid_time.as_secs_f64(), ctx.tag());
    Ok(Outcome::check(ok, detail))
}

fn criterion_10(ctx: &Context) -> Result<Outcome, String> {
    let (grid_dir, _) = ctx.grid()?;
    let grid_dir = grid_dir.as_path();
    let base = load_report(grid_dir, ExperimentId::Base)?;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = String::new();
    for id in [ExperimentId::A, ExperimentId::B, ExperimentId::C] {
        let report = load_report(grid_dir, id)?;
        for r in &report.records {
            let base_f1 = base.record(r.classifier).ok_or("base record missing")?.mean_f1;
            if r.mean_f1 - base_f1 > worst {
                worst = r.mean_f1 - base_f1;
                worst_at = format!("{id}/{}", r.classifier.label());
            }
        }
    }
    Ok(Outcome::check(
        worst <= 0.05,
        format!("largest F1 gain {worst:+.4} ({worst_at}), limit +0.05{}", ctx.tag()),
    ))
}

fn criterion_11(ctx: &Context) -> Result<Outcome, String> {
    let args = ["bench", "--experiment", "B", "--seed", "42"];
    let first = ctx.run("c11_first", &args)?;
    let second = ctx.run("c11_second", &args)?;
    let files = ["bench_base.json", "bench_base_folds.csv", "bench_B.json", "bench_B_folds.csv"];
    let mut differing = Vec::new();
    for f in files {
        let a = fs::read(first.join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = fs::read(second.join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            differing.push(f);
        }
    }
    Ok(Outcome::check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} non-timing files byte-identical across two runs{}", files.len(), ctx.tag())
        } else {
            format!("files differ: {}", differing.join(", "))
        },
    ))
}

fn locate_dataset(work: &Path, bin: &Path) -> (PathBuf, bool) {
    if let Some(p) = std::env::var_os("EYESTATE_UCI_ARFF") {
        return (PathBuf::from(p), true);
    }
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/eeg_eye_state.arff");
    if shipped.exists() {
        return (shipped, true);
    }
    let surrogate = work.join("surrogate.arff");
    let status = Command::new(bin)
        .args(["synth", "--output"])
        .arg(&surrogate)
        .arg("--out")
        .arg(work)
        .status()
        .expect("eyestate runs");
    assert!(status.success(), "surrogate generation failed");
    (surrogate, false)
}

fn main() {
    let work = tempfile::tempdir().expect("temporary directory");
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_eyestate"));
    let (data, real) = locate_dataset(work.path(), &bin);
    let require = std::env::var("EYESTATE_REQUIRE_DATASET").is_ok_and(|v| v == "1");
    println!("acceptance: recording {}", if real { data.display().to_string() } else { "synthetic surrogate".into() });
    let ctx = Context { bin, data, real, work: work.path().to_path_buf(), grid: OnceCell::new() };
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();

    type Check = fn(&Context) -> Result<Outcome, String>;
    let criteria: [(u32, &str, u64, Check); 11] = [
        (1, "dataset round-trip", 5, criterion_1),
        (2, "epoch arithmetic", 5, criterion_2),
        (3, "MI oracle", 10, criterion_3),
        (4, "mRMR oracle", 30, criterion_4),
        (5, "correlation", 30, criterion_5),
        (6, "logistic gradient", 30, criterion_6),
        (7, "SVC optimality", 60, criterion_7),
        (8, "RF as a plain tree", 30, criterion_8),
        // the budget covers the full grid, which criterion 10 reuses
        (9, "directional speed-up", 30 * 60, criterion_9),
        (10, "directional F1", 30 * 60, criterion_10),
        (11, "determinism", 30 * 60, criterion_11),
    ];
    let selected: Vec<_> = criteria.iter().filter(|c| only.is_empty() || only.contains(&c.0)).collect();

    let mut failed = 0;
    let mut blocked = 0;
    for (id, name, budget, check) in &selected {
        let start = Instant::now();
        let mut outcome = check(&ctx).unwrap_or_else(|e| Outcome { status: Status::Fail, detail: e });
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed > *budget as f64 && outcome.status != Status::Fail {
            outcome.status = Status::Fail;
            outcome.detail.push_str(&format!("; over the {budget} s budget"));
        }
        if outcome.status == Status::Blocked && require {
            outcome.status = Status::Fail;
        }
        let label = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        };
        failed += usize::from(outcome.status == Status::Fail);
        blocked += usize::from(outcome.status == Status::Blocked);
        println!("criterion {id:>2} {label:<7} {name}: {} ({elapsed:.1} s, budget {budget} s)", outcome.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed, {blocked} blocked",
        selected.len() - failed - blocked
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
