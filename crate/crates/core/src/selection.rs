//! Histogram mutual information and greedy mRMR channel ranking.
//!
//! Continuous variables are discretized into equal-width bins spanning their
//! own min..max; the binary label uses its two natural bins. Mutual
//! information is evaluated in nats from the joint histogram:
//!
//! `MI = Σ p(a,b) ln(p(a,b) / (p(a) p(b)))`
//!
//! Ranking follows the difference scheme: the first pick maximizes
//! relevance `MI(f, label)`; every later pick maximizes
//! `MI(f, label) - mean_{s in S} MI(f, s)` over the remaining channels.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Label, Recording};
use crate::scalar::Scalar;

pub const DEFAULT_BIN_COUNT: usize = 16;
pub const DEFAULT_N_SELECT: usize = 9;

/// How bin edges are placed. Only per-variable equal-width bins exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangePolicy {
    #[default]
    PerVariableMinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub bin_count: usize,
    pub range_policy: RangePolicy,
}

impl HistogramConfig {
    pub fn new(bin_count: usize) -> Result<Self> {
        if bin_count < 2 {
            return Err(Error::param("bin_count", format!("must be at least 2, got {bin_count}")));
        }
        if bin_count > u16::MAX as usize {
            return Err(Error::param("bin_count", format!("must be at most {}, got {bin_count}", u16::MAX)));
        }
        Ok(Self { bin_count, range_policy: RangePolicy::PerVariableMinMax })
    }
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { bin_count: DEFAULT_BIN_COUNT, range_policy: RangePolicy::PerVariableMinMax }
    }
}

/// A variable mapped to bin codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discretized {
    pub codes: Vec<u16>,
    pub bins: usize,
    /// Set when the variable had zero range and collapsed into one bin.
    pub degenerate: bool,
}

impl Discretized {
    /// Equal-width binning over the variable's own min..max. The maximum
    /// falls in the last bin.
    pub fn continuous<T: Scalar>(values: &[T], cfg: &HistogramConfig) -> Self {
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        let bins = cfg.bin_count;
        if values.is_empty() || !(hi > lo) {
            return Self { codes: vec![0; values.len()], bins, degenerate: true };
        }
        let width = hi - lo;
        let scale = T::from_count(bins);
        let last = bins - 1;
        let codes = values
            .iter()
            .map(|&v| {
                let b = ((v - lo) / width * scale).floor().to_usize().unwrap_or(last);
                b.min(last) as u16
            })
            .collect();
        Self { codes, bins, degenerate: false }
    }

    pub fn labels(labels: &[Label]) -> Self {
        let degenerate = labels.windows(2).all(|w| w[0] == w[1]);
        Self { codes: labels.iter().map(|&l| l as u16).collect(), bins: 2, degenerate }
    }
}

/// Mutual information with a flag for zero-range inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate<T> {
    pub nats: T,
    pub degenerate: bool,
}

/// Joint-histogram mutual information of two discretized variables.
///
/// Cell contributions are summed in ascending order of value, so swapping
/// the arguments (which transposes the table) gives a bit-identical result.
pub fn mutual_information_codes<T: Scalar>(a: &Discretized, b: &Discretized) -> Result<T> {
    let n = a.codes.len();
    if n != b.codes.len() {
        return Err(Error::LengthMismatch { left: n, right: b.codes.len() });
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let mut joint = vec![0u64; a.bins * b.bins];
    let mut ca = vec![0u64; a.bins];
    let mut cb = vec![0u64; b.bins];
    for (&x, &y) in a.codes.iter().zip(&b.codes) {
        joint[x as usize * b.bins + y as usize] += 1;
        ca[x as usize] += 1;
        cb[y as usize] += 1;
    }
    let total = T::from_count(n);
    let mut terms: Vec<T> = Vec::new();
    for (x, &nx) in ca.iter().enumerate() {
        if nx == 0 {
            continue;
        }
        for (y, &ny) in cb.iter().enumerate() {
            let nxy = joint[x * b.bins + y];
            if nxy == 0 {
                continue;
            }
            let nxy_t = T::lit(nxy as f64);
            let ratio = nxy_t * total / (T::lit(nx as f64) * T::lit(ny as f64));
            terms.push(nxy_t / total * ratio.ln());
        }
    }
    terms.sort_by(|p, q| p.partial_cmp(q).expect("finite terms"));
    let mut sum = T::zero();
    for t in terms {
        sum += t;
    }
    Ok(sum)
}

/// Histogram entropy `-Σ p ln p` in nats.
pub fn entropy_codes<T: Scalar>(a: &Discretized) -> T {
    let n = a.codes.len();
    if n == 0 {
        return T::zero();
    }
    let mut counts = vec![0u64; a.bins];
    for &x in &a.codes {
        counts[x as usize] += 1;
    }
    let total = T::from_count(n);
    let mut h = T::zero();
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = T::lit(c as f64) / total;
        h -= p * p.ln();
    }
    h
}

fn check_series<T: Scalar>(x: &[T], y: &[T]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::param("x", "need at least 2 samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::param("x", "samples must be finite"));
    }
    Ok(())
}

/// Mutual information between two continuous series.
pub fn mutual_information<T: Scalar>(x: &[T], y: &[T], cfg: &HistogramConfig) -> Result<MiEstimate<T>> {
    check_series(x, y)?;
    let a = Discretized::continuous(x, cfg);
    let b = Discretized::continuous(y, cfg);
    Ok(MiEstimate { nats: mutual_information_codes(&a, &b)?, degenerate: a.degenerate || b.degenerate })
}

/// Mutual information between a continuous series and binary labels.
pub fn mutual_information_with_labels<T: Scalar>(
    x: &[T],
    labels: &[Label],
    cfg: &HistogramConfig,
) -> Result<MiEstimate<T>> {
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: labels.len() });
    }
    check_series(x, x)?;
    let a = Discretized::continuous(x, cfg);
    let b = Discretized::labels(labels);
    Ok(MiEstimate { nats: mutual_information_codes(&a, &b)?, degenerate: a.degenerate || b.degenerate })
}

/// Entropy of a continuous series under the same binning.
pub fn entropy<T: Scalar>(x: &[T], cfg: &HistogramConfig) -> T {
    entropy_codes(&Discretized::continuous(x, cfg))
}

/// Result of greedy mRMR ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SelectionRanking<T> {
    pub names: Vec<String>,
    /// Channel indices in selection order.
    pub order: Vec<usize>,
    /// Winning score at each step.
    pub scores: Vec<T>,
    pub n_select: usize,
    /// `MI(channel, label)` for every channel.
    pub relevance: Vec<T>,
    /// `step_scores[k][c]`: score of channel `c` at step `k`, `None` once it
    /// has been selected.
    pub step_scores: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> SelectionRanking<T> {
    pub fn selected_names(&self) -> Vec<String> {
        self.order.iter().map(|&i| self.names[i].clone()).collect()
    }

    /// Steps × channels score table with columns in selection order, so the
    /// winning scores sit on the diagonal. Unselected channels follow.
    pub fn to_csv(&self) -> String {
        let mut columns = self.order.clone();
        columns.extend((0..self.names.len()).filter(|c| !self.order.contains(c)));
        let mut out = String::from("step,selected");
        for &c in &columns {
            out.push(',');
            out.push_str(&self.names[c]);
        }
        out.push('\n');
        for (k, row) in self.step_scores.iter().enumerate() {
            let _ = write!(out, "{},{}", k + 1, self.names[self.order[k]]);
            for &c in &columns {
                match row[c] {
                    Some(s) => {
                        let _ = write!(out, ",{s}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Greedy mRMR over arbitrary feature columns.
pub fn mrmr_rank_features<T: Scalar>(
    names: &[String],
    features: &[Vec<T>],
    labels: &[Label],
    cfg: &HistogramConfig,
    n_select: usize,
) -> Result<SelectionRanking<T>> {
    let c = features.len();
    if names.len() != c {
        return Err(Error::LengthMismatch { left: names.len(), right: c });
    }
    if n_select == 0 || n_select > c {
        return Err(Error::param("n_select", format!("must be in 1..={c}, got {n_select}")));
    }
    if let Some(f) = features.iter().find(|f| f.len() != labels.len()) {
        return Err(Error::LengthMismatch { left: f.len(), right: labels.len() });
    }
    let target = Discretized::labels(labels);
    let coded: Vec<Discretized> = features.iter().map(|f| Discretized::continuous(f, cfg)).collect();
    let relevance = coded.iter().map(|f| mutual_information_codes(f, &target)).collect::<Result<Vec<T>>>()?;

    // redundancy_sum[f] accumulates MI(f, s) over the selected set
    let mut redundancy_sum = vec![T::zero(); c];
    let mut selected = vec![false; c];
    let mut order = Vec::with_capacity(n_select);
    let mut scores = Vec::with_capacity(n_select);
    let mut step_scores = Vec::with_capacity(n_select);

    for step in 0..n_select {
        let row: Vec<Option<T>> = (0..c)
            .map(|f| {
                (!selected[f]).then(|| {
                    if step == 0 {
                        relevance[f]
                    } else {
                        relevance[f] - redundancy_sum[f] / T::from_count(step)
                    }
                })
            })
            .collect();
        let mut best: Option<(usize, T)> = None;
        for (f, s) in row.iter().enumerate() {
            if let Some(s) = *s {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((f, s));
                }
            }
        }
        let (winner, score) = best.expect("n_select <= channel count");
        selected[winner] = true;
        order.push(winner);
        scores.push(score);
        step_scores.push(row);
        if step + 1 < n_select {
            for f in (0..c).filter(|&f| !selected[f]) {
                redundancy_sum[f] += mutual_information_codes::<T>(&coded[f], &coded[winner])?;
            }
        }
    }

    Ok(SelectionRanking { names: names.to_vec(), order, scores, n_select, relevance, step_scores })
}

/// Greedy mRMR over the channels of a recording against its labels.
pub fn mrmr_rank<T: Scalar>(rec: &Recording<T>, cfg: &HistogramConfig, n_select: usize) -> Result<SelectionRanking<T>> {
    let features: Vec<Vec<T>> = rec.channels().iter().map(|c| c.values.clone()).collect();
    mrmr_rank_features(&rec.names(), &features, rec.labels(), cfg, n_select)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelAggregate<T> {
    pub name: String,
    /// Mean score at the step where the channel was selected.
    pub mean_score: Option<T>,
    /// Mean 1-based selection position.
    pub mean_position: Option<T>,
    /// How many rankings selected the channel.
    pub times_selected: usize,
}

/// Per-channel averages over several rankings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AggregateRanking<T> {
    pub rankings: usize,
    pub channels: Vec<ChannelAggregate<T>>,
}

impl<T: Scalar> AggregateRanking<T> {
    /// Channel indices ordered by selection frequency (descending), then
    /// mean position (ascending), then mean score (descending), then index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.channels.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ca, cb) = (&self.channels[a], &self.channels[b]);
            cb.times_selected
                .cmp(&ca.times_selected)
                .then_with(|| cmp_opt(ca.mean_position, cb.mean_position))
                .then_with(|| cmp_opt(cb.mean_score, ca.mean_score))
                .then_with(|| a.cmp(&b))
        });
        idx
    }

    pub fn top(&self, n: usize) -> Vec<usize> {
        self.ranked().into_iter().take(n).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,mean_score,mean_position,times_selected\n");
        for c in &self.channels {
            let fmt = |v: Option<T>| v.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", c.name, fmt(c.mean_score), fmt(c.mean_position), c.times_selected);
        }
        out
    }
}

fn cmp_opt<T: Scalar>(a: Option<T>, b: Option<T>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Averages the score each channel attained at its selection step, and its
/// position, across rankings over the same channel set.
pub fn average_ranking<T: Scalar>(rankings: &[SelectionRanking<T>]) -> Result<AggregateRanking<T>> {
    let first = rankings.first().ok_or_else(|| Error::param("rankings", "need at least one ranking"))?;
    if rankings.iter().any(|r| r.names != first.names) {
        return Err(Error::MismatchedChannels);
    }
    let c = first.names.len();
    let mut score_sum = vec![T::zero(); c];
    let mut pos_sum = vec![T::zero(); c];
    let mut count = vec![0usize; c];
    for r in rankings {
        for (k, (&ch, &s)) in r.order.iter().zip(&r.scores).enumerate() {
            score_sum[ch] += s;
            pos_sum[ch] += T::from_count(k + 1);
            count[ch] += 1;
        }
    }
    let channels = (0..c)
        .map(|i| {
            let n = T::from_count(count[i]);
            ChannelAggregate {
                name: first.names[i].clone(),
                mean_score: (count[i] > 0).then(|| score_sum[i] / n),
                mean_position: (count[i] > 0).then(|| pos_sum[i] / n),
                times_selected: count[i],
            }
        })
        .collect();
    Ok(AggregateRanking { rankings: rankings.len(), channels })
}

/// Ranks every channel within each segment and averages the rankings.
pub fn mrmr_over_segments<T: Scalar>(
    segments: &[Recording<T>],
    cfg: &HistogramConfig,
) -> Result<(Vec<SelectionRanking<T>>, AggregateRanking<T>)> {
    let rankings = segments.iter().map(|s| mrmr_rank(s, cfg, s.n_channels())).collect::<Result<Vec<_>>>()?;
    let aggregate = average_ranking(&rankings)?;
    Ok((rankings, aggregate))
}
