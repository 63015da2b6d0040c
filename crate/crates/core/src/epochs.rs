//! Transition detection and transition-centered window slicing.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Label, Recording};
use crate::scalar::Scalar;

/// 3 s at 128 Hz.
pub const DEFAULT_WINDOW_LEN: usize = 384;
pub const DEFAULT_WINDOW_COUNT: usize = 20;

/// Half-open window `[start, end)` around a label change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    pub transition: usize,
}

impl Window {
    fn overlaps(&self, other: &Window) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Rows of the accepted windows, concatenated in window order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EpochSet<T> {
    /// Sorted by start.
    pub windows: Vec<Window>,
    pub window_len: usize,
    pub source_length: usize,
    pub seed: u64,
    /// Observation rows (all channels plus labels) copied from the source.
    pub rows: Recording<T>,
    /// Source timepoint of every row.
    pub row_source: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochManifest {
    pub windows: Vec<Window>,
    pub window_len: usize,
    pub window_count: usize,
    pub source_length: usize,
    pub rows: usize,
    pub seed: u64,
}

impl<T: Scalar> EpochSet<T> {
    pub fn manifest(&self) -> EpochManifest {
        EpochManifest {
            windows: self.windows.clone(),
            window_len: self.window_len,
            window_count: self.windows.len(),
            source_length: self.source_length,
            rows: self.rows.len(),
            seed: self.seed,
        }
    }

    /// Row view of one window as its own recording.
    pub fn window_recording(&self, index: usize) -> Result<Recording<T>> {
        let start = index * self.window_len;
        let rows: Vec<usize> = (start..start + self.window_len).collect();
        self.rows.select_rows(&rows)
    }

    /// CSV of all rows with window number and source index in front.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window,t");
        for name in self.rows.names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push_str(",label\n");
        for (r, &t) in self.row_source.iter().enumerate() {
            let _ = write!(out, "{},{}", r / self.window_len, t);
            for ch in self.rows.channels() {
                let _ = write!(out, ",{}", ch.values[r]);
            }
            let _ = writeln!(out, ",{}", self.rows.labels()[r]);
        }
        out
    }
}

/// Indices `i` with `labels[i] != labels[i - 1]`, ascending.
pub fn find_transitions(labels: &[Label]) -> Vec<usize> {
    (1..labels.len()).filter(|&i| labels[i] != labels[i - 1]).collect()
}

/// Window of length `len` centered on `transition`, shifted back inside
/// `[0, total)`. `None` if it cannot contain the transition strictly inside.
fn place(transition: usize, len: usize, total: usize) -> Option<Window> {
    if len > total {
        return None;
    }
    let start = transition.saturating_sub(len / 2).min(total - len);
    let w = Window { start, end: start + len, transition };
    (w.start < transition && transition < w.end).then_some(w)
}

/// Evenly spaced target positions into a list of `m` transitions. Exact
/// half-way ties are broken by the seeded generator.
fn target_positions(m: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    // position k sits at (k + 1/2) * m / count - 1/2 = ((2k + 1) m - count) / (2 count)
    let denom = 2 * count;
    (0..count)
        .map(|k| {
            let numer = ((2 * k + 1) * m).saturating_sub(count);
            let base = numer / denom;
            let p = match (2 * (numer % denom)).cmp(&denom) {
                std::cmp::Ordering::Less => base,
                std::cmp::Ordering::Greater => base + 1,
                std::cmp::Ordering::Equal => base + usize::from(rng.random::<bool>()),
            };
            p.min(m - 1)
        })
        .collect()
}

/// Pure greedy interval scheduling: the largest disjoint set of candidate
/// windows, scanning by end position.
fn max_disjoint(candidates: &[Window]) -> Vec<Window> {
    let mut out: Vec<Window> = Vec::new();
    for w in candidates {
        if out.last().is_none_or(|l| l.end <= w.start) {
            out.push(*w);
        }
    }
    out
}

/// Slices `count` disjoint windows of `window_len` timepoints, each centered
/// on an eye-state transition.
///
/// Targets are spread evenly over the transition list. A target whose window
/// overlaps an accepted one is skipped in favour of the next transition. If
/// that leaves slots empty, the remaining transitions are scanned in order,
/// and as a last resort an evenly spaced subset of a maximum disjoint set is
/// used. Fails only when fewer than `count` disjoint windows exist at all.
pub fn slice_windows<T: Scalar>(rec: &Recording<T>, window_len: usize, count: usize, seed: u64) -> Result<EpochSet<T>> {
    let total = rec.len();
    if window_len < 2 || window_len >= total {
        return Err(Error::param("window_len", format!("must be in 2..{total}, got {window_len}")));
    }
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let transitions = find_transitions(rec.labels());
    let candidates: Vec<Window> = transitions.iter().filter_map(|&t| place(t, window_len, total)).collect();
    if candidates.len() < count {
        return Err(Error::InsufficientTransitions { available: max_disjoint(&candidates).len(), requested: count });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = vec![false; candidates.len()];
    let mut accepted: Vec<Window> = Vec::with_capacity(count);
    let fits = |w: &Window, acc: &[Window]| acc.iter().all(|a| !a.overlaps(w));

    for target in target_positions(candidates.len(), count, &mut rng) {
        if let Some(i) = (target..candidates.len()).find(|&i| !used[i] && fits(&candidates[i], &accepted)) {
            used[i] = true;
            accepted.push(candidates[i]);
        }
    }
    if accepted.len() < count {
        for i in 0..candidates.len() {
            if accepted.len() == count {
                break;
            }
            if !used[i] && fits(&candidates[i], &accepted) {
                used[i] = true;
                accepted.push(candidates[i]);
            }
        }
    }
    if accepted.len() < count {
        let best = max_disjoint(&candidates);
        if best.len() < count {
            return Err(Error::InsufficientTransitions { available: best.len(), requested: count });
        }
        accepted = target_positions(best.len(), count, &mut rng).into_iter().map(|p| best[p]).collect();
        accepted.dedup();
        if accepted.len() < count {
            // evenly spaced picks collided; fall back to the first `count`
            accepted = best[..count].to_vec();
        }
    }
    accepted.sort_by_key(|w| w.start);

    let row_source: Vec<usize> = accepted.iter().flat_map(|w| w.start..w.end).collect();
    let rows = rec.select_rows(&row_source)?;
    Ok(EpochSet { windows: accepted, window_len, source_length: total, seed, rows, row_source })
}

/// Plot-ready CSV of one stretch of the recording: time in seconds, every
/// channel, label.
pub fn window_plot_csv<T: Scalar>(rec: &Recording<T>, start: usize, end: usize) -> Result<String> {
    if start >= end || end > rec.len() {
        return Err(Error::param("range", format!("{start}..{end} outside 0..{}", rec.len())));
    }
    let mut out = String::from("time_s");
    for name in rec.names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push_str(",label\n");
    let rate = rec.sample_rate_hz() as f64;
    for t in start..end {
        let _ = write!(out, "{}", t as f64 / rate);
        for ch in rec.channels() {
            let _ = write!(out, ",{}", ch.values[t]);
        }
        let _ = writeln!(out, ",{}", rec.labels()[t]);
    }
    Ok(out)
}
