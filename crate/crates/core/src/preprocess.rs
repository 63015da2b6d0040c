//! Outlier removal and per-channel zero-centering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Recording;
use crate::scalar::{self, Scalar};

/// Default threshold multiplier: a sample is an outlier above ten times its
/// channel's mean absolute value.
pub const DEFAULT_OUTLIER_FACTOR: f64 = 10.0;

/// Which timepoints were dropped and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    /// Indices into the input recording, strictly increasing.
    pub removed_indices: Vec<usize>,
    /// First channel (in channel order) that exceeded its threshold, one per
    /// removed index.
    pub trigger_channels: Vec<String>,
    pub factor: f64,
    /// Per-channel thresholds `factor * mean(|x|)`, in channel order.
    pub thresholds: Vec<f64>,
    /// Number of removal passes applied.
    pub passes: usize,
}

impl OutlierReport {
    pub fn removed(&self) -> usize {
        self.removed_indices.len()
    }
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor.is_finite() && factor > 1.0) {
        return Err(Error::param("factor", format!("must be a finite value > 1, got {factor}")));
    }
    Ok(())
}

fn one_pass<T: Scalar>(rec: &Recording<T>, factor: f64) -> (Vec<usize>, Vec<String>, Vec<f64>) {
    let f = T::lit(factor);
    let thresholds: Vec<T> = rec
        .channels()
        .iter()
        .map(|c| {
            let abs: Vec<T> = c.values.iter().map(|v| v.abs()).collect();
            f * scalar::mean(&abs)
        })
        .collect();

    let mut removed = Vec::new();
    let mut triggers = Vec::new();
    for t in 0..rec.len() {
        let hit = rec
            .channels()
            .iter()
            .zip(&thresholds)
            .find(|(c, &thr)| c.values[t].abs() > thr);
        if let Some((c, _)) = hit {
            removed.push(t);
            triggers.push(c.name.clone());
        }
    }
    (removed, triggers, thresholds.into_iter().map(Scalar::as_f64).collect())
}

fn drop_rows<T: Scalar>(rec: &Recording<T>, removed: &[usize]) -> Result<Recording<T>> {
    if removed.is_empty() {
        return Ok(rec.clone());
    }
    let mut next = removed.iter().peekable();
    let keep: Vec<usize> = (0..rec.len())
        .filter(|t| {
            if next.peek() == Some(&t) {
                next.next();
                false
            } else {
                true
            }
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyData);
    }
    rec.select_rows(&keep)
}

/// Removes every timepoint where some channel exceeds `factor` times that
/// channel's mean absolute value. Thresholds are computed once on the input;
/// the whole row (all channels and the label) is dropped.
pub fn remove_outliers<T: Scalar>(rec: &Recording<T>, factor: f64) -> Result<(Recording<T>, OutlierReport)> {
    check_factor(factor)?;
    let (removed, triggers, thresholds) = one_pass(rec, factor);
    let out = drop_rows(rec, &removed)?;
    Ok((
        out,
        OutlierReport { removed_indices: removed, trigger_channels: triggers, factor, thresholds, passes: 1 },
    ))
}

/// Repeats [`remove_outliers`] until a pass removes nothing or `max_passes`
/// is reached. Removed indices refer to the original recording; thresholds
/// are those of the last pass.
pub fn remove_outliers_to_fixed_point<T: Scalar>(
    rec: &Recording<T>,
    factor: f64,
    max_passes: usize,
) -> Result<(Recording<T>, OutlierReport)> {
    check_factor(factor)?;
    if max_passes == 0 {
        return Err(Error::param("max_passes", "must be at least 1"));
    }
    let mut current = rec.clone();
    let mut origin: Vec<usize> = (0..rec.len()).collect();
    let mut removed_all: Vec<(usize, String)> = Vec::new();
    let mut thresholds = Vec::new();
    let mut passes = 0;
    while passes < max_passes {
        let (removed, triggers, thr) = one_pass(&current, factor);
        passes += 1;
        thresholds = thr;
        if removed.is_empty() {
            break;
        }
        removed_all.extend(removed.iter().map(|&t| origin[t]).zip(triggers));
        current = drop_rows(&current, &removed)?;
        let mut drop = removed.iter().peekable();
        origin = origin
            .into_iter()
            .enumerate()
            .filter(|(i, _)| {
                if drop.peek() == Some(&i) {
                    drop.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, o)| o)
            .collect();
    }
    removed_all.sort_by_key(|(t, _)| *t);
    let (removed_indices, trigger_channels) = removed_all.into_iter().unzip();
    Ok((current, OutlierReport { removed_indices, trigger_channels, factor, thresholds, passes }))
}

/// Subtracts each channel's arithmetic mean.
pub fn center<T: Scalar>(rec: &Recording<T>) -> Result<Recording<T>> {
    let values = rec
        .channels()
        .iter()
        .map(|c| {
            let m = scalar::mean(&c.values);
            c.values.iter().map(|&v| v - m).collect()
        })
        .collect();
    rec.with_values(values)
}

/// Single-pass outlier removal followed by centering: the standard
/// preparation before connectivity, selection and benchmarking.
pub fn prepare<T: Scalar>(rec: &Recording<T>, factor: f64) -> Result<(Recording<T>, OutlierReport)> {
    let (kept, report) = remove_outliers(rec, factor)?;
    Ok((center(&kept)?, report))
}
