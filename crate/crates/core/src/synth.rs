//! Deterministic synthetic recordings with the layout of a 14-channel,
//! 128 Hz consumer headset session.
//!
//! The generator mixes four slowly varying latent sources (frontal,
//! temporal, posterior, global) into the channels, adds a shared and a
//! per-channel slow drift plus white noise, and shifts frontal and posterior channels
//! while the eye-state label is 1. A handful of single-sample spikes far above
//! the channel level are injected so outlier removal has work to do.
//!
//! It exists so that every stage of the pipeline can be exercised when the
//! real recording is not at hand; it is not a model of EEG physiology.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ChannelSeries, Label, Recording, DEFAULT_SAMPLE_RATE_HZ};

/// Electrode names in headset order.
pub const ELECTRODES: [&str; 14] = ["AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4"];

/// Resting level of each electrode in µV.
const LEVELS: [f64; 14] =
    [4321.0, 4009.0, 4264.0, 4164.0, 4341.0, 4644.0, 4110.0, 4616.0, 4218.0, 4231.0, 4202.0, 4279.0, 4615.0, 4416.0];

/// Loadings on the frontal, temporal, posterior and global sources.
const MIXING: [[f64; 4]; 14] = [
    [1.0, 0.1, 0.0, 0.5],
    [0.8, 0.4, 0.0, 0.5],
    [0.9, 0.2, 0.1, 0.5],
    [0.5, 0.6, 0.1, 0.5],
    [0.1, 1.0, 0.2, 0.5],
    [0.0, 0.3, 0.9, 0.5],
    [0.0, 0.1, 1.0, 0.5],
    [0.0, 0.1, 1.0, 0.5],
    [0.0, 0.3, 0.9, 0.5],
    [0.1, 1.0, 0.2, 0.5],
    [0.5, 0.6, 0.1, 0.5],
    [0.9, 0.2, 0.1, 0.5],
    [0.8, 0.4, 0.0, 0.5],
    [1.0, 0.1, 0.0, 0.5],
];

/// Loading on the shared slow drift.
const DRIFT_LOAD: [f64; 14] = [1.0, 0.9, 0.95, 0.8, 0.7, 0.85, 0.9, 0.9, 0.85, 0.7, 0.8, 0.95, 0.9, 1.0];

/// Offset in µV applied while the label is 1.
const STATE_SHIFT: [f64; 14] = [14.0, 10.0, 8.0, 4.0, 1.0, -3.0, -6.0, -6.0, -3.0, 1.0, 4.0, 8.0, 10.0, 14.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub length: usize,
    pub seed: u64,
    /// `(timepoint, channel index, value)` spikes written over the signal.
    pub spikes: Vec<(usize, usize, f64)>,
    pub sample_rate_hz: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 14980,
            seed: 7,
            spikes: vec![(1200, 4, 61000.0), (7350, 1, 128000.0), (11900, 6, 310000.0)],
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

/// Label stream of alternating segments: mostly long ones (2.7 to 7.8 s)
/// with occasional short bursts, starting in state 0.
fn labels(length: usize, rng: &mut ChaCha8Rng) -> Vec<Label> {
    let mut out = Vec::with_capacity(length);
    let mut state = 0;
    while out.len() < length {
        let seg = if rng.random_bool(0.2) { rng.random_range(40..200) } else { rng.random_range(350..1000) };
        let seg = seg.min(length - out.len());
        out.extend(std::iter::repeat_n(state, seg));
        state = 1 - state;
    }
    out
}

pub fn synthetic_recording(cfg: &SynthConfig) -> Result<Recording<f64>> {
    if cfg.length < 2 {
        return Err(Error::param("length", "need at least two timepoints"));
    }
    if let Some(&(t, c, _)) = cfg.spikes.iter().find(|&&(t, c, _)| t >= cfg.length || c >= ELECTRODES.len()) {
        return Err(Error::param("spikes", format!("spike at ({t}, {c}) is outside the recording")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels = labels(cfg.length, &mut rng);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");

    let mut sources = [0.0f64; 4];
    let mut shared_drift = 0.0f64;
    let mut drift = [0.0f64; 14];
    let mut shift = 0.0f64;
    let mut values = vec![Vec::with_capacity(cfg.length); ELECTRODES.len()];
    for &label in &labels {
        for s in &mut sources {
            *s = 0.97 * *s + 3.0 * unit.sample(&mut rng);
        }
        shared_drift = 0.9995 * shared_drift + 0.6 * unit.sample(&mut rng);
        // the state offset follows the label with a time constant of ~16 samples
        shift += (f64::from(label) - shift) / 16.0;
        for (c, series) in values.iter_mut().enumerate() {
            drift[c] = 0.999 * drift[c] + 0.2 * unit.sample(&mut rng);
            let mixed: f64 = MIXING[c].iter().zip(&sources).map(|(w, s)| w * s).sum();
            let v = LEVELS[c] + DRIFT_LOAD[c] * shared_drift + drift[c] + mixed + STATE_SHIFT[c] * shift + 2.5 * unit.sample(&mut rng);
            series.push((v * 100.0).round() / 100.0);
        }
    }
    for &(t, c, v) in &cfg.spikes {
        values[c][t] = v;
    }
    let channels = ELECTRODES.iter().zip(values).map(|(n, v)| ChannelSeries::new(*n, v)).collect();
    Recording::new(channels, labels, cfg.sample_rate_hz)
}
