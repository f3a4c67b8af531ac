//! Pitch tracking and intonation-preservation scoring.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum number of frames voiced in both tracks for a pitch correlation.
pub const MIN_COMMON_VOICED: usize = 10;

/// Per-frame F0 in Hz, `0` for unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack<T> {
    pub frame_hz: f64,
    pub values: Vec<T>,
}

impl<T: Scalar> PitchTrack<T> {
    pub fn voiced_count(&self) -> usize {
        self.values.iter().filter(|v| **v > T::zero()).count()
    }
}

/// Settings of the autocorrelation tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Params {
    pub window_s: f64,
    pub hop_s: f64,
    pub f0_min: f64,
    pub f0_max: f64,
    /// Minimum normalised autocorrelation at the chosen lag for a voiced frame.
    pub voicing_threshold: f64,
    /// Frames whose RMS is this many dB (or more) below the loudest frame are unvoiced.
    pub silence_db: f64,
    /// The shortest-lag local peak within this fraction of the best peak wins,
    /// which keeps multiples of the period from being picked.
    pub peak_ratio: f64,
}

impl Default for F0Params {
    fn default() -> Self {
        Self {
            window_s: 0.040,
            hop_s: 0.010,
            f0_min: 50.0,
            f0_max: 600.0,
            voicing_threshold: 0.45,
            silence_db: -40.0,
            peak_ratio: 0.9,
        }
    }
}

/// Pearson product-moment correlation, computed in `f64`.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "sequences have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::DegenerateSequence("fewer than two samples"));
    }
    let n = a.len() as f64;
    let ma = a.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let mb = b.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x.as_f64() - ma, y.as_f64() - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateSequence("zero variance"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Frame-wise normalised-autocorrelation F0 tracker.
///
/// Frames start every `hop_s` seconds and span `window_s` seconds, zero
/// padded past the end of the signal, so there are `ceil(len / hop)` frames.
/// Each frame is mean-removed; the normalised autocorrelation is evaluated on
/// every integer lag in `[sr / f0_max, sr / f0_min]` and the peak is refined
/// by parabolic interpolation.
pub fn estimate_f0<T: Scalar>(samples: &[T], sample_rate: u32, params: &F0Params) -> Result<PitchTrack<T>> {
    if sample_rate < 8000 {
        return Err(Error::Config(format!(
            "sample rate {sample_rate} Hz is below 8 kHz"
        )));
    }
    if !(params.f0_min > 0.0 && params.f0_min < params.f0_max) {
        return Err(Error::Config("need 0 < f0_min < f0_max".into()));
    }
    let sr = sample_rate as f64;
    let win = (params.window_s * sr).round() as usize;
    let hop = ((params.hop_s * sr).round() as usize).max(1);
    let lag_min = ((sr / params.f0_max).floor() as usize).max(2);
    let lag_max = ((sr / params.f0_min).ceil() as usize).min(win.saturating_sub(2));
    if lag_min + 1 >= lag_max {
        return Err(Error::Config(format!(
            "a {} s window cannot resolve {}-{} Hz",
            params.window_s, params.f0_min, params.f0_max
        )));
    }
    let frame_hz = sr / hop as f64;
    if samples.is_empty() {
        return Ok(PitchTrack {
            frame_hz,
            values: Vec::new(),
        });
    }

    let x: Vec<f64> = samples.iter().map(|v| v.as_f64()).collect();
    let n_frames = x.len().div_ceil(hop);
    let frames: Vec<Vec<f64>> = (0..n_frames)
        .map(|f| {
            let start = f * hop;
            let mut w: Vec<f64> = (start..start + win).map(|i| x.get(i).copied().unwrap_or(0.0)).collect();
            let mean = w.iter().sum::<f64>() / win as f64;
            w.iter_mut().for_each(|v| *v -= mean);
            w
        })
        .collect();
    let rms: Vec<f64> = frames
        .iter()
        .map(|w| (w.iter().map(|v| v * v).sum::<f64>() / win as f64).sqrt())
        .collect();
    let loudest = rms.iter().copied().fold(0.0, f64::max);

    let mut values = Vec::with_capacity(n_frames);
    let mut acf = vec![0.0f64; lag_max + 2];
    for (w, &level) in frames.iter().zip(&rms) {
        if loudest == 0.0 || level == 0.0 || 20.0 * (level / loudest).log10() <= params.silence_db {
            values.push(T::zero());
            continue;
        }
        // prefix[i] = Σ_{n<i} w[n]²
        let mut prefix = Vec::with_capacity(win + 1);
        prefix.push(0.0);
        for v in w {
            prefix.push(prefix.last().unwrap() + v * v);
        }
        let total = prefix[win];
        for lag in lag_min - 1..=lag_max + 1 {
            let head = prefix[win - lag];
            let tail = total - prefix[lag];
            let denom = (head * tail).sqrt();
            acf[lag] = if denom > 0.0 {
                w[..win - lag].iter().zip(&w[lag..]).map(|(a, b)| a * b).sum::<f64>() / denom
            } else {
                0.0
            };
        }
        let best = acf[lag_min..=lag_max]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let chosen = (lag_min..=lag_max).find(|&l| {
            acf[l] >= acf[l - 1] && acf[l] >= acf[l + 1] && acf[l] >= params.peak_ratio * best
        });
        match chosen {
            Some(lag) if acf[lag] >= params.voicing_threshold => {
                let (a, b, c) = (acf[lag - 1], acf[lag], acf[lag + 1]);
                let curvature = a - 2.0 * b + c;
                let shift = if curvature < 0.0 {
                    (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
                } else {
                    0.0
                };
                let f0 = (sr / (lag as f64 + shift)).clamp(params.f0_min, params.f0_max);
                values.push(T::of(f0));
            }
            _ => values.push(T::zero()),
        }
    }
    Ok(PitchTrack { frame_hz, values })
}

/// Pearson correlation of two F0 contours over the frames voiced in both.
///
/// The longer track is truncated to the shorter one; no time warping.
pub fn pitch_correlation<T: Scalar>(orig: &PitchTrack<T>, anon: &PitchTrack<T>) -> Result<f64> {
    if orig.values.is_empty() || anon.values.is_empty() {
        return Err(Error::Insufficient("pitch tracks must be non-empty".into()));
    }
    let (a, b): (Vec<T>, Vec<T>) = orig
        .values
        .iter()
        .zip(&anon.values)
        .filter(|(x, y)| **x > T::zero() && **y > T::zero())
        .map(|(x, y)| (*x, *y))
        .unzip();
    if a.len() < MIN_COMMON_VOICED {
        return Err(Error::InsufficientVoicedOverlap {
            found: a.len(),
            required: MIN_COMMON_VOICED,
        });
    }
    pearson(&a, &b)
}
