//! Sound-source presence probability, sub-band retention and smoothing
//! weights.

use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::geometry::UlaConfig;
use crate::scalar::{lit, Real};
use crate::simulate::{oracle_sspp, MultichannelRecording};
use crate::spectral::Spectrogram;

/// Paper thresholds for the retention rule.
pub const DEFAULT_T1: f64 = 0.05;
pub const DEFAULT_T2: f64 = 0.1;

/// Length of the running-minimum noise-floor window, seconds.
pub const FLOOR_WINDOW_SECS: f64 = 0.5;
/// Recursive smoothing factor of the periodogram.
pub const POWER_SMOOTHING: f64 = 0.7;
/// Bias compensation applied to the running minimum.
pub const FLOOR_BIAS: f64 = 3.0;
/// Logistic map `p = 1 / (1 + exp(-(xi_db - MID) / SLOPE))`.
pub const LOGISTIC_MID_DB: f64 = 3.0;
pub const LOGISTIC_SLOPE_DB: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SsppMethod {
    /// Ground-truth ratio from the simulator.
    #[default]
    Oracle,
    /// Smoothed a-posteriori SNR against a running-minimum floor.
    Aposteriori,
}

/// Presence probabilities per (frame, bin, sub-array), each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsppMap<T> {
    probs: Vec<T>,
    frames: usize,
    bins: usize,
    subarrays: usize,
}

impl<T: Real> SsppMap<T> {
    pub fn from_raw(probs: Vec<T>, frames: usize, bins: usize, subarrays: usize) -> Result<Self> {
        if probs.len() != frames * bins * subarrays {
            return Err(DoaError::ShapeMismatch(format!(
                "{} probabilities for {frames}x{bins}x{subarrays}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
            return Err(DoaError::InvalidParameter("probability outside [0, 1]".into()));
        }
        Ok(Self {
            probs,
            frames,
            bins,
            subarrays,
        })
    }

    /// Same probability pattern for every frame.
    pub fn constant_in_time(frames: usize, per_bin_sub: impl Fn(usize, usize) -> T, bins: usize, subarrays: usize) -> Result<Self> {
        let mut probs = Vec::with_capacity(frames * bins * subarrays);
        for _ in 0..frames {
            for k in 0..bins {
                for b in 0..subarrays {
                    probs.push(per_bin_sub(k, b));
                }
            }
        }
        Self::from_raw(probs, frames, bins, subarrays)
    }

    pub fn get(&self, frame: usize, bin: usize, subarray: usize) -> T {
        self.probs[(frame * self.bins + bin) * self.subarrays + subarray]
    }

    pub fn values(&self) -> &[T] {
        &self.probs
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn num_subarrays(&self) -> usize {
        self.subarrays
    }

    fn window(&self, frame: usize, j: usize) -> Result<std::ops::RangeInclusive<usize>> {
        if j == 0 || frame + 1 < j || frame >= self.frames {
            return Err(DoaError::InsufficientHistory {
                needed: j,
                frame,
                available: self.frames,
            });
        }
        Ok(frame + 1 - j..=frame)
    }
}

fn logistic<T: Real>(xi_db: T) -> T {
    T::one() / (T::one() + (-(xi_db - lit(LOGISTIC_MID_DB)) / lit(LOGISTIC_SLOPE_DB)).exp())
}

fn aposteriori_channel<T: Real>(spec: &Spectrogram<T>, mic: usize) -> Vec<T> {
    let (frames, bins) = (spec.num_frames(), spec.num_bins());
    let hop_secs = lit::<T>(spec.frame_hop() as f64) / spec.sample_rate();
    let floor_len = ((lit::<T>(FLOOR_WINDOW_SECS) / hop_secs).round().to_f64_lossy() as usize).max(1);
    let alpha: T = lit(POWER_SMOOTHING);

    let mut smoothed = vec![T::zero(); frames * bins];
    for l in 0..frames {
        for k in 0..bins {
            let p = |kk: usize| spec.value(l, kk, mic).norm_sqr();
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(bins - 1);
            let pf = lit::<T>(0.25) * p(lo) + lit::<T>(0.5) * p(k) + lit::<T>(0.25) * p(hi);
            smoothed[l * bins + k] = if l == 0 {
                pf
            } else {
                alpha * smoothed[(l - 1) * bins + k] + (T::one() - alpha) * pf
            };
        }
    }

    let mut out = vec![T::zero(); frames * bins];
    for l in 0..frames {
        let start = (l + 1).saturating_sub(floor_len);
        for k in 0..bins {
            let min = (start..=l).map(|ll| smoothed[ll * bins + k]).fold(smoothed[l * bins + k], |a, b| a.min(b));
            let floor = lit::<T>(FLOOR_BIAS) * min;
            let s = smoothed[l * bins + k];
            out[l * bins + k] = if s <= T::zero() {
                T::zero()
            } else if floor <= T::zero() {
                T::one()
            } else {
                let xi_db = lit::<T>(10.0) * (s / floor).log10();
                logistic(xi_db)
            };
        }
    }
    out
}

/// Presence probabilities at each sub-array's reference mic. `Oracle` needs
/// the recording's ground truth.
pub fn estimate_sspp<T: Real>(
    spec: &Spectrogram<T>,
    cfg: &UlaConfig<T>,
    method: SsppMethod,
    recording: Option<&MultichannelRecording<T>>,
) -> Result<SsppMap<T>> {
    if spec.num_frames() == 0 || spec.num_bins() == 0 {
        return Err(DoaError::InvalidParameter("empty spectrogram".into()));
    }
    match method {
        SsppMethod::Oracle => {
            let rec = recording.ok_or(DoaError::MissingGroundTruth)?;
            oracle_sspp(rec, cfg, spec.params())
        }
        SsppMethod::Aposteriori => {
            let subs = cfg.num_subarrays();
            let per_sub: Vec<Vec<T>> = (0..subs).map(|b| aposteriori_channel(spec, cfg.subarray_reference_mic(b))).collect();
            let (frames, bins) = (spec.num_frames(), spec.num_bins());
            let mut probs = Vec::with_capacity(frames * bins * subs);
            for l in 0..frames {
                for k in 0..bins {
                    for ch in &per_sub {
                        probs.push(ch[l * bins + k]);
                    }
                }
            }
            SsppMap::from_raw(probs, frames, bins, subs)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStats<T> {
    pub std: T,
    pub mean: T,
}

/// A bin is discarded exactly when both its spread and its mean are small.
pub fn discard<T: Real>(stats: BinStats<T>, t1: T, t2: T) -> bool {
    stats.std <= t1 && stats.mean <= t2
}

/// Retention decision per (sub-array, bin) over the snapshot frames.
#[derive(Debug, Clone)]
pub struct SubbandMask<T> {
    retain: Vec<bool>,
    stats: Vec<BinStats<T>>,
    bins: usize,
    subarrays: usize,
}

impl<T: Real> SubbandMask<T> {
    pub fn retained(&self, subarray: usize, bin: usize) -> bool {
        self.retain[subarray * self.bins + bin]
    }

    pub fn stats(&self, subarray: usize, bin: usize) -> BinStats<T> {
        self.stats[subarray * self.bins + bin]
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn num_subarrays(&self) -> usize {
        self.subarrays
    }

    /// Every bin retained, e.g. when presence probabilities are not used.
    pub fn retain_all(subarrays: usize, bins: usize) -> Self {
        Self {
            retain: vec![true; subarrays * bins],
            stats: vec![
                BinStats {
                    std: T::zero(),
                    mean: T::one()
                };
                subarrays * bins
            ],
            bins,
            subarrays,
        }
    }
}

fn bin_stats<T: Real>(sspp: &SsppMap<T>, frames: std::ops::RangeInclusive<usize>, bin: usize, b: usize) -> BinStats<T> {
    let n: T = lit(frames.clone().count() as f64);
    let mean = frames.clone().fold(T::zero(), |a, l| a + sspp.get(l, bin, b)) / n;
    let var = frames.fold(T::zero(), |a, l| {
        let d = sspp.get(l, bin, b) - mean;
        a + d * d
    }) / n;
    BinStats { std: var.sqrt(), mean }
}

/// Standard deviation (population) and mean of the presence probability over
/// the `j` frames ending at `frame`, thresholded per bin.
pub fn select_subbands<T: Real>(sspp: &SsppMap<T>, frame: usize, j: usize, t1: T, t2: T) -> Result<SubbandMask<T>> {
    let frames = sspp.window(frame, j)?;
    let (bins, subs) = (sspp.num_bins(), sspp.num_subarrays());
    let mut retain = Vec::with_capacity(subs * bins);
    let mut stats = Vec::with_capacity(subs * bins);
    for b in 0..subs {
        for k in 0..bins {
            let s = bin_stats(sspp, frames.clone(), k, b);
            retain.push(!discard(s, t1, t2));
            stats.push(s);
        }
    }
    Ok(SubbandMask {
        retain,
        stats,
        bins,
        subarrays: subs,
    })
}

/// Mean presence probability per sub-array and bin over the snapshot frames,
/// indexed `[subarray][bin]`.
pub fn mean_sspp<T: Real>(sspp: &SsppMap<T>, frame: usize, j: usize) -> Result<Vec<Vec<T>>> {
    let frames = sspp.window(frame, j)?;
    let n: T = lit(j as f64);
    Ok((0..sspp.num_subarrays())
        .map(|b| {
            (0..sspp.num_bins())
                .map(|k| frames.clone().fold(T::zero(), |a, l| a + sspp.get(l, k, b)) / n)
                .collect()
        })
        .collect())
}
