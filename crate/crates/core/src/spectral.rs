//! STFT front end and per-sub-array snapshot assembly.

use std::ops::Range;

use nalgebra::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::geometry::UlaConfig;
use crate::scalar::{lit, CMatrix, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rect,
    #[default]
    Hann,
}

impl Window {
    /// Periodic window of length `len`.
    pub fn coefficients<T: Real>(self, len: usize) -> Vec<T> {
        match self {
            Window::Rect => vec![T::one(); len],
            Window::Hann => (0..len)
                .map(|n| {
                    let x: T = T::two_pi() * lit(n as f64) / lit(len as f64);
                    lit::<T>(0.5) - lit::<T>(0.5) * x.cos()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub fft_size: usize,
    pub hop: usize,
    pub window: Window,
}

impl Default for StftParams {
    /// 512-point Hann, 50% overlap.
    fn default() -> Self {
        Self {
            fft_size: 512,
            hop: 256,
            window: Window::Hann,
        }
    }
}

impl StftParams {
    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(DoaError::InvalidParameter(format!(
                "fft size {} is not a power of two",
                self.fft_size
            )));
        }
        if self.hop == 0 || self.hop > self.fft_size {
            return Err(DoaError::InvalidParameter(format!(
                "hop {} must be in 1..={}",
                self.hop, self.fft_size
            )));
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frames needed to cover `samples` with full windows.
    pub fn num_frames(&self, samples: usize) -> usize {
        if samples < self.fft_size {
            0
        } else {
            (samples - self.fft_size) / self.hop + 1
        }
    }
}

/// One-sided multichannel STFT, stored frame-major then bin then mic.
#[derive(Debug, Clone)]
pub struct Spectrogram<T: Real> {
    values: Vec<Cplx<T>>,
    frames: usize,
    bins: usize,
    mics: usize,
    sample_rate: T,
    params: StftParams,
}

impl<T: Real> Spectrogram<T> {
    #[inline]
    fn idx(&self, frame: usize, bin: usize, mic: usize) -> usize {
        (frame * self.bins + bin) * self.mics + mic
    }

    pub fn value(&self, frame: usize, bin: usize, mic: usize) -> Cplx<T> {
        self.values[self.idx(frame, bin, mic)]
    }

    /// All microphones at one (frame, bin).
    pub fn mics_at(&self, frame: usize, bin: usize) -> &[Cplx<T>] {
        let start = self.idx(frame, bin, 0);
        &self.values[start..start + self.mics]
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn num_mics(&self) -> usize {
        self.mics
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn params(&self) -> &StftParams {
        &self.params
    }

    pub fn frame_hop(&self) -> usize {
        self.params.hop
    }

    pub fn window(&self) -> Window {
        self.params.window
    }

    pub fn bin_freq(&self, bin: usize) -> T {
        lit::<T>(bin as f64) * self.sample_rate / lit(self.params.fft_size as f64)
    }

    pub fn bin_freqs(&self) -> Vec<T> {
        (0..self.bins).map(|k| self.bin_freq(k)).collect()
    }

    /// Bins whose centre frequency lies in `[low_hz, high_hz]`.
    pub fn band_bins(&self, low_hz: T, high_hz: T) -> Range<usize> {
        let lo = (0..self.bins).find(|&k| self.bin_freq(k) >= low_hz).unwrap_or(self.bins);
        let hi = (0..self.bins)
            .rev()
            .find(|&k| self.bin_freq(k) <= high_hz)
            .map_or(0, |k| k + 1);
        lo..hi.max(lo)
    }
}

/// Windowed `fft_size`-point transform of every channel. `samples[m]` is the
/// time series of mic `m`; trailing samples that do not fill a window are
/// dropped.
pub fn stft<T: Real>(samples: &[Vec<T>], sample_rate: T, params: &StftParams) -> Result<Spectrogram<T>> {
    params.validate()?;
    let mics = samples.len();
    let len = samples.iter().map(Vec::len).min().unwrap_or(0);
    if mics == 0 || len < params.fft_size {
        return Err(DoaError::TooFewSamples {
            needed: params.fft_size,
            got: len,
        });
    }
    let k = params.fft_size;
    let bins = params.num_bins();
    let frames = params.num_frames(len);
    let window: Vec<T> = params.window.coefficients(k);
    let fft = FftPlanner::<T>::new().plan_fft_forward(k);

    let mut values = vec![Complex::new(T::zero(), T::zero()); frames * bins * mics];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); k];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for (m, chan) in samples.iter().enumerate() {
        for l in 0..frames {
            let start = l * params.hop;
            for (n, slot) in buf.iter_mut().enumerate() {
                *slot = Complex::new(chan[start + n] * window[n], T::zero());
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (bin, z) in buf.iter().take(bins).enumerate() {
                values[(l * bins + bin) * mics + m] = *z;
            }
        }
    }
    Ok(Spectrogram {
        values,
        frames,
        bins,
        mics,
        sample_rate,
        params: *params,
    })
}

/// Per (sub-array, bin) observation matrices of `J` consecutive frames.
#[derive(Debug, Clone)]
pub struct SnapshotTensor<T: Real> {
    matrices: Vec<CMatrix<T>>,
    bins: Range<usize>,
    bin_freqs: Vec<T>,
    num_subarrays: usize,
    snapshot_count: usize,
    frame_anchor: usize,
}

impl<T: Real> SnapshotTensor<T> {
    /// `M x J` matrix of sub-array `b` at absolute bin `bin`.
    pub fn get(&self, b: usize, bin: usize) -> &CMatrix<T> {
        assert!(self.bins.contains(&bin), "bin {bin} outside {:?}", self.bins);
        &self.matrices[b * self.bins.len() + (bin - self.bins.start)]
    }

    pub fn bins(&self) -> Range<usize> {
        self.bins.clone()
    }

    pub fn bin_freq(&self, bin: usize) -> T {
        self.bin_freqs[bin - self.bins.start]
    }

    pub fn num_subarrays(&self) -> usize {
        self.num_subarrays
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshot_count
    }

    pub fn frame_anchor(&self) -> usize {
        self.frame_anchor
    }

    /// First frame index contributing a column.
    pub fn first_frame(&self) -> usize {
        self.frame_anchor + 1 - self.snapshot_count
    }
}

/// Last `j` frames ending at `frame` for every sub-array window and bin.
pub fn snapshots<T: Real>(spec: &Spectrogram<T>, cfg: &UlaConfig<T>, frame: usize, j: usize) -> Result<SnapshotTensor<T>> {
    snapshots_in_band(spec, cfg, frame, j, 0..spec.num_bins())
}

/// [`snapshots`] restricted to a range of bins.
pub fn snapshots_in_band<T: Real>(
    spec: &Spectrogram<T>,
    cfg: &UlaConfig<T>,
    frame: usize,
    j: usize,
    bins: Range<usize>,
) -> Result<SnapshotTensor<T>> {
    if j == 0 {
        return Err(DoaError::InvalidParameter("snapshot count must be positive".into()));
    }
    if frame + 1 < j || frame >= spec.num_frames() {
        return Err(DoaError::InsufficientHistory {
            needed: j,
            frame,
            available: spec.num_frames(),
        });
    }
    if spec.num_mics() != cfg.num_mics() {
        return Err(DoaError::ShapeMismatch(format!(
            "spectrogram has {} mics, array has {}",
            spec.num_mics(),
            cfg.num_mics()
        )));
    }
    if bins.end > spec.num_bins() {
        return Err(DoaError::ShapeMismatch(format!("bins {bins:?} exceed {}", spec.num_bins())));
    }
    let m = cfg.subarray_size();
    let first = frame + 1 - j;
    let mut matrices = Vec::with_capacity(cfg.num_subarrays() * bins.len());
    for b in 0..cfg.num_subarrays() {
        for bin in bins.clone() {
            matrices.push(CMatrix::from_fn(m, j, |row, col| spec.value(first + col, bin, b + row)));
        }
    }
    Ok(SnapshotTensor {
        matrices,
        bin_freqs: bins.clone().map(|k| spec.bin_freq(k)).collect(),
        bins,
        num_subarrays: cfg.num_subarrays(),
        snapshot_count: j,
        frame_anchor: frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zeros_in_zeros_out() {
        let s = stft(&[vec![0.0f64; 2048]], 16000.0, &StftParams::default()).unwrap();
        assert_eq!(s.num_frames(), 7);
        assert_eq!(s.num_bins(), 257);
        assert!((0..s.num_frames()).all(|l| (0..257).all(|k| s.value(l, k, 0).norm() == 0.0)));
    }

    #[test]
    fn rejects_short_input_and_bad_params() {
        assert!(matches!(
            stft(&[vec![0.0f64; 100]], 16000.0, &StftParams::default()),
            Err(DoaError::TooFewSamples { .. })
        ));
        let bad = StftParams { fft_size: 500, ..StftParams::default() };
        assert!(stft(&[vec![0.0f64; 1000]], 16000.0, &bad).is_err());
        let bad_hop = StftParams { hop: 1024, ..StftParams::default() };
        assert!(stft(&[vec![0.0f64; 1000]], 16000.0, &bad_hop).is_err());
    }

    #[test]
    fn bin_centred_tone_with_rect_window_stays_in_its_bin() {
        let params = StftParams { window: Window::Rect, ..StftParams::default() };
        let fs = 16000.0;
        let bin = 40;
        let f = bin as f64 * fs / 512.0;
        let x: Vec<f64> = (0..4096).map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / fs).cos()).collect();
        let s = stft(&[x], fs, &params).unwrap();
        for l in 0..s.num_frames() {
            let total: f64 = (0..s.num_bins()).map(|k| s.value(l, k, 0).norm_sqr()).sum();
            assert!(s.value(l, bin, 0).norm_sqr() / total > 0.99);
        }
    }

    #[test]
    fn parseval_per_frame() {
        let params = StftParams::default();
        let x = noise(3000, 3);
        let s = stft(std::slice::from_ref(&x), 16000.0, &params).unwrap();
        let w: Vec<f64> = Window::Hann.coefficients(512);
        for l in 0..s.num_frames() {
            let time: f64 = (0..512).map(|n| (x[l * 256 + n] * w[n]).powi(2)).sum();
            let mut freq = 0.0;
            for k in 0..s.num_bins() {
                let e = s.value(l, k, 0).norm_sqr();
                freq += if k == 0 || k == 256 { e } else { 2.0 * e };
            }
            freq /= 512.0;
            assert!((time - freq).abs() / time < 1e-9);
        }
    }

    #[test]
    fn linear_in_its_input() {
        let params = StftParams::default();
        let x = noise(2048, 1);
        let y = noise(2048, 2);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.7 * a - 1.3 * b).collect();
        let sx = stft(&[x], 16000.0, &params).unwrap();
        let sy = stft(&[y], 16000.0, &params).unwrap();
        let sz = stft(&[z], 16000.0, &params).unwrap();
        for l in 0..sx.num_frames() {
            for k in 0..sx.num_bins() {
                let lin = sx.value(l, k, 0) * 0.7 - sy.value(l, k, 0) * 1.3;
                let got = sz.value(l, k, 0);
                assert!((lin - got).norm() <= 1e-12 * got.norm().max(1.0));
            }
        }
    }

    #[test]
    fn band_bins_are_inclusive() {
        let s = stft(&[vec![0.0f64; 512]], 16000.0, &StftParams::default()).unwrap();
        let r = s.band_bins(300.0, 4000.0);
        assert_eq!(r, 10..129);
        assert!((s.bin_freq(16) - 500.0).abs() < 1e-12);
    }

    fn multichannel(mics: usize, len: usize) -> Vec<Vec<f64>> {
        (0..mics).map(|m| noise(len, 100 + m as u64)).collect()
    }

    #[test]
    fn snapshots_slice_trailing_frames() {
        let cfg = UlaConfig::<f64>::reference_setup();
        let x = multichannel(16, 512 + 256 * 45);
        let s = stft(&x, 16000.0, &StftParams::default()).unwrap();
        let t = snapshots(&s, &cfg, 40, 41).unwrap();
        assert_eq!(t.first_frame(), 0);
        let m = t.get(3, 20);
        assert_eq!(m.shape(), (6, 41));
        for col in 0..41 {
            for row in 0..6 {
                assert_eq!(m[(row, col)], s.value(col, 20, 3 + row));
            }
        }

        let one = snapshots(&s, &cfg, 7, 1).unwrap();
        assert_eq!(one.get(0, 5).column(0)[2], s.value(7, 5, 2));

        // Neighbouring sub-arrays share M-1 rows.
        let a = t.get(4, 30);
        let b = t.get(5, 30);
        for row in 0..5 {
            assert_eq!(a.row(row + 1), b.row(row));
        }
    }

    #[test]
    fn snapshots_need_enough_history() {
        let cfg = UlaConfig::<f64>::reference_setup();
        let x = multichannel(16, 512 + 256 * 10);
        let s = stft(&x, 16000.0, &StftParams::default()).unwrap();
        assert!(matches!(snapshots(&s, &cfg, 5, 7), Err(DoaError::InsufficientHistory { .. })));
        assert!(snapshots(&s, &cfg, 30, 2).is_err());
    }
}
