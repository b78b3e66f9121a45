//! Free far-field multichannel scene synthesis with oracle ground truth.

use std::path::PathBuf;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::geometry::{check_angle, UlaConfig};
use crate::scalar::{deg2rad, lit, Cplx, Real};
use crate::spectral::{stft, StftParams};
use crate::sspp::SsppMap;
use crate::wav;

/// Number of independent speech-shaped streams summed into one babble
/// surrogate channel.
pub const BABBLE_TALKERS: usize = 8;

/// Lower edge of the chirp sweep in Hz; the sweep ends at `0.4 * fs`.
pub const CHIRP_START_HZ: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceKind {
    White,
    /// Gaussian noise with a pink-weighted long-term speech envelope.
    Speech,
    Chirp,
    /// White Gaussian noise restricted to `[low_hz, high_hz]`.
    Bandlimited { low_hz: f64, high_hz: f64 },
    Wav { path: PathBuf },
}

impl SourceKind {
    /// Parses the simple tags `white`, `speech`, `chirp`, or `wav:<path>`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "white" => Ok(Self::White),
            "speech" | "speech-shaped" => Ok(Self::Speech),
            "chirp" => Ok(Self::Chirp),
            _ => match tag.strip_prefix("wav:") {
                Some(path) => Ok(Self::Wav { path: path.into() }),
                None => Err(DoaError::UnknownKind(tag.to_owned())),
            },
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Self::White => "white".into(),
            Self::Speech => "speech".into(),
            Self::Chirp => "chirp".into(),
            Self::Bandlimited { low_hz, high_hz } => format!("bandlimited:{low_hz}-{high_hz}"),
            Self::Wav { path } => format!("wav:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    White,
    SpeechShaped,
    /// Sum of [`BABBLE_TALKERS`] independent speech-shaped streams per mic.
    BabbleSurrogate,
}

/// Long-term power envelope of the speech-shaped generator: flat below
/// 400 Hz, falling as 1/f above, and DC removed.
fn speech_power_envelope(f: f64) -> f64 {
    if f < 50.0 {
        0.0
    } else {
        1.0 / (1.0 + f / 400.0)
    }
}

fn gaussian(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Multiplies the spectrum of `x` by the real, even `gain(|f|)`.
fn shape_spectrum(x: &[f64], sample_rate: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k } else { n - k };
        *z *= gain(kk as f64 * sample_rate / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

fn normalize_rms(x: &mut [f64]) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
}

fn speech_shaped(len: usize, sample_rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let white = gaussian(len, rng);
    shape_spectrum(&white, sample_rate, |f| speech_power_envelope(f).sqrt())
}

/// Deterministic source waveform. Synthetic kinds are normalised to unit RMS;
/// WAV input is passed through scaled to unit peak.
pub fn gen_source<T: Real>(kind: &SourceKind, duration: f64, sample_rate: f64, seed: u64) -> Result<Vec<T>> {
    if let SourceKind::Wav { path } = kind {
        let (samples, _rate) = wav::read_mono(path)?;
        return Ok(samples.into_iter().map(lit).collect());
    }
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(DoaError::InvalidParameter("duration and sample rate must be positive".into()));
    }
    let len = (duration * sample_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = match kind {
        SourceKind::White => gaussian(len, &mut rng),
        SourceKind::Speech => speech_shaped(len, sample_rate, &mut rng),
        SourceKind::Chirp => {
            let f1 = 0.4 * sample_rate;
            (0..len)
                .map(|n| {
                    let t = n as f64 / sample_rate;
                    let phase = CHIRP_START_HZ * t + (f1 - CHIRP_START_HZ) * t * t / (2.0 * duration);
                    (std::f64::consts::TAU * phase).sin()
                })
                .collect()
        }
        SourceKind::Bandlimited { low_hz, high_hz } => {
            let (lo, hi) = (*low_hz, *high_hz);
            if !(lo < hi) {
                return Err(DoaError::InvalidParameter(format!("empty band {lo}..{hi} Hz")));
            }
            let white = gaussian(len, &mut rng);
            shape_spectrum(&white, sample_rate, |f| if f >= lo && f <= hi { 1.0 } else { 0.0 })
        }
        SourceKind::Wav { .. } => unreachable!(),
    };
    normalize_rms(&mut x);
    Ok(x.into_iter().map(lit).collect())
}

#[derive(Debug, Clone)]
pub struct SceneSource<T> {
    pub angle: T,
    pub waveform: Vec<T>,
    pub kind: String,
}

#[derive(Debug, Clone)]
pub struct Scene<T> {
    pub sample_rate: T,
    pub sources: Vec<SceneSource<T>>,
    pub noise_kind: NoiseKind,
    /// Source 1 to noise power ratio at the array's central mic; `None`
    /// synthesises a noiseless recording.
    pub snr_db: Option<T>,
    /// Source 1 to each other source power ratio at the central mic.
    pub sir_db: T,
    pub seed: u64,
}

/// Per-source and noise contributions kept alongside the mixture.
#[derive(Debug, Clone)]
pub struct GroundTruth<T> {
    pub angles: Vec<T>,
    /// `clean[q][mic][t]`: scaled, delayed contribution of source `q`.
    pub clean: Vec<Vec<Vec<T>>>,
    /// `noise[mic][t]`.
    pub noise: Vec<Vec<T>>,
}

#[derive(Debug, Clone)]
pub struct MultichannelRecording<T> {
    pub sample_rate: T,
    /// `samples[mic][t]`.
    pub samples: Vec<Vec<T>>,
    pub ground_truth: Option<GroundTruth<T>>,
}

fn sum_sources<T: Real>(clean: &[Vec<Vec<T>>], mics: usize, len: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![T::zero(); len]; mics];
    for src in clean {
        for (acc, ch) in out.iter_mut().zip(src) {
            for (a, &v) in acc.iter_mut().zip(ch) {
                *a += v;
            }
        }
    }
    out
}

impl<T: Real> MultichannelRecording<T> {
    pub fn num_mics(&self) -> usize {
        self.samples.len()
    }

    pub fn num_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Sum of all clean source contributions per mic.
    pub fn clean_total(&self) -> Option<Vec<Vec<T>>> {
        self.ground_truth
            .as_ref()
            .map(|gt| sum_sources(&gt.clean, self.num_mics(), self.num_samples()))
    }

    /// The same scene with the noise component removed.
    pub fn without_noise(&self) -> Option<Self> {
        let gt = self.ground_truth.as_ref()?;
        let samples = self.clean_total()?;
        let mut gt = gt.clone();
        gt.noise = vec![vec![T::zero(); self.num_samples()]; self.num_mics()];
        let samples = samples
            .into_iter()
            .zip(&gt.noise)
            .map(|(c, n)| c.into_iter().zip(n).map(|(a, &b)| a + b).collect())
            .collect();
        Some(Self {
            sample_rate: self.sample_rate,
            samples,
            ground_truth: Some(gt),
        })
    }
}

fn power<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().fold(T::zero(), |acc, &v| acc + v * v) / lit(x.len() as f64)
}

/// Delays `x` by `delays[m]` samples for every output channel using an
/// FFT-domain linear phase on a zero-padded buffer.
fn fractional_delays<T: Real>(x: &[T], delays: &[T], pad: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let np = (n + pad).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(np);
    let inv = planner.plan_fft_inverse(np);
    let mut spec: Vec<Cplx<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    spec.resize(np, Complex::new(T::zero(), T::zero()));
    fwd.process(&mut spec);

    let npf: T = lit(np as f64);
    delays
        .iter()
        .map(|&tau| {
            let mut buf: Vec<Cplx<T>> = spec
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    if 2 * k == np {
                        // Nyquist bin must stay real.
                        return z * (T::pi() * tau).cos();
                    }
                    let kk: T = if k < np / 2 { lit(k as f64) } else { lit(k as f64 - np as f64) };
                    let phase = -T::two_pi() * kk * tau / npf;
                    z * Complex::new(phase.cos(), phase.sin())
                })
                .collect();
            inv.process(&mut buf);
            buf.iter().take(n).map(|z| z.re / npf).collect()
        })
        .collect()
}

fn noise_channel(kind: NoiseKind, len: usize, sample_rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match kind {
        NoiseKind::White => gaussian(len, rng),
        NoiseKind::SpeechShaped => speech_shaped(len, sample_rate, rng),
        NoiseKind::BabbleSurrogate => {
            let mut acc = vec![0.0; len];
            for _ in 0..BABBLE_TALKERS {
                for (a, v) in acc.iter_mut().zip(speech_shaped(len, sample_rate, rng)) {
                    *a += v;
                }
            }
            acc
        }
    }
}

/// Renders `scene` on the array. Source `q` reaches mic `m` delayed by
/// `(m - m_ref) d cos(theta_q) / c`, where `m_ref` is the array's central mic.
pub fn synthesize<T: Real>(scene: &Scene<T>, cfg: &UlaConfig<T>) -> Result<MultichannelRecording<T>> {
    let first = scene.sources.first().ok_or(DoaError::EmptyScene)?;
    let len = first.waveform.len();
    if scene.sources.iter().any(|s| s.waveform.len() != len) {
        return Err(DoaError::ShapeMismatch("source waveforms differ in length".into()));
    }
    if !(scene.sample_rate > T::zero()) {
        return Err(DoaError::InvalidParameter("sample rate must be positive".into()));
    }
    for s in &scene.sources {
        check_angle(s.angle)?;
    }
    let mics = cfg.num_mics();
    let m_ref = cfg.array_reference_index();
    let per_mic_spacing = cfg.mic_spacing() * scene.sample_rate / cfg.speed_of_sound();

    let mut max_delay = T::zero();
    let delays: Vec<Vec<T>> = scene
        .sources
        .iter()
        .map(|s| {
            let unit = per_mic_spacing * deg2rad(s.angle).cos();
            (0..mics)
                .map(|m| {
                    let d = unit * (lit::<T>(m as f64) - lit::<T>(m_ref as f64));
                    if d.abs() > max_delay {
                        max_delay = d.abs();
                    }
                    d
                })
                .collect()
        })
        .collect();
    if max_delay >= lit(len as f64) {
        return Err(DoaError::DelayTooLong {
            delay: max_delay.to_f64_lossy(),
            len,
        });
    }
    let pad = 2 * (max_delay.to_f64_lossy().ceil() as usize) + 16;

    let mut clean: Vec<Vec<Vec<T>>> = scene
        .sources
        .iter()
        .zip(&delays)
        .map(|(s, d)| fractional_delays(&s.waveform, d, pad))
        .collect();

    let p1 = power(&clean[0][m_ref]);
    let sir = lit::<T>(10.0).powf(scene.sir_db / lit(10.0));
    for src in clean.iter_mut().skip(1) {
        let pq = power(&src[m_ref]);
        if pq > T::zero() {
            let g = (p1 / (pq * sir)).sqrt();
            src.iter_mut().flatten().for_each(|v| *v *= g);
        }
    }

    let noise: Vec<Vec<T>> = match scene.snr_db {
        None => vec![vec![T::zero(); len]; mics],
        Some(snr_db) => {
            let mut rng = ChaCha8Rng::seed_from_u64(scene.seed ^ 0x9E37_79B9_7F4A_7C15);
            let fs = scene.sample_rate.to_f64_lossy();
            let raw: Vec<Vec<T>> = (0..mics)
                .map(|_| noise_channel(scene.noise_kind, len, fs, &mut rng).into_iter().map(lit).collect())
                .collect();
            let pn = power(&raw[m_ref]);
            let snr = lit::<T>(10.0).powf(snr_db / lit(10.0));
            let g = if pn > T::zero() { (p1 / (pn * snr)).sqrt() } else { T::zero() };
            raw.into_iter().map(|ch| ch.into_iter().map(|v| v * g).collect()).collect()
        }
    };

    let total = sum_sources(&clean, mics, len);
    let samples = total
        .into_iter()
        .zip(&noise)
        .map(|(c, n)| c.into_iter().zip(n).map(|(a, &b)| a + b).collect())
        .collect();
    Ok(MultichannelRecording {
        sample_rate: scene.sample_rate,
        samples,
        ground_truth: Some(GroundTruth {
            angles: scene.sources.iter().map(|s| s.angle).collect(),
            clean,
            noise,
        }),
    })
}

/// Ground-truth presence probability `|S|^2 / (|S|^2 + |N|^2)` at each
/// sub-array's reference mic, zero where both vanish.
pub fn oracle_sspp<T: Real>(
    recording: &MultichannelRecording<T>,
    cfg: &UlaConfig<T>,
    params: &StftParams,
) -> Result<SsppMap<T>> {
    let gt = recording.ground_truth.as_ref().ok_or(DoaError::MissingGroundTruth)?;
    let clean = recording.clean_total().ok_or(DoaError::MissingGroundTruth)?;
    let refs: Vec<usize> = (0..cfg.num_subarrays()).map(|b| cfg.subarray_reference_mic(b)).collect();
    let pick = |chans: &[Vec<T>]| -> Vec<Vec<T>> { refs.iter().map(|&m| chans[m].clone()).collect() };
    let s = stft(&pick(&clean), recording.sample_rate, params)?;
    let n = stft(&pick(&gt.noise), recording.sample_rate, params)?;
    let (frames, bins, subs) = (s.num_frames(), s.num_bins(), refs.len());
    let mut probs = Vec::with_capacity(frames * bins * subs);
    for l in 0..frames {
        for k in 0..bins {
            for b in 0..subs {
                let ps = s.value(l, k, b).norm_sqr();
                let pn = n.value(l, k, b).norm_sqr();
                let denom = ps + pn;
                let p = if denom > T::zero() { ps / denom } else { T::zero() };
                probs.push(p.max(T::zero()).min(T::one()));
            }
        }
    }
    SsppMap::from_raw(probs, frames, bins, subs)
}

/// Draws `count` DOAs uniformly from `[0, 180]` with sorted neighbours more
/// than `min_separation` degrees apart.
pub fn random_angles(count: usize, min_separation: f64, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut a: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..=180.0)).collect();
        a.sort_by(f64::total_cmp);
        if a.windows(2).all(|w| w[1] - w[0] > min_separation) {
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 16000.0;

    fn cfg() -> UlaConfig<f64> {
        UlaConfig::reference_setup()
    }

    fn scene(angles: &[f64], kind: SourceKind, snr_db: Option<f64>, seed: u64) -> Scene<f64> {
        Scene {
            sample_rate: FS,
            sources: angles
                .iter()
                .enumerate()
                .map(|(i, &a)| SceneSource {
                    angle: a,
                    waveform: gen_source(&kind, 0.5, FS, seed * 31 + i as u64).unwrap(),
                    kind: kind.tag(),
                })
                .collect(),
            noise_kind: NoiseKind::White,
            snr_db,
            sir_db: 0.0,
            seed,
        }
    }

    fn db(x: f64) -> f64 {
        10.0 * x.log10()
    }

    #[test]
    fn sources_are_deterministic() {
        let a: Vec<f64> = gen_source(&SourceKind::White, 1.0, FS, 7).unwrap();
        let b: Vec<f64> = gen_source(&SourceKind::White, 1.0, FS, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16000);
        let c: Vec<f64> = gen_source(&SourceKind::White, 1.0, FS, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(matches!(SourceKind::from_tag("violin"), Err(DoaError::UnknownKind(_))));
        assert_eq!(SourceKind::from_tag("wav:a.wav").unwrap(), SourceKind::Wav { path: "a.wav".into() });
    }

    #[test]
    fn chirp_track_rises() {
        let x: Vec<f64> = gen_source(&SourceKind::Chirp, 1.0, FS, 0).unwrap();
        let s = stft(&[x], FS, &StftParams::default()).unwrap();
        let track: Vec<usize> = (0..s.num_frames())
            .map(|l| {
                (0..s.num_bins())
                    .max_by(|&a, &b| s.value(l, a, 0).norm().total_cmp(&s.value(l, b, 0).norm()))
                    .unwrap()
            })
            .collect();
        assert!(track.windows(2).all(|w| w[1] >= w[0]), "{track:?}");
        assert!(track.last().unwrap() > &(track[0] + 100));
    }

    #[test]
    fn speech_shaped_tilts_down() {
        let x: Vec<f64> = gen_source(&SourceKind::Speech, 2.0, FS, 4).unwrap();
        let s = stft(&[x], FS, &StftParams::default()).unwrap();
        let band = |k0: usize, k1: usize| -> f64 {
            (0..s.num_frames()).flat_map(|l| (k0..k1).map(move |k| (l, k))).map(|(l, k)| s.value(l, k, 0).norm_sqr()).sum()
        };
        assert!(band(10, 20) > 4.0 * band(200, 210));
    }

    #[test]
    fn broadside_channels_identical() {
        let rec = synthesize(&scene(&[90.0], SourceKind::White, None, 1), &cfg()).unwrap();
        for m in 1..16 {
            for (a, b) in rec.samples[0].iter().zip(&rec.samples[m]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn endfire_delay_matches_geometry() {
        // d / c = 58.82 us = 0.941 samples at 16 kHz; check the fractional
        // part survives via the phase of the cross spectrum.
        let rec = synthesize(&scene(&[0.0], SourceKind::White, None, 2), &cfg()).unwrap();
        let expected = 0.02 / 340.0 * FS;
        assert!((0.02f64 / 340.0 - 58.82e-6).abs() < 1e-8);
        let s = stft(&rec.samples, FS, &StftParams::default()).unwrap();
        let mut cross = Complex::new(0.0, 0.0);
        for l in 0..s.num_frames() {
            for k in 5..60 {
                let w = k as f64 * 2.0 * std::f64::consts::PI / 512.0;
                // x_{m+1} = x_m delayed by tau -> phase -w tau.
                cross += s.value(l, k, 9) * s.value(l, k, 8).conj() * Complex::from_polar(1.0, w * expected);
            }
        }
        assert!(cross.arg().abs() < 1e-3, "residual phase {}", cross.arg());
    }

    #[test]
    fn delay_longer_than_waveform_rejected() {
        let mut sc = scene(&[0.0], SourceKind::White, None, 3);
        sc.sources[0].waveform.truncate(5);
        assert!(matches!(synthesize(&sc, &cfg()), Err(DoaError::DelayTooLong { .. })));
        let empty = Scene { sources: vec![], ..sc };
        assert!(matches!(synthesize(&empty, &cfg()), Err(DoaError::EmptyScene)));
    }

    #[test]
    fn snr_and_sir_hit_targets() {
        let mut sc = scene(&[40.0, 100.0, 150.0], SourceKind::Speech, Some(0.0), 9);
        sc.sir_db = 3.0;
        sc.noise_kind = NoiseKind::BabbleSurrogate;
        let rec = synthesize(&sc, &cfg()).unwrap();
        let gt = rec.ground_truth.as_ref().unwrap();
        let r = cfg().array_reference_index();
        let p1 = power(&gt.clean[0][r]);
        assert!(db(p1 / power(&gt.noise[r])).abs() < 0.1);
        for q in 1..3 {
            assert!((db(p1 / power(&gt.clean[q][r])) - 3.0).abs() < 0.1);
        }
    }

    #[test]
    fn mixture_is_additive() {
        let rec = synthesize(&scene(&[30.0, 120.0], SourceKind::Speech, Some(5.0), 5), &cfg()).unwrap();
        let clean = rec.clean_total().unwrap();
        let gt = rec.ground_truth.as_ref().unwrap();
        for ((x, c), n) in rec.samples.iter().zip(&clean).zip(&gt.noise) {
            for ((&x, &c), &n) in x.iter().zip(c).zip(n) {
                assert_eq!(x, c + n);
            }
        }
    }

    #[test]
    fn removing_noise_matches_noiseless_synthesis() {
        let noisy = synthesize(&scene(&[30.0, 120.0], SourceKind::Speech, Some(5.0), 5), &cfg()).unwrap();
        let clean = synthesize(&scene(&[30.0, 120.0], SourceKind::Speech, None, 5), &cfg()).unwrap();
        assert_eq!(noisy.without_noise().unwrap().samples, clean.samples);
    }

    #[test]
    fn oracle_extremes() {
        let params = StftParams::default();
        let clean = synthesize(&scene(&[70.0], SourceKind::White, None, 11), &cfg()).unwrap();
        let map = oracle_sspp(&clean, &cfg(), &params).unwrap();
        assert!(map.values().iter().skip(11).all(|&p| p == 1.0));

        let mut silent = scene(&[70.0], SourceKind::White, Some(0.0), 11);
        silent.sources[0].waveform.iter_mut().for_each(|v| *v = 0.0);
        let rec = synthesize(&silent, &cfg()).unwrap();
        let map = oracle_sspp(&rec, &cfg(), &params).unwrap();
        assert!(map.values().iter().all(|&p| p == 0.0));

        let no_truth = MultichannelRecording { ground_truth: None, ..rec };
        assert!(matches!(oracle_sspp(&no_truth, &cfg(), &params), Err(DoaError::MissingGroundTruth)));
    }

    #[test]
    fn oracle_prefers_source_band() {
        let params = StftParams::default();
        let kind = SourceKind::Bandlimited { low_hz: 1000.0, high_hz: 2000.0 };
        let rec = synthesize(&scene(&[60.0], kind, Some(0.0), 13), &cfg()).unwrap();
        let map = oracle_sspp(&rec, &cfg(), &params).unwrap();
        let mean = |ks: std::ops::Range<usize>| {
            let n = (map.num_frames() * ks.len()) as f64;
            (0..map.num_frames()).flat_map(|l| ks.clone().map(move |k| (l, k))).map(|(l, k)| map.get(l, k, 0)).sum::<f64>() / n
        };
        assert!(mean(34..62) > 0.5);
        assert!(mean(80..120) < 0.05);
    }

    #[test]
    fn random_angles_respect_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = random_angles(4, 5.0, &mut rng);
            assert!(a.iter().all(|&x| (0.0..=180.0).contains(&x)));
            assert!(a.windows(2).all(|w| w[1] - w[0] > 5.0));
        }
    }
}
