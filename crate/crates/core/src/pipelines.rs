//! End-to-end estimators: ISS, SSB-ISS, FSS, SSPP-FSS and SSPP-WEM-FSS.
//!
//! All methods consume one shared [`FrontEnd`], so for a given recording and
//! parameter set they see identical snapshots, covariances and presence maps.

use std::cell::RefCell;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::fusion::{assign_to_prior, associate, cross_iterate, CrossIterOutcome, CrossIterParams, DoaMatrix, Refocus, Refocused};
use crate::geometry::UlaConfig;
use crate::scalar::{lit, CMatrix, Real};
use crate::simulate::MultichannelRecording;
use crate::spectral::{snapshots_in_band, stft, SnapshotTensor, StftParams, Window};
use crate::sspp::{estimate_sspp, mean_sspp, select_subbands, SsppMethod, SubbandMask, DEFAULT_T1, DEFAULT_T2};
use crate::subspace::{
    angle_grid, eigh_desc, estimate_oscm, focus_covariance, fss_focusing_matrix, fss_reference_bin, iter_reference_bin, music_spectrum,
    partition_band, pick_peaks, signal_subspace, steered_focusing_matrix, uniform_smooth, weighted_smooth, MusicSpectrum, SourceCount,
    SubbandPartition, SUBBAND_WIDTH_HZ,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Iss,
    SsbIss,
    Fss,
    SsppFss,
    SsppWemFss,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Iss, Method::SsbIss, Method::Fss, Method::SsppFss, Method::SsppWemFss];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Iss => "iss",
            Method::SsbIss => "ssb-iss",
            Method::Fss => "fss",
            Method::SsppFss => "sspp-fss",
            Method::SsppWemFss => "sspp-wem-fss",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = DoaError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| DoaError::UnknownKind(format!("method `{s}`")))
    }
}

/// Knobs shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodParams {
    pub snapshots: usize,
    pub fft_size: usize,
    pub hop: usize,
    pub grid_step: f64,
    pub t1: f64,
    pub t2: f64,
    pub subband_width: f64,
    pub max_iter: usize,
    pub sources: usize,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub min_peak_separation: f64,
    pub source_count: SourceCount,
    pub sspp: SsppMethod,
    /// Analysis frame; defaults to the last complete frame.
    pub frame: Option<usize>,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            snapshots: 41,
            fft_size: 512,
            hop: 256,
            grid_step: 0.5,
            t1: DEFAULT_T1,
            t2: DEFAULT_T2,
            subband_width: SUBBAND_WIDTH_HZ,
            max_iter: 25,
            sources: 2,
            band_low_hz: 300.0,
            band_high_hz: 4000.0,
            min_peak_separation: 3.0,
            source_count: SourceCount::Known,
            sspp: SsppMethod::Oracle,
            frame: None,
        }
    }
}

impl MethodParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(DoaError::InvalidConfig(what.to_string()));
        if self.snapshots == 0 || self.max_iter == 0 || self.sources == 0 {
            return bad("snapshots, max_iter and sources must be positive");
        }
        for (name, v) in [
            ("grid_step", self.grid_step),
            ("subband_width", self.subband_width),
            ("band_high_hz", self.band_high_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.t1 >= 0.0 && self.t2 >= 0.0 && self.min_peak_separation >= 0.0) {
            return bad("thresholds must be non-negative");
        }
        if !(self.band_low_hz >= 0.0 && self.band_low_hz < self.band_high_hz) {
            return bad("band_low_hz must lie below band_high_hz");
        }
        self.stft().validate()
    }

    pub fn stft(&self) -> StftParams {
        StftParams {
            fft_size: self.fft_size,
            hop: self.hop,
            window: Window::Hann,
        }
    }
}

/// Snapshots, covariances and presence statistics of one analysis frame.
#[derive(Debug, Clone)]
pub struct FrontEnd<T: Real> {
    pub cfg: UlaConfig<T>,
    pub params: MethodParams,
    pub band: Range<usize>,
    pub snapshots: SnapshotTensor<T>,
    oscm: Vec<CMatrix<T>>,
    pub mask: SubbandMask<T>,
    /// Mean presence probability, `[subarray][bin]`.
    pub pbar: Vec<Vec<T>>,
    pub partition: SubbandPartition<T>,
    /// True DOAs, when the recording carries ground truth.
    pub truth: Option<Vec<T>>,
}

impl<T: Real> FrontEnd<T> {
    pub fn prepare(rec: &MultichannelRecording<T>, cfg: &UlaConfig<T>, params: &MethodParams) -> Result<Self> {
        params.validate()?;
        if params.sources >= cfg.subarray_size() {
            return Err(DoaError::InvalidConfig(format!(
                "{} sources need more than {} mics per sub-array",
                params.sources,
                cfg.subarray_size()
            )));
        }
        let spec = stft(&rec.samples, rec.sample_rate, &params.stft())?;
        if spec.num_frames() == 0 {
            return Err(DoaError::TooFewSamples {
                needed: params.fft_size,
                got: rec.num_samples(),
            });
        }
        let frame = params.frame.unwrap_or(spec.num_frames() - 1);
        let band = spec.band_bins(lit(params.band_low_hz), lit(params.band_high_hz));
        if band.is_empty() {
            return Err(DoaError::InvalidConfig("processing band holds no bins".into()));
        }
        let snapshots = snapshots_in_band(&spec, cfg, frame, params.snapshots, band.clone())?;
        let oscm = (0..cfg.num_subarrays())
            .flat_map(|b| band.clone().map(move |k| (b, k)))
            .map(|(b, k)| estimate_oscm(snapshots.get(b, k)))
            .collect();
        let sspp = estimate_sspp(&spec, cfg, params.sspp, Some(rec))?;
        let mask = select_subbands(&sspp, frame, params.snapshots, lit(params.t1), lit(params.t2))?;
        let pbar = mean_sspp(&sspp, frame, params.snapshots)?;
        let partition = partition_band(band.clone(), |k| spec.bin_freq(k), lit(params.subband_width))?;
        Ok(Self {
            cfg: cfg.clone(),
            params: params.clone(),
            band,
            snapshots,
            oscm,
            mask,
            pbar,
            partition,
            truth: rec.ground_truth.as_ref().map(|g| g.angles.clone()),
        })
    }

    pub fn oscm(&self, subarray: usize, bin: usize) -> &CMatrix<T> {
        &self.oscm[subarray * self.band.len() + (bin - self.band.start)]
    }

    pub fn bin_freq(&self, bin: usize) -> T {
        self.snapshots.bin_freq(bin)
    }

    pub fn num_subarrays(&self) -> usize {
        self.cfg.num_subarrays()
    }

    /// Bins of `range` retained for sub-array `b`.
    pub fn retained_in(&self, b: usize, range: Range<usize>) -> Vec<usize> {
        range.filter(|&k| self.mask.retained(b, k)).collect()
    }

    fn grid_step(&self) -> T {
        lit(self.params.grid_step)
    }

    /// Signal dimension for a covariance.
    fn signal_dim(&self, r: &CMatrix<T>) -> usize {
        let (values, _) = eigh_desc(r);
        self.params.source_count.resolve(self.params.sources, &values)
    }

    /// MUSIC on `r` at `f0`: peaks and the spectrum.
    fn music(&self, r: &CMatrix<T>, f0: T) -> Result<(Vec<T>, MusicSpectrum<T>)> {
        let p = self.signal_dim(r);
        let sub = signal_subspace(r, p)?;
        let spectrum = music_spectrum(&sub.noise, &self.cfg, f0, self.grid_step())?;
        let peaks = pick_peaks(&spectrum, p.min(self.params.sources), lit(self.params.min_peak_separation));
        Ok((peaks, spectrum))
    }
}

/// Running mean of normalised spectra on a shared grid.
#[derive(Debug, Clone)]
struct SpectrumAccumulator<T> {
    angles: Vec<T>,
    sum: Vec<T>,
    count: usize,
}

impl<T: Real> SpectrumAccumulator<T> {
    fn new(grid_step: T) -> Result<Self> {
        let angles = angle_grid(grid_step)?;
        let sum = vec![T::zero(); angles.len()];
        Ok(Self { angles, sum, count: 0 })
    }

    fn add(&mut self, s: &MusicSpectrum<T>) {
        for (acc, v) in self.sum.iter_mut().zip(s.normalized()) {
            *acc += v;
        }
        self.count += 1;
    }

    fn add_values(&mut self, values: &[T]) {
        for (acc, &v) in self.sum.iter_mut().zip(values) {
            *acc += v;
        }
        self.count += 1;
    }

    fn finish(self) -> MusicSpectrum<T> {
        let n: T = lit(self.count.max(1) as f64);
        let values = self.sum.into_iter().map(|v| v / n).collect();
        let s = MusicSpectrum { angles: self.angles, values };
        MusicSpectrum {
            values: s.normalized(),
            angles: s.angles,
        }
    }
}

/// Per-source mean over the detected cells of each row.
fn row_means<T: Real>(doa: &DoaMatrix<T>) -> Vec<Option<T>> {
    (0..doa.num_sources())
        .map(|q| {
            let vals: Vec<T> = doa.row(q).iter().flatten().copied().collect();
            (!vals.is_empty()).then(|| vals.iter().fold(T::zero(), |a, &b| a + b) / lit(vals.len() as f64))
        })
        .collect()
}

/// Source-wise mean of several peak lists, matched by rank.
fn rank_mean<T: Real>(lists: &[Vec<T>], sources: usize) -> Vec<T> {
    row_means(&associate(lists, sources, None)).into_iter().flatten().collect()
}

/// Focusing reference chosen for one sub-array and window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowState {
    pub subarray: usize,
    pub window: usize,
    pub ref_bin: usize,
}

#[derive(Debug, Clone)]
pub struct MethodOutput<T: Real> {
    pub method: Method,
    /// One angle per detected source.
    pub estimates: Vec<T>,
    /// Per-sub-array estimates, sources by rows.
    pub doa: DoaMatrix<T>,
    /// Mean normalised MUSIC spectrum over sub-arrays (and bins or windows).
    pub spectrum: MusicSpectrum<T>,
    pub windows: Vec<WindowState>,
    pub iteration: Option<CrossIterOutcome<T>>,
}

/// Assembles a baseline output: per-sub-array lists fused by rank-matched
/// means.
fn fuse_baseline<T: Real>(
    method: Method,
    fe: &FrontEnd<T>,
    per_subarray: Vec<Vec<T>>,
    spectrum: MusicSpectrum<T>,
    windows: Vec<WindowState>,
) -> MethodOutput<T> {
    let doa = associate(&per_subarray, fe.params.sources, None);
    MethodOutput {
        method,
        estimates: row_means(&doa).into_iter().flatten().collect(),
        doa,
        spectrum,
        windows,
        iteration: None,
    }
}

/// Incoherent signal subspace: narrowband MUSIC at every processing bin,
/// peaks averaged per sub-array.
pub fn run_iss<T: Real>(fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    let mut acc = SpectrumAccumulator::new(fe.grid_step())?;
    let mut per_subarray = Vec::with_capacity(fe.num_subarrays());
    for b in 0..fe.num_subarrays() {
        let mut lists = Vec::with_capacity(fe.band.len());
        let mut sub_acc = SpectrumAccumulator::new(fe.grid_step())?;
        for k in fe.band.clone() {
            let (peaks, spec) = fe.music(fe.oscm(b, k), fe.bin_freq(k))?;
            sub_acc.add(&spec);
            lists.push(peaks);
        }
        if lists.is_empty() {
            return Err(DoaError::NoRetainedBins);
        }
        acc.add_values(&sub_acc.finish().values);
        per_subarray.push(rank_mean(&lists, fe.params.sources));
    }
    Ok(fuse_baseline(Method::Iss, fe, per_subarray, acc.finish(), Vec::new()))
}

/// Bin used by single-sub-band ISS for sub-array `b`: the retained bin with
/// highest mean presence, ties toward the band centre; with nothing retained,
/// the band centre itself.
pub fn ssb_bin<T: Real>(fe: &FrontEnd<T>, b: usize) -> usize {
    let centre = fe.band.start + (fe.band.len() - 1) / 2;
    let retained = fe.retained_in(b, fe.band.clone());
    let mut best: Option<usize> = None;
    for &k in &retained {
        best = match best {
            None => Some(k),
            Some(cur) => {
                let (pk, pc) = (fe.pbar[b][k], fe.pbar[b][cur]);
                if pk > pc || (pk == pc && k.abs_diff(centre) < cur.abs_diff(centre)) {
                    Some(k)
                } else {
                    Some(cur)
                }
            }
        };
    }
    best.unwrap_or(centre)
}

pub fn run_ssb_iss<T: Real>(fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    let mut acc = SpectrumAccumulator::new(fe.grid_step())?;
    let mut per_subarray = Vec::with_capacity(fe.num_subarrays());
    let mut windows = Vec::new();
    for b in 0..fe.num_subarrays() {
        let k = ssb_bin(fe, b);
        let (peaks, spec) = fe.music(fe.oscm(b, k), fe.bin_freq(k))?;
        acc.add(&spec);
        per_subarray.push(peaks);
        windows.push(WindowState {
            subarray: b,
            window: 0,
            ref_bin: k,
        });
    }
    Ok(fuse_baseline(Method::SsbIss, fe, per_subarray, acc.finish(), windows))
}

/// Reference search, subspace focusing and smoothing over `bins` of one
/// sub-array; `weights` of `None` smooths uniformly.
fn subspace_focus<T: Real>(fe: &FrontEnd<T>, b: usize, bins: &[usize], weights: Option<&[T]>) -> Result<(usize, CMatrix<T>)> {
    if bins.is_empty() {
        return Err(DoaError::EmptyWindow);
    }
    let covs: Vec<CMatrix<T>> = bins.iter().map(|&k| fe.oscm(b, k).clone()).collect();
    let p = fe.signal_dim(&uniform_smooth(&covs)?);
    let subspaces = covs.iter().map(|r| signal_subspace(r, p).map(|s| s.signal)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, &CMatrix<T>)> = bins.iter().copied().zip(subspaces.iter()).collect();
    let choice = fss_reference_bin(&pairs)?;
    let i0 = bins.iter().position(|&k| k == choice.bin).expect("reference among candidates");
    let fcms = covs
        .iter()
        .zip(&subspaces)
        .map(|(r, vk)| focus_covariance(&fss_focusing_matrix(&subspaces[i0], vk)?, r))
        .collect::<Result<Vec<_>>>()?;
    let smoothed = match weights {
        Some(w) => weighted_smooth(&fcms, w)?,
        None => uniform_smooth(&fcms)?,
    };
    Ok((choice.bin, smoothed))
}

/// Focusing signal subspace over the whole processing band.
pub fn run_fss<T: Real>(fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    let mut acc = SpectrumAccumulator::new(fe.grid_step())?;
    let mut per_subarray = Vec::with_capacity(fe.num_subarrays());
    let mut windows = Vec::new();
    let bins: Vec<usize> = fe.band.clone().collect();
    for b in 0..fe.num_subarrays() {
        let (f0, r) = subspace_focus(fe, b, &bins, None)?;
        let (peaks, spec) = fe.music(&r, fe.bin_freq(f0))?;
        acc.add(&spec);
        per_subarray.push(peaks);
        windows.push(WindowState {
            subarray: b,
            window: 0,
            ref_bin: f0,
        });
    }
    Ok(fuse_baseline(Method::Fss, fe, per_subarray, acc.finish(), windows))
}

/// Presence-selected, presence-weighted focusing per sub-bandwidth window.
/// Windows with no retained bin (or zero total weight) are skipped; a
/// sub-array with no usable window reports nothing.
pub fn run_sspp_fss<T: Real>(fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    let mut acc = SpectrumAccumulator::new(fe.grid_step())?;
    let mut per_subarray = Vec::with_capacity(fe.num_subarrays());
    let mut windows = Vec::new();
    let mut any_retained = false;
    for b in 0..fe.num_subarrays() {
        let mut lists = Vec::new();
        for (w, range) in fe.partition.windows.iter().enumerate() {
            let bins = fe.retained_in(b, range.clone());
            if bins.is_empty() {
                continue;
            }
            any_retained = true;
            let weights: Vec<T> = bins.iter().map(|&k| fe.pbar[b][k]).collect();
            let (f0, r) = match subspace_focus(fe, b, &bins, Some(&weights)) {
                Ok(x) => x,
                Err(DoaError::DegenerateCovariance) => continue,
                Err(e) => return Err(e),
            };
            let (peaks, spec) = fe.music(&r, fe.bin_freq(f0))?;
            acc.add(&spec);
            lists.push(peaks);
            windows.push(WindowState {
                subarray: b,
                window: w,
                ref_bin: f0,
            });
        }
        per_subarray.push(rank_mean(&lists, fe.params.sources));
    }
    if !any_retained {
        return Err(DoaError::NoRetainedBins);
    }
    Ok(fuse_baseline(Method::SsppFss, fe, per_subarray, acc.finish(), windows))
}

/// Steered refocusing at corrected DOAs, used inside the cross iteration.
pub struct SteeredRefocus<'a, T: Real> {
    fe: &'a FrontEnd<T>,
    last_spectrum: RefCell<Option<MusicSpectrum<T>>>,
}

impl<'a, T: Real> SteeredRefocus<'a, T> {
    pub fn new(fe: &'a FrontEnd<T>) -> Self {
        Self {
            fe,
            last_spectrum: RefCell::new(None),
        }
    }

    /// Spectrum of the most recent refocusing.
    pub fn last_spectrum(&self) -> Option<MusicSpectrum<T>> {
        self.last_spectrum.borrow().clone()
    }

    /// Distinct detected angles, in source order.
    fn steering_angles(angles: &[Option<T>]) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for a in angles.iter().flatten() {
            if !out.contains(a) {
                out.push(*a);
            }
        }
        out
    }

    /// Bins of window `w` retained by at least one sub-array.
    fn window_candidates(&self, range: Range<usize>) -> Vec<usize> {
        range
            .filter(|&k| (0..self.fe.num_subarrays()).any(|b| self.fe.mask.retained(b, k)))
            .collect()
    }

    fn window_refs(&self, steer: &[T]) -> Result<Vec<Option<usize>>> {
        if steer.is_empty() {
            return Err(DoaError::AllMissing);
        }
        self.fe
            .partition
            .windows
            .iter()
            .map(|range| {
                let cands: Vec<(usize, T)> = self.window_candidates(range.clone()).into_iter().map(|k| (k, self.fe.bin_freq(k))).collect();
                match iter_reference_bin(&self.fe.cfg, &cands, steer) {
                    Ok(c) => Ok(Some(c.bin)),
                    Err(DoaError::EmptyWindow | DoaError::AllIllConditioned) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }

    /// Fallback focusing of `bin` onto `f0` from signal subspaces.
    fn subspace_matrix(&self, b: usize, f0: usize, bin: usize, p: usize) -> Result<CMatrix<T>> {
        let v0 = signal_subspace(self.fe.oscm(b, f0), p)?.signal;
        let vk = signal_subspace(self.fe.oscm(b, bin), p)?.signal;
        fss_focusing_matrix(&v0, &vk)
    }
}

impl<T: Real> Refocus<T> for SteeredRefocus<'_, T> {
    fn reference_bins(&self, angles: &[Option<T>]) -> Result<Vec<Option<usize>>> {
        self.window_refs(&Self::steering_angles(angles))
    }

    fn refocus(&self, angles: &[Option<T>]) -> Result<Refocused<T>> {
        let fe = self.fe;
        let steer = Self::steering_angles(angles);
        let refs = self.window_refs(&steer)?;
        if refs.iter().all(Option::is_none) {
            return Err(DoaError::AllIllConditioned);
        }
        let subs = fe.num_subarrays();
        let mut lists: Vec<Vec<Vec<Option<T>>>> = vec![Vec::new(); subs];
        let mut acc = SpectrumAccumulator::new(fe.grid_step())?;
        for (range, f0) in fe.partition.windows.iter().zip(&refs) {
            let Some(f0) = *f0 else { continue };
            let freq0 = fe.bin_freq(f0);
            // Steering is shift-invariant across sub-arrays, so one matrix
            // per bin serves all of them.
            let steered: Vec<(usize, Option<CMatrix<T>>)> = self
                .window_candidates(range.clone())
                .into_iter()
                .map(|k| {
                    let c = match steered_focusing_matrix(&fe.cfg, freq0, fe.bin_freq(k), &steer, 0) {
                        Ok(c) => Ok(Some(c)),
                        Err(DoaError::IllConditioned(_)) => Ok(None),
                        Err(e) => Err(e),
                    };
                    c.map(|c| (k, c))
                })
                .collect::<Result<_>>()?;
            for (b, out) in lists.iter_mut().enumerate() {
                let mut fcms = Vec::new();
                let mut weights = Vec::new();
                let mut p_fallback = None;
                for (k, c) in &steered {
                    if !fe.mask.retained(b, *k) {
                        continue;
                    }
                    let c = match c {
                        Some(c) => c.clone(),
                        None => {
                            let p = *p_fallback.get_or_insert_with(|| fe.signal_dim(fe.oscm(b, f0)));
                            self.subspace_matrix(b, f0, *k, p)?
                        }
                    };
                    fcms.push(focus_covariance(&c, fe.oscm(b, *k))?);
                    weights.push(fe.pbar[b][*k]);
                }
                if fcms.is_empty() {
                    continue;
                }
                let r = match weighted_smooth(&fcms, &weights) {
                    Ok(r) => r,
                    Err(DoaError::DegenerateCovariance) => continue,
                    Err(e) => return Err(e),
                };
                let (peaks, spec) = fe.music(&r, freq0)?;
                acc.add(&spec);
                out.push(assign_to_prior(&peaks, angles));
            }
        }
        let mut doa = DoaMatrix::empty(angles.len(), subs);
        for (b, windows) in lists.iter().enumerate() {
            for q in 0..angles.len() {
                let vals: Vec<T> = windows.iter().filter_map(|w| w[q]).collect();
                if !vals.is_empty() {
                    doa.set(q, b, Some(vals.iter().fold(T::zero(), |a, &v| a + v) / lit(vals.len() as f64)));
                }
            }
        }
        if (0..angles.len()).all(|q| doa.row(q).iter().all(Option::is_none)) {
            return Err(DoaError::AllMissing);
        }
        *self.last_spectrum.borrow_mut() = Some(acc.finish());
        Ok(Refocused { doa, ref_bins: refs })
    }

    fn bin_freq(&self, bin: usize) -> T {
        self.fe.bin_freq(bin)
    }
}

/// SSPP-FSS followed by weighted-error cross iteration.
pub fn run_sspp_wem_fss<T: Real>(fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    let initial = run_sspp_fss(fe)?;
    let refocuser = SteeredRefocus::new(fe);
    let params = CrossIterParams {
        max_iter: fe.params.max_iter,
        grid_step: fe.grid_step(),
    };
    let outcome = cross_iterate(&initial.doa, &refocuser, &params, fe.truth.as_deref());
    let estimates: Vec<T> = outcome.corrected.iter().flatten().copied().collect();
    if estimates.is_empty() {
        return Err(DoaError::AllMissing);
    }
    Ok(MethodOutput {
        method: Method::SsppWemFss,
        estimates,
        doa: outcome.doa.clone(),
        spectrum: refocuser.last_spectrum().unwrap_or(initial.spectrum),
        windows: initial.windows,
        iteration: Some(outcome),
    })
}

pub fn run_method<T: Real>(method: Method, fe: &FrontEnd<T>) -> Result<MethodOutput<T>> {
    match method {
        Method::Iss => run_iss(fe),
        Method::SsbIss => run_ssb_iss(fe),
        Method::Fss => run_fss(fe),
        Method::SsppFss => run_sspp_fss(fe),
        Method::SsppWemFss => run_sspp_wem_fss(fe),
    }
}
