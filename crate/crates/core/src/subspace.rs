//! Covariance estimation, signal/noise subspaces, frequency focusing,
//! presence-weighted smoothing and the MUSIC pseudo-spectrum.

use nalgebra::{Complex, ComplexField, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::geometry::{check_angle, steering_matrix, steering_unchecked, UlaConfig};
use crate::scalar::{frob, frob_sq, lit, CMatrix, CVector, Real};

/// Regulariser added to the MUSIC denominator.
pub const MUSIC_EPSILON: f64 = 1e-12;
/// Steered focusing is refused above this condition number of `[A(fk), H]`.
pub const MAX_FOCUS_CONDITION: f64 = 1e8;
/// Largest bandwidth of one focusing sub-bandwidth, Hz.
pub const SUBBAND_WIDTH_HZ: f64 = 500.0;
/// Eigenvalue ratio used by [`SourceCount::Threshold`] by default.
pub const DEFAULT_EIG_RATIO: f64 = 0.05;

/// Observed-signal covariance of one sub-array at one bin.
#[derive(Debug, Clone)]
pub struct Oscm<T: Real> {
    pub matrix: CMatrix<T>,
    pub bin: usize,
    pub subarray: usize,
}

impl<T: Real> Oscm<T> {
    pub fn estimate(snap: &CMatrix<T>, bin: usize, subarray: usize) -> Self {
        Self {
            matrix: estimate_oscm(snap),
            bin,
            subarray,
        }
    }
}

fn hermitian_part<T: Real>(m: CMatrix<T>) -> CMatrix<T> {
    let half: T = lit(0.5);
    let adj = m.adjoint();
    (m + adj).map(|z| z * half)
}

/// Sample covariance `(1/J) X X^H` of an `M x J` snapshot matrix.
pub fn estimate_oscm<T: Real>(snap: &CMatrix<T>) -> CMatrix<T> {
    let j: T = lit(snap.ncols().max(1) as f64);
    hermitian_part(snap * snap.adjoint()).map(|z| z / j)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
pub fn eigh_desc<T: Real>(r: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(r.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<CVector<T>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (values, CMatrix::from_columns(&cols))
}

/// Rotates each column so its largest-magnitude entry is real and positive.
fn normalize_phase<T: Real>(mut v: CMatrix<T>) -> CMatrix<T> {
    for mut col in v.column_iter_mut() {
        let mut best = 0;
        let mut best_mag = T::zero();
        for (i, z) in col.iter().enumerate() {
            let m = z.modulus();
            if m > best_mag {
                best = i;
                best_mag = m;
            }
        }
        if best_mag > T::zero() {
            let rot = col[best].conj() / Complex::new(best_mag, T::zero());
            col.iter_mut().for_each(|z| *z *= rot);
        }
    }
    v
}

/// Signal (top `P`) and noise (remaining `M - P`) subspaces.
#[derive(Debug, Clone)]
pub struct Subspaces<T: Real> {
    pub signal: CMatrix<T>,
    pub noise: CMatrix<T>,
    pub singular_values: Vec<T>,
}

/// How many columns form the signal subspace.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SourceCount {
    /// Source count supplied by the experiment.
    #[default]
    Known,
    /// Count of singular values at least `ratio * largest`.
    Threshold { ratio: f64 },
}

impl SourceCount {
    /// Signal dimension for a covariance with these singular values,
    /// clamped to `1..M`.
    pub fn resolve<T: Real>(&self, known: usize, singular_values: &[T]) -> usize {
        let m = singular_values.len();
        let p = match *self {
            Self::Known => known,
            Self::Threshold { ratio } => {
                let top = singular_values.first().copied().unwrap_or_else(T::zero);
                singular_values.iter().filter(|&&s| s >= lit::<T>(ratio) * top).count()
            }
        };
        p.clamp(1, m.saturating_sub(1).max(1))
    }
}

/// Splits a Hermitian PSD covariance into signal and noise subspaces. For
/// PSD input the eigen-decomposition coincides with the SVD.
pub fn signal_subspace<T: Real>(r: &CMatrix<T>, p: usize) -> Result<Subspaces<T>> {
    let m = r.nrows();
    if r.ncols() != m {
        return Err(DoaError::ShapeMismatch("covariance must be square".into()));
    }
    if p == 0 || p >= m {
        return Err(DoaError::InvalidParameter(format!("signal dimension {p} must be in 1..{m}")));
    }
    let (values, vectors) = eigh_desc(r);
    let vectors = normalize_phase(vectors);
    Ok(Subspaces {
        signal: vectors.columns(0, p).into_owned(),
        noise: vectors.columns(p, m - p).into_owned(),
        singular_values: values,
    })
}

/// Focusing matrix `V0 Vk^H` mapping the bin's signal subspace onto the
/// reference one (`C Vk = V0`). The result is the projector-valued
/// `C C^H = V0 V0^H`, unitary only when `P = M`.
pub fn fss_focusing_matrix<T: Real>(v0: &CMatrix<T>, vk: &CMatrix<T>) -> Result<CMatrix<T>> {
    if v0.shape() != vk.shape() {
        return Err(DoaError::ShapeMismatch(format!("{:?} vs {:?}", v0.shape(), vk.shape())));
    }
    Ok(v0 * vk.adjoint())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceChoice<T> {
    pub bin: usize,
    pub cost: T,
    /// Cost of every candidate, in input order.
    pub costs: Vec<T>,
}

/// Lowest-cost candidate, treating costs within `tol` of the minimum as tied
/// and resolving ties toward the lowest bin index.
fn argmin_lowest_bin<T: Real>(bins: &[usize], costs: Vec<T>, tol: T) -> ReferenceChoice<T> {
    let min = costs.iter().copied().fold(costs[0], |a, b| a.min(b));
    let (i, _) = bins
        .iter()
        .enumerate()
        .filter(|&(i, _)| costs[i] <= min + tol)
        .min_by_key(|&(_, &bin)| bin)
        .expect("non-empty candidate list");
    ReferenceChoice {
        bin: bins[i],
        cost: costs[i],
        costs,
    }
}

/// Exhaustive search of the focusing reference over the retained bins of a
/// window. `subspaces` pairs each bin index with its signal subspace.
pub fn fss_reference_bin<T: Real>(subspaces: &[(usize, &CMatrix<T>)]) -> Result<ReferenceChoice<T>> {
    if subspaces.is_empty() {
        return Err(DoaError::EmptyWindow);
    }
    let costs: Vec<T> = subspaces
        .iter()
        .map(|&(_, v0)| {
            subspaces.iter().fold(T::zero(), |acc, &(_, vk)| {
                let c = v0 * vk.adjoint();
                acc + frob_sq(&(v0 - c * vk))
            })
        })
        .collect();
    let p = subspaces[0].1.ncols().max(1);
    let tol = T::default_epsilon().sqrt() * lit((subspaces.len() * p) as f64);
    let bins: Vec<usize> = subspaces.iter().map(|&(b, _)| b).collect();
    Ok(argmin_lowest_bin(&bins, costs, tol))
}

/// Focused covariance `C R C^H`.
pub fn focus_covariance<T: Real>(c: &CMatrix<T>, r: &CMatrix<T>) -> Result<CMatrix<T>> {
    if c.ncols() != r.nrows() || r.nrows() != r.ncols() {
        return Err(DoaError::ShapeMismatch(format!("C {:?}, R {:?}", c.shape(), r.shape())));
    }
    Ok(hermitian_part(c * r * c.adjoint()))
}

/// `sum_k w_k R_k`. Weights are not normalised.
pub fn weighted_smooth<T: Real>(fcms: &[CMatrix<T>], weights: &[T]) -> Result<CMatrix<T>> {
    if fcms.len() != weights.len() {
        return Err(DoaError::ShapeMismatch(format!("{} covariances, {} weights", fcms.len(), weights.len())));
    }
    if weights.iter().any(|&w| w < T::zero()) {
        return Err(DoaError::InvalidParameter("negative smoothing weight".into()));
    }
    if !weights.iter().any(|&w| w > T::zero()) {
        return Err(DoaError::DegenerateCovariance);
    }
    let m = fcms[0].nrows();
    let mut acc = CMatrix::zeros(m, m);
    for (r, &w) in fcms.iter().zip(weights) {
        if w > T::zero() {
            acc += r.map(|z| z * w);
        }
    }
    Ok(acc)
}

/// Unweighted mean `(1/K) sum_k R_k`.
pub fn uniform_smooth<T: Real>(fcms: &[CMatrix<T>]) -> Result<CMatrix<T>> {
    let first = fcms.first().ok_or(DoaError::DegenerateCovariance)?;
    let k: T = lit(fcms.len() as f64);
    let mut acc = CMatrix::zeros(first.nrows(), first.ncols());
    for r in fcms {
        acc += r;
    }
    Ok(acc.map(|z| z / k))
}

/// Pseudo-spectrum sampled on a uniform grid over `[0, 180]` degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicSpectrum<T> {
    pub angles: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> MusicSpectrum<T> {
    pub fn argmax(&self) -> T {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.angles[best]
    }

    /// Values divided by the spectrum maximum.
    pub fn normalized(&self) -> Vec<T> {
        let max = self.values.iter().copied().fold(T::zero(), |a, b| a.max(b));
        if max > T::zero() {
            self.values.iter().map(|&v| v / max).collect()
        } else {
            self.values.clone()
        }
    }
}

pub fn angle_grid<T: Real>(step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) {
        return Err(DoaError::InvalidParameter("grid step must be positive".into()));
    }
    let n = (lit::<T>(180.0) / step + lit(1e-9)).floor().to_f64_lossy() as usize;
    Ok((0..=n).map(|i| lit::<T>(i as f64) * step).collect())
}

/// `1 / (a^H Un Un^H a + eps)` for every grid angle, with `a` the steering
/// vector at `f0`.
pub fn music_spectrum<T: Real>(noise: &CMatrix<T>, cfg: &UlaConfig<T>, f0: T, grid_step: T) -> Result<MusicSpectrum<T>> {
    if noise.ncols() == 0 {
        return Err(DoaError::InvalidParameter("empty noise subspace".into()));
    }
    if noise.nrows() != cfg.subarray_size() {
        return Err(DoaError::ShapeMismatch(format!(
            "noise basis has {} rows, sub-array {}",
            noise.nrows(),
            cfg.subarray_size()
        )));
    }
    let angles = angle_grid(grid_step)?;
    let un_h = noise.adjoint();
    let eps: T = lit(MUSIC_EPSILON);
    let values = angles
        .iter()
        .map(|&th| {
            let a = steering_unchecked(cfg, f0, th);
            let proj = &un_h * a;
            T::one() / (proj.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) + eps)
        })
        .collect();
    Ok(MusicSpectrum { angles, values })
}

/// Up to `q` local maxima, tallest first, each at least `min_separation`
/// degrees from those already accepted. Endpoints count as maxima when they
/// exceed their single neighbour.
pub fn pick_peaks<T: Real>(spectrum: &MusicSpectrum<T>, q: usize, min_separation: T) -> Vec<T> {
    let v = &spectrum.values;
    let n = v.len();
    if n == 0 || q == 0 {
        return Vec::new();
    }
    let mut maxima: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] > v[i - 1];
            let right = i + 1 == n || v[i] >= v[i + 1];
            left && right && n > 1
        })
        .collect();
    if maxima.is_empty() {
        maxima.push(0);
    }
    maxima.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut out: Vec<T> = Vec::with_capacity(q);
    for i in maxima {
        let th = spectrum.angles[i];
        if out.iter().all(|&a| (a - th).abs() >= min_separation) {
            out.push(th);
            if out.len() == q {
                break;
            }
        }
    }
    out
}

/// `[0_{Q x (M-Q)}; I_{M-Q}]`, the supplementary directional response.
pub fn supplementary_matrix<T: Real>(m: usize, q: usize) -> CMatrix<T> {
    CMatrix::from_fn(m, m - q, |r, c| {
        if r == q + c {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// 2-norm condition number from singular values.
pub fn condition_number<T: Real>(g: &CMatrix<T>) -> T {
    let sv = SVD::new(g.clone(), false, false).singular_values;
    let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = sv.iter().copied().fold(max, |a, b| a.min(b));
    if min > T::zero() {
        max / min
    } else {
        lit(f64::INFINITY)
    }
}

fn check_steered_angles<T: Real>(cfg: &UlaConfig<T>, angles: &[T]) -> Result<()> {
    let m = cfg.subarray_size();
    if angles.is_empty() || angles.len() >= m {
        return Err(DoaError::InvalidParameter(format!(
            "steered focusing needs 1..{m} angles, got {}",
            angles.len()
        )));
    }
    for &a in angles {
        check_angle(a)?;
    }
    for (i, &a) in angles.iter().enumerate() {
        if angles[..i].contains(&a) {
            return Err(DoaError::InvalidParameter("steering angles must be distinct".into()));
        }
    }
    Ok(())
}

/// `[A(f, theta), H]` (M x M).
pub fn augmented_steering<T: Real>(cfg: &UlaConfig<T>, freq: T, angles: &[T]) -> Result<CMatrix<T>> {
    let m = cfg.subarray_size();
    let a = steering_matrix(cfg, freq, angles)?;
    let h = supplementary_matrix::<T>(m, angles.len());
    let mut g = CMatrix::zeros(m, m);
    g.columns_mut(0, angles.len()).copy_from(&a);
    g.columns_mut(angles.len(), m - angles.len()).copy_from(&h);
    Ok(g)
}

/// Steered focusing matrix `G1 G2^-1` with `G1 = [A(f0), H]` and
/// `G2 = [A(fk), H]`; maps `A(fk)` onto `A(f0)` and fixes `H`.
pub fn steered_focusing_matrix<T: Real>(
    cfg: &UlaConfig<T>,
    f0: T,
    fk: T,
    angles: &[T],
    subarray: usize,
) -> Result<CMatrix<T>> {
    check_steered_angles(cfg, angles)?;
    if subarray >= cfg.num_subarrays() {
        return Err(DoaError::InvalidParameter(format!("sub-array {subarray} out of range")));
    }
    let g2 = augmented_steering(cfg, fk, angles)?;
    let cond = condition_number(&g2);
    if !(cond <= lit(MAX_FOCUS_CONDITION)) {
        return Err(DoaError::IllConditioned(cond.to_f64_lossy()));
    }
    let g1 = augmented_steering(cfg, f0, angles)?;
    let g2_inv = g2.lu().try_inverse().ok_or(DoaError::IllConditioned(f64::INFINITY))?;
    Ok(g1 * g2_inv)
}

/// Reference choice for steered refocusing over `bins` (`(index, Hz)`
/// pairs). Every well-conditioned bin drives the steered objective to zero,
/// so candidates are ranked by the worst Frobenius condition number of the
/// resulting focusing matrices; bins whose `[A(fk), H]` exceeds
/// [`MAX_FOCUS_CONDITION`] are excluded.
pub fn iter_reference_bin<T: Real>(cfg: &UlaConfig<T>, bins: &[(usize, T)], angles: &[T]) -> Result<ReferenceChoice<T>> {
    if bins.is_empty() {
        return Err(DoaError::EmptyWindow);
    }
    check_steered_angles(cfg, angles)?;
    let limit: T = lit(MAX_FOCUS_CONDITION);
    let mut usable: Vec<(usize, CMatrix<T>, CMatrix<T>)> = Vec::new();
    for &(bin, f) in bins {
        let g = augmented_steering(cfg, f, angles)?;
        if condition_number(&g) <= limit {
            if let Some(inv) = g.clone().lu().try_inverse() {
                usable.push((bin, g, inv));
            }
        }
    }
    if usable.is_empty() {
        return Err(DoaError::AllIllConditioned);
    }
    let costs: Vec<T> = usable
        .iter()
        .map(|(_, g1, g1_inv)| {
            usable.iter().fold(T::zero(), |worst, (_, g2, g2_inv)| {
                let c = g1 * g2_inv;
                let c_inv = g2 * g1_inv;
                worst.max(frob(&c) * frob(&c_inv))
            })
        })
        .collect();
    let bins: Vec<usize> = usable.iter().map(|(b, _, _)| *b).collect();
    let min = costs.iter().copied().fold(costs[0], |a, b| a.min(b));
    let tol = min * T::default_epsilon().sqrt();
    Ok(argmin_lowest_bin(&bins, costs, tol))
}

/// Windows of at most `width` Hz tiling `bins` from the low edge: window `w`
/// holds the bins with `low + w*width <= f < low + (w+1)*width`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPartition<T> {
    pub windows: Vec<std::ops::Range<usize>>,
    pub width: T,
}

pub fn partition_band<T: Real>(bins: std::ops::Range<usize>, bin_freq: impl Fn(usize) -> T, width: T) -> Result<SubbandPartition<T>> {
    if !(width > T::zero()) {
        return Err(DoaError::InvalidParameter("sub-bandwidth must be positive".into()));
    }
    let mut windows: Vec<std::ops::Range<usize>> = Vec::new();
    if bins.is_empty() {
        return Ok(SubbandPartition { windows, width });
    }
    let low = bin_freq(bins.start);
    let mut current = usize::MAX;
    for k in bins {
        let w = ((bin_freq(k) - low) / width).floor().to_f64_lossy() as usize;
        if w != current {
            windows.push(k..k + 1);
            current = w;
        } else if let Some(last) = windows.last_mut() {
            last.end = k + 1;
        }
    }
    Ok(SubbandPartition { windows, width })
}
