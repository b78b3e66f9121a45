//! Uniform linear array geometry and far-field steering vectors.
//!
//! Angles are measured from the array axis: endfire at 0 deg, broadside at
//! 90 deg. Microphone `m` of a sub-array sees a plane wave delayed by
//! `(m - ref_offset) * d * cos(theta) / c` relative to the sub-array's
//! reference microphone.

use std::ops::Range;

use nalgebra::{Complex, DMatrix};

use crate::error::{DoaError, Result};
use crate::scalar::{deg2rad, lit, CMatrix, CVector, Real};

/// ULA of `num_mics = M + B` microphones split into `B + 1` overlapping
/// sub-arrays of `M` microphones each.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaConfig<T> {
    num_mics: usize,
    subarray_size: usize,
    mic_spacing: T,
    speed_of_sound: T,
    ref_offset: usize,
}

impl<T: Real> UlaConfig<T> {
    /// Reference microphone defaults to the center of the sub-array
    /// (`floor(M / 2)`, 0-based).
    pub fn new(num_mics: usize, subarray_size: usize, mic_spacing: T, speed_of_sound: T) -> Result<Self> {
        Self::with_ref_offset(num_mics, subarray_size, mic_spacing, speed_of_sound, subarray_size / 2)
    }

    pub fn with_ref_offset(
        num_mics: usize,
        subarray_size: usize,
        mic_spacing: T,
        speed_of_sound: T,
        ref_offset: usize,
    ) -> Result<Self> {
        if subarray_size < 2 {
            return Err(DoaError::InvalidConfig(format!(
                "sub-array size {subarray_size} must be at least 2"
            )));
        }
        if num_mics <= subarray_size {
            return Err(DoaError::InvalidConfig(format!(
                "array of {num_mics} mics cannot host more than one sub-array of {subarray_size}"
            )));
        }
        if !(mic_spacing > T::zero()) {
            return Err(DoaError::InvalidConfig("mic spacing must be positive".into()));
        }
        if !(speed_of_sound > T::zero()) {
            return Err(DoaError::InvalidConfig("speed of sound must be positive".into()));
        }
        if ref_offset >= subarray_size {
            return Err(DoaError::InvalidConfig(format!(
                "reference offset {ref_offset} outside sub-array of {subarray_size}"
            )));
        }
        Ok(Self {
            num_mics,
            subarray_size,
            mic_spacing,
            speed_of_sound,
            ref_offset,
        })
    }

    /// 16 mics, sub-arrays of 6, 2 cm spacing, 340 m/s.
    pub fn reference_setup() -> Self {
        Self::new(16, 6, lit(0.02), lit(340.0)).expect("reference setup is valid")
    }

    pub fn num_mics(&self) -> usize {
        self.num_mics
    }

    pub fn subarray_size(&self) -> usize {
        self.subarray_size
    }

    /// Number of extra microphones `B` beyond one sub-array.
    pub fn extra_mics(&self) -> usize {
        self.num_mics - self.subarray_size
    }

    pub fn num_subarrays(&self) -> usize {
        self.extra_mics() + 1
    }

    pub fn mic_spacing(&self) -> T {
        self.mic_spacing
    }

    pub fn speed_of_sound(&self) -> T {
        self.speed_of_sound
    }

    pub fn ref_offset(&self) -> usize {
        self.ref_offset
    }

    /// Central microphone of the full array, used as the SNR/SIR measurement
    /// point and the zero-delay point of the simulator.
    pub fn array_reference_index(&self) -> usize {
        self.num_mics / 2
    }

    /// Absolute index of the reference microphone of sub-array `b` (0-based).
    pub fn subarray_reference_mic(&self, b: usize) -> usize {
        b + self.ref_offset
    }

    /// Frequency above which the inter-mic spacing aliases (`c / 2d`).
    pub fn aliasing_frequency(&self) -> T {
        self.speed_of_sound / (lit::<T>(2.0) * self.mic_spacing)
    }
}

/// Contiguous 0-based microphone ranges of the `B + 1` sub-arrays. Window `b`
/// covers mics `b..b + M`, so neighbours share `M - 1` microphones.
pub fn subarray_windows<T: Real>(cfg: &UlaConfig<T>) -> Vec<Range<usize>> {
    (0..cfg.num_subarrays())
        .map(|b| b..b + cfg.subarray_size)
        .collect()
}

/// Unit-modulus far-field array response of one sub-array.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector<T: Real>(CVector<T>);

impl<T: Real> SteeringVector<T> {
    pub fn as_vector(&self) -> &CVector<T> {
        &self.0
    }

    pub fn into_inner(self) -> CVector<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn check_angle<T: Real>(angle: T) -> Result<()> {
    if angle >= T::zero() && angle <= lit(180.0) {
        Ok(())
    } else {
        Err(DoaError::AngleOutOfRange(angle.to_f64_lossy()))
    }
}

/// Steering vector of sub-array `subarray` at `freq` Hz for a plane wave
/// from `angle` degrees. Identical for every sub-array in the free far field.
pub fn steering_vector<T: Real>(
    cfg: &UlaConfig<T>,
    freq: T,
    angle: T,
    subarray: usize,
) -> Result<SteeringVector<T>> {
    check_angle(angle)?;
    if freq < T::zero() {
        return Err(DoaError::InvalidParameter("negative frequency".into()));
    }
    if subarray >= cfg.num_subarrays() {
        return Err(DoaError::InvalidParameter(format!(
            "sub-array {subarray} out of range 0..{}",
            cfg.num_subarrays()
        )));
    }
    Ok(SteeringVector(steering_unchecked(cfg, freq, angle)))
}

/// Steering vector without range checks; callers validate the angle.
pub(crate) fn steering_unchecked<T: Real>(cfg: &UlaConfig<T>, freq: T, angle: T) -> CVector<T> {
    // Phase step between neighbouring mics: 2*pi*f*d*cos(theta)/c.
    let step = T::two_pi() * freq * cfg.mic_spacing * deg2rad(angle).cos() / cfg.speed_of_sound;
    CVector::from_fn(cfg.subarray_size, |m, _| {
        if m == cfg.ref_offset {
            return Complex::new(T::one(), T::zero());
        }
        let rel: T = lit::<T>(m as f64) - lit::<T>(cfg.ref_offset as f64);
        let phase = -step * rel;
        Complex::new(phase.cos(), phase.sin())
    })
}

/// Steering matrix `[a(f, theta_1), ..., a(f, theta_Q)]` (M x Q).
pub fn steering_matrix<T: Real>(cfg: &UlaConfig<T>, freq: T, angles: &[T]) -> Result<CMatrix<T>> {
    for &a in angles {
        check_angle(a)?;
    }
    let cols: Vec<CVector<T>> = angles.iter().map(|&a| steering_unchecked(cfg, freq, a)).collect();
    Ok(if cols.is_empty() {
        DMatrix::zeros(cfg.subarray_size, 0)
    } else {
        CMatrix::from_columns(&cols)
    })
}
