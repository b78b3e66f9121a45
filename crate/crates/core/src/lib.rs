#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting guards

//! Wideband multi-source direction-of-arrival estimation for uniform linear
//! microphone arrays.
//!
//! The array is split into overlapping sub-arrays. Each sub-array focuses its
//! narrowband covariances onto reference frequencies inside 500 Hz
//! sub-bandwidths, weights the smoothing by sound-source presence
//! probability, and runs MUSIC. Per-sub-array estimates are then fused by
//! Gaussian-weighted L1 correction and refined by steered refocusing.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases at the crate root fix the scalar to `f64`.

pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod pipelines;
pub mod scalar;
pub mod simulate;
pub mod spectral;
pub mod sspp;
pub mod subspace;
pub mod wav;

pub use error::{DoaError, Result};
pub use scalar::{CMatrix, CVector, Cplx, Real};

pub type UlaConfig64 = geometry::UlaConfig<f64>;
pub type UlaConfig32 = geometry::UlaConfig<f32>;
pub type Scene64 = simulate::Scene<f64>;
pub type Recording64 = simulate::MultichannelRecording<f64>;
pub type Spectrogram64 = spectral::Spectrogram<f64>;
pub type SnapshotTensor64 = spectral::SnapshotTensor<f64>;
pub type SsppMap64 = sspp::SsppMap<f64>;
pub type DoaMatrix64 = fusion::DoaMatrix<f64>;
pub type FrontEnd64 = pipelines::FrontEnd<f64>;
pub type MethodOutput64 = pipelines::MethodOutput<f64>;
