//! Normal-mode modelling and warping-based mode separation for
//! upward-refracting surface-duct waveguides.
//!
//! The crate is organized bottom-up:
//!
//! * [`env`]: sound-speed profiles, bathymetry, the linear duct fit and
//!   range-dependent station sets.
//! * [`modes`]: finite-difference normal-mode solver (eigenvalues,
//!   normalized eigenfunctions, group speeds).
//! * [`wkb`]: closed-form duct model: quantization, wavenumber
//!   approximations, stationary-phase dispersion and warped frequencies.
//! * [`synth`]: broadband pulse synthesis from the mode sum, transmission
//!   loss, adiabatic range-dependent propagation.
//! * [`warp`]: spectrograms, the warping operator and its inverse, modal
//!   band-pass separation and dispersion-curve extraction.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod env;
pub mod error;
pub mod modes;
pub mod num;
pub mod reference;
pub mod synth;
pub mod warp;
pub mod waveform;
pub mod wkb;

mod dsp;

pub use error::{Error, Result};
pub use num::Real;

pub type SoundSpeedProfile = env::SoundSpeedProfile<f64>;
pub type LinearDuct = env::LinearDuct<f64>;
pub type BathymetryTrack = env::BathymetryTrack<f64>;
pub type RangeDependentEnv = env::RangeDependentEnv<f64>;
pub type Station = env::Station<f64>;
pub type DepthGrid = modes::DepthGrid<f64>;
pub type Mode = modes::Mode<f64>;
pub type ModeSolution = modes::ModeSolution<f64>;
pub type ModeSolver = modes::ModeSolver<f64>;
pub type QuantizationCondition = wkb::QuantizationCondition<f64>;
pub type DuctDispersion = wkb::DuctDispersion<f64>;
pub type Waveform = waveform::Waveform<f64>;
pub type SourcePulse = synth::SourcePulse<f64>;
pub type Geometry = synth::Geometry<f64>;
pub type TlMap = synth::TlMap<f64>;
pub type Spectrogram = warp::Spectrogram<f64>;
pub type WarpPlan = warp::WarpPlan<f64>;
pub type ModeBand = warp::ModeBand<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type SoundSpeedProfile = crate::env::SoundSpeedProfile<f32>;
    pub type LinearDuct = crate::env::LinearDuct<f32>;
    pub type ModeSolution = crate::modes::ModeSolution<f32>;
    pub type Waveform = crate::waveform::Waveform<f32>;
    pub type Spectrogram = crate::warp::Spectrogram<f32>;
}
