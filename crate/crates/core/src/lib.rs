//! Direct position estimation for a moving uniform linear array in multipath.
//!
//! The crate contains the array and trajectory geometry, a synthetic
//! multipath channel, spatially smoothed MUSIC and Capon processing, three
//! grid-based direct position estimators and a Monte Carlo harness.
//!
//! Everything numerical is generic over [`Real`]; the `*64` and `*32` aliases
//! below fix the precision.

pub mod channel;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Position64 = geometry::Position<f64>;
pub type Velocity64 = geometry::Velocity<f64>;
pub type ArrayConfig64 = geometry::ArrayConfig<f64>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type Observation64 = channel::Observation<f64>;
pub type SpectralEstimator64 = spectral::SpectralEstimator<f64>;
pub type PseudoMl64 = estimators::PseudoMl<f64>;
pub type MaxPower64 = estimators::MaxPower<f64>;
pub type SinglePath64 = estimators::SinglePath<f64>;

pub type Position32 = geometry::Position<f32>;
pub type Velocity32 = geometry::Velocity<f32>;
pub type ArrayConfig32 = geometry::ArrayConfig<f32>;
pub type ChannelParams32 = channel::ChannelParams<f32>;
pub type Observation32 = channel::Observation<f32>;
pub type SpectralEstimator32 = spectral::SpectralEstimator<f32>;
pub type PseudoMl32 = estimators::PseudoMl<f32>;
pub type MaxPower32 = estimators::MaxPower<f32>;
pub type SinglePath32 = estimators::SinglePath<f32>;
