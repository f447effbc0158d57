//! Linear-array ultrasound image reconstruction.
//!
//! The crate covers the whole chain from channel data to a B-mode image:
//!
//! - [`geometry`]: array layout, pixel grid and dynamic-focusing delays
//! - [`rf`]: channel data container and fractional-delay sample fetch
//! - [`beamform`]: DAS, DMAS (naive and fast) and double-stage DMAS kernels
//! - [`dsp`]: band-pass filtering, Hilbert envelope, log compression
//! - [`sim`]: point-scatterer RF synthesis for wire, cyst and tumor phantoms
//! - [`metrics`]: SNR, FWHM, contrast ratio, lateral profiles, sidelobe level
//! - [`bmode`]: glue that turns a frame into an envelope image
//!
//! All quantities are SI (metres, seconds, hertz) unless a name says otherwise.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamform;
pub mod bmode;
pub mod dsp;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod rf;
pub mod sim;

mod error;

pub use beamform::{BeamformerKind, OpCount};
pub use error::{Error, Result};
pub use geometry::{compute_delays, ArrayGeometry, DelayTable, ImageGrid};
pub use image::{BeamformedImage, DbImage, EnvelopeImage, Image};
pub use rf::RfFrame;
