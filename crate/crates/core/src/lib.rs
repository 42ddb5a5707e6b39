//! Frequency-domain analysis of spatio-temporal panels.
//!
//! The crate covers the whole estimation pipeline for data observed at `m`
//! stations over `n` equally spaced time points:
//!
//! - [`panel`]: station geometry, panels and spatial-lag pair sets,
//! - [`dft`]: discrete Fourier transforms at the Fourier frequencies,
//! - [`moments`]: time-domain Matheron variogram and covariance estimators,
//! - [`fv`]: the frequency variogram, its kernel-smoothed estimator, a plug-in
//!   variance and a nugget scan,
//! - [`specmodel`]: the Laplacian-model space-time spectrum, its Bessel-K
//!   cross-spectrum and the marginal temporal spectrum,
//! - [`whittle`]: pooled Whittle estimation of the spectral parameters with a
//!   sandwich covariance,
//! - [`indeptest`]: a complex-Wishart likelihood-ratio test of spatial
//!   independence,
//! - [`simulate`]: seeded Gaussian generators used as estimator oracles.
//!
//! Everything here is pure computation over `alloc` collections; file formats
//! and the command-line front end live in the `stfreq` crate.

#![no_std]
// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dft;
pub mod error;
pub mod fft;
pub mod fv;
pub mod indeptest;
pub mod moments;
pub mod optimize;
pub mod panel;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod specmodel;
pub mod whittle;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use panel::{build_lag_pairs, LagPairSet, Panel, Station, StationSet};
