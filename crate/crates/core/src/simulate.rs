//! Seeded generators of synthetic panels and periodograms.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` with a
//! separate stream per independent unit (station, noise channel, or lag-pair),
//! so the output depends only on the seed and can be produced in any order.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::panel::{norm, Panel, StationSet};
use crate::specmodel::{temporal_spectrum, SpectrumParams};

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Independent `N(0, sigma_i^2)` series at every station.
pub fn simulate_white(stations: &StationSet, n: usize, sigmas: &[f64], seed: u64) -> Result<Panel> {
    if sigmas.len() != stations.len() {
        return Err(Error::DimensionMismatch {
            expected: stations.len(),
            found: sigmas.len(),
        });
    }
    if let Some(index) = sigmas.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidSigma { index });
    }
    let mut values = Vec::with_capacity(stations.len() * n);
    for (i, &sigma) in sigmas.iter().enumerate() {
        let mut rng = stream(seed, i as u64);
        values.extend((0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)));
    }
    Panel::new(stations.clone(), values, n)
}

/// Isotropic spatial covariance families with unit sill.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "kebab-case"))]
pub enum SpatialCovariance {
    /// `exp(-r / range)`.
    Exponential { range: f64 },
    /// Matérn with smoothness 3/2: `(1 + sqrt(3) r / range) exp(-sqrt(3) r / range)`.
    Matern32 { range: f64 },
}

impl SpatialCovariance {
    pub fn at(&self, r: f64) -> f64 {
        match *self {
            SpatialCovariance::Exponential { range } => libm::exp(-r / range),
            SpatialCovariance::Matern32 { range } => {
                let a = libm::sqrt(3.0) * r / range;
                (1.0 + a) * libm::exp(-a)
            }
        }
    }

    fn range(&self) -> f64 {
        match *self {
            SpatialCovariance::Exponential { range } | SpatialCovariance::Matern32 { range } => {
                range
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparableSpec {
    pub spatial: SpatialCovariance,
    /// AR(1) coefficient of the temporal factor.
    pub rho: f64,
    /// Variance of independent white noise added at every station and time.
    #[cfg_attr(feature = "serde", serde(default))]
    pub nugget: f64,
}

/// Spectrum of a stationary AR(1) with coefficient `rho` and unit variance.
pub fn ar1_spectrum(rho: f64, omega: f64) -> f64 {
    let re = 1.0 - rho * libm::cos(omega);
    let im = rho * libm::sin(omega);
    (1.0 - rho * rho) / (2.0 * PI * (re * re + im * im))
}

/// Frequency variogram of the separable model at `|h| > 0`:
/// `2 [C_S(0) - C_S(h)] f_T(omega)` plus the flat `2 nugget / (2 pi)`.
pub fn separable_fv(spec: &SeparableSpec, h_norm: f64, omega: f64) -> f64 {
    2.0 * (1.0 - spec.spatial.at(h_norm)) * ar1_spectrum(spec.rho, omega)
        + 2.0 * spec.nugget / (2.0 * PI)
}

/// `Y_t = A e_t + eps_t` where `A A^T = C_S`, each `e_t(s_i)` is an
/// independent stationary AR(1) with unit variance and `eps_t` is white noise
/// with variance `spec.nugget`.
pub fn simulate_separable(
    stations: &StationSet,
    n: usize,
    spec: &SeparableSpec,
    seed: u64,
) -> Result<Panel> {
    if !(spec.rho.abs() < 1.0) {
        return Err(Error::InvalidParams(alloc::format!(
            "AR coefficient must lie in (-1, 1), got {}",
            spec.rho
        )));
    }
    if !(spec.spatial.range() > 0.0) || !(spec.nugget >= 0.0) {
        return Err(Error::InvalidParams(
            "range must be positive and nugget nonnegative".into(),
        ));
    }
    let m = stations.len();
    let cov = DMatrix::from_fn(m, m, |i, j| {
        let d: Vec<f64> = stations
            .coords(i)
            .iter()
            .zip(stations.coords(j))
            .map(|(a, b)| a - b)
            .collect();
        spec.spatial.at(norm(&d))
    });
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let a = chol.l();

    let innov = libm::sqrt(1.0 - spec.rho * spec.rho);
    let mut e = DMatrix::<f64>::zeros(m, n);
    for i in 0..m {
        let mut rng = stream(seed, i as u64);
        let mut prev: f64 = rng.sample(StandardNormal);
        e[(i, 0)] = prev;
        for t in 1..n {
            prev = spec.rho * prev + innov * rng.sample::<f64, _>(StandardNormal);
            e[(i, t)] = prev;
        }
    }
    let y = a * e;
    let sd = libm::sqrt(spec.nugget);
    let mut values = Vec::with_capacity(m * n);
    for i in 0..m {
        let mut rng = stream(seed, (m + i) as u64);
        for t in 0..n {
            let noise = if spec.nugget > 0.0 {
                sd * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            values.push(y[(i, t)] + noise);
        }
    }
    Panel::new(stations.clone(), values, n)
}

/// Increment periodograms of one spatial lag, one row per station pair, over
/// the full grid `k = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LagPeriodograms {
    pub h: Vec<f64>,
    pub pairs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulatedPeriodograms {
    pub n: usize,
    pub lags: Vec<LagPeriodograms>,
}

/// Draws `I(omega_k) = g0(omega_k) E_k` with `E_k` unit exponential for
/// `k = 0..=n/2`, mirrored to `n - k` as for a real series.
pub fn simulate_whittle_periodograms(
    psi: &SpectrumParams,
    h_list: &[Vec<f64>],
    pairs_per_lag: usize,
    n: usize,
    seed: u64,
) -> Result<SimulatedPeriodograms> {
    psi.validate()?;
    let mut lags = Vec::with_capacity(h_list.len());
    for (l, h) in h_list.iter().enumerate() {
        let g0: Vec<f64> = (0..=n / 2)
            .map(|k| temporal_spectrum(2.0 * PI * k as f64 / n as f64, psi, h))
            .collect::<Result<_>>()?;
        let pairs = (0..pairs_per_lag)
            .map(|p| {
                let mut rng = stream(seed, (l * pairs_per_lag + p) as u64);
                let mut row = vec![0.0; n];
                for (k, g) in g0.iter().enumerate() {
                    let v = g * rng.sample::<f64, _>(Exp1);
                    row[k] = v;
                    row[(n - k) % n] = v;
                }
                row
            })
            .collect();
        lags.push(LagPeriodograms {
            h: h.clone(),
            pairs,
        });
    }
    Ok(SimulatedPeriodograms { n, lags })
}
