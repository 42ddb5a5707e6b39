//! Discrete Fourier transforms of station series at the Fourier frequencies.
//!
//! For a series `Y_1..Y_n` the coefficient at `omega_k = 2 pi k / n` is
//!
//! ```text
//! J(omega_k) = (2 pi n)^(-1/2) * sum_{t=1..n} Y_t exp(-i t omega_k)
//! ```
//!
//! for the full grid `k = 0..n-1`. Nothing is tapered or demeaned here.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::panel::Panel;

/// `m` rows of DFT coefficients over the full Fourier grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPanel {
    m: usize,
    n: usize,
    coeffs: Vec<Complex64>,
}

pub fn fourier_frequency(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

impl SpectralPanel {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| fourier_frequency(k, self.n)).collect()
    }

    /// Coefficients of station `i` over `k = 0..n-1`.
    pub fn coeffs(&self, i: usize) -> Result<&[Complex64]> {
        self.check(i)?;
        Ok(&self.coeffs[i * self.n..(i + 1) * self.n])
    }

    pub(crate) fn row(&self, i: usize) -> &[Complex64] {
        &self.coeffs[i * self.n..(i + 1) * self.n]
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.m,
            });
        }
        Ok(())
    }
}

/// Transforms one real series, returning `J(omega_k)` for `k = 0..n-1`.
pub fn dft_series(series: &[f64]) -> Vec<Complex64> {
    let plan = FftPlan::new(series.len().max(1));
    transform_with(&plan, series)
}

fn transform_with(plan: &FftPlan, series: &[f64]) -> Vec<Complex64> {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut buf);
    // the FFT indexes time from 0; shifting to t = 1..n multiplies by exp(-i omega_k)
    let norm = 1.0 / libm::sqrt(2.0 * PI * n as f64);
    for (k, c) in buf.iter_mut().enumerate() {
        let w = fourier_frequency(k, n);
        *c *= Complex64::new(libm::cos(w), -libm::sin(w)) * norm;
    }
    buf
}

/// DFT of every station series of the panel.
pub fn dft_all(panel: &Panel) -> Result<SpectralPanel> {
    let n = panel.n();
    if n < 2 {
        return Err(Error::SeriesTooShort { required: 2, n });
    }
    let plan = FftPlan::new(n);
    let mut coeffs = Vec::with_capacity(panel.m() * n);
    for i in 0..panel.m() {
        coeffs.extend(transform_with(&plan, panel.series(i)));
    }
    Ok(SpectralPanel {
        m: panel.m(),
        n,
        coeffs,
    })
}

/// `I(omega_k) = |J_i(omega_k)|^2`.
pub fn periodogram(spec: &SpectralPanel, i: usize) -> Result<Vec<f64>> {
    Ok(spec.coeffs(i)?.iter().map(|c| c.norm_sqr()).collect())
}

/// `I_ij(omega_k) = J_i(omega_k) conj(J_j(omega_k))`.
pub fn cross_periodogram(spec: &SpectralPanel, i: usize, j: usize) -> Result<Vec<Complex64>> {
    let (a, b) = (spec.coeffs(i)?, spec.coeffs(j)?);
    Ok(a.iter().zip(b).map(|(x, y)| x * y.conj()).collect())
}

/// DFT of the increment series `Y_t(s_i) - Y_t(s_j)`.
pub fn increment_dft(spec: &SpectralPanel, i: usize, j: usize) -> Result<Vec<Complex64>> {
    let (a, b) = (spec.coeffs(i)?, spec.coeffs(j)?);
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Station, StationSet};
    use alloc::vec;

    fn one_station(series: Vec<f64>) -> Panel {
        let set = StationSet::new(vec![Station::new("a", vec![0.0, 0.0])]).unwrap();
        let n = series.len();
        Panel::new(set, series, n).unwrap()
    }

    fn naive(series: &[f64]) -> Vec<Complex64> {
        let n = series.len();
        (0..n)
            .map(|k| {
                let w = fourier_frequency(k, n);
                series
                    .iter()
                    .enumerate()
                    .map(|(idx, &y)| {
                        let t = (idx + 1) as f64;
                        Complex64::new(libm::cos(t * w), -libm::sin(t * w)) * y
                    })
                    .sum::<Complex64>()
                    / libm::sqrt(2.0 * PI * n as f64)
            })
            .collect()
    }

    #[test]
    fn constant_series_concentrates_at_zero() {
        let c = 1.7;
        let n = 12;
        let spec = dft_all(&one_station(vec![c; n])).unwrap();
        let j = spec.coeffs(0).unwrap();
        let expected = n as f64 * c * c / (2.0 * PI);
        assert!((j[0].norm_sqr() - expected).abs() < 1e-12 * expected);
        assert!((j[0].re - c * libm::sqrt(n as f64 / (2.0 * PI))).abs() < 1e-12);
        for c in &j[1..] {
            assert!(c.norm() < 1e-13);
        }
    }

    #[test]
    fn matches_naive_dft() {
        for n in [2usize, 3, 8, 9, 16] {
            let series: Vec<f64> = (0..n)
                .map(|t| libm::sin(t as f64 * 1.1) * 3.0 - 0.5)
                .collect();
            let spec = dft_all(&one_station(series.clone())).unwrap();
            for (a, b) in spec.coeffs(0).unwrap().iter().zip(naive(&series)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_and_parseval() {
        let series: Vec<f64> = (0..17)
            .map(|t| (t as f64 * 0.73).cos() + 0.2 * t as f64)
            .collect();
        let spec = dft_all(&one_station(series.clone())).unwrap();
        let j = spec.coeffs(0).unwrap();
        for k in 1..17 {
            assert!((j[17 - k] - j[k].conj()).norm() < 1e-12);
        }
        let lhs: f64 = j.iter().map(|c| c.norm_sqr()).sum();
        let rhs: f64 = series.iter().map(|y| y * y).sum::<f64>() / (2.0 * PI);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn too_short_and_bad_index() {
        assert!(matches!(
            dft_all(&one_station(vec![1.0])),
            Err(Error::SeriesTooShort { .. })
        ));
        let spec = dft_all(&one_station(vec![1.0, 2.0])).unwrap();
        assert!(matches!(
            periodogram(&spec, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(cross_periodogram(&spec, 0, 3).is_err());
        assert!(increment_dft(&spec, 2, 0).is_err());
    }

    #[test]
    fn zero_series_has_zero_periodogram() {
        let spec = dft_all(&one_station(vec![0.0; 10])).unwrap();
        assert!(periodogram(&spec, 0).unwrap().iter().all(|&v| v == 0.0));
    }
}
