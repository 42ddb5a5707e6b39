//! Frequency variogram: pooled increment periodograms, their kernel-smoothed
//! estimate, a plug-in variance and the nugget scan.
//!
//! For a lag pair set `N(h)` the raw estimate is
//! `G(omega_k) = (1/|N|) sum_{(i,j)} |J_i(omega_k) - J_j(omega_k)|^2`, whose
//! discrete integral `(2 pi / n) sum_k G(omega_k)` equals the Matheron
//! variogram at `(h, 0)` over the same pairs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dft::{dft_all, fourier_frequency, SpectralPanel};
use crate::error::{Error, Result};
use crate::panel::{build_lag_pairs, norm, LagPairSet, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum KernelKind {
    Daniell,
    ModifiedDaniell,
    BartlettWindow,
}

/// Discrete smoothing kernel over `2b + 1` neighbouring Fourier ordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub half_width: usize,
}

impl Kernel {
    pub fn new(kind: KernelKind, half_width: usize) -> Self {
        Self { kind, half_width }
    }

    /// Modified Daniell with `b = ceil(n^0.4)`, capped below `n/2`.
    pub fn default_for(n: usize) -> Self {
        let b = libm::ceil(libm::pow(n as f64, 0.4)) as usize;
        Self::new(KernelKind::ModifiedDaniell, b.min(n.saturating_sub(1) / 2))
    }

    /// Weights `w_{-b}..w_b`: nonnegative, symmetric, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let b = self.half_width;
        if b == 0 {
            return vec![1.0];
        }
        let raw: Vec<f64> = (0..=2 * b)
            .map(|idx| {
                let r = idx.abs_diff(b);
                match self.kind {
                    KernelKind::Daniell => 1.0,
                    KernelKind::ModifiedDaniell => {
                        if r == b {
                            0.5
                        } else {
                            1.0
                        }
                    }
                    KernelKind::BartlettWindow => 1.0 - r as f64 / (b + 1) as f64,
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if 2 * self.half_width >= n {
            return Err(Error::BandwidthTooLarge {
                half_width: self.half_width,
                n,
            });
        }
        Ok(())
    }
}

/// Raw and smoothed frequency variogram of one lag over the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVariogram {
    pub lag: Vec<f64>,
    pub tolerance: f64,
    pub count: usize,
    pub kernel: Kernel,
    pub freqs: Vec<f64>,
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub variance: Vec<f64>,
}

impl FrequencyVariogram {
    pub fn estimate(spec: &SpectralPanel, pairs: &LagPairSet, kernel: Kernel) -> Result<Self> {
        let raw = raw_fv(spec, pairs)?;
        let smoothed = smooth_fv(&raw, kernel)?;
        let variance = fv_variance(spec, pairs, kernel)?;
        Ok(Self {
            lag: pairs.lag.clone(),
            tolerance: pairs.tolerance,
            count: pairs.len(),
            kernel,
            freqs: spec.frequencies(),
            raw,
            smoothed,
            variance,
        })
    }

    /// `(2 pi / n) sum_k smoothed(omega_k)`.
    pub fn integral(&self) -> f64 {
        2.0 * PI / self.raw.len() as f64 * self.smoothed.iter().sum::<f64>()
    }
}

fn increments(spec: &SpectralPanel, pairs: &LagPairSet) -> Result<Vec<Vec<Complex64>>> {
    pairs
        .pairs
        .iter()
        .map(|&(i, j)| crate::dft::increment_dft(spec, i, j))
        .collect()
}

/// Pair-averaged increment periodogram over `k = 0..n-1`.
pub fn raw_fv(spec: &SpectralPanel, pairs: &LagPairSet) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::EmptyLagSet);
    }
    let n = spec.n();
    let mut acc = vec![0.0; n];
    for &(i, j) in &pairs.pairs {
        let (a, b) = (spec.coeffs(i)?, spec.coeffs(j)?);
        for (slot, (x, y)) in acc.iter_mut().zip(a.iter().zip(b)) {
            *slot += (x - y).norm_sqr();
        }
    }
    let scale = 1.0 / pairs.len() as f64;
    acc.iter_mut().for_each(|v| *v *= scale);
    Ok(acc)
}

/// Circular convolution of `raw` with the kernel weights.
pub fn smooth_fv(raw: &[f64], kernel: Kernel) -> Result<Vec<f64>> {
    let n = raw.len();
    kernel.check(n)?;
    let w = kernel.weights();
    let b = kernel.half_width as isize;
    Ok((0..n as isize)
        .map(|k| {
            w.iter()
                .enumerate()
                .map(|(idx, wr)| wr * raw[(k + idx as isize - b).rem_euclid(n as isize) as usize])
                .sum()
        })
        .collect())
}

/// Plug-in variance of the smoothed estimate at every Fourier frequency.
///
/// The cross-spectra of the increment processes are estimated by smoothed
/// increment cross-periodograms `g_pq`. With `c = sum_r w_r^2`, Gaussian
/// ordinates give `E|g_pq|^2 = |g_pq|^2 + c g_pp g_qq`, so the summed squared
/// moduli are corrected to `(sum |g_pq|^2 - c (sum g_pp)^2) / (1 - c^2)`,
/// floored at zero. Ordinates paired through `omega -> -omega` inside one
/// window are counted twice, as they are the same random variable.
pub fn fv_variance(spec: &SpectralPanel, pairs: &LagPairSet, kernel: Kernel) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::EmptyLagSet);
    }
    let n = spec.n();
    kernel.check(n)?;
    let w = kernel.weights();
    let b = kernel.half_width;
    let width = 2 * b + 1;
    let c: f64 = w.iter().map(|x| x * x).sum();
    let x = increments(spec, pairs)?;
    let at = |k: isize| k.rem_euclid(n as isize) as usize;

    // inner[a][d] = <x_a, x_{a+d}> over pairs, d = 0..2b
    let inner: Vec<Vec<Complex64>> = (0..n)
        .map(|a| {
            (0..width)
                .map(|d| {
                    let a2 = (a + d) % n;
                    x.iter().map(|row| row[a] * row[a2].conj()).sum()
                })
                .collect()
        })
        .collect();

    // S(k): estimated sum_{p,q} |g_pq(omega_k)|^2
    let sum_sq: Vec<f64> = (0..n as isize)
        .map(|k| {
            let mut frob = 0.0;
            let mut trace = 0.0;
            for r in 0..width {
                let kr = at(k + r as isize - b as isize);
                trace += w[r] * inner[kr][0].re;
                for s in 0..width {
                    let ks = at(k + s as isize - b as isize);
                    let (lo, d) = if r <= s { (kr, s - r) } else { (ks, r - s) };
                    frob += w[r] * w[s] * inner[lo][d].norm_sqr();
                }
            }
            if c < 1.0 {
                ((frob - c * trace * trace) / (1.0 - c * c)).max(0.0)
            } else {
                frob
            }
        })
        .collect();

    let norm2 = (pairs.len() * pairs.len()) as f64;
    Ok((0..n as isize)
        .map(|k| {
            let mut total = 0.0;
            for r in 0..width {
                let kr = at(k + r as isize - b as isize);
                let mut weight = w[r] * w[r];
                for s in 0..width {
                    let ks = at(k + s as isize - b as isize);
                    if (kr + ks) % n == 0 {
                        weight += w[r] * w[s];
                    }
                }
                total += weight * sum_sq[kr];
            }
            total / norm2
        })
        .collect())
}

/// Smoothed frequency variogram between every pair of stations at `omega_k`,
/// as a row-major `m x m` matrix.
pub fn station_fv_matrix(spec: &SpectralPanel, kernel: Kernel, k: usize) -> Result<Vec<f64>> {
    let n = spec.n();
    kernel.check(n)?;
    let m = spec.m();
    let w = kernel.weights();
    let b = kernel.half_width as isize;
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let (a, bb) = (spec.row(i), spec.row(j));
            out[i * m + j] = w
                .iter()
                .enumerate()
                .map(|(idx, wr)| {
                    let kr = (k as isize + idx as isize - b).rem_euclid(n as isize) as usize;
                    wr * (a[kr] - bb[kr]).norm_sqr()
                })
                .sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuggetRow {
    pub lag: Vec<f64>,
    pub h_norm: f64,
    pub count: usize,
    /// `(2 pi / n) sum_k smoothed(omega_k)` over the full grid.
    pub integrated_fv: f64,
    /// Same integral with the `k = 0` ordinate's mass removed and the band
    /// renormalized; this is what the intercept fit uses.
    pub integrated_fv_excl_zero: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuggetScan {
    pub rows: Vec<NuggetRow>,
    /// Lags whose pair set was empty.
    pub skipped: Vec<Vec<f64>>,
    /// Linear extrapolation to `|h| = 0` through the two smallest lag norms.
    pub intercept: f64,
}

/// Integrated smoothed FV per lag and the extrapolated nugget at `|h| -> 0`.
///
/// Lags sharing a norm (within `1e-9` relative) are pooled with pair-count
/// weights before the two-point linear fit.
pub fn nugget_scan(
    panel: &Panel,
    lags: &[Vec<f64>],
    tolerance: f64,
    kernel: Kernel,
) -> Result<NuggetScan> {
    let spec = dft_all(panel)?;
    let n = spec.n();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for h in lags {
        let pairs = build_lag_pairs(panel.stations(), h, tolerance)?;
        if pairs.is_empty() {
            log::warn!("lag {:?} has no station pairs; skipped", h);
            skipped.push(h.clone());
            continue;
        }
        let raw = raw_fv(&spec, &pairs)?;
        let smoothed = smooth_fv(&raw, kernel)?;
        let total: f64 = smoothed.iter().sum();
        rows.push(NuggetRow {
            lag: h.clone(),
            h_norm: norm(h),
            count: pairs.len(),
            integrated_fv: 2.0 * PI / n as f64 * total,
            integrated_fv_excl_zero: 2.0 * PI / (n - 1) as f64 * (total - raw[0]),
        });
    }
    rows.sort_by(|a, b| a.h_norm.total_cmp(&b.h_norm));

    // pool rows with equal norms
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for row in &rows {
        match groups.last_mut() {
            Some((r, sum, count)) if (row.h_norm - *r).abs() <= 1e-9 * r.max(1.0) => {
                *sum += row.integrated_fv_excl_zero * row.count as f64;
                *count += row.count;
            }
            _ => groups.push((
                row.h_norm,
                row.integrated_fv_excl_zero * row.count as f64,
                row.count,
            )),
        }
    }
    if groups.len() < 2 {
        return Err(Error::InsufficientLags {
            found: groups.len(),
        });
    }
    let (r1, y1) = (groups[0].0, groups[0].1 / groups[0].2 as f64);
    let (r2, y2) = (groups[1].0, groups[1].1 / groups[1].2 as f64);
    let intercept = y1 - r1 * (y2 - y1) / (r2 - r1);
    Ok(NuggetScan {
        rows,
        skipped,
        intercept,
    })
}

/// Frequencies `omega_k` for `k = 0..n-1`.
pub fn fourier_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| fourier_frequency(k, n)).collect()
}
