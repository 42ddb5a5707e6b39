//! Likelihood-ratio test of spatial independence from smoothed cross-spectral
//! matrices.
//!
//! Fourier ordinates `1..(n-1)/2` are grouped into `M1` disjoint blocks of
//! `k' = 2k + 1` neighbours centred at `j_l = (l-1)(2k+1) + (k+1)`. Under
//! independence each block average is approximately complex Wishart with a
//! diagonal scale, and `lambda_l = det F_l / prod_j F_l[j][j]` has known
//! log-moments.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dft::{dft_all, SpectralPanel};
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::special::normal_sf;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrixSeries {
    pub m: usize,
    pub k: usize,
    /// Fourier index `j_l` of each block centre.
    pub centers: Vec<usize>,
    /// Row-major `m x m` Hermitian matrices, one per block.
    pub matrices: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndependenceReport {
    pub lambda_ls: Vec<f64>,
    /// `Lambda = -(1/M1) sum_l ln lambda_l`.
    pub lambda_stat: f64,
    pub mean: f64,
    pub variance: f64,
    pub s: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub blocks: usize,
    pub k: usize,
    /// Number of observations used; one less than supplied when `n` is even.
    pub n_used: usize,
}

/// `M1 = floor((n - 1) / (4 (k + 1)))`.
pub fn block_count(n: usize, k: usize) -> usize {
    n.saturating_sub(1) / (4 * (k + 1))
}

pub fn smoothed_spectral_matrices(spec: &SpectralPanel, k: usize) -> Result<SpectralMatrixSeries> {
    let (m, n) = (spec.m(), spec.n());
    let width = 2 * k + 1;
    if width < m {
        return Err(Error::RankDeficientSmoother { width, m });
    }
    let blocks = block_count(n, k);
    if blocks == 0 {
        return Err(Error::TooFewObservations { n, k });
    }
    let centers: Vec<usize> = (0..blocks).map(|l| l * width + k + 1).collect();
    let matrices = centers
        .iter()
        .map(|&c| {
            let mut f = alloc::vec![Complex64::new(0.0, 0.0); m * m];
            for j in c - k..=c + k {
                for a in 0..m {
                    let ja = spec.row(a)[j];
                    for b in 0..m {
                        f[a * m + b] += ja * spec.row(b)[j].conj();
                    }
                }
            }
            f.iter_mut().for_each(|v| *v /= width as f64);
            f
        })
        .collect();
    Ok(SpectralMatrixSeries {
        m,
        k,
        centers,
        matrices,
    })
}

/// `lambda_l = det F_l / prod_j F_l[j][j]`, from a Hermitian Cholesky factor.
pub fn lambda_stats(series: &SpectralMatrixSeries) -> Result<Vec<f64>> {
    let m = series.m;
    series
        .matrices
        .iter()
        .enumerate()
        .map(|(block, f)| {
            let mat = DMatrix::from_row_slice(m, m, f);
            let chol = mat.cholesky().ok_or(Error::SingularMatrix { block })?;
            let l = chol.l();
            let mut ratio = 1.0;
            for i in 0..m {
                let fii = f[i * m + i].re;
                let lii = l[(i, i)].norm_sqr();
                if !(fii > 0.0 && lii > 0.0) {
                    return Err(Error::SingularMatrix { block });
                }
                ratio *= lii / fii;
            }
            Ok(ratio)
        })
        .collect()
}

/// `E(Lambda) = sum_{j=1}^{m-1} (m - j) / (k' - j)`.
pub fn lambda_mean(m: usize, k_prime: usize) -> f64 {
    (1..m).map(|j| (m - j) as f64 / (k_prime - j) as f64).sum()
}

/// `Var(Lambda) = (1/M1) sum_{j=1}^{m-1} (m - j) / (k' - j)^2`.
pub fn lambda_variance(m: usize, k_prime: usize, blocks: usize) -> f64 {
    (1..m)
        .map(|j| (m - j) as f64 / ((k_prime - j) * (k_prime - j)) as f64)
        .sum::<f64>()
        / blocks as f64
}

pub fn independence_test(panel: &Panel, k: usize, alpha: f64) -> Result<IndependenceReport> {
    let m = panel.m();
    if m < 2 {
        return Err(Error::DegenerateTest);
    }
    let k_prime = 2 * k + 1;
    if k_prime < m {
        return Err(Error::InvalidSmoother { k_prime, m });
    }
    let mut n_used = panel.n();
    let spec = if n_used % 2 == 0 {
        log::warn!("n = {n_used} is even; dropping the last observation for the independence test");
        n_used -= 1;
        dft_all(&panel.truncated(n_used)?)?
    } else {
        dft_all(panel)?
    };
    let series = smoothed_spectral_matrices(&spec, k)?;
    let lambda_ls = lambda_stats(&series)?;
    let blocks = lambda_ls.len();
    let lambda_stat = -lambda_ls.iter().map(|l| libm::log(*l)).sum::<f64>() / blocks as f64;
    let mean = lambda_mean(m, k_prime);
    let variance = lambda_variance(m, k_prime, blocks);
    let s = (lambda_stat - mean) / libm::sqrt(variance);
    let p_value = normal_sf(s);
    Ok(IndependenceReport {
        lambda_ls,
        lambda_stat,
        mean,
        variance,
        s,
        p_value,
        alpha,
        reject: p_value < alpha,
        blocks,
        k,
        n_used,
    })
}
