//! Pooled Whittle estimation of the temporal-spectrum parameters.
//!
//! For lags `h_1..h_H` with pair sets `N(h_l)` the criterion is
//!
//! ```text
//! Q(psi) = (1/H) sum_l (1/|N(h_l)|) sum_{i in N(h_l)} sum_k [ln g0_l(omega_k) + I_i(omega_k) / g0_l(omega_k)]
//! ```
//!
//! Because `g0` is shared by every pair of a lag, this equals the single-pair
//! criterion applied to the pair-averaged periodogram, which is what is stored.
//! Free parameters are optimized in an unconstrained space: parameters with
//! one finite bound are log-transformed, parameters with two finite bounds use
//! a logistic map.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dft::SpectralPanel;
use crate::error::{Error, Result};
use crate::optimize::{bfgs, nelder_mead, BfgsOptions, NelderMeadOptions};
use crate::panel::{norm, LagPairSet};
use crate::simulate::SimulatedPeriodograms;
use crate::specmodel::{
    ln_temporal_spectrum_at, ln_temporal_spectrum_gradient, Normalization, ParamName,
    SpectrumParams,
};

/// Default frequency subset `k = 1..=(n-1)/2`: excludes `omega = 0` and, for
/// even `n`, `omega = pi`.
pub fn default_frequencies(n: usize) -> Vec<usize> {
    (1..=(n.saturating_sub(1)) / 2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamBound {
    pub lower: f64,
    pub upper: f64,
}

impl ParamBound {
    pub fn default_for(name: ParamName, d: usize) -> Self {
        let (lower, upper) = match name {
            ParamName::SigmaEta2 | ParamName::A0 | ParamName::C1 => (0.0, f64::INFINITY),
            ParamName::Nu => (d as f64 / 4.0, f64::INFINITY),
            ParamName::A1 => (-10.0, 10.0),
            ParamName::C2 | ParamName::C3 => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Self { lower, upper }
    }

    fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    fn free_coord(&self, x: f64) -> f64 {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => {
                let p = (x - self.lower) / (self.upper - self.lower);
                libm::log(p / (1.0 - p))
            }
            (true, false) => libm::log(x - self.lower),
            (false, true) => libm::log(self.upper - x),
            (false, false) => x,
        }
    }

    fn natural_coord(&self, z: f64) -> f64 {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => self.lower + (self.upper - self.lower) / (1.0 + libm::exp(-z)),
            (true, false) => self.lower + libm::exp(z),
            (false, true) => self.upper - libm::exp(z),
            (false, false) => z,
        }
    }
}

/// Parameter template plus the free entries and their bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub template: SpectrumParams,
    pub free: Vec<(ParamName, ParamBound)>,
    pub normalization: Normalization,
}

impl ModelSpec {
    /// Frees `names` with their default bounds.
    pub fn new(template: SpectrumParams, names: &[ParamName]) -> Self {
        Self {
            template,
            free: names
                .iter()
                .map(|&n| (n, ParamBound::default_for(n, template.d)))
                .collect(),
            normalization: Normalization::Consistent,
        }
    }

    pub fn names(&self) -> Vec<ParamName> {
        self.free.iter().map(|(n, _)| *n).collect()
    }

    /// Free values currently stored in the template.
    pub fn initial(&self) -> Vec<f64> {
        self.free
            .iter()
            .map(|(n, _)| self.template.get(*n))
            .collect()
    }

    pub fn params_at(&self, psi: &[f64]) -> SpectrumParams {
        let mut p = self.template;
        for ((name, _), &v) in self.free.iter().zip(psi) {
            p.set(*name, v);
        }
        p
    }

    fn free_coord(&self, psi: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .zip(psi)
            .map(|((_, b), &x)| b.free_coord(x))
            .collect()
    }

    fn natural_coord(&self, z: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .zip(z)
            .map(|((_, b), &v)| b.natural_coord(v))
            .collect()
    }
}

/// Pair-averaged increment periodogram of one lag on the frequency subset.
#[derive(Debug, Clone, PartialEq)]
pub struct LagData {
    pub h: Vec<f64>,
    pub pairs: usize,
    pub mean_periodogram: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhittleProblem {
    n: usize,
    freqs: Vec<usize>,
    omegas: Vec<f64>,
    lags: Vec<LagData>,
    pub model: ModelSpec,
}

impl WhittleProblem {
    /// `lags` holds, for each spatial lag, one full-grid periodogram per pair.
    pub fn new(
        n: usize,
        lags: &[(Vec<f64>, Vec<Vec<f64>>)],
        model: ModelSpec,
        freqs: Option<Vec<usize>>,
    ) -> Result<Self> {
        let freqs = freqs.unwrap_or_else(|| default_frequencies(n));
        if freqs.is_empty() || freqs.iter().any(|&k| k >= n) {
            return Err(Error::InvalidParams(format!(
                "frequency subset must be nonempty and below n = {n}"
            )));
        }
        if lags.is_empty() {
            return Err(Error::EmptyLagSet);
        }
        let mut data = Vec::with_capacity(lags.len());
        for (h, rows) in lags {
            if rows.is_empty() {
                return Err(Error::EmptyLagSet);
            }
            let mut mean = vec![0.0; freqs.len()];
            for row in rows {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: row.len(),
                    });
                }
                for (m, &k) in mean.iter_mut().zip(&freqs) {
                    if !(row[k] >= 0.0 && row[k].is_finite()) {
                        return Err(Error::InvalidParams(format!(
                            "periodogram ordinate {k} is {}",
                            row[k]
                        )));
                    }
                    *m += row[k];
                }
            }
            mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
            data.push(LagData {
                h: h.clone(),
                pairs: rows.len(),
                mean_periodogram: mean,
            });
        }
        let omegas = freqs
            .iter()
            .map(|&k| 2.0 * PI * k as f64 / n as f64)
            .collect();
        Ok(Self {
            n,
            freqs,
            omegas,
            lags: data,
            model,
        })
    }

    /// Increment periodograms `|J_i - J_j|^2` of every pair of every lag.
    pub fn from_spectral(
        spec: &SpectralPanel,
        pair_sets: &[LagPairSet],
        model: ModelSpec,
    ) -> Result<Self> {
        let lags: Vec<(Vec<f64>, Vec<Vec<f64>>)> = pair_sets
            .iter()
            .map(|set| {
                let rows = set
                    .pairs
                    .iter()
                    .map(|&(i, j)| {
                        let (a, b) = (spec.row(i), spec.row(j));
                        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).collect()
                    })
                    .collect();
                (set.lag.clone(), rows)
            })
            .collect();
        Self::new(spec.n(), &lags, model, None)
    }

    pub fn from_simulated(sim: &SimulatedPeriodograms, model: ModelSpec) -> Result<Self> {
        let lags: Vec<(Vec<f64>, Vec<Vec<f64>>)> = sim
            .lags
            .iter()
            .map(|l| (l.h.clone(), l.pairs.clone()))
            .collect();
        Self::new(sim.n, &lags, model, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frequencies(&self) -> &[usize] {
        &self.freqs
    }

    pub fn lags(&self) -> &[LagData] {
        &self.lags
    }

    fn checked_params(&self, psi: &[f64]) -> Result<SpectrumParams> {
        if psi.len() != self.model.free.len() {
            return Err(Error::DimensionMismatch {
                expected: self.model.free.len(),
                found: psi.len(),
            });
        }
        let p = self.model.params_at(psi);
        p.validate()?;
        Ok(p)
    }

    /// The pooled criterion `Q(psi)`.
    pub fn criterion(&self, psi: &[f64]) -> Result<f64> {
        let params = self.checked_params(psi)?;
        let mut total = 0.0;
        for lag in &self.lags {
            total += single(
                &lag.mean_periodogram,
                &self.omegas,
                norm(&lag.h),
                &params,
                self.model.normalization,
            )?;
        }
        Ok(total / self.lags.len() as f64)
    }

    /// Per-frequency score contributions `s_k`, which sum to the gradient.
    pub fn scores(&self, psi: &[f64]) -> Result<Vec<Vec<f64>>> {
        let params = self.checked_params(psi)?;
        let idx: Vec<usize> = self
            .model
            .free
            .iter()
            .map(|(name, _)| ParamName::ALL.iter().position(|n| n == name).unwrap_or(0))
            .collect();
        let scale = 1.0 / self.lags.len() as f64;
        let mut out = vec![vec![0.0; psi.len()]; self.omegas.len()];
        for lag in &self.lags {
            let h_norm = norm(&lag.h);
            for (k, (&w, &ibar)) in self.omegas.iter().zip(&lag.mean_periodogram).enumerate() {
                let g = libm::exp(ln_temporal_spectrum_at(
                    h_norm,
                    w,
                    &params,
                    self.model.normalization,
                )?);
                let grad = ln_temporal_spectrum_gradient(h_norm, w, &params)?;
                let weight = scale * (1.0 - ibar / g);
                for (s, &j) in out[k].iter_mut().zip(&idx) {
                    *s += weight * grad[j];
                }
            }
        }
        Ok(out)
    }

    /// Analytic gradient of `Q` with respect to the free parameters.
    pub fn gradient(&self, psi: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; psi.len()];
        for s in self.scores(psi)? {
            for (a, b) in g.iter_mut().zip(s) {
                *a += b;
            }
        }
        Ok(g)
    }

    /// Hessian by central differences of the analytic gradient, symmetrized.
    #[allow(clippy::needless_range_loop)]
    pub fn hessian(&self, psi: &[f64], rel_step: f64) -> Result<Vec<Vec<f64>>> {
        let p = psi.len();
        let mut h = vec![vec![0.0; p]; p];
        let mut probe = psi.to_vec();
        for j in 0..p {
            let step = if psi[j] != 0.0 {
                rel_step * psi[j].abs()
            } else {
                rel_step
            };
            probe[j] = psi[j] + step;
            let up = self.gradient(&probe)?;
            probe[j] = psi[j] - step;
            let dn = self.gradient(&probe)?;
            probe[j] = psi[j];
            for (i, row) in h.iter_mut().enumerate() {
                row[j] = (up[i] - dn[i]) / (2.0 * step);
            }
        }
        for i in 1..p {
            for j in 0..i {
                let v = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        Ok(h)
    }
}

fn single(
    periodogram: &[f64],
    omegas: &[f64],
    h_norm: f64,
    params: &SpectrumParams,
    normalization: Normalization,
) -> Result<f64> {
    let mut q = 0.0;
    for (&w, &i) in omegas.iter().zip(periodogram) {
        let lg = ln_temporal_spectrum_at(h_norm, w, params, normalization)?;
        q += lg + i * libm::exp(-lg);
    }
    Ok(q)
}

/// `sum_k [ln g0(omega_k) + I(omega_k) / g0(omega_k)]` over `k = 1..=(n-1)/2`
/// for one full-grid increment periodogram.
pub fn whittle_single(periodogram: &[f64], h: &[f64], params: &SpectrumParams) -> Result<f64> {
    whittle_single_on(
        periodogram,
        &default_frequencies(periodogram.len()),
        h,
        params,
    )
}

/// As [`whittle_single`] on an explicit set of Fourier indices.
pub fn whittle_single_on(
    periodogram: &[f64],
    freqs: &[usize],
    h: &[f64],
    params: &SpectrumParams,
) -> Result<f64> {
    params.validate()?;
    let n = periodogram.len();
    let omegas: Vec<f64> = freqs
        .iter()
        .map(|&k| 2.0 * PI * k as f64 / n as f64)
        .collect();
    let values: Vec<f64> = freqs.iter().map(|&k| periodogram[k]).collect();
    single(&values, &omegas, norm(h), params, Normalization::Consistent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Optimizer {
    #[default]
    NelderMead,
    Bfgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub optimizer: Optimizer,
    pub nelder_mead: NelderMeadOptions,
    pub bfgs: BfgsOptions,
    /// Relative step of the finite-difference Hessian.
    pub hessian_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::NelderMead,
            nelder_mead: NelderMeadOptions::default(),
            bfgs: BfgsOptions::default(),
            hessian_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<ParamName>,
    pub psi_hat: Vec<f64>,
    pub params: SpectrumParams,
    pub criterion_value: f64,
    pub gradient: Vec<f64>,
    /// Sandwich covariance; `None` when the Hessian is singular.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub std_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// Best criterion value after each optimizer iteration.
    pub trace: Vec<f64>,
}

/// Minimizes the pooled criterion from `init` (natural parameter scale).
///
/// Running out of iterations is not an error: the best point found is
/// returned with `converged = false`.
pub fn fit(problem: &WhittleProblem, init: &[f64], options: &FitOptions) -> Result<FitResult> {
    let model = &problem.model;
    if init.len() != model.free.len() {
        return Err(Error::DimensionMismatch {
            expected: model.free.len(),
            found: init.len(),
        });
    }
    for ((name, bound), &x) in model.free.iter().zip(init) {
        if !bound.contains(x) {
            return Err(Error::InvalidParams(format!(
                "initial {} = {x} is not strictly inside ({}, {})",
                name.as_str(),
                bound.lower,
                bound.upper
            )));
        }
    }
    problem.criterion(init)?;

    let objective = |z: &[f64]| {
        problem
            .criterion(&model.natural_coord(z))
            .unwrap_or(f64::INFINITY)
    };
    let z0 = model.free_coord(init);
    let min = match options.optimizer {
        Optimizer::NelderMead => nelder_mead(objective, &z0, &options.nelder_mead),
        Optimizer::Bfgs => bfgs(objective, &z0, &options.bfgs),
    };
    let psi_hat = model.natural_coord(&min.x);
    let covariance = match sandwich_cov(problem, &psi_hat, options.hessian_step) {
        Ok(c) => Some(c),
        Err(Error::SingularHessian) => {
            log::warn!("Hessian is singular at the estimate; covariance omitted");
            None
        }
        Err(e) => return Err(e),
    };
    let std_errors = covariance
        .as_ref()
        .map(|c| (0..c.len()).map(|i| libm::sqrt(c[i][i].max(0.0))).collect());
    Ok(FitResult {
        names: model.names(),
        params: model.params_at(&psi_hat),
        criterion_value: problem.criterion(&psi_hat)?,
        gradient: problem.gradient(&psi_hat)?,
        psi_hat,
        covariance,
        std_errors,
        converged: min.converged,
        iterations: min.iterations,
        trace: min.trace,
    })
}

/// Sandwich covariance `H^-1 V H^-1` of the estimate, where `H` is the
/// finite-difference Hessian of `Q` and `V = sum_k s_k s_k^T` collects the
/// per-frequency score contributions.
pub fn sandwich_cov(
    problem: &WhittleProblem,
    psi_hat: &[f64],
    rel_step: f64,
) -> Result<Vec<Vec<f64>>> {
    let p = psi_hat.len();
    let h = problem.hessian(psi_hat, rel_step)?;
    let hm = DMatrix::from_fn(p, p, |i, j| h[i][j]);
    if hm.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularHessian);
    }
    // finite differences resolve the Hessian to roughly 1e-9 relative, so
    // smaller eigenvalues are indistinguishable from zero
    let eig = hm.clone().symmetric_eigenvalues();
    let largest = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let smallest = eig.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(largest > 0.0) || smallest < 1e-8 * largest {
        return Err(Error::SingularHessian);
    }
    let inv = hm.try_inverse().ok_or(Error::SingularHessian)?;
    let mut v = DMatrix::<f64>::zeros(p, p);
    for s in problem.scores(psi_hat)? {
        let col = DMatrix::from_column_slice(p, 1, &s);
        v += &col * col.transpose();
    }
    let cov = &inv * v * &inv;
    Ok((0..p)
        .map(|i| (0..p).map(|j| 0.5 * (cov[(i, j)] + cov[(j, i)])).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate_whittle_periodograms;
    use proptest::prelude::*;

    const TWO_PI2: f64 = 8.0 * PI * PI;

    /// `g0 = sigma^2 / (8 pi^2)` at every frequency: `d = 2`, `nu = 1`, `|P| = 1`.
    fn constant_model() -> ModelSpec {
        let t = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.0, 0.0).unwrap();
        ModelSpec::new(t, &[ParamName::SigmaEta2])
    }

    fn recovery_model() -> ModelSpec {
        let t = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        ModelSpec::new(t, &[ParamName::SigmaEta2, ParamName::A1, ParamName::C1])
    }

    fn lags() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]
    }

    #[test]
    fn single_at_the_model_spectrum() {
        let p = SpectrumParams::laplacian(1.3, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let n = 16;
        let h = [2.0, 0.0];
        let g: Vec<f64> = (0..n)
            .map(|k| {
                crate::specmodel::temporal_spectrum(2.0 * PI * k as f64 / n as f64, &p, &h).unwrap()
            })
            .collect();
        let q = whittle_single(&g, &h, &p).unwrap();
        let want: f64 = (1..=7).map(|k| libm::log(g[k]) + 1.0).sum();
        assert!((q - want).abs() < 1e-12);
    }

    #[test]
    fn constant_model_minimizer_is_the_mean() {
        let per: Vec<f64> = (0..21)
            .map(|k| 0.01 + 0.003 * ((k * 7) % 5) as f64)
            .collect();
        let problem = WhittleProblem::new(
            21,
            &[(vec![1.0, 0.0], vec![per.clone()])],
            constant_model(),
            None,
        )
        .unwrap();
        let mean: f64 = (1..=10).map(|k| per[k]).sum::<f64>() / 10.0;
        let res = fit(&problem, &[1.0], &FitOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.psi_hat[0] / TWO_PI2 / mean - 1.0).abs() < 1e-6);
        let bfgs_opts = FitOptions {
            optimizer: Optimizer::Bfgs,
            ..FitOptions::default()
        };
        let res = fit(&problem, &[1.0], &bfgs_opts).unwrap();
        assert!((res.psi_hat[0] / TWO_PI2 / mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noiseless_constant_model_recovers_truth() {
        let theta = 0.02;
        let per = vec![theta; 32];
        let problem =
            WhittleProblem::new(32, &[(vec![1.0, 0.0], vec![per])], constant_model(), None)
                .unwrap();
        let res = fit(&problem, &[theta * TWO_PI2], &FitOptions::default()).unwrap();
        assert!((res.psi_hat[0] / (theta * TWO_PI2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pooled_equals_hand_pooling() {
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 4, 64, 3).unwrap();
        let problem = WhittleProblem::from_simulated(&sim, recovery_model()).unwrap();
        let at = [1.2, 0.3, 0.7];
        let p = problem.model.params_at(&at);
        let mut hand = 0.0;
        for lag in &sim.lags {
            let per_lag: f64 = lag
                .pairs
                .iter()
                .map(|row| whittle_single(row, &lag.h, &p).unwrap())
                .sum();
            hand += per_lag / lag.pairs.len() as f64;
        }
        hand /= sim.lags.len() as f64;
        let q = problem.criterion(&at).unwrap();
        assert!((q - hand).abs() < 1e-12 * hand.abs());

        // H = 1 and one pair reduces to the single-pair criterion
        let one = WhittleProblem::new(
            64,
            &[(sim.lags[0].h.clone(), vec![sim.lags[0].pairs[0].clone()])],
            recovery_model(),
            None,
        )
        .unwrap();
        let single = whittle_single(&sim.lags[0].pairs[0], &sim.lags[0].h, &p).unwrap();
        assert!((one.criterion(&at).unwrap() - single).abs() < 1e-12 * single.abs());
    }

    #[test]
    fn duplicated_lags_leave_minimizer_unchanged() {
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 5, 128, 8).unwrap();
        let base: Vec<(Vec<f64>, Vec<Vec<f64>>)> = sim
            .lags
            .iter()
            .map(|l| (l.h.clone(), l.pairs.clone()))
            .collect();
        let doubled: Vec<_> = base.iter().chain(base.iter()).cloned().collect();
        let a = WhittleProblem::new(128, &base, recovery_model(), None).unwrap();
        let b = WhittleProblem::new(128, &doubled, recovery_model(), None).unwrap();
        let ra = fit(&a, &[1.0, 0.5, 0.5], &FitOptions::default()).unwrap();
        let rb = fit(&b, &[1.0, 0.5, 0.5], &FitOptions::default()).unwrap();
        for (x, y) in ra.psi_hat.iter().zip(&rb.psi_hat) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 3, 64, 4).unwrap();
        let mut model = recovery_model();
        model
            .free
            .push((ParamName::Nu, ParamBound::default_for(ParamName::Nu, 2)));
        model
            .free
            .push((ParamName::A0, ParamBound::default_for(ParamName::A0, 2)));
        let problem = WhittleProblem::from_simulated(&sim, model).unwrap();
        let at = [0.9, 0.4, 0.6, 1.2, 1.1];
        let g = problem.gradient(&at).unwrap();
        for i in 0..at.len() {
            let step = 1e-6;
            let mut up = at;
            up[i] += step;
            let mut dn = at;
            dn[i] -= step;
            let fd =
                (problem.criterion(&up).unwrap() - problem.criterion(&dn).unwrap()) / (2.0 * step);
            assert!(
                (fd - g[i]).abs() < 1e-5 * (1.0 + fd.abs()),
                "{i}: {fd} vs {}",
                g[i]
            );
        }
    }

    #[test]
    fn fit_has_small_gradient_and_psd_covariance() {
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 20, 512, 17).unwrap();
        let problem = WhittleProblem::from_simulated(&sim, recovery_model()).unwrap();
        let res = fit(&problem, &[1.5, 0.2, 0.9], &FitOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.trace.windows(2).all(|w| w[1] <= w[0]));
        let gnorm = libm::sqrt(res.gradient.iter().map(|g| g * g).sum());
        assert!(gnorm < 1e-4 * (1.0 + res.criterion_value.abs()));
        let cov = res.covariance.unwrap();
        let m = DMatrix::from_fn(3, 3, |i, j| cov[i][j]);
        assert!((m.clone() - m.transpose()).abs().max() < 1e-12);
        assert!(m.symmetric_eigenvalues().iter().all(|&e| e > -1e-8));
        let se = res.std_errors.unwrap();
        for ((x, t), s) in res.psi_hat.iter().zip([1.0, 0.5, 0.5]).zip(se) {
            assert!((x - t).abs() < 4.0 * s, "{x} vs {t} (se {s})");
        }
    }

    #[test]
    fn scale_equivariance() {
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 5, 128, 5).unwrap();
        let c2 = 9.0;
        let mut scaled = sim.clone();
        for lag in &mut scaled.lags {
            for row in &mut lag.pairs {
                row.iter_mut().for_each(|v| *v *= c2);
            }
        }
        let a = fit(
            &WhittleProblem::from_simulated(&sim, recovery_model()).unwrap(),
            &[1.0, 0.5, 0.5],
            &FitOptions::default(),
        )
        .unwrap();
        let b = fit(
            &WhittleProblem::from_simulated(&scaled, recovery_model()).unwrap(),
            &[c2, 0.5, 0.5],
            &FitOptions::default(),
        )
        .unwrap();
        assert!((b.psi_hat[0] / c2 - a.psi_hat[0]).abs() < 1e-6);
        assert!((b.psi_hat[1] - a.psi_hat[1]).abs() < 1e-6);
        assert!((b.psi_hat[2] - a.psi_hat[2]).abs() < 1e-6);
    }

    #[test]
    fn init_outside_bounds_is_rejected() {
        let problem = WhittleProblem::new(
            8,
            &[(vec![1.0, 0.0], vec![vec![1.0; 8]])],
            constant_model(),
            None,
        )
        .unwrap();
        assert!(matches!(
            fit(&problem, &[-1.0], &FitOptions::default()),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            fit(&problem, &[0.0], &FitOptions::default()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn unidentified_direction_gives_singular_hessian() {
        // sigma^2, a0 and c1 can be rescaled jointly without changing g0
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &lags(), 5, 64, 1).unwrap();
        let model = ModelSpec::new(
            psi,
            &[
                ParamName::SigmaEta2,
                ParamName::A0,
                ParamName::A1,
                ParamName::C1,
            ],
        );
        let problem = WhittleProblem::from_simulated(&sim, model).unwrap();
        let res = fit(&problem, &[1.0, 1.0, 0.5, 0.5], &FitOptions::default()).unwrap();
        assert_eq!(res.covariance, None);
        assert_eq!(
            sandwich_cov(&problem, &res.psi_hat, 1e-5),
            Err(Error::SingularHessian)
        );
    }

    proptest! {
        #[test]
        fn permuting_frequencies_is_harmless(seed in 0u64..1000) {
            let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
            let sim = simulate_whittle_periodograms(&psi, &[vec![1.0, 0.0]], 1, 32, seed).unwrap();
            let row = &sim.lags[0].pairs[0];
            let mut ks: Vec<usize> = (1..16).collect();
            let a = whittle_single_on(row, &ks, &[1.0, 0.0], &psi).unwrap();
            ks.reverse();
            ks.swap(2, 9);
            let b = whittle_single_on(row, &ks, &[1.0, 0.0], &psi).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.abs());
        }

        #[test]
        fn transforms_round_trip(x in -9.9f64..9.9, y in 1e-6f64..1e6) {
            let b = ParamBound::default_for(ParamName::A1, 2);
            prop_assert!((b.natural_coord(b.free_coord(x)) - x).abs() < 1e-9);
            let b = ParamBound::default_for(ParamName::SigmaEta2, 2);
            prop_assert!((b.natural_coord(b.free_coord(y)) / y - 1.0).abs() < 1e-12);
        }
    }
}
