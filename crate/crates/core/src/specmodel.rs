//! Laplacian-model spectra of the increment process.
//!
//! With noise level `sigma^2`, smoothness `nu` and a polynomial `P_h(omega)`,
//! the space-time spectrum of the increments at lag `h` is
//!
//! ```text
//! f(lambda, omega) = sigma^2 / (2 pi)^(d+1) * (|lambda|^2 + |P_h(omega)|^2)^(-2 nu)
//! ```
//!
//! Its spatial Fourier transform at separation `L` is a Matérn-type Bessel-K
//! cross-spectrum, and the `L -> 0` limit is the temporal spectrum `g0`.
//!
//! The polynomial is `P_h(omega) = c0(h) + c1 (i omega) + c2 (i omega)^2 +
//! c3 (i omega)^3` with `c0(h) = a0 |h|^a1`; the default family keeps
//! `c2 = c3 = 0`.

use alloc::format;
use alloc::string::String;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::panel::norm;
use crate::special::{bessel_k, digamma, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolySpec {
    pub a0: f64,
    pub a1: f64,
    pub c1: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub c2: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub c3: f64,
}

impl PolySpec {
    pub fn first_order(a0: f64, a1: f64, c1: f64) -> Self {
        Self {
            a0,
            a1,
            c1,
            c2: 0.0,
            c3: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumParams {
    pub sigma_eta2: f64,
    pub nu: f64,
    pub d: usize,
    pub poly: PolySpec,
}

/// Constant in front of the temporal spectrum.
///
/// `Consistent` is the exact `lambda`-marginal of the space-time spectrum
/// and the `L -> 0` limit of the cross-spectrum. `Literal` uses the front
/// factor `1 / [(2 pi)^(d/2) 2^(d/2)]`, which for `d = 2` is `4 pi` times too
/// small a denominator; it is kept only for comparison output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Consistent,
    Literal,
}

/// Names of the entries of the parameter vector `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParamName {
    SigmaEta2,
    Nu,
    A0,
    A1,
    C1,
    C2,
    C3,
}

impl ParamName {
    pub const ALL: [ParamName; 7] = [
        ParamName::SigmaEta2,
        ParamName::Nu,
        ParamName::A0,
        ParamName::A1,
        ParamName::C1,
        ParamName::C2,
        ParamName::C3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::SigmaEta2 => "sigma_eta2",
            ParamName::Nu => "nu",
            ParamName::A0 => "a0",
            ParamName::A1 => "a1",
            ParamName::C1 => "c1",
            ParamName::C2 => "c2",
            ParamName::C3 => "c3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl SpectrumParams {
    /// The default first-order family `P_h = a0 |h|^a1 + i c1 omega`.
    pub fn laplacian(
        sigma_eta2: f64,
        nu: f64,
        d: usize,
        a0: f64,
        a1: f64,
        c1: f64,
    ) -> Result<Self> {
        let p = Self {
            sigma_eta2,
            nu,
            d,
            poly: PolySpec::first_order(a0, a1, c1),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.sigma_eta2 > 0.0 && self.sigma_eta2.is_finite()) {
            return bad(format!(
                "sigma_eta2 must be positive, got {}",
                self.sigma_eta2
            ));
        }
        if !(1..=3).contains(&self.d) {
            return bad(format!("space dimension must be 1, 2 or 3, got {}", self.d));
        }
        if !(self.nu.is_finite() && 4.0 * self.nu > self.d as f64) {
            return bad(format!(
                "need 4 nu > d, got nu = {} with d = {}",
                self.nu, self.d
            ));
        }
        if !(self.poly.a0 > 0.0 && self.poly.a0.is_finite()) {
            return bad(format!("a0 must be positive, got {}", self.poly.a0));
        }
        let p = &self.poly;
        if ![p.a1, p.c1, p.c2, p.c3].iter().all(|v| v.is_finite()) {
            return bad("polynomial coefficients must be finite".into());
        }
        Ok(())
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::SigmaEta2 => self.sigma_eta2,
            ParamName::Nu => self.nu,
            ParamName::A0 => self.poly.a0,
            ParamName::A1 => self.poly.a1,
            ParamName::C1 => self.poly.c1,
            ParamName::C2 => self.poly.c2,
            ParamName::C3 => self.poly.c3,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        match name {
            ParamName::SigmaEta2 => self.sigma_eta2 = value,
            ParamName::Nu => self.nu = value,
            ParamName::A0 => self.poly.a0 = value,
            ParamName::A1 => self.poly.a1 = value,
            ParamName::C1 => self.poly.c1 = value,
            ParamName::C2 => self.poly.c2 = value,
            ParamName::C3 => self.poly.c3 = value,
        }
    }

    /// `c0(h) = a0 |h|^a1`.
    pub fn c0(&self, h_norm: f64) -> f64 {
        self.poly.a0 * libm::pow(h_norm, self.poly.a1)
    }

    /// Real and imaginary parts of `P_h(omega)`.
    fn poly_parts(&self, h_norm: f64, omega: f64) -> Result<(f64, f64)> {
        let c0 = self.c0(h_norm);
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "c0(h) = {c0} at |h| = {h_norm}; it must be positive"
            )));
        }
        let p = &self.poly;
        let w2 = omega * omega;
        Ok((c0 - p.c2 * w2, omega * (p.c1 - p.c3 * w2)))
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// `|P_h(omega)|^2` for a lag given by its norm.
pub fn poly_modsq_at(h_norm: f64, omega: f64, params: &SpectrumParams) -> Result<f64> {
    let (re, im) = params.poly_parts(h_norm, omega)?;
    Ok(re * re + im * im)
}

/// `|P_h(omega, psi)|^2`.
pub fn poly_modsq(h: &[f64], omega: f64, params: &SpectrumParams) -> Result<f64> {
    params.check_dim(h)?;
    poly_modsq_at(norm(h), omega, params)
}

/// Space-time spectrum `f(lambda, omega)` of the increments at lag `h`.
pub fn spectrum_st(lambda: &[f64], omega: f64, params: &SpectrumParams, h: &[f64]) -> Result<f64> {
    params.validate()?;
    params.check_dim(lambda)?;
    let p2 = poly_modsq(h, omega, params)?;
    let l2: f64 = lambda.iter().map(|x| x * x).sum();
    let d = params.d as f64;
    Ok(params.sigma_eta2 / libm::pow(2.0 * PI, d + 1.0) * libm::pow(l2 + p2, -2.0 * params.nu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSpectrumQuery {
    pub separation: alloc::vec::Vec<f64>,
    pub omega: f64,
    pub params: SpectrumParams,
}

/// Covariance of the increment DFTs of two locations `L` apart:
///
/// ```text
/// g = sigma^2 / [(2 pi)^(d/2+1) 2^(2 nu - 1) Gamma(2 nu)] (|L| / |P|)^(2 nu - d/2) K_{2 nu - d/2}(|L| |P|)
/// ```
///
/// For `d = 2` the front factor is `(2 pi)^d`.
pub fn cross_spectrum(query: &CrossSpectrumQuery, h: &[f64]) -> Result<f64> {
    let params = &query.params;
    params.validate()?;
    params.check_dim(&query.separation)?;
    let dist = norm(&query.separation);
    if dist == 0.0 {
        return Err(Error::DomainError(
            "cross_spectrum needs a nonzero separation; use temporal_spectrum",
        ));
    }
    let p = libm::sqrt(poly_modsq(h, query.omega, params)?);
    let d = params.d as f64;
    let order = 2.0 * params.nu - d / 2.0;
    let ln_front = libm::log(params.sigma_eta2)
        - (d / 2.0 + 1.0) * libm::log(2.0 * PI)
        - (2.0 * params.nu - 1.0) * core::f64::consts::LN_2
        - ln_gamma(2.0 * params.nu)
        + order * libm::log(dist / p);
    Ok(libm::exp(ln_front) * bessel_k(order.abs(), dist * p)?)
}

/// `ln g0` at `|h|`, for the given normalization.
pub fn ln_temporal_spectrum_at(
    h_norm: f64,
    omega: f64,
    params: &SpectrumParams,
    normalization: Normalization,
) -> Result<f64> {
    let p2 = poly_modsq_at(h_norm, omega, params)?;
    let d = params.d as f64;
    let order = 2.0 * params.nu - d / 2.0;
    let ln_front = match normalization {
        Normalization::Consistent => {
            -(d + 1.0) * core::f64::consts::LN_2 - (d / 2.0 + 1.0) * libm::log(PI)
        }
        Normalization::Literal => {
            -0.5 * d * libm::log(2.0 * PI) - 0.5 * d * core::f64::consts::LN_2
        }
    };
    Ok(libm::log(params.sigma_eta2) + ln_front + ln_gamma(order)
        - ln_gamma(2.0 * params.nu)
        - order * libm::log(p2))
}

/// Temporal spectrum `g0(omega)` of the increments, the `L -> 0` limit of
/// [`cross_spectrum`]:
///
/// ```text
/// g0 = sigma^2 Gamma(2 nu - d/2) / [2^(d+1) pi^(d/2+1) Gamma(2 nu)] * |P|^-(4 nu - d)
/// ```
///
/// For `d = 2` this is `sigma^2 Gamma(2 nu - 1) / [(2 pi)^2 2 Gamma(2 nu)] |P|^-(4 nu - 2)`.
pub fn temporal_spectrum(omega: f64, params: &SpectrumParams, h: &[f64]) -> Result<f64> {
    temporal_spectrum_with(omega, params, h, Normalization::Consistent)
}

pub fn temporal_spectrum_with(
    omega: f64,
    params: &SpectrumParams,
    h: &[f64],
    normalization: Normalization,
) -> Result<f64> {
    params.validate()?;
    params.check_dim(h)?;
    Ok(libm::exp(ln_temporal_spectrum_at(
        norm(h),
        omega,
        params,
        normalization,
    )?))
}

/// Gradient of `ln g0(omega)` with respect to every entry of [`ParamName::ALL`].
pub fn ln_temporal_spectrum_gradient(
    h_norm: f64,
    omega: f64,
    params: &SpectrumParams,
) -> Result<[f64; 7]> {
    let (re, im) = params.poly_parts(h_norm, omega)?;
    let p2 = re * re + im * im;
    let d = params.d as f64;
    let order = 2.0 * params.nu - d / 2.0;
    let c0 = params.c0(h_norm);
    let w = omega;
    // d ln|P|^2 / d coefficient
    let dp_dc0 = 2.0 * re / p2;
    let dp_dc1 = 2.0 * im * w / p2;
    let dp_dc2 = -2.0 * re * w * w / p2;
    let dp_dc3 = -2.0 * im * w * w * w / p2;
    let ln_h = if h_norm > 0.0 { libm::log(h_norm) } else { 0.0 };
    Ok([
        1.0 / params.sigma_eta2,
        2.0 * digamma(order) - 2.0 * digamma(2.0 * params.nu) - 2.0 * libm::log(p2),
        -order * dp_dc0 * c0 / params.poly.a0,
        -order * dp_dc0 * c0 * ln_h,
        -order * dp_dc1,
        -order * dp_dc2,
        -order * dp_dc3,
    ])
}
