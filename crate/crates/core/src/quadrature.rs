//! Numerical integrals of the space-time spectrum, used as oracles for the
//! closed forms in [`crate::specmodel`].
//!
//! The radial variable is mapped by `rho = c tan(theta)` with `c = |P_h|`, so
//! the integrand on `[0, pi/2]` has compact support and Simpson's rule
//! converges quickly. For `d = 2` the angle is integrated explicitly with the
//! trapezoidal rule, which is spectrally accurate for periodic integrands.

use alloc::vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specmodel::{poly_modsq, spectrum_st, SpectrumParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Simpson panels in the mapped radial variable (rounded up to even).
    pub radial_panels: usize,
    /// Trapezoid nodes over the angular span (`d = 2` only).
    pub angular_points: usize,
    /// Angular span; `2 pi` for the full plane, `pi` for a half-plane whose
    /// integral is doubled.
    pub angle_span: f64,
    /// Largest accepted Richardson error estimate, relative to the result.
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radial_panels: 400,
            angular_points: 16,
            angle_span: 2.0 * PI,
            tolerance: 1e-8,
        }
    }
}

fn simpson(panels: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let panels = panels + panels % 2;
    let step = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * step);
    }
    acc * step / 3.0
}

fn richardson(coarse: f64, fine: f64, tolerance: f64) -> Result<f64> {
    let estimate = (fine - coarse).abs() / 15.0;
    let value = fine + (fine - coarse) / 15.0;
    if !(estimate <= tolerance * value.abs()) {
        return Err(Error::GridTooCoarse {
            estimate,
            tolerance: tolerance * value.abs(),
        });
    }
    Ok(value)
}

/// Surface area of the unit sphere in `R^d`.
fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `g0(omega) = int_{R^d} f(lambda, omega) d lambda` by quadrature.
pub fn marginalize_oracle(
    omega: f64,
    params: &SpectrumParams,
    h: &[f64],
    grid: &GridSpec,
) -> Result<f64> {
    params.validate()?;
    let c = libm::sqrt(poly_modsq(h, omega, params)?);
    let d = params.d;
    let radial = |panels: usize| -> Result<f64> {
        let mut err = None;
        let mut lambda = vec![0.0; d];
        let total = simpson(panels, 0.0, 0.5 * PI, |theta| {
            if theta >= 0.5 * PI {
                return 0.0;
            }
            let rho = c * libm::tan(theta);
            let jac = c / (libm::cos(theta) * libm::cos(theta));
            let shell = if d == 2 {
                angular_mean(grid, |phi| {
                    lambda[0] = rho * libm::cos(phi);
                    lambda[1] = rho * libm::sin(phi);
                    eval(&lambda, omega, params, h, &mut err)
                }) * 2.0
                    * PI
            } else {
                lambda[0] = rho;
                eval(&lambda, omega, params, h, &mut err) * sphere_area(d)
            };
            shell * libm::pow(rho, d as f64 - 1.0) * jac
        });
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    };
    let coarse = radial(grid.radial_panels)?;
    let fine = radial(2 * grid.radial_panels)?;
    richardson(coarse, fine, grid.tolerance)
}

fn eval(
    lambda: &[f64],
    omega: f64,
    params: &SpectrumParams,
    h: &[f64],
    err: &mut Option<Error>,
) -> f64 {
    match spectrum_st(lambda, omega, params, h) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    }
}

/// Mean of `f` over the configured angular span.
fn angular_mean(grid: &GridSpec, mut f: impl FnMut(f64) -> f64) -> f64 {
    let k = grid.angular_points.max(1);
    let step = grid.angle_span / k as f64;
    (0..k).map(|i| f(i as f64 * step)).sum::<f64>() / k as f64
}

/// `int_{R^2} exp(i lambda . L) f(lambda, omega) d lambda` for `d = 2`.
///
/// The integrand is truncated at `|lambda| = radius`; the angular rule uses
/// enough nodes to resolve `cos(rho |L| cos phi)` at every radius.
pub fn fourier_pair_oracle(
    separation: [f64; 2],
    omega: f64,
    params: &SpectrumParams,
    h: &[f64],
    radius: f64,
    radial_panels: usize,
) -> Result<f64> {
    if params.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: params.d,
        });
    }
    params.validate()?;
    let dist = libm::sqrt(separation[0] * separation[0] + separation[1] * separation[1]);
    let mut err = None;
    let mut lambda = [0.0; 2];
    let integral = simpson(radial_panels, 0.0, radius, |rho| {
        let nodes = 2 * ((rho * dist) as usize / 2) + 32;
        let grid = GridSpec {
            angular_points: nodes,
            ..GridSpec::default()
        };
        let mean = angular_mean(&grid, |phi| {
            lambda[0] = rho * libm::cos(phi);
            lambda[1] = rho * libm::sin(phi);
            let phase = lambda[0] * separation[0] + lambda[1] * separation[1];
            libm::cos(phase) * eval(&lambda, omega, params, h, &mut err)
        });
        2.0 * PI * rho * mean
    });
    match err {
        Some(e) => Err(e),
        None => Ok(integral),
    }
}
