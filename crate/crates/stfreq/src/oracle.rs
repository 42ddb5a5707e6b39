//! Numerical cross-checks of the closed-form spectra against quadrature.

use std::f64::consts::PI;

use stfreq_core::quadrature::{fourier_pair_oracle, marginalize_oracle, GridSpec};
use stfreq_core::specmodel::{
    cross_spectrum, temporal_spectrum, CrossSpectrumQuery, SpectrumParams,
};
use stfreq_core::Result;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
        }
    }

    pub fn rel_err(&self) -> f64 {
        ((self.value - self.reference) / self.reference).abs()
    }

    pub fn passed(&self) -> bool {
        self.rel_err() <= self.tolerance
    }
}

/// Smoothness values of the consistency triangle.
pub const TRIANGLE_NUS: [f64; 3] = [1.0, 1.5, 2.0];

fn cross(params: SpectrumParams, sep: [f64; 2], omega: f64, h: &[f64]) -> Result<f64> {
    cross_spectrum(
        &CrossSpectrumQuery {
            separation: sep.to_vec(),
            omega,
            params,
        },
        h,
    )
}

/// Quadrature marginal, closed-form temporal spectrum and the small-separation
/// cross-spectrum, pairwise, for `d = 2`; plus the unit-parameter checkpoint.
pub fn consistency_triangle() -> Result<Vec<Check>> {
    let tol = 1e-4;
    let unit = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.0, 0.0)?;
    let mut checks = vec![Check::new(
        "cross_spectrum at unit parameters, |L| = 1, vs 0.0076233",
        cross(unit, [1.0, 0.0], 0.0, &[1.0, 0.0])?,
        0.007_623_3,
        tol,
    )];
    let (h, omega) = ([1.5, 0.0], 0.9);
    for nu in TRIANGLE_NUS {
        let p = SpectrumParams::laplacian(1.3, nu, 2, 1.0, 0.5, 0.7)?;
        let quad = marginalize_oracle(omega, &p, &h, &GridSpec::default())?;
        let closed = temporal_spectrum(omega, &p, &h)?;
        let limit = cross(p, [1e-6, 0.0], omega, &h)?;
        checks.push(Check::new(
            format!("nu = {nu}: temporal_spectrum vs quadrature"),
            closed,
            quad,
            tol,
        ));
        checks.push(Check::new(
            format!("nu = {nu}: cross_spectrum(|L| -> 0) vs temporal_spectrum"),
            limit,
            closed,
            tol,
        ));
        checks.push(Check::new(
            format!("nu = {nu}: cross_spectrum(|L| -> 0) vs quadrature"),
            limit,
            quad,
            tol,
        ));
    }
    Ok(checks)
}

/// Radius and radial panels for the Fourier-pair quadrature: the neglected
/// tail `int_R^inf rho^(1 - 4 nu) d rho` stays well below the tolerance.
fn fourier_grid(nu: f64) -> (f64, usize) {
    let radius = if nu < 1.25 { 400.0 } else { 80.0 };
    (radius, (radius * 100.0) as usize)
}

/// Two-dimensional quadrature of `exp(i lambda . L) f(lambda, omega)` vs the
/// Bessel-K closed form at `|L| in {0.5, 1, 2}`.
pub fn fourier_pair_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for nu in TRIANGLE_NUS {
        let p = SpectrumParams::laplacian(1.0, nu, 2, 1.0, 0.5, 0.6)?;
        let (h, omega) = ([2.0, 0.0], 0.5);
        let (radius, panels) = fourier_grid(nu);
        for dist in [0.5, 1.0, 2.0] {
            let angle: f64 = 0.3;
            let sep = [dist * angle.cos(), dist * angle.sin()];
            let closed = cross(p, sep, omega, &h)?;
            let quad = fourier_pair_oracle(sep, omega, &p, &h, radius, panels)?;
            checks.push(Check::new(
                format!("nu = {nu}, |L| = {dist}: Fourier pair"),
                closed,
                quad,
                1e-4,
            ));
        }
    }
    Ok(checks)
}

/// `2 pi` times the literal/consistent ratio of the temporal-spectrum constant
/// at `d = 2`; equals 1 only if both conventions agree.
pub fn literal_constant_ratio() -> Result<f64> {
    use stfreq_core::specmodel::{temporal_spectrum_with, Normalization};
    let p = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.0, 0.0)?;
    let lit = temporal_spectrum_with(0.0, &p, &[1.0, 0.0], Normalization::Literal)?;
    let con = temporal_spectrum_with(0.0, &p, &[1.0, 0.0], Normalization::Consistent)?;
    Ok(lit / con / (2.0 * PI))
}
