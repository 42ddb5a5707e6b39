//! JSON documents read and written by the command-line tool.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stfreq_core::simulate::SeparableSpec;
use stfreq_core::specmodel::SpectrumParams;
use stfreq_core::whittle::FitResult;
use stfreq_core::{Station, StationSet};

/// Where a simulation takes its stations from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationSource {
    /// Regular `nx x ny` grid with ids `s{ix}_{iy}`.
    Grid {
        nx: usize,
        ny: usize,
        spacing: f64,
    },
    /// A stations CSV file.
    File(PathBuf),
    List(Vec<StationEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationEntry {
    pub id: String,
    pub coords: Vec<f64>,
}

impl StationSource {
    pub fn resolve(&self) -> anyhow::Result<StationSet> {
        Ok(match self {
            StationSource::Grid { nx, ny, spacing } => StationSet::grid(*nx, *ny, *spacing),
            StationSource::File(path) => crate::io::load_stations(path)?,
            StationSource::List(list) => StationSet::new(
                list.iter()
                    .map(|s| Station::new(s.id.clone(), s.coords.clone()))
                    .collect(),
            )?,
        })
    }
}

/// Simulation request, e.g.
///
/// ```json
/// {"kind": "separable", "n": 512, "seed": 7,
///  "stations": {"grid": {"nx": 5, "ny": 5, "spacing": 1.0}},
///  "spatial": {"family": "exponential", "range": 3.0}, "rho": 0.5, "nugget": 0.0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub stations: Option<StationSource>,
    #[serde(flatten)]
    pub kind: SimKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimKind {
    /// Independent white noise; `sigmas` per station, or one `sigma` for all.
    White {
        #[serde(default)]
        sigmas: Option<Vec<f64>>,
        #[serde(default)]
        sigma: Option<f64>,
    },
    Separable(SeparableSpec),
    /// Increment periodograms drawn from the model's asymptotic distribution.
    WhittlePeriodogram {
        psi: SpectrumParams,
        lags: Vec<Vec<f64>>,
        pairs_per_lag: usize,
    },
}

/// Output of the `fit` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub parameters: Vec<String>,
    pub psi_hat: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub criterion: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub model: SpectrumParams,
    pub paper_constants: bool,
    pub trace_path: PathBuf,
}

impl FitReport {
    pub fn new(fit: &FitResult, paper_constants: bool, trace_path: PathBuf) -> Self {
        Self {
            parameters: fit.names.iter().map(|n| n.as_str().to_string()).collect(),
            psi_hat: fit.psi_hat.clone(),
            std_errors: fit.std_errors.clone(),
            covariance: fit.covariance.clone(),
            criterion: fit.criterion_value,
            gradient_norm: fit.gradient.iter().map(|g| g * g).sum::<f64>().sqrt(),
            converged: fit.converged,
            iterations: fit.iterations,
            model: fit.params,
            paper_constants,
            trace_path,
        }
    }
}

/// One row of the `fv_summary.json` nugget table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuggetSummaryRow {
    pub h: Vec<f64>,
    pub h_norm: f64,
    pub count: usize,
    pub integrated_fv: f64,
    pub integrated_fv_excl_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvSummary {
    pub kernel: String,
    pub half_width: usize,
    pub rows: Vec<NuggetSummaryRow>,
    pub skipped: Vec<Vec<f64>>,
    pub nugget_intercept: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_spec_parses_every_kind() {
        let sep: SimSpec = serde_json::from_str(
            r#"{"kind":"separable","n":64,"seed":3,"stations":{"grid":{"nx":2,"ny":2,"spacing":1.0}},
                "spatial":{"family":"exponential","range":3.0},"rho":0.5}"#,
        )
        .unwrap();
        match sep.kind {
            SimKind::Separable(s) => assert_eq!((s.rho, s.nugget), (0.5, 0.0)),
            other => panic!("{other:?}"),
        }
        let white: SimSpec = serde_json::from_str(
            r#"{"kind":"white","n":8,"seed":1,"sigma":2.0,
                "stations":{"list":[{"id":"a","coords":[0,0]}]}}"#,
        )
        .unwrap();
        assert_eq!(white.stations.unwrap().resolve().unwrap().len(), 1);
        let wp: SimSpec = serde_json::from_str(
            r#"{"kind":"whittle-periodogram","n":16,"seed":1,"pairs_per_lag":2,"lags":[[1,0]],
                "psi":{"sigma_eta2":1,"nu":1,"d":2,"poly":{"a0":1,"a1":0.5,"c1":0.5}}}"#,
        )
        .unwrap();
        assert!(matches!(
            wp.kind,
            SimKind::WhittlePeriodogram {
                pairs_per_lag: 2,
                ..
            }
        ));
    }
}
