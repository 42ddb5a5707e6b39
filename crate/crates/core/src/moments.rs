//! Time-domain Matheron estimators of the space-time variogram and covariance.
//!
//! Both estimators average over `N(h, u)`: every directed station pair
//! `(i, j)` with `s_i - s_j` within the tolerance of `h`, combined with every
//! admissible time pair `t_i - t_j = u`. Station means use plain `1/n`
//! averaging.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::panel::{build_lag_pairs, Panel};

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeLag {
    pub h: Vec<f64>,
    pub u: i64,
    pub tolerance: f64,
}

impl SpaceTimeLag {
    pub fn new(h: Vec<f64>, u: i64, tolerance: f64) -> Self {
        Self { h, u, tolerance }
    }
}

/// An estimate together with `|N(h, u)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagEstimate {
    pub value: f64,
    pub count: usize,
}

fn for_each_pair(
    panel: &Panel,
    lag: &SpaceTimeLag,
    mut visit: impl FnMut(usize, usize, usize, usize),
) -> Result<usize> {
    let n = panel.n() as i64;
    if lag.u.abs() >= n {
        return Err(Error::EmptyLagSet);
    }
    let pairs = build_lag_pairs(panel.stations(), &lag.h, lag.tolerance)?;
    if pairs.is_empty() {
        return Err(Error::EmptyLagSet);
    }
    // t_i - t_j = u with both in 0..n
    let (start, stop) = if lag.u >= 0 {
        (lag.u, n)
    } else {
        (0, n + lag.u)
    };
    for &(i, j) in &pairs.pairs {
        for ti in start..stop {
            let tj = ti - lag.u;
            visit(i, j, ti as usize, tj as usize);
        }
    }
    Ok(pairs.len() * (stop - start) as usize)
}

/// `(1/|N|) sum [Y_{t_i}(s_i) - Y_{t_j}(s_j)]^2`.
pub fn matheron_variogram(panel: &Panel, lag: &SpaceTimeLag) -> Result<LagEstimate> {
    let mut sum = 0.0;
    let count = for_each_pair(panel, lag, |i, j, ti, tj| {
        let d = panel.value(i, ti) - panel.value(j, tj);
        sum += d * d;
    })?;
    Ok(LagEstimate {
        value: sum / count as f64,
        count,
    })
}

/// `(1/|N|) sum [Y_{t_i}(s_i) - mean_i][Y_{t_j}(s_j) - mean_j]`.
pub fn sample_covariance(panel: &Panel, lag: &SpaceTimeLag) -> Result<LagEstimate> {
    let means = station_means(panel);
    let mut sum = 0.0;
    let count = for_each_pair(panel, lag, |i, j, ti, tj| {
        sum += (panel.value(i, ti) - means[i]) * (panel.value(j, tj) - means[j]);
    })?;
    Ok(LagEstimate {
        value: sum / count as f64,
        count,
    })
}

pub fn station_means(panel: &Panel) -> Vec<f64> {
    (0..panel.m())
        .map(|i| panel.series(i).iter().sum::<f64>() / panel.n() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Station, StationSet};
    use alloc::vec;

    fn toy() -> Panel {
        let set = StationSet::new(vec![
            Station::new("s1", vec![0.0, 0.0]),
            Station::new("s2", vec![1.0, 0.0]),
        ])
        .unwrap();
        Panel::from_series(set, vec![vec![1.0, 3.0], vec![2.0, 5.0]]).unwrap()
    }

    #[test]
    fn toy_variogram() {
        let est = matheron_variogram(&toy(), &SpaceTimeLag::new(vec![1.0, 0.0], 0, 0.0)).unwrap();
        assert_eq!(est.count, 2);
        assert!((est.value - 2.5).abs() < 1e-15);
    }

    #[test]
    fn toy_covariance() {
        let est = sample_covariance(&toy(), &SpaceTimeLag::new(vec![1.0, 0.0], 0, 0.0)).unwrap();
        assert_eq!(est.count, 2);
        assert!((est.value - 1.5).abs() < 1e-15);
    }

    #[test]
    fn self_lag_is_zero_and_variance() {
        let p = toy();
        let zero = SpaceTimeLag::new(vec![0.0, 0.0], 0, 0.0);
        assert_eq!(matheron_variogram(&p, &zero).unwrap().value, 0.0);
        // biased variances: station 1 -> 1.0, station 2 -> 2.25
        let c = sample_covariance(&p, &zero).unwrap();
        assert!((c.value - (1.0 + 2.25) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_zero_variogram() {
        let set = StationSet::grid(3, 3, 1.0);
        let p = Panel::new(set, vec![4.2; 9 * 6], 6).unwrap();
        for (h, u) in [([1.0, 0.0], 0), ([1.0, 1.0], 2), ([0.0, 2.0], -3)] {
            let est = matheron_variogram(&p, &SpaceTimeLag::new(h.to_vec(), u, 0.0)).unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn empty_lag_errors() {
        let p = toy();
        assert_eq!(
            matheron_variogram(&p, &SpaceTimeLag::new(vec![3.0, 0.0], 0, 0.0)),
            Err(Error::EmptyLagSet)
        );
        assert_eq!(
            sample_covariance(&p, &SpaceTimeLag::new(vec![1.0, 0.0], 2, 0.0)),
            Err(Error::EmptyLagSet)
        );
    }

    #[test]
    fn covariance_symmetric_under_lag_reversal() {
        let set = StationSet::grid(3, 2, 1.0);
        let series: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..9)
                    .map(|t| libm::sin((i * 9 + t) as f64 * 0.91))
                    .collect()
            })
            .collect();
        let p = Panel::from_series(set, series).unwrap();
        for u in -3i64..=3 {
            let fwd = sample_covariance(&p, &SpaceTimeLag::new(vec![1.0, 0.0], u, 0.0)).unwrap();
            let bwd = sample_covariance(&p, &SpaceTimeLag::new(vec![-1.0, 0.0], -u, 0.0)).unwrap();
            assert_eq!(fwd.count, bwd.count);
            assert!((fwd.value - bwd.value).abs() < 1e-14);
        }
    }
}
