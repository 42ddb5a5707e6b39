//! Station geometry, observation panels and spatial-lag pair sets.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Absolute slack added to the lag tolerance so that lags read back from
/// decimal text (e.g. `0.3 - 0.1`) still match exactly-specified lags.
const MATCH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Station {
    pub id: String,
    pub coords: Vec<f64>,
}

impl Station {
    pub fn new(id: impl Into<String>, coords: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            coords,
        }
    }
}

/// A set of uniquely named stations in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSet {
    stations: Vec<Station>,
    dim: usize,
}

impl StationSet {
    /// Validates dimensions and ids. Stations sharing coordinates are kept
    /// but reported through `log::warn!`, since they produce zero-lag pairs.
    pub fn new(stations: Vec<Station>) -> Result<Self> {
        let first = stations
            .first()
            .ok_or_else(|| Error::InvalidPanel("station set is empty".into()))?;
        let dim = first.coords.len();
        if dim == 0 {
            return Err(Error::InvalidPanel(
                "stations need at least one coordinate".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for s in &stations {
            if s.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.coords.len(),
                });
            }
            if s.coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPanel(format!(
                    "station {} has a non-finite coordinate",
                    s.id
                )));
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidPanel(format!(
                    "duplicate station id {}",
                    s.id
                )));
            }
        }
        let set = Self { stations, dim };
        for (i, j) in set.duplicate_coordinates() {
            log::warn!(
                "stations {} and {} share coordinates; they form zero-lag pairs",
                set.stations[i].id,
                set.stations[j].id
            );
        }
        Ok(set)
    }

    /// A regular `nx` by `ny` grid with the given spacing, ids `s<ix>_<iy>`,
    /// ordered with `x` varying slowest.
    pub fn grid(nx: usize, ny: usize, spacing: f64) -> Self {
        let mut stations = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                stations.push(Station::new(
                    format!("s{ix}_{iy}"),
                    alloc::vec![ix as f64 * spacing, iy as f64 * spacing],
                ));
            }
        }
        Self { stations, dim: 2 }
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.stations[i].coords
    }

    pub fn id(&self, i: usize) -> &str {
        &self.stations[i].id
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    /// Index pairs `(i, j)`, `i < j`, whose coordinates coincide exactly.
    pub fn duplicate_coordinates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.stations[i].coords == self.stations[j].coords {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// `m` stations by `n` equally spaced time points, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    stations: StationSet,
    values: Vec<f64>,
    n: usize,
}

impl Panel {
    pub fn new(stations: StationSet, values: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPanel("panel has no time points".into()));
        }
        let m = stations.len();
        if values.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPanel(format!(
                "non-finite value at station {}, time {}",
                stations.id(pos / n),
                pos % n + 1
            )));
        }
        Ok(Self {
            stations,
            values,
            n,
        })
    }

    /// Builds a panel from one series per station.
    pub fn from_series(stations: StationSet, series: Vec<Vec<f64>>) -> Result<Self> {
        if series.len() != stations.len() {
            return Err(Error::DimensionMismatch {
                expected: stations.len(),
                found: series.len(),
            });
        }
        let n = series.first().map_or(0, Vec::len);
        if let Some(bad) = series.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let values = series.into_iter().flatten().collect();
        Self::new(stations, values, n)
    }

    pub fn stations(&self) -> &StationSet {
        &self.stations
    }

    pub fn m(&self) -> usize {
        self.stations.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Value at station `i` and zero-based time index `t`.
    pub fn value(&self, i: usize, t: usize) -> f64 {
        self.values[i * self.n + t]
    }

    /// Keeps the first `n` time points.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(Error::InvalidPanel(format!(
                "cannot truncate {} time points to {n}",
                self.n
            )));
        }
        let values = (0..self.m())
            .flat_map(|i| self.series(i)[..n].iter().copied())
            .collect();
        Self::new(self.stations.clone(), values, n)
    }

    /// Applies `f(station, t, value)` to every entry.
    pub fn map(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Result<Self> {
        let n = self.n;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(pos, &v)| f(pos / n, pos % n, v))
            .collect();
        Self::new(self.stations.clone(), values, n)
    }
}

/// Directed station pairs `(i, j)` with `coords(i) - coords(j)` within
/// `tolerance` of `lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagPairSet {
    pub lag: Vec<f64>,
    pub tolerance: f64,
    pub pairs: Vec<(usize, usize)>,
}

impl LagPairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn lag_norm(&self) -> f64 {
        norm(&self.lag)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Collects every ordered pair whose separation lies in the Euclidean ball of
/// radius `tolerance` around `h`. Pairs are sorted by `(i, j)` and self pairs
/// are included when `h` is (near) zero.
pub fn build_lag_pairs(stations: &StationSet, h: &[f64], tolerance: f64) -> Result<LagPairSet> {
    if h.len() != stations.dim() {
        return Err(Error::DimensionMismatch {
            expected: stations.dim(),
            found: h.len(),
        });
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::InvalidTolerance(tolerance));
    }
    let radius = tolerance + MATCH_SLACK * (1.0 + norm(h));
    let m = stations.len();
    let mut pairs = Vec::new();
    for i in 0..m {
        let ci = stations.coords(i);
        for j in 0..m {
            let cj = stations.coords(j);
            let dist2: f64 = ci
                .iter()
                .zip(cj)
                .zip(h)
                .map(|((a, b), hk)| {
                    let e = a - b - hk;
                    e * e
                })
                .sum();
            if libm::sqrt(dist2) <= radius {
                pairs.push((i, j));
            }
        }
    }
    Ok(LagPairSet {
        lag: h.to_vec(),
        tolerance,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn unit_square() -> StationSet {
        StationSet::grid(2, 2, 1.0)
    }

    #[test]
    fn unit_grid_has_two_pairs_at_unit_lag() {
        let pairs = build_lag_pairs(&unit_square(), &[1.0, 0.0], 0.0).unwrap();
        assert_eq!(pairs.len(), 2);
        for &(i, j) in &pairs.pairs {
            let s = unit_square();
            assert_eq!(s.coords(i)[0] - s.coords(j)[0], 1.0);
        }
    }

    #[test]
    fn lag_beyond_diameter_is_empty() {
        let pairs = build_lag_pairs(&unit_square(), &[5.0, 5.0], 0.5).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn zero_lag_gives_self_pairs() {
        let pairs = build_lag_pairs(&unit_square(), &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(pairs.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn wrong_lag_dimension_is_rejected() {
        let err = build_lag_pairs(&unit_square(), &[1.0], 0.0).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn negative_tolerance_is_rejected() {
        assert!(build_lag_pairs(&unit_square(), &[1.0, 0.0], -0.1).is_err());
    }

    #[test]
    fn station_set_validation() {
        assert!(StationSet::new(vec![]).is_err());
        let dup = vec![Station::new("a", vec![0.0]), Station::new("a", vec![1.0])];
        assert!(StationSet::new(dup).is_err());
        let ragged = vec![
            Station::new("a", vec![0.0]),
            Station::new("b", vec![1.0, 2.0]),
        ];
        assert!(matches!(
            StationSet::new(ragged),
            Err(Error::DimensionMismatch { .. })
        ));
        let colocated = vec![
            Station::new("a", vec![0.0, 1.0]),
            Station::new("b", vec![0.0, 1.0]),
        ];
        let set = StationSet::new(colocated).unwrap();
        assert_eq!(set.duplicate_coordinates(), vec![(0, 1)]);
    }

    #[test]
    fn panel_validation_and_access() {
        let set = StationSet::new(vec![Station::new("a", vec![0.0])]).unwrap();
        let p = Panel::new(set.clone(), vec![1.0, 2.0, 3.0, 4.0], 4).unwrap();
        assert_eq!((p.m(), p.n()), (1, 4));
        assert_eq!(p.series(0), &[1.0, 2.0, 3.0, 4.0]);
        assert!(Panel::new(set.clone(), vec![1.0, f64::NAN], 2).is_err());
        assert!(Panel::new(set.clone(), vec![1.0, 2.0, 3.0], 2).is_err());
        assert_eq!(p.truncated(3).unwrap().series(0), &[1.0, 2.0, 3.0]);
    }

    fn cloud(seed: u64, m: usize) -> StationSet {
        // cheap LCG, coordinates on a 0.1 lattice so that many lags coincide
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 30) as f64 * 0.1
        };
        StationSet::new(
            (0..m)
                .map(|i| Station::new(format!("p{i}"), vec![next(), next()]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn matches_exhaustive_scan() {
        for seed in 0..5 {
            let s = cloud(seed, 20);
            for h in [[0.3, 0.1], [0.0, 0.5], [-1.2, 0.7]] {
                let got = build_lag_pairs(&s, &h, 0.1).unwrap();
                let mut expected = Vec::new();
                for i in 0..s.len() {
                    for j in 0..s.len() {
                        let dx = s.coords(i)[0] - s.coords(j)[0] - h[0];
                        let dy = s.coords(i)[1] - s.coords(j)[1] - h[1];
                        if (dx * dx + dy * dy).sqrt() <= 0.1 + 1e-9 * (1.0 + norm(&h)) {
                            expected.push((i, j));
                        }
                    }
                }
                assert_eq!(got.pairs, expected);
            }
        }
    }

    proptest! {
        #[test]
        fn negated_lag_reverses_pairs(seed in 0u64..1000, hx in -2.0f64..2.0, hy in -2.0f64..2.0, tol in 0.0f64..0.5) {
            let s = cloud(seed, 12);
            let fwd = build_lag_pairs(&s, &[hx, hy], tol).unwrap();
            let bwd = build_lag_pairs(&s, &[-hx, -hy], tol).unwrap();
            let mut flipped: Vec<_> = bwd.pairs.iter().map(|&(i, j)| (j, i)).collect();
            flipped.sort_unstable();
            prop_assert_eq!(fwd.pairs, flipped);
        }

        #[test]
        fn pair_count_monotone_in_tolerance(seed in 0u64..1000, hx in -2.0f64..2.0, t1 in 0.0f64..0.5, dt in 0.0f64..0.5) {
            let s = cloud(seed, 12);
            let a = build_lag_pairs(&s, &[hx, 0.0], t1).unwrap();
            let b = build_lag_pairs(&s, &[hx, 0.0], t1 + dt).unwrap();
            prop_assert!(b.len() >= a.len());
            for &(i, j) in &b.pairs {
                let dx = s.coords(i)[0] - s.coords(j)[0] - hx;
                let dy = s.coords(i)[1] - s.coords(j)[1];
                prop_assert!((dx * dx + dy * dy).sqrt() <= t1 + dt + 1e-9 * (1.0 + hx.abs()));
            }
        }
    }
}
