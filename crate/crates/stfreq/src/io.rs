//! CSV formats for stations, panels and simulated periodograms.
//!
//! Stations: header `station_id,x1,...,xd`, one row per station.
//! Panels: header `t,<id1>,...,<idm>`, one row per time point, wide layout.
//! Lines starting with `#` are comments; fields are trimmed.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use stfreq_core::simulate::SimulatedPeriodograms;
use stfreq_core::{Panel, Station, StationSet};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: missing header")]
    MissingHeader { path: PathBuf },

    #[error("{path}:{line}: column `{column}` does not name a known station")]
    UnknownStationColumn {
        path: PathBuf,
        line: u64,
        column: String,
    },

    #[error("{path}:{line}: `{value}` is not a number")]
    NonNumericValue {
        path: PathBuf,
        line: u64,
        value: String,
    },

    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    RaggedRows {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        source: stfreq_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, IoError>;

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Records with their 1-based line numbers, skipping blank lines.
fn records<R: Read>(r: R, path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in reader(r).into_records() {
        let rec = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn number(field: &str, path: &Path, line: u64) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| IoError::NonNumericValue {
            path: path.to_path_buf(),
            line,
            value: field.to_string(),
        })
}

pub fn read_stations<R: Read>(r: R, path: &Path) -> Result<StationSet> {
    let recs = records(r, path)?;
    let Some(((_, header), rows)) = recs.split_first() else {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    };
    if header.len() < 2 || header.get(0) != Some("station_id") {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    }
    let width = header.len();
    let mut stations = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        if rec.len() != width {
            return Err(IoError::RaggedRows {
                path: path.to_path_buf(),
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
        let coords = rec
            .iter()
            .skip(1)
            .map(|f| number(f, path, *line))
            .collect::<Result<Vec<_>>>()?;
        stations.push(Station::new(&rec[0], coords));
    }
    StationSet::new(stations).map_err(|source| IoError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_stations(path: &Path) -> Result<StationSet> {
    read_stations(open(path)?, path)
}

/// Reads a wide panel; the stations of the result follow the column order.
/// Stations listed in `stations` without a panel column are dropped.
pub fn read_panel<R: Read>(stations: &StationSet, r: R, path: &Path) -> Result<Panel> {
    let recs = records(r, path)?;
    let Some(((header_line, header), rows)) = recs.split_first() else {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    };
    if header.len() < 2 || header.get(0) != Some("t") {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    }
    let mut ordered = Vec::with_capacity(header.len() - 1);
    for column in header.iter().skip(1) {
        let idx = stations
            .position(column)
            .ok_or_else(|| IoError::UnknownStationColumn {
                path: path.to_path_buf(),
                line: *header_line,
                column: column.to_string(),
            })?;
        ordered.push(stations.stations()[idx].clone());
    }
    if ordered.len() < stations.len() {
        log::warn!(
            "{}: {} stations have no column and are ignored",
            path.display(),
            stations.len() - ordered.len()
        );
    }
    let m = ordered.len();
    let n = rows.len();
    let mut values = vec![0.0; m * n];
    for (t, (line, rec)) in rows.iter().enumerate() {
        if rec.len() != m + 1 {
            return Err(IoError::RaggedRows {
                path: path.to_path_buf(),
                line: *line,
                expected: m + 1,
                found: rec.len(),
            });
        }
        number(&rec[0], path, *line)?;
        for i in 0..m {
            values[i * n + t] = number(&rec[i + 1], path, *line)?;
        }
    }
    let invalid = |source| IoError::Invalid {
        path: path.to_path_buf(),
        source,
    };
    let set = StationSet::new(ordered).map_err(invalid)?;
    Panel::new(set, values, n).map_err(invalid)
}

pub fn load_panel(stations_file: &Path, panel_file: &Path) -> Result<Panel> {
    let stations = load_stations(stations_file)?;
    read_panel(&stations, open(panel_file)?, panel_file)
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Floats are written with Rust's shortest round-trip formatting.
pub fn write_panel<W: Write>(panel: &Panel, w: W, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = write_err(path);
    let mut header = vec!["t".to_string()];
    header.extend((0..panel.m()).map(|i| panel.stations().id(i).to_string()));
    out.write_record(&header).map_err(&err)?;
    for t in 0..panel.n() {
        let mut row = vec![(t + 1).to_string()];
        row.extend((0..panel.m()).map(|i| panel.value(i, t).to_string()));
        out.write_record(&row).map_err(&err)?;
    }
    out.flush().map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_stations<W: Write>(stations: &StationSet, w: W, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = write_err(path);
    let mut header = vec!["station_id".to_string()];
    header.extend((1..=stations.dim()).map(|k| format!("x{k}")));
    out.write_record(&header).map_err(&err)?;
    for s in stations.stations() {
        let mut row = vec![s.id.clone()];
        row.extend(s.coords.iter().map(f64::to_string));
        out.write_record(&row).map_err(&err)?;
    }
    out.flush().map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn join_h(h: &[f64]) -> String {
    h.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn split_h(s: &str, path: &Path, line: u64) -> Result<Vec<f64>> {
    s.split(';').map(|c| number(c.trim(), path, line)).collect()
}

/// Long format `lag,h,pair,k,periodogram` over the full Fourier grid; `h`
/// components are separated by `;`.
pub fn write_periodograms<W: Write>(sim: &SimulatedPeriodograms, w: W, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = write_err(path);
    out.write_record(["lag", "h", "pair", "k", "periodogram"])
        .map_err(&err)?;
    for (l, lag) in sim.lags.iter().enumerate() {
        let h = join_h(&lag.h);
        for (p, row) in lag.pairs.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                out.write_record([
                    l.to_string(),
                    h.clone(),
                    p.to_string(),
                    k.to_string(),
                    v.to_string(),
                ])
                .map_err(&err)?;
            }
        }
    }
    out.flush().map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_periodograms<R: Read>(r: R, path: &Path) -> Result<SimulatedPeriodograms> {
    use stfreq_core::simulate::LagPeriodograms;
    let recs = records(r, path)?;
    let Some(((_, header), rows)) = recs.split_first() else {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    };
    if header.iter().collect::<Vec<_>>() != ["lag", "h", "pair", "k", "periodogram"] {
        return Err(IoError::MissingHeader {
            path: path.to_path_buf(),
        });
    }
    let mut lags: Vec<LagPeriodograms> = Vec::new();
    let mut n = 0;
    for (line, rec) in rows {
        if rec.len() != 5 {
            return Err(IoError::RaggedRows {
                path: path.to_path_buf(),
                line: *line,
                expected: 5,
                found: rec.len(),
            });
        }
        let index = |f: &str| {
            f.parse::<usize>().map_err(|_| IoError::NonNumericValue {
                path: path.to_path_buf(),
                line: *line,
                value: f.to_string(),
            })
        };
        let (l, p, k) = (index(&rec[0])?, index(&rec[2])?, index(&rec[3])?);
        let value = number(&rec[4], path, *line)?;
        if l == lags.len() {
            lags.push(LagPeriodograms {
                h: split_h(&rec[1], path, *line)?,
                pairs: Vec::new(),
            });
        }
        let ragged = || IoError::RaggedRows {
            path: path.to_path_buf(),
            line: *line,
            expected: 0,
            found: 0,
        };
        let lag = lags.get_mut(l).ok_or_else(ragged)?;
        if p == lag.pairs.len() {
            lag.pairs.push(Vec::new());
        }
        let row = lag.pairs.get_mut(p).ok_or_else(ragged)?;
        if k != row.len() {
            return Err(ragged());
        }
        row.push(value);
        n = n.max(row.len());
    }
    if lags.iter().flat_map(|l| &l.pairs).any(|row| row.len() != n) {
        return Err(IoError::RaggedRows {
            path: path.to_path_buf(),
            line: 0,
            expected: n,
            found: 0,
        });
    }
    Ok(SimulatedPeriodograms { n, lags })
}

pub fn load_periodograms(path: &Path) -> Result<SimulatedPeriodograms> {
    read_periodograms(open(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.csv")
    }

    fn one_station() -> StationSet {
        read_stations("station_id,x1,x2\na,0,0\n".as_bytes(), p()).unwrap()
    }

    #[test]
    fn empty_panel_is_missing_header() {
        assert!(matches!(
            read_panel(&one_station(), "".as_bytes(), p()),
            Err(IoError::MissingHeader { .. })
        ));
        assert!(matches!(
            read_panel(&one_station(), "# only a comment\n".as_bytes(), p()),
            Err(IoError::MissingHeader { .. })
        ));
    }

    #[test]
    fn minimal_panel() {
        let panel =
            read_panel(&one_station(), "t,a\n1,1\n2,2\n3,3\n4,4\n".as_bytes(), p()).unwrap();
        assert_eq!((panel.m(), panel.n()), (1, 4));
        assert_eq!(panel.series(0), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn column_order_defines_station_order() {
        let set = read_stations("station_id,x1,x2\na,0,0\nb,1,0\nc,2,0\n".as_bytes(), p()).unwrap();
        let panel =
            read_panel(&set, "t, c ,a\n# comment\n1,5,6\n\n2,7,8\n".as_bytes(), p()).unwrap();
        assert_eq!(panel.stations().id(0), "c");
        assert_eq!(panel.stations().coords(0), &[2.0, 0.0]);
        assert_eq!(panel.series(1), &[6.0, 8.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let set = one_station();
        match read_panel(&set, "t,a\n1,1\n2,x\n".as_bytes(), p()) {
            Err(IoError::NonNumericValue { line, value, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(value, "x");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_panel(&set, "t,a\n1,1,2\n".as_bytes(), p()),
            Err(IoError::RaggedRows { line: 2, .. })
        ));
        assert!(matches!(
            read_panel(&set, "t,zz\n1,1\n".as_bytes(), p()),
            Err(IoError::UnknownStationColumn { line: 1, .. })
        ));
        let msg = read_panel(&set, "t,a\n1,nan\n".as_bytes(), Path::new("data/p.csv"))
            .unwrap_err()
            .to_string();
        assert!(msg.starts_with("data/p.csv:2:"), "{msg}");
    }

    #[test]
    fn panel_round_trip() {
        let set = read_stations("station_id,x1,x2\na,0,0\nb,1,0.5\n".as_bytes(), p()).unwrap();
        let text = "t,a,b\n1,0.1,-2.5\n2,1e-12,3\n3,0.30000000000000004,7\n";
        let panel = read_panel(&set, text.as_bytes(), p()).unwrap();
        let mut buf = Vec::new();
        write_panel(&panel, &mut buf, p()).unwrap();
        let again = read_panel(&set, buf.as_slice(), p()).unwrap();
        assert_eq!(panel, again);

        let mut sbuf = Vec::new();
        write_stations(&set, &mut sbuf, p()).unwrap();
        assert_eq!(read_stations(sbuf.as_slice(), p()).unwrap(), set);
    }

    #[test]
    fn periodogram_round_trip() {
        use stfreq_core::simulate::simulate_whittle_periodograms;
        use stfreq_core::specmodel::SpectrumParams;
        let psi = SpectrumParams::laplacian(1.0, 1.0, 2, 1.0, 0.5, 0.5).unwrap();
        let sim = simulate_whittle_periodograms(&psi, &[vec![1.0, 0.0], vec![0.5, 2.0]], 3, 10, 4)
            .unwrap();
        let mut buf = Vec::new();
        write_periodograms(&sim, &mut buf, p()).unwrap();
        assert_eq!(read_periodograms(buf.as_slice(), p()).unwrap(), sim);
    }
}
