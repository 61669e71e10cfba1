//! CSV emission and parsing for diagnostics series, plus atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRow, DiagnosticsSeries, COLUMNS};
use crate::error::{Error, Result};

/// Shortest format that round-trips every `f64` exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_to_csv(series: &DiagnosticsSeries) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in &series.rows {
        let cells: Vec<String> = row.to_array().iter().map(|&v| format_value(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn parse_series_csv(text: &str) -> Result<DiagnosticsSeries> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Empty("series CSV"))?;
    if header.split(',').map(str::trim).ne(COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut vals = [0.0; 12];
        let mut count = 0;
        for (k, cell) in line.split(',').enumerate() {
            if k >= vals.len() {
                count = k + 1;
                break;
            }
            vals[k] = cell.trim().parse().map_err(|_| {
                Error::Parse(format!("line {}: bad number {cell:?}", i + 1))
            })?;
            count = k + 1;
        }
        if count != vals.len() {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {count}",
                i + 1,
                vals.len()
            )));
        }
        rows.push(DiagnosticsRow::from_array(vals));
    }
    Ok(DiagnosticsSeries { rows })
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(seed: f64) -> DiagnosticsRow {
        let mut a = [0.0; 12];
        for (k, v) in a.iter_mut().enumerate() {
            *v = seed * (k as f64 + 1.0).sqrt() / 3.0;
        }
        DiagnosticsRow::from_array(a)
    }

    #[test]
    fn header_order() {
        let csv = series_to_csv(&DiagnosticsSeries::default());
        assert_eq!(
            csv,
            "t,sobolev_u,sobolev_ut,besov_u,besov_ut,lp2,linf,energy,relative_drift,\
             scaled_lp2,scaled_linf,besov_ratio\n"
        );
    }

    #[test]
    fn nan_survives_round_trip() {
        let mut r = row(1.0);
        r.besov_u = f64::NAN;
        let back = parse_series_csv(&series_to_csv(&DiagnosticsSeries { rows: vec![r] })).unwrap();
        assert!(back.rows[0].besov_u.is_nan());
        assert_eq!(back.rows[0].t, r.t);
    }

    #[test]
    fn malformed_input() {
        assert!(parse_series_csv("").is_err());
        assert!(parse_series_csv("t,u\n1,2\n").is_err());
        let good = series_to_csv(&DiagnosticsSeries { rows: vec![row(2.0)] });
        let short = good.rsplit_once(',').unwrap().0.to_string();
        assert!(parse_series_csv(&short).is_err());
        let bad = format!("{}\n{}\n", COLUMNS.join(","), ["abc"; 12].join(","));
        assert!(parse_series_csv(&bad).is_err());
        let long = format!("{},1\n", good.trim_end());
        assert!(parse_series_csv(&long).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("supercrit-out-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::collection::vec(prop::array::uniform12(-1e300f64..1e300), 0..20)) {
            let series = DiagnosticsSeries {
                rows: vals.into_iter().map(DiagnosticsRow::from_array).collect(),
            };
            let back = parse_series_csv(&series_to_csv(&series)).unwrap();
            prop_assert_eq!(back, series);
        }
    }
}
