//! Semicolon-separated accelerometer files with an `x;y;z` header.

use std::fmt::Write as _;

use super::IngestError;
use crate::kinematics::{AccelSeries, SeriesMeta};

pub const ACCEL_HEADER: &str = "x;y;z";

/// Parses an accelerometer CSV. Blank lines are ignored; CRLF endings are tolerated.
pub fn read_accel_csv(bytes: &[u8], sampling_rate: f64, meta: SeriesMeta) -> Result<AccelSeries, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::Format(format!("input is not UTF-8: {e}")))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));

    match lines.next() {
        Some((_, header)) if header.trim() == ACCEL_HEADER => {}
        Some((_, header)) => {
            return Err(IngestError::Format(format!("expected header `{ACCEL_HEADER}`, found `{header}`")))
        }
        None => return Err(IngestError::Format("missing header".into())),
    }

    let mut samples = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut sample = [0.0; 3];
        let mut cells = line.split(';');
        for (axis, slot) in sample.iter_mut().enumerate() {
            let cell = cells.next().ok_or_else(|| IngestError::Parse {
                line: line_no,
                message: format!("expected 3 cells, found {axis}"),
            })?;
            let value: f64 = cell.trim().parse().map_err(|_| IngestError::Parse {
                line: line_no,
                message: format!("`{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(IngestError::Parse { line: line_no, message: format!("`{cell}` is not finite") });
            }
            *slot = value;
        }
        if cells.next().is_some() {
            return Err(IngestError::Parse { line: line_no, message: "more than 3 cells".into() });
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(IngestError::EmptySeries);
    }
    Ok(AccelSeries::new(samples, sampling_rate, meta)?)
}

/// Writes the header and one `%.6f;%.6f;%.6f` line per sample.
pub fn write_accel_csv(series: &AccelSeries) -> Vec<u8> {
    write_samples_csv(&series.samples)
}

pub fn write_samples_csv(samples: &[[f64; 3]]) -> Vec<u8> {
    let mut out = String::with_capacity(8 + samples.len() * 30);
    out.push_str(ACCEL_HEADER);
    out.push('\n');
    for s in samples {
        // Avoid emitting "-0.000000" for tiny negatives so files stay canonical.
        let [x, y, z] = s.map(|v| if v.abs() < 5e-7 { 0.0 } else { v });
        let _ = writeln!(out, "{x:.6};{y:.6};{z:.6}");
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{Label, Provenance};
    use proptest::prelude::*;

    fn meta() -> SeriesMeta {
        SeriesMeta::new(Label::Fall, Provenance::Real)
    }

    #[test]
    fn single_row() {
        let s = read_accel_csv(b"x;y;z\n1.0;2.0;3.0\n", 50.0, meta()).unwrap();
        assert_eq!(s.samples, vec![[1.0, 2.0, 3.0]]);
        assert_eq!(s.sampling_rate, 50.0);
    }

    #[test]
    fn canonical_roundtrip_is_identity() {
        let text = "x;y;z\n1.000000;-2.500000;3.141593\n0.000000;0.000000;9.810000\n";
        let s = read_accel_csv(text.as_bytes(), 20.0, meta()).unwrap();
        assert_eq!(String::from_utf8(write_accel_csv(&s)).unwrap(), text);
    }

    #[test]
    fn comma_delimited_rejected() {
        assert!(matches!(read_accel_csv(b"x,y,z\n1,2,3\n", 20.0, meta()), Err(IngestError::Format(_))));
    }

    #[test]
    fn misordered_header_rejected() {
        assert!(matches!(read_accel_csv(b"y;x;z\n1;2;3\n", 20.0, meta()), Err(IngestError::Format(_))));
        assert!(matches!(read_accel_csv(b"", 20.0, meta()), Err(IngestError::Format(_))));
    }

    #[test]
    fn bad_cell_reports_line() {
        let err = read_accel_csv(b"x;y;z\n1;2;3\n1;abc;3\n", 20.0, meta()).unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 3, .. }), "{err:?}");
        let err = read_accel_csv(b"x;y;z\n1;2\n", 20.0, meta()).unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_body_rejected() {
        assert!(matches!(read_accel_csv(b"x;y;z\n", 20.0, meta()), Err(IngestError::EmptySeries)));
    }

    #[test]
    fn writer_edge_cases() {
        assert_eq!(write_samples_csv(&[]), b"x;y;z\n");
        assert_eq!(write_samples_csv(&[[0.0; 3]]), b"x;y;z\n0.000000;0.000000;0.000000\n");
        assert_eq!(write_samples_csv(&[[-1e-9, 0.0, 0.0]]), b"x;y;z\n0.000000;0.000000;0.000000\n");
    }

    proptest! {
        #[test]
        fn roundtrip_within_micro(rows in proptest::collection::vec(proptest::array::uniform3(-1e4f64..1e4), 1..40)) {
            let s = AccelSeries::new(rows.clone(), 100.0, meta()).unwrap();
            let back = read_accel_csv(&write_accel_csv(&s), 100.0, meta()).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in rows.iter().zip(&back.samples) {
                for k in 0..3 {
                    prop_assert!((a[k] - b[k]).abs() <= 1e-6);
                }
            }
        }
    }
}
