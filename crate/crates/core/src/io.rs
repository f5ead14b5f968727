//! Point-cloud text input and CSV output.
//!
//! Input is one point per line with comma- or whitespace-separated reals.
//! Blank lines and lines starting with `#` are skipped. Floats are written
//! with 17 significant digits, which round-trips every `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::medial::MedialPoint;
use crate::point::{Point, PointCloud};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_cloud<R: Read>(reader: R) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut dim = None;
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let coords = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Parse { line: lineno, msg: "invalid number".into() })?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse { line: lineno, msg: format!("expected {d} columns, found {}", coords.len()) })
            }
            _ => {}
        }
        let p = Point::new(&coords).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn read_cloud_file(path: &Path) -> Result<PointCloud> {
    read_cloud(File::open(path)?)
}

pub fn write_points_csv<W: Write>(mut w: W, points: &[Point]) -> Result<()> {
    let d = points.first().map_or(0, |p| p.dim());
    let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.as_slice().iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Columns: `m1..md, dist, mu, n_witnesses, s1..sd` (the ray source).
pub fn write_medial_csv<W: Write>(mut w: W, points: &[MedialPoint]) -> Result<()> {
    let d = points.first().map_or(0, |p| p.m.dim());
    let mut header: Vec<String> = (1..=d).map(|i| format!("m{i}")).collect();
    header.extend(["dist", "mu", "n_witnesses"].map(String::from));
    header.extend((1..=d).map(|i| format!("s{i}")));
    writeln!(w, "{}", header.join(","))?;
    for p in points {
        let mut row: Vec<String> = p.m.as_slice().iter().map(|v| fmt_f64(*v)).collect();
        row.push(fmt_f64(p.dist));
        row.push(fmt_f64(p.mu));
        row.push(p.witnesses.len().to_string());
        match &p.source {
            Some(s) => row.extend(s.as_slice().iter().map(|v| fmt_f64(*v))),
            None => row.extend((0..d).map(|_| String::new())),
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_separators_and_comments() {
        let c = read_cloud("# header\n1,2\n\n3 4\n  5,\t6  \n".as_bytes()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.points()[2].as_slice(), &[5.0, 6.0]);
    }

    #[test]
    fn reports_line_of_bad_number() {
        let e = read_cloud("1,2,x\n".as_bytes()).unwrap_err();
        assert_eq!(e.to_string(), "line 1: invalid number");
        let e = read_cloud("1,2\n# c\n3,nan\n".as_bytes()).unwrap_err();
        assert_eq!(e.to_string(), "line 3: invalid number");
    }

    #[test]
    fn ragged_rows_rejected() {
        let e = read_cloud("1,2\n3,4,5\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(e.is_input_error());
    }

    #[test]
    fn empty_input_is_empty_set() {
        assert!(matches!(read_cloud("# nothing\n".as_bytes()), Err(Error::EmptySet)));
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
