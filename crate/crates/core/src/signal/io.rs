use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::MultichannelSignal;
use crate::error::{Error, Result};

/// Reads an `N x m` signal, one time index per row and one channel per column.
///
/// Row numbers in errors are 1-based file lines; column numbers are 1-based.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<MultichannelSignal> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: line,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: line,
                column: c + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: line,
                    column: c + 1,
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let m =
        width.ok_or_else(|| Error::Shape(format!("{} contains no data rows", path.display())))?;
    MultichannelSignal::new(DMatrix::from_row_slice(rows, m, &values))
}

/// Writes the signal to `path`, going through a temporary sibling file so a
/// failed write never leaves a partial file behind.
pub fn save_csv(signal: &MultichannelSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(signal.len() * signal.channels() * 20);
    write_csv(signal, &mut buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_atomic(path, &buf)
}

/// Serializes rows as comma-separated decimal text. Every value is written
/// with enough digits to round-trip exactly.
pub fn write_csv<W: Write>(signal: &MultichannelSignal, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    let m = signal.channels();
    for i in 0..signal.len() {
        for c in 0..m {
            if c > 0 {
                out.write_all(b",")?;
            }
            write_number(&mut out, signal.get(i, c))?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn write_number<W: Write>(out: &mut W, v: f64) -> std::io::Result<()> {
    let a = v.abs();
    if v == 0.0 {
        write!(out, "0")
    } else if (1e-5..1e16).contains(&a) {
        write!(out, "{v}")
    } else {
        write!(out, "{v:e}")
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(io_err(e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "z.csv", "0,0\n0,0\n0,0\n0,0\n");
        let s = load_csv(&p, false).unwrap();
        assert_eq!((s.len(), s.channels()), (4, 2));
        assert!(s.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn header_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", "a,b\n1,2\n3,4\n");
        let s = load_csv(&p, true).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(1), vec![3.0, 4.0]);
    }

    #[test]
    fn ragged_row_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "1,2\n3");
        match load_csv(&p, false) {
            Err(Error::RaggedRow {
                row,
                expected,
                found,
            }) => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "n.csv", "1,2\n3,x\n");
        match load_csv(&p, false) {
            Err(Error::NonNumeric { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/definitely/missing.csv", false),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn single_zero_serializes_as_zero() {
        let s = MultichannelSignal::zeros(1, 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), "0");
    }

    #[test]
    fn preserves_row_count() {
        let dir = tempfile::tempdir().unwrap();
        let s =
            MultichannelSignal::new(DMatrix::from_fn(4096, 4, |i, j| (i * 4 + j) as f64 * 0.37))
                .unwrap();
        let p = dir.path().join("big.csv");
        save_csv(&s, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4096);
        assert_eq!(load_csv(&p, false).unwrap(), s);
    }
}
