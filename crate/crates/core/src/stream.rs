//! Replayable, pass-counted point streams and the `bin01` text format.
//!
//! Every algorithm in this crate reads data exclusively through
//! [`PointStream::pass`], so the pass counter is an exact record of how many
//! sequential traversals a pipeline made.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::bitrow::{BitRow, DEFAULT_MAX_WIDTH};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamConfig {
    pub max_width: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            max_width: DEFAULT_MAX_WIDTH,
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Memory(Arc<[BitRow]>),
    File(PathBuf),
}

/// A sequential source of equal-width [`BitRow`]s that can be replayed.
///
/// File-backed streams re-open and re-read the file on every pass;
/// memory-backed streams iterate a shared buffer. The two are
/// indistinguishable through this interface.
#[derive(Debug, Clone)]
pub struct PointStream {
    source: Source,
    width: usize,
    len: Option<u64>,
    passes: u64,
}

impl PointStream {
    pub fn from_rows(rows: Vec<BitRow>) -> Result<Self> {
        Self::from_rows_with(rows, StreamConfig::default())
    }

    pub fn from_rows_with(rows: Vec<BitRow>, config: StreamConfig) -> Result<Self> {
        let width = rows.first().ok_or(Error::EmptyDataset)?.width();
        check_width(width, config)?;
        if let Some(bad) = rows.iter().find(|r| r.width() != width) {
            return Err(Error::WidthMismatch {
                expected: width,
                found: bad.width(),
            });
        }
        check_volume(rows.len() as u64, width)?;
        Ok(PointStream {
            source: Source::Memory(rows.into()),
            width,
            len: None,
            passes: 0,
        })
    }

    /// Opens a `bin01` file. Only the first data row is read here to learn
    /// the width; the full file is read by each pass.
    pub fn open(path: impl AsRef<Path>, config: StreamConfig) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let reader = BufReader::new(File::open(&path)?);
        let mut width = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some(row) = parse_line(&line, lineno + 1)? {
                width = Some(row.width());
                break;
            }
        }
        let width = width.ok_or(Error::EmptyDataset)?;
        check_width(width, config)?;
        Ok(PointStream {
            source: Source::File(path),
            width,
            len: None,
            passes: 0,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Point count, known once the first pass has completed.
    #[inline]
    pub fn len(&self) -> Option<u64> {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    #[inline]
    pub fn pass_count(&self) -> u64 {
        self.passes
    }

    /// Runs one complete traversal, feeding every row to `visit` in order.
    ///
    /// The pass counter is incremented only when the traversal finishes
    /// without error. Returns the number of rows visited.
    pub fn pass<F>(&mut self, mut visit: F) -> Result<u64>
    where
        F: FnMut(&BitRow) -> Result<()>,
    {
        let mut count = 0u64;
        match &self.source {
            Source::Memory(rows) => {
                for row in rows.iter() {
                    visit(row)?;
                    count += 1;
                }
            }
            Source::File(path) => {
                let reader = BufReader::new(File::open(path)?);
                for (lineno, line) in reader.lines().enumerate() {
                    let line = line?;
                    if let Some(row) = parse_line(&line, lineno + 1)? {
                        if row.width() != self.width {
                            return Err(Error::parse(
                                lineno + 1,
                                format!("row has {} columns, expected {}", row.width(), self.width),
                            ));
                        }
                        visit(&row)?;
                        count += 1;
                    }
                }
            }
        }
        match self.len {
            None => {
                check_volume(count, self.width)?;
                self.len = Some(count);
            }
            Some(n) if n != count => {
                return Err(Error::StreamChanged(format!(
                    "first pass saw {n} rows, this pass saw {count}"
                )))
            }
            Some(_) => {}
        }
        self.passes += 1;
        Ok(count)
    }

    /// Loads every row into memory. Consumes one pass.
    pub fn collect_rows(&mut self) -> Result<Vec<BitRow>> {
        let mut rows = Vec::new();
        self.pass(|r| {
            rows.push(r.clone());
            Ok(())
        })?;
        Ok(rows)
    }
}

fn check_width(width: usize, config: StreamConfig) -> Result<()> {
    if width == 0 {
        return Err(Error::ShapeMismatch("rows must have at least one column".into()));
    }
    if width > config.max_width {
        return Err(Error::WidthTooLarge {
            width,
            cap: config.max_width,
        });
    }
    Ok(())
}

fn check_volume(n: u64, d: usize) -> Result<()> {
    match n.checked_mul(d as u64) {
        Some(v) if v <= i64::MAX as u64 => Ok(()),
        _ => Err(Error::Overflow { n, d }),
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<BitRow>> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    line.parse::<BitRow>().map(Some).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(lineno, message),
        other => other,
    })
}

/// Parses `bin01` text: one `0`/`1` row per line, `#` comments, blank lines ignored.
pub fn parse_bin01(text: &str) -> Result<Vec<BitRow>> {
    let mut rows: Vec<BitRow> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(row) = parse_line(line, lineno + 1)? {
            if let Some(first) = rows.first() {
                if first.width() != row.width() {
                    return Err(Error::parse(
                        lineno + 1,
                        format!("row has {} columns, expected {}", row.width(), first.width()),
                    ));
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn format_bin01(rows: &[BitRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn rows(spec: &[&str]) -> Vec<BitRow> {
        spec.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn memory_stream_counts_passes() {
        let mut s = PointStream::from_rows(rows(&["01", "10", "11"])).unwrap();
        assert_eq!(s.len(), None);
        assert_eq!(s.pass_count(), 0);
        let first = s.collect_rows().unwrap();
        let second = s.collect_rows().unwrap();
        assert_eq!(first, second);
        assert_eq!(s.len(), Some(3));
        assert_eq!(s.pass_count(), 2);
    }

    #[test]
    fn aborted_pass_is_not_counted() {
        let mut s = PointStream::from_rows(rows(&["01", "10"])).unwrap();
        let r = s.pass(|_| Err(Error::EmptyInput));
        assert!(r.is_err());
        assert_eq!(s.pass_count(), 0);
    }

    #[test]
    fn empty_and_ragged_inputs_rejected() {
        assert!(matches!(PointStream::from_rows(vec![]), Err(Error::EmptyDataset)));
        assert!(matches!(
            PointStream::from_rows(rows(&["01", "011"])),
            Err(Error::WidthMismatch { .. })
        ));
        let cfg = StreamConfig { max_width: 2 };
        assert!(matches!(
            PointStream::from_rows_with(rows(&["011"]), cfg),
            Err(Error::WidthTooLarge { width: 3, cap: 2 })
        ));
    }

    #[test]
    fn bin01_parsing() {
        let text = "# header\n0101\n\n1100\r\n# trailing\n";
        assert_eq!(parse_bin01(text).unwrap(), rows(&["0101", "1100"]));
        assert!(matches!(parse_bin01("01\n012\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_bin01("01\n011\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_bin01("0 1\n").is_err());
    }

    #[test]
    fn file_stream_matches_memory_stream() {
        let mut f = tempfile_in_target();
        writeln!(f.1, "# comment\n001\n110\n\n111").unwrap();
        drop(f.1);
        let mut fs = PointStream::open(&f.0, StreamConfig::default()).unwrap();
        assert_eq!(fs.width(), 3);
        let a = fs.collect_rows().unwrap();
        let b = fs.collect_rows().unwrap();
        assert_eq!(a, rows(&["001", "110", "111"]));
        assert_eq!(a, b);
        assert_eq!(fs.pass_count(), 2);
        std::fs::remove_file(&f.0).ok();
    }

    #[test]
    fn file_stream_reports_bad_line() {
        let mut f = tempfile_in_target();
        writeln!(f.1, "001\n1x0").unwrap();
        drop(f.1);
        let mut fs = PointStream::open(&f.0, StreamConfig::default()).unwrap();
        assert!(matches!(fs.pass(|_| Ok(())), Err(Error::Parse { line: 2, .. })));
        assert_eq!(fs.pass_count(), 0);
        std::fs::remove_file(&f.0).ok();
    }

    fn tempfile_in_target() -> (PathBuf, File) {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static NEXT: AtomicUsize = AtomicUsize::new(0);
        let path = std::env::temp_dir().join(format!(
            "blr-stream-{}-{}.txt",
            std::process::id(),
            NEXT.fetch_add(1, Ordering::Relaxed)
        ));
        let file = File::create(&path).unwrap();
        (path, file)
    }
}
