//! Path files.
//!
//! CSV starts with a flag line `# symmetric=true|false` followed by the
//! header `path_id,t,i,j,value` and one row per matrix entry, row-major,
//! upper triangle only when the paths are symmetric. JSON-lines has one
//! object per path and time with the full matrix flattened row-major.
//! Numbers are written with 17 significant digits, so reading a file back
//! gives the same bits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FwisError, Result};
use crate::fbm::{MatrixPath, TimeGrid};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    #[default]
    Csv,
    JsonLines,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::JsonLines => "jsonl",
        }
    }
}

/// One JSON-lines record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathRecord {
    pub path_id: u64,
    pub t: f64,
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    pub values: Vec<f64>,
}

const HEADER: [&str; 5] = ["path_id", "t", "i", "j", "value"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streams paths to one file. All paths in a file must agree on `symmetric`.
pub struct PathWriter {
    dest: PathBuf,
    format: ExportFormat,
    symmetric: bool,
    csv: Option<csv::Writer<BufWriter<File>>>,
    jsonl: Option<BufWriter<File>>,
}

impl PathWriter {
    /// Creates `dest` and writes the header.
    pub fn create(dest: &Path, format: ExportFormat, symmetric: bool) -> Result<Self> {
        let io = |e: std::io::Error| FwisError::io(dest, e);
        let file = File::create(dest).map_err(io)?;
        let mut out = BufWriter::new(file);
        let (mut csv, mut jsonl) = (None, None);
        match format {
            ExportFormat::Csv => {
                writeln!(out, "# symmetric={symmetric}").map_err(io)?;
                let mut w = csv::Writer::from_writer(out);
                w.write_record(HEADER).map_err(|e| io(e.into()))?;
                csv = Some(w);
            }
            ExportFormat::JsonLines => jsonl = Some(out),
        }
        Ok(Self {
            dest: dest.to_path_buf(),
            format,
            symmetric,
            csv,
            jsonl,
        })
    }

    pub fn format(&self) -> ExportFormat {
        self.format
    }

    pub fn write(&mut self, p: &MatrixPath) -> Result<()> {
        if p.symmetric != self.symmetric {
            return Err(FwisError::contract("cannot mix symmetric and general paths in one file"));
        }
        let dest = &self.dest;
        let io = |e: std::io::Error| FwisError::io(dest, e);
        if let Some(w) = self.csv.as_mut() {
            let id = p.path_id.to_string();
            for (k, &t) in p.grid.times().iter().enumerate() {
                let t = fmt(t);
                for i in 0..p.rows {
                    let j0 = if p.symmetric { i } else { 0 };
                    for j in j0..p.cols {
                        w.write_record([&id, &t, &i.to_string(), &j.to_string(), &fmt(p.entry(k, i, j))])
                            .map_err(|e| io(e.into()))?;
                    }
                }
            }
        }
        if let Some(out) = self.jsonl.as_mut() {
            let stride = p.rows * p.cols;
            for (k, &t) in p.grid.times().iter().enumerate() {
                let rec = PathRecord {
                    path_id: p.path_id,
                    t,
                    rows: p.rows,
                    cols: p.cols,
                    symmetric: p.symmetric,
                    values: p.values[k * stride..(k + 1) * stride].to_vec(),
                };
                serde_json::to_writer(&mut *out, &rec).map_err(|e| io(e.into()))?;
                writeln!(out).map_err(io)?;
            }
        }
        Ok(())
    }

    /// Flushes the file.
    pub fn finish(mut self) -> Result<()> {
        let dest = &self.dest;
        if let Some(w) = self.csv.as_mut() {
            w.flush().map_err(|e| FwisError::io(dest, e))?;
        }
        if let Some(out) = self.jsonl.as_mut() {
            out.flush().map_err(|e| FwisError::io(dest, e))?;
        }
        Ok(())
    }
}

/// Writes `paths` to `dest` in the given format.
pub fn export_paths(paths: &[MatrixPath], format: ExportFormat, dest: &Path) -> Result<()> {
    let symmetric = paths.first().is_some_and(|p| p.symmetric);
    let mut w = PathWriter::create(dest, format, symmetric)?;
    for p in paths {
        w.write(p)?;
    }
    w.finish()
}

struct Partial {
    times: Vec<f64>,
    entries: Vec<BTreeMap<(usize, usize), f64>>,
}

/// Reads a CSV written by [`export_paths`], in path-id order.
pub fn read_paths_csv(src: &Path) -> Result<Vec<MatrixPath>> {
    let bad = |m: String| FwisError::Config(format!("{}: {m}", src.display()));
    let file = File::open(src).map_err(|e| FwisError::io(src, e))?;
    let mut reader = BufReader::new(file);
    let mut flag = String::new();
    reader.read_line(&mut flag).map_err(|e| FwisError::io(src, e))?;
    let sym = match flag.trim() {
        "# symmetric=true" => true,
        "# symmetric=false" => false,
        other => return Err(bad(format!("missing symmetric flag, found {other:?}"))),
    };
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut by_id: BTreeMap<u64, Partial> = BTreeMap::new();
    for row in r.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let id: u64 = field(0).parse().map_err(|_| bad(format!("bad path_id {:?}", field(0))))?;
        let t: f64 = field(1).parse().map_err(|_| bad(format!("bad t {:?}", field(1))))?;
        let i: usize = field(2).parse().map_err(|_| bad(format!("bad i {:?}", field(2))))?;
        let j: usize = field(3).parse().map_err(|_| bad(format!("bad j {:?}", field(3))))?;
        let v: f64 = field(4).parse().map_err(|_| bad(format!("bad value {:?}", field(4))))?;
        let p = by_id.entry(id).or_insert(Partial {
            times: Vec::new(),
            entries: Vec::new(),
        });
        if p.times.last() != Some(&t) {
            p.times.push(t);
            p.entries.push(BTreeMap::new());
        }
        p.entries.last_mut().expect("pushed above").insert((i, j), v);
    }
    by_id
        .into_iter()
        .map(|(id, p)| {
            let keys = p.entries.iter().flat_map(|e| e.keys());
            let rows = keys.clone().map(|k| k.0).max().map_or(0, |m| m + 1);
            let cols = keys.map(|k| k.1).max().map_or(0, |m| m + 1);
            let mut values = Vec::with_capacity(p.times.len() * rows * cols);
            for e in &p.entries {
                for i in 0..rows {
                    for j in 0..cols {
                        let key = if sym && j < i { (j, i) } else { (i, j) };
                        let v = e
                            .get(&key)
                            .ok_or_else(|| bad(format!("path {id} is missing entry ({i}, {j})")))?;
                        values.push(*v);
                    }
                }
            }
            let grid = TimeGrid::new(p.times).map_err(|e| bad(e.to_string()))?;
            Ok(MatrixPath::new(grid, rows, cols, sym, values)?.with_id(id, None))
        })
        .collect()
}

/// Reads a JSON-lines file written by [`export_paths`], in path-id order.
pub fn read_paths_jsonl(src: &Path) -> Result<Vec<MatrixPath>> {
    let bad = |m: String| FwisError::Config(format!("{}: {m}", src.display()));
    let file = File::open(src).map_err(|e| FwisError::io(src, e))?;
    let mut by_id: BTreeMap<u64, Vec<PathRecord>> = BTreeMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| FwisError::io(src, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PathRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        by_id.entry(rec.path_id).or_default().push(rec);
    }
    by_id
        .into_iter()
        .map(|(id, recs)| {
            let (rows, cols, sym) = (recs[0].rows, recs[0].cols, recs[0].symmetric);
            let grid = TimeGrid::new(recs.iter().map(|r| r.t).collect()).map_err(|e| bad(e.to_string()))?;
            let values = recs.into_iter().flat_map(|r| r.values).collect();
            Ok(MatrixPath::new(grid, rows, cols, sym, values)?.with_id(id, None))
        })
        .collect()
}

/// Reads either format, chosen by extension (`.jsonl` or anything else for CSV).
pub fn read_paths(src: &Path) -> Result<Vec<MatrixPath>> {
    match src.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => read_paths_jsonl(src),
        _ => read_paths_csv(src),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    fn two_by_two() -> MatrixPath {
        let grid = TimeGrid::new(vec![0.0, 0.1]).unwrap();
        let a = SymMatrix::from_rows(&[vec![1.0, 0.1 + 0.2], vec![0.1 + 0.2, 1.0 / 3.0]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![std::f64::consts::PI, -1e-300], vec![-1e-300, 7.0]]).unwrap();
        MatrixPath::from_sym(grid, &[a, b]).unwrap().with_id(4, None)
    }

    #[test]
    fn csv_has_upper_triangle_rows() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("p.csv");
        export_paths(&[two_by_two()], ExportFormat::Csv, &f).unwrap();
        let text = std::fs::read_to_string(&f).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# symmetric=true");
        assert_eq!(lines[1], "path_id,t,i,j,value");
        assert_eq!(lines.len(), 2 + 6);
    }

    #[test]
    fn round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let mut general = two_by_two();
        general.symmetric = false;
        for (fmt, name) in [(ExportFormat::Csv, "p.csv"), (ExportFormat::JsonLines, "p.jsonl")] {
            for p in [two_by_two(), general.clone()] {
                let f = dir.path().join(name);
                export_paths(std::slice::from_ref(&p), fmt, &f).unwrap();
                let back = read_paths(&f).unwrap();
                assert_eq!(back, vec![p]);
            }
        }
    }

    #[test]
    fn empty_set_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("e.csv");
        export_paths(&[], ExportFormat::Csv, &f).unwrap();
        assert_eq!(std::fs::read_to_string(&f).unwrap(), "# symmetric=false\npath_id,t,i,j,value\n");
        assert!(read_paths_csv(&f).unwrap().is_empty());
    }

    #[test]
    fn refuses_mixed_symmetry() {
        let dir = tempfile::tempdir().unwrap();
        let mut general = two_by_two();
        general.symmetric = false;
        let f = dir.path().join("m.csv");
        assert!(export_paths(&[two_by_two(), general], ExportFormat::Csv, &f).is_err());
    }

    #[test]
    fn io_errors_name_the_file() {
        let f = Path::new("/nonexistent-dir/x.csv");
        let err = export_paths(&[], ExportFormat::Csv, f).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
