//! Plain-text field snapshots and diagnostics series, written atomically.

use crate::error::{MixError, Result};
use crate::field::ScalarField;
use crate::grid::{DomainKind, Grid};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const FIELD_MAGIC: &str = "mixlog-field";
pub const FIELD_VERSION: &str = "v1";

/// Columns every `series.csv` starts with.
pub const SERIES_COLUMNS: [&str; 7] = ["t", "l2", "v", "w", "hminus1", "eps_geom", "cum_grad_p"];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s.trim() {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| MixError::Format(format!("not a number: {t:?}"))),
    }
}

/// Write `contents` to a sibling temporary file, then rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| MixError::Io(format!("not a file path: {}", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| MixError::Io(format!("{}: {e}", path.display())))
}

fn header(grid: &Grid) -> String {
    let (kind, r) = match grid.kind() {
        DomainKind::Torus => ("torus", "0".to_string()),
        DomainKind::Box { half_width } => ("box", format!("{half_width}")),
    };
    format!("{FIELD_MAGIC} {FIELD_VERSION} d={} kind={kind} N={} R={r}", grid.dim(), grid.n())
}

/// Header line, then one CSV row per first index.
pub fn field_to_string(f: &ScalarField) -> String {
    let grid = f.grid();
    let mut out = header(grid);
    out.push('\n');
    let row = if grid.dim() == 2 { grid.n() } else { 1 };
    for chunk in f.values().chunks(row) {
        let line: Vec<String> = chunk.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn parse_header(line: &str) -> Result<Grid> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(FIELD_MAGIC) {
        return Err(MixError::Format(format!("missing {FIELD_MAGIC} header")));
    }
    match parts.next() {
        Some(FIELD_VERSION) => {}
        other => return Err(MixError::Format(format!("unsupported field version {other:?}, expected {FIELD_VERSION}"))),
    }
    let mut d = None;
    let mut kind = None;
    let mut n = None;
    let mut r = None;
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| MixError::Format(format!("malformed header token {p:?}")))?;
        let bad = || MixError::Format(format!("bad header value {p:?}"));
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "kind" => kind = Some(v.to_string()),
            "N" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "R" => r = Some(v.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(MixError::Format(format!("unknown header key {k:?}"))),
        }
    }
    let missing = |k: &str| MixError::Format(format!("header lacks {k}"));
    let (d, n) = (d.ok_or_else(|| missing("d"))?, n.ok_or_else(|| missing("N"))?);
    let r = r.ok_or_else(|| missing("R"))?;
    match kind.as_deref() {
        Some("torus") => Grid::torus(d, n),
        Some("box") => Grid::boxed(d, n, r),
        other => Err(MixError::Format(format!("unknown domain kind {other:?}"))),
    }
}

pub fn field_from_str(s: &str) -> Result<ScalarField> {
    let mut lines = s.lines();
    let grid = parse_header(lines.next().ok_or_else(|| MixError::Format("empty snapshot".into()))?)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines.filter(|l| !l.trim().is_empty()) {
        for tok in line.split(',') {
            values.push(parse_f64(tok)?);
        }
    }
    if values.len() != grid.len() {
        return Err(MixError::Format(format!("expected {} samples, found {}", grid.len(), values.len())));
    }
    ScalarField::new(grid, values)
}

pub fn write_field(path: &Path, f: &ScalarField) -> Result<()> {
    write_atomic(path, field_to_string(f).as_bytes())
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let s = fs::read_to_string(path).map_err(|e| MixError::Io(format!("{}: {e}", path.display())))?;
    field_from_str(&s)
}

/// As [`read_field`], rejecting files whose grid differs from `expected`.
pub fn read_field_on(path: &Path, expected: &Grid) -> Result<ScalarField> {
    let f = read_field(path)?;
    expected.same_as(f.grid())?;
    Ok(f)
}

/// One row of `series.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    /// Values for [`SERIES_COLUMNS`], in order.
    pub base: [f64; 7],
    /// Trailing columns named in [`Series::extra`].
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub extra: Vec<String>,
    pub rows: Vec<SeriesRow>,
}

impl Series {
    pub fn columns(&self) -> Vec<String> {
        SERIES_COLUMNS.iter().map(|s| s.to_string()).chain(self.extra.iter().cloned()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.base.iter().chain(&row.extra).map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let head: Vec<&str> = lines.next().ok_or_else(|| MixError::Format("empty series".into()))?.split(',').collect();
        if head.len() < SERIES_COLUMNS.len() || head[..SERIES_COLUMNS.len()] != SERIES_COLUMNS {
            return Err(MixError::Format(format!("series header must start with {}", SERIES_COLUMNS.join(","))));
        }
        let extra: Vec<String> = head[SERIES_COLUMNS.len()..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
            if cells.len() != head.len() {
                return Err(MixError::Format(format!("row {} has {} cells, expected {}", i + 2, cells.len(), head.len())));
            }
            let mut base = [0.0; 7];
            base.copy_from_slice(&cells[..7]);
            rows.push(SeriesRow { base, extra: cells[7..].to_vec() });
        }
        Ok(Series { extra, rows })
    }

    /// Column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = SERIES_COLUMNS.iter().position(|c| *c == name) {
            return Some(self.rows.iter().map(|r| r.base[i]).collect());
        }
        let j = self.extra.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.extra[j]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| MixError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv(&s)
    }
}

/// Name of the `i`-th snapshot file in a trajectory directory.
pub fn snapshot_name(i: usize) -> String {
    format!("snapshot_{i:05}.field")
}

/// Snapshot files in `dir`, sorted by name.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| MixError::Io(format!("{}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "field"))
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn field_round_trip() {
        let g = Grid::boxed(2, 8, 1.5).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * PI).sin() / 3.0 + x[1]);
        let s = field_to_string(&f);
        assert!(s.starts_with("mixlog-field v1 d=2 kind=box N=8 R=1.5\n"));
        assert_eq!(field_from_str(&s).unwrap(), f);
        let t = Grid::torus(1, 4).unwrap();
        let f = ScalarField::from_fn(t, |x| x[0] - 1e-300);
        assert_eq!(field_from_str(&field_to_string(&f)).unwrap(), f);
    }

    #[test]
    fn header_mismatch() {
        let g = Grid::torus(1, 4).unwrap();
        let s = field_to_string(&ScalarField::zeros(g));
        assert!(field_from_str(&s.replace("v1", "v2")).is_err());
        assert!(field_from_str(&s.replace("torus", "sphere")).is_err());
        assert!(field_from_str(&s.replace("N=4", "N=8")).is_err());
    }

    #[test]
    fn series_round_trip() {
        let s = Series {
            extra: vec!["h_s=0.5".into()],
            rows: vec![
                SeriesRow { base: [0.0, 1.0, 0.1, 0.2, 0.3, f64::INFINITY, 0.0], extra: vec![1.0 / 3.0] },
                SeriesRow { base: [0.5, 1.0, 0.2, 0.3, 0.2, 0.25, 1.1], extra: vec![2.0 / 3.0] },
            ],
        };
        let back = Series::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.column("h_s=0.5").unwrap()[1], 2.0 / 3.0);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
