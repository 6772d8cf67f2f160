//! File formats.
//!
//! * Dataset: CSV with a header row. An `id` column is optional; without it
//!   the zero-based row index is the id. Every other column must be numeric.
//! * Projection: TSV lines `id<TAB>x<TAB>y`, optionally preceded by the
//!   header `id<TAB>x<TAB>y`.
//! * Grid assignment: CSV `id,row,col` with that header. Writers prepend a
//!   `# grid rows=R cols=S` comment so the grid shape survives a round trip;
//!   readers without it infer the shape from the largest indices.
//!
//! Lines starting with `#` are comments in every format.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{Cell, Dataset, GridAssignment, GridSpec, Point, Projection};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_dataset(file, path)
}

/// Parses a dataset CSV; `origin` only labels error messages.
pub fn parse_dataset(reader: impl Read, origin: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    let id_col = headers.iter().position(|h| h == "id");
    let dims = headers.len() - usize::from(id_col.is_some());
    if dims == 0 {
        return Err(parse_err(origin, 1, "no numeric columns"));
    }
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(row + 2, |p| p.line() as usize);
            parse_err(origin, line, e.to_string())
        })?;
        let line = rec.position().map_or(row + 2, |p| p.line() as usize);
        if rec.len() != headers.len() {
            return Err(parse_err(
                origin,
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == id_col {
                ids.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                parse_err(
                    origin,
                    line,
                    format!("column {:?}: {field:?} is not a number", &headers[c]),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(origin, line, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        if id_col.is_none() {
            ids.push(row.to_string());
        }
    }
    Dataset::from_flat(ids, values, dims)
}

pub fn write_dataset(path: impl AsRef<Path>, d: &Dataset, columns: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["id".to_string()];
    match columns {
        Some(cols) => header.extend(cols.iter().cloned()),
        None => header.extend((0..d.dims()).map(|c| format!("f{c}"))),
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (id, row) in d.ids().iter().zip(d.rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(path, line, e.to_string())
}

pub fn read_projection(path: impl AsRef<Path>) -> Result<Projection> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_projection(BufReader::new(file), path)
}

pub fn parse_projection(reader: impl BufRead, origin: &Path) -> Result<Projection> {
    let mut ids = Vec::new();
    let mut points = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(io_err(origin))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ids.is_empty() && line == "id\tx\ty" {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, x, y] = fields[..] else {
            return Err(parse_err(
                origin,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let coord = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(origin, lineno, format!("{s:?} is not a finite number")))
        };
        let p = Point::new(coord(x)?, coord(y)?);
        if !seen.insert(id.to_string()) {
            return Err(Error::validation(format!(
                "{}:{lineno}: duplicate id {id:?}",
                origin.display()
            )));
        }
        ids.push(id.to_string());
        points.push(p);
    }
    Projection::new(ids, points)
}

pub fn write_projection(path: impl AsRef<Path>, p: &Projection) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    format_projection(&mut buf, p)?;
    fs::write(path, buf).map_err(io_err(path))
}

pub fn format_projection(out: &mut impl Write, p: &Projection) -> Result<()> {
    let sink = PathBuf::from("<projection>");
    let werr = |e| Error::Io {
        path: sink.clone(),
        source: e,
    };
    writeln!(out, "id\tx\ty").map_err(werr)?;
    for (id, pt) in p.ids().iter().zip(p.points()) {
        if id.contains(['\t', '\n', '\r']) {
            return Err(Error::invalid(format!("id {id:?} cannot be written as TSV")));
        }
        writeln!(out, "{id}\t{}\t{}", pt.x, pt.y).map_err(werr)?;
    }
    Ok(())
}

pub fn read_assignment(path: impl AsRef<Path>) -> Result<GridAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_assignment(&text, path)
}

pub fn parse_assignment(text: &str, origin: &Path) -> Result<GridAssignment> {
    let mut shape = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# grid ") {
            let mut rows = None;
            let mut cols = None;
            for kv in rest.split_whitespace() {
                match kv.split_once('=') {
                    Some(("rows", v)) => rows = v.parse::<usize>().ok(),
                    Some(("cols", v)) => cols = v.parse::<usize>().ok(),
                    _ => {}
                }
            }
            if let (Some(r), Some(s)) = (rows, cols) {
                shape = Some((r, s));
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| csv_err(origin, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(origin, 1, format!("missing column {name:?}")))
    };
    let (ic, rc, cc) = (col("id")?, col("row")?, col("col")?);
    let mut ids = Vec::new();
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(origin, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let idx = |c: usize| -> Result<usize> {
            let f = rec.get(c).unwrap_or("");
            f.parse()
                .map_err(|_| parse_err(origin, line, format!("{f:?} is not a cell index")))
        };
        ids.push(rec.get(ic).unwrap_or("").to_string());
        cells.push(Cell::new(idx(rc)?, idx(cc)?));
    }
    let (rows, cols) = match shape {
        Some(s) => s,
        None => (
            cells.iter().map(|c| c.row + 1).max().unwrap_or(1),
            cells.iter().map(|c| c.col + 1).max().unwrap_or(1),
        ),
    };
    GridAssignment::new(GridSpec::new(rows, cols)?, ids, cells)
}

pub fn format_assignment(g: &GridAssignment) -> Result<String> {
    let spec = g.spec();
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(["id", "row", "col"]).map_err(fail)?;
    // row-major so identical assignments serialize identically
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&k| spec.linear(g.cells()[k]));
    for k in order {
        let c = g.cells()[k];
        w.write_record([g.ids()[k].as_str(), &c.row.to_string(), &c.col.to_string()])
            .map_err(fail)?;
    }
    let body = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(format!("# grid rows={} cols={}\n{body}", spec.rows, spec.cols))
}

pub fn write_assignment(path: impl AsRef<Path>, g: &GridAssignment) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_assignment(g)?).map_err(io_err(path))
}

/// Reads an `id,label` CSV.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        match (rec.get(0), rec.get(1)) {
            (Some(id), Some(label)) => out.push((id.to_string(), label.to_string())),
            _ => return Err(parse_err(path, line, "expected id,label")),
        }
    }
    Ok(out)
}

/// Newline-delimited id list.
pub fn read_id_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn write_id_list(path: impl AsRef<Path>, ids: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    fs::write(path, text).map_err(io_err(path))
}
