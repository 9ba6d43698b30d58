//! Output files: grid dumps for fields, CSV tables, JSON reports.
//!
//! A grid dump is a pair `stem.json` + `stem.bin`. The binary file holds
//! little-endian `f64` values with `x` fastest, then `t`, then the
//! component; the header gives the shape and the sample positions
//! `x0 + i h`, `t0 + j k`. Fields from the solver and lifted planes share
//! the format.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field2D, FieldMeta};
use crate::harness::{EstimateSides, SweepResult};
use crate::lifting::PlaneFn;

pub const GRID_FORMAT: &str = "ibvp-grid-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub format: String,
    pub components: usize,
    pub points_x: usize,
    pub points_t: usize,
    pub x0: f64,
    pub t0: f64,
    pub h: f64,
    pub k: f64,
    pub periodic_x: bool,
    pub binary: String,
    /// Free-form provenance (system, data, operator).
    pub meta: serde_json::Value,
}

/// Shortest round-trip representation, so equal values print equally.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_dump(dir: &Path, stem: &str, header: &GridHeader, values: impl Iterator<Item = f64>) -> Result<Vec<PathBuf>> {
    let bin = dir.join(&header.binary);
    let mut bytes = Vec::new();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes)?;
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, header)?;
    Ok(vec![json, bin])
}

fn write_grid_csv(path: &Path, header: &GridHeader, value: impl Fn(usize, usize, usize) -> f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut head = vec!["x".to_string(), "t".to_string()];
    head.extend((0..header.components).map(|c| format!("u{c}")));
    w.write_record(&head).map_err(csv_err)?;
    for j in 0..header.points_t {
        for i in 0..header.points_x {
            let mut rec = vec![num(header.x0 + i as f64 * header.h), num(header.t0 + j as f64 * header.k)];
            rec.extend((0..header.components).map(|c| num(value(c, i, j))));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn field_header(u: &Field2D, stem: &str) -> GridHeader {
    GridHeader {
        format: GRID_FORMAT.to_string(),
        components: u.q(),
        points_x: u.nx() + 1,
        points_t: u.nt() + 1,
        x0: 0.0,
        t0: 0.0,
        h: u.h,
        k: u.k,
        periodic_x: false,
        binary: format!("{stem}.bin"),
        meta: serde_json::to_value(&u.meta).unwrap_or_default(),
    }
}

/// Writes `stem.json`, `stem.bin` and, with `with_csv`, `stem.csv`.
pub fn write_field(dir: &Path, stem: &str, u: &Field2D, with_csv: bool) -> Result<Vec<PathBuf>> {
    let header = field_header(u, stem);
    let mut out = write_dump(dir, stem, &header, u.data.iter().copied())?;
    if with_csv {
        let p = dir.join(format!("{stem}.csv"));
        write_grid_csv(&p, &header, |c, i, j| u.get(c, i, j))?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_plane(dir: &Path, stem: &str, p: &PlaneFn, with_csv: bool) -> Result<Vec<PathBuf>> {
    let header = GridHeader {
        format: GRID_FORMAT.to_string(),
        components: 1,
        points_x: p.nx,
        points_t: p.nt,
        x0: p.x0,
        t0: p.t0,
        h: p.h,
        k: p.k,
        periodic_x: p.periodic_x,
        binary: format!("{stem}.bin"),
        meta: serde_json::to_value(&p.provenance)?,
    };
    let mut out = write_dump(dir, stem, &header, p.values.iter().copied())?;
    if with_csv {
        let path = dir.join(format!("{stem}.csv"));
        write_grid_csv(&path, &header, |_, i, j| p.get(i, j))?;
        out.push(path);
    }
    Ok(out)
}

/// Reads a dump back given its JSON header.
pub fn read_grid(header_path: &Path) -> Result<(GridHeader, Vec<f64>)> {
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    if header.format != GRID_FORMAT {
        return Err(Error::Config(format!("unknown grid format `{}`", header.format)));
    }
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let bytes = fs::read(dir.join(&header.binary))?;
    let n = header.components * header.points_x * header.points_t;
    if bytes.len() != 8 * n {
        return Err(Error::Dimension(format!("{} bytes for {n} values", bytes.len())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, values))
}

pub fn read_field(header_path: &Path) -> Result<Field2D> {
    let (h, values) = read_grid(header_path)?;
    if h.x0 != 0.0 || h.t0 != 0.0 || h.points_x < 2 || h.points_t < 2 {
        return Err(Error::Dimension("not a field dump on [0, X] x [0, T]".into()));
    }
    let data = Array3::from_shape_vec((h.components, h.points_t, h.points_x), values)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let meta: FieldMeta = serde_json::from_value(h.meta).unwrap_or_default();
    Ok(Field2D {
        h: h.h,
        k: h.k,
        data,
        meta,
    })
}

/// `stem_initial.csv` (`x`, `u0..`) and `stem_boundary.csv` (`t`, `u0..`).
pub fn write_traces(dir: &Path, stem: &str, u: &Field2D) -> Result<Vec<PathBuf>> {
    let q = u.q();
    let mut out = vec![];
    for (suffix, var, n, step) in [("initial", "x", u.nx(), u.h), ("boundary", "t", u.nt(), u.k)] {
        let path = dir.join(format!("{stem}_{suffix}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut head = vec![var.to_string()];
        head.extend((0..q).map(|c| format!("u{c}")));
        w.write_record(&head).map_err(csv_err)?;
        for m in 0..=n {
            let mut rec = vec![num(m as f64 * step)];
            rec.extend((0..q).map(|c| num(if suffix == "initial" { u.get(c, m, 0) } else { u.get(c, 0, m) })));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        out.push(path);
    }
    Ok(out)
}

/// One row per `(case, s)`. Norm columns hold the squared proxies per
/// refinement level.
pub fn write_sweep_csv(path: &Path, rows: &[(String, SweepResult)]) -> Result<()> {
    let levels = rows.iter().map(|(_, r)| r.grid_sizes.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut head: Vec<String> = [
        "case",
        "s",
        "compat_order",
        "classification",
        "predicted",
        "match",
        "slope",
        "data_finite",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    head.extend((0..levels).map(|l| format!("norm_sq_l{l}")));
    w.write_record(&head).map_err(csv_err)?;
    for (name, r) in rows {
        let matches = r.matches();
        for (i, s) in r.s.iter().enumerate() {
            let mut rec = vec![
                name.clone(),
                num(*s),
                num(r.compat_order),
                r.classification[i].to_string(),
                r.predicted[i].to_string(),
                match matches[i] {
                    Some(true) => "yes".into(),
                    Some(false) => "no".into(),
                    None => "flagged".into(),
                },
                num(r.slopes[i]),
                r.data_finite[i].to_string(),
            ];
            rec.extend((0..levels).map(|l| r.norm_table[i].get(l).map(|v| num(*v)).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Two-column `level norm_sq` files, one per `(case, s)`, for plotting.
pub fn write_sweep_plots(dir: &Path, name: &str, r: &SweepResult) -> Result<Vec<PathBuf>> {
    let mut out = vec![];
    for (i, s) in r.s.iter().enumerate() {
        let path = dir.join(format!("plot_{name}_s{s}.dat"));
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# level norm_sq")?;
        for (l, v) in r.norm_table[i].iter().enumerate() {
            writeln!(f, "{l} {}", num(*v))?;
        }
        out.push(path);
    }
    Ok(out)
}

pub fn write_estimates_csv(path: &Path, rows: &[(String, EstimateSides)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["case", "kind", "gamma", "s", "lhs", "rhs", "ratio", "anomaly"])
        .map_err(csv_err)?;
    for (name, e) in rows {
        w.write_record([
            name.clone(),
            e.estimate_kind.to_string(),
            num(e.gamma),
            num(e.s),
            num(e.lhs),
            num(e.rhs),
            num(e.ratio),
            e.anomaly.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
