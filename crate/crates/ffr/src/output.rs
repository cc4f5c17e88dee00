//! File writers shared by the subcommands.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use ffr_core::geometry::NetworkGeometry;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `rows` as a CSV file with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Appends `rows` to a CSV file, writing the header only if the file is new
/// or empty.
pub fn append_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// SHA-256 of the canonical JSON form of the configuration, as lowercase hex.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("configuration serialises");
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn fixed6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Serialize)]
struct BaseStation {
    index: usize,
    x_m: f64,
    y_m: f64,
}

#[derive(Debug, Serialize)]
struct GeometryDump<'a> {
    hex_side_m: f64,
    cell_radius_m: f64,
    min_distance_m: f64,
    base_stations: Vec<BaseStation>,
    centre_interferers: &'a [usize],
    edge_interferers: &'a [usize],
}

/// Layout dump with coordinates rounded to micrometres.
pub fn write_geometry(path: &Path, geometry: &NetworkGeometry) -> Result<()> {
    let dump = GeometryDump {
        hex_side_m: fixed6(geometry.hex_side),
        cell_radius_m: fixed6(geometry.circle_radius),
        min_distance_m: fixed6(geometry.min_distance),
        base_stations: geometry
            .bs_positions
            .iter()
            .enumerate()
            .map(|(index, p)| BaseStation {
                index,
                x_m: fixed6(p.x),
                y_m: fixed6(p.y),
            })
            .collect(),
        centre_interferers: &geometry.centre_interferers,
        edge_interferers: &geometry.edge_interferers,
    };
    write_json(path, &dump)
}
