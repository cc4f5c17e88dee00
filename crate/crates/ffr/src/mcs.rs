//! MCS tables as CSV: `mode,bits_per_symbol,kappa1,kappa2,gamma_db`.

use std::path::Path;

use ffr_core::rate::McsMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    mode: u32,
    bits_per_symbol: f64,
    kappa1: f64,
    kappa2: f64,
    gamma_db: f64,
}

pub fn read_mcs_csv(path: &Path) -> Result<Vec<McsMode>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("dra.mcs_table: {}: {e}", path.display())))?;
    let mut modes = Vec::new();
    for row in reader.deserialize::<Row>() {
        let r =
            row.map_err(|e| CliError::Config(format!("dra.mcs_table: {}: {e}", path.display())))?;
        modes.push(McsMode {
            label: r.mode,
            bits_per_symbol: r.bits_per_symbol,
            kappa1: r.kappa1,
            kappa2: r.kappa2,
            gamma_floor_db: r.gamma_db,
        });
    }
    if modes.is_empty() {
        return Err(CliError::Config(format!(
            "dra.mcs_table: {} has no rows",
            path.display()
        )));
    }
    Ok(modes)
}

pub fn write_mcs_csv<W: std::io::Write>(out: W, modes: &[McsMode]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in modes {
        w.serialize(Row {
            mode: m.label,
            bits_per_symbol: m.bits_per_symbol,
            kappa1: m.kappa1,
            kappa2: m.kappa2,
            gamma_db: m.gamma_floor_db,
        })?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(())
}
