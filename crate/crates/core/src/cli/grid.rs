//! Sweep grid files.
//!
//! ```text
//! band = fr1
//! isd_m = 250, 500, 1000
//! speed_kmh = 3, 30, 120
//! n_min = 1
//! n_max = 10
//! ```

use std::fs;

use crate::ase::SweepGrid;
use crate::error::{Error, Result};
use crate::model::Band;

const FIG_FR1: &str = include_str!("../../data/fig_fr1.grid");
const FIG_FR2: &str = include_str!("../../data/fig_fr2.grid");

/// Bundled grid by name (`fig_fr1`, `fig_fr2`) or a grid file path.
pub fn load(name_or_path: &str) -> Result<SweepGrid> {
    match name_or_path {
        "fig_fr1" | "fig_fr1.grid" => parse_grid(FIG_FR1),
        "fig_fr2" | "fig_fr2.grid" => parse_grid(FIG_FR2),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::invalid("grid", format!("{path}: {e}")))?;
            parse_grid(&text)
        }
    }
}

pub fn parse_grid(text: &str) -> Result<SweepGrid> {
    let mut grid = SweepGrid {
        bands: Vec::new(),
        isds_m: Vec::new(),
        speeds_kmh: Vec::new(),
        n_min: 1,
        n_max: 10,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let items = value.split(',').map(str::trim).filter(|s| !s.is_empty());
        let floats = || {
            items
                .clone()
                .map(|s| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()
        };
        let int = || {
            value
                .trim()
                .parse::<u32>()
                .map_err(|e| err(format!("{key}: {e}")))
        };
        match key.trim() {
            "band" => {
                grid.bands = items
                    .clone()
                    .map(|s| s.parse::<Band>().map_err(|e| err(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "isd_m" => grid.isds_m = floats()?,
            "speed_kmh" => grid.speeds_kmh = floats()?,
            "n_min" => grid.n_min = int()?,
            "n_max" => grid.n_max = int()?,
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    grid.validate()?;
    Ok(grid)
}
