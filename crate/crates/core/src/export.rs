//! Field snapshots as CSV plus 8-bit PGM with a JSON sidecar.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::pnm::write_p5;

/// Linear min-max mapping used to quantize a field to 8 bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgmScaling {
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
    /// Grid point shown in the top-left pixel.
    pub top_left: [f64; 2],
}

/// Quantizes `field` to `round(255 (v - min) / (max - min))`, with the top
/// image row at the largest `y`. A constant field maps to all zeros.
pub fn field_to_gray(field: &ScalarField) -> (Vec<u8>, PgmScaling) {
    let spec = field.spec();
    let (min, max) = (field.min(), field.max());
    let span = max - min;
    let mut pixels = Vec::with_capacity(spec.len());
    for j in (0..spec.ny()).rev() {
        for i in 0..spec.nx() {
            let v = field.get(i, j);
            let level = if span > 0.0 { ((v - min) / span * 255.0).round() } else { 0.0 };
            pixels.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    let scaling = PgmScaling {
        min,
        max,
        width: spec.nx(),
        height: spec.ny(),
        top_left: [spec.x(0), spec.y(spec.ny() - 1)],
    };
    (pixels, scaling)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Document {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    field.write_csv(create(path)?).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.pgm` and `<stem>.pgm.json` into `dir`.
pub fn write_field_pgm(field: &ScalarField, dir: &Path, stem: &str) -> Result<()> {
    let (pixels, scaling) = field_to_gray(field);
    let path = dir.join(format!("{stem}.pgm"));
    write_p5(create(&path)?, scaling.width, scaling.height, &pixels).map_err(|e| Error::io(&path, e))?;
    write_json(&dir.join(format!("{stem}.pgm.json")), &scaling)
}

/// CSV plus PGM snapshot under a common stem.
pub fn write_snapshot(field: &ScalarField, dir: &Path, stem: &str) -> Result<()> {
    write_field_csv(field, &dir.join(format!("{stem}.csv")))?;
    write_field_pgm(field, dir, stem)
}
