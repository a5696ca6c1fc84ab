//! Image to per-hole features.
//!
//! A grayscale raster is resampled bilinearly onto the simulation grid and
//! mapped linearly to a background spin-polarized charge density. That density
//! acts as an effective magnetic field `B = -rho / kappa`. Each hole sees the
//! mean field over its window, evolves a single vortex in it, and reports the
//! triple `(omega_B, Q, E)`.
//!
//! Image orientation: pixel rows are stored top to bottom, and the top-left
//! corner of the image maps to `(-Lx, +Ly)` on the grid.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{density_at_time, excitation_energy, windowed_quadrupole, EvolvedState};
use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, GridSpec, PhysicalConstants, ScalarField};
use crate::pnm::parse_pgm;
use crate::soliton::{Helicity, VortexConfiguration};

pub const FEATURES_SCHEMA: &str = "chiral-sensor/features/v1";

/// Default sample time as a fraction of the density period.
pub const DEFAULT_T_SAMPLE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRaster {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl ImageRaster {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(Error::InvalidConfig(format!(
                "raster {width}x{height} with {} samples",
                samples.len()
            )));
        }
        if let Some(k) = samples.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidConfig(format!("sample {k} outside [0, 1]: {}", samples[k])));
        }
        Ok(Self { width, height, samples })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn pixel(&self, col: usize, row: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    pub fn from_pgm_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let pgm = parse_pgm(bytes).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            line: e.line,
            msg: e.msg,
        })?;
        let max = pgm.maxval as f64;
        Self::new(pgm.width, pgm.height, pgm.pixels.iter().map(|&p| p as f64 / max).collect())
    }

    /// Comma-separated rows of intensities already in `[0, 1]`, top row first.
    pub fn from_csv_str(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Image {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut samples = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let before = samples.len();
            for tok in line.split(',') {
                let v: f64 = tok.trim().parse().map_err(|_| err(k + 1, format!("malformed sample {tok:?}")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(k + 1, format!("sample {v} outside [0, 1]")));
                }
                samples.push(v);
            }
            let row = samples.len() - before;
            match width {
                None => width = Some(row),
                Some(w) if w != row => return Err(err(k + 1, format!("row has {row} samples, expected {w}"))),
                _ => {}
            }
            height += 1;
        }
        let width = width.ok_or_else(|| err(0, "empty image".into()))?;
        Self::new(width, height, samples)
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at
    /// integers), clamped to the image.
    pub fn sample(&self, col: f64, row: f64) -> f64 {
        let (i0, fu) = split_coordinate(col, self.width);
        let (j0, fv) = split_coordinate(row, self.height);
        let i1 = (i0 + 1).min(self.width - 1);
        let j1 = (j0 + 1).min(self.height - 1);
        let top = (1.0 - fu) * self.pixel(i0, j0) + fu * self.pixel(i1, j0);
        let bottom = (1.0 - fu) * self.pixel(i0, j1) + fu * self.pixel(i1, j1);
        (1.0 - fv) * top + fv * bottom
    }

    /// Intensity seen by the grid cell centered at `z`.
    pub fn sample_at(&self, spec: &GridSpec, z: Complex64) -> f64 {
        let col = (z.re + spec.half_extent_x()) / (2.0 * spec.half_extent_x()) * self.width as f64 - 0.5;
        let row = (spec.half_extent_y() - z.im) / (2.0 * spec.half_extent_y()) * self.height as f64 - 0.5;
        self.sample(col, row)
    }
}

fn split_coordinate(u: f64, len: usize) -> (usize, f64) {
    if len == 1 {
        return (0, 0.0);
    }
    let u = u.clamp(0.0, (len - 1) as f64);
    let i = (u.floor() as usize).min(len - 2);
    (i, u - i as f64)
}

/// Reads a PGM (P2/P5) file, or a CSV grid when the extension is `.csv`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageRaster> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let text = String::from_utf8(bytes).map_err(|_| Error::Image {
            path: path.to_path_buf(),
            line: 0,
            msg: "not UTF-8".into(),
        })?;
        ImageRaster::from_csv_str(&text, path)
    } else {
        ImageRaster::from_pgm_bytes(&bytes, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationMode {
    /// `rho = p I`.
    Unipolar,
    /// `rho = p (2I - 1)`; mid-gray is unpolarized.
    Bipolar,
}

impl PolarizationMode {
    pub fn apply(self, gain: f64, intensity: f64) -> f64 {
        match self {
            PolarizationMode::Unipolar => gain * intensity,
            PolarizationMode::Bipolar => gain * (2.0 * intensity - 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationMap {
    pub density: ScalarField,
    pub gain: f64,
    pub mode: PolarizationMode,
}

pub fn to_polarization(img: &ImageRaster, spec: &GridSpec, gain: f64, mode: PolarizationMode) -> Result<PolarizationMap> {
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::InvalidConfig(format!("gain must be positive, got {gain}")));
    }
    let density = ScalarField::from_fn(*spec, |z| mode.apply(gain, img.sample_at(spec, z)))?;
    Ok(PolarizationMap { density, gain, mode })
}

/// `B_eff = -rho / kappa`.
pub fn effective_field(pol: &PolarizationMap, constants: &PhysicalConstants) -> Result<ScalarField> {
    let inv = -1.0 / constants.kappa();
    pol.density.map(|rho| inv * rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeDocument", into = "LatticeDocument")]
pub struct HoleLattice {
    centers: Vec<Complex64>,
    core_radius: f64,
    window_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub centers: Vec<Complex64>,
    pub core_radius: f64,
    pub window_radius: f64,
}

impl TryFrom<LatticeDocument> for HoleLattice {
    type Error = Error;

    fn try_from(d: LatticeDocument) -> Result<Self> {
        HoleLattice::new(d.centers, d.core_radius, d.window_radius)
    }
}

impl From<HoleLattice> for LatticeDocument {
    fn from(l: HoleLattice) -> Self {
        LatticeDocument {
            centers: l.centers,
            core_radius: l.core_radius,
            window_radius: l.window_radius,
        }
    }
}

impl HoleLattice {
    pub fn new(centers: Vec<Complex64>, core_radius: f64, window_radius: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidConfig("lattice needs at least one hole".into()));
        }
        if !(core_radius.is_finite() && core_radius > 0.0) {
            return Err(Error::InvalidConfig(format!("core radius must be positive, got {core_radius}")));
        }
        if !(window_radius.is_finite() && window_radius >= 3.0 * core_radius) {
            return Err(Error::InvalidConfig(format!(
                "window radius {window_radius} must be at least 3 core radii ({})",
                3.0 * core_radius
            )));
        }
        for (a, p) in centers.iter().enumerate() {
            if !p.is_finite() || centers[..a].contains(p) {
                return Err(Error::InvalidConfig(format!("hole {a} is non-finite or duplicated")));
            }
        }
        Ok(Self {
            centers,
            core_radius,
            window_radius,
        })
    }

    /// `rows x cols` holes at the given pitch, centered on the origin, listed
    /// row by row from the top (largest `y`), left to right.
    pub fn rectangular(rows: usize, cols: usize, pitch: f64, core_radius: f64, window_radius: f64) -> Result<Self> {
        let mut centers = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = (c as f64 - 0.5 * (cols as f64 - 1.0)) * pitch;
                let y = (0.5 * (rows as f64 - 1.0) - r as f64) * pitch;
                centers.push(Complex64::new(x, y));
            }
        }
        Self::new(centers, core_radius, window_radius)
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn check_inside(&self, spec: &GridSpec) -> Result<()> {
        for c in &self.centers {
            if !spec.contains_disc(*c, self.window_radius) {
                return Err(Error::WindowOutOfBounds {
                    cx: c.re,
                    cy: c.im,
                    radius: self.window_radius,
                });
            }
        }
        Ok(())
    }

    /// True when some pair of windows intersects.
    pub fn windows_overlap(&self) -> bool {
        self.centers.iter().enumerate().any(|(a, p)| {
            self.centers[a + 1..]
                .iter()
                .any(|q| (p - q).norm() <= 2.0 * self.window_radius)
        })
    }

    /// Vortex configuration with one hole per lattice site.
    pub fn configuration(&self, winding: u32, helicity: Helicity, constants: PhysicalConstants) -> Result<VortexConfiguration> {
        VortexConfiguration::new(self.centers.clone(), self.core_radius, winding, helicity, constants)
    }

    pub fn id(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("lattice serializes"))
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleFeatures {
    pub index: usize,
    pub center: Complex64,
    pub omega_b: f64,
    pub quadrupole: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFeatures {
    pub schema: String,
    pub image_id: Option<String>,
    pub lattice_id: String,
    pub config_hash: String,
    pub holes: Vec<HoleFeatures>,
}

impl SensorFeatures {
    /// One row per hole: `index,x,y,omega_b,quadrupole,energy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x,y,omega_b,quadrupole,energy\n");
        for h in &self.holes {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{:?}\n",
                h.index, h.center.re, h.center.im, h.omega_b, h.quadrupole, h.energy
            ));
        }
        out
    }
}

/// Arithmetic mean of `field` over cells whose centers lie in the closed disc.
pub fn window_mean(field: &ScalarField, center: Complex64, radius: f64) -> Result<f64> {
    let r2 = radius * radius;
    let mut sum = CompensatedSum::default();
    let mut count = 0usize;
    for (&v, z) in field.values().iter().zip(field.spec().points()) {
        if (z - center).norm_sqr() <= r2 {
            sum.add(v);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::WindowOutOfBounds {
            cx: center.re,
            cy: center.im,
            radius,
        });
    }
    Ok(sum.value() / count as f64)
}

/// Evolved state of hole `index` driven at `omega_b`, sampled at
/// `t_sample * pi / |omega_b|` (the static state when `omega_b == 0`).
pub fn hole_state(config: &VortexConfiguration, index: usize, omega_b: f64, t_sample: f64) -> Result<EvolvedState> {
    let single = VortexConfiguration::single(
        config.centers()[index],
        config.core_radius(),
        config.winding(),
        config.helicity(),
        *config.constants(),
    )?;
    let t = if omega_b == 0.0 { 0.0 } else { t_sample * PI / omega_b.abs() };
    EvolvedState::at_hole(single, omega_b, t)
}

/// Per-hole `(omega_B, Q, E)` in lattice order. `config` must carry the
/// lattice's hole centers and core radius.
pub fn extract_features(
    pol: &PolarizationMap,
    lattice: &HoleLattice,
    config: &VortexConfiguration,
    t_sample: f64,
) -> Result<SensorFeatures> {
    let spec = *pol.density.spec();
    lattice.check_inside(&spec)?;
    if config.centers() != lattice.centers() || config.core_radius() != lattice.core_radius() {
        return Err(Error::InvalidConfig("configuration holes do not match the lattice".into()));
    }
    if !t_sample.is_finite() {
        return Err(Error::InvalidConfig("t_sample must be finite".into()));
    }
    let b_eff = effective_field(pol, config.constants())?;
    let w = lattice.window_radius();

    let mut holes = Vec::with_capacity(lattice.centers().len());
    for (index, &center) in lattice.centers().iter().enumerate() {
        let omega_b = window_mean(&b_eff, center, w)?;
        let state = hole_state(config, index, omega_b, t_sample)?;
        let rho = density_at_time(&state, &spec)?;
        let quadrupole = windowed_quadrupole(&rho, center, w)?;
        let energy = excitation_energy(quadrupole, omega_b, config.constants());
        holes.push(HoleFeatures {
            index,
            center,
            omega_b,
            quadrupole,
            energy,
        });
    }

    #[derive(Serialize)]
    struct HashInput<'a> {
        config: &'a VortexConfiguration,
        grid: GridSpec,
        gain: f64,
        mode: PolarizationMode,
        t_sample: f64,
    }
    let hash_input = HashInput {
        config,
        grid: spec,
        gain: pol.gain,
        mode: pol.mode,
        t_sample,
    };
    Ok(SensorFeatures {
        schema: FEATURES_SCHEMA.into(),
        image_id: None,
        lattice_id: lattice.id(),
        config_hash: sha256_hex(&serde_json::to_vec(&hash_input).expect("config serializes")),
        holes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureScaling {
    /// Raw values.
    None,
    /// Each of `omega_B`, `Q`, `E` divided by its root-mean-square over holes
    /// (left as is when that RMS is zero).
    #[default]
    ComponentRms,
}

/// Flattens features to `[w_0, Q_0, E_0, w_1, ...]`, scales, and normalizes to
/// a unit complex vector with zero imaginary parts.
pub fn features_to_vector(features: &SensorFeatures, scaling: FeatureScaling) -> Result<Vec<Complex64>> {
    let columns: [Vec<f64>; 3] = [
        features.holes.iter().map(|h| h.omega_b).collect(),
        features.holes.iter().map(|h| h.quadrupole).collect(),
        features.holes.iter().map(|h| h.energy).collect(),
    ];
    let scale: [f64; 3] = match scaling {
        FeatureScaling::None => [1.0; 3],
        FeatureScaling::ComponentRms => columns.clone().map(|col| {
            let mut acc = CompensatedSum::default();
            col.iter().for_each(|v| acc.add(v * v));
            let rms = (acc.value() / col.len().max(1) as f64).sqrt();
            if rms > 0.0 {
                rms
            } else {
                1.0
            }
        }),
    };
    let flat: Vec<f64> = (0..features.holes.len())
        .flat_map(|h| (0..3).map(move |c| (h, c)))
        .map(|(h, c)| columns[c][h] / scale[c])
        .collect();
    let mut acc = CompensatedSum::default();
    flat.iter().for_each(|v| acc.add(v * v));
    let norm = acc.value().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroPattern);
    }
    Ok(flat.iter().map(|v| Complex64::new(v / norm, 0.0)).collect())
}
