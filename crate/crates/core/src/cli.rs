//! Batch driver: `soliton`, `sense`, `store`, `recall`.
//!
//! Every command reads one JSON run configuration (plus a few flag
//! overrides) and writes deterministic output files. Floats are written in
//! shortest round-trip form so repeated runs produce identical bytes.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{density_at_time, quadrupole_moment, quadrupole_tail};
use crate::error::{Error, ErrorClass, Result};
use crate::export::{write_field_csv, write_json, write_snapshot};
use crate::grid::{GridSpec, PhysicalConstants};
use crate::memory::{recall, PatternMemory, RecallResult};
use crate::sensor::{
    effective_field, extract_features, features_to_vector, hole_state, load_image, sha256_hex, to_polarization,
    window_mean, FeatureScaling, HoleLattice, PolarizationMode, SensorFeatures, DEFAULT_T_SAMPLE, FEATURES_SCHEMA,
};
use crate::soliton::{charge_density, liouville_residual, spin_current, total_flux, FluxReport, Helicity, LiouvilleReport, VortexConfiguration};

pub const PATTERN_SCHEMA: &str = "chiral-sensor/pattern/v1";
pub const RECALL_SCHEMA: &str = "chiral-sensor/recall/v1";

#[derive(Debug, Parser)]
#[command(name = "chiral-sensor", version, about = "Vortex-lattice image sensor simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact vortex fields, flux and Liouville diagnostics.
    Soliton {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Image to per-hole feature triples.
    Sense {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the features as a CSV matrix.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory for per-hole evolved density snapshots.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Append a feature or pattern document to a memory file.
    Store {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long, value_enum, default_value = "component-rms")]
        scaling: ScalingArg,
    },
    /// Recall the closest stored pattern.
    Recall {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "component-rms")]
        scaling: ScalingArg,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ScalingArg {
    None,
    ComponentRms,
}

impl From<ScalingArg> for FeatureScaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::None => FeatureScaling::None,
            ScalingArg::ComponentRms => FeatureScaling::ComponentRms,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub winding: Option<u32>,
    /// Cells per axis (both axes).
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsBlock {
    pub kappa: f64,
    pub winding: u32,
    pub core_radius: f64,
    #[serde(default = "default_helicity")]
    pub helicity: Helicity,
}

fn default_helicity() -> Helicity {
    Helicity::Up
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorBlock {
    pub gain: f64,
    pub mode: PolarizationMode,
    pub window_radius: f64,
    #[serde(default = "default_t_sample")]
    pub t_sample: f64,
}

fn default_t_sample() -> f64 {
    DEFAULT_T_SAMPLE
}

fn default_holes() -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0)]
}

/// Whole-run configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsBlock,
    pub grid: GridSpec,
    /// Hole centers as `[x, y]` pairs; defaults to a single hole at the origin.
    #[serde(default = "default_holes")]
    pub holes: Vec<Complex64>,
    #[serde(default)]
    pub sensor: Option<SensorBlock>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::InvalidConfig(format!("config file not found: {}", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(k) = o.kappa {
            self.physics.kappa = k;
        }
        if let Some(n) = o.winding {
            self.physics.winding = n;
        }
        if let Some(r) = o.resolution {
            self.grid = GridSpec::new(self.grid.half_extent_x(), self.grid.half_extent_y(), r, r)?;
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.physics.kappa)
    }

    pub fn vortex(&self) -> Result<VortexConfiguration> {
        VortexConfiguration::new(
            self.holes.clone(),
            self.physics.core_radius,
            self.physics.winding,
            self.physics.helicity,
            self.constants()?,
        )
    }

    pub fn sensor(&self) -> Result<&SensorBlock> {
        self.sensor
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("config has no sensor block".into()))
    }

    pub fn lattice(&self) -> Result<HoleLattice> {
        HoleLattice::new(self.holes.clone(), self.physics.core_radius, self.sensor()?.window_radius)
    }
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(overrides)?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Flux summary written by `soliton`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolitonReport {
    pub flux: FluxReport,
    /// `charge / expected_charge`.
    pub charge_ratio: f64,
    /// Grid quadrupole about each hole (whole domain).
    pub quadrupole: Vec<f64>,
    /// Static single-hole quadrupole tail beyond the nearest domain edge.
    pub quadrupole_tail: Vec<f64>,
}

pub fn cmd_soliton(config: &Path, out: &Path, overrides: &Overrides) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let vortex = cfg.vortex()?;
    let spec = cfg.grid;
    ensure_dir(out)?;

    let rho = charge_density(&vortex, &spec)?;
    write_snapshot(&rho, out, "density")?;
    let (jx, jy) = spin_current(&vortex, &spec)?;
    write_field_csv(&jx, &out.join("current_x.csv"))?;
    write_field_csv(&jy, &out.join("current_y.csv"))?;

    let flux = total_flux(&vortex, &spec)?;
    let quadrupole = vortex
        .centers()
        .iter()
        .map(|&c| quadrupole_moment(&rho, c))
        .collect::<Result<Vec<_>>>()?;
    let tails = vortex
        .centers()
        .iter()
        .map(|&c| quadrupole_tail(&vortex, spec.distance_to_edge(c)))
        .collect();
    write_json(
        &out.join("flux.json"),
        &SolitonReport {
            charge_ratio: flux.charge / flux.expected_charge,
            flux,
            quadrupole,
            quadrupole_tail: tails,
        },
    )?;

    let (residual, report): (_, LiouvilleReport) = liouville_residual(&vortex, &spec)?;
    write_field_csv(&residual.field, &out.join("liouville_residual.csv"))?;
    write_json(&out.join("liouville.json"), &report)
}

pub fn cmd_sense(
    image: &Path,
    config: &Path,
    out: &Path,
    csv: Option<&Path>,
    snapshots: Option<&Path>,
    overrides: &Overrides,
) -> Result<SensorFeatures> {
    let cfg = load_config(config, overrides)?;
    let sensor = cfg.sensor()?.clone();
    let lattice = cfg.lattice()?;
    let vortex = cfg.vortex()?;
    let raster = load_image(image)?;
    let bytes = std::fs::read(image).map_err(|e| Error::io(image, e))?;

    let pol = to_polarization(&raster, &cfg.grid, sensor.gain, sensor.mode)?;
    let mut features = extract_features(&pol, &lattice, &vortex, sensor.t_sample)?;
    features.image_id = Some(sha256_hex(&bytes));
    write_json(out, &features)?;
    if let Some(path) = csv {
        std::fs::write(path, features.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    if let Some(dir) = snapshots {
        ensure_dir(dir)?;
        let b_eff = effective_field(&pol, vortex.constants())?;
        for (k, &c) in lattice.centers().iter().enumerate() {
            let omega_b = window_mean(&b_eff, c, lattice.window_radius())?;
            let state = hole_state(&vortex, k, omega_b, sensor.t_sample)?;
            write_snapshot(&density_at_time(&state, &cfg.grid)?, dir, &format!("hole_{k:03}"))?;
        }
    }
    Ok(features)
}

/// A raw pattern vector document, interleaved `[re, im, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDocument {
    pub schema: String,
    pub values: Vec<f64>,
}

impl PatternDocument {
    pub fn new(pattern: &[Complex64]) -> Self {
        Self {
            schema: PATTERN_SCHEMA.into(),
            values: pattern.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Reads a features or pattern document and turns it into a pattern vector.
pub fn load_pattern(path: &Path, scaling: FeatureScaling) -> Result<Vec<Complex64>> {
    let doc_err = |msg: String| Error::Document {
        path: path.to_path_buf(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| doc_err(e.to_string()))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(FEATURES_SCHEMA) => {
            let f: SensorFeatures = serde_json::from_value(value).map_err(|e| doc_err(e.to_string()))?;
            features_to_vector(&f, scaling)
        }
        Some(PATTERN_SCHEMA) => {
            let p: PatternDocument = serde_json::from_value(value).map_err(|e| doc_err(e.to_string()))?;
            if !p.values.len().is_multiple_of(2) {
                return Err(doc_err("odd number of interleaved values".into()));
            }
            Ok(p.values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
        }
        other => Err(doc_err(format!("unknown schema {other:?}"))),
    }
}

fn load_memory(path: &Path) -> Result<PatternMemory> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PatternMemory::from_json(&text, path)
}

pub fn cmd_store(features: &Path, label: &str, memory: &Path, scaling: FeatureScaling) -> Result<PatternMemory> {
    let pattern = load_pattern(features, scaling)?;
    let current = if memory.exists() { load_memory(memory)? } else { PatternMemory::new() };
    let updated = current.store(&pattern, label)?;
    let mut text = updated.to_json();
    text.push('\n');
    std::fs::write(memory, text).map_err(|e| Error::io(memory, e))?;
    Ok(updated)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecallReport {
    pub schema: String,
    #[serde(flatten)]
    pub result: RecallResult,
}

pub fn cmd_recall(input: &Path, memory: &Path, out: &Path, scaling: FeatureScaling) -> Result<RecallResult> {
    let pattern = load_pattern(input, scaling)?;
    let mem = load_memory(memory)?;
    let result = recall(&mem, &pattern)?;
    write_json(
        out,
        &RecallReport {
            schema: RECALL_SCHEMA.into(),
            result: result.clone(),
        },
    )?;
    Ok(result)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Soliton { config, out, overrides } => cmd_soliton(&config, &out, &overrides),
        Command::Sense {
            image,
            config,
            out,
            csv,
            snapshots,
            overrides,
        } => cmd_sense(&image, &config, &out, csv.as_deref(), snapshots.as_deref(), &overrides).map(|_| ()),
        Command::Store {
            features,
            label,
            memory,
            scaling,
        } => cmd_store(&features, &label, &memory, scaling.into()).map(|_| ()),
        Command::Recall {
            input,
            memory,
            out,
            scaling,
        } => cmd_recall(&input, &memory, &out, scaling.into()).map(|_| ()),
    }
}

/// Process exit code for an error class.
pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Io => 3,
        ErrorClass::Numerical => 4,
    }
}
