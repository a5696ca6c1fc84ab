//! Associative recall over stored unit-norm patterns.
//!
//! The propagator is the outer-product sum `G = sum_k |psi_k><psi_k|`; recall
//! keeps only the dominant term, projecting the input onto the stored pattern
//! with the largest overlap magnitude.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, ComplexField};

pub const MEMORY_SCHEMA: &str = "chiral-sensor/memory/v1";

/// Overlap magnitudes closer than this are reported as ambiguous.
pub const TIE_EPSILON: f64 = 1e-9;

/// Allowed deviation of a stored pattern's norm from one.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// `sum conj(a_i) b_i` with compensated accumulation in index order.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (x, y) in a.iter().zip(b) {
        let p = x.conj() * y;
        re.add(p.re);
        im.add(p.im);
    }
    Complex64::new(re.value(), im.value())
}

pub fn norm(pattern: &[Complex64]) -> f64 {
    let mut acc = CompensatedSum::default();
    pattern.iter().for_each(|v| acc.add(v.norm_sqr()));
    acc.value().sqrt()
}

pub fn normalize(pattern: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = norm(pattern);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::ZeroPattern);
    }
    Ok(pattern.iter().map(|v| v / n).collect())
}

/// Flattens a grid field into a pattern vector (storage order).
pub fn field_pattern(field: &ComplexField) -> Vec<Complex64> {
    field.values().to_vec()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternMemory {
    patterns: Vec<Vec<Complex64>>,
    labels: Vec<String>,
}

impl PatternMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Common pattern length, once something has been stored.
    pub fn dimension(&self) -> Option<usize> {
        self.patterns.first().map(Vec::len)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn pattern(&self, index: usize) -> &[Complex64] {
        &self.patterns[index]
    }

    fn check_dimension(&self, got: usize) -> Result<()> {
        match self.dimension() {
            Some(expected) if expected != got => Err(Error::DimensionMismatch { expected, got }),
            _ => Ok(()),
        }
    }

    /// New memory with `pattern` (normalized) appended under `label`.
    pub fn store(&self, pattern: &[Complex64], label: &str) -> Result<PatternMemory> {
        if self.labels.iter().any(|l| l == label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        self.check_dimension(pattern.len())?;
        let unit = normalize(pattern)?;
        let mut out = self.clone();
        out.patterns.push(unit);
        out.labels.push(label.to_string());
        Ok(out)
    }

    pub fn to_document(&self) -> MemoryDocument {
        MemoryDocument {
            schema: MEMORY_SCHEMA.into(),
            dimension: self.dimension().unwrap_or(0),
            labels: self.labels.clone(),
            patterns: self
                .patterns
                .iter()
                .map(|p| p.iter().flat_map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: MemoryDocument) -> Result<Self> {
        if doc.schema != MEMORY_SCHEMA {
            return Err(Error::InvalidConfig(format!("unsupported memory schema {:?}", doc.schema)));
        }
        if doc.labels.len() != doc.patterns.len() {
            return Err(Error::InvalidConfig("label and pattern counts differ".into()));
        }
        let mut out = PatternMemory::new();
        for (label, flat) in doc.labels.into_iter().zip(doc.patterns) {
            if flat.len() != 2 * doc.dimension {
                return Err(Error::DimensionMismatch {
                    expected: 2 * doc.dimension,
                    got: flat.len(),
                });
            }
            if out.labels.contains(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            let pattern: Vec<Complex64> = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let n = norm(&pattern);
            if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::InvalidConfig(format!("stored pattern {label:?} has norm {n}")));
            }
            out.patterns.push(pattern);
            out.labels.push(label);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("memory serializes")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let doc: MemoryDocument = serde_json::from_str(text).map_err(|e| Error::Document {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Self::from_document(doc)
    }
}

/// On-disk form: each pattern is `[re0, im0, re1, im1, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryDocument {
    pub schema: String,
    pub dimension: usize,
    pub labels: Vec<String>,
    pub patterns: Vec<Vec<f64>>,
}

/// `sum_k <psi_k, input> psi_k`.
pub fn green_apply(memory: &PatternMemory, input: &[Complex64]) -> Result<Vec<Complex64>> {
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    memory.check_dimension(input.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for psi in &memory.patterns {
        let a = overlap(psi, input);
        for (o, p) in out.iter_mut().zip(psi) {
            *o += a * p;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallResult {
    pub index: usize,
    pub label: String,
    /// `|<psi_k, input>|` for the winner.
    pub overlap: f64,
    /// `<psi_k, input>` for the winner.
    pub amplitude: Complex64,
    /// `<psi_k, input> psi_k`.
    pub output: Vec<Complex64>,
    pub runner_up: Option<RunnerUp>,
    /// Winner and runner-up magnitudes differ by less than [`TIE_EPSILON`].
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunnerUp {
    pub index: usize,
    pub label: String,
    pub overlap: f64,
}

/// Projects `input` onto the stored pattern of largest overlap magnitude.
/// Magnitudes within [`TIE_EPSILON`] of the maximum count as tied and the
/// lowest index among them wins.
pub fn recall(memory: &PatternMemory, input: &[Complex64]) -> Result<RecallResult> {
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    memory.check_dimension(input.len())?;
    if !(norm(input) > 0.0) {
        return Err(Error::ZeroPattern);
    }
    let amplitudes: Vec<Complex64> = memory.patterns.iter().map(|p| overlap(p, input)).collect();
    let magnitudes: Vec<f64> = amplitudes.iter().map(|a| a.norm()).collect();
    let top = magnitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let index = magnitudes
        .iter()
        .position(|&m| m >= top - TIE_EPSILON)
        .expect("nonempty memory");

    let runner_up = magnitudes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .fold(None::<(usize, f64)>, |best, (k, &m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((k, m)),
        })
        .map(|(k, m)| RunnerUp {
            index: k,
            label: memory.labels[k].clone(),
            overlap: m,
        });
    let ambiguous = runner_up
        .as_ref()
        .is_some_and(|r| (magnitudes[index] - r.overlap).abs() < TIE_EPSILON);
    let amplitude = amplitudes[index];
    Ok(RecallResult {
        index,
        label: memory.labels[index].clone(),
        overlap: magnitudes[index],
        amplitude,
        output: memory.patterns[index].iter().map(|p| amplitude * p).collect(),
        runner_up,
        ambiguous,
    })
}

/// `M[j][k] = |<psi_j, psi_k>|`.
pub fn overlap_matrix(memory: &PatternMemory) -> Vec<Vec<f64>> {
    memory
        .patterns
        .iter()
        .map(|a| memory.patterns.iter().map(|b| overlap(a, b).norm()).collect())
        .collect()
}
