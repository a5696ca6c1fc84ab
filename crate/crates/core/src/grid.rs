//! Uniform cell-centred 2-D grids carrying real or complex samples.
//!
//! Cell `(i, j)` sits at `(-Lx + (i + 1/2) hx, -Ly + (j + 1/2) hy)` and is stored
//! at flat index `j * nx + i`, so rows run along `x` and the first row is the
//! bottom edge (`y = -Ly`). Every reduction in this module walks cells in that
//! flat order with Neumaier-compensated accumulation, which makes results
//! bit-reproducible for a given input.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 16;

/// Amplitude below which [`phase_winding`] refuses to assign a phase, relative
/// to the largest amplitude in the field.
pub const WINDING_AMPLITUDE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec")]
pub struct GridSpec {
    half_extent_x: f64,
    half_extent_y: f64,
    nx: usize,
    ny: usize,
}

#[derive(Deserialize)]
struct RawGridSpec {
    half_extent_x: f64,
    half_extent_y: f64,
    nx: usize,
    ny: usize,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.half_extent_x, raw.half_extent_y, raw.nx, raw.ny)
    }
}

impl GridSpec {
    pub fn new(half_extent_x: f64, half_extent_y: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells per axis, got {nx}x{ny}"
            )));
        }
        if !(half_extent_x.is_finite() && half_extent_x > 0.0)
            || !(half_extent_y.is_finite() && half_extent_y > 0.0)
        {
            return Err(Error::InvalidGrid(format!(
                "half extents must be positive and finite, got ({half_extent_x}, {half_extent_y})"
            )));
        }
        Ok(Self {
            half_extent_x,
            half_extent_y,
            nx,
            ny,
        })
    }

    /// Square domain `[-half_extent, half_extent]^2` with `n` cells per axis.
    pub fn square(half_extent: f64, n: usize) -> Result<Self> {
        Self::new(half_extent, half_extent, n, n)
    }

    pub fn half_extent_x(&self) -> f64 {
        self.half_extent_x
    }

    pub fn half_extent_y(&self) -> f64 {
        self.half_extent_y
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.half_extent_x / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 * self.half_extent_y / self.ny as f64
    }

    /// Larger of the two spacings.
    pub fn spacing(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_extent_x + (i as f64 + 0.5) * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_extent_y + (j as f64 + 0.5) * self.hy()
    }

    /// Cell centre as a complex coordinate `x + i y`.
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x(i), self.y(j))
    }

    pub fn point_at(&self, index: usize) -> Complex64 {
        self.point(index % self.nx, index / self.nx)
    }

    /// Cell centres in storage order.
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.point(i, j)))
    }

    /// True when the closed disc lies inside the domain rectangle.
    pub fn contains_disc(&self, center: Complex64, radius: f64) -> bool {
        center.re - radius >= -self.half_extent_x
            && center.re + radius <= self.half_extent_x
            && center.im - radius >= -self.half_extent_y
            && center.im + radius <= self.half_extent_y
    }

    /// Distance from `z` to the nearest edge of the domain (negative outside).
    pub fn distance_to_edge(&self, z: Complex64) -> f64 {
        (self.half_extent_x - z.re.abs()).min(self.half_extent_y - z.im.abs())
    }
}

/// The film constant `kappa` together with the couplings it fixes.
///
/// Natural units `hbar = c = e = m = 1` are used throughout, so the recurring
/// prefactor `hbar c |kappa| / e^2` reduces to `|kappa|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants")]
pub struct PhysicalConstants {
    kappa: f64,
}

#[derive(Deserialize)]
struct RawConstants {
    kappa: f64,
}

impl TryFrom<RawConstants> for PhysicalConstants {
    type Error = Error;

    fn try_from(raw: RawConstants) -> Result<Self> {
        PhysicalConstants::new(raw.kappa)
    }
}

impl PhysicalConstants {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "kappa must be finite and nonzero, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Density prefactor `C = |kappa|`.
    pub fn c(&self) -> f64 {
        self.kappa.abs()
    }

    /// Attractive self-coupling `g = 1/|kappa|`.
    pub fn g(&self) -> f64 {
        1.0 / self.kappa.abs()
    }

    pub fn sigma_s(&self) -> f64 {
        self.kappa
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_finite<I: IntoIterator<Item = bool>>(flags: I) -> Result<()> {
    match flags.into_iter().position(|ok| !ok) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        check_finite(values.iter().map(|v| v.is_finite()))?;
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Complex64) -> f64) -> Result<Self> {
        let values = spec.points().map(&mut f).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Row-major CSV: a header row naming the grid parameters, one row with
    /// their values, then `ny` rows of `nx` samples starting at `y = -Ly`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_csv_header(&mut w, &self.spec)?;
        for row in self.values.chunks(self.spec.nx) {
            write_csv_row(&mut w, row.iter().copied())?;
        }
        w.flush()
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (spec, rows) = read_csv_body(r, 1)?;
        Self::new(spec, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        check_finite(values.iter().map(|v| v.is_finite()))?;
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Complex64) -> Complex64) -> Result<Self> {
        let values = spec.points().map(&mut f).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|v| v * factor).collect())
    }

    /// Pointwise `|value|^2`.
    pub fn norm_sqr(&self) -> ScalarField {
        ScalarField {
            spec: self.spec,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// Same layout as [`ScalarField::write_csv`] with each sample written as
    /// an adjacent `re,im` pair.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_csv_header(&mut w, &self.spec)?;
        for row in self.values.chunks(self.spec.nx) {
            write_csv_row(&mut w, row.iter().flat_map(|c| [c.re, c.im]))?;
        }
        w.flush()
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (spec, flat) = read_csv_body(r, 2)?;
        let values = flat
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Self::new(spec, values)
    }

    /// Bilinear interpolation between cell centres. `z` must lie inside the
    /// hull of cell centres.
    fn sample(&self, z: Complex64) -> Complex64 {
        let s = &self.spec;
        let u = (z.re + s.half_extent_x) / s.hx() - 0.5;
        let v = (z.im + s.half_extent_y) / s.hy() - 0.5;
        let i0 = (u.floor() as usize).min(s.nx - 2);
        let j0 = (v.floor() as usize).min(s.ny - 2);
        let fu = u - i0 as f64;
        let fv = v - j0 as f64;
        let a = self.get(i0, j0);
        let b = self.get(i0 + 1, j0);
        let c = self.get(i0, j0 + 1);
        let d = self.get(i0 + 1, j0 + 1);
        a * ((1.0 - fu) * (1.0 - fv)) + b * (fu * (1.0 - fv)) + c * ((1.0 - fu) * fv) + d * (fu * fv)
    }
}

const CSV_HEADER: &str = "nx,ny,half_extent_x,half_extent_y";

fn write_csv_header<W: Write>(w: &mut W, spec: &GridSpec) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    writeln!(
        w,
        "{},{},{:?},{:?}",
        spec.nx, spec.ny, spec.half_extent_x, spec.half_extent_y
    )
}

fn write_csv_row<W: Write>(w: &mut W, row: impl Iterator<Item = f64>) -> std::io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        // Debug formatting is shortest round-trip for f64.
        write!(w, "{v:?}")?;
    }
    w.write_all(b"\n")
}

fn csv_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Image {
        path: "<csv>".into(),
        line,
        msg: msg.into(),
    }
}

fn read_csv_body<R: BufRead>(r: R, per_cell: usize) -> Result<(GridSpec, Vec<f64>)> {
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n + 1, l)),
            Some((n, Err(e))) => Err(csv_error(n + 1, e.to_string())),
            None => Err(csv_error(0, format!("missing {what}"))),
        }
    };
    let (n, header) = next("header")?;
    if header.trim() != CSV_HEADER {
        return Err(csv_error(n, "unexpected header"));
    }
    let (n, params) = next("grid parameters")?;
    let p: Vec<&str> = params.trim().split(',').collect();
    if p.len() != 4 {
        return Err(csv_error(n, "expected four grid parameters"));
    }
    let parse_usize = |s: &str| s.trim().parse::<usize>().map_err(|e| csv_error(n, e.to_string()));
    let parse_f64 = |s: &str| s.trim().parse::<f64>().map_err(|e| csv_error(n, e.to_string()));
    let spec = GridSpec::new(parse_f64(p[2])?, parse_f64(p[3])?, parse_usize(p[0])?, parse_usize(p[1])?)?;
    let mut values = Vec::with_capacity(spec.len() * per_cell);
    for _ in 0..spec.ny {
        let (n, row) = next("data row")?;
        let before = values.len();
        for tok in row.trim().split(',') {
            values.push(tok.trim().parse::<f64>().map_err(|e| csv_error(n, e.to_string()))?);
        }
        if values.len() - before != spec.nx * per_cell {
            return Err(csv_error(n, format!("expected {} columns", spec.nx * per_cell)));
        }
    }
    Ok((spec, values))
}

/// `sum(value * weight * hx * hy)` over all cells in storage order.
///
/// The weight, when given, is evaluated at each cell centre.
pub fn integrate(field: &ScalarField, weight: Option<&dyn Fn(Complex64) -> f64>) -> Result<f64> {
    let spec = field.spec();
    let mut acc = CompensatedSum::default();
    for (index, (&v, z)) in field.values().iter().zip(spec.points()).enumerate() {
        let term = match weight {
            Some(w) => v * w(z),
            None => v,
        };
        if !term.is_finite() {
            return Err(Error::NonFinite { index });
        }
        acc.add(term);
    }
    Ok(acc.value() * spec.cell_area())
}

/// Field values plus a per-cell validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub field: ScalarField,
    pub valid: Vec<bool>,
}

impl MaskedField {
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.field
            .values()
            .iter()
            .zip(&self.valid)
            .filter_map(|(&v, &ok)| ok.then_some(v))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&ok| ok).count()
    }
}

/// Five-point Laplacian. Edge cells are set to zero and marked invalid.
pub fn laplacian(field: &ScalarField) -> Result<MaskedField> {
    let s = *field.spec();
    if s.nx < 3 || s.ny < 3 {
        return Err(Error::GridTooSmall {
            min: 3,
            nx: s.nx,
            ny: s.ny,
        });
    }
    let (ihx2, ihy2) = (1.0 / (s.hx() * s.hx()), 1.0 / (s.hy() * s.hy()));
    let mut out = vec![0.0; s.len()];
    let mut valid = vec![false; s.len()];
    for j in 1..s.ny - 1 {
        for i in 1..s.nx - 1 {
            let c = field.get(i, j);
            let d2x = (field.get(i + 1, j) - 2.0 * c + field.get(i - 1, j)) * ihx2;
            let d2y = (field.get(i, j + 1) - 2.0 * c + field.get(i, j - 1)) * ihy2;
            let k = s.index(i, j);
            out[k] = d2x + d2y;
            valid[k] = true;
        }
    }
    Ok(MaskedField {
        field: ScalarField::new(s, out)?,
        valid,
    })
}

/// `sum(conj(a) * b * hx * hy)` in storage order.
pub fn inner(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch);
    }
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (x, y) in a.values().iter().zip(b.values()) {
        let p = x.conj() * y;
        re.add(p.re);
        im.add(p.im);
    }
    Ok(Complex64::new(re.value(), im.value()) * a.spec().cell_area())
}

/// Net number of times the phase of `field` wraps around `center` on a circle
/// of the given radius, counted counter-clockwise.
///
/// The circle is sampled densely (at least eight points per cell spacing of
/// arc) with bilinear interpolation between cell centres, and the phase is
/// unwrapped step by step.
pub fn phase_winding(field: &ComplexField, center: Complex64, radius: f64) -> Result<i64> {
    let s = field.spec();
    let (x0, x1) = (s.x(0), s.x(s.nx - 1));
    let (y0, y1) = (s.y(0), s.y(s.ny - 1));
    if !(radius > 0.0)
        || center.re - radius < x0
        || center.re + radius > x1
        || center.im - radius < y0
        || center.im + radius > y1
    {
        return Err(Error::CircleOutsideGrid {
            cx: center.re,
            cy: center.im,
            radius,
        });
    }
    let peak = field
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(0.0_f64, f64::max);
    let floor = WINDING_AMPLITUDE_FLOOR * peak;
    let samples = ((2.0 * PI * radius / s.spacing()) * 8.0).ceil().max(256.0) as usize;

    let at = |k: usize| {
        let theta = 2.0 * PI * k as f64 / samples as f64;
        field.sample(center + Complex64::from_polar(radius, theta))
    };
    let first = at(0);
    let mut prev = first;
    let mut total = 0.0;
    for k in 1..=samples {
        let cur = if k == samples { first } else { at(k) };
        let amplitude = cur.norm();
        if !(amplitude > floor) {
            return Err(Error::WindingUndefined { amplitude });
        }
        // arg(cur / prev) is the principal-value phase step.
        total += (cur * prev.conj()).arg();
        prev = cur;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> GridSpec {
        GridSpec::square(1.0, n).unwrap()
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(GridSpec::square(1.0, 15).is_err());
        assert!(GridSpec::new(0.0, 1.0, 16, 16).is_err());
        assert!(GridSpec::new(1.0, f64::NAN, 16, 16).is_err());
        let g = unit_grid(16);
        assert_eq!(g.hx(), 0.125);
        assert_eq!(g.x(0), -0.9375);
    }

    #[test]
    fn constants_relations() {
        let c = PhysicalConstants::new(-2.0).unwrap();
        assert_eq!(c.c(), 2.0);
        assert_eq!(c.g() * c.c(), 1.0);
        assert_eq!(c.sigma_s(), -2.0);
        assert!(PhysicalConstants::new(0.0).is_err());
        assert!(serde_json::from_str::<PhysicalConstants>(r#"{"kappa":0.0}"#).is_err());
    }

    #[test]
    fn integrate_trivial_fields() {
        let g = unit_grid(32);
        assert_eq!(integrate(&ScalarField::zeros(g), None).unwrap(), 0.0);
        let ones = ScalarField::from_fn(g, |_| 1.0).unwrap();
        assert!((integrate(&ones, None).unwrap() - 4.0).abs() < g.hx() * g.hx());
    }

    #[test]
    fn integrate_rejects_nonfinite_weight() {
        let g = unit_grid(16);
        let ones = ScalarField::from_fn(g, |_| 1.0).unwrap();
        let w = |_: Complex64| f64::INFINITY;
        assert!(matches!(
            integrate(&ones, Some(&w)),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(ScalarField::new(g, vec![f64::NAN; g.len()]).is_err());
    }

    #[test]
    fn laplacian_constant_and_quadratic() {
        let g = GridSpec::square(2.0, 32).unwrap();
        let c = ScalarField::from_fn(g, |_| 3.5).unwrap();
        let lc = laplacian(&c).unwrap();
        assert!(lc.valid_values().all(|v| v == 0.0));
        let q = ScalarField::from_fn(g, |z| z.norm_sqr()).unwrap();
        let lq = laplacian(&q).unwrap();
        assert_eq!(lq.valid_count(), 30 * 30);
        for v in lq.valid_values() {
            assert!((v - 4.0).abs() < 1e-10, "{v}");
        }
        assert!(!lq.valid[0] && !lq.valid[g.len() - 1]);
    }

    #[test]
    fn inner_products() {
        let g = unit_grid(32);
        let raw = ComplexField::from_fn(g, |z| Complex64::new((-z.norm_sqr()).exp(), z.re)).unwrap();
        let norm = inner(&raw, &raw).unwrap().re.sqrt();
        let a = raw.scale(Complex64::new(1.0 / norm, 0.0)).unwrap();
        assert!((inner(&a, &a).unwrap() - 1.0).norm() < 1e-14);
        let ia = a.scale(Complex64::i()).unwrap();
        assert!((inner(&a, &ia).unwrap() - Complex64::i()).norm() < 1e-14);

        let left = ComplexField::from_fn(g, |z| if z.re < 0.0 { 1.0.into() } else { 0.0.into() }).unwrap();
        let right = ComplexField::from_fn(g, |z| if z.re > 0.0 { 1.0.into() } else { 0.0.into() }).unwrap();
        assert_eq!(inner(&left, &right).unwrap(), Complex64::new(0.0, 0.0));

        let other = ComplexField::from_fn(unit_grid(16), |_| 1.0.into()).unwrap();
        assert!(matches!(inner(&a, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn winding_of_simple_fields() {
        let g = GridSpec::square(2.0, 64).unwrap();
        let c = Complex64::new(0.3, -0.2);
        let zc = ComplexField::from_fn(g, |z| z - c).unwrap();
        assert_eq!(phase_winding(&zc, c, 0.5).unwrap(), 1);
        assert_eq!(phase_winding(&zc, c, 1.2).unwrap(), 1);
        let conj = ComplexField::from_fn(g, |z| (z - c).conj().powi(2)).unwrap();
        assert_eq!(phase_winding(&conj, c, 0.7).unwrap(), -2);
        let one = ComplexField::from_fn(g, |_| 1.0.into()).unwrap();
        assert_eq!(phase_winding(&one, c, 0.5).unwrap(), 0);
    }

    #[test]
    fn winding_errors() {
        let g = GridSpec::square(2.0, 64).unwrap();
        let zero_on_circle = ComplexField::from_fn(g, |z| {
            if (z.norm() - 0.5).abs() < 0.2 { 0.0.into() } else { z }
        })
        .unwrap();
        assert!(matches!(
            phase_winding(&zero_on_circle, 0.0.into(), 0.5),
            Err(Error::WindingUndefined { .. })
        ));
        let one = ComplexField::from_fn(g, |_| 1.0.into()).unwrap();
        assert!(matches!(
            phase_winding(&one, 0.0.into(), 5.0),
            Err(Error::CircleOutsideGrid { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let g = GridSpec::new(1.5, 2.0, 16, 20).unwrap();
        let s = ScalarField::from_fn(g, |z| z.re.sin() * z.im + 1.0 / 3.0).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(ScalarField::read_csv(&buf[..]).unwrap(), s);

        let c = ComplexField::from_fn(g, |z| z * z / 7.0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(ComplexField::read_csv(&buf[..]).unwrap(), c);
        assert!(ScalarField::read_csv(&b"bad\n"[..]).is_err());
    }
}
