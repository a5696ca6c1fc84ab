//! Exact self-dual vortex states pinned at holes.
//!
//! A configuration is described by the rational function
//! `f(z) = sum_j (r0 / (z - z_j))^n` (or its complex conjugate for the
//! spin-down helicity). Everything else follows from `f`:
//!
//! * density `rho = 4C |f'|^2 / (1 + |f|^2)^2`,
//! * wavefunction `psi = 2 sqrt(C) f' / (1 + |f|^2)`, so that `|psi|^2 = rho`,
//! * spin current `j = +-(1/2) curl(rho z_hat)`.
//!
//! The density satisfies the Liouville equation `lap(ln rho) = -(2/C) rho`
//! away from the poles of `f` and the zeros of `f'`, which
//! [`liouville_residual`] checks on a grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{laplacian, integrate, ComplexField, GridSpec, MaskedField, PhysicalConstants, ScalarField};

/// Radius, in grid spacings, of the exclusion disc drawn around poles of `f`
/// and zeros of `f'` for logarithmic diagnostics.
pub const MASK_SPACINGS: f64 = 2.0;

/// Relative tail mass above which [`total_flux`] flags the domain as too small.
pub const FLUX_TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Helicity {
    /// Holomorphic data, spin-up polarization.
    Up,
    /// Anti-holomorphic data, spin-down polarization.
    Down,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Up => 1.0,
            Helicity::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Up => Helicity::Down,
            Helicity::Down => Helicity::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub center: Complex64,
    pub core_radius: f64,
}

impl HoleSpec {
    pub fn new(center: Complex64, core_radius: f64) -> Result<Self> {
        check_core_radius(core_radius)?;
        if !center.is_finite() {
            return Err(Error::InvalidConfig("hole center must be finite".into()));
        }
        Ok(Self { center, core_radius })
    }
}

fn check_core_radius(r0: f64) -> Result<()> {
    if r0.is_finite() && r0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("core radius must be positive, got {r0}")))
    }
}

fn check_winding(n: u32) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("winding must be at least 2, got {n}")))
    }
}

fn min_separation(centers: impl Iterator<Item = Complex64> + Clone) -> Option<f64> {
    let pts: Vec<Complex64> = centers.collect();
    let mut best: Option<f64> = None;
    for (a, &p) in pts.iter().enumerate() {
        for &q in &pts[a + 1..] {
            let d = (p - q).norm();
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// Holes sharing one core radius, winding and helicity, with the film
/// constants. Fully determines an exact multi-vortex state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigDocument", into = "ConfigDocument")]
pub struct VortexConfiguration {
    centers: Vec<Complex64>,
    core_radius: f64,
    winding: u32,
    helicity: Helicity,
    constants: PhysicalConstants,
    min_separation: Option<f64>,
}

/// JSON shape of a [`VortexConfiguration`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigDocument {
    pub holes: Vec<Complex64>,
    pub core_radius: f64,
    pub winding: u32,
    pub helicity: Helicity,
    pub kappa: f64,
}

impl TryFrom<ConfigDocument> for VortexConfiguration {
    type Error = Error;

    fn try_from(d: ConfigDocument) -> Result<Self> {
        VortexConfiguration::new(d.holes, d.core_radius, d.winding, d.helicity, PhysicalConstants::new(d.kappa)?)
    }
}

impl From<VortexConfiguration> for ConfigDocument {
    fn from(c: VortexConfiguration) -> Self {
        ConfigDocument {
            holes: c.centers,
            core_radius: c.core_radius,
            winding: c.winding,
            helicity: c.helicity,
            kappa: c.constants.kappa(),
        }
    }
}

/// Components of the holomorphic data at a point: `f`, `f'`, `f''`.
#[derive(Debug, Clone, Copy)]
struct Holo {
    f: Complex64,
    df: Complex64,
    d2f: Complex64,
}

impl VortexConfiguration {
    pub fn new(
        centers: Vec<Complex64>,
        core_radius: f64,
        winding: u32,
        helicity: Helicity,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        check_core_radius(core_radius)?;
        check_winding(winding)?;
        if centers.is_empty() {
            return Err(Error::InvalidConfig("at least one hole is required".into()));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("hole centers must be finite".into()));
        }
        let min_separation = min_separation(centers.iter().copied());
        if min_separation == Some(0.0) {
            return Err(Error::InvalidConfig("hole centers must be pairwise distinct".into()));
        }
        Ok(Self {
            centers,
            core_radius,
            winding,
            helicity,
            constants,
            min_separation,
        })
    }

    pub fn single(
        center: Complex64,
        core_radius: f64,
        winding: u32,
        helicity: Helicity,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        Self::new(vec![center], core_radius, winding, helicity, constants)
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    pub fn winding(&self) -> u32 {
        self.winding
    }

    pub fn helicity(&self) -> Helicity {
        self.helicity
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    /// Smallest pairwise hole separation; `None` for a single hole.
    pub fn min_separation(&self) -> Option<f64> {
        self.min_separation
    }

    pub fn with_helicity(&self, helicity: Helicity) -> Self {
        Self {
            helicity,
            ..self.clone()
        }
    }

    pub fn with_constants(&self, constants: PhysicalConstants) -> Self {
        Self {
            constants,
            ..self.clone()
        }
    }

    fn pole_check(&self, z: Complex64) -> Result<()> {
        match self.centers.iter().find(|&&c| c == z) {
            Some(_) => Err(Error::Pole { re: z.re, im: z.im }),
            None => Ok(()),
        }
    }

    /// Spin-up data at `z`. Spin-down values are the complex conjugates.
    fn holo(&self, z: Complex64) -> Holo {
        let n = self.winding as i32;
        let nf = self.winding as f64;
        let mut out = Holo {
            f: Complex64::new(0.0, 0.0),
            df: Complex64::new(0.0, 0.0),
            d2f: Complex64::new(0.0, 0.0),
        };
        for &c in &self.centers {
            let w = Complex64::new(self.core_radius, 0.0) / (z - c);
            let wn = w.powi(n);
            let inv = 1.0 / (z - c);
            out.f += wn;
            out.df += -nf * wn * inv;
            out.d2f += nf * (nf + 1.0) * wn * inv * inv;
        }
        out
    }

    fn conj_if_down(&self, v: Complex64) -> Complex64 {
        match self.helicity {
            Helicity::Up => v,
            Helicity::Down => v.conj(),
        }
    }

    /// `f(z)`; errors at a hole center.
    pub fn f(&self, z: Complex64) -> Result<Complex64> {
        self.pole_check(z)?;
        Ok(self.conj_if_down(self.holo(z).f))
    }

    /// `df/dz` for spin-up, `df/dz*` for spin-down.
    pub fn f_prime(&self, z: Complex64) -> Result<Complex64> {
        self.pole_check(z)?;
        Ok(self.conj_if_down(self.holo(z).df))
    }

    /// Charge density at `z`. Hole centers return the limiting value 0.
    pub fn density_at(&self, z: Complex64) -> f64 {
        let h = self.holo(z);
        let d = 1.0 + h.f.norm_sqr();
        let rho = 4.0 * self.constants.c() * h.df.norm_sqr() / (d * d);
        if rho.is_finite() {
            rho
        } else {
            0.0
        }
    }

    /// Wavefunction at `z` in the gauge `2 sqrt(C) f' / (1 + |f|^2)`.
    /// Hole centers return the limiting value 0.
    pub fn wavefunction_at(&self, z: Complex64) -> Complex64 {
        let h = self.holo(z);
        let psi = 2.0 * self.constants.c().sqrt() * h.df / (1.0 + h.f.norm_sqr());
        if psi.is_finite() {
            self.conj_if_down(psi)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `(d rho/dx, d rho/dy)` from the analytic derivatives of `f`.
    pub fn density_gradient_at(&self, z: Complex64) -> (f64, f64) {
        let h = self.holo(z);
        let d = 1.0 + h.f.norm_sqr();
        // d rho / dz for the holomorphic branch; the density of the
        // anti-holomorphic branch is the same function of (x, y).
        let drho_dz = 4.0
            * self.constants.c()
            * (h.d2f * h.df.conj() / (d * d) - 2.0 * h.df.norm_sqr() * h.df * h.f.conj() / (d * d * d));
        let (gx, gy) = (2.0 * drho_dz.re, -2.0 * drho_dz.im);
        if gx.is_finite() && gy.is_finite() {
            (gx, gy)
        } else {
            (0.0, 0.0)
        }
    }

    /// Spin current `(j_x, j_y) = s/2 (d_y rho, -d_x rho)`, `s` the helicity sign.
    pub fn current_at(&self, z: Complex64) -> (f64, f64) {
        let (gx, gy) = self.density_gradient_at(z);
        let s = 0.5 * self.helicity.sign();
        (s * gy, -s * gx)
    }

    /// Zeros of `f'` in the finite plane: the critical points where the
    /// density vanishes away from the holes.
    pub fn critical_points(&self) -> Vec<Complex64> {
        critical_points(&self.centers, self.winding)
    }
}

/// Roots of `sum_j (z - z_j)^-(n+1)`, found with Durand-Kerner iteration on the
/// polynomial `P(z) = sum_j prod_{k != j} (z - z_k)^(n+1)` (leading coefficient
/// `N`), evaluated in factored form rather than by expanding coefficients.
fn critical_points(centers: &[Complex64], winding: u32) -> Vec<Complex64> {
    let holes = centers.len();
    let degree = (holes - 1) * (winding as usize + 1);
    if degree == 0 {
        return Vec::new();
    }
    let p = winding as i32 + 1;
    let eval = |z: Complex64| -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..holes {
            let mut term = Complex64::new(1.0, 0.0);
            for (k, &c) in centers.iter().enumerate() {
                if k != j {
                    term *= (z - c).powi(p);
                }
            }
            total += term;
        }
        total
    };
    let centroid = centers.iter().sum::<Complex64>() / holes as f64;
    let spread = centers.iter().map(|c| (c - centroid).norm()).fold(0.0, f64::max);
    let radius = 1.0 + 2.0 * spread;
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| centroid + Complex64::from_polar(radius, 0.4 + 2.0 * PI * k as f64 / degree as f64))
        .collect();
    let lead = holes as f64;
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for i in 0..degree {
            let zi = roots[i];
            let mut denom = Complex64::new(lead, 0.0);
            for (k, &zk) in roots.iter().enumerate() {
                if k != i {
                    denom *= zi - zk;
                }
            }
            let step = eval(zi) / denom;
            if step.is_finite() {
                roots[i] = zi - step;
                worst = worst.max(step.norm() / (1.0 + zi.norm()));
            }
        }
        if worst < 1e-14 {
            break;
        }
    }
    roots
}

/// `f(z)` for the configuration; errors at a pole.
pub fn rational_f(config: &VortexConfiguration, z: Complex64) -> Result<Complex64> {
    config.f(z)
}

pub fn f_prime(config: &VortexConfiguration, z: Complex64) -> Result<Complex64> {
    config.f_prime(z)
}

pub fn charge_density(config: &VortexConfiguration, spec: &GridSpec) -> Result<ScalarField> {
    ScalarField::from_fn(*spec, |z| config.density_at(z))
}

pub fn wavefunction(config: &VortexConfiguration, spec: &GridSpec) -> Result<ComplexField> {
    ComplexField::from_fn(*spec, |z| config.wavefunction_at(z))
}

/// Cartesian components `(j_x, j_y)` of the spin current.
pub fn spin_current(config: &VortexConfiguration, spec: &GridSpec) -> Result<(ScalarField, ScalarField)> {
    let jx = ScalarField::from_fn(*spec, |z| config.current_at(z).0)?;
    let jy = ScalarField::from_fn(*spec, |z| config.current_at(z).1)?;
    Ok((jx, jy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    /// Grid integral of the density.
    pub charge: f64,
    /// `-(1/kappa) * charge`.
    pub flux: f64,
    /// Quantized magnitude `4 pi n` per hole (`2 n h` with `h = 2 pi`).
    pub expected_magnitude: f64,
    /// `4 pi n |kappa|` per hole.
    pub expected_charge: f64,
    /// Estimated density mass outside the domain.
    pub tail_estimate: f64,
    /// Set when the tail exceeds [`FLUX_TAIL_TOLERANCE`] of the expected charge.
    pub domain_too_small: bool,
}

/// Mass of a single-hole density outside radius `r`: `4 pi C n (r0/r)^(2n)`.
pub fn density_tail(config: &VortexConfiguration, r: f64) -> f64 {
    if r <= 0.0 {
        return f64::INFINITY;
    }
    let n = config.winding as f64;
    4.0 * PI * config.constants.c() * n * (config.core_radius / r).powf(2.0 * n)
}

pub fn total_flux(config: &VortexConfiguration, spec: &GridSpec) -> Result<FluxReport> {
    let charge = integrate(&charge_density(config, spec)?, None)?;
    let holes = config.centers.len() as f64;
    let n = config.winding as f64;
    let expected_charge = 4.0 * PI * n * config.constants.c() * holes;
    let tail_estimate: f64 = config
        .centers
        .iter()
        .map(|&c| density_tail(config, spec.distance_to_edge(c)))
        .sum();
    Ok(FluxReport {
        charge,
        flux: -charge / config.constants.kappa(),
        expected_magnitude: 4.0 * PI * n * holes,
        expected_charge,
        tail_estimate,
        domain_too_small: !(tail_estimate <= FLUX_TAIL_TOLERANCE * expected_charge),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegisterEntry {
    pub hole: HoleSpec,
    pub helicity: Helicity,
    pub winding: u32,
}

/// Product state over independent per-hole vortices. Its observable density
/// is the sum of the factor densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexRegister {
    entries: Vec<RegisterEntry>,
    constants: PhysicalConstants,
}

impl VortexRegister {
    pub fn new(entries: Vec<RegisterEntry>, constants: PhysicalConstants) -> Result<Self> {
        for e in &entries {
            HoleSpec::new(e.hole.center, e.hole.core_radius)?;
            check_winding(e.winding)?;
        }
        if min_separation(entries.iter().map(|e| e.hole.center)) == Some(0.0) {
            return Err(Error::InvalidConfig("hole centers must be pairwise distinct".into()));
        }
        Ok(Self { entries, constants })
    }

    pub fn entries(&self) -> &[RegisterEntry] {
        &self.entries
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn factor(&self, index: usize) -> Result<VortexConfiguration> {
        let e = &self.entries[index];
        VortexConfiguration::single(e.hole.center, e.hole.core_radius, e.winding, e.helicity, self.constants)
    }

    pub fn with_entry_helicity(&self, index: usize, helicity: Helicity) -> Self {
        let mut out = self.clone();
        out.entries[index].helicity = helicity;
        out
    }
}

pub fn register_density(register: &VortexRegister, spec: &GridSpec) -> Result<ScalarField> {
    let factors = (0..register.entries.len())
        .map(|k| register.factor(k))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_fn(*spec, |z| factors.iter().map(|f| f.density_at(z)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub median_abs: f64,
    pub max_abs: f64,
    pub max_density: f64,
    /// `median_abs / max_density`.
    pub normalized_median: f64,
    pub cells_used: usize,
    pub cells_masked: usize,
}

/// Pointwise `lap(ln rho) + (2/C) rho` on interior cells outside the
/// exclusion discs, together with summary statistics.
pub fn liouville_residual(config: &VortexConfiguration, spec: &GridSpec) -> Result<(MaskedField, LiouvilleReport)> {
    let rho = charge_density(config, spec)?;
    let log_rho = rho.map(|v| if v > 0.0 { v.ln() } else { 0.0 })?;
    let lap = laplacian(&log_rho)?;

    let exclusion = MASK_SPACINGS * spec.spacing();
    let singular: Vec<Complex64> = config.centers.iter().copied().chain(config.critical_points()).collect();
    let two_over_c = 2.0 / config.constants.c();
    let (nx, ny) = (spec.nx(), spec.ny());
    let positive = |i: usize, j: usize| rho.get(i, j) > 0.0;

    let mut valid = lap.valid.clone();
    let mut residual = vec![0.0; spec.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = spec.index(i, j);
            if !valid[k] {
                continue;
            }
            let z = spec.point(i, j);
            let near = singular.iter().any(|s| (z - s).norm() <= exclusion);
            let stencil_ok =
                positive(i, j) && positive(i - 1, j) && positive(i + 1, j) && positive(i, j - 1) && positive(i, j + 1);
            if near || !stencil_ok {
                valid[k] = false;
                continue;
            }
            residual[k] = lap.field.values()[k] + two_over_c * rho.values()[k];
        }
    }
    let field = ScalarField::new(*spec, residual)?;
    let masked = MaskedField { field, valid };

    let mut abs: Vec<f64> = masked.valid_values().map(f64::abs).collect();
    abs.sort_by(f64::total_cmp);
    let median_abs = match abs.len() {
        0 => f64::NAN,
        m if m % 2 == 1 => abs[m / 2],
        m => 0.5 * (abs[m / 2 - 1] + abs[m / 2]),
    };
    let max_density = rho.max();
    let report = LiouvilleReport {
        median_abs,
        max_abs: abs.last().copied().unwrap_or(f64::NAN),
        max_density,
        normalized_median: median_abs / max_density,
        cells_used: abs.len(),
        cells_masked: spec.len() - abs.len(),
    };
    Ok((masked, report))
}
