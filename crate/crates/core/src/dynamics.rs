//! Single-vortex evolution in a locally uniform background field, and the
//! quadrupole / excitation-energy diagnostics.
//!
//! With `R = r (1 + i tan(w t))` (complex notation, `r` measured from the
//! drive center) the evolved state is
//!
//! ```text
//! psi(r, t) = exp(-i w |r|^2 tan(w t) / 2) / cos(w t) * psi0(R)
//! ```
//!
//! Since `|R| = |r| / |cos(w t)|` the norm is conserved and the density is
//! periodic with period `pi / |w|`. The map focuses at `w t = pi/2 (mod pi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, ComplexField, GridSpec, PhysicalConstants, ScalarField};
use crate::soliton::VortexConfiguration;

/// Smallest admissible `|cos(omega_B t)|`.
pub const SINGULAR_COS_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundDrive {
    /// Cyclotron frequency; equals the local effective field in natural units.
    pub omega_b: f64,
    pub center: Complex64,
}

impl BackgroundDrive {
    pub fn new(omega_b: f64, center: Complex64) -> Result<Self> {
        if !omega_b.is_finite() || !center.is_finite() {
            return Err(Error::InvalidConfig("drive must be finite".into()));
        }
        Ok(Self { omega_b, center })
    }

    /// Density period `pi / |omega_B|`; `None` for the static branch.
    pub fn density_period(&self) -> Option<f64> {
        (self.omega_b != 0.0).then(|| PI / self.omega_b.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    config: VortexConfiguration,
    drive: BackgroundDrive,
    time: f64,
}

impl EvolvedState {
    pub fn new(config: VortexConfiguration, drive: BackgroundDrive, time: f64) -> Result<Self> {
        if config.centers().len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "evolution takes a single-hole configuration, got {} holes",
                config.centers().len()
            )));
        }
        if !time.is_finite() {
            return Err(Error::InvalidConfig("time must be finite".into()));
        }
        let cos = (drive.omega_b * time).cos();
        if cos.abs() <= SINGULAR_COS_GUARD {
            return Err(Error::SingularTime { cos });
        }
        Ok(Self { config, drive, time })
    }

    /// Drive centered on the configuration's hole.
    pub fn at_hole(config: VortexConfiguration, omega_b: f64, time: f64) -> Result<Self> {
        let center = config.centers()[0];
        Self::new(config, BackgroundDrive::new(omega_b, center)?, time)
    }

    pub fn config(&self) -> &VortexConfiguration {
        &self.config
    }

    pub fn drive(&self) -> &BackgroundDrive {
        &self.drive
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn is_static(&self) -> bool {
        self.drive.omega_b == 0.0 || self.time == 0.0
    }

    /// Evolved amplitude at `z`.
    pub fn amplitude_at(&self, z: Complex64) -> Complex64 {
        if self.is_static() {
            return self.config.wavefunction_at(z);
        }
        let phase_arg = self.drive.omega_b * self.time;
        let (tan, cos) = (phase_arg.tan(), phase_arg.cos());
        let r = z - self.drive.center;
        let mapped = self.drive.center + r * Complex64::new(1.0, tan);
        let gauge = Complex64::from_polar(1.0 / cos, -0.5 * self.drive.omega_b * r.norm_sqr() * tan);
        gauge * self.config.wavefunction_at(mapped)
    }
}

pub fn evolve(state: &EvolvedState, spec: &GridSpec) -> Result<ComplexField> {
    ComplexField::from_fn(*spec, |z| state.amplitude_at(z))
}

pub fn density_at_time(state: &EvolvedState, spec: &GridSpec) -> Result<ScalarField> {
    Ok(evolve(state, spec)?.norm_sqr())
}

/// `Q = integral |r - center|^2 rho d^2r` over the whole grid.
pub fn quadrupole_moment(density: &ScalarField, center: Complex64) -> Result<f64> {
    integrate(density, Some(&|z: Complex64| (z - center).norm_sqr()))
}

/// Quadrupole restricted to the closed disc `|r - center| <= radius`.
pub fn windowed_quadrupole(density: &ScalarField, center: Complex64, radius: f64) -> Result<f64> {
    let r2 = radius * radius;
    integrate(
        density,
        Some(&|z: Complex64| {
            let d2 = (z - center).norm_sqr();
            if d2 <= r2 {
                d2
            } else {
                0.0
            }
        }),
    )
}

/// Static single-hole quadrupole mass outside radius `r`:
/// `4 pi C n^2 r0^(2n) r^(2-2n) / (n - 1)`.
pub fn quadrupole_tail(config: &VortexConfiguration, r: f64) -> f64 {
    if r <= 0.0 {
        return f64::INFINITY;
    }
    let n = config.winding() as f64;
    let r0 = config.core_radius();
    4.0 * PI * config.constants().c() * n * n * r0.powf(2.0 * n) * r.powf(2.0 - 2.0 * n) / (n - 1.0)
}

/// `E = 2C (omega_B + omega_B^2 Q / 4)`: zero-point term plus excitation term.
pub fn excitation_energy(q: f64, omega_b: f64, constants: &PhysicalConstants) -> f64 {
    2.0 * constants.c() * (omega_b + 0.25 * omega_b * omega_b * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::{charge_density, wavefunction, Helicity};

    fn vortex() -> VortexConfiguration {
        VortexConfiguration::single(Complex64::new(0.0, 0.0), 1.0, 2, Helicity::Up, PhysicalConstants::new(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn static_branches_are_identity() {
        let spec = GridSpec::square(4.0, 32).unwrap();
        let psi0 = wavefunction(&vortex(), &spec).unwrap();
        let at_zero = EvolvedState::at_hole(vortex(), 0.3, 0.0).unwrap();
        assert_eq!(evolve(&at_zero, &spec).unwrap(), psi0);
        let no_field = EvolvedState::at_hole(vortex(), 0.0, 12.0).unwrap();
        assert_eq!(evolve(&no_field, &spec).unwrap(), psi0);
        assert_eq!(density_at_time(&no_field, &spec).unwrap(), psi0.norm_sqr());
    }

    #[test]
    fn singular_times_rejected() {
        let w = 0.1;
        let focus = 0.5 * PI / w;
        assert!(matches!(EvolvedState::at_hole(vortex(), w, focus), Err(Error::SingularTime { .. })));
        assert!(matches!(
            EvolvedState::at_hole(vortex(), w, 3.0 * focus + 0.5e-6 / w),
            Err(Error::SingularTime { .. })
        ));
        assert!(EvolvedState::at_hole(vortex(), w, focus - 1e-3 / w).is_ok());
    }

    #[test]
    fn multi_hole_rejected() {
        let two = VortexConfiguration::new(
            vec![Complex64::new(-2.0, 0.0), Complex64::new(2.0, 0.0)],
            1.0,
            2,
            Helicity::Up,
            PhysicalConstants::new(1.0).unwrap(),
        )
        .unwrap();
        assert!(EvolvedState::at_hole(two, 0.1, 1.0).is_err());
    }

    #[test]
    fn contraction_at_unit_tangent() {
        // tan(w t) = 1: density at r equals 2 * rho0(sqrt(2) r).
        let w = 0.2;
        let state = EvolvedState::at_hole(vortex(), w, 0.25 * PI / w).unwrap();
        let cfg = vortex();
        for r in [0.1, 0.5, 0.7, 1.3] {
            let z = Complex64::from_polar(r, 0.7);
            let got = state.amplitude_at(z).norm_sqr();
            let expect = 2.0 * cfg.density_at(Complex64::new(r * 2.0_f64.sqrt(), 0.0));
            assert!((got / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_map_orientation() {
        // R = (x - tan y, y + tan x).
        let w = 1.0;
        let t = 0.3;
        let state = EvolvedState::at_hole(vortex(), w, t).unwrap();
        let (x, y, tan) = (0.4, -0.9, t.tan());
        let mapped = Complex64::new(x - tan * y, y + tan * x);
        let expect = Complex64::from_polar(1.0 / t.cos(), -0.5 * (x * x + y * y) * tan) * vortex().wavefunction_at(mapped);
        assert!((state.amplitude_at(Complex64::new(x, y)) - expect).norm() < 1e-14);
    }

    #[test]
    fn quadrupole_of_zero_and_window() {
        let spec = GridSpec::square(6.0, 96).unwrap();
        assert_eq!(quadrupole_moment(&ScalarField::zeros(spec), Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let rho = charge_density(&vortex(), &spec).unwrap();
        let full = quadrupole_moment(&rho, Complex64::new(0.0, 0.0)).unwrap();
        let win = windowed_quadrupole(&rho, Complex64::new(0.0, 0.0), 3.0).unwrap();
        assert!(win < full && win > 0.0);
        // Tail beyond r = 6 for n = 2: 16 pi / 36.
        assert!((quadrupole_tail(&vortex(), 6.0) - 16.0 * PI / 36.0).abs() < 1e-12);
    }

    #[test]
    fn energy_polynomial() {
        let c = PhysicalConstants::new(1.0).unwrap();
        assert_eq!(excitation_energy(39.0, 0.0, &c), 0.0);
        let q = 4.0 * PI * PI;
        assert!((excitation_energy(q, 0.1, &c) - 0.397392088).abs() < 1e-8);
        let even = excitation_energy(q, 0.1, &c) - excitation_energy(q, -0.1, &c);
        assert!((even - 4.0 * 0.1).abs() < 1e-15);
        assert!(excitation_energy(2.0, 0.3, &c) > excitation_energy(1.0, 0.3, &c));
    }
}
