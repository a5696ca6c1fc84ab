//! Randomized invariants.

mod common;

use chiral_sensor::dynamics::excitation_energy;
use chiral_sensor::grid::{inner, integrate, phase_winding, ComplexField, GridSpec, PhysicalConstants, ScalarField};
use chiral_sensor::memory::{green_apply, recall, PatternMemory};
use chiral_sensor::sensor::{
    effective_field, extract_features, to_polarization, HoleLattice, ImageRaster, PolarizationMode,
};
use chiral_sensor::soliton::{charge_density, wavefunction, Helicity, VortexConfiguration};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec() -> GridSpec {
    GridSpec::new(3.0, 2.0, 20, 16).unwrap()
}

fn field_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

fn memory_from_seed(seed: u64, count: usize, dim: usize, orthonormal: bool) -> (PatternMemory, Vec<Vec<Complex64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw: Vec<_> = (0..count).map(|_| common::random_pattern(&mut rng, dim)).collect();
    if orthonormal {
        raw = common::orthonormalize(raw);
    }
    let mut mem = PatternMemory::new();
    for (k, p) in raw.iter().enumerate() {
        mem = mem.store(p, &format!("p{k}")).unwrap();
    }
    (mem, raw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integrate_is_linear(a in field_values(320), b in field_values(320), s in -5.0..5.0f64) {
        let fa = ScalarField::new(spec(), a.clone()).unwrap();
        let fb = ScalarField::new(spec(), b.clone()).unwrap();
        let combo = ScalarField::new(spec(), a.iter().zip(&b).map(|(x, y)| s * x + y).collect()).unwrap();
        let lhs = integrate(&combo, None).unwrap();
        let rhs = s * integrate(&fa, None).unwrap() + integrate(&fb, None).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn inner_is_conjugate_symmetric(re in field_values(640), im in field_values(640)) {
        let a = ComplexField::new(spec(), (0..320).map(|k| Complex64::new(re[k], im[k])).collect()).unwrap();
        let b = ComplexField::new(spec(), (0..320).map(|k| Complex64::new(re[k + 320], im[k + 320])).collect()).unwrap();
        let ab = inner(&a, &b).unwrap();
        let ba = inner(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-9 * (1.0 + ab.norm()));
        prop_assert!(inner(&a, &a).unwrap().im.abs() <= 1e-9 * inner(&a, &a).unwrap().re);
    }

    #[test]
    fn winding_independent_of_radius(radius in 0.3..2.5f64, n in 2u32..5, down in any::<bool>()) {
        let helicity = if down { Helicity::Down } else { Helicity::Up };
        let cfg = VortexConfiguration::single(Complex64::new(0.0, 0.0), 1.0, n, helicity, PhysicalConstants::new(1.0).unwrap()).unwrap();
        let spec = GridSpec::square(4.0, 128).unwrap();
        let psi = wavefunction(&cfg, &spec).unwrap();
        let w = phase_winding(&psi, Complex64::new(0.0, 0.0), radius).unwrap();
        prop_assert_eq!(w, -helicity.sign() as i64 * (n as i64 + 1));
    }

    #[test]
    fn helicity_leaves_density_unchanged(x in -3.0..3.0f64, y in -3.0..3.0f64, kappa in prop::sample::select(vec![-2.0, -0.5, 0.7, 3.0])) {
        let k = PhysicalConstants::new(kappa).unwrap();
        let up = VortexConfiguration::new(vec![Complex64::new(-1.0, 0.2), Complex64::new(1.3, -0.4)], 0.9, 3, Helicity::Up, k).unwrap();
        let down = up.with_helicity(Helicity::Down);
        let z = Complex64::new(x, y);
        prop_assert_eq!(up.density_at(z), down.density_at(z));
        prop_assert!((up.wavefunction_at(z).conj() - down.wavefunction_at(z)).norm() == 0.0);
    }

    #[test]
    fn recall_ignores_global_scale_and_phase(seed in any::<u64>(), scale in 0.01..100.0f64, phase in 0.0..std::f64::consts::TAU) {
        let (mem, _) = memory_from_seed(seed, 5, 12, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let x = common::random_pattern(&mut rng, 12);
        let factor = Complex64::from_polar(scale, phase);
        let y: Vec<Complex64> = x.iter().map(|v| v * factor).collect();
        let rx = recall(&mem, &x).unwrap();
        let ry = recall(&mem, &y).unwrap();
        prop_assert_eq!(rx.index, ry.index);
        prop_assert!((rx.overlap * scale - ry.overlap).abs() <= 1e-9 * ry.overlap);
    }

    #[test]
    fn green_apply_is_idempotent(seed in any::<u64>(), count in 1usize..6) {
        let (mem, _) = memory_from_seed(seed, count, 10, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let x = common::random_pattern(&mut rng, 10);
        let once = green_apply(&mem, &x).unwrap();
        let twice = green_apply(&mem, &once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn memory_json_round_trip_is_exact(seed in any::<u64>(), count in 1usize..5) {
        let (mem, _) = memory_from_seed(seed, count, 7, false);
        let back = PatternMemory::from_json(&mem.to_json(), std::path::Path::new("mem.json")).unwrap();
        prop_assert_eq!(back, mem);
    }

    #[test]
    fn effective_field_is_linear_in_gain(gain in 0.01..5.0f64, factor in 0.1..10.0f64, kappa in prop::sample::select(vec![-3.0, -1.0, 0.5, 2.0]), px in prop::collection::vec(0.0..=1.0f64, 16)) {
        let img = ImageRaster::new(4, 4, px).unwrap();
        let k = PhysicalConstants::new(kappa).unwrap();
        let a = effective_field(&to_polarization(&img, &spec(), gain, PolarizationMode::Unipolar).unwrap(), &k).unwrap();
        let b = effective_field(&to_polarization(&img, &spec(), gain * factor, PolarizationMode::Unipolar).unwrap(), &k).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x * factor - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn energy_monotone_in_quadrupole(q1 in 0.0..100.0f64, dq in 1e-3..50.0f64, omega in prop::num::f64::NORMAL.prop_filter("moderate", |w| w.abs() > 1e-3 && w.abs() < 10.0)) {
        let k = PhysicalConstants::new(1.0).unwrap();
        prop_assert!(excitation_energy(q1 + dq, omega, &k) > excitation_energy(q1, omega, &k));
    }

    #[test]
    fn density_nonnegative_and_vanishes_at_holes(x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let cfg = VortexConfiguration::new(vec![Complex64::new(x, y), Complex64::new(x + 1.5, y)], 0.5, 2, Helicity::Up, PhysicalConstants::new(1.0).unwrap()).unwrap();
        prop_assert_eq!(cfg.density_at(Complex64::new(x, y)), 0.0);
        let rho = charge_density(&cfg, &GridSpec::square(3.0, 32).unwrap()).unwrap();
        prop_assert!(rho.values().iter().all(|&v| v >= 0.0));
    }
}

fn lattice_and_config() -> (HoleLattice, VortexConfiguration) {
    let lattice = HoleLattice::rectangular(1, 2, 6.0, 0.8, 2.5).unwrap();
    let cfg = lattice.configuration(2, Helicity::Up, PhysicalConstants::new(1.0).unwrap()).unwrap();
    (lattice, cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pipeline_is_deterministic(px in prop::collection::vec(0.0..=1.0f64, 64)) {
        let (lattice, cfg) = lattice_and_config();
        let spec = GridSpec::new(8.0, 4.0, 64, 32).unwrap();
        let img = ImageRaster::new(8, 8, px).unwrap();
        let pol = to_polarization(&img, &spec, 0.4, PolarizationMode::Bipolar).unwrap();
        let a = extract_features(&pol, &lattice, &cfg, 0.25).unwrap();
        let b = extract_features(&pol, &lattice, &cfg, 0.25).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn features_depend_only_on_own_window(px in prop::collection::vec(0.0..=1.0f64, 256), bump in 0.0..=1.0f64) {
        // Holes at x = -3 and x = 3 with radius-2.5 windows; pixels in the
        // rightmost columns are only ever sampled by the second window.
        let (lattice, cfg) = lattice_and_config();
        let spec = GridSpec::new(8.0, 4.0, 64, 32).unwrap();
        let mut changed = px.clone();
        for row in 0..16 {
            changed[row * 16 + 15] = bump;
        }
        let run = |pixels: Vec<f64>| {
            let img = ImageRaster::new(16, 16, pixels).unwrap();
            let pol = to_polarization(&img, &spec, 0.4, PolarizationMode::Unipolar).unwrap();
            extract_features(&pol, &lattice, &cfg, 0.25).unwrap()
        };
        let a = run(px);
        let b = run(changed);
        prop_assert_eq!(&a.holes[0], &b.holes[0]);
    }
}
