//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the code paths it is used to check: radial
//! profiles are written out in closed form, quadratures are 1-D Simpson rules
//! in a compactified radius, and the pixel/recall oracles are direct loops.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

/// Single-hole density from the radial reduction
/// `rho(r) = 4 n^2 C r0^2n r^(2n-2) / (r^2n + r0^2n)^2`.
pub fn radial_density(r: f64, n: u32, r0: f64, c: f64) -> f64 {
    let n = n as f64;
    let a = r0.powf(2.0 * n);
    let b = r.powf(2.0 * n);
    4.0 * n * n * c * a * r.powf(2.0 * n - 2.0) / ((b + a) * (b + a))
}

/// `integral_0^inf g(r) dr` by composite Simpson in `s = r / (scale + r)`.
pub fn half_line_simpson(g: impl Fn(f64) -> f64, scale: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = 1.0 / intervals as f64;
    let mapped = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let r = scale * s / (1.0 - s);
        let jac = scale / ((1.0 - s) * (1.0 - s));
        g(r) * jac
    };
    let mut total = mapped(0.0) + mapped(1.0);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        total += w * mapped(k as f64 * h);
    }
    total * h / 3.0
}

/// `integral rho d^2r` for a single hole, via radial quadrature.
pub fn polar_charge(n: u32, r0: f64, c: f64) -> f64 {
    half_line_simpson(|r| 2.0 * PI * r * radial_density(r, n, r0, c), r0, 200_000)
}

/// `integral r^2 rho d^2r` for a single hole, via radial quadrature.
pub fn polar_quadrupole(n: u32, r0: f64, c: f64) -> f64 {
    half_line_simpson(|r| 2.0 * PI * r * r * r * radial_density(r, n, r0, c), r0, 200_000)
}

/// 2-D polar quadrature of an arbitrary pointwise density about `center`:
/// Simpson in compactified radius, trapezoid (spectral for periodic data) in
/// angle.
pub fn polar_integral(f: impl Fn(Complex64) -> f64, center: Complex64, scale: f64, radial: usize, angular: usize) -> f64 {
    half_line_simpson(
        |r| {
            let mut ring = 0.0;
            for k in 0..angular {
                let th = 2.0 * PI * (k as f64 + 0.5) / angular as f64;
                ring += f(center + Complex64::from_polar(r, th));
            }
            r * ring * 2.0 * PI / angular as f64
        },
        scale,
        radial,
    )
}

/// Bilinear sample straight from a row-major, top-row-first pixel array at
/// continuous pixel coordinates, clamped.
pub fn pixel_bilinear(pixels: &[f64], width: usize, height: usize, col: f64, row: f64) -> f64 {
    let cx = col.max(0.0).min((width - 1) as f64);
    let cy = row.max(0.0).min((height - 1) as f64);
    let x0 = cx.floor() as usize;
    let y0 = cy.floor() as usize;
    let x1 = if x0 + 1 < width { x0 + 1 } else { x0 };
    let y1 = if y0 + 1 < height { y0 + 1 } else { y0 };
    let fx = cx - x0 as f64;
    let fy = cy - y0 as f64;
    let p = |x: usize, y: usize| pixels[y * width + x];
    p(x0, y0) * (1.0 - fx) * (1.0 - fy) + p(x1, y0) * fx * (1.0 - fy) + p(x0, y1) * (1.0 - fx) * fy + p(x1, y1) * fx * fy
}

/// Mean effective field `-(gain * I) / kappa` over grid cells in a disc,
/// computed by looping over cell indices and sampling pixels directly.
#[allow(clippy::too_many_arguments)]
pub fn brute_window_field(
    pixels: &[f64],
    width: usize,
    height: usize,
    half_extent: f64,
    cells: usize,
    gain: f64,
    kappa: f64,
    center: Complex64,
    radius: f64,
) -> f64 {
    let h = 2.0 * half_extent / cells as f64;
    let mut sum = 0.0;
    let mut count = 0;
    for j in 0..cells {
        for i in 0..cells {
            let x = -half_extent + (i as f64 + 0.5) * h;
            let y = -half_extent + (j as f64 + 0.5) * h;
            let dx = x - center.re;
            let dy = y - center.im;
            if dx * dx + dy * dy <= radius * radius {
                let col = (x + half_extent) / (2.0 * half_extent) * width as f64 - 0.5;
                let row = (half_extent - y) / (2.0 * half_extent) * height as f64 - 0.5;
                sum += -(gain * pixel_bilinear(pixels, width, height, col, row)) / kappa;
                count += 1;
            }
        }
    }
    sum / count as f64
}

pub fn random_pattern<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn naive_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Modified Gram-Schmidt.
pub fn orthonormalize(mut vs: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    for k in 0..vs.len() {
        for j in 0..k {
            let proj = naive_dot(&vs[j], &vs[k]);
            let basis = vs[j].clone();
            for (x, b) in vs[k].iter_mut().zip(&basis) {
                *x -= proj * b;
            }
        }
        let n = naive_dot(&vs[k], &vs[k]).re.sqrt();
        for x in vs[k].iter_mut() {
            *x /= n;
        }
    }
    vs
}

/// Index of the largest `|<p_k, input>|`, lowest index among magnitudes within
/// `eps` of the maximum.
pub fn brute_argmax(patterns: &[Vec<Complex64>], input: &[Complex64], eps: f64) -> usize {
    let mags: Vec<f64> = patterns.iter().map(|p| naive_dot(p, input).norm()).collect();
    let mut best = f64::NEG_INFINITY;
    for &m in &mags {
        if m > best {
            best = m;
        }
    }
    for (k, &m) in mags.iter().enumerate() {
        if m >= best - eps {
            return k;
        }
    }
    unreachable!()
}
