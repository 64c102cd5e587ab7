//! Shared oracles for the integration suites. Everything here is written
//! against the definitions directly (quadratic-time sums, closed forms,
//! quadrature) and never calls the code path it is used to check.
#![allow(dead_code)] // each test binary uses its own subset

use num_complex::Complex64;

use nls_lab::field::{Field, Space};
use nls_lab::grid::Grid;

/// Direct quadratic-time discrete Fourier transform with the unitary
/// normalization û(k) = (2π)^{-d/2} hᵈ Σⱼ e^{-ik·xⱼ} u(xⱼ), evaluated at
/// the FFT-natural mode layout so outputs align index-by-index.
pub fn dft_oracle(u: &Field) -> Vec<Complex64> {
    let grid = u.grid();
    let n = grid.len();
    let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dim() as f64) / 2.0)
        * grid.cell_volume();
    let k_axis = grid.wavenumbers_natural();
    let mut out = vec![Complex64::ZERO; n];
    for (mode_flat, slot) in out.iter_mut().enumerate() {
        let midx = grid.unravel(mode_flat);
        let mut acc = Complex64::ZERO;
        for (node_flat, value) in u.values().iter().enumerate() {
            let x = grid.node_coordinates(node_flat);
            let mut phase = 0.0;
            for (a, xa) in x.iter().enumerate() {
                phase -= k_axis[midx[a]] * xa;
            }
            acc += Complex64::from_polar(1.0, phase) * value;
        }
        *slot = acc * scale;
    }
    out
}

/// Direct inverse transform u(x) = (2π)^{-d/2} Δkᵈ Σₘ e^{ik·x} ûₘ.
pub fn idft_oracle(hat: &Field) -> Vec<Complex64> {
    let grid = hat.grid();
    let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dim() as f64) / 2.0)
        * grid.spectral_cell_volume();
    let k_axis = grid.wavenumbers_natural();
    let mut out = vec![Complex64::ZERO; grid.len()];
    for (node_flat, slot) in out.iter_mut().enumerate() {
        let x = grid.node_coordinates(node_flat);
        let mut acc = Complex64::ZERO;
        for (mode_flat, value) in hat.values().iter().enumerate() {
            let midx = grid.unravel(mode_flat);
            let mut phase = 0.0;
            for (a, xa) in x.iter().enumerate() {
                phase += k_axis[midx[a]] * xa;
            }
            acc += Complex64::from_polar(1.0, phase) * value;
        }
        *slot = acc * scale;
    }
    out
}

/// Closed-form free evolution of e^{-a|x|²}:
/// (1+4iat)^{-d/2} e^{-a|x|²/(1+4iat)}.
pub fn dispersed_gaussian(grid: &Grid, a: f64, t: f64) -> Field {
    let d = grid.dim() as f64;
    let denom = Complex64::new(1.0, 4.0 * a * t);
    nls_lab::field::sample(grid, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        denom.powf(-d / 2.0) * (-a * r2 / denom).exp()
    })
    .expect("closed form is finite")
}

/// d = 1 kernel propagation (4πit)^{-1/2} ∫ e^{i(x-y)²/4t} u(y) dy by fine
/// trapezoid quadrature of the analytic integrand — an oracle for the
/// closed form itself, independent of any FFT machinery.
pub fn kernel_quadrature_1d(a: f64, t: f64, x: f64, half_width: f64, nodes: usize) -> Complex64 {
    let h = 2.0 * half_width / nodes as f64;
    let mut acc = Complex64::ZERO;
    for j in 0..=nodes {
        let y = -half_width + j as f64 * h;
        let w = if j == 0 || j == nodes { 0.5 } else { 1.0 };
        let phase = (x - y) * (x - y) / (4.0 * t);
        acc += w * Complex64::from_polar((-a * y * y).exp(), phase);
    }
    acc *= h;
    // (4πit)^{-1/2} on the principal branch.
    let prefactor = Complex64::new(0.0, 4.0 * std::f64::consts::PI * t).powf(-0.5);
    prefactor * acc
}

pub fn rel_l2_distance(a: &Field, b: &Field) -> f64 {
    let diff = a.sub(b).expect("same grid");
    nls_lab::functionals::lp_norm(&diff, 2.0).unwrap()
        / nls_lab::functionals::lp_norm(b, 2.0).unwrap().max(f64::MIN_POSITIVE)
}

/// Deterministic pseudo-random complex field from a seed.
pub fn seeded_field(grid: &Grid, seed: u64) -> Field {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::new(*grid, Space::Physical, values).unwrap()
}
