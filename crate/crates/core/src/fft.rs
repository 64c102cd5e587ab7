//! Unitary discrete Fourier transforms between physical and spectral space.
//!
//! The transform pair discretizes the continuum convention
//! û(k) = (2π)^{-d/2} ∫ e^{-ik·x} u(x) dx with node quadrature weight hᵈ in
//! physical space and (2π/L)ᵈ in spectral space, so discrete Plancherel
//! holds exactly: Σ|uⱼ|² hᵈ = Σ|ûₘ|² (2π/L)ᵈ. Spectral values are stored in
//! FFT-natural mode order.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

/// Unnormalized DFT along every axis of a row-major d-cube, in place.
fn dft_all_axes(values: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let fft = plan(n, inverse);
    // Last axis is contiguous: rustfft processes the buffer chunkwise.
    fft.process(values);
    let mut scratch = vec![Complex64::ZERO; n];
    for axis in (0..dim.saturating_sub(1)).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = n.pow(axis as u32);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * stride * n + inner;
                for (j, slot) in scratch.iter_mut().enumerate() {
                    *slot = values[base + j * stride];
                }
                fft.process(&mut scratch);
                for (j, v) in scratch.iter().enumerate() {
                    values[base + j * stride] = *v;
                }
            }
        }
    }
}

/// (-1)^{m₁+…+m_d} for the node with the given flat index: the phase
/// e^{±i k·(L/2)} that relocates the DFT origin to the box corner -L/2.
fn parity_sign(mut flat: usize, n: usize, dim: usize) -> f64 {
    let mut odd = 0usize;
    for _ in 0..dim {
        odd ^= flat & 1;
        flat /= n;
    }
    if odd == 1 {
        -1.0
    } else {
        1.0
    }
}

fn apply_parity(values: &mut [Complex64], grid: &Grid) {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    for (flat, v) in values.iter_mut().enumerate() {
        *v *= parity_sign(flat, n, dim);
    }
}

/// Forward transform of a physical field; errors on spectral input.
pub fn fft(field: &Field) -> Result<Field> {
    if field.space() != Space::Physical {
        return Err(Error::WrongSpace {
            expected: Space::Physical,
            got: field.space(),
        });
    }
    let grid = field.grid();
    let mut values = field.values().to_vec();
    dft_all_axes(
        &mut values,
        grid.dim(),
        grid.points_per_axis(),
        false,
    );
    apply_parity(&mut values, &grid);
    let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dim() as f64) / 2.0) * grid.cell_volume();
    for v in &mut values {
        *v *= scale;
    }
    Field::new(grid, Space::Spectral, values)
}

/// Inverse transform of a spectral field; errors on physical input.
pub fn ifft(field: &Field) -> Result<Field> {
    if field.space() != Space::Spectral {
        return Err(Error::WrongSpace {
            expected: Space::Spectral,
            got: field.space(),
        });
    }
    let grid = field.grid();
    let mut values = field.values().to_vec();
    apply_parity(&mut values, &grid);
    dft_all_axes(&mut values, grid.dim(), grid.points_per_axis(), true);
    let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dim() as f64) / 2.0)
        * grid.spectral_cell_volume();
    for v in &mut values {
        *v *= scale;
    }
    Field::new(grid, Space::Physical, values)
}
