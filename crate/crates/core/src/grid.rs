//! Periodic grid geometry for the box [-L/2, L/2)ᵈ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic discretization of [-L/2, L/2)ᵈ with N points per axis.
///
/// Nodes along each axis sit at xⱼ = -L/2 + j·L/N for j = 0..N-1; the dual
/// wavenumbers are kₘ = 2πm/L for m = -N/2..N/2-1. The grid is square in
/// every axis (same N, same L) and N is a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl Grid {
    /// Builds a grid, rejecting dim outside {1,2,3}, N not a power of two
    /// (odd N included) or below 4, and non-positive or non-finite L.
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dim must be 1, 2 or 3, got {dim}"
            )));
        }
        if points_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be even, got {points_per_axis}"
            )));
        }
        if points_per_axis < 4 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be a power of two >= 4, got {points_per_axis}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Grid {
            dim,
            points_per_axis,
            box_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Total number of nodes Nᵈ.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing h = L/N.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    /// Quadrature weight per node, hᵈ = (L/N)ᵈ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Wavenumber spacing Δk = 2π/L.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Quadrature weight per spectral node, (2π/L)ᵈ.
    pub fn spectral_cell_volume(&self) -> f64 {
        self.mode_spacing().powi(self.dim as i32)
    }

    /// Per-axis wavenumbers in mathematical order: 2πm/L for m = -N/2..N/2-1.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points_per_axis as isize;
        let dk = self.mode_spacing();
        (-n / 2..n / 2).map(|m| m as f64 * dk).collect()
    }

    /// Per-axis wavenumbers in FFT-natural order (0..N/2-1, -N/2..-1),
    /// matching the layout of spectral [`Field`](crate::field::Field) values.
    pub fn wavenumbers_natural(&self) -> Vec<f64> {
        let n = self.points_per_axis as isize;
        let dk = self.mode_spacing();
        (0..n)
            .map(|i| {
                let m = if i < n / 2 { i } else { i - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Per-axis node coordinates xⱼ = -L/2 + j·h.
    pub fn axis_coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        let half = self.box_length / 2.0;
        (0..self.points_per_axis)
            .map(|j| -half + j as f64 * h)
            .collect()
    }

    /// Decodes a flat row-major index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Coordinates of the node at a flat row-major index.
    pub fn node_coordinates(&self, flat: usize) -> Vec<f64> {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let half = self.box_length / 2.0;
        (0..self.dim).map(|a| -half + idx[a] as f64 * h).collect()
    }

    /// |k|² at each spectral node, FFT-natural row-major order.
    pub fn k_squared_natural(&self) -> Vec<f64> {
        let axis = self.wavenumbers_natural();
        let n = self.points_per_axis;
        let mut out = vec![0.0; self.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rest = flat;
            let mut k2 = 0.0;
            for _ in 0..self.dim {
                let i = rest % n;
                rest /= n;
                k2 += axis[i] * axis[i];
            }
            *slot = k2;
        }
        out
    }
}
