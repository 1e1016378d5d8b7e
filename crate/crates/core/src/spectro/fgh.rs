//! One-dimensional Fourier-grid Hamiltonian.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::grid::FghGrid;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{potential_1d, ModelScales};

/// Exact spectral `−∂²/∂x²` for periodic functions sampled on an even grid,
/// scaled by `1/(2ρ)`.
pub fn kinetic_matrix(grid: &FghGrid, rho: f64) -> Mat<f64> {
    let n = grid.points;
    let nf = n as f64;
    let dx = grid.spacing();
    let diag = PI * PI / (3.0 * dx * dx) * (1.0 + 2.0 / (nf * nf));
    let off = 2.0 * PI * PI / (nf * nf * dx * dx);
    let scale = 1.0 / (2.0 * rho);
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            scale * diag
        } else {
            let d = i as isize - j as isize;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let s = (PI * d as f64 / nf).sin();
            scale * sign * off / (s * s)
        }
    })
}

pub fn fgh_hamiltonian_1d(s: &ModelScales, x_e: f64, grid: &FghGrid) -> Mat<f64> {
    let mut h = kinetic_matrix(grid, s.rho);
    for (i, x) in grid.coordinates().into_iter().enumerate() {
        h[(i, i)] += potential_1d(x, x_e, s);
    }
    h
}

/// Lowest eigenpairs of a single SQUID.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum1D {
    pub grid: FghGrid,
    pub x_e: f64,
    /// Ascending, ħω_LC.
    pub energies: Vec<f64>,
    /// Grid values ψ_n(x_i), normalised so that Σ_i |ψ_n(x_i)|² Δx = 1; column n.
    #[serde(skip, default = "empty_mat")]
    pub wavefunctions: Mat<f64>,
    /// ⟨m|x|n⟩.
    #[serde(skip, default = "empty_mat")]
    pub position: Mat<f64>,
    /// Largest |ψ_n|·√Δx at the first or last grid point over the kept states.
    pub boundary_amplitude: f64,
}

fn empty_mat() -> Mat<f64> {
    Mat::zeros(0, 0)
}

pub fn solve_1d(s: &ModelScales, x_e: f64, grid: &FghGrid, states: usize) -> Result<Spectrum1D> {
    let n = grid.points;
    if states == 0 || states > n {
        return Err(Error::Grid(format!("requested {states} states on a {n}-point grid")));
    }
    let h = fgh_hamiltonian_1d(s, x_e, grid);
    let (values, mut vectors) = linalg::symmetric_eigen(h.as_ref())?;
    linalg::fix_column_signs(&mut vectors);
    let dx = grid.spacing();
    let xs = grid.coordinates();
    let position = linalg::weighted_gram(vectors.as_ref(), &xs, states);
    let boundary_amplitude = (0..states)
        .map(|k| vectors[(0, k)].abs().max(vectors[(n - 1, k)].abs()))
        .fold(0.0, f64::max);
    let norm = 1.0 / dx.sqrt();
    let wavefunctions = Mat::from_fn(n, states, |i, k| vectors[(i, k)] * norm);
    Ok(Spectrum1D {
        grid: *grid,
        x_e,
        energies: values[..states].to_vec(),
        wavefunctions,
        position,
        boundary_amplitude,
    })
}

impl Spectrum1D {
    pub fn states(&self) -> usize {
        self.energies.len()
    }

    /// ⟨m|P|n⟩ for the projector onto x < `split`.
    pub fn left_projector(&self, split: f64) -> Mat<f64> {
        let dx = self.grid.spacing();
        let w: Vec<f64> = self.grid.coordinates().iter().map(|&x| if x < split { dx } else { 0.0 }).collect();
        linalg::weighted_gram(self.wavefunctions.as_ref(), &w, self.states())
    }
}
