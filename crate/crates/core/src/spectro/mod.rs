//! Spectroscopy of one and two coupled SQUIDs on a Fourier grid.

mod coupled;
mod fgh;
mod grid;
mod levels;

pub use coupled::{
    solve_coupled, solve_spectrum, Backend, CompState, SpectroOptions, SpectroTable, DEFAULT_BASIS_STATES,
    DEFAULT_DOMINANCE_THRESHOLD, DEFAULT_STATES, MAX_BOUNDARY_AMPLITUDE,
};
pub use fgh::{fgh_hamiltonian_1d, kinetic_matrix, solve_1d, Spectrum1D};
pub use grid::{build_grid, FghGrid, DEFAULT_POINTS, DEFAULT_WINDOW, MIN_POINTS};
pub use levels::{level_row, LevelRow, SPACING_PAIRS};
