//! Leakage-minimising working points for a CNOT gate on two inductively
//! coupled rf-SQUID flux qubits.
//!
//! The pipeline is: device parameters → dimensionless model → coupled
//! spectroscopy on a Fourier grid → leakage from either the independent
//! transition approximation ([`ita`]) or direct time integration
//! ([`dynamics`]) → sweeps and local refinement over working parameters
//! ([`sweep`]).

pub mod bessel;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod ita;
pub mod linalg;
pub mod model;
pub mod spectro;
pub mod sweep;

pub use error::{Error, Result};
