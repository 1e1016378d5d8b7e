use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WellStructure;

pub const MIN_POINTS: usize = 16;
pub const DEFAULT_WINDOW: (f64, f64) = (0.0, 1.0);
pub const DEFAULT_POINTS: usize = 64;
/// Minimum distance of every well minimum from the window edge, in grid spacings.
pub const WELL_MARGIN_SPACINGS: f64 = 5.0;

/// Periodic Fourier grid `x_i = a + iΔx`, `i = 0..N`, `Δx = (b − a)/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FghGrid {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Default for FghGrid {
    fn default() -> Self {
        FghGrid { lower: DEFAULT_WINDOW.0, upper: DEFAULT_WINDOW.1, points: DEFAULT_POINTS }
    }
}

pub fn build_grid(window: (f64, f64), points: usize) -> Result<FghGrid> {
    let (lower, upper) = window;
    if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
        return Err(Error::Grid(format!("empty window [{lower}, {upper}]")));
    }
    if points < MIN_POINTS {
        return Err(Error::Grid(format!("{points} points is below the minimum of {MIN_POINTS}")));
    }
    Ok(FghGrid { lower, upper, points })
}

impl FghGrid {
    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / self.points as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|i| self.lower + dx * i as f64).collect()
    }

    /// Errors when a well minimum is within five spacings of the window edge.
    pub fn check_wells(&self, wells: &WellStructure) -> Result<()> {
        let margin = WELL_MARGIN_SPACINGS * self.spacing();
        for m in &wells.minima {
            for &c in &m.location {
                if c < self.lower + margin || c > self.upper - margin {
                    return Err(Error::Grid(format!(
                        "well {} at {c:.5} lies within {margin:.5} of the window [{}, {}]",
                        m.label.name(),
                        self.lower,
                        self.upper
                    )));
                }
            }
        }
        Ok(())
    }
}
