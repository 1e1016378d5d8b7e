use serde::{Deserialize, Serialize};

use super::coupled::{solve_spectrum, SpectroOptions};
use crate::model::{ModelScales, WorkingParams};

/// Computational-state pairs of the reported spacings, 1-based as in |1⟩..|4⟩.
pub const SPACING_PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// One row of a level-spacing map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub wp: WorkingParams,
    /// K lowest energies; empty when the solve failed.
    pub energies: Vec<f64>,
    /// ΔẼ for [`SPACING_PAIRS`]; `None` without a computational basis.
    pub spacings: Option<[f64; 6]>,
    pub flag: Option<String>,
}

pub fn level_row(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions) -> LevelRow {
    match solve_spectrum(s, wp, opts) {
        Ok(table) => {
            let (spacings, flag) = match table.comp_spacings() {
                Ok(sp) => (Some(sp), None),
                Err(e) => (None, Some(e.to_string())),
            };
            LevelRow { wp: *wp, energies: table.energies, spacings, flag }
        }
        Err(e) => LevelRow { wp: *wp, energies: Vec::new(), spacings: None, flag: Some(e.to_string()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_scales, DeviceParams};
    use crate::spectro::solve_1d;

    #[test]
    fn uncoupled_row_is_separable() {
        let s = derive_scales(&DeviceParams::new(100e-12, 40e-15, 1.2).unwrap()).unwrap();
        let wp = WorkingParams::new(0.499, 0.49985, 0.0).unwrap();
        let opts = SpectroOptions::default();
        let row = level_row(&s, &wp, &opts);
        assert!(row.flag.is_none(), "{:?}", row.flag);
        let a = solve_1d(&s, wp.x_e1, &opts.grid, 10).unwrap();
        let b = solve_1d(&s, wp.x_e2, &opts.grid, 10).unwrap();
        let mut sums: Vec<f64> = a.energies.iter().flat_map(|x| b.energies.iter().map(move |y| x + y)).collect();
        sums.sort_by(f64::total_cmp);
        for (e, r) in row.energies.iter().zip(&sums).take(10) {
            assert!((e - r).abs() < 1e-9);
        }
        let sp = row.spacings.unwrap();
        assert!(sp.iter().all(|d| *d >= 0.0));
    }
}
