use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::propagate::{basis_state, evolve, free_evolve, DmOptions};
use crate::error::Result;
use crate::ita::DrivePulse;
use crate::spectro::{CompState, SpectroTable};

/// Average CNOT gate fidelity over the computational subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Maximised over single-qubit diagonal phase frames.
    pub fidelity: f64,
    /// Plain interaction-picture value.
    pub raw_fidelity: f64,
    /// M[b'][b]: amplitude on |b'⟩ after starting in |b⟩, interaction picture.
    pub matrix: [[Complex64; 4]; 4],
    /// 1 − Σ_b' |M[b'][b]|² for each initial |b⟩.
    pub leakage_out: [f64; 4],
    /// τ_π used.
    pub duration: f64,
}

/// CNOT with qubit 1 as control: swaps |10⟩ and |11⟩.
const CNOT_PERM: [usize; 4] = [0, 1, 3, 2];

/// Returns (phase-optimised F, raw F) for F = (Tr M†M + |Tr U†M|²)/20.
///
/// Left diagonal phases leave Tr M†M unchanged and rotate each of the four
/// terms M[U(b)][b] in Tr U†M independently, so the optimum aligns them and
/// the maximum is attained in closed form.
pub fn fidelity_from_matrix(m: &[[Complex64; 4]; 4]) -> (f64, f64) {
    let gram: f64 = m.iter().flatten().map(|c| c.norm_sqr()).sum();
    let overlap: Complex64 = (0..4).map(|b| m[CNOT_PERM[b]][b]).sum();
    let aligned: f64 = (0..4).map(|b| m[CNOT_PERM[b]][b].norm()).sum();
    ((gram + aligned * aligned) / 20.0, (gram + overlap.norm_sqr()) / 20.0)
}

pub fn cnot_fidelity(table: &SpectroTable, pulse: &DrivePulse, opts: &DmOptions) -> Result<FidelityReport> {
    cnot_fidelity_at(table, pulse, pulse.duration, opts)
}

/// Fidelity read out at `t_end` ≥ the pulse end; the drive is off after it.
pub fn cnot_fidelity_at(table: &SpectroTable, pulse: &DrivePulse, t_end: f64, opts: &DmOptions) -> Result<FidelityReport> {
    let map = table.computational_map()?;
    let mut matrix = [[Complex64::new(0.0, 0.0); 4]; 4];
    for b in CompState::ALL {
        let run = evolve(table, pulse, &basis_state(table.states(), map[b.index()]), opts)?;
        let mut amps = run.final_amplitudes;
        free_evolve(table, &mut amps, (t_end - pulse.duration).max(0.0));
        for bp in CompState::ALL {
            let n = map[bp.index()];
            matrix[bp.index()][b.index()] = amps[n] * Complex64::from_polar(1.0, table.energies[n] * t_end);
        }
    }
    let (fidelity, raw_fidelity) = fidelity_from_matrix(&matrix);
    let mut leakage_out = [0.0; 4];
    for (b, out) in leakage_out.iter_mut().enumerate() {
        *out = 1.0 - (0..4).map(|bp| matrix[bp][b].norm_sqr()).sum::<f64>();
    }
    Ok(FidelityReport { fidelity, raw_fidelity, matrix, leakage_out, duration: pulse.duration })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_and_identity() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let cnot = [[one, z, z, z], [z, one, z, z], [z, z, z, one], [z, z, one, z]];
        let (f, raw) = fidelity_from_matrix(&cnot);
        assert!((f - 1.0).abs() < 1e-15 && (raw - 1.0).abs() < 1e-15);
        let id = [[one, z, z, z], [z, one, z, z], [z, z, one, z], [z, z, z, one]];
        let (f, raw) = fidelity_from_matrix(&id);
        assert!((f - 0.4).abs() < 1e-15 && (raw - 0.4).abs() < 1e-15);
    }

    #[test]
    fn phase_frame_is_optimised() {
        let z = c(0.0, 0.0);
        let i = c(0.0, 1.0);
        let m = [[c(1.0, 0.0), z, z, z], [z, c(0.6, 0.8), z, z], [z, z, z, -i], [z, z, -i, z]];
        let (f, raw) = fidelity_from_matrix(&m);
        assert!((f - 1.0).abs() < 1e-14);
        assert!(raw < f);
    }

    #[test]
    fn optimum_beats_phase_grid() {
        // brute-force search over diag(1, e^{iφ1}, e^{iφ2}, e^{iφ3})
        let m = [
            [c(0.9, 0.1), c(0.05, 0.0), c(0.0, 0.02), c(0.01, 0.0)],
            [c(0.02, 0.0), c(0.3, -0.9), c(0.0, 0.0), c(0.03, 0.01)],
            [c(0.0, 0.01), c(0.0, 0.0), c(0.1, 0.0), c(-0.2, 0.95)],
            [c(0.0, 0.0), c(0.01, 0.0), c(0.7, 0.6), c(0.05, 0.0)],
        ];
        let (best, _) = fidelity_from_matrix(&m);
        let steps = 24;
        let mut grid_best = 0.0f64;
        for a in 0..steps {
            for b in 0..steps {
                for d in 0..steps {
                    let ph = [0, a, b, d].map(|k| std::f64::consts::TAU * k as f64 / steps as f64);
                    let mut rotated = m;
                    for (row, p) in rotated.iter_mut().zip(ph) {
                        for v in row.iter_mut() {
                            *v *= Complex64::from_polar(1.0, p);
                        }
                    }
                    grid_best = grid_best.max(fidelity_from_matrix(&rotated).1);
                }
            }
        }
        assert!(best >= grid_best - 1e-12);
        assert!(best - grid_best < 1e-2);
    }
}
