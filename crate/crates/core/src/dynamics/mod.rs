//! Dynamic method: direct integration of the driven eigenbasis TDSE.

mod bench;
mod fidelity;
mod propagate;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use bench::{benchmark_speedup, BenchSample, BenchmarkReport};
pub use fidelity::{cnot_fidelity, cnot_fidelity_at, fidelity_from_matrix, FidelityReport};
pub use propagate::{basis_state, evolve, free_evolve, DmOptions, TdseResult};

use crate::bessel::bessel_rabi_factor;
use crate::error::{Error, Result};
use crate::ita::{undesired_states, ComponentLeakage, DrivePulse, GateLeakage};
use crate::model::{ModelScales, WorkingParams};
use crate::spectro::{solve_coupled, CompState, SpectroOptions, SpectroTable};

/// V/ħω_LC = x_m(τ)·O + ρ x_m(τ)²/2 · I in the eigenbasis.
pub fn interaction_matrix(table: &SpectroTable, pulse: &DrivePulse, tau: f64) -> Mat<f64> {
    let x = pulse.field(tau);
    let k = table.states();
    Mat::from_fn(k, k, |m, n| {
        let diag = if m == n { 0.5 * table.rho * x * x } else { 0.0 };
        x * table.coupling[(m, n)] + diag
    })
}

/// π time of the |10⟩ ↔ |11⟩ Rabi oscillation at drive amplitude `x_m0`.
///
/// The resonant Rabi rate includes the Bessel factor 2·J₁(y)/y from the
/// diagonal modulation; for small y this reduces to x_m0·|O_34|.
pub fn pi_pulse_duration(table: &SpectroTable, x_m0: f64) -> Result<f64> {
    if !(x_m0 > 0.0) {
        return Err(Error::invalid("x_m0", format!("must be positive, got {x_m0}")));
    }
    let i3 = table.index_of(CompState::S10)?;
    let i4 = table.index_of(CompState::S11)?;
    let o34 = table.coupling[(i3, i4)].abs();
    if o34 < 1e-12 {
        return Err(Error::NoCoupling(o34));
    }
    let w = table.cnot_frequency()?;
    let y = x_m0 * (table.coupling[(i4, i4)] - table.coupling[(i3, i3)]) / w;
    let rabi = (2.0 * x_m0 * o34 * bessel_rabi_factor(1, y)).abs();
    if !(rabi > 0.0) {
        return Err(Error::NoCoupling(o34));
    }
    Ok(PI / rabi)
}

/// CNOT drive at ω̃ = ΔẼ_34 lasting τ_π, capped at `max_duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotPulse {
    pub pulse: DrivePulse,
    /// Uncapped τ_π.
    pub pi_duration: f64,
    pub capped: bool,
}

pub fn cnot_pulse(table: &SpectroTable, x_m0: f64, opts: &DmOptions) -> Result<CnotPulse> {
    let w = table.cnot_frequency()?;
    let pi_duration = pi_pulse_duration(table, x_m0)?;
    let capped = pi_duration > opts.max_duration;
    let duration = pi_duration.min(opts.max_duration);
    Ok(CnotPulse { pulse: DrivePulse::new(x_m0, w, duration)?, pi_duration, capped })
}

/// η from the maximum populations reached on undesired states during the pulse.
pub fn dm_gate_leakage(table: &SpectroTable, pulse: &DrivePulse, opts: &DmOptions) -> Result<GateLeakage> {
    let components = CompState::ALL
        .iter()
        .map(|&c| {
            let start = basis_state(table.states(), table.index_of(c)?);
            let run = evolve(table, pulse, &start, opts)?;
            let breakdown = undesired_states(table, c)?
                .into_iter()
                .map(|k| (k, run.max_populations[k]))
                .collect();
            Ok(ComponentLeakage::from_breakdown(c, breakdown))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateLeakage::from_components(components))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmLeakage {
    pub leakage: GateLeakage,
    pub pulse: CnotPulse,
}

pub fn cnot_dm_leakage(table: &SpectroTable, x_m0: f64, opts: &DmOptions) -> Result<DmLeakage> {
    let pulse = cnot_pulse(table, x_m0, opts)?;
    Ok(DmLeakage { leakage: dm_gate_leakage(table, &pulse.pulse, opts)?, pulse })
}

/// Largest change of a computational-state population after a CNOT pulse
/// when `extra` more eigenstates are retained.
pub fn truncation_check(
    s: &ModelScales,
    wp: &WorkingParams,
    spectro: &SpectroOptions,
    x_m0: f64,
    extra: usize,
    opts: &DmOptions,
) -> Result<f64> {
    let finals = |states: usize| -> Result<Vec<[f64; 4]>> {
        let table = solve_coupled(s, wp, &SpectroOptions { states, ..*spectro })?;
        let map = table.computational_map()?;
        let pulse = cnot_pulse(&table, x_m0, opts)?;
        CompState::ALL
            .iter()
            .map(|&c| {
                let run = evolve(&table, &pulse.pulse, &basis_state(table.states(), map[c.index()]), opts)?;
                Ok(map.map(|i| run.final_amplitudes[i].norm_sqr()))
            })
            .collect()
    };
    let base = finals(spectro.states)?;
    let more = finals(spectro.states + extra)?;
    Ok(base
        .iter()
        .zip(&more)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}

/// |c|² of each amplitude.
pub fn populations(amplitudes: &[Complex64]) -> Vec<f64> {
    amplitudes.iter().map(|c| c.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ita::{gate_leakage, ItaOptions};

    fn synthetic(gap: f64) -> SpectroTable {
        let e = vec![0.0, 0.31, 0.7, 0.7 + gap, 1.9];
        let mut o = Mat::<f64>::zeros(5, 5);
        o[(2, 3)] = 1.2;
        o[(3, 2)] = 1.2;
        o[(1, 4)] = 0.3;
        o[(4, 1)] = 0.3;
        SpectroTable::synthetic(e, o, 800.0, Some([0, 1, 2, 3]))
    }

    #[test]
    fn interaction_examples() {
        let t = synthetic(0.05);
        let p = DrivePulse::new(2e-4, 0.05, 100.0).unwrap();
        let v0 = interaction_matrix(&t, &p, 0.0);
        assert!((v0[(2, 3)] - 2e-4 * 1.2).abs() < 1e-18);
        assert!((v0[(0, 0)] - 0.5 * 800.0 * 4e-8).abs() < 1e-18);
        let quarter = PI / 2.0 / 0.05;
        let vq = interaction_matrix(&t, &p, quarter);
        assert!(vq[(2, 3)].abs() < 1e-18 && vq[(0, 0)].abs() < 1e-18);
    }

    #[test]
    fn pi_time_arithmetic() {
        let mut o = Mat::<f64>::zeros(4, 4);
        o[(2, 3)] = 1.0;
        o[(3, 2)] = 1.0;
        let t = SpectroTable::synthetic(vec![0.0, 0.3, 0.7, 0.75], o, 1.0, Some([0, 1, 2, 3]));
        let tp = pi_pulse_duration(&t, 2e-4).unwrap();
        assert!((tp - PI / 2e-4).abs() < 1e-9);
        assert!((pi_pulse_duration(&t, 4e-4).unwrap() - tp / 2.0).abs() < 1e-9);
        let flat = SpectroTable::synthetic(vec![0.0, 0.3, 0.7, 0.75], Mat::zeros(4, 4), 1.0, Some([0, 1, 2, 3]));
        assert!(matches!(pi_pulse_duration(&flat, 2e-4), Err(Error::NoCoupling(_))));
    }

    #[test]
    fn leakage_vanishes_for_weak_drive() {
        let t = synthetic(0.05);
        let opts = DmOptions { max_duration: 2e4, ..Default::default() };
        let strong = cnot_dm_leakage(&t, 1e-3, &opts).unwrap();
        let weak = cnot_dm_leakage(&t, 1e-8, &opts).unwrap();
        assert!(weak.pulse.capped);
        assert!(weak.leakage.eta < 1e-6 && weak.leakage.eta < strong.leakage.eta);
    }

    #[test]
    fn dm_matches_ita_on_isolated_pair() {
        // |00⟩ driven off-resonantly into a lone leak level
        let e = vec![0.0, 0.5, 1.0, 1.05, 0.05 + 0.3e-4];
        let mut o = Mat::<f64>::zeros(5, 5);
        o[(2, 3)] = 1.0;
        o[(3, 2)] = 1.0;
        o[(0, 4)] = 0.5;
        o[(4, 0)] = 0.5;
        let t = SpectroTable::synthetic(e, o, 0.0, Some([0, 1, 2, 3]));
        let x = 1e-4;
        // long enough for the detuned oscillation to peak
        let pulse = DrivePulse::new(x, 0.05, 4.0 * PI / (x * 0.5)).unwrap();
        let dm = dm_gate_leakage(&t, &pulse, &DmOptions::default()).unwrap();
        let ita = gate_leakage(&t, &pulse, &ItaOptions::default()).unwrap();
        let (d, i) = (dm.components[0].eta, ita.components[0].eta);
        assert!((d - i).abs() < 0.02 * i, "DM {d} ITA {i}");
    }
}
