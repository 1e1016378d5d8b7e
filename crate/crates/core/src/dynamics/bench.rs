use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::propagate::{basis_state, evolve, DmOptions};
use super::cnot_pulse;
use crate::error::{Error, Result};
use crate::model::{ModelScales, WorkingParams};
use crate::spectro::{solve_coupled, CompState, SpectroOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub wp: WorkingParams,
    /// Wall time of one spectroscopic solve, seconds.
    pub spectroscopy: f64,
    /// Wall time of one component evolution over the CNOT pulse, seconds.
    pub evolution: f64,
}

/// Cost model for n = 2 qubits: ITA costs one solve, DM adds 2ⁿ evolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub samples: Vec<BenchSample>,
    /// Median τ_S.
    pub tau_s: f64,
    /// Median τ_T.
    pub tau_t: f64,
    pub tau_i: f64,
    pub tau_d: f64,
    pub ratio: f64,
    pub zeta: f64,
    pub qubits: u32,
    pub environment: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn environment_descriptor(backend: &str) -> String {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!(
        "{}-{} cpus={} backend={} debug_assertions={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        threads,
        backend,
        if cfg!(debug_assertions) { "on" } else { "off" }
    )
}

/// Times spectroscopy and one |10⟩ evolution per working point, serially.
pub fn benchmark_speedup(
    s: &ModelScales,
    wps: &[WorkingParams],
    x_m0: f64,
    spectro: &SpectroOptions,
    opts: &DmOptions,
) -> Result<BenchmarkReport> {
    if wps.len() < 3 {
        return Err(Error::invalid("working points", format!("need at least 3, got {}", wps.len())));
    }
    let mut samples = Vec::with_capacity(wps.len());
    for wp in wps {
        let t0 = Instant::now();
        let table = solve_coupled(s, wp, spectro)?;
        let spectroscopy = t0.elapsed().as_secs_f64();
        let pulse = cnot_pulse(&table, x_m0, opts)?;
        let start = basis_state(table.states(), table.index_of(CompState::S10)?);
        let t1 = Instant::now();
        evolve(&table, &pulse.pulse, &start, opts)?;
        let evolution = t1.elapsed().as_secs_f64();
        samples.push(BenchSample { wp: *wp, spectroscopy, evolution });
    }
    let tau_s = median(samples.iter().map(|b| b.spectroscopy).collect());
    let tau_t = median(samples.iter().map(|b| b.evolution).collect());
    let qubits = 2;
    let tau_i = tau_s;
    let tau_d = tau_s + f64::from(1u32 << qubits) * tau_t;
    Ok(BenchmarkReport {
        samples,
        tau_s,
        tau_t,
        tau_i,
        tau_d,
        ratio: tau_d / tau_i,
        zeta: tau_t / tau_s,
        qubits,
        environment: environment_descriptor(spectro.backend.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
