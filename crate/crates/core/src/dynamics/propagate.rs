//! Eigenbasis TDSE `i dc/dτ = [diag(Ẽ) + x_m(τ)·O + ρ x_m(τ)²/2] c`.
//!
//! The free part is diagonal and the drive part is diagonal in the eigenbasis
//! of O, so both factors of the split step are exact exponentials. A symmetric
//! Strang step is composed into a fourth-order scheme with Yoshida weights.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ita::DrivePulse;
use crate::linalg;
use crate::spectro::SpectroTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmOptions {
    /// Initial step is one drive period divided by this.
    pub step_divisor: f64,
    pub max_refinements: u32,
    /// Largest allowed final-amplitude change under step halving.
    pub halving_tolerance: f64,
    pub norm_tolerance: f64,
    /// Cap on τ_π (1/ω_LC units); longer gates are truncated and flagged.
    pub max_duration: f64,
    /// Keep every n-th step in the stored trace.
    pub sample_every: usize,
}

impl Default for DmOptions {
    fn default() -> Self {
        DmOptions {
            step_divisor: 64.0,
            max_refinements: 10,
            halving_tolerance: 1e-6,
            norm_tolerance: 1e-8,
            max_duration: 1e6,
            sample_every: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdseResult {
    /// Sample times, 1/ω_LC units.
    pub times: Vec<f64>,
    /// Amplitudes c_n at each sample time.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// max over all accepted steps of |c_n|².
    pub max_populations: Vec<f64>,
    pub final_amplitudes: Vec<Complex64>,
    /// max over steps of | Σ|c_n|² − 1 |.
    pub norm_drift: f64,
    pub step: f64,
    pub steps: usize,
    pub refinements: u32,
    /// Final-amplitude change against the run with twice the step.
    pub halving_change: f64,
    pub end_time: f64,
}

impl TdseResult {
    pub fn populations(&self, sample: usize) -> Vec<f64> {
        self.amplitudes[sample].iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn final_populations(&self) -> Vec<f64> {
        self.final_amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

const YOSHIDA_W1: f64 = 1.351_207_191_959_657_8; // 1/(2 − 2^{1/3})
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_3; // −2^{1/3}/(2 − 2^{1/3})

struct Propagator<'a> {
    energies: &'a [f64],
    /// Eigenvectors of O, row-major: w[i*k + j] = W_ij.
    w: Vec<f64>,
    lambda: Vec<f64>,
    rho: f64,
    k: usize,
    scratch: Vec<Complex64>,
    /// Free half-step factors for the outer and inner Yoshida substeps.
    half_outer: Vec<Complex64>,
    half_inner: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    fn new(table: &'a SpectroTable) -> Result<Self> {
        let k = table.states();
        let (lambda, vecs) = linalg::symmetric_eigen(table.coupling.as_ref())?;
        let mut w: Vec<f64> = (0..k * k).map(|idx| vecs[(idx / k, idx % k)]).collect();
        orthonormalize_columns(&mut w, k);
        let zero = vec![Complex64::new(0.0, 0.0); k];
        Ok(Propagator {
            energies: &table.energies,
            w,
            lambda,
            rho: table.rho,
            k,
            scratch: zero.clone(),
            half_outer: zero.clone(),
            half_inner: zero,
        })
    }

    fn set_step(&mut self, dt: f64) {
        for (n, e) in self.energies.iter().enumerate() {
            self.half_outer[n] = Complex64::from_polar(1.0, -e * 0.5 * YOSHIDA_W1 * dt);
            self.half_inner[n] = Complex64::from_polar(1.0, -e * 0.5 * YOSHIDA_W0 * dt);
        }
    }

    fn free(psi: &mut [Complex64], factors: &[Complex64]) {
        for (c, f) in psi.iter_mut().zip(factors) {
            *c *= *f;
        }
    }

    fn drive(&mut self, psi: &mut [Complex64], field: f64, dt: f64) {
        if field == 0.0 {
            return;
        }
        let k = self.k;
        let global = -0.5 * self.rho * field * field * dt;
        // v = Wᵀψ, scaled by the exact phase of each O eigenvalue
        for j in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..k {
                acc += psi[i] * self.w[i * k + j];
            }
            self.scratch[j] = acc * Complex64::from_polar(1.0, -field * self.lambda[j] * dt + global);
        }
        for i in 0..k {
            let row = &self.w[i * k..(i + 1) * k];
            let mut acc = Complex64::new(0.0, 0.0);
            for (wij, v) in row.iter().zip(&self.scratch) {
                acc += *v * *wij;
            }
            psi[i] = acc;
        }
    }

    /// One fourth-order step; `set_step(dt)` must have been called.
    fn step(&mut self, psi: &mut [Complex64], pulse: &DrivePulse, t0: f64, dt: f64) {
        let a = YOSHIDA_W1 * dt;
        let b = YOSHIDA_W0 * dt;
        let outer = std::mem::take(&mut self.half_outer);
        let inner = std::mem::take(&mut self.half_inner);
        Self::free(psi, &outer);
        self.drive(psi, pulse.field(t0 + 0.5 * a), a);
        Self::free(psi, &outer);
        Self::free(psi, &inner);
        self.drive(psi, pulse.field(t0 + a + 0.5 * b), b);
        Self::free(psi, &inner);
        Self::free(psi, &outer);
        self.drive(psi, pulse.field(t0 + a + b + 0.5 * a), a);
        Self::free(psi, &outer);
        self.half_outer = outer;
        self.half_inner = inner;
    }
}

/// Two passes of modified Gram–Schmidt on the columns of a row-major k×k
/// matrix. The eigensolver's O(kε) loss of orthogonality would otherwise
/// compound over millions of drive steps into a visible norm drift.
fn orthonormalize_columns(w: &mut [f64], k: usize) {
    for _ in 0..2 {
        for j in 0..k {
            for p in 0..j {
                let dot: f64 = (0..k).map(|i| w[i * k + j] * w[i * k + p]).sum();
                for i in 0..k {
                    w[i * k + j] -= dot * w[i * k + p];
                }
            }
            let norm = (0..k).map(|i| w[i * k + j] * w[i * k + j]).sum::<f64>().sqrt();
            for i in 0..k {
                w[i * k + j] /= norm;
            }
        }
    }
}

struct Run {
    times: Vec<f64>,
    samples: Vec<Vec<Complex64>>,
    max_pop: Vec<f64>,
    psi: Vec<Complex64>,
    drift: f64,
}

fn run_fixed(prop: &mut Propagator, pulse: &DrivePulse, initial: &[Complex64], steps: usize, sample_every: usize) -> Run {
    let dt = pulse.duration / steps as f64;
    prop.set_step(dt);
    let mut psi = initial.to_vec();
    let mut max_pop: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let mut times = vec![0.0];
    let mut samples = vec![psi.clone()];
    let mut drift = 0.0f64;
    for s in 0..steps {
        prop.step(&mut psi, pulse, s as f64 * dt, dt);
        let mut norm = 0.0;
        for (m, c) in max_pop.iter_mut().zip(&psi) {
            let p = c.norm_sqr();
            norm += p;
            if p > *m {
                *m = p;
            }
        }
        drift = drift.max((norm - 1.0).abs());
        if (s + 1) % sample_every == 0 || s + 1 == steps {
            times.push((s + 1) as f64 * dt);
            samples.push(psi.clone());
        }
    }
    Run { times, samples, max_pop, psi, drift }
}

/// Integrates from τ = 0 to the end of the pulse, halving the step until the
/// final amplitudes change by less than the tolerance.
pub fn evolve(table: &SpectroTable, pulse: &DrivePulse, initial: &[Complex64], opts: &DmOptions) -> Result<TdseResult> {
    let k = table.states();
    if initial.len() != k {
        return Err(Error::invalid("initial", format!("expected {k} amplitudes, got {}", initial.len())));
    }
    let norm: f64 = initial.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("initial", format!("state norm² is {norm}, expected 1")));
    }
    if !(pulse.frequency > 0.0 && pulse.duration > 0.0 && pulse.amplitude >= 0.0) {
        return Err(Error::invalid("pulse", format!("{pulse:?}")));
    }
    let mut prop = Propagator::new(table)?;
    let h0 = 2.0 * PI / pulse.frequency / opts.step_divisor;
    let mut steps = (pulse.duration / h0).ceil().max(1.0) as usize;
    let stride = opts.sample_every.max(1);
    let mut coarse = run_fixed(&mut prop, pulse, initial, steps, stride);
    let mut change = f64::INFINITY;
    for refinement in 1..=opts.max_refinements {
        steps *= 2;
        // keep sample times aligned between refinements
        let fine = run_fixed(&mut prop, pulse, initial, steps, stride << refinement);
        change = fine.psi.iter().zip(&coarse.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if change < opts.halving_tolerance {
            if fine.drift > opts.norm_tolerance {
                return Err(Error::NormDrift { drift: fine.drift, tolerance: opts.norm_tolerance, steps });
            }
            return Ok(TdseResult {
                times: fine.times,
                amplitudes: fine.samples,
                max_populations: fine.max_pop,
                final_amplitudes: fine.psi,
                norm_drift: fine.drift,
                step: pulse.duration / steps as f64,
                steps,
                refinements: refinement,
                halving_change: change,
                end_time: pulse.duration,
            });
        }
        coarse = fine;
    }
    Err(Error::IntegrationFailure { refinements: opts.max_refinements, change })
}

/// Applies exact free evolution for `extra` time units after the pulse.
pub fn free_evolve(table: &SpectroTable, amplitudes: &mut [Complex64], extra: f64) {
    for (c, e) in amplitudes.iter_mut().zip(&table.energies) {
        *c *= Complex64::from_polar(1.0, -e * extra);
    }
}

pub fn basis_state(k: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); k];
    v[index] = Complex64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn two_level(gap: f64, g: f64) -> SpectroTable {
        let mut o = Mat::<f64>::zeros(2, 2);
        o[(0, 1)] = g;
        o[(1, 0)] = g;
        SpectroTable::synthetic(vec![0.0, gap], o, 0.0, None)
    }

    #[test]
    fn undriven_evolution_is_pure_phase() {
        let mut o = Mat::<f64>::zeros(3, 3);
        o[(0, 1)] = 1.0;
        o[(1, 0)] = 1.0;
        o[(2, 2)] = 3.0;
        let table = SpectroTable::synthetic(vec![0.1, 0.7, 1.9], o, 800.0, None);
        let pulse = DrivePulse { amplitude: 0.0, frequency: 0.6, duration: 500.0, envelope: Default::default() };
        let s = 1.0 / 3f64.sqrt();
        let init = vec![Complex64::new(s, 0.0); 3];
        let r = evolve(&table, &pulse, &init, &DmOptions::default()).unwrap();
        for (n, c) in r.final_amplitudes.iter().enumerate() {
            assert!((c.norm() - s).abs() < 1e-10);
            let expect = Complex64::from_polar(s, -table.energies[n] * 500.0);
            assert!((c - expect).norm() < 1e-8);
        }
    }

    #[test]
    fn resonant_rabi_oscillation() {
        let (gap, g, amp) = (0.05, 1.0, 1e-5);
        let table = two_level(gap, g);
        let rabi = amp * g;
        let t_pi = PI / rabi;
        let pulse = DrivePulse::new(amp, gap, t_pi).unwrap();
        let r = evolve(&table, &pulse, &basis_state(2, 0), &DmOptions::default()).unwrap();
        for (t, amps) in r.times.iter().zip(&r.amplitudes) {
            let analytic = (0.5 * rabi * t).sin().powi(2);
            assert!((amps[1].norm_sqr() - analytic).abs() < 0.02, "t={t}");
        }
        assert!(r.final_populations()[1] > 0.999);
        assert!(r.norm_drift < 1e-8);
        for (m, f) in r.max_populations.iter().zip(r.final_populations()) {
            assert!(*m >= f);
        }
    }

    #[test]
    fn columns_become_orthonormal() {
        let k = 3;
        let (c, s) = (0.6, 0.8);
        let mut w = vec![c + 1e-9, -s, 0.0, s, c, 1e-10, 0.0, 2e-10, 1.0 - 3e-9];
        orthonormalize_columns(&mut w, k);
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = (0..k).map(|i| w[i * k + a] * w[i * k + b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-15);
            }
        }
        assert!((w[0] - c).abs() < 1e-8);
    }

    #[test]
    fn rejects_unnormalised_start() {
        let table = two_level(0.05, 1.0);
        let pulse = DrivePulse::new(1e-4, 0.05, 10.0).unwrap();
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(evolve(&table, &pulse, &bad, &DmOptions::default()).is_err());
    }
}
