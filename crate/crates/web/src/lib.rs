//! Browser bindings: a level-spacing scan, an ITA leakage line cut and a
//! population trace under the CNOT pulse. Every function returns a flat
//! `Float64Array`; the row layout is given in each doc comment.

use squid_gate::dynamics::{basis_state, cnot_pulse, evolve, DmOptions};
use squid_gate::ita::{cnot_gate_leakage, ItaOptions};
use squid_gate::model::{derive_scales, DeviceParams, ModelScales, WorkingParams};
use squid_gate::spectro::{level_row, solve_coupled, CompState, SpectroOptions};
use wasm_bindgen::prelude::*;

const INDUCTANCE: f64 = 100e-12;
const CAPACITANCE: f64 = 40e-15;
const MAX_POINTS: usize = 400;

fn scales(beta_l: f64) -> Result<ModelScales, String> {
    let dp = DeviceParams::new(INDUCTANCE, CAPACITANCE, beta_l).map_err(|e| e.to_string())?;
    derive_scales(&dp).map_err(|e| e.to_string())
}

fn axis(min: f64, max: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_POINTS).contains(&count) || !(min < max) {
        return Err(format!("need min < max and 2..={MAX_POINTS} points"));
    }
    Ok((0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect())
}

/// Rows of `[x_e2, dE12, dE13, dE14, dE23, dE24, dE34]`; NaN where the
/// computational states cannot be identified.
pub fn levels_scan_impl(beta_l: f64, x_e1: f64, kappa: f64, min: f64, max: f64, count: usize) -> Result<Vec<f64>, String> {
    let s = scales(beta_l)?;
    let opts = SpectroOptions::default();
    let mut out = Vec::with_capacity(count * 7);
    for x_e2 in axis(min, max, count)? {
        let row = level_row(&s, &WorkingParams { x_e1, x_e2, kappa }, &opts);
        out.push(x_e2);
        out.extend(row.spacings.unwrap_or([f64::NAN; 6]));
    }
    Ok(out)
}

/// Rows of `[x_e2, eta]` with NaN for working points that cannot be evaluated.
pub fn ita_line_impl(beta_l: f64, x_e1: f64, kappa: f64, x_m0: f64, min: f64, max: f64, count: usize) -> Result<Vec<f64>, String> {
    let s = scales(beta_l)?;
    let opts = SpectroOptions::default();
    let mut out = Vec::with_capacity(count * 2);
    for x_e2 in axis(min, max, count)? {
        let eta = solve_coupled(&s, &WorkingParams { x_e1, x_e2, kappa }, &opts)
            .and_then(|t| cnot_gate_leakage(&t, x_m0, &ItaOptions::default()))
            .map_or(f64::NAN, |g| g.eta);
        out.push(x_e2);
        out.push(eta);
    }
    Ok(out)
}

/// Rows of `[tau, p00, p01, p10, p11, p_other]` over one CNOT π-pulse
/// starting from computational state `initial` (0..=3 for |00⟩..|11⟩).
pub fn rabi_trace_impl(beta_l: f64, x_e1: f64, x_e2: f64, kappa: f64, x_m0: f64, initial: u8) -> Result<Vec<f64>, String> {
    let s = scales(beta_l)?;
    let start = *CompState::ALL.get(initial as usize).ok_or("initial state must be 0..=3")?;
    let table = solve_coupled(&s, &WorkingParams { x_e1, x_e2, kappa }, &SpectroOptions::default()).map_err(|e| e.to_string())?;
    let map = table.computational_map().map_err(|e| e.to_string())?;
    let dm = DmOptions { sample_every: 256, ..DmOptions::default() };
    let pulse = cnot_pulse(&table, x_m0, &dm).map_err(|e| e.to_string())?;
    let run = evolve(&table, &pulse.pulse, &basis_state(table.states(), map[start.index()]), &dm).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(run.times.len() * 6);
    for (tau, amps) in run.times.iter().zip(&run.amplitudes) {
        let comp = map.map(|i| amps[i].norm_sqr());
        out.push(*tau);
        out.extend(comp);
        out.push((1.0 - comp.iter().sum::<f64>()).max(0.0));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn levels_scan(beta_l: f64, x_e1: f64, kappa: f64, min: f64, max: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    levels_scan_impl(beta_l, x_e1, kappa, min, max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ita_line(beta_l: f64, x_e1: f64, kappa: f64, x_m0: f64, min: f64, max: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    ita_line_impl(beta_l, x_e1, kappa, x_m0, min, max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rabi_trace(beta_l: f64, x_e1: f64, x_e2: f64, kappa: f64, x_m0: f64, initial: u8) -> Result<Vec<f64>, JsValue> {
    rabi_trace_impl(beta_l, x_e1, x_e2, kappa, x_m0, initial).map_err(|e| JsValue::from_str(&e))
}
