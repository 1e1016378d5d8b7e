//! Independent transition approximation: each level pair is an isolated
//! two-level system with the analytic maximum transition probability
//!
//! ```text
//! P = Ω² / (D² + Ω²),   Ω = 2 x_m0 |O_ij| N J_N(y)/y,   D = |Ẽ_j − Ẽ_i| − N ω̃,
//! y = x_m0 (O_jj − O_ii) / ω̃
//! ```
//!
//! Component leakage sums P over undesired states, gate leakage is the worst
//! component.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_rabi_factor;
use crate::error::{Error, Result};
use crate::spectro::{CompState, SpectroTable};

pub const MAX_PHOTONS: u32 = 3;
/// Ratio above which the drive is no longer weak compared to ω̃.
pub const WEAK_FIELD_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    #[default]
    Rectangular,
}

/// x_m(τ) = x_m0 cos(ω̃τ) on [0, τ_f].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePulse {
    /// x_m0 in Φ_0 units.
    pub amplitude: f64,
    /// ω̃ in units of ω_LC.
    pub frequency: f64,
    /// τ_f in units of 1/ω_LC.
    pub duration: f64,
    pub envelope: Envelope,
}

impl DrivePulse {
    pub fn new(amplitude: f64, frequency: f64, duration: f64) -> Result<Self> {
        let p = DrivePulse { amplitude, frequency, duration, envelope: Envelope::Rectangular };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("amplitude", self.amplitude), ("frequency", self.frequency), ("duration", self.duration)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Drive field at time τ.
    pub fn field(&self, tau: f64) -> f64 {
        match self.envelope {
            Envelope::Rectangular => {
                if (0.0..=self.duration).contains(&tau) {
                    self.amplitude * (self.frequency * tau).cos()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Largest off-diagonal Rabi rate over ω̃; the approximation assumes this is
/// well below [`WEAK_FIELD_LIMIT`].
pub fn weak_field_ratio(table: &SpectroTable, pulse: &DrivePulse) -> f64 {
    let k = table.states();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                worst = worst.max(table.coupling[(i, j)].abs());
            }
        }
    }
    // sup over N and y of N·J_N(y)/y is 1/2
    2.0 * pulse.amplitude * worst * 0.5 / pulse.frequency
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhotonAggregation {
    /// P_ik = max over photon numbers.
    #[default]
    Max,
    /// P_ik = sum over photon numbers.
    Sum,
}

impl std::str::FromStr for PhotonAggregation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(PhotonAggregation::Max),
            "sum" => Ok(PhotonAggregation::Sum),
            other => Err(Error::config("drive.photon_aggregation", format!("expected max or sum, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItaOptions {
    pub photon_aggregation: PhotonAggregation,
    pub max_photons: u32,
}

impl Default for ItaOptions {
    fn default() -> Self {
        ItaOptions { photon_aggregation: PhotonAggregation::Max, max_photons: MAX_PHOTONS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: usize,
    pub to: usize,
    pub photons: u32,
    /// |Ω̃_ij|, ω_LC units.
    pub rabi: f64,
    /// D̃_ij, ω_LC units.
    pub detuning: f64,
    pub bessel_arg: f64,
    pub probability: f64,
}

/// Ω²/(D² + Ω²), zero when the transition has no coupling.
pub fn max_probability(rabi: f64, detuning: f64) -> f64 {
    if rabi == 0.0 {
        return 0.0;
    }
    let r2 = rabi * rabi;
    r2 / (detuning * detuning + r2)
}

pub fn transition_probability(
    table: &SpectroTable,
    pulse: &DrivePulse,
    from: usize,
    to: usize,
    photons: u32,
) -> TransitionRecord {
    debug_assert!(from != to);
    let o = &table.coupling;
    let x = pulse.amplitude;
    let w = pulse.frequency;
    let bessel_arg = x * (o[(to, to)] - o[(from, from)]) / w;
    let rabi = (2.0 * x * o[(from, to)].abs() * bessel_rabi_factor(photons, bessel_arg)).abs();
    let detuning = (table.energies[to] - table.energies[from]).abs() - photons as f64 * w;
    TransitionRecord { from, to, photons, rabi, detuning, bessel_arg, probability: max_probability(rabi, detuning) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLeakage {
    pub component: CompState,
    pub eta: f64,
    /// (undesired state index, P_ik) in ascending state order.
    pub breakdown: Vec<(usize, f64)>,
    /// Undesired state with the largest P_ik.
    pub dominant: Option<usize>,
}

impl ComponentLeakage {
    pub fn from_breakdown(component: CompState, breakdown: Vec<(usize, f64)>) -> Self {
        let eta = breakdown.iter().map(|&(_, p)| p).sum();
        let dominant = breakdown
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |best, (k, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((k, p)),
            })
            .map(|(k, _)| k);
        ComponentLeakage { component, eta, breakdown, dominant }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateLeakage {
    pub eta: f64,
    /// In the order |00⟩, |01⟩, |10⟩, |11⟩.
    pub components: Vec<ComponentLeakage>,
}

impl GateLeakage {
    pub fn from_components(components: Vec<ComponentLeakage>) -> Self {
        let eta = components.iter().map(|c| c.eta).fold(0.0, f64::max);
        GateLeakage { eta, components }
    }

    pub fn component_etas(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for c in &self.components {
            out[c.component.index()] = c.eta;
        }
        out
    }
}

/// Every retained state except the component itself and, for |10⟩ and |11⟩,
/// the partner the CNOT drive is meant to populate.
pub fn undesired_states(table: &SpectroTable, component: CompState) -> Result<Vec<usize>> {
    let own = table.index_of(component)?;
    let partner = component.cnot_partner().map(|p| table.index_of(p)).transpose()?;
    Ok((0..table.states()).filter(|&k| k != own && Some(k) != partner).collect())
}

pub fn component_leakage(
    table: &SpectroTable,
    pulse: &DrivePulse,
    component: CompState,
    opts: &ItaOptions,
) -> Result<ComponentLeakage> {
    let i = table.index_of(component)?;
    let breakdown = undesired_states(table, component)?
        .into_iter()
        .map(|k| {
            let probs = (1..=opts.max_photons).map(|n| transition_probability(table, pulse, i, k, n).probability);
            let p = match opts.photon_aggregation {
                PhotonAggregation::Max => probs.fold(0.0, f64::max),
                PhotonAggregation::Sum => probs.sum(),
            };
            (k, p)
        })
        .collect();
    Ok(ComponentLeakage::from_breakdown(component, breakdown))
}

pub fn gate_leakage(table: &SpectroTable, pulse: &DrivePulse, opts: &ItaOptions) -> Result<GateLeakage> {
    let components = CompState::ALL
        .iter()
        .map(|&c| component_leakage(table, pulse, c, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(GateLeakage::from_components(components))
}

/// ITA leakage with the CNOT drive ω̃ = ΔẼ_34 at amplitude `amplitude`.
pub fn cnot_gate_leakage(table: &SpectroTable, amplitude: f64, opts: &ItaOptions) -> Result<GateLeakage> {
    let w = table.cnot_frequency()?;
    // duration does not enter the approximation
    let pulse = DrivePulse::new(amplitude, w, 1.0)?;
    gate_leakage(table, &pulse, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn four_level(gap: f64, coupling: f64) -> SpectroTable {
        // levels 0..3 computational, 4 a leak level
        let e = vec![0.0, 0.3, 0.7, 0.7 + gap, 2.0];
        let mut o = Mat::<f64>::zeros(5, 5);
        o[(2, 3)] = coupling;
        o[(3, 2)] = coupling;
        o[(0, 4)] = 0.5;
        o[(4, 0)] = 0.5;
        SpectroTable::synthetic(e, o, 0.0, Some([0, 1, 2, 3]))
    }

    #[test]
    fn probability_arithmetic() {
        assert_eq!(max_probability(1e-3, 0.0), 1.0);
        assert!((max_probability(0.2, 0.2) - 0.5).abs() < 1e-15);
        assert_eq!(max_probability(0.0, 0.3), 0.0);
        assert_eq!(max_probability(0.0, 0.0), 0.0);
    }

    #[test]
    fn intended_resonance_is_complete() {
        let t = four_level(0.05, 1.0);
        let pulse = DrivePulse::new(2e-4, 0.05, 1.0).unwrap();
        let r = transition_probability(&t, &pulse, 2, 3, 1);
        assert!(r.detuning.abs() < 1e-15);
        assert!((r.rabi - 2e-4).abs() < 1e-18);
        assert_eq!(r.probability, 1.0);
    }

    #[test]
    fn undesired_sets() {
        let t = four_level(0.05, 1.0);
        assert_eq!(undesired_states(&t, CompState::S10).unwrap(), vec![0, 1, 4]);
        assert_eq!(undesired_states(&t, CompState::S00).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn vanishing_drive_vanishing_leakage() {
        let t = four_level(0.05, 1.0);
        let opts = ItaOptions::default();
        let mut last = f64::INFINITY;
        for amp in [1e-3, 1e-5, 1e-7] {
            let g = gate_leakage(&t, &DrivePulse::new(amp, 0.05, 1.0).unwrap(), &opts).unwrap();
            assert!(g.eta < last);
            last = g.eta;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn aggregation_identities() {
        let t = four_level(0.05, 1.0);
        let g = gate_leakage(&t, &DrivePulse::new(5e-2, 0.05, 1.0).unwrap(), &ItaOptions::default()).unwrap();
        for c in &g.components {
            assert!(g.eta >= c.eta);
            let s: f64 = c.breakdown.iter().map(|b| b.1).sum();
            assert_eq!(s, c.eta);
        }
        assert!(g.components[0].dominant == Some(4));
        let sum = ItaOptions { photon_aggregation: PhotonAggregation::Sum, ..Default::default() };
        let gs = gate_leakage(&t, &DrivePulse::new(5e-2, 0.05, 1.0).unwrap(), &sum).unwrap();
        assert!(gs.eta >= g.eta);
    }

    #[test]
    fn envelope_does_not_enter() {
        let t = four_level(0.05, 1.0);
        let a = gate_leakage(&t, &DrivePulse::new(1e-2, 0.05, 1.0).unwrap(), &ItaOptions::default()).unwrap();
        let b = gate_leakage(&t, &DrivePulse::new(1e-2, 0.05, 12345.0).unwrap(), &ItaOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
