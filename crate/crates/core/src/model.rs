//! Device and working parameters of two identical rf SQUIDs and the
//! dimensionless potentials they define.
//!
//! Energies are in units of ħω_LC, flux in Φ_0 and time in 1/ω_LC. SI values
//! only appear in [`DeviceParams`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA values used throughout.
pub mod constants {
    /// Magnetic flux quantum h/2e in Wb.
    pub const FLUX_QUANTUM: f64 = 2.067833848e-15;
    /// Reduced Planck constant in J·s.
    pub const HBAR: f64 = 1.054571817e-34;
}

const BETA_IC_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Loop inductance in H.
    pub inductance: f64,
    /// Junction capacitance in F.
    pub capacitance: f64,
    /// Potential shape parameter 2πLI_c/Φ_0.
    pub beta_l: f64,
}

impl DeviceParams {
    pub fn new(inductance: f64, capacitance: f64, beta_l: f64) -> Result<Self> {
        let dp = DeviceParams { inductance, capacitance, beta_l };
        dp.validate()?;
        Ok(dp)
    }

    pub fn from_critical_current(inductance: f64, capacitance: f64, critical_current: f64) -> Result<Self> {
        if !(critical_current > 0.0) || !critical_current.is_finite() {
            return Err(Error::invalid("critical_current", format!("must be positive, got {critical_current}")));
        }
        Self::new(inductance, capacitance, beta_from_critical_current(inductance, critical_current))
    }

    /// Accepts β_L, I_c or both; when both are given they must agree to 1e-9 relative.
    pub fn from_parts(
        inductance: f64,
        capacitance: f64,
        beta_l: Option<f64>,
        critical_current: Option<f64>,
    ) -> Result<Self> {
        match (beta_l, critical_current) {
            (Some(b), None) => Self::new(inductance, capacitance, b),
            (None, Some(ic)) => Self::from_critical_current(inductance, capacitance, ic),
            (Some(b), Some(ic)) => {
                let implied = beta_from_critical_current(inductance, ic);
                if ((implied - b) / b).abs() > BETA_IC_RTOL {
                    return Err(Error::invalid(
                        "beta_l",
                        format!("β_L = {b} disagrees with critical current {ic} A (implies β_L = {implied})"),
                    ));
                }
                Self::new(inductance, capacitance, b)
            }
            (None, None) => Err(Error::invalid("beta_l", "either beta_l or critical_current is required")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("inductance", self.inductance),
            ("capacitance", self.capacitance),
            ("beta_l", self.beta_l),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// β_L ≤ 1 leaves a single well per qubit near half-flux bias.
    pub fn has_double_well(&self) -> bool {
        self.beta_l > 1.0
    }

    pub fn critical_current(&self) -> f64 {
        self.beta_l * constants::FLUX_QUANTUM / (2.0 * PI * self.inductance)
    }
}

fn beta_from_critical_current(inductance: f64, critical_current: f64) -> f64 {
    2.0 * PI * inductance * critical_current / constants::FLUX_QUANTUM
}

/// Dimensionless model constants derived from a device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScales {
    /// ω_LC = 1/√(LC) in rad/s.
    pub omega_lc: f64,
    /// Flux-particle mass CΦ_0² in SI units.
    pub mass: f64,
    /// Dimensionless mass ρ = mω_LC/ħ.
    pub rho: f64,
    /// Shape parameter carried along for ẽ_J.
    pub beta_l: f64,
    /// Josephson energy in units of ħω_LC, ρβ_L/4π².
    pub e_j: f64,
}

impl ModelScales {
    /// Builds scales directly in dimensionless form. `beta_l = 0` gives the
    /// pure harmonic oscillator used by the analytic oracles.
    pub fn dimensionless(rho: f64, beta_l: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
        }
        if !(beta_l >= 0.0) || !beta_l.is_finite() {
            return Err(Error::invalid("beta_l", format!("must be non-negative, got {beta_l}")));
        }
        Ok(ModelScales { omega_lc: f64::NAN, mass: f64::NAN, rho, beta_l, e_j: josephson(rho, beta_l) })
    }

    /// Angular frequency of small oscillations at the bottom of a well with
    /// offset δ from the half-flux point, in units of ω_LC.
    pub fn well_frequency(&self, delta: f64) -> f64 {
        (1.0 - self.beta_l * (2.0 * PI * delta).cos()).max(0.0).sqrt()
    }
}

fn josephson(rho: f64, beta_l: f64) -> f64 {
    rho * beta_l / (4.0 * PI * PI)
}

pub fn derive_scales(dp: &DeviceParams) -> Result<ModelScales> {
    dp.validate()?;
    let omega_lc = 1.0 / (dp.inductance * dp.capacitance).sqrt();
    let mass = dp.capacitance * constants::FLUX_QUANTUM * constants::FLUX_QUANTUM;
    let rho = mass * omega_lc / constants::HBAR;
    Ok(ModelScales { omega_lc, mass, rho, beta_l: dp.beta_l, e_j: josephson(rho, dp.beta_l) })
}

/// Default admissible bias window for both qubits.
pub const DEFAULT_BIAS_WINDOW: (f64, f64) = (0.49, 0.51);

/// The optimisation variables: flux biases of the control (1) and target (2)
/// qubits in Φ_0 units and the coupling constant κ = M/L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingParams {
    pub x_e1: f64,
    pub x_e2: f64,
    pub kappa: f64,
}

impl WorkingParams {
    pub fn new(x_e1: f64, x_e2: f64, kappa: f64) -> Result<Self> {
        let wp = WorkingParams { x_e1, x_e2, kappa };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x_e1", self.x_e1), ("x_e2", self.x_e2), ("kappa", self.kappa)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.kappa.abs() >= 1.0 {
            return Err(Error::invalid("kappa", format!("|κ| must be < 1, got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn check_bias_window(&self, window: (f64, f64)) -> Result<()> {
        for (name, v) in [("x_e1", self.x_e1), ("x_e2", self.x_e2)] {
            if v < window.0 || v > window.1 {
                return Err(Error::invalid(name, format!("{v} outside bias window [{}, {}]", window.0, window.1)));
            }
        }
        Ok(())
    }

    /// Image under x → 1 − x, which leaves the spectrum unchanged.
    pub fn reflected(&self) -> Self {
        WorkingParams { x_e1: 1.0 - self.x_e1, x_e2: 1.0 - self.x_e2, kappa: self.kappa }
    }

    /// Control and target exchanged.
    pub fn swapped(&self) -> Self {
        WorkingParams { x_e1: self.x_e2, x_e2: self.x_e1, kappa: self.kappa }
    }
}

/// U(x) = ρ(x − x_e)²/2 − ẽ_J cos 2πx.
pub fn potential_1d(x: f64, x_e: f64, s: &ModelScales) -> f64 {
    let d = x - x_e;
    0.5 * s.rho * d * d - s.e_j * (2.0 * PI * x).cos()
}

pub fn potential_2d(x1: f64, x2: f64, wp: &WorkingParams, s: &ModelScales) -> f64 {
    potential_1d(x1, wp.x_e1, s)
        + potential_1d(x2, wp.x_e2, s)
        + s.rho * wp.kappa * (x1 - wp.x_e1) * (x2 - wp.x_e2)
}

fn gradient_2d(p: [f64; 2], wp: &WorkingParams, s: &ModelScales) -> [f64; 2] {
    let k = s.rho * wp.kappa;
    let d1 = p[0] - wp.x_e1;
    let d2 = p[1] - wp.x_e2;
    let j = 2.0 * PI * s.e_j;
    [
        s.rho * d1 + j * (2.0 * PI * p[0]).sin() + k * d2,
        s.rho * d2 + j * (2.0 * PI * p[1]).sin() + k * d1,
    ]
}

fn hessian_2d(p: [f64; 2], wp: &WorkingParams, s: &ModelScales) -> [[f64; 2]; 2] {
    let c = 4.0 * PI * PI * s.e_j;
    let k = s.rho * wp.kappa;
    [
        [s.rho + c * (2.0 * PI * p[0]).cos(), k],
        [k, s.rho + c * (2.0 * PI * p[1]).cos()],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WellLabel {
    LL,
    LH,
    HL,
    HH,
}

impl WellLabel {
    pub const ALL: [WellLabel; 4] = [WellLabel::LL, WellLabel::LH, WellLabel::HL, WellLabel::HH];

    pub fn name(self) -> &'static str {
        match self {
            WellLabel::LL => "LL",
            WellLabel::LH => "LH",
            WellLabel::HL => "HL",
            WellLabel::HH => "HH",
        }
    }

    pub fn from_sides(high1: bool, high2: bool) -> Self {
        match (high1, high2) {
            (false, false) => WellLabel::LL,
            (false, true) => WellLabel::LH,
            (true, false) => WellLabel::HL,
            (true, true) => WellLabel::HH,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellMinimum {
    pub location: [f64; 2],
    pub energy: f64,
    pub label: WellLabel,
}

/// Four wells plus the saddle used to split the plane into quadrants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellStructure {
    pub minima: Vec<WellMinimum>,
    pub saddle: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellSearch {
    pub window: (f64, f64),
    pub seeds_per_axis: usize,
    pub dedup_distance: f64,
}

impl Default for WellSearch {
    fn default() -> Self {
        WellSearch { window: (0.0, 1.0), seeds_per_axis: 64, dedup_distance: 1e-4 }
    }
}

/// Damped Newton iteration on ∇U = 0. `minimum` selects plain descent steps
/// when the Hessian is not positive definite.
fn newton_stationary(
    start: [f64; 2],
    wp: &WorkingParams,
    s: &ModelScales,
    minimum: bool,
    window: (f64, f64),
) -> Option<[f64; 2]> {
    let mut p = start;
    let scale = s.rho.max(1.0);
    for _ in 0..200 {
        let g = gradient_2d(p, wp, s);
        let h = hessian_2d(p, wp, s);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let pos_def = h[0][0] > 0.0 && det > 0.0;
        let mut step = if (minimum && !pos_def) || det.abs() < 1e-12 * scale * scale {
            [-g[0] / scale, -g[1] / scale]
        } else {
            [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ]
        };
        let len = step[0].hypot(step[1]);
        if len > 0.02 {
            step = [step[0] * 0.02 / len, step[1] * 0.02 / len];
        }
        if minimum {
            // backtrack so the potential never increases
            let u0 = potential_2d(p[0], p[1], wp, s);
            let mut t = 1.0;
            while t > 1e-8 && potential_2d(p[0] + t * step[0], p[1] + t * step[1], wp, s) > u0 + 1e-14 * u0.abs() {
                t *= 0.5;
            }
            step = [step[0] * t, step[1] * t];
        }
        p = [p[0] + step[0], p[1] + step[1]];
        if p.iter().any(|&v| v < window.0 - 0.1 || v > window.1 + 0.1) {
            return None;
        }
        if step[0].hypot(step[1]) < 1e-13 {
            let g = gradient_2d(p, wp, s);
            if g[0].hypot(g[1]) < 1e-7 * scale {
                return Some(p);
            }
        }
    }
    let g = gradient_2d(p, wp, s);
    (g[0].hypot(g[1]) < 1e-7 * scale).then_some(p)
}

/// Stationary point between the wells, near the bias point.
pub fn central_saddle(wp: &WorkingParams, s: &ModelScales) -> [f64; 2] {
    newton_stationary([0.5, 0.5], wp, s, false, (0.0, 1.0)).unwrap_or([0.5, 0.5])
}

/// Locates all local minima of the coupled potential inside the search window.
pub fn find_wells(wp: &WorkingParams, s: &ModelScales) -> Result<WellStructure> {
    find_wells_with(wp, s, &WellSearch::default())
}

pub fn find_wells_with(wp: &WorkingParams, s: &ModelScales, search: &WellSearch) -> Result<WellStructure> {
    let (lo, hi) = search.window;
    let n = search.seeds_per_axis.max(2);
    let mut found: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let seed = [
                lo + (hi - lo) * (i as f64 + 0.5) / n as f64,
                lo + (hi - lo) * (j as f64 + 0.5) / n as f64,
            ];
            let Some(p) = newton_stationary(seed, wp, s, true, search.window) else { continue };
            if p.iter().any(|&v| v < lo || v > hi) {
                continue;
            }
            let h = hessian_2d(p, wp, s);
            if !(h[0][0] > 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0) {
                continue;
            }
            if found.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > search.dedup_distance) {
                found.push(p);
            }
        }
    }
    if found.len() != 4 {
        return Err(Error::FourWellLost { found: found.len() });
    }
    let saddle = central_saddle(wp, s);
    let mut minima: Vec<WellMinimum> = found
        .into_iter()
        .map(|p| WellMinimum {
            location: p,
            energy: potential_2d(p[0], p[1], wp, s),
            label: WellLabel::from_sides(p[0] > saddle[0], p[1] > saddle[1]),
        })
        .collect();
    minima.sort_by_key(|m| m.label);
    if minima.windows(2).any(|w| w[0].label == w[1].label) {
        // two minima in one quadrant means the saddle split is meaningless
        return Err(Error::FourWellLost { found: 4 });
    }
    Ok(WellStructure { minima, saddle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_device() -> DeviceParams {
        DeviceParams::new(100e-12, 40e-15, 1.2).unwrap()
    }

    #[test]
    fn scales_for_reference_device() {
        let s = derive_scales(&reference_device()).unwrap();
        assert!((s.omega_lc - 5.0e11).abs() < 1.0);
        assert!((s.rho - 810.93).abs() < 0.01, "rho = {}", s.rho);
        assert!((s.e_j - 24.649).abs() < 1e-3, "e_j = {}", s.e_j);
        assert_eq!(s.e_j, s.rho * 1.2 / (4.0 * PI * PI));
    }

    #[test]
    fn rejects_non_positive_device_values() {
        assert!(matches!(DeviceParams::new(0.0, 40e-15, 1.2), Err(Error::InvalidParameter { name: "inductance", .. })));
        assert!(DeviceParams::new(1e-10, -1.0, 1.2).is_err());
        assert!(DeviceParams::new(1e-10, 4e-14, 0.0).is_err());
    }

    #[test]
    fn critical_current_round_trip() {
        let dp = reference_device();
        let ic = dp.critical_current();
        let back = DeviceParams::from_critical_current(dp.inductance, dp.capacitance, ic).unwrap();
        assert!((back.beta_l - 1.2).abs() < 1e-12);
        assert!(DeviceParams::from_parts(dp.inductance, dp.capacitance, Some(1.2), Some(ic)).is_ok());
        assert!(DeviceParams::from_parts(dp.inductance, dp.capacitance, Some(1.2), Some(ic * 1.01)).is_err());
    }

    #[test]
    fn potential_examples() {
        let s = derive_scales(&reference_device()).unwrap();
        assert!((potential_1d(0.5, 0.5, &s) - s.e_j).abs() < 1e-12);
        let h = ModelScales::dimensionless(800.0, 0.0).unwrap();
        assert!((potential_1d(0.6, 0.5, &h) - 4.0).abs() < 1e-12);
        let wp = WorkingParams::new(0.499, 0.49985, 0.0).unwrap();
        let (a, b) = (0.41, 0.63);
        assert!(
            (potential_2d(a, b, &wp, &s) - potential_1d(a, wp.x_e1, &s) - potential_1d(b, wp.x_e2, &s)).abs()
                < 1e-12
        );
    }

    #[test]
    fn double_well_minima_symmetric_about_half() {
        // fine-grid oracle
        let s = derive_scales(&reference_device()).unwrap();
        let xs: Vec<f64> = (0..=200_000).map(|i| i as f64 / 200_000.0).collect();
        let u: Vec<f64> = xs.iter().map(|&x| potential_1d(x, 0.5, &s)).collect();
        let mins: Vec<f64> = (1..xs.len() - 1).filter(|&i| u[i] < u[i - 1] && u[i] < u[i + 1]).map(|i| xs[i]).collect();
        assert_eq!(mins.len(), 2);
        assert!((mins[0] + mins[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn four_wells_at_reference_point() {
        let s = derive_scales(&reference_device()).unwrap();
        let wp = WorkingParams::new(0.499, 0.49985, 5e-4).unwrap();
        let w = find_wells(&wp, &s).unwrap();
        assert_eq!(w.minima.len(), 4);
        // oracle: brute-force grid minimisation per quadrant
        for m in &w.minima {
            let (c1, c2) = (m.location[0], m.location[1]);
            let mut best = f64::INFINITY;
            let mut arg = [0.0; 2];
            for i in -200..=200 {
                for j in -200..=200 {
                    let p = [c1 + i as f64 * 1e-4, c2 + j as f64 * 1e-4];
                    let v = potential_2d(p[0], p[1], &wp, &s);
                    if v < best {
                        best = v;
                        arg = p;
                    }
                }
            }
            assert!((arg[0] - c1).abs() <= 1e-4 && (arg[1] - c2).abs() <= 1e-4);
            assert!(m.energy <= best + 1e-9);
        }
        let labels: Vec<_> = w.minima.iter().map(|m| m.label).collect();
        assert_eq!(labels, WellLabel::ALL.to_vec());
    }

    #[test]
    fn symmetric_bias_gives_degenerate_wells() {
        let s = derive_scales(&reference_device()).unwrap();
        let wp = WorkingParams::new(0.5, 0.5, 0.0).unwrap();
        let w = find_wells(&wp, &s).unwrap();
        let e0 = w.minima[0].energy;
        let delta = 0.5 - w.minima[0].location[0];
        for m in &w.minima {
            assert!((m.energy - e0).abs() < 1e-9);
            assert!(((m.location[0] - 0.5).abs() - delta).abs() < 1e-7);
            assert!(((m.location[1] - 0.5).abs() - delta).abs() < 1e-7);
        }
    }

    #[test]
    fn single_well_below_unit_beta() {
        let dp = DeviceParams::new(100e-12, 40e-15, 0.5).unwrap();
        assert!(!dp.has_double_well());
        let s = derive_scales(&dp).unwrap();
        let wp = WorkingParams::new(0.5, 0.5, 0.0).unwrap();
        assert_eq!(find_wells(&wp, &s), Err(Error::FourWellLost { found: 1 }));
    }

    #[test]
    fn reflection_maps_minima() {
        let s = derive_scales(&reference_device()).unwrap();
        let wp = WorkingParams::new(0.499, 0.4995, 1e-3).unwrap();
        let a = find_wells(&wp, &s).unwrap();
        let b = find_wells(&wp.reflected(), &s).unwrap();
        for m in &a.minima {
            let image = [1.0 - m.location[0], 1.0 - m.location[1]];
            assert!(b.minima.iter().any(|n| (n.location[0] - image[0]).abs() < 1e-8
                && (n.location[1] - image[1]).abs() < 1e-8));
        }
    }

    #[test]
    fn kappa_bound() {
        assert!(WorkingParams::new(0.5, 0.5, 1.0).is_err());
        assert!(WorkingParams::new(0.5, 0.5, -0.99).is_ok());
        let wp = WorkingParams::new(0.48, 0.5, 0.0).unwrap();
        assert!(wp.check_bias_window(DEFAULT_BIAS_WINDOW).is_err());
    }
}
