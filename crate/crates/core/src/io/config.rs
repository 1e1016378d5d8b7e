//! Run configuration: a sectioned TOML file with every key defaulted except
//! the device.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::DmOptions;
use crate::error::{Error, Result};
use crate::ita::{ItaOptions, PhotonAggregation};
use crate::model::{derive_scales, DeviceParams, ModelScales, WorkingParams};
use crate::spectro::{build_grid, Backend, SpectroOptions, DEFAULT_BASIS_STATES, DEFAULT_DOMINANCE_THRESHOLD};
use crate::sweep::{EvalContext, Method, SweepAxis, SweepSpec, WpAxis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    /// H.
    pub inductance: f64,
    /// F.
    pub capacitance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_l: Option<f64>,
    /// A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_current: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub window: [f64; 2],
    pub points: usize,
    pub states: usize,
    pub backend: Backend,
    pub basis_states: usize,
    pub dominance_threshold: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let d = SpectroOptions::default();
        GridSection {
            window: [d.grid.lower, d.grid.upper],
            points: d.grid.points,
            states: d.states,
            backend: d.backend,
            basis_states: DEFAULT_BASIS_STATES,
            dominance_threshold: DEFAULT_DOMINANCE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    pub x_m0: f64,
    pub photon_aggregation: PhotonAggregation,
    pub max_photons: u32,
    /// Cap on the π-pulse duration, 1/ω_LC units.
    pub max_duration: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        let ita = ItaOptions::default();
        DriveSection {
            x_m0: 2e-4,
            photon_aggregation: ita.photon_aggregation,
            max_photons: ita.max_photons,
            max_duration: DmOptions::default().max_duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub x_e1: f64,
    pub x_e2: f64,
    pub kappa: f64,
    pub outer_axis: WpAxis,
    pub outer_min: f64,
    pub outer_max: f64,
    pub outer_count: usize,
    /// Empty string for a line sweep.
    pub inner_axis: String,
    pub inner_min: f64,
    pub inner_max: f64,
    pub inner_count: usize,
    /// Evaluator used by `optimize`.
    pub method: MethodName,
    /// Initial simplex size in grid spacings.
    pub refine_radius: f64,
    pub refine_evaluations: usize,
    pub refine_tolerance: f64,
    /// Working points timed by `bench`, as [x_e1, x_e2, kappa].
    pub bench_points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Ita,
    Dm,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Ita => Method::Ita,
            MethodName::Dm => Method::Dm,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            x_e1: 0.499,
            x_e2: 0.49985,
            kappa: 5e-4,
            outer_axis: WpAxis::XE2,
            outer_min: 0.4985,
            outer_max: 0.5,
            outer_count: 20,
            inner_axis: "kappa".into(),
            inner_min: 1e-4,
            inner_max: 2e-3,
            inner_count: 20,
            method: MethodName::Ita,
            refine_radius: 0.5,
            refine_evaluations: 200,
            refine_tolerance: 1e-6,
            bench_points: vec![[0.499, 0.49985, 5e-4], [0.499, 0.49897, 5e-4], [0.499, 0.4997, 7.5e-4]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmSection {
    pub step_divisor: f64,
    pub max_refinements: u32,
    pub halving_tolerance: f64,
    pub norm_tolerance: f64,
    /// Store every n-th step of an `evolve` trace.
    pub sample_every: usize,
    /// Re-run with extra retained states and report the population change.
    pub truncation_check: bool,
    pub truncation_extra: usize,
    /// Points per axis for `dm-map`, spread evenly over the sweep grid; 0 uses every point.
    pub subsample: usize,
    /// Initial computational state for `evolve`.
    pub initial: String,
}

impl Default for DmSection {
    fn default() -> Self {
        let d = DmOptions::default();
        DmSection {
            step_divisor: d.step_divisor,
            max_refinements: d.max_refinements,
            halving_tolerance: d.halving_tolerance,
            norm_tolerance: d.norm_tolerance,
            sample_every: d.sample_every,
            truncation_check: false,
            truncation_extra: 10,
            subsample: 5,
            initial: "10".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    /// Significant digits for CSV floats; 0 writes the shortest round-trip form.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: "out".into(), precision: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub dm: DmSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn check(ok: bool, key: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, reason()))
    }
}

/// Re-labels a parameter error with its config key.
fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => Error::config(key, reason),
        Error::Grid(reason) => Error::config(key, reason),
        other => other,
    })
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let key = e.span().map_or_else(String::new, |s| text[s].trim().to_string());
            Error::config(if key.is_empty() { "<file>".to_string() } else { key }, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse_str(&text)
    }

    /// Full config with every default written out.
    pub fn normalized(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.device_params()?;
        keyed("grid", build_grid((self.grid.window[0], self.grid.window[1]), self.grid.points))?;
        check(self.grid.points.is_multiple_of(2), "grid.points", || format!("must be even, got {}", self.grid.points))?;
        check(self.grid.states >= 4, "grid.states", || format!("need at least 4 states, got {}", self.grid.states))?;
        check(
            self.grid.basis_states >= 2 && self.grid.basis_states <= self.grid.points,
            "grid.basis_states",
            || format!("must lie in [2, grid.points], got {}", self.grid.basis_states),
        )?;
        if self.grid.backend == Backend::Product {
            let dim = self.grid.basis_states * self.grid.basis_states;
            check(self.grid.states <= dim, "grid.states", || {
                format!("{} states exceed the product basis size {dim}", self.grid.states)
            })?;
        }
        check(
            self.grid.dominance_threshold > 0.0 && self.grid.dominance_threshold <= 1.0,
            "grid.dominance_threshold",
            || format!("must lie in (0, 1], got {}", self.grid.dominance_threshold),
        )?;
        check(self.drive.x_m0 > 0.0 && self.drive.x_m0.is_finite(), "drive.x_m0", || {
            format!("must be positive, got {}", self.drive.x_m0)
        })?;
        check((1..=3).contains(&self.drive.max_photons), "drive.max_photons", || {
            format!("must be 1, 2 or 3, got {}", self.drive.max_photons)
        })?;
        check(self.drive.max_duration > 0.0, "drive.max_duration", || {
            format!("must be positive, got {}", self.drive.max_duration)
        })?;
        keyed("sweep", self.base_wp())?;
        keyed("sweep", self.sweep_spec())?;
        check(self.sweep.refine_radius > 0.0, "sweep.refine_radius", || "must be positive".into())?;
        check(self.sweep.refine_evaluations >= 4, "sweep.refine_evaluations", || "must be at least 4".into())?;
        check(self.sweep.refine_tolerance > 0.0, "sweep.refine_tolerance", || "must be positive".into())?;
        for (i, p) in self.sweep.bench_points.iter().enumerate() {
            keyed("sweep.bench_points", WorkingParams::new(p[0], p[1], p[2]))
                .map_err(|e| Error::config(format!("sweep.bench_points[{i}]"), e.to_string()))?;
        }
        check(self.dm.step_divisor >= 4.0, "dm.step_divisor", || format!("must be at least 4, got {}", self.dm.step_divisor))?;
        check(self.dm.halving_tolerance > 0.0, "dm.halving_tolerance", || "must be positive".into())?;
        check(self.dm.norm_tolerance > 0.0, "dm.norm_tolerance", || "must be positive".into())?;
        check(self.dm.sample_every >= 1, "dm.sample_every", || "must be at least 1".into())?;
        check(self.dm.subsample != 1, "dm.subsample", || "use 0 (all points) or at least 2".into())?;
        keyed("dm.initial", self.dm.initial.parse::<crate::spectro::CompState>())?;
        check(self.output.precision <= 17, "output.precision", || "at most 17 significant digits".into())?;
        Ok(())
    }

    pub fn device_params(&self) -> Result<DeviceParams> {
        let d = &self.device;
        keyed("device", DeviceParams::from_parts(d.inductance, d.capacitance, d.beta_l, d.critical_current))
    }

    pub fn scales(&self) -> Result<ModelScales> {
        keyed("device", derive_scales(&self.device_params()?))
    }

    pub fn base_wp(&self) -> Result<WorkingParams> {
        WorkingParams::new(self.sweep.x_e1, self.sweep.x_e2, self.sweep.kappa)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let s = &self.sweep;
        let mut axes = vec![keyed("sweep.outer", SweepAxis::linspace(s.outer_axis, s.outer_min, s.outer_max, s.outer_count))?];
        if !s.inner_axis.is_empty() {
            let param: WpAxis = keyed("sweep.inner_axis", s.inner_axis.parse())?;
            axes.push(keyed("sweep.inner", SweepAxis::linspace(param, s.inner_min, s.inner_max, s.inner_count))?);
        }
        keyed("sweep", SweepSpec::new(self.base_wp()?, axes))
    }

    pub fn spectro_options(&self) -> SpectroOptions {
        SpectroOptions {
            grid: build_grid((self.grid.window[0], self.grid.window[1]), self.grid.points).expect("validated"),
            states: self.grid.states,
            backend: self.grid.backend,
            basis_states: self.grid.basis_states,
            dominance_threshold: self.grid.dominance_threshold,
        }
    }

    pub fn ita_options(&self) -> ItaOptions {
        ItaOptions { photon_aggregation: self.drive.photon_aggregation, max_photons: self.drive.max_photons }
    }

    pub fn dm_options(&self) -> DmOptions {
        DmOptions {
            step_divisor: self.dm.step_divisor,
            max_refinements: self.dm.max_refinements,
            halving_tolerance: self.dm.halving_tolerance,
            norm_tolerance: self.dm.norm_tolerance,
            max_duration: self.drive.max_duration,
            sample_every: self.dm.sample_every,
        }
    }

    pub fn eval_context(&self) -> Result<EvalContext> {
        Ok(EvalContext {
            scales: self.scales()?,
            spectro: self.spectro_options(),
            ita: self.ita_options(),
            dm: self.dm_options(),
            amplitude: self.drive.x_m0,
        })
    }

    pub fn bench_points(&self) -> Vec<WorkingParams> {
        self.sweep.bench_points.iter().map(|p| WorkingParams { x_e1: p[0], x_e2: p[1], kappa: p[2] }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[device]\ninductance = 100e-12\ncapacitance = 40e-15\nbeta_l = 1.2\n";

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::parse_str(MINIMAL).unwrap();
        assert_eq!(c.grid.points, 64);
        assert_eq!(c.grid.states, 20);
        assert_eq!(c.drive.x_m0, 2e-4);
        assert_eq!(c.grid.backend, Backend::Product);
        assert_eq!(c.sweep_spec().unwrap().shape(), (20, 20));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse_str(&format!("{MINIMAL}[devics]\nx = 1\n")).unwrap_err();
        assert!(err.to_string().contains("devics"), "{err}");
        let err = RunConfig::parse_str(&format!("{MINIMAL}[grid]\npoitns = 64\n")).unwrap_err();
        assert!(err.to_string().contains("poitns"), "{err}");
        assert!(err.is_configuration());
    }

    #[test]
    fn inconsistent_critical_current() {
        let text = format!("{MINIMAL}critical_current = 1e-6\n");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err.to_string().contains("device"), "{err}");
    }

    #[test]
    fn out_of_range_values() {
        for extra in ["[grid]\npoints = 8\n", "[grid]\npoints = 65\n", "[drive]\nx_m0 = -1.0\n", "[sweep]\nkappa = 1.5\n", "[dm]\ninitial = \"2\"\n"] {
            let err = RunConfig::parse_str(&format!("{MINIMAL}{extra}")).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{extra}: {err:?}");
        }
    }

    #[test]
    fn normalisation_is_a_fixed_point() {
        let c = RunConfig::parse_str(MINIMAL).unwrap();
        let once = c.normalized();
        let again = RunConfig::parse_str(&once).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.normalized(), once);
    }

    #[test]
    fn missing_file() {
        let err = RunConfig::from_path(Path::new("/nonexistent/run.cfg")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
