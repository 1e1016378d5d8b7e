//! Working-parameter sweeps, local refinement and map comparison.

mod compare;
mod refine;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare_maps, spearman, MapComparison};
pub use refine::{nelder_mead, refine_map_minimum, OptimalWP, RefineOptions, RefineResult, RefineStatus};

use crate::dynamics::{cnot_dm_leakage, DmOptions};
use crate::error::{Error, Result};
use crate::ita::{cnot_gate_leakage, GateLeakage, ItaOptions};
use crate::model::{ModelScales, WorkingParams};
use crate::spectro::{level_row, solve_coupled, LevelRow, SpectroOptions, SpectroTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WpAxis {
    XE1,
    XE2,
    Kappa,
}

impl WpAxis {
    pub fn name(self) -> &'static str {
        match self {
            WpAxis::XE1 => "x_e1",
            WpAxis::XE2 => "x_e2",
            WpAxis::Kappa => "kappa",
        }
    }

    pub fn get(self, wp: &WorkingParams) -> f64 {
        match self {
            WpAxis::XE1 => wp.x_e1,
            WpAxis::XE2 => wp.x_e2,
            WpAxis::Kappa => wp.kappa,
        }
    }

    pub fn set(self, wp: &mut WorkingParams, v: f64) {
        match self {
            WpAxis::XE1 => wp.x_e1 = v,
            WpAxis::XE2 => wp.x_e2 = v,
            WpAxis::Kappa => wp.kappa = v,
        }
    }
}

impl std::str::FromStr for WpAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x_e1" => Ok(WpAxis::XE1),
            "x_e2" => Ok(WpAxis::XE2),
            "kappa" => Ok(WpAxis::Kappa),
            other => Err(Error::config("sweep axis", format!("expected x_e1, x_e2 or kappa, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: WpAxis,
    /// Ascending grid values.
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn linspace(param: WpAxis, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("count", format!("axis {} needs at least 2 points, got {count}", param.name())));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid("range", format!("axis {} needs min < max, got [{min}, {max}]", param.name())));
        }
        let step = (max - min) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|i| min + step * i as f64).collect();
        values[count - 1] = max;
        Ok(SweepAxis { param, values })
    }

    pub fn explicit(param: WpAxis, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("values", format!("axis {} needs finite ascending values", param.name())));
        }
        Ok(SweepAxis { param, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.values[0], self.values[self.values.len() - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ITA")]
    Ita,
    #[serde(rename = "DM")]
    Dm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ita => "ITA",
            Method::Dm => "DM",
        }
    }
}

/// Rectangular grid over one or two working parameters; the first axis is outer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Values of the parameters that are not swept.
    pub base: WorkingParams,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    pub fn new(base: WorkingParams, axes: Vec<SweepAxis>) -> Result<Self> {
        let spec = SweepSpec { base, axes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::invalid("axes", format!("need 1 or 2 swept axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::invalid("axes", format!("axis {} given twice", self.axes[0].param.name())));
        }
        for p in self.points() {
            p.validate()?;
        }
        Ok(())
    }

    /// (outer, inner) counts; inner is 1 for a line sweep.
    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].len(), self.axes.get(1).map_or(1, SweepAxis::len))
    }

    /// Grid points, outer axis ascending then inner axis ascending.
    pub fn points(&self) -> Vec<WorkingParams> {
        let mut out = Vec::new();
        for &a in &self.axes[0].values {
            let mut wp = self.base;
            self.axes[0].param.set(&mut wp, a);
            match self.axes.get(1) {
                Some(inner) => {
                    for &b in &inner.values {
                        let mut q = wp;
                        inner.param.set(&mut q, b);
                        out.push(q);
                    }
                }
                None => out.push(wp),
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything a point evaluation needs besides the working point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalContext {
    pub scales: ModelScales,
    pub spectro: SpectroOptions,
    pub ita: ItaOptions,
    pub dm: DmOptions,
    pub amplitude: f64,
}

impl EvalContext {
    pub fn new(scales: ModelScales, amplitude: f64) -> Self {
        EvalContext {
            scales,
            spectro: SpectroOptions::default(),
            ita: ItaOptions::default(),
            dm: DmOptions::default(),
            amplitude,
        }
    }

    pub fn table(&self, wp: &WorkingParams) -> Result<SpectroTable> {
        solve_coupled(&self.scales, wp, &self.spectro)
    }

    /// Gate leakage from an existing table, plus a note when the DM pulse was capped.
    pub fn leakage_from_table(&self, method: Method, table: &SpectroTable) -> Result<(GateLeakage, Option<String>)> {
        match method {
            Method::Ita => Ok((cnot_gate_leakage(table, self.amplitude, &self.ita)?, None)),
            Method::Dm => {
                let r = cnot_dm_leakage(table, self.amplitude, &self.dm)?;
                let note = r.pulse.capped.then(|| format!("duration capped at {}", self.dm.max_duration));
                Ok((r.leakage, note))
            }
        }
    }

    pub fn leakage(&self, method: Method, wp: &WorkingParams) -> Result<(GateLeakage, Option<String>)> {
        self.leakage_from_table(method, &self.table(wp)?)
    }

    /// Evaluates one point, turning failures into a flagged η = 1 result.
    pub fn evaluate(&self, method: Method, wp: &WorkingParams) -> PointResult {
        let start = Instant::now();
        let (eta, components, flag) = match self.leakage(method, wp) {
            Ok((g, note)) => (g.eta, g.component_etas(), note),
            Err(e) => (1.0, [1.0; 4], Some(e.to_string())),
        };
        PointResult { wp: *wp, eta, components, flag, seconds: start.elapsed().as_secs_f64() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub wp: WorkingParams,
    pub eta: f64,
    /// η for |00⟩, |01⟩, |10⟩, |11⟩.
    pub components: [f64; 4],
    pub flag: Option<String>,
    /// Wall time of the evaluation.
    pub seconds: f64,
}

impl PointResult {
    pub fn is_ok(&self) -> bool {
        self.flag.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    pub amplitude: f64,
    pub config_hash: Option<String>,
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageMap {
    pub spec: SweepSpec,
    /// Row-major in sweep order.
    pub points: Vec<PointResult>,
    pub provenance: Provenance,
}

impl LeakageMap {
    pub fn shape(&self) -> (usize, usize) {
        self.spec.shape()
    }

    pub fn at(&self, outer: usize, inner: usize) -> &PointResult {
        &self.points[outer * self.shape().1 + inner]
    }

    /// Lowest unflagged point; the first in sweep order wins ties.
    pub fn minimum(&self) -> Option<&PointResult> {
        self.points.iter().filter(|p| p.is_ok()).fold(None, |best: Option<&PointResult>, p| match best {
            Some(b) if b.eta <= p.eta => Some(b),
            _ => Some(p),
        })
    }

    /// Map restricted to the given outer/inner grid indices.
    pub fn subgrid(&self, outer: &[usize], inner: &[usize]) -> Result<LeakageMap> {
        let pick = |axis: &SweepAxis, idx: &[usize]| -> Result<SweepAxis> {
            let values = idx
                .iter()
                .map(|&i| axis.values.get(i).copied().ok_or_else(|| Error::invalid("subgrid", format!("index {i} out of range"))))
                .collect::<Result<Vec<_>>>()?;
            SweepAxis::explicit(axis.param, values)
        };
        let mut axes = vec![pick(&self.spec.axes[0], outer)?];
        let inner_idx: Vec<usize> = match self.spec.axes.get(1) {
            Some(a) => {
                axes.push(pick(a, inner)?);
                inner.to_vec()
            }
            None => vec![0],
        };
        let points = outer
            .iter()
            .flat_map(|&o| inner_idx.iter().map(move |&i| (o, i)))
            .map(|(o, i)| self.at(o, i).clone())
            .collect();
        Ok(LeakageMap { spec: SweepSpec { base: self.spec.base, axes }, points, provenance: self.provenance.clone() })
    }
}

/// `count` indices spread evenly over `0..len`, ends included.
pub fn even_indices(len: usize, count: usize) -> Vec<usize> {
    if count <= 1 || len <= 1 {
        return vec![0];
    }
    let mut v: Vec<usize> = (0..count).map(|i| ((i * (len - 1)) as f64 / (count - 1) as f64).round() as usize).collect();
    v.dedup();
    v
}

fn run_parallel<T, R, F>(threads: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Applies the evaluator at every grid point. Failures never abort the sweep.
pub fn sweep(ctx: &EvalContext, method: Method, spec: &SweepSpec, threads: usize) -> Result<LeakageMap> {
    spec.validate()?;
    let start = Instant::now();
    let points = run_parallel(threads, &spec.points(), |wp| ctx.evaluate(method, wp))?;
    Ok(LeakageMap {
        spec: spec.clone(),
        points,
        provenance: Provenance {
            method,
            amplitude: ctx.amplitude,
            config_hash: None,
            wall_seconds: start.elapsed().as_secs_f64(),
            threads: threads.max(1),
        },
    })
}

pub fn ita_leakage_map(ctx: &EvalContext, spec: &SweepSpec, threads: usize) -> Result<LeakageMap> {
    sweep(ctx, Method::Ita, spec, threads)
}

pub fn dm_leakage_map(ctx: &EvalContext, spec: &SweepSpec, threads: usize) -> Result<LeakageMap> {
    sweep(ctx, Method::Dm, spec, threads)
}

pub fn level_spacing_map(
    s: &ModelScales,
    opts: &SpectroOptions,
    spec: &SweepSpec,
    threads: usize,
) -> Result<Vec<LevelRow>> {
    spec.validate()?;
    run_parallel(threads, &spec.points(), |wp| level_row(s, wp, opts))
}
