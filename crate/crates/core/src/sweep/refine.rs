//! Derivative-free local refinement of a map minimum.

use serde::{Deserialize, Serialize};

use super::{EvalContext, LeakageMap, Method, WpAxis};
use crate::error::{Error, Result};
use crate::model::WorkingParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub max_evaluations: usize,
    /// Stop once every simplex vertex is this close to the best one, per axis.
    pub tolerance: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { max_evaluations: 200, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineStatus {
    Converged,
    EvaluationLimit,
    /// No evaluable point around the seed; the seed is returned.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Every evaluated point in order, with `None` for failed evaluations.
    pub trajectory: Vec<(Vec<f64>, Option<f64>)>,
    pub status: RefineStatus,
}

/// Nelder–Mead simplex descent. `f` returns `None` where the objective is
/// undefined; such points are treated as infinitely bad.
///
/// The result is never worse than `seed_value`.
pub fn nelder_mead<F>(mut f: F, seed: &[f64], seed_value: f64, radius: &[f64], opts: &RefineOptions) -> RefineResult
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let n = seed.len();
    let mut trajectory = vec![(seed.to_vec(), Some(seed_value))];
    let mut eval = |x: &[f64], trajectory: &mut Vec<(Vec<f64>, Option<f64>)>| {
        let v = f(x).filter(|v| v.is_finite());
        trajectory.push((x.to_vec(), v));
        v.unwrap_or(f64::INFINITY)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(seed.to_vec(), seed_value)];
    for i in 0..n {
        let mut x = seed.to_vec();
        x[i] += radius[i];
        let v = eval(&x, &mut trajectory);
        simplex.push((x, v));
    }
    if simplex[1..].iter().all(|(_, v)| v.is_infinite()) {
        return RefineResult { point: seed.to_vec(), value: seed_value, trajectory, status: RefineStatus::Failed };
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let status = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < opts.tolerance {
            break RefineStatus::Converged;
        }
        if trajectory.len() - 1 + n + 2 > opts.max_evaluations {
            break RefineStatus::EvaluationLimit;
        }
        let centroid: Vec<f64> =
            (0..n).map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64).collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (worst[d] - centroid[d])).collect() };
        let worst = simplex[n].0.clone();
        let xr = along(-alpha, &worst);
        let fr = eval(&xr, &mut trajectory);
        if fr < simplex[0].1 {
            let xe = along(-gamma, &worst);
            let fe = eval(&xe, &mut trajectory);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-rho, &worst);
                let fc = eval(&xc, &mut trajectory);
                (xc, fc)
            } else {
                let xc = along(rho, &worst);
                let fc = eval(&xc, &mut trajectory);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                for i in 1..=n {
                    let x: Vec<f64> = (0..n).map(|d| best[d] + sigma * (simplex[i].0[d] - best[d])).collect();
                    let v = eval(&x, &mut trajectory);
                    simplex[i] = (x, v);
                }
            }
        }
    };
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = if simplex[0].1 < seed_value { simplex[0].clone() } else { (seed.to_vec(), seed_value) };
    RefineResult { point, value, trajectory, status }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalWP {
    pub wp: WorkingParams,
    pub eta: f64,
    pub seed: WorkingParams,
    pub seed_eta: f64,
    pub method: Method,
    pub axes: Vec<WpAxis>,
    /// Evaluated points with their η; `None` marks failed evaluations.
    pub trajectory: Vec<(WorkingParams, Option<f64>)>,
    pub status: RefineStatus,
}

/// Refines the lowest unflagged point of `map` over its swept axes, staying
/// inside the map window. `radius` is the initial simplex size as a fraction
/// of one grid spacing along each axis.
pub fn refine_map_minimum(ctx: &EvalContext, map: &LeakageMap, radius: f64, opts: &RefineOptions) -> Result<OptimalWP> {
    let method = map.provenance.method;
    let seed_point = map
        .minimum()
        .ok_or_else(|| Error::invalid("map", "every point is flagged; nothing to refine".to_string()))?;
    let seed_wp = seed_point.wp;
    let axes: Vec<WpAxis> = map.spec.axes.iter().map(|a| a.param).collect();
    let bounds: Vec<(f64, f64)> = map.spec.axes.iter().map(|a| a.bounds()).collect();
    let steps: Vec<f64> = map
        .spec
        .axes
        .iter()
        .map(|a| if a.len() > 1 { (a.bounds().1 - a.bounds().0) / (a.len() - 1) as f64 } else { 1e-4 })
        .collect();
    let to_wp = |x: &[f64]| {
        let mut wp = seed_wp;
        for (axis, v) in axes.iter().zip(x) {
            axis.set(&mut wp, *v);
        }
        wp
    };
    let seed: Vec<f64> = axes.iter().map(|a| a.get(&seed_wp)).collect();
    // step towards the interior so the first simplex stays in the window
    let radius: Vec<f64> = seed
        .iter()
        .zip(&bounds)
        .zip(&steps)
        .map(|((s, (lo, hi)), h)| {
            let r = radius * h;
            if s + r > *hi && s - r >= *lo {
                -r
            } else {
                r
            }
        })
        .collect();
    let objective = |x: &[f64]| -> Option<f64> {
        if x.iter().zip(&bounds).any(|(v, (lo, hi))| v < lo || v > hi) {
            return None;
        }
        ctx.leakage(method, &to_wp(x)).ok().map(|(g, _)| g.eta)
    };
    let r = nelder_mead(objective, &seed, seed_point.eta, &radius, opts);
    Ok(OptimalWP {
        wp: to_wp(&r.point),
        eta: r.value,
        seed: seed_wp,
        seed_eta: seed_point.eta,
        method,
        axes: axes.clone(),
        trajectory: r.trajectory.iter().map(|(x, v)| (to_wp(x), *v)).collect(),
        status: r.status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let f = |x: &[f64]| Some(3.0 * (x[0] - 0.4997).powi(2) + 5.0 * (x[1] - 7.5e-4).powi(2) + 0.1 * (x[0] - 0.4997) * (x[1] - 7.5e-4));
        let seed = [0.4990, 1e-3];
        let r = nelder_mead(f, &seed, f(&seed).unwrap(), &[2e-4, 2e-4], &RefineOptions { max_evaluations: 400, tolerance: 1e-7 });
        assert_eq!(r.status, RefineStatus::Converged);
        assert!((r.point[0] - 0.4997).abs() < 1e-5 && (r.point[1] - 7.5e-4).abs() < 1e-5, "{:?}", r.point);
    }

    #[test]
    fn flat_seed_is_kept() {
        let f = |_: &[f64]| Some(1.0);
        let r = nelder_mead(f, &[0.2, 0.3], 1.0, &[1e-3, 1e-3], &RefineOptions::default());
        assert_eq!(r.point, vec![0.2, 0.3]);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn undefined_neighbourhood_fails() {
        let r = nelder_mead(|_| None, &[0.0], 0.5, &[0.1], &RefineOptions::default());
        assert_eq!(r.status, RefineStatus::Failed);
        assert_eq!(r.point, vec![0.0]);
    }

    #[test]
    fn never_worse_than_seed() {
        // seed value better than anything the objective can return
        let f = |x: &[f64]| Some(1.0 + x[0] * x[0]);
        let r = nelder_mead(f, &[0.5], 0.1, &[0.1], &RefineOptions::default());
        assert!(r.value <= 0.1);
    }

    #[test]
    fn respects_evaluation_budget() {
        let f = |x: &[f64]| Some((x[0] - 1.0).abs().sqrt() + (x[1] + 2.0).abs().sqrt());
        let opts = RefineOptions { max_evaluations: 30, tolerance: 1e-14 };
        let r = nelder_mead(f, &[0.0, 0.0], f(&[0.0, 0.0]).unwrap(), &[0.5, 0.5], &opts);
        assert_eq!(r.status, RefineStatus::EvaluationLimit);
        assert!(r.trajectory.len() <= 31);
    }
}
