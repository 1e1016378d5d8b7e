//! Agreement statistics between two leakage maps on the same grid.

use serde::{Deserialize, Serialize};

use super::LeakageMap;
use crate::error::{Error, Result};
use crate::model::WorkingParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapComparison {
    /// (point, η_a, η_b) for points unflagged in both maps.
    pub pairs: Vec<(WorkingParams, f64, f64)>,
    /// Points dropped because either map flagged them.
    pub excluded: usize,
    /// Spearman ρ; `None` when either side is constant.
    pub rank_correlation: Option<f64>,
    /// Fraction of point pairs ordered the same way by both maps.
    pub ordering_agreement: Option<f64>,
    /// Statistics of |log₁₀(η_a/η_b)| over pairs with both η > 0.
    pub max_abs_log_ratio: Option<f64>,
    pub median_abs_log_ratio: Option<f64>,
    /// Signed mean of log₁₀(η_a/η_b).
    pub mean_log_ratio: Option<f64>,
}

fn same_grid(a: &LeakageMap, b: &LeakageMap) -> Result<()> {
    let sa = &a.spec;
    let sb = &b.spec;
    if sa.axes.len() != sb.axes.len() || a.points.len() != b.points.len() {
        return Err(Error::GridMismatch(format!("shapes {:?} and {:?}", a.shape(), b.shape())));
    }
    for (x, y) in sa.axes.iter().zip(&sb.axes) {
        if x.param != y.param || x.len() != y.len() {
            return Err(Error::GridMismatch(format!("axis {} ({}) vs {} ({})", x.param.name(), x.len(), y.param.name(), y.len())));
        }
        for (u, v) in x.values.iter().zip(&y.values) {
            if (u - v).abs() > 1e-12 * u.abs().max(v.abs()).max(1e-300) {
                return Err(Error::GridMismatch(format!("axis {} value {u} vs {v}", x.param.name())));
            }
        }
    }
    Ok(())
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let mean = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            r[i] = mean;
        }
        start = end;
    }
    r
}

/// Spearman rank correlation; `None` if fewer than two points or a side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let mean = (n + 1) as f64 / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - mean) * (y - mean);
        saa += (x - mean) * (x - mean);
        sbb += (y - mean) * (y - mean);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

fn ordering_agreement(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if a[i].total_cmp(&a[j]) == b[i].total_cmp(&b[j]) {
                agree += 1;
            }
        }
    }
    Some(agree as f64 / total as f64)
}

pub fn compare_maps(a: &LeakageMap, b: &LeakageMap) -> Result<MapComparison> {
    same_grid(a, b)?;
    let pairs: Vec<(WorkingParams, f64, f64)> = a
        .points
        .iter()
        .zip(&b.points)
        .filter(|(p, q)| p.is_ok() && q.is_ok())
        .map(|(p, q)| (p.wp, p.eta, q.eta))
        .collect();
    let excluded = a.points.len() - pairs.len();
    let ea: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let eb: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let mut logs: Vec<f64> = pairs.iter().filter(|p| p.1 > 0.0 && p.2 > 0.0).map(|p| (p.1 / p.2).log10()).collect();
    let mean_log_ratio = (!logs.is_empty()).then(|| logs.iter().sum::<f64>() / logs.len() as f64);
    for l in logs.iter_mut() {
        *l = l.abs();
    }
    logs.sort_by(f64::total_cmp);
    let median_abs_log_ratio = (!logs.is_empty()).then(|| {
        let m = logs.len();
        if m % 2 == 1 {
            logs[m / 2]
        } else {
            0.5 * (logs[m / 2 - 1] + logs[m / 2])
        }
    });
    Ok(MapComparison {
        rank_correlation: spearman(&ea, &eb),
        ordering_agreement: ordering_agreement(&ea, &eb),
        max_abs_log_ratio: logs.last().copied(),
        median_abs_log_ratio,
        mean_log_ratio,
        pairs,
        excluded,
    })
}
