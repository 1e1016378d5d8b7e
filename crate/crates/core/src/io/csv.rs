//! Deterministic CSV emission and the map reader used by `compare`.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{BenchmarkReport, TdseResult};
use crate::error::{Error, Result};
use crate::model::WorkingParams;
use crate::spectro::{LevelRow, SpectroTable, SPACING_PAIRS};
use crate::sweep::{LeakageMap, Method, OptimalWP, PointResult, Provenance, SweepAxis, SweepSpec, WpAxis};

/// Shortest representation that parses back to the same value; exponent
/// form for very small or large magnitudes.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Float formatting with a fixed number of significant digits, or the
/// shortest round-trip form when `precision` is 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloatFormat {
    pub precision: usize,
}

impl FloatFormat {
    pub fn fmt(&self, x: f64) -> String {
        if self.precision == 0 || !x.is_finite() {
            fmt_float(x)
        } else {
            fmt_float(format!("{:.*e}", self.precision - 1, x).parse().expect("formatted float parses"))
        }
    }
}

/// A header and rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        CsvTable { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn emit_csv(table: &CsvTable, path: &Path) -> Result<()> {
    write_text(path, &table.render())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })
}

/// Flags must not break the CSV layout.
fn clean_flag(flag: &Option<String>) -> String {
    flag.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";")
}

fn wp_cells(wp: &WorkingParams, f: FloatFormat) -> Vec<String> {
    vec![f.fmt(wp.x_e1), f.fmt(wp.x_e2), f.fmt(wp.kappa)]
}

pub const MAP_HEADER: [&str; 9] = ["x_e1", "x_e2", "kappa", "eta", "eta_00", "eta_01", "eta_10", "eta_11", "flag"];

pub fn leakage_map_table(map: &LeakageMap, f: FloatFormat) -> CsvTable {
    let mut t = CsvTable::new(MAP_HEADER.iter().map(|s| s.to_string()).collect());
    for p in &map.points {
        let mut row = wp_cells(&p.wp, f);
        row.push(f.fmt(p.eta));
        row.extend(p.components.iter().map(|&c| f.fmt(c)));
        row.push(clean_flag(&p.flag));
        t.push(row);
    }
    t
}

pub fn level_map_table(rows: &[LevelRow], states: usize, f: FloatFormat) -> CsvTable {
    let mut header: Vec<String> = vec!["x_e1".into(), "x_e2".into(), "kappa".into()];
    header.extend((1..=states).map(|n| format!("E_{n}")));
    header.extend(SPACING_PAIRS.iter().map(|(a, b)| format!("dE{a}{b}")));
    header.push("flag".into());
    let mut t = CsvTable::new(header);
    for r in rows {
        let mut row = wp_cells(&r.wp, f);
        row.extend((0..states).map(|n| f.fmt(r.energies.get(n).copied().unwrap_or(f64::NAN))));
        let spacings = r.spacings.unwrap_or([f64::NAN; 6]);
        row.extend(spacings.iter().map(|&d| f.fmt(d)));
        row.push(clean_flag(&r.flag));
        t.push(row);
    }
    t
}

pub fn spectrum_table(table: &SpectroTable, f: FloatFormat) -> CsvTable {
    let header = ["index", "energy", "label", "w_LL", "w_LH", "w_HL", "w_HH", "computational"];
    let mut t = CsvTable::new(header.iter().map(|s| s.to_string()).collect());
    let labels = table.labels();
    let comp = table.computational;
    for n in 0..table.states() {
        let tag = comp
            .and_then(|m| m.iter().position(|&i| i == n))
            .map(|q| ["00", "01", "10", "11"][q].to_string())
            .unwrap_or_default();
        let mut row = vec![(n + 1).to_string(), f.fmt(table.energies[n]), labels[n].name().to_string()];
        row.extend(table.well_weights[n].iter().map(|&w| f.fmt(w)));
        row.push(tag);
        t.push(row);
    }
    t
}

pub fn coupling_table(table: &SpectroTable, f: FloatFormat) -> CsvTable {
    let k = table.states();
    let mut header = vec!["row".to_string()];
    header.extend((1..=k).map(|n| format!("O_{n}")));
    let mut t = CsvTable::new(header);
    for m in 0..k {
        let mut row = vec![(m + 1).to_string()];
        row.extend((0..k).map(|n| f.fmt(table.coupling[(m, n)])));
        t.push(row);
    }
    t
}

pub fn trace_table(run: &TdseResult, f: FloatFormat) -> CsvTable {
    let k = run.final_amplitudes.len();
    let mut header = vec!["tau".to_string()];
    header.extend((1..=k).map(|n| format!("p_{n}")));
    let mut t = CsvTable::new(header);
    for (s, tau) in run.times.iter().enumerate() {
        let mut row = vec![f.fmt(*tau)];
        row.extend(run.amplitudes[s].iter().map(|c| f.fmt(c.norm_sqr())));
        t.push(row);
    }
    t
}

pub fn trajectory_table(opt: &OptimalWP, f: FloatFormat) -> CsvTable {
    let mut t = CsvTable::new(["step", "x_e1", "x_e2", "kappa", "eta"].iter().map(|s| s.to_string()).collect());
    for (i, (wp, eta)) in opt.trajectory.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(wp_cells(wp, f));
        row.push(eta.map_or_else(|| "NaN".to_string(), |e| f.fmt(e)));
        t.push(row);
    }
    t
}

pub fn bench_tables(report: &BenchmarkReport, f: FloatFormat) -> (CsvTable, CsvTable) {
    let header = ["tau_s", "tau_t", "tau_i", "tau_d", "ratio", "zeta", "qubits", "environment"];
    let mut summary = CsvTable::new(header.iter().map(|s| s.to_string()).collect());
    summary.push(vec![
        f.fmt(report.tau_s),
        f.fmt(report.tau_t),
        f.fmt(report.tau_i),
        f.fmt(report.tau_d),
        f.fmt(report.ratio),
        f.fmt(report.zeta),
        report.qubits.to_string(),
        report.environment.replace(',', ";"),
    ]);
    let mut samples = CsvTable::new(["x_e1", "x_e2", "kappa", "tau_s", "tau_t"].iter().map(|s| s.to_string()).collect());
    for s in &report.samples {
        let mut row = wp_cells(&s.wp, f);
        row.push(f.fmt(s.spectroscopy));
        row.push(f.fmt(s.evolution));
        samples.push(row);
    }
    (summary, samples)
}

fn parse_cell(s: &str, line: usize, path: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Io { path: path.to_string(), reason: format!("line {line}: `{s}`: {e}") })
}

/// Rebuilds a map from its CSV. The swept axes are the columns that vary;
/// the one changing fastest is the inner axis.
pub fn read_leakage_map(path: &Path, method: Method) -> Result<LeakageMap> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: name.clone(), reason: e.to_string() })?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != MAP_HEADER.join(",") {
        return Err(Error::Io { path: name, reason: format!("unexpected header `{header}`") });
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != MAP_HEADER.len() {
            return Err(Error::Io { path: name, reason: format!("line {}: expected {} cells", i + 2, MAP_HEADER.len()) });
        }
        let v = |k: usize| parse_cell(cells[k], i + 2, &name);
        let flag = (!cells[8].is_empty()).then(|| cells[8].to_string());
        points.push(PointResult {
            wp: WorkingParams { x_e1: v(0)?, x_e2: v(1)?, kappa: v(2)? },
            eta: v(3)?,
            components: [v(4)?, v(5)?, v(6)?, v(7)?],
            flag,
            seconds: 0.0,
        });
    }
    if points.is_empty() {
        return Err(Error::Io { path: name, reason: "map has no rows".into() });
    }
    let uniques = |axis: WpAxis| {
        let mut v: Vec<f64> = points.iter().map(|p| axis.get(&p.wp)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let mut varying: Vec<(WpAxis, Vec<f64>)> =
        [WpAxis::XE1, WpAxis::XE2, WpAxis::Kappa].into_iter().map(|a| (a, uniques(a))).filter(|(_, v)| v.len() > 1).collect();
    if varying.len() > 2 {
        return Err(Error::Io { path: name, reason: "more than two swept parameters".into() });
    }
    if varying.is_empty() {
        varying.push((WpAxis::XE2, vec![points[0].wp.x_e2]));
    }
    if varying.len() == 2 && points.len() > 1 && varying[0].0.get(&points[0].wp) != varying[0].0.get(&points[1].wp) {
        varying.swap(0, 1);
    }
    let axes = varying
        .into_iter()
        .map(|(a, v)| SweepAxis::explicit(a, v))
        .collect::<Result<Vec<_>>>()?;
    let spec = SweepSpec { base: points[0].wp, axes };
    if spec.len() != points.len() || spec.points().iter().zip(&points).any(|(a, b)| *a != b.wp) {
        return Err(Error::Io { path: name, reason: "rows do not form a rectangular grid in sweep order".into() });
    }
    Ok(LeakageMap {
        spec,
        points,
        provenance: Provenance { method, amplitude: f64::NAN, config_hash: None, wall_seconds: 0.0, threads: 1 },
    })
}

/// Structured text with one `key = value` per line.
pub fn key_values(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_floats() {
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(2e-4), "0.0002");
        assert_eq!(fmt_float(1.8538e-5), "1.8538e-5");
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(0.0), "0");
        for x in [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -7.25e-300, 0.49985] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(FloatFormat { precision: 3 }.fmt(0.123456), "0.123");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = CsvTable::new(vec!["a".into(), "b".into()]);
        assert_eq!(t.render(), "a,b\n");
    }
}
