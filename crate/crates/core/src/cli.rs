//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{
    benchmark_speedup, cnot_fidelity, cnot_pulse, evolve, basis_state, truncation_check, FidelityReport,
};
use crate::error::{Error, Result};
use crate::io::{
    bench_tables, config_hash, coupling_table, emit_csv, ensure_dir, fmt_float, key_values, leakage_map_table,
    level_map_table, read_leakage_map, spectrum_table, trace_table, trajectory_table, write_text, CsvTable, FloatFormat,
    ResultEnvelope, RunConfig,
};
use crate::spectro::{solve_spectrum, Backend, CompState};
use crate::sweep::{
    compare_maps, default_threads, even_indices, level_spacing_map, refine_map_minimum, sweep, LeakageMap, Method,
    RefineOptions, SweepAxis, SweepSpec,
};

#[derive(Debug, Parser)]
#[command(name = "squid-gate", version, about = "Leakage-optimised CNOT working points for coupled rf-SQUID qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `output.directory` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides `grid.backend`.
    #[arg(long, value_parser = ["full2d", "product"])]
    pub backend: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupled spectrum and drive matrix elements at the base working point.
    Spectrum(Common),
    /// Energies and computational level spacings over the sweep grid.
    LevelsMap(Common),
    /// ITA leakage map over the sweep grid.
    ItaMap(Common),
    /// DM leakage map over a subsample of the sweep grid.
    DmMap(Common),
    /// Population trace of one computational state under the CNOT pulse.
    Evolve(Common),
    /// CNOT gate fidelity at the base working point.
    Fidelity(Common),
    /// Sweep, then refine the best grid point.
    Optimize(Common),
    /// Agreement statistics between an ITA and a DM map.
    Compare(CompareArgs),
    /// ITA versus DM cost model from measured timings.
    Bench(Common),
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// ITA map CSV; defaults to `<out>/ita_map.csv`.
    #[arg(long)]
    pub ita: Option<PathBuf>,
    /// DM map CSV; defaults to `<out>/dm_map.csv`.
    #[arg(long)]
    pub dm: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                1
            } else {
                2
            }
        }
    }
}

struct Session {
    cfg: RunConfig,
    out: PathBuf,
    threads: usize,
    format: FloatFormat,
    started: Instant,
}

impl Session {
    fn open(c: &Common) -> Result<Self> {
        let mut cfg = RunConfig::from_path(&c.config)?;
        if let Some(b) = &c.backend {
            cfg.grid.backend = b.parse::<Backend>()?;
            cfg.validate()?;
        }
        if c.threads == Some(0) {
            return Err(Error::config("--threads", "must be at least 1"));
        }
        let out = c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
        ensure_dir(&out)?;
        Ok(Session {
            threads: c.threads.unwrap_or_else(default_threads),
            format: FloatFormat { precision: cfg.output.precision },
            cfg,
            out,
            started: Instant::now(),
        })
    }

    fn csv(&self, env: &mut ResultEnvelope, name: &str, table: &CsvTable) -> Result<()> {
        emit_csv(table, &self.out.join(name))?;
        env.outputs.push(name.to_string());
        Ok(())
    }

    fn text(&self, env: &mut ResultEnvelope, name: &str, text: &str) -> Result<()> {
        write_text(&self.out.join(name), text)?;
        env.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(&self, mut env: ResultEnvelope) -> Result<()> {
        env.wall_seconds = self.started.elapsed().as_secs_f64();
        let path = env.write(&self.out)?;
        println!("wrote {} ({})", path.display(), env.outputs.join(", "));
        Ok(())
    }

    fn envelope(&self, command: &str, method: &str) -> ResultEnvelope {
        ResultEnvelope::new(command, method, &self.cfg)
    }

    fn hashed(&self, mut map: LeakageMap) -> LeakageMap {
        map.provenance.config_hash = Some(config_hash(&self.cfg.normalized()));
        map
    }
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Spectrum(c) => cmd_spectrum(&Session::open(c)?),
        Command::LevelsMap(c) => cmd_levels_map(&Session::open(c)?),
        Command::ItaMap(c) => cmd_map(&Session::open(c)?, Method::Ita),
        Command::DmMap(c) => cmd_map(&Session::open(c)?, Method::Dm),
        Command::Evolve(c) => cmd_evolve(&Session::open(c)?),
        Command::Fidelity(c) => cmd_fidelity(&Session::open(c)?),
        Command::Optimize(c) => cmd_optimize(&Session::open(c)?),
        Command::Compare(a) => cmd_compare(&Session::open(&a.common)?, a.ita.as_deref(), a.dm.as_deref()),
        Command::Bench(c) => cmd_bench(&Session::open(c)?),
    }
}

fn cmd_spectrum(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let wp = s.cfg.base_wp()?;
    let table = solve_spectrum(&ctx.scales, &wp, &ctx.spectro)?;
    let mut env = s.envelope("spectrum", "spectro");
    s.csv(&mut env, "spectrum.csv", &spectrum_table(&table, s.format))?;
    s.csv(&mut env, "coupling.csv", &coupling_table(&table, s.format))?;
    match table.computational {
        Some(m) => println!(
            "computational states |00>,|01>,|10>,|11> = levels {:?}; dE34 = {}",
            m.map(|i| i + 1),
            fmt_float(table.cnot_frequency()?)
        ),
        None => println!("computational basis undefined at this working point"),
    }
    s.finish(env)
}

fn cmd_levels_map(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let spec = s.cfg.sweep_spec()?;
    let rows = level_spacing_map(&ctx.scales, &ctx.spectro, &spec, s.threads)?;
    let mut env = s.envelope("levels-map", "spectro");
    s.csv(&mut env, "levels_map.csv", &level_map_table(&rows, ctx.spectro.states, s.format))?;
    let flagged = rows.iter().filter(|r| r.flag.is_some()).count();
    println!("{} rows, {} flagged", rows.len(), flagged);
    s.finish(env)
}

/// Sweep grid thinned to `count` points per axis.
fn subsampled(spec: &SweepSpec, count: usize) -> Result<SweepSpec> {
    if count == 0 {
        return Ok(spec.clone());
    }
    let axes = spec
        .axes
        .iter()
        .map(|a| SweepAxis::explicit(a.param, even_indices(a.len(), count).into_iter().map(|i| a.values[i]).collect()))
        .collect::<Result<Vec<_>>>()?;
    SweepSpec::new(spec.base, axes)
}

fn describe_minimum(map: &LeakageMap) -> String {
    match map.minimum() {
        Some(p) => format!(
            "minimum eta = {} at x_e1 = {}, x_e2 = {}, kappa = {}",
            fmt_float(p.eta),
            fmt_float(p.wp.x_e1),
            fmt_float(p.wp.x_e2),
            fmt_float(p.wp.kappa)
        ),
        None => "every point flagged".to_string(),
    }
}

fn cmd_map(s: &Session, method: Method) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let mut spec = s.cfg.sweep_spec()?;
    if method == Method::Dm {
        spec = subsampled(&spec, s.cfg.dm.subsample)?;
    }
    let map = s.hashed(sweep(&ctx, method, &spec, s.threads)?);
    let (name, file) = match method {
        Method::Ita => ("ita-map", "ita_map.csv"),
        Method::Dm => ("dm-map", "dm_map.csv"),
    };
    let mut env = s.envelope(name, method.name());
    s.csv(&mut env, file, &leakage_map_table(&map, s.format))?;
    let flagged = map.points.iter().filter(|p| !p.is_ok()).count();
    println!("{} points, {} flagged; {}", map.points.len(), flagged, describe_minimum(&map));
    s.finish(env)
}

fn cmd_evolve(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let table = ctx.table(&s.cfg.base_wp()?)?;
    let pulse = cnot_pulse(&table, ctx.amplitude, &ctx.dm)?;
    let initial: CompState = s.cfg.dm.initial.parse()?;
    let run = evolve(&table, &pulse.pulse, &basis_state(table.states(), table.index_of(initial)?), &ctx.dm)?;
    let mut env = s.envelope("evolve", "DM");
    s.csv(&mut env, "trace.csv", &trace_table(&run, s.format))?;
    let map = table.computational_map()?;
    let mut pairs = vec![
        ("initial", initial.ket().to_string()),
        ("tau_pi", fmt_float(pulse.pi_duration)),
        ("duration", fmt_float(pulse.pulse.duration)),
        ("capped", pulse.capped.to_string()),
        ("frequency", fmt_float(pulse.pulse.frequency)),
        ("steps", run.steps.to_string()),
        ("step", fmt_float(run.step)),
        ("halving_change", fmt_float(run.halving_change)),
        ("norm_drift", fmt_float(run.norm_drift)),
    ];
    let finals: Vec<(String, String)> = CompState::ALL
        .iter()
        .map(|c| (format!("final_{}", c.bits()), fmt_float(run.final_amplitudes[map[c.index()]].norm_sqr())))
        .collect();
    pairs.extend(finals.iter().map(|(k, v)| (k.as_str(), v.clone())));
    let text = key_values(&pairs);
    print!("{text}");
    s.text(&mut env, "evolve.txt", &text)?;
    s.finish(env)
}

/// Structured summary with M in magnitude/phase form.
pub fn fidelity_text(r: &FidelityReport, extra: &[(&str, String)]) -> String {
    let mut pairs = vec![
        ("fidelity", fmt_float(r.fidelity)),
        ("raw_fidelity", fmt_float(r.raw_fidelity)),
        ("duration", fmt_float(r.duration)),
    ];
    for (c, l) in CompState::ALL.iter().zip(r.leakage_out) {
        pairs.push((["leakage_out_00", "leakage_out_01", "leakage_out_10", "leakage_out_11"][c.index()], fmt_float(l)));
    }
    pairs.extend(extra.iter().cloned());
    let mut out = key_values(&pairs);
    out.push_str("\n# M[final][initial] as |m| @ arg(m)/pi, rows and columns |00>,|01>,|10>,|11>\n");
    for row in &r.matrix {
        let cells: Vec<String> =
            row.iter().map(|m| format!("{:.6} @ {:+.4}", m.norm(), m.arg() / std::f64::consts::PI)).collect();
        let _ = writeln!(out, "{}", cells.join("  "));
    }
    out
}

fn cmd_fidelity(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let wp = s.cfg.base_wp()?;
    let table = ctx.table(&wp)?;
    let pulse = cnot_pulse(&table, ctx.amplitude, &ctx.dm)?;
    let report = cnot_fidelity(&table, &pulse.pulse, &ctx.dm)?;
    let mut extra = vec![("capped", pulse.capped.to_string())];
    if s.cfg.dm.truncation_check {
        let change = truncation_check(&ctx.scales, &wp, &ctx.spectro, ctx.amplitude, s.cfg.dm.truncation_extra, &ctx.dm)?;
        extra.push(("truncation_change", fmt_float(change)));
    }
    let text = fidelity_text(&report, &extra);
    print!("{text}");
    let mut env = s.envelope("fidelity", "DM");
    s.text(&mut env, "fidelity.txt", &text)?;
    s.finish(env)
}

fn cmd_optimize(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let method: Method = s.cfg.sweep.method.into();
    let map = s.hashed(sweep(&ctx, method, &s.cfg.sweep_spec()?, s.threads)?);
    let opts = RefineOptions { max_evaluations: s.cfg.sweep.refine_evaluations, tolerance: s.cfg.sweep.refine_tolerance };
    let opt = refine_map_minimum(&ctx, &map, s.cfg.sweep.refine_radius, &opts)?;
    let mut env = s.envelope("optimize", method.name());
    s.csv(&mut env, "optimize_map.csv", &leakage_map_table(&map, s.format))?;
    s.csv(&mut env, "trajectory.csv", &trajectory_table(&opt, s.format))?;
    let text = key_values(&[
        ("method", method.name().to_string()),
        ("status", format!("{:?}", opt.status).to_lowercase()),
        ("x_e1", fmt_float(opt.wp.x_e1)),
        ("x_e2", fmt_float(opt.wp.x_e2)),
        ("kappa", fmt_float(opt.wp.kappa)),
        ("eta", fmt_float(opt.eta)),
        ("seed_x_e2", fmt_float(opt.seed.x_e2)),
        ("seed_kappa", fmt_float(opt.seed.kappa)),
        ("seed_eta", fmt_float(opt.seed_eta)),
        ("evaluations", opt.trajectory.len().saturating_sub(1).to_string()),
    ]);
    print!("{text}");
    s.text(&mut env, "optimize.txt", &text)?;
    s.finish(env)
}

/// Restricts `map` to the grid of `target` when that grid is a subset.
fn restrict_to(map: &LeakageMap, target: &SweepSpec) -> Result<LeakageMap> {
    if map.spec.axes.len() != target.axes.len() {
        return Err(Error::GridMismatch("different numbers of swept axes".into()));
    }
    let mut idx = Vec::new();
    for (a, t) in map.spec.axes.iter().zip(&target.axes) {
        if a.param != t.param {
            return Err(Error::GridMismatch(format!("axis {} vs {}", a.param.name(), t.param.name())));
        }
        let found = t
            .values
            .iter()
            .map(|v| {
                a.values
                    .iter()
                    .position(|u| (u - v).abs() <= 1e-12 * v.abs().max(1e-300))
                    .ok_or_else(|| Error::GridMismatch(format!("{} = {v} missing from the reference grid", a.param.name())))
            })
            .collect::<Result<Vec<_>>>()?;
        idx.push(found);
    }
    let inner = idx.get(1).cloned().unwrap_or_else(|| vec![0]);
    map.subgrid(&idx[0], &inner)
}

fn cmd_compare(s: &Session, ita: Option<&Path>, dm: Option<&Path>) -> Result<()> {
    let ita_path = ita.map_or_else(|| s.out.join("ita_map.csv"), Path::to_path_buf);
    let dm_path = dm.map_or_else(|| s.out.join("dm_map.csv"), Path::to_path_buf);
    let ita_map = read_leakage_map(&ita_path, Method::Ita)?;
    let dm_map = read_leakage_map(&dm_path, Method::Dm)?;
    let ita_map = restrict_to(&ita_map, &dm_map.spec)?;
    let cmp = compare_maps(&ita_map, &dm_map)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), fmt_float);
    let text = key_values(&[
        ("points", cmp.pairs.len().to_string()),
        ("excluded", cmp.excluded.to_string()),
        ("rank_correlation", opt(cmp.rank_correlation)),
        ("ordering_agreement", opt(cmp.ordering_agreement)),
        ("max_abs_log10_ratio", opt(cmp.max_abs_log_ratio)),
        ("median_abs_log10_ratio", opt(cmp.median_abs_log_ratio)),
        ("mean_log10_ratio", opt(cmp.mean_log_ratio)),
    ]);
    print!("{text}");
    let mut pairs = CsvTable::new(["x_e1", "x_e2", "kappa", "eta_ita", "eta_dm"].iter().map(|x| x.to_string()).collect());
    for (wp, a, b) in &cmp.pairs {
        pairs.push(vec![s.format.fmt(wp.x_e1), s.format.fmt(wp.x_e2), s.format.fmt(wp.kappa), s.format.fmt(*a), s.format.fmt(*b)]);
    }
    let mut env = s.envelope("compare", "ITA/DM");
    s.csv(&mut env, "compare_pairs.csv", &pairs)?;
    s.text(&mut env, "compare.txt", &text)?;
    s.finish(env)
}

fn cmd_bench(s: &Session) -> Result<()> {
    let ctx = s.cfg.eval_context()?;
    let report = benchmark_speedup(&ctx.scales, &s.cfg.bench_points(), ctx.amplitude, &ctx.spectro, &ctx.dm)?;
    let (summary, samples) = bench_tables(&report, s.format);
    let mut env = s.envelope("bench", "ITA/DM");
    s.csv(&mut env, "bench.csv", &summary)?;
    s.csv(&mut env, "bench_samples.csv", &samples)?;
    println!(
        "tau_S = {:.4} s, tau_T = {:.4} s, zeta = {:.2}, tau_D/tau_I = {:.2} ({})",
        report.tau_s, report.tau_t, report.zeta, report.ratio, report.environment
    );
    s.finish(env)
}
