//! Subcommand bodies. Each writes its artifacts into the configured output
//! directory together with a `manifest.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qrevival::carpet::render_carpet;
use qrevival::grid_solver::{
    benchmark_csv, crank_nicolson_order, mode_count_csv, mode_count_study, revival_benchmark, SolverConfig,
};
use qrevival::propagation::wavefunction_at;
use qrevival::revival_metrics::{detune_csv, detune_scan, revival_scan};
use qrevival::time::time_range;
use qrevival::wavepacket::PHASE_RNG;
use qrevival::{build_basis, revival_time, EigenBasis, Error, Family, Result, SpatialGrid, TimePoint};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Evolve,
    Revivals,
    Detune,
    Carpet,
    Bench,
}

/// What a command produced. `failure` marks a run that finished but missed its
/// numerical target.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<String>,
    pub summary: Value,
    pub failure: Option<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else if matches!(e, Error::Io(_) | Error::Json(_)) {
        EXIT_IO
    } else {
        EXIT_NUMERICAL
    }
}

/// Run `command`, then write the manifest whatever happened. Returns the
/// process exit code.
pub fn run(command: Command, cfg: &RunConfig) -> i32 {
    let result = fs::create_dir_all(&cfg.output_dir).map_err(Error::from).and_then(|_| execute(command, cfg));
    let (code, status, reason, outcome) = match result {
        Ok(o) => match o.failure.clone() {
            None => (EXIT_OK, "ok", None, o),
            Some(why) => (EXIT_NUMERICAL, "failed", Some(why), o),
        },
        Err(e) => (exit_code(&e), "failed", Some(e.to_string()), Outcome::default()),
    };
    let manifest = json!({
        "command": command,
        "status": status,
        "exit_code": code,
        "error": reason,
        "config": cfg.echo,
        "seed": cfg.seed(),
        "phase_rng": PHASE_RNG,
        "versions": { "qrevival": qrevival::VERSION, "qrevival-cli": env!("CARGO_PKG_VERSION") },
        "outputs": outcome.outputs,
        "summary": outcome.summary,
    });
    if let Some(why) = &reason {
        eprintln!("qrevival {}: {why}", name(command));
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain JSON") + "\n";
    if let Err(e) = fs::write(cfg.output_dir.join(MANIFEST), text) {
        eprintln!("qrevival: cannot write manifest: {e}");
        return if code == EXIT_OK { EXIT_IO } else { code };
    }
    code
}

fn name(command: Command) -> &'static str {
    match command {
        Command::Evolve => "evolve",
        Command::Revivals => "revivals",
        Command::Detune => "detune",
        Command::Carpet => "carpet",
        Command::Bench => "bench",
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Evolve => cmd_evolve(cfg),
        Command::Revivals => cmd_revivals(cfg),
        Command::Detune => cmd_detune(cfg),
        Command::Carpet => cmd_carpet(cfg),
        Command::Bench => cmd_bench(cfg),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, file: String, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(&file), bytes)?;
        self.outputs.push(file);
        Ok(())
    }
}

fn x_grid(cfg: &RunConfig, basis: &EigenBasis) -> Result<SpatialGrid> {
    let (lo, hi) = basis.domain();
    let grid = SpatialGrid::new(cfg.grid.x_min.unwrap_or(lo), cfg.grid.x_max.unwrap_or(hi), cfg.grid.points)?;
    grid.check_within(basis).map_err(|e| Error::config("grid.x_min", e.to_string()))?;
    Ok(grid)
}

fn require_times(cfg: &RunConfig) -> Result<&[TimePoint]> {
    if cfg.times.is_empty() {
        return Err(Error::config("time.times", "empty time range"));
    }
    Ok(&cfg.times)
}

fn time_label(t: TimePoint) -> String {
    t.to_string().replace('/', "-")
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Outcome> {
    let times = require_times(cfg)?;
    let basis = build_basis(&cfg.potential)?;
    let c = cfg.packet.build_for(&basis)?;
    let grid = x_grid(cfg, &basis)?;
    let formats = cfg.formats_or(&[Format::Csv]);
    let mut w = Writer { dir: &cfg.output_dir, outputs: Vec::new() };
    let mut norms = Vec::new();
    for (j, &t) in times.iter().enumerate() {
        let field = wavefunction_at(&c, &basis, &grid, t)?;
        norms.push(json!({ "t_over_tR": t.fraction(), "grid_norm": field.norm_sqr() }));
        if formats.contains(&Format::Csv) {
            w.put(format!("density_{j:02}_t{}.csv", time_label(t)), field.to_csv().as_bytes())?;
        }
    }
    if formats.contains(&Format::Json) {
        w.put("coefficients.json".into(), c.to_json()?.as_bytes())?;
    }
    Ok(Outcome { outputs: w.outputs, summary: json!({ "snapshots": norms }), failure: None })
}

pub fn cmd_revivals(cfg: &RunConfig) -> Result<Outcome> {
    let times = require_times(cfg)?;
    let basis = build_basis(&cfg.potential)?;
    let c = cfg.packet.build_for(&basis)?;
    let report = revival_scan(&c, &basis, times, &cfg.scan)?;
    let formats = cfg.formats_or(&[Format::Csv, Format::Json]);
    let mut w = Writer { dir: &cfg.output_dir, outputs: Vec::new() };
    if formats.contains(&Format::Csv) {
        w.put("revivals.csv".into(), report.to_csv().as_bytes())?;
    }
    if formats.contains(&Format::Json) {
        w.put("revivals.json".into(), report.to_json()?.as_bytes())?;
    }
    Ok(Outcome { outputs: w.outputs, summary: json!({ "peaks": report.peaks }), failure: None })
}

pub fn cmd_detune(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.potential.family != Family::RosenMorse {
        return Err(Error::config("potential.family", "detune requires RM"));
    }
    if cfg.detune_r.is_empty() {
        return Err(Error::config("detune.r_values", "missing required value"));
    }
    let rows = detune_scan(&cfg.potential, &cfg.packet, &cfg.detune_r, &cfg.detune_times)?;
    let formats = cfg.formats_or(&[Format::Csv]);
    let mut w = Writer { dir: &cfg.output_dir, outputs: Vec::new() };
    if formats.contains(&Format::Csv) {
        w.put("detune.csv".into(), detune_csv(&rows).as_bytes())?;
    }
    if formats.contains(&Format::Json) {
        w.put("detune.json".into(), serde_json::to_string_pretty(&rows)?.as_bytes())?;
    }
    Ok(Outcome { outputs: w.outputs, summary: json!({ "rows": rows }), failure: None })
}

fn shift(a: TimePoint, b: TimePoint, sign: i64) -> TimePoint {
    match (a, b) {
        (TimePoint::Ratio { num: p, den: q }, TimePoint::Ratio { num: r, den: s }) => TimePoint::ratio(p * s + sign * r * q, q * s),
        _ => TimePoint::real(a.fraction() + sign as f64 * b.fraction()),
    }
}

pub fn cmd_carpet(cfg: &RunConfig) -> Result<Outcome> {
    let times = match cfg.carpet.zoom {
        Some((center, half)) => time_range(shift(center, half, -1), shift(center, half, 1), cfg.carpet.frames),
        None => require_times(cfg)?.to_vec(),
    };
    let basis = build_basis(&cfg.potential)?;
    let c = cfg.packet.build_for(&basis)?;
    let grid = x_grid(cfg, &basis)?;
    let raster = render_carpet(&c, &basis, &grid, &times, cfg.carpet.normalization)?;
    let formats = cfg.formats_or(&[Format::Csv, Format::Pgm]);
    let mut w = Writer { dir: &cfg.output_dir, outputs: Vec::new() };
    if formats.contains(&Format::Pgm) {
        w.put("carpet.pgm".into(), &raster.to_pgm(cfg.carpet.gamma)?)?;
    }
    if formats.contains(&Format::Csv) {
        w.put("carpet.csv".into(), raster.to_csv()?.as_bytes())?;
    }
    let summary = json!({
        "width": raster.width(),
        "height": raster.height(),
        "t_first": times[0].fraction(),
        "t_last": times[times.len() - 1].fraction(),
        "gamma": cfg.carpet.gamma,
        "normalization": raster.normalization,
    });
    Ok(Outcome { outputs: w.outputs, summary, failure: None })
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.bench.is_none() && cfg.order.is_none() && cfg.modes.is_none() {
        return Err(Error::config("bench", "nothing to run: add a [bench], [order] or [modes] block"));
    }
    let basis = build_basis(&cfg.potential)?;
    let (lo, hi) = basis.domain();
    let t_r = revival_time(basis.alpha());
    let mut w = Writer { dir: &cfg.output_dir, outputs: Vec::new() };
    let mut summary = serde_json::Map::new();
    let mut failure = None;

    if let Some(b) = &cfg.bench {
        let grid = SpatialGrid::new(lo, hi, b.points)?;
        let solver = SolverConfig::crank_nicolson(grid, t_r / b.steps_per_revival as f64, t_r);
        let rows = revival_benchmark(&cfg.potential, &cfg.packet, &solver, &b.checkpoints)?;
        w.put("benchmark.csv".into(), benchmark_csv(&rows).as_bytes())?;
        if let Some(bad) = rows.iter().find(|r| !(r.fidelity >= b.pass_threshold)) {
            failure = Some(format!(
                "fidelity {:.6} at t = {}·t_R is below the pass threshold {}",
                bad.fidelity, bad.checkpoint, b.pass_threshold
            ));
        }
        summary.insert("benchmark".into(), serde_json::to_value(&rows)?);
    }
    if let Some(o) = &cfg.order {
        let grid = SpatialGrid::new(lo, hi, o.points)?;
        let study = crank_nicolson_order(&cfg.potential, &cfg.packet, &grid, t_r / o.steps_per_revival as f64, o.t_final)?;
        let mut csv = String::from("dt,difference_to_half_dt\n");
        for (dt, d) in study.dts.iter().zip(&study.differences) {
            let _ = writeln!(csv, "{dt:.16e},{d:.16e}");
        }
        w.put("convergence.csv".into(), csv.as_bytes())?;
        summary.insert("convergence".into(), serde_json::to_value(&study)?);
    }
    if let Some(m) = &cfg.modes {
        let rows = mode_count_study(&cfg.potential, &cfg.packet, &m.counts, m.steps_per_revival, m.dispersion)?;
        w.put("mode_count.csv".into(), mode_count_csv(&rows).as_bytes())?;
        summary.insert("mode_count".into(), serde_json::to_value(&rows)?);
    }
    Ok(Outcome { outputs: w.outputs, summary: Value::Object(summary), failure })
}
