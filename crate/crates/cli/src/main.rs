//! `retrocav`: trace billiard trajectories in cavities, evaluate their
//! resistance, optimize shape families and run reflection censuses.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 invalid input (including
//! shape-spec parse errors), 3 trajectory failure.

mod cli;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use retrocav::analysis::{census, deviation_grid, scatter_export, write_scatter_csv, ScatterKind};
use retrocav::billiard::{trace, EntryState, TraceError};
use retrocav::exec::with_threads;
use retrocav::optimizer::{optimize_family, Family, OptError, OptimizeConfig, SearchSpace};
use retrocav::resistance::{
    body_resistance, integrand_grid, perimeter_ratio, resistance, resistance_monte_carlo_with,
    BodySpec, QuadratureConfig, ResistanceError, ResistanceEstimate, Rule,
};
use retrocav::shapes::{parse_shape_spec, Cavity, ShapeError, ShapeSpec};
use serde::Serialize;

use cli::{
    BodyArgs, CensusArgs, Cli, Command, FamilyArg, GridArgs, GridWhat, Integration, OptimizeArgs,
    ResistArgs, RuleArg, TraceArgs,
};
use manifest::{OutputDir, RunManifest};

#[derive(Debug)]
enum CliError {
    Input(String),
    Trace(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Trace(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ResistanceError> for CliError {
    fn from(e: ResistanceError) -> Self {
        match e {
            ResistanceError::Trace { x, phi, source } => CliError::Trace(format!(
                "trace failed at x = {x}, phi = {} deg: {source}",
                phi.to_degrees()
            )),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        CliError::Input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_threads(threads, move || run(cli.command, None)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Input(m) | CliError::Trace(m) | CliError::Io(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

/// `shape` overrides the command's shape argument when replaying.
fn run(command: Command, shape: Option<ShapeSpec>) -> Result<()> {
    match &command {
        Command::Resist(a) => cmd_resist(&command, a, shape),
        Command::Body(a) => cmd_body(&command, a, shape),
        Command::Optimize(a) => cmd_optimize(&command, a),
        Command::Census(a) => cmd_census(&command, a, shape),
        Command::Grid(a) => cmd_grid(&command, a, shape),
        Command::Trace(a) => cmd_trace(&command, a, shape),
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest).map_err(CliError::Input)?;
            let mut inner = m.command;
            let out = a.out.clone();
            match &mut inner {
                Command::Resist(i) => i.out = out,
                Command::Body(i) => i.out = out,
                Command::Optimize(i) => i.out = out,
                Command::Census(i) => i.out = out,
                Command::Grid(i) => i.out = out,
                Command::Trace(i) => i.out = out,
                Command::Replay(_) => unreachable!("manifests never record a replay"),
            }
            run(inner, m.resolved_shape)
        }
    }
}

/// Resolves a shape argument: inline JSON, a JSON file, or a built-in alias.
fn load_shape(arg: &str, resolved: Option<ShapeSpec>) -> Result<(ShapeSpec, Cavity)> {
    let spec = match resolved {
        Some(s) => s,
        None if arg.trim_start().starts_with('{') => {
            parse_shape_spec(arg).map_err(|e| CliError::Input(e.to_string()))?
        }
        None if Path::new(arg).is_file() => {
            let text = fs::read_to_string(arg)?;
            parse_shape_spec(&text).map_err(|e| match e {
                ShapeError::Parse { line, column, message } => {
                    CliError::Input(format!("{arg}:{line}:{column}: {message}"))
                }
                other => CliError::Input(format!("{arg}: {other}")),
            })?
        }
        None => arg
            .parse::<ShapeSpec>()
            .map_err(|e| CliError::Input(format!("{e} (and no such file)")))?,
    };
    let cavity = spec.build().map_err(|e| CliError::Input(e.to_string()))?;
    Ok((spec, cavity))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn estimate(cavity: &Cavity, a: &Integration) -> Result<ResistanceEstimate> {
    Ok(match a.rule {
        RuleArg::Mc => resistance_monte_carlo_with(cavity, a.mc_samples, a.seed, a.max_reflections)?,
        RuleArg::Midpoint | RuleArg::Simpson => {
            let rule = if a.rule == RuleArg::Midpoint { Rule::Midpoint } else { Rule::SimpsonPhi };
            let cfg = QuadratureConfig::new(a.nx, a.nphi, rule)?.with_max_reflections(a.max_reflections);
            resistance(cavity, &cfg)?
        }
    })
}

fn cmd_resist(command: &Command, a: &ResistArgs, shape: Option<ShapeSpec>) -> Result<()> {
    let (spec, cavity) = load_shape(&a.shape, shape)?;
    let est = estimate(&cavity, &a.integration)?;
    let json = to_json(&est);
    print!("{json}");
    let mut out = OutputDir::new(a.out.output.clone())?;
    out.write("resistance.json", json.as_bytes())?;
    out.finish(command, Some(spec))?;
    Ok(())
}

#[derive(Serialize)]
struct BodyReport {
    cavities: usize,
    cavity: ResistanceEstimate,
    perimeter_ratio: f64,
    body_resistance: f64,
}

fn cmd_body(command: &Command, a: &BodyArgs, shape: Option<ShapeSpec>) -> Result<()> {
    let (spec, cavity) = load_shape(&a.shape, shape)?;
    if a.cavities < 2 {
        return Err(CliError::Input("a tiled disc needs at least 2 cavities".into()));
    }
    let est = estimate(&cavity, &a.integration)?;
    let body = BodySpec::tiled_disc(a.cavities, spec.clone(), est.value);
    let report = BodyReport {
        cavities: a.cavities,
        perimeter_ratio: perimeter_ratio(a.cavities),
        body_resistance: body_resistance(&body)?,
        cavity: est,
    };
    let json = to_json(&report);
    print!("{json}");
    let mut out = OutputDir::new(a.out.output.clone())?;
    out.write("body.json", json.as_bytes())?;
    out.finish(command, Some(spec))?;
    Ok(())
}

fn parse_bounds(text: &str, dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let bad = || CliError::Input(format!("bounds must be {dim} comma-separated lo:hi pairs, got {text:?}"));
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for pair in text.split(',') {
        let (lo, hi) = pair.split_once(':').ok_or_else(bad)?;
        lower.push(lo.trim().parse::<f64>().map_err(|_| bad())?);
        upper.push(hi.trim().parse::<f64>().map_err(|_| bad())?);
    }
    if lower.len() != dim {
        return Err(bad());
    }
    Ok((lower, upper))
}

fn cmd_optimize(command: &Command, a: &OptimizeArgs) -> Result<()> {
    let mut space = match a.family {
        FamilyArg::Quadratic => SearchSpace::quadratic(),
        FamilyArg::Polyline => SearchSpace::polyline(a.k)?,
    };
    if let Some(b) = &a.bounds {
        let (lower, upper) = parse_bounds(b, space.dim())?;
        space = SearchSpace::new(space.family, lower, upper)?;
    }
    let space = space.with_penalty(a.penalty);
    let cfg = OptimizeConfig {
        budget: a.budget,
        tol: a.tol,
        grid: a.grid,
        rescore_grid: a.rescore_grid,
        explore_budget: a.explore_budget,
        explore_tol: a.explore_tol,
        explore_grid: a.explore_grid,
    };
    let result = optimize_family(&space, &cfg, a.multistart, a.seed)?;
    if let Family::Polyline { .. } = space.family {
        eprintln!("best shape: {}", retrocav::shapes::emit_shape_spec(&space.shape(&result.best_params)));
    }
    let json = to_json(&result);
    print!("{json}");
    let mut out = OutputDir::new(a.out.output.clone())?;
    out.write("optimize.json", json.as_bytes())?;
    out.finish(command, None)?;
    Ok(())
}

fn cmd_census(command: &Command, a: &CensusArgs, shape: Option<ShapeSpec>) -> Result<()> {
    let (spec, cavity) = load_shape(&a.shape, shape)?;
    if a.samples == 0 {
        return Err(CliError::Input("census needs at least one sample".into()));
    }
    let report = census(&cavity, a.samples, a.seed);
    let json = to_json(&report.summary);
    print!("{json}");
    let mut out = OutputDir::new(a.out.output.clone())?;
    if out.is_set() {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        out.write("census.csv", &buf)?;
        out.write("census_summary.json", json.as_bytes())?;
        for (kind, name) in [
            (ScatterKind::PhiPhiPlus, "scatter_phi_phiplus.csv"),
            (ScatterKind::PhiYmax, "scatter_phi_ymax.csv"),
            (ScatterKind::PhiNc, "scatter_phi_nc.csv"),
        ] {
            let mut buf = Vec::new();
            write_scatter_csv(&scatter_export(&report, kind), kind, &mut buf)?;
            out.write(name, &buf)?;
        }
    }
    out.finish(command, Some(spec))?;
    Ok(())
}

fn cmd_grid(command: &Command, a: &GridArgs, shape: Option<ShapeSpec>) -> Result<()> {
    let (spec, cavity) = load_shape(&a.shape, shape)?;
    let cfg = QuadratureConfig::midpoint(a.nx, a.nphi)?.with_max_reflections(a.max_reflections);
    let (grid, angles, name) = match a.what {
        GridWhat::Integrand => (integrand_grid(&cavity, &cfg)?, false, "grid_integrand.csv"),
        GridWhat::Deviation => (deviation_grid(&cavity, &cfg)?, true, "grid_deviation.csv"),
    };
    let mut buf = Vec::new();
    grid.write_csv(&mut buf, angles)?;
    let mut out = OutputDir::new(a.out.output.clone())?;
    if out.is_set() {
        out.write(name, &buf)?;
    } else {
        std::io::stdout().write_all(&buf)?;
    }
    out.finish(command, Some(spec))?;
    Ok(())
}

#[derive(Serialize)]
struct TraceReport {
    x: f64,
    phi_deg: f64,
    nc: usize,
    exit_x: f64,
    exit_phi_deg: f64,
    deviation_deg: f64,
    y_max: f64,
    corner_hit: bool,
    alternating: bool,
    bounces: Vec<[f64; 2]>,
}

fn cmd_trace(command: &Command, a: &TraceArgs, shape: Option<ShapeSpec>) -> Result<()> {
    let (spec, cavity) = load_shape(&a.shape, shape)?;
    let entry = EntryState::new(a.x, a.phi.to_radians()).map_err(|e| CliError::Input(e.to_string()))?;
    let t = trace(&cavity, entry, a.max_reflections).map_err(|e| {
        let detail = match &e {
            TraceError::NonTermination(p) | TraceError::EscapeAnomaly(p) => p
                .reflections
                .last()
                .map(|r| format!("; last bounce at ({}, {})", r.point.x, r.point.y))
                .unwrap_or_default(),
            _ => String::new(),
        };
        CliError::Trace(format!("x = {}, phi = {} deg: {e}{detail}", a.x, a.phi))
    })?;
    let report = TraceReport {
        x: a.x,
        phi_deg: a.phi,
        nc: t.nc,
        exit_x: t.exit_x,
        exit_phi_deg: t.exit_phi.to_degrees(),
        deviation_deg: (entry.phi() - t.exit_phi).to_degrees(),
        y_max: t.y_max,
        corner_hit: t.corner_hit,
        alternating: t.alternates(&cavity),
        bounces: t.reflections.iter().map(|r| [r.point.x, r.point.y]).collect(),
    };
    let json = to_json(&report);
    print!("{json}");
    let mut csv = Vec::new();
    t.write_csv(&mut csv)?;
    if let Some(path) = &a.dump {
        fs::write(path, &csv)?;
    }
    let mut out = OutputDir::new(a.out.output.clone())?;
    out.write("trace.json", json.as_bytes())?;
    out.write("trajectory.csv", &csv)?;
    out.finish(command, Some(spec))?;
    Ok(())
}
