//! The `tippingscope` command line: argument parsing, configuration merge,
//! JSON run reports and optional SVG figures.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 domain error, 64 usage
//! error.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bifurcation::{self, ScanSettings};
use crate::error::{Error, Result};
use crate::models::{make_decomposition, PeriodicModel, Split, TransitionModel, ZeroPivot};
use crate::odeint::{integrate, IntegratorConfig, Status, Trajectory};
use crate::poincare::{self, PoincareConfig};
use crate::transition::{self, Which};
use crate::{roots, shapefit};

use config::Config;
use svg::{Cell, Figure, Heatmap, LinePlot, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable that sets the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "TIPPINGSCOPE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tippingscope",
    version,
    about = "Saddle-node and tipping analysis of scalar concave-convex ODEs"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Where the JSON report goes; `-` is standard output.
    #[arg(long, global = true, default_value = "-", value_name = "PATH")]
    out: String,
    /// Suppress progress and warnings on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for parallel scans (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Include wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the periodic model or a pullback solution of the transition model.
    Simulate(SimulateArgs),
    /// Fixed points of the period map.
    Poincare(PoincareArgs),
    /// The thresholds mu- and mu+ of the linear part.
    Mu(MuArgs),
    /// The saddle-node values lambda- and lambda+.
    Lambda(LambdaArgs),
    /// Relative order case o1..o5 of lambda-, lambda+, mu-, mu+.
    ClassifyOrder(OrderArgs),
    /// d-concavity band (and, for the Allee model, the inflection curve).
    Band(BandArgs),
    /// Root count and concavity classes over a (K, Delta) grid.
    RegionMap(RegionArgs),
    /// Locate the tipping point in rho by bisection.
    Tipping(TippingArgs),
    /// Fit a concave-convex regression spline to growth data.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SplitArg {
    Minus,
    Plus,
    Full,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Minus => Split::ConcaveLinear,
            SplitArg::Plus => Split::LinearConvex,
            SplitArg::Full => Split::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Periodic,
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BandKind {
    Periodic,
    Allee,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WhichArg {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    /// Horizon 1e5, tolerance 1e-3.
    Desk,
    /// Horizon 1e6, tolerance 1e-7.
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Generations,
    Direct,
}

#[derive(Debug, Args, Serialize, Default)]
struct PeriodicFlags {
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    g_minus: Option<f64>,
    #[arg(long)]
    g_plus: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "transition")]
    kind: ModelKind,
    #[command(flatten)]
    periodic: PeriodicFlags,
    #[arg(long, value_enum, default_value = "full")]
    split: SplitArg,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_enum, default_value = "upper")]
    which: WhichArg,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    x0: f64,
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PoincareArgs {
    #[command(flatten)]
    periodic: PeriodicFlags,
    #[arg(long, value_enum, default_value = "full")]
    split: SplitArg,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    window: Option<[f64; 2]>,
    #[arg(long)]
    n_scan: Option<usize>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MuArgs {
    #[arg(long)]
    d: Option<f64>,
    /// `cosine` or a constant forcing value.
    #[arg(long, default_value = "cosine", allow_hyphen_values = true)]
    c: String,
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct LambdaArgs {
    #[command(flatten)]
    periodic: PeriodicFlags,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-2,2")]
    search: [f64; 2],
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct OrderArgs {
    #[command(flatten)]
    periodic: PeriodicFlags,
    #[arg(long, default_value_t = 100)]
    grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct BandArgs {
    #[arg(long, value_enum, default_value = "periodic")]
    kind: BandKind,
    #[command(flatten)]
    periodic: PeriodicFlags,
    #[arg(long, value_enum, default_value = "full")]
    split: SplitArg,
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long, default_value_t = 20.0)]
    x_max: f64,
    #[arg(long, default_value_t = 50.0)]
    y_max: f64,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct RegionArgs {
    /// `NKxND`, e.g. `100x100`.
    #[arg(long, value_parser = parse_grid, default_value = "100x100")]
    grid: (usize, usize),
    #[arg(long, value_parser = parse_pair, default_value = "38.3,40.3")]
    k_range: [f64; 2],
    #[arg(long, value_parser = parse_pair, default_value = "38.2,40.2")]
    delta_range: [f64; 2],
    #[arg(long, value_parser = parse_pair, default_value = "0,60")]
    probe: [f64; 2],
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TippingArgs {
    #[arg(long, value_parser = parse_pair, default_value = "0,1")]
    bracket: [f64; 2],
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_name = "PATH")]
    trace_svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
    #[arg(long, value_enum, default_value = "generations")]
    mode: ModeArg,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    lb: f64,
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got `{s}`"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([a, b])
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    if a < 2 || b < 2 {
        return Err("grid needs at least 2 points per axis".into());
    }
    Ok((a, b))
}

/// JSON document written by every subcommand.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub determinism: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub result: Value,
}

const DETERMINISM: &str = "no random numbers are used; output is a pure function of the configuration";

/// What a subcommand produced.
struct Produced {
    result: Value,
    outputs: Vec<String>,
    warnings: Vec<String>,
    /// Text that replaces the JSON report at `--out` (region-map CSV).
    replace_out: Option<String>,
}

impl Produced {
    fn json<T: Serialize>(value: &T) -> Result<Self> {
        Ok(Self {
            result: serde_json::to_value(value)?,
            outputs: Vec::new(),
            warnings: Vec::new(),
            replace_out: None,
        })
    }
}

fn periodic_model(cfg: &Config, flags: &PeriodicFlags) -> PeriodicModel {
    let mut m = cfg.periodic_model();
    if let Some(d) = flags.d {
        m.d = d;
    }
    if let Some(g) = flags.g_minus {
        m.g_minus = g;
    }
    if let Some(g) = flags.g_plus {
        m.g_plus = g;
    }
    m
}

fn scan_settings(cfg: &Config, window: Option<[f64; 2]>, n_scan: Option<usize>) -> ScanSettings {
    ScanSettings {
        window: window.unwrap_or(cfg.scan.window),
        n_scan: n_scan.unwrap_or(cfg.scan.n_scan),
        poincare: PoincareConfig::default(),
    }
}

fn transition_model(cfg: &Config, rho: Option<f64>) -> Result<TransitionModel> {
    cfg.model.validate()?;
    Ok(TransitionModel::new(
        cfg.model,
        cfg.driver()?,
        rho.unwrap_or(cfg.transition.rho),
    ))
}

fn write_svg(fig: &Figure, path: &Path, outputs: &mut Vec<String>) -> Result<()> {
    svg::emit_svg(fig, path)?;
    outputs.push(path.display().to_string());
    Ok(())
}

fn samples(traj: &Trajectory, t0: f64, t1: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = traj.span();
    let (a, b) = (t0.max(lo), t1.min(hi));
    roots::linspace(a, b, n.max(2))
        .into_iter()
        .map(|t| Ok((t, traj.sample(t)?)))
        .collect()
}

fn run_simulate(cfg: &Config, a: &SimulateArgs) -> Result<Produced> {
    let mut outputs = Vec::new();
    let (traj, t0, t1, label, exponent) = match a.kind {
        ModelKind::Periodic => {
            let mut m = periodic_model(cfg, &a.periodic).with_split(a.split.into());
            if let Some(l) = a.lambda {
                m = m.with_lambda(l);
            }
            let t0 = a.t0.unwrap_or(0.0);
            let t1 = a.t1.unwrap_or(t0 + 4.0 * std::f64::consts::PI);
            let traj = integrate(&m, t0, a.x0, t1, &IntegratorConfig::default())?;
            let end = traj.t_last();
            let exponent = transition::finite_time_exponent(&m, &traj, t0, end).ok();
            (traj, t0, t1, "x".to_string(), exponent)
        }
        ModelKind::Transition => {
            let m = transition_model(cfg, a.rho)?;
            let tc = cfg.transition_config();
            let t0 = a.t0.unwrap_or(-1e3);
            let t1 = a.t1.unwrap_or(1e3);
            let which = match a.which {
                WhichArg::Upper => Which::Upper,
                WhichArg::Lower => Which::Lower,
            };
            let traj = transition::pullback_solution(&m, which, t1, &tc)?;
            let exponent = transition::finite_time_exponent(&m, &traj, t0, t1).ok();
            (
                traj,
                t0,
                t1,
                format!("{:?} solution, rho={}", a.which, m.rho).to_lowercase(),
                exponent,
            )
        }
    };
    let pts = samples(&traj, t0, t1, a.samples)?;
    if let Some(p) = &a.svg {
        let fig = Figure::Line(LinePlot {
            title: "solution".into(),
            x_label: "t".into(),
            y_label: "x".into(),
            series: vec![Series::new(label, pts.clone())],
        });
        write_svg(&fig, p, &mut outputs)?;
    }
    let mut warnings = Vec::new();
    if let Status::BlewUp { t_escape, direction } = traj.status {
        warnings.push(format!("solution escaped to {direction:?} at t={t_escape}"));
    }
    Ok(Produced {
        result: json!({
            "status": traj.status,
            "finite_time_exponent": exponent,
            "samples": pts,
        }),
        outputs,
        warnings,
        replace_out: None,
    })
}

fn run_poincare(cfg: &Config, a: &PoincareArgs) -> Result<Produced> {
    let mut m = periodic_model(cfg, &a.periodic).with_split(a.split.into());
    if let Some(l) = a.lambda {
        m = m.with_lambda(l);
    }
    let scan = scan_settings(cfg, a.window, a.n_scan);
    let set = poincare::find_fixed_points(&m, scan.window, scan.n_scan, &scan.poincare)?;
    let mut p = Produced::json(&set)?;
    if set.anomaly {
        p.warnings.push("more fixed points than the split family admits".into());
    }
    if let Some(path) = &a.svg {
        let ic = scan.poincare.integrator;
        let map: Vec<(f64, f64)> = roots::linspace(scan.window[0], scan.window[1], 400)
            .into_iter()
            .filter_map(|x| Some((x, poincare::period_map(&m, x, &ic).ok()?.finite()?)))
            .collect();
        let diag = vec![(scan.window[0], scan.window[0]), (scan.window[1], scan.window[1])];
        let fig = Figure::Line(LinePlot {
            title: format!("period map, lambda={}", m.lambda),
            x_label: "x".into(),
            y_label: "T(x)".into(),
            series: vec![Series::new("T", map), Series::new("identity", diag)],
        });
        write_svg(&fig, path, &mut p.outputs)?;
    }
    Ok(p)
}

fn run_mu(cfg: &Config, a: &MuArgs) -> Result<Produced> {
    let d = a.d.unwrap_or(cfg.periodic.d);
    let horizon = a.horizon.unwrap_or_else(|| bifurcation::horizon_for(d));
    let grid = bifurcation::omega_grid(a.grid);
    if a.c.eq_ignore_ascii_case("cosine") {
        let q = bifurcation::compute_mu(f64::cos, move |_| d, &grid, horizon)?;
        let c = bifurcation::mu_closed_form_cosine(d);
        let gap = (q.mu_minus - c.mu_minus).abs().max((q.mu_plus - c.mu_plus).abs());
        Produced::json(&json!({
            "mu_minus": q.mu_minus,
            "mu_plus": q.mu_plus,
            "method": q.method,
            "closed_form": c,
            "disagreement": gap,
        }))
    } else {
        let c0: f64 =
            a.c.parse()
                .map_err(|_| Error::Config(format!("--c must be `cosine` or a number, got `{}`", a.c)))?;
        let q = bifurcation::compute_mu(move |_| c0, move |_| d, &grid, horizon)?;
        Produced::json(&q)
    }
}

fn run_lambda(cfg: &Config, a: &LambdaArgs) -> Result<Produced> {
    let m = periodic_model(cfg, &a.periodic);
    let pair = bifurcation::find_lambda_pair(&m, a.search, a.tol, &scan_settings(cfg, None, None))?;
    Produced::json(&pair)
}

fn run_order(cfg: &Config, a: &OrderArgs) -> Result<Produced> {
    let m = periodic_model(cfg, &a.periodic);
    let mu = bifurcation::mu_cosine(m.d, a.grid)?;
    let case = bifurcation::classify_order(&m, &mu, &scan_settings(cfg, None, None))?;
    Produced::json(&case)
}

fn run_band(cfg: &Config, a: &BandArgs) -> Result<Produced> {
    let grid = bifurcation::omega_grid(a.grid);
    let mut outputs = Vec::new();
    let (band, extra) = match a.kind {
        BandKind::Periodic => {
            let mut dec = make_decomposition(periodic_model(cfg, &a.periodic), ZeroPivot);
            dec.variant = a.split.into();
            (bifurcation::dconcavity_band_of(&dec, &grid, a.x_max), Value::Null)
        }
        BandKind::Allee => {
            let model = cfg.model;
            model.validate()?;
            let curve = bifurcation::inflection_curve(&model, &grid, a.y_max);
            if !curve.failures.is_empty() {
                return Err(Error::NoBracket {
                    omega: curve.failures[0],
                    y_max: a.y_max,
                });
            }
            let pivots: Vec<f64> = curve.samples.iter().map(|s| s.y).collect();
            let band = bifurcation::dconcavity_band(
                |w, x| {
                    let i = grid
                        .iter()
                        .position(|&g| g == w)
                        .expect("band is evaluated on the grid");
                    model.h(w, pivots[i] + x)[3]
                },
                &grid,
                a.x_max,
                2000,
            );
            (band, serde_json::to_value(&curve)?)
        }
    };
    if let Some(path) = &a.svg {
        let line = |name: &str, v: &[f64]| Series::new(name, grid.iter().copied().zip(v.iter().copied()).collect());
        let fig = Figure::Line(LinePlot {
            title: "d-concavity band".into(),
            x_label: "omega".into(),
            y_label: "x".into(),
            series: vec![
                line("alpha", &band.alpha),
                line("alpha*", &band.alpha_star),
                line("beta*", &band.beta_star),
                line("beta", &band.beta),
            ],
        });
        write_svg(&fig, path, &mut outputs)?;
    }
    let mut p = Produced::json(&json!({ "band": band, "inflection_curve": extra }))?;
    p.outputs = outputs;
    Ok(p)
}

fn region_legend(c: &bifurcation::RegionClass) -> String {
    format!(
        "{} roots, {}, {}",
        c.n_roots,
        if c.concave_convex { "cc" } else { "not cc" },
        if c.d_concave { "d-concave" } else { "not d-concave" }
    )
}

fn run_region(cfg: &Config, a: &RegionArgs, out: &str) -> Result<Produced> {
    cfg.model.validate()?;
    let (nk, nd) = a.grid;
    let map = bifurcation::region_map(&cfg.model, a.k_range, a.delta_range, nk, nd, a.probe);
    let mut classes: Vec<bifurcation::RegionClass> = Vec::new();
    for c in &map.cells {
        let key = bifurcation::RegionClass {
            near_degenerate: false,
            ..c.class
        };
        if !classes.contains(&key) {
            classes.push(key);
        }
    }
    classes.sort_by_key(|c| (c.n_roots, c.concave_convex, c.d_concave));
    let class_index = |c: &bifurcation::RegionClass| {
        classes
            .iter()
            .position(|k| k.n_roots == c.n_roots && k.concave_convex == c.concave_convex && k.d_concave == c.d_concave)
            .unwrap_or(0)
    };
    let mut outputs = Vec::new();
    if let Some(path) = &a.svg {
        let dk = (a.k_range[1] - a.k_range[0]) / (nk - 1) as f64;
        let dd = (a.delta_range[1] - a.delta_range[0]) / (nd - 1) as f64;
        let cells = map
            .cells
            .iter()
            .map(|c| Cell {
                x: [c.k - dk / 2.0, c.k + dk / 2.0],
                y: [c.delta - dd / 2.0, c.delta + dd / 2.0],
                class: class_index(&c.class),
            })
            .collect();
        let (k0, d0) = (cfg.model.k0, cfg.model.d0);
        let circle = (0..=180)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 180.0;
                (k0 + cfg.model.k1 * th.cos(), d0 + cfg.model.d1 * th.sin())
            })
            .collect();
        let fig = Figure::Heat(Heatmap {
            title: "root and concavity classes".into(),
            x_label: "K".into(),
            y_label: "Delta".into(),
            cells,
            legend: classes.iter().map(region_legend).collect(),
            overlays: vec![Series::new("driver orbit", circle)],
        });
        write_svg(&fig, path, &mut outputs)?;
    }
    let counts: Vec<Value> = classes
        .iter()
        .map(|k| {
            let n = map
                .cells
                .iter()
                .filter(|c| class_index(&c.class) == class_index(k))
                .count();
            json!({ "class": k, "cells": n })
        })
        .collect();
    let orbit_class = map.class_at(cfg.model.k0, cfg.model.d0);
    let csv_out = out.ends_with(".csv");
    let mut p = if csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["K", "Delta", "n_roots", "cc", "dconc"])?;
        for c in &map.cells {
            w.write_record([
                c.k.to_string(),
                c.delta.to_string(),
                c.class.n_roots.to_string(),
                u8::from(c.class.concave_convex).to_string(),
                u8::from(c.class.d_concave).to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let mut p = Produced::json(&json!({ "classes": counts, "class_at_center": orbit_class }))?;
        p.replace_out = Some(String::from_utf8(bytes).expect("csv writer emits UTF-8"));
        p
    } else {
        Produced::json(&json!({
            "classes": counts,
            "class_at_center": orbit_class,
            "map": map,
        }))?
    };
    if map.cells.iter().any(|c| c.class.near_degenerate) {
        p.warnings
            .push("some cells have a near-tangent root (|h| < 1e-9 at an extremum)".into());
    }
    p.outputs.extend(outputs);
    Ok(p)
}

fn run_tipping(cfg: &Config, a: &TippingArgs, quiet: bool) -> Result<Produced> {
    let m = transition_model(cfg, None)?;
    let tc = cfg.transition_config();
    let (h_default, tol_default) = match a.preset {
        Some(Preset::Desk) => (1e5, 1e-3),
        Some(Preset::Fine) => (1e6, 1e-7),
        None => (1e6, 1e-3),
    };
    let horizon = a.horizon.unwrap_or(h_default);
    let tol = a.tol.unwrap_or(tol_default);
    if !quiet {
        eprintln!(
            "bisecting rho on [{}, {}] to {tol} at horizon {horizon}",
            a.bracket[0], a.bracket[1]
        );
    }
    let report = transition::locate_tipping(&m, a.bracket[0], a.bracket[1], tol, horizon, a.epsilon, &tc)?;
    let fold = transition::future_fold(&m, [0.0, 10.0], 1e-10).ok();
    let mut p = Produced::json(&json!({
        "report": report,
        "future_fold_rho": fold,
    }))?;
    if !report.is_monotone() {
        p.warnings.push("classifications are not monotone in rho".into());
    }
    if let Some(path) = &a.trace_svg {
        let mut series = Vec::new();
        for (rho, tag) in [(report.bracket[0], "tracking"), (report.bracket[1], "tipping")] {
            let traj = transition::pullback_solution(&m.with_rho(rho), Which::Upper, 300.0, &tc)?;
            series.push(Series::new(
                format!("u, rho={rho:.6} ({tag})"),
                samples(&traj, -100.0, 300.0, 1601)?,
            ));
        }
        let fig = Figure::Line(LinePlot {
            title: "upper pullback solutions at the bracket ends".into(),
            x_label: "t".into(),
            y_label: "y".into(),
            series,
        });
        write_svg(&fig, path, &mut p.outputs)?;
    }
    Ok(p)
}

fn run_fit(a: &FitArgs) -> Result<Produced> {
    let mode = match a.mode {
        ModeArg::Generations => shapefit::CsvMode::Generations,
        ModeArg::Direct => shapefit::CsvMode::Direct,
    };
    let data = shapefit::read_dataset_file(&a.csv, mode)?;
    let basis = shapefit::build_basis(a.a, a.b, a.m, a.n)?;
    let fit = shapefit::fit(&basis, &data, a.lb)?;
    let roots = shapefit::spline_roots(&fit);
    let threshold = shapefit::allee_threshold(&roots);
    let mut p = Produced::json(&json!({
        "knots": basis.knots,
        "alpha": fit.alpha,
        "sse": fit.sse,
        "active_set": fit.active_set,
        "roots": roots,
        "allee_threshold": threshold,
        "excluded_rows": data.excluded_rows,
        "n_points": data.points.len(),
    }))?;
    if threshold.is_none() {
        p.warnings.push(format!(
            "theta has {} roots in (0, b]; no Allee threshold reported",
            roots.len()
        ));
    }
    if let Some(path) = &a.plot {
        let curve = roots::linspace(0.0, basis.b, 600)
            .into_iter()
            .map(|x| Ok((x, fit.value(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let fig = Figure::Line(LinePlot {
            title: format!("concave-convex fit, lb={}", a.lb),
            x_label: "population size".into(),
            y_label: "growth rate".into(),
            series: vec![
                Series::scatter("data", data.points.clone()),
                Series::new("theta", curve),
            ],
        });
        write_svg(&fig, path, &mut p.outputs)?;
    }
    Ok(p)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Poincare(_) => "poincare",
        Command::Mu(_) => "mu",
        Command::Lambda(_) => "lambda",
        Command::ClassifyOrder(_) => "classify-order",
        Command::Band(_) => "band",
        Command::RegionMap(_) => "region-map",
        Command::Tipping(_) => "tipping",
        Command::Fit(_) => "fit",
    }
}

fn args_value(c: &Command) -> Result<Value> {
    Ok(match c {
        Command::Simulate(a) => serde_json::to_value(a)?,
        Command::Poincare(a) => serde_json::to_value(a)?,
        Command::Mu(a) => serde_json::to_value(a)?,
        Command::Lambda(a) => serde_json::to_value(a)?,
        Command::ClassifyOrder(a) => serde_json::to_value(a)?,
        Command::Band(a) => serde_json::to_value(a)?,
        Command::RegionMap(a) => serde_json::to_value(a)?,
        Command::Tipping(a) => serde_json::to_value(a)?,
        Command::Fit(a) => serde_json::to_value(a)?,
    })
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Config::from_toml(&text).map_err(|e| {
                Error::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}: {e}", p.display()),
                ))
            })
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let cfg = load_config(cli.common.model.as_deref())?;
    let out = cli.common.out.as_str();
    let produced = match &cli.command {
        Command::Simulate(a) => run_simulate(&cfg, a)?,
        Command::Poincare(a) => run_poincare(&cfg, a)?,
        Command::Mu(a) => run_mu(&cfg, a)?,
        Command::Lambda(a) => run_lambda(&cfg, a)?,
        Command::ClassifyOrder(a) => run_order(&cfg, a)?,
        Command::Band(a) => run_band(&cfg, a)?,
        Command::RegionMap(a) => run_region(&cfg, a, out)?,
        Command::Tipping(a) => run_tipping(&cfg, a, cli.common.quiet)?,
        Command::Fit(a) => run_fit(a)?,
    };
    if !cli.common.quiet {
        for w in &produced.warnings {
            eprintln!("warning: {w}");
        }
    }
    let mut outputs = produced.outputs;
    if out != "-" {
        outputs.push(out.to_string());
    }
    let report = RunReport {
        command: command_name(&cli.command).to_string(),
        config: json!({
            "model": cfg,
            "args": args_value(&cli.command)?,
            "model_file": cli.common.model,
        }),
        determinism: DETERMINISM,
        wall_time_s: cli.common.timing.then(|| started.elapsed().as_secs_f64()),
        outputs,
        warnings: produced.warnings,
        result: produced.result,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match (out, produced.replace_out) {
        ("-", _) => std::io::stdout().write_all(text.as_bytes())?,
        (path, Some(csv_text)) => {
            std::fs::write(path, csv_text)?;
            if !cli.common.quiet {
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
        (path, None) => std::fs::write(path, text)?,
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> std::result::Result<usize, String> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")),
        Err(_) => Ok(0),
    }
}

/// Parse `args` (program name first), run the subcommand and return the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_count(cli.common.threads) {
        Ok(n) => n,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_DOMAIN
            }
        }
    }
}
