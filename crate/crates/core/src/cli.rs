//! Command-line front end: JSON documents in, text reports, CSV traces and
//! JSON run reports out.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
//! 3 inadmissible factors or the solver left the admissible region.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{
    admissibility, curvature_k, face_geometries, laplacian_unchecked,
};
use crate::flows::{seeded_start, solve, FlowTrace, Method, Outcome, SolverConfig};
use crate::numerics::{fd_jacobian, max_eigenvalue};
use crate::schemes::{AdmissibilityReport, Coords, FactorAssignment, SchemeConfig, SchemeKind, Variant};
use crate::topology::{build_with_count, EdgeId, IdealTriangulation};
use crate::Error;

/// Half-width of the box that random starts are drawn from.
pub const RANDOM_START_RADIUS: f64 = 3.0;
const RANDOM_START_TRIES: usize = 1_000_000;

/// Tolerances used by `check`.
pub const CHECK_SYMMETRY_TOL: f64 = 1e-9;
pub const CHECK_FD_TOL: f64 = 1e-6;
pub const CHECK_A_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Inadmissible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Inadmissible(_) => 3,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAdmissible(_) | Error::PathLeavesAdmissible { .. } => CliError::Inadmissible(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------- documents

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub scheme: String,
    pub boundaries: Vec<BoundaryEntry>,
    pub faces: Vec<FaceEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEntry {
    pub id: usize,
    pub alpha: i64,
}

/// A face is either a plain corner triple or corners with per-slot edge keys
/// (`keys[r]` names the edge opposite `corners[r]`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FaceEntry {
    Corners([usize; 3]),
    Keyed { corners: [usize; 3], keys: [u32; 3] },
}

impl FaceEntry {
    fn corners(&self) -> [usize; 3] {
        match self {
            FaceEntry::Corners(c) | FaceEntry::Keyed { corners: c, .. } => *c,
        }
    }

    fn keys(&self) -> [u32; 3] {
        match self {
            FaceEntry::Corners(_) => [0; 3],
            FaceEntry::Keyed { keys, .. } => *keys,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub ends: [usize; 2],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub key: u32,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

fn is_zero(k: &u32) -> bool {
    *k == 0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorsDocument {
    pub coords: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDocument {
    pub kbar: Vec<f64>,
}

/// A parsed and cross-checked surface.
#[derive(Debug, Clone)]
pub struct Surface {
    pub tri: IdealTriangulation,
    pub cfg: SchemeConfig,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

impl SurfaceDocument {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    /// Builds the triangulation and scheme. Structural problems (ids, edge
    /// coverage, topology) are errors; weight constraints are left to
    /// [`SchemeConfig::check`].
    pub fn build(&self) -> Result<Surface, CliError> {
        let kind: SchemeKind = self.scheme.parse().map_err(|e| invalid(format!("scheme: {e}")))?;
        let n = self.boundaries.len();
        let mut alpha = vec![None; n];
        for (pos, b) in self.boundaries.iter().enumerate() {
            if b.id >= n {
                return Err(invalid(format!(
                    "boundaries[{pos}].id: {} out of range, ids must be 0..{n}",
                    b.id
                )));
            }
            if alpha[b.id].replace(b.alpha).is_some() {
                return Err(invalid(format!("boundaries[{pos}].id: duplicate id {}", b.id)));
            }
        }
        let alpha: Vec<i64> = alpha.into_iter().map(|a| a.unwrap_or_default()).collect();

        let corners: Vec<[usize; 3]> = self.faces.iter().map(FaceEntry::corners).collect();
        let keys: Vec<[u32; 3]> = self.faces.iter().map(FaceEntry::keys).collect();
        let tri = build_with_count(n, &corners, Some(&keys)).map_err(|e| invalid(format!("faces: {e}")))?;

        let mut eta = vec![None; tri.n_edges()];
        let mut variants = vec![Variant::Plus; tri.n_edges()];
        for (pos, e) in self.edges.iter().enumerate() {
            let [a, b] = e.ends;
            let id = tri.find_edge(a, b, e.key).ok_or_else(|| {
                invalid(format!(
                    "edges[{pos}].ends: no edge ({a},{b}) with key {} in the triangulation",
                    e.key
                ))
            })?;
            if eta[id.0].replace(e.eta).is_some() {
                return Err(invalid(format!("edges[{pos}]: edge ({a},{b}) key {} listed twice", e.key)));
            }
            if let Some(v) = &e.variant {
                variants[id.0] = v.parse().map_err(|m| invalid(format!("edges[{pos}].variant: {m}")))?;
            }
        }
        let eta = eta
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    let (a, b) = tri.edge(EdgeId(i)).ends;
                    invalid(format!(
                        "edges: missing entry for edge ({a},{b}) key {}",
                        tri.edge(EdgeId(i)).key
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let cfg = SchemeConfig::new(kind, alpha, eta, Some(variants), &tri).map_err(|e| invalid(e.to_string()))?;
        Ok(Surface { tri, cfg })
    }
}

impl FactorsDocument {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn assignment(&self) -> Result<FactorAssignment, CliError> {
        let coords = match self.coords.to_ascii_lowercase().as_str() {
            "u" => Coords::U,
            "f" => Coords::F,
            other => return Err(invalid(format!("coords: expected \"u\" or \"f\", got {other:?}"))),
        };
        Ok(FactorAssignment {
            coords,
            values: self.values.clone(),
        })
    }
}

/// Converts factors to `u`, rejecting wrong lengths (exit 1) and points
/// outside the chart domains (exit 3).
fn factors_to_u(surface: &Surface, doc: &FactorsDocument) -> Result<Vec<f64>, CliError> {
    let n = surface.tri.n_boundaries();
    if doc.values.len() != n {
        return Err(invalid(format!("values: got {} entries, expected {n}", doc.values.len())));
    }
    surface
        .cfg
        .to_u(&doc.assignment()?)
        .map_err(|e| CliError::Inadmissible(e.to_string()))
}

fn describe_report(surface: &Surface, report: &AdmissibilityReport) -> String {
    if report.is_admissible() {
        return "admissible".into();
    }
    let mut lines = Vec::new();
    for b in &report.domain_violations {
        lines.push(format!(
            "boundary {b}: outside chart domain {}",
            surface.cfg.domain_of_u(*b)
        ));
    }
    for (e, c) in &report.degenerate_edges {
        let (a, b) = surface.cfg.edge_ends(*e);
        lines.push(format!("edge {e} ({a},{b}): cosh l = {c:.6e} <= 1"));
    }
    for e in &report.orientation_violations {
        let (a, b) = surface.cfg.edge_ends(*e);
        lines.push(format!("edge {e} ({a},{b}): orientation condition violated"));
    }
    format!("NOT admissible\n  {}", lines.join("\n  "))
}

// -------------------------------------------------------------- run report

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: String,
    pub method: String,
    pub scheme: String,
    pub steps: usize,
    pub rejected_steps: usize,
    pub wall_time_s: f64,
    pub u_start: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub k: Vec<f64>,
    pub kbar: Vec<f64>,
    pub residual: f64,
    /// `E(u) - E(u_start)`.
    pub energy_e: f64,
    pub energy_c: f64,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_edge_length: f64,
    pub laplacian_asymmetry: f64,
    /// Largest eigenvalue of `Delta` at the final point.
    pub max_eigenvalue: f64,
}

impl RunReport {
    pub fn from_trace(
        surface: &Surface,
        trace: &FlowTrace,
        kbar: &[f64],
        wall_time_s: f64,
    ) -> Result<Self, CliError> {
        let (cfg, tri) = (&surface.cfg, &surface.tri);
        let last = trace.last();
        let k = curvature_k(cfg, tri, &last.u)?;
        let geo = face_geometries(cfg, tri, &last.u)?;
        let min_edge_length = geo
            .iter()
            .flat_map(|h| h.lengths)
            .fold(f64::INFINITY, f64::min);
        let lap = laplacian_unchecked(cfg, tri, &last.u)?;
        let max_eig = max_eigenvalue(&lap.matrix).map_err(|e| invalid(e.to_string()))?;
        Ok(Self {
            outcome: trace.outcome.name().into(),
            method: trace.method.name().into(),
            scheme: cfg.kind().name().into(),
            steps: trace.steps(),
            rejected_steps: trace.rejected_steps,
            wall_time_s,
            u_start: trace.rows[0].u.clone(),
            u: last.u.clone(),
            f: cfg.f_vec(&last.u).map_err(|e| invalid(e.to_string()))?,
            residual: last.residual,
            energy_c: last.c,
            k,
            kbar: kbar.to_vec(),
            energy_e: last.e,
            diagnostics: Diagnostics {
                min_edge_length,
                laplacian_asymmetry: lap.asymmetry,
                max_eigenvalue: max_eig,
            },
            warnings: trace.warnings.clone(),
        })
    }
}

/// Writes the trace as CSV: `step,t,dt,residual,E,C,u_0,...`.
pub fn write_trace_csv<W: Write>(trace: &FlowTrace, out: W) -> Result<(), CliError> {
    let n = trace.rows.first().map_or(0, |r| r.u.len());
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| invalid(format!("writing trace: {e}"));
    let mut header: Vec<String> = ["step", "t", "dt", "residual", "E", "C"].map(String::from).to_vec();
    header.extend((0..n).map(|i| format!("u_{i}")));
    w.write_record(&header).map_err(io)?;
    for r in &trace.rows {
        let mut rec = vec![
            r.step.to_string(),
            r.t.to_string(),
            r.dt.to_string(),
            r.residual.to_string(),
            r.e.to_string(),
            r.c.to_string(),
        ];
        rec.extend(r.u.iter().map(f64::to_string));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| invalid(format!("writing trace: {e}")))
}

// ------------------------------------------------------------------- clap

#[derive(Debug, Parser)]
#[command(name = "dcsflow", version, about = "Discrete conformal factors on ideally triangulated surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a surface document: topology and weight constraints.
    Validate { surface: PathBuf },
    /// Print lengths, angles and curvature at given factors.
    Curvature { surface: PathBuf, factors: PathBuf },
    /// Solve K(u) = Kbar.
    Flow(FlowArgs),
    /// Run the derivative oracles at given factors.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    pub surface: PathBuf,
    pub target: PathBuf,
    #[arg(long, default_value = "newton")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `random` (seeded rejection sampling) or a factors file.
    #[arg(long, default_value = "random")]
    pub start: String,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub surface: PathBuf,
    pub factors: PathBuf,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub corrupt_chart: f64,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Validate { surface } => cmd_validate(&surface, &mut out),
        Command::Curvature { surface, factors } => cmd_curvature(&surface, &factors, &mut out),
        Command::Flow(args) => cmd_flow(&args, &mut out),
        Command::Check(args) => cmd_check(&args, &mut out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn wr(out: &mut impl Write, s: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(s).map_err(|e| invalid(format!("stdout: {e}")))
}

macro_rules! say {
    ($out:expr, $($t:tt)*) => { wr($out, format_args!("{}\n", format_args!($($t)*)))? };
}

// --------------------------------------------------------------- commands

pub fn cmd_validate(path: &Path, out: &mut impl Write) -> Result<i32, CliError> {
    let surface = SurfaceDocument::load(path)?.build()?;
    let tri = &surface.tri;
    say!(
        out,
        "N={} |E|={} |F|={} chi={}",
        tri.n_boundaries(),
        tri.n_edges(),
        tri.n_faces(),
        tri.euler_characteristic()
    );
    say!(out, "chi(Sigma)={}", tri.bordered_euler_characteristic());
    say!(out, "scheme {}", surface.cfg.kind());
    let violations = surface.cfg.check();
    if !violations.is_empty() {
        for v in &violations {
            say!(out, "violation {v}");
        }
        return Err(invalid(format!("{} constraint violation(s)", violations.len())));
    }
    say!(out, "constraints ok");
    if let Err(e) = surface.cfg.ensure_solvable() {
        say!(out, "note: {e}");
    }
    Ok(0)
}

pub fn cmd_curvature(surface_path: &Path, factors_path: &Path, out: &mut impl Write) -> Result<i32, CliError> {
    let surface = SurfaceDocument::load(surface_path)?.build()?;
    let doc = FactorsDocument::load(factors_path)?;
    let u = factors_to_u(&surface, &doc)?;
    let (cfg, tri) = (&surface.cfg, &surface.tri);
    let report = admissibility(cfg, tri, &u);
    if !report.hexagons_exist() {
        return Err(CliError::Inadmissible(describe_report(&surface, &report)));
    }
    let geo = face_geometries(cfg, tri, &u)?;
    let k = curvature_k(cfg, tri, &u)?;
    let f = cfg.f_vec(&u).map_err(|e| invalid(e.to_string()))?;
    say!(out, "boundary       u                       f                       K");
    for i in 0..tri.n_boundaries() {
        say!(out, "{i:<8} {:>22.15e} {:>22.15e} {:>22.15e}", u[i], f[i] + 0.0, k[i]);
    }
    say!(out, "edge   ends      length");
    for e in tri.edges() {
        let l = cfg.edge_length(e.id, f[e.ends.0 .0], f[e.ends.1 .0]).map_err(Error::from)?;
        say!(out, "{:<6} ({},{})  {:>22.15e}", e.id, e.ends.0, e.ends.1, l);
    }
    say!(out, "face   boundary  theta");
    for h in &geo {
        for r in 0..3 {
            say!(out, "{:<6} {:<9} {:>22.15e}", h.face, h.corners[r], h.angles[r]);
        }
    }
    say!(out, "admissibility: {}", describe_report(&surface, &report));
    Ok(if report.is_admissible() { 0 } else { 3 })
}

fn load_target(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let doc: TargetDocument = read_json(path)?;
    if doc.kbar.len() != n {
        return Err(invalid(format!("kbar: got {} entries, expected {n}", doc.kbar.len())));
    }
    if let Some(i) = doc.kbar.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(invalid(format!("kbar[{i}]: {} must be positive", doc.kbar[i])));
    }
    Ok(doc.kbar)
}

pub fn cmd_flow(args: &FlowArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let surface = SurfaceDocument::load(&args.surface)?.build()?;
    let (cfg, tri) = (&surface.cfg, &surface.tri);
    cfg.ensure_solvable().map_err(|e| invalid(e.to_string()))?;
    let kbar = load_target(&args.target, tri.n_boundaries())?;
    let solver = SolverConfig {
        method: args.method,
        tol: args.tol,
        dt0: args.dt0,
        max_steps: args.max_steps,
        ..SolverConfig::default()
    };
    solver.validate().map_err(invalid)?;
    let u0 = if args.start == "random" {
        seeded_start(cfg, tri, args.seed, RANDOM_START_RADIUS).ok_or_else(|| {
            CliError::Inadmissible(format!(
                "no admissible start found in {RANDOM_START_TRIES} draws from seed {}",
                args.seed
            ))
        })?
    } else {
        let u = factors_to_u(&surface, &FactorsDocument::load(Path::new(&args.start))?)?;
        let report = admissibility(cfg, tri, &u);
        if !report.is_admissible() {
            return Err(CliError::Inadmissible(format!(
                "start: {}",
                describe_report(&surface, &report)
            )));
        }
        u
    };

    let clock = Instant::now();
    let trace = solve(cfg, tri, &u0, &kbar, &solver)?;
    let wall = clock.elapsed().as_secs_f64();

    if let Some(p) = &args.trace {
        let file = fs::File::create(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        write_trace_csv(&trace, std::io::BufWriter::new(file))?;
    }
    let report = RunReport::from_trace(&surface, &trace, &kbar, wall)?;
    if let Some(p) = &args.report {
        let json = serde_json::to_string_pretty(&report).map_err(|e| invalid(e.to_string()))?;
        fs::write(p, json).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
    }
    say!(out, "outcome {}", report.outcome);
    say!(out, "method {} steps {} rejected {}", report.method, report.steps, report.rejected_steps);
    say!(out, "residual {:.3e}", report.residual);
    say!(out, "u {:?}", report.u);
    for w in &report.warnings {
        say!(out, "warning: {w}");
    }
    Ok(match trace.outcome {
        Outcome::Converged => 0,
        Outcome::MaxSteps | Outcome::Stalled => 2,
        Outcome::LeftAdmissible => 3,
    })
}

/// Outcome of the derivative oracles at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub symmetry_residual: f64,
    pub max_eigenvalue: f64,
    /// `max |Delta - FD| / max |Delta|`.
    pub fd_relative_error: f64,
    /// Largest relative spread of `sinh l_r sinh l_s sinh theta_t` over the
    /// three labellings of a face, compared with `A` from lengths.
    pub a_permutation_residual: f64,
}

impl CheckReport {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if !(self.symmetry_residual <= CHECK_SYMMETRY_TOL) {
            f.push("symmetry residual");
        }
        if !(self.max_eigenvalue < 0.0) {
            f.push("max eigenvalue");
        }
        if !(self.fd_relative_error <= CHECK_FD_TOL) {
            f.push("finite-difference agreement");
        }
        if !(self.a_permutation_residual <= CHECK_A_TOL) {
            f.push("A permutation residual");
        }
        f
    }
}

/// Runs the oracles at an admissible `u`.
pub fn run_checks(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64], h: f64) -> crate::Result<CheckReport> {
    let lap = laplacian_unchecked(cfg, tri, u)?;
    let dense = lap.matrix.to_dense();
    let fd = fd_jacobian(|x| curvature_k(cfg, tri, x), u, h)?;
    let scale = dense.amax().max(f64::MIN_POSITIVE);
    let fd_relative_error = (&dense - &fd).amax() / scale;
    let mut a_res = 0.0f64;
    for g in face_geometries(cfg, tri, u)? {
        for t in 0..3 {
            let (r, s) = ((t + 1) % 3, (t + 2) % 3);
            let a = g.sinh_l[r] * g.sinh_l[s] * g.angles[t].sinh();
            a_res = a_res.max((a - g.a_quantity).abs() / g.a_quantity);
        }
    }
    Ok(CheckReport {
        symmetry_residual: lap.asymmetry,
        max_eigenvalue: max_eigenvalue(&lap.matrix)?,
        fd_relative_error,
        a_permutation_residual: a_res,
    })
}

pub fn cmd_check(args: &CheckArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let mut surface = SurfaceDocument::load(&args.surface)?.build()?;
    if !(args.h > 0.0 && args.h.is_finite()) {
        return Err(invalid(format!("--h: {} must be positive", args.h)));
    }
    if args.corrupt_chart != 0.0 {
        surface.cfg = surface.cfg.clone().with_chart_distortion(args.corrupt_chart);
    }
    let u = factors_to_u(&surface, &FactorsDocument::load(&args.factors)?)?;
    let report = admissibility(&surface.cfg, &surface.tri, &u);
    if !report.hexagons_exist() {
        return Err(CliError::Inadmissible(describe_report(&surface, &report)));
    }
    let r = run_checks(&surface.cfg, &surface.tri, &u, args.h)?;
    say!(out, "symmetry residual        {:.3e} (tol {CHECK_SYMMETRY_TOL:e})", r.symmetry_residual);
    say!(out, "max eigenvalue           {:.6e} (must be < 0)", r.max_eigenvalue);
    say!(out, "fd agreement (h={:e})  {:.3e} (tol {CHECK_FD_TOL:e})", args.h, r.fd_relative_error);
    say!(out, "A permutation residual   {:.3e} (tol {CHECK_A_TOL:e})", r.a_permutation_residual);
    let failures = r.failures();
    if !report.is_admissible() {
        say!(out, "admissibility: {}", describe_report(&surface, &report));
        return Ok(3);
    }
    if failures.is_empty() {
        say!(out, "all checks passed");
        Ok(0)
    } else {
        say!(out, "FAILED: {}", failures.join(", "));
        Ok(1)
    }
}
