//! Solvers for `K(u) = Kbar`: combinatorial Ricci flow, combinatorial Calabi
//! flow (both integrated with classical RK4 and step control), and damped
//! Newton iteration on the convex energy `E`.
//!
//! A tentative step is accepted only if the new state is admissible and
//! neither `E` nor `C` increases; otherwise the step is retried with a
//! smaller `dt`. Every row of a trace is therefore admissible.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::curvature::{
    admissibility, curvature_and_laplacian, curvature_k, energy_c_from_k, residual_inf, step_energy,
};
use crate::error::{Error, Result};
use crate::numerics::cg_solve;
use crate::schemes::SchemeConfig;
use crate::topology::{BoundaryId, IdealTriangulation};

/// Steps below `dt0 * MIN_DT_FACTOR` end the run.
const MIN_DT_FACTOR: f64 = 1e-14;
const CG_TOL: f64 = 1e-12;
/// Coordinates closer than this to a finite domain end trigger a warning.
const WALL_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ricci,
    Calabi,
    Newton,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ricci, Method::Calabi, Method::Newton];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ricci => "ricci",
            Method::Calabi => "calabi",
            Method::Newton => "newton",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    MaxSteps,
    /// Every retry of a step left the admissible region.
    LeftAdmissible,
    /// Admissible steps existed but none decreased the energies before `dt`
    /// underflowed.
    Stalled,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Converged => "CONVERGED",
            Outcome::MaxSteps => "MAX_STEPS",
            Outcome::LeftAdmissible => "LEFT_ADMISSIBLE",
            Outcome::Stalled => "STALLED",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Stop when `max_i |K_i - Kbar_i| <= tol`.
    pub tol: f64,
    pub dt0: f64,
    pub max_steps: usize,
    pub shrink: f64,
    pub grow: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Ricci,
            tol: 1e-10,
            dt0: 0.1,
            max_steps: 100_000,
            shrink: 0.5,
            grow: 1.2,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.dt0 > 0.0) || !self.dt0.is_finite() {
            return Err(format!("dt0 must be positive, got {}", self.dt0));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if !(self.grow > 1.0) {
            return Err(format!("grow must exceed 1, got {}", self.grow));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    /// Step size that produced this row (the damping factor for Newton).
    pub dt: f64,
    pub u: Vec<f64>,
    pub residual: f64,
    /// `E(u) - E(u0)`, accumulated along the trajectory.
    pub e: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub method: Method,
    pub rows: Vec<TraceRow>,
    pub outcome: Outcome,
    /// Tentative steps that were retried with a smaller step size.
    pub rejected_steps: usize,
    pub warnings: Vec<String>,
}

impl FlowTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the initial row")
    }

    pub fn final_u(&self) -> &[f64] {
        &self.last().u
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.last().step
    }

    /// Largest increase of `E` and of `C` between consecutive rows.
    pub fn max_increases(&self) -> (f64, f64) {
        self.rows.windows(2).fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(de, dc), w| {
            (de.max(w[1].e - w[0].e), dc.max(w[1].c - w[0].c))
        })
    }
}

struct State {
    u: Vec<f64>,
    residual: f64,
    c: f64,
}

impl State {
    fn new(cfg: &SchemeConfig, tri: &IdealTriangulation, u: Vec<f64>, kbar: &[f64]) -> Result<Self> {
        let k = curvature_k(cfg, tri, &u)?;
        Ok(Self {
            residual: residual_inf(&k, kbar),
            c: energy_c_from_k(&k, kbar),
            u,
        })
    }
}

fn check_inputs(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
) -> Result<()> {
    cfg.ensure_solvable()?;
    solver.validate().map_err(Error::InvalidTarget)?;
    if kbar.len() != tri.n_boundaries() {
        return Err(Error::InvalidTarget(format!(
            "expected {} values, got {}",
            tri.n_boundaries(),
            kbar.len()
        )));
    }
    if let Some(i) = kbar.iter().position(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::InvalidTarget(format!(
            "component {i} is {}, must be positive",
            kbar[i]
        )));
    }
    if u0.len() != tri.n_boundaries() {
        return Err(Error::Scheme(crate::schemes::SchemeError::LengthMismatch {
            what: "u0",
            got: u0.len(),
            expected: tri.n_boundaries(),
        }));
    }
    let report = admissibility(cfg, tri, u0);
    if !report.is_admissible() {
        return Err(Error::NotAdmissible(report));
    }
    Ok(())
}

fn near_wall(cfg: &SchemeConfig, u: &[f64]) -> Option<usize> {
    u.iter().enumerate().position(|(i, &x)| {
        let d = cfg.domain_of_u(BoundaryId(i));
        (d.lo.is_finite() && x - d.lo < WALL_WARNING) || (d.hi.is_finite() && d.hi - x < WALL_WARNING)
    })
}

/// Runs the solver selected by `solver.method`.
pub fn solve(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
) -> Result<FlowTrace> {
    match solver.method {
        Method::Ricci => flow_ricci(cfg, tri, u0, kbar, solver),
        Method::Calabi => flow_calabi(cfg, tri, u0, kbar, solver),
        Method::Newton => newton_solve(cfg, tri, u0, kbar, solver),
    }
}

/// Combinatorial Ricci flow `du/dt = K - Kbar`.
pub fn flow_ricci(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
) -> Result<FlowTrace> {
    integrate(cfg, tri, u0, kbar, solver, Method::Ricci)
}

/// Combinatorial Calabi flow `du/dt = -Delta (K - Kbar)`.
pub fn flow_calabi(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
) -> Result<FlowTrace> {
    integrate(cfg, tri, u0, kbar, solver, Method::Calabi)
}

fn vector_field(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u: &[f64],
    kbar: &[f64],
    method: Method,
) -> Result<Vec<f64>> {
    match method {
        Method::Calabi => {
            let (k, lap) = curvature_and_laplacian(cfg, tri, u)?;
            let g: Vec<f64> = k.iter().zip(kbar).map(|(a, b)| a - b).collect();
            Ok(lap.matrix.matvec(&g).into_iter().map(|v| -v).collect())
        }
        _ => {
            let k = curvature_k(cfg, tri, u)?;
            Ok(k.iter().zip(kbar).map(|(a, b)| a - b).collect())
        }
    }
}

fn axpy(u: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    u.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

fn rk4_step(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u: &[f64],
    kbar: &[f64],
    method: Method,
    dt: f64,
) -> Result<Vec<f64>> {
    let k1 = vector_field(cfg, tri, u, kbar, method)?;
    let k2 = vector_field(cfg, tri, &axpy(u, 0.5 * dt, &k1), kbar, method)?;
    let k3 = vector_field(cfg, tri, &axpy(u, 0.5 * dt, &k2), kbar, method)?;
    let k4 = vector_field(cfg, tri, &axpy(u, dt, &k3), kbar, method)?;
    Ok((0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

enum Attempt {
    Accepted { state: State, de: f64 },
    Inadmissible,
    NotDescending,
}

/// Admissibility and descent test of a tentative point.
fn assess(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    from: &State,
    candidate: Result<Vec<f64>>,
    kbar: &[f64],
    require_c_decrease: bool,
) -> Result<Attempt> {
    let u = match candidate {
        Ok(u) => u,
        Err(Error::NotAdmissible(_)) => return Ok(Attempt::Inadmissible),
        Err(e) => return Err(e),
    };
    if u.iter().any(|x| !x.is_finite()) || !admissibility(cfg, tri, &u).is_admissible() {
        return Ok(Attempt::Inadmissible);
    }
    let de = match step_energy(cfg, tri, &from.u, &u, kbar) {
        Ok(v) => v,
        Err(Error::PathLeavesAdmissible { .. }) => return Ok(Attempt::Inadmissible),
        Err(e) => return Err(e),
    };
    let state = State::new(cfg, tri, u, kbar)?;
    if de > 0.0 || (require_c_decrease && state.c > from.c) {
        return Ok(Attempt::NotDescending);
    }
    Ok(Attempt::Accepted { state, de })
}

struct Recorder {
    trace: FlowTrace,
    warned: bool,
}

impl Recorder {
    fn new(method: Method, s: &State) -> Self {
        Self {
            trace: FlowTrace {
                method,
                rows: vec![TraceRow {
                    step: 0,
                    t: 0.0,
                    dt: 0.0,
                    u: s.u.clone(),
                    residual: s.residual,
                    e: 0.0,
                    c: s.c,
                }],
                outcome: Outcome::MaxSteps,
                rejected_steps: 0,
                warnings: Vec::new(),
            },
            warned: false,
        }
    }

    fn push(&mut self, cfg: &SchemeConfig, s: &State, dt: f64, de: f64) {
        let last = self.trace.last();
        let row = TraceRow {
            step: last.step + 1,
            t: last.t + dt,
            dt,
            u: s.u.clone(),
            residual: s.residual,
            e: last.e + de,
            c: s.c,
        };
        if !self.warned {
            if let Some(i) = near_wall(cfg, &s.u) {
                self.trace.warnings.push(format!(
                    "step {}: u_{i} = {:e} is within {WALL_WARNING:e} of its domain boundary",
                    row.step, s.u[i]
                ));
                self.warned = true;
            }
        }
        self.trace.rows.push(row);
    }

    fn finish(mut self, outcome: Outcome) -> FlowTrace {
        self.trace.outcome = outcome;
        self.trace
    }
}

fn integrate(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
    method: Method,
) -> Result<FlowTrace> {
    check_inputs(cfg, tri, u0, kbar, solver)?;
    let mut state = State::new(cfg, tri, u0.to_vec(), kbar)?;
    let mut rec = Recorder::new(method, &state);
    if state.residual <= solver.tol {
        return Ok(rec.finish(Outcome::Converged));
    }
    let dt_max = 10.0 * solver.dt0;
    let dt_min = MIN_DT_FACTOR * solver.dt0;
    let mut dt = solver.dt0;
    for _ in 0..solver.max_steps {
        let mut last_failure;
        loop {
            let candidate = rk4_step(cfg, tri, &state.u, kbar, method, dt);
            match assess(cfg, tri, &state, candidate, kbar, true)? {
                Attempt::Accepted { state: next, de } => {
                    state = next;
                    rec.push(cfg, &state, dt, de);
                    break;
                }
                Attempt::Inadmissible => last_failure = Outcome::LeftAdmissible,
                Attempt::NotDescending => last_failure = Outcome::Stalled,
            }
            rec.trace.rejected_steps += 1;
            dt *= solver.shrink;
            if dt < dt_min {
                return Ok(rec.finish(last_failure));
            }
        }
        if state.residual <= solver.tol {
            return Ok(rec.finish(Outcome::Converged));
        }
        dt = (dt * solver.grow).min(dt_max);
    }
    Ok(rec.finish(Outcome::MaxSteps))
}

/// Damped Newton iteration on `E`: solve `(-Delta) delta = K - Kbar` by
/// conjugate gradients and backtrack from the full step until the trial is
/// admissible and `E` does not increase.
pub fn newton_solve(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u0: &[f64],
    kbar: &[f64],
    solver: &SolverConfig,
) -> Result<FlowTrace> {
    check_inputs(cfg, tri, u0, kbar, solver)?;
    let mut state = State::new(cfg, tri, u0.to_vec(), kbar)?;
    let mut rec = Recorder::new(Method::Newton, &state);
    if state.residual <= solver.tol {
        return Ok(rec.finish(Outcome::Converged));
    }
    for _ in 0..solver.max_steps {
        let (k, lap) = curvature_and_laplacian(cfg, tri, &state.u)?;
        let g: Vec<f64> = k.iter().zip(kbar).map(|(a, b)| a - b).collect();
        let delta = cg_solve(&lap.matrix.scaled(-1.0), &g, CG_TOL)?;
        let mut lambda = 1.0;
        let mut last_failure;
        loop {
            let trial = axpy(&state.u, lambda, &delta);
            match assess(cfg, tri, &state, Ok(trial), kbar, false)? {
                Attempt::Accepted { state: next, de } => {
                    state = next;
                    rec.push(cfg, &state, lambda, de);
                    break;
                }
                Attempt::Inadmissible => last_failure = Outcome::LeftAdmissible,
                Attempt::NotDescending => last_failure = Outcome::Stalled,
            }
            rec.trace.rejected_steps += 1;
            lambda *= solver.shrink;
            if lambda < MIN_DT_FACTOR {
                return Ok(rec.finish(last_failure));
            }
        }
        if state.residual <= solver.tol {
            return Ok(rec.finish(Outcome::Converged));
        }
    }
    Ok(rec.finish(Outcome::MaxSteps))
}

/// Draws a uniformly random point of `domain ∩ [-radius, radius]^N` and
/// keeps it if admissible; `None` after `max_tries` rejections.
pub fn random_admissible_start<R: Rng>(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    rng: &mut R,
    radius: f64,
    max_tries: usize,
) -> Option<Vec<f64>> {
    let boxes: Vec<(f64, f64)> = (0..tri.n_boundaries())
        .map(|i| {
            let d = cfg.domain_of_u(BoundaryId(i));
            (d.lo.max(-radius), d.hi.min(radius))
        })
        .collect();
    for _ in 0..max_tries {
        let u: Vec<f64> = boxes.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        if admissibility(cfg, tri, &u).is_admissible() {
            return Some(u);
        }
    }
    None
}

/// Reproducible random start from `seed` (ChaCha8 stream).
pub fn seeded_start(cfg: &SchemeConfig, tri: &IdealTriangulation, seed: u64, radius: f64) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_admissible_start(cfg, tri, &mut rng, radius, 1_000_000)
}

/// Perturbs `u_star` by a random vector of Euclidean norm `size`, runs
/// `method` toward `Kbar = K(u_star)` and reports whether it returns to
/// `u_star` within `1e-8` in every coordinate.
pub fn local_basin_check(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u_star: &[f64],
    size: f64,
    method: Method,
    seed: u64,
) -> Result<bool> {
    let kbar = curvature_k(cfg, tri, u_star)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir: Vec<f64> = (0..u_star.len()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u0: Vec<f64> = u_star
        .iter()
        .zip(&dir)
        .map(|(u, d)| u + size * d / norm)
        .collect();
    let trace = solve(cfg, tri, &u0, &kbar, &SolverConfig::with_method(method))?;
    let close = trace
        .final_u()
        .iter()
        .zip(u_star)
        .all(|(a, b)| (a - b).abs() <= 1e-8);
    Ok(trace.outcome == Outcome::Converged && close)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::SchemeKind;
    use crate::topology::build_triangulation;

    const TETRA: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

    fn setup() -> (IdealTriangulation, SchemeConfig, Vec<f64>) {
        let tri = build_triangulation(&TETRA).unwrap();
        let cfg = SchemeConfig::new(SchemeKind::Dcs1, vec![0; 4], vec![3.0; 6], None, &tri).unwrap();
        let kbar = vec![3.0 * 2f64.acosh(); 4];
        (tri, cfg, kbar)
    }

    const U0: [f64; 4] = [-0.8, -1.3, -0.9, -1.1];

    #[test]
    fn all_methods_reach_the_equilateral_point() {
        let (tri, cfg, kbar) = setup();
        for m in Method::ALL {
            let tr = solve(&cfg, &tri, &U0, &kbar, &SolverConfig::with_method(m)).unwrap();
            assert_eq!(tr.outcome, Outcome::Converged, "{m}");
            for x in tr.final_u() {
                assert!((x + 1.0).abs() < 1e-8, "{m}: {x}");
            }
            let (de, dc) = tr.max_increases();
            assert!(de <= 1e-12 && (m == Method::Newton || dc <= 1e-12));
            assert!(tr.rows.windows(2).all(|w| w[1].t > w[0].t));
            if m == Method::Newton {
                assert!(tr.steps() <= 10, "newton took {}", tr.steps());
            }
        }
    }

    #[test]
    fn start_at_solution_takes_no_steps() {
        let (tri, cfg, kbar) = setup();
        for m in Method::ALL {
            let tr = solve(&cfg, &tri, &[-1.0; 4], &kbar, &SolverConfig::with_method(m)).unwrap();
            assert_eq!(tr.outcome, Outcome::Converged);
            assert_eq!(tr.steps(), 0);
        }
    }

    #[test]
    fn max_steps_is_an_outcome() {
        let (tri, cfg, kbar) = setup();
        let solver = SolverConfig {
            max_steps: 1,
            ..SolverConfig::default()
        };
        let tr = flow_ricci(&cfg, &tri, &U0, &kbar, &solver).unwrap();
        assert_eq!(tr.outcome, Outcome::MaxSteps);
        assert!(tr.last().residual > solver.tol);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (tri, cfg, kbar) = setup();
        let s = SolverConfig::default();
        assert!(matches!(
            flow_ricci(&cfg, &tri, &[-2.0; 4], &kbar, &s),
            Err(Error::NotAdmissible(_))
        ));
        assert!(matches!(
            flow_ricci(&cfg, &tri, &U0, &[4.0, 0.0, 4.0, 4.0], &s),
            Err(Error::InvalidTarget(_))
        ));
        let unsupported = SchemeConfig::new(SchemeKind::Dcs3, vec![-1; 4], vec![3.0; 6], None, &tri).unwrap();
        assert!(matches!(
            flow_ricci(&unsupported, &tri, &[-1.0; 4], &kbar, &s),
            Err(Error::Scheme(crate::schemes::SchemeError::Unsupported(_)))
        ));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let (tri, cfg, kbar) = setup();
        let a = seeded_start(&cfg, &tri, 7, 3.0).unwrap();
        let b = seeded_start(&cfg, &tri, 7, 3.0).unwrap();
        assert_eq!(a, b);
        let s = SolverConfig::with_method(Method::Calabi);
        let ta = flow_calabi(&cfg, &tri, &a, &kbar, &s).unwrap();
        let tb = flow_calabi(&cfg, &tri, &b, &kbar, &s).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn basin_check_trivial_perturbation() {
        let (tri, cfg, _) = setup();
        assert!(local_basin_check(&cfg, &tri, &[-1.0; 4], 0.0, Method::Ricci, 1).unwrap());
        assert!(local_basin_check(&cfg, &tri, &[-1.0; 4], 1e-2, Method::Calabi, 1).unwrap());
    }
}
