//! Discrete conformal structures: weights, the coordinate charts between the
//! factors `f` and the solver coordinates `u`, edge-length laws and
//! admissibility.
//!
//! Every scheme belongs to one of three families that share a chart shape:
//!
//! * hyperbolic (DCS3, MIXED1): `C = sqrt|1 + alpha e^{2f}|`
//! * circular (NEW1, MIXED2, alpha = -1 and `e^{2f} > 1`): `C = sqrt(e^{2f} - 1)`
//! * exponential (DCS1, MIXED3): `C = e^f`
//!
//! and in all of them `df/du = eps * C`, where `eps = +-1` is the sign class of
//! the boundary. Pure schemes have every class `+1`. In mixed schemes the
//! MINUS edges must be exactly the edges joining the two classes, which is the
//! only way a single chart per boundary can make the curvature Jacobian
//! symmetric.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::{BoundaryId, EdgeId, IdealTriangulation};

/// Direct evaluation is used while every factor stays below this; above it
/// the length laws are evaluated with `e^{f_i + f_j}` factored out.
const LOG_SCALE_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Dcs3,
    Dcs1,
    New1,
    Mixed1,
    Mixed2,
    Mixed3,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::Dcs3,
        SchemeKind::Dcs1,
        SchemeKind::New1,
        SchemeKind::Mixed1,
        SchemeKind::Mixed2,
        SchemeKind::Mixed3,
    ];

    pub fn family(self) -> Family {
        match self {
            SchemeKind::Dcs3 | SchemeKind::Mixed1 => Family::Hyperbolic,
            SchemeKind::New1 | SchemeKind::Mixed2 => Family::Circular,
            SchemeKind::Dcs1 | SchemeKind::Mixed3 => Family::Exponential,
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(
            self,
            SchemeKind::Mixed1 | SchemeKind::Mixed2 | SchemeKind::Mixed3
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Dcs3 => "DCS3",
            SchemeKind::Dcs1 => "DCS1",
            SchemeKind::New1 => "NEW1",
            SchemeKind::Mixed1 => "MIXED1",
            SchemeKind::Mixed2 => "MIXED2",
            SchemeKind::Mixed3 => "MIXED3",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Hyperbolic,
    Circular,
    Exponential,
}

/// Per-edge choice of length law inside a mixed scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Plus,
    Minus,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PLUS" | "+" => Ok(Variant::Plus),
            "MINUS" | "-" => Ok(Variant::Minus),
            _ => Err(format!("unknown variant {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    U,
    F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorAssignment {
    pub coords: Coords,
    pub values: Vec<f64>,
}

impl FactorAssignment {
    pub fn u(values: Vec<f64>) -> Self {
        Self {
            coords: Coords::U,
            values,
        }
    }

    pub fn f(values: Vec<f64>) -> Self {
        Self {
            coords: Coords::F,
            values,
        }
    }
}

/// Open interval `(lo, hi)`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const NEGATIVE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: 0.0,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    fn mirrored(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("{what}: got {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("boundary {boundary}: alpha must be -1, 0 or 1, got {alpha}")]
    InvalidAlpha { boundary: usize, alpha: i64 },
    #[error("boundary {boundary}: {coord} = {value} outside chart domain {domain}")]
    DomainError {
        boundary: usize,
        coord: &'static str,
        value: f64,
        domain: Interval,
    },
    #[error("edge {edge}: cosh l = {cosh_l} <= 1, not admissible")]
    NotAdmissible { edge: EdgeId, cosh_l: f64 },
    #[error("constraint violations: {}", join_violations(.0))]
    Constraints(Vec<Violation>),
    #[error("unsupported by the solvers: {0}")]
    Unsupported(String),
}

/// Per-boundary chart shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// alpha = 0: `u = eps f`.
    Identity,
    /// alpha = 1: `u = -eps asinh(e^{-f})`.
    HypPos,
    /// alpha = -1 in the hyperbolic family, f < 0: `u = -eps atanh(sqrt(1 - e^{2f}))`.
    HypNeg,
    /// `u = -eps arcsin(e^{-f})`, f > 0.
    Circular,
    /// `u = -eps e^{-f}`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    kind: SchemeKind,
    alpha: Vec<i8>,
    eta: Vec<f64>,
    variants: Vec<Variant>,
    ends: Vec<(usize, usize)>,
    sign: Vec<f64>,
    sign_consistent: bool,
    chart_distortion: f64,
}

/// Length data for one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEval {
    pub length: f64,
    /// `cosh l`, possibly infinite when the log-scaled path was needed.
    pub cosh_l: f64,
    pub sinh_l: f64,
}

/// Result of an admissibility test.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmissibilityReport {
    /// Boundaries whose coordinate lies outside the chart domain.
    pub domain_violations: Vec<BoundaryId>,
    /// Edges with `cosh l <= 1` (or not finite), with the computed value.
    pub degenerate_edges: Vec<(EdgeId, f64)>,
    /// MINUS edges of a mixed scheme where the plus-class end does not
    /// dominate: `C_i <= C_k cosh l_ik`.
    pub orientation_violations: Vec<EdgeId>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.domain_violations.is_empty()
            && self.degenerate_edges.is_empty()
            && self.orientation_violations.is_empty()
    }

    /// Whether every hexagon exists, ignoring the orientation condition.
    pub fn hexagons_exist(&self) -> bool {
        self.domain_violations.is_empty() && self.degenerate_edges.is_empty()
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_admissible() {
            return f.write_str("admissible");
        }
        let mut parts = Vec::new();
        if !self.domain_violations.is_empty() {
            let ids: Vec<String> = self.domain_violations.iter().map(|b| b.to_string()).collect();
            parts.push(format!("outside domain at boundaries [{}]", ids.join(",")));
        }
        if !self.degenerate_edges.is_empty() {
            let ids: Vec<String> = self
                .degenerate_edges
                .iter()
                .map(|(e, c)| format!("{e} (cosh l = {c:.6})"))
                .collect();
            parts.push(format!("degenerate edges [{}]", ids.join(", ")));
        }
        if !self.orientation_violations.is_empty() {
            let ids: Vec<String> = self.orientation_violations.iter().map(|e| e.to_string()).collect();
            parts.push(format!("orientation violated on edges [{}]", ids.join(",")));
        }
        f.write_str(&parts.join("; "))
    }
}

fn arccosh_from_excess(m: f64) -> f64 {
    // arccosh(1 + m) without cancellation near 1
    (m + (m * (m + 2.0)).sqrt()).ln_1p()
}

/// ln sinh(x) for x > 0.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
    } else {
        x.sinh().ln()
    }
}

/// ln cosh(x).
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl SchemeConfig {
    /// Builds a scheme over `tri`. `alpha` is per boundary, `eta` and
    /// `variants` per edge in edge-id order. Pure schemes must not carry MINUS
    /// variants; `variants = None` means all PLUS.
    pub fn new(
        kind: SchemeKind,
        alpha: Vec<i64>,
        eta: Vec<f64>,
        variants: Option<Vec<Variant>>,
        tri: &IdealTriangulation,
    ) -> Result<Self, SchemeError> {
        let n = tri.n_boundaries();
        let m = tri.n_edges();
        if alpha.len() != n {
            return Err(SchemeError::LengthMismatch {
                what: "alpha",
                got: alpha.len(),
                expected: n,
            });
        }
        if eta.len() != m {
            return Err(SchemeError::LengthMismatch {
                what: "eta",
                got: eta.len(),
                expected: m,
            });
        }
        let variants = variants.unwrap_or_else(|| vec![Variant::Plus; m]);
        if variants.len() != m {
            return Err(SchemeError::LengthMismatch {
                what: "variants",
                got: variants.len(),
                expected: m,
            });
        }
        let mut alpha8 = Vec::with_capacity(n);
        for (i, &a) in alpha.iter().enumerate() {
            if !(-1..=1).contains(&a) {
                return Err(SchemeError::InvalidAlpha { boundary: i, alpha: a });
            }
            alpha8.push(a as i8);
        }
        let ends: Vec<(usize, usize)> = tri.edges().iter().map(|e| (e.ends.0 .0, e.ends.1 .0)).collect();
        let (sign, sign_consistent) = sign_classes(n, &ends, &variants);
        Ok(Self {
            kind,
            alpha: alpha8,
            eta,
            variants,
            ends,
            sign,
            sign_consistent,
            chart_distortion: 0.0,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn family(&self) -> Family {
        self.kind.family()
    }

    pub fn n_boundaries(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_edges(&self) -> usize {
        self.eta.len()
    }

    pub fn alpha(&self, i: BoundaryId) -> i8 {
        self.alpha[i.0]
    }

    pub fn eta(&self, e: EdgeId) -> f64 {
        self.eta[e.0]
    }

    pub fn variant(&self, e: EdgeId) -> Variant {
        self.variants[e.0]
    }

    pub fn edge_ends(&self, e: EdgeId) -> (usize, usize) {
        self.ends[e.0]
    }

    /// Sign class `eps_i` of boundary `i`.
    pub fn sign(&self, i: BoundaryId) -> f64 {
        self.sign[i.0]
    }

    /// Test hook: perturbs the chart derivative by `e^{d f}`, which breaks the
    /// symmetry of the curvature Jacobian for any `d != 0`.
    #[doc(hidden)]
    pub fn with_chart_distortion(mut self, d: f64) -> Self {
        self.chart_distortion = d;
        self
    }

    #[doc(hidden)]
    pub fn chart_distortion(&self) -> f64 {
        self.chart_distortion
    }

    /// True when the scheme's flows are expected to converge from any
    /// admissible start: DCS3, DCS1, and NEW1 with every `eta <= 0`.
    pub fn global_convergence(&self) -> bool {
        match self.kind {
            SchemeKind::Dcs3 | SchemeKind::Dcs1 => true,
            SchemeKind::New1 => self.eta.iter().all(|&e| e <= 0.0),
            _ => false,
        }
    }

    fn chart(&self, i: usize) -> Chart {
        match self.family() {
            Family::Hyperbolic => match self.alpha[i] {
                0 => Chart::Identity,
                1 => Chart::HypPos,
                _ => Chart::HypNeg,
            },
            Family::Circular => Chart::Circular,
            Family::Exponential => Chart::Exponential,
        }
    }

    /// Lists every violated weight or structure constraint.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut edge_violation = |e: usize, msg: String| {
            out.push(Violation {
                field: format!("edges[{e}]"),
                message: msg,
            })
        };
        for (e, (&eta, &(a, b))) in self.eta.iter().zip(&self.ends).enumerate() {
            if !eta.is_finite() {
                edge_violation(e, format!("eta = {eta} is not finite"));
                continue;
            }
            let aa = f64::from(self.alpha[a]) * f64::from(self.alpha[b]);
            match self.kind {
                SchemeKind::Dcs3 => {
                    if !(eta > 0.0) {
                        edge_violation(e, format!("eta = {eta} must be > 0"));
                    }
                    if !(eta > aa) {
                        edge_violation(e, format!("eta = {eta} must exceed alpha_i*alpha_j = {aa}"));
                    }
                }
                SchemeKind::Dcs1 | SchemeKind::Mixed3 => {
                    if !(eta > 0.0) {
                        edge_violation(e, format!("eta = {eta} must be > 0"));
                    }
                }
                SchemeKind::New1 => {
                    if !(eta > -1.0) {
                        edge_violation(e, format!("eta = {eta} must be > -1"));
                    }
                }
                SchemeKind::Mixed1 => {
                    if !(eta > 1.0) {
                        edge_violation(e, format!("eta = {eta} must be > 1"));
                    }
                }
                SchemeKind::Mixed2 => {
                    if !(eta >= 1.0) {
                        edge_violation(e, format!("eta = {eta} must be >= 1"));
                    }
                }
            }
            if !self.kind.is_mixed() && self.variants[e] == Variant::Minus {
                edge_violation(e, format!("variant MINUS is only meaningful for mixed schemes, not {}", self.kind));
            }
        }
        if self.family() == Family::Circular {
            for (i, &a) in self.alpha.iter().enumerate() {
                if a != -1 {
                    out.push(Violation {
                        field: format!("boundaries[{i}].alpha"),
                        message: format!("{} requires alpha = -1, got {a}", self.kind),
                    });
                }
            }
        }
        if self.kind.is_mixed() {
            if !self.sign_consistent {
                out.push(Violation {
                    field: "edges.variant".into(),
                    message: "MINUS edges must be exactly the edges between two classes of boundaries \
                              (every face needs an even number of MINUS edges)"
                        .into(),
                });
            } else {
                for (e, &(a, b)) in self.ends.iter().enumerate() {
                    if self.sign[a] < 0.0 && self.sign[b] < 0.0 {
                        out.push(Violation {
                            field: format!("edges[{e}].variant"),
                            message: "PLUS edge between two boundaries that carry MINUS edges; \
                                      each face may have at most one boundary meeting MINUS edges"
                                .into(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Errors unless the solvers can run on this configuration.
    pub fn ensure_solvable(&self) -> Result<(), SchemeError> {
        let v = self.check();
        if !v.is_empty() {
            return Err(SchemeError::Constraints(v));
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            match self.kind {
                SchemeKind::Dcs3 if a == -1 => {
                    return Err(SchemeError::Unsupported(format!(
                        "boundary {i}: alpha = -1 is evaluation-only for DCS3"
                    )))
                }
                SchemeKind::Mixed1 if self.sign[i] > 0.0 && a == -1 => {
                    return Err(SchemeError::Unsupported(format!(
                        "boundary {i}: alpha = -1 needs MINUS edges at the boundary in MIXED1"
                    )))
                }
                SchemeKind::Mixed1 if self.sign[i] < 0.0 && a != -1 => {
                    return Err(SchemeError::Unsupported(format!(
                        "boundary {i}: a boundary meeting MINUS edges needs alpha = -1 in MIXED1 \
                         (the curvature Jacobian has a positive diagonal entry otherwise)"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Open domain of `f_i` on which the chart is defined.
    pub fn domain_of_f(&self, i: BoundaryId) -> Interval {
        match self.chart(i.0) {
            Chart::HypNeg => Interval::NEGATIVE,
            Chart::Circular => Interval::POSITIVE,
            _ => Interval::REAL,
        }
    }

    /// Open domain of `u_i`.
    pub fn domain_of_u(&self, i: BoundaryId) -> Interval {
        let base = match self.chart(i.0) {
            Chart::Identity => Interval::REAL,
            Chart::HypPos | Chart::HypNeg | Chart::Exponential => Interval::NEGATIVE,
            Chart::Circular => Interval {
                lo: -FRAC_PI_2,
                hi: 0.0,
            },
        };
        if self.sign[i.0] < 0.0 {
            base.mirrored()
        } else {
            base
        }
    }

    pub fn u_from_f(&self, i: BoundaryId, f: f64) -> Result<f64, SchemeError> {
        let dom = self.domain_of_f(i);
        if !dom.contains(f) {
            return Err(SchemeError::DomainError {
                boundary: i.0,
                coord: "f",
                value: f,
                domain: dom,
            });
        }
        let v = match self.chart(i.0) {
            Chart::Identity => f,
            Chart::HypPos => {
                // asinh(e^{-f}), stable for both signs of f
                let a = if f >= 0.0 {
                    (-f).exp().asinh()
                } else {
                    -f + (1.0 + (1.0 + (2.0 * f).exp()).sqrt()).ln()
                };
                -a
            }
            Chart::HypNeg => {
                // atanh(s) with s = sqrt(1 - e^{2f}) written as ln(1 + s) - f
                let s = (-(2.0 * f).exp_m1()).sqrt();
                -((1.0 + s).ln() - f)
            }
            Chart::Circular => {
                // arcsin(e^{-f}) = atan2(1, sqrt(e^{2f} - 1))
                let s = (2.0 * f).exp_m1().sqrt();
                -(1.0f64).atan2(s)
            }
            Chart::Exponential => -(-f).exp(),
        };
        Ok(self.sign[i.0] * v)
    }

    pub fn f_from_u(&self, i: BoundaryId, u: f64) -> Result<f64, SchemeError> {
        let dom = self.domain_of_u(i);
        if !dom.contains(u) {
            return Err(SchemeError::DomainError {
                boundary: i.0,
                coord: "u",
                value: u,
                domain: dom,
            });
        }
        // x is the coordinate folded onto the eps = +1 branch
        let x = self.sign[i.0] * u;
        let f = match self.chart(i.0) {
            Chart::Identity => x,
            Chart::HypPos => -ln_sinh(-x),
            Chart::HypNeg => -ln_cosh(x),
            Chart::Circular => {
                let y = -x;
                if y < std::f64::consts::FRAC_PI_4 {
                    -y.sin().ln()
                } else {
                    let c = (FRAC_PI_2 - y).sin();
                    -0.5 * (-(c * c)).ln_1p()
                }
            }
            Chart::Exponential => -(-x).ln(),
        };
        Ok(f)
    }

    /// Converts a whole assignment to f-coordinates.
    pub fn to_f(&self, a: &FactorAssignment) -> Result<Vec<f64>, SchemeError> {
        self.check_len(&a.values)?;
        match a.coords {
            Coords::F => {
                for (i, &f) in a.values.iter().enumerate() {
                    let dom = self.domain_of_f(BoundaryId(i));
                    if !dom.contains(f) {
                        return Err(SchemeError::DomainError {
                            boundary: i,
                            coord: "f",
                            value: f,
                            domain: dom,
                        });
                    }
                }
                Ok(a.values.clone())
            }
            Coords::U => self.f_vec(&a.values),
        }
    }

    /// Converts a whole assignment to u-coordinates.
    pub fn to_u(&self, a: &FactorAssignment) -> Result<Vec<f64>, SchemeError> {
        self.check_len(&a.values)?;
        match a.coords {
            Coords::U => {
                for (i, &u) in a.values.iter().enumerate() {
                    let dom = self.domain_of_u(BoundaryId(i));
                    if !dom.contains(u) {
                        return Err(SchemeError::DomainError {
                            boundary: i,
                            coord: "u",
                            value: u,
                            domain: dom,
                        });
                    }
                }
                Ok(a.values.clone())
            }
            Coords::F => a
                .values
                .iter()
                .enumerate()
                .map(|(i, &f)| self.u_from_f(BoundaryId(i), f))
                .collect(),
        }
    }

    pub fn f_vec(&self, u: &[f64]) -> Result<Vec<f64>, SchemeError> {
        self.check_len(u)?;
        u.iter()
            .enumerate()
            .map(|(i, &x)| self.f_from_u(BoundaryId(i), x))
            .collect()
    }

    fn check_len(&self, v: &[f64]) -> Result<(), SchemeError> {
        if v.len() != self.n_boundaries() {
            return Err(SchemeError::LengthMismatch {
                what: "factors",
                got: v.len(),
                expected: self.n_boundaries(),
            });
        }
        Ok(())
    }

    /// Magnitude factor `C_i = |df/du|` at `f`.
    pub fn magnitude(&self, i: BoundaryId, f: f64) -> f64 {
        match self.chart(i.0) {
            Chart::Identity => 1.0,
            Chart::HypPos => 1.0f64.hypot(f.exp()),
            Chart::HypNeg => (-(2.0 * f).exp_m1()).sqrt(),
            Chart::Circular => (2.0 * f).exp_m1().sqrt(),
            Chart::Exponential => f.exp(),
        }
    }

    /// Chart derivative `df/du` at `f`.
    pub fn df_du(&self, i: BoundaryId, f: f64) -> f64 {
        let c = self.sign[i.0] * self.magnitude(i, f);
        if self.chart_distortion != 0.0 {
            c * (self.chart_distortion * f).exp()
        } else {
            c
        }
    }

    /// Sign of the product term in the edge's length law:
    /// `cosh l = lambda * p + eta e^{f_i + f_j}`.
    fn law_sign(&self, e: EdgeId) -> f64 {
        let minus = self.variants[e.0] == Variant::Minus;
        match (self.family(), minus) {
            (Family::Circular, false) | (Family::Hyperbolic, true) | (Family::Exponential, true) => 1.0,
            _ => -1.0,
        }
    }

    /// `sigma = +1` for PLUS laws and `-1` for MINUS laws; enters `coth d`.
    fn sigma(&self, e: EdgeId) -> f64 {
        match self.variants[e.0] {
            Variant::Plus => 1.0,
            Variant::Minus => -1.0,
        }
    }

    /// Evaluates `cosh l`, `sinh l` and `l` for edge `e`. `f_a` belongs to
    /// the first endpoint in [`Self::edge_ends`].
    pub fn edge_eval(&self, e: EdgeId, f_a: f64, f_b: f64) -> Result<EdgeEval, SchemeError> {
        let (a, b) = self.ends[e.0];
        let eta = self.eta[e.0];
        let lam = self.law_sign(e);
        if f_a.max(f_b) <= LOG_SCALE_THRESHOLD {
            let p = match self.family() {
                Family::Exponential => (f_b - f_a).cosh(),
                _ => self.magnitude(BoundaryId(a), f_a) * self.magnitude(BoundaryId(b), f_b),
            };
            let x = lam * p + eta * (f_a + f_b).exp();
            let m = lam * p + eta * (f_a + f_b).exp() - 1.0;
            if !(m > 0.0) || !m.is_finite() {
                return Err(SchemeError::NotAdmissible { edge: e, cosh_l: x });
            }
            return Ok(EdgeEval {
                length: arccosh_from_excess(m),
                cosh_l: x,
                sinh_l: (m * (m + 2.0)).sqrt(),
            });
        }
        // cosh l = e^{f_a + f_b} (eta + lambda q)
        let q = match self.family() {
            Family::Exponential => 0.5 * ((-2.0 * f_a).exp() + (-2.0 * f_b).exp()),
            Family::Circular => ((-(-2.0 * f_a).exp_m1()) * (-(-2.0 * f_b).exp_m1())).sqrt(),
            Family::Hyperbolic => {
                let t = |f: f64, al: i8| ((-2.0 * f).exp() + f64::from(al)).abs();
                (t(f_a, self.alpha[a]) * t(f_b, self.alpha[b])).sqrt()
            }
        };
        let y = eta + lam * q;
        let ln_x = f_a + f_b + y.ln();
        if !(y > 0.0) || !(ln_x > 0.0) {
            return Err(SchemeError::NotAdmissible {
                edge: e,
                cosh_l: ln_x.exp(),
            });
        }
        let length = if ln_x > 20.0 {
            // arccosh X = ln X + ln(1 + sqrt(1 - X^-2))
            ln_x + (1.0 + (1.0 - (-2.0 * ln_x).exp()).sqrt()).ln()
        } else {
            arccosh_from_excess(ln_x.exp_m1())
        };
        let x = ln_x.exp();
        Ok(EdgeEval {
            length,
            cosh_l: x,
            sinh_l: length.sinh(),
        })
    }

    /// Length `l` of edge `e`.
    pub fn edge_length(&self, e: EdgeId, f_a: f64, f_b: f64) -> Result<f64, SchemeError> {
        self.edge_eval(e, f_a, f_b).map(|ev| ev.length)
    }

    /// `coth d` for the edge `e` oriented from boundary `from` to its other
    /// end: `(sigma C_to + C_from cosh l) / (C_from sinh l)`. This is
    /// `dl/df_from`.
    pub fn coth_d(&self, e: EdgeId, from: BoundaryId, f_from: f64, f_to: f64, l: f64) -> Result<f64, SchemeError> {
        let (a, b) = self.ends[e.0];
        let to = if from.0 == a {
            b
        } else if from.0 == b {
            a
        } else {
            panic!("boundary {from} is not an end of edge {e}");
        };
        if !(l > 0.0) {
            return Err(SchemeError::NotAdmissible {
                edge: e,
                cosh_l: l.cosh(),
            });
        }
        for (idx, f) in [(from.0, f_from), (to, f_to)] {
            let dom = self.domain_of_f(BoundaryId(idx));
            if !dom.contains(f) {
                return Err(SchemeError::DomainError {
                    boundary: idx,
                    coord: "f",
                    value: f,
                    domain: dom,
                });
            }
        }
        Ok(self.coth_d_raw(e, from, BoundaryId(to), f_from, f_to, l.cosh(), l.sinh()))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn coth_d_raw(
        &self,
        e: EdgeId,
        from: BoundaryId,
        to: BoundaryId,
        f_from: f64,
        f_to: f64,
        cosh_l: f64,
        sinh_l: f64,
    ) -> f64 {
        let c_from = self.magnitude(from, f_from);
        let c_to = self.magnitude(to, f_to);
        (self.sigma(e) * c_to + c_from * cosh_l) / (c_from * sinh_l)
    }

    /// Tests `u` (domain, edge lengths, and for mixed schemes the
    /// orientation condition on MINUS edges).
    pub fn admissible(&self, tri: &IdealTriangulation, u: &FactorAssignment) -> AdmissibilityReport {
        let mut report = AdmissibilityReport::default();
        if u.values.len() != self.n_boundaries() || tri.n_edges() != self.n_edges() {
            report.domain_violations = (0..self.n_boundaries()).map(BoundaryId).collect();
            return report;
        }
        let mut f = vec![f64::NAN; u.values.len()];
        for (i, &x) in u.values.iter().enumerate() {
            let b = BoundaryId(i);
            let conv = match u.coords {
                Coords::U => self.f_from_u(b, x),
                Coords::F => {
                    if self.domain_of_f(b).contains(x) {
                        Ok(x)
                    } else {
                        Err(SchemeError::DomainError {
                            boundary: i,
                            coord: "f",
                            value: x,
                            domain: self.domain_of_f(b),
                        })
                    }
                }
            };
            match conv {
                Ok(v) => f[i] = v,
                Err(_) => report.domain_violations.push(b),
            }
        }
        if !report.domain_violations.is_empty() {
            return report;
        }
        self.admissible_f_into(&f, &mut report);
        report
    }

    /// Admissibility for factors already in f-coordinates (inside their domains).
    pub fn admissible_f(&self, f: &[f64]) -> AdmissibilityReport {
        let mut report = AdmissibilityReport::default();
        self.admissible_f_into(f, &mut report);
        report
    }

    fn admissible_f_into(&self, f: &[f64], report: &mut AdmissibilityReport) {
        for (idx, &(a, b)) in self.ends.iter().enumerate() {
            let e = EdgeId(idx);
            match self.edge_eval(e, f[a], f[b]) {
                Ok(ev) => {
                    if self.variants[idx] == Variant::Minus && self.sign[a] != self.sign[b] {
                        let (i, k) = if self.sign[a] > 0.0 { (a, b) } else { (b, a) };
                        let ci = self.magnitude(BoundaryId(i), f[i]);
                        let ck = self.magnitude(BoundaryId(k), f[k]);
                        if !(ci > ck * ev.cosh_l) {
                            report.orientation_violations.push(e);
                        }
                    }
                }
                Err(SchemeError::NotAdmissible { cosh_l, .. }) => report.degenerate_edges.push((e, cosh_l)),
                Err(_) => report.degenerate_edges.push((e, f64::NAN)),
            }
        }
    }
}

/// Two-colours the boundary graph so that MINUS edges join different classes
/// and PLUS edges join equal ones. In each connected component the class
/// that contains a PLUS edge stays `+1`; if neither does, the class of the
/// lowest index stays `+1`. Returns the signs and whether the colouring is
/// consistent.
fn sign_classes(n: usize, ends: &[(usize, usize)], variants: &[Variant]) -> (Vec<f64>, bool) {
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (&(a, b), &v) in ends.iter().zip(variants) {
        let flip = v == Variant::Minus;
        adj[a].push((b, flip));
        adj[b].push((a, flip));
    }
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut consistent = true;
    let mut sign = vec![1.0; n];
    for root in 0..n {
        if colour[root].is_some() {
            continue;
        }
        colour[root] = Some(false);
        let mut component = vec![root];
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            let cx = colour[x].unwrap_or(false);
            for &(y, flip) in &adj[x] {
                let want = cx ^ flip;
                match colour[y] {
                    None => {
                        colour[y] = Some(want);
                        component.push(y);
                        stack.push(y);
                    }
                    Some(c) if c != want => consistent = false,
                    _ => {}
                }
            }
        }
        // class `true` becomes the minus class unless it holds a PLUS edge
        let plus_inside_true = component.iter().any(|&x| {
            colour[x] == Some(true)
                && adj[x].iter().any(|&(y, flip)| !flip && colour[y] == Some(true))
        });
        let minus_class = !plus_inside_true;
        for &x in &component {
            if colour[x] == Some(minus_class) {
                sign[x] = -1.0;
            }
        }
    }
    (sign, consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_triangulation;
    use proptest::prelude::*;

    const TETRA: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

    fn tetra() -> IdealTriangulation {
        build_triangulation(&TETRA).unwrap()
    }

    fn cfg(kind: SchemeKind, alpha: i64, eta: f64) -> SchemeConfig {
        let tri = tetra();
        SchemeConfig::new(kind, vec![alpha; 4], vec![eta; 6], None, &tri).unwrap()
    }

    fn mixed(kind: SchemeKind, alpha: [i64; 4], eta: f64) -> SchemeConfig {
        // boundary 3 meets MINUS edges {0,3},{1,3},{2,3} = ids 2, 4, 5
        let tri = tetra();
        let mut v = vec![Variant::Plus; 6];
        for e in [2, 4, 5] {
            v[e] = Variant::Minus;
        }
        SchemeConfig::new(kind, alpha.to_vec(), vec![eta; 6], Some(v), &tri).unwrap()
    }

    const B0: BoundaryId = BoundaryId(0);

    #[test]
    fn domain_examples() {
        assert_eq!(cfg(SchemeKind::Dcs3, 0, 2.0).domain_of_u(B0), Interval::REAL);
        assert_eq!(cfg(SchemeKind::Dcs3, 1, 2.0).domain_of_u(B0), Interval::NEGATIVE);
        assert_eq!(cfg(SchemeKind::Dcs1, 0, 2.0).domain_of_u(B0), Interval::NEGATIVE);
        let d = cfg(SchemeKind::New1, -1, 0.5).domain_of_u(B0);
        assert_eq!((d.lo, d.hi), (-FRAC_PI_2, 0.0));
    }

    #[test]
    fn mixed_minus_class_domains_are_mirrored() {
        let m3 = mixed(SchemeKind::Mixed3, [0; 4], 1.0);
        assert_eq!(m3.sign(BoundaryId(3)), -1.0);
        assert_eq!(m3.domain_of_u(BoundaryId(3)), Interval::POSITIVE);
        assert_eq!(m3.domain_of_u(B0), Interval::NEGATIVE);
        let m2 = mixed(SchemeKind::Mixed2, [-1; 4], 1.0);
        let d = m2.domain_of_u(BoundaryId(3));
        assert_eq!((d.lo, d.hi), (0.0, FRAC_PI_2));
        assert!(m2.check().is_empty());
    }

    #[test]
    fn chart_examples() {
        let id = cfg(SchemeKind::Dcs3, 0, 2.0);
        assert_eq!(id.u_from_f(B0, 1.25).unwrap(), 1.25);
        assert_eq!(id.f_from_u(B0, -3.5).unwrap(), -3.5);
        let hyp = cfg(SchemeKind::Dcs3, 1, 2.0);
        let u = hyp.u_from_f(B0, 0.0).unwrap();
        let want = 0.5 * ((2f64.sqrt() - 1.0) / (2f64.sqrt() + 1.0)).ln();
        assert!((u - want).abs() < 1e-15);
        assert!((u - (2f64.sqrt() - 1.0).ln()).abs() < 1e-15);
        assert!(hyp.f_from_u(B0, (2f64.sqrt() - 1.0).ln()).unwrap().abs() < 1e-15);
        let exp = cfg(SchemeKind::Dcs1, 0, 2.0);
        assert_eq!(exp.u_from_f(B0, 0.0).unwrap(), -1.0);
        assert_eq!(exp.f_from_u(B0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_chart_matches_coth_relation() {
        // -coth u = sqrt(1 + e^{2f})
        let hyp = cfg(SchemeKind::Dcs3, 1, 2.0);
        for f in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let u = hyp.u_from_f(B0, f).unwrap();
            let lhs = -1.0 / u.tanh();
            assert!((lhs - (1.0 + (2.0 * f).exp()).sqrt()).abs() < 1e-12 * lhs);
        }
    }

    #[test]
    fn circular_chart_matches_cot_relation() {
        // -cot u = sqrt(e^{2f} - 1)
        let c = cfg(SchemeKind::New1, -1, 0.5);
        for f in [0.01, 0.3, 1.0, 5.0] {
            let u = c.u_from_f(B0, f).unwrap();
            let lhs = -1.0 / u.tan();
            let rhs = (2.0 * f).exp_m1().sqrt();
            assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn chart_domain_errors() {
        let c = cfg(SchemeKind::New1, -1, 0.5);
        assert!(matches!(c.u_from_f(B0, -0.1), Err(SchemeError::DomainError { .. })));
        assert!(matches!(c.f_from_u(B0, -2.0), Err(SchemeError::DomainError { .. })));
        let e = cfg(SchemeKind::Dcs1, 0, 2.0);
        assert!(e.f_from_u(B0, 0.0).is_err());
    }

    #[test]
    fn edge_length_examples() {
        let guo = cfg(SchemeKind::Dcs3, 0, 2.0);
        let h = 0.5 * 2f64.ln();
        let l = guo.edge_length(EdgeId(0), h, h).unwrap();
        assert!((l - 3f64.acosh()).abs() < 1e-12);
        assert!((l - 1.7627472).abs() < 1e-7);
        assert!(matches!(
            guo.edge_length(EdgeId(0), 0.0, 0.0),
            Err(SchemeError::NotAdmissible { edge: EdgeId(0), .. })
        ));
        let d1 = cfg(SchemeKind::Dcs1, 0, 3.0);
        let l = d1.edge_length(EdgeId(0), 0.0, 0.0).unwrap();
        assert!((l - 2f64.acosh()).abs() < 1e-14);
    }

    #[test]
    fn coth_d_examples() {
        let d1 = cfg(SchemeKind::Dcs1, 0, 3.0);
        let l = 2f64.acosh();
        let c = d1.coth_d(EdgeId(0), B0, 0.0, 0.0, l).unwrap();
        assert!((c - 3f64.sqrt()).abs() < 1e-12);
        let back = d1.coth_d(EdgeId(0), BoundaryId(1), 0.0, 0.0, l).unwrap();
        assert!((c - back).abs() < 1e-15);

        let tri = tetra();
        let mixed_alpha = SchemeConfig::new(SchemeKind::Dcs3, vec![1, 0, 0, 0], vec![3.0; 6], None, &tri).unwrap();
        let c = mixed_alpha.coth_d(EdgeId(0), B0, 0.0, 0.0, 3f64.acosh()).unwrap();
        let want = (1.0 + 3.0 * 2f64.sqrt()) / 4.0;
        assert!((c - want).abs() < 1e-12);
        assert!((c - 1.3106602).abs() < 1e-7);
    }

    #[test]
    fn coth_d_is_length_derivative() {
        // dl/df_from by central differences for every family and variant
        let cases = [
            (cfg(SchemeKind::Dcs3, 1, 4.0), [0.3, -0.2, 0.1, 0.0]),
            (cfg(SchemeKind::Dcs1, 0, 3.0), [0.3, -0.2, 0.1, 0.0]),
            (cfg(SchemeKind::New1, -1, 0.5), [0.8, 1.1, 0.6, 0.9]),
            (mixed(SchemeKind::Mixed1, [1, 1, 1, -1], 1.5), [1.0, 1.0, 1.0, -0.02]),
            (mixed(SchemeKind::Mixed2, [-1; 4], 1.0), [1.0, 1.0, 1.0, 0.05]),
            (mixed(SchemeKind::Mixed3, [0; 4], 3.0), [0.0, 0.0, 0.0, -2.0]),
        ];
        for (c, f) in cases {
            for e in 0..6 {
                let (a, b) = c.edge_ends(EdgeId(e));
                let l = c.edge_length(EdgeId(e), f[a], f[b]).unwrap();
                let h = 1e-6;
                let fd = (c.edge_length(EdgeId(e), f[a] + h, f[b]).unwrap()
                    - c.edge_length(EdgeId(e), f[a] - h, f[b]).unwrap())
                    / (2.0 * h);
                let an = c.coth_d(EdgeId(e), BoundaryId(a), f[a], f[b], l).unwrap();
                assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{} e{e}: {fd} vs {an}", c.kind());
            }
        }
    }

    #[test]
    fn dcs1_admissibility_examples() {
        let tri = tetra();
        let d1 = cfg(SchemeKind::Dcs1, 0, 2.0);
        assert!(d1.admissible(&tri, &FactorAssignment::u(vec![-0.9; 4])).is_admissible());
        let r = d1.admissible(&tri, &FactorAssignment::u(vec![-1.0; 4]));
        assert!(!r.is_admissible());
        assert_eq!(r.degenerate_edges.len(), 6);
        let r = d1.admissible(&tri, &FactorAssignment::u(vec![-0.9, 0.5, -0.9, -0.9]));
        assert_eq!(r.domain_violations, vec![BoundaryId(1)]);
    }

    #[test]
    fn mixed_orientation_condition() {
        let tri = tetra();
        let m3 = mixed(SchemeKind::Mixed3, [0; 4], 1.0);
        // u_3^2 - u_i^2 > 2 eta
        let ok = m3.admissible(&tri, &FactorAssignment::u(vec![-0.5, -0.5, -0.5, 2.0]));
        assert!(ok.is_admissible(), "{ok}");
        let bad = m3.admissible(&tri, &FactorAssignment::u(vec![-0.5, -0.5, -0.5, 1.4]));
        assert!(bad.hexagons_exist());
        assert_eq!(bad.orientation_violations.len(), 3);
    }

    #[test]
    fn constraint_checks() {
        let tri = tetra();
        let bad = SchemeConfig::new(SchemeKind::Dcs3, vec![1; 4], vec![0.5; 6], None, &tri).unwrap();
        let v = bad.check();
        assert_eq!(v.len(), 6);
        assert!(v[0].message.contains("alpha_i*alpha_j"));
        assert!(cfg(SchemeKind::New1, 0, 0.5).check().iter().any(|v| v.field.contains("alpha")));
        assert!(cfg(SchemeKind::Mixed1, 1, 0.9).ensure_solvable().is_err());
        assert!(cfg(SchemeKind::Dcs3, -1, 2.0).ensure_solvable().is_err());
        assert!(mixed(SchemeKind::Mixed1, [1, 1, 1, 1], 1.5).ensure_solvable().is_err());
        assert!(mixed(SchemeKind::Mixed1, [1, 0, 1, -1], 1.5).ensure_solvable().is_ok());
        assert!(matches!(
            SchemeConfig::new(SchemeKind::Dcs3, vec![2; 4], vec![1.0; 6], None, &tri),
            Err(SchemeError::InvalidAlpha { .. })
        ));
    }

    #[test]
    fn inconsistent_variants_rejected() {
        let tri = tetra();
        let mut v = vec![Variant::Plus; 6];
        v[0] = Variant::Minus;
        let c = SchemeConfig::new(SchemeKind::Mixed3, vec![0; 4], vec![1.0; 6], Some(v), &tri).unwrap();
        assert!(!c.check().is_empty());
        // a minus class with a PLUS edge inside is rejected as well
        let mut v = vec![Variant::Minus; 6];
        v[0] = Variant::Plus; // {0,1}
        v[5] = Variant::Plus; // {2,3}
        let c = SchemeConfig::new(SchemeKind::Mixed3, vec![0; 4], vec![1.0; 6], Some(v), &tri).unwrap();
        assert!(!c.check().is_empty());
    }

    #[test]
    fn guo_reduction_exact() {
        let guo = cfg(SchemeKind::Dcs3, 0, 1.7);
        for (fa, fb) in [(0.3, 0.4), (1.0, -0.2), (2.5, 2.5)] {
            let ev = guo.edge_eval(EdgeId(1), fa, fb).unwrap();
            let want = -1.0 + 1.7 * f64::exp(fa + fb);
            assert!((ev.cosh_l - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn overflow_safe_lengths() {
        for c in [cfg(SchemeKind::Dcs3, 1, 2.0), cfg(SchemeKind::Dcs1, 0, 2.0), cfg(SchemeKind::New1, -1, 0.5)] {
            let l = c.edge_length(EdgeId(0), 400.0, 400.0).unwrap();
            assert!(l.is_finite());
            let q = match c.kind() {
                SchemeKind::Dcs3 => -(1.0 + (-800f64).exp()),
                SchemeKind::Dcs1 => -(-800f64).exp(),
                _ => 1.0,
            };
            let eta = c.eta(EdgeId(0));
            let ln_cosh = 800.0 + (eta + q).ln();
            let want = ln_cosh + std::f64::consts::LN_2;
            assert!((l - want).abs() <= 1e-9 * want, "{}: {l} vs {want}", c.kind());
        }
    }

    #[test]
    fn log_and_direct_paths_agree_at_threshold() {
        let c = cfg(SchemeKind::Dcs3, 1, 2.0);
        let below = c.edge_length(EdgeId(0), 30.0, 1.0).unwrap();
        let above = c.edge_length(EdgeId(0), 30.0 + 1e-12, 1.0).unwrap();
        assert!((below - above).abs() < 1e-10 * below);
    }

    fn all_charts() -> Vec<(SchemeConfig, BoundaryId)> {
        vec![
            (cfg(SchemeKind::Dcs3, 0, 2.0), B0),
            (cfg(SchemeKind::Dcs3, 1, 2.0), B0),
            (cfg(SchemeKind::Dcs3, -1, 2.0), B0),
            (cfg(SchemeKind::Dcs1, 0, 2.0), B0),
            (cfg(SchemeKind::New1, -1, 0.5), B0),
            (mixed(SchemeKind::Mixed3, [0; 4], 1.0), BoundaryId(3)),
            (mixed(SchemeKind::Mixed2, [-1; 4], 1.0), BoundaryId(3)),
            (mixed(SchemeKind::Mixed1, [1, 1, 1, -1], 1.5), BoundaryId(3)),
        ]
    }

    fn clamp_to(dom: Interval, f: f64) -> f64 {
        if dom.lo == 0.0 {
            f.abs().max(1e-3)
        } else if dom.hi == 0.0 {
            -f.abs().max(1e-3)
        } else {
            f
        }
    }

    proptest! {
        #[test]
        fn chart_round_trip(f in -20.0f64..20.0) {
            for (c, b) in all_charts() {
                let f = clamp_to(c.domain_of_f(b), f);
                let u = c.u_from_f(b, f).unwrap();
                prop_assert!(c.domain_of_u(b).contains(u));
                let back = c.f_from_u(b, u).unwrap();
                prop_assert!((back - f).abs() <= 1e-12 * f.abs().max(1.0), "{} {b}: {f} -> {u} -> {back}", c.kind());
            }
        }

        #[test]
        fn chart_monotone_on_each_branch(f in -10.0f64..10.0, d in 1e-3f64..1.0) {
            for (c, b) in all_charts() {
                let f1 = clamp_to(c.domain_of_f(b), f);
                let f2 = if f1 > 0.0 || c.domain_of_f(b).hi > 0.0 { f1 + d } else { f1 - d };
                prop_assume!(c.domain_of_f(b).contains(f2));
                let (u1, u2) = (c.u_from_f(b, f1).unwrap(), c.u_from_f(b, f2).unwrap());
                // increasing in f on the plus class, decreasing on the minus class
                prop_assert!(c.sign(b) * (u2 - u1) * (f2 - f1) > 0.0);
            }
        }

        #[test]
        fn chart_derivative_matches(f in -6.0f64..6.0) {
            for (c, b) in all_charts() {
                let f = clamp_to(c.domain_of_f(b), f).clamp(-6.0, 6.0);
                let f = if c.domain_of_f(b).lo == 0.0 { f.max(0.05) } else if c.domain_of_f(b).hi == 0.0 { f.min(-0.05) } else { f };
                let u = c.u_from_f(b, f).unwrap();
                let h = 1e-6;
                let fd = (c.f_from_u(b, u + h).unwrap() - c.f_from_u(b, u - h).unwrap()) / (2.0 * h);
                let an = c.df_du(b, f);
                prop_assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{} {f}: {fd} vs {an}", c.kind());
            }
        }

        #[test]
        fn dcs1_admissibility_equivalence(u1 in -3.0f64..-1e-3, u2 in -3.0f64..-1e-3, eta in 0.05f64..5.0) {
            let c = cfg(SchemeKind::Dcs1, 0, eta);
            let gap = u1 + u2 + (2.0 * eta).sqrt();
            prop_assume!(gap.abs() > 1e-9);
            let f1 = c.f_from_u(B0, u1).unwrap();
            let f2 = c.f_from_u(BoundaryId(1), u2).unwrap();
            let ok = c.edge_length(EdgeId(0), f1, f2).is_ok();
            prop_assert_eq!(ok, gap > 0.0);
        }

        #[test]
        fn guo_reduction_random(fa in -3.0f64..3.0, fb in -3.0f64..3.0, eta in 0.1f64..5.0) {
            let c = cfg(SchemeKind::Dcs3, 0, eta);
            let want = -1.0 + eta * (fa + fb).exp();
            prop_assume!(want > 1.0 + 1e-9);
            let ev = c.edge_eval(EdgeId(3), fa, fb).unwrap();
            prop_assert!((ev.cosh_l - want).abs() <= 1e-12 * want);
        }
    }
}
