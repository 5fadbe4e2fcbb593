//! Right-angled hyperbolic hexagons: boundary arcs from ideal-edge lengths,
//! the quantity `A`, and the corner Jacobian `d(theta)/d(u)`.
//!
//! Slot convention: in a face with corners `(i, j, k)` the length `l_r` sits
//! on the edge opposite corner `r`, and `theta_r` is the boundary arc at `r`.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::schemes::{ln_sinh, SchemeConfig, SchemeError};
use crate::topology::{BoundaryId, EdgeId, FaceId, IdealTriangulation};

/// Above this length the arc law is evaluated in log space.
const LOG_LENGTH: f64 = 250.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HexagonError {
    #[error("length in slot {slot} is {value}, must be positive")]
    NonPositiveLength { slot: usize, value: f64 },
}

fn check_lengths(l: [f64; 3]) -> Result<(), HexagonError> {
    for (slot, &value) in l.iter().enumerate() {
        if !(value > 0.0) {
            return Err(HexagonError::NonPositiveLength { slot, value });
        }
    }
    Ok(())
}

/// `ln(cosh a + cosh b)` without overflow.
fn ln_cosh_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    let s = (a - m).exp() + (-a - m).exp() + (b - m).exp() + (-b - m).exp();
    m + (0.5 * s).ln()
}

fn arc(li: f64, lj: f64, lk: f64) -> f64 {
    // cosh theta_i - 1 = (cosh l_i + cosh(l_j - l_k)) / (sinh l_j sinh l_k)
    if li.max(lj).max(lk) < LOG_LENGTH {
        let m = (li.cosh() + (lj - lk).cosh()) / (lj.sinh() * lk.sinh());
        return (m + (m * (m + 2.0)).sqrt()).ln_1p();
    }
    let ln_m = ln_cosh_sum(li, lj - lk) - ln_sinh(lj) - ln_sinh(lk);
    if ln_m > 300.0 {
        std::f64::consts::LN_2 + ln_m
    } else {
        let m = ln_m.exp();
        (m + (m * (m + 2.0)).sqrt()).ln_1p()
    }
}

/// Boundary arcs `(theta_i, theta_j, theta_k)` of the right-angled hexagon
/// whose alternate sides are `(l_i, l_j, l_k)`.
pub fn angles_from_lengths(l: [f64; 3]) -> Result<[f64; 3], HexagonError> {
    check_lengths(l)?;
    Ok([
        arc(l[0], l[1], l[2]),
        arc(l[1], l[2], l[0]),
        arc(l[2], l[0], l[1]),
    ])
}

/// `A = sqrt(cosh^2 l_i + cosh^2 l_j + cosh^2 l_k + 2 cosh l_i cosh l_j cosh l_k - 1)`,
/// which equals `sinh l_r sinh l_s sinh theta_t` for every labelling.
pub fn a_quantity(l: [f64; 3]) -> Result<f64, HexagonError> {
    check_lengths(l)?;
    let [a, b, c] = l.map(f64::cosh);
    Ok((a * a + b * b + c * c + 2.0 * a * b * c - 1.0).sqrt())
}

/// Geometry of one face at given factors.
#[derive(Debug, Clone, PartialEq)]
pub struct HexGeometry {
    pub face: FaceId,
    pub corners: [BoundaryId; 3],
    pub edges: [EdgeId; 3],
    /// Factors `f` at the corners.
    pub f: [f64; 3],
    pub lengths: [f64; 3],
    pub cosh_l: [f64; 3],
    pub sinh_l: [f64; 3],
    pub angles: [f64; 3],
    pub a_quantity: f64,
}

impl HexGeometry {
    /// Evaluates face `face` at the global factor vector `f` (f-coordinates).
    pub fn new(
        cfg: &SchemeConfig,
        tri: &IdealTriangulation,
        face: FaceId,
        f: &[f64],
    ) -> Result<Self, SchemeError> {
        let hf = tri.face(face);
        let fc = hf.corners.map(|b| f[b.0]);
        let mut lengths = [0.0; 3];
        let mut cosh_l = [0.0; 3];
        let mut sinh_l = [0.0; 3];
        for r in 0..3 {
            let e = hf.edges[r];
            let (a, b) = cfg.edge_ends(e);
            let ev = cfg.edge_eval(e, f[a], f[b])?;
            lengths[r] = ev.length;
            cosh_l[r] = ev.cosh_l;
            sinh_l[r] = ev.sinh_l;
        }
        let angles = angles_from_lengths(lengths).map_err(|_| SchemeError::NotAdmissible {
            edge: hf.edges[lengths.iter().position(|&l| !(l > 0.0)).unwrap_or(0)],
            cosh_l: 1.0,
        })?;
        let a_quantity = (cosh_l[0] * cosh_l[0] + cosh_l[1] * cosh_l[1] + cosh_l[2] * cosh_l[2]
            + 2.0 * cosh_l[0] * cosh_l[1] * cosh_l[2]
            - 1.0)
            .sqrt();
        Ok(Self {
            face,
            corners: hf.corners,
            edges: hf.edges,
            f: fc,
            lengths,
            cosh_l,
            sinh_l,
            angles,
            a_quantity,
        })
    }

    /// `d(theta_i, theta_j, theta_k) / d(u_i, u_j, u_k)` as the product
    /// `(d theta / d l) (d l / d f) diag(df/du)`, where
    /// `d theta_r / d l_r = sinh l_r / A`,
    /// `d theta_r / d l_s = -sinh l_r cosh theta_t / A`, and
    /// `d l_t / d f_r = coth d_rs` for the edge `t` joining `r` and `s`.
    pub fn corner_jacobian(&self, cfg: &SchemeConfig) -> Matrix3<f64> {
        let cosh_th = self.angles.map(f64::cosh);
        let dtheta_dl = Matrix3::from_fn(|r, s| {
            if r == s {
                self.sinh_l[r] / self.a_quantity
            } else {
                -self.sinh_l[r] * cosh_th[3 - r - s] / self.a_quantity
            }
        });
        let dl_df = Matrix3::from_fn(|t, r| {
            if t == r {
                0.0
            } else {
                let s = 3 - t - r;
                cfg.coth_d_raw(
                    self.edges[t],
                    self.corners[r],
                    self.corners[s],
                    self.f[r],
                    self.f[s],
                    self.cosh_l[t],
                    self.sinh_l[t],
                )
            }
        });
        let chart = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|r, _| {
            cfg.df_du(self.corners[r], self.f[r])
        }));
        dtheta_dl * dl_df * chart
    }
}

/// Corner Jacobian of `face` at global factors `f`.
pub fn corner_jacobian(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    face: FaceId,
    f: &[f64],
) -> Result<Matrix3<f64>, SchemeError> {
    Ok(HexGeometry::new(cfg, tri, face, f)?.corner_jacobian(cfg))
}
