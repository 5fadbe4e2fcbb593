//! The curvature map `K`, its Jacobian `Delta = dK/du`, and the energies
//! `E` (whose gradient is `-(K - Kbar)`) and `C = |K - Kbar|^2 / 2`.
//!
//! All functions take `u` in solver coordinates. `K` and `Delta` only need
//! every hexagon to exist; the orientation condition of mixed schemes is a
//! property of the admissible region and is checked by the solvers.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hexagon::HexGeometry;
use crate::numerics::{integrate_adaptive, GaussLegendre, QuadratureError, SparseSymMatrix};
use crate::schemes::{AdmissibilityReport, FactorAssignment, SchemeConfig};
use crate::topology::{BoundaryId, FaceId, IdealTriangulation};

/// Relative symmetry residual of `Delta` above which [`laplacian`] fails.
pub const ASYMMETRY_LIMIT: f64 = 1e-6;

const QUAD_NODES: usize = 16;
/// Nodes for the short segments between consecutive solver states.
const STEP_QUAD_NODES: usize = 4;
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_DOUBLINGS: usize = 12;

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(QUAD_NODES))
}

fn step_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(STEP_QUAD_NODES))
}

/// Converts `u` to f-coordinates, failing with a report if some coordinate
/// is outside its domain or some hexagon does not exist.
pub fn factors(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> Result<Vec<f64>> {
    match cfg.f_vec(u) {
        Ok(f) => Ok(f),
        Err(_) => Err(Error::NotAdmissible(
            cfg.admissible(tri, &FactorAssignment::u(u.to_vec())),
        )),
    }
}

/// Geometry of every face, in face order.
pub fn face_geometries(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> Result<Vec<HexGeometry>> {
    let f = factors(cfg, tri, u)?;
    geometries_at_f(cfg, tri, &f)
}

fn geometries_at_f(cfg: &SchemeConfig, tri: &IdealTriangulation, f: &[f64]) -> Result<Vec<HexGeometry>> {
    let mut out = Vec::with_capacity(tri.n_faces());
    for face in 0..tri.n_faces() {
        match HexGeometry::new(cfg, tri, FaceId(face), f) {
            Ok(h) => out.push(h),
            Err(_) => {
                let mut report = cfg.admissible_f(f);
                report.orientation_violations.clear();
                return Err(Error::NotAdmissible(report));
            }
        }
    }
    Ok(out)
}

fn sum_angles(tri: &IdealTriangulation, geo: &[HexGeometry]) -> Vec<f64> {
    (0..tri.n_boundaries())
        .map(|i| {
            tri.corners_at(BoundaryId(i))
                .iter()
                .map(|c| geo[c.face.0].angles[c.slot])
                .sum()
        })
        .collect()
}

/// `K_i`, the total length of boundary `i`: the sum of the arcs at its
/// corners, taken in ascending face order.
pub fn curvature_k(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> Result<Vec<f64>> {
    let geo = face_geometries(cfg, tri, u)?;
    Ok(sum_angles(tri, &geo))
}

/// `K` at factors given in f-coordinates.
pub fn curvature_k_at_f(cfg: &SchemeConfig, tri: &IdealTriangulation, f: &[f64]) -> Result<Vec<f64>> {
    let geo = geometries_at_f(cfg, tri, f)?;
    Ok(sum_angles(tri, &geo))
}

/// Assembled `Delta` with its pre-symmetrization residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub matrix: SparseSymMatrix,
    /// `max |D_ij - D_ji| / max |D|` before averaging.
    pub asymmetry: f64,
}

/// `Delta = dK/du`, failing when the raw assembly is asymmetric beyond
/// [`ASYMMETRY_LIMIT`].
pub fn laplacian(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> Result<Laplacian> {
    let lap = laplacian_unchecked(cfg, tri, u)?;
    if !(lap.asymmetry <= ASYMMETRY_LIMIT) {
        return Err(Error::AsymmetricLaplacian {
            residual: lap.asymmetry,
        });
    }
    Ok(lap)
}

/// `Delta` without the symmetry gate; for diagnostics.
pub fn laplacian_unchecked(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> Result<Laplacian> {
    let geo = face_geometries(cfg, tri, u)?;
    Ok(assemble(cfg, tri, &geo))
}

fn assemble(cfg: &SchemeConfig, tri: &IdealTriangulation, geo: &[HexGeometry]) -> Laplacian {
    let n = tri.n_boundaries();
    // upper[(i,j)] accumulates dK_i/du_j, lower[(i,j)] accumulates dK_j/du_i
    let mut upper = SparseSymMatrix::new(n);
    let mut lower = SparseSymMatrix::new(n);
    for h in geo {
        let j = h.corner_jacobian(cfg);
        for r in 0..3 {
            for s in 0..3 {
                let (a, b) = (h.corners[r].0, h.corners[s].0);
                if a <= b {
                    upper.add(a, b, j[(r, s)]);
                }
                if a >= b {
                    lower.add(b, a, j[(r, s)]);
                }
            }
        }
    }
    let mut matrix = SparseSymMatrix::new(n);
    let mut max_abs = 0.0f64;
    let mut max_diff = 0.0f64;
    for (i, k, v) in upper.entries() {
        let w = lower.get(i, k);
        max_abs = max_abs.max(v.abs()).max(w.abs());
        max_diff = max_diff.max((v - w).abs());
        matrix.set(i, k, 0.5 * (v + w));
    }
    let asymmetry = if max_abs > 0.0 { max_diff / max_abs } else { 0.0 };
    Laplacian { matrix, asymmetry }
}

/// `K` and `Delta` from one geometry pass.
pub fn curvature_and_laplacian(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u: &[f64],
) -> Result<(Vec<f64>, Laplacian)> {
    let geo = face_geometries(cfg, tri, u)?;
    let k = sum_angles(tri, &geo);
    let lap = assemble(cfg, tri, &geo);
    if !(lap.asymmetry <= ASYMMETRY_LIMIT) {
        return Err(Error::AsymmetricLaplacian {
            residual: lap.asymmetry,
        });
    }
    Ok((k, lap))
}

pub fn residual_inf(k: &[f64], kbar: &[f64]) -> f64 {
    k.iter().zip(kbar).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// `C(u) = 1/2 |K(u) - Kbar|^2`.
pub fn energy_c(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64], kbar: &[f64]) -> Result<f64> {
    let k = curvature_k(cfg, tri, u)?;
    Ok(energy_c_from_k(&k, kbar))
}

pub fn energy_c_from_k(k: &[f64], kbar: &[f64]) -> f64 {
    0.5 * k.iter().zip(kbar).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// `E(u) - E(u_ref) = -int_{u_ref}^{u} sum_i (K_i - Kbar_i) du_i` along the
/// straight segment, so `E(u_ref) = 0`.
pub fn energy_e(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    u: &[f64],
    kbar: &[f64],
    u_ref: &[f64],
) -> Result<f64> {
    segment_energy(cfg, tri, u_ref, u, kbar)
}

/// Sum of segment integrals along the polyline `points[0] -> points[1] -> ...`,
/// i.e. `E(last) - E(first)`.
pub fn energy_e_polyline(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    points: &[Vec<f64>],
    kbar: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += segment_energy(cfg, tri, &w[0], &w[1], kbar)?;
    }
    Ok(total)
}

/// `E(b) - E(a)` by composite Gauss-Legendre quadrature on the segment.
pub fn segment_energy(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    a: &[f64],
    b: &[f64],
    kbar: &[f64],
) -> Result<f64> {
    segment_energy_with(gauss_legendre(), cfg, tri, a, b, kbar)
}

/// [`segment_energy`] with a low-order starting rule, for the short segments
/// between solver states. Same tolerance.
pub(crate) fn step_energy(
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    a: &[f64],
    b: &[f64],
    kbar: &[f64],
) -> Result<f64> {
    segment_energy_with(step_rule(), cfg, tri, a, b, kbar)
}

fn segment_energy_with(
    rule: &GaussLegendre,
    cfg: &SchemeConfig,
    tri: &IdealTriangulation,
    a: &[f64],
    b: &[f64],
    kbar: &[f64],
) -> Result<f64> {
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    if d.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let mut point = vec![0.0; a.len()];
    let mut integrand = |s: f64| -> Result<f64> {
        for i in 0..a.len() {
            point[i] = a[i] + s * d[i];
        }
        let k = curvature_k(cfg, tri, &point).map_err(|e| match e {
            Error::NotAdmissible(_) => Error::PathLeavesAdmissible { at: s },
            other => other,
        })?;
        Ok(-k.iter().zip(kbar).zip(&d).map(|((k, kb), d)| (k - kb) * d).sum::<f64>())
    };
    // absolute floor: a small fraction of the integrand size at the ends, or
    // the rounding level of K - Kbar, whichever is larger
    let scale = integrand(0.0)?.abs().max(integrand(1.0)?.abs());
    let noise = 1e3 * f64::EPSILON * kbar.iter().zip(&d).map(|(k, d)| (k * d).abs()).sum::<f64>();
    let floor = (1e-6 * scale).max(noise / QUAD_REL_TOL);
    integrate_adaptive(
        rule,
        integrand,
        0.0,
        1.0,
        QUAD_REL_TOL,
        floor,
        QUAD_MAX_DOUBLINGS,
    )
    .map_err(|e| match e {
        QuadratureError::Integrand(e) => e,
        QuadratureError::NoConvergence { change, .. } => Error::QuadratureNoConvergence { change },
    })
}

/// Full admissibility report at `u`.
pub fn admissibility(cfg: &SchemeConfig, tri: &IdealTriangulation, u: &[f64]) -> AdmissibilityReport {
    cfg.admissible(tri, &FactorAssignment::u(u.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dense_max_eigenvalue, fd_gradient, fd_jacobian};
    use crate::schemes::SchemeKind;
    use crate::topology::build_triangulation;

    const TETRA: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

    fn setup() -> (IdealTriangulation, SchemeConfig) {
        let tri = build_triangulation(&TETRA).unwrap();
        let cfg = SchemeConfig::new(SchemeKind::Dcs1, vec![0; 4], vec![3.0; 6], None, &tri).unwrap();
        (tri, cfg)
    }

    #[test]
    fn equilateral_curvature() {
        let (tri, cfg) = setup();
        let k = curvature_k(&cfg, &tri, &[-1.0; 4]).unwrap();
        let want = 3.0 * 2f64.acosh();
        for v in k {
            assert!((v - want).abs() < 1e-12);
            assert!((v - 3.9508736).abs() < 1e-7);
        }
    }

    #[test]
    fn energy_c_examples() {
        let (tri, cfg) = setup();
        let u = [-1.0; 4];
        let k = curvature_k(&cfg, &tri, &u).unwrap();
        assert_eq!(energy_c(&cfg, &tri, &u, &k).unwrap(), 0.0);
        let mut off = k.clone();
        off[0] += 1.0;
        assert!((energy_c(&cfg, &tri, &u, &off).unwrap() - 0.5).abs() < 1e-12);
        let c = energy_c(&cfg, &tri, &u, &[4.0; 4]).unwrap();
        assert!((c - 0.0048268).abs() < 1e-7, "{c}");
    }

    #[test]
    fn equilateral_laplacian_pattern() {
        let (tri, cfg) = setup();
        let lap = laplacian(&cfg, &tri, &[-1.0; 4]).unwrap();
        assert!(lap.asymmetry < 1e-14);
        let m = &lap.matrix;
        for i in 1..4 {
            assert!((m.get(i, i) - m.get(0, 0)).abs() < 1e-13);
        }
        for (i, j, v) in m.entries() {
            if i != j {
                assert!((v - m.get(0, 1)).abs() < 1e-13);
            }
        }
        assert!(dense_max_eigenvalue(&m.to_dense()) < 0.0);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let (tri, cfg) = setup();
        let u = [-0.8, -1.3, -0.9, -1.1];
        let lap = laplacian(&cfg, &tri, &u).unwrap().matrix.to_dense();
        let fd = fd_jacobian(|x: &[f64]| curvature_k(&cfg, &tri, x), &u, 1e-5).unwrap();
        assert!((&lap - &fd).amax() < 1e-6 * lap.amax());
    }

    #[test]
    fn energy_gradient_and_anchor() {
        let (tri, cfg) = setup();
        let u_ref = [-1.0; 4];
        let kbar = [4.0, 3.7, 4.1, 3.9];
        assert_eq!(energy_e(&cfg, &tri, &u_ref, &kbar, &u_ref).unwrap(), 0.0);
        let u = [-0.8, -1.3, -0.9, -1.1];
        let g = fd_gradient(|x: &[f64]| energy_e(&cfg, &tri, x, &kbar, &u_ref), &u, 1e-5).unwrap();
        let k = curvature_k(&cfg, &tri, &u).unwrap();
        for i in 0..4 {
            let want = -(k[i] - kbar[i]);
            assert!((g[i] - want).abs() < 1e-6 * want.abs().max(1.0), "{i}: {} vs {want}", g[i]);
        }
    }

    #[test]
    fn energy_path_independent() {
        let (tri, cfg) = setup();
        let kbar = [4.0; 4];
        let a = vec![-1.0; 4];
        let b = vec![-0.8, -1.3, -0.9, -1.1];
        let direct = energy_e_polyline(&cfg, &tri, &[a.clone(), b.clone()], &kbar).unwrap();
        let detour = vec![-0.7, -0.9, -1.2, -1.0];
        let bent = energy_e_polyline(&cfg, &tri, &[a, detour, b], &kbar).unwrap();
        assert!((direct - bent).abs() < 1e-8);
    }

    #[test]
    fn path_leaving_region_is_reported() {
        let (tri, cfg) = setup();
        // the region is convex here, so take an inadmissible far end
        let a = [-1.0; 4];
        let b = [-1.5, -1.5, -0.5, -0.5];
        assert!(!admissibility(&cfg, &tri, &b).is_admissible());
        assert!(matches!(
            energy_e(&cfg, &tri, &b, &[4.0; 4], &a),
            Err(Error::PathLeavesAdmissible { .. })
        ));
    }

    #[test]
    fn near_degenerate_edge_blows_up_curvature() {
        let tri = build_triangulation(&TETRA).unwrap();
        let mut eta = vec![3.0; 6];
        // edge {0,1}: cosh l = -1 + eta at f = 0
        eta[0] = 1.0 + 1e-4f64.cosh();
        let cfg = SchemeConfig::new(SchemeKind::Dcs1, vec![0; 4], eta, None, &tri).unwrap();
        let k = curvature_k(&cfg, &tri, &[-1.0; 4]).unwrap();
        let bound = (1.0 / 1e-4f64.tanh()).acosh();
        assert!(k[1] >= bound && k[0] >= bound);
        assert!(bound > 9.9);
    }

    #[test]
    fn relabelled_faces_give_same_curvature() {
        let (tri, cfg) = setup();
        let u = [-0.8, -1.3, -0.9, -1.1];
        let k = curvature_k(&cfg, &tri, &u).unwrap();
        let perm = [[1, 2, 3], [0, 2, 3], [0, 1, 2], [0, 1, 3]];
        let tri2 = build_triangulation(&perm).unwrap();
        let cfg2 = SchemeConfig::new(SchemeKind::Dcs1, vec![0; 4], vec![3.0; 6], None, &tri2).unwrap();
        let k2 = curvature_k(&cfg2, &tri2, &u).unwrap();
        for (a, b) in k.iter().zip(&k2) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn inadmissible_reports() {
        let (tri, cfg) = setup();
        match curvature_k(&cfg, &tri, &[-1.5, -1.5, -0.5, -0.5]) {
            Err(Error::NotAdmissible(r)) => {
                assert_eq!(r.degenerate_edges.len(), 1);
                assert_eq!(r.degenerate_edges[0].0 .0, 0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(curvature_k(&cfg, &tri, &[0.5, -1.0, -1.0, -1.0]), Err(Error::NotAdmissible(_))));
    }
}
