//! Small numerical kernels shared by the solvers: a sparse symmetric matrix,
//! preconditioned conjugate gradients, an extreme-eigenvalue probe,
//! finite-difference harnesses and Gauss-Legendre quadrature.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("linear solve failed after {iterations} iterations (relative residual {residual:.3e})")]
    LinearSolveFailure { iterations: usize, residual: f64 },
    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },
}

/// Symmetric matrix storing only entries with `row <= col`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseSymMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Symmetric part of a dense square matrix, dropping exact zeros.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let mut m = Self::new(a.nrows());
        for i in 0..a.nrows() {
            for j in i..a.ncols() {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                if v != 0.0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn key(i: usize, j: usize) -> (usize, usize) {
        (i.min(j), i.max(j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&Self::key(i, j)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "index out of range");
        self.entries.insert(Self::key(i, j), v);
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "index out of range");
        *self.entries.entry(Self::key(i, j)).or_insert(0.0) += v;
    }

    /// Stored `(row, col, value)` triples with `row <= col`, in key order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|(&k, &v)| (k, s * v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (&(i, j), &v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (&(i, j), &v) in &self.entries {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for symmetric positive definite `A` by Jacobi-preconditioned
/// conjugate gradients, to relative residual `tol`, with at most `20 N` iterations.
pub fn cg_solve(a: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>, NumericsError> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(NumericsError::LinearSolveFailure {
            iterations: 0,
            residual: 1.0,
        });
    }
    let max_iter = 20 * n.max(1);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 0..max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            // curvature along p is not positive: A is not SPD
            return Err(NumericsError::LinearSolveFailure {
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= tol {
            // the recursive residual drifts; confirm against the true one
            let ax = a.matvec(&x);
            let true_rel = norm(&ax.iter().zip(b).map(|(p, q)| q - p).collect::<Vec<_>>()) / bnorm;
            if true_rel <= tol {
                return Ok(x);
            }
            if cfg!(debug_assertions) && true_rel > 1e3 * tol {
                return Err(NumericsError::LinearSolveFailure {
                    iterations: it + 1,
                    residual: true_rel,
                });
            }
            r = ax.iter().zip(b).map(|(p, q)| q - p).collect();
            rel = true_rel;
        }
        z = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(NumericsError::LinearSolveFailure {
        iterations: max_iter,
        residual: rel,
    })
}

/// Dense LU solve, used as a reference for small systems.
pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let x = a.clone().lu().solve(&DVector::from_column_slice(b))?;
    Some(x.iter().copied().collect())
}

/// Largest eigenvalue of a symmetric matrix. Exact dense decomposition for
/// `N <= 32`, shifted power iteration otherwise.
pub fn max_eigenvalue(a: &SparseSymMatrix) -> Result<f64, NumericsError> {
    if a.dim() <= 32 {
        Ok(dense_max_eigenvalue(&a.to_dense()))
    } else {
        power_max_eigenvalue(a, 1e-8, 100_000)
    }
}

pub fn dense_max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Power iteration on `A + sI`, where `s` comes from the Gershgorin lower
/// bound so the shifted matrix is positive semidefinite and its dominant
/// eigenvalue is the largest one of `A`.
pub fn power_max_eigenvalue(
    a: &SparseSymMatrix,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64, NumericsError> {
    let n = a.dim();
    if n == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut radius = vec![0.0; n];
    for (i, j, v) in a.entries() {
        if i != j {
            radius[i] += v.abs();
            radius[j] += v.abs();
        }
    }
    let lower = (0..n)
        .map(|i| a.get(i, i) - radius[i])
        .fold(f64::INFINITY, f64::min);
    let upper = (0..n)
        .map(|i| a.get(i, i) + radius[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = -lower;
    let scale = (upper - lower).abs().max(f64::MIN_POSITIVE);

    // deterministic start with all components nonzero
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sin()).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let mut y = a.matvec(&x);
        for i in 0..n {
            y[i] += shift * x[i];
        }
        let lambda = dot(&x, &y);
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(-shift);
        }
        x = y.into_iter().map(|v| v / ny).collect();
        if (lambda - prev).abs() <= rel_tol * scale {
            let ax = a.matvec(&x);
            return Ok(dot(&x, &ax));
        }
        prev = lambda;
    }
    Err(NumericsError::NoConvergence {
        what: "power iteration",
    })
}

/// Central-difference Jacobian: column `j` is `(fn(x + h e_j) - fn(x - h e_j)) / 2h`.
pub fn fd_jacobian<F, E>(mut func: F, x: &[f64], h: f64) -> Result<DMatrix<f64>, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = func(&xp)?;
        xp[j] = x[j] - h;
        let fm = func(&xp)?;
        xp[j] = x[j];
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(m, x.len(), |i, j| cols[j][i]))
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F, E>(mut func: F, x: &[f64], h: f64) -> Result<Vec<f64>, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let j = fd_jacobian(|y| func(y).map(|v| vec![v]), x, h)?;
    Ok(j.row(0).iter().copied().collect())
}

/// Hessian of a scalar function by second central differences, Richardson
/// extrapolated from steps `h` and `h/2`.
pub fn fd_hessian<F, E>(mut func: F, x: &[f64], h: f64) -> Result<DMatrix<f64>, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let n = x.len();
    let mut at = |h: f64| -> Result<DMatrix<f64>, E> {
        let mut hess = DMatrix::zeros(n, n);
        let f0 = func(x)?;
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + h;
            let fp = func(&y)?;
            y[i] = x[i] - h;
            let fm = func(&y)?;
            y[i] = x[i];
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..n {
                let mut corner = |si: f64, sj: f64| {
                    let mut z = x.to_vec();
                    z[i] += si * h;
                    z[j] += sj * h;
                    func(&z)
                };
                let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)?
                    + corner(-1.0, -1.0)?)
                    / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        Ok(hess)
    };
    let coarse = at(h)?;
    let fine = at(0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, refined by Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule with `m` equal subintervals of `[a, b]`.
    pub fn composite<F, E>(&self, f: &mut F, a: f64, b: f64, m: usize) -> Result<f64, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let h = (b - a) / m as f64;
        let mut total = 0.0;
        for k in 0..m {
            let lo = a + k as f64 * h;
            let mid = lo + 0.5 * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + 0.5 * h * x)?;
            }
            total += 0.5 * h * s;
        }
        Ok(total)
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug)]
pub enum QuadratureError<E> {
    Integrand(E),
    NoConvergence { estimate: f64, change: f64 },
}

/// Integrates `f` over `[a, b]` with a composite rule, doubling the number of
/// subintervals until two successive estimates agree to `rel_tol` (relative
/// to `max(|I|, abs_floor)`).
pub fn integrate_adaptive<F, E>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_doublings: usize,
) -> Result<f64, QuadratureError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut m = 1;
    let mut prev = rule
        .composite(&mut f, a, b, m)
        .map_err(QuadratureError::Integrand)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        m *= 2;
        let cur = rule
            .composite(&mut f, a, b, m)
            .map_err(QuadratureError::Integrand)?;
        change = (cur - prev).abs();
        if change <= rel_tol * cur.abs().max(abs_floor) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadratureError::NoConvergence {
        estimate: prev,
        change,
    })
}
