//! Coordinate charts, metric tensor fields and their connection.
//!
//! Everything here works on small dense matrices (dimension at most five in
//! practice). A [`MetricField`] is a closure over chart coordinates and an
//! optional time, together with an optional analytic first derivative and a
//! domain guard that rejects points where the chart breaks down.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative pivot below which a metric is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Central-difference step for coordinate `x`: `1e-6 * max(1, |x|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// A validated point in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatePoint(Vec<f64>);

impl CoordinatePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("coordinate point needs at least one coordinate"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<CoordinatePoint> for Vec<f64> {
    fn from(p: CoordinatePoint) -> Self {
        p.0
    }
}

type MetricFn = dyn Fn(&[f64], f64) -> Matrix + Send + Sync;
type PartialsFn = dyn Fn(&[f64], f64) -> Vec<Matrix> + Send + Sync;
type GuardFn = dyn Fn(&[f64]) -> std::result::Result<(), String> + Send + Sync;

/// A symmetric metric `g_ij(x[, t])` on an `dim`-dimensional chart.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    eval: Arc<MetricFn>,
    partials: Option<Arc<PartialsFn>>,
    guard: Arc<GuardFn>,
    constant: bool,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("analytic_partials", &self.partials.is_some())
            .field("constant", &self.constant)
            .finish()
    }
}

impl MetricField {
    /// Wraps an evaluation closure. The closure must return a symmetric
    /// `dim x dim` matrix; it is symmetrized on every call so that
    /// `g_ij == g_ji` holds exactly.
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64], f64) -> Matrix + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            partials: None,
            guard: Arc::new(|_| Ok(())),
            constant: false,
        }
    }

    /// Analytic partials: element `k` of the returned vector is `∂g/∂x^k`.
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&[f64], f64) -> Vec<Matrix> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_guard<F>(mut self, guard: F) -> Self
    where
        F: Fn(&[f64]) -> std::result::Result<(), String> + Send + Sync + 'static,
    {
        self.guard = Arc::new(guard);
        self
    }

    /// A position-independent metric.
    pub fn constant(g: Matrix) -> Self {
        let dim = g.nrows();
        let g = symmetrize(g);
        let zeros = vec![Matrix::zeros(dim, dim); dim];
        let mut field = Self::new(dim, move |_, _| g.clone()).with_partials(move |_, _| zeros.clone());
        field.constant = true;
        field
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::constant(Matrix::identity(dim, dim))
    }

    /// Flat plane in polar coordinates `(r, φ)`: `diag(1, r²)`, valid for `r > 0`.
    pub fn polar_plane() -> Self {
        Self::new(2, |x, _| {
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, x[0] * x[0]]))
        })
        .with_partials(|x, _| {
            let mut dr = Matrix::zeros(2, 2);
            dr[(1, 1)] = 2.0 * x[0];
            vec![dr, Matrix::zeros(2, 2)]
        })
        .with_guard(|x| {
            if x[0] > 0.0 {
                Ok(())
            } else {
                Err(format!("polar chart needs r > 0, got r = {}", x[0]))
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// Dimension, finiteness and domain-guard check.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinates {x:?}")));
        }
        (self.guard)(x).map_err(Error::DomainViolation)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<Matrix> {
        self.check(x)?;
        let g = symmetrize((self.eval)(x, t));
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("metric is not finite at {x:?}")));
        }
        Ok(g)
    }

    pub fn inverse(&self, x: &[f64], t: f64) -> Result<Matrix> {
        invert_metric(&self.eval(x, t)?)
    }

    /// `∂g/∂x^k` for every `k`, analytic when available.
    pub fn partials(&self, x: &[f64], t: f64) -> Result<Vec<Matrix>> {
        match &self.partials {
            Some(p) => {
                self.check(x)?;
                Ok(p(x, t).into_iter().map(symmetrize).collect())
            }
            None => self.fd_partials(x, t),
        }
    }

    /// Central-difference partials, ignoring any analytic derivative.
    pub fn fd_partials(&self, x: &[f64], t: f64) -> Result<Vec<Matrix>> {
        self.check(x)?;
        let mut out = Vec::with_capacity(self.dim);
        let mut probe = x.to_vec();
        for k in 0..self.dim {
            let h = fd_step(x[k]);
            probe[k] = x[k] + h;
            let plus = self.eval(&probe, t)?;
            probe[k] = x[k] - h;
            let minus = self.eval(&probe, t)?;
            probe[k] = x[k];
            out.push((plus - minus) / (2.0 * h));
        }
        Ok(out)
    }

    /// `∂g/∂t` by central differences; zero for metrics flagged constant.
    pub fn time_partial(&self, x: &[f64], t: f64) -> Result<Matrix> {
        if self.constant {
            return Ok(Matrix::zeros(self.dim, self.dim));
        }
        let h = fd_step(t);
        let plus = self.eval(x, t + h)?;
        let minus = self.eval(x, t - h)?;
        Ok((plus - minus) / (2.0 * h))
    }

    /// Inverse metric together with `∂g^{ij}/∂x^k = -g^{ia} (∂_k g_ab) g^{bj}`.
    pub fn inverse_with_partials(&self, x: &[f64], t: f64) -> Result<(Matrix, Vec<Matrix>)> {
        let inv = self.inverse(x, t)?;
        let dinv = self
            .partials(x, t)?
            .iter()
            .map(|dg| symmetrize(-(&inv * dg * &inv)))
            .collect();
        Ok((inv, dinv))
    }
}

/// `g_ij(p[, t])` for a validated point.
pub fn evaluate_metric(field: &MetricField, p: &CoordinatePoint, t: Option<f64>) -> Result<Matrix> {
    field.eval(p.coords(), t.unwrap_or(0.0))
}

/// Inverse of a symmetric metric matrix.
///
/// The matrix is rejected as singular when its smallest LU pivot falls below
/// `1e-12` times its largest entry. The result is symmetrized.
pub fn invert_metric(g: &Matrix) -> Result<Matrix> {
    if !g.is_square() || g.nrows() == 0 {
        return Err(Error::invalid(format!(
            "metric must be square, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let scale = g.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::SingularMatrix(0.0));
    }
    let lu = g.clone().lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let ratio = min_pivot / scale;
    if ratio < SINGULAR_PIVOT_RATIO {
        return Err(Error::SingularMatrix(ratio));
    }
    let inv = lu.try_inverse().ok_or(Error::SingularMatrix(ratio))?;
    Ok(symmetrize(inv))
}

fn symmetrize(m: Matrix) -> Matrix {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Connection coefficients `Γ^i_jk` at a point, stored `[i][j][k]` flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelSymbols {
    dim: usize,
    values: Vec<f64>,
    pub point: Vec<f64>,
}

impl ChristoffelSymbols {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dim + j) * self.dim + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Γ^i_jk v^j v^k` for each `i`.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += self.get(i, j, k) * v[j] * v[k];
                    }
                }
                acc
            })
            .collect()
    }
}

/// `Γ^i_jk = ½ g^{il}(∂_k g_lj + ∂_j g_lk − ∂_l g_jk)` using the field's
/// analytic partials when present, central differences otherwise.
pub fn christoffel(field: &MetricField, p: &[f64], t: f64) -> Result<ChristoffelSymbols> {
    let dg = field.partials(p, t)?;
    assemble_christoffel(field, p, t, &dg)
}

/// Same as [`christoffel`] but always differentiating numerically.
pub fn christoffel_fd(field: &MetricField, p: &[f64], t: f64) -> Result<ChristoffelSymbols> {
    let dg = field.fd_partials(p, t)?;
    assemble_christoffel(field, p, t, &dg)
}

fn assemble_christoffel(field: &MetricField, p: &[f64], t: f64, dg: &[Matrix]) -> Result<ChristoffelSymbols> {
    let n = field.dim();
    let inv = field.inverse(p, t)?;
    let mut values = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += inv[(i, l)] * (dg[k][(l, j)] + dg[j][(l, k)] - dg[l][(j, k)]);
                }
                let v = 0.5 * acc;
                values[(i * n + j) * n + k] = v;
                values[(i * n + k) * n + j] = v;
            }
        }
    }
    Ok(ChristoffelSymbols {
        dim: n,
        values,
        point: p.to_vec(),
    })
}
