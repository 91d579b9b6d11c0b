//! Scalar fields (potentials, `V²`) and one-forms over a chart.

use std::fmt;
use std::sync::Arc;

use crate::metric::fd_step;

type ValueFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;

/// A real function of chart coordinates and (optionally) time.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
    time_dependent: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_gradient", &self.gradient.is_some())
            .field("time_dependent", &self.time_dependent)
            .finish()
    }
}

impl ScalarField {
    /// A static field `f(x)`.
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(move |x, _| f(x)),
            gradient: None,
            time_dependent: false,
        }
    }

    /// A field `f(x, t)`.
    pub fn time_dependent<F>(f: F) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            gradient: None,
            time_dependent: true,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value).with_gradient(|x, _| vec![0.0; x.len()])
    }

    /// Analytic spatial gradient `∂f/∂x^i`.
    pub fn with_gradient<F>(mut self, g: F) -> Self
    where
        F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        (self.eval)(x, t)
    }

    pub fn gradient(&self, x: &[f64], t: f64) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x, t),
            None => self.fd_gradient(x, t),
        }
    }

    pub fn fd_gradient(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|k| {
                let h = fd_step(x[k]);
                probe[k] = x[k] + h;
                let plus = self.value(&probe, t);
                probe[k] = x[k] - h;
                let minus = self.value(&probe, t);
                probe[k] = x[k];
                (plus - minus) / (2.0 * h)
            })
            .collect()
    }

    /// `∂f/∂t`; exactly zero for static fields.
    pub fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        if !self.time_dependent {
            return 0.0;
        }
        let h = fd_step(t);
        (self.value(x, t + h) - self.value(x, t - h)) / (2.0 * h)
    }

    /// `a * f + b`, keeping an analytic gradient if there is one.
    pub fn affine(&self, a: f64, b: f64) -> ScalarField {
        let inner = self.clone();
        let grad_src = self.clone();
        let mut out = ScalarField {
            eval: Arc::new(move |x, t| a * inner.value(x, t) + b),
            gradient: None,
            time_dependent: self.time_dependent,
        };
        if self.gradient.is_some() {
            out.gradient = Some(Arc::new(move |x, t| {
                grad_src.gradient(x, t).into_iter().map(|g| a * g).collect()
            }));
        }
        out
    }
}

/// A covector field `A_i(x)`.
#[derive(Clone)]
pub struct OneForm {
    dim: usize,
    eval: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneForm").field("dim", &self.dim).finish()
    }
}

impl OneForm {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { dim, eval: Arc::new(f) }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, move |_| vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }
}
