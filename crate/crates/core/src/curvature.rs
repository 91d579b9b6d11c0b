//! Gaussian curvature of planar, conformally flat Jacobi metrics
//! `f²(r)(dr² + r²dθ²)` with `f² = E − U(r)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Result};

/// The conformal factor `f²(r)` of a planar Jacobi metric.
#[derive(Clone)]
pub struct ConformalProfile {
    f_sq: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    kepler: Option<(f64, f64)>,
}

impl fmt::Debug for ConformalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalProfile")
            .field("kepler", &self.kepler)
            .finish()
    }
}

impl ConformalProfile {
    pub fn new<F>(f_sq: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f_sq: Arc::new(f_sq),
            kepler: None,
        }
    }

    /// `f² = E − U(r)`.
    pub fn from_potential<U>(energy: f64, potential: U) -> Self
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |r| energy - potential(r))
    }

    /// Kepler profile `f² = E + k/r`.
    pub fn kepler(k: f64, energy: f64) -> Self {
        let mut p = Self::new(move |r| energy + k / r);
        p.kepler = Some((k, energy));
        p
    }

    /// `(k, E)` when built by [`ConformalProfile::kepler`].
    pub fn kepler_params(&self) -> Option<(f64, f64)> {
        self.kepler
    }

    pub fn f_sq(&self, r: f64) -> f64 {
        (self.f_sq)(r)
    }

    /// `f(r)`, failing where the metric is degenerate.
    pub fn f(&self, r: f64) -> Result<f64> {
        let v = self.f_sq(r);
        if v > 0.0 {
            Ok(v.sqrt())
        } else {
            Err(Error::TurningPoint {
                margin: v,
                tolerance: 0.0,
            })
        }
    }
}

/// `K_G = −(1/(r f²)) d/dr[(1/f) d(rf)/dr]` from nested central differences.
///
/// Writes `(1/f) d(rf)/dr = 1 + r (f²)'/(2f²)`, differentiates `f²` and then
/// that quantity on a five-point stencil, and Richardson-extrapolates
/// the steps `h` and `h/2`. The step is `1e-3·max(1, r)` capped at half a
/// percent of the local scale `f²/|(f²)'|`, so it shrinks near turning points.
pub fn gaussian_curvature_numeric(profile: &ConformalProfile, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let centre = profile.f_sq(r);
    if !(centre > 0.0) {
        return Err(Error::TurningPoint {
            margin: centre,
            tolerance: 0.0,
        });
    }
    let probe = 1e-6 * r.max(1.0);
    let slope = (profile.f_sq(r + probe) - profile.f_sq(r - probe)) / (2.0 * probe);
    let mut h = 1e-3 * r.max(1.0);
    if slope != 0.0 && slope.is_finite() {
        h = h.min(0.005 * centre / slope.abs());
    }
    let coarse = nested_difference(profile, r, h)?;
    let fine = nested_difference(profile, r, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn nested_difference(profile: &ConformalProfile, r: f64, h: f64) -> Result<f64> {
    let mut f = [0.0; 5];
    for (i, v) in f.iter_mut().enumerate() {
        let ri = r + (i as f64 - 2.0) * h;
        *v = profile.f_sq(ri);
        if !(ri > 0.0) {
            return Err(Error::domain(format!("curvature stencil reaches r = {ri}")));
        }
        if !(*v > 0.0) {
            return Err(Error::TurningPoint {
                margin: *v,
                tolerance: 0.0,
            });
        }
    }
    let w = |i: usize| {
        let ri = r + (i as f64 - 2.0) * h;
        1.0 + ri * (f[i + 1] - f[i - 1]) / (2.0 * h) / (2.0 * f[i])
    };
    let dw = (w(3) - w(1)) / (2.0 * h);
    Ok(-dw / (r * f[2]))
}

/// Closed-form Kepler curvature `K_G = −kE / (2(rE + k)³)`.
pub fn kepler_curvature(k: f64, energy: f64, r: f64) -> Result<f64> {
    let d = r * energy + k;
    if d == 0.0 || d.abs() <= 1e-15 * (r * energy).abs().max(k.abs()) {
        return Err(Error::PoleAtZeroDenominator(format!(
            "rE + k = 0 at r = {r}, E = {energy}, k = {k}"
        )));
    }
    Ok(-k * energy / (2.0 * d * d * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    Ellipse,
    Parabola,
    Hyperbola,
}

/// Conic type from the sign of the energy.
pub fn classify_orbit(energy: f64) -> OrbitClass {
    if energy < 0.0 {
        OrbitClass::Ellipse
    } else if energy == 0.0 {
        OrbitClass::Parabola
    } else {
        OrbitClass::Hyperbola
    }
}

/// Two-body eccentricity `e = √(1 + 2EL²/(mk²))`.
pub fn eccentricity(energy: f64, angular_momentum: f64, mass: f64, k: f64) -> Result<f64> {
    if !(mass > 0.0) || k == 0.0 {
        return Err(Error::invalid("eccentricity needs m > 0 and k != 0"));
    }
    let arg = 1.0 + 2.0 * energy * angular_momentum * angular_momentum / (mass * k * k);
    if arg < -1e-12 {
        return Err(Error::domain(format!("1 + 2EL²/(mk²) = {arg} is negative")));
    }
    Ok(arg.max(0.0).sqrt())
}

/// Conic type from an eccentricity, treating `|e − 1| <= tol` as parabolic.
pub fn eccentricity_regime(e: f64, tol: f64) -> OrbitClass {
    if (e - 1.0).abs() <= tol {
        OrbitClass::Parabola
    } else if e < 1.0 {
        OrbitClass::Ellipse
    } else {
        OrbitClass::Hyperbola
    }
}

/// `(r, K_G)` at `points` radii approaching `boundary` from `start`, halving
/// the remaining distance each time.
pub fn approach_boundary(
    profile: &ConformalProfile,
    boundary: f64,
    start: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    (0..points)
        .map(|k| {
            let r = boundary + (start - boundary) * 0.5f64.powi(k as i32);
            gaussian_curvature_numeric(profile, r).map(|kg| (r, kg))
        })
        .collect()
}

/// True when `|K_G|` strictly increases along the samples.
pub fn grows_monotonically(samples: &[(f64, f64)]) -> bool {
    samples.windows(2).all(|w| w[1].1.abs() > w[0].1.abs())
}
