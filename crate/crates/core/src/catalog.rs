//! Built-in metric families with their closed-form ("printed") Jacobi metrics,
//! kept alongside the generic constructions so the two can be cross-checked.
//!
//! Each printed form is stored as `prefactor · tensor`, grouped the way the
//! closed form is usually written down (e.g. Schwarzschild keeps
//! `ℰ² − m²c⁴V²` in front and pushes the `V⁻²` into the tensor). Forms that
//! drop the overall `2m` of the non-relativistic Jacobi metric record it in
//! [`CatalogEntry::nonrelativistic_normalization`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::field::{OneForm, ScalarField};
use crate::jacobi::{
    jacobi_nonrelativistic, jacobi_relativistic_stationary, jacobi_weak_potential, MechanicalSystem, Signature,
    StationarySpacetime,
};
use crate::metric::{Matrix, MetricField};
use crate::{Error, Result};

/// A closed-form Jacobi metric `prefactor · tensor`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedJacobi {
    pub prefactor: f64,
    pub tensor: Matrix,
}

impl PrintedJacobi {
    pub fn matrix(&self) -> Matrix {
        &self.tensor * self.prefactor
    }
}

type ReferenceFn = Arc<dyn Fn(&[f64], f64) -> PrintedJacobi + Send + Sync>;

/// A scalar function of one variable together with its derivative.
#[derive(Clone)]
pub struct RadialFunction {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFunction")
    }
}

impl RadialFunction {
    pub fn new<F, D>(value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }
}

/// One parameterized family, instantiated at fixed parameters.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: BTreeMap<String, f64>,
    pub spatial: MetricField,
    pub vsq: ScalarField,
    pub one_form: Option<OneForm>,
    pub potential: Option<ScalarField>,
    pub signature: Signature,
    /// `generic 2m(E − U) = normalization · printed` for the non-relativistic form.
    pub nonrelativistic_normalization: f64,
    /// Metric components that the Jacobi factor ignores (e.g. Kerr's `dφ dt`).
    pub cross_term: Option<ScalarField>,
    pub notes: Vec<&'static str>,
    mass: f64,
    c: f64,
    relativistic: Option<ReferenceFn>,
    nonrelativistic: Option<ReferenceFn>,
    weak: Option<ReferenceFn>,
    sampler: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("signature", &self.signature)
            .finish()
    }
}

impl CatalogEntry {
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.spatial.dim()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        self.spatial.check(x)
    }

    pub fn has_relativistic_reference(&self) -> bool {
        self.relativistic.is_some()
    }

    pub fn has_nonrelativistic_reference(&self) -> bool {
        self.nonrelativistic.is_some()
    }

    pub fn has_weak_reference(&self) -> bool {
        self.weak.is_some()
    }

    pub fn spacetime(&self) -> Result<StationarySpacetime> {
        let mut st = StationarySpacetime::new(self.vsq.clone(), self.spatial.clone(), self.mass, self.c)?
            .with_signature(self.signature);
        if let Some(a) = &self.one_form {
            st = st.with_one_form(a.clone());
        }
        Ok(st)
    }

    /// The mechanical system with energy `E`, when the entry has a potential.
    pub fn mechanical(&self, energy: f64) -> Result<MechanicalSystem> {
        let u = self
            .potential
            .clone()
            .ok_or_else(|| Error::invalid(format!("{} has no non-relativistic potential", self.name)))?;
        MechanicalSystem::new(self.spatial.clone(), u, self.mass, energy)
    }

    /// Maps a point of the unit cube to a chart point inside the domain.
    pub fn sample_point(&self, unit: &[f64]) -> Vec<f64> {
        (self.sampler)(unit)
    }

    fn reference(&self, which: &Option<ReferenceFn>, what: &str, x: &[f64], value: f64) -> Result<PrintedJacobi> {
        let f = which
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("{} has no closed-form {what} Jacobi metric", self.name)))?;
        self.check(x)?;
        Ok(f(x, value))
    }

    /// Closed-form relativistic Jacobi metric at energy `ℰ` (or `𝒬` for
    /// Euclidean signature).
    pub fn relativistic_reference(&self, x: &[f64], energy: f64) -> Result<PrintedJacobi> {
        self.reference(&self.relativistic, "relativistic", x, energy)
    }

    /// Closed-form non-relativistic Jacobi metric at energy `E`, without the
    /// normalization factor.
    pub fn nonrelativistic_reference(&self, x: &[f64], energy: f64) -> Result<PrintedJacobi> {
        self.reference(&self.nonrelativistic, "non-relativistic", x, energy)
    }

    /// Closed-form weak-potential Jacobi metric at conserved momentum `Q`.
    pub fn weak_reference(&self, x: &[f64], q: f64) -> Result<PrintedJacobi> {
        self.reference(&self.weak, "weak-potential", x, q)
    }

    /// Generic relativistic Jacobi metric `factor · g` (sign not enforced).
    pub fn generic_relativistic(&self, x: &[f64], energy: f64) -> Result<Matrix> {
        let j = jacobi_relativistic_stationary(&self.spacetime()?, energy)?;
        Ok(self.spatial.eval(x, 0.0)? * j.factor_at(x, 0.0)?)
    }

    /// Generic `2m(E − U) g`.
    pub fn generic_nonrelativistic(&self, x: &[f64], energy: f64) -> Result<Matrix> {
        let j = jacobi_nonrelativistic(&self.mechanical(energy)?);
        Ok(self.spatial.eval(x, 0.0)? * j.factor_at(x, 0.0)?)
    }

    /// Generic `−Q²/(c²V²) g`.
    pub fn generic_weak(&self, x: &[f64], q: f64) -> Result<Matrix> {
        let j = jacobi_weak_potential(&self.spacetime()?, q)?;
        Ok(self.spatial.eval(x, 0.0)? * j.factor_at(x, 0.0)?)
    }
}

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(v))
}

fn lerp(lo: f64, hi: f64, u: f64) -> f64 {
    lo + (hi - lo) * u
}

fn polar_angle_guard(theta: f64) -> std::result::Result<(), String> {
    if theta.sin().abs() > 1e-12 {
        Ok(())
    } else {
        Err(format!("coordinate axis sin(θ) = 0 at θ = {theta}"))
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Schwarzschild exterior in `(r, θ, φ)`, with `G = 1`.
///
/// `V² = 1 − 2M/(c²r)`, `g = diag(V⁻², r², r² sin²θ)`, `U = −mM/r`.
pub fn schwarzschild(mass_param: f64, m: f64, c: f64) -> Result<CatalogEntry> {
    require(
        mass_param >= 0.0 && mass_param.is_finite(),
        format!("M must be non-negative, got {mass_param}"),
    )?;
    require(m > 0.0 && c > 0.0, "Schwarzschild needs m > 0 and c > 0")?;
    let big_m = mass_param;
    let rs = 2.0 * big_m / (c * c);
    let spatial = MetricField::new(3, move |x, _| {
        let (r, s) = (x[0], x[1].sin());
        diag(&[r / (r - rs), r * r, r * r * s * s])
    })
    .with_partials(move |x, _| {
        let (r, s, co) = (x[0], x[1].sin(), x[1].cos());
        vec![
            diag(&[-rs / ((r - rs) * (r - rs)), 2.0 * r, 2.0 * r * s * s]),
            diag(&[0.0, 0.0, 2.0 * r * r * s * co]),
            Matrix::zeros(3, 3),
        ]
    })
    .with_guard(move |x| {
        let margin = x[0] - rs;
        if !(x[0] > 0.0 && margin > 1e-9 * rs) {
            return Err(format!("r = {} is not outside the horizon r = {rs}", x[0]));
        }
        polar_angle_guard(x[1])
    });
    let vsq = ScalarField::new(move |x| 1.0 - rs / x[0]).with_gradient(move |x, _| vec![rs / (x[0] * x[0]), 0.0, 0.0]);
    let potential = ScalarField::new(move |x| -m * big_m / x[0])
        .with_gradient(move |x, _| vec![m * big_m / (x[0] * x[0]), 0.0, 0.0]);
    let relativistic: ReferenceFn = Arc::new(move |x, energy| {
        let (r, s) = (x[0], x[1].sin());
        let v2 = 1.0 - rs / r;
        PrintedJacobi {
            prefactor: energy * energy - m * m * c.powi(4) * v2,
            tensor: diag(&[1.0 / (v2 * v2), r * r / v2, r * r * s * s / v2]) / (c * c),
        }
    });
    let nonrelativistic: ReferenceFn = Arc::new(move |x, energy| {
        let (r, s) = (x[0], x[1].sin());
        PrintedJacobi {
            prefactor: 2.0 * m * (energy + m * big_m / r),
            tensor: diag(&[r / (r - rs), r * r, r * r * s * s]),
        }
    });
    Ok(CatalogEntry {
        name: "schwarzschild",
        params: params(&[("M", big_m), ("m", m), ("c", c)]),
        spatial,
        vsq,
        one_form: None,
        potential: Some(potential),
        signature: Signature::Lorentzian,
        nonrelativistic_normalization: 1.0,
        cross_term: None,
        notes: vec!["static: A = 0", "G = 1"],
        mass: m,
        c,
        relativistic: Some(relativistic),
        nonrelativistic: Some(nonrelativistic),
        weak: None,
        sampler: Arc::new(move |u| {
            vec![
                rs + 0.05 + lerp(0.0, 20.0, u[0]),
                lerp(0.1, PI - 0.1, u[1]),
                lerp(0.0, 2.0 * PI, u[2]),
            ]
        }),
    })
}

/// Euclidean Taub-NUT in `(r, θ, φ)` for `r > M`, with `c = 1`.
///
/// `V² = 4M²(r − M)/(r + M)`, `g = diag((r+M)/(r−M), r² − M², (r² − M²) sin²θ)`.
/// The relativistic form is evaluated at the conserved fibre momentum `𝒬`,
/// the weak-potential form at `Q`; both are caller-supplied.
pub fn taub_nut(mass_param: f64, m: f64) -> Result<CatalogEntry> {
    require(
        mass_param > 0.0 && mass_param.is_finite(),
        format!("Taub-NUT needs M > 0, got {mass_param}"),
    )?;
    require(m >= 0.0 && m.is_finite(), "Taub-NUT needs m >= 0")?;
    let big_m = mass_param;
    let spatial = MetricField::new(3, move |x, _| {
        let (r, s) = (x[0], x[1].sin());
        let w = r * r - big_m * big_m;
        diag(&[(r + big_m) / (r - big_m), w, w * s * s])
    })
    .with_partials(move |x, _| {
        let (r, s, co) = (x[0], x[1].sin(), x[1].cos());
        let w = r * r - big_m * big_m;
        vec![
            diag(&[-2.0 * big_m / ((r - big_m) * (r - big_m)), 2.0 * r, 2.0 * r * s * s]),
            diag(&[0.0, 0.0, 2.0 * w * s * co]),
            Matrix::zeros(3, 3),
        ]
    })
    .with_guard(move |x| {
        if !(x[0] - big_m > 1e-9 * big_m) {
            return Err(format!("Taub-NUT chart needs r > M = {big_m}, got r = {}", x[0]));
        }
        polar_angle_guard(x[1])
    });
    let vsq = ScalarField::new(move |x| 4.0 * big_m * big_m * (x[0] - big_m) / (x[0] + big_m));
    let shape = move |x: &[f64]| {
        let (r, s) = (x[0], x[1].sin());
        diag(&[1.0 / ((r - big_m) * (r - big_m)), 1.0, s * s])
    };
    let relativistic: ReferenceFn = Arc::new(move |x, q| {
        let r = x[0];
        let lead = (r + big_m).powi(2) / (4.0 * big_m * big_m);
        PrintedJacobi {
            prefactor: lead * (4.0 * m * m * big_m * big_m * (r - big_m) / (r + big_m) - q * q),
            tensor: shape(x),
        }
    });
    let weak: ReferenceFn = Arc::new(move |x, q| PrintedJacobi {
        prefactor: -q * q * (x[0] + big_m).powi(2) / (4.0 * big_m * big_m),
        tensor: shape(x),
    });
    Ok(CatalogEntry {
        name: "taub_nut",
        params: params(&[("M", big_m), ("m", m)]),
        spatial,
        vsq,
        one_form: None,
        potential: None,
        signature: Signature::Euclidean,
        nonrelativistic_normalization: 1.0,
        cross_term: None,
        notes: vec![
            "Euclidean signature: factor (m²c⁴V² − 𝒬²)/(c²V²)",
            "weak-potential form is the m²c⁴V² → 0 limit: −Q²/(c²V²)",
            "𝒬 and Q are independent inputs",
            "fibre one-form not represented; factors act on gauge-covariant momenta",
        ],
        mass: m,
        c: 1.0,
        relativistic: Some(relativistic),
        nonrelativistic: None,
        weak: Some(weak),
        sampler: Arc::new(move |u| {
            vec![
                big_m * lerp(1.05, 10.0, u[0]),
                lerp(0.1, PI - 0.1, u[1]),
                lerp(0.0, 2.0 * PI, u[2]),
            ]
        }),
    })
}

/// Bertrand spacetime `−dt²/Γ(r) + h²(r)dr² + r²dφ²` in the plane `(r, φ)`, `c = 1`.
///
/// `inv_gamma` is `1/Γ = 1 + 2U/m`, so `U = (m/2)(1/Γ − 1)` and `V² = 1/Γ`.
/// The closed forms are `ℰ²Γ − m²` (relativistic) and
/// `[E + (m/2)(1 − 1/Γ)]` (non-relativistic, normalization `2m`).
pub fn bertrand(
    name: &'static str,
    inv_gamma: RadialFunction,
    h: RadialFunction,
    m: f64,
    extra: &[(&str, f64)],
) -> Result<CatalogEntry> {
    require(m > 0.0 && m.is_finite(), "Bertrand needs m > 0")?;
    let (hv, hd) = (h.clone(), h.clone());
    let spatial = MetricField::new(2, move |x, _| diag(&[hv.value(x[0]).powi(2), x[0] * x[0]]))
        .with_partials(move |x, _| {
            let r = x[0];
            vec![
                diag(&[2.0 * hd.value(r) * hd.derivative(r), 2.0 * r]),
                Matrix::zeros(2, 2),
            ]
        })
        // 1/Γ > 0 is only needed by the relativistic form, which checks V² itself.
        .with_guard({
            let ig = inv_gamma.clone();
            let h = h.clone();
            move |x| {
                let r = x[0];
                if !(r > 0.0) {
                    return Err(format!("Bertrand chart needs r > 0, got {r}"));
                }
                let (g, hh) = (ig.value(r), h.value(r));
                if !(g.is_finite() && hh > 0.0 && hh.is_finite()) {
                    return Err(format!("1/Γ not finite or h not positive at r = {r}"));
                }
                Ok(())
            }
        });
    let (iv, idv) = (inv_gamma.clone(), inv_gamma.clone());
    let vsq = ScalarField::new(move |x| iv.value(x[0])).with_gradient(move |x, _| vec![idv.derivative(x[0]), 0.0]);
    let (pv, pd) = (inv_gamma.clone(), inv_gamma.clone());
    let potential = ScalarField::new(move |x| 0.5 * m * (pv.value(x[0]) - 1.0))
        .with_gradient(move |x, _| vec![0.5 * m * pd.derivative(x[0]), 0.0]);
    let (hr, ir) = (h.clone(), inv_gamma.clone());
    let relativistic: ReferenceFn = Arc::new(move |x, energy| {
        let r = x[0];
        PrintedJacobi {
            prefactor: energy * energy / ir.value(r) - m * m,
            tensor: diag(&[hr.value(r).powi(2), r * r]),
        }
    });
    let (hn, inr) = (h, inv_gamma);
    let nonrelativistic: ReferenceFn = Arc::new(move |x, energy| {
        let r = x[0];
        PrintedJacobi {
            prefactor: energy + 0.5 * m * (1.0 - inr.value(r)),
            tensor: diag(&[hn.value(r).powi(2), r * r]),
        }
    });
    let mut p = params(extra);
    p.insert("m".into(), m);
    Ok(CatalogEntry {
        name,
        params: p,
        spatial,
        vsq,
        one_form: None,
        potential: Some(potential),
        signature: Signature::Lorentzian,
        nonrelativistic_normalization: 2.0 * m,
        cross_term: None,
        notes: vec![
            "planar chart (r, φ) at θ = π/2",
            "non-relativistic closed form omits the overall 2m",
            "dt/ds = 1/(E − U) = 2/((2E + m) − m/Γ)",
        ],
        mass: m,
        c: 1.0,
        relativistic: Some(relativistic),
        nonrelativistic: Some(nonrelativistic),
        weak: None,
        sampler: Arc::new(|u| vec![lerp(0.5, 5.0, u[0]), lerp(0.0, 2.0 * PI, u[1])]),
    })
}

/// Bertrand family member reducing to Kepler: `1/Γ = 1 − 2k/(mr)`, `h = 1`.
pub fn bertrand_kepler(k: f64, m: f64) -> Result<CatalogEntry> {
    require(k.is_finite(), "k must be finite")?;
    let ig = RadialFunction::new(move |r| 1.0 - 2.0 * k / (m * r), move |r| 2.0 * k / (m * r * r));
    bertrand("bertrand_kepler", ig, RadialFunction::constant(1.0), m, &[("k", k)])
}

/// Perlick type I: `Γ = G + √(r⁻² + K)`, `h² = 1/(β²(1 + Kr²))`.
pub fn bertrand_perlick(g: f64, k: f64, beta: f64, m: f64) -> Result<CatalogEntry> {
    require(
        beta > 0.0 && k >= 0.0 && g.is_finite(),
        "Perlick type I needs β > 0, K >= 0, finite G",
    )?;
    let root = move |r: f64| (1.0 / (r * r) + k).sqrt();
    let ig = RadialFunction::new(
        move |r| 1.0 / (g + root(r)),
        move |r| {
            let gamma = g + root(r);
            let dgamma = -1.0 / (r * r * r * root(r));
            -dgamma / (gamma * gamma)
        },
    );
    let h = RadialFunction::new(
        move |r| 1.0 / (beta * (1.0 + k * r * r).sqrt()),
        move |r| -k * r / (beta * (1.0 + k * r * r).powf(1.5)),
    );
    bertrand("bertrand_perlick", ig, h, m, &[("G", g), ("K", k), ("beta", beta)])
}

/// Kerr in Boyer-Lindquist `(r, θ, φ)` outside the ergosurface.
///
/// `Δ = r² − 2GMr/c² + a²`, `ρ² = r² + a²cos²θ`, `V² = 1 − 2GMr/(c²ρ²)`,
/// `g = diag(ρ²/Δ, ρ², sin²θ[(r² + a²)² − a²Δ sin²θ]/ρ²)`.
/// The `dφ dt` cross term is kept in [`CatalogEntry::cross_term`] only.
pub fn kerr(mass_param: f64, a: f64, m: f64, g_newton: f64, c: f64) -> Result<CatalogEntry> {
    require(
        mass_param >= 0.0 && mass_param.is_finite() && a.is_finite(),
        "Kerr needs M >= 0 and finite a",
    )?;
    require(m > 0.0 && g_newton > 0.0 && c > 0.0, "Kerr needs m, G, c > 0")?;
    let mu = g_newton * mass_param / (c * c);
    let a2 = a * a;
    let delta = move |r: f64| r * r - 2.0 * mu * r + a2;
    let rho2 = move |r: f64, th: f64| r * r + a2 * th.cos().powi(2);
    let spatial = MetricField::new(3, move |x, _| {
        let (r, th) = (x[0], x[1]);
        let (d, p2, s2) = (delta(r), rho2(r, th), th.sin().powi(2));
        diag(&[p2 / d, p2, s2 * ((r * r + a2).powi(2) - a2 * d * s2) / p2])
    })
    .with_partials(move |x, _| {
        let (r, th) = (x[0], x[1]);
        let (s, co) = (th.sin(), th.cos());
        let (d, p2, s2) = (delta(r), rho2(r, th), s * s);
        let (dr_d, dr_p2, dth_p2) = (2.0 * r - 2.0 * mu, 2.0 * r, -2.0 * a2 * co * s);
        let n = (r * r + a2).powi(2) - a2 * d * s2;
        let dr_n = 4.0 * r * (r * r + a2) - a2 * s2 * dr_d;
        let dth_n = -2.0 * a2 * d * s * co;
        let p4 = p2 * p2;
        vec![
            diag(&[
                (dr_p2 * d - p2 * dr_d) / (d * d),
                dr_p2,
                s2 * (dr_n * p2 - n * dr_p2) / p4,
            ]),
            diag(&[
                dth_p2 / d,
                dth_p2,
                (2.0 * s * co * n * p2 + s2 * dth_n * p2 - s2 * n * dth_p2) / p4,
            ]),
            Matrix::zeros(3, 3),
        ]
    })
    .with_guard(move |x| {
        let (r, th) = (x[0], x[1]);
        let scale = 1e-12 * (r * r + a2).max(1.0);
        if !(r > 0.0 && delta(r) > scale) {
            return Err(format!("Δ = {} is not positive at r = {r}", delta(r)));
        }
        if !(rho2(r, th) - 2.0 * mu * r > scale) {
            return Err(format!("r = {r}, θ = {th} is inside the ergosurface"));
        }
        polar_angle_guard(th)
    });
    let vsq = ScalarField::new(move |x| 1.0 - 2.0 * mu * x[0] / rho2(x[0], x[1]));
    let gm = g_newton * mass_param;
    let potential = ScalarField::new(move |x| -m * gm * x[0] / rho2(x[0], x[1]));
    let cross_term = ScalarField::new(move |x| -4.0 * gm * a * x[0] * x[1].sin().powi(2) / rho2(x[0], x[1]));
    let tensor = {
        let sp = spatial.clone();
        move |x: &[f64]| sp.eval(x, 0.0).expect("guard checked by caller")
    };
    let t_rel = tensor.clone();
    let relativistic: ReferenceFn = Arc::new(move |x, energy| {
        let p2 = rho2(x[0], x[1]);
        PrintedJacobi {
            prefactor: energy * energy * p2 / (c * c * (p2 - 2.0 * mu * x[0])) - m * m * c * c,
            tensor: t_rel(x),
        }
    });
    let nonrelativistic: ReferenceFn = Arc::new(move |x, energy| PrintedJacobi {
        prefactor: energy + m * gm * x[0] / rho2(x[0], x[1]),
        tensor: tensor(x),
    });
    Ok(CatalogEntry {
        name: "kerr",
        params: params(&[("M", mass_param), ("a", a), ("m", m), ("G", g_newton), ("c", c)]),
        spatial,
        vsq,
        one_form: None,
        potential: Some(potential),
        signature: Signature::Lorentzian,
        nonrelativistic_normalization: 2.0 * m,
        cross_term: Some(cross_term),
        notes: vec![
            "frame-dragging term −4GMar sin²θ/ρ² dφ dt does not enter the Jacobi factor",
            "non-relativistic closed form uses U = −mGMr/ρ² and omits the overall 2m",
        ],
        mass: m,
        c,
        relativistic: Some(relativistic),
        nonrelativistic: Some(nonrelativistic),
        weak: None,
        sampler: Arc::new(move |u| {
            let th = lerp(0.1, PI - 0.1, u[1]);
            let ergo = mu + (mu * mu - a2 * th.cos().powi(2)).max(0.0).sqrt();
            let horizon = mu + (mu * mu - a2).max(0.0).sqrt();
            vec![
                ergo.max(horizon) * 1.05 + 0.05 + lerp(0.0, 15.0, u[0]),
                th,
                lerp(0.0, 2.0 * PI, u[2]),
            ]
        }),
    })
}

/// Kepler problem in the polar plane: `U = −k/r`, `V² = 1 + 2U/(mc²)`.
pub fn kepler(k: f64, m: f64, c: f64) -> Result<CatalogEntry> {
    require(
        k.is_finite() && m > 0.0 && c > 0.0,
        "Kepler needs finite k, m > 0, c > 0",
    )?;
    let potential = ScalarField::new(move |x| -k / x[0]).with_gradient(move |x, _| vec![k / (x[0] * x[0]), 0.0]);
    let vsq = crate::jacobi::vsq_from_potential(&potential, m, c);
    let nonrelativistic: ReferenceFn = Arc::new(move |x, energy| PrintedJacobi {
        prefactor: energy + k / x[0],
        tensor: diag(&[1.0, x[0] * x[0]]),
    });
    Ok(CatalogEntry {
        name: "kepler",
        params: params(&[("k", k), ("m", m), ("c", c)]),
        spatial: MetricField::polar_plane(),
        vsq,
        one_form: None,
        potential: Some(potential),
        signature: Signature::Lorentzian,
        nonrelativistic_normalization: 2.0 * m,
        cross_term: None,
        notes: vec!["closed form (E + k/r)(dr² + r²dφ²) omits the overall 2m"],
        mass: m,
        c,
        relativistic: None,
        nonrelativistic: Some(nonrelativistic),
        weak: None,
        sampler: Arc::new(|u| vec![lerp(0.5, 5.0, u[0]), lerp(0.0, 2.0 * PI, u[1])]),
    })
}

/// Parameters each family accepts, with defaults (`None` = required).
pub fn families() -> Vec<(&'static str, Vec<(&'static str, Option<f64>)>)> {
    vec![
        ("schwarzschild", vec![("M", None), ("m", Some(1.0)), ("c", Some(1.0))]),
        ("taub_nut", vec![("M", None), ("m", Some(1.0))]),
        ("bertrand_kepler", vec![("k", Some(1.0)), ("m", Some(1.0))]),
        (
            "bertrand_perlick",
            vec![("G", None), ("K", None), ("beta", Some(1.0)), ("m", Some(1.0))],
        ),
        (
            "kerr",
            vec![
                ("M", None),
                ("a", None),
                ("m", Some(1.0)),
                ("G", Some(1.0)),
                ("c", Some(1.0)),
            ],
        ),
        ("kepler", vec![("k", Some(1.0)), ("m", Some(1.0)), ("c", Some(1.0))]),
    ]
}

/// Instantiates a family by name from a parameter map.
pub fn by_name(name: &str, given: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let accepted = families()
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::invalid(format!("unknown catalog entry '{name}'")))?
        .1;
    if let Some(unknown) = given.keys().find(|k| !accepted.iter().any(|(n, _)| n == k)) {
        return Err(Error::invalid(format!("'{name}' has no parameter '{unknown}'")));
    }
    let mut v = BTreeMap::new();
    for (key, default) in accepted {
        let value = given
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| Error::invalid(format!("'{name}' needs parameter '{key}'")))?;
        v.insert(key, value);
    }
    match name {
        "schwarzschild" => schwarzschild(v["M"], v["m"], v["c"]),
        "taub_nut" => taub_nut(v["M"], v["m"]),
        "bertrand_kepler" => bertrand_kepler(v["k"], v["m"]),
        "bertrand_perlick" => bertrand_perlick(v["G"], v["K"], v["beta"], v["m"]),
        "kerr" => kerr(v["M"], v["a"], v["m"], v["G"], v["c"]),
        "kepler" => kepler(v["k"], v["m"], v["c"]),
        _ => unreachable!("families() and by_name agree"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ: f64 = PI / 2.0;

    fn rel_close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        let scale = a.amax().max(b.amax()).max(1e-300);
        (a - b).amax() / scale < tol
    }

    #[test]
    fn schwarzschild_examples() {
        let e = schwarzschild(1.0, 1.0, 1.0).unwrap();
        let x = [4.0, EQ, 0.0];
        assert_eq!(e.spatial.eval(&x, 0.0).unwrap(), diag(&[2.0, 16.0, 16.0]));
        assert_eq!(e.relativistic_reference(&x, 1.0).unwrap().prefactor, 0.5);
        assert_eq!(
            e.nonrelativistic_reference(&[2.5, EQ, 0.0], -0.25).unwrap().prefactor,
            2.0 * (-0.25 + 0.4)
        );
        assert!(matches!(e.check(&[2.0, EQ, 0.0]), Err(Error::DomainViolation(_))));
        assert!(matches!(e.check(&[3.0, 0.0, 0.0]), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn schwarzschild_nonrelativistic_closed_form_value() {
        // r = 2 is the horizon, so call the closed form directly
        let e = schwarzschild(1.0, 1.0, 1.0).unwrap();
        let f = e.nonrelativistic.as_ref().unwrap()(&[2.0, EQ, 0.0], -0.25);
        assert_eq!(f.prefactor, 0.5);
    }

    #[test]
    fn taub_nut_examples() {
        let e = taub_nut(1.0, 1.0).unwrap();
        assert_eq!(e.vsq.value(&[3.0, EQ, 0.0], 0.0), 2.0);
        assert_eq!(e.relativistic_reference(&[3.0, EQ, 0.0], 1.0).unwrap().prefactor, 4.0);
        assert!(e.check(&[1.0, EQ, 0.0]).is_err());
        assert!(taub_nut(0.0, 1.0).is_err());
    }

    #[test]
    fn kerr_examples() {
        let e = kerr(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(e.vsq.value(&[4.0, EQ, 0.0], 0.0), 0.5);
        let g = e.spatial.eval(&[4.0, EQ, 0.0], 0.0).unwrap();
        assert!((g[(0, 0)] - 16.0 / 9.0).abs() < 1e-15);
        assert!(e.check(&[1.5, EQ, 0.0]).is_err());
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        for e in [
            schwarzschild(1.0, 1.0, 1.0).unwrap(),
            taub_nut(1.0, 1.0).unwrap(),
            kerr(1.0, 0.7, 1.0, 1.0, 1.0).unwrap(),
            bertrand_perlick(1.0, 0.1, 1.3, 1.0).unwrap(),
        ] {
            let x = e.sample_point(&[0.3, 0.4, 0.5]);
            let a = e.spatial.partials(&x, 0.0).unwrap();
            let n = e.spatial.fd_partials(&x, 0.0).unwrap();
            for (a, n) in a.iter().zip(&n) {
                assert!((a - n).amax() < 1e-7 * a.amax().max(1.0), "{}: {a} vs {n}", e.name);
            }
        }
    }

    #[test]
    fn kerr_without_spin_is_schwarzschild() {
        let k = kerr(1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let s = schwarzschild(1.0, 1.0, 1.0).unwrap();
        let x = [3.7, 1.1, 0.2];
        assert!(rel_close(
            &k.spatial.eval(&x, 0.0).unwrap(),
            &s.spatial.eval(&x, 0.0).unwrap(),
            1e-15
        ));
        assert!((k.vsq.value(&x, 0.0) - s.vsq.value(&x, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn bertrand_free_case() {
        let e = bertrand(
            "free",
            RadialFunction::constant(1.0),
            RadialFunction::constant(1.0),
            1.0,
            &[],
        )
        .unwrap();
        assert_eq!(e.nonrelativistic_reference(&[1.0, 0.0], 0.3).unwrap().prefactor, 0.3);
        let k = bertrand_kepler(1.0, 1.0).unwrap();
        let f = k.nonrelativistic_reference(&[1.0, 0.0], -0.5).unwrap().prefactor;
        assert_eq!(f * k.nonrelativistic_normalization, 1.0);
    }

    #[test]
    fn lookup_by_name() {
        let mut p = BTreeMap::new();
        p.insert("M".to_string(), 1.0);
        assert_eq!(by_name("schwarzschild", &p).unwrap().params["c"], 1.0);
        assert!(by_name("kerr", &p).is_err());
        p.insert("bogus".to_string(), 1.0);
        assert!(by_name("schwarzschild", &p).is_err());
        assert!(by_name("reissner_nordstrom", &BTreeMap::new()).is_err());
    }
}
