//! Jacobi metric constructions.
//!
//! Every Jacobi metric here is a conformal rescaling `factor(x, t) · g_ij(x, t)`
//! of a spatial metric, so they all share the [`ConformalMetric`] type. The
//! constructions differ only in the factor:
//!
//! | construction                       | factor                                   |
//! |------------------------------------|------------------------------------------|
//! | [`jacobi_nonrelativistic`]         | `2m(E − U)`                              |
//! | [`jacobi_relativistic_stationary`] | `(ℰ² − m²c⁴V²) / (c²V²)`                 |
//! | [`nonrelativistic_limit_factor`]   | the above with `ℰ = mc² + E`, `V² = 1 + 2U/(mc²)` |
//! | [`jacobi_time_dependent`]          | `2(q p_t − q²U) − m²c²`                  |
//! | [`jacobi_time_dependent_approx`]   | `2m(ℰ(t) − q²U)`                         |
//! | [`projective_factor_static`]       | `2m Ω²`, `Ω² = E − U`                    |
//! | [`projective_factor_lifted`]       | `2m Ω²`, `Ω² = −p_v − q²U`, `p_v = −ℰ(t)` |
//!
//! Potentials are always passed as `U` (energy units). Two conversions to a
//! temporal metric component appear:
//!
//! * stationary spacetimes: `V² = 1 + 2U/(mc²)` ([`vsq_from_potential`]);
//! * the time-dependent σ-lift: `V² = 2U/(mc²)`, which is the `V² = 2mU`
//!   convention at `m = c = 1` ([`lifted_vsq_from_potential`]).

use std::fmt;
use std::sync::Arc;

use crate::field::{OneForm, ScalarField};
use crate::metric::{Matrix, MetricField};
use crate::{Error, Result};

type FactorFn = dyn Fn(&[f64], f64) -> Result<f64> + Send + Sync;

/// `factor(x, t) · g_ij(x, t)`; valid exactly where the factor is positive.
#[derive(Clone)]
pub struct ConformalMetric {
    base: MetricField,
    factor: Arc<FactorFn>,
    gauge_covariant: bool,
}

impl fmt::Debug for ConformalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalMetric")
            .field("base", &self.base)
            .field("gauge_covariant", &self.gauge_covariant)
            .finish()
    }
}

impl ConformalMetric {
    pub fn new<F>(base: MetricField, factor: F) -> Self
    where
        F: Fn(&[f64], f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            base,
            factor: Arc::new(factor),
            gauge_covariant: false,
        }
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }

    /// True when the metric acts on gauge-covariant momenta `Π_i` rather
    /// than canonical `p_i`.
    pub fn momenta_are_gauge_covariant(&self) -> bool {
        self.gauge_covariant
    }

    /// Raw conformal factor; may be zero or negative outside the valid region.
    pub fn factor_at(&self, x: &[f64], t: f64) -> Result<f64> {
        self.base.check(x)?;
        (self.factor)(x, t)
    }

    pub fn is_valid(&self, x: &[f64], t: f64) -> bool {
        matches!(self.factor_at(x, t), Ok(f) if f > 0.0)
    }

    fn positive_factor(&self, x: &[f64], t: f64) -> Result<f64> {
        let f = self.factor_at(x, t)?;
        if f > 0.0 {
            Ok(f)
        } else {
            Err(Error::TurningPoint {
                margin: f,
                tolerance: 0.0,
            })
        }
    }

    /// `g̃_ij`. Fails with `TurningPoint` where the factor is not positive.
    pub fn metric_at(&self, x: &[f64], t: f64) -> Result<Matrix> {
        let f = self.positive_factor(x, t)?;
        Ok(self.base.eval(x, t)? * f)
    }

    /// `g̃^{ij} = g^{ij} / factor`.
    pub fn inverse_at(&self, x: &[f64], t: f64) -> Result<Matrix> {
        let f = self.positive_factor(x, t)?;
        Ok(self.base.inverse(x, t)? / f)
    }

    /// `g̃^{ij} p_i p_j`, equal to one on the unit-momentum surface.
    pub fn unit_norm(&self, x: &[f64], t: f64, p: &[f64]) -> Result<f64> {
        let inv = self.inverse_at(x, t)?;
        Ok(quadratic_form(&inv, p))
    }

    /// Rescales `p` onto the unit-momentum surface `g̃^{ij} p_i p_j = 1`.
    pub fn normalize(&self, x: &[f64], t: f64, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.unit_norm(x, t, p)?;
        if !(n > 0.0) {
            return Err(Error::invalid("cannot normalize a null momentum"));
        }
        let s = n.sqrt().recip();
        Ok(p.iter().map(|v| v * s).collect())
    }
}

pub(crate) fn quadratic_form(m: &Matrix, p: &[f64]) -> f64 {
    let n = p.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * p[i] * p[j];
        }
    }
    acc
}

/// Metric `g`, potential `U`, mass `m` and the energy label `E` of the
/// constant-energy hypersurface.
#[derive(Debug, Clone)]
pub struct MechanicalSystem {
    pub metric: MetricField,
    pub potential: ScalarField,
    mass: f64,
    energy: f64,
}

impl MechanicalSystem {
    pub fn new(metric: MetricField, potential: ScalarField, mass: f64, energy: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !energy.is_finite() {
            return Err(Error::invalid("energy must be finite"));
        }
        Ok(Self {
            metric,
            potential,
            mass,
            energy,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }

    /// Natural Hamiltonian `H = g^{ij} p_i p_j / 2m + U`.
    pub fn hamiltonian(&self, x: &[f64], p: &[f64], t: f64) -> Result<f64> {
        let inv = self.metric.inverse(x, t)?;
        Ok(quadratic_form(&inv, p) / (2.0 * self.mass) + self.potential.value(x, t))
    }

    /// Relabels the system with the energy of the phase point `(x, p)`.
    pub fn with_energy_from(self, x: &[f64], p: &[f64]) -> Result<Self> {
        let e = self.hamiltonian(x, p, 0.0)?;
        Ok(self.with_energy(e))
    }

    /// `E − U(x, t)`.
    pub fn kinetic_margin(&self, x: &[f64], t: f64) -> f64 {
        self.energy - self.potential.value(x, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// `−c²V²(dt + A)² + g`
    Lorentzian,
    /// `+V²(dψ + A)² + g`, e.g. Euclidean Taub-NUT.
    Euclidean,
}

/// Stationary line element `−c²V²(dt + A_i dx^i)² + g_ij dx^i dx^j`.
#[derive(Debug, Clone)]
pub struct StationarySpacetime {
    pub vsq: ScalarField,
    pub one_form: Option<OneForm>,
    pub metric: MetricField,
    mass: f64,
    c: f64,
    signature: Signature,
}

impl StationarySpacetime {
    pub fn new(vsq: ScalarField, metric: MetricField, mass: f64, c: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be non-negative, got {mass}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("speed of light must be positive, got {c}")));
        }
        Ok(Self {
            vsq,
            one_form: None,
            metric,
            mass,
            c,
            signature: Signature::Lorentzian,
        })
    }

    /// Static spacetime whose temporal component encodes the potential of
    /// `sys`: `V² = 1 + 2U/(mc²)`.
    pub fn from_potential(sys: &MechanicalSystem, c: f64) -> Result<Self> {
        let vsq = vsq_from_potential(&sys.potential, sys.mass(), c);
        Self::new(vsq, sys.metric.clone(), sys.mass(), c)
    }

    pub fn with_one_form(mut self, a: OneForm) -> Self {
        self.one_form = Some(a);
        self
    }

    pub fn with_signature(mut self, signature: Signature) -> Self {
        self.signature = signature;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    fn vsq_at(&self, x: &[f64]) -> Result<f64> {
        let v = self.vsq.value(x, 0.0);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("V² = {v} is not positive at {x:?}")))
        }
    }

    /// `Π_i = p_i − ℰ A_i`.
    pub fn gauge_covariant_momentum(&self, x: &[f64], p: &[f64], energy: f64) -> Vec<f64> {
        match &self.one_form {
            Some(a) => p.iter().zip(a.value(x)).map(|(pi, ai)| pi - energy * ai).collect(),
            None => p.to_vec(),
        }
    }

    /// `c²V² g^{ij} Π_i Π_j + m²c⁴V² − ℰ²`; zero on the timelike mass shell.
    pub fn energy_relation_residual(&self, x: &[f64], pi: &[f64], energy: f64) -> Result<f64> {
        let vsq = self.vsq_at(x)?;
        let inv = self.metric.inverse(x, 0.0)?;
        let c2 = self.c * self.c;
        let m = self.mass;
        Ok(c2 * vsq * quadratic_form(&inv, pi) + m * m * c2 * c2 * vsq - energy * energy)
    }
}

/// `V² = 1 + 2U/(mc²)`.
pub fn vsq_from_potential(potential: &ScalarField, mass: f64, c: f64) -> ScalarField {
    potential.affine(2.0 / (mass * c * c), 1.0)
}

/// `V² = 2U/(mc²)` for the time-dependent σ-lift.
pub fn lifted_vsq_from_potential(potential: &ScalarField, mass: f64, c: f64) -> ScalarField {
    potential.affine(2.0 / (mass * c * c), 0.0)
}

/// Jacobi metric of a natural Hamiltonian system: `2m(E − U) g_ij`.
pub fn jacobi_nonrelativistic(sys: &MechanicalSystem) -> ConformalMetric {
    let m = sys.mass();
    let e = sys.energy();
    let u = sys.potential.clone();
    ConformalMetric::new(sys.metric.clone(), move |x, t| Ok(2.0 * m * (e - u.value(x, t))))
}

/// Jacobi metric of timelike geodesics at fixed relativistic energy `ℰ`:
/// `J_ij = (ℰ² − m²c⁴V²)/(c²V²) g_ij`, acting on gauge-covariant momenta.
///
/// For a Euclidean-signature line element the sign of the bracket flips:
/// `(m²c⁴V² − 𝒬²)/(c²V²)`, with `energy` playing the role of the conserved
/// momentum `𝒬` conjugate to the fibre coordinate.
pub fn jacobi_relativistic_stationary(st: &StationarySpacetime, energy: f64) -> Result<ConformalMetric> {
    if !energy.is_finite() {
        return Err(Error::invalid("relativistic energy must be finite"));
    }
    if st.signature == Signature::Lorentzian && energy <= 0.0 {
        return Err(Error::invalid(format!(
            "relativistic energy must be positive, got {energy}"
        )));
    }
    let m = st.mass;
    let c = st.c;
    let sign = match st.signature {
        Signature::Lorentzian => 1.0,
        Signature::Euclidean => -1.0,
    };
    let st2 = st.clone();
    let mut out = ConformalMetric::new(st.metric.clone(), move |x, _| {
        let vsq = st2.vsq_at(x)?;
        let rest = m * m * c * c * c * c * vsq;
        Ok(sign * (energy * energy - rest) / (c * c * vsq))
    });
    out.gauge_covariant = true;
    Ok(out)
}

/// Weak-potential (`m²c⁴V² → 0`) limit of the Euclidean line-element factor:
/// `−𝒬²/(c²V²)`.
pub fn jacobi_weak_potential(st: &StationarySpacetime, conserved: f64) -> Result<ConformalMetric> {
    if !conserved.is_finite() {
        return Err(Error::invalid("conserved momentum must be finite"));
    }
    let c = st.c;
    let st2 = st.clone();
    let mut out = ConformalMetric::new(st.metric.clone(), move |x, _| {
        let vsq = st2.vsq_at(x)?;
        Ok(-(conserved * conserved) / (c * c * vsq))
    });
    out.gauge_covariant = true;
    Ok(out)
}

/// Exact relativistic Jacobi factor for `ℰ = mc² + E` and
/// `V² = 1 + 2U/(mc²)`, where `E` is the energy label of `sys`.
///
/// As `c → ∞` the factor tends to `2m(E − U)` with relative error `O(c⁻²)`.
/// The evaluation splits `ℰ² − m²c⁴V² = (ℰ − mc²V)(ℰ + mc²V)` and writes
/// `ℰ − mc²V = E − 2U/(1 + V)` so the `O(c⁻²)` correction survives at large `c`.
pub fn nonrelativistic_limit_factor(sys: &MechanicalSystem, c: f64) -> Result<ConformalMetric> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("speed of light must be positive, got {c}")));
    }
    let m = sys.mass();
    let e = sys.energy();
    let u = sys.potential.clone();
    let mut out = ConformalMetric::new(sys.metric.clone(), move |x, t| {
        let pot = u.value(x, t);
        let mc2 = m * c * c;
        let vsq = 1.0 + 2.0 * pot / mc2;
        if !(vsq > 0.0) {
            return Err(Error::domain(format!("V² = {vsq} is not positive at {x:?}")));
        }
        let v = vsq.sqrt();
        let minus = e - 2.0 * pot / (1.0 + v);
        let plus = mc2 * (1.0 + v) + e;
        Ok(minus * plus / (c * c * vsq))
    });
    out.gauge_covariant = true;
    Ok(out)
}

/// Jacobi metric on the constant-momentum hypersurface `p_σ/c = q` of the
/// σ-lift: `J_ij = [2(q p_t − q²U) − m²c²] g_ij`.
pub fn jacobi_time_dependent(
    g: &MetricField,
    potential: &ScalarField,
    q: f64,
    p_t: f64,
    mass: f64,
    c: f64,
) -> Result<ConformalMetric> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::invalid(format!(
            "lift momentum q must be finite and non-zero, got {q}"
        )));
    }
    if !(mass > 0.0) || !(c > 0.0) || !p_t.is_finite() {
        return Err(Error::invalid(
            "time-dependent Jacobi metric needs m > 0, c > 0 and finite p_t",
        ));
    }
    let u = potential.clone();
    let rest = mass * mass * c * c;
    Ok(ConformalMetric::new(g.clone(), move |x, t| {
        Ok(2.0 * (q * p_t - q * q * u.value(x, t)) - rest)
    }))
}

/// Non-relativistic time-dependent Jacobi metric `2m(ℰ(t) − q²U) g_ij`.
pub fn jacobi_time_dependent_approx<F>(
    g: &MetricField,
    potential: &ScalarField,
    energy: F,
    q: f64,
    mass: f64,
) -> Result<ConformalMetric>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if !(mass > 0.0) || !q.is_finite() {
        return Err(Error::invalid("time-dependent Jacobi metric needs m > 0 and finite q"));
    }
    let u = potential.clone();
    Ok(ConformalMetric::new(g.clone(), move |x, t| {
        Ok(2.0 * mass * (energy(t) - q * q * u.value(x, t)))
    }))
}

/// Jacobi metric from rescaling the null Hamiltonian
/// `g^{ij}p_ip_j/2m + U p_u² − sgn(H) p_y²` by `Ω² = E − U` with
/// `p_u² = 1`, `p_y² = |E|`.
pub fn projective_factor_static(sys: &MechanicalSystem) -> ConformalMetric {
    let m = sys.mass();
    let e = sys.energy();
    let u = sys.potential.clone();
    ConformalMetric::new(sys.metric.clone(), move |x, t| {
        let omega_sq = e - u.value(x, t);
        Ok(2.0 * m * omega_sq)
    })
}

/// Jacobi metric from the lifted null Hamiltonian
/// `g^{ij}p_ip_j/2m + U p_u² + p_u p_v/mc` with `p_u = q`, `p_v = −ℰ(t)`.
/// The rescaling `Ω² = −p_v − q²U` is taken per unit `p_u`, giving
/// `2m(ℰ(t) − q²U) g_ij`.
pub fn projective_factor_lifted<F>(
    g: &MetricField,
    potential: &ScalarField,
    q: f64,
    energy: F,
    mass: f64,
) -> Result<ConformalMetric>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if !(mass > 0.0) || !q.is_finite() {
        return Err(Error::invalid("projective lift needs m > 0 and finite q"));
    }
    let u = potential.clone();
    Ok(ConformalMetric::new(g.clone(), move |x, t| {
        let p_u = q;
        let p_v = -energy(t);
        let omega_sq = -p_v - p_u * p_u * u.value(x, t);
        Ok(2.0 * mass * omega_sq)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kepler(e: f64) -> MechanicalSystem {
        let u = ScalarField::new(|x| -1.0 / x[0]);
        MechanicalSystem::new(MetricField::polar_plane(), u, 1.0, e).unwrap()
    }

    #[test]
    fn free_particle_factor_is_one() {
        let sys = MechanicalSystem::new(MetricField::euclidean(2), ScalarField::constant(0.0), 1.0, 0.5).unwrap();
        let j = jacobi_nonrelativistic(&sys);
        assert_eq!(j.factor_at(&[0.3, -2.0], 0.0).unwrap(), 1.0);
        assert_eq!(j.metric_at(&[0.3, -2.0], 0.0).unwrap(), Matrix::identity(2, 2));
    }

    #[test]
    fn kepler_factor_at_unit_radius() {
        let j = jacobi_nonrelativistic(&kepler(-0.5));
        assert_eq!(j.factor_at(&[1.0, 0.0], 0.0).unwrap(), 1.0);
    }

    #[test]
    fn turning_point_is_invalid() {
        let j = jacobi_nonrelativistic(&kepler(-0.5));
        // U(2) = -0.5 = E
        assert_eq!(j.factor_at(&[2.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(!j.is_valid(&[2.0, 0.0], 0.0));
        assert!(matches!(j.metric_at(&[2.0, 0.0], 0.0), Err(Error::TurningPoint { .. })));
        assert!(matches!(
            j.inverse_at(&[3.0, 0.0], 0.0),
            Err(Error::TurningPoint { .. })
        ));
    }

    #[test]
    fn stationary_flat_factor() {
        let st = StationarySpacetime::new(ScalarField::constant(1.0), MetricField::euclidean(3), 1.0, 1.0).unwrap();
        let j = jacobi_relativistic_stationary(&st, 2f64.sqrt()).unwrap();
        assert!((j.factor_at(&[0.0, 0.0, 0.0], 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(j.momenta_are_gauge_covariant());
        let zero = jacobi_relativistic_stationary(&st, 1.0).unwrap();
        assert_eq!(zero.factor_at(&[1.0, 1.0, 1.0], 0.0).unwrap(), 0.0);
        assert!(!zero.is_valid(&[1.0, 1.0, 1.0], 0.0));
    }

    #[test]
    fn stationary_rejects_bad_inputs() {
        let st = StationarySpacetime::new(ScalarField::new(|x| x[0]), MetricField::euclidean(1), 1.0, 1.0).unwrap();
        assert!(jacobi_relativistic_stationary(&st, -1.0).is_err());
        let j = jacobi_relativistic_stationary(&st, 2.0).unwrap();
        assert!(matches!(j.factor_at(&[-1.0], 0.0), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn gauge_covariant_momentum_subtracts_one_form() {
        let st = StationarySpacetime::new(ScalarField::constant(1.0), MetricField::euclidean(2), 1.0, 1.0)
            .unwrap()
            .with_one_form(OneForm::new(2, |x| vec![x[1], 0.5]));
        assert_eq!(
            st.gauge_covariant_momentum(&[0.0, 2.0], &[1.0, 1.0], 2.0),
            vec![-3.0, 0.0]
        );
    }

    #[test]
    fn limit_factor_free_particle() {
        let sys = MechanicalSystem::new(MetricField::euclidean(1), ScalarField::constant(0.0), 1.0, 0.5).unwrap();
        let f = nonrelativistic_limit_factor(&sys, 1e3)
            .unwrap()
            .factor_at(&[0.0], 0.0)
            .unwrap();
        let rel = f / (2.0 * 0.5) - 1.0;
        // exact: (2mE + E²/c²)/(2mE) - 1 = E/(2mc²) = 2.5e-7
        assert!((rel - 2.5e-7).abs() < 1e-12, "{rel}");
        let zero = nonrelativistic_limit_factor(&sys.clone().with_energy(0.0), 1e3).unwrap();
        assert_eq!(zero.factor_at(&[0.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn time_dependent_examples() {
        let g = MetricField::euclidean(1);
        let u = ScalarField::constant(0.25);
        let j = jacobi_time_dependent(&g, &u, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(j.factor_at(&[0.0], 0.0).unwrap(), 0.5);
        // q p_t = m²c²/2 with U = 0: threshold
        let thr = jacobi_time_dependent(&g, &ScalarField::constant(0.0), 2.0, 0.25, 1.0, 1.0).unwrap();
        assert_eq!(thr.factor_at(&[0.0], 0.0).unwrap(), 0.0);
        assert!(jacobi_time_dependent(&g, &u, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn time_dependent_approx_examples() {
        let g = MetricField::euclidean(1);
        let j = jacobi_time_dependent_approx(&g, &ScalarField::constant(0.5), |_| 1.0, 1.0, 1.0).unwrap();
        assert_eq!(j.factor_at(&[3.0], 7.0).unwrap(), 1.0);
        let moving = ScalarField::time_dependent(|x, t| x[0] * t);
        let j = jacobi_time_dependent_approx(&g, &moving, |t| 2.0 * t, 1.0, 1.0).unwrap();
        assert_eq!(j.factor_at(&[2.0], 3.0).unwrap(), 0.0);
    }

    #[test]
    fn static_approx_reduces_to_jacobi() {
        let sys = kepler(-0.3);
        let a = jacobi_time_dependent_approx(&sys.metric, &sys.potential, |_| -0.3, 1.0, 1.0).unwrap();
        let b = jacobi_nonrelativistic(&sys);
        for r in [0.5, 1.0, 2.0, 3.0] {
            assert_eq!(
                a.factor_at(&[r, 0.1], 0.0).unwrap(),
                b.factor_at(&[r, 0.1], 0.0).unwrap()
            );
        }
    }

    #[test]
    fn projective_examples() {
        let g = MetricField::euclidean(1);
        let j = projective_factor_lifted(&g, &ScalarField::constant(1.0), 1.0, |_| 3.0, 2.0).unwrap();
        assert_eq!(j.factor_at(&[0.0], 0.0).unwrap(), 8.0);
        let k = projective_factor_static(&kepler(-0.5));
        assert_eq!(k.factor_at(&[1.0, 0.0], 0.0).unwrap(), 1.0);
        assert_eq!(k.factor_at(&[2.0, 0.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn normalize_puts_momentum_on_unit_surface() {
        let j = jacobi_nonrelativistic(&kepler(-0.2));
        let p = j.normalize(&[1.5, 0.0], 0.0, &[0.3, 0.7]).unwrap();
        assert!((j.unit_norm(&[1.5, 0.0], 0.0, &p).unwrap() - 1.0).abs() < 1e-14);
    }
}
