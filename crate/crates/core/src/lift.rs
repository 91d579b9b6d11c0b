//! Eisenhart-Duval lifts: geometrizing a potential with extra dummy
//! dimensions, so the mechanical flow becomes the projection of a geodesic
//! flow.
//!
//! Two lifts are provided.
//!
//! * Static z-lift on `(x, z)`: `g_ij dx^i dx^j + A(x) dz²`, cometric
//!   `diag(g^{ij}/m, 1/A)`. With [`PzNormalization::Unit`] `A = 1/(2V)` and
//!   the mechanics sits at `p_z = 1`; with [`PzNormalization::Sqrt2`]
//!   `1/A = V` and it sits at `p_z = √2`. Either way
//!   `K = ½ G^{AB}P_AP_B` equals `g^{ij}p_ip_j/2m + V` on that slice.
//! * Time-dependent σ-lift on `(x, t, σ)`:
//!   `dl² = c²V²dt² + 2c dσ dt − g_ij dx^i dx^j` with `V² = 2U/(mc²)`.
//!   The flow Hamiltonian is `𝒦 = (1/2m)[2p_tp_σ/c − V²p_σ² − g^{ij}p_ip_j]`,
//!   `σ` is cyclic, and `p_σ = mc` makes the affine parameter equal `t`.
//!   Spatial momenta come out as `p_i = −P_i` relative to the mechanical ones.
//!
//! The integrations run on the cometric, which stays regular where `V = 0`
//! even though `g_zz = 1/(2V)` does not.

use crate::field::ScalarField;
use crate::flow::{FlowState, ParameterKind, PhaseFlow, Trajectory};
use crate::jacobi::{lifted_vsq_from_potential, quadratic_form, MechanicalSystem};
use crate::metric::{invert_metric, Matrix, MetricField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    StaticZ,
    TimeDependentSigma,
}

/// Which `p_z` slice of the static lift carries the mechanics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PzNormalization {
    /// `A = (2V)⁻¹`, `p_z = 1`.
    Unit,
    /// `H = ½(g^{ij}p_ip_j + V p_z²)`, `p_z = √2`.
    Sqrt2,
}

impl PzNormalization {
    pub fn p_z(self) -> f64 {
        match self {
            PzNormalization::Unit => 1.0,
            PzNormalization::Sqrt2 => std::f64::consts::SQRT_2,
        }
    }

    /// `G^{zz} / V`.
    fn inverse_a_scale(self) -> f64 {
        match self {
            PzNormalization::Unit => 2.0,
            PzNormalization::Sqrt2 => 1.0,
        }
    }
}

/// A base system together with its extended (lifted) geometry.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pub base: MetricField,
    pub potential: ScalarField,
    kind: LiftKind,
    normalization: PzNormalization,
    mass: f64,
    c: f64,
}

/// Static z-lift of `g` with potential `V` (`V ≥ 0` on the chart).
pub fn lift_static(
    g: &MetricField,
    v: &ScalarField,
    mass: f64,
    normalization: PzNormalization,
) -> Result<LiftedSystem> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid(format!("mass must be positive, got {mass}")));
    }
    Ok(LiftedSystem {
        base: g.clone(),
        potential: v.clone(),
        kind: LiftKind::StaticZ,
        normalization,
        mass,
        c: 1.0,
    })
}

/// σ-lift of a (possibly time-dependent) system `(g(x, t), U(x, t))`.
pub fn lift_time_dependent(g: &MetricField, u: &ScalarField, mass: f64, c: f64) -> Result<LiftedSystem> {
    if !(mass > 0.0 && mass.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("σ-lift needs m > 0 and c > 0"));
    }
    Ok(LiftedSystem {
        base: g.clone(),
        potential: u.clone(),
        kind: LiftKind::TimeDependentSigma,
        normalization: PzNormalization::Unit,
        mass,
        c,
    })
}

impl LiftedSystem {
    pub fn kind(&self) -> LiftKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn normalization(&self) -> PzNormalization {
        self.normalization
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn extended_dim(&self) -> usize {
        match self.kind {
            LiftKind::StaticZ => self.base.dim() + 1,
            LiftKind::TimeDependentSigma => self.base.dim() + 2,
        }
    }

    /// Index of the cyclic dummy coordinate (`z` or `σ`).
    pub fn dummy_index(&self) -> usize {
        self.extended_dim() - 1
    }

    fn vsq(&self) -> ScalarField {
        lifted_vsq_from_potential(&self.potential, self.mass, self.c)
    }

    /// Split `X` into base coordinates and the time they are evaluated at.
    fn base_point<'a>(&self, xx: &'a [f64]) -> Result<(&'a [f64], f64)> {
        if xx.len() != self.extended_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.extended_dim(),
                got: xx.len(),
            });
        }
        let n = self.base.dim();
        Ok(match self.kind {
            LiftKind::StaticZ => (&xx[..n], 0.0),
            LiftKind::TimeDependentSigma => (&xx[..n], xx[n]),
        })
    }

    /// The covariant extended metric.
    ///
    /// For the static lift this fails with `DomainViolation` wherever
    /// `V ≤ 0`, since `g_zz = 1/(2V)` (or `1/V`) is undefined there.
    pub fn extended_metric(&self) -> MetricField {
        let n = self.base.dim();
        let dim = self.extended_dim();
        let base = self.base.clone();
        let pot = self.potential.clone();
        let mass = self.mass;
        let c = self.c;
        match self.kind {
            LiftKind::StaticZ => {
                let scale = self.normalization.inverse_a_scale();
                let guard_pot = pot.clone();
                let guard_base = base.clone();
                MetricField::new(dim, move |xx, _| {
                    let mut out = Matrix::zeros(dim, dim);
                    let g = base
                        .eval(&xx[..n], 0.0)
                        .unwrap_or_else(|_| Matrix::from_element(n, n, f64::NAN));
                    out.view_mut((0, 0), (n, n)).copy_from(&(g * mass));
                    out[(n, n)] = 1.0 / (scale * pot.value(&xx[..n], 0.0));
                    out
                })
                .with_guard(move |xx| {
                    guard_base.check(&xx[..n]).map_err(|e| e.to_string())?;
                    let v = guard_pot.value(&xx[..n], 0.0);
                    if v > 0.0 {
                        Ok(())
                    } else {
                        Err(format!("lift needs V > 0, got V = {v}"))
                    }
                })
            }
            LiftKind::TimeDependentSigma => {
                let vsq = self.vsq();
                let guard_base = base.clone();
                MetricField::new(dim, move |xx, _| {
                    let t = xx[n];
                    let mut out = Matrix::zeros(dim, dim);
                    let g = base
                        .eval(&xx[..n], t)
                        .unwrap_or_else(|_| Matrix::from_element(n, n, f64::NAN));
                    out.view_mut((0, 0), (n, n)).copy_from(&(-g));
                    out[(n, n)] = c * c * vsq.value(&xx[..n], t);
                    out[(n, n + 1)] = c;
                    out[(n + 1, n)] = c;
                    out
                })
                .with_guard(move |xx| guard_base.check(&xx[..n]).map_err(|e| e.to_string()))
            }
        }
    }

    /// Cometric `G^{AB}` used by the flow (scaled by `1/m`).
    pub fn cometric(&self, xx: &[f64]) -> Result<Matrix> {
        let (x, t) = self.base_point(xx)?;
        let n = self.base.dim();
        let inv = self.base.inverse(x, t)?;
        let m = self.mass;
        let mut out = Matrix::zeros(self.extended_dim(), self.extended_dim());
        match self.kind {
            LiftKind::StaticZ => {
                out.view_mut((0, 0), (n, n)).copy_from(&(inv / m));
                out[(n, n)] = self.normalization.inverse_a_scale() * self.potential.value(x, t);
            }
            LiftKind::TimeDependentSigma => {
                out.view_mut((0, 0), (n, n)).copy_from(&(-inv / m));
                out[(n, n + 1)] = 1.0 / (m * self.c);
                out[(n + 1, n)] = 1.0 / (m * self.c);
                out[(n + 1, n + 1)] = -self.vsq().value(x, t) / m;
            }
        }
        Ok(out)
    }

    /// `K = ½ G^{AB} P_A P_B`.
    pub fn hamiltonian(&self, xx: &[f64], pp: &[f64]) -> Result<f64> {
        Ok(0.5 * quadratic_form(&self.cometric(xx)?, pp))
    }

    /// `(dX/dλ, dP/dλ)` of the lifted geodesic flow.
    pub fn rhs(&self, xx: &[f64], pp: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (x, t) = self.base_point(xx)?;
        if pp.len() != xx.len() {
            return Err(Error::DimensionMismatch {
                expected: xx.len(),
                got: pp.len(),
            });
        }
        let n = self.base.dim();
        let m = self.mass;
        let pot = self.potential.value(x, t);
        if !pot.is_finite() {
            return Err(Error::domain(format!("potential is not finite at {x:?}")));
        }
        let cometric = self.cometric(xx)?;
        let dx: Vec<f64> = (0..xx.len())
            .map(|a| (0..xx.len()).map(|b| cometric[(a, b)] * pp[b]).sum())
            .collect();
        let (_, dinv) = self.base.inverse_with_partials(x, t)?;
        let p = &pp[..n];
        let grad = self.potential.gradient(x, t);
        let mut dp = vec![0.0; xx.len()];
        match self.kind {
            LiftKind::StaticZ => {
                let scale = self.normalization.inverse_a_scale();
                let pz2 = pp[n] * pp[n];
                for i in 0..n {
                    dp[i] = -0.5 * (quadratic_form(&dinv[i], p) / m + scale * grad[i] * pz2);
                }
            }
            LiftKind::TimeDependentSigma => {
                let c = self.c;
                let ps2 = pp[n + 1] * pp[n + 1];
                // ∂V² = 2∂U/(mc²)
                let dvsq = |du: f64| 2.0 * du / (m * c * c);
                for i in 0..n {
                    dp[i] = (dvsq(grad[i]) * ps2 + quadratic_form(&dinv[i], p)) / (2.0 * m);
                }
                let inv = self.base.inverse(x, t)?;
                let dinv_t = -(&inv * self.base.time_partial(x, t)? * &inv);
                dp[n] = (dvsq(self.potential.time_derivative(x, t)) * ps2 + quadratic_form(&dinv_t, p)) / (2.0 * m);
            }
        }
        if dx.iter().chain(&dp).any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("lifted vector field is not finite at {xx:?}")));
        }
        Ok((dx, dp))
    }

    /// Lifted phase point over the mechanical state `(x, p)` at time `t0`.
    ///
    /// Static lift: `X = (x, 0)`, `P = (p, p_z)` with the normalization's `p_z`.
    /// σ-lift: `X = (x, t0, 0)`, `P = (−p, p_t, mc)` with `p_t` solving the
    /// mass-shell relation.
    pub fn initial_state(&self, x: &[f64], p: &[f64], t0: f64) -> Result<FlowState> {
        let n = self.base.dim();
        if x.len() != n || p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len().max(p.len()),
            });
        }
        match self.kind {
            LiftKind::StaticZ => {
                let xx = [x, &[0.0]].concat();
                let pp = [p, &[self.normalization.p_z()]].concat();
                FlowState::new(0.0, xx, pp)
            }
            LiftKind::TimeDependentSigma => {
                let (m, c) = (self.mass, self.c);
                let p_sigma = m * c;
                let lifted: Vec<f64> = p.iter().map(|v| -v).collect();
                let p_t = self.mass_shell_p_t(x, &lifted, p_sigma, t0)?;
                let xx = [x, &[t0, 0.0]].concat();
                let pp = [lifted.as_slice(), &[p_t, p_sigma]].concat();
                FlowState::new(t0, xx, pp)
            }
        }
    }

    /// `p_t = (c²g^{ij}p_ip_j + c²V²p_σ² + m²c⁴) / (2c p_σ)`.
    pub fn mass_shell_p_t(&self, x: &[f64], p: &[f64], p_sigma: f64, t: f64) -> Result<f64> {
        if p_sigma == 0.0 {
            return Err(Error::invalid("p_σ must be non-zero"));
        }
        let (m, c) = (self.mass, self.c);
        let gpp = quadratic_form(&self.base.inverse(x, t)?, p);
        let vsq = self.vsq().value(x, t);
        Ok((c * c * gpp + c * c * vsq * p_sigma * p_sigma + m * m * c.powi(4)) / (2.0 * c * p_sigma))
    }

    pub fn flow(&self) -> LiftedFlow {
        LiftedFlow { sys: self.clone() }
    }

    /// Drops the dummy coordinates. For the σ-lift the parameter becomes the
    /// `t` coordinate and momenta are mapped back with `P = −p`.
    pub fn project(&self, traj: &Trajectory) -> Result<Trajectory> {
        let n = self.base.dim();
        let mech = MechanicalSystem::new(self.base.clone(), self.potential.clone(), self.mass, 0.0)?;
        let states = traj
            .states()
            .iter()
            .map(|s| {
                if s.dim() != self.extended_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.extended_dim(),
                        got: s.dim(),
                    });
                }
                let (param, p): (f64, Vec<f64>) = match self.kind {
                    LiftKind::StaticZ => (s.param, s.p[..n].to_vec()),
                    LiftKind::TimeDependentSigma => (s.x[n], s.p[..n].iter().map(|v| -v).collect()),
                };
                let mut out = FlowState::new(param, s.x[..n].to_vec(), p)?;
                out.monitors
                    .insert("energy".into(), mech.hamiltonian(&out.x, &out.p, param)?);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(states, ParameterKind::TimeT, traj.termination())
    }
}

/// `2c p_t p_σ − (c²g^{ij}p_ip_j + c²V²p_σ² + m²c⁴)`, zero on the mass shell.
pub fn lifted_energy_relation(sys: &LiftedSystem, state: &FlowState) -> Result<f64> {
    if sys.kind() != LiftKind::TimeDependentSigma {
        return Err(Error::invalid("mass-shell relation applies to the σ-lift"));
    }
    let n = sys.base_dim();
    let (x, t) = sys.base_point(&state.x)?;
    let (m, c) = (sys.mass, sys.c);
    let (p_t, p_sigma) = (state.p[n], state.p[n + 1]);
    let gpp = quadratic_form(&sys.base.inverse(x, t)?, &state.p[..n]);
    let vsq = sys.vsq().value(x, t);
    Ok(2.0 * c * p_t * p_sigma - (c * c * gpp + c * c * vsq * p_sigma * p_sigma + m * m * c.powi(4)))
}

/// Geodesic flow on the lifted phase space.
#[derive(Debug, Clone)]
pub struct LiftedFlow {
    pub sys: LiftedSystem,
}

impl PhaseFlow for LiftedFlow {
    fn dim(&self) -> usize {
        self.sys.extended_dim()
    }

    fn parameter_kind(&self) -> ParameterKind {
        ParameterKind::Arclength
    }

    fn rhs(&self, _lambda: f64, xx: &[f64], pp: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.sys.rhs(xx, pp)
    }

    fn monitors(&self, lambda: f64, xx: &[f64], pp: &[f64]) -> Result<Vec<(&'static str, f64)>> {
        let sys = &self.sys;
        let n = sys.base_dim();
        let (x, t) = sys.base_point(xx)?;
        let mech = MechanicalSystem::new(sys.base.clone(), sys.potential.clone(), sys.mass, 0.0)?;
        let k = sys.hamiltonian(xx, pp)?;
        // Legendre form Σ p_μ Ẋ^μ − m G_μν Ẋ^μ Ẋ^ν evaluated from the velocities.
        let (vel, _) = sys.rhs(xx, pp)?;
        let pv: f64 = pp.iter().zip(&vel).map(|(a, b)| a * b).sum();
        let g_ext = match invert_metric(&sys.cometric(xx)?) {
            Ok(g) => quadratic_form(&g, &vel),
            Err(_) => pv,
        };
        let mut out = vec![("K", k), ("legendre", pv - g_ext)];
        match sys.kind {
            LiftKind::StaticZ => {
                out.push(("p_z", pp[n]));
                out.push(("energy", mech.hamiltonian(x, &pp[..n], lambda)?));
            }
            LiftKind::TimeDependentSigma => {
                let phys: Vec<f64> = pp[..n].iter().map(|v| -v).collect();
                out.push(("p_t", pp[n]));
                out.push(("p_sigma", pp[n + 1]));
                out.push(("energy", mech.hamiltonian(x, &phys, t)?));
                let st = FlowState::new(lambda, xx.to_vec(), pp.to_vec())?;
                out.push(("mass_shell", lifted_energy_relation(sys, &st)?));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{geodesic_acceleration, integrate, IntegrateOptions};

    fn harmonic() -> ScalarField {
        ScalarField::new(|x| 0.5 * x[0] * x[0]).with_gradient(|x, _| vec![x[0]])
    }

    #[test]
    fn constant_potential_gives_unit_gzz() {
        let l = lift_static(
            &MetricField::euclidean(2),
            &ScalarField::constant(0.5),
            1.0,
            PzNormalization::Unit,
        )
        .unwrap();
        let g = l.extended_metric().eval(&[0.3, 0.1, 7.0], 0.0).unwrap();
        assert_eq!(g, Matrix::identity(3, 3));
        let (_, dp) = l.rhs(&[0.3, 0.1, 7.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(dp, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn metric_is_cyclic_in_dummy_coordinate() {
        let l = lift_static(&MetricField::euclidean(1), &harmonic(), 1.0, PzNormalization::Unit).unwrap();
        let g = l.extended_metric();
        assert_eq!(g.eval(&[0.7, 0.0], 0.0).unwrap(), g.eval(&[0.7, 123.0], 0.0).unwrap());
        assert!(matches!(g.eval(&[0.0, 0.0], 0.0), Err(Error::DomainViolation(_))));
        let s = lift_time_dependent(&MetricField::euclidean(1), &harmonic(), 1.0, 1.0).unwrap();
        let gs = s.extended_metric();
        assert_eq!(
            gs.eval(&[0.7, 0.3, 0.0], 0.0).unwrap(),
            gs.eval(&[0.7, 0.3, -9.0], 0.0).unwrap()
        );
    }

    #[test]
    fn lifted_hamiltonian_matches_mechanical_on_its_slice() {
        for norm in [PzNormalization::Unit, PzNormalization::Sqrt2] {
            let l = lift_static(&MetricField::euclidean(1), &harmonic(), 1.0, norm).unwrap();
            let k = l.hamiltonian(&[0.8, 0.0], &[0.3, norm.p_z()]).unwrap();
            assert!((k - (0.5 * 0.09 + 0.5 * 0.64)).abs() < 1e-15);
        }
    }

    #[test]
    fn cometric_inverts_extended_metric() {
        let s = lift_time_dependent(
            &MetricField::euclidean(2),
            &ScalarField::new(|x| 1.0 + x[0] * x[0]),
            2.0,
            3.0,
        )
        .unwrap();
        let xx = [0.4, -0.2, 1.0, 5.0];
        let g = s.extended_metric().eval(&xx, 0.0).unwrap();
        let prod = g * s.cometric(&xx).unwrap() * s.mass();
        assert!((prod - Matrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn hamiltonian_flow_is_the_extended_geodesic_flow() {
        let l = lift_static(
            &MetricField::polar_plane(),
            &ScalarField::new(|x| 1.0 + 0.5 * x[0] * x[0]),
            1.0,
            PzNormalization::Unit,
        )
        .unwrap();
        let xx = [1.3, 0.4, 0.0];
        let pp = [0.2, 0.5, 1.0];
        let (v, a_ham) = l.rhs(&xx, &pp).unwrap();
        // d²X/dλ² from the Hamiltonian flow, by differentiating Ẋ = G⁻¹P along it
        let h = 1e-6;
        let fwd: Vec<f64> = xx.iter().zip(&v).map(|(x, v)| x + h * v).collect();
        let pfwd: Vec<f64> = pp.iter().zip(&a_ham).map(|(p, a)| p + h * a).collect();
        let bwd: Vec<f64> = xx.iter().zip(&v).map(|(x, v)| x - h * v).collect();
        let pbwd: Vec<f64> = pp.iter().zip(&a_ham).map(|(p, a)| p - h * a).collect();
        let (vf, _) = l.rhs(&fwd, &pfwd).unwrap();
        let (vb, _) = l.rhs(&bwd, &pbwd).unwrap();
        let acc: Vec<f64> = vf.iter().zip(&vb).map(|(f, b)| (f - b) / (2.0 * h)).collect();
        let geo = geodesic_acceleration(&l.extended_metric(), &xx, &v, 0.0).unwrap();
        for (a, g) in acc.iter().zip(&geo) {
            assert!((a - g).abs() < 1e-6, "{acc:?} vs {geo:?}");
        }
    }

    #[test]
    fn mass_shell_holds_at_construction() {
        let s = lift_time_dependent(&MetricField::euclidean(1), &harmonic(), 1.0, 1.0).unwrap();
        let st = s.initial_state(&[1.0], &[0.5], 0.0).unwrap();
        assert!(lifted_energy_relation(&s, &st).unwrap().abs() < 1e-12);
        // p_t = H + mc²/2
        assert!((st.p[1] - (0.125 + 0.5 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn free_particle_projection_is_straight() {
        let s = lift_time_dependent(&MetricField::euclidean(2), &ScalarField::constant(0.0), 1.0, 1.0).unwrap();
        let st = s.initial_state(&[0.0, 0.0], &[1.0, 2.0], 0.0).unwrap();
        let tr = integrate(&s.flow(), &st, 3.0, &IntegrateOptions::default()).unwrap();
        let proj = s.project(&tr).unwrap();
        for p in proj.states() {
            assert!((p.x[1] - 2.0 * p.x[0]).abs() < 1e-12);
            assert!((p.x[0] - p.param).abs() < 1e-12);
        }
    }
}
