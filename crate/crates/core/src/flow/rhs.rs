use super::{FlowState, ParameterKind, PhaseFlow, Termination};
use crate::jacobi::{quadratic_form, MechanicalSystem};
use crate::metric::{christoffel, MetricField};
use crate::{Error, Result};

/// Relative `E − U` below which a stalled Jacobi integration is reported
/// as having reached a turning point.
const STALL_MARGIN: f64 = 1e-6;

/// Margin below which `E − U` counts as a turning point.
pub fn turning_point_tolerance(energy: f64) -> f64 {
    1e-10 * energy.abs().max(1.0)
}

fn finite_or_domain(x: &[f64], dx: Vec<f64>, dp: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    if dx.iter().chain(&dp).all(|v| v.is_finite()) {
        Ok((dx, dp))
    } else {
        Err(Error::domain(format!("vector field is not finite at {x:?}")))
    }
}

/// Hamilton's equations for `H = g^{ij}p_ip_j/2m + U` at `t = 0`.
pub fn hamilton_rhs(sys: &MechanicalSystem, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    hamilton_rhs_at(sys, 0.0, x, p)
}

/// Hamilton's equations at time `t`:
/// `dx/dt = g^{ij}p_j/m`, `dp_i/dt = −[(1/2m) ∂_i g^{jk} p_j p_k + ∂_i U]`.
pub fn hamilton_rhs_at(sys: &MechanicalSystem, t: f64, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: p.len(),
        });
    }
    let m = sys.mass();
    let (inv, dinv) = sys.metric.inverse_with_partials(x, t)?;
    if !sys.potential.value(x, t).is_finite() {
        return Err(Error::domain(format!("potential is not finite at {x:?}")));
    }
    let grad = sys.potential.gradient(x, t);
    let n = x.len();
    let dx = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)] * p[j]).sum::<f64>() / m)
        .collect();
    let dp = (0..n)
        .map(|i| -(quadratic_form(&dinv[i], p) / (2.0 * m) + grad[i]))
        .collect();
    finite_or_domain(x, dx, dp)
}

/// Hamilton's equations reparametrized by `ds/dt = 2m(E − U)`.
///
/// This is the flow of the Jacobi Hamiltonian `g̃^{ij}p_ip_j` on its unit
/// level set; at `m = 1` it reads `dx/ds = g^{ij}p_j / 2(E − U)`.
pub fn jacobi_rhs(sys: &MechanicalSystem, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let margin = sys.kinetic_margin(x, 0.0);
    let tolerance = turning_point_tolerance(sys.energy());
    if !(margin > tolerance) {
        return Err(Error::TurningPoint { margin, tolerance });
    }
    let (dx, dp) = hamilton_rhs_at(sys, 0.0, x, p)?;
    let scale = 1.0 / (2.0 * sys.mass() * margin);
    Ok((
        dx.into_iter().map(|v| v * scale).collect(),
        dp.into_iter().map(|v| v * scale).collect(),
    ))
}

/// Where the planar angle lives, for the Clairaut constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarChart {
    /// `(x, y)`
    Cartesian,
    /// `(r, φ)`
    Polar,
    /// `(r, θ, φ)` restricted to `θ = π/2`
    Spherical,
}

/// Clairaut's constant `R = m r² dφ/dτ` evaluated from the phase point.
///
/// For Jacobi-parametrized states the angular velocity is converted with
/// `dτ = ds / 2m(E − U)`.
pub fn clairaut_constant(
    state: &FlowState,
    sys: &MechanicalSystem,
    chart: PlanarChart,
    kind: ParameterKind,
) -> Result<f64> {
    let (x, p) = (&state.x, &state.p);
    let m = sys.mass();
    let (dx, to_time) = match kind {
        ParameterKind::TimeT => (hamilton_rhs_at(sys, state.param, x, p)?.0, 1.0),
        ParameterKind::JacobiS => (jacobi_rhs(sys, x, p)?.0, 2.0 * m * sys.kinetic_margin(x, 0.0)),
        ParameterKind::Arclength => return Err(Error::invalid("Clairaut constant needs a time or Jacobi parameter")),
    };
    let r_sq_dphi = match chart {
        PlanarChart::Cartesian => x[0] * dx[1] - x[1] * dx[0],
        PlanarChart::Polar => x[0] * x[0] * dx[1],
        PlanarChart::Spherical => x[0] * x[0] * dx[2],
    };
    Ok(m * r_sq_dphi * to_time)
}

/// `d²x^i/dλ² = −Γ^i_jk v^j v^k`.
pub fn geodesic_acceleration(field: &MetricField, x: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
    let gamma = christoffel(field, x, t)?;
    Ok(gamma.contract(v).into_iter().map(|a| -a).collect())
}

/// Time flow of a natural Hamiltonian system.
#[derive(Debug, Clone)]
pub struct HamiltonFlow {
    pub sys: MechanicalSystem,
    pub chart: Option<PlanarChart>,
}

impl HamiltonFlow {
    pub fn new(sys: MechanicalSystem) -> Self {
        Self { sys, chart: None }
    }

    pub fn with_chart(mut self, chart: PlanarChart) -> Self {
        self.chart = Some(chart);
        self
    }
}

impl PhaseFlow for HamiltonFlow {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn parameter_kind(&self) -> ParameterKind {
        ParameterKind::TimeT
    }

    fn rhs(&self, t: f64, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        hamilton_rhs_at(&self.sys, t, x, p)
    }

    fn monitors(&self, t: f64, x: &[f64], p: &[f64]) -> Result<Vec<(&'static str, f64)>> {
        let mut out = vec![("energy", self.sys.hamiltonian(x, p, t)?)];
        if let Some(chart) = self.chart {
            let st = FlowState::new(t, x.to_vec(), p.to_vec())?;
            out.push((
                "clairaut",
                clairaut_constant(&st, &self.sys, chart, ParameterKind::TimeT)?,
            ));
        }
        Ok(out)
    }
}

/// Geodesic flow of the Jacobi metric of a static system, in the Jacobi
/// parameter `s`.
#[derive(Debug, Clone)]
pub struct JacobiFlow {
    pub sys: MechanicalSystem,
    pub chart: Option<PlanarChart>,
}

impl JacobiFlow {
    pub fn new(sys: MechanicalSystem) -> Self {
        Self { sys, chart: None }
    }

    pub fn with_chart(mut self, chart: PlanarChart) -> Self {
        self.chart = Some(chart);
        self
    }

    /// `H̃ = g^{ij}p_ip_j / 2m(E − U)`.
    pub fn unit_hamiltonian(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        let inv = self.sys.metric.inverse(x, 0.0)?;
        Ok(quadratic_form(&inv, p) / (2.0 * self.sys.mass() * self.sys.kinetic_margin(x, 0.0)))
    }
}

impl PhaseFlow for JacobiFlow {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn parameter_kind(&self) -> ParameterKind {
        ParameterKind::JacobiS
    }

    fn rhs(&self, _s: f64, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        jacobi_rhs(&self.sys, x, p)
    }

    /// The Jacobi vector field grows like `(E − U)^{-1/2}` near a turning
    /// point, so the error control usually stalls shortly before the margin
    /// check itself fires.
    fn stall_reason(&self, _s: f64, x: &[f64], _p: &[f64]) -> Option<Termination> {
        let near = self.sys.kinetic_margin(x, 0.0) < STALL_MARGIN * self.sys.energy().abs().max(1.0);
        near.then_some(Termination::TurningPoint)
    }

    fn monitors(&self, s: f64, x: &[f64], p: &[f64]) -> Result<Vec<(&'static str, f64)>> {
        let mut out = vec![
            ("H_tilde", self.unit_hamiltonian(x, p)?),
            ("energy", self.sys.hamiltonian(x, p, 0.0)?),
        ];
        if let Some(chart) = self.chart {
            let st = FlowState::new(s, x.to_vec(), p.to_vec())?;
            out.push((
                "clairaut",
                clairaut_constant(&st, &self.sys, chart, ParameterKind::JacobiS)?,
            ));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;

    fn kepler_polar(e: f64) -> MechanicalSystem {
        let u = ScalarField::new(|x| -1.0 / x[0]).with_gradient(|x, _| vec![1.0 / (x[0] * x[0]), 0.0]);
        MechanicalSystem::new(MetricField::polar_plane(), u, 1.0, e).unwrap()
    }

    #[test]
    fn free_particle_rhs() {
        let sys = MechanicalSystem::new(MetricField::euclidean(2), ScalarField::constant(0.0), 1.0, 0.5).unwrap();
        assert_eq!(
            hamilton_rhs(&sys, &[0.0, 0.0], &[1.0, 0.0]).unwrap(),
            (vec![1.0, 0.0], vec![0.0, 0.0])
        );
        let (dx, dp) = jacobi_rhs(&sys, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(dx, vec![1.0, 0.0]);
        assert_eq!(dp, vec![0.0, 0.0]);
    }

    #[test]
    fn circular_kepler_has_no_radial_force() {
        let sys = kepler_polar(-0.5);
        let (dx, dp) = hamilton_rhs(&sys, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(dx, vec![0.0, 1.0]);
        assert!(dp[0].abs() < 1e-15 && dp[1] == 0.0);
    }

    #[test]
    fn kepler_radial_equation() {
        let sys = kepler_polar(0.0);
        let (r, pr, pphi) = (2.0, 0.3, 0.7);
        let (dx, dp) = hamilton_rhs(&sys, &[r, 0.4], &[pr, pphi]).unwrap();
        assert!((dx[0] - pr).abs() < 1e-15);
        let expect = pphi * pphi / r.powi(3) - 1.0 / (r * r);
        assert!((dp[0] - expect).abs() < 1e-15);
        let (jx, jp) = jacobi_rhs(&sys, &[r, 0.4], &[pr, pphi]).unwrap();
        // m = 1, E = 0: ds/dt = 2k/r
        let f = 2.0 / r;
        assert!((jx[0] - pr / f).abs() < 1e-15);
        assert!((jp[0] - expect / f).abs() < 1e-15);
    }

    #[test]
    fn jacobi_rhs_stops_at_turning_point() {
        let sys = kepler_polar(-0.5);
        assert!(matches!(
            jacobi_rhs(&sys, &[2.0, 0.0], &[0.0, 0.0]),
            Err(Error::TurningPoint { .. })
        ));
    }

    #[test]
    fn clairaut_agrees_between_parametrizations() {
        let sys = kepler_polar(-0.5);
        let st = FlowState::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let rt = clairaut_constant(&st, &sys, PlanarChart::Polar, ParameterKind::TimeT).unwrap();
        let rs = clairaut_constant(&st, &sys, PlanarChart::Polar, ParameterKind::JacobiS).unwrap();
        assert_eq!(rt, 1.0);
        assert!((rt - rs).abs() < 1e-15);
    }

    #[test]
    fn polar_geodesic_acceleration() {
        // straight line through (1, 0) with unit angular speed: r̈ = r φ̇²
        let a = geodesic_acceleration(&MetricField::polar_plane(), &[1.0, 0.0], &[0.0, 1.0], 0.0).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-15);
        assert_eq!(a[1], 0.0);
    }

    #[test]
    fn singular_potential_is_a_domain_violation() {
        let u = ScalarField::new(|x: &[f64]| -1.0 / x[0].hypot(x[1]));
        let sys = MechanicalSystem::new(MetricField::euclidean(2), u, 1.0, 0.0).unwrap();
        assert!(matches!(
            hamilton_rhs(&sys, &[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DomainViolation(_))
        ));
    }
}
