//! Hamilton and Jacobi flows, their integrators, and tools to compare the
//! resulting trajectories.

mod compare;
mod integrate;
mod rhs;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::metric::CoordinatePoint;
use crate::{Error, Result};

pub use compare::{compare_paths, compare_paths_with, reparametrize, Direction, RESAMPLE_POINTS};
pub use integrate::{integrate, integrate_verlet, IntegrateOptions};
pub use rhs::{
    clairaut_constant, geodesic_acceleration, hamilton_rhs, hamilton_rhs_at, jacobi_rhs, turning_point_tolerance,
    HamiltonFlow, JacobiFlow, PlanarChart,
};

/// A phase-space point `(x, p)` at parameter value `param`, with whatever
/// invariants the producing flow chose to monitor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowState {
    pub param: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub monitors: BTreeMap<String, f64>,
}

impl FlowState {
    pub fn new(param: f64, x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: p.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::invalid("empty phase-space point"));
        }
        if !param.is_finite() || x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::invalid("phase-space point must be finite"));
        }
        Ok(Self {
            param,
            x,
            p,
            monitors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn point(&self) -> CoordinatePoint {
        CoordinatePoint::new(self.x.clone()).expect("FlowState coordinates are finite")
    }

    pub fn monitor(&self, name: &str) -> Option<f64> {
        self.monitors.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterKind {
    TimeT,
    JacobiS,
    Arclength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    TurningPoint,
    DomainViolation,
    StepFailure,
}

/// Accepted states of one integration, in strictly increasing parameter order.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    states: Vec<FlowState>,
    parameter_kind: ParameterKind,
    termination: Termination,
}

impl Trajectory {
    pub fn new(states: Vec<FlowState>, parameter_kind: ParameterKind, termination: Termination) -> Result<Self> {
        if let Some(w) = states.windows(2).find(|w| !(w[1].param > w[0].param)) {
            return Err(Error::invalid(format!(
                "trajectory parameter not strictly increasing: {} then {}",
                w[0].param, w[1].param
            )));
        }
        Ok(Self {
            states,
            parameter_kind,
            termination,
        })
    }

    pub fn states(&self) -> &[FlowState] {
        &self.states
    }

    pub fn into_states(self) -> Vec<FlowState> {
        self.states
    }

    pub fn parameter_kind(&self) -> ParameterKind {
        self.parameter_kind
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&FlowState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&FlowState> {
        self.states.last()
    }

    pub fn params(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.param).collect()
    }

    /// Largest `|m(k) − m(0)| / max(|m(0)|, floor)` over the recorded states.
    pub fn monitor_drift(&self, name: &str, floor: f64) -> Option<f64> {
        let first = self.states.first()?.monitor(name)?;
        let scale = first.abs().max(floor);
        self.states
            .iter()
            .map(|s| s.monitor(name).map(|v| (v - first).abs() / scale))
            .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Largest `|m(k) − target|` over the recorded states.
    pub fn monitor_deviation(&self, name: &str, target: f64) -> Option<f64> {
        self.states
            .iter()
            .map(|s| s.monitor(name).map(|v| (v - target).abs()))
            .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Linear interpolation of `(x, p)` at `param`, which must lie inside the
    /// recorded range. Monitors are not interpolated.
    pub fn sample_at(&self, param: f64) -> Result<FlowState> {
        let first = self.states.first().ok_or(Error::EmptyTrajectory)?;
        let last = self.states.last().ok_or(Error::EmptyTrajectory)?;
        if !(param >= first.param && param <= last.param) {
            return Err(Error::invalid(format!(
                "parameter {param} outside recorded range [{}, {}]",
                first.param, last.param
            )));
        }
        let idx = self.states.partition_point(|s| s.param <= param);
        if idx == 0 || idx == self.states.len() {
            let s = if idx == 0 { first } else { last };
            return FlowState::new(param, s.x.clone(), s.p.clone());
        }
        let (a, b) = (&self.states[idx - 1], &self.states[idx]);
        let w = (param - a.param) / (b.param - a.param);
        let lerp = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(u, v)| u + w * (v - u)).collect::<Vec<_>>();
        FlowState::new(param, lerp(&a.x, &b.x), lerp(&a.p, &b.p))
    }
}

/// A first-order system in `(x, p)` that the integrators can drive.
pub trait PhaseFlow: Send + Sync {
    fn dim(&self) -> usize;

    fn parameter_kind(&self) -> ParameterKind;

    fn rhs(&self, param: f64, x: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    /// Named invariants to record at accepted states.
    fn monitors(&self, _param: f64, _x: &[f64], _p: &[f64]) -> Result<Vec<(&'static str, f64)>> {
        Ok(Vec::new())
    }

    /// Explains a step-size underflow at `(x, p)`, if the flow can tell it
    /// apart from plain stiffness.
    fn stall_reason(&self, _param: f64, _x: &[f64], _p: &[f64]) -> Option<Termination> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(t: f64, x: f64) -> FlowState {
        FlowState::new(t, vec![x], vec![2.0 * x]).unwrap()
    }

    #[test]
    fn flow_state_rejects_mismatch_and_nan() {
        assert!(matches!(
            FlowState::new(0.0, vec![1.0], vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(FlowState::new(0.0, vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn trajectory_requires_increasing_param() {
        let bad = vec![state(0.0, 0.0), state(0.0, 1.0)];
        assert!(Trajectory::new(bad, ParameterKind::TimeT, Termination::Completed).is_err());
    }

    #[test]
    fn sample_at_interpolates() {
        let tr = Trajectory::new(
            vec![state(0.0, 0.0), state(1.0, 1.0), state(3.0, 5.0)],
            ParameterKind::TimeT,
            Termination::Completed,
        )
        .unwrap();
        let s = tr.sample_at(2.0).unwrap();
        assert_eq!(s.x, vec![3.0]);
        assert_eq!(s.p, vec![6.0]);
        assert_eq!(tr.sample_at(3.0).unwrap().x, vec![5.0]);
        assert!(tr.sample_at(3.5).is_err());
    }

    #[test]
    fn drift_is_relative_to_first_value() {
        let mut a = state(0.0, 0.0);
        a.monitors.insert("energy".into(), 2.0);
        let mut b = state(1.0, 0.0);
        b.monitors.insert("energy".into(), 2.5);
        let tr = Trajectory::new(vec![a, b], ParameterKind::TimeT, Termination::Completed).unwrap();
        assert_eq!(tr.monitor_drift("energy", 1e-300), Some(0.25));
        assert_eq!(tr.monitor_deviation("energy", 2.0), Some(0.5));
        assert_eq!(tr.monitor_drift("missing", 1.0), None);
    }
}
