use super::{turning_point_tolerance, FlowState, ParameterKind, Trajectory};
use crate::jacobi::MechanicalSystem;
use crate::{Error, Result};

/// Samples per path used by [`compare_paths`].
pub const RESAMPLE_POINTS: usize = 1000;

/// Largest pointwise distance between two configuration paths after
/// resampling each by normalized Euclidean arc length in chart coordinates.
pub fn compare_paths(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    compare_paths_with(a, b, |x| x.to_vec())
}

/// [`compare_paths`] after mapping chart coordinates through `embed`
/// (e.g. polar to Cartesian).
pub fn compare_paths_with<F>(a: &Trajectory, b: &Trajectory, embed: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let pa: Vec<Vec<f64>> = a.states().iter().map(|s| embed(&s.x)).collect();
    let pb: Vec<Vec<f64>> = b.states().iter().map(|s| embed(&s.x)).collect();
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if pa[0].len() != pb[0].len() {
        return Err(Error::DimensionMismatch {
            expected: pa[0].len(),
            got: pb[0].len(),
        });
    }
    let ra = resample(&pa, RESAMPLE_POINTS);
    let rb = resample(&pb, RESAMPLE_POINTS);
    Ok(ra.iter().zip(&rb).map(|(u, v)| distance(u, v)).fold(0.0, f64::max))
}

fn distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn resample(path: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
    let mut cumulative = Vec::with_capacity(path.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in path.windows(2) {
        total += distance(&w[0], &w[1]);
        cumulative.push(total);
    }
    if total == 0.0 {
        return vec![path[0].clone(); count];
    }
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let target = total * k as f64 / (count - 1) as f64;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let (l0, l1) = (cumulative[seg], cumulative[(seg + 1).min(path.len() - 1)]);
        let w = if l1 > l0 {
            ((target - l0) / (l1 - l0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (u, v) = (&path[seg], &path[(seg + 1).min(path.len() - 1)]);
        out.push(u.iter().zip(v).map(|(a, b)| a + w * (b - a)).collect());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TToS,
    SToT,
}

/// Relabels a static-system trajectory between time `t` and the Jacobi
/// parameter `s` using `ds/dt = 2m(E − U)`, integrated by the trapezoid
/// rule over the stored states. The path and momenta are unchanged and the
/// first parameter value is kept as the origin of the new one.
///
/// The inverse direction solves the same trapezoid relation for `Δt`, so a
/// round trip reproduces the original parameters up to rounding.
pub fn reparametrize(traj: &Trajectory, direction: Direction, sys: &MechanicalSystem) -> Result<Trajectory> {
    let (from, to) = match direction {
        Direction::TToS => (ParameterKind::TimeT, ParameterKind::JacobiS),
        Direction::SToT => (ParameterKind::JacobiS, ParameterKind::TimeT),
    };
    if traj.parameter_kind() != from {
        return Err(Error::invalid(format!(
            "expected a {from:?} trajectory, got {:?}",
            traj.parameter_kind()
        )));
    }
    let first = traj.first().ok_or(Error::EmptyTrajectory)?;
    let tolerance = turning_point_tolerance(sys.energy());
    let rate = |s: &FlowState| -> Result<f64> {
        let margin = sys.kinetic_margin(&s.x, 0.0);
        if margin > tolerance {
            Ok(2.0 * sys.mass() * margin)
        } else {
            Err(Error::TurningPoint { margin, tolerance })
        }
    };
    let mut out = Vec::with_capacity(traj.len());
    let mut param = first.param;
    let mut prev_rate = rate(first)?;
    let mut prev_param = first.param;
    for (k, s) in traj.states().iter().enumerate() {
        let f = rate(s)?;
        if k > 0 {
            let mean = 0.5 * (prev_rate + f);
            let delta = s.param - prev_param;
            param += match direction {
                Direction::TToS => delta * mean,
                Direction::SToT => delta / mean,
            };
        }
        prev_rate = f;
        prev_param = s.param;
        let mut relabeled = s.clone();
        relabeled.param = param;
        out.push(relabeled);
    }
    Trajectory::new(out, to, traj.termination())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::flow::Termination;
    use crate::metric::MetricField;

    fn line(n: usize, offset: f64) -> Trajectory {
        let states = (0..n)
            .map(|k| FlowState::new(k as f64, vec![k as f64, offset], vec![1.0, 0.0]).unwrap())
            .collect();
        Trajectory::new(states, ParameterKind::TimeT, Termination::Completed).unwrap()
    }

    #[test]
    fn identical_paths_have_zero_deviation() {
        assert_eq!(compare_paths(&line(5, 0.0), &line(5, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn pacing_does_not_matter() {
        // same segment, differently spaced samples
        let dense = line(11, 0.0);
        let sparse = Trajectory::new(
            vec![
                FlowState::new(0.0, vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(),
                FlowState::new(1.0, vec![9.0, 0.0], vec![1.0, 0.0]).unwrap(),
                FlowState::new(2.0, vec![10.0, 0.0], vec![1.0, 0.0]).unwrap(),
            ],
            ParameterKind::JacobiS,
            Termination::Completed,
        )
        .unwrap();
        assert!(compare_paths(&dense, &sparse).unwrap() < 1e-12);
        assert!((compare_paths(&dense, &line(11, 0.5)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_path_is_an_error() {
        let empty = Trajectory::new(vec![], ParameterKind::TimeT, Termination::Completed).unwrap();
        assert_eq!(compare_paths(&empty, &line(3, 0.0)), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn free_particle_s_is_scaled_t() {
        let sys = MechanicalSystem::new(MetricField::euclidean(2), ScalarField::constant(0.0), 1.5, 0.4).unwrap();
        let s = reparametrize(&line(4, 0.0), Direction::TToS, &sys).unwrap();
        assert_eq!(s.parameter_kind(), ParameterKind::JacobiS);
        for (a, b) in s.params().iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((a - 2.0 * 1.5 * 0.4 * b).abs() < 1e-15);
        }
        let back = reparametrize(&s, Direction::SToT, &sys).unwrap();
        assert_eq!(back.params(), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(reparametrize(&s, Direction::TToS, &sys).is_err());
    }
}
