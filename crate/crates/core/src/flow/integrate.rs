use super::{FlowState, HamiltonFlow, PhaseFlow, Termination, Trajectory};
use crate::{Error, Result};

/// Step-size control for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    /// Record only at `param0 + k·interval` (steps are shortened to land there).
    pub sample_interval: Option<f64>,
    /// Record every n-th accepted step when no sample interval is set.
    pub record_every: usize,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: None,
            initial_step: None,
            sample_interval: None,
            record_every: 1,
            max_steps: 5_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = Some(dt);
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn validate(&self, span: f64) -> Result<()> {
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::invalid(format!("integration span must be positive, got {span}")));
        }
        if !(self.rtol > 0.0) || !(self.atol >= 0.0) {
            return Err(Error::invalid("tolerances must satisfy rtol > 0, atol >= 0"));
        }
        if matches!(self.max_step, Some(h) if !(h > 0.0)) || matches!(self.initial_step, Some(h) if !(h > 0.0)) {
            return Err(Error::invalid("step bounds must be positive"));
        }
        if matches!(self.sample_interval, Some(h) if !(h > 0.0)) {
            return Err(Error::invalid("sample interval must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Packed<'a, F: ?Sized> {
    flow: &'a F,
    n: usize,
}

impl<F: PhaseFlow + ?Sized> Packed<'_, F> {
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let (dx, dp) = self.flow.rhs(t, &y[..self.n], &y[self.n..])?;
        Ok(dx.into_iter().chain(dp).collect())
    }

    fn state(&self, t: f64, y: &[f64]) -> Result<FlowState> {
        let mut s = FlowState::new(t, y[..self.n].to_vec(), y[self.n..].to_vec())?;
        for (name, v) in self.flow.monitors(t, &y[..self.n], &y[self.n..])? {
            s.monitors.insert(name.to_string(), v);
        }
        Ok(s)
    }
}

/// `(y_new, k7, scaled error)` for one Dormand-Prince step.
fn dp_step<F: PhaseFlow + ?Sized>(
    sys: &Packed<'_, F>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    opts: &IntegrateOptions,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let m = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(k1.to_vec());
    let mut y_new = Vec::new();
    for stage in 1..7 {
        let ys: Vec<f64> = (0..m)
            .map(|i| y[i] + h * A[stage].iter().enumerate().map(|(j, a)| a * k[j][i]).sum::<f64>())
            .collect();
        k.push(sys.eval(t + C[stage] * h, &ys)?);
        if stage == 6 {
            y_new = ys;
        }
    }
    let mut acc = 0.0;
    for i in 0..m {
        let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        acc += (e / sc).powi(2);
    }
    let err = (acc / m as f64).sqrt();
    let k7 = k.pop().expect("seven stages");
    Ok((y_new, k7, err))
}

/// Maps a recoverable vector-field failure to its termination flag.
fn termination_for(e: &Error) -> Option<Termination> {
    match e {
        Error::TurningPoint { .. } => Some(Termination::TurningPoint),
        Error::DomainViolation(_) | Error::SingularMatrix(_) => Some(Termination::DomainViolation),
        _ => None,
    }
}

/// Adaptive Dormand-Prince 5(4) integration of `flow` over `[param0, param0 + span]`.
///
/// Steps whose stages leave the domain or hit a turning point are retried at
/// a quarter of the size; once the step would drop below `1e-14·span` the
/// run stops and the partial trajectory is returned with the matching
/// [`Termination`]. `Err` is reserved for invalid input.
pub fn integrate<F: PhaseFlow + ?Sized>(
    flow: &F,
    initial: &FlowState,
    span: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    opts.validate(span)?;
    let n = flow.dim();
    if initial.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.dim(),
        });
    }
    let sys = Packed { flow, n };
    let t0 = initial.param;
    let end = t0 + span;
    let h_min = 1e-14 * span;
    let mut t = t0;
    let mut y: Vec<f64> = initial.x.iter().chain(&initial.p).copied().collect();
    let mut k1 = sys.eval(t, &y)?;
    let mut states = vec![sys.state(t, &y)?];

    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            let scale: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
            let rms =
                |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            let (d0, d1) = (rms(&y), rms(&k1));
            if d0 < 1e-5 || d1 < 1e-5 {
                1e-6 * span
            } else {
                0.01 * d0 / d1
            }
        }
    };
    let h_cap = opts.max_step.unwrap_or(span).min(span);
    h = h.min(h_cap);

    let mut grid_index = 1u64;
    let mut steps = 0usize;
    let mut last_failure = Termination::StepFailure;
    let stalled = |reason: Termination, t: f64, y: &[f64]| match reason {
        Termination::StepFailure => flow.stall_reason(t, &y[..n], &y[n..]).unwrap_or(reason),
        other => other,
    };
    let termination = loop {
        if t >= end {
            break Termination::Completed;
        }
        if steps >= opts.max_steps {
            break Termination::StepFailure;
        }
        let mut target = end;
        if let Some(d) = opts.sample_interval {
            target = (t0 + grid_index as f64 * d).min(end);
        }
        let lands = h >= target - t;
        let h_try = if lands { target - t } else { h };
        match dp_step(&sys, t, &y, &k1, h_try, opts) {
            Err(e) => {
                last_failure = termination_for(&e).ok_or(e)?;
                h = h_try * 0.25;
                if h < h_min {
                    break stalled(last_failure, t, &y);
                }
            }
            Ok((y_new, k7, err)) if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) => {
                let t_new = if lands { target } else { t + h_try };
                if !(t_new > t) {
                    break Termination::StepFailure;
                }
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                let proposal = (h_try * grow).min(h_cap);
                h = if lands && h_try < h { h.max(proposal) } else { proposal };
                steps += 1;
                let record = match opts.sample_interval {
                    Some(_) => lands,
                    None => steps.is_multiple_of(opts.record_every),
                } || t_new >= end;
                if record {
                    match sys.state(t_new, &y_new) {
                        Ok(s) => states.push(s),
                        Err(e) => break termination_for(&e).ok_or(e)?,
                    }
                }
                if lands && opts.sample_interval.is_some() && t_new < end {
                    grid_index += 1;
                }
                t = t_new;
                y = y_new;
                k1 = k7;
                last_failure = Termination::StepFailure;
            }
            Ok((_, _, err)) => {
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.25
                };
                h = h_try * shrink;
                if h < h_min {
                    break stalled(last_failure, t, &y);
                }
            }
        }
    };
    Trajectory::new(states, flow.parameter_kind(), termination)
}

/// Fixed-step kick-drift-kick Störmer-Verlet for a natural Hamiltonian with
/// a constant metric. The step is adjusted so that it divides `span`.
pub fn integrate_verlet(
    flow: &HamiltonFlow,
    initial: &FlowState,
    span: f64,
    step: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let sys = &flow.sys;
    if !sys.metric.is_constant() {
        return Err(Error::invalid(
            "Störmer-Verlet path needs a constant (separable) metric",
        ));
    }
    if !(span > 0.0 && step > 0.0) || record_every == 0 {
        return Err(Error::invalid(
            "Störmer-Verlet needs span > 0, step > 0, record_every >= 1",
        ));
    }
    let n = sys.dim();
    if initial.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.dim(),
        });
    }
    let steps = (span / step).ceil() as usize;
    let h = span / steps as f64;
    let inv = sys.metric.inverse(&initial.x, initial.param)?;
    let m = sys.mass();
    let packed = Packed { flow, n };
    let mut x = initial.x.clone();
    let mut p = initial.p.clone();
    let t0 = initial.param;
    let mut states = vec![packed.state(t0, &[x.clone(), p.clone()].concat())?];

    let kick = |x: &[f64], p: &mut [f64], t: f64, dt: f64| -> Result<()> {
        let u = sys.potential.value(x, t);
        let g = sys.potential.gradient(x, t);
        if !u.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("potential is not finite at {x:?}")));
        }
        for (pi, gi) in p.iter_mut().zip(g) {
            *pi -= dt * gi;
        }
        Ok(())
    };

    let mut termination = Termination::Completed;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let t_next = if k + 1 == steps {
            t0 + span
        } else {
            t0 + (k + 1) as f64 * h
        };
        let stepped = (|| -> Result<FlowState> {
            kick(&x, &mut p, t, 0.5 * h)?;
            for i in 0..n {
                x[i] += h * (0..n).map(|j| inv[(i, j)] * p[j]).sum::<f64>() / m;
            }
            sys.metric.check(&x)?;
            kick(&x, &mut p, t_next, 0.5 * h)?;
            packed.state(t_next, &[x.clone(), p.clone()].concat())
        })();
        match stepped {
            Ok(s) => {
                if (k + 1) % record_every == 0 || k + 1 == steps {
                    states.push(s);
                }
            }
            Err(e) => {
                termination = termination_for(&e).ok_or(e)?;
                break;
            }
        }
    }
    Trajectory::new(states, flow.parameter_kind(), termination)
}
