use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::scenario::{FlowKind, LiftChoice, Normalization, Scenario, Task};
use super::{exit_code_for, CliError};
use crate::catalog::{self, CatalogEntry};
use crate::curvature::{
    approach_boundary, classify_orbit, eccentricity, eccentricity_regime, gaussian_curvature_numeric,
    grows_monotonically, kepler_curvature, ConformalProfile,
};
use crate::field::ScalarField;
use crate::flow::{
    compare_paths_with, integrate, reparametrize, Direction, FlowState, HamiltonFlow, IntegrateOptions, JacobiFlow,
    PhaseFlow, PlanarChart, Termination, Trajectory,
};
use crate::jacobi::MechanicalSystem;
use crate::lift::{lift_static, lift_time_dependent, PzNormalization};
use crate::metric::{Matrix, MetricField};

/// Systems defined here rather than in the catalog, with their parameters.
pub const BUILTIN_SYSTEMS: [(&str, &[&str]); 2] = [("harmonic", &["m"]), ("driven_oscillator", &["m", "c"])];

/// Output spacing for lifted runs and their oracles.
const LIFT_SAMPLE: f64 = 0.01;
/// Dense-output step, as a fraction of the span, for path comparisons.
const DENSE_FRACTION: f64 = 1e-4;
/// Smallest reference magnitude for relative drifts.
const DRIFT_FLOOR: f64 = 1e-12;

pub(super) fn system_params(name: &str) -> Result<Vec<&'static str>, CliError> {
    if let Some((_, params)) = catalog::families().into_iter().find(|(n, _)| *n == name) {
        return Ok(params.into_iter().map(|(p, _)| p).collect());
    }
    if let Some((_, params)) = BUILTIN_SYSTEMS.iter().find(|(n, _)| *n == name) {
        return Ok(params.to_vec());
    }
    let mut known: Vec<&str> = catalog::families().into_iter().map(|(n, _)| n).collect();
    known.extend(BUILTIN_SYSTEMS.iter().map(|(n, _)| *n));
    Err(CliError::Validation(format!(
        "unknown system '{name}' (known: {})",
        known.join(", ")
    )))
}

pub(super) struct Report {
    pub stdout: String,
    pub warning: Option<String>,
    pub exit_code: i32,
}

struct Table {
    suffix: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

struct PointResult {
    tables: Vec<Table>,
    summary: Map<String, Value>,
    termination: Termination,
    line: String,
}

/// Runs every sweep point (in parallel) and writes the outputs.
pub(super) fn execute(sc: &Scenario) -> Result<Report, CliError> {
    let points = sc.sweep();
    let results: Vec<Result<PointResult, CliError>> = points.par_iter().map(|(s, t)| run_point(sc, s, t)).collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = sc.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let task = sc.task.name();
    let many = results.len() > 1;
    let mut runs = Vec::new();
    let mut stdout = String::new();
    let mut exit = 0;
    for (idx, (res, (sys, params))) in results.into_iter().zip(&points).enumerate() {
        let mut files = Vec::new();
        for table in &res.tables {
            let mut name = task.to_string();
            if many {
                let _ = write!(name, "_{idx:03}");
            }
            if !table.suffix.is_empty() {
                let _ = write!(name, "_{}", table.suffix);
            }
            name.push_str(".csv");
            write_csv(&dir.join(&name), table)?;
            files.push(name);
        }
        let mut run = Map::new();
        run.insert("index".into(), json!(idx));
        run.insert("system_params".into(), json!(sys));
        run.insert("params".into(), json!(params));
        run.insert("files".into(), json!(files));
        run.insert("termination".into(), json!(res.termination));
        run.extend(res.summary);
        runs.push(Value::Object(run));
        exit = exit.max(exit_code_for(res.termination));
        if many {
            let _ = writeln!(stdout, "[{idx}] {}", res.line);
        } else {
            let _ = writeln!(stdout, "{}", res.line);
        }
    }
    let summary = json!({
        "metadata": {
            "tool": "jacobi-flow",
            "version": env!("CARGO_PKG_VERSION"),
            "task": task,
            "system": sc.system.name,
            "rtol": sc.rtol(),
            "atol": sc.atol(),
            "seed": sc.seed,
        },
        "runs": runs,
    });
    let path = dir.join(format!("{task}_summary.json"));
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let warning = (exit != 0).then(|| format!("jacobi-flow: an integration stopped early; see {}", path.display()));
    Ok(Report {
        stdout,
        warning,
        exit_code: exit,
    })
}

/// 17 significant digits, so reruns are byte-identical.
fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run_point(
    sc: &Scenario,
    sys: &BTreeMap<String, f64>,
    params: &BTreeMap<String, f64>,
) -> Result<PointResult, CliError> {
    let system = System::resolve(&sc.system.name, sys)?;
    match sc.task {
        Task::Transform => transform(&system, params),
        Task::Orbit => orbit(sc, &system, params),
        Task::Compare => compare(sc, &system, params),
        Task::Curvature => curvature(&system, params),
        Task::Lift => lift(sc, &system, params),
    }
}

enum System {
    Catalog(Box<CatalogEntry>),
    Harmonic { m: f64 },
    Driven { m: f64, c: f64 },
}

impl System {
    fn resolve(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let get = |k: &str| params.get(k).copied().unwrap_or(1.0);
        let positive = |k: &str| {
            let v = get(k);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(CliError::Validation(format!(
                    "system parameter '{k}' must be positive, got {v}"
                )))
            }
        };
        match name {
            "harmonic" => Ok(System::Harmonic { m: positive("m")? }),
            "driven_oscillator" => Ok(System::Driven {
                m: positive("m")?,
                c: positive("c")?,
            }),
            _ => Ok(System::Catalog(Box::new(catalog::by_name(name, params)?))),
        }
    }

    fn name(&self) -> &str {
        match self {
            System::Catalog(e) => e.name,
            System::Harmonic { .. } => "harmonic",
            System::Driven { .. } => "driven_oscillator",
        }
    }

    fn entry(&self) -> Result<&CatalogEntry, CliError> {
        match self {
            System::Catalog(e) => Ok(e),
            _ => Err(CliError::Validation(format!(
                "'{}' is only available to the lift task",
                self.name()
            ))),
        }
    }

    fn mass(&self) -> f64 {
        match self {
            System::Catalog(e) => e.mass(),
            System::Harmonic { m } | System::Driven { m, .. } => *m,
        }
    }

    fn mechanical(&self, energy: f64, eps: f64) -> Result<MechanicalSystem, CliError> {
        let g = MetricField::euclidean(1);
        Ok(match self {
            System::Catalog(e) => e.mechanical(energy)?,
            System::Harmonic { m } => {
                let u = ScalarField::new(|x| 0.5 * x[0] * x[0]).with_gradient(|x, _| vec![x[0]]);
                MechanicalSystem::new(g, u, *m, energy)?
            }
            System::Driven { m, .. } => {
                let u = ScalarField::time_dependent(move |x, t| 0.5 * (1.0 + eps * t.sin()) * x[0] * x[0])
                    .with_gradient(move |x, t| vec![(1.0 + eps * t.sin()) * x[0]]);
                MechanicalSystem::new(g, u, *m, energy)?
            }
        })
    }

    /// `k` of an attractive `−k/r` potential, for period estimates and closed forms.
    fn kepler_k(&self) -> Option<f64> {
        let System::Catalog(e) = self else { return None };
        match e.name {
            "kepler" | "bertrand_kepler" => Some(e.params["k"]),
            "schwarzschild" => Some(e.params["M"] * e.params["m"]),
            _ => None,
        }
    }
}

fn chart_for(dim: usize) -> Option<PlanarChart> {
    match dim {
        2 => Some(PlanarChart::Polar),
        3 => Some(PlanarChart::Spherical),
        _ => None,
    }
}

/// The radial point on the reference ray (`φ = 0`, equatorial when 3D).
fn radial_point(dim: usize, r: f64) -> Vec<f64> {
    match dim {
        1 => vec![r],
        2 => vec![r, 0.0],
        _ => {
            let mut x = vec![0.0; dim];
            x[0] = r;
            x[1] = FRAC_PI_2;
            x
        }
    }
}

fn embed(x: &[f64]) -> Vec<f64> {
    match x.len() {
        2 => vec![x[0] * x[1].cos(), x[0] * x[1].sin()],
        3 => {
            let (r, th, ph) = (x[0], x[1], x[2]);
            vec![r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
        }
        _ => x.to_vec(),
    }
}

/// Positive root of `a v² + b v + c = 0`.
fn positive_root(a: f64, b: f64, c: f64, what: &str) -> Result<f64, CliError> {
    let disc = b * b - 4.0 * a * c;
    if !(a > 0.0) || disc < 0.0 {
        return Err(CliError::Validation(format!(
            "no real {what} reaches the requested energy at r0"
        )));
    }
    Ok((-b + disc.sqrt()) / (2.0 * a))
}

struct Start {
    x: Vec<f64>,
    p: Vec<f64>,
    energy: f64,
}

/// Initial phase point from `integration.x0/p0` or from `r0`, `L`, `pr`, `E`
/// (any two of the last three).
fn start(
    sc: &Scenario,
    system: &System,
    mech: &MechanicalSystem,
    params: &BTreeMap<String, f64>,
) -> Result<Start, CliError> {
    let dim = mech.dim();
    if let (Some(x0), Some(p0)) = (&sc.integration.x0, &sc.integration.p0) {
        if ["r0", "L", "pr", "E"].iter().any(|k| params.contains_key(*k)) {
            return Err(CliError::Validation(
                "give either integration.x0/p0 or r0/L/pr/E, not both".into(),
            ));
        }
        if x0.len() != dim {
            return Err(CliError::Validation(format!("integration.x0 needs {dim} entries")));
        }
        let energy = mech.hamiltonian(x0, p0, 0.0)?;
        return Ok(Start {
            x: x0.clone(),
            p: p0.clone(),
            energy,
        });
    }
    let r0 = params.get("r0").copied().unwrap_or_else(|| default_r0(system, params));
    let x = radial_point(dim, r0);
    mech.metric.check(&x)?;
    let (e, l, pr) = (
        params.get("E").copied(),
        params.get("L").copied(),
        params.get("pr").copied(),
    );
    if dim == 1 && l.is_some() {
        return Err(CliError::Validation("parameter 'L' needs a planar system".into()));
    }
    let ginv = mech.metric.inverse(&x, 0.0)?;
    let m = mech.mass();
    let ang = dim - 1;
    let mut p = vec![0.0; dim];
    match (e, l, pr) {
        (Some(_), Some(_), Some(_)) => {
            return Err(CliError::Validation("give at most two of E, L, pr".into()));
        }
        (Some(_), _, Some(_)) if dim == 1 => {
            return Err(CliError::Validation(
                "give either E or pr for a one-dimensional system".into(),
            ));
        }
        (None, None, _) if dim > 1 => {
            return Err(CliError::Validation("parameter 'E' or 'L' is required".into()));
        }
        (None, l, pr) => {
            p[0] = pr.unwrap_or(0.0);
            if dim > 1 {
                p[ang] = l.unwrap_or(0.0);
            }
        }
        (Some(e), l, None) if dim == 1 || l.is_some() => {
            if dim > 1 {
                p[ang] = l.unwrap_or(0.0);
            }
            // ½g^{rr}p_r²/m + g^{rφ}p_r L/m + (rest) = E
            let rest = mech.hamiltonian(&x, &p, 0.0)?;
            let b = if dim > 1 { ginv[(0, ang)] * p[ang] / m } else { 0.0 };
            p[0] = positive_root(ginv[(0, 0)] / (2.0 * m), b, rest - e, "radial momentum")?;
        }
        (Some(e), _, pr) => {
            p[0] = pr.unwrap_or(0.0);
            let rest = mech.hamiltonian(&x, &p, 0.0)?;
            p[ang] = positive_root(
                ginv[(ang, ang)] / (2.0 * m),
                ginv[(0, ang)] * p[0] / m,
                rest - e,
                "angular momentum",
            )?;
        }
    }
    let energy = mech.hamiltonian(&x, &p, 0.0)?;
    Ok(Start { x, p, energy })
}

/// Half the semi-major axis for bound `−k/r` orbits, so a start at rest
/// radially is an eccentric (`e = ½`) periapsis; otherwise 1.
fn default_r0(system: &System, params: &BTreeMap<String, f64>) -> f64 {
    match (system.kepler_k(), params.get("E")) {
        (Some(k), Some(&e)) if k > 0.0 && e < 0.0 => 0.25 * k / e.abs(),
        _ => 1.0,
    }
}

/// Kepler period `2π√(m a³/k)`, `a = k/(2|E|)`, for bound `−k/r` orbits.
fn kepler_period(system: &System, energy: f64) -> Option<f64> {
    let k = system.kepler_k()?;
    if !(energy < 0.0 && k > 0.0) {
        return None;
    }
    let a = k / (2.0 * energy.abs());
    Some(2.0 * PI * (system.mass() * a.powi(3) / k).sqrt())
}

/// Time span from `integration.span`, `integration.periods`, or 10 periods.
fn time_span(sc: &Scenario, system: &System, energy: f64) -> Result<f64, CliError> {
    if let Some(s) = sc.integration.span {
        return Ok(s);
    }
    let periods = sc.integration.periods.unwrap_or(10.0);
    kepler_period(system, energy).map(|t| periods * t).ok_or_else(|| {
        CliError::Validation("integration.span is required (no period estimate for this system and energy)".into())
    })
}

fn options(sc: &Scenario, span: f64) -> IntegrateOptions {
    let mut o = IntegrateOptions::default().with_tolerances(sc.rtol(), sc.atol());
    o.max_step = Some(sc.integration.max_step.unwrap_or(span * DENSE_FRACTION));
    if let Some(n) = sc.integration.max_steps {
        o.max_steps = n;
    }
    o
}

fn trajectory_table(suffix: &'static str, traj: &Trajectory) -> Table {
    let n = traj.first().map(FlowState::dim).unwrap_or(0);
    let monitors: Vec<String> = traj
        .first()
        .map(|s| s.monitors.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec!["param".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("p{i}")));
    header.extend(monitors.iter().cloned());
    let rows = traj
        .states()
        .iter()
        .map(|s| {
            let mut row = vec![s.param];
            row.extend(&s.x);
            row.extend(&s.p);
            row.extend(monitors.iter().map(|k| s.monitor(k).unwrap_or(f64::NAN)));
            row
        })
        .collect();
    Table { suffix, header, rows }
}

fn drifts(traj: &Trajectory) -> Value {
    let mut out = Map::new();
    if let Some(first) = traj.first() {
        for name in first.monitors.keys() {
            let v = match name.as_str() {
                "H_tilde" => traj.monitor_deviation(name, 1.0),
                "legendre" | "mass_shell" => traj.monitor_deviation(name, 0.0),
                _ => traj.monitor_drift(name, DRIFT_FLOOR),
            };
            out.insert(name.clone(), json!(v));
        }
    }
    Value::Object(out)
}

fn hamilton_flow(mech: MechanicalSystem) -> HamiltonFlow {
    let chart = chart_for(mech.dim());
    let f = HamiltonFlow::new(mech);
    match chart {
        Some(c) => f.with_chart(c),
        None => f,
    }
}

fn jacobi_flow(mech: MechanicalSystem) -> JacobiFlow {
    let chart = chart_for(mech.dim());
    let f = JacobiFlow::new(mech);
    match chart {
        Some(c) => f.with_chart(c),
        None => f,
    }
}

/// Jacobi-parameter length of the time interval `[0, span]`, from a dense
/// Hamilton run relabeled by `ds = 2m(E − U) dt`.
fn jacobi_length(
    sc: &Scenario,
    mech: &MechanicalSystem,
    s0: &FlowState,
    span: f64,
) -> Result<(Trajectory, f64), CliError> {
    let ham = integrate(&hamilton_flow(mech.clone()), s0, span, &options(sc, span))?;
    let relabeled = reparametrize(&ham, Direction::TToS, mech)?;
    let s = relabeled.last().map(|st| st.param).unwrap_or(0.0);
    Ok((ham, s))
}

fn orbit(sc: &Scenario, system: &System, params: &BTreeMap<String, f64>) -> Result<PointResult, CliError> {
    let template = system.entry()?.mechanical(0.0)?;
    let st = start(sc, system, &template, params)?;
    let mech = template.with_energy(st.energy);
    let s0 = FlowState::new(0.0, st.x.clone(), st.p.clone())?;
    let t_span = time_span(sc, system, st.energy)?;
    let flow_kind = sc.integration.flow.unwrap_or_default();
    let traj = match flow_kind {
        FlowKind::Hamilton => integrate(&hamilton_flow(mech.clone()), &s0, t_span, &options(sc, t_span))?,
        FlowKind::Jacobi => {
            let span = match sc.integration.span {
                Some(s) => s,
                None => jacobi_length(sc, &mech, &s0, t_span)?.1,
            };
            integrate(&jacobi_flow(mech.clone()), &s0, span, &options(sc, span))?
        }
    };
    let termination = traj.termination();
    let mut summary = Map::new();
    summary.insert("flow".into(), json!(flow_kind));
    summary.insert("energy".into(), json!(st.energy));
    summary.insert("states".into(), json!(traj.len()));
    summary.insert("final_param".into(), json!(traj.last().map(|s| s.param)));
    summary.insert("max_drift".into(), drifts(&traj));
    let line = format!(
        "{} orbit: {} states, termination {:?}",
        flow_kind_name(flow_kind),
        traj.len(),
        termination
    );
    Ok(PointResult {
        tables: vec![trajectory_table("", &traj)],
        summary,
        termination,
        line,
    })
}

fn flow_kind_name(f: FlowKind) -> &'static str {
    match f {
        FlowKind::Hamilton => "hamilton",
        FlowKind::Jacobi => "jacobi",
    }
}

fn compare(sc: &Scenario, system: &System, params: &BTreeMap<String, f64>) -> Result<PointResult, CliError> {
    let template = system.entry()?.mechanical(0.0)?;
    let st = start(sc, system, &template, params)?;
    let mech = template.with_energy(st.energy);
    let s0 = FlowState::new(0.0, st.x.clone(), st.p.clone())?;
    let t_span = match sc.integration.span {
        Some(s) => s,
        None => kepler_period(system, st.energy)
            .map(|t| t * sc.integration.periods.unwrap_or(1.0))
            .ok_or_else(|| CliError::Validation("integration.span is required for this system".into()))?,
    };
    let (ham, s_span) = jacobi_length(sc, &mech, &s0, t_span)?;
    let jac = if ham.termination() == Termination::Completed {
        integrate(&jacobi_flow(mech.clone()), &s0, s_span, &options(sc, s_span))?
    } else {
        return Ok(PointResult {
            tables: vec![trajectory_table("hamilton", &ham)],
            summary: Map::new(),
            termination: ham.termination(),
            line: format!("hamilton flow stopped early: {:?}", ham.termination()),
        });
    };
    let deviation = compare_paths_with(&ham, &jac, embed)?;
    let termination = jac.termination();
    let mut summary = Map::new();
    summary.insert("energy".into(), json!(st.energy));
    summary.insert("time_span".into(), json!(t_span));
    summary.insert("jacobi_span".into(), json!(s_span));
    summary.insert("max_path_deviation".into(), json!(deviation));
    summary.insert("hamilton_termination".into(), json!(ham.termination()));
    summary.insert("max_drift_hamilton".into(), drifts(&ham));
    summary.insert("max_drift_jacobi".into(), drifts(&jac));
    let line = format!("max path deviation {deviation:.6e}");
    Ok(PointResult {
        tables: vec![trajectory_table("hamilton", &ham), trajectory_table("jacobi", &jac)],
        summary,
        termination,
        line,
    })
}

fn grid(params: &BTreeMap<String, f64>) -> Result<Vec<f64>, CliError> {
    let lo = params.get("r_min").copied().unwrap_or(0.5);
    let hi = params.get("r_max").copied().unwrap_or(5.0);
    let n = params.get("samples").copied().unwrap_or(100.0);
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Validation(format!(
            "need 0 < r_min < r_max, got r_min={lo}, r_max={hi}"
        )));
    }
    if !(n >= 2.0 && n.fract() == 0.0 && n <= 1e7) {
        return Err(CliError::Validation(format!(
            "samples must be an integer >= 2, got {n}"
        )));
    }
    let n = n as usize;
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    let scale = b.amax();
    let diff = (a - b).amax();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn transform(system: &System, params: &BTreeMap<String, f64>) -> Result<PointResult, CliError> {
    let entry = system.entry()?;
    let (e, erel, q) = (
        params.get("E").copied(),
        params.get("Erel").copied(),
        params.get("q").copied(),
    );
    if e.is_none() && erel.is_none() && q.is_none() {
        return Err(CliError::Validation(
            "transform needs at least one of 'E', 'Erel', 'q'".into(),
        ));
    }
    if e.is_some() && entry.potential.is_none() {
        return Err(CliError::Validation(format!(
            "'{}' has no potential; 'E' does not apply",
            entry.name
        )));
    }
    let rs = grid(params)?;
    let mut header = vec!["r".to_string()];
    let mut max_err: BTreeMap<&str, f64> = BTreeMap::new();
    if e.is_some() {
        header.extend(["factor_nonrel".into(), "printed_err_nonrel".into()]);
    }
    if erel.is_some() {
        header.extend(["factor_rel".into(), "printed_err_rel".into()]);
    }
    if q.is_some() {
        header.extend(["factor_weak".into(), "printed_err_weak".into()]);
    }
    let mut rows = Vec::with_capacity(rs.len());
    for &r in &rs {
        let x = radial_point(entry.dim(), r);
        let mut row = vec![r];
        let inside = entry.check(&x).is_ok();
        let g00 = entry.spatial.eval(&x, 0.0).map(|g| g[(0, 0)]).unwrap_or(f64::NAN);
        let mut push =
            |name: &'static str, generic: crate::Result<Matrix>, printed: Option<crate::Result<Matrix>>| match (
                inside, generic,
            ) {
                (true, Ok(gm)) => {
                    row.push(gm[(0, 0)] / g00);
                    let err = printed
                        .and_then(|p| p.ok())
                        .map(|p| rel_diff(&p, &gm))
                        .unwrap_or(f64::NAN);
                    if err.is_finite() {
                        let slot = max_err.entry(name).or_insert(0.0);
                        *slot = slot.max(err);
                    }
                    row.push(err);
                }
                _ => row.extend([f64::NAN, f64::NAN]),
            };
        if let Some(e) = e {
            let printed = entry.has_nonrelativistic_reference().then(|| {
                entry
                    .nonrelativistic_reference(&x, e)
                    .map(|p| p.matrix() * entry.nonrelativistic_normalization)
            });
            push("nonrel", entry.generic_nonrelativistic(&x, e), printed);
        }
        if let Some(erel) = erel {
            let printed = entry
                .has_relativistic_reference()
                .then(|| entry.relativistic_reference(&x, erel).map(|p| p.matrix()));
            push("rel", entry.generic_relativistic(&x, erel), printed);
        }
        if let Some(q) = q {
            let printed = entry
                .has_weak_reference()
                .then(|| entry.weak_reference(&x, q).map(|p| p.matrix()));
            push("weak", entry.generic_weak(&x, q), printed);
        }
        rows.push(row);
    }
    let mut summary = Map::new();
    summary.insert("points".into(), json!(rs.len()));
    summary.insert("max_printed_rel_err".into(), json!(max_err));
    summary.insert("notes".into(), json!(entry.notes));
    let line = if max_err.is_empty() {
        format!(
            "{} Jacobi factors on {} radii (no closed form to check)",
            entry.name,
            rs.len()
        )
    } else {
        let parts: Vec<String> = max_err.iter().map(|(k, v)| format!("{k} {v:.3e}")).collect();
        format!(
            "{}: max relative error vs closed form: {}",
            entry.name,
            parts.join(", ")
        )
    };
    Ok(PointResult {
        tables: vec![Table {
            suffix: "",
            header,
            rows,
        }],
        summary,
        termination: Termination::Completed,
        line,
    })
}

fn curvature(system: &System, params: &BTreeMap<String, f64>) -> Result<PointResult, CliError> {
    let entry = system.entry()?;
    if entry.name != "kepler" {
        return Err(CliError::Validation(
            "curvature scans need a flat polar base; use system 'kepler'".into(),
        ));
    }
    let k = entry.params["k"];
    let e = params
        .get("E")
        .copied()
        .ok_or_else(|| CliError::Validation("curvature needs parameter 'E'".into()))?;
    let profile = ConformalProfile::kepler(k, e);
    let rs = grid(params)?;
    let mut rows = Vec::with_capacity(rs.len());
    let (mut max_rel, mut max_abs) = (0.0f64, 0.0f64);
    let (mut positive, mut negative) = (0usize, 0usize);
    for &r in &rs {
        let num = gaussian_curvature_numeric(&profile, r).unwrap_or(f64::NAN);
        let closed = kepler_curvature(k, e, r).unwrap_or(f64::NAN);
        let err = if closed != 0.0 {
            ((num - closed) / closed).abs()
        } else {
            (num - closed).abs()
        };
        if err.is_finite() {
            if closed != 0.0 {
                max_rel = max_rel.max(err);
            } else {
                max_abs = max_abs.max(err);
            }
        }
        if num > 0.0 {
            positive += 1;
        } else if num < 0.0 {
            negative += 1;
        }
        rows.push(vec![r, num, closed, err]);
    }
    let class = classify_orbit(e);
    let mut summary = Map::new();
    summary.insert("classification".into(), json!(class));
    summary.insert("max_rel_err".into(), json!(max_rel));
    summary.insert("max_abs_err_flat".into(), json!(max_abs));
    summary.insert("points_positive_curvature".into(), json!(positive));
    summary.insert("points_negative_curvature".into(), json!(negative));
    if e < 0.0 && k > 0.0 {
        let boundary = -k / e;
        let start = boundary * 0.5;
        let approach = approach_boundary(&profile, boundary, start, 12).ok();
        summary.insert("boundary_radius".into(), json!(boundary));
        summary.insert(
            "curvature_grows_toward_boundary".into(),
            json!(approach.map(|a| grows_monotonically(&a))),
        );
    }
    if let Some(&l) = params.get("L") {
        let ecc = eccentricity(e, l, entry.mass(), k)?;
        summary.insert("eccentricity".into(), json!(ecc));
        summary.insert("eccentricity_regime".into(), json!(eccentricity_regime(ecc, 1e-6)));
    }
    let line = format!("{class:?}: max relative error {max_rel:.3e} over {} radii", rs.len()).to_lowercase();
    Ok(PointResult {
        tables: vec![Table {
            suffix: "",
            header: ["r", "K_numeric", "K_closed", "rel_err"].map(String::from).to_vec(),
            rows,
        }],
        summary,
        termination: Termination::Completed,
        line,
    })
}

fn lift(sc: &Scenario, system: &System, params: &BTreeMap<String, f64>) -> Result<PointResult, CliError> {
    let eps = params.get("eps").copied().unwrap_or(0.1);
    let driven = matches!(system, System::Driven { .. });
    if params.contains_key("eps") && !driven {
        return Err(CliError::Validation(
            "parameter 'eps' applies to driven_oscillator".into(),
        ));
    }
    let choice = sc
        .integration
        .lift
        .unwrap_or(if driven { LiftChoice::Sigma } else { LiftChoice::Static });
    if driven && choice == LiftChoice::Static {
        return Err(CliError::Validation(
            "a time-dependent potential needs the sigma lift".into(),
        ));
    }
    let mech = system.mechanical(0.0, eps)?;
    let (x0, p0) = match (system, &sc.integration.x0, &sc.integration.p0) {
        (_, Some(x), Some(p)) => {
            if x.len() != mech.dim() {
                return Err(CliError::Validation(format!(
                    "integration.x0 needs {} entries",
                    mech.dim()
                )));
            }
            (x.clone(), p.clone())
        }
        (System::Catalog(_), _, _) => {
            let st = start(sc, system, &mech, params)?;
            (st.x, st.p)
        }
        _ => {
            if ["r0", "L", "pr", "E"].iter().any(|k| params.contains_key(*k)) {
                return Err(CliError::Validation(
                    "built-in systems take integration.x0/p0, not r0/L/pr/E".into(),
                ));
            }
            (vec![1.0], vec![0.0])
        }
    };
    let span = match (sc.integration.span, system) {
        (Some(s), _) => s,
        (None, System::Harmonic { .. }) => 20.0,
        (None, System::Driven { .. }) => 20.0 * PI,
        (None, System::Catalog(_)) => time_span(sc, system, mech.hamiltonian(&x0, &p0, 0.0)?)?,
    };
    let m = system.mass();
    let c = match system {
        System::Driven { c, .. } => *c,
        System::Catalog(e) => e.c(),
        System::Harmonic { .. } => 1.0,
    };
    let lifted = match choice {
        LiftChoice::Static => {
            let norm = match sc.integration.normalization.unwrap_or_default() {
                Normalization::Unit => PzNormalization::Unit,
                Normalization::Sqrt2 => PzNormalization::Sqrt2,
            };
            lift_static(&mech.metric, &mech.potential, m, norm)?
        }
        LiftChoice::Sigma => lift_time_dependent(&mech.metric, &mech.potential, m, c)?,
    };
    let mut opts = options(sc, span).with_sample_interval(LIFT_SAMPLE);
    opts.max_step = sc.integration.max_step;
    let init = lifted.initial_state(&x0, &p0, 0.0)?;
    let traj = integrate(&lifted.flow(), &init, span, &opts)?;
    let projected = lifted.project(&traj)?;

    // Oracle: closed form for the harmonic oscillator, otherwise direct integration.
    let reference: Vec<Vec<f64>> = match system {
        System::Harmonic { m } => {
            let w = (1.0 / m).sqrt();
            projected
                .states()
                .iter()
                .map(|s| vec![x0[0] * (w * s.param).cos() + p0[0] / (m * w) * (w * s.param).sin()])
                .collect()
        }
        _ => {
            let direct = integrate(
                &DirectFlow(hamilton_flow(mech.clone())),
                &FlowState::new(0.0, x0.clone(), p0.clone())?,
                span,
                &opts,
            )?;
            direct.states().iter().map(|s| s.x.clone()).collect()
        }
    };
    let deviation = projected
        .states()
        .iter()
        .zip(&reference)
        .map(|(s, r)| s.x.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);

    let mut summary = Map::new();
    summary.insert(
        "lift".into(),
        json!(if choice == LiftChoice::Static {
            "static"
        } else {
            "sigma"
        }),
    );
    summary.insert("states".into(), json!(traj.len()));
    summary.insert("max_drift".into(), drifts(&traj));
    if choice == LiftChoice::Sigma {
        summary.insert(
            "max_mass_shell_residual".into(),
            json!(traj.monitor_deviation("mass_shell", 0.0)),
        );
    }
    summary.insert("max_projection_deviation".into(), json!(deviation));
    summary.insert("compared_states".into(), json!(projected.len().min(reference.len())));
    let dummy = if choice == LiftChoice::Static { "p_z" } else { "p_sigma" };
    let line = format!(
        "projection deviation {deviation:.3e}, {dummy} drift {:.3e}",
        traj.monitor_drift(dummy, DRIFT_FLOOR).unwrap_or(f64::NAN)
    );
    let termination = traj.termination();
    Ok(PointResult {
        tables: vec![
            trajectory_table("lifted", &traj),
            trajectory_table("projected", &projected),
        ],
        summary,
        termination,
        line,
    })
}

/// A Hamilton flow without monitors (the Clairaut monitor has no meaning
/// for time-dependent potentials).
struct DirectFlow(HamiltonFlow);

impl PhaseFlow for DirectFlow {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn parameter_kind(&self) -> crate::flow::ParameterKind {
        self.0.parameter_kind()
    }

    fn rhs(&self, t: f64, x: &[f64], p: &[f64]) -> crate::Result<(Vec<f64>, Vec<f64>)> {
        self.0.rhs(t, x, p)
    }
}
