//! The `jacobi-flow` command line: flag and scenario parsing, parameter
//! sweeps, and CSV / JSON output.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 an integration
//! stopped at a turning point or domain boundary, 4 step-size failure.

pub mod scenario;
mod tasks;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::catalog;
use crate::flow::Termination;
use scenario::{FlowKind, LiftChoice, Normalization, ParamValue, Scenario, SystemSpec, Task};

pub use tasks::BUILTIN_SYSTEMS;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::TurningPoint { .. } | crate::Error::DomainViolation(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub fn exit_code_for(termination: Termination) -> i32 {
    match termination {
        Termination::Completed => 0,
        Termination::TurningPoint | Termination::DomainViolation => 3,
        Termination::StepFailure => 4,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "jacobi-flow",
    version,
    about = "Jacobi-metric transforms, flows, curvature scans and lifts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Jacobi factors on a radial grid and check them against closed forms.
    Transform(RunArgs),
    /// Integrate one Hamilton or Jacobi flow.
    Orbit(RunArgs),
    /// Integrate both flows from one phase point and compare the paths.
    Compare(RunArgs),
    /// Radial Gaussian-curvature scan and orbit classification.
    Curvature(RunArgs),
    /// Integrate a lifted geodesic and check its projection.
    Lift(RunArgs),
    /// List catalog entries and their parameters.
    Catalog,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON scenario; its values take precedence over flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long = "E", allow_hyphen_values = true)]
    pub energy: Option<String>,
    /// Relativistic energy ℰ (or the conserved 𝒬 for Euclidean entries).
    #[arg(long = "Erel", allow_hyphen_values = true)]
    pub energy_rel: Option<String>,
    /// Conserved momentum Q of the weak-potential form.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long = "M", allow_hyphen_values = true)]
    pub big_m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long = "G", allow_hyphen_values = true)]
    pub big_g: Option<String>,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub big_k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub angular: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub pr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    #[arg(long = "r-min", allow_hyphen_values = true)]
    pub r_min: Option<String>,
    #[arg(long = "r-max", allow_hyphen_values = true)]
    pub r_max: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub periods: Option<f64>,
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long = "max-step")]
    pub max_step: Option<f64>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub flow: Option<FlowArg>,
    #[arg(long, value_enum)]
    pub lift: Option<LiftArg>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Reserved; no computation is stochastic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FlowArg {
    Hamilton,
    Jacobi,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum LiftArg {
    Static,
    Sigma,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum NormArg {
    Unit,
    Sqrt2,
}

impl RunArgs {
    fn flag_params(&self) -> Vec<(&'static str, &String)> {
        let pairs: [(&'static str, &Option<String>); 17] = [
            ("k", &self.k),
            ("E", &self.energy),
            ("Erel", &self.energy_rel),
            ("q", &self.q),
            ("M", &self.big_m),
            ("a", &self.a),
            ("m", &self.m),
            ("c", &self.c),
            ("G", &self.big_g),
            ("K", &self.big_k),
            ("beta", &self.beta),
            ("L", &self.angular),
            ("r0", &self.r0),
            ("pr", &self.pr),
            ("eps", &self.eps),
            ("r_min", &self.r_min),
            ("r_max", &self.r_max),
        ];
        let mut out: Vec<(&'static str, &String)> =
            pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (*k, v))).collect();
        if let Some(s) = &self.samples {
            out.push(("samples", s));
        }
        out
    }

    /// Builds the scenario, with a scenario file overriding flags.
    pub fn to_scenario(&self, task: Task) -> Result<Scenario, CliError> {
        let mut sc = match &self.scenario {
            Some(path) => {
                let sc = Scenario::load(path)?;
                if sc.task != task {
                    return Err(CliError::Validation(format!(
                        "scenario task '{}' does not match subcommand '{}'",
                        sc.task.name(),
                        task.name()
                    )));
                }
                sc
            }
            None => {
                let name = self
                    .system
                    .clone()
                    .ok_or_else(|| CliError::Validation("--system (or --scenario) is required".into()))?;
                Scenario {
                    system: SystemSpec {
                        name,
                        params: Default::default(),
                    },
                    task,
                    params: Default::default(),
                    integration: Default::default(),
                    output: Default::default(),
                    seed: None,
                }
            }
        };
        let system_params = tasks::system_params(&sc.system.name)?;
        for (key, raw) in self.flag_params() {
            let value = ParamValue::parse(key, raw)?;
            let target = if system_params.contains(&key) {
                &mut sc.system.params
            } else {
                &mut sc.params
            };
            target.entry(key.to_string()).or_insert(value);
        }
        let i = &mut sc.integration;
        i.rtol = i.rtol.or(self.rtol);
        i.atol = i.atol.or(self.atol);
        i.span = i.span.or(self.span);
        i.periods = i.periods.or(self.periods);
        i.max_step = i.max_step.or(self.max_step);
        i.max_steps = i.max_steps.or(self.max_steps);
        i.flow = i.flow.or(self.flow.map(|f| match f {
            FlowArg::Hamilton => FlowKind::Hamilton,
            FlowArg::Jacobi => FlowKind::Jacobi,
        }));
        i.lift = i.lift.or(self.lift.map(|l| match l {
            LiftArg::Static => LiftChoice::Static,
            LiftArg::Sigma => LiftChoice::Sigma,
        }));
        i.normalization = i.normalization.or(self.normalization.map(|n| match n {
            NormArg::Unit => Normalization::Unit,
            NormArg::Sqrt2 => Normalization::Sqrt2,
        }));
        sc.output.dir = sc.output.dir.clone().or(self.out.clone());
        sc.seed = sc.seed.or(self.seed);
        sc.validate(&system_params)?;
        Ok(sc)
    }
}

fn list_catalog() -> String {
    let mut out = String::new();
    for (name, params) in catalog::families() {
        let desc: Vec<String> = params
            .iter()
            .map(|(p, d)| match d {
                Some(v) => format!("{p}={v}"),
                None => format!("{p} (required)"),
            })
            .collect();
        out.push_str(&format!("{name}: {}\n", desc.join(", ")));
    }
    for (name, params) in BUILTIN_SYSTEMS {
        out.push_str(&format!("{name}: {} (lift task only)\n", params.join(", ")));
    }
    out
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (task, args) = match cli.command {
        Command::Catalog => {
            print!("{}", list_catalog());
            return 0;
        }
        Command::Transform(a) => (Task::Transform, a),
        Command::Orbit(a) => (Task::Orbit, a),
        Command::Compare(a) => (Task::Compare, a),
        Command::Curvature(a) => (Task::Curvature, a),
        Command::Lift(a) => (Task::Lift, a),
    };
    let outcome = args.to_scenario(task).and_then(|sc| tasks::execute(&sc));
    match outcome {
        Ok(report) => {
            print!("{}", report.stdout);
            if let Some(msg) = &report.warning {
                eprintln!("{msg}");
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("jacobi-flow: {e}");
            e.exit_code()
        }
    }
}
