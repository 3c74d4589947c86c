//! Experiment harness for the `rkcq` solver: argument handling, the five
//! experiments and their CSV/JSON output.

pub mod error;
pub mod experiments;
pub mod output;
pub mod render;
pub mod spec;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rkcq::operators::OperatorFamily;
use serde_json::{json, Value};

pub use error::{CliError, CliResult};
use output::{json_text, num, Table};
use spec::{Experiment, Format, RunSpec, Settings};

#[derive(Debug, Parser)]
#[command(name = "rkcq", version, about = "Fast Runge-Kutta convolution quadrature experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error against the exact solution of the dense 2x2 problem over an h-ladder.
    Convergence(Flags),
    /// Phase timings of the 3D subdiffusion problem over N and worker ladders.
    Subdiffusion(Flags),
    /// Snapshots of the Schrodinger problem with transparent boundaries.
    Schrodinger(Flags),
    /// Contour weights against directly computed weights.
    Weights(Flags),
    /// Quick end-to-end checks; exit code 4 on failure.
    Selftest(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Contour nodes per level are k = -K..K.
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long = "Lambda")]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Circle quadrature points of the first block.
    #[arg(long = "J")]
    pub j: Option<usize>,
    /// radau1, radau3 or radau5.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long = "a-half")]
    pub a_half: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "complex")]
    pub real: bool,
    #[arg(long)]
    pub complex: bool,
    /// Compare Schrodinger snapshots with a large-domain reference run.
    #[arg(long)]
    pub reference: bool,
    /// Schrodinger error against K instead of snapshots.
    #[arg(long)]
    pub sweep: bool,
    /// Subdiffusion error bound.
    #[arg(long)]
    pub bound: Option<f64>,
    /// Timing repeats per configuration.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long = "dump-config")]
    pub dump_config: bool,
}

impl Flags {
    fn settings(&self) -> CliResult<Settings> {
        let mut s = Settings {
            alpha: self.alpha,
            h: self.h,
            steps: self.steps,
            k: self.k,
            lambda: self.lambda,
            kappa: self.kappa,
            j: self.j,
            workers: self.workers,
            grid: self.grid,
            a_half: self.a_half,
            t_end: self.t_end,
            out: self.out.clone(),
            bound: self.bound,
            repeats: self.repeats,
            ..Settings::default()
        };
        if let Some(m) = &self.method {
            s.set("method", m)?;
        }
        if let Some(f) = &self.format {
            s.set("format", f)?;
        }
        if self.real {
            s.real = Some(true);
        }
        if self.complex {
            s.real = Some(false);
        }
        s.reference = self.reference.then_some(true);
        s.sweep = self.sweep.then_some(true);
        Ok(s)
    }
}

impl Command {
    pub fn parts(&self) -> (Experiment, &Flags) {
        match self {
            Command::Convergence(f) => (Experiment::Convergence, f),
            Command::Subdiffusion(f) => (Experiment::Subdiffusion, f),
            Command::Schrodinger(f) => (Experiment::Schrodinger, f),
            Command::Weights(f) => (Experiment::Weights, f),
            Command::Selftest(f) => (Experiment::Selftest, f),
        }
    }
}

/// Config file (if any) overlaid by flags, resolved against experiment defaults.
pub fn resolve(command: &Command) -> CliResult<RunSpec> {
    let (experiment, flags) = command.parts();
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Settings::from_config_text(&text)?
        }
        None => Settings::default(),
    };
    RunSpec::resolve(experiment, &file.overlay(flags.settings()?))
}

fn reformat_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(reformat_floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, reformat_floats(v))).collect()),
        other => other,
    }
}

fn family_for(spec: &RunSpec) -> CliResult<Box<dyn OperatorFamily>> {
    use rkcq::operators::{DenseOperator, PeriodicCompactFd3d, SchrodingerTbc1d};
    Ok(match spec.experiment {
        Experiment::Subdiffusion => Box::new(PeriodicCompactFd3d::new(spec.grid)?),
        Experiment::Schrodinger => Box::new(SchrodingerTbc1d::new(spec.a_half, spec.grid, spec.alpha)?),
        _ => {
            let a = rkcq::smallmat::CMat::from_real_rows(&[vec![-1.0, 1.0], vec![-1.0, -1.0]]);
            Box::new(DenseOperator::new(None, a, std::f64::consts::FRAC_PI_2)?)
        }
    })
}

/// The resolved spec plus the solver parameters it implies.
pub fn spec_json(spec: &RunSpec) -> CliResult<Value> {
    let family = family_for(spec)?;
    let solver: Vec<Value> = spec
        .methods
        .iter()
        .flat_map(|&s| spec.k_values.iter().map(move |&k| (s, k)))
        .map(|(s, k)| -> CliResult<Value> {
            let cfg = spec.config_for(s, k, spec.h, spec.steps)?;
            Ok(json!({
                "tableau": cfg.tableau.name(),
                "h": cfg.h,
                "N": cfg.steps,
                "K": cfg.k,
                "Lambda": cfg.lambda,
                "kappa": cfg.kappa,
                "J": cfg.j,
                "rho_circle": cfg.rho(),
                "theta": cfg.theta_for(family.as_ref()),
                "real_input": cfg.real_input,
                "workers": cfg.workers,
            }))
        })
        .collect::<CliResult<_>>()?;
    let mut v = serde_json::to_value(spec).map_err(|e| CliError::Config(e.to_string()))?;
    v["solver"] = Value::Array(solver);
    Ok(reformat_floats(v))
}

fn table_text(t: &Table, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => json_text(&t.to_json()),
    }
}

/// Output text, notices for stderr, and a failure to report after writing.
pub struct Outcome {
    pub text: String,
    pub notices: Vec<String>,
    pub failure: Option<CliError>,
}

pub fn run(spec: &RunSpec) -> CliResult<Outcome> {
    let mut notices = Vec::new();
    let mut failure = None;
    let text = match spec.experiment {
        Experiment::Convergence => {
            let rows = experiments::convergence_rows(spec)?;
            table_text(&render::convergence_table(&rows), spec.format)?
        }
        Experiment::Subdiffusion => {
            let r = experiments::run_subdiffusion(spec)?;
            if r.error > r.bound {
                failure = Some(CliError::Numerical(format!(
                    "final error {:e} exceeds the bound {:e}",
                    r.error, r.bound
                )));
            }
            if r.n_ladder.iter().chain(&r.worker_ladder).any(|e| e.variance_flag) {
                notices.push("timing spread above 50% of the median in some phase".into());
            }
            match spec.format {
                Format::Json => json_text(&render::subdiffusion_json(&r, spec_json(spec)?))?,
                Format::Csv => render::subdiffusion_table(&r).to_csv(),
            }
        }
        Experiment::Schrodinger if spec.sweep => {
            let rows = experiments::run_contour_sweep(spec)?;
            table_text(&render::sweep_table(&rows), spec.format)?
        }
        Experiment::Schrodinger => {
            let snaps = experiments::run_schrodinger(spec)?;
            table_text(&render::schrodinger_table(&snaps), spec.format)?
        }
        Experiment::Weights => {
            let w = experiments::run_weights(spec)?;
            notices.extend(w.notices);
            table_text(&render::weights_table(&w.rows), spec.format)?
        }
        Experiment::Selftest => {
            let checks = experiments::run_selftest(spec)?;
            for c in &checks {
                notices.push(format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
            if !failed.is_empty() {
                failure = Some(CliError::Acceptance(format!("failed checks: {}", failed.join(", "))));
            }
            table_text(&render::selftest_table(&checks), spec.format)?
        }
    };
    Ok(Outcome { text, notices, failure })
}

/// Runs a parsed command end to end.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let spec = resolve(&cli.command)?;
    let (_, flags) = cli.command.parts();
    if flags.dump_config {
        print!("{}", json_text(&spec_json(&spec)?)?);
        return Ok(());
    }
    let outcome = run(&spec)?;
    for n in &outcome.notices {
        eprintln!("{n}");
    }
    match &spec.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => std::io::stdout().write_all(outcome.text.as_bytes())?,
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
