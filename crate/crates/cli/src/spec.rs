//! Run specifications: flags and config files resolved into one validated `RunSpec`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Convergence,
    Subdiffusion,
    Schrodinger,
    Weights,
    Selftest,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Convergence => "convergence",
            Experiment::Subdiffusion => "subdiffusion",
            Experiment::Schrodinger => "schrodinger",
            Experiment::Weights => "weights",
            Experiment::Selftest => "selftest",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

/// Radau IIA method name to stage count.
pub fn parse_method(s: &str) -> CliResult<usize> {
    match s {
        "radau1" => Ok(1),
        "radau3" => Ok(2),
        "radau5" => Ok(3),
        _ => Err(CliError::Config(format!(
            "method must be radau1, radau3 or radau5, got {s:?}"
        ))),
    }
}

pub fn method_name(stages: usize) -> &'static str {
    match stages {
        1 => "radau1",
        2 => "radau3",
        _ => "radau5",
    }
}

/// Raw settings from a config file or the command line; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Settings {
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub k: Option<usize>,
    pub lambda: Option<u32>,
    pub kappa: Option<usize>,
    pub j: Option<usize>,
    pub method: Option<usize>,
    pub workers: Option<usize>,
    pub grid: Option<usize>,
    pub a_half: Option<f64>,
    pub t_end: Option<f64>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub real: Option<bool>,
    pub reference: Option<bool>,
    pub sweep: Option<bool>,
    pub bound: Option<f64>,
    pub repeats: Option<usize>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse {key} = {value:?}")))
}

impl Settings {
    /// Sets one key; keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "alpha" => self.alpha = Some(parse(key, value)?),
            "h" => self.h = Some(parse(key, value)?),
            "steps" => self.steps = Some(parse(key, value)?),
            "K" => self.k = Some(parse(key, value)?),
            "Lambda" => self.lambda = Some(parse(key, value)?),
            "kappa" => self.kappa = Some(parse(key, value)?),
            "J" => self.j = Some(parse(key, value)?),
            "method" => self.method = Some(parse_method(value)?),
            "workers" => self.workers = Some(parse(key, value)?),
            "grid" => self.grid = Some(parse(key, value)?),
            "a-half" => self.a_half = Some(parse(key, value)?),
            "t-end" => self.t_end = Some(parse(key, value)?),
            "out" => self.out = Some(value.to_string()),
            "format" => self.format = Some(value.parse()?),
            "real" => self.real = Some(parse(key, value)?),
            "complex" => self.real = Some(!parse::<bool>(key, value)?),
            "reference" => self.reference = Some(parse(key, value)?),
            "sweep" => self.sweep = Some(parse(key, value)?),
            "bound" => self.bound = Some(parse(key, value)?),
            "repeats" => self.repeats = Some(parse(key, value)?),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses flat `key=value` lines; `#` starts a comment.
    pub fn from_config_text(text: &str) -> CliResult<Self> {
        let mut s = Settings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got {raw:?}", no + 1)))?;
            s.set(key.trim(), value.trim())?;
        }
        Ok(s)
    }

    /// `other` wins wherever it is set.
    pub fn overlay(self, other: Settings) -> Settings {
        Settings {
            alpha: other.alpha.or(self.alpha),
            h: other.h.or(self.h),
            steps: other.steps.or(self.steps),
            k: other.k.or(self.k),
            lambda: other.lambda.or(self.lambda),
            kappa: other.kappa.or(self.kappa),
            j: other.j.or(self.j),
            method: other.method.or(self.method),
            workers: other.workers.or(self.workers),
            grid: other.grid.or(self.grid),
            a_half: other.a_half.or(self.a_half),
            t_end: other.t_end.or(self.t_end),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            real: other.real.or(self.real),
            reference: other.reference.or(self.reference),
            sweep: other.sweep.or(self.sweep),
            bound: other.bound.or(self.bound),
            repeats: other.repeats.or(self.repeats),
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub alpha: f64,
    pub h: f64,
    /// Largest step count of the run; ladders descend from it.
    pub steps: usize,
    pub k_values: Vec<usize>,
    pub lambda: u32,
    pub kappa: usize,
    pub j: usize,
    pub methods: Vec<usize>,
    pub workers: usize,
    pub grid: usize,
    pub a_half: f64,
    pub t_end: f64,
    pub out: Option<String>,
    pub format: Format,
    pub real: bool,
    pub reference: bool,
    pub sweep: bool,
    pub bound: f64,
    pub repeats: usize,
}

struct Defaults {
    alpha: f64,
    t_end: f64,
    steps: usize,
    k: &'static [usize],
    kappa: usize,
    j: usize,
    methods: &'static [usize],
    grid: usize,
    a_half: f64,
    format: Format,
    real: bool,
}

fn defaults(e: Experiment, sweep: bool) -> Defaults {
    let base = Defaults {
        alpha: 0.5,
        t_end: 10.0,
        steps: 10240,
        k: &[25],
        kappa: 20,
        j: 160,
        methods: &[3],
        grid: 0,
        a_half: 2.0,
        format: Format::Csv,
        real: true,
    };
    match e {
        Experiment::Convergence => Defaults {
            k: &[10, 25],
            methods: &[1, 2, 3],
            ..base
        },
        Experiment::Subdiffusion => Defaults {
            t_end: 123.45,
            steps: 100_000,
            k: &[20],
            kappa: 12,
            j: 14,
            grid: 16,
            format: Format::Json,
            ..base
        },
        Experiment::Schrodinger if sweep => Defaults {
            alpha: 0.75,
            t_end: 0.5,
            steps: 6000,
            k: &[5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80],
            j: 80,
            grid: 401,
            real: false,
            ..base
        },
        Experiment::Schrodinger => Defaults {
            alpha: 0.75,
            t_end: 1.0,
            steps: 4000,
            k: &[50],
            j: 80,
            grid: 801,
            real: false,
            ..base
        },
        Experiment::Weights => Defaults {
            t_end: 10.0,
            steps: 1000,
            k: &[10, 25],
            ..base
        },
        Experiment::Selftest => base,
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Resolves `N` and `h` from any of `h`, `steps` with `N h = t_end`.
fn resolve_steps(t_end: f64, h: Option<f64>, steps: Option<usize>, default: usize) -> CliResult<(f64, usize)> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(config(format!("t-end must be positive, got {t_end}")));
    }
    let (h, n) = match (h, steps) {
        (Some(h), Some(n)) => (h, n),
        (Some(h), None) => {
            if !(h > 0.0) {
                return Err(config(format!("h must be positive, got {h}")));
            }
            (h, (t_end / h).round() as usize)
        }
        (None, Some(n)) => (t_end / n as f64, n),
        (None, None) => (t_end / default as f64, default),
    };
    if n == 0 || !(h > 0.0) {
        return Err(config(format!("need h > 0 and steps >= 1, got h = {h}, steps = {n}")));
    }
    if ((n as f64) * h - t_end).abs() > 1e-9 * t_end {
        return Err(config(format!(
            "steps * h = {} does not reach t-end = {t_end}",
            n as f64 * h
        )));
    }
    Ok((h, n))
}

impl RunSpec {
    /// Applies experiment defaults and validates everything that does not need an operator.
    pub fn resolve(experiment: Experiment, s: &Settings) -> CliResult<Self> {
        let sweep = s.sweep.unwrap_or(false);
        let d = defaults(experiment, sweep);
        let alpha = s.alpha.unwrap_or(d.alpha);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if matches!(experiment, Experiment::Convergence | Experiment::Subdiffusion) && alpha != 0.5 {
            return Err(config(format!("the {experiment} problem is defined for alpha = 0.5, got {alpha}")));
        }
        let t_end = s.t_end.unwrap_or(d.t_end);
        let (h, steps) = resolve_steps(t_end, s.h, s.steps, d.steps)?;
        let k_values = s.k.map_or_else(|| d.k.to_vec(), |k| vec![k]);
        let methods = s.method.map_or_else(|| d.methods.to_vec(), |m| vec![m]);
        let workers = s
            .workers
            .unwrap_or_else(|| if experiment == Experiment::Subdiffusion { 4 } else { 1 });
        let spec = RunSpec {
            experiment,
            alpha,
            h,
            steps,
            k_values,
            lambda: s.lambda.unwrap_or(rkcq::contour::DEFAULT_LAMBDA),
            kappa: s.kappa.unwrap_or(d.kappa),
            j: s.j.unwrap_or(d.j),
            methods,
            workers,
            grid: s.grid.unwrap_or(d.grid),
            a_half: s.a_half.unwrap_or(d.a_half),
            t_end,
            out: s.out.clone(),
            format: s.format.unwrap_or(d.format),
            real: s.real.unwrap_or(d.real),
            reference: s.reference.unwrap_or(false),
            sweep,
            bound: s.bound.unwrap_or(1e-3),
            repeats: s.repeats.unwrap_or(3),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> CliResult<()> {
        if self.k_values.iter().any(|&k| k < 2) {
            return Err(config("K must be at least 2"));
        }
        if self.lambda < 2 {
            return Err(config(format!("Lambda must be at least 2, got {}", self.lambda)));
        }
        if self.kappa < 1 {
            return Err(config("kappa must be at least 1"));
        }
        if self.j < self.kappa + 1 {
            return Err(config(format!("J = {} must be at least kappa + 1 = {}", self.j, self.kappa + 1)));
        }
        if self.workers < 1 {
            return Err(config("workers must be at least 1"));
        }
        if self.repeats < 1 {
            return Err(config("repeats must be at least 1"));
        }
        if !(self.bound > 0.0) {
            return Err(config(format!("bound must be positive, got {}", self.bound)));
        }
        match self.experiment {
            Experiment::Subdiffusion if self.grid < 8 => {
                Err(config(format!("grid must be at least 8, got {}", self.grid)))
            }
            Experiment::Schrodinger if self.grid < 3 => {
                Err(config(format!("grid must be at least 3, got {}", self.grid)))
            }
            Experiment::Schrodinger if self.real => Err(config("the Schrodinger problem is complex; use --complex")),
            _ => Ok(()),
        }
    }

    pub fn config_for(&self, stages: usize, k: usize, h: f64, steps: usize) -> CliResult<rkcq::fastcq::CQConfig> {
        let tableau = rkcq::tableau::radau_iia(stages)?;
        let mut c = rkcq::fastcq::CQConfig::new(tableau, h, steps);
        c.k = k;
        c.lambda = self.lambda;
        c.kappa = self.kappa;
        c.j = self.j;
        c.real_input = self.real;
        c.workers = self.workers;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = Settings::from_config_text("# run\nK = 10\nalpha=0.25\n\nmethod=radau3 # two stages\n").unwrap();
        let mut flags = Settings::default();
        flags.set("K", "30").unwrap();
        let s = file.overlay(flags);
        assert_eq!(s.k, Some(30));
        assert_eq!(s.alpha, Some(0.25));
        assert_eq!(s.method, Some(2));
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert!(matches!(Settings::from_config_text("gamma=1"), Err(CliError::Config(_))));
        assert!(matches!(Settings::from_config_text("K"), Err(CliError::Config(_))));
        assert!(matches!(Settings::from_config_text("K=ten"), Err(CliError::Config(_))));
        assert!(matches!(Settings::from_config_text("method=rk4"), Err(CliError::Config(_))));
    }

    #[test]
    fn ladder_must_reach_t_end() {
        let mut s = Settings::default();
        s.h = Some(0.3);
        assert!(RunSpec::resolve(Experiment::Convergence, &s).is_err());
        s.h = Some(0.25);
        let r = RunSpec::resolve(Experiment::Convergence, &s).unwrap();
        assert_eq!(r.steps, 40);
        s.steps = Some(41);
        assert!(RunSpec::resolve(Experiment::Convergence, &s).is_err());
    }

    #[test]
    fn defaults_per_experiment() {
        let s = Settings::default();
        let c = RunSpec::resolve(Experiment::Convergence, &s).unwrap();
        assert_eq!((c.steps, c.k_values.clone(), c.methods.clone()), (10240, vec![10, 25], vec![1, 2, 3]));
        let d = RunSpec::resolve(Experiment::Subdiffusion, &s).unwrap();
        assert_eq!((d.grid, d.kappa, d.j, d.format), (16, 12, 14, Format::Json));
        let q = RunSpec::resolve(Experiment::Schrodinger, &s).unwrap();
        assert!(!q.real);
        assert!((q.h - 0.00025).abs() < 1e-15);
    }

    #[test]
    fn invariants_checked_before_running() {
        let mut s = Settings::default();
        s.j = Some(5);
        assert!(RunSpec::resolve(Experiment::Weights, &s).is_err());
        let mut s = Settings::default();
        s.alpha = Some(0.75);
        assert!(RunSpec::resolve(Experiment::Convergence, &s).is_err());
        let mut s = Settings::default();
        s.real = Some(true);
        assert!(RunSpec::resolve(Experiment::Schrodinger, &s).is_err());
    }
}
