//! Problem description: operator family, fractional order and a separable inhomogeneity.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::OperatorFamily;

/// Time factors `t -> (f_1(t), ..., f_R(t))` of a separable inhomogeneity.
pub type TimeFactors = Arc<dyn Fn(f64) -> Vec<Complex64> + Send + Sync>;

/// Batch form of [`TimeFactors`] for sources that share work across many times.
pub type BatchFactors = Arc<dyn Fn(&[f64]) -> Result<Vec<Vec<Complex64>>> + Send + Sync>;

/// Exact solution `t -> u(t)` for manufactured problems.
pub type ExactSolution = Arc<dyn Fn(f64) -> Vec<Complex64> + Send + Sync>;

/// Inhomogeneity in the mass-matrix form `M D^α u = A u + g`, written as
/// `g(t) = Σ_r f_r(t) v_r` with fixed spatial modes `v_r`.
#[derive(Clone)]
pub struct Source {
    modes: Vec<Vec<Complex64>>,
    factors: TimeFactors,
    batch: Option<BatchFactors>,
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Source").field("modes", &self.modes.len()).finish()
    }
}

impl Source {
    pub fn new(modes: Vec<Vec<Complex64>>, factors: TimeFactors) -> Self {
        Source {
            modes,
            factors,
            batch: None,
        }
    }

    /// Zero inhomogeneity in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Source {
            modes: vec![vec![Complex64::new(0.0, 0.0); dim]],
            factors: Arc::new(|_| vec![Complex64::new(0.0, 0.0)]),
            batch: None,
        }
    }

    /// One coordinate mode per component: `g(t) = Σ_i g_i(t) e_i`.
    pub fn componentwise(dim: usize, g: TimeFactors) -> Self {
        let modes = (0..dim)
            .map(|i| {
                let mut e = vec![Complex64::new(0.0, 0.0); dim];
                e[i] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        Source {
            modes,
            factors: g,
            batch: None,
        }
    }

    /// Attaches a batch evaluator that must agree with the pointwise factors.
    pub fn with_batch(mut self, batch: BatchFactors) -> Self {
        self.batch = Some(batch);
        self
    }

    /// Factors at every time in `times`, through the batch evaluator when present.
    pub fn factors_many(&self, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        match &self.batch {
            Some(b) => b(times),
            None => Ok(times.par_iter().map(|&t| (self.factors)(t)).collect()),
        }
    }

    pub fn modes(&self) -> &[Vec<Complex64>] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn factors_at(&self, t: f64) -> Vec<Complex64> {
        (self.factors)(t)
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        combine(&self.modes, &self.factors_at(t))
    }

    pub fn modes_are_real(&self) -> bool {
        self.modes.iter().flatten().all(|z| z.im == 0.0)
    }

    /// Adds a time-independent mode.
    pub fn with_constant(mut self, v: Vec<Complex64>) -> Self {
        let inner = Arc::clone(&self.factors);
        self.modes.push(v);
        self.factors = Arc::new(move |t| {
            let mut f = inner(t);
            f.push(Complex64::new(1.0, 0.0));
            f
        });
        if let Some(b) = self.batch.take() {
            self.batch = Some(Arc::new(move |times: &[f64]| {
                let mut rows = b(times)?;
                rows.iter_mut().for_each(|f| f.push(Complex64::new(1.0, 0.0)));
                Ok(rows)
            }));
        }
        self
    }
}

/// `Σ_r coeffs[r] modes[r]`.
pub fn combine(modes: &[Vec<Complex64>], coeffs: &[Complex64]) -> Vec<Complex64> {
    let dim = modes.first().map_or(0, Vec::len);
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (v, &c) in modes.iter().zip(coeffs) {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// Time factors sampled at every stage time `t_n + c_i h`, `n < steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTable {
    steps: usize,
    stages: usize,
    modes: usize,
    h: f64,
    data: Vec<Complex64>,
}

impl StageTable {
    /// Samples the source factors at `t_n + c_i h`; runs in the current rayon pool.
    pub fn build(source: &Source, steps: usize, h: f64, nodes: &[f64]) -> Result<Self> {
        let stages = nodes.len();
        let modes = source.mode_count();
        let times: Vec<f64> = (0..steps * stages)
            .map(|idx| ((idx / stages) as f64 + nodes[idx % stages]) * h)
            .collect();
        let rows = source.factors_many(&times)?;
        let mut data = Vec::with_capacity(steps * stages * modes);
        for row in rows {
            if row.len() != modes {
                return Err(Error::Config(format!(
                    "time factor function returned {} values for {modes} modes",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(StageTable {
            steps,
            stages,
            modes,
            h,
            data,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Factor `f_r(t_n + c_i h)`.
    #[inline]
    pub fn get(&self, n: usize, stage: usize, mode: usize) -> Complex64 {
        self.data[(n * self.stages + stage) * self.modes + mode]
    }

    /// Factors of step `n` as a `stages x modes` row-major slice.
    #[inline]
    pub fn step(&self, n: usize) -> &[Complex64] {
        let w = self.stages * self.modes;
        &self.data[n * w..(n + 1) * w]
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

/// `M D^α u = A u + g`, `u(0) = u0`.
#[derive(Clone)]
pub struct Problem {
    pub family: Arc<dyn OperatorFamily>,
    pub alpha: f64,
    pub source: Source,
    pub u_exact: Option<ExactSolution>,
    pub u0: Option<Vec<Complex64>>,
    pub description: String,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("dim", &self.family.dim())
            .field("alpha", &self.alpha)
            .field("source", &self.source)
            .field("has_exact", &self.u_exact.is_some())
            .field("description", &self.description)
            .finish()
    }
}

impl Problem {
    pub fn new(family: Arc<dyn OperatorFamily>, alpha: f64, source: Source) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("fractional order must lie in (0, 1], got {alpha}")));
        }
        if source.modes().iter().any(|v| v.len() != family.dim()) {
            return Err(Error::Config("source mode length differs from operator dimension".into()));
        }
        Ok(Problem {
            family,
            alpha,
            source,
            u_exact: None,
            u0: None,
            description: String::new(),
        })
    }

    pub fn with_exact(mut self, u: ExactSolution) -> Self {
        self.u_exact = Some(u);
        self
    }

    pub fn with_initial(mut self, u0: Vec<Complex64>) -> Self {
        self.u0 = Some(u0);
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Real operator and real spatial modes (time factors are checked per table).
    pub fn admits_real_reduction(&self) -> bool {
        self.family.is_real() && self.source.modes_are_real()
    }

    pub fn has_nonzero_initial(&self) -> bool {
        self.u0
            .as_ref()
            .is_some_and(|u| u.iter().any(|z| *z != Complex64::new(0.0, 0.0)))
    }

    /// `G_n = (g(t_n + c_k h))_{k=1..s}` stacked stage by stage.
    pub fn g_stage(&self, n: usize, nodes: &[f64], h: f64) -> Vec<Complex64> {
        nodes
            .iter()
            .flat_map(|&c| self.source.eval((n as f64 + c) * h))
            .collect()
    }
}

/// A zero-initial problem together with the shift that recovers the original solution.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub problem: Problem,
    pub u0: Vec<Complex64>,
}

impl TransformedProblem {
    /// `v = u + u0`.
    pub fn reconstruct(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter().zip(&self.u0).map(|(a, b)| a + b).collect()
    }
}

/// Rewrites `M D^α v = A v + g`, `v(0) = u0` as the zero-initial problem for
/// `u = v - u0`, whose inhomogeneity gains the constant mode `A u0`.
pub fn transform_initial(problem: &Problem) -> Result<TransformedProblem> {
    let dim = problem.dim();
    let u0 = problem
        .u0
        .clone()
        .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); dim]);
    if u0.len() != dim {
        return Err(Error::Config(format!(
            "initial value has length {}, expected {dim}",
            u0.len()
        )));
    }
    let mut p = problem.clone();
    p.u0 = None;
    if u0.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
        let au0 = problem.family.apply_operator(&u0);
        p.source = p.source.with_constant(au0);
        if let Some(exact) = problem.u_exact.clone() {
            let shift = u0.clone();
            p.u_exact = Some(Arc::new(move |t| {
                exact(t).iter().zip(&shift).map(|(a, b)| a - b).collect()
            }));
        }
    }
    Ok(TransformedProblem { problem: p, u0 })
}
