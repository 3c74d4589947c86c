//! Runge-Kutta convolution quadrature: the direct circle-integral evaluation and the
//! fast algorithm that splits the convolution sum over hyperbolic contours.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::contour::{mu_level, right_of_hyperbola, select_parameters, ContourLevel, ContourParams, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::operators::OperatorFamily;
use crate::problem::{combine, Problem, StageTable};
use crate::smallmat::{eig_small, pow_principal, power_alpha, CMat, EigDecomp};
use crate::tableau::Tableau;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default contour angle as a fraction of the family's θ₁.
pub const THETA_FRACTION: f64 = 0.99;

/// Parameters of one convolution quadrature run.
#[derive(Debug, Clone, PartialEq)]
pub struct CQConfig {
    pub tableau: Tableau,
    pub h: f64,
    /// Number of time steps `N`; the solution is computed at `t = N h`.
    pub steps: usize,
    /// Contour nodes per level are `k = -K..=K`.
    pub k: usize,
    pub lambda: u32,
    pub kappa: usize,
    /// Circle quadrature points for the first block.
    pub j: usize,
    /// Circle radius; `None` selects `eps^{1/(2J)}`.
    pub rho_circle: Option<f64>,
    /// Contour angle; `None` selects `0.99 θ₁`.
    pub theta: Option<f64>,
    /// Sum conjugate contour nodes in pairs and return a real result.
    pub real_input: bool,
    pub workers: usize,
}

impl CQConfig {
    pub fn new(tableau: Tableau, h: f64, steps: usize) -> Self {
        CQConfig {
            tableau,
            h,
            steps,
            k: 25,
            lambda: DEFAULT_LAMBDA,
            kappa: 20,
            j: 160,
            rho_circle: None,
            theta: None,
            real_input: false,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho_circle
            .unwrap_or_else(|| f64::EPSILON.powf(1.0 / (2.0 * self.j as f64)))
    }

    pub fn theta_for(&self, family: &dyn OperatorFamily) -> f64 {
        self.theta.unwrap_or(THETA_FRACTION * family.theta1_hint())
    }

    /// Checks the invariants that do not depend on the problem data.
    pub fn validate(&self, family: &dyn OperatorFamily) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.steps < 1 {
            return bad("N must be at least 1".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if self.k < 2 {
            return bad(format!("K must be at least 2, got {}", self.k));
        }
        if self.lambda < 2 {
            return bad(format!("Lambda must be at least 2, got {}", self.lambda));
        }
        if self.kappa < 1 {
            return bad(format!("kappa must be at least 1, got {}", self.kappa));
        }
        if self.j < self.kappa + 1 {
            return bad(format!("J = {} must be at least kappa + 1 = {}", self.j, self.kappa + 1));
        }
        let rho = self.rho();
        if !(rho > 0.0 && rho < 1.0) {
            return bad(format!("circle radius must lie in (0, 1), got {rho}"));
        }
        if self.workers < 1 {
            return bad("workers must be at least 1".into());
        }
        let th1 = family.theta1_hint();
        let theta = self.theta_for(family);
        if !(theta > 0.0 && theta < th1) {
            return bad(format!("contour angle {theta} must lie in (0, θ₁ = {th1})"));
        }
        if !self.tableau.check_assumptions().all_pass() {
            return bad(format!("tableau {} violates the CQ assumptions", self.tableau.name()));
        }
        Ok(())
    }
}

/// Level boundaries `m₀ < m₁ < ... < m_L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPlan {
    pub levels: usize,
    pub m: Vec<usize>,
}

impl LevelPlan {
    /// Steps `[N - m_ℓ, N - m_{ℓ-1})` marched on level `ℓ >= 1`.
    pub fn window(&self, ell: usize, n: usize) -> (usize, usize) {
        (n - self.m[ell], n - self.m[ell - 1])
    }
}

/// `m_ℓ = Λ^ℓ (κ+1)` for `ℓ < L`, `m_L = N`, with `L` the smallest integer such that `N <= Λ^L (κ+1)`.
pub fn plan_levels(n: usize, kappa: usize, lambda: u32) -> LevelPlan {
    let m0 = kappa + 1;
    let mut m = vec![m0];
    if n <= m0 {
        return LevelPlan { levels: 0, m };
    }
    let mut next = m0;
    loop {
        next = next.saturating_mul(lambda as usize);
        if n <= next {
            m.push(n);
            break;
        }
        m.push(next);
    }
    LevelPlan {
        levels: m.len() - 1,
        m,
    }
}

/// Wall-clock seconds spent in each phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub setup: f64,
    pub first_block: f64,
    pub marches: f64,
    pub solves: f64,
}

/// Work counters and timings of one fast solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub levels: usize,
    pub nodes_per_level: usize,
    pub rk_steps: usize,
    pub resolvent_solves: usize,
    pub first_block_solves: usize,
    pub times: PhaseTimes,
}

/// Applies the tableau's RK method to `y' = λ y + f_r(t)` for every mode `r`,
/// starting from zero before step `from` and stopping before step `to`.
/// Returns the value after step `to - 1` for each mode.
pub fn rk_march_scalar(
    lambda: Complex64,
    table: &StageTable,
    from: usize,
    to: usize,
    tableau: &Tableau,
    h: f64,
) -> Result<Vec<Complex64>> {
    let s = tableau.stages();
    let modes = table.modes();
    if to > table.steps() || from > to {
        return Err(Error::Config(format!(
            "march window [{from}, {to}) outside the {} sampled steps",
            table.steps()
        )));
    }
    let z = lambda * h;
    // last row of (Id - zA)^{-1}: the new value of a stiffly accurate method
    let inv = tableau
        .stage_matrix(z)
        .inverse()
        .map_err(|_| Error::Pole { z })?;
    let last: Vec<Complex64> = inv.row(s - 1).to_vec();
    let row_sum: Complex64 = last.iter().sum();
    // e_s^T (Id - zA)^{-1} h A, applied to the stage samples
    let ha: Vec<Complex64> = (0..s)
        .map(|j| (0..s).map(|i| last[i] * tableau.a[i][j]).sum::<Complex64>() * h)
        .collect();
    let mut y = vec![ZERO; modes];
    for n in from..to {
        let g = table.step(n);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = row_sum * *yr;
            for (i, hai) in ha.iter().enumerate() {
                acc += hai * g[i * modes + r];
            }
            *yr = acc;
        }
    }
    Ok(y)
}

/// Block-diagonalization of `Δ(ζ)/h` and the powered eigenvalues.
struct CirclePoint {
    eig: EigDecomp,
    nu: Vec<Complex64>,
}

fn circle_point(tableau: &Tableau, zeta: Complex64, h: f64, alpha: f64) -> Result<CirclePoint> {
    let attempt = |z: Complex64| -> Result<CirclePoint> {
        let b = tableau.delta(z)?.scale(Complex64::new(1.0 / h, 0.0));
        let eig = eig_small(&b)?;
        let nu = power_alpha(&eig.d, alpha)?;
        Ok(CirclePoint { eig, nu })
    };
    match attempt(zeta) {
        Err(Error::Decomposition(_) | Error::BranchCut { .. }) => attempt(zeta * (1.0 + 1e-9)),
        other => other,
    }
}

/// `Σ_{n<terms} hW_n G_{last-n}` by the trapezoidal rule on `|ζ| = ρ` with `points` nodes.
#[allow(clippy::too_many_arguments)]
fn circle_block(
    family: &dyn OperatorFamily,
    modes: &[Vec<Complex64>],
    table: &StageTable,
    tableau: &Tableau,
    alpha: f64,
    h: f64,
    terms: usize,
    last: usize,
    points: usize,
    rho: f64,
) -> Result<Vec<Complex64>> {
    let s = tableau.stages();
    let nm = table.modes();
    let dim = family.dim();
    if terms > points {
        return Err(Error::Config(format!("{terms} terms need at least as many circle points, got {points}")));
    }
    // F̂[(i, r)][j] = Σ_n ρ^{-n}/J f_r(t_{last-n} + c_i h) e^{-2πinj/J}
    let fft = FftPlanner::new().plan_fft_forward(points);
    let mut fhat = vec![vec![ZERO; points]; s * nm];
    for i in 0..s {
        for r in 0..nm {
            let buf = &mut fhat[i * nm + r];
            let mut w = 1.0 / points as f64;
            for (n, slot) in buf.iter_mut().take(terms).enumerate() {
                *slot = table.get(last - n, i, r) * w;
                w /= rho;
            }
            fft.process(buf);
        }
    }
    let parts: Vec<Vec<Complex64>> = (0..points)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let zeta = Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * j as f64 / points as f64);
            let cp = circle_point(tableau, zeta, h, alpha)?;
            let mut acc = vec![ZERO; dim];
            for l in 0..s {
                let coeffs: Vec<Complex64> = (0..nm)
                    .map(|r| (0..s).map(|i| cp.eig.u_inv[(l, i)] * fhat[i * nm + r][j]).sum())
                    .collect();
                let x = family.solve(cp.nu[l], &combine(modes, &coeffs))?;
                let u = cp.eig.u[(s - 1, l)];
                acc.iter_mut().zip(&x).for_each(|(a, xi)| *a += u * xi);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![ZERO; dim];
    for p in &parts {
        out.iter_mut().zip(p).for_each(|(o, v)| *o += v);
    }
    Ok(out)
}

fn real_part(v: &mut [Complex64]) {
    v.iter_mut().for_each(|z| z.im = 0.0);
}

fn check_zero_initial(problem: &Problem) -> Result<()> {
    if problem.has_nonzero_initial() {
        return Err(Error::Config(
            "nonzero initial value: apply transform_initial before solving".into(),
        ));
    }
    Ok(())
}

fn check_real(problem: &Problem, table: &StageTable, config: &CQConfig) -> Result<()> {
    if config.real_input && !(problem.admits_real_reduction() && table.is_real()) {
        return Err(Error::Config("real mode requested for complex operator or data".into()));
    }
    Ok(())
}

/// Requires the poles `σ(A⁻¹)/h` of `r(hλ)` to lie right of every level's hyperbola.
pub fn check_poles(tableau: &Tableau, h: f64, mus: &[f64], phi: f64) -> Result<()> {
    for ev in tableau.a_eigenvalues()? {
        let pole = 1.0 / (ev * h);
        for &mu in mus {
            if !right_of_hyperbola(pole, mu, phi) {
                return Err(Error::Config(format!(
                    "Runge-Kutta pole {pole} lies left of the contour with μ = {mu}"
                )));
            }
        }
    }
    Ok(())
}

/// Contour parameters and the hyperbolas of every level of `plan`.
pub fn plan_contours(
    config: &CQConfig,
    family: &dyn OperatorFamily,
    plan: &LevelPlan,
) -> Result<(ContourParams, Vec<ContourLevel>)> {
    let params = select_parameters(config.k, config.lambda, config.theta_for(family), f64::EPSILON)?;
    let levels = (1..=plan.levels)
        .map(|ell| {
            let mu = mu_level(ell as u32, config.h, config.kappa, &params)?;
            Ok(ContourLevel::new(ell as u32, mu, &params))
        })
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<f64> = levels.iter().map(|l| l.mu).collect();
    check_poles(&config.tableau, config.h, &mus, params.phi)?;
    Ok((params, levels))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))
}

/// Fast evaluation of `u_N` with `O(N)` scalar RK steps and `O(log N)` resolvent solves per node.
pub fn fast_solve(problem: &Problem, config: &CQConfig) -> Result<(Vec<Complex64>, RunStats)> {
    let family = problem.family.as_ref();
    config.validate(family)?;
    check_zero_initial(problem)?;
    let n = config.steps;
    let plan = plan_levels(n, config.kappa, config.lambda);
    let (_, levels) = plan_contours(config, family, &plan)?;
    pool(config.workers)?.install(|| fast_solve_in_pool(problem, config, &plan, &levels))
}

fn fast_solve_in_pool(
    problem: &Problem,
    config: &CQConfig,
    plan: &LevelPlan,
    levels: &[ContourLevel],
) -> Result<(Vec<Complex64>, RunStats)> {
    let family = problem.family.as_ref();
    let (n, h, tab) = (config.steps, config.h, &config.tableau);
    let modes = problem.source.modes();
    let mut times = PhaseTimes::default();

    let clock = Instant::now();
    let table = StageTable::build(&problem.source, n, h, &tab.c)?;
    check_real(problem, &table, config)?;
    times.setup = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let terms = if plan.levels == 0 { n } else { config.kappa + 1 };
    let mut u = circle_block(
        family,
        modes,
        &table,
        tab,
        problem.alpha,
        h,
        terms,
        n - 1,
        config.j,
        config.rho(),
    )?;
    times.first_block = clock.elapsed().as_secs_f64();

    let k = config.k as i64;
    let node_range: Vec<i64> = if config.real_input { (0..=k).collect() } else { (-k..=k).collect() };
    let tasks: Vec<(usize, i64)> = (1..=plan.levels)
        .flat_map(|ell| node_range.iter().map(move |&kk| (ell, kk)))
        .collect();

    let clock = Instant::now();
    let marched: Vec<Vec<Complex64>> = tasks
        .par_iter()
        .map(|&(ell, kk)| {
            let node = levels[ell - 1].node(kk);
            let (from, to) = plan.window(ell, n);
            rk_march_scalar(node.lambda, &table, from, to, tab, h).map_err(|e| e.at_node(ell, kk))
        })
        .collect::<Result<_>>()?;
    times.marches = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let terms: Vec<Vec<Complex64>> = tasks
        .par_iter()
        .zip(&marched)
        .map(|(&(ell, kk), y)| -> Result<Vec<Complex64>> {
            let node = levels[ell - 1].node(kk);
            let annotate = |e: Error| e.at_node(ell, kk);
            let nu = pow_principal(node.lambda, problem.alpha).map_err(annotate)?;
            let x = family.solve(nu, &combine(modes, y)).map_err(annotate)?;
            let r = tab.stability(node.lambda * h).map_err(annotate)?.r;
            let mut c = node.weight * r.powu(plan.m[ell - 1] as u32);
            if config.real_input && kk > 0 {
                c *= 2.0;
            }
            Ok(x.iter().map(|xi| c * xi).collect())
        })
        .collect::<Result<_>>()?;
    times.solves = clock.elapsed().as_secs_f64();

    for t in &terms {
        u.iter_mut().zip(t).for_each(|(a, b)| *a += b);
    }
    if config.real_input {
        real_part(&mut u);
    }
    let nodes = node_range.len();
    let stats = RunStats {
        levels: plan.levels,
        nodes_per_level: nodes,
        rk_steps: nodes * (plan.m[plan.levels] - plan.m[0]) * usize::from(plan.levels > 0),
        resolvent_solves: plan.levels * nodes,
        first_block_solves: tab.stages() * config.j,
        times,
    };
    Ok((u, stats))
}

/// Circle size used by the direct method for `n` steps: `J = max(4n, 256)`, `ρ^J = √eps`.
pub fn direct_circle(n: usize) -> (usize, f64) {
    let j = (4 * n).max(256);
    (j, f64::EPSILON.powf(1.0 / (2.0 * j as f64)))
}

/// Direct convolution quadrature at the step indices in `indices` (each in `1..=N`),
/// every one evaluated from all of its weights by one circle quadrature.
pub fn direct_trajectory(problem: &Problem, config: &CQConfig, indices: &[usize]) -> Result<Vec<Vec<Complex64>>> {
    let family = problem.family.as_ref();
    check_zero_initial(problem)?;
    let n = indices.iter().copied().max().unwrap_or(0);
    if n == 0 || indices.contains(&0) {
        return Err(Error::Config("step indices must lie in 1..=N".into()));
    }
    if !(config.h > 0.0) {
        return Err(Error::Config(format!("h must be positive, got {}", config.h)));
    }
    let (points, rho) = direct_circle(n);
    pool(config.workers)?.install(|| {
        let table = StageTable::build(&problem.source, n, config.h, &config.tableau.c)?;
        check_real(problem, &table, config)?;
        indices
            .iter()
            .map(|&m| {
                let mut u = circle_block(
                    family,
                    problem.source.modes(),
                    &table,
                    &config.tableau,
                    problem.alpha,
                    config.h,
                    m,
                    m - 1,
                    points,
                    rho,
                )?;
                if config.real_input {
                    real_part(&mut u);
                }
                Ok(u)
            })
            .collect()
    })
}

/// Direct convolution quadrature for `u_N`.
pub fn direct_cq(problem: &Problem, config: &CQConfig) -> Result<Vec<Complex64>> {
    Ok(direct_trajectory(problem, config, &[config.steps])?.remove(0))
}

/// Weights `w_n = (e_sᵀ ⊗ Id) W_n`, `n < count`, as `dim x (s dim)` matrices with
/// column block `i` acting on stage `i`. Intended for small dense families.
pub fn direct_weights(
    family: &dyn OperatorFamily,
    tableau: &Tableau,
    alpha: f64,
    h: f64,
    count: usize,
) -> Result<Vec<CMat>> {
    let s = tableau.stages();
    let dim = family.dim();
    let (points, rho) = direct_circle(count);
    let width = s * dim;
    // per circle point, the last block row of (Δ(ζ_j)/h)^α-resolvent, flattened
    let rows: Vec<Vec<Complex64>> = (0..points)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let zeta = Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * j as f64 / points as f64);
            let cp = circle_point(tableau, zeta, h, alpha)?;
            let mut block = vec![ZERO; dim * width];
            for l in 0..s {
                for c in 0..dim {
                    let mut e = vec![ZERO; dim];
                    e[c] = Complex64::new(1.0, 0.0);
                    let col = family.solve(cp.nu[l], &e)?;
                    for i in 0..s {
                        let f = cp.eig.u[(s - 1, l)] * cp.eig.u_inv[(l, i)];
                        for (row, v) in col.iter().enumerate() {
                            block[row * width + i * dim + c] += f * v;
                        }
                    }
                }
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let fft = FftPlanner::new().plan_fft_forward(points);
    let mut weights = vec![CMat::zeros(dim, width); count];
    let mut line = vec![ZERO; points];
    for e in 0..dim * width {
        for (j, slot) in line.iter_mut().enumerate() {
            *slot = rows[j][e];
        }
        fft.process(&mut line);
        let mut scale = 1.0 / (points as f64 * h);
        for (n, w) in weights.iter_mut().enumerate() {
            w[(e / width, e % width)] = line[n] * scale;
            scale /= rho;
        }
    }
    Ok(weights)
}

/// `w_n ≈ Σ_k ω_k r(hλ_k)^n q(hλ_k) ⊗ (λ_k^α M - A)^{-1}` on one hyperbola.
pub fn contour_weight(
    family: &dyn OperatorFamily,
    tableau: &Tableau,
    alpha: f64,
    h: f64,
    level: &ContourLevel,
    n: usize,
) -> Result<CMat> {
    let s = tableau.stages();
    let dim = family.dim();
    let mut w = CMat::zeros(dim, s * dim);
    for node in &level.nodes {
        let st = tableau.stability(node.lambda * h)?;
        let nu = pow_principal(node.lambda, alpha)?;
        let f = node.weight * st.r.powu(n as u32);
        for c in 0..dim {
            let mut e = vec![ZERO; dim];
            e[c] = Complex64::new(1.0, 0.0);
            let col = family.solve(nu, &e).map_err(|e| e.at_node(level.ell as usize, node.k))?;
            for i in 0..s {
                for (row, v) in col.iter().enumerate() {
                    w[(row, i * dim + c)] += f * st.q[i] * v;
                }
            }
        }
    }
    Ok(w)
}
