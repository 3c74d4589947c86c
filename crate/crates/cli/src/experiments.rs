//! The five experiments. Each returns plain data; see `render` for output.

use std::sync::Arc;

use num_complex::Complex64;
use rkcq::caputo::{example1_problem, example2_problem, schrodinger_problem};
use rkcq::fastcq::{
    contour_weight, direct_cq, direct_weights, fast_solve, plan_contours, plan_levels, CQConfig, PhaseTimes,
    RunStats,
};
use rkcq::operators::OperatorFamily;
use rkcq::problem::{transform_initial, Problem};

use crate::error::{CliError, CliResult};
use crate::spec::RunSpec;

/// Smallest step count kept when halving the convergence ladder.
pub const LADDER_MIN: usize = 40;
/// A local slope below this marks the onset of saturation.
pub const SATURATION_SLOPE: f64 = 0.5;

pub const REF_A_HALF: f64 = 8.0;
pub const REF_GRID: usize = 1601;
pub const REF_K: usize = 110;
pub const REF_KAPPA: usize = 60;
pub const REF_J: usize = 240;
pub const SWEEP_REF_K: usize = 120;
pub const SNAPSHOT_DT: f64 = 0.05;

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn exact_at(problem: &Problem, t: f64) -> CliResult<Vec<Complex64>> {
    let u = problem
        .u_exact
        .as_ref()
        .ok_or_else(|| CliError::Config("problem has no exact solution".into()))?;
    Ok(u(t))
}

fn preflight(cfg: &CQConfig, family: &dyn OperatorFamily) -> CliResult<()> {
    cfg.validate(family)?;
    plan_contours(cfg, family, &plan_levels(cfg.steps, cfg.kappa, cfg.lambda))?;
    Ok(())
}

// ---------------------------------------------------------------- convergence

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub stages: usize,
    pub h: f64,
    pub n: usize,
    pub k: usize,
    pub error: f64,
    /// Least-squares slope over the pre-saturation rows up to this one.
    pub slope_so_far: Option<f64>,
    pub direct_only: bool,
    pub saturated: bool,
}

/// `N_top, N_top/2, ...` down to `LADDER_MIN`, ascending.
pub fn halving_ladder(top: usize) -> Vec<usize> {
    let mut v = vec![top];
    let mut n = top;
    while n % 2 == 0 && n / 2 >= LADDER_MIN {
        n /= 2;
        v.push(n);
    }
    v.reverse();
    v
}

/// Marks saturation and fills the running slope for one series ordered by decreasing `h`.
pub fn annotate_series(rows: &mut [ConvergenceRow]) {
    let mut saturated = false;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut frozen = None;
    for i in 0..rows.len() {
        if i > 0 && !saturated {
            let local = (rows[i - 1].error / rows[i].error).ln() / (rows[i - 1].h / rows[i].h).ln();
            saturated = !(local >= SATURATION_SLOPE);
        }
        rows[i].saturated = saturated;
        if !saturated {
            xs.push(rows[i].h.ln());
            ys.push(rows[i].error.max(f64::MIN_POSITIVE).ln());
            if xs.len() >= 2 {
                frozen = Some(ls_slope(&xs, &ys));
            }
        }
        rows[i].slope_so_far = frozen;
    }
}

pub fn convergence_rows(spec: &RunSpec) -> CliResult<Vec<ConvergenceRow>> {
    let mp = example1_problem()?;
    let problem = &mp.problem;
    let ladder = halving_ladder(spec.steps);
    let mut jobs = Vec::new();
    for &s in &spec.methods {
        for &k in &spec.k_values {
            for &n in &ladder {
                let cfg = spec.config_for(s, k, spec.t_end / n as f64, n)?;
                preflight(&cfg, problem.family.as_ref())?;
                jobs.push((s, k, cfg));
            }
        }
    }
    let exact = exact_at(problem, spec.t_end)?;
    let mut rows = Vec::new();
    for (s, k, cfg) in jobs {
        let (u, stats) = fast_solve(problem, &cfg)?;
        rows.push(ConvergenceRow {
            stages: s,
            h: cfg.h,
            n: cfg.steps,
            k,
            error: max_diff(&u, &exact),
            slope_so_far: None,
            direct_only: stats.levels == 0,
            saturated: false,
        });
    }
    for chunk in rows.chunks_mut(ladder.len()) {
        annotate_series(chunk);
    }
    Ok(rows)
}

// ---------------------------------------------------------------- subdiffusion

#[derive(Debug, Clone, PartialEq)]
pub struct TimingEntry {
    pub n: usize,
    pub h: f64,
    pub workers: usize,
    pub stats: RunStats,
    pub repeats: Vec<PhaseTimes>,
    pub median: PhaseTimes,
    /// Some phase spread more than 50% of its median across repeats.
    pub variance_flag: bool,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffusionReport {
    pub n_ladder: Vec<TimingEntry>,
    pub worker_ladder: Vec<TimingEntry>,
    pub march_exponent: f64,
    pub solves_exponent: f64,
    /// Median solve time never drops by more than 10% or the repeat spread along the ladder.
    pub solves_monotone: bool,
    pub first_block_ratio: f64,
    pub march_speedup: f64,
    pub error: f64,
    pub bound: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn phase_values(t: &PhaseTimes) -> [f64; 4] {
    [t.setup, t.first_block, t.marches, t.solves]
}

pub fn median_times(reps: &[PhaseTimes]) -> PhaseTimes {
    let col = |i: usize| median(reps.iter().map(|t| phase_values(t)[i]).collect());
    PhaseTimes {
        setup: col(0),
        first_block: col(1),
        marches: col(2),
        solves: col(3),
    }
}

fn spread_flag(reps: &[PhaseTimes], med: &PhaseTimes) -> bool {
    (0..4).any(|i| {
        let vals: Vec<f64> = reps.iter().map(|t| phase_values(t)[i]).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(0.0, f64::max);
        hi - lo > 0.5 * phase_values(med)[i]
    })
}

/// Five step counts spaced by `√10` ending at `top`.
pub fn timing_ladder(top: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..5)
        .map(|i| ((top as f64) / 10f64.powf((4 - i) as f64 / 2.0)).round().max(1.0) as usize)
        .collect();
    v.dedup();
    v
}

pub fn worker_ladder(max: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut w = 1;
    while w < max {
        v.push(w);
        w *= 2;
    }
    v.push(max);
    v
}

fn timed(problem: &Problem, cfg: &CQConfig, repeats: usize, exact: &[Complex64]) -> CliResult<TimingEntry> {
    let mut reps = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let (u, stats) = fast_solve(problem, cfg)?;
        reps.push(stats.times);
        last = Some((u, stats));
    }
    let (u, stats) = last.expect("at least one repeat");
    let med = median_times(&reps);
    Ok(TimingEntry {
        n: cfg.steps,
        h: cfg.h,
        workers: cfg.workers,
        stats,
        variance_flag: spread_flag(&reps, &med),
        median: med,
        repeats: reps,
        error: max_diff(&u, exact),
    })
}

pub fn run_subdiffusion(spec: &RunSpec) -> CliResult<SubdiffusionReport> {
    let mp = example2_problem(spec.grid)?;
    let problem = &mp.problem;
    let s = spec.methods[0];
    let k = spec.k_values[0];
    let ladder = timing_ladder(spec.steps);
    let workers = worker_ladder(spec.workers);
    let mut n_cfgs = Vec::new();
    for &n in &ladder {
        let mut cfg = spec.config_for(s, k, spec.t_end / n as f64, n)?;
        cfg.workers = 1;
        preflight(&cfg, problem.family.as_ref())?;
        n_cfgs.push(cfg);
    }
    let mut w_cfgs = Vec::new();
    for &w in &workers {
        let mut cfg = spec.config_for(s, k, spec.h, spec.steps)?;
        cfg.workers = w;
        preflight(&cfg, problem.family.as_ref())?;
        w_cfgs.push(cfg);
    }
    let exact = exact_at(problem, spec.t_end)?;
    fast_solve(problem, &n_cfgs[0])?;
    let n_ladder = n_cfgs
        .iter()
        .map(|c| timed(problem, c, spec.repeats, &exact))
        .collect::<CliResult<Vec<_>>>()?;
    let worker_ladder = w_cfgs
        .iter()
        .map(|c| timed(problem, c, spec.repeats, &exact))
        .collect::<CliResult<Vec<_>>>()?;
    let log_n: Vec<f64> = n_ladder.iter().map(|e| (e.n as f64).ln()).collect();
    let exponent = |f: fn(&PhaseTimes) -> f64| {
        let ys: Vec<f64> = n_ladder.iter().map(|e| f(&e.median).max(1e-12).ln()).collect();
        if log_n.len() >= 2 {
            ls_slope(&log_n, &ys)
        } else {
            f64::NAN
        }
    };
    let fb: Vec<f64> = n_ladder.iter().map(|e| e.median.first_block).collect();
    let fb_max = fb.iter().copied().fold(0.0, f64::max);
    let fb_min = fb.iter().copied().fold(f64::INFINITY, f64::min);
    let solve_spread = |e: &TimingEntry| {
        let v: Vec<f64> = e.repeats.iter().map(|t| t.solves).collect();
        v.iter().copied().fold(0.0, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let solves_monotone = n_ladder.windows(2).all(|w| {
        let slack = (0.1 * w[0].median.solves).max(solve_spread(&w[0])).max(solve_spread(&w[1]));
        w[1].median.solves >= w[0].median.solves - slack
    });
    let first = &worker_ladder[0];
    let last = worker_ladder.last().expect("nonempty worker ladder");
    let error = last.error;
    Ok(SubdiffusionReport {
        march_exponent: exponent(|t| t.marches),
        solves_exponent: exponent(|t| t.solves),
        solves_monotone,
        first_block_ratio: fb_max / fb_min,
        march_speedup: first.median.marches / last.median.marches,
        error,
        bound: spec.bound,
        n_ladder,
        worker_ladder,
    })
}

// ---------------------------------------------------------------- schrodinger

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub abs_u: Vec<f64>,
    /// `|u - u_ref|` at points shared with the reference grid.
    pub error: Option<Vec<Option<f64>>>,
}

impl Snapshot {
    pub fn max_abs(&self) -> f64 {
        self.abs_u.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_error(&self) -> Option<f64> {
        self.error
            .as_ref()
            .map(|e| e.iter().flatten().copied().fold(0.0, f64::max))
    }
}

/// Runs the Schrödinger problem to `N` steps and returns `u_N`.
pub fn schrodinger_solution(a_half: f64, grid: usize, alpha: f64, cfg: &CQConfig) -> CliResult<Vec<Complex64>> {
    let p = schrodinger_problem(a_half, grid, alpha)?;
    let tp = transform_initial(&p)?;
    let (u, _) = fast_solve(&tp.problem, cfg)?;
    Ok(tp.reconstruct(&u))
}

/// Maps small-grid index `i` to the reference index, if it is a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub stride: usize,
    pub offset: usize,
}

impl Alignment {
    pub fn new(a_half: f64, grid: usize, ref_a_half: f64, ref_grid: usize) -> CliResult<Self> {
        let eta = 2.0 * a_half / (grid - 1) as f64;
        let ref_eta = 2.0 * ref_a_half / (ref_grid - 1) as f64;
        let ratio = ref_eta / eta;
        let off = (ref_a_half - a_half) / ref_eta;
        let near = |x: f64| (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0);
        if a_half > ref_a_half || !near(ratio) || ratio.round() < 1.0 || !near(off) {
            return Err(CliError::Config(format!(
                "grid of [-{a_half}, {a_half}] with {grid} points does not align with the reference grid \
                 of [-{ref_a_half}, {ref_a_half}] with {ref_grid} points"
            )));
        }
        Ok(Alignment {
            stride: ratio.round() as usize,
            offset: off.round() as usize,
        })
    }

    pub fn reference_index(&self, i: usize) -> Option<usize> {
        (i % self.stride == 0).then(|| self.offset + i / self.stride)
    }
}

/// Snapshot step counts `t = 0.05 m`, checked against `h`.
pub fn snapshot_steps(t_end: f64, h: f64) -> CliResult<Vec<(f64, usize)>> {
    let m = (t_end / SNAPSHOT_DT).round() as usize;
    if m == 0 || (m as f64 * SNAPSHOT_DT - t_end).abs() > 1e-9 {
        return Err(CliError::Config(format!("t-end = {t_end} is not a multiple of {SNAPSHOT_DT}")));
    }
    (1..=m)
        .map(|i| {
            let t = i as f64 * SNAPSHOT_DT;
            let n = (t / h).round() as usize;
            if n == 0 || (n as f64 * h - t).abs() > 1e-9 * t {
                return Err(CliError::Config(format!("snapshot t = {t} is not a multiple of h = {h}")));
            }
            Ok((t, n))
        })
        .collect()
}

pub fn run_schrodinger(spec: &RunSpec) -> CliResult<Vec<Snapshot>> {
    let (a, grid, alpha) = (spec.a_half, spec.grid, spec.alpha);
    let u0 = rkcq::caputo::example3_initial(grid, a)?;
    let p = schrodinger_problem(a, grid, alpha)?;
    let times = snapshot_steps(spec.t_end, spec.h)?;
    let align = if spec.reference {
        Some(Alignment::new(a, grid, REF_A_HALF, REF_GRID)?)
    } else {
        None
    };
    let ref_p = if spec.reference {
        Some(schrodinger_problem(REF_A_HALF, REF_GRID, alpha)?)
    } else {
        None
    };
    let k = spec.k_values[0];
    let mut cfgs = Vec::new();
    for &(_, n) in &times {
        let cfg = spec.config_for(spec.methods[0], k, spec.h, n)?;
        preflight(&cfg, p.family.as_ref())?;
        let rcfg = if let Some(rp) = &ref_p {
            let mut r = cfg.clone();
            r.k = REF_K;
            r.kappa = REF_KAPPA;
            r.j = REF_J;
            preflight(&r, rp.family.as_ref())?;
            Some(r)
        } else {
            None
        };
        cfgs.push((cfg, rcfg));
    }
    let eta = 2.0 * a / (grid - 1) as f64;
    let x: Vec<f64> = (0..grid).map(|i| -a + i as f64 * eta).collect();
    let mut out = vec![Snapshot {
        t: 0.0,
        x: x.clone(),
        abs_u: u0.iter().map(|z| z.norm()).collect(),
        error: align.map(|_| vec![None; grid]),
    }];
    for (&(t, _), (cfg, rcfg)) in times.iter().zip(&cfgs) {
        let u = schrodinger_solution(a, grid, alpha, cfg)?;
        let error = match (rcfg, align) {
            (Some(r), Some(al)) => {
                let ur = schrodinger_solution(REF_A_HALF, REF_GRID, alpha, r)?;
                Some(
                    (0..grid)
                        .map(|i| al.reference_index(i).map(|j| (u[i] - ur[j]).norm()))
                        .collect(),
                )
            }
            _ => None,
        };
        out.push(Snapshot {
            t,
            x: x.clone(),
            abs_u: u.iter().map(|z| z.norm()).collect(),
            error,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub error: f64,
}

/// Error of `u_N` against a run with `SWEEP_REF_K` nodes, for each `K` of the spec.
pub fn run_contour_sweep(spec: &RunSpec) -> CliResult<Vec<SweepRow>> {
    let p = schrodinger_problem(spec.a_half, spec.grid, spec.alpha)?;
    let mut cfgs = Vec::new();
    for &k in &spec.k_values {
        let cfg = spec.config_for(spec.methods[0], k, spec.h, spec.steps)?;
        preflight(&cfg, p.family.as_ref())?;
        cfgs.push(cfg);
    }
    let mut rcfg = spec.config_for(spec.methods[0], SWEEP_REF_K, spec.h, spec.steps)?;
    rcfg.k = SWEEP_REF_K;
    preflight(&rcfg, p.family.as_ref())?;
    let reference = schrodinger_solution(spec.a_half, spec.grid, spec.alpha, &rcfg)?;
    cfgs.iter()
        .map(|cfg| {
            let u = schrodinger_solution(spec.a_half, spec.grid, spec.alpha, cfg)?;
            Ok(SweepRow {
                k: cfg.k,
                error: max_diff(&u, &reference),
            })
        })
        .collect()
}

/// Geometric decay rate per +5 nodes fitted over the rows before the error stops decreasing.
pub fn sweep_rate_per5(rows: &[SweepRow]) -> f64 {
    let mut best = f64::INFINITY;
    let mut end = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.error < best {
            best = r.error;
            end = i + 1;
        }
    }
    let xs: Vec<f64> = rows[..end].iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = rows[..end].iter().map(|r| r.error.max(f64::MIN_POSITIVE).ln()).collect();
    (5.0 * ls_slope(&xs, &ys)).exp()
}

// ---------------------------------------------------------------- weights

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub k: usize,
    pub n: usize,
    pub nh: f64,
    pub level: usize,
    pub below_kappa: bool,
    pub error: f64,
    pub norm_direct: f64,
}

pub struct WeightTable {
    pub rows: Vec<WeightRow>,
    pub notices: Vec<String>,
}

fn weight_family() -> CliResult<Arc<dyn OperatorFamily>> {
    Ok(example1_problem()?.problem.family.clone())
}

/// Entry-wise max norms of the direct weights `w_0 .. w_{N-1}`.
pub fn direct_weight_norms(spec: &RunSpec) -> CliResult<Vec<f64>> {
    let family = weight_family()?;
    let cfg = spec.config_for(spec.methods[0], spec.k_values[0], spec.h, spec.steps)?;
    cfg.validate(family.as_ref())?;
    let w = direct_weights(family.as_ref(), &cfg.tableau, spec.alpha, spec.h, spec.steps)?;
    Ok(w.iter().map(|m| m.max_abs()).collect())
}

pub fn run_weights(spec: &RunSpec) -> CliResult<WeightTable> {
    let family = weight_family()?;
    let fam = family.as_ref();
    let n_total = spec.steps;
    let mut cfgs = Vec::new();
    for &k in &spec.k_values {
        let cfg = spec.config_for(spec.methods[0], k, spec.h, n_total)?;
        preflight(&cfg, fam)?;
        cfgs.push(cfg);
    }
    let plan = plan_levels(n_total, spec.kappa, spec.lambda);
    let mut notices = Vec::new();
    if plan.levels == 0 {
        notices.push(format!("N = {n_total} <= kappa + 1: no contour levels, no rows"));
        return Ok(WeightTable { rows: Vec::new(), notices });
    }
    let direct = direct_weights(fam, &cfgs[0].tableau, spec.alpha, spec.h, n_total)?;
    notices.push("n = 0 omitted: nh = 0 lies outside every contour interval".into());
    let mut rows = Vec::new();
    for cfg in &cfgs {
        let (_, levels) = plan_contours(cfg, fam, &plan)?;
        for (n, w_direct) in direct.iter().enumerate().skip(1) {
            let level = (1..=plan.levels).find(|&l| n < plan.m[l]).unwrap_or(plan.levels);
            let w = contour_weight(fam, &cfg.tableau, spec.alpha, spec.h, &levels[level - 1], n)?;
            rows.push(WeightRow {
                k: cfg.k,
                n,
                nh: n as f64 * spec.h,
                level,
                below_kappa: n < plan.m[0],
                error: w.sub(w_direct).max_abs(),
                norm_direct: w_direct.max_abs(),
            });
        }
    }
    Ok(WeightTable { rows, notices })
}

/// `‖w_n‖ ≤ C (nh)^{α-1} e^{γ nh}` fitted on `n ≤ fit_upto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityFit {
    pub c: f64,
    pub gamma: f64,
    /// Largest `‖w_n‖ / bound_n` over all `n`.
    pub worst_ratio: f64,
    pub worst_n: usize,
}

pub fn fit_stability(norms: &[f64], h: f64, alpha: f64, fit_upto: usize) -> StabilityFit {
    let scaled = |n: usize| norms[n] / (n as f64 * h).powf(alpha - 1.0);
    let fit: Vec<usize> = (1..=fit_upto.min(norms.len() - 1)).collect();
    let xs: Vec<f64> = fit.iter().map(|&n| n as f64 * h).collect();
    let ys: Vec<f64> = fit.iter().map(|&n| scaled(n).ln()).collect();
    let gamma = ls_slope(&xs, &ys).max(0.0);
    let envelope = |n: usize| scaled(n) / (gamma * n as f64 * h).exp();
    let c = fit.iter().map(|&n| envelope(n)).fold(0.0, f64::max);
    let (mut worst_ratio, mut worst_n) = (0.0, 1);
    for n in 1..norms.len() {
        let r = envelope(n) / c;
        if r > worst_ratio {
            worst_ratio = r;
            worst_n = n;
        }
    }
    StabilityFit {
        c,
        gamma,
        worst_ratio,
        worst_n,
    }
}

// ---------------------------------------------------------------- selftest

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Quick end-to-end checks on small problems.
pub fn run_selftest(spec: &RunSpec) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    let all_tableaux = (1..=3).all(|s| {
        rkcq::tableau::radau_iia(s).is_ok_and(|t| t.check_assumptions().all_pass())
    });
    checks.push(Check {
        name: "tableau_assumptions",
        pass: all_tableaux,
        detail: "Radau IIA s = 1, 2, 3".into(),
    });

    let mp = example1_problem()?;
    let mut cfg = spec.config_for(3, 25, 0.01, 500)?;
    cfg.real_input = true;
    let (fast, stats) = fast_solve(&mp.problem, &cfg)?;
    let direct = direct_cq(&mp.problem, &cfg)?;
    let diff = max_diff(&fast, &direct);
    let tol = 1e-6 * max_norm(&direct).max(1.0);
    checks.push(Check {
        name: "fast_matches_direct",
        pass: diff <= tol,
        detail: format!("dense 2x2, N = 500: {diff:.3e} <= {tol:.3e}"),
    });

    let l = stats.levels;
    let want_solves = l * (cfg.k + 1);
    let want_steps = (cfg.k + 1) * (cfg.steps - cfg.kappa - 1);
    checks.push(Check {
        name: "work_counters",
        pass: stats.resolvent_solves == want_solves && stats.rk_steps == want_steps,
        detail: format!(
            "solves {} (want {want_solves}), rk steps {} (want {want_steps})",
            stats.resolvent_solves, stats.rk_steps
        ),
    });

    let exact = exact_at(&mp.problem, 5.0)?;
    let err = max_diff(&fast, &exact);
    checks.push(Check {
        name: "manufactured_error",
        pass: err <= 1e-4,
        detail: format!("radau5, h = 0.01, t = 5: {err:.3e} <= 1e-4"),
    });

    let alpha = 0.5;
    let t = 2.0;
    let d = rkcq::caputo::caputo_oracle(|s: f64| 2.0 * s, alpha, t, 1e-12)?;
    let want = 2.0 / gamma_5_2() * t.powf(2.0 - alpha);
    checks.push(Check {
        name: "caputo_power_rule",
        pass: (d - want).abs() <= 1e-10 * want,
        detail: format!("D^0.5 t^2 at t = 2: {d:.16e}"),
    });
    Ok(checks)
}

/// Γ(5/2) = 3√π/4.
fn gamma_5_2() -> f64 {
    0.75 * std::f64::consts::PI.sqrt()
}
