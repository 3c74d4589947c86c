//! Experiment results to versioned tables and JSON reports.

use rkcq::fastcq::{PhaseTimes, RunStats};
use serde_json::{json, Value};

use crate::experiments::{
    sweep_rate_per5, ConvergenceRow, Check, Snapshot, SubdiffusionReport, SweepRow, TimingEntry, WeightRow,
};
use crate::output::{num, Cell, Table};
use crate::spec::method_name;

pub const CONVERGENCE_SCHEMA: &str = "rkcq-convergence/1";
pub const SUBDIFFUSION_SCHEMA: &str = "rkcq-subdiffusion/1";
pub const SCHRODINGER_SCHEMA: &str = "rkcq-schrodinger/1";
pub const SWEEP_SCHEMA: &str = "rkcq-contour-sweep/1";
pub const WEIGHTS_SCHEMA: &str = "rkcq-weights/1";
pub const SELFTEST_SCHEMA: &str = "rkcq-selftest/1";

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Float)
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(
        CONVERGENCE_SCHEMA,
        &["method", "s", "h", "N", "K", "error_inf", "fitted_slope_so_far", "direct_only", "saturated"],
    );
    for r in rows {
        t.push(vec![
            method_name(r.stages).into(),
            r.stages.into(),
            r.h.into(),
            r.n.into(),
            r.k.into(),
            r.error.into(),
            opt(r.slope_so_far),
            r.direct_only.into(),
            r.saturated.into(),
        ]);
    }
    t
}

fn times_json(t: &PhaseTimes) -> Value {
    json!({
        "setup": num(t.setup),
        "first_block": num(t.first_block),
        "rk_marches": num(t.marches),
        "resolvent_solves": num(t.solves),
    })
}

fn stats_json(s: &RunStats) -> Value {
    json!({
        "levels": s.levels,
        "nodes_per_level": s.nodes_per_level,
        "rk_steps": s.rk_steps,
        "resolvent_solves": s.resolvent_solves,
        "first_block_solves": s.first_block_solves,
    })
}

fn entry_json(e: &TimingEntry) -> Value {
    json!({
        "N": e.n,
        "h": num(e.h),
        "workers": e.workers,
        "stats": stats_json(&e.stats),
        "median_seconds": times_json(&e.median),
        "repeat_seconds": e.repeats.iter().map(times_json).collect::<Vec<_>>(),
        "variance_flag": e.variance_flag,
        "error_inf": num(e.error),
    })
}

pub fn subdiffusion_json(r: &SubdiffusionReport, spec: Value) -> Value {
    json!({
        "schema": SUBDIFFUSION_SCHEMA,
        "spec": spec,
        "n_ladder": r.n_ladder.iter().map(entry_json).collect::<Vec<_>>(),
        "worker_ladder": r.worker_ladder.iter().map(entry_json).collect::<Vec<_>>(),
        "summary": {
            "rk_marches_exponent": num(r.march_exponent),
            "resolvent_solves_exponent": num(r.solves_exponent),
            "resolvent_solves_monotone": r.solves_monotone,
            "first_block_max_over_min": num(r.first_block_ratio),
            "rk_marches_speedup": num(r.march_speedup),
            "error_inf": num(r.error),
            "bound": num(r.bound),
            "within_bound": r.error <= r.bound,
        },
    })
}

pub fn subdiffusion_table(r: &SubdiffusionReport) -> Table {
    let mut t = Table::new(
        SUBDIFFUSION_SCHEMA,
        &[
            "ladder",
            "N",
            "h",
            "workers",
            "levels",
            "rk_steps",
            "resolvent_solves",
            "setup",
            "first_block",
            "rk_marches",
            "resolvent_solve_time",
            "variance_flag",
            "error_inf",
        ],
    );
    let rows = r
        .n_ladder
        .iter()
        .map(|e| ("steps", e))
        .chain(r.worker_ladder.iter().map(|e| ("workers", e)));
    for (kind, e) in rows {
        t.push(vec![
            kind.into(),
            e.n.into(),
            e.h.into(),
            e.workers.into(),
            e.stats.levels.into(),
            e.stats.rk_steps.into(),
            e.stats.resolvent_solves.into(),
            e.median.setup.into(),
            e.median.first_block.into(),
            e.median.marches.into(),
            e.median.solves.into(),
            e.variance_flag.into(),
            e.error.into(),
        ]);
    }
    t
}

pub fn schrodinger_table(snaps: &[Snapshot]) -> Table {
    let mut t = Table::new(SCHRODINGER_SCHEMA, &["t", "x", "abs_u", "abs_error"]);
    for s in snaps {
        for i in 0..s.x.len() {
            let err = s.error.as_ref().and_then(|e| e[i]);
            t.push(vec![s.t.into(), s.x[i].into(), s.abs_u[i].into(), opt(err)]);
        }
    }
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(SWEEP_SCHEMA, &["K", "error_inf", "ratio_per_5_nodes", "fitted_ratio_per_5_nodes"]);
    let fitted = if rows.len() >= 2 { Some(sweep_rate_per5(rows)) } else { None };
    for (i, r) in rows.iter().enumerate() {
        let ratio = (i > 0).then(|| {
            let p = &rows[i - 1];
            (r.error / p.error).powf(5.0 / (r.k as f64 - p.k as f64))
        });
        t.push(vec![r.k.into(), r.error.into(), opt(ratio), opt(fitted)]);
    }
    t
}

pub fn weights_table(rows: &[WeightRow]) -> Table {
    let mut t = Table::new(
        WEIGHTS_SCHEMA,
        &["K", "n", "nh", "level", "below_kappa", "error", "norm_direct"],
    );
    for r in rows {
        t.push(vec![
            r.k.into(),
            r.n.into(),
            r.nh.into(),
            r.level.into(),
            r.below_kappa.into(),
            r.error.into(),
            r.norm_direct.into(),
        ]);
    }
    t
}

pub fn selftest_table(checks: &[Check]) -> Table {
    let mut t = Table::new(SELFTEST_SCHEMA, &["check", "pass", "detail"]);
    for c in checks {
        t.push(vec![c.name.into(), c.pass.into(), Cell::Text(c.detail.replace(',', ";"))]);
    }
    t
}
