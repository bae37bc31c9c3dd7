//! Ensemble benchmarks: relaxation-to-heuristic ratios and branch-and-bound
//! node counts, written as CSV with a trailing row of means.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnb::{backward_greedy, solve, BnbConfig, BoundMode};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::relax_cont::{solve_dual, ContOptions};
use crate::relax_diag::{solve_diag_relaxation, DiagOptions};

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "SPARSE_ELLIPSOID_THREADS";

pub const CSV_HEADER: [&str; 14] = [
    "instance_id",
    "class",
    "n",
    "kappa_or_a",
    "heuristic_cost",
    "bound_cont",
    "bound_diag",
    "r_c",
    "r_d",
    "nodes_bb",
    "nodes_bbc",
    "nodes_bbd",
    "time_bbc_s",
    "time_bbd_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ratios,
    Bnb,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub mode: Mode,
    /// Also run branch and bound without relaxations.
    pub with_plain_bb: bool,
    pub relax_min_dim: usize,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { mode: Mode::Ratios, with_plain_bb: false, relax_min_dim: 20, node_limit: None, time_limit: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance_id: String,
    pub class: String,
    pub n: usize,
    pub kappa_or_a: Option<f64>,
    pub heuristic_cost: Option<usize>,
    pub bound_cont: Option<usize>,
    pub bound_diag: Option<usize>,
    pub r_c: Option<f64>,
    pub r_d: Option<f64>,
    pub nodes_bb: Option<usize>,
    pub nodes_bbc: Option<usize>,
    pub nodes_bbd: Option<usize>,
    pub time_bbc_s: Option<f64>,
    pub time_bbd_s: Option<f64>,
}

/// One benchmark input: an id, a class label and the instance.
#[derive(Debug, Clone)]
pub struct BenchItem {
    pub id: String,
    pub class: String,
    pub parameter: Option<f64>,
    pub instance: Instance,
}

fn ratio(bound: usize, cost: usize) -> f64 {
    if cost == 0 {
        1.0
    } else {
        bound as f64 / cost as f64
    }
}

/// Greedy cost and both relaxation bounds, each after preprocessing.
pub fn ratio_record(item: &BenchItem) -> Result<BenchRecord> {
    let sub = item.instance.preprocess()?;
    let base = sub.base_cost();
    let (h, bc, bd) = match &sub.instance {
        None => (base, base, base),
        Some(r) => {
            let h = base + backward_greedy(r)?.min_card;
            let bc = base + solve_dual(r, &ContOptions::default())?.lower_bound;
            let bd = base + solve_diag_relaxation(r, &DiagOptions::default())?.lower_bound;
            (h, bc, bd)
        }
    };
    Ok(BenchRecord {
        heuristic_cost: Some(h),
        bound_cont: Some(bc),
        bound_diag: Some(bd),
        r_c: Some(ratio(bc, h)),
        r_d: Some(ratio(bd, h)),
        ..base_record(item)
    })
}

fn base_record(item: &BenchItem) -> BenchRecord {
    BenchRecord {
        instance_id: item.id.clone(),
        class: item.class.clone(),
        n: item.instance.n(),
        kappa_or_a: item.parameter,
        ..Default::default()
    }
}

/// Node counts for branch and bound with each relaxation; the optima must agree.
pub fn bnb_record(item: &BenchItem, opts: &BenchOptions) -> Result<BenchRecord> {
    let run = |mode: BoundMode| -> Result<(usize, usize, f64)> {
        let cfg = BnbConfig {
            relax_min_dim: opts.relax_min_dim,
            node_limit: opts.node_limit,
            time_limit: opts.time_limit,
            ..BnbConfig::with_bound(mode)
        };
        let t = Instant::now();
        let r = solve(&item.instance, &cfg)?;
        if !r.proven_optimal {
            return Err(Error::InvalidInput(format!("{mode:?} search hit its limit")));
        }
        Ok((r.min_card, r.nodes_explored, t.elapsed().as_secs_f64()))
    };
    let (opt_c, nodes_c, time_c) = run(BoundMode::Cont)?;
    let (opt_d, nodes_d, time_d) = run(BoundMode::Diag)?;
    let plain = if opts.with_plain_bb { Some(run(BoundMode::None)?) } else { None };
    if opt_c != opt_d || plain.is_some_and(|p| p.0 != opt_c) {
        return Err(Error::InvalidInput(format!("optima disagree on {}", item.id)));
    }
    Ok(BenchRecord {
        heuristic_cost: Some(backward_greedy(&item.instance)?.min_card),
        nodes_bb: plain.map(|p| p.1),
        nodes_bbc: Some(nodes_c),
        nodes_bbd: Some(nodes_d),
        time_bbc_s: Some(time_c),
        time_bbd_s: Some(time_d),
        ..base_record(item)
    })
}

/// Runs every item on a worker pool sized from [`THREADS_ENV`]. Results keep
/// the input order; failures are returned alongside the item id.
pub fn run(items: &[BenchItem], opts: &BenchOptions) -> Vec<std::result::Result<BenchRecord, (String, Error)>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let r = match opts.mode {
                    Mode::Ratios => ratio_record(item),
                    Mode::Bnb => bnb_record(item, opts),
                };
                r.map_err(|e| (item.id.clone(), e))
            })
            .collect()
    })
}

fn mean_f(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Column means over the records, as a labeled row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub heuristic_cost: Option<f64>,
    pub bound_cont: Option<f64>,
    pub bound_diag: Option<f64>,
    pub r_c: Option<f64>,
    pub r_d: Option<f64>,
    pub nodes_bb: Option<f64>,
    pub nodes_bbc: Option<f64>,
    pub nodes_bbd: Option<f64>,
    pub time_bbc_s: Option<f64>,
    pub time_bbd_s: Option<f64>,
}

pub fn summarize(records: &[BenchRecord]) -> Summary {
    let u = |f: fn(&BenchRecord) -> Option<usize>| mean_f(records.iter().map(|r| f(r).map(|v| v as f64)));
    let f = |f: fn(&BenchRecord) -> Option<f64>| mean_f(records.iter().map(f));
    Summary {
        count: records.len(),
        heuristic_cost: u(|r| r.heuristic_cost),
        bound_cont: u(|r| r.bound_cont),
        bound_diag: u(|r| r.bound_diag),
        r_c: f(|r| r.r_c),
        r_d: f(|r| r.r_d),
        nodes_bb: u(|r| r.nodes_bb),
        nodes_bbc: u(|r| r.nodes_bbc),
        nodes_bbd: u(|r| r.nodes_bbd),
        time_bbc_s: f(|r| r.time_bbc_s),
        time_bbd_s: f(|r| r.time_bbd_s),
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header, one row per record and, when there are records, a `mean` row.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.class.clone(),
            r.n.to_string(),
            cell(r.kappa_or_a),
            cell(r.heuristic_cost),
            cell(r.bound_cont),
            cell(r.bound_diag),
            cell(r.r_c),
            cell(r.r_d),
            cell(r.nodes_bb),
            cell(r.nodes_bbc),
            cell(r.nodes_bbd),
            cell(r.time_bbc_s),
            cell(r.time_bbd_s),
        ])
        .map_err(io)?;
    }
    if !records.is_empty() {
        let s = summarize(records);
        let n = mean_f(records.iter().map(|r| Some(r.n as f64)));
        w.write_record([
            "mean".to_string(),
            String::new(),
            cell(n),
            cell(mean_f(records.iter().map(|r| r.kappa_or_a))),
            cell(s.heuristic_cost),
            cell(s.bound_cont),
            cell(s.bound_diag),
            cell(s.r_c),
            cell(s.r_d),
            cell(s.nodes_bb),
            cell(s.nodes_bbc),
            cell(s.nodes_bbd),
            cell(s.time_bbc_s),
            cell(s.time_bbd_s),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
