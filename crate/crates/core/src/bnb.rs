//! Exact minimization by branch and bound, plus the backward greedy
//! heuristic and a brute-force reference solver for small instances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diag_exact::solve_diagonal;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::relax_cont::{solve_dual, ContOptions};
use crate::relax_diag::{solve_diag_relaxation, DiagOptions};

pub const BRUTE_FORCE_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub min_card: usize,
    /// Coordinates fixed to zero, ascending.
    pub zero_set: Vec<usize>,
    pub x: Vec<f64>,
}

/// Grows a zero set one coordinate at a time, always adding the coordinate
/// that keeps the ellipsoid form smallest, until no addition stays feasible.
pub fn backward_greedy(inst: &Instance) -> Result<Solution> {
    let n = inst.n();
    let mut p = inst.q_inv().clone();
    let mut r = inst.c().to_vec();
    let mut energy = 0.0;
    let mut in_z = vec![false; n];
    let mut zero_set = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if in_z[i] || !(p[(i, i)] > 0.0) {
                continue;
            }
            let e = energy + r[i] * r[i] / p[(i, i)];
            if best.map_or(true, |(_, b)| e < b) {
                best = Some((i, e));
            }
        }
        let Some((k, e)) = best else { break };
        if e > inst.gamma() {
            break;
        }
        energy = e;
        in_z[k] = true;
        zero_set.push(k);
        let pkk = p[(k, k)];
        let col: Vec<f64> = (0..n).map(|i| p[(i, k)]).collect();
        let rk = r[k];
        for i in 0..n {
            if in_z[i] {
                continue;
            }
            r[i] -= col[i] * rk / pkk;
            for j in 0..n {
                if !in_z[j] {
                    p[(i, j)] -= col[i] * col[j] / pkk;
                }
            }
        }
    }
    zero_set.sort_unstable();
    let x = inst.completion(&zero_set)?;
    Ok(Solution { min_card: n - zero_set.len(), zero_set, x })
}

/// Tries every zero set, largest first. Only for `n <= 20`.
pub fn brute_force(inst: &Instance) -> Result<Solution> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    for k in (0..=n).rev() {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            if inst.zero_set_feasible(&comb) {
                let x = inst.completion(&comb)?;
                return Ok(Solution { min_card: n - k, zero_set: comb, x });
            }
            if !next_combination(&mut comb, n) {
                break;
            }
        }
    }
    unreachable!("the empty zero set is always feasible")
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
pub fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in (i + 1)..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    None,
    Cont,
    Diag,
}

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub bound: BoundMode,
    /// Relaxations are skipped below this many free coordinates.
    pub relax_min_dim: usize,
    /// Only bound nodes created by fixing a coordinate to zero.
    pub relax_on_zero_branch_only: bool,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub cont: ContOptions,
    pub diag: DiagOptions,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            bound: BoundMode::None,
            relax_min_dim: 20,
            relax_on_zero_branch_only: true,
            node_limit: None,
            time_limit: None,
            cont: ContOptions::default(),
            diag: DiagOptions::default(),
        }
    }
}

impl BnbConfig {
    pub fn with_bound(bound: BoundMode) -> Self {
        BnbConfig { bound, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnbReport {
    pub min_card: usize,
    pub zero_set: Vec<usize>,
    pub x: Vec<f64>,
    pub nodes_explored: usize,
    pub relaxations_solved: usize,
    /// `(nodes explored so far, incumbent cost)` at every improvement.
    pub incumbent_history: Vec<(usize, usize)>,
    pub proven_optimal: bool,
    /// Equal to `min_card` when optimal, else the smallest open-node bound.
    pub best_lower_bound: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    zero: Vec<usize>,
    nonzero: Vec<usize>,
    bound: usize,
    depth: usize,
    seq: usize,
    from_zero: bool,
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a> {
    inst: &'a Instance,
    cfg: &'a BnbConfig,
    best: Solution,
    history: Vec<(usize, usize)>,
    nodes: usize,
    relaxations: usize,
}

impl Search<'_> {
    fn offer(&mut self, zero_set: Vec<usize>) -> Result<()> {
        let cost = self.inst.n() - zero_set.len();
        if cost < self.best.min_card {
            let mut zero_set = zero_set;
            zero_set.sort_unstable();
            let x = self.inst.completion(&zero_set)?;
            self.best = Solution { min_card: cost, zero_set, x };
            self.history.push((self.nodes, cost));
        }
        Ok(())
    }

    fn relax(&mut self, inst: &Instance) -> Option<usize> {
        let bound = match self.cfg.bound {
            BoundMode::None => return None,
            BoundMode::Cont => solve_dual(inst, &self.cfg.cont).ok()?.lower_bound,
            BoundMode::Diag => solve_diag_relaxation(inst, &self.cfg.diag).ok()?.lower_bound,
        };
        self.relaxations += 1;
        Some(bound)
    }

    /// Processes one node and returns its children.
    fn expand(&mut self, node: Node, seq: &mut usize) -> Result<Vec<Node>> {
        let mut nonzero = node.nonzero.clone();
        let sub = loop {
            let sub = match self.inst.reduce(&node.zero, &nonzero) {
                Ok(s) => s,
                Err(Error::Infeasible { .. }) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            let forced = sub.instance.as_ref().map(|i| i.margin_report().forced).unwrap_or_default();
            if forced.is_empty() {
                break sub;
            }
            nonzero.extend(sub.lift_indices(&forced));
            nonzero.sort_unstable();
        };
        let base = sub.base_cost();
        let mut bound = node.bound.max(base);
        if bound >= self.best.min_card {
            return Ok(Vec::new());
        }
        let Some(local) = sub.instance.as_ref() else {
            self.offer(node.zero.clone())?;
            return Ok(Vec::new());
        };
        let with_local = |local_zero: &[usize]| {
            let mut z = node.zero.clone();
            z.extend(sub.lift_indices(local_zero));
            z
        };
        if local.q().is_diagonal() {
            let exact = solve_diagonal(&local.q().diag(), local.c(), local.gamma())?;
            self.offer(with_local(&exact.zero_set))?;
            return Ok(Vec::new());
        }
        let greedy = backward_greedy(local)?;
        self.offer(with_local(&greedy.zero_set))?;
        if bound >= self.best.min_card {
            return Ok(Vec::new());
        }
        let wants_relaxation = self.cfg.bound != BoundMode::None
            && sub.free_dim() >= self.cfg.relax_min_dim
            && (node.from_zero || !self.cfg.relax_on_zero_branch_only);
        if wants_relaxation {
            if let Some(b) = self.relax(local) {
                bound = bound.max(base + b);
                if bound >= self.best.min_card {
                    return Ok(Vec::new());
                }
            }
        }
        let margins = local.single_zero_margins();
        let mut pick = 0;
        for (i, &m) in margins.iter().enumerate() {
            if m < margins[pick] {
                pick = i;
            }
        }
        let branch = sub.free[pick];
        let mut children = Vec::with_capacity(2);
        if margins[pick] > 0.0 {
            let mut zero = node.zero.clone();
            zero.push(branch);
            zero.sort_unstable();
            *seq += 1;
            children.push(Node {
                zero,
                nonzero: nonzero.clone(),
                bound,
                depth: node.depth + 1,
                seq: *seq,
                from_zero: true,
            });
        }
        let mut nz = nonzero;
        nz.push(branch);
        nz.sort_unstable();
        let nz_bound = bound.max(base + 1);
        if nz_bound < self.best.min_card {
            *seq += 1;
            children.push(Node {
                zero: node.zero.clone(),
                nonzero: nz,
                bound: nz_bound,
                depth: node.depth + 1,
                seq: *seq,
                from_zero: false,
            });
        }
        Ok(children)
    }
}

/// Best-first branch and bound. The frontier is ordered by lower bound,
/// then depth (deeper first), then creation order.
pub fn solve(inst: &Instance, cfg: &BnbConfig) -> Result<BnbReport> {
    let start = Instant::now();
    let n = inst.n();
    let support: Vec<usize> = (0..n).filter(|&i| inst.c()[i] == 0.0).collect();
    let initial = Solution { min_card: n - support.len(), zero_set: support, x: inst.c().to_vec() };
    let mut search = Search {
        inst,
        cfg,
        history: vec![(0, initial.min_card)],
        best: initial,
        nodes: 0,
        relaxations: 0,
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node { zero: vec![], nonzero: vec![], bound: 0, depth: 0, seq, from_zero: false });
    let mut proven = true;
    while let Some(top) = heap.peek() {
        if top.bound >= search.best.min_card {
            heap.clear();
            break;
        }
        let hit_nodes = cfg.node_limit.is_some_and(|l| search.nodes >= l);
        let hit_time = cfg.time_limit.is_some_and(|l| start.elapsed() >= l);
        if hit_nodes || hit_time {
            proven = false;
            break;
        }
        let node = heap.pop().expect("peeked");
        search.nodes += 1;
        for child in search.expand(node, &mut seq)? {
            if child.bound < search.best.min_card {
                heap.push(child);
            }
        }
    }
    let best_lower_bound = if proven {
        search.best.min_card
    } else {
        heap.iter().map(|n| n.bound).min().unwrap_or(search.best.min_card).min(search.best.min_card)
    };
    Ok(BnbReport {
        min_card: search.best.min_card,
        zero_set: search.best.zero_set,
        x: search.best.x,
        nodes_explored: search.nodes,
        relaxations_solved: search.relaxations,
        incumbent_history: search.history,
        proven_optimal: proven,
        best_lower_bound,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> Instance {
        Instance::from_rows(
            &[
                vec![2.0, 0.5, 0.1, 0.0, 0.3],
                vec![0.5, 1.5, -0.2, 0.1, 0.0],
                vec![0.1, -0.2, 1.0, 0.3, 0.1],
                vec![0.0, 0.1, 0.3, 2.5, -0.4],
                vec![0.3, 0.0, 0.1, -0.4, 1.2],
            ],
            &[0.4, -0.3, 0.6, 0.2, -0.5],
            0.6,
        )
        .unwrap()
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 4) {
            count += 1;
        }
        assert_eq!(count, 6);
        let mut empty: Vec<usize> = vec![];
        assert!(!next_combination(&mut empty, 3));
    }

    #[test]
    fn greedy_is_feasible_and_maximal() {
        let i = inst();
        let g = backward_greedy(&i).unwrap();
        assert!(i.zero_set_feasible(&g.zero_set));
        assert!(i.contains(&g.x, 1e-12));
        for k in 0..5 {
            if !g.zero_set.contains(&k) {
                let mut z = g.zero_set.clone();
                z.push(k);
                assert!(!i.zero_set_feasible(&z));
            }
        }
    }

    #[test]
    fn all_modes_match_brute_force() {
        let i = inst();
        let bf = brute_force(&i).unwrap();
        for mode in [BoundMode::None, BoundMode::Cont, BoundMode::Diag] {
            let cfg = BnbConfig { relax_min_dim: 1, ..BnbConfig::with_bound(mode) };
            let r = solve(&i, &cfg).unwrap();
            assert!(r.proven_optimal);
            assert_eq!(r.min_card, bf.min_card);
            assert!(i.contains(&r.x, 1e-12));
            assert!(r.incumbent_history.windows(2).all(|w| w[1].1 < w[0].1));
        }
    }

    #[test]
    fn diagonal_instance_closes_at_root() {
        let q = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.5]];
        let i = Instance::from_rows(&q, &[0.5, 0.4, 1.0], 0.6).unwrap();
        let r = solve(&i, &BnbConfig::default()).unwrap();
        assert_eq!(r.nodes_explored, 1);
        assert_eq!(r.min_card, brute_force(&i).unwrap().min_card);
    }

    #[test]
    fn node_limit_reports_bounds() {
        let i = inst();
        let cfg = BnbConfig { node_limit: Some(1), ..Default::default() };
        let r = solve(&i, &cfg).unwrap();
        assert!(r.nodes_explored <= 1);
        assert!(r.best_lower_bound <= r.min_card);
    }

    #[test]
    fn brute_force_limit() {
        let n = 21;
        let q: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let i = Instance::from_rows(&q, &vec![0.1; n], 1.0).unwrap();
        assert_eq!(brute_force(&i).unwrap_err(), Error::DimensionTooLarge { n: 21, max: 20 });
    }
}
