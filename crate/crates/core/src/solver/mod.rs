//! Reference MILP solver (best-first branch-and-bound over the simplex) and
//! text-file exchange with external solvers.

pub mod lp_format;
mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::model::to_f64;
use crate::optimizer::{MilpModel, Relation, RowKind, VarKind};
use simplex::{Basis, LpOutcome, Simplex};

pub use lp_format::{export_lp, import_solution, parse_lp, write_lp, write_solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleGap,
    Infeasible,
    Timeout,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGap => "feasible_gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative optimality gap at which the search stops.
    pub gap_tolerance: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub node_limit: usize,
    pub lp_pivot_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { gap_tolerance: 1e-6, time_limit: 600.0, node_limit: 500_000, lp_pivot_tolerance: 1e-9 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tolerance > 0.0 && self.time_limit > 0.0 && self.node_limit > 0 && self.lp_pivot_tolerance > 0.0) {
            return Err(Error::Config("solver settings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// Empty when no feasible assignment was found.
    pub assignment: Vec<i64>,
    /// Relative gap between the best bound and the incumbent.
    pub gap: f64,
    /// Optimum of the root LP relaxation, capped by any supplied bound.
    pub root_bound: f64,
    /// Proven upper bound on the optimum.
    pub best_bound: f64,
    pub node_count: usize,
    pub lp_iterations: usize,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn value(&self, model: &MilpModel, name: &str) -> Option<i64> {
        model.variable_index(name).map(|j| self.assignment[j])
    }
}

const INT_TOL: f64 = 1e-6;

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Basis>,
    parent: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth)).then(self.id.cmp(&other.id))
    }
}

fn build_lp(model: &MilpModel, pivot_tol: f64) -> Simplex {
    let n = model.var_count();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut row_lo = Vec::with_capacity(model.row_count());
    let mut row_hi = Vec::with_capacity(model.row_count());
    for (i, c) in model.constraints.iter().enumerate() {
        for (coef, j) in &c.terms {
            let v = to_f64(coef);
            if v != 0.0 {
                cols[*j].push((i, v));
            }
        }
        let b = to_f64(&c.rhs);
        let (lo, hi) = match c.relation {
            Relation::Le => (f64::NEG_INFINITY, b),
            Relation::Ge => (b, f64::INFINITY),
            Relation::Eq => (b, b),
        };
        row_lo.push(lo);
        row_hi.push(hi);
    }
    // Merge duplicate entries of the same row within a column.
    for col in cols.iter_mut() {
        col.sort_by_key(|(i, _)| *i);
        col.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
    }
    let cost = model.objective.iter().map(|c| -c).collect();
    let lo = model.variables.iter().map(|v| v.lower).collect();
    let hi = model.variables.iter().map(|v| v.upper).collect();
    Simplex::new(cols, cost, lo, hi, row_lo, row_hi, pivot_tol)
}

/// Solves `model` to optimality (or to the configured limits).
pub fn solve(model: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_with_hints(model, cfg, &SolveHints::default())
}

/// As [`solve`], seeding the incumbent with a known feasible assignment.
pub fn solve_with_start(model: &MilpModel, cfg: &SolverConfig, start: Option<&[i64]>) -> Result<SolveResult> {
    solve_with_hints(model, cfg, &SolveHints { starts: start.into_iter().collect(), upper_bound: None })
}

/// Problem knowledge supplied by the caller.
#[derive(Clone, Debug, Default)]
pub struct SolveHints<'a> {
    /// Candidate assignments; feasible ones seed the incumbent.
    pub starts: Vec<&'a [i64]>,
    /// A valid upper bound on the optimum, used to cap node bounds.
    pub upper_bound: Option<f64>,
}

pub fn solve_with_hints(model: &MilpModel, cfg: &SolverConfig, hints: &SolveHints) -> Result<SolveResult> {
    cfg.validate()?;
    model.validate()?;
    let started = Instant::now();
    let n = model.var_count();
    let cap = hints.upper_bound.unwrap_or(f64::INFINITY);

    let zero = vec![0i64; n];
    let mut incumbent: Option<(f64, Vec<i64>)> = None;
    for candidate in hints.starts.iter().copied().chain(std::iter::once(zero.as_slice())) {
        if candidate.len() == n && model.check_assignment(candidate, INT_TOL).is_ok() {
            let obj = model.objective_value(&candidate.iter().map(|&v| v as f64).collect::<Vec<_>>());
            if incumbent.as_ref().is_none_or(|(best, _)| obj > *best) {
                incumbent = Some((obj, candidate.to_vec()));
            }
        }
    }

    let binary: Vec<bool> = model.variables.iter().map(|v| v.kind == VarKind::Binary).collect();
    let mut lp = build_lp(model, cfg.lp_pivot_tolerance);
    let root_lo: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let root_hi: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: cap, depth: 0, id: 0, changes: Vec::new(), basis: None, parent: usize::MAX });
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut root_bound = f64::NEG_INFINITY;
    let mut last_solved = usize::MAX;
    let mut hit_limit = false;
    let mut current_changes: Vec<(usize, f64, f64)> = Vec::new();

    let prune_level =
        |inc: &Option<(f64, Vec<i64>)>| inc.as_ref().map_or(f64::NEG_INFINITY, |(v, _)| v + cfg.gap_tolerance * v.abs().max(1.0));

    // Child kept for immediate processing (plunging) instead of going back to the heap.
    let mut plunge: Option<Node> = None;
    while let Some(node) = plunge.take().or_else(|| heap.pop()) {
        if node.bound <= prune_level(&incumbent) {
            continue;
        }
        if nodes >= cfg.node_limit || started.elapsed().as_secs_f64() > cfg.time_limit {
            heap.push(node);
            hit_limit = true;
            break;
        }
        nodes += 1;

        // Reset bounds touched by the previous node, then apply this node's.
        for &(j, _, _) in &current_changes {
            lp.set_bounds(j, root_lo[j], root_hi[j]);
        }
        let warm = node.parent == last_solved && node.parent != usize::MAX;
        if !warm {
            if let Some(b) = &node.basis {
                for &(j, lo, hi) in &node.changes {
                    lp.lower[j] = lo;
                    lp.upper[j] = hi;
                }
                lp.restore(b);
            }
        }
        for &(j, lo, hi) in &node.changes {
            lp.set_bounds(j, lo, hi);
        }
        current_changes = node.changes.clone();

        let outcome = if node.id == 0 { lp.primal() } else { lp.dual() };
        let outcome = match outcome {
            Ok(o) => o,
            Err(_) => {
                lp.reset_basis();
                lp.primal()?
            }
        };
        last_solved = node.id;
        if outcome == LpOutcome::Infeasible {
            continue;
        }
        let value = (-lp.objective()).min(cap);
        if node.id == 0 {
            root_bound = value;
        }
        if value <= prune_level(&incumbent) {
            continue;
        }

        // Most fractional variable, binaries before general integers; lowest index on ties.
        let mut branch: Option<(usize, f64)> = None;
        let mut best = (false, 0.0);
        for j in 0..n {
            let x = lp.x[j];
            let frac = x - x.floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INT_TOL {
                continue;
            }
            let key = (binary[j], dist);
            if key.0 && !best.0 || key.0 == best.0 && key.1 > best.1 + 1e-12 {
                best = key;
                branch = Some((j, x));
            }
        }
        match branch {
            None => {
                let cand: Vec<i64> = (0..n).map(|j| lp.x[j].round() as i64).collect();
                if model.check_assignment(&cand, INT_TOL).is_ok() {
                    let obj = model.objective_value(&cand.iter().map(|&v| v as f64).collect::<Vec<_>>());
                    if incumbent.as_ref().is_none_or(|(best, _)| obj > *best) {
                        incumbent = Some((obj, cand));
                    }
                }
            }
            Some((j, x)) => {
                let basis = lp.snapshot();
                let (lo, hi) = current_bounds(&node.changes, j, &root_lo, &root_hi);
                let mut down = node.changes.clone();
                set_change(&mut down, j, lo, x.floor());
                let mut up = node.changes.clone();
                set_change(&mut up, j, x.ceil(), hi);
                for (k, changes) in [down, up].into_iter().enumerate() {
                    let child =
                        Node { bound: value, depth: node.depth + 1, id: next_id, changes, basis: Some(basis.clone()), parent: node.id };
                    next_id += 1;
                    if k == 1 {
                        plunge = Some(child);
                    } else {
                        heap.push(child);
                    }
                }
            }
        }
    }

    let Some((objective, assignment)) = incumbent else {
        let status = if hit_limit { SolveStatus::Timeout } else { SolveStatus::Infeasible };
        return Ok(SolveResult {
            status,
            objective: f64::NEG_INFINITY,
            assignment: Vec::new(),
            gap: f64::INFINITY,
            root_bound,
            best_bound: if hit_limit { f64::INFINITY } else { f64::NEG_INFINITY },
            node_count: nodes,
            lp_iterations: lp.iterations,
            wall_time: started.elapsed(),
        });
    };
    let open_bound = heap.iter().map(|nd| nd.bound).fold(f64::NEG_INFINITY, f64::max);
    let tolerance = cfg.gap_tolerance * objective.abs().max(1.0);
    let best_bound = if hit_limit { open_bound.max(objective) } else { objective + tolerance }.min(cap.max(objective));
    let gap = if hit_limit { ((best_bound - objective) / objective.abs().max(1.0)).max(0.0) } else { 0.0 };
    let status = if !hit_limit || gap <= cfg.gap_tolerance {
        SolveStatus::Optimal
    } else if started.elapsed().as_secs_f64() > cfg.time_limit {
        SolveStatus::Timeout
    } else {
        SolveStatus::FeasibleGap
    };
    if !model.exact_violations(&assignment, RowKind::Flow).is_empty() {
        return Err(Error::Solution("flow balance fails the exact check".into()));
    }
    Ok(SolveResult {
        status,
        objective,
        assignment,
        gap,
        root_bound: if root_bound.is_finite() { root_bound } else { objective },
        best_bound,
        node_count: nodes,
        lp_iterations: lp.iterations,
        wall_time: started.elapsed(),
    })
}

fn current_bounds(changes: &[(usize, f64, f64)], j: usize, lo: &[f64], hi: &[f64]) -> (f64, f64) {
    changes.iter().rev().find(|(k, _, _)| *k == j).map_or((lo[j], hi[j]), |&(_, l, h)| (l, h))
}

fn set_change(changes: &mut Vec<(usize, f64, f64)>, j: usize, lo: f64, hi: f64) {
    if let Some(entry) = changes.iter_mut().find(|(k, _, _)| *k == j) {
        *entry = (j, lo, hi);
    } else {
        changes.push((j, lo, hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{rational, VarKind, VarRole};

    #[test]
    fn empty_constraints_maximize_negative_sum() {
        let mut m = MilpModel::new();
        for k in 0..3 {
            m.add_variable(format!("x{k}"), VarKind::NonnegInteger, 5.0, -1.0, VarRole::Free);
        }
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.assignment, vec![0, 0, 0]);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn unprofitable_acceptance() {
        // max 5d − 3κ  s.t. κ ≥ 2d, κ ≤ 10
        let mut m = MilpModel::new();
        let d = m.add_variable("d", VarKind::Binary, 1.0, 5.0, VarRole::Free);
        let k = m.add_variable("k", VarKind::NonnegInteger, 10.0, -3.0, VarRole::Free);
        m.add_constraint("need", vec![(rational(1.0), k), (rational(-2.0), d)], Relation::Ge, rational(0.0), RowKind::Other).unwrap();
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.assignment, vec![0, 0]);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn knapsack() {
        // max 5a + 4b + 3c s.t. 2a + 3b + c ≤ 5, 4a + b + 2c ≤ 11, 3a + 4b + 2c ≤ 8, a,b,c ≤ 3
        let mut m = MilpModel::new();
        let obj = [5.0, 4.0, 3.0];
        let v: Vec<usize> = (0..3).map(|k| m.add_variable(format!("x{k}"), VarKind::NonnegInteger, 3.0, obj[k], VarRole::Free)).collect();
        let rows = [([2.0, 3.0, 1.0], 5.0), ([4.0, 1.0, 2.0], 11.0), ([3.0, 4.0, 2.0], 8.0)];
        for (i, (a, b)) in rows.iter().enumerate() {
            let terms = a.iter().zip(&v).map(|(c, j)| (rational(*c), *j)).collect();
            m.add_constraint(format!("r{i}"), terms, Relation::Le, rational(*b), RowKind::Other).unwrap();
        }
        let r = solve(&m, &SolverConfig::default()).unwrap();
        // Enumeration: best is a=2, b=0, c=1 → 13.
        assert_eq!(r.objective, 13.0);
        assert!(r.root_bound >= r.objective - 1e-9);
    }

    #[test]
    fn start_solution_is_used() {
        let mut m = MilpModel::new();
        let a = m.add_variable("a", VarKind::NonnegInteger, 4.0, 1.0, VarRole::Free);
        m.add_constraint("c", vec![(rational(2.0), a)], Relation::Le, rational(7.0), RowKind::Other).unwrap();
        let cfg = SolverConfig { node_limit: 1, ..SolverConfig::default() };
        let r = solve_with_start(&m, &cfg, Some(&[3])).unwrap();
        assert_eq!(r.objective, 3.0);
    }
}
