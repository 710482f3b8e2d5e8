//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Problems are `min cᵀx` subject to `A x − s = 0` and `l ≤ (x, s) ≤ u`,
//! where one logical `s_i` per row carries the row's relation as bounds.
//! The primal method minimizes the sum of infeasibilities first (phase 1)
//! and then the true costs (phase 2). The dual method reoptimizes after
//! bound changes, which keeps the basis dual feasible.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Status {
    Basic,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
}

/// Basis snapshot for warm starts.
#[derive(Clone, Debug)]
pub(crate) struct Basis {
    basic: Vec<usize>,
    status: Vec<Status>,
}

const REFACTOR_EVERY: usize = 100;

#[derive(Clone, Debug)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<Status>,
    basic: Vec<usize>,
    pub(crate) x: Vec<f64>,
    binv: Vec<f64>,
    since_refactor: usize,
    pivot_tol: f64,
    feas_tol: f64,
    pub(crate) iterations: usize,
}

impl Simplex {
    /// `cols[j]` is the sparse column of structural `j`; rows carry `[row_lo, row_hi]`.
    pub(crate) fn new(
        cols: Vec<Vec<(usize, f64)>>,
        cost: Vec<f64>,
        var_lo: Vec<f64>,
        var_hi: Vec<f64>,
        row_lo: Vec<f64>,
        row_hi: Vec<f64>,
        pivot_tol: f64,
    ) -> Self {
        let n = cols.len();
        let m = row_lo.len();
        let mut lower = var_lo;
        lower.extend(row_lo);
        let mut upper = var_hi;
        upper.extend(row_hi);
        let mut full_cost = cost;
        full_cost.extend(std::iter::repeat_n(0.0, m));
        let mut lp = Simplex {
            m,
            n,
            cols,
            lower,
            upper,
            cost: full_cost,
            status: vec![Status::Lower; n + m],
            basic: Vec::new(),
            x: vec![0.0; n + m],
            binv: Vec::new(),
            since_refactor: 0,
            pivot_tol,
            feas_tol: 1e-9,
            iterations: 0,
        };
        lp.reset_basis();
        lp
    }

    /// Slack basis with every structural at its finite bound nearest zero.
    pub(crate) fn reset_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            self.status[j] = if l.is_finite() { Status::Lower } else { Status::Upper };
            self.x[j] = if l.is_finite() { l } else { u };
        }
        self.basic = (n..n + m).collect();
        for i in 0..m {
            self.status[n + i] = Status::Basic;
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        self.since_refactor = 0;
        self.recompute_basics();
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.n {
            ColumnIter::Sparse(self.cols[j].iter())
        } else {
            ColumnIter::Unit(Some(j - self.n))
        }
    }

    /// `x_B = −B⁻¹ N x_N`.
    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.status[j] == Status::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (i, a) in self.column(j) {
                rhs[i] -= a * xj;
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.basic[r]] = v;
        }
    }

    /// Rebuilds `B⁻¹` by Gauss–Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &j) in self.basic.iter().enumerate() {
            for (i, v) in self.column(j) {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs())).unwrap_or(c);
            if a[p * m + c].abs() < 1e-11 {
                return Err(Error::Model("singular basis".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    fn refactor_or_reset(&mut self) {
        if self.refactor().is_err() {
            self.reset_basis();
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (i, a) in self.column(j) {
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.binv[r * m + i] * a;
            }
        }
        out
    }

    fn dot_column(&self, y: &[f64], j: usize) -> f64 {
        self.column(j).map(|(i, a)| y[i] * a).sum()
    }

    /// `yᵀ = c_Bᵀ B⁻¹`.
    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &c) in cb.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for (yi, b) in y.iter_mut().zip(row) {
                *yi += c * b;
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, entering: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let (head, tail) = self.binv.split_at_mut(r * m);
        let (prow, rest) = tail.split_at_mut(m);
        prow.iter_mut().for_each(|v| *v /= piv);
        for (k, &ak) in alpha.iter().enumerate() {
            if k == r || ak == 0.0 {
                continue;
            }
            let row = if k < r { &mut head[k * m..(k + 1) * m] } else { &mut rest[(k - r - 1) * m..(k - r) * m] };
            for (v, p) in row.iter_mut().zip(prow.iter()) {
                *v -= ak * p;
            }
        }
        self.basic[r] = entering;
        self.status[entering] = Status::Basic;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor_or_reset();
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lower[j] - self.feas_tol {
            self.lower[j] - x
        } else if x > self.upper[j] + self.feas_tol {
            x - self.upper[j]
        } else {
            0.0
        }
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn snapshot(&self) -> Basis {
        Basis { basic: self.basic.clone(), status: self.status.clone() }
    }

    /// Installs a saved basis; nonbasic variables sit at the bound their status names.
    pub(crate) fn restore(&mut self, basis: &Basis) {
        self.basic = basis.basic.clone();
        self.status = basis.status.clone();
        for j in 0..self.n + self.m {
            match self.status[j] {
                Status::Lower => self.x[j] = self.lower[j],
                Status::Upper => self.x[j] = self.upper[j],
                Status::Basic => {}
            }
            if !self.x[j].is_finite() {
                let (l, u) = (self.lower[j], self.upper[j]);
                self.status[j] = if l.is_finite() { Status::Lower } else { Status::Upper };
                self.x[j] = if l.is_finite() { l } else { u };
            }
        }
        self.refactor_or_reset();
    }

    /// Changes the bounds of structural `j`, keeping nonbasic values on a bound.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
        if self.status[j] == Status::Basic {
            return;
        }
        let target = match self.status[j] {
            Status::Upper if hi.is_finite() => hi,
            _ if lo.is_finite() => {
                self.status[j] = Status::Lower;
                lo
            }
            _ => {
                self.status[j] = Status::Upper;
                hi
            }
        };
        let delta = target - self.x[j];
        if delta != 0.0 {
            let alpha = self.ftran(j);
            for (r, a) in alpha.iter().enumerate() {
                self.x[self.basic[r]] -= a * delta;
            }
            self.x[j] = target;
        }
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.n + self.m) + 10_000
    }

    /// Primal simplex from the current basis.
    pub(crate) fn primal(&mut self) -> Result<LpOutcome> {
        let total = self.n + self.m;
        let mut degenerate = 0usize;
        let mut bland = false;
        let cap = self.iteration_cap();
        let mut local = 0usize;
        loop {
            local += 1;
            if local > cap {
                return Err(Error::Model("simplex iteration limit reached".into()));
            }
            self.iterations += 1;
            let phase_one = self.basic.iter().any(|&j| self.infeasibility(j) > 0.0);
            let cb: Vec<f64> = self
                .basic
                .iter()
                .map(|&j| {
                    if phase_one {
                        let x = self.x[j];
                        if x < self.lower[j] - self.feas_tol {
                            -1.0
                        } else if x > self.upper[j] + self.feas_tol {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.cost[j]
                    }
                })
                .collect();
            let y = self.duals(&cb);

            let dtol = 1e-9;
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                let st = self.status[j];
                if st == Status::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost[j] };
                let d = c - self.dot_column(&y, j);
                let dir = match st {
                    Status::Lower if d < -dtol => 1.0,
                    Status::Upper if d > dtol => -1.0,
                    _ => continue,
                };
                if bland {
                    entering = Some((j, d, dir));
                    break;
                }
                if entering.is_none_or(|(_, best, _)| d.abs() > best.abs()) {
                    entering = Some((j, d, dir));
                }
            }
            let Some((q, _, dir)) = entering else {
                return Ok(if phase_one { LpOutcome::Infeasible } else { LpOutcome::Optimal });
            };

            let alpha = self.ftran(q);
            // Ratio test: basic r moves at rate `-dir·alpha_r` per unit step.
            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, Status)> = None;
            let mut leave_alpha = 0.0f64;
            for (r, &a) in alpha.iter().enumerate() {
                if a.abs() <= self.pivot_tol {
                    continue;
                }
                let j = self.basic[r];
                let rate = -dir * a;
                let (x, l, u) = (self.x[j], self.lower[j], self.upper[j]);
                let (limit, at) = if rate < 0.0 {
                    if x > u + self.feas_tol {
                        ((x - u) / -rate, Status::Upper)
                    } else if x >= l - self.feas_tol && l.is_finite() {
                        (((x - l) / -rate).max(0.0), Status::Lower)
                    } else {
                        continue;
                    }
                } else if x < l - self.feas_tol {
                    ((l - x) / rate, Status::Lower)
                } else if x <= u + self.feas_tol && u.is_finite() {
                    (((u - x) / rate).max(0.0), Status::Upper)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < step,
                    Some((lr, _)) => {
                        if limit < step - 1e-12 {
                            true
                        } else if limit <= step + 1e-12 {
                            if bland {
                                j < self.basic[lr]
                            } else {
                                a.abs() > leave_alpha.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = limit.min(step);
                    leave = Some((r, at));
                    leave_alpha = a;
                }
            }
            if !step.is_finite() {
                return Err(Error::Model("LP relaxation is unbounded".into()));
            }

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > 10 * total {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            self.x[q] += dir * step;
            for (r, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basic[r]] -= dir * a * step;
                }
            }
            match leave {
                None => {
                    self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Some((r, at)) => {
                    let j = self.basic[r];
                    self.x[j] = if at == Status::Lower { self.lower[j] } else { self.upper[j] };
                    self.status[j] = at;
                    self.pivot(r, q, &alpha);
                }
            }
        }
    }

    /// Dual simplex; falls back to the primal method when the basis is not dual feasible.
    pub(crate) fn dual(&mut self) -> Result<LpOutcome> {
        let total = self.n + self.m;
        let cap = self.iteration_cap();
        let dtol = 1e-7;
        let mut local = 0usize;
        loop {
            local += 1;
            if local > cap {
                return self.primal();
            }
            self.iterations += 1;
            let cb: Vec<f64> = self.basic.iter().map(|&j| self.cost[j]).collect();
            let y = self.duals(&cb);
            let mut d = vec![0.0; total];
            for j in 0..total {
                if self.status[j] != Status::Basic {
                    d[j] = self.cost[j] - self.dot_column(&y, j);
                    let wrong = match self.status[j] {
                        Status::Lower => d[j] < -dtol,
                        Status::Upper => d[j] > dtol,
                        Status::Basic => false,
                    };
                    if wrong && self.lower[j] < self.upper[j] {
                        return self.primal();
                    }
                }
            }

            let Some((r, infeas)) = self
                .basic
                .iter()
                .enumerate()
                .map(|(r, &j)| (r, self.infeasibility(j)))
                .filter(|(_, v)| *v > 0.0)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            else {
                return self.primal();
            };
            let _ = infeas;
            let leaving = self.basic[r];
            let below = self.x[leaving] < self.lower[leaving];
            let target = if below { self.lower[leaving] } else { self.upper[leaving] };

            let m = self.m;
            let rho = &self.binv[r * m..(r + 1) * m];
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                let st = self.status[j];
                if st == Status::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a: f64 = self.column(j).map(|(i, v)| rho[i] * v).sum();
                if a.abs() <= self.pivot_tol {
                    continue;
                }
                // x_leaving changes by −a·Δx_j.
                let eligible = match (below, st) {
                    (true, Status::Lower) => a < 0.0,
                    (true, Status::Upper) => a > 0.0,
                    (false, Status::Lower) => a > 0.0,
                    (false, Status::Upper) => a < 0.0,
                    _ => false,
                };
                if !eligible {
                    continue;
                }
                let ratio = d[j].abs() / a.abs();
                let better = match best {
                    None => true,
                    Some((bj, br, ba)) => {
                        ratio < br - 1e-12 || (ratio <= br + 1e-12 && (a.abs() > ba.abs() || (a.abs() == ba.abs() && j < bj)))
                    }
                };
                if better {
                    best = Some((j, ratio, a));
                }
            }
            let Some((q, _, _)) = best else {
                return Ok(LpOutcome::Infeasible);
            };
            let alpha = self.ftran(q);
            let delta = (self.x[leaving] - target) / alpha[r];
            self.x[q] += delta;
            for (k, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basic[k]] -= a * delta;
                }
            }
            self.x[leaving] = target;
            self.status[leaving] = if below { Status::Lower } else { Status::Upper };
            self.pivot(r, q, &alpha);
        }
    }
}

enum ColumnIter<'a> {
    Sparse(std::slice::Iter<'a, (usize, f64)>),
    Unit(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Sparse(it) => it.next().copied(),
            ColumnIter::Unit(slot) => slot.take().map(|i| (i, -1.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn small_lp() {
        // min −3x − 2y  s.t. x + y ≤ 4, x + 3y ≤ 6, 0 ≤ x ≤ 3, 0 ≤ y
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 3.0)]];
        let mut lp = Simplex::new(cols, vec![-3.0, -2.0], vec![0.0, 0.0], vec![3.0, 10.0], vec![-INF, -INF], vec![4.0, 6.0], 1e-9);
        assert_eq!(lp.primal().unwrap(), LpOutcome::Optimal);
        assert!((lp.objective() + 11.0).abs() < 1e-9);
        assert!((lp.x[0] - 3.0).abs() < 1e-9 && (lp.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_one_and_infeasibility() {
        // x + y ≥ 5 with x, y ≤ 2 is infeasible.
        let cols = vec![vec![(0, 1.0)], vec![(0, 1.0)]];
        let mut lp = Simplex::new(cols.clone(), vec![1.0, 1.0], vec![0.0; 2], vec![2.0; 2], vec![5.0], vec![INF], 1e-9);
        assert_eq!(lp.primal().unwrap(), LpOutcome::Infeasible);
        // x + y = 3 minimizing x + 2y → x = 2, y = 1.
        let mut lp = Simplex::new(cols, vec![1.0, 2.0], vec![0.0; 2], vec![2.0; 2], vec![3.0], vec![3.0], 1e-9);
        assert_eq!(lp.primal().unwrap(), LpOutcome::Optimal);
        assert!((lp.objective() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn dual_after_bound_change() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 3.0)]];
        let mut lp = Simplex::new(cols, vec![-3.0, -2.0], vec![0.0, 0.0], vec![3.0, 10.0], vec![-INF, -INF], vec![4.0, 6.0], 1e-9);
        lp.primal().unwrap();
        lp.set_bounds(0, 0.0, 1.5);
        assert_eq!(lp.dual().unwrap(), LpOutcome::Optimal);
        // x = 1.5, y = 1.5 → −4.5 − 3 = −7.5
        assert!((lp.objective() + 7.5).abs() < 1e-9, "{}", lp.objective());
        lp.set_bounds(1, 3.0, 10.0);
        assert_eq!(lp.dual().unwrap(), LpOutcome::Infeasible);
    }
}
