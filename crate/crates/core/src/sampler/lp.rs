//! Dense bounded-variable primal simplex.
//!
//! Solves `min c'x  s.t.  Ax = b,  l <= x <= u` with finite lower bounds and
//! optional upper bounds. Nonbasic variables sit at either bound; phase one
//! drives artificial variables out of the objective. Entering and leaving
//! variables are chosen by Bland's smallest-index rule, which rules out
//! cycling on degenerate vertices.

use crate::error::{CmcError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct BoundedLp<T> {
    /// Constraint rows, each of length `n`.
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub cost: Vec<T>,
    pub lower: Vec<T>,
    /// `None` is an infinite upper bound.
    pub upper: Vec<Option<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Variables basic at the optimum (artificial ones excluded).
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau<T> {
    /// `B^-1 A`, `m x cols`.
    tab: Vec<Vec<T>>,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<T>,
    lower: Vec<T>,
    upper: Vec<Option<T>>,
    iterations: usize,
}

const MAX_ITERATIONS: usize = 100_000;

impl<T: Scalar> Tableau<T> {
    fn reduced_cost(&self, cost: &[T], j: usize) -> T {
        let mut d = cost[j];
        for (r, &b) in self.basis.iter().enumerate() {
            d = d - cost[b] * self.tab[r][j];
        }
        d
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.tab[row][col];
        for v in self.tab[row].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.tab[row].clone();
        for (r, line) in self.tab.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != T::zero() {
                for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
            }
        }
    }

    /// Runs primal simplex iterations for `cost` until optimal.
    fn optimize(&mut self, cost: &[T]) -> Result<()> {
        let tol = T::zero_tol();
        let cols = self.x.len();
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(CmcError::Degenerate("simplex iteration limit reached".into()));
            }
            let entering = (0..cols).find_map(|j| {
                if self.upper[j] == Some(self.lower[j]) {
                    return None;
                }
                let d = self.reduced_cost(cost, j);
                match self.status[j] {
                    Status::AtLower if d < -tol => Some((j, T::one())),
                    Status::AtUpper if d > tol => Some((j, -T::one())),
                    _ => None,
                }
            });
            let Some((j, dir)) = entering else {
                return Ok(());
            };
            self.iterations += 1;

            // step length limited by the entering variable's own range ...
            let mut step = self.upper[j].map(|u| u - self.lower[j]);
            let mut leaving: Option<(usize, usize, Status)> = None;
            // ... and by every basic variable reaching a bound
            for (r, &b) in self.basis.iter().enumerate() {
                let rate = -dir * self.tab[r][j];
                let (limit, bound) = if rate < -tol {
                    ((self.x[b] - self.lower[b]) / -rate, Status::AtLower)
                } else if rate > tol {
                    match self.upper[b] {
                        Some(u) => ((u - self.x[b]) / rate, Status::AtUpper),
                        None => continue,
                    }
                } else {
                    continue;
                };
                let limit = limit.max(T::zero());
                let better = match (step, leaving) {
                    (None, _) => true,
                    (Some(s), _) if limit < s - tol => true,
                    (Some(s), Some((_, lb, _))) if limit <= s + tol => b < lb,
                    (Some(s), None) if limit <= s + tol => b < j,
                    _ => false,
                };
                if better {
                    step = Some(limit);
                    leaving = Some((r, b, bound));
                }
            }
            let Some(step) = step else {
                return Err(CmcError::Unbounded);
            };

            self.x[j] = self.x[j] + dir * step;
            for (r, &b) in self.basis.iter().enumerate() {
                self.x[b] = self.x[b] - dir * step * self.tab[r][j];
            }
            match leaving {
                None => {
                    self.status[j] = if dir > T::zero() { Status::AtUpper } else { Status::AtLower };
                    if let Some(u) = self.upper[j] {
                        self.x[j] = if dir > T::zero() { u } else { self.lower[j] };
                    }
                }
                Some((r, b, bound)) => {
                    self.x[b] = match bound {
                        Status::AtUpper => self.upper[b].unwrap_or(self.x[b]),
                        _ => self.lower[b],
                    };
                    self.status[b] = bound;
                    self.status[j] = Status::Basic(r);
                    self.basis[r] = j;
                    self.pivot(r, j);
                }
            }
        }
    }
}

impl<T: Scalar> BoundedLp<T> {
    pub fn solve(&self) -> Result<LpSolution<T>> {
        let m = self.rows.len();
        let n = self.cost.len();
        if self.rhs.len() != m
            || self.lower.len() != n
            || self.upper.len() != n
            || self.rows.iter().any(|r| r.len() != n)
        {
            return Err(CmcError::InvalidConfig("inconsistent LP dimensions".into()));
        }
        if let Some(j) = (0..n).find(|&j| self.upper[j].is_some_and(|u| u < self.lower[j])) {
            return Err(CmcError::InvalidConfig(format!("variable {j} has empty bounds")));
        }

        // Nonbasic originals start at their lower bound; artificials absorb the
        // residual with a sign making them nonnegative.
        let cols = n + m;
        let mut x = self.lower.clone();
        x.resize(cols, T::zero());
        let mut tab = Vec::with_capacity(m);
        for (i, row) in self.rows.iter().enumerate() {
            let resid = self.rhs[i] - row.iter().zip(&self.lower).map(|(&a, &l)| a * l).sum::<T>();
            let sign = if resid < T::zero() { -T::one() } else { T::one() };
            let mut line: Vec<T> = row.iter().map(|&a| a * sign).collect();
            line.resize(cols, T::zero());
            line[n + i] = T::one();
            x[n + i] = resid * sign;
            tab.push(line);
        }
        let mut lower = self.lower.clone();
        lower.resize(cols, T::zero());
        let mut upper = self.upper.clone();
        upper.resize(cols, None);
        let mut status = vec![Status::AtLower; cols];
        for i in 0..m {
            status[n + i] = Status::Basic(i);
        }
        let mut t = Tableau {
            tab,
            basis: (n..cols).collect(),
            status,
            x,
            lower,
            upper,
            iterations: 0,
        };

        let mut phase1 = vec![T::zero(); cols];
        for c in phase1.iter_mut().skip(n) {
            *c = T::one();
        }
        t.optimize(&phase1)?;
        let infeasibility: T = t.x[n..].iter().copied().sum();
        let scale = T::one() + self.rhs.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        if infeasibility > T::eq_tol() * scale {
            return Err(CmcError::Infeasible);
        }
        for j in n..cols {
            t.upper[j] = Some(T::zero());
            if !matches!(t.status[j], Status::Basic(_)) {
                t.x[j] = T::zero();
            }
        }

        let mut phase2 = self.cost.clone();
        phase2.resize(cols, T::zero());
        t.optimize(&phase2)?;

        let x: Vec<T> = t.x[..n].to_vec();
        let objective = x.iter().zip(&self.cost).map(|(&a, &c)| a * c).sum();
        let basis = t.basis.iter().copied().filter(|&b| b < n).collect();
        Ok(LpSolution { x, objective, basis, iterations: t.iterations })
    }
}
