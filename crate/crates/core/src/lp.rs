//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! The programs solved by the geometry checks have at most a few dozen rows
//! and columns, so a full tableau is kept and every pivot touches all of it.

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Clone, Debug)]
struct Row<T> {
    coeffs: Vec<T>,
    relation: Relation,
    rhs: T,
}

/// `maximize c.x` subject to linear rows and per-variable bounds.
/// Variables are free unless bounded.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    n: usize,
    objective: Vec<T>,
    lower: Vec<Option<T>>,
    upper: Vec<Option<T>>,
    rows: Vec<Row<T>>,
    minimizing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal(LpSolution<T>),
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Option<LpSolution<T>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![T::zero(); n],
            lower: vec![None; n],
            upper: vec![None; n],
            rows: Vec::new(),
            minimizing: false,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn maximize(&mut self, c: Vec<T>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self.minimizing = false;
        self
    }

    pub fn minimize(&mut self, c: Vec<T>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c.into_iter().map(|v| -v).collect();
        self.minimizing = true;
        self
    }

    pub fn bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn nonnegative(&mut self, var: usize) -> &mut Self {
        self.lower[var] = Some(T::zero());
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Solves the program. The objective of an `Optimal` outcome is reported
    /// in the sense that was set (`minimize` returns the minimum).
    pub fn solve(&self) -> Result<LpOutcome<T>> {
        self.solve_maximize()
    }

    fn solve_maximize(&self) -> Result<LpOutcome<T>> {
        for v in 0..self.n {
            if let (Some(l), Some(u)) = (self.lower[v], self.upper[v]) {
                if l > u {
                    return Ok(LpOutcome::Infeasible);
                }
            }
        }
        let std = StandardForm::build(self);
        let outcome = std.solve()?;
        Ok(match outcome {
            StdOutcome::Infeasible => LpOutcome::Infeasible,
            StdOutcome::Unbounded => LpOutcome::Unbounded,
            StdOutcome::Optimal(y) => {
                let x: Vec<T> = std
                    .maps
                    .iter()
                    .map(|m| m.terms.iter().fold(m.offset, |acc, &(k, c)| acc + c * y[k]))
                    .collect();
                let objective = self
                    .objective
                    .iter()
                    .zip(&x)
                    .fold(T::zero(), |acc, (&c, &v)| acc + c * v);
                let objective = if self.minimizing { -objective } else { objective };
                LpOutcome::Optimal(LpSolution { x, objective })
            }
        })
    }
}

/// `x_i = offset + sum(coef * y_k)` with `y >= 0`.
#[derive(Clone, Debug)]
struct VarMap<T> {
    offset: T,
    terms: Vec<(usize, T)>,
}

enum StdOutcome<T> {
    Optimal(Vec<T>),
    Infeasible,
    Unbounded,
}

/// `maximize c.y` s.t. rows, `y >= 0`.
struct StandardForm<T> {
    ny: usize,
    c: Vec<T>,
    rows: Vec<Row<T>>,
    maps: Vec<VarMap<T>>,
}

impl<T: Scalar> StandardForm<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let mut maps = Vec::with_capacity(lp.n);
        let mut ny = 0;
        let mut bound_rows: Vec<(usize, T)> = Vec::new();
        for v in 0..lp.n {
            let map = match (lp.lower[v], lp.upper[v]) {
                (Some(l), u) => {
                    let k = ny;
                    ny += 1;
                    if let Some(u) = u {
                        bound_rows.push((k, u - l));
                    }
                    VarMap {
                        offset: l,
                        terms: vec![(k, T::one())],
                    }
                }
                (None, Some(u)) => {
                    let k = ny;
                    ny += 1;
                    VarMap {
                        offset: u,
                        terms: vec![(k, -T::one())],
                    }
                }
                (None, None) => {
                    let k = ny;
                    ny += 2;
                    VarMap {
                        offset: T::zero(),
                        terms: vec![(k, T::one()), (k + 1, -T::one())],
                    }
                }
            };
            maps.push(map);
        }
        let mut rows = Vec::with_capacity(lp.rows.len() + bound_rows.len());
        for row in &lp.rows {
            let mut coeffs = vec![T::zero(); ny];
            let mut rhs = row.rhs;
            for (v, &a) in row.coeffs.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                rhs = rhs - a * maps[v].offset;
                for &(k, c) in &maps[v].terms {
                    coeffs[k] = coeffs[k] + a * c;
                }
            }
            rows.push(Row {
                coeffs,
                relation: row.relation,
                rhs,
            });
        }
        for (k, width) in bound_rows {
            let mut coeffs = vec![T::zero(); ny];
            coeffs[k] = T::one();
            rows.push(Row {
                coeffs,
                relation: Relation::Le,
                rhs: width,
            });
        }
        let mut c = vec![T::zero(); ny];
        for (v, &cv) in lp.objective.iter().enumerate() {
            for &(k, coef) in &maps[v].terms {
                c[k] = c[k] + cv * coef;
            }
        }
        Self { ny, c, rows, maps }
    }

    fn solve(&self) -> Result<StdOutcome<T>> {
        let mut tab = Tableau::new(self);
        if !tab.phase_one()? {
            return Ok(StdOutcome::Infeasible);
        }
        if !tab.phase_two(&self.c)? {
            return Ok(StdOutcome::Unbounded);
        }
        Ok(StdOutcome::Optimal(tab.primal(self.ny)))
    }
}

struct Tableau<T> {
    /// `m` constraint rows, each `ncols + 1` wide (last entry is the rhs).
    t: Vec<Vec<T>>,
    /// reduced costs `z_j - c_j`, last entry is the objective value
    z: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    first_artificial: usize,
    rhs_scale: T,
    pivot_tol: T,
    iterations: usize,
    max_iterations: usize,
}

impl<T: Scalar> Tableau<T> {
    fn new(sf: &StandardForm<T>) -> Self {
        let m = sf.rows.len();
        let mut rows: Vec<Row<T>> = sf.rows.clone();
        for r in &mut rows {
            if r.rhs < T::zero() {
                r.coeffs.iter_mut().for_each(|x| *x = -*x);
                r.rhs = -r.rhs;
                r.relation = r.relation.flipped();
            }
        }
        let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let first_slack = sf.ny;
        let first_artificial = first_slack + n_slack;
        let ncols = first_artificial + n_art;
        let mut t = vec![vec![T::zero(); ncols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (first_slack, first_artificial);
        for (i, r) in rows.iter().enumerate() {
            t[i][..sf.ny].copy_from_slice(&r.coeffs);
            t[i][ncols] = r.rhs;
            match r.relation {
                Relation::Le => {
                    t[i][s] = T::one();
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -T::one();
                    s += 1;
                    t[i][a] = T::one();
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[i][a] = T::one();
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        let rhs_scale = rows.iter().fold(T::one(), |acc, r| acc.max(r.rhs));
        let pivot_tol = (T::LP_TOL * T::lit(1e-3)).max(T::epsilon() * T::lit(100.0));
        Self {
            t,
            z: vec![T::zero(); ncols + 1],
            basis,
            ncols,
            first_artificial,
            rhs_scale,
            pivot_tol,
            iterations: 0,
            max_iterations: 200 * (m + ncols + 10),
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.ncols + 1;
        let p = self.t[r][e];
        for j in 0..w {
            self.t[r][j] = self.t[r][j] / p;
        }
        self.t[r][e] = T::one();
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != T::zero() {
                for j in 0..w {
                    row[j] = row[j] - f * prow[j];
                }
                row[e] = T::zero();
            }
        }
        let f = self.z[e];
        if f != T::zero() {
            for j in 0..w {
                self.z[j] = self.z[j] - f * prow[j];
            }
            self.z[e] = T::zero();
        }
        self.basis[r] = e;
    }

    fn set_objective(&mut self, c: &[T], allowed: usize) {
        let w = self.ncols + 1;
        let cost = |j: usize| if j < c.len() { c[j] } else { T::zero() };
        for j in 0..w {
            let mut v = if j < allowed { -cost(j) } else { T::zero() };
            for (i, row) in self.t.iter().enumerate() {
                let cb = cost(self.basis[i]);
                if cb != T::zero() {
                    v = v + cb * row[j];
                }
            }
            self.z[j] = v;
        }
    }

    /// Runs Bland-rule iterations over columns `< allowed`.
    /// Returns `false` on unboundedness.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let opt_tol = T::LP_TOL * T::lit(1e-2);
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::LpNumericalFailure(format!(
                    "no convergence after {} pivots",
                    self.max_iterations
                )));
            }
            let entering = (0..allowed).find(|&j| self.z[j] < -opt_tol);
            let Some(e) = entering else {
                return Ok(true);
            };
            let rhs = self.ncols;
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[e];
                if a > self.pivot_tol {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= self.pivot_tol * (T::one() + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, e);
            for row in &mut self.t {
                if row[rhs] < T::zero() && row[rhs] > -self.pivot_tol {
                    row[rhs] = T::zero();
                }
            }
        }
    }

    /// Returns `false` if the rows are infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        if self.first_artificial == self.ncols {
            return Ok(true);
        }
        let mut c = vec![T::zero(); self.ncols];
        for cj in c.iter_mut().skip(self.first_artificial) {
            *cj = -T::one();
        }
        self.set_objective(&c, self.ncols);
        self.iterate(self.ncols)?;
        let infeasibility = -self.z[self.ncols];
        if infeasibility > T::LP_TOL * self.rhs_scale {
            return Ok(false);
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < self.t.len() {
            if self.basis[r] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|&j| self.t[r][j].abs() > self.pivot_tol)
                    .max_by(|&a, &b| {
                        self.t[r][a]
                            .abs()
                            .partial_cmp(&self.t[r][b].abs())
                            .unwrap_or(std::cmp::Ordering::Equal)
                    });
                match col {
                    Some(j) => self.pivot(r, j),
                    None => {
                        // redundant equality row
                        self.t.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        Ok(true)
    }

    fn phase_two(&mut self, c: &[T]) -> Result<bool> {
        let allowed = self.first_artificial;
        self.set_objective(c, allowed);
        self.iterate(allowed)
    }

    fn primal(&self, ny: usize) -> Vec<T> {
        let mut y = vec![T::zero(); ny];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ny {
                y[b] = self.t[i][self.ncols].max(T::zero());
            }
        }
        y
    }
}
