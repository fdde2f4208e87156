//! H-representation polyhedra, homogenization, and the LP-backed
//! combinatorial checks: Farkas validity, redundancy, face cones and general
//! position.
//!
//! Constraint `j` of a polyhedron reads `a_j . x + b_j >= 0`, where `a_j` is
//! column `j` of the `d x n` matrix `a`. Constraint indices are 0-based in
//! code. In a [`HomogenizedFamily`] index 0 is the extra half-space
//! `x_0 >= 0` and constraint `j` moves to index `j + 1`, which makes the
//! homogenized labels coincide with the 1-based labels used in reports.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index_set::{IndexSet, MAX_ELEMENTS};
use crate::linalg::{column_rank, dot, norm2, Matrix};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::Scalar;

/// `{x in R^d : a_j . x + b_j >= 0 for all j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HPolyhedron<T> {
    a: Matrix<T>,
    b: Vec<T>,
}

impl<T: Scalar> HPolyhedron<T> {
    pub fn new(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        let (d, n) = (a.rows(), a.cols());
        if d == 0 || n == 0 {
            return Err(Error::InvalidPolyhedron(format!(
                "need d >= 1 and n >= 1, got d = {d}, n = {n}"
            )));
        }
        if n >= MAX_ELEMENTS {
            return Err(Error::InvalidPolyhedron(format!(
                "at most {} constraints supported, got {n}",
                MAX_ELEMENTS - 1
            )));
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "a has {n} columns but b has length {}",
                b.len()
            )));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolyhedron("non-finite entry".into()));
        }
        for j in 0..n {
            if (0..d).all(|i| a[(i, j)] == T::zero()) {
                return Err(Error::InvalidPolyhedron(format!("column {} of a is zero", j + 1)));
            }
        }
        Ok(Self { a, b })
    }

    /// `rows` is the `d x n` coefficient matrix given row by row.
    pub fn from_rows(rows: &[Vec<T>], b: Vec<T>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != b.len()) {
            return Err(Error::DimensionMismatch("ragged coefficient rows".into()));
        }
        Self::new(Matrix::from_rows(rows), b)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn num_constraints(&self) -> usize {
        self.a.cols()
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn normal(&self, j: usize) -> Vec<T> {
        self.a.column(j)
    }

    pub fn normal_norm(&self, j: usize) -> T {
        norm2(&self.normal(j))
    }

    /// `f_j(x) = a_j . x + b_j`.
    pub fn value(&self, j: usize, x: &[T]) -> T {
        (0..self.dim()).fold(self.b[j], |acc, i| acc + self.a[(i, j)] * x[i])
    }

    pub fn contains(&self, x: &[T]) -> bool {
        (0..self.num_constraints()).all(|j| self.value(j, x) >= T::zero())
    }

    pub fn with_offsets(&self, b: Vec<T>) -> Result<Self> {
        Self::new(self.a.clone(), b)
    }

    /// Keeps the listed constraints, in the given order.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        let cols: Vec<Vec<T>> = keep.iter().map(|&j| self.a.column(j)).collect();
        let b = keep.iter().map(|&j| self.b[j]).collect();
        Self::new(Matrix::from_columns(&cols), b)
    }

    pub fn homogenize(&self) -> HomogenizedFamily<T> {
        let (d, n) = (self.dim(), self.num_constraints());
        let mut columns = Matrix::zeros(d + 1, n + 1);
        columns[(0, 0)] = T::one();
        for j in 0..n {
            columns[(0, j + 1)] = self.b[j];
            for i in 0..d {
                columns[(i + 1, j + 1)] = self.a[(i, j)];
            }
        }
        HomogenizedFamily { columns }
    }

    pub fn cast<U: Scalar>(&self) -> HPolyhedron<U> {
        HPolyhedron {
            a: self.a.cast(),
            b: self.b.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }

    /// Adds the rows `f_j(x) = 0` for `j` in `equal` and `f_k(x) >= 0` for
    /// every constraint to an LP whose first `d` variables are `x`.
    fn add_face_rows(&self, lp: &mut LinearProgram<T>, equal: IndexSet, width: usize) {
        let d = self.dim();
        for j in 0..self.num_constraints() {
            let mut row = vec![T::zero(); width];
            for i in 0..d {
                row[i] = self.a[(i, j)];
            }
            let rel = if equal.contains(j) {
                Relation::Eq
            } else {
                Relation::Ge
            };
            lp.constraint(row, rel, -self.b[j]);
        }
    }

    /// A point of `F_J = P ∩ {f_j = 0, j in J}`, if nonempty.
    pub fn face_point(&self, face: IndexSet) -> Result<Option<Vec<T>>> {
        let d = self.dim();
        let mut lp = LinearProgram::new(d);
        self.add_face_rows(&mut lp, face, d);
        Ok(lp.solve()?.optimal().map(|s| s.x))
    }

    pub fn face_is_nonempty(&self, face: IndexSet) -> Result<bool> {
        Ok(self.face_point(face)?.is_some())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(!self.face_is_nonempty(IndexSet::EMPTY)?)
    }

    /// Dimension of the affine hull of `F_J`, or `None` when `F_J` is empty.
    ///
    /// Constraint `k` outside `J` is an implicit equality of the face when
    /// `max f_k` over the face is zero; the hull is cut out by the explicit
    /// and implicit equalities together.
    pub fn face_dimension(&self, face: IndexSet) -> Result<Option<usize>> {
        if !self.face_is_nonempty(face)? {
            return Ok(None);
        }
        let d = self.dim();
        let mut equalities = face;
        for k in 0..self.num_constraints() {
            if face.contains(k) {
                continue;
            }
            let mut lp = LinearProgram::new(d);
            self.add_face_rows(&mut lp, face, d);
            lp.maximize(self.normal(k));
            match lp.solve()? {
                LpOutcome::Unbounded => {}
                LpOutcome::Optimal(s) => {
                    if s.objective + self.b[k] <= T::STRICT_TOL {
                        equalities = equalities.with(k);
                    }
                }
                LpOutcome::Infeasible => {
                    return Err(Error::LpNumericalFailure(
                        "face became infeasible between solves".into(),
                    ))
                }
            }
        }
        let cols: Vec<Vec<T>> = equalities.iter().map(|j| self.normal(j)).collect();
        let rank = column_rank(&cols, T::RANK_TOL).rank;
        Ok(Some(d - rank))
    }
}

/// The homogenized family `{Ĥ_0, .., Ĥ_n}` as a `(d+1) x (n+1)` matrix of
/// normals. Column 0 is `e_0`; column `j + 1` is `(b_j, a_j)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogenizedFamily<T> {
    columns: Matrix<T>,
}

impl<T: Scalar> HomogenizedFamily<T> {
    pub fn columns(&self) -> &Matrix<T> {
        &self.columns
    }

    /// Ambient dimension `d + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.columns.rows()
    }

    /// Number of half-spaces including `Ĥ_0`.
    pub fn len(&self) -> usize {
        self.columns.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn normal(&self, k: usize) -> Vec<T> {
        self.columns.column(k)
    }

    /// Drops `Ĥ_0` and splits row 0 off as the offsets.
    pub fn dehomogenize(&self) -> Result<HPolyhedron<T>> {
        let (dp1, np1) = (self.columns.rows(), self.columns.cols());
        let mut a = Matrix::zeros(dp1 - 1, np1 - 1);
        let mut b = Vec::with_capacity(np1 - 1);
        for j in 1..np1 {
            b.push(self.columns[(0, j)]);
            for i in 1..dp1 {
                a[(i - 1, j - 1)] = self.columns[(i, j)];
            }
        }
        HPolyhedron::new(a, b)
    }

    /// LP over `x in [-1,1]^{d+1}` (plus `extra` trailing variables) with
    /// `â_j . x = 0` for `j` in `equal`.
    fn cone_lp(&self, equal: IndexSet, extra: usize) -> LinearProgram<T> {
        let dp1 = self.ambient_dim();
        let mut lp = LinearProgram::new(dp1 + extra);
        for i in 0..dp1 {
            lp.bounds(i, Some(-T::one()), Some(T::one()));
        }
        for j in equal.iter() {
            let mut row = self.normal(j);
            row.resize(dp1 + extra, T::zero());
            lp.constraint(row, Relation::Eq, T::zero());
        }
        lp
    }

    /// Maximal `s` such that some `x` with `|x|_inf <= 1` has `â_j . x = 0`
    /// on `J` and `â_k . x >= s` off `J`, together with that `x`.
    fn max_min_slack(&self, face: IndexSet) -> Result<(T, Vec<T>)> {
        let dp1 = self.ambient_dim();
        let mut lp = self.cone_lp(face, 1);
        lp.bounds(dp1, None, Some(T::one()));
        let mut c = vec![T::zero(); dp1 + 1];
        c[dp1] = T::one();
        lp.maximize(c);
        for k in (0..self.len()).filter(|&k| !face.contains(k)) {
            let mut row = self.normal(k);
            row.push(-T::one());
            lp.constraint(row, Relation::Ge, T::zero());
        }
        match lp.solve()? {
            LpOutcome::Optimal(s) => {
                let slack = s.x[dp1];
                let mut x = s.x;
                x.truncate(dp1);
                Ok((slack, x))
            }
            // x = 0, s = 0 is always feasible and s <= 1 bounds the objective
            other => Err(Error::LpNumericalFailure(format!(
                "slack LP returned {other:?}"
            ))),
        }
    }

    /// Max of `â_k . x` over `F̂_J ∩ [-1,1]^{d+1}`.
    fn max_over_cone(&self, face: IndexSet, k: usize) -> Result<T> {
        let dp1 = self.ambient_dim();
        let mut lp = self.cone_lp(face, 0);
        for m in (0..self.len()).filter(|&m| !face.contains(m)) {
            lp.constraint(self.normal(m), Relation::Ge, T::zero());
        }
        lp.maximize(self.normal(k));
        debug_assert_eq!(lp.num_vars(), dp1);
        match lp.solve()? {
            LpOutcome::Optimal(s) => Ok(s.objective),
            other => Err(Error::LpNumericalFailure(format!(
                "cone LP returned {other:?}"
            ))),
        }
    }

    /// A nonzero `x` with `â_j . x = 0` on `J` and `â_k . x > 0` off `J`,
    /// scaled to `|x|_inf = 1`, or `None` if none exists.
    pub fn relative_interior_point(&self, face: IndexSet) -> Result<Option<Vec<T>>> {
        if face.iter().any(|k| k >= self.len()) {
            return Err(Error::DimensionMismatch(format!(
                "index set {face} exceeds family of size {}",
                self.len()
            )));
        }
        if (0..self.len()).all(|k| face.contains(k)) {
            // strictness is vacuous: any nonzero vector of the null space
            let dp1 = self.ambient_dim();
            for i in 0..dp1 {
                let mut lp = self.cone_lp(face, 0);
                let mut c = vec![T::zero(); dp1];
                c[i] = T::one();
                lp.maximize(c);
                if let LpOutcome::Optimal(s) = lp.solve()? {
                    if s.objective > T::STRICT_TOL {
                        return Ok(Some(normalize_inf(s.x)));
                    }
                }
            }
            return Ok(None);
        }
        let (slack, x) = self.max_min_slack(face)?;
        Ok((slack > T::STRICT_TOL).then(|| normalize_inf(x)))
    }

    /// Dimension of the cone `F̂_J` and whether any decision was close to
    /// its threshold.
    pub fn cone_dimension(&self, face: IndexSet) -> Result<(usize, bool)> {
        let ten = T::lit(10.0);
        let near = |v: T| v > T::STRICT_TOL / ten && v < T::STRICT_TOL * ten;
        let mut near_tie = false;
        let mut equalities = face;
        let complement: Vec<usize> = (0..self.len()).filter(|&k| !face.contains(k)).collect();
        let all_strict = if complement.is_empty() {
            true
        } else {
            let (slack, _) = self.max_min_slack(face)?;
            near_tie |= near(slack);
            slack > T::STRICT_TOL
        };
        if !all_strict {
            for &k in &complement {
                let best = self.max_over_cone(face, k)?;
                near_tie |= near(best);
                if best <= T::STRICT_TOL {
                    equalities = equalities.with(k);
                }
            }
        }
        let cols: Vec<Vec<T>> = equalities.iter().map(|k| self.normal(k)).collect();
        let rank = column_rank(&cols, T::RANK_TOL);
        near_tie |= rank.near_tie;
        Ok((self.ambient_dim() - rank.rank, near_tie))
    }

    pub fn classify(&self, face: IndexSet) -> Result<(ConeClass, bool)> {
        let (dim, mut near_tie) = self.cone_dimension(face)?;
        let class = if dim == 0 {
            ConeClass::ZeroCone
        } else if face.len() <= self.ambient_dim() && dim == self.ambient_dim() - face.len() {
            let cols: Vec<Vec<T>> = face.iter().map(|k| self.normal(k)).collect();
            let rank = column_rank(&cols, T::RANK_TOL);
            near_tie |= rank.near_tie;
            if rank.rank == face.len() {
                ConeClass::FullDimCone
            } else {
                ConeClass::Violation
            }
        } else {
            ConeClass::Violation
        };
        Ok((class, near_tie))
    }

    /// Checks whether every `F̂_J` is a `(d+1-|J|)`-dimensional cone or `{0}`.
    pub fn check_general_position(&self) -> Result<GeneralPositionReport> {
        self.check_general_position_with(true)
    }

    /// Enumerates index sets by increasing cardinality (lexicographic within
    /// a level) and skips supersets of zero cones. With `parallel` the sets
    /// of one level are classified concurrently; the result is identical.
    pub fn check_general_position_with(&self, parallel: bool) -> Result<GeneralPositionReport> {
        let ground = self.len();
        let mut face_dims = BTreeMap::new();
        let mut near_ties = Vec::new();
        let mut level = vec![IndexSet::EMPTY];
        while !level.is_empty() {
            let classified: Vec<Result<(ConeClass, bool)>> = if parallel {
                level.par_iter().map(|&j| self.classify(j)).collect()
            } else {
                level.iter().map(|&j| self.classify(j)).collect()
            };
            let mut alive = Vec::new();
            for (&j, res) in level.iter().zip(classified) {
                let (class, tie) = res?;
                if tie {
                    near_ties.push(j);
                }
                face_dims.insert(j, class);
                if class != ConeClass::ZeroCone {
                    alive.push(j);
                }
            }
            level = next_level(&alive, ground);
        }
        let witness = face_dims
            .iter()
            .filter(|(_, c)| **c == ConeClass::Violation)
            .map(|(j, _)| *j)
            .max_by(|x, y| x.len().cmp(&y.len()).then(y.cmp(x)));
        Ok(GeneralPositionReport {
            in_general_position: witness.is_none(),
            witness,
            face_dims,
            near_ties,
        })
    }
}

/// Sets of the next cardinality all of whose facets are in `alive`.
fn next_level(alive: &[IndexSet], ground: usize) -> Vec<IndexSet> {
    let set: std::collections::HashSet<IndexSet> = alive.iter().copied().collect();
    let mut out = Vec::new();
    for &j in alive {
        let start = j.iter().last().map_or(0, |m| m + 1);
        for i in start..ground {
            let cand = j.with(i);
            if cand.facets().all(|f| set.contains(&f)) {
                out.push(cand);
            }
        }
    }
    out.sort();
    out
}

fn normalize_inf<T: Scalar>(mut x: Vec<T>) -> Vec<T> {
    let m = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m > T::zero() {
        x.iter_mut().for_each(|v| *v = *v / m);
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConeClass {
    /// `F̂_J` has dimension `d + 1 - |J|`.
    FullDimCone,
    /// `F̂_J = {0}`.
    ZeroCone,
    /// Neither; the family is not in general position.
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralPositionReport {
    pub in_general_position: bool,
    /// A violating set of homogenized labels: the largest one found,
    /// lexicographically first among equals.
    pub witness: Option<IndexSet>,
    /// Classification of every set that was examined (labels over `0..=n`).
    pub face_dims: BTreeMap<IndexSet, ConeClass>,
    /// Sets whose slack or rank decision fell within a factor of ten of the
    /// threshold. Not fatal, but the classification there is fragile.
    pub near_ties: Vec<IndexSet>,
}

impl GeneralPositionReport {
    pub fn class_of(&self, homogenized: IndexSet) -> Option<ConeClass> {
        self.face_dims.get(&homogenized).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValidityKind {
    /// `c.x + c0 >= 0` follows from a nonnegative combination of the rows.
    ValidCaseI,
    /// The rows are contradictory; every inequality is valid.
    ValidCaseII,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityCertificate<T> {
    pub kind: ValidityKind,
    pub multipliers: Option<Vec<T>>,
}

/// Decides whether `c.x + c0 >= 0` holds on `P` and returns Farkas
/// multipliers `λ >= 0` when it does.
pub fn is_valid<T: Scalar>(
    p: &HPolyhedron<T>,
    c: &[T],
    c0: T,
) -> Result<ValidityCertificate<T>> {
    let (d, n) = (p.dim(), p.num_constraints());
    if c.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "inequality has {} coefficients, polyhedron dimension {d}",
            c.len()
        )));
    }
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        lp.nonnegative(j);
    }
    if p.is_empty()? {
        // a λ = 0, Σλ = 1, minimize b.λ
        for i in 0..d {
            lp.constraint(p.a().row(i).to_vec(), Relation::Eq, T::zero());
        }
        lp.constraint(vec![T::one(); n], Relation::Eq, T::one());
        lp.minimize(p.b().to_vec());
        return match lp.solve()? {
            LpOutcome::Optimal(s) if s.objective < T::zero() => Ok(ValidityCertificate {
                kind: ValidityKind::ValidCaseII,
                multipliers: Some(s.x),
            }),
            other => Err(Error::LpNumericalFailure(format!(
                "empty polyhedron without a Farkas ray: {other:?}"
            ))),
        };
    }
    for i in 0..d {
        lp.constraint(p.a().row(i).to_vec(), Relation::Eq, c[i]);
    }
    lp.minimize(p.b().to_vec());
    Ok(match lp.solve()? {
        LpOutcome::Optimal(s) if s.objective <= c0 + T::LP_TOL * (T::one() + c0.abs()) => {
            ValidityCertificate {
                kind: ValidityKind::ValidCaseI,
                multipliers: Some(s.x),
            }
        }
        LpOutcome::Unbounded => {
            return Err(Error::LpNumericalFailure(
                "unbounded multiplier LP on a nonempty polyhedron".into(),
            ))
        }
        _ => ValidityCertificate {
            kind: ValidityKind::Invalid,
            multipliers: None,
        },
    })
}

/// Removes constraints implied by the others, one at a time, so that the
/// survivors are exactly the bounding half-spaces. Returns the reduced
/// polyhedron and the removed 0-based indices.
pub fn strip_redundant<T: Scalar>(p: &HPolyhedron<T>) -> Result<(HPolyhedron<T>, Vec<usize>)> {
    if p.is_empty()? {
        return Err(Error::EmptyPolyhedron);
    }
    let n = p.num_constraints();
    let mut keep: Vec<usize> = (0..n).collect();
    let mut removed = Vec::new();
    for j in 0..n {
        let others: Vec<usize> = keep.iter().copied().filter(|&k| k != j).collect();
        if others.is_empty() {
            continue;
        }
        let rest = p.select(&others)?;
        let mut lp = LinearProgram::new(p.dim());
        rest.add_face_rows(&mut lp, IndexSet::EMPTY, p.dim());
        lp.minimize(p.normal(j));
        let redundant = match lp.solve()? {
            LpOutcome::Optimal(s) => s.objective + p.b()[j] >= -T::LP_TOL,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => return Err(Error::EmptyPolyhedron),
        };
        if redundant {
            keep.retain(|&k| k != j);
            removed.push(j);
        }
    }
    Ok((p.select(&keep)?, removed))
}

/// Index sets `J ⊆ [n]` with nonempty `F_J`, found by one feasibility LP per
/// subset. Exponential; intended as an independent reference.
pub fn brute_force_nonempty_faces<T: Scalar>(p: &HPolyhedron<T>) -> Result<Vec<IndexSet>> {
    let n = p.num_constraints();
    let mut out = Vec::new();
    for k in 0..=n {
        for j in IndexSet::combinations(n, k) {
            if p.face_is_nonempty(j)? {
                out.push(j);
            }
        }
    }
    Ok(out)
}

/// Inner product helper used by the tests of neighbouring modules.
pub fn evaluate_inequality<T: Scalar>(c: &[T], c0: T, x: &[T]) -> T {
    dot(c, x) + c0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square() -> HPolyhedron<f64> {
        HPolyhedron::from_rows(
            &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
            vec![0.0, 1.0, 0.0, 1.0],
        )
        .unwrap()
    }

    fn hs(labels: &[usize]) -> IndexSet {
        IndexSet::from_slice(labels)
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            HPolyhedron::from_rows(&[vec![0.0, 1.0]], vec![0.0, 0.0]),
            Err(Error::InvalidPolyhedron(_))
        ));
        assert!(matches!(
            HPolyhedron::from_rows(&[vec![1.0]], vec![0.0, 0.0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(HPolyhedron::from_rows(&[vec![f64::NAN]], vec![0.0]).is_err());
    }

    #[test]
    fn homogenize_examples() {
        let h = square().homogenize();
        let expect = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, -1.0],
        ];
        for (k, col) in expect.iter().enumerate() {
            assert_eq!(h.normal(k), col.to_vec());
        }
        assert_eq!(h.dehomogenize().unwrap(), square());

        let p = HPolyhedron::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
        let h = p.homogenize();
        assert_eq!(h.normal(0), vec![1.0, 0.0]);
        assert_eq!(h.normal(1), vec![0.0, 1.0]);

        let p = HPolyhedron::from_rows(&[vec![1.0], vec![0.0]], vec![5.0]).unwrap();
        let h = p.homogenize();
        assert_eq!(h.normal(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(h.normal(1), vec![5.0, 1.0, 0.0]);
    }

    #[test]
    fn relative_interior_points_of_square_cones() {
        let h = square().homogenize();
        // J = {1,3}: x1 = x2 = 0, x0 > 0
        let x = h.relative_interior_point(hs(&[1, 3])).unwrap().unwrap();
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-12);
        assert!(x[0] > 0.0);
        for k in [0, 2, 4] {
            assert!(dot(&h.normal(k), &x) > 1e-7);
        }
        assert!(h.relative_interior_point(hs(&[1, 2])).unwrap().is_none());
        let x = h.relative_interior_point(IndexSet::EMPTY).unwrap().unwrap();
        assert!((0..5).all(|k| dot(&h.normal(k), &x) > 1e-7));
        // interior direction of the unit square: 0 < x1 < x0, 0 < x2 < x0
        assert!(x[1] > 0.0 && x[1] < x[0] && x[2] > 0.0 && x[2] < x[0]);
    }

    #[test]
    fn general_position_of_paper_examples() {
        let rep = square().homogenize().check_general_position().unwrap();
        assert!(rep.in_general_position);
        assert!(rep.witness.is_none());
        assert_eq!(rep.class_of(hs(&[0])), Some(ConeClass::ZeroCone));
        assert_eq!(rep.class_of(hs(&[1, 3])), Some(ConeClass::FullDimCone));
        assert_eq!(rep.class_of(hs(&[1, 2])), Some(ConeClass::ZeroCone));
        assert!(rep.near_ties.is_empty());

        let three = square().select(&[0, 1, 2]).unwrap();
        let rep = three.homogenize().check_general_position().unwrap();
        assert!(!rep.in_general_position);
        assert_eq!(rep.witness, Some(hs(&[0, 1, 2])));
        assert_eq!(rep.class_of(hs(&[0, 1, 2])), Some(ConeClass::Violation));

        let five = HPolyhedron::from_rows(
            &[vec![1.0, -1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, -1.0, 1.0]],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let rep = five.homogenize().check_general_position().unwrap();
        assert!(!rep.in_general_position);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let five = HPolyhedron::from_rows(
            &[vec![1.0, -1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, -1.0, 1.0]],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let h = five.homogenize();
        assert_eq!(
            h.check_general_position_with(false).unwrap(),
            h.check_general_position_with(true).unwrap()
        );
    }

    #[test]
    fn farkas_certificates() {
        let cert = is_valid(&square(), &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(cert.kind, ValidityKind::ValidCaseI);
        let lam = cert.multipliers.unwrap();
        for (l, e) in lam.iter().zip([1.0, 0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*l, e, epsilon = 1e-12);
        }
        let cert = is_valid(&square(), &[-1.0, 0.0], -0.5).unwrap();
        assert_eq!(cert.kind, ValidityKind::Invalid);
        assert!(cert.multipliers.is_none());

        let empty = HPolyhedron::from_rows(&[vec![1.0, -1.0]], vec![-1.0, 0.0]).unwrap();
        let cert = is_valid(&empty, &[3.0], -100.0).unwrap();
        assert_eq!(cert.kind, ValidityKind::ValidCaseII);
        let lam = cert.multipliers.unwrap();
        assert_abs_diff_eq!(lam[0] - lam[1], 0.0, epsilon = 1e-12);
        assert!(-lam[0] < 0.0);
    }

    #[test]
    fn redundancy_examples() {
        let five = HPolyhedron::from_rows(
            &[vec![1.0, -1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, -1.0, 1.0]],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let (stripped, removed) = strip_redundant(&five).unwrap();
        assert_eq!(removed, vec![4]);
        assert_eq!(stripped, square());

        let (_, removed) = strip_redundant(&square()).unwrap();
        assert!(removed.is_empty());

        let line = HPolyhedron::from_rows(&[vec![1.0, 1.0]], vec![0.0, 1.0]).unwrap();
        let (stripped, removed) = strip_redundant(&line).unwrap();
        assert_eq!(removed, vec![1]);
        assert_eq!(stripped.num_constraints(), 1);

        let dup = HPolyhedron::from_rows(&[vec![1.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let (stripped, removed) = strip_redundant(&dup).unwrap();
        assert_eq!(removed, vec![0]);
        assert_eq!(stripped.num_constraints(), 1);

        let empty = HPolyhedron::from_rows(&[vec![1.0, -1.0]], vec![-1.0, 0.0]).unwrap();
        assert_eq!(strip_redundant(&empty), Err(Error::EmptyPolyhedron));
    }

    #[test]
    fn face_dimensions_of_square() {
        let sq = square();
        assert_eq!(sq.face_dimension(IndexSet::EMPTY).unwrap(), Some(2));
        assert_eq!(sq.face_dimension(hs(&[0])).unwrap(), Some(1));
        assert_eq!(sq.face_dimension(hs(&[0, 2])).unwrap(), Some(0));
        assert_eq!(sq.face_dimension(hs(&[0, 1])).unwrap(), None);
    }

    #[test]
    fn brute_force_faces_of_square() {
        let faces = brute_force_nonempty_faces(&square()).unwrap();
        assert_eq!(faces.len(), 9);
    }
}
