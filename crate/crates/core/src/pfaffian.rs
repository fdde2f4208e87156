//! Gram-matrix algebra and the Pfaffian system for the face derivatives
//! `g^J = ∂_b^J φ`, `J ∈ 𝓕`.
//!
//! Along `b` the system is
//!
//! ```text
//! ∂_{b_j} g^J = g^{J∪j}                                         (j ∉ J)
//! ∂_{b_j} g^J = -Σ_{k∈J} α_J^{jk} (b_k g^J + Σ_{ℓ∉J} α_{kℓ} g^{J∪ℓ})   (j ∈ J)
//! ```
//!
//! with `g^K = 0` for `K ∉ 𝓕`, and along `a`
//! `∂_{a_ij} g = Σ_k a_ik (∂_{b_k} B_j + B_j B_k) g`.
//!
//! Besides the raw coefficient matrices the system exposes a rescaled basis
//! `z^J = g^J / d_J(b)`, where `d_J` is the Gaussian density of
//! `(a_j . X)_{j∈J}` at `-b_J`. In that basis `z^J` is the conditional
//! probability of `F_J` given the affine hull of the face, the system is
//! strictly triangular, and `z^J` tends to one far away from the boundary.

use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::geometry::HPolyhedron;
use crate::index_set::IndexSet;
use crate::linalg::{Cholesky, Matrix};
use crate::Scalar;

/// `α = aᵀa` and the inverses and determinants of `α_J` for `J ∈ 𝓕`,
/// stored in basis order.
#[derive(Clone, Debug)]
pub struct GramCache<T> {
    alpha: Matrix<T>,
    inverses: Vec<Matrix<T>>,
    determinants: Vec<T>,
}

impl<T: Scalar> GramCache<T> {
    pub fn new(a: &Matrix<T>, complex: &SimplicialComplex) -> Result<Self> {
        let alpha = a.transpose().matmul(a);
        let mut inverses = Vec::with_capacity(complex.len());
        let mut determinants = Vec::with_capacity(complex.len());
        for &face in complex.faces() {
            let sub = alpha.principal(&face.to_vec());
            if face.is_empty() {
                inverses.push(sub);
                determinants.push(T::one());
                continue;
            }
            let ch = Cholesky::with_relative_floor(&sub).ok_or(Error::SingularGram(face))?;
            inverses.push(ch.inverse());
            determinants.push(ch.determinant());
        }
        Ok(Self {
            alpha,
            inverses,
            determinants,
        })
    }

    pub fn alpha(&self) -> &Matrix<T> {
        &self.alpha
    }

    /// `α_J⁻¹` for the face at basis position `idx`.
    pub fn inverse(&self, idx: usize) -> &Matrix<T> {
        &self.inverses[idx]
    }

    pub fn determinant(&self, idx: usize) -> T {
        self.determinants[idx]
    }
}

pub fn gram_cache<T: Scalar>(p: &HPolyhedron<T>, c: &SimplicialComplex) -> Result<GramCache<T>> {
    GramCache::new(p.a(), c)
}

/// Step from face `J` to the face `J ∪ {ell}` of the complex.
#[derive(Clone, Debug)]
pub struct Edge<T> {
    pub ell: usize,
    /// Basis position of `J ∪ {ell}`.
    pub target: usize,
    /// `α_J⁻¹ α_{J,ell}`; the conditional offset of constraint `ell` on the
    /// affine hull of `F_J` is `b_ell - weights . b_J`.
    pub weights: Vec<T>,
    /// Conditional standard deviation `sqrt(α_ll - α_{ℓJ} α_J⁻¹ α_{Jℓ})`.
    pub sigma: T,
}

impl<T: Scalar> Edge<T> {
    pub fn offset(&self, members: &[usize], b: &[T]) -> T {
        members
            .iter()
            .zip(&self.weights)
            .fold(b[self.ell], |acc, (&k, &w)| acc - w * b[k])
    }
}

#[derive(Clone, Debug)]
struct Row<T> {
    members: Vec<usize>,
    edges: Vec<Edge<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularDistance {
    /// `min det α_J` over the nonempty faces.
    pub value: f64,
    /// Set when the value is below `1e-8` times the geometric mean of
    /// `diag α`.
    pub near_singular: bool,
}

/// Coordinate of the parameter space `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    B(usize),
    A(usize, usize),
}

impl Coordinate {
    /// All coordinates: `b_1..b_n`, then `a_ij` row by row.
    pub fn all(d: usize, n: usize) -> Vec<Coordinate> {
        let mut out: Vec<Coordinate> = (0..n).map(Coordinate::B).collect();
        for i in 0..d {
            for j in 0..n {
                out.push(Coordinate::A(i, j));
            }
        }
        out
    }

    pub fn label(self) -> String {
        match self {
            Coordinate::B(j) => format!("b_{}", j + 1),
            Coordinate::A(i, j) => format!("a_{}_{}", i + 1, j + 1),
        }
    }
}

/// Pfaffian system of `φ` at a fixed `a`, for the nerve `𝓕`.
#[derive(Clone, Debug)]
pub struct PfaffianSystem<T> {
    complex: SimplicialComplex,
    gram: GramCache<T>,
    a: Matrix<T>,
    rows: Vec<Row<T>>,
}

impl<T: Scalar> PfaffianSystem<T> {
    pub fn new(p: &HPolyhedron<T>, complex: SimplicialComplex) -> Result<Self> {
        Self::with_matrix(p.a().clone(), complex)
    }

    /// Builds the system for the coefficient matrix `a` (`d x n`); the
    /// complex is taken as given.
    pub fn with_matrix(a: Matrix<T>, complex: SimplicialComplex) -> Result<Self> {
        if a.cols() != complex.ground_size() {
            return Err(Error::DimensionMismatch(format!(
                "a has {} columns, complex has ground size {}",
                a.cols(),
                complex.ground_size()
            )));
        }
        let gram = GramCache::new(&a, &complex)?;
        let alpha = gram.alpha();
        let n = complex.ground_size();
        let mut rows = Vec::with_capacity(complex.len());
        for (idx, &face) in complex.faces().iter().enumerate() {
            let members = face.to_vec();
            let inv = gram.inverse(idx);
            let mut edges = Vec::new();
            for ell in (0..n).filter(|&l| !face.contains(l)) {
                let Some(target) = complex.index_of(face.with(ell)) else {
                    continue;
                };
                let cross: Vec<T> = members.iter().map(|&k| alpha[(k, ell)]).collect();
                let weights = inv.mul_vec(&cross);
                let explained = cross.iter().zip(&weights).fold(T::zero(), |s, (&c, &w)| s + c * w);
                let var = alpha[(ell, ell)] - explained;
                if !(var > T::zero()) {
                    return Err(Error::SingularGram(face.with(ell)));
                }
                edges.push(Edge {
                    ell,
                    target,
                    weights,
                    sigma: var.sqrt(),
                });
            }
            rows.push(Row { members, edges });
        }
        Ok(Self {
            complex,
            gram,
            a,
            rows,
        })
    }

    /// Same complex, different coefficient matrix.
    pub fn rebuild(&self, a: Matrix<T>) -> Result<Self> {
        Self::with_matrix(a, self.complex.clone())
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn gram(&self) -> &GramCache<T> {
        &self.gram
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn dimension(&self) -> usize {
        self.complex.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.complex.ground_size()
    }

    pub fn basis(&self) -> &[IndexSet] {
        self.complex.faces()
    }

    /// Elements of the face at basis position `idx`, ascending.
    pub fn members(&self, idx: usize) -> &[usize] {
        &self.rows[idx].members
    }

    /// Edges leaving the face at basis position `idx`.
    pub fn edges(&self, idx: usize) -> &[Edge<T>] {
        &self.rows[idx].edges
    }

    fn check_b(&self, b: &[T]) {
        assert_eq!(b.len(), self.num_constraints(), "offset vector has wrong length");
    }

    /// `α_J⁻¹ b_J` for the face at `idx`.
    fn solved_offsets(&self, idx: usize, b: &[T]) -> Vec<T> {
        let bj: Vec<T> = self.rows[idx].members.iter().map(|&k| b[k]).collect();
        self.gram.inverse(idx).mul_vec(&bj)
    }

    /// `Σ_j delta_j B_j(b) y`, without materializing the matrices.
    pub fn apply_b(&self, delta: &[T], b: &[T], y: &[T]) -> Vec<T> {
        self.check_b(b);
        let mut out = vec![T::zero(); self.dimension()];
        for (idx, row) in self.rows.iter().enumerate() {
            let mut acc = T::zero();
            for e in &row.edges {
                acc = acc + e.offset(&row.members, delta) * y[e.target];
            }
            if !row.members.is_empty() {
                let c = self.solved_offsets(idx, b);
                let drift = row.members.iter().zip(&c).fold(T::zero(), |s, (&k, &ck)| s + delta[k] * ck);
                acc = acc - drift * y[idx];
            }
            out[idx] = acc;
        }
        out
    }

    /// `B_j(b)`: coefficient matrix of `∂_{b_j}`.
    pub fn b_direction_matrix(&self, j: usize, b: &[T]) -> Matrix<T> {
        let mut delta = vec![T::zero(); self.num_constraints()];
        delta[j] = T::one();
        self.b_path_matrix(&delta, b)
    }

    /// `Σ_j delta_j B_j(b)`.
    pub fn b_path_matrix(&self, delta: &[T], b: &[T]) -> Matrix<T> {
        self.check_b(b);
        let dim = self.dimension();
        let mut m = Matrix::zeros(dim, dim);
        for (idx, row) in self.rows.iter().enumerate() {
            for e in &row.edges {
                m[(idx, e.target)] = m[(idx, e.target)] + e.offset(&row.members, delta);
            }
            if !row.members.is_empty() {
                let c = self.solved_offsets(idx, b);
                let drift = row.members.iter().zip(&c).fold(T::zero(), |s, (&k, &ck)| s + delta[k] * ck);
                m[(idx, idx)] = m[(idx, idx)] - drift;
            }
        }
        m
    }

    /// `∂_{b_k} B_j`, a constant matrix supported on the diagonal.
    pub fn b_derivative_matrix(&self, j: usize, k: usize) -> Matrix<T> {
        let dim = self.dimension();
        let mut m = Matrix::zeros(dim, dim);
        for (idx, row) in self.rows.iter().enumerate() {
            let pj = row.members.iter().position(|&x| x == j);
            let pk = row.members.iter().position(|&x| x == k);
            if let (Some(pj), Some(pk)) = (pj, pk) {
                m[(idx, idx)] = -self.gram.inverse(idx)[(pj, pk)];
            }
        }
        m
    }

    /// `C_{a_ij}(b) = Σ_k a_ik (∂_{b_k} B_j + B_j B_k)`.
    pub fn a_direction_matrix(&self, i: usize, j: usize, b: &[T]) -> Matrix<T> {
        let dim = self.dimension();
        let bj = self.b_direction_matrix(j, b);
        let mut c = Matrix::zeros(dim, dim);
        for k in 0..self.num_constraints() {
            let aik = self.a[(i, k)];
            if aik == T::zero() {
                continue;
            }
            let mut term = self.b_derivative_matrix(j, k);
            term.add_scaled(T::one(), &bj.matmul(&self.b_direction_matrix(k, b)));
            c.add_scaled(aik, &term);
        }
        c
    }

    /// `Σ_ij da_ij C_{a_ij}(b) y` for a `d x n` direction `da`.
    pub fn apply_a(&self, da: &Matrix<T>, b: &[T], y: &[T]) -> Vec<T> {
        let n = self.num_constraints();
        // G = daᵀ a, so the sum is Σ_j Σ_k G_jk (∂_k B_j + B_j B_k) y
        let g = da.transpose().matmul(&self.a);
        let unit = |k: usize| {
            let mut e = vec![T::zero(); n];
            e[k] = T::one();
            e
        };
        let bk_y: Vec<Vec<T>> = (0..n).map(|k| self.apply_b(&unit(k), b, y)).collect();
        let mut out = vec![T::zero(); self.dimension()];
        for j in 0..n {
            let mut u = vec![T::zero(); self.dimension()];
            for k in 0..n {
                let gjk = g[(j, k)];
                if gjk != T::zero() {
                    u.iter_mut().zip(&bk_y[k]).for_each(|(ui, &v)| *ui = *ui + gjk * v);
                }
            }
            let bj_u = self.apply_b(&unit(j), b, &u);
            out.iter_mut().zip(&bj_u).for_each(|(o, &v)| *o = *o + v);
            // ∂_k B_j is diagonal: -Σ_k G_jk α_J^{jk} on rows with j ∈ J
            for (idx, row) in self.rows.iter().enumerate() {
                let Some(pj) = row.members.iter().position(|&x| x == j) else {
                    continue;
                };
                let inv = self.gram.inverse(idx);
                let s = row
                    .members
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |s, (pk, &k)| s + g[(j, k)] * inv[(pj, pk)]);
                out[idx] = out[idx] - s * y[idx];
            }
        }
        out
    }

    /// Coefficient matrix of the derivative along `coord` at `b`.
    pub fn coefficient(&self, coord: Coordinate, b: &[T]) -> Matrix<T> {
        match coord {
            Coordinate::B(j) => self.b_direction_matrix(j, b),
            Coordinate::A(i, j) => self.a_direction_matrix(i, j, b),
        }
    }

    /// Derivative of `coefficient(of)` along `along`, in closed form.
    pub fn coefficient_derivative(&self, of: Coordinate, along: Coordinate, b: &[T]) -> Matrix<T> {
        match along {
            Coordinate::B(m) => match of {
                Coordinate::B(j) => self.b_derivative_matrix(j, m),
                Coordinate::A(i, j) => {
                    let dim = self.dimension();
                    let bj = self.b_direction_matrix(j, b);
                    let dmj = self.b_derivative_matrix(j, m);
                    let mut out = Matrix::zeros(dim, dim);
                    for k in 0..self.num_constraints() {
                        let aik = self.a[(i, k)];
                        if aik == T::zero() {
                            continue;
                        }
                        let mut term = dmj.matmul(&self.b_direction_matrix(k, b));
                        term.add_scaled(T::one(), &bj.matmul(&self.b_derivative_matrix(k, m)));
                        out.add_scaled(aik, &term);
                    }
                    out
                }
            },
            Coordinate::A(i2, j2) => {
                let sens = self.sensitivity(i2, j2);
                match of {
                    Coordinate::B(j) => self.b_direction_matrix_da(&sens, j, b),
                    Coordinate::A(i, j) => {
                        let dim = self.dimension();
                        let bj = self.b_direction_matrix(j, b);
                        let dbj = self.b_direction_matrix_da(&sens, j, b);
                        let mut out = Matrix::zeros(dim, dim);
                        if i == i2 {
                            out.add_scaled(T::one(), &self.b_derivative_matrix(j, j2));
                            out.add_scaled(T::one(), &bj.matmul(&self.b_direction_matrix(j2, b)));
                        }
                        for k in 0..self.num_constraints() {
                            let aik = self.a[(i, k)];
                            if aik == T::zero() {
                                continue;
                            }
                            let mut term = self.b_derivative_matrix_da(&sens, j, k);
                            term.add_scaled(T::one(), &dbj.matmul(&self.b_direction_matrix(k, b)));
                            term.add_scaled(
                                T::one(),
                                &bj.matmul(&self.b_direction_matrix_da(&sens, k, b)),
                            );
                            out.add_scaled(aik, &term);
                        }
                        out
                    }
                }
            }
        }
    }

    /// Per face, `∂(α_J⁻¹)` and the derivatives of the edge weights with
    /// respect to `a_{i j}`.
    fn sensitivity(&self, i: usize, j: usize) -> Vec<(Matrix<T>, Vec<Vec<T>>)> {
        // ∂α_{kl}/∂a_ij = δ_kj a_il + δ_lj a_ik
        let n = self.num_constraints();
        let mut dalpha = Matrix::zeros(n, n);
        for l in 0..n {
            dalpha[(j, l)] = dalpha[(j, l)] + self.a[(i, l)];
            dalpha[(l, j)] = dalpha[(l, j)] + self.a[(i, l)];
        }
        let alpha = self.gram.alpha();
        self.rows
            .iter()
            .enumerate()
            .map(|(idx, row)| {
                let inv = self.gram.inverse(idx);
                let dsub = dalpha.principal(&row.members);
                let dinv = inv.matmul(&dsub).matmul(inv).scaled(-T::one());
                let dw = row
                    .edges
                    .iter()
                    .map(|e| {
                        let cross: Vec<T> = row.members.iter().map(|&k| alpha[(k, e.ell)]).collect();
                        let dcross: Vec<T> = row.members.iter().map(|&k| dalpha[(k, e.ell)]).collect();
                        let x = dinv.mul_vec(&cross);
                        let y = inv.mul_vec(&dcross);
                        x.iter().zip(&y).map(|(&u, &v)| u + v).collect()
                    })
                    .collect();
                (dinv, dw)
            })
            .collect()
    }

    fn b_direction_matrix_da(&self, sens: &[(Matrix<T>, Vec<Vec<T>>)], j: usize, b: &[T]) -> Matrix<T> {
        let dim = self.dimension();
        let mut m = Matrix::zeros(dim, dim);
        for (idx, row) in self.rows.iter().enumerate() {
            let Some(pj) = row.members.iter().position(|&x| x == j) else {
                continue;
            };
            let (dinv, dw) = &sens[idx];
            for (e, dwe) in row.edges.iter().zip(dw) {
                m[(idx, e.target)] = m[(idx, e.target)] - dwe[pj];
            }
            let bj: Vec<T> = row.members.iter().map(|&k| b[k]).collect();
            m[(idx, idx)] = m[(idx, idx)] - dinv.mul_vec(&bj)[pj];
        }
        m
    }

    fn b_derivative_matrix_da(&self, sens: &[(Matrix<T>, Vec<Vec<T>>)], j: usize, k: usize) -> Matrix<T> {
        let dim = self.dimension();
        let mut m = Matrix::zeros(dim, dim);
        for (idx, row) in self.rows.iter().enumerate() {
            let pj = row.members.iter().position(|&x| x == j);
            let pk = row.members.iter().position(|&x| x == k);
            if let (Some(pj), Some(pk)) = (pj, pk) {
                m[(idx, idx)] = -sens[idx].0[(pj, pk)];
            }
        }
        m
    }

    /// `‖∂₁c₂ + c₂c₁ − ∂₂c₁ − c₁c₂‖_∞` at `(a, b)`.
    pub fn integrability_residual(&self, b: &[T], dir1: Coordinate, dir2: Coordinate) -> T {
        if dir1 == dir2 {
            return T::zero();
        }
        let c1 = self.coefficient(dir1, b);
        let c2 = self.coefficient(dir2, b);
        let mut r = self.coefficient_derivative(dir2, dir1, b);
        r.add_scaled(T::one(), &c2.matmul(&c1));
        r.add_scaled(-T::one(), &self.coefficient_derivative(dir1, dir2, b));
        r.add_scaled(-T::one(), &c1.matmul(&c2));
        r.max_abs()
    }

    /// Largest violation of `b_j e_J + Σ_k α_jk Row_J(B_k) = 0` over
    /// `J ∈ 𝓕`, `j ∈ J`.
    pub fn op_p3_residual(&self, b: &[T]) -> T {
        let n = self.num_constraints();
        let alpha = self.gram.alpha();
        let bk: Vec<Matrix<T>> = (0..n).map(|k| self.b_direction_matrix(k, b)).collect();
        let mut worst = T::zero();
        for (idx, row) in self.rows.iter().enumerate() {
            for &j in &row.members {
                for col in 0..self.dimension() {
                    let mut v = if col == idx { b[j] } else { T::zero() };
                    for (k, m) in bk.iter().enumerate() {
                        v = v + alpha[(j, k)] * m[(idx, col)];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    pub fn singular_distance(&self) -> SingularDistance {
        let n = self.num_constraints();
        let min_det = (1..self.dimension())
            .map(|idx| self.gram.determinant(idx).as_f64())
            .fold(f64::INFINITY, f64::min);
        let value = if min_det.is_finite() { min_det } else { 1.0 };
        let alpha = self.gram.alpha();
        let log_mean = (0..n).map(|j| alpha[(j, j)].as_f64().ln()).sum::<f64>() / n as f64;
        SingularDistance {
            value,
            near_singular: value < 1e-8 * log_mean.exp(),
        }
    }

    /// `ln d_J(b)`, the log density of `(a_j . X)_{j∈J}` at `-b_J`.
    pub fn log_scale(&self, idx: usize, b: &[T]) -> T {
        let members = &self.rows[idx].members;
        if members.is_empty() {
            return T::zero();
        }
        let c = self.solved_offsets(idx, b);
        let quad = members.iter().zip(&c).fold(T::zero(), |s, (&k, &ck)| s + b[k] * ck);
        let m = T::lit(members.len() as f64);
        -(quad + m * T::lit(std::f64::consts::TAU.ln()) + self.gram.determinant(idx).ln()) * T::lit(0.5)
    }

    /// Converts the rescaled state `z` to `g`.
    pub fn unscale(&self, b: &[T], z: &[T]) -> Vec<T> {
        (0..self.dimension()).map(|i| z[i] * self.log_scale(i, b).exp()).collect()
    }

    /// Converts `g` to the rescaled state `z`.
    pub fn rescale(&self, b: &[T], g: &[T]) -> Vec<T> {
        (0..self.dimension())
            .map(|i| {
                if g[i] == T::zero() {
                    return T::zero();
                }
                // through logs: the scale itself may underflow
                g[i].signum() * (g[i].abs().ln() - self.log_scale(i, b)).exp()
            })
            .collect()
    }

    /// Derivative of the rescaled state along `delta` at `b`:
    /// `dz^J = Σ_edges N(β; σ²) dβ z^{J∪ℓ}`.
    pub fn apply_scaled(&self, delta: &[T], b: &[T], z: &[T]) -> Vec<T> {
        let inv_sqrt_tau = T::one() / T::lit(std::f64::consts::TAU).sqrt();
        let half = T::lit(0.5);
        self.rows
            .iter()
            .map(|row| {
                row.edges.iter().fold(T::zero(), |acc, e| {
                    let slope = e.offset(&row.members, delta);
                    if slope == T::zero() {
                        return acc;
                    }
                    let u = e.offset(&row.members, b) / e.sigma;
                    let density = (-half * u * u).exp() * inv_sqrt_tau / e.sigma;
                    acc + density * slope * z[e.target]
                })
            })
            .collect()
    }

    /// Dense JSON-friendly description of the system at `b`.
    pub fn export(&self, b: &[T]) -> SystemExport {
        let d = self.a.rows();
        let to_rows = |m: &Matrix<T>| -> Vec<Vec<f64>> {
            m.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.as_f64()).collect())
                .collect()
        };
        let directions = Coordinate::all(d, self.num_constraints())
            .into_iter()
            .map(|c| DirectionExport {
                direction: c.label(),
                matrix: to_rows(&self.coefficient(c, b)),
            })
            .collect();
        SystemExport {
            basis: self.basis().iter().map(|f| f.to_one_based()).collect(),
            a: to_rows(&self.a),
            b: b.iter().map(|v| v.as_f64()).collect(),
            directions,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionExport {
    pub direction: String,
    pub matrix: Vec<Vec<f64>>,
}

/// Basis (1-based labels), evaluation point and one dense row-major matrix
/// per coordinate direction.
#[derive(Clone, Debug, Serialize)]
pub struct SystemExport {
    pub basis: Vec<Vec<usize>>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub directions: Vec<DirectionExport>,
}
