//! Probability content by the holonomic gradient method.
//!
//! The state is integrated in the rescaled basis `z^J = g^J / d_J(b)` (see
//! [`crate::pfaffian`]), where `z^J` is the conditional probability of the
//! face `F_J` given its affine hull. The start point is a scaled and
//! translated copy of the polyhedron, far from the origin relative to its
//! conditional spreads; there every `z^J` is one or zero up to Gaussian
//! tails. Along the segment back to `b` the Gram matrix is constant, so no
//! singular locus is met.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::complex::nerve;
use crate::error::{Error, Result};
use crate::geometry::{strip_redundant, HPolyhedron};
use crate::index_set::IndexSet;
use crate::linalg::{norm2, Cholesky, Matrix};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::ode::{self, OdeConfig, OdeStats};
use crate::pfaffian::{PfaffianSystem, SingularDistance};
use crate::Scalar;

/// Smallest accepted normalized far-field offset.
pub const MIN_FAR_FIELD_RADIUS: f64 = 6.0;

/// `N(mu, Σ)` restricted to a polyhedron in raw coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianProblem<T> {
    pub polyhedron: HPolyhedron<T>,
    pub mean: Vec<T>,
    pub covariance: Matrix<T>,
}

impl<T: Scalar> GaussianProblem<T> {
    pub fn new(polyhedron: HPolyhedron<T>, mean: Vec<T>, covariance: Matrix<T>) -> Result<Self> {
        let d = polyhedron.dim();
        if mean.len() != d || covariance.rows() != d || covariance.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "polyhedron in dimension {d}, mean of length {}, covariance {}x{}",
                mean.len(),
                covariance.rows(),
                covariance.cols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) || !covariance.is_finite() {
            return Err(Error::InvalidPolyhedron("non-finite mean or covariance".into()));
        }
        Ok(Self {
            polyhedron,
            mean,
            covariance,
        })
    }

    /// Standard normal distribution.
    pub fn standard(polyhedron: HPolyhedron<T>) -> Self {
        let d = polyhedron.dim();
        Self {
            polyhedron,
            mean: vec![T::zero(); d],
            covariance: Matrix::identity(d),
        }
    }
}

/// Rewrites the problem for a standard normal: with `Σ = LLᵀ`, column `j`
/// becomes `Lᵀa_j` and the offset `a_j . mu + b_j`.
pub fn standardize<T: Scalar>(gp: &GaussianProblem<T>) -> Result<HPolyhedron<T>> {
    let ch = Cholesky::with_relative_floor(&gp.covariance).ok_or(Error::NonPositiveDefinite)?;
    let p = &gp.polyhedron;
    let a = ch.factor().transpose().matmul(p.a());
    let shift = p.a().transpose().mul_vec(&gp.mean);
    let b = p.b().iter().zip(&shift).map(|(&b, &s)| b + s).collect();
    HPolyhedron::new(a, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HgmConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest accepted gap between the runs started at `t` and `2t`.
    pub init_tol: f64,
    /// Fixed initial shift instead of the one derived from the geometry.
    pub shift_t: Option<f64>,
    pub max_retries: usize,
    /// Required normalized conditional offset at the start point.
    pub far_field_margin: f64,
}

impl Default for HgmConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            init_tol: 1e-8,
            shift_t: None,
            max_retries: 3,
            far_field_margin: 8.0,
        }
    }
}

impl HgmConfig {
    fn ode(&self) -> OdeConfig {
        OdeConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..OdeConfig::default()
        }
    }
}

/// `g = (g^J)_{J∈𝓕}` in basis order; the first entry is `φ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateVector<T> {
    pub basis: Vec<IndexSet>,
    pub values: Vec<T>,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(basis: Vec<IndexSet>, values: Vec<T>) -> Self {
        assert_eq!(basis.len(), values.len());
        Self { basis, values }
    }

    pub fn probability(&self) -> T {
        self.values[0]
    }

    pub fn get(&self, face: IndexSet) -> Option<T> {
        self.basis.iter().position(|&f| f == face).map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Far-field start `b* = b + t w` with `w = b + aᵀc`: `P(b*)` is `P(b)`
/// scaled by `1 + t` about `c` and moved so that `c` lands on the origin.
/// Scaling and translation keep the face structure, so the whole segment
/// `b* -> b` stays within one combinatorial type.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarField<T> {
    /// Interior point of `P(b)` that becomes the centre of the Gaussian.
    pub center: Vec<T>,
    pub direction: Vec<T>,
    /// Smallest decisiveness over all faces at `w`, in conditional standard
    /// deviations per unit shift.
    pub decisiveness: T,
}

/// How clearly the origin projects inside (`true`) or outside the face at
/// `idx` of `P(x)`: the smallest normalized conditional offset when all are
/// positive, else the largest negative one in absolute value. `None` for
/// faces without edges, whose rescaled value is identically one.
pub fn face_decisiveness<T: Scalar>(sys: &PfaffianSystem<T>, idx: usize, x: &[T]) -> Option<(T, bool)> {
    let members = sys.members(idx);
    let edges = sys.edges(idx);
    if edges.is_empty() {
        return None;
    }
    let u: Vec<T> = edges.iter().map(|e| e.offset(members, x) / e.sigma).collect();
    if u.iter().all(|&v| v > T::zero()) {
        Some((u.iter().fold(T::infinity(), |m, &v| m.min(v)), true))
    } else {
        Some((u.iter().fold(T::zero(), |m, &v| m.max(-v)), false))
    }
}

fn decisiveness<T: Scalar>(sys: &PfaffianSystem<T>, x: &[T]) -> T {
    (0..sys.dimension())
        .filter_map(|idx| face_decisiveness(sys, idx, x))
        .fold(T::infinity(), |m, (v, _)| m.min(v))
}

/// Number of candidate centres tried besides the Chebyshev-type centre.
const CENTER_CANDIDATES: usize = 31;

/// Picks the centre `c` among a deterministic set of interior points that
/// makes every face most clearly inside or outside.
pub fn far_field<T: Scalar>(sys: &PfaffianSystem<T>, b: &[T]) -> Result<FarField<T>> {
    let a = sys.a();
    let (d, n) = (a.rows(), a.cols());
    let norms: Vec<T> = (0..n).map(|j| norm2(&a.column(j))).collect();
    // maximize r subject to a_j . c + b_j >= r |a_j|, r <= 1
    let mut lp = LinearProgram::new(d + 1);
    lp.bounds(d, None, Some(T::one()));
    let mut obj = vec![T::zero(); d + 1];
    obj[d] = T::one();
    lp.maximize(obj);
    for j in 0..n {
        let mut row = a.column(j);
        row.push(-norms[j]);
        lp.constraint(row, Relation::Ge, -b[j]);
    }
    let (c0, radius) = match lp.solve()? {
        LpOutcome::Optimal(s) if s.x[d] > T::zero() => (s.x[..d].to_vec(), s.x[d]),
        LpOutcome::Optimal(_) | LpOutcome::Infeasible => return Err(Error::EmptyPolyhedron),
        LpOutcome::Unbounded => return Err(Error::LpNumericalFailure("centre LP unbounded".into())),
    };
    let at = |c: &[T]| -> Vec<T> {
        let shift = a.transpose().mul_vec(c);
        b.iter().zip(&shift).map(|(&bj, &s)| bj + s).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = (decisiveness(sys, &at(&c0)), c0.clone());
    for _ in 0..CENTER_CANDIDATES {
        let step: Vec<T> = (0..d)
            .map(|_| T::lit(StandardNormal.sample(&mut rng)) * radius * T::lit(0.5))
            .collect();
        let c: Vec<T> = c0.iter().zip(&step).map(|(&x, &s)| x + s).collect();
        let w = at(&c);
        if w.iter().any(|&v| v <= T::zero()) {
            continue;
        }
        let score = decisiveness(sys, &w);
        if score > best.0 {
            best = (score, c);
        }
    }
    let (score, center) = best;
    if !(score > T::STRICT_TOL) {
        return Err(Error::NoFarField(score.as_f64()));
    }
    Ok(FarField {
        direction: at(&center),
        center,
        decisiveness: score,
    })
}

/// Shift `t` at which every face of `P(b + t w)` is decided with normalized
/// offsets of at least `margin`.
pub fn required_shift<T: Scalar>(sys: &PfaffianSystem<T>, b: &[T], ff: &FarField<T>, margin: T) -> T {
    let w = &ff.direction;
    let mut t = T::one();
    for idx in 0..sys.dimension() {
        let Some((_, inside)) = face_decisiveness(sys, idx, w) else {
            continue;
        };
        let members = sys.members(idx);
        let edges = sys.edges(idx);
        let norm = |e: &crate::pfaffian::Edge<T>, x: &[T]| e.offset(members, x) / e.sigma;
        if inside {
            for e in edges {
                t = t.max((margin - norm(e, b)) / norm(e, w));
            }
        } else {
            let e = edges
                .iter()
                .min_by(|x, y| norm(x, w).partial_cmp(&norm(y, w)).expect("finite offsets"))
                .expect("face with edges");
            t = t.max((margin + norm(e, b)) / -norm(e, w));
        }
    }
    t
}

fn shifted<T: Scalar>(b: &[T], w: &[T], t: T) -> Vec<T> {
    b.iter().zip(w).map(|(&bi, &wi)| bi + t * wi).collect()
}

/// Rescaled far-field state at `x`: one for faces the origin projects
/// into, zero for the others. Fails if some face is decided by less than
/// [`MIN_FAR_FIELD_RADIUS`] standard deviations.
pub fn far_field_values<T: Scalar>(sys: &PfaffianSystem<T>, x: &[T]) -> Result<Vec<T>> {
    (0..sys.dimension())
        .map(|idx| match face_decisiveness(sys, idx, x) {
            None => Ok(T::one()),
            Some((r, inside)) => {
                if !(r >= T::lit(MIN_FAR_FIELD_RADIUS)) {
                    return Err(Error::ShiftTooSmall {
                        radius: r.as_f64(),
                        required: MIN_FAR_FIELD_RADIUS,
                    });
                }
                Ok(if inside { T::one() } else { T::zero() })
            }
        })
        .collect()
}

/// Far-field state at `b + t w`, returned as `g`.
pub fn initial_state<T: Scalar>(
    sys: &PfaffianSystem<T>,
    b: &[T],
    w: &[T],
    t: T,
) -> Result<StateVector<T>> {
    let start = shifted(b, w, t);
    let z = far_field_values(sys, &start)?;
    Ok(StateVector::new(sys.basis().to_vec(), sys.unscale(&start, &z)))
}

/// Points of `(0, 1)` at which some conditional offset crosses zero, and
/// four standard deviations to either side. The right-hand side is
/// negligible away from these, so breaking the integration there keeps the
/// controller from stepping over a narrow pulse.
fn breakpoints<T: Scalar>(sys: &PfaffianSystem<T>, from_b: &[T], delta: &[T]) -> Vec<T> {
    let mut pts = Vec::new();
    for idx in 0..sys.dimension() {
        let members = sys.members(idx);
        for e in sys.edges(idx) {
            let slope = e.offset(members, delta);
            if slope == T::zero() {
                continue;
            }
            let centre = -e.offset(members, from_b) / slope;
            let width = e.sigma / slope.abs();
            for k in [-4.0, 0.0, 4.0] {
                let s = centre + T::lit(k) * width;
                if s > T::zero() && s < T::one() {
                    pts.push(s);
                }
            }
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    pts.dedup();
    pts.push(T::one());
    pts
}

/// Integrates the rescaled state from `from_b` to `to_b` on a straight line.
pub fn integrate_scaled<T: Scalar>(
    sys: &PfaffianSystem<T>,
    from_b: &[T],
    to_b: &[T],
    z0: &[T],
    cfg: &HgmConfig,
) -> Result<(Vec<T>, OdeStats)> {
    let delta: Vec<T> = to_b.iter().zip(from_b).map(|(&t, &f)| t - f).collect();
    let rhs = |s: T, z: &[T]| {
        let b: Vec<T> = from_b.iter().zip(&delta).map(|(&f, &dl)| f + s * dl).collect();
        sys.apply_scaled(&delta, &b, z)
    };
    let ocfg = cfg.ode();
    let mut z = z0.to_vec();
    let mut stats = OdeStats::default();
    let mut s0 = T::zero();
    for s1 in breakpoints(sys, from_b, &delta) {
        let (next, st) = ode::integrate(rhs, s0, s1, &z, &ocfg)?;
        z = next;
        stats = stats.merge(st);
        s0 = s1;
    }
    Ok((z, stats))
}

/// Integrates `g' = Σ_j (to_b - from_b)_j B_j(b(s)) g` along the segment.
/// Internally the rescaled basis is used; input and output are `g`.
pub fn integrate<T: Scalar>(
    sys: &PfaffianSystem<T>,
    from_b: &[T],
    to_b: &[T],
    y0: &StateVector<T>,
    cfg: &HgmConfig,
) -> Result<(StateVector<T>, OdeStats)> {
    if from_b == to_b {
        return Ok((y0.clone(), OdeStats::default()));
    }
    let z0 = sys.rescale(from_b, &y0.values);
    let (z, stats) = integrate_scaled(sys, from_b, to_b, &z0, cfg)?;
    Ok((StateVector::new(y0.basis.clone(), sys.unscale(to_b, &z)), stats))
}

/// Integrates the raw system in the basis `g` directly. Independent of the
/// rescaling; well conditioned only over moderate offsets.
pub fn integrate_raw<T: Scalar>(
    sys: &PfaffianSystem<T>,
    from_b: &[T],
    to_b: &[T],
    y0: &StateVector<T>,
    cfg: &HgmConfig,
) -> Result<(StateVector<T>, OdeStats)> {
    let delta: Vec<T> = to_b.iter().zip(from_b).map(|(&t, &f)| t - f).collect();
    let rhs = |s: T, y: &[T]| {
        let b: Vec<T> = from_b.iter().zip(&delta).map(|(&f, &dl)| f + s * dl).collect();
        sys.apply_b(&delta, &b, y)
    };
    let (values, stats) = ode::integrate(rhs, T::zero(), T::one(), &y0.values, &cfg.ode())?;
    Ok((StateVector::new(y0.basis.clone(), values), stats))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub rank: usize,
    pub singular_distance: SingularDistance,
    /// 0-based indices of constraints removed as redundant.
    pub removed_redundant: Vec<usize>,
    /// Sets whose general-position decision was within 10x of a tolerance.
    pub near_ties: usize,
    pub shift: f64,
    pub far_field_decisiveness: f64,
    pub doubling_gap: f64,
    pub retries: usize,
    pub steps: OdeStats,
}

#[derive(Clone, Debug)]
pub struct HgmSolution<T> {
    /// Standardized, redundancy-free polyhedron the system was built for.
    pub polyhedron: HPolyhedron<T>,
    pub system: PfaffianSystem<T>,
    pub state: StateVector<T>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> HgmSolution<T> {
    pub fn probability(&self) -> T {
        self.state.probability()
    }

    /// `∂φ/∂b_j` of the standardized problem, in the indexing of the input
    /// constraints. Zero for a removed redundant constraint.
    pub fn gradient(&self) -> Vec<T> {
        let removed = &self.diagnostics.removed_redundant;
        let n = self.polyhedron.num_constraints() + removed.len();
        let mut kept = 0;
        (0..n)
            .map(|j| {
                if removed.contains(&j) {
                    T::zero()
                } else {
                    kept += 1;
                    self.state.get(IndexSet::singleton(kept - 1)).unwrap_or(T::zero())
                }
            })
            .collect()
    }
}

/// Builds the Pfaffian system of a standardized polyhedron after removing
/// redundant rows and checking general position.
pub fn prepare<T: Scalar>(p: &HPolyhedron<T>) -> Result<(HPolyhedron<T>, Vec<usize>, PfaffianSystem<T>, usize)> {
    let (stripped, removed) = strip_redundant(p)?;
    let gp = stripped.homogenize().check_general_position()?;
    let complex = nerve(&stripped, &gp)?;
    let sys = PfaffianSystem::new(&stripped, complex)?;
    Ok((stripped, removed, sys, gp.near_ties.len()))
}

/// Full pipeline on an already standardized polyhedron.
pub fn solve_standard<T: Scalar>(p: &HPolyhedron<T>, cfg: &HgmConfig) -> Result<HgmSolution<T>> {
    let (stripped, removed, sys, near_ties) = prepare(p)?;
    let b = stripped.b().to_vec();
    let ff = far_field(&sys, &b)?;
    let mut t = match cfg.shift_t {
        Some(t) => T::lit(t),
        None => required_shift(&sys, &b, &ff, T::lit(cfg.far_field_margin)),
    };
    let mut steps = OdeStats::default();
    let mut run = |t: T| -> Result<StateVector<T>> {
        let start = shifted(&b, &ff.direction, t);
        let z0 = far_field_values(&sys, &start)?;
        let (z, stats) = integrate_scaled(&sys, &start, &b, &z0, cfg)?;
        steps = steps.merge(stats);
        let y = StateVector::new(sys.basis().to_vec(), sys.unscale(&b, &z));
        if !y.is_finite() {
            return Err(Error::NonFiniteState { at: 1.0 });
        }
        Ok(y)
    };
    let mut current = run(t)?;
    let mut retries = 0;
    let gap = loop {
        let doubled = run(t + t)?;
        let gap = (doubled.probability() - current.probability()).abs().as_f64();
        if gap <= cfg.init_tol {
            current = doubled;
            break gap;
        }
        if retries >= cfg.max_retries {
            return Err(Error::ShiftRetriesExhausted { gap, retries });
        }
        retries += 1;
        t = t + t;
        current = doubled;
    };
    let diagnostics = Diagnostics {
        rank: sys.dimension(),
        singular_distance: sys.singular_distance(),
        removed_redundant: removed,
        near_ties,
        shift: t.as_f64(),
        far_field_decisiveness: ff.decisiveness.as_f64(),
        doubling_gap: gap,
        retries,
        steps,
    };
    Ok(HgmSolution {
        polyhedron: stripped,
        system: sys,
        state: current,
        diagnostics,
    })
}

pub fn solve<T: Scalar>(gp: &GaussianProblem<T>, cfg: &HgmConfig) -> Result<HgmSolution<T>> {
    solve_standard(&standardize(gp)?, cfg)
}

/// `P(X ∈ P)` for `X ~ N(mean, covariance)`.
pub fn compute_probability<T: Scalar>(gp: &GaussianProblem<T>, cfg: &HgmConfig) -> Result<(T, Diagnostics)> {
    let sol = solve(gp, cfg)?;
    Ok((sol.probability(), sol.diagnostics))
}

/// Number of points at which the segment is checked against the singular
/// locus before an `a`-path is integrated.
pub const LOCUS_SAMPLES: usize = 64;
/// Smallest accepted `det α_J` along an `a`-path.
pub const LOCUS_DET_FLOOR: f64 = 1e-8;

/// Continues the state from `from_a` to `to_a` at fixed `b`, keeping the
/// complex of `sys`.
pub fn continue_in_a<T: Scalar>(
    sys: &PfaffianSystem<T>,
    from_a: &Matrix<T>,
    to_a: &Matrix<T>,
    b: &[T],
    y0: &StateVector<T>,
    cfg: &HgmConfig,
) -> Result<(StateVector<T>, OdeStats)> {
    if from_a.rows() != to_a.rows() || from_a.cols() != to_a.cols() {
        return Err(Error::DimensionMismatch("endpoint matrices differ in shape".into()));
    }
    if from_a == to_a {
        return Ok((y0.clone(), OdeStats::default()));
    }
    let da = to_a.sub(from_a);
    let at = |s: T| {
        let mut a = from_a.clone();
        a.add_scaled(s, &da);
        a
    };
    let complex = sys.complex();
    for i in 0..LOCUS_SAMPLES {
        let s = i as f64 / (LOCUS_SAMPLES - 1) as f64;
        let alpha = at(T::lit(s)).transpose().matmul(&at(T::lit(s)));
        for &face in complex.faces().iter().skip(1) {
            let sub = alpha.principal(&face.to_vec());
            let det = Cholesky::new(&sub, T::zero()).map_or(0.0, |c| c.determinant().as_f64());
            if !(det > LOCUS_DET_FLOOR) {
                return Err(Error::SingularLocusCrossing { at: s, det, face });
            }
        }
    }
    let rhs = |s: T, y: &[T]| match sys.rebuild(at(s)) {
        Ok(local) => local.apply_a(&da, b, y),
        Err(_) => vec![T::nan(); y.len()],
    };
    let (values, stats) = ode::integrate(rhs, T::zero(), T::one(), &y0.values, &cfg.ode())?;
    Ok((StateVector::new(y0.basis.clone(), values), stats))
}
