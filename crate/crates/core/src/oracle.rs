//! Monte-Carlo and quasi-Monte-Carlo estimates of `φ`, of the
//! inclusion–exclusion terms `φ_F`, and of finite-difference derivatives.
//!
//! Samples are drawn in chunks; chunk `c` uses the ChaCha stream `c` of the
//! generator seeded with `seed`, and chunk results are combined by pairwise
//! summation in chunk order. Estimates are therefore bit-identical for a
//! fixed seed whatever the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::complex::SimplicialComplex;
use crate::geometry::HPolyhedron;
use crate::index_set::IndexSet;
use crate::Scalar;

const CHUNK: usize = 1 << 16;
/// Number of random shifts of the QMC estimator.
pub const QMC_SHIFTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    MC,
    QMC,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub method: OracleMethod,
}

/// Sum of `xs` by recursive halving; the grouping depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Polyhedron in `f64` with columns laid out for fast evaluation.
struct Evaluator {
    d: usize,
    n: usize,
    /// column-major: normal of constraint `j` at `j*d..(j+1)*d`
    normals: Vec<f64>,
    b: Vec<f64>,
}

impl Evaluator {
    fn new<T: Scalar>(p: &HPolyhedron<T>) -> Self {
        let (d, n) = (p.dim(), p.num_constraints());
        let mut normals = Vec::with_capacity(d * n);
        for j in 0..n {
            normals.extend(p.normal(j).into_iter().map(|v| v.as_f64()));
        }
        Self {
            d,
            n,
            normals,
            b: p.b().iter().map(|v| v.as_f64()).collect(),
        }
    }

    /// `a_j . x` for every `j`.
    fn projections(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let col = &self.normals[j * self.d..(j + 1) * self.d];
            *o = col.iter().zip(x).map(|(a, v)| a * v).sum();
        }
    }
}

/// `H(v)` with `H(0) = 1`.
#[inline]
fn heaviside(v: f64) -> bool {
    v >= 0.0
}

/// Per-chunk sums of `k` integrands and their squares.
#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

/// Runs `integrand(proj, out)` on `samples` standard normal vectors. The
/// integrand sees `a_j . x` for every `j` and writes `k` values.
fn monte_carlo<F>(ev: &Evaluator, samples: usize, seed: u64, k: usize, integrand: F) -> Vec<(f64, f64)>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0; ev.d];
            let mut proj = vec![0.0; ev.n];
            let mut vals = vec![0.0; k];
            let mut m = Moments {
                sum: vec![0.0; k],
                sum_sq: vec![0.0; k],
            };
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(&mut rng);
                }
                ev.projections(&x, &mut proj);
                integrand(&proj, &mut vals);
                for i in 0..k {
                    m.sum[i] += vals[i];
                    m.sum_sq[i] += vals[i] * vals[i];
                }
            }
            m
        })
        .collect();
    reduce(&per_chunk, k, samples)
}

/// Mean and standard error of each integrand from chunk moments.
fn reduce(per_chunk: &[Moments], k: usize, samples: usize) -> Vec<(f64, f64)> {
    let n = samples as f64;
    (0..k)
        .map(|i| {
            let s: Vec<f64> = per_chunk.iter().map(|m| m.sum[i]).collect();
            let q: Vec<f64> = per_chunk.iter().map(|m| m.sum_sq[i]).collect();
            let mean = pairwise_sum(&s) / n;
            let var = if samples > 1 {
                ((pairwise_sum(&q) - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (mean, (var / n).sqrt())
        })
        .collect()
}

fn mc_estimate((value, std_error): (f64, f64), samples: usize) -> OracleEstimate {
    OracleEstimate {
        value,
        std_error,
        samples,
        method: OracleMethod::MC,
    }
}

fn inside(ev: &Evaluator, proj: &[f64], b: &[f64]) -> bool {
    (0..ev.n).all(|j| heaviside(proj[j] + b[j]))
}

/// Monte-Carlo estimate of `P(X ∈ P)`, `X` standard normal.
pub fn estimate_phi<T: Scalar>(p: &HPolyhedron<T>, samples: usize, seed: u64) -> OracleEstimate {
    let ev = Evaluator::new(p);
    let res = monte_carlo(&ev, samples, seed, 1, |proj, out| {
        out[0] = if inside(&ev, proj, &ev.b) { 1.0 } else { 0.0 };
    });
    mc_estimate(res[0], samples)
}

/// Signed value of `χ_F = ∏_{j∈F} (H(f_j) − 1)` at the projections.
fn chi(face: IndexSet, proj: &[f64], b: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in face.iter() {
        if heaviside(proj[j] + b[j]) {
            return 0.0;
        }
        v = -v;
    }
    v
}

/// Monte-Carlo estimate of `φ_F = E[∏_{j∈F} (H(f_j(X)) − 1)]`.
pub fn estimate_phi_f<T: Scalar>(p: &HPolyhedron<T>, face: IndexSet, samples: usize, seed: u64) -> OracleEstimate {
    let ev = Evaluator::new(p);
    let res = monte_carlo(&ev, samples, seed, 1, |proj, out| {
        out[0] = chi(face, proj, &ev.b);
    });
    mc_estimate(res[0], samples)
}

/// `|φ̂ − Σ_{F∈𝓕} φ̂_F|` with every term computed on the same samples.
pub fn check_decomposition<T: Scalar>(
    p: &HPolyhedron<T>,
    complex: &SimplicialComplex,
    samples: usize,
    seed: u64,
) -> f64 {
    let ev = Evaluator::new(p);
    let faces = complex.faces();
    let k = faces.len() + 1;
    let res = monte_carlo(&ev, samples, seed, k, |proj, out| {
        out[0] = if inside(&ev, proj, &ev.b) { 1.0 } else { 0.0 };
        for (o, &f) in out[1..].iter_mut().zip(faces) {
            *o = chi(f, proj, &ev.b);
        }
    });
    let terms: Vec<f64> = res[1..].iter().map(|r| r.0).collect();
    (res[0].0 - pairwise_sum(&terms)).abs()
}

/// Central finite difference of `φ` in the offsets `b_j`, `j ∈ J`
/// (`|J| <= 2`), on common random numbers. The standard error is that of
/// the difference quotient itself.
pub fn fd_derivative<T: Scalar>(
    p: &HPolyhedron<T>,
    face: IndexSet,
    h: f64,
    samples: usize,
    seed: u64,
) -> OracleEstimate {
    assert!(face.len() <= 2, "finite differences of order > 2 are not supported");
    if face.is_empty() {
        return estimate_phi(p, samples, seed);
    }
    let ev = Evaluator::new(p);
    let members = face.to_vec();
    // stencil: sign patterns over the members, weighted by their product
    let stencil: Vec<(Vec<f64>, f64)> = (0..1usize << members.len())
        .map(|mask| {
            let mut b = ev.b.clone();
            let mut w = 1.0;
            for (i, &j) in members.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    b[j] += h;
                } else {
                    b[j] -= h;
                    w = -w;
                }
            }
            (b, w)
        })
        .collect();
    let denom = (2.0 * h).powi(members.len() as i32);
    let res = monte_carlo(&ev, samples, seed, 1, |proj, out| {
        out[0] = stencil
            .iter()
            .filter(|(b, _)| inside(&ev, proj, b))
            .map(|(_, w)| w)
            .sum::<f64>()
            / denom;
    });
    mc_estimate(res[0], samples)
}

/// Randomly shifted Kronecker sequence with the `R_d` generator, mapped to
/// normals by the inverse CDF. `samples` is split evenly over the shifts.
pub fn estimate_phi_qmc<T: Scalar>(p: &HPolyhedron<T>, samples: usize, seed: u64) -> OracleEstimate {
    let ev = Evaluator::new(p);
    let d = ev.d;
    // φ_d: the positive root of x^{d+1} = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=d).map(|i| g.powi(-(i as i32))).collect();
    let per_shift = (samples / QMC_SHIFTS).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..QMC_SHIFTS)
        .map(|_| (0..d).map(|_| rand::Rng::random::<f64>(&mut rng)).collect())
        .collect();
    let normal = Normal::standard();
    let means: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let mut x = vec![0.0; d];
            let mut proj = vec![0.0; ev.n];
            let mut hits = 0usize;
            for k in 0..per_shift {
                for i in 0..d {
                    let u = (shift[i] + (k as f64 + 1.0) * alpha[i]).fract();
                    // keep away from the endpoints of the inverse CDF
                    x[i] = normal.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16));
                }
                ev.projections(&x, &mut proj);
                if inside(&ev, &proj, &ev.b) {
                    hits += 1;
                }
            }
            hits as f64 / per_shift as f64
        })
        .collect();
    let m = QMC_SHIFTS as f64;
    let mean = pairwise_sum(&means) / m;
    let var = means.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    OracleEstimate {
        value: mean,
        std_error: (var / m).sqrt(),
        samples: per_shift * QMC_SHIFTS,
        method: OracleMethod::QMC,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::nerve_of;
    use crate::Polyhedron;

    fn square() -> Polyhedron {
        Polyhedron::from_rows(
            &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
            vec![0.0, 1.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn half_space_and_square() {
        let h = Polyhedron::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
        let e = estimate_phi(&h, 100_000, 1);
        assert!((e.value - 0.5).abs() <= 3.0 * e.std_error);
        assert_eq!(e.samples, 100_000);
        let e = estimate_phi(&square(), 1_000_000, 2);
        assert!((e.value - 0.116_516_6).abs() < 1e-3);
        let q = estimate_phi_qmc(&square(), 1 << 18, 3);
        assert!((q.value - 0.116_516_6).abs() < 1e-3);
        assert_eq!(q.method, OracleMethod::QMC);
    }

    #[test]
    fn empty_polyhedron_has_zero_mass() {
        let p = Polyhedron::from_rows(&[vec![1.0, -1.0]], vec![-1.0, 0.0]).unwrap();
        assert_eq!(estimate_phi(&p, 10_000, 0).value, 0.0);
    }

    #[test]
    fn signed_terms() {
        let e = estimate_phi_f(&square(), IndexSet::EMPTY, 10_000, 4);
        assert_eq!((e.value, e.std_error), (1.0, 0.0));
        let e = estimate_phi_f(&square(), IndexSet::singleton(0), 200_000, 4);
        assert!((e.value + 0.5).abs() < 4.0 * e.std_error);
        let e = estimate_phi_f(&square(), IndexSet::from_slice(&[0, 2]), 200_000, 4);
        assert!((e.value - 0.25).abs() < 4.0 * e.std_error);
    }

    #[test]
    fn decomposition_residual_vanishes() {
        let c = nerve_of(&square()).unwrap();
        assert!(check_decomposition(&square(), &c, 100_000, 5) <= 1e-12);
    }

    #[test]
    fn seeded_determinism() {
        let a = estimate_phi(&square(), 200_000, 9);
        let b = estimate_phi(&square(), 200_000, 9);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = estimate_phi(&square(), 200_000, 10);
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn derivative_of_half_line() {
        let h = Polyhedron::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
        let e = fd_derivative(&h, IndexSet::singleton(0), 1e-2, 1_000_000, 6);
        assert!((e.value - 0.398_942_28).abs() < 0.01);
        let e0 = fd_derivative(&h, IndexSet::EMPTY, 1e-2, 10_000, 6);
        assert_eq!(e0, estimate_phi(&h, 10_000, 6));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
