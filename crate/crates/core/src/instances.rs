//! Named example polyhedra and a seeded generator of random instances in
//! general position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::complex::{nerve, SimplicialComplex};
use crate::geometry::strip_redundant;
use crate::linalg::Cholesky;
use crate::{Matrix, Polyhedron};

/// `[0,1]^2`: `x_1 >= 0`, `1 - x_1 >= 0`, `x_2 >= 0`, `1 - x_2 >= 0`.
pub fn unit_square() -> Polyhedron {
    Polyhedron::from_rows(
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
        vec![0.0, 1.0, 0.0, 1.0],
    )
    .expect("valid")
}

/// The first three half-spaces of the unit square.
pub fn square_three() -> Polyhedron {
    unit_square().select(&[0, 1, 2]).expect("valid")
}

/// The unit square plus the redundant `x_1 + x_2 >= 0`.
pub fn square_five() -> Polyhedron {
    Polyhedron::from_rows(
        &[vec![1.0, -1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, -1.0, 1.0]],
        vec![0.0, 1.0, 0.0, 1.0, 0.0],
    )
    .expect("valid")
}

/// `{x_1 >= 0, x_2 >= 0, 1 - x_1 - x_2 >= 0}`.
pub fn triangle() -> Polyhedron {
    Polyhedron::from_rows(&[vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0]], vec![0.0, 0.0, 1.0]).expect("valid")
}

/// `{x_1 >= 0}` in dimension `d`.
pub fn half_space(d: usize) -> Polyhedron {
    let mut rows = vec![vec![0.0]; d];
    rows[0][0] = 1.0;
    Polyhedron::from_rows(&rows, vec![0.0]).expect("valid")
}

/// Quadrant whose normals have correlation `rho`; its standard normal
/// content is `1/4 + asin(rho) / (2π)`.
pub fn orthant(rho: f64) -> Polyhedron {
    Polyhedron::from_rows(&[vec![1.0, rho], vec![0.0, (1.0 - rho * rho).sqrt()]], vec![0.0, 0.0]).expect("valid")
}

/// Smallest accepted determinant of the normalized Gram matrix of a face.
pub const MIN_FACE_CORRELATION_DET: f64 = 1e-2;

/// Draws a nonempty polyhedron with random normals and offsets, strips its
/// redundant rows and keeps it if it is in general position with every face
/// Gram matrix comfortably nonsingular. Retries with fresh draws otherwise,
/// so the result depends only on the seed.
pub fn random_general_position(d: usize, n: usize, seed: u64) -> Polyhedron {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut rows = vec![vec![0.0; n]; d];
        for j in 0..n {
            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = rng.random_range(0.5..2.0) / len;
            for i in 0..d {
                rows[i][j] = dir[i] * scale;
            }
        }
        let centre: Vec<f64> = (0..d).map(|_| rng.random_range(-0.7..0.7)).collect();
        // a_j . (x - centre) + r_j |a_j| >= 0: the ball of radius min r_j around
        // the centre lies inside
        let b: Vec<f64> = (0..n)
            .map(|j| {
                let norm = (0..d).map(|i| rows[i][j] * rows[i][j]).sum::<f64>().sqrt();
                let dot = (0..d).map(|i| rows[i][j] * centre[i]).sum::<f64>();
                rng.random_range(0.2..1.5) * norm - dot
            })
            .collect();
        let Ok(p) = Polyhedron::from_rows(&rows, b) else {
            continue;
        };
        let Ok((stripped, _)) = strip_redundant(&p) else {
            continue;
        };
        let Ok(rep) = stripped.homogenize().check_general_position() else {
            continue;
        };
        if !rep.in_general_position || !rep.near_ties.is_empty() {
            continue;
        }
        let Ok(complex) = nerve(&stripped, &rep) else {
            continue;
        };
        if well_conditioned(&stripped, &complex) {
            return stripped;
        }
    }
}

fn well_conditioned(p: &Polyhedron, complex: &SimplicialComplex) -> bool {
    let alpha = p.a().transpose().matmul(p.a());
    complex.faces().iter().filter(|f| f.len() > 1).all(|f| {
        let idx = f.to_vec();
        let corr = Matrix::from_rows(
            &idx.iter()
                .map(|&k| idx.iter().map(|&l| alpha[(k, l)] / (alpha[(k, k)] * alpha[(l, l)]).sqrt()).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        Cholesky::new(&corr, 0.0).is_some_and(|c| c.determinant() >= MIN_FACE_CORRELATION_DET)
    })
}

/// `count` instances with `d` in `1..=max_d` and `n` in `1..=max_n`,
/// derived from `seed`.
pub fn random_batch(count: usize, max_d: usize, max_n: usize, seed: u64) -> Vec<Polyhedron> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=max_d);
            let n = rng.random_range(1..=max_n);
            random_general_position(d, n, rng.random())
        })
        .collect()
}
