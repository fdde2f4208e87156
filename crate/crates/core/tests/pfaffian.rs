use polygauss::complex::nerve_of;
use polygauss::instances::{orthant, random_general_position, unit_square};
use polygauss::pfaffian::{Coordinate, PfaffianSystem};
use polygauss::{Error, IndexSet, Polyhedron};
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn system(p: &Polyhedron) -> PfaffianSystem<f64> {
    PfaffianSystem::new(p, nerve_of(p).unwrap()).unwrap()
}

fn instance_with_offsets(max_d: usize, max_n: usize) -> impl Strategy<Value = (Polyhedron, Vec<f64>)> {
    (1usize..=max_d, 1usize..=max_n, any::<u64>(), prop::collection::vec(-2.0f64..2.0, max_n))
        .prop_map(|(d, n, s, b)| {
            let p = random_general_position(d, n, s);
            let b = b[..p.num_constraints()].to_vec();
            (p, b)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn coefficients_are_affine_in_b((p, b) in instance_with_offsets(3, 5), k in 0usize..5, delta in -1.5f64..1.5) {
        let sys = system(&p);
        let n = p.num_constraints();
        let k = k % n;
        let mut moved = b.clone();
        moved[k] += delta;
        for j in 0..n {
            let diff = sys.b_direction_matrix(j, &moved).sub(&sys.b_direction_matrix(j, &b));
            let expected = sys.b_derivative_matrix(j, k).scaled(delta);
            prop_assert!(diff.sub(&expected).max_abs() <= 1e-12 * (1.0 + diff.max_abs()));
        }
    }

    #[test]
    fn annihilator_identity_holds((p, b) in instance_with_offsets(4, 6)) {
        prop_assert!(system(&p).op_p3_residual(&b) <= 1e-10);
    }

    #[test]
    fn system_is_integrable((p, b) in instance_with_offsets(3, 5)) {
        let sys = system(&p);
        let coords = Coordinate::all(p.dim(), p.num_constraints());
        for (i, &c1) in coords.iter().enumerate() {
            for &c2 in &coords[i + 1..] {
                let r = sys.integrability_residual(&b, c1, c2);
                prop_assert!(r <= 1e-6, "{} / {}: {}", c1.label(), c2.label(), r);
            }
        }
    }
}

/// Closed form of `g^J = ∂^J φ` on an axis-parallel box with independent
/// coordinates, and its derivative in `b_j`.
struct BoxOracle {
    b: Vec<f64>,
}

impl BoxOracle {
    fn factor(&self, axis: usize, face: IndexSet, diff: Option<usize>) -> f64 {
        let n = Normal::standard();
        let (lo, hi) = (2 * axis, 2 * axis + 1);
        let (bl, bh) = (self.b[lo], self.b[hi]);
        let touched = [face.contains(lo), face.contains(hi)];
        let d_lo = diff == Some(lo);
        let d_hi = diff == Some(hi);
        match touched {
            [false, false] => match (d_lo, d_hi) {
                (true, _) => n.pdf(bl),
                (_, true) => n.pdf(bh),
                _ => n.cdf(bh) - n.cdf(-bl),
            },
            [true, false] => match (d_lo, d_hi) {
                (true, _) => -bl * n.pdf(bl),
                (_, true) => 0.0,
                _ => n.pdf(bl),
            },
            [false, true] => match (d_lo, d_hi) {
                (_, true) => -bh * n.pdf(bh),
                (true, _) => 0.0,
                _ => n.pdf(bh),
            },
            [true, true] => unreachable!("opposite sides never meet"),
        }
    }

    fn value(&self, face: IndexSet, diff: Option<usize>) -> f64 {
        self.factor(0, face, diff) * self.factor(1, face, diff)
    }
}

#[test]
fn square_system_reproduces_closed_form_derivatives() {
    let p = unit_square();
    let sys = system(&p);
    for b in [vec![0.0, 1.0, 0.0, 1.0], vec![0.3, -0.2, 1.1, 0.7], vec![-1.0, 2.5, 0.4, 0.4]] {
        let oracle = BoxOracle { b: b.clone() };
        let g: Vec<f64> = sys.basis().iter().map(|&f| oracle.value(f, None)).collect();
        for j in 0..4 {
            let bg = sys.b_direction_matrix(j, &b).mul_vec(&g);
            for (idx, &f) in sys.basis().iter().enumerate() {
                let expected = oracle.value(f, Some(j));
                assert!((bg[idx] - expected).abs() < 1e-13, "J = {f}, j = {j}");
            }
        }
    }
}

#[test]
fn square_grams_are_orthonormal() {
    let sys = system(&unit_square());
    for idx in 0..sys.dimension() {
        assert!((sys.gram().determinant(idx) - 1.0).abs() < 1e-15);
    }
    assert_eq!(sys.singular_distance().value, 1.0);
}

#[test]
fn nearly_parallel_normals_are_singular() {
    let p = orthant(0.999);
    let sys = system(&p);
    assert!((sys.singular_distance().value - (1.0 - 0.999f64.powi(2))).abs() < 1e-12);
    let degenerate = orthant(1.0 - 1e-12);
    let res = PfaffianSystem::new(&degenerate, nerve_of(&orthant(0.5)).unwrap());
    assert!(matches!(res, Err(Error::SingularGram(_))));
}

#[test]
fn export_uses_one_based_labels() {
    let sys = system(&unit_square());
    let ex = sys.export(&[0.0, 1.0, 0.0, 1.0]);
    assert_eq!(ex.basis[0], Vec::<usize>::new());
    assert_eq!(ex.basis[1], vec![1]);
    assert_eq!(ex.basis.last().unwrap(), &vec![2, 4]);
    assert_eq!(ex.directions.len(), 4 + 2 * 4);
    assert_eq!(ex.directions[0].direction, "b_1");
}
