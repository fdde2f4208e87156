use polygauss::complex::nerve_of;
use polygauss::instances::{half_space, random_general_position, triangle, unit_square};
use polygauss::oracle::{
    check_decomposition, estimate_phi, estimate_phi_f, estimate_phi_qmc, fd_derivative, OracleMethod,
};
use polygauss::{IndexSet, Polyhedron};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_residual_is_rounding_only(d in 1usize..=4, n in 1usize..=6, s in any::<u64>(), seed in any::<u64>()) {
        let p = random_general_position(d, n, s);
        let c = nerve_of(&p).unwrap();
        let samples = 20_000;
        let r = check_decomposition(&p, &c, samples, seed);
        prop_assert!(r <= 1e-10 * (samples * c.len()) as f64);
        prop_assert!(r <= 1e-10);
    }
}

#[test]
fn same_seed_same_bits() {
    let p = random_general_position(3, 5, 2);
    let a = estimate_phi(&p, 300_000, 42);
    let b = estimate_phi(&p, 300_000, 42);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_ne!(estimate_phi(&p, 300_000, 43).value, a.value);
}

#[test]
fn thread_count_does_not_change_the_estimate() {
    let p = random_general_position(2, 4, 9);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_phi(&p, 400_000, 1))
    };
    assert_eq!(run(1).value.to_bits(), run(3).value.to_bits());
}

#[test]
fn half_space_coverage() {
    let p = half_space(2);
    let covered = (0..200u64)
        .filter(|&seed| {
            let e = estimate_phi(&p, 10_000, seed);
            (e.value - 0.5).abs() <= 3.0 * e.std_error
        })
        .count();
    assert!(covered >= 198, "covered {covered} of 200");
}

#[test]
fn face_terms_of_the_square() {
    let p = unit_square();
    let empty = estimate_phi_f(&p, IndexSet::EMPTY, 1000, 0);
    assert_eq!(empty.value, 1.0);
    assert_eq!(empty.std_error, 0.0);
    let one = estimate_phi_f(&p, IndexSet::singleton(0), 1_000_000, 3);
    assert!((one.value + 0.5).abs() < 4.0 * one.std_error);
    let corner = estimate_phi_f(&p, IndexSet::from_slice(&[0, 2]), 1_000_000, 3);
    assert!((corner.value - 0.25).abs() < 4.0 * corner.std_error);
}

#[test]
fn decomposition_examples() {
    let p = unit_square();
    assert!(check_decomposition(&p, &nerve_of(&p).unwrap(), 100_000, 1) <= 1e-12);
    let h = half_space(1);
    assert!(check_decomposition(&h, &nerve_of(&h).unwrap(), 100_000, 1) <= 1e-15);
    let t = triangle();
    assert!(check_decomposition(&t, &nerve_of(&t).unwrap(), 100_000, 1) <= 1e-12);
}

#[test]
fn finite_difference_of_a_half_line() {
    let p = Polyhedron::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
    let e = fd_derivative(&p, IndexSet::singleton(0), 1e-2, 2_000_000, 4);
    assert!((e.value - 1.0 / std::f64::consts::TAU.sqrt()).abs() < 0.01);
    let plain = fd_derivative(&p, IndexSet::EMPTY, 1e-2, 10_000, 4);
    assert_eq!(plain, estimate_phi(&p, 10_000, 4));
}

#[test]
fn quasi_monte_carlo_is_tighter() {
    let p = unit_square();
    let exact = 0.116_516_235_668_598_05;
    let q = estimate_phi_qmc(&p, 1 << 18, 7);
    assert_eq!(q.method, OracleMethod::QMC);
    assert!((q.value - exact).abs() < 4.0 * q.std_error + 1e-7);
    let m = estimate_phi(&p, 1 << 18, 7);
    assert!(q.std_error < m.std_error);
}
