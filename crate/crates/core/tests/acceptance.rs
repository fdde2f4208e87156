//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::Instant;

use polygauss::complex::{holonomic_rank, nerve_of};
use polygauss::geometry::{brute_force_nonempty_faces, strip_redundant};
use polygauss::hgm::{integrate, prepare, solve_standard, HgmConfig, HgmSolution};
use polygauss::instances::{orthant, random_batch, square_five, square_three, unit_square};
use polygauss::oracle::{check_decomposition, estimate_phi, fd_derivative};
use polygauss::pfaffian::Coordinate;
use polygauss::{IndexSet, Polyhedron};
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Every HGM run of the suite, for the doubling-gap part of criterion 7.
#[derive(Default)]
struct Runs {
    gaps: Vec<f64>,
}

impl Runs {
    fn solve(&mut self, p: &Polyhedron) -> Result<HgmSolution<f64>, String> {
        let sol = solve_standard(p, &HgmConfig::default()).map_err(|e| e.to_string())?;
        self.gaps.push(sol.diagnostics.doubling_gap);
        Ok(sol)
    }
}

fn rank_theorem() -> Outcome {
    let instances = random_batch(50, 4, 6, 0xacc1);
    let mut worst = None;
    for (k, p) in instances.iter().enumerate() {
        let rank = match prepare(p) {
            Ok((_, _, sys, _)) => sys.dimension(),
            Err(e) => return outcome(false, format!("instance {k}: {e}")),
        };
        let brute = brute_force_nonempty_faces(p).map(|f| f.len()).unwrap_or(usize::MAX);
        if rank != brute && worst.is_none() {
            worst = Some(format!("instance {k}: rank {rank}, brute force {brute}"));
        }
    }
    match worst {
        None => outcome(true, "50/50 instances, Pfaffian rank equals the number of nonempty faces"),
        Some(w) => outcome(false, w),
    }
}

fn worked_examples() -> Outcome {
    let gp = |p: &Polyhedron| p.homogenize().check_general_position().unwrap().in_general_position;
    let square = gp(&unit_square());
    let three = !gp(&square_three());
    let five_family = !gp(&square_five());
    let (stripped, removed) = strip_redundant(&square_five()).unwrap();
    let five_stripped = gp(&stripped) && removed == vec![4];
    let nerve = nerve_of(&unit_square()).unwrap();
    let expected: Vec<IndexSet> = [&[][..], &[0], &[1], &[2], &[3], &[0, 2], &[0, 3], &[1, 2], &[1, 3]]
        .iter()
        .map(|s| IndexSet::from_slice(s))
        .collect();
    let nine = nerve.faces() == &expected[..] && holonomic_rank(&nerve) == 9;
    let pass = square && three && five_family && five_stripped && nine;
    outcome(
        pass,
        format!(
            "square accepted {square}, three rejected {three}, five rejected {five_family} \
             then accepted after stripping {five_stripped}, nine-set nerve {nine}"
        ),
    )
}

fn probability_accuracy(runs: &mut Runs) -> Outcome {
    let cdf = |x: f64| Normal::standard().cdf(x);
    let mut worst_closed: f64 = 0.0;
    let mut targets = vec![(unit_square(), (cdf(1.0) - cdf(0.0)).powi(2))];
    for rho in [-0.9f64, -0.5, 0.0, 0.3, 0.5, 0.9] {
        targets.push((orthant(rho), 0.25 + rho.asin() / std::f64::consts::TAU));
    }
    for (p, exact) in &targets {
        match runs.solve(p) {
            Ok(sol) => worst_closed = worst_closed.max((sol.probability() - exact).abs()),
            Err(e) => return outcome(false, format!("closed form: {e}")),
        }
    }
    let mut worst_z: f64 = 0.0;
    for (k, p) in random_batch(20, 4, 6, 0xacc3).iter().enumerate() {
        let sol = match runs.solve(p) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("instance {k}: {e}")),
        };
        let est = estimate_phi(p, 10_000_000, 0xacc3 + k as u64);
        let z = (sol.probability() - est.value).abs() / est.std_error.max(1e-300);
        worst_z = worst_z.max(z);
    }
    outcome(
        worst_closed <= 1e-6 && worst_z <= 4.0,
        format!(
            "closed forms max |err| {worst_closed:.2e} (<= 1e-6); \
             20 instances vs 1e7-sample MC max |z| {worst_z:.2} (<= 4)"
        ),
    )
}

fn decomposition() -> Outcome {
    let mut instances = vec![unit_square(), orthant(0.5), orthant(-0.9)];
    instances.extend(random_batch(50, 4, 6, 0xacc1));
    let mut worst: f64 = 0.0;
    for (k, p) in instances.iter().enumerate() {
        let c = nerve_of(p).unwrap();
        worst = worst.max(check_decomposition(p, &c, 200_000, 0xacc4 + k as u64));
    }
    outcome(
        worst <= 1e-10,
        format!("{} instances, max residual {worst:.2e} (<= 1e-10)", instances.len()),
    )
}

fn integrability() -> Outcome {
    let instances = random_batch(20, 3, 5, 0xacc5);
    let mut worst_int: f64 = 0.0;
    let mut worst_p3: f64 = 0.0;
    for (k, p) in instances.iter().enumerate() {
        let (_, _, sys, _) = prepare(p).unwrap();
        // evaluate away from the instance's own offsets
        let b: Vec<f64> = p
            .b()
            .iter()
            .enumerate()
            .map(|(j, &v)| v + 0.3 * ((k * 7 + j * 3) % 5) as f64 - 0.6)
            .collect();
        let coords = Coordinate::all(p.dim(), p.num_constraints());
        for (i, &c1) in coords.iter().enumerate() {
            for &c2 in &coords[i + 1..] {
                worst_int = worst_int.max(sys.integrability_residual(&b, c1, c2));
            }
        }
        worst_p3 = worst_p3.max(sys.op_p3_residual(&b));
    }
    outcome(
        worst_int <= 1e-6 && worst_p3 <= 1e-10,
        format!(
            "20 points, all coordinate pairs: max residual {worst_int:.2e} (<= 1e-6); \
             annihilator identity {worst_p3:.2e} (<= 1e-10)"
        ),
    )
}

fn gradient_check(runs: &mut Runs) -> Outcome {
    let h = 1e-2;
    let samples = 60_000_000;
    let mut worst_ratio: f64 = 0.0;
    let mut worst = String::new();
    for (k, p) in random_batch(10, 3, 4, 0xacc6).iter().enumerate() {
        let sol = match runs.solve(p) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("instance {k}: {e}")),
        };
        for (j, &g) in sol.gradient().iter().enumerate() {
            let fd = fd_derivative(p, IndexSet::singleton(j), h, samples, 0xacc6 + k as u64);
            let tol = (1e-3 * g.abs()).max(2e-3);
            let ratio = (fd.value - g).abs() / tol;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = format!("instance {k}, j = {}: hgm {g:.5}, fd {:.5} ± {:.1e}", j + 1, fd.value, fd.std_error);
            }
        }
    }
    outcome(
        worst_ratio <= 1.0,
        format!("10 instances, h = {h}, {samples} samples; worst |diff|/tol {worst_ratio:.2} ({worst})"),
    )
}

fn path_independence(runs: &mut Runs) -> Outcome {
    let cfg = HgmConfig::default();
    let mut worst: f64 = 0.0;
    for (k, p) in random_batch(10, 3, 5, 0xacc7).iter().enumerate() {
        let sol = match runs.solve(p) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("instance {k}: {e}")),
        };
        let sys = &sol.system;
        let b0 = sol.polyhedron.b().to_vec();
        let b1: Vec<f64> = b0
            .iter()
            .enumerate()
            .map(|(j, &v)| v + 0.25 * (((k + 2 * j) % 5) as f64 - 2.0))
            .collect();
        let diag = integrate(sys, &b0, &b1, &sol.state, &cfg).unwrap().0;
        let mut y = sol.state.clone();
        let mut here = b0.clone();
        for j in 0..b0.len() {
            let mut next = here.clone();
            next[j] = b1[j];
            y = integrate(sys, &here, &next, &y, &cfg).unwrap().0;
            here = next;
        }
        for (u, v) in y.values.iter().zip(&diag.values) {
            worst = worst.max((u - v).abs());
        }
    }
    let max_gap = runs.gaps.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && max_gap <= 1e-8,
        format!(
            "10 instances: legs vs diagonal max |diff| {worst:.2e} (<= 1e-8); \
             doubling gap over {} runs max {max_gap:.2e} (<= 1e-8)",
            runs.gaps.len()
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; only a
    // `--list` request needs an answer.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut runs = Runs::default();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Runs) -> Outcome>)> = vec![
        ("rank theorem", Box::new(|_| rank_theorem())),
        ("worked examples", Box::new(|_| worked_examples())),
        ("probability accuracy", Box::new(probability_accuracy)),
        ("decomposition identity", Box::new(|_| decomposition())),
        ("integrability", Box::new(|_| integrability())),
        ("gradient check", Box::new(gradient_check)),
        ("path independence", Box::new(path_independence)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = run(&mut runs);
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {} {name}: {} [{secs:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
