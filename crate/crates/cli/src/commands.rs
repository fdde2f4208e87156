use std::time::Instant;

use polygauss::complex::{holonomic_rank, nerve};
use polygauss::geometry::{brute_force_nonempty_faces, strip_redundant};
use polygauss::hgm::{prepare, solve, standardize, HgmConfig};
use polygauss::instances;
use polygauss::oracle::{check_decomposition, estimate_phi, estimate_phi_qmc, OracleEstimate};
use polygauss::pfaffian::{Coordinate, SystemExport};
use polygauss::{IndexSet, Polyhedron};
use serde::Serialize;

use crate::problem::Problem;
use crate::CliError;

/// Maps 0-based indices of the stripped polyhedron back to 1-based input
/// labels.
struct Labels {
    kept: Vec<usize>,
}

impl Labels {
    fn new(n: usize, removed: &[usize]) -> Self {
        Self {
            kept: (0..n).filter(|j| !removed.contains(j)).collect(),
        }
    }

    fn face(&self, f: IndexSet) -> Vec<usize> {
        f.iter().map(|k| self.kept[k] + 1).collect()
    }

    /// Homogenized labels: `0` stays `0`, `k >= 1` is constraint `k`.
    fn homogenized(&self, f: IndexSet) -> Vec<usize> {
        f.iter().map(|k| if k == 0 { 0 } else { self.kept[k - 1] + 1 }).collect()
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|j| j + 1).collect()
}

#[derive(Serialize)]
pub struct CheckReport {
    pub general_position: bool,
    pub witness: Option<Vec<usize>>,
    pub removed_redundant: Vec<usize>,
    pub n_faces: usize,
    pub rank: Option<usize>,
    pub faces: Vec<Vec<usize>>,
    pub family_general_position: bool,
    pub family_witness: Option<Vec<usize>>,
}

pub fn check(problem: &Problem) -> Result<CheckReport, CliError> {
    let p = &problem.polyhedron;
    let (stripped, removed) = strip_redundant(p)?;
    let labels = Labels::new(p.num_constraints(), &removed);
    let family = p.homogenize().check_general_position()?;
    let report = stripped.homogenize().check_general_position()?;
    let (faces, rank) = if report.in_general_position {
        let c = nerve(&stripped, &report)?;
        (c.faces().to_vec(), Some(holonomic_rank(&c)))
    } else {
        (brute_force_nonempty_faces(&stripped)?, None)
    };
    let all = Labels::new(p.num_constraints(), &[]);
    Ok(CheckReport {
        general_position: report.in_general_position,
        witness: report.witness.map(|w| labels.homogenized(w)),
        removed_redundant: one_based(&removed),
        n_faces: faces.len(),
        rank,
        faces: faces.iter().map(|&f| labels.face(f)).collect(),
        family_general_position: family.in_general_position,
        family_witness: family.witness.map(|w| all.homogenized(w)),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub samples: usize,
    pub seed: u64,
    pub qmc: bool,
}

#[derive(Serialize)]
pub struct ProbReport {
    pub probability: f64,
    pub rank: usize,
    pub doubling_gap: f64,
    pub singular_distance: f64,
    pub gradient: Vec<f64>,
    pub removed_redundant: Vec<usize>,
    pub shift: f64,
    pub retries: usize,
    pub ode_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_method: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_diff: Option<f64>,
}

impl ProbReport {
    /// Whether the oracle disagrees beyond `4 σ + 1e-6`.
    pub fn oracle_mismatch(&self) -> bool {
        match (self.abs_diff, self.mc_stderr) {
            (Some(diff), Some(se)) => !(diff <= 4.0 * se + 1e-6),
            _ => false,
        }
    }
}

pub fn prob(problem: &Problem, oracle: Option<OracleOptions>) -> Result<ProbReport, CliError> {
    let sol = solve(&problem.gaussian, &problem.config)?;
    let diag = &sol.diagnostics;
    let mut report = ProbReport {
        probability: sol.probability(),
        rank: diag.rank,
        doubling_gap: diag.doubling_gap,
        singular_distance: diag.singular_distance.value,
        gradient: sol.gradient(),
        removed_redundant: one_based(&diag.removed_redundant),
        shift: diag.shift,
        retries: diag.retries,
        ode_steps: diag.steps.accepted,
        oracle_method: None,
        mc_value: None,
        mc_stderr: None,
        abs_diff: None,
    };
    if let Some(o) = oracle {
        let std = standardize(&problem.gaussian)?;
        let est: OracleEstimate = if o.qmc {
            estimate_phi_qmc(&std, o.samples, o.seed)
        } else {
            estimate_phi(&std, o.samples, o.seed)
        };
        report.oracle_method = Some(if o.qmc { "qmc" } else { "mc" });
        report.mc_value = Some(est.value);
        report.mc_stderr = Some(est.std_error);
        report.abs_diff = Some((est.value - report.probability).abs());
    }
    Ok(report)
}

#[derive(Serialize)]
pub struct FacesReport {
    pub rank: usize,
    pub faces: Vec<Vec<usize>>,
    pub removed_redundant: Vec<usize>,
    /// Input label of each constraint of the system, in system order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_labels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemExport>,
}

pub fn faces(problem: &Problem, with_system: bool) -> Result<FacesReport, CliError> {
    let std = standardize(&problem.gaussian)?;
    let (stripped, removed, sys, _) = prepare(&std)?;
    let labels = Labels::new(std.num_constraints(), &removed);
    Ok(FacesReport {
        rank: sys.dimension(),
        faces: sys.basis().iter().map(|&f| labels.face(f)).collect(),
        removed_redundant: one_based(&removed),
        constraint_labels: with_system.then(|| one_based(&labels.kept)),
        system: with_system.then(|| sys.export(stripped.b())),
    })
}

#[derive(Serialize)]
pub struct Thresholds {
    pub integrability: f64,
    pub op_p3: f64,
    pub decomposition: f64,
}

#[derive(Serialize)]
pub struct SelftestReport {
    pub pass: bool,
    pub integrability_residual: f64,
    pub worst_pair: Option<[String; 2]>,
    pub op_p3_residual: f64,
    pub decomposition_residual: f64,
    pub thresholds: Thresholds,
    pub rank: usize,
    pub samples: usize,
}

pub const INTEGRABILITY_TOL: f64 = 1e-6;
pub const OP_P3_TOL: f64 = 1e-10;
pub const DECOMPOSITION_TOL: f64 = 1e-10;

pub fn selftest(problem: &Problem, samples: usize, seed: u64) -> Result<SelftestReport, CliError> {
    let std = standardize(&problem.gaussian)?;
    let (stripped, _, sys, _) = prepare(&std)?;
    let b = stripped.b();
    let coords = Coordinate::all(stripped.dim(), stripped.num_constraints());
    let mut worst = 0.0;
    let mut worst_pair = None;
    for (i, &c1) in coords.iter().enumerate() {
        for &c2 in &coords[i + 1..] {
            let r = sys.integrability_residual(b, c1, c2);
            if !(r <= worst) {
                worst = r;
                worst_pair = Some([c1.label(), c2.label()]);
            }
        }
    }
    let op_p3 = sys.op_p3_residual(b);
    let decomposition = check_decomposition(&stripped, sys.complex(), samples, seed);
    Ok(SelftestReport {
        pass: worst <= INTEGRABILITY_TOL && op_p3 <= OP_P3_TOL && decomposition <= DECOMPOSITION_TOL,
        integrability_residual: worst,
        worst_pair,
        op_p3_residual: op_p3,
        decomposition_residual: decomposition,
        thresholds: Thresholds {
            integrability: INTEGRABILITY_TOL,
            op_p3: OP_P3_TOL,
            decomposition: DECOMPOSITION_TOL,
        },
        rank: sys.dimension(),
        samples,
    })
}

#[derive(Serialize)]
pub struct BenchEntry {
    pub name: String,
    pub d: usize,
    pub n: usize,
    pub rank: usize,
    pub probability: f64,
    pub seconds: f64,
    pub ode_steps: usize,
}

#[derive(Serialize)]
pub struct BenchReport {
    pub instances: Vec<BenchEntry>,
    pub total_seconds: f64,
}

fn bench_set() -> Vec<(String, Polyhedron)> {
    let mut set = vec![
        ("unit_square".to_string(), instances::unit_square()),
        ("triangle".to_string(), instances::triangle()),
        ("orthant_0.5".to_string(), instances::orthant(0.5)),
        ("orthant_-0.9".to_string(), instances::orthant(-0.9)),
        ("half_space_3".to_string(), instances::half_space(3)),
    ];
    for (k, p) in instances::random_batch(10, 4, 6, 2024).into_iter().enumerate() {
        set.push((format!("random_{k}"), p));
    }
    set
}

pub fn bench(repeat: usize) -> Result<BenchReport, CliError> {
    let cfg = HgmConfig::default();
    let total = Instant::now();
    let mut out = Vec::new();
    for (name, p) in bench_set() {
        let start = Instant::now();
        let mut last = None;
        for _ in 0..repeat.max(1) {
            last = Some(polygauss::hgm::solve_standard(&p, &cfg)?);
        }
        let sol = last.expect("at least one run");
        out.push(BenchEntry {
            name,
            d: p.dim(),
            n: p.num_constraints(),
            rank: sol.diagnostics.rank,
            probability: sol.probability(),
            seconds: start.elapsed().as_secs_f64() / repeat.max(1) as f64,
            ode_steps: sol.diagnostics.steps.accepted,
        });
    }
    Ok(BenchReport {
        instances: out,
        total_seconds: total.elapsed().as_secs_f64(),
    })
}
