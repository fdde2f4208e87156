//! Problem files: `{"a": [[..], ..], "b": [..], "mean"?, "covariance"?, "config"?}`.

use polygauss::hgm::{GaussianProblem, HgmConfig};
use polygauss::{Matrix, Polyhedron};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// `d` rows of length `n`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    #[serde(default)]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub config: HgmConfig,
}

const SYMMETRY_TOL: f64 = 1e-12;

pub struct Problem {
    /// The polyhedron as written in the file.
    pub polyhedron: Polyhedron,
    pub gaussian: GaussianProblem<f64>,
    pub config: HgmConfig,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("problem file: {e}")))
    }

    pub fn into_problem(self) -> Result<Problem, CliError> {
        let d = self.a.len();
        let n = self.b.len();
        if d == 0 {
            return Err(CliError::parse("\"a\" has no rows"));
        }
        if let Some(i) = self.a.iter().position(|r| r.len() != n) {
            return Err(CliError::parse(format!(
                "row {} of \"a\" has length {}, \"b\" has length {n}",
                i + 1,
                self.a[i].len()
            )));
        }
        let mean = self.mean.unwrap_or_else(|| vec![0.0; d]);
        if mean.len() != d {
            return Err(CliError::parse(format!("\"mean\" has length {}, expected {d}", mean.len())));
        }
        let cov = match self.covariance {
            None => Matrix::identity(d),
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::parse(format!("\"covariance\" must be {d} x {d}")));
                }
                for i in 0..d {
                    for j in 0..i {
                        if (rows[i][j] - rows[j][i]).abs() > SYMMETRY_TOL {
                            return Err(CliError::parse(format!(
                                "\"covariance\" is not symmetric at ({}, {})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                Matrix::from_rows(&rows)
            }
        };
        let polyhedron = Polyhedron::from_rows(&self.a, self.b)?;
        let gaussian = GaussianProblem::new(polyhedron.clone(), mean, cov)?;
        Ok(Problem {
            polyhedron,
            gaussian,
            config: self.config,
        })
    }
}
