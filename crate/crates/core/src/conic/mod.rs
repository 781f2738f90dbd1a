//! Conic formulations of the two relaxations and a first-order solver.

mod problem;
mod solver;

pub use problem::{formulate_fcc, formulate_mc, polar_scale, ColMatrix, ConeSpec, ConicProblem, Formulation};
pub use solver::{dense_a, project_cone, solve, RawSolution, Residuals, SolveStatus, SolverSettings};

use crate::error::SolverError;
use crate::graph::SymMatrix;

fn check_eps(eps: f64) -> Result<(), SolverError> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(SolverError::BadParameter(format!("perturbation {eps} outside [0, 1)")))
    }
}

/// `(1−ε)Ỹ + εI`.
pub fn perturb_mc(y: &SymMatrix, eps: f64) -> Result<SymMatrix, SolverError> {
    check_eps(eps)?;
    let n = y.nrows();
    Ok(y * (1.0 - eps) + SymMatrix::identity(n, n) * eps)
}

/// `Ỹ + εμI`.
pub fn perturb_fcc(y: &SymMatrix, mu: f64, eps: f64) -> Result<SymMatrix, SolverError> {
    check_eps(eps)?;
    if !(mu > 0.0) {
        return Err(SolverError::BadParameter(format!("mu = {mu} must be positive")));
    }
    let n = y.nrows();
    Ok(y + SymMatrix::identity(n, n) * (eps * mu))
}
