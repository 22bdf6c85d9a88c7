//! Small, deterministic LP/MILP engine.
//!
//! [`solve_lp`] runs a two-phase bounded primal simplex on a sparse LU basis
//! factorization (Dantzig pricing, switching to Bland's rule once a phase has
//! used `5·(rows+cols)` pivots). [`solve_milp`] wraps it in best-first
//! branch-and-bound over the binary columns, branching on the most
//! fractional one.

mod branch;
mod factor;
pub mod model;
mod simplex;

use std::time::Instant;

use thiserror::Error;

pub use branch::solve_milp;
pub use model::{model_stats, OptModel, Row, Sense, Variable};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid bounds on column {0}")]
    BadBounds(String),
    #[error("row {row} references column {column} which does not exist")]
    BadColumn { row: String, column: usize },
    #[error("model has binary columns; use solve_milp")]
    HasBinaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Primal feasibility tolerance on rows and bounds.
    pub feas_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub opt_tol: f64,
    /// Binaries within this distance of 0/1 count as integral.
    pub int_tol: f64,
    /// Absolute optimality gap for branch-and-bound.
    pub mip_gap: f64,
    /// Pivot limit per LP; `None` picks a size-based default.
    pub max_iterations: Option<usize>,
    pub max_nodes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            int_tol: 1e-6,
            mip_gap: 1e-6,
            max_iterations: None,
            max_nodes: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Row duals, `∂objective/∂rhs`: nonnegative on active `>=` rows and
    /// nonpositive on active `<=` rows.
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// `Σ dual·rhs + Σ reduced_cost·x`, the Lagrangian dual value.
    pub dual_objective: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub wall_time: f64,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub(crate) fn empty(status: Status, m: &OptModel) -> Self {
        Self {
            status,
            objective: match status {
                Status::Infeasible => f64::INFINITY,
                Status::Unbounded => f64::NEG_INFINITY,
                _ => f64::NAN,
            },
            primal: vec![0.0; m.num_vars()],
            dual: vec![0.0; m.num_rows()],
            reduced_costs: vec![0.0; m.num_vars()],
            dual_objective: f64::NAN,
            nodes: 0,
            iterations: 0,
            wall_time: 0.0,
        }
    }
}

/// Solves a model without binary columns.
pub fn solve_lp(m: &OptModel, opts: &SolverOptions) -> Result<Solution, ModelError> {
    m.validate()?;
    if m.has_binaries() {
        return Err(ModelError::HasBinaries);
    }
    let start = Instant::now();
    let lower: Vec<f64> = m.vars().iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = m.vars().iter().map(|v| v.upper).collect();
    let cols = simplex::columns_of(m);
    let mut sol = lp_with_bounds(m, &cols, &lower, &upper, opts);
    sol.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

pub(crate) fn lp_with_bounds(
    m: &OptModel,
    cols: &[Vec<(usize, f64)>],
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> Solution {
    let out = simplex::solve(m, cols, lower, upper, opts);
    let mut sol = Solution::empty(out.status, m);
    sol.iterations = out.iterations;
    if out.status != Status::Optimal {
        return sol;
    }
    let dual_objective = m.objective_offset()
        + m.rows()
            .iter()
            .zip(&out.y)
            .map(|(r, y)| r.rhs * y)
            .sum::<f64>()
        + out
            .reduced
            .iter()
            .zip(&out.x)
            .map(|(d, x)| d * x)
            .sum::<f64>();
    sol.objective = m.objective_value(&out.x);
    sol.primal = out.x;
    sol.dual = out.y;
    sol.reduced_costs = out.reduced;
    sol.dual_objective = dual_objective;
    sol
}
