//! The shipped Garver instance and a few solve helpers.

use robopf_core::grid::{
    parse_case, parse_uncertainty, Network, UncertaintyBudget, UncertaintySpec, UncertaintyVaR,
};
use robopf_core::paths::{build_path_sets, PathSet, Weight};
use robopf_milp::{solve_milp, OptModel, Solution, SolverOptions};

pub const CASE: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../data/garver.case"
));
pub const SIDECAR: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../data/garver.unc"
));

pub fn raw() -> Network {
    parse_case(CASE).unwrap()
}

pub fn instance() -> (Network, UncertaintySpec) {
    parse_uncertainty(SIDECAR, &raw()).unwrap()
}

pub fn paths(net: &Network, k: usize) -> PathSet {
    build_path_sets(net, k, Weight::Resistance).unwrap()
}

pub fn budget(spec: &UncertaintySpec, kappa: f64, tau: f64) -> UncertaintyBudget {
    UncertaintyBudget::new(spec.dispersion.clone(), kappa, tau).unwrap()
}

pub fn var(spec: &UncertaintySpec, alpha: f64) -> UncertaintyVaR {
    UncertaintyVaR::new(spec.var.as_ref().unwrap().samples.clone(), alpha).unwrap()
}

/// Solves and checks the primal and dual values agree.
pub fn solve(m: &OptModel) -> Solution {
    let sol = solve_milp(m, &SolverOptions::default()).unwrap();
    assert!(sol.is_optimal(), "status {}", sol.status);
    let gap = (sol.objective - sol.dual_objective).abs();
    assert!(
        gap <= 1e-7 * sol.objective.abs().max(1.0),
        "duality gap {gap}"
    );
    sol
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
