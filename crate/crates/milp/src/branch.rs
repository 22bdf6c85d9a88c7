//! Best-first branch-and-bound over binary columns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::model::OptModel;
use crate::{lp_with_bounds, simplex, ModelError, Solution, SolverOptions, Status};

struct Node {
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Solves a mixed-binary model to global optimality within `opts.mip_gap`.
///
/// `nodes` counts child LPs solved below the root. When an incumbent exists
/// the returned duals are those of the LP with every binary fixed at its
/// incumbent value.
pub fn solve_milp(m: &OptModel, opts: &SolverOptions) -> Result<Solution, ModelError> {
    m.validate()?;
    let start = Instant::now();
    let cols = simplex::columns_of(m);
    let base_lo: Vec<f64> = m.vars().iter().map(|v| v.lower).collect();
    let base_up: Vec<f64> = m.vars().iter().map(|v| v.upper).collect();
    let binaries: Vec<usize> = m.binaries().collect();

    if binaries.is_empty() {
        let mut sol = lp_with_bounds(m, &cols, &base_lo, &base_up, opts);
        sol.wall_time = start.elapsed().as_secs_f64();
        return Ok(sol);
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        fixings: Vec::new(),
    });
    let mut seq = 1;
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut hit_limit = false;
    let mut root = true;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - opts.mip_gap {
                continue;
            }
        }
        if !root {
            if nodes >= opts.max_nodes {
                hit_limit = true;
                break;
            }
            nodes += 1;
        }
        let (mut lo, mut up) = (base_lo.clone(), base_up.clone());
        for &(j, v) in &node.fixings {
            lo[j] = v;
            up[j] = v;
        }
        let lp = lp_with_bounds(m, &cols, &lo, &up, opts);
        iterations += lp.iterations;
        match lp.status {
            Status::Optimal => {}
            Status::Infeasible => {
                root = false;
                continue;
            }
            Status::Unbounded if root => {
                let mut sol = Solution::empty(Status::Unbounded, m);
                sol.iterations = iterations;
                sol.wall_time = start.elapsed().as_secs_f64();
                return Ok(sol);
            }
            Status::Unbounded | Status::IterationLimit => {
                hit_limit = true;
                root = false;
                continue;
            }
        }
        root = false;
        if let Some((best, _)) = &incumbent {
            if lp.objective >= best - opts.mip_gap {
                continue;
            }
        }
        // Most fractional binary, lowest index on ties.
        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let v = lp.primal[j];
            let frac = (v - v.round()).abs();
            if frac <= opts.int_tol {
                continue;
            }
            let dist = (v - 0.5).abs();
            if branch.map_or(true, |(_, d)| dist < d - 1e-12) {
                branch = Some((j, dist));
            }
        }
        match branch {
            None => {
                let mut x = lp.primal;
                for &j in &binaries {
                    x[j] = x[j].round();
                }
                incumbent = Some((lp.objective, x));
            }
            Some((j, _)) => {
                for v in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    heap.push(Node {
                        bound: lp.objective,
                        seq,
                        fixings,
                    });
                    seq += 1;
                }
            }
        }
    }

    let Some((_, x)) = incumbent else {
        let status = if hit_limit {
            Status::IterationLimit
        } else {
            Status::Infeasible
        };
        let mut sol = Solution::empty(status, m);
        sol.nodes = nodes;
        sol.iterations = iterations;
        sol.wall_time = start.elapsed().as_secs_f64();
        return Ok(sol);
    };

    let (mut lo, mut up) = (base_lo, base_up);
    for &j in &binaries {
        lo[j] = x[j];
        up[j] = x[j];
    }
    let mut sol = lp_with_bounds(m, &cols, &lo, &up, opts);
    iterations += sol.iterations;
    if sol.status != Status::Optimal {
        // Fixed LP should reproduce the incumbent; fall back to it.
        sol = Solution::empty(Status::Optimal, m);
        sol.objective = m.objective_value(&x);
        sol.primal = x;
    }
    sol.status = if hit_limit && !heap.is_empty() {
        Status::IterationLimit
    } else {
        Status::Optimal
    };
    sol.nodes = nodes;
    sol.iterations = iterations;
    sol.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}
