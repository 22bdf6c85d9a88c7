//! Deterministic path-flow models and the fixed-plan recourse LP.

use std::collections::BTreeMap;

use robopf_milp::{solve_milp, OptModel, Sense, Solution, SolverOptions, Status};

use super::{ExpansionPlan, Family, ModelIndex};
use crate::grid::Network;
use crate::paths::PathSet;
use crate::Error;

/// How branch capacity enters a thermal row.
pub(crate) enum Lines<'a> {
    /// Candidate id → binary column.
    Columns(&'a BTreeMap<usize, usize>),
    Fixed(&'a ExpansionPlan),
}

pub(crate) enum Capacity {
    /// Thermal rhs multiplies this binary column.
    Column(usize, f64),
    Constant(f64),
}

impl Lines<'_> {
    pub(crate) fn capacity(&self, net: &Network, branch: usize) -> Capacity {
        let br = &net.branches[branch - 1];
        let rhs = br.thermal_rhs();
        if !br.candidate {
            return Capacity::Constant(rhs);
        }
        match self {
            Lines::Columns(cols) => Capacity::Column(cols[&branch], rhs),
            Lines::Fixed(plan) => Capacity::Constant(if plan.in_service(net, branch) {
                rhs
            } else {
                0.0
            }),
        }
    }
}

pub(crate) fn add_candidate_columns(
    m: &mut OptModel,
    idx: &mut ModelIndex,
    net: &Network,
) -> BTreeMap<usize, usize> {
    let mut cols = BTreeMap::new();
    for br in net.candidates() {
        let c = m.add_binary(format!("x[{}]", br.id), br.cost);
        idx.x.push((br.id, c));
        cols.insert(br.id, c);
    }
    cols
}

/// Demand, generation and thermal rows for one recourse block with fresh
/// `p, s ≥ 0` columns. Returns the (p, s) columns.
pub(crate) fn add_recourse_block(
    m: &mut OptModel,
    idx: &mut ModelIndex,
    net: &Network,
    ps: &PathSet,
    demand: &[f64],
    lines: &Lines,
    suffix: &str,
    with_cost: bool,
) -> (Vec<usize>, Vec<usize>) {
    let p: Vec<usize> = net
        .generators
        .iter()
        .map(|g| {
            let c = if with_cost { g.cost } else { 0.0 };
            m.add_var(format!("p[{}]{suffix}", g.bus), 0.0, f64::INFINITY, c)
        })
        .collect();
    let s: Vec<usize> = (0..ps.len())
        .map(|i| m.add_var(format!("s[{}]{suffix}", i + 1), 0.0, f64::INFINITY, 0.0))
        .collect();

    for (ki, paths) in ps.per_load.iter().enumerate() {
        let r = m.add_row(
            format!("demand[{}]{suffix}", ps.loads[ki]),
            paths.iter().map(|&i| (s[i], 1.0)),
            Sense::Ge,
            demand[ki],
        );
        idx.push_rows("demand", [r]);
    }
    for (gi, paths) in ps.per_gen.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = paths.iter().map(|&i| (s[i], 1.0)).collect();
        coeffs.push((p[gi], -1.0));
        let r = m.add_row(
            format!("gen[{}]{suffix}", net.generators[gi].bus),
            coeffs,
            Sense::Le,
            0.0,
        );
        idx.push_rows("generation", [r]);
    }
    for br in &net.branches {
        let mut coeffs: Vec<(usize, f64)> = ps.incidence[br.id - 1]
            .iter()
            .map(|&i| (s[i], 1.0))
            .collect();
        let rhs = match lines.capacity(net, br.id) {
            Capacity::Column(x, cap) => {
                coeffs.push((x, -cap));
                0.0
            }
            Capacity::Constant(cap) => cap,
        };
        let r = m.add_row(
            format!("thermal[{}]{suffix}", br.id),
            coeffs,
            Sense::Le,
            rhs,
        );
        idx.push_rows("thermal", [r]);
    }
    (p, s)
}

/// Deterministic expansion MILP at the given demand vector (over the load set).
pub fn build_pb2(
    net: &Network,
    ps: &PathSet,
    demand: &[f64],
) -> Result<(OptModel, ModelIndex), Error> {
    check_dims(ps, demand)?;
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(Family::Pb2);
    let xcols = add_candidate_columns(&mut m, &mut idx, net);
    let (p, s) = add_recourse_block(
        &mut m,
        &mut idx,
        net,
        ps,
        demand,
        &Lines::Columns(&xcols),
        "",
        true,
    );
    idx.p = p;
    idx.s = s;
    Ok((m, idx))
}

/// Generation-cost LP for a fixed expansion plan.
pub fn build_recourse(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    demand: &[f64],
) -> Result<(OptModel, ModelIndex), Error> {
    check_dims(ps, demand)?;
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(Family::Recourse);
    let (p, s) = add_recourse_block(
        &mut m,
        &mut idx,
        net,
        ps,
        demand,
        &Lines::Fixed(plan),
        "",
        true,
    );
    idx.p = p;
    idx.s = s;
    Ok((m, idx))
}

pub(crate) fn check_dims(ps: &PathSet, demand: &[f64]) -> Result<(), Error> {
    if demand.len() != ps.loads.len() {
        return Err(Error::Dimension(format!(
            "{} demands for {} loads",
            demand.len(),
            ps.loads.len()
        )));
    }
    Ok(())
}

/// Current-flow model without the generation coupling, which
/// [`solve_pb1`] adds as tangent cuts.
pub fn build_pb1(
    net: &Network,
    ps: &PathSet,
    r_global: f64,
) -> Result<(OptModel, ModelIndex), Error> {
    if !(r_global > 0.0) {
        return Err(Error::Invalid(format!(
            "R must be positive, got {r_global}"
        )));
    }
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(Family::Pb1);
    let xcols = add_candidate_columns(&mut m, &mut idx, net);
    idx.p = net
        .generators
        .iter()
        .map(|g| m.add_var(format!("p[{}]", g.bus), 0.0, f64::INFINITY, g.cost))
        .collect();
    idx.s = (0..ps.len())
        .map(|i| m.add_var(format!("y[{}]", i + 1), 0.0, f64::INFINITY, 0.0))
        .collect();
    let demand = net.nominal_demand();
    for (ki, paths) in ps.per_load.iter().enumerate() {
        let r = m.add_row(
            format!("demand[{}]", ps.loads[ki]),
            paths.iter().map(|&i| (idx.s[i], 1.0)),
            Sense::Ge,
            (demand[ki] / r_global).sqrt(),
        );
        idx.push_rows("demand", [r]);
    }
    for br in &net.branches {
        let mut coeffs: Vec<(usize, f64)> = ps.incidence[br.id - 1]
            .iter()
            .map(|&i| (idx.s[i], 1.0))
            .collect();
        let rhs = if br.candidate {
            coeffs.push((xcols[&br.id], -br.cap));
            0.0
        } else {
            br.cap
        };
        let r = m.add_row(format!("thermal[{}]", br.id), coeffs, Sense::Le, rhs);
        idx.push_rows("thermal", [r]);
    }
    idx.rows.entry("cut".into()).or_default();
    Ok((m, idx))
}

#[derive(Debug, Clone)]
pub struct Pb1Result {
    pub model: OptModel,
    pub index: ModelIndex,
    pub solution: Solution,
    pub cuts: usize,
    pub rounds: usize,
    /// Largest R(Σy)² − p_g at the returned point.
    pub violation: f64,
}

const PB1_TOL: f64 = 1e-6;
const PB1_MAX_ROUNDS: usize = 200;

/// Kelley cutting planes on R·(Σ_{p∈P_g} y_p)² ≤ p_g.
pub fn solve_pb1(
    net: &Network,
    ps: &PathSet,
    r_global: f64,
    opts: &SolverOptions,
) -> Result<Pb1Result, Error> {
    let (mut m, mut idx) = build_pb1(net, ps, r_global)?;
    let mut cuts = 0;
    let mut nodes = 0;
    let mut iterations = 0;
    let mut wall = 0.0;
    for round in 1..=PB1_MAX_ROUNDS {
        let mut sol = solve_milp(&m, opts)?;
        nodes += sol.nodes;
        iterations += sol.iterations;
        wall += sol.wall_time;
        if sol.status != Status::Optimal {
            sol.nodes = nodes;
            sol.iterations = iterations;
            sol.wall_time = wall;
            return Ok(Pb1Result {
                model: m,
                index: idx,
                solution: sol,
                cuts,
                rounds: round,
                violation: f64::NAN,
            });
        }
        let mut worst: f64 = 0.0;
        let mut new_cuts = Vec::new();
        for (gi, paths) in ps.per_gen.iter().enumerate() {
            let y0: f64 = paths.iter().map(|&i| sol.primal[idx.s[i]]).sum();
            let viol = r_global * y0 * y0 - sol.primal[idx.p[gi]];
            worst = worst.max(viol);
            if viol > PB1_TOL {
                new_cuts.push((gi, y0));
            }
        }
        if new_cuts.is_empty() || round == PB1_MAX_ROUNDS {
            sol.nodes = nodes;
            sol.iterations = iterations;
            sol.wall_time = wall;
            return Ok(Pb1Result {
                model: m,
                index: idx,
                solution: sol,
                cuts,
                rounds: round,
                violation: worst,
            });
        }
        for (gi, y0) in new_cuts {
            // p ≥ R·y0² + 2R·y0·(Y − y0)
            let mut coeffs: Vec<(usize, f64)> = ps.per_gen[gi]
                .iter()
                .map(|&i| (idx.s[i], 2.0 * r_global * y0))
                .collect();
            coeffs.push((idx.p[gi], -1.0));
            cuts += 1;
            let r = m.add_row(
                format!("cut{}[{}]", cuts, net.generators[gi].bus),
                coeffs,
                Sense::Le,
                r_global * y0 * y0,
            );
            idx.push_rows("cut", [r]);
        }
    }
    unreachable!("loop returns on its last round")
}
