//! Brute-force checks: extreme points of the uncertainty sets, the recourse
//! LP and its dual at fixed demand, worst case over vertices, and exhaustive
//! search over expansion plans.

use rayon::prelude::*;
use robopf_milp::{solve_lp, solve_milp, OptModel, Sense, SolverOptions, Status};

use crate::formulations::{build_pb2pp_budget, build_pb2pp_var, build_recourse, ExpansionPlan};
use crate::grid::{Network, UncertaintySet};
use crate::paths::PathSet;
use crate::Error;

const MAX_VERTICES: f64 = 1e6;
const MAX_CANDIDATES: usize = 20;
const DEDUP_TOL: f64 = 1e-12;
const DUALITY_TOL: f64 = 1e-7;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` with every increasing `m`-subset of `0..n`.
fn for_each_subset(n: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for i in start..=n - (m - cur.len()) {
            cur.push(i);
            rec(i + 1, n, m, cur, f);
            cur.pop();
        }
    }
    if m <= n {
        rec(0, n, m, &mut Vec::with_capacity(m), f);
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DEDUP_TOL)
}

fn dedup(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| same_point(q, &p)) {
            out.push(p);
        }
    }
    out
}

/// Extreme points of {‖ξ‖₁ ≤ κ, ‖ξ‖∞ ≤ τ} in R^k: ⌊κ/τ⌋ coordinates at ±τ
/// and, when κ/τ is fractional, one more at ±(κ − ⌊κ/τ⌋τ).
pub fn budget_vertices(k: usize, kappa: f64, tau: f64) -> Result<Vec<Vec<f64>>, Error> {
    if !(kappa >= 0.0 && tau >= 0.0) || !kappa.is_finite() || !tau.is_finite() {
        return Err(Error::Invalid(format!(
            "kappa {kappa} and tau {tau} must be finite and nonnegative"
        )));
    }
    if kappa == 0.0 || tau == 0.0 || k == 0 {
        return Ok(vec![vec![0.0; k]]);
    }
    let full = ((kappa / tau) + 1e-9).floor() as usize;
    let (m, frac) = if full >= k {
        (k, 0.0)
    } else {
        let f = kappa - full as f64 * tau;
        (full, if f > DEDUP_TOL * tau.max(1.0) { f } else { 0.0 })
    };
    let extra = if frac > 0.0 {
        2.0 * (k - m) as f64
    } else {
        1.0
    };
    let count = binomial(k, m) * 2f64.powi(m as i32) * extra;
    if count > MAX_VERTICES {
        return Err(Error::TooManyVertices(count));
    }

    let mut out = Vec::with_capacity(count as usize);
    for_each_subset(k, m, &mut |coords| {
        for signs in 0..1usize << m {
            let mut xi = vec![0.0; k];
            for (b, &c) in coords.iter().enumerate() {
                xi[c] = if (signs >> b) & 1 == 0 { tau } else { -tau };
            }
            if frac > 0.0 {
                for j in (0..k).filter(|j| !coords.contains(j)) {
                    for s in [frac, -frac] {
                        let mut v = xi.clone();
                        v[j] = s;
                        out.push(v);
                    }
                }
            } else {
                out.push(xi);
            }
        }
    });
    Ok(dedup(out))
}

/// Extreme points of {Σλ_i d^i : Σλ = 1, 0 ≤ λ ≤ 1/(N(1−α))}: the cap on
/// ⌊N(1−α)⌋ samples and the remainder on one more.
pub fn var_vertices(samples: &[Vec<f64>], alpha: f64) -> Result<Vec<Vec<f64>>, Error> {
    if samples.is_empty() {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha {alpha} must lie in [0, 1)")));
    }
    let n = samples.len();
    let k = samples[0].len();
    // A cap above 1 binds nothing: the set is then the hull of the samples.
    let cap = (1.0 / (n as f64 * (1.0 - alpha))).min(1.0);
    let m = ((1.0 / cap) + 1e-9).floor() as usize;
    let m = m.clamp(1, n);
    let rest = 1.0 - m as f64 * cap;
    let rest = if rest.abs() <= DEDUP_TOL { 0.0 } else { rest };
    let count = binomial(n, m) * if rest > 0.0 { (n - m) as f64 } else { 1.0 };
    if count > MAX_VERTICES {
        return Err(Error::TooManyVertices(count));
    }
    // When the cap times m overshoots 1 by rounding, scale it back.
    let w = if rest == 0.0 { 1.0 / m as f64 } else { cap };

    let mut out = Vec::with_capacity(count as usize);
    for_each_subset(n, m, &mut |chosen| {
        let mut base = vec![0.0; k];
        for &i in chosen {
            for (b, d) in base.iter_mut().zip(&samples[i]) {
                *b += w * d;
            }
        }
        if rest > 0.0 {
            for j in (0..n).filter(|j| !chosen.contains(j)) {
                out.push(
                    base.iter()
                        .zip(&samples[j])
                        .map(|(b, d)| b + rest * d)
                        .collect(),
                );
            }
        } else {
            out.push(base);
        }
    });
    Ok(dedup(out))
}

/// Drops duplicates and every demand vector that another one dominates
/// componentwise. Recourse cost is nondecreasing in demand, so the worst
/// case over the input is attained on the survivors.
pub fn dominant_demands(demands: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let unique = dedup(demands.to_vec());
    unique
        .iter()
        .enumerate()
        .filter(|(i, d)| {
            !unique
                .iter()
                .enumerate()
                .any(|(j, e)| j != *i && e.iter().zip(d.iter()).all(|(a, b)| *a >= *b - DEDUP_TOL))
        })
        .map(|(_, d)| d.clone())
        .collect()
}

/// Extreme points of `set` as (point in the set's own space, demand).
pub fn set_vertices(
    net: &Network,
    set: &UncertaintySet,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, Error> {
    match set {
        UncertaintySet::Budget(b) => {
            let nominal = net.nominal_demand();
            if b.dispersion.len() != nominal.len() {
                return Err(Error::Dimension(format!(
                    "{} dispersions for {} loads",
                    b.dispersion.len(),
                    nominal.len()
                )));
            }
            Ok(budget_vertices(nominal.len(), b.kappa, b.tau)?
                .into_iter()
                .map(|xi| {
                    let d = b.demand_at(&nominal, &xi);
                    (xi, d)
                })
                .collect())
        }
        UncertaintySet::VaR(v) => Ok(var_vertices(&v.samples, v.alpha)?
            .into_iter()
            .map(|d| (d.clone(), d))
            .collect()),
    }
}

/// Optimal recourse at fixed plan and demand with its dual prices.
#[derive(Debug, Clone, PartialEq)]
pub struct Recourse {
    pub cost: f64,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    /// Demand-row prices, one per load.
    pub lambda: Vec<f64>,
    /// Generation-row prices, one per generator.
    pub phi: Vec<f64>,
    /// Thermal-row prices by branch index.
    pub eta: Vec<f64>,
    /// Σλd − Σ ȳ²R x η.
    pub dual_objective: f64,
}

/// Generation cost of the cheapest dispatch, or `None` when the plan cannot
/// serve `d`. Fails if the LP's primal and dual values disagree.
pub fn recourse_cost(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    d: &[f64],
    opts: &SolverOptions,
) -> Result<Option<Recourse>, Error> {
    let (m, idx) = build_recourse(net, ps, plan, d)?;
    let sol = solve_lp(&m, opts)?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(None),
        other => return Err(Error::Solve(other)),
    }
    let lambda: Vec<f64> = idx.rows["demand"].iter().map(|&r| sol.dual[r]).collect();
    let phi: Vec<f64> = idx.rows["generation"]
        .iter()
        .map(|&r| -sol.dual[r])
        .collect();
    let eta: Vec<f64> = idx.rows["thermal"].iter().map(|&r| -sol.dual[r]).collect();
    let dual_objective = lambda.iter().zip(d).map(|(l, dk)| l * dk).sum::<f64>()
        - net
            .branches
            .iter()
            .zip(&eta)
            .filter(|(br, _)| plan.in_service(net, br.id))
            .map(|(br, e)| br.thermal_rhs() * e)
            .sum::<f64>();
    let gap = (sol.objective - dual_objective).abs();
    if gap > DUALITY_TOL * (1.0 + sol.objective.abs()) {
        return Err(Error::DualityGap(gap));
    }
    Ok(Some(Recourse {
        cost: sol.objective,
        p: idx.p.iter().map(|&c| sol.primal[c]).collect(),
        s: idx.s.iter().map(|&c| sol.primal[c]).collect(),
        lambda,
        phi,
        eta,
        dual_objective,
    }))
}

/// max Σλd − Σ ȳ²R x η over λ, φ, η ≥ 0 with c_g ≥ φ_g and
/// Σ_{l∈p} η_l + φ_g ≥ λ_k, solved directly. `+∞` when unbounded, which
/// happens exactly when the recourse is infeasible.
pub fn dual_recourse_value(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    d: &[f64],
    opts: &SolverOptions,
) -> Result<f64, Error> {
    if d.len() != ps.loads.len() {
        return Err(Error::Dimension(format!(
            "{} demands for {} loads",
            d.len(),
            ps.loads.len()
        )));
    }
    let mut m = OptModel::new();
    let lambda: Vec<usize> = ps
        .loads
        .iter()
        .zip(d)
        .map(|(b, dk)| m.add_var(format!("lambda[{b}]"), 0.0, f64::INFINITY, -dk))
        .collect();
    let phi: Vec<usize> = net
        .generators
        .iter()
        .map(|g| m.add_var(format!("phi[{}]", g.bus), 0.0, g.cost, 0.0))
        .collect();
    let eta: Vec<usize> = net
        .branches
        .iter()
        .map(|br| {
            let cap = if plan.in_service(net, br.id) {
                br.thermal_rhs()
            } else {
                0.0
            };
            m.add_var(format!("eta[{}]", br.id), 0.0, f64::INFINITY, cap)
        })
        .collect();
    for (i, path) in ps.paths.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = path.edges.iter().map(|&e| (eta[e - 1], 1.0)).collect();
        coeffs.push((lambda[ps.path_load[i]], -1.0));
        coeffs.push((phi[ps.path_gen[i]], 1.0));
        m.add_row(format!("path[{}]", i + 1), coeffs, Sense::Ge, 0.0);
    }
    let sol = solve_lp(&m, opts)?;
    match sol.status {
        Status::Optimal => Ok(-sol.objective),
        Status::Unbounded => Ok(f64::INFINITY),
        other => Err(Error::Solve(other)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseResult {
    pub plan: ExpansionPlan,
    pub investment: f64,
    /// Investment plus worst recourse; `+∞` when some vertex is infeasible.
    pub cost: f64,
    pub worst_recourse: f64,
    /// Maximizing vertex in the set's own space (ξ or demand).
    pub argmax_vertex: Vec<f64>,
    pub argmax_demand: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    /// Recourse cost per vertex, `None` where infeasible.
    pub per_vertex: Vec<Option<f64>>,
}

impl WorstCaseResult {
    pub fn robust_feasible(&self) -> bool {
        self.per_vertex.iter().all(Option::is_some)
    }
}

fn worst_over(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    vertices: &[(Vec<f64>, Vec<f64>)],
    opts: &SolverOptions,
) -> Result<WorstCaseResult, Error> {
    let per_vertex: Vec<Option<f64>> = vertices
        .par_iter()
        .map(|(_, d)| recourse_cost(net, ps, plan, d, opts).map(|r| r.map(|r| r.cost)))
        .collect::<Result<_, _>>()?;
    let mut best = 0;
    let mut worst = f64::NEG_INFINITY;
    for (i, c) in per_vertex.iter().enumerate() {
        let c = c.unwrap_or(f64::INFINITY);
        if c > worst {
            worst = c;
            best = i;
        }
    }
    let investment = plan.investment(net);
    Ok(WorstCaseResult {
        plan: plan.clone(),
        investment,
        cost: investment + worst,
        worst_recourse: worst,
        argmax_vertex: vertices[best].0.clone(),
        argmax_demand: vertices[best].1.clone(),
        vertices: vertices.iter().map(|(v, _)| v.clone()).collect(),
        per_vertex,
    })
}

/// Investment plus the largest recourse cost over the extreme points of
/// `set`; recourse is convex in demand, so no interior point does worse.
pub fn worst_case_cost(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    set: &UncertaintySet,
    opts: &SolverOptions,
) -> Result<WorstCaseResult, Error> {
    worst_over(net, ps, plan, &set_vertices(net, set)?, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Cheapest robust-feasible plan, first in mask order on ties.
    pub best: Option<WorstCaseResult>,
    /// Every plan in mask order.
    pub plans: Vec<WorstCaseResult>,
    pub infeasible: Vec<ExpansionPlan>,
}

/// Worst-case cost of every expansion plan.
pub fn brute_force_arc(
    net: &Network,
    ps: &PathSet,
    set: &UncertaintySet,
    opts: &SolverOptions,
) -> Result<BruteForce, Error> {
    let nc = net.num_candidates();
    if nc > MAX_CANDIDATES {
        return Err(Error::TooManyCandidates(nc));
    }
    let vertices = set_vertices(net, set)?;
    let plans: Vec<WorstCaseResult> = ExpansionPlan::enumerate(net)
        .par_iter()
        .map(|plan| worst_over(net, ps, plan, &vertices, opts))
        .collect::<Result<_, _>>()?;
    let infeasible = plans
        .iter()
        .filter(|r| !r.robust_feasible())
        .map(|r| r.plan.clone())
        .collect();
    let best = plans
        .iter()
        .filter(|r| r.robust_feasible())
        .fold(None::<&WorstCaseResult>, |acc, r| match acc {
            Some(a) if a.cost <= r.cost => Some(a),
            _ => Some(r),
        })
        .cloned();
    Ok(BruteForce {
        best,
        plans,
        infeasible,
    })
}

/// Literal single-dual-point program against the vertex worst case, for one
/// fixed plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Pb2ppReport {
    pub plan: ExpansionPlan,
    /// γ* of the literal program; `-∞` if unbounded, `+∞` if infeasible.
    pub literal_gamma: f64,
    /// max over vertices of the recourse LP.
    pub worst_recourse: f64,
    /// max over vertices of the dual recourse LP solved on its own.
    pub dual_route: f64,
    /// |literal_gamma − worst_recourse|.
    pub gap: f64,
    /// |dual_route − worst_recourse|.
    pub dual_route_gap: f64,
    /// Some η sits at M_eta in the literal optimum.
    pub eta_at_bound: bool,
}

pub fn check_pb2pp_equivalence(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    set: &UncertaintySet,
    m_eta: f64,
    opts: &SolverOptions,
) -> Result<Pb2ppReport, Error> {
    let vertices = set_vertices(net, set)?;
    let worst = worst_over(net, ps, plan, &vertices, opts)?;
    let dual_values: Vec<f64> = vertices
        .par_iter()
        .map(|(_, d)| dual_recourse_value(net, ps, plan, d, opts))
        .collect::<Result<_, _>>()?;
    let dual_route = dual_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    let (m, idx) = match set {
        UncertaintySet::Budget(b) => build_pb2pp_budget(net, ps, b, Some(plan), m_eta)?,
        UncertaintySet::VaR(v) => build_pb2pp_var(net, ps, v, Some(plan), m_eta)?,
    };
    let sol = solve_milp(&m, opts)?;
    let (literal_gamma, eta_at_bound) = match sol.status {
        Status::Optimal => {
            let gamma = sol.primal[idx.gamma.expect("literal model has gamma")];
            let at_bound = idx
                .eta
                .iter()
                .any(|&c| sol.primal[c] >= m_eta * (1.0 - 1e-4));
            (gamma, at_bound)
        }
        Status::Infeasible => (f64::INFINITY, false),
        Status::Unbounded => (f64::NEG_INFINITY, false),
        other => return Err(Error::Solve(other)),
    };
    let diff = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() };
    Ok(Pb2ppReport {
        plan: plan.clone(),
        literal_gamma,
        worst_recourse: worst.worst_recourse,
        dual_route,
        gap: diff(literal_gamma, worst.worst_recourse),
        dual_route_gap: diff(dual_route, worst.worst_recourse),
        eta_at_bound,
    })
}
