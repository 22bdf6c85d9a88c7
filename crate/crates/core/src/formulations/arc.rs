//! Exact adjustable robust models.
//!
//! `build_arc_*` expand the recourse over the extreme points of the
//! uncertainty set: S(x, ·) is convex, so its maximum over the polytope sits
//! at a vertex, and it is nondecreasing in demand, so only componentwise
//! maximal vertex demands are kept. `build_pb2pp_*` build the single dual
//! point program with η ≤ M_eta and x·η linearized; it is kept for
//! comparison because its optimum is not the robust cost (see
//! `oracle::check_pb2pp_equivalence`).

use robopf_milp::{OptModel, Sense, Solution};

use super::deterministic::{add_candidate_columns, add_recourse_block, Capacity, Lines};
use super::robust::{robustify_budget_row, robustify_var_row, LinExpr, RowGroup, UncertainRow};
use super::{ExpansionPlan, Family, ModelIndex, Scenario};
use crate::grid::{Network, UncertaintyBudget, UncertaintyVaR};
use crate::oracle::{budget_vertices, dominant_demands, var_vertices};
use crate::paths::PathSet;
use crate::Error;

/// 10 · max_g c_g · |K|, at least 1.
pub fn default_m_eta(net: &Network) -> f64 {
    (10.0 * net.max_gen_cost() * net.load_set().len() as f64).max(1.0)
}

/// min Σf x + γ with one recourse block per demand vector and
/// Σ_g c_g p_g^v ≤ γ for each.
pub fn build_arc_scenarios(
    net: &Network,
    ps: &PathSet,
    demands: &[Vec<f64>],
    family: Family,
) -> Result<(OptModel, ModelIndex), Error> {
    if demands.is_empty() {
        return Err(Error::Invalid("no demand scenarios".into()));
    }
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(family);
    let xcols = add_candidate_columns(&mut m, &mut idx, net);
    let gamma = m.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    idx.gamma = Some(gamma);
    for (v, d) in demands.iter().enumerate() {
        super::deterministic::check_dims(ps, d)?;
        let suffix = format!("@v{}", v + 1);
        let (p, s) = add_recourse_block(
            &mut m,
            &mut idx,
            net,
            ps,
            d,
            &Lines::Columns(&xcols),
            &suffix,
            false,
        );
        let mut coeffs: Vec<(usize, f64)> = net
            .generators
            .iter()
            .zip(&p)
            .map(|(g, &c)| (c, g.cost))
            .collect();
        coeffs.push((gamma, -1.0));
        let r = m.add_row(format!("cost{suffix}"), coeffs, Sense::Le, 0.0);
        idx.push_rows("cost", [r]);
        idx.scenarios.push(Scenario {
            demand: d.clone(),
            p,
            s,
        });
    }
    Ok((m, idx))
}

pub fn build_arc_budget(
    net: &Network,
    ps: &PathSet,
    budget: &UncertaintyBudget,
) -> Result<(OptModel, ModelIndex), Error> {
    let nominal = net.nominal_demand();
    let demands: Vec<Vec<f64>> = budget_vertices(nominal.len(), budget.kappa, budget.tau)?
        .iter()
        .map(|xi| budget.demand_at(&nominal, xi))
        .collect();
    build_arc_scenarios(net, ps, &dominant_demands(&demands), Family::ArcXi)
}

pub fn build_arc_var(
    net: &Network,
    ps: &PathSet,
    var: &UncertaintyVaR,
) -> Result<(OptModel, ModelIndex), Error> {
    let demands = var_vertices(&var.samples, var.alpha)?;
    build_arc_scenarios(net, ps, &dominant_demands(&demands), Family::ArcXip)
}

enum Collection<'a> {
    Budget(&'a UncertaintyBudget, &'a [f64]),
    VaR(&'a UncertaintyVaR),
}

fn build_pb2pp(
    net: &Network,
    ps: &PathSet,
    set: Collection,
    plan: Option<&ExpansionPlan>,
    m_eta: f64,
    family: Family,
) -> Result<(OptModel, ModelIndex), Error> {
    if !(m_eta > 0.0) {
        return Err(Error::Invalid(format!(
            "M_eta must be positive, got {m_eta}"
        )));
    }
    let k = ps.loads.len();
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(family);
    let xcols = match plan {
        None => add_candidate_columns(&mut m, &mut idx, net),
        Some(p) => {
            m.set_objective_offset(p.investment(net));
            Default::default()
        }
    };
    let gamma = m.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    idx.gamma = Some(gamma);
    idx.lambda = ps
        .loads
        .iter()
        .map(|b| m.add_var(format!("lambda[{b}]"), 0.0, f64::INFINITY, 0.0))
        .collect();
    idx.phi = net
        .generators
        .iter()
        .map(|g| m.add_var(format!("phi[{}]", g.bus), 0.0, f64::INFINITY, 0.0))
        .collect();
    idx.eta = net
        .branches
        .iter()
        .map(|b| m.add_var(format!("eta[{}]", b.id), 0.0, m_eta, 0.0))
        .collect();

    // c_g − φ_g ≥ 0
    for (gi, g) in net.generators.iter().enumerate() {
        let r = m.add_row(
            format!("dual_gen[{}]", g.bus),
            [(idx.phi[gi], -1.0)],
            Sense::Ge,
            -g.cost,
        );
        idx.push_rows("dual_gen", [r]);
    }
    // Σ_{l∈p} η_l − λ_k + φ_g ≥ 0
    for (i, path) in ps.paths.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> =
            path.edges.iter().map(|&e| (idx.eta[e - 1], 1.0)).collect();
        coeffs.push((idx.lambda[ps.path_load[i]], -1.0));
        coeffs.push((idx.phi[ps.path_gen[i]], 1.0));
        let r = m.add_row(format!("dual_path[{}]", i + 1), coeffs, Sense::Ge, 0.0);
        idx.push_rows("dual_path", [r]);
    }

    // Σλd − Σ ȳ²R x η − γ ≤ 0 over the set.
    let mut nominal = LinExpr::default();
    nominal.add(gamma, -1.0);
    let lines = match plan {
        None => Lines::Columns(&xcols),
        Some(p) => Lines::Fixed(p),
    };
    for br in &net.branches {
        let eta = idx.eta[br.id - 1];
        match lines.capacity(net, br.id) {
            Capacity::Constant(cap) => nominal.add(eta, -cap),
            Capacity::Column(x, cap) => {
                // z = x·η: z ≤ M x, z ≤ η, z ≥ η − M(1 − x), z ≥ 0
                let z = m.add_var(format!("z[{}]", br.id), 0.0, f64::INFINITY, 0.0);
                idx.z.push((br.id, z));
                let rows = [
                    m.add_row(
                        format!("mc1[{}]", br.id),
                        [(z, 1.0), (x, -m_eta)],
                        Sense::Le,
                        0.0,
                    ),
                    m.add_row(
                        format!("mc2[{}]", br.id),
                        [(z, 1.0), (eta, -1.0)],
                        Sense::Le,
                        0.0,
                    ),
                    m.add_row(
                        format!("mc3[{}]", br.id),
                        [(z, 1.0), (eta, -1.0), (x, -m_eta)],
                        Sense::Ge,
                        -m_eta,
                    ),
                ];
                idx.push_rows("mccormick", rows);
                nominal.add(z, -cap);
            }
        }
    }
    let coeffs: Vec<LinExpr> = (0..k)
        .map(|h| {
            let scale = match &set {
                Collection::Budget(b, _) => b.dispersion[h],
                Collection::VaR(_) => 1.0,
            };
            LinExpr {
                terms: vec![(idx.lambda[h], scale)],
                constant: 0.0,
            }
        })
        .collect();
    let group: RowGroup = match set {
        Collection::Budget(b, d) => {
            for (h, &dh) in d.iter().enumerate() {
                nominal.add(idx.lambda[h], dh);
            }
            let row = UncertainRow {
                name: "collection".into(),
                nominal,
                coeffs,
            };
            robustify_budget_row(&mut m, &row, b.kappa, b.tau)
        }
        Collection::VaR(v) => {
            let row = UncertainRow {
                name: "collection".into(),
                nominal,
                coeffs,
            };
            robustify_var_row(&mut m, &row, &v.samples, v.alpha)
        }
    };
    idx.push_rows("collection", [group.main]);
    idx.push_rows("collection.aux", group.aux_rows);
    idx.push_aux("w", group.aux_cols);
    Ok((m, idx))
}

/// Single dual point program over the budget set. `plan = None` leaves x
/// as binaries with the x·η products linearized.
pub fn build_pb2pp_budget(
    net: &Network,
    ps: &PathSet,
    budget: &UncertaintyBudget,
    plan: Option<&ExpansionPlan>,
    m_eta: f64,
) -> Result<(OptModel, ModelIndex), Error> {
    let nominal = net.nominal_demand();
    build_pb2pp(
        net,
        ps,
        Collection::Budget(budget, &nominal),
        plan,
        m_eta,
        Family::Pb2ppXi,
    )
}

pub fn build_pb2pp_var(
    net: &Network,
    ps: &PathSet,
    var: &UncertaintyVaR,
    plan: Option<&ExpansionPlan>,
    m_eta: f64,
) -> Result<(OptModel, ModelIndex), Error> {
    build_pb2pp(net, ps, Collection::VaR(var), plan, m_eta, Family::Pb2ppXip)
}

/// Branch ids whose η lies within 1e-4·M_eta of the bound.
pub fn check_eta_bounds(
    sol: &Solution,
    idx: &ModelIndex,
    net: &Network,
    m_eta: f64,
) -> Result<(), Error> {
    for (l, &col) in idx.eta.iter().enumerate() {
        if sol.primal[col] >= m_eta * (1.0 - 1e-4) {
            return Err(Error::EtaAtBound(net.branches[l].id));
        }
    }
    Ok(())
}
