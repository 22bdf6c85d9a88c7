//! Affine decision rules: p_g(r) = p_g^0 + Σ_h p_g^h r_h and likewise for s,
//! with every PB2 row robustified over the uncertainty set.

use robopf_milp::OptModel;

use super::deterministic::{add_candidate_columns, Capacity, Lines};
use super::robust::{robustify_budget_row, robustify_var_row, LinExpr, UncertainRow};
use super::{Family, ModelIndex, Space};
use crate::grid::{Network, UncertaintyBudget, UncertaintyVaR};
use crate::paths::PathSet;
use crate::Error;

fn add_rule_columns(m: &mut OptModel, idx: &mut ModelIndex, net: &Network, ps: &PathSet) {
    let k = ps.loads.len();
    let free =
        |m: &mut OptModel, name: String| m.add_var(name, f64::NEG_INFINITY, f64::INFINITY, 0.0);
    idx.gamma = Some(m.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY, 1.0));
    for g in &net.generators {
        idx.p.push(free(m, format!("p0[{}]", g.bus)));
    }
    for g in &net.generators {
        let rule = (0..k)
            .map(|h| free(m, format!("p[{}][{}]", g.bus, ps.loads[h])))
            .collect();
        idx.p_rule.push(rule);
    }
    for i in 0..ps.len() {
        idx.s.push(free(m, format!("s0[{}]", i + 1)));
    }
    for i in 0..ps.len() {
        let rule = (0..k)
            .map(|h| free(m, format!("s[{}][{}]", i + 1, ps.loads[h])))
            .collect();
        idx.s_rule.push(rule);
    }
}

/// Affine expression `Σ_i sign·v_i(r)` for rule columns `base`/`rule`.
fn rule_sum(
    base: &[usize],
    rule: &[Vec<usize>],
    ids: &[usize],
    sign: f64,
    k: usize,
) -> (LinExpr, Vec<LinExpr>) {
    let mut nominal = LinExpr::default();
    let mut coeffs = vec![LinExpr::default(); k];
    for &i in ids {
        nominal.add(base[i], sign);
        for h in 0..k {
            coeffs[h].add(rule[i][h], sign);
        }
    }
    (nominal, coeffs)
}

fn merge(a: (LinExpr, Vec<LinExpr>), b: (LinExpr, Vec<LinExpr>)) -> (LinExpr, Vec<LinExpr>) {
    let (mut n, mut c) = a;
    n.terms.extend(b.0.terms);
    n.constant += b.0.constant;
    for (x, y) in c.iter_mut().zip(b.1) {
        x.terms.extend(y.terms);
        x.constant += y.constant;
    }
    (n, c)
}

/// Every uncertain row of the affinely adjustable model, tagged with its
/// group: cost, demand, generation, thermal, p_nonneg, s_nonneg. Row
/// coefficients multiply ξ for [`Space::Xi`] and realized demand for
/// [`Space::Demand`].
pub fn aar_uncertain_rows(
    net: &Network,
    ps: &PathSet,
    idx: &ModelIndex,
    space: Space,
    dispersion: &[f64],
) -> Vec<(&'static str, UncertainRow)> {
    let k = ps.loads.len();
    let nominal = net.nominal_demand();
    let gamma = idx.gamma.expect("rule model has gamma");
    let all_gens: Vec<usize> = (0..net.generators.len()).collect();
    let mut out = Vec::new();

    // Σ_g c_g p_g(r) − γ ≤ 0
    let mut cost = (LinExpr::default(), vec![LinExpr::default(); k]);
    for &g in &all_gens {
        let c = net.generators[g].cost;
        cost = merge(cost, rule_sum(&idx.p, &idx.p_rule, &[g], c, k));
    }
    cost.0.add(gamma, -1.0);
    out.push((
        "cost",
        UncertainRow {
            name: "cost".into(),
            nominal: cost.0,
            coeffs: cost.1,
        },
    ));

    // d_k(r) − Σ_{p∈P_k} s_p(r) ≤ 0
    for (ki, paths) in ps.per_load.iter().enumerate() {
        let (mut n, mut c) = rule_sum(&idx.s, &idx.s_rule, paths, -1.0, k);
        match space {
            Space::Xi => {
                n.constant = nominal[ki];
                c[ki].constant = dispersion[ki];
            }
            Space::Demand => c[ki].constant = 1.0,
        }
        out.push((
            "demand",
            UncertainRow {
                name: format!("demand[{}]", ps.loads[ki]),
                nominal: n,
                coeffs: c,
            },
        ));
    }

    // Σ_{p∈P_g} s_p(r) − p_g(r) ≤ 0
    for (gi, paths) in ps.per_gen.iter().enumerate() {
        let (n, c) = merge(
            rule_sum(&idx.s, &idx.s_rule, paths, 1.0, k),
            rule_sum(&idx.p, &idx.p_rule, &[gi], -1.0, k),
        );
        let name = format!("gen[{}]", net.generators[gi].bus);
        out.push((
            "generation",
            UncertainRow {
                name,
                nominal: n,
                coeffs: c,
            },
        ));
    }

    // Σ_{p∋l} s_p(r) − ȳ²R x_l ≤ 0
    let xcols = idx.x.iter().copied().collect();
    let lines = Lines::Columns(&xcols);
    for br in &net.branches {
        let (mut n, c) = rule_sum(&idx.s, &idx.s_rule, &ps.incidence[br.id - 1], 1.0, k);
        match lines.capacity(net, br.id) {
            Capacity::Column(x, cap) => n.add(x, -cap),
            Capacity::Constant(cap) => n.constant -= cap,
        }
        out.push((
            "thermal",
            UncertainRow {
                name: format!("thermal[{}]", br.id),
                nominal: n,
                coeffs: c,
            },
        ));
    }

    // −p_g(r) ≤ 0
    for (gi, g) in net.generators.iter().enumerate() {
        let (n, c) = rule_sum(&idx.p, &idx.p_rule, &[gi], -1.0, k);
        out.push((
            "p_nonneg",
            UncertainRow {
                name: format!("pnn[{}]", g.bus),
                nominal: n,
                coeffs: c,
            },
        ));
    }

    // −s_p(r) ≤ 0
    for i in 0..ps.len() {
        let (n, c) = rule_sum(&idx.s, &idx.s_rule, &[i], -1.0, k);
        out.push((
            "s_nonneg",
            UncertainRow {
                name: format!("snn[{}]", i + 1),
                nominal: n,
                coeffs: c,
            },
        ));
    }
    out
}

fn aux_block(group: &str) -> &'static str {
    match group {
        "cost" => "w",
        "demand" => "u",
        "generation" => "v",
        "thermal" => "t",
        "p_nonneg" => "r",
        _ => "mu",
    }
}

fn rule_model(net: &Network, ps: &PathSet, family: Family) -> (OptModel, ModelIndex) {
    let mut m = OptModel::new();
    let mut idx = ModelIndex::new(family);
    add_candidate_columns(&mut m, &mut idx, net);
    add_rule_columns(&mut m, &mut idx, net, ps);
    (m, idx)
}

/// Affinely adjustable counterpart over the budget set; rules are affine in ξ.
pub fn build_aar_budget(
    net: &Network,
    ps: &PathSet,
    budget: &UncertaintyBudget,
) -> Result<(OptModel, ModelIndex), Error> {
    if budget.dispersion.len() != ps.loads.len() {
        return Err(Error::Dimension(format!(
            "{} dispersions for {} loads",
            budget.dispersion.len(),
            ps.loads.len()
        )));
    }
    let (mut m, mut idx) = rule_model(net, ps, Family::AarXi);
    for (group, row) in aar_uncertain_rows(net, ps, &idx, Space::Xi, &budget.dispersion) {
        let g = robustify_budget_row(&mut m, &row, budget.kappa, budget.tau);
        idx.push_rows(group, [g.main]);
        idx.push_rows(&format!("{group}.aux"), g.aux_rows);
        idx.push_aux(aux_block(group), g.aux_cols);
    }
    Ok((m, idx))
}

/// Affinely adjustable counterpart over the value-at-risk set; rules are
/// affine in realized demand.
pub fn build_aar_var(
    net: &Network,
    ps: &PathSet,
    var: &UncertaintyVaR,
) -> Result<(OptModel, ModelIndex), Error> {
    if var.samples.iter().any(|s| s.len() != ps.loads.len()) {
        return Err(Error::Dimension(
            "sample width differs from the load count".into(),
        ));
    }
    let (mut m, mut idx) = rule_model(net, ps, Family::AarXip);
    let zero = vec![0.0; ps.loads.len()];
    for (group, row) in aar_uncertain_rows(net, ps, &idx, Space::Demand, &zero) {
        let g = robustify_var_row(&mut m, &row, &var.samples, var.alpha);
        idx.push_rows(group, [g.main]);
        idx.push_rows(&format!("{group}.aux"), g.aux_rows);
        idx.push_aux(aux_block(group), g.aux_cols);
    }
    Ok((m, idx))
}
