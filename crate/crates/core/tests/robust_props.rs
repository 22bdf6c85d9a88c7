//! Robust counterparts against vertex enumeration, and model invariants.

mod support;

use std::sync::OnceLock;

use proptest::prelude::*;
use robopf_core::formulations::{
    build_aar_budget, build_aar_var, build_arc_budget, build_arc_var, build_pb1, build_pb2,
    build_pb2pp_budget, build_pb2pp_var, build_recourse, check_recourse_feasibility,
    evaluate_policy, extract_policy, robustify_budget_row, robustify_var_row, AffinePolicy,
    ExpansionPlan, LinExpr, ModelIndex, RowGroup, UncertainRow,
};
use robopf_core::grid::UncertaintySet;
use robopf_core::oracle::{budget_vertices, recourse_cost, var_vertices, worst_case_cost};
use robopf_milp::{solve_lp, OptModel, Sense, SolverOptions};
use support::garver::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row with constant coefficients on a single column fixed at 1.
fn constant_row(a0: f64, a: &[f64]) -> (OptModel, UncertainRow) {
    let mut m = OptModel::new();
    let x = m.add_var("x", 1.0, 1.0, 0.0);
    let row = UncertainRow {
        name: "r".into(),
        nominal: LinExpr {
            terms: vec![(x, a0)],
            constant: -1e9,
        },
        coeffs: a
            .iter()
            .map(|&c| LinExpr {
                terms: vec![(x, c)],
                constant: 0.0,
            })
            .collect(),
    };
    (m, row)
}

/// Smallest left-hand side the emitted group admits, minus the nominal part.
fn counterpart_margin(mut m: OptModel, g: &RowGroup) -> f64 {
    let row = m.rows()[g.main].clone();
    for &(c, a) in row.coeffs.iter().filter(|(c, _)| g.aux_cols.contains(c)) {
        m.set_objective(c, a);
    }
    let sol = solve_lp(&m, &SolverOptions::default()).unwrap();
    assert!(sol.is_optimal());
    sol.objective
}

/// max c·ξ over the budget set as an LP in ξ = ξ⁺ − ξ⁻.
fn budget_lp_max(c: &[f64], kappa: f64, tau: f64) -> f64 {
    let mut m = OptModel::new();
    let mut l1 = Vec::new();
    for &ch in c {
        let up = m.add_var("up", 0.0, tau, -ch);
        let dn = m.add_var("dn", 0.0, tau, ch);
        m.add_row("box", vec![(up, 1.0), (dn, 1.0)], Sense::Le, tau);
        l1.push((up, 1.0));
        l1.push((dn, 1.0));
    }
    m.add_row("l1", l1, Sense::Le, kappa);
    -solve_lp(&m, &SolverOptions::default()).unwrap().objective
}

/// max c·d over the tail polytope as an LP in the sample weights.
fn var_lp_max(c: &[f64], samples: &[Vec<f64>], alpha: f64) -> f64 {
    let cap = 1.0 / (samples.len() as f64 * (1.0 - alpha));
    let mut m = OptModel::new();
    let lam: Vec<usize> = samples
        .iter()
        .map(|d| m.add_var("l", 0.0, cap, -dot(c, d)))
        .collect();
    m.add_row(
        "sum",
        lam.iter().map(|&l| (l, 1.0)).collect::<Vec<_>>(),
        Sense::Eq,
        1.0,
    );
    -solve_lp(&m, &SolverOptions::default()).unwrap().objective
}

fn samples_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..4, 1usize..8)
        .prop_flat_map(|(k, n)| prop::collection::vec(prop::collection::vec(0.0..100.0f64, k), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn budget_counterpart_is_tight(
        a in prop::collection::vec(-10.0..10.0f64, 1..5),
        kappa in 0.0..5.0f64,
        tau in 0.0..2.0f64,
    ) {
        let (mut m, row) = constant_row(0.0, &a);
        let g = robustify_budget_row(&mut m, &row, kappa, tau);
        let margin = counterpart_margin(m, &g);
        let worst = budget_vertices(a.len(), kappa, tau)
            .unwrap()
            .iter()
            .map(|xi| dot(&a, xi))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((margin - worst).abs() <= 1e-7 * (1.0 + worst.abs()), "{} vs {}", margin, worst);
    }

    #[test]
    fn var_counterpart_is_tight(samples in samples_strategy(), alpha in 0.0..0.99f64, seed in any::<u64>()) {
        let k = samples[0].len();
        let a: Vec<f64> = (0..k).map(|h| ((seed >> (8 * h)) & 0xff) as f64 / 12.8 - 10.0).collect();
        let (mut m, row) = constant_row(0.0, &a);
        let g = robustify_var_row(&mut m, &row, &samples, alpha);
        let margin = counterpart_margin(m, &g);
        let worst = var_vertices(&samples, alpha)
            .unwrap()
            .iter()
            .map(|d| dot(&a, d))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((margin - worst).abs() <= 1e-7 * (1.0 + worst.abs()), "{} vs {}", margin, worst);
    }

    #[test]
    fn budget_vertices_attain_every_lp_max(
        c in prop::collection::vec(-5.0..5.0f64, 1..6),
        kappa in 0.0..6.0f64,
        tau in 0.01..2.0f64,
    ) {
        let verts = budget_vertices(c.len(), kappa, tau).unwrap();
        for v in &verts {
            prop_assert!(v.iter().all(|x| x.abs() <= tau + 1e-12));
            prop_assert!(v.iter().map(|x| x.abs()).sum::<f64>() <= kappa + 1e-9);
        }
        let best = verts.iter().map(|v| dot(&c, v)).fold(f64::NEG_INFINITY, f64::max);
        let lp = budget_lp_max(&c, kappa, tau);
        prop_assert!((best - lp).abs() <= 1e-7 * (1.0 + lp.abs()), "{} vs {}", best, lp);
    }

    #[test]
    fn var_vertices_attain_every_lp_max(samples in samples_strategy(), alpha in 0.0..0.99f64, seed in any::<u64>()) {
        let k = samples[0].len();
        let c: Vec<f64> = (0..k).map(|h| ((seed >> (8 * h)) & 0xff) as f64 / 25.6 - 5.0).collect();
        let best = var_vertices(&samples, alpha).unwrap().iter().map(|d| dot(&c, d)).fold(f64::NEG_INFINITY, f64::max);
        let lp = var_lp_max(&c, &samples, alpha);
        prop_assert!((best - lp).abs() <= 1e-7 * (1.0 + lp.abs()), "{} vs {}", best, lp);
    }

    #[test]
    fn var_extremes(samples in samples_strategy()) {
        let n = samples.len();
        let k = samples[0].len();
        let mean: Vec<f64> = (0..k).map(|h| samples.iter().map(|s| s[h]).sum::<f64>() / n as f64).collect();
        let at_zero = var_vertices(&samples, 0.0).unwrap();
        prop_assert_eq!(at_zero.len(), 1);
        for (x, y) in at_zero[0].iter().zip(&mean) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
        let top = var_vertices(&samples, (n as f64 - 1.0) / n as f64).unwrap();
        for s in &samples {
            prop_assert!(top.iter().any(|v| v.iter().zip(s).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()))));
        }
        prop_assert!(top.len() <= n);
    }
}

fn assert_complete(m: &OptModel, idx: &ModelIndex) {
    let mut cols = idx.columns();
    cols.sort_unstable();
    assert_eq!(
        cols,
        (0..m.num_vars()).collect::<Vec<_>>(),
        "{} columns",
        idx.family
    );
    let mut rows = idx.all_rows();
    rows.sort_unstable();
    assert_eq!(
        rows,
        (0..m.num_rows()).collect::<Vec<_>>(),
        "{} rows",
        idx.family
    );
}

#[test]
fn model_index_covers_every_row_and_column() {
    let (net, spec) = instance();
    let ps = paths(&net, 2);
    let d = net.nominal_demand();
    let plan = ExpansionPlan::from_mask(&net, 0b101);
    let mut built = vec![
        build_pb2(&net, &ps, &d).unwrap(),
        build_recourse(&net, &ps, &plan, &d).unwrap(),
        build_pb1(&net, &ps, 1.0).unwrap(),
    ];
    for kappa in [0.0, 2.0, 3.5] {
        let b = budget(&spec, kappa, 1.0);
        built.push(build_aar_budget(&net, &ps, &b).unwrap());
        built.push(build_arc_budget(&net, &ps, &b).unwrap());
        built.push(build_pb2pp_budget(&net, &ps, &b, None, 100.0).unwrap());
        built.push(build_pb2pp_budget(&net, &ps, &b, Some(&plan), 100.0).unwrap());
    }
    for alpha in [0.0, 0.5, 0.9] {
        let v = var(&spec, alpha);
        built.push(build_aar_var(&net, &ps, &v).unwrap());
        built.push(build_arc_var(&net, &ps, &v).unwrap());
        built.push(build_pb2pp_var(&net, &ps, &v, None, 100.0).unwrap());
    }
    for (m, idx) in &built {
        assert_complete(m, idx);
    }
}

struct Solved {
    plan: ExpansionPlan,
    policy: AffinePolicy,
}

fn aar_xi() -> &'static Solved {
    static CELL: OnceLock<Solved> = OnceLock::new();
    CELL.get_or_init(|| {
        let (net, spec) = instance();
        let ps = paths(&net, 2);
        let (m, idx) = build_aar_budget(&net, &ps, &budget(&spec, 3.0, 1.0)).unwrap();
        let sol = solve(&m);
        Solved {
            plan: idx.plan(&net, &sol.primal),
            policy: extract_policy(&sol, &idx).unwrap(),
        }
    })
}

fn aar_xip() -> &'static Solved {
    static CELL: OnceLock<Solved> = OnceLock::new();
    CELL.get_or_init(|| {
        let (net, spec) = instance();
        let ps = paths(&net, 2);
        let (m, idx) = build_aar_var(&net, &ps, &var(&spec, 0.5)).unwrap();
        let sol = solve(&m);
        Solved {
            plan: idx.plan(&net, &sol.primal),
            policy: extract_policy(&sol, &idx).unwrap(),
        }
    })
}

/// Point in the budget set: a random direction scaled onto it.
fn budget_point(raw: &[f64], kappa: f64, tau: f64) -> Vec<f64> {
    let clipped: Vec<f64> = raw.iter().map(|x| x.clamp(-tau, tau)).collect();
    let l1: f64 = clipped.iter().map(|x| x.abs()).sum();
    let scale = if l1 > kappa { kappa / l1 } else { 1.0 };
    clipped.iter().map(|x| x * scale).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn budget_policy_is_feasible(raw in prop::collection::vec(-1.5..1.5f64, 5)) {
        let (net, spec) = instance();
        let ps = paths(&net, 2);
        let s = aar_xi();
        let xi = budget_point(&raw, 3.0, 1.0);
        let b = budget(&spec, 3.0, 1.0);
        let d = b.demand_at(&net.nominal_demand(), &xi);
        let (p, flows) = evaluate_policy(&s.policy, &xi).unwrap();
        let rep = check_recourse_feasibility(&net, &ps, &s.plan, &d, &p, &flows).unwrap();
        prop_assert!(rep.max_violation() <= 1e-6, "violation {}", rep.max_violation());
    }

    #[test]
    fn var_policy_is_feasible(weights in prop::collection::vec(0.0..1.0f64, 10)) {
        let (net, spec) = instance();
        let ps = paths(&net, 2);
        let s = aar_xip();
        // Any convex combination of vertices lies in the set.
        let verts = var_vertices(&var(&spec, 0.5).samples, 0.5).unwrap();
        let total: f64 = weights.iter().sum::<f64>().max(1e-12);
        let mut d = vec![0.0; 5];
        for (i, w) in weights.iter().enumerate() {
            let v = &verts[(i * 37) % verts.len()];
            for (x, y) in d.iter_mut().zip(v) {
                *x += w / total * y;
            }
        }
        let (p, flows) = evaluate_policy(&s.policy, &d).unwrap();
        let rep = check_recourse_feasibility(&net, &ps, &s.plan, &d, &p, &flows).unwrap();
        prop_assert!(rep.max_violation() <= 1e-6, "violation {}", rep.max_violation());
    }

    #[test]
    fn recourse_never_exceeds_vertex_max(raw in prop::collection::vec(-1.0..1.0f64, 5), kappa in 0.0..5.0f64) {
        let (net, spec) = instance();
        let ps = paths(&net, 2);
        let opts = SolverOptions::default();
        let plan = ExpansionPlan::from_mask(&net, 0b111);
        let b = budget(&spec, kappa, 1.0);
        let worst = worst_case_cost(&net, &ps, &plan, &UncertaintySet::Budget(b.clone()), &opts).unwrap();
        prop_assume!(worst.robust_feasible());
        let d = b.demand_at(&net.nominal_demand(), &budget_point(&raw, kappa, 1.0));
        let inner = recourse_cost(&net, &ps, &plan, &d, &opts).unwrap().unwrap();
        prop_assert!(inner.cost <= worst.worst_recourse + 1e-7 * worst.worst_recourse.abs());
    }
}
