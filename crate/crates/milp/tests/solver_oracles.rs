#[path = "support/lp_oracle.rs"]
mod lp_oracle;

use lp_oracle::{brute_force_binaries, random_lp, random_milp, vertex_enumeration};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robopf_milp::{solve_lp, solve_milp, OptModel, Sense, Solution, SolverOptions, Status};

fn check_kkt(m: &OptModel, s: &Solution, tol: f64) {
    let x = &s.primal;
    assert!(
        m.max_violation(x) <= 1e-7,
        "primal violation {}",
        m.max_violation(x)
    );
    let scale = 1.0 + s.objective.abs();
    assert!(
        (s.objective - s.dual_objective).abs() <= tol * scale,
        "duality gap {} vs {}",
        s.objective,
        s.dual_objective
    );
    for (r, &y) in m.rows().iter().zip(&s.dual) {
        let slack = r.slack(x);
        match r.sense {
            Sense::Le => assert!(y <= tol, "row {} dual {y}", r.name),
            Sense::Ge => assert!(y >= -tol, "row {} dual {y}", r.name),
            Sense::Eq => {}
        }
        if r.sense != Sense::Eq && slack > 1e-6 {
            assert!(y.abs() <= tol, "inactive row {} has dual {y}", r.name);
        }
    }
    // Reduced costs c - Aᵀy must match the reported vector and carry the right signs.
    let mut d: Vec<f64> = m.vars().iter().map(|v| v.objective).collect();
    for (r, &y) in m.rows().iter().zip(&s.dual) {
        for &(j, a) in &r.coeffs {
            d[j] -= a * y;
        }
    }
    for (j, v) in m.vars().iter().enumerate() {
        assert!((d[j] - s.reduced_costs[j]).abs() <= tol * (1.0 + d[j].abs()));
        let at_lo = (x[j] - v.lower).abs() <= 1e-9;
        let at_up = (x[j] - v.upper).abs() <= 1e-9;
        if !at_lo {
            assert!(
                d[j] <= tol,
                "column {j} above lower bound with d = {}",
                d[j]
            );
        }
        if !at_up {
            assert!(
                d[j] >= -tol,
                "column {j} below upper bound with d = {}",
                d[j]
            );
        }
    }
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    for case in 0..200 {
        let m = random_lp(&mut rng, 8, 8);
        let s = solve_lp(&m, &opts).unwrap();
        let reference = vertex_enumeration(&m);
        match reference {
            Some(obj) => {
                assert_eq!(s.status, Status::Optimal, "case {case}");
                assert!(
                    (s.objective - obj).abs() <= 1e-7,
                    "case {case}: {} vs {obj}",
                    s.objective
                );
                check_kkt(&m, &s, 1e-7);
            }
            None => assert_eq!(s.status, Status::Infeasible, "case {case}"),
        }
    }
}

#[test]
fn infeasible_random_lps_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let mut m = random_lp(&mut rng, 6, 5);
        let n = m.num_vars();
        let cap = m.rows().last().unwrap().rhs;
        m.add_row("contra", (0..n).map(|j| (j, 1.0)), Sense::Ge, cap + 1.0);
        assert_eq!(vertex_enumeration(&m), None);
        assert_eq!(
            solve_lp(&m, &SolverOptions::default()).unwrap().status,
            Status::Infeasible
        );
    }
}

#[test]
fn random_milps_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = SolverOptions::default();
    for case in 0..50 {
        let nb = 2 + case % 9;
        let m = random_milp(&mut rng, nb);
        let s = solve_milp(&m, &opts).unwrap();
        match brute_force_binaries(&m) {
            Some(obj) => {
                assert_eq!(s.status, Status::Optimal, "case {case}");
                assert!(
                    (s.objective - obj).abs() <= 1e-6,
                    "case {case}: {} vs {obj}",
                    s.objective
                );
                assert!(m.max_violation(&s.primal) <= 1e-7);
                for j in m.binaries() {
                    assert!(s.primal[j] == 0.0 || s.primal[j] == 1.0);
                }
            }
            None => assert_eq!(s.status, Status::Infeasible, "case {case}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_lps_satisfy_kkt(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_lp(&mut rng, 10, 10);
        let s = solve_lp(&m, &SolverOptions::default()).unwrap();
        // Feasible by construction and bounded by the cap row.
        prop_assert_eq!(s.status, Status::Optimal);
        check_kkt(&m, &s, 1e-7);
    }

    #[test]
    fn milp_never_beats_its_relaxation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_milp(&mut rng, 6);
        let s = solve_milp(&m, &SolverOptions::default()).unwrap();
        let r = solve_lp(&lp_oracle::relax(&m), &SolverOptions::default()).unwrap();
        if s.status == Status::Optimal {
            prop_assert_eq!(r.status, Status::Optimal);
            prop_assert!(s.objective >= r.objective - 1e-7);
        }
    }
}
