//! Brute-force reference solvers used by the test suites: basic-solution
//! enumeration for LPs and exhaustive binary enumeration for MILPs.

#![allow(dead_code)]

use rand::Rng;
use robopf_milp::{solve_lp, OptModel, Sense, SolverOptions, Status};

/// A random LP that is feasible by construction (rows are built around a
/// random point) and bounded (a cap row on `Σx`).
pub fn random_lp<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> OptModel {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0f64)).collect();
    let mut model = OptModel::new();
    for j in 0..n {
        let upper = if rng.gen_bool(0.25) {
            x0[j] + rng.gen_range(0.0..3.0)
        } else {
            f64::INFINITY
        };
        let c = (rng.gen_range(-5.0..5.0f64) * 10.0).round() / 10.0;
        model.add_var(format!("x{j}"), 0.0, upper, c);
    }
    for i in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, (rng.gen_range(-5.0..5.0f64) * 10.0).round() / 10.0));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let slack = rng.gen_range(0.0..2.0);
        let (sense, rhs) = match rng.gen_range(0..7) {
            0 => (Sense::Eq, act),
            1..=3 => (Sense::Le, act + slack),
            _ => (Sense::Ge, act - slack),
        };
        model.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    let cap = x0.iter().sum::<f64>() + 5.0;
    model.add_row("cap", (0..n).map(|j| (j, 1.0)), Sense::Le, cap);
    model
}

struct Constraint {
    a: Vec<f64>,
    sense: Sense,
    b: f64,
}

fn constraints_of(model: &OptModel) -> Vec<Constraint> {
    let n = model.num_vars();
    let mut out = Vec::new();
    for r in model.rows() {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] = v;
        }
        out.push(Constraint {
            a,
            sense: r.sense,
            b: r.rhs,
        });
    }
    for (j, v) in model.vars().iter().enumerate() {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        if v.lower.is_finite() {
            out.push(Constraint {
                a: a.clone(),
                sense: Sense::Ge,
                b: v.lower,
            });
        }
        if v.upper.is_finite() {
            out.push(Constraint {
                a,
                sense: Sense::Le,
                b: v.upper,
            });
        }
    }
    out
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[i][k] -= f * a[col][k];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn combinations(pool: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(
        pool: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < k - cur.len() {
                break;
            }
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(pool, k, 0, &mut Vec::new(), f);
}

/// Minimum objective over all basic feasible solutions, or `None` when no
/// basic solution is feasible. Requires every column to have a finite lower
/// bound and the feasible region to be bounded.
pub fn vertex_enumeration(model: &OptModel) -> Option<f64> {
    let n = model.num_vars();
    let cons = constraints_of(model);
    // Any n linearly independent constraints holding with equality give a
    // basic solution; equality rows are enforced by the feasibility check.
    let all: Vec<usize> = (0..cons.len()).collect();
    let mut best: Option<f64> = None;
    combinations(&all, n, &mut |active| eval(model, &cons, active, &mut best));
    best
}

fn eval(model: &OptModel, cons: &[Constraint], active: &[usize], best: &mut Option<f64>) {
    let a: Vec<Vec<f64>> = active.iter().map(|&i| cons[i].a.clone()).collect();
    let b: Vec<f64> = active.iter().map(|&i| cons[i].b).collect();
    let Some(x) = solve_square(a, b) else { return };
    let feasible = cons.iter().all(|c| {
        let act: f64 = c.a.iter().zip(&x).map(|(a, x)| a * x).sum();
        let tol = 1e-9 * (1.0 + c.b.abs());
        match c.sense {
            Sense::Le => act <= c.b + tol,
            Sense::Ge => act >= c.b - tol,
            Sense::Eq => (act - c.b).abs() <= tol,
        }
    });
    if feasible {
        let obj = model.objective_value(&x);
        *best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
}

/// A random mixed-binary model: `nb` binaries plus a few bounded continuous
/// columns, with random covering and packing rows.
pub fn random_milp<R: Rng>(rng: &mut R, nb: usize) -> OptModel {
    let nc = rng.gen_range(0..=3);
    let mut model = OptModel::new();
    for j in 0..nb {
        let c = (rng.gen_range(-10.0..10.0f64) * 10.0).round() / 10.0;
        model.add_binary(format!("b{j}"), c);
    }
    for j in 0..nc {
        let c = (rng.gen_range(-3.0..5.0f64) * 10.0).round() / 10.0;
        model.add_var(format!("y{j}"), 0.0, rng.gen_range(1.0..6.0), c);
    }
    let n = nb + nc;
    let m = rng.gen_range(1..=6);
    for i in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                coeffs.push((j, (rng.gen_range(-4.0..6.0f64) * 10.0).round() / 10.0));
            }
        }
        let total: f64 = coeffs.iter().map(|&(_, a)| a.abs()).sum();
        let (sense, rhs) = if rng.gen_bool(0.6) {
            (
                Sense::Le,
                (total * rng.gen_range(0.2..0.8) * 10.0).round() / 10.0,
            )
        } else {
            (
                Sense::Ge,
                (total * rng.gen_range(-0.3..0.4) * 10.0).round() / 10.0,
            )
        };
        model.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    model
}

/// Exhaustive enumeration over the binary columns, each completion solved
/// as an LP. `None` when every completion is infeasible.
pub fn brute_force_binaries(model: &OptModel) -> Option<f64> {
    let bins: Vec<usize> = model.binaries().collect();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1u64 << bins.len()) {
        let mut fixed = model.clone();
        for (bit, &j) in bins.iter().enumerate() {
            let v = ((mask >> bit) & 1) as f64;
            fixed.set_bounds(j, v, v);
        }
        let relaxed = relax(&fixed);
        let sol = solve_lp(&relaxed, &SolverOptions::default()).unwrap();
        if sol.status == Status::Optimal {
            best = Some(best.map_or(sol.objective, |b: f64| b.min(sol.objective)));
        }
    }
    best
}

/// Copy of `model` with binary columns turned continuous, keeping bounds.
pub fn relax(model: &OptModel) -> OptModel {
    let mut out = OptModel::new();
    for v in model.vars() {
        out.add_var(v.name.clone(), v.lower, v.upper, v.objective);
    }
    for r in model.rows() {
        out.add_row(r.name.clone(), r.coeffs.clone(), r.sense, r.rhs);
    }
    out.set_objective_offset(model.objective_offset());
    out
}
