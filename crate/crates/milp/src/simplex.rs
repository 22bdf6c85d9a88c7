//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical column `r_i` with coefficient `-1`, so the
//! constraint system becomes `A x - r = 0` with the row sense carried by the
//! bounds of `r_i`. Rows whose activity at the starting point violates those
//! bounds receive an artificial column; phase 1 minimizes the artificial sum,
//! phase 2 fixes the artificials at zero and minimizes the true objective.

use crate::factor::Factor;
use crate::model::{OptModel, Sense};
use crate::{SolverOptions, Status};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column held at zero.
    Zero,
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub reduced: Vec<f64>,
    pub iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    Limit,
    Numerical,
}

struct Simplex<'a> {
    m: usize,
    n: usize,
    /// Structural columns, `(row, value)`.
    cols: &'a [Vec<(usize, f64)>],
    /// Artificial columns as `(row, sign)`.
    art: Vec<(usize, f64)>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    factor: Factor,
    iterations: usize,
    max_iterations: usize,
    opt_tol: f64,
}

/// Column-major copy of the structural matrix.
pub(crate) fn columns_of(model: &OptModel) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); model.num_vars()];
    for (i, row) in model.rows().iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a));
        }
    }
    cols
}

/// Solves the LP relaxation of `model` with column bounds `lower`/`upper`.
pub(crate) fn solve(
    model: &OptModel,
    cols: &[Vec<(usize, f64)>],
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> LpOutcome {
    let m = model.num_rows();
    let n = model.num_vars();
    let fail = |status, iterations| LpOutcome {
        status,
        x: vec![0.0; n],
        y: vec![0.0; m],
        reduced: vec![0.0; n],
        iterations,
    };
    if lower
        .iter()
        .zip(upper)
        .any(|(l, u)| *l > *u + opts.feas_tol)
    {
        return fail(Status::Infeasible, 0);
    }

    let mut lo = Vec::with_capacity(n + 2 * m);
    let mut up = Vec::with_capacity(n + 2 * m);
    let mut x = Vec::with_capacity(n + 2 * m);
    let mut state = Vec::with_capacity(n + 2 * m);
    for j in 0..n {
        let (l, u) = (lower[j], upper[j].max(lower[j]));
        lo.push(l);
        up.push(u);
        if l.is_finite() {
            x.push(l);
            state.push(State::Lower);
        } else if u.is_finite() {
            x.push(u);
            state.push(State::Upper);
        } else {
            x.push(0.0);
            state.push(State::Zero);
        }
    }
    let mut activity = vec![0.0; m];
    for (j, col) in cols.iter().enumerate() {
        if x[j] != 0.0 {
            for &(i, a) in col {
                activity[i] += a * x[j];
            }
        }
    }
    let mut art = Vec::new();
    let mut basis = vec![usize::MAX; m];
    for (i, row) in model.rows().iter().enumerate() {
        let (rl, ru) = match row.sense {
            Sense::Le => (f64::NEG_INFINITY, row.rhs),
            Sense::Ge => (row.rhs, f64::INFINITY),
            Sense::Eq => (row.rhs, row.rhs),
        };
        lo.push(rl);
        up.push(ru);
        let act = activity[i];
        if act >= rl && act <= ru {
            x.push(act);
            state.push(State::Basic);
            basis[i] = n + i;
        } else if act < rl {
            x.push(rl);
            state.push(State::Lower);
            art.push((i, 1.0));
        } else {
            x.push(ru);
            state.push(if rl == ru { State::Lower } else { State::Upper });
            art.push((i, -1.0));
        }
    }
    for (k, &(i, sigma)) in art.iter().enumerate() {
        // activity - r + sigma * a = 0
        let value = (x[n + i] - activity[i]) / sigma;
        lo.push(0.0);
        up.push(f64::INFINITY);
        x.push(value);
        state.push(State::Basic);
        basis[i] = n + m + k;
    }

    let nt = n + m + art.len();
    let max_iterations = opts.max_iterations.unwrap_or(100 * (m + nt) + 10_000);
    let mut spx = Simplex {
        m,
        n,
        cols,
        art,
        lo,
        up,
        cost: vec![0.0; nt],
        x,
        state,
        basis,
        factor: Factor::default(),
        iterations: 0,
        max_iterations,
        opt_tol: opts.opt_tol,
    };
    if spx.refactor().is_err() {
        return fail(Status::IterationLimit, 0);
    }

    if !spx.art.is_empty() {
        for k in 0..spx.art.len() {
            spx.cost[n + m + k] = 1.0;
        }
        match spx.run() {
            PhaseEnd::Optimal => {}
            PhaseEnd::Limit | PhaseEnd::Numerical | PhaseEnd::Unbounded => {
                return fail(Status::IterationLimit, spx.iterations);
            }
        }
        let infeas: f64 = (n + m..nt).map(|j| spx.x[j].max(0.0)).sum();
        let scale = 1.0 + model.rows().iter().fold(0.0f64, |s, r| s.max(r.rhs.abs()));
        if infeas > opts.feas_tol * scale {
            return fail(Status::Infeasible, spx.iterations);
        }
        for j in n + m..nt {
            spx.cost[j] = 0.0;
            spx.up[j] = 0.0;
            if spx.state[j] != State::Basic {
                spx.x[j] = 0.0;
                spx.state[j] = State::Lower;
            }
        }
    }

    for (j, v) in model.vars().iter().enumerate() {
        spx.cost[j] = v.objective;
    }
    let status = match spx.run() {
        PhaseEnd::Optimal => Status::Optimal,
        PhaseEnd::Unbounded => Status::Unbounded,
        PhaseEnd::Limit | PhaseEnd::Numerical => Status::IterationLimit,
    };
    if status != Status::Optimal {
        let mut out = fail(status, spx.iterations);
        out.x.copy_from_slice(&spx.x[..n]);
        return out;
    }
    if spx.refactor().is_err() {
        return fail(Status::IterationLimit, spx.iterations);
    }
    let y = spx.duals();
    let reduced = (0..n).map(|j| spx.cost[j] - spx.col_dot(j, &y)).collect();
    LpOutcome {
        status,
        x: spx.x[..n].to_vec(),
        y,
        reduced,
        iterations: spx.iterations,
    }
}

impl Simplex<'_> {
    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else if j < self.n + self.m {
            vec![(j - self.n, -1.0)]
        } else {
            vec![self.art[j - self.n - self.m]]
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * y[i]).sum()
        } else if j < self.n + self.m {
            -y[j - self.n]
        } else {
            let (i, s) = self.art[j - self.n - self.m];
            s * y[i]
        }
    }

    fn duals(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.factor.btran(&cb)
    }

    /// Refactorizes the basis, repairing singular bases with logical columns,
    /// and recomputes the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), ()> {
        for _attempt in 0..3 {
            let columns: Vec<Vec<(usize, f64)>> =
                self.basis.iter().map(|&v| self.column(v)).collect();
            match Factor::new(self.m, &columns) {
                Ok(f) => {
                    self.factor = f;
                    self.recompute_basics();
                    return Ok(());
                }
                Err(sing) => {
                    log::debug!(
                        "singular basis, repairing {} positions",
                        sing.positions.len()
                    );
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let logical = self.n + row;
                        if self.state[logical] == State::Basic {
                            return Err(());
                        }
                        let out = self.basis[pos];
                        self.make_nonbasic_near(out);
                        self.basis[pos] = logical;
                        self.state[logical] = State::Basic;
                    }
                }
            }
        }
        Err(())
    }

    fn make_nonbasic_near(&mut self, v: usize) {
        let (l, u, val) = (self.lo[v], self.up[v], self.x[v]);
        if l.is_finite() && (!u.is_finite() || (val - l).abs() <= (u - val).abs()) {
            self.x[v] = l;
            self.state[v] = State::Lower;
        } else if u.is_finite() {
            self.x[v] = u;
            self.state[v] = State::Upper;
        } else {
            self.x[v] = 0.0;
            self.state[v] = State::Zero;
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        let total = self.n + self.m + self.art.len();
        for j in 0..total {
            if self.state[j] == State::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (i, a) in self.column(j) {
                rhs[i] -= a * xj;
            }
        }
        let xb = self.factor.ftran(&rhs);
        for (pos, &v) in self.basis.iter().enumerate() {
            self.x[v] = xb[pos];
        }
    }

    fn run(&mut self) -> PhaseEnd {
        let total = self.n + self.m + self.art.len();
        let bland_after = 5 * (self.m + total);
        let mut pivots = 0usize;
        loop {
            if self.factor.num_etas() >= REFACTOR_EVERY && self.refactor().is_err() {
                return PhaseEnd::Numerical;
            }
            if self.iterations >= self.max_iterations {
                return PhaseEnd::Limit;
            }
            let bland = pivots >= bland_after;
            let y = self.duals();

            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..total {
                let st = self.state[j];
                if st == State::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let d = self.cost[j] - self.col_dot(j, &y);
                let dir = match st {
                    State::Lower if d < -self.opt_tol => 1.0,
                    State::Upper if d > self.opt_tol => -1.0,
                    State::Zero if d.abs() > self.opt_tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((j, dir)) = entering else {
                return PhaseEnd::Optimal;
            };

            let mut a_j = vec![0.0; self.m];
            for (i, a) in self.column(j) {
                a_j[i] += a;
            }
            let w = self.factor.ftran(&a_j);

            // Harris pass 1: relaxed step bound.
            let flip = self.up[j] - self.lo[j];
            let mut theta = f64::INFINITY;
            for (pos, &wp) in w.iter().enumerate() {
                let a = dir * wp;
                let v = self.basis[pos];
                if a > PIVOT_TOL && self.lo[v].is_finite() {
                    theta = theta.min((self.x[v] - self.lo[v] + HARRIS_TOL) / a);
                } else if a < -PIVOT_TOL && self.up[v].is_finite() {
                    theta = theta.min((self.up[v] - self.x[v] + HARRIS_TOL) / -a);
                }
            }
            if theta.is_infinite() && flip.is_infinite() {
                return PhaseEnd::Unbounded;
            }
            self.iterations += 1;
            pivots += 1;

            if flip <= theta {
                let t = flip;
                self.x[j] += dir * t;
                self.state[j] = if dir > 0.0 {
                    State::Upper
                } else {
                    State::Lower
                };
                for (pos, &wp) in w.iter().enumerate() {
                    if wp != 0.0 {
                        let v = self.basis[pos];
                        self.x[v] -= t * dir * wp;
                    }
                }
                continue;
            }

            // Pass 2: among ratios within the relaxed bound pick the largest pivot.
            let mut leave: Option<(usize, f64, f64)> = None; // (pos, ratio, |a|)
            for (pos, &wp) in w.iter().enumerate() {
                let a = dir * wp;
                let v = self.basis[pos];
                let ratio = if a > PIVOT_TOL && self.lo[v].is_finite() {
                    (self.x[v] - self.lo[v]) / a
                } else if a < -PIVOT_TOL && self.up[v].is_finite() {
                    (self.up[v] - self.x[v]) / -a
                } else {
                    continue;
                };
                if ratio > theta {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((bp, br, ba)) => {
                        if bland {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && v < self.basis[bp])
                        } else {
                            a.abs() > ba
                        }
                    }
                };
                if better {
                    leave = Some((pos, ratio, a.abs()));
                }
            }
            let Some((r, ratio, _)) = leave else {
                return PhaseEnd::Numerical;
            };
            let t = ratio.max(0.0);
            self.x[j] += dir * t;
            for (pos, &wp) in w.iter().enumerate() {
                if wp != 0.0 {
                    let v = self.basis[pos];
                    self.x[v] -= t * dir * wp;
                }
            }
            let out = self.basis[r];
            if dir * w[r] > 0.0 {
                self.x[out] = self.lo[out];
                self.state[out] = State::Lower;
            } else {
                self.x[out] = self.up[out];
                self.state[out] = if self.lo[out] == self.up[out] {
                    State::Lower
                } else {
                    State::Upper
                };
            }
            self.basis[r] = j;
            self.state[j] = State::Basic;
            self.factor.push_eta(r, &w);
        }
    }
}
