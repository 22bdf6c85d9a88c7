//! Robust counterparts of single rows that are affine in the uncertainty.

use robopf_milp::{OptModel, Sense};

/// `Σ coeff·column + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn add(&mut self, col: usize, coeff: f64) {
        self.terms.push((col, coeff));
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }

    fn scaled_into(&self, factor: f64, out: &mut Vec<(usize, f64)>) -> f64 {
        out.extend(self.terms.iter().map(|&(j, a)| (j, a * factor)));
        self.constant * factor
    }
}

/// `nominal + Σ_h r_h·coeffs[h] ≤ 0` for an uncertain vector r.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainRow {
    pub name: String,
    pub nominal: LinExpr,
    pub coeffs: Vec<LinExpr>,
}

impl UncertainRow {
    /// Left-hand side at decision values `x` and realization `r`.
    pub fn eval(&self, x: &[f64], r: &[f64]) -> f64 {
        self.nominal.eval(x)
            + self
                .coeffs
                .iter()
                .zip(r)
                .map(|(c, rh)| rh * c.eval(x))
                .sum::<f64>()
    }
}

/// Rows and columns emitted for one robustified row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowGroup {
    pub main: usize,
    pub aux_rows: Vec<usize>,
    /// Scalar multiplier column first, then one column per coordinate or sample.
    pub aux_cols: Vec<usize>,
}

/// Counterpart over {‖ξ‖₁ ≤ κ, ‖ξ‖∞ ≤ τ}:
/// `nominal + κt + τΣw_h ≤ 0`, `w_h + t ≥ ±a_h`, `w, t ≥ 0`.
pub fn robustify_budget_row(
    m: &mut OptModel,
    row: &UncertainRow,
    kappa: f64,
    tau: f64,
) -> RowGroup {
    let t = m.add_var(format!("{}:t", row.name), 0.0, f64::INFINITY, 0.0);
    let w: Vec<usize> = (0..row.coeffs.len())
        .map(|h| m.add_var(format!("{}:w{}", row.name, h + 1), 0.0, f64::INFINITY, 0.0))
        .collect();

    let mut main = row.nominal.terms.clone();
    main.push((t, kappa));
    main.extend(w.iter().map(|&c| (c, tau)));
    let main = m.add_row(row.name.clone(), main, Sense::Le, -row.nominal.constant);

    let mut aux_rows = Vec::with_capacity(2 * w.len());
    for (h, a) in row.coeffs.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![(w[h], 1.0), (t, 1.0)];
            let c = a.scaled_into(-sign, &mut coeffs);
            let tag = if sign > 0.0 { "+" } else { "-" };
            aux_rows.push(m.add_row(
                format!("{}:aux{}{}", row.name, tag, h + 1),
                coeffs,
                Sense::Ge,
                -c,
            ));
        }
    }
    let mut aux_cols = vec![t];
    aux_cols.extend(w);
    RowGroup {
        main,
        aux_rows,
        aux_cols,
    }
}

/// Counterpart over convex combinations of `samples` with weights capped at
/// 1/(N(1−α)): `nominal + t + cap·Σw_i ≤ 0`, `t + w_i ≥ Σ_h d_h^i·a_h`,
/// `w ≥ 0`, t free.
pub fn robustify_var_row(
    m: &mut OptModel,
    row: &UncertainRow,
    samples: &[Vec<f64>],
    alpha: f64,
) -> RowGroup {
    let cap = 1.0 / (samples.len() as f64 * (1.0 - alpha));
    let t = m.add_var(
        format!("{}:t", row.name),
        f64::NEG_INFINITY,
        f64::INFINITY,
        0.0,
    );
    let w: Vec<usize> = (0..samples.len())
        .map(|i| m.add_var(format!("{}:w{}", row.name, i + 1), 0.0, f64::INFINITY, 0.0))
        .collect();

    let mut main = row.nominal.terms.clone();
    main.push((t, 1.0));
    main.extend(w.iter().map(|&c| (c, cap)));
    let main = m.add_row(row.name.clone(), main, Sense::Le, -row.nominal.constant);

    let mut aux_rows = Vec::with_capacity(samples.len());
    for (i, d) in samples.iter().enumerate() {
        let mut coeffs = vec![(t, 1.0), (w[i], 1.0)];
        let mut rhs = 0.0;
        for (a, &dh) in row.coeffs.iter().zip(d) {
            rhs += a.scaled_into(-dh, &mut coeffs);
        }
        aux_rows.push(m.add_row(
            format!("{}:aux{}", row.name, i + 1),
            coeffs,
            Sense::Ge,
            -rhs,
        ));
    }
    let mut aux_cols = vec![t];
    aux_cols.extend(w);
    RowGroup {
        main,
        aux_rows,
        aux_cols,
    }
}
