//! Sparse linear model with optional binary columns.

use std::fmt::Write as _;

use crate::ModelError;

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// `(column, coefficient)` pairs, column indices unique.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    /// Row activity `a·x` for a full primal vector.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Signed slack: nonnegative when the row holds. Equality rows report
    /// `-|a·x - rhs|`.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => self.rhs - act,
            Sense::Ge => act - self.rhs,
            Sense::Eq => -(act - self.rhs).abs(),
        }
    }
}

/// A minimization model `min c·x + offset` over sparse rows and bounded columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
    objective_offset: f64,
}

impl OptModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a continuous column and returns its index.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            objective,
            binary: false,
        });
        self.vars.len() - 1
    }

    /// Adds a `{0,1}` column.
    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            objective,
            binary: true,
        });
        self.vars.len() - 1
    }

    /// Adds a row. Repeated columns are summed and exact zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (j, a) in coeffs {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(j, _)| j);
        self.rows.push(Row {
            name: name.into(),
            coeffs: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.vars[var].lower = lower;
        self.vars[var].upper = upper;
    }

    pub fn set_objective(&mut self, var: usize, objective: f64) {
        self.vars[var].objective = objective;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_binaries(&self) -> bool {
        self.vars.iter().any(|v| v.binary)
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.binary)
            .map(|(j, _)| j)
    }

    /// Objective value `c·x + offset`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .vars
                .iter()
                .zip(x)
                .map(|(v, &xj)| v.objective * xj)
                .sum::<f64>()
    }

    /// Largest violation of any row or column bound at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| (-r.slack(x)).max(0.0));
        let cols = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xj)| (v.lower - xj).max(xj - v.upper).max(0.0));
        rows.chain(cols).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.objective_offset.is_finite() {
            return Err(ModelError::NonFinite("objective offset".into()));
        }
        for v in &self.vars {
            if !v.objective.is_finite() {
                return Err(ModelError::NonFinite(format!("objective of {}", v.name)));
            }
            if v.lower.is_nan()
                || v.upper.is_nan()
                || v.lower == f64::INFINITY
                || v.upper == f64::NEG_INFINITY
            {
                return Err(ModelError::BadBounds(v.name.clone()));
            }
            if v.binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BadBounds(v.name.clone()));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(ModelError::NonFinite(format!("rhs of {}", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.vars.len() {
                    return Err(ModelError::BadColumn {
                        row: r.name.clone(),
                        column: j,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(format!("coefficient in {}", r.name)));
                }
            }
        }
        Ok(())
    }

    /// CPLEX-LP style text, one row per line, names preserved.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, a: f64, name: &str, first: bool| {
            if first {
                let _ = write!(out, "{a} {name}");
            } else if a < 0.0 {
                let _ = write!(out, " - {} {name}", -a);
            } else {
                let _ = write!(out, " + {a} {name}");
            }
        };
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for v in self.vars.iter().filter(|v| v.objective != 0.0) {
            if first {
                out.push(' ');
            }
            term(&mut out, v.objective, &v.name, first);
            first = false;
        }
        if self.objective_offset != 0.0 {
            let _ = write!(out, " + {}", self.objective_offset);
        } else if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(out, " {}:", r.name);
            if r.coeffs.is_empty() {
                out.push_str(" 0");
            }
            for (i, &(j, a)) in r.coeffs.iter().enumerate() {
                if i == 0 {
                    out.push(' ');
                }
                term(&mut out, a, &self.vars[j].name, i == 0);
            }
            let _ = writeln!(out, " {} {}", r.sense.symbol(), r.rhs);
        }
        out.push_str("Bounds\n");
        for v in self.vars.iter().filter(|v| !v.binary) {
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (false, false) => {
                    let _ = writeln!(out, " {} free", v.name);
                }
                (true, false) => {
                    let _ = writeln!(out, " {} >= {}", v.name, v.lower);
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {} <= {}", v.name, v.upper);
                }
                (true, true) => {
                    let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
                }
            }
        }
        let bins: Vec<&str> = self
            .vars
            .iter()
            .filter(|v| v.binary)
            .map(|v| v.name.as_str())
            .collect();
        if !bins.is_empty() {
            out.push_str("Binary\n");
            for b in bins {
                let _ = writeln!(out, " {b}");
            }
        }
        out.push_str("End\n");
        out
    }
}

/// `(constraint count, variable count)`.
pub fn model_stats(m: &OptModel) -> (usize, usize) {
    (m.num_rows(), m.num_vars())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_empty_and_small_models() {
        assert_eq!(model_stats(&OptModel::new()), (0, 0));
        let mut m = OptModel::new();
        let cols: Vec<usize> = (0..5)
            .map(|j| m.add_var(format!("x{j}"), 0.0, 1.0, 1.0))
            .collect();
        for i in 0..3 {
            m.add_row(
                format!("r{i}"),
                [(cols[i], 1.0), (cols[i + 1], 2.0)],
                Sense::Le,
                1.0,
            );
        }
        assert_eq!(model_stats(&m), (3, 5));
    }

    #[test]
    fn add_row_merges_duplicates_and_drops_zeros() {
        let mut m = OptModel::new();
        let x = m.add_var("x", 0.0, 1.0, 0.0);
        let y = m.add_var("y", 0.0, 1.0, 0.0);
        m.add_row(
            "r",
            [(y, 1.0), (x, 2.0), (x, -2.0), (y, 0.5)],
            Sense::Ge,
            0.0,
        );
        assert_eq!(m.rows()[0].coeffs, vec![(y, 1.5)]);
    }

    #[test]
    fn validate_rejects_bad_column_and_nonfinite() {
        let mut m = OptModel::new();
        m.add_var("x", 0.0, 1.0, 0.0);
        m.add_row("r", [(3, 1.0)], Sense::Le, 1.0);
        assert!(matches!(m.validate(), Err(ModelError::BadColumn { .. })));

        let mut m = OptModel::new();
        let x = m.add_var("x", 0.0, 1.0, f64::NAN);
        m.add_row("r", [(x, 1.0)], Sense::Le, 1.0);
        assert!(matches!(m.validate(), Err(ModelError::NonFinite(_))));
    }

    #[test]
    fn lp_export_keeps_names() {
        let mut m = OptModel::new();
        let x = m.add_var("flow", 0.0, f64::INFINITY, 2.0);
        let b = m.add_binary("build", 100.0);
        m.add_row("cap", [(x, 1.0), (b, -5.0)], Sense::Le, 0.0);
        let text = m.to_lp_format();
        assert!(text.contains("cap: 1 flow - 5 build <= 0"));
        assert!(text.contains("Binary\n build"));
    }
}
