//! Run records, their CSV form, and the price-of-robustness table.

use std::fmt;

use robopf_core::paths::Weight;
use robopf_core::Error;
use robopf_milp::Status;

use crate::Instance;

pub const CSV_HEADER: &str =
    "model,kappa,tau,alpha,samples,seed,k,weight,objective,constraints,variables,nodes,time_s,plan,status";

/// One solve, with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub k: usize,
    pub weight: Weight,
    pub objective: f64,
    pub constraints: usize,
    pub variables: usize,
    pub nodes: usize,
    pub time: f64,
    pub plan: String,
    pub status: Status,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>, Error> {
    if s == "-" || s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Invalid(format!("bad CSV field `{s}`")))
}

pub fn parse_status(s: &str) -> Result<Status, Error> {
    Ok(match s {
        "optimal" => Status::Optimal,
        "infeasible" => Status::Infeasible,
        "unbounded" => Status::Unbounded,
        "iteration-limit" => Status::IterationLimit,
        other => return Err(Error::Invalid(format!("unknown status `{other}`"))),
    })
}

impl RunRecord {
    pub fn new(model: &str, inst: &Instance) -> Self {
        Self {
            model: model.to_string(),
            kappa: None,
            tau: None,
            alpha: None,
            samples: None,
            seed: None,
            k: inst.paths.k,
            weight: inst.paths.weight,
            objective: f64::NAN,
            constraints: 0,
            variables: 0,
            nodes: 0,
            time: 0.0,
            plan: "-".into(),
            status: Status::Optimal,
        }
    }

    fn time_text(&self, timing: bool) -> String {
        if timing {
            format!("{:.4}", self.time)
        } else {
            "-".into()
        }
    }

    pub fn line(&self, timing: bool) -> String {
        format!(
            "model={} kappa={} tau={} alpha={} samples={} seed={} k={} weight={} objective={} constraints={} \
             variables={} nodes={} time_s={} plan={} status={}",
            self.model,
            opt(&self.kappa),
            opt(&self.tau),
            opt(&self.alpha),
            opt(&self.samples),
            opt(&self.seed),
            self.k,
            self.weight,
            format_objective(self.objective),
            self.constraints,
            self.variables,
            self.nodes,
            self.time_text(timing),
            self.plan,
            self.status
        )
    }

    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            opt(&self.kappa),
            opt(&self.tau),
            opt(&self.alpha),
            opt(&self.samples),
            opt(&self.seed),
            self.k,
            self.weight,
            self.objective,
            self.constraints,
            self.variables,
            self.nodes,
            self.time_text(timing),
            self.plan,
            self.status
        )
    }

    pub fn parse_csv_row(row: &str) -> Result<Self, Error> {
        let f: Vec<&str> = row.trim().split(',').collect();
        if f.len() != 15 {
            return Err(Error::Invalid(format!(
                "expected 15 CSV fields, got {}",
                f.len()
            )));
        }
        let num = |s: &str| -> Result<usize, Error> {
            s.parse()
                .map_err(|_| Error::Invalid(format!("bad count `{s}`")))
        };
        Ok(Self {
            model: f[0].to_string(),
            kappa: parse_opt(f[1])?,
            tau: parse_opt(f[2])?,
            alpha: parse_opt(f[3])?,
            samples: parse_opt(f[4])?,
            seed: parse_opt(f[5])?,
            k: num(f[6])?,
            weight: f[7].parse().map_err(Error::Invalid)?,
            objective: f[8]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad objective `{}`", f[8])))?,
            constraints: num(f[9])?,
            variables: num(f[10])?,
            nodes: num(f[11])?,
            time: parse_opt(f[12])?.unwrap_or(0.0),
            plan: f[13].to_string(),
            status: parse_status(f[14])?,
        })
    }
}

/// Parses every data row of a run-record CSV.
pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>, Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && l.trim() != CSV_HEADER)
        .map(RunRecord::parse_csv_row)
        .collect()
}

fn format_objective(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub label: String,
    pub record: RunRecord,
    /// Published objective for the same setting, printed for orientation.
    pub reference: Option<f64>,
}

/// Columns run from most to least protective, PB2 last.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub title: String,
    pub columns: Vec<Column>,
}

impl Block {
    /// Objectives nondecreasing from the last column to the first, within
    /// 1e-6 relative.
    pub fn monotone(&self) -> bool {
        self.columns.windows(2).all(|w| {
            let (more, less) = (&w[0].record, &w[1].record);
            more.status == Status::Optimal
                && less.status == Status::Optimal
                && more.objective >= less.objective - 1e-6 * (1.0 + less.objective.abs())
        })
    }

    pub fn render(&self, timing: bool) -> String {
        let width = self
            .columns
            .iter()
            .map(|c| c.label.len())
            .max()
            .unwrap_or(0)
            .max(12)
            + 2;
        let head = 16.max(self.title.len() + 2);
        let mut out = format!("{:<head$}", self.title);
        for c in &self.columns {
            out.push_str(&format!("{:>width$}", c.label));
        }
        out.push('\n');
        let mut row = |name: &str, cell: &dyn Fn(&Column) -> String| {
            out.push_str(&format!("{name:<head$}"));
            for c in &self.columns {
                out.push_str(&format!("{:>width$}", cell(c)));
            }
            out.push('\n');
        };
        row("Obj", &|c| {
            if c.record.status == Status::Optimal {
                format!("{:.2}", c.record.objective)
            } else {
                c.record.status.to_string()
            }
        });
        row("Cons", &|c| c.record.constraints.to_string());
        row("Vars", &|c| c.record.variables.to_string());
        row("Nodes", &|c| c.record.nodes.to_string());
        row("Time(s.)", &|c| {
            if timing {
                format!("{:.3}", c.record.time)
            } else {
                "-".into()
            }
        });
        row("Ref.Obj", &|c| {
            c.reference.map_or("-".into(), |r| format!("{r:.0}"))
        });
        if !self.monotone() {
            out.push_str(&format!(
                "{:<head$}objectives are not nondecreasing toward full protection\n",
                "WARNING"
            ));
        }
        out
    }
}
