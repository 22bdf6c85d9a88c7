//! Model builders for the deterministic, affinely adjustable and exact
//! adjustable robust path-flow problems.

mod aar;
mod arc;
mod deterministic;
mod policy;
mod robust;

use std::collections::BTreeMap;
use std::fmt;

pub use aar::{aar_uncertain_rows, build_aar_budget, build_aar_var};
pub use arc::{
    build_arc_budget, build_arc_scenarios, build_arc_var, build_pb2pp_budget, build_pb2pp_var,
    check_eta_bounds, default_m_eta,
};
pub use deterministic::{build_pb1, build_pb2, build_recourse, solve_pb1, Pb1Result};
pub use policy::{
    check_recourse_feasibility, evaluate_policy, extract_policy, AffinePolicy, FeasibilityReport,
    PolicyFile, Space,
};
pub use robust::{robustify_budget_row, robustify_var_row, LinExpr, RowGroup, UncertainRow};

use crate::grid::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Pb1,
    Pb2,
    Recourse,
    AarXi,
    AarXip,
    ArcXi,
    ArcXip,
    Pb2ppXi,
    Pb2ppXip,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Pb1 => "pb1",
            Family::Pb2 => "pb2",
            Family::Recourse => "recourse",
            Family::AarXi => "aar-xi",
            Family::AarXip => "aar-xip",
            Family::ArcXi => "arc-xi",
            Family::ArcXip => "arc-xip",
            Family::Pb2ppXi => "pb2pp-xi",
            Family::Pb2ppXip => "pb2pp-xip",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Recourse block of the vertex-expanded robust model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub demand: Vec<f64>,
    pub p: Vec<usize>,
    pub s: Vec<usize>,
}

/// Where each modelling symbol lives in a built [`robopf_milp::OptModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelIndex {
    pub family: Family,
    /// (candidate branch id, column).
    pub x: Vec<(usize, usize)>,
    pub gamma: Option<usize>,
    /// p_g, or the intercept p_g^0 of a decision rule.
    pub p: Vec<usize>,
    /// p_g^h, by generator then load.
    pub p_rule: Vec<Vec<usize>>,
    /// s_p (y_p in PB1), or the intercept s_p^0.
    pub s: Vec<usize>,
    /// s_p^h, by path then load.
    pub s_rule: Vec<Vec<usize>>,
    pub lambda: Vec<usize>,
    pub phi: Vec<usize>,
    /// η_l by branch index.
    pub eta: Vec<usize>,
    /// (candidate branch id, column) of the x·η linearization.
    pub z: Vec<(usize, usize)>,
    pub scenarios: Vec<Scenario>,
    /// Auxiliary robust-counterpart columns keyed by block name.
    pub aux: BTreeMap<String, Vec<usize>>,
    /// Rows keyed by constraint group.
    pub rows: BTreeMap<String, Vec<usize>>,
}

impl ModelIndex {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            x: Vec::new(),
            gamma: None,
            p: Vec::new(),
            p_rule: Vec::new(),
            s: Vec::new(),
            s_rule: Vec::new(),
            lambda: Vec::new(),
            phi: Vec::new(),
            eta: Vec::new(),
            z: Vec::new(),
            scenarios: Vec::new(),
            aux: BTreeMap::new(),
            rows: BTreeMap::new(),
        }
    }

    /// Every column referenced by the index, duplicates included.
    pub fn columns(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.x.iter().map(|&(_, c)| c).collect();
        out.extend(self.gamma);
        out.extend(&self.p);
        out.extend(self.p_rule.iter().flatten());
        out.extend(&self.s);
        out.extend(self.s_rule.iter().flatten());
        out.extend(&self.lambda);
        out.extend(&self.phi);
        out.extend(&self.eta);
        out.extend(self.z.iter().map(|&(_, c)| c));
        for sc in &self.scenarios {
            out.extend(&sc.p);
            out.extend(&sc.s);
        }
        out.extend(self.aux.values().flatten());
        out
    }

    /// Every row referenced by the index, duplicates included.
    pub fn all_rows(&self) -> Vec<usize> {
        self.rows.values().flatten().copied().collect()
    }

    pub(crate) fn push_rows(&mut self, group: &str, rows: impl IntoIterator<Item = usize>) {
        self.rows.entry(group.to_string()).or_default().extend(rows);
    }

    pub(crate) fn push_aux(&mut self, block: &str, cols: impl IntoIterator<Item = usize>) {
        self.aux.entry(block.to_string()).or_default().extend(cols);
    }

    pub fn plan(&self, net: &Network, primal: &[f64]) -> ExpansionPlan {
        let mut plan = ExpansionPlan::none(net);
        for &(id, col) in &self.x {
            plan.build.insert(id, primal[col] > 0.5);
        }
        plan
    }
}

/// First-stage expansion decision: candidate branch id → built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpansionPlan {
    pub build: BTreeMap<usize, bool>,
}

impl ExpansionPlan {
    pub fn none(net: &Network) -> Self {
        Self {
            build: net.candidates().map(|b| (b.id, false)).collect(),
        }
    }

    /// Bit `i` of `mask` builds the `i`-th candidate in id order.
    pub fn from_mask(net: &Network, mask: u64) -> Self {
        Self {
            build: net
                .candidates()
                .enumerate()
                .map(|(i, b)| (b.id, (mask >> i) & 1 == 1))
                .collect(),
        }
    }

    /// All 2^|candidates| plans in mask order.
    pub fn enumerate(net: &Network) -> Vec<Self> {
        (0..1u64 << net.num_candidates())
            .map(|m| Self::from_mask(net, m))
            .collect()
    }

    /// Existing branches are always in service.
    pub fn in_service(&self, net: &Network, branch: usize) -> bool {
        let br = &net.branches[branch - 1];
        !br.candidate || self.build.get(&branch).copied().unwrap_or(false)
    }

    pub fn investment(&self, net: &Network) -> f64 {
        self.build
            .iter()
            .filter(|(_, &b)| b)
            .fold(0.0, |acc, (&id, _)| acc + net.branches[id - 1].cost)
    }

    /// Built candidate ids joined by `+`, or `none`.
    pub fn label(&self) -> String {
        let built: Vec<String> = self
            .build
            .iter()
            .filter(|(_, &b)| b)
            .map(|(id, _)| id.to_string())
            .collect();
        if built.is_empty() {
            "none".into()
        } else {
            built.join("+")
        }
    }

    pub fn parse_label(net: &Network, label: &str) -> Result<Self, crate::Error> {
        let mut plan = Self::none(net);
        if label.trim() == "none" {
            return Ok(plan);
        }
        for part in label.split('+') {
            let id: usize = part
                .trim()
                .parse()
                .map_err(|_| crate::Error::Invalid(format!("bad plan entry `{part}`")))?;
            match plan.build.get_mut(&id) {
                Some(b) => *b = true,
                None => {
                    return Err(crate::Error::Invalid(format!(
                        "branch {id} is not a candidate"
                    )))
                }
            }
        }
        Ok(plan)
    }
}
