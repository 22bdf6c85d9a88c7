//! Affine decision rules read back from a solved model, and PB2 row checks
//! for any recourse (p, s).

use std::fmt::Write as _;

use robopf_milp::Solution;

use super::{ExpansionPlan, Family, ModelIndex};
use crate::grid::Network;
use crate::paths::PathSet;
use crate::Error;

/// What the rule coefficients multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// The budget-set perturbation ξ.
    Xi,
    /// Realized demand d.
    Demand,
}

impl Space {
    pub fn tag(self) -> &'static str {
        match self {
            Space::Xi => "xi",
            Space::Demand => "demand",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinePolicy {
    pub p0: Vec<f64>,
    /// |G| × |K|.
    pub p: Vec<Vec<f64>>,
    pub s0: Vec<f64>,
    /// |paths| × |K|.
    pub s: Vec<Vec<f64>>,
    pub space: Space,
}

pub fn extract_policy(sol: &Solution, idx: &ModelIndex) -> Result<AffinePolicy, Error> {
    if !sol.is_optimal() {
        return Err(Error::Solve(sol.status));
    }
    let space = match idx.family {
        Family::AarXi => Space::Xi,
        Family::AarXip => Space::Demand,
        other => {
            return Err(Error::Invalid(format!(
                "{other} models carry no decision rule"
            )))
        }
    };
    let read = |cols: &[usize]| cols.iter().map(|&c| sol.primal[c]).collect::<Vec<f64>>();
    Ok(AffinePolicy {
        p0: read(&idx.p),
        p: idx.p_rule.iter().map(|r| read(r)).collect(),
        s0: read(&idx.s),
        s: idx.s_rule.iter().map(|r| read(r)).collect(),
        space,
    })
}

/// `(p, s)` at realization `r`, given in the policy's own space.
pub fn evaluate_policy(pol: &AffinePolicy, r: &[f64]) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let k = pol.p.first().or(pol.s.first()).map_or(r.len(), Vec::len);
    if r.len() != k {
        return Err(Error::Dimension(format!(
            "realization has {} entries, policy expects {k}",
            r.len()
        )));
    }
    let apply = |base: &[f64], rule: &[Vec<f64>]| -> Vec<f64> {
        base.iter()
            .zip(rule)
            .map(|(b, row)| b + row.iter().zip(r).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    };
    Ok((apply(&pol.p0, &pol.p), apply(&pol.s0, &pol.s)))
}

/// Signed slacks of the PB2 rows; negative entries are violations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub demand: Vec<f64>,
    pub generation: Vec<f64>,
    pub thermal: Vec<f64>,
    pub p_nonneg: Vec<f64>,
    pub s_nonneg: Vec<f64>,
}

impl FeasibilityReport {
    pub fn min_slack(&self) -> f64 {
        [
            &self.demand,
            &self.generation,
            &self.thermal,
            &self.p_nonneg,
            &self.s_nonneg,
        ]
        .iter()
        .flat_map(|v| v.iter())
        .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn max_violation(&self) -> f64 {
        (-self.min_slack()).max(0.0)
    }

    pub fn feasible(&self) -> bool {
        self.min_slack() >= -1e-6
    }
}

pub fn check_recourse_feasibility(
    net: &Network,
    ps: &PathSet,
    plan: &ExpansionPlan,
    d: &[f64],
    p: &[f64],
    s: &[f64],
) -> Result<FeasibilityReport, Error> {
    if d.len() != ps.loads.len() || p.len() != net.generators.len() || s.len() != ps.len() {
        return Err(Error::Dimension(format!(
            "got {} demands, {} generators, {} paths; instance has {}, {}, {}",
            d.len(),
            p.len(),
            s.len(),
            ps.loads.len(),
            net.generators.len(),
            ps.len()
        )));
    }
    let sum = |ids: &[usize]| ids.iter().map(|&i| s[i]).sum::<f64>();
    Ok(FeasibilityReport {
        demand: ps
            .per_load
            .iter()
            .zip(d)
            .map(|(ids, dk)| sum(ids) - dk)
            .collect(),
        generation: ps
            .per_gen
            .iter()
            .zip(p)
            .map(|(ids, pg)| pg - sum(ids))
            .collect(),
        thermal: net
            .branches
            .iter()
            .map(|br| {
                let cap = if plan.in_service(net, br.id) {
                    br.thermal_rhs()
                } else {
                    0.0
                };
                cap - sum(&ps.incidence[br.id - 1])
            })
            .collect(),
        p_nonneg: p.to_vec(),
        s_nonneg: s.to_vec(),
    })
}

/// A solved decision rule with the plan it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyFile {
    pub model: String,
    /// Set parameters as `key=value` words, e.g. `kappa=3 tau=1`.
    pub params: String,
    pub plan: String,
    pub objective: f64,
    pub loads: Vec<usize>,
    pub policy: AffinePolicy,
}

fn row_text(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

impl PolicyFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model = {}", self.model);
        let _ = writeln!(out, "space = {}", self.policy.space.tag());
        let _ = writeln!(out, "params = {}", self.params);
        let _ = writeln!(out, "plan = {}", self.plan);
        let _ = writeln!(out, "objective = {}", self.objective);
        let loads: Vec<String> = self.loads.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "loads = {}", loads.join(" "));
        let _ = writeln!(out, "\n[p0]\n{}", row_text(&self.policy.p0));
        out.push_str("\n[P]\n");
        for r in &self.policy.p {
            let _ = writeln!(out, "{}", row_text(r));
        }
        let _ = writeln!(out, "\n[s0]\n{}", row_text(&self.policy.s0));
        out.push_str("\n[S]\n");
        for r in &self.policy.s {
            let _ = writeln!(out, "{}", row_text(r));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let (mut model, mut plan, mut objective, mut loads, mut space) =
            (None, None, None, None, None);
        let mut params = String::new();
        let mut section = String::new();
        let mut mats: [Vec<Vec<f64>>; 4] = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.to_string();
                continue;
            }
            if section.is_empty() {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| bad(i + 1, "expected `key = value`"))?;
                let value = value.trim();
                match key.trim() {
                    "model" => model = Some(value.to_string()),
                    "plan" => plan = Some(value.to_string()),
                    "params" => params = value.to_string(),
                    "objective" => {
                        objective = Some(
                            value
                                .parse::<f64>()
                                .map_err(|_| bad(i + 1, "bad objective"))?,
                        )
                    }
                    "space" => {
                        space = Some(match value {
                            "xi" => Space::Xi,
                            "demand" => Space::Demand,
                            _ => return Err(bad(i + 1, "space must be xi or demand")),
                        })
                    }
                    "loads" => {
                        loads = Some(
                            value
                                .split_whitespace()
                                .map(str::parse::<usize>)
                                .collect::<Result<Vec<_>, _>>()
                                .map_err(|_| bad(i + 1, "bad load list"))?,
                        )
                    }
                    other => return Err(bad(i + 1, &format!("unknown key `{other}`"))),
                }
                continue;
            }
            let slot = match section.as_str() {
                "p0" => 0,
                "P" => 1,
                "s0" => 2,
                "S" => 3,
                other => return Err(bad(i + 1, &format!("unknown section [{other}]"))),
            };
            let row = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad(i + 1, "bad number"))?;
            mats[slot].push(row);
        }
        let missing = |what: &str| Error::Invalid(format!("policy file lacks `{what}`"));
        let [p0, p, s0, s] = mats;
        let single = |m: Vec<Vec<f64>>, what: &str| -> Result<Vec<f64>, Error> {
            match m.len() {
                0 => Ok(Vec::new()),
                1 => Ok(m.into_iter().next().unwrap()),
                _ => Err(Error::Invalid(format!("[{what}] must be a single row"))),
            }
        };
        let policy = AffinePolicy {
            p0: single(p0, "p0")?,
            p,
            s0: single(s0, "s0")?,
            s,
            space: space.ok_or_else(|| missing("space"))?,
        };
        if policy.p.len() != policy.p0.len() || policy.s.len() != policy.s0.len() {
            return Err(Error::Dimension(
                "rule matrices do not match intercepts".into(),
            ));
        }
        Ok(Self {
            model: model.ok_or_else(|| missing("model"))?,
            params,
            plan: plan.ok_or_else(|| missing("plan"))?,
            objective: objective.ok_or_else(|| missing("objective"))?,
            loads: loads.ok_or_else(|| missing("loads"))?,
            policy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_text_round_trip() {
        let file = PolicyFile {
            model: "aar-xi".into(),
            params: "kappa=3 tau=1".into(),
            plan: "10+12".into(),
            objective: 1234.5,
            loads: vec![1, 2],
            policy: AffinePolicy {
                p0: vec![1.0, 0.1 + 0.2],
                p: vec![vec![1.0, -2.0], vec![0.0, 1e-17]],
                s0: vec![3.0],
                s: vec![vec![4.0, 5.5]],
                space: Space::Xi,
            },
        };
        assert_eq!(PolicyFile::parse(&file.to_text()).unwrap(), file);
    }

    #[test]
    fn evaluation_is_affine() {
        let pol = AffinePolicy {
            p0: vec![1.0],
            p: vec![vec![2.0, -1.0]],
            s0: vec![0.5],
            s: vec![vec![1.0, 1.0]],
            space: Space::Xi,
        };
        assert_eq!(
            evaluate_policy(&pol, &[0.0, 0.0]).unwrap(),
            (vec![1.0], vec![0.5])
        );
        let (a, b) = ([0.2, -0.4], [1.0, 0.6]);
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let (pa, sa) = evaluate_policy(&pol, &a).unwrap();
        let (pb, sb) = evaluate_policy(&pol, &b).unwrap();
        let (pm, sm) = evaluate_policy(&pol, &mid).unwrap();
        assert!((pm[0] - (pa[0] + pb[0]) / 2.0).abs() < 1e-15);
        assert!((sm[0] - (sa[0] + sb[0]) / 2.0).abs() < 1e-15);
        assert!(evaluate_policy(&pol, &[1.0]).is_err());
    }
}
