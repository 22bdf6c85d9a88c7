//! Instance loading, single runs, sweeps and policy evaluation shared by the
//! `robopf` binary and its tests.

pub mod report;

use std::time::Instant;

use robopf_core::formulations::{
    build_aar_budget, build_aar_var, build_arc_budget, build_arc_var, build_pb2,
    build_pb2pp_budget, build_pb2pp_var, check_recourse_feasibility, default_m_eta,
    evaluate_policy, extract_policy, solve_pb1, ExpansionPlan, Family, ModelIndex, PolicyFile,
    Space,
};
use robopf_core::grid::{
    draw_var_samples, parse_case, parse_uncertainty, Network, SplitMix64, UncertaintyBudget,
    UncertaintySet, UncertaintySpec, UncertaintyVaR,
};
use robopf_core::oracle::{brute_force_arc, set_vertices, BruteForce};
use robopf_core::paths::{build_path_sets, PathSet, Weight};
use robopf_core::Error;
use robopf_milp::{model_stats, solve_milp, OptModel, Solution, SolverOptions};

pub use report::{Block, Column, RunRecord};

/// Command-line overrides; `None` falls back to the sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub k: usize,
    pub weight: Weight,
    pub m_eta: Option<f64>,
    pub r_global: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            kappa: None,
            tau: None,
            alpha: None,
            samples: None,
            seed: None,
            k: 2,
            weight: Weight::Resistance,
            m_eta: None,
            r_global: 1.0,
        }
    }
}

impl Params {
    /// Fills unset set parameters from `key=value` words such as
    /// `kappa=3 tau=1`.
    pub fn fill_from_words(&mut self, words: &str) -> Result<(), Error> {
        for word in words.split_whitespace() {
            let (key, value) = word
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad parameter `{word}`")))?;
            let bad = || Error::Invalid(format!("bad value in `{word}`"));
            match key {
                "kappa" => self.kappa = self.kappa.or(Some(value.parse().map_err(|_| bad())?)),
                "tau" => self.tau = self.tau.or(Some(value.parse().map_err(|_| bad())?)),
                "alpha" => self.alpha = self.alpha.or(Some(value.parse().map_err(|_| bad())?)),
                "samples" => {
                    self.samples = self.samples.or(Some(value.parse().map_err(|_| bad())?))
                }
                "seed" => self.seed = self.seed.or(Some(value.parse().map_err(|_| bad())?)),
                _ => return Err(Error::Invalid(format!("unknown parameter `{key}`"))),
            }
        }
        Ok(())
    }
}

/// A parsed network with its path sets and resolved uncertainty sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub net: Network,
    pub spec: UncertaintySpec,
    pub paths: PathSet,
    pub budget: Option<UncertaintyBudget>,
    pub var: Option<UncertaintyVaR>,
    pub params: Params,
}

impl Instance {
    pub fn load(case: &str, unc: &str, params: Params) -> Result<Self, Error> {
        let (net, spec) = parse_uncertainty(unc, &parse_case(case)?)?;
        net.validate()?;
        let paths = build_path_sets(&net, params.k, params.weight)?;
        let mut inst = Self {
            net,
            spec,
            paths,
            budget: None,
            var: None,
            params,
        };
        inst.resolve_sets()?;
        Ok(inst)
    }

    fn resolve_sets(&mut self) -> Result<(), Error> {
        let p = &self.params;
        let loads = self.paths.loads.len();
        self.budget = if p.kappa.is_some() || p.tau.is_some() || self.spec.budget.is_some() {
            let tau = p
                .tau
                .or(self.spec.budget.as_ref().map(|b| b.tau))
                .unwrap_or(1.0);
            let kappa = p
                .kappa
                .or(self.spec.budget.as_ref().map(|b| b.kappa))
                .unwrap_or(tau * loads as f64);
            Some(UncertaintyBudget::new(
                self.spec.dispersion.clone(),
                kappa,
                tau,
            )?)
        } else {
            None
        };
        self.var = if p.alpha.is_some()
            || p.samples.is_some()
            || p.seed.is_some()
            || self.spec.var.is_some()
        {
            let n = p
                .samples
                .or(self.spec.var.as_ref().map(|v| v.n()))
                .unwrap_or(10);
            let alpha = p
                .alpha
                .or(self.spec.var.as_ref().map(|v| v.alpha))
                .unwrap_or(0.0);
            let seed = p.seed.unwrap_or(self.spec.seed);
            let samples =
                draw_var_samples(&self.spec.dispersion, &self.net.nominal_demand(), n, seed)?;
            Some(UncertaintyVaR::new(samples, alpha)?)
        } else {
            None
        };
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.params.seed.unwrap_or(self.spec.seed)
    }

    pub fn budget(&self) -> Result<&UncertaintyBudget, Error> {
        self.budget.as_ref().ok_or(Error::MissingSet("budget"))
    }

    pub fn var(&self) -> Result<&UncertaintyVaR, Error> {
        self.var.as_ref().ok_or(Error::MissingSet("var"))
    }

    pub fn set(&self, space: Space) -> Result<UncertaintySet, Error> {
        Ok(match space {
            Space::Xi => UncertaintySet::Budget(self.budget()?.clone()),
            Space::Demand => UncertaintySet::VaR(self.var()?.clone()),
        })
    }

    /// Same instance with κ replaced (τ kept).
    pub fn with_kappa(&self, kappa: f64) -> Result<Self, Error> {
        let mut out = self.clone();
        out.params.kappa = Some(kappa);
        out.params.tau = Some(
            self.budget
                .as_ref()
                .map_or(self.params.tau.unwrap_or(1.0), |b| b.tau),
        );
        out.resolve_sets()?;
        Ok(out)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, Error> {
        let mut out = self.clone();
        out.params.alpha = Some(alpha);
        out.resolve_sets()?;
        Ok(out)
    }

    pub fn m_eta(&self) -> f64 {
        self.params
            .m_eta
            .unwrap_or_else(|| default_m_eta(&self.net))
    }

    /// Set parameters of `family` as `key=value` words.
    pub fn set_words(&self, family: Family) -> String {
        match set_space(family) {
            Some(Space::Xi) => self.budget.as_ref().map_or(String::new(), |b| {
                format!("kappa={} tau={}", b.kappa, b.tau)
            }),
            Some(Space::Demand) => self.var.as_ref().map_or(String::new(), |v| {
                format!("alpha={} samples={} seed={}", v.alpha, v.n(), self.seed())
            }),
            None => String::new(),
        }
    }
}

/// The uncertainty set a model family protects against.
pub fn set_space(family: Family) -> Option<Space> {
    match family {
        Family::AarXi | Family::ArcXi | Family::Pb2ppXi => Some(Space::Xi),
        Family::AarXip | Family::ArcXip | Family::Pb2ppXip => Some(Space::Demand),
        Family::Pb1 | Family::Pb2 | Family::Recourse => None,
    }
}

pub fn parse_family(tag: &str) -> Result<Family, Error> {
    Ok(match tag {
        "pb1" => Family::Pb1,
        "pb2" => Family::Pb2,
        "aar-xi" => Family::AarXi,
        "aar-xip" => Family::AarXip,
        "arc-xi" => Family::ArcXi,
        "arc-xip" => Family::ArcXip,
        "pb2pp-xi" => Family::Pb2ppXi,
        "pb2pp-xip" => Family::Pb2ppXip,
        other => {
            return Err(Error::Invalid(format!(
                "unknown model `{other}` (pb1, pb2, aar-xi, aar-xip, arc-xi, arc-xip, pb2pp-xi, pb2pp-xip)"
            )))
        }
    })
}

/// Solver options; `ROBOPF_TOL` sets the feasibility tolerance and
/// `ROBOPF_MAX_ITER` caps simplex pivots per LP.
pub fn solver_options() -> Result<SolverOptions, Error> {
    let mut opts = SolverOptions::default();
    if let Ok(v) = std::env::var("ROBOPF_TOL") {
        let tol: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("ROBOPF_TOL `{v}` is not a number")))?;
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Invalid(format!(
                "ROBOPF_TOL must be positive, got {tol}"
            )));
        }
        opts.feas_tol = tol;
    }
    if let Ok(v) = std::env::var("ROBOPF_MAX_ITER") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("ROBOPF_MAX_ITER `{v}` is not a count")))?;
        opts.max_iterations = Some(n);
    }
    Ok(opts)
}

/// A finished solve with everything needed to inspect it.
#[derive(Debug, Clone)]
pub struct Run {
    pub record: RunRecord,
    pub model: OptModel,
    pub index: ModelIndex,
    pub solution: Solution,
}

pub fn build_model(inst: &Instance, family: Family) -> Result<(OptModel, ModelIndex), Error> {
    let (net, ps) = (&inst.net, &inst.paths);
    match family {
        Family::Pb2 => build_pb2(net, ps, &net.nominal_demand()),
        Family::AarXi => build_aar_budget(net, ps, inst.budget()?),
        Family::AarXip => build_aar_var(net, ps, inst.var()?),
        Family::ArcXi => build_arc_budget(net, ps, inst.budget()?),
        Family::ArcXip => build_arc_var(net, ps, inst.var()?),
        Family::Pb2ppXi => build_pb2pp_budget(net, ps, inst.budget()?, None, inst.m_eta()),
        Family::Pb2ppXip => build_pb2pp_var(net, ps, inst.var()?, None, inst.m_eta()),
        Family::Pb1 | Family::Recourse => Err(Error::Invalid(format!(
            "{family} is not built by build_model"
        ))),
    }
}

pub fn run_model(inst: &Instance, family: Family, opts: &SolverOptions) -> Result<Run, Error> {
    let start = Instant::now();
    let (model, index, solution) = match family {
        Family::Pb1 => {
            let r = solve_pb1(&inst.net, &inst.paths, inst.params.r_global, opts)?;
            (r.model, r.index, r.solution)
        }
        _ => {
            let (m, idx) = build_model(inst, family)?;
            let sol = solve_milp(&m, opts)?;
            (m, idx, sol)
        }
    };
    let time = start.elapsed().as_secs_f64();
    let (constraints, variables) = model_stats(&model);
    let plan = if solution.is_optimal() {
        index.plan(&inst.net, &solution.primal).label()
    } else {
        "-".into()
    };
    let mut record = RunRecord::new(family.tag(), inst);
    match set_space(family) {
        Some(Space::Xi) => {
            let b = inst.budget()?;
            record.kappa = Some(b.kappa);
            record.tau = Some(b.tau);
        }
        Some(Space::Demand) => {
            let v = inst.var()?;
            record.alpha = Some(v.alpha);
            record.samples = Some(v.n());
            record.seed = Some(inst.seed());
        }
        None => {}
    }
    record.objective = solution.objective;
    record.constraints = constraints;
    record.variables = variables;
    record.nodes = solution.nodes;
    record.time = time;
    record.plan = plan;
    record.status = solution.status;
    Ok(Run {
        record,
        model,
        index,
        solution,
    })
}

/// Decision rule of a solved AAR run, ready to save.
pub fn extract(inst: &Instance, run: &Run) -> Result<PolicyFile, Error> {
    Ok(PolicyFile {
        model: run.index.family.tag().to_string(),
        params: inst.set_words(run.index.family),
        plan: run.record.plan.clone(),
        objective: run.solution.objective,
        loads: inst.paths.loads.clone(),
        policy: extract_policy(&run.solution, &run.index)?,
    })
}

/// Price-of-robustness table: per set, a full-protection column, the
/// requested parameters from most to least protective, then PB2.
pub fn compare(
    inst: &Instance,
    kappas: &[f64],
    alphas: &[f64],
    exact: bool,
    opts: &SolverOptions,
) -> Result<Vec<Block>, Error> {
    let pb2 = run_model(inst, Family::Pb2, opts)?;
    let pb2_col = Column {
        label: "PB2".into(),
        record: pb2.record.clone(),
        reference: Some(1160.0),
    };
    let mut blocks = Vec::new();
    let loads = inst.paths.loads.len() as f64;

    if !kappas.is_empty() {
        let tau = inst
            .budget
            .as_ref()
            .map_or(inst.params.tau.unwrap_or(1.0), |b| b.tau);
        let full = tau * loads;
        let family = if exact { Family::ArcXi } else { Family::AarXi };
        let mut columns = vec![Column {
            label: "Full protection".into(),
            record: run_model(&inst.with_kappa(full)?, family, opts)?.record,
            reference: (tau == 1.0 && loads == 5.0).then_some(1312.0),
        }];
        for kappa in descending_below(kappas, full) {
            let reference = match kappa {
                k if k == 3.0 && tau == 1.0 => Some(1288.0),
                k if k == 2.0 && tau == 1.0 => Some(1256.0),
                _ => None,
            };
            let record = run_model(&inst.with_kappa(kappa)?, family, opts)?.record;
            columns.push(Column {
                label: format!("kappa={kappa}"),
                record,
                reference,
            });
        }
        columns.push(pb2_col.clone());
        blocks.push(Block {
            title: family_title(family).into(),
            columns,
        });
    }

    if !alphas.is_empty() {
        let n = inst
            .var
            .as_ref()
            .map_or(inst.params.samples.unwrap_or(10), |v| v.n()) as f64;
        let full = (n - 1.0) / n;
        let family = if exact {
            Family::ArcXip
        } else {
            Family::AarXip
        };
        let mut columns = vec![Column {
            label: "Full protection".into(),
            record: run_model(&inst.with_alpha(full)?, family, opts)?.record,
            reference: Some(1332.0),
        }];
        for alpha in descending_below(alphas, full) {
            let reference = match alpha {
                a if a == 0.5 => Some(1268.0),
                a if a == 0.0 => Some(1217.0),
                _ => None,
            };
            let record = run_model(&inst.with_alpha(alpha)?, family, opts)?.record;
            columns.push(Column {
                label: format!("alpha={alpha}"),
                record,
                reference,
            });
        }
        columns.push(pb2_col.clone());
        blocks.push(Block {
            title: family_title(family).into(),
            columns,
        });
    }

    if blocks.is_empty() {
        blocks.push(Block {
            title: "PB2".into(),
            columns: vec![pb2_col],
        });
    }
    Ok(blocks)
}

fn family_title(family: Family) -> &'static str {
    match family {
        Family::AarXi => "PB2-AAR-Xi",
        Family::AarXip => "PB2-AAR-Xi'",
        Family::ArcXi => "PB2-ARC-Xi",
        Family::ArcXip => "PB2-ARC-Xi'",
        _ => "PB2",
    }
}

/// Distinct values strictly below `full`, largest first.
fn descending_below(values: &[f64], full: f64) -> Vec<f64> {
    let mut out: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&v| v < full - 1e-9)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup();
    out
}

/// Policy performance over the vertices of its set and seeded interior
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub vertices: usize,
    pub interior: usize,
    pub max_violation: f64,
    /// Realization (in the policy's space) with the largest violation.
    pub worst_point: Vec<f64>,
    pub mean_cost: f64,
    pub max_cost: f64,
    pub objective: f64,
    /// Policy objective minus the exact robust objective, when given.
    pub arc_gap: Option<f64>,
}

/// Random convex combinations of `vertices` with Dirichlet(1) weights.
pub fn interior_points(vertices: &[Vec<f64>], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    let scale = 2f64.powi(64);
    let dim = vertices.first().map_or(0, Vec::len);
    (0..count)
        .map(|_| {
            let w: Vec<f64> = vertices
                .iter()
                .map(|_| -((rng.next_u64() as f64 + 0.5) / scale).ln())
                .collect();
            let total: f64 = w.iter().sum();
            let mut p = vec![0.0; dim];
            for (wi, v) in w.iter().zip(vertices) {
                for (pj, vj) in p.iter_mut().zip(v) {
                    *pj += wi / total * vj;
                }
            }
            p
        })
        .collect()
}

pub fn evaluate(
    inst: &Instance,
    file: &PolicyFile,
    points: usize,
    arc_objective: Option<f64>,
) -> Result<EvalReport, Error> {
    let pol = &file.policy;
    if file.loads != inst.paths.loads
        || pol.p0.len() != inst.net.generators.len()
        || pol.s0.len() != inst.paths.len()
    {
        return Err(Error::Dimension(format!(
            "policy has {} loads, {} generators, {} paths; instance has {}, {}, {}",
            file.loads.len(),
            pol.p0.len(),
            pol.s0.len(),
            inst.paths.loads.len(),
            inst.net.generators.len(),
            inst.paths.len()
        )));
    }
    let plan = ExpansionPlan::parse_label(&inst.net, &file.plan)?;
    let set = inst.set(pol.space)?;
    let vertices = set_vertices(&inst.net, &set)?;
    let points_in_space: Vec<Vec<f64>> = vertices.iter().map(|(v, _)| v.clone()).collect();
    let interior = interior_points(&points_in_space, points, inst.seed());
    let nominal = inst.net.nominal_demand();
    let to_demand = |r: &[f64]| -> Vec<f64> {
        match &set {
            UncertaintySet::Budget(b) => b.demand_at(&nominal, r),
            UncertaintySet::VaR(_) => r.to_vec(),
        }
    };

    let mut max_violation: f64 = 0.0;
    let mut worst_point = points_in_space.first().cloned().unwrap_or_default();
    let (mut total, mut max_cost, mut count) = (0.0, f64::NEG_INFINITY, 0usize);
    for r in points_in_space.iter().chain(&interior) {
        let (p, s) = evaluate_policy(pol, r)?;
        let rep = check_recourse_feasibility(&inst.net, &inst.paths, &plan, &to_demand(r), &p, &s)?;
        if rep.max_violation() > max_violation {
            max_violation = rep.max_violation();
            worst_point = r.clone();
        }
        let cost: f64 = inst
            .net
            .generators
            .iter()
            .zip(&p)
            .map(|(g, pg)| g.cost * pg)
            .sum();
        total += cost;
        max_cost = max_cost.max(cost);
        count += 1;
    }
    Ok(EvalReport {
        vertices: vertices.len(),
        interior: interior.len(),
        max_violation,
        worst_point,
        mean_cost: total / count as f64,
        max_cost,
        objective: file.objective,
        arc_gap: arc_objective.map(|a| file.objective - a),
    })
}

/// Worst-case cost of every plan over the set of `family`.
pub fn oracle(inst: &Instance, space: Space, opts: &SolverOptions) -> Result<BruteForce, Error> {
    brute_force_arc(&inst.net, &inst.paths, &inst.set(space)?, opts)
}

/// Reads a case file alone, for commands that need no sidecar.
pub fn load_network(case: &str, unc: Option<&str>) -> Result<Network, Error> {
    let net = parse_case(case)?;
    match unc {
        Some(text) => Ok(parse_uncertainty(text, &net)?.0),
        None => Ok(net),
    }
}
