//! Network instance, uncertainty sidecar and demand sampling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    Slack,
    Load,
    Generator,
}

impl BusKind {
    fn from_code(code: f64) -> Option<Self> {
        if code == 1.0 {
            Some(BusKind::Load)
        } else if code == 2.0 {
            Some(BusKind::Generator)
        } else if code == 3.0 {
            Some(BusKind::Slack)
        } else {
            None
        }
    }

    fn code(self) -> u8 {
        match self {
            BusKind::Load => 1,
            BusKind::Generator => 2,
            BusKind::Slack => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Nominal demand d̄ in MW.
    pub demand: f64,
    pub base_kv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: usize,
    /// Unit cost c_g; zero until a sidecar supplies it.
    pub cost: f64,
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub resistance: f64,
    pub reactance: f64,
    pub rate_a: f64,
    /// Current cap ȳ.
    pub cap: f64,
    /// Investment cost f; zero for existing branches.
    pub cost: f64,
    pub candidate: bool,
    /// Direct override of ȳ²R from the sidecar.
    pub rhs_override: Option<f64>,
}

impl Branch {
    /// Right-hand side ȳ²R of the thermal row when the branch is in service.
    pub fn thermal_rhs(&self) -> f64 {
        self.rhs_override
            .unwrap_or(self.cap * self.cap * self.resistance)
    }

    pub fn susceptance(&self) -> f64 {
        1.0 / self.reactance
    }

    pub fn other_end(&self, bus: usize) -> usize {
        if bus == self.from {
            self.to
        } else {
            self.from
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// Sorted by id; ids run 1..=n.
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    /// Branch `i` has id `i + 1`.
    pub branches: Vec<Branch>,
}

impl Network {
    pub fn bus(&self, id: usize) -> Option<&Bus> {
        id.checked_sub(1).and_then(|i| self.buses.get(i))
    }

    pub fn branch(&self, id: usize) -> Option<&Branch> {
        id.checked_sub(1).and_then(|i| self.branches.get(i))
    }

    /// Load set K: bus ids with positive nominal demand, ascending.
    pub fn load_set(&self) -> Vec<usize> {
        self.buses
            .iter()
            .filter(|b| b.demand > 0.0)
            .map(|b| b.id)
            .collect()
    }

    /// d̄ over the load set.
    pub fn nominal_demand(&self) -> Vec<f64> {
        self.buses
            .iter()
            .filter(|b| b.demand > 0.0)
            .map(|b| b.demand)
            .collect()
    }

    pub fn candidates(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.candidate)
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates().count()
    }

    pub fn max_gen_cost(&self) -> f64 {
        self.generators.iter().map(|g| g.cost).fold(0.0, f64::max)
    }

    fn reachable_from_generators(&self) -> BTreeSet<usize> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for br in &self.branches {
            adj.entry(br.from).or_default().push(br.to);
            adj.entry(br.to).or_default().push(br.from);
        }
        let mut seen: BTreeSet<usize> = self.generators.iter().map(|g| g.bus).collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Structural checks; connectivity uses the branches currently present.
    pub fn validate(&self) -> Result<(), Error> {
        if self.generators.is_empty() {
            return Err(Error::NoGenerator);
        }
        let reach = self.reachable_from_generators();
        for k in self.load_set() {
            if !reach.contains(&k) {
                return Err(Error::DisconnectedLoad(k));
            }
        }
        for b in &self.buses {
            if !reach.contains(&b.id) {
                log::warn!("bus {} is not connected to any generator", b.id);
            }
        }
        Ok(())
    }

    /// Case-file text for the buses, generators and existing branches.
    /// Columns not modelled are written at Matpower defaults.
    pub fn to_case_string(&self) -> String {
        let mut out = String::from("[bus]\n");
        for b in &self.buses {
            let _ = writeln!(
                out,
                "{} {} {} 0 0 0 1 1 0 {} 1 1.05 0.95",
                b.id,
                b.kind.code(),
                b.demand,
                b.base_kv
            );
        }
        out.push_str("\n[gen]\n");
        for g in &self.generators {
            let _ = writeln!(out, "{} 0 0 1 {} 0", g.bus, g.p_max);
        }
        out.push_str("\n[branch]\n");
        for br in self.branches.iter().filter(|b| !b.candidate) {
            let _ = writeln!(
                out,
                "{} {} {} {} {} 0 0 0 0",
                br.from, br.to, br.resistance, br.reactance, br.rate_a
            );
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn section_name(line: &str) -> Option<&str> {
    line.strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .map(str::trim)
}

fn parse_numbers(line: &str, lineno: usize, min: usize, what: &str) -> Result<Vec<f64>, Error> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("malformed {what} row"),
        })?;
    if vals.len() < min {
        return Err(Error::Parse {
            line: lineno,
            msg: format!(
                "{what} row needs at least {min} columns, found {}",
                vals.len()
            ),
        });
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("non-finite value in {what} row"),
        });
    }
    Ok(vals)
}

fn as_id(v: f64, lineno: usize) -> Result<usize, Error> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Parse {
            line: lineno,
            msg: format!("bad bus id {v}"),
        })
    }
}

/// Parses a sectioned case file. Every branch is marked existing.
pub fn parse_case(text: &str) -> Result<Network, Error> {
    let mut section = String::new();
    let mut buses: Vec<Bus> = Vec::new();
    let mut gen_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut branch_rows: Vec<(usize, Vec<f64>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(name) = section_name(line) {
            section = name.to_ascii_lowercase();
            continue;
        }
        match section.as_str() {
            "bus" => {
                let v = parse_numbers(line, lineno, 10, "bus")?;
                let id = as_id(v[0], lineno)?;
                let kind = BusKind::from_code(v[1]).ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("unsupported bus type {}", v[1]),
                })?;
                if v[2] < 0.0 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "negative demand".into(),
                    });
                }
                if v[9] <= 0.0 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "baseKV must be positive".into(),
                    });
                }
                if buses.iter().any(|b| b.id == id) {
                    return Err(Error::DuplicateBus(id));
                }
                buses.push(Bus {
                    id,
                    kind,
                    demand: v[2],
                    base_kv: v[9],
                });
            }
            "gen" => gen_rows.push((lineno, parse_numbers(line, lineno, 5, "gen")?)),
            "branch" => branch_rows.push((lineno, parse_numbers(line, lineno, 5, "branch")?)),
            "" => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "data before any section header".into(),
                })
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown section [{other}]"),
                })
            }
        }
    }

    buses.sort_by_key(|b| b.id);
    for (i, b) in buses.iter().enumerate() {
        if b.id != i + 1 {
            return Err(Error::NonContiguous(i + 1));
        }
    }
    let n = buses.len();

    let mut generators = Vec::new();
    for (lineno, v) in gen_rows {
        let bus = as_id(v[0], lineno)?;
        if bus > n {
            return Err(Error::UnknownBus { bus, line: lineno });
        }
        if v[4] <= 0.0 {
            return Err(Error::Parse {
                line: lineno,
                msg: "Pmax must be positive".into(),
            });
        }
        generators.push(Generator {
            bus,
            cost: 0.0,
            p_max: v[4],
        });
    }

    let mut branches = Vec::new();
    for (lineno, v) in branch_rows {
        let br = branch_from_row(&buses, branches.len() + 1, &v, 0.0, false, lineno)?;
        branches.push(br);
    }

    let net = Network {
        buses,
        generators,
        branches,
    };
    net.validate()?;
    Ok(net)
}

fn branch_from_row(
    buses: &[Bus],
    id: usize,
    v: &[f64],
    cost: f64,
    candidate: bool,
    lineno: usize,
) -> Result<Branch, Error> {
    let from = as_id(v[0], lineno)?;
    let to = as_id(v[1], lineno)?;
    for bus in [from, to] {
        if bus > buses.len() {
            return Err(Error::UnknownBus { bus, line: lineno });
        }
    }
    if from == to {
        return Err(Error::Parse {
            line: lineno,
            msg: "branch endpoints coincide".into(),
        });
    }
    let (r, x, rate_a) = (v[2], v[3], v[4]);
    if r <= 0.0 {
        return Err(Error::Parse {
            line: lineno,
            msg: "resistance must be positive".into(),
        });
    }
    if rate_a <= 0.0 {
        return Err(Error::Parse {
            line: lineno,
            msg: "rateA must be positive".into(),
        });
    }
    Ok(Branch {
        id,
        from,
        to,
        resistance: r,
        reactance: x,
        rate_a,
        cap: rate_a / buses[from - 1].base_kv,
        cost,
        candidate,
        rhs_override: None,
    })
}

/// Budget set {‖ξ‖₁ ≤ κ, ‖ξ‖∞ ≤ τ}, demand d̄ + ξ∘d̂.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBudget {
    /// d̂ over the load set.
    pub dispersion: Vec<f64>,
    pub kappa: f64,
    pub tau: f64,
}

/// Clamps κ to τ·|K|; the set does not change beyond that. Returns whether
/// clamping happened.
pub fn clamp_kappa(kappa: f64, tau: f64, loads: usize) -> (f64, bool) {
    let full = tau * loads as f64;
    if kappa > full {
        (full, true)
    } else {
        (kappa, false)
    }
}

impl UncertaintyBudget {
    pub fn new(dispersion: Vec<f64>, kappa: f64, tau: f64) -> Result<Self, Error> {
        if !(kappa >= 0.0 && tau >= 0.0) || !kappa.is_finite() || !tau.is_finite() {
            return Err(Error::Invalid(format!(
                "kappa {kappa} and tau {tau} must be finite and nonnegative"
            )));
        }
        if dispersion.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::Invalid("dispersion must be nonnegative".into()));
        }
        let (k, clamped) = clamp_kappa(kappa, tau, dispersion.len());
        if clamped {
            log::warn!("kappa {kappa} exceeds tau*|K| = {k}; clamped");
        }
        Ok(Self {
            dispersion,
            kappa: k,
            tau,
        })
    }

    /// d̄ + ξ∘d̂.
    pub fn demand_at(&self, nominal: &[f64], xi: &[f64]) -> Vec<f64> {
        nominal
            .iter()
            .zip(&self.dispersion)
            .zip(xi)
            .map(|((d, h), x)| d + x * h)
            .collect()
    }
}

/// Convex combinations of the samples with weights capped at 1/(N(1−α)).
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyVaR {
    /// N rows over the load set.
    pub samples: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl UncertaintyVaR {
    pub fn new(samples: Vec<Vec<f64>>, alpha: f64) -> Result<Self, Error> {
        if samples.is_empty() {
            return Err(Error::Invalid("at least one sample is required".into()));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Invalid(format!("alpha {alpha} must lie in [0, 1)")));
        }
        if samples
            .iter()
            .flatten()
            .any(|d| !(*d >= 0.0) || !d.is_finite())
        {
            return Err(Error::Invalid(
                "samples must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { samples, alpha })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn cap(&self) -> f64 {
        1.0 / (self.n() as f64 * (1.0 - self.alpha))
    }

    pub fn mean(&self) -> Vec<f64> {
        let k = self.samples[0].len();
        let n = self.n() as f64;
        (0..k)
            .map(|j| self.samples.iter().map(|s| s[j]).sum::<f64>() / n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySpec {
    pub budget: Option<UncertaintyBudget>,
    pub var: Option<UncertaintyVaR>,
    /// d̂ used for sampling; equals the budget dispersion when both exist.
    pub dispersion: Vec<f64>,
    pub seed: u64,
}

impl UncertaintySpec {
    pub fn budget_set(&self) -> Result<UncertaintySet, Error> {
        self.budget
            .clone()
            .map(UncertaintySet::Budget)
            .ok_or(Error::MissingSet("budget"))
    }

    pub fn var_set(&self) -> Result<UncertaintySet, Error> {
        self.var
            .clone()
            .map(UncertaintySet::VaR)
            .ok_or(Error::MissingSet("var"))
    }
}

/// One of the two demand uncertainty sets.
#[derive(Debug, Clone, PartialEq)]
pub enum UncertaintySet {
    Budget(UncertaintyBudget),
    VaR(UncertaintyVaR),
}

impl UncertaintySet {
    pub fn tag(&self) -> &'static str {
        match self {
            UncertaintySet::Budget(_) => "budget",
            UncertaintySet::VaR(_) => "var",
        }
    }
}

/// SplitMix64 with the standard constants.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// N demand rows drawn uniformly from [d̄ − d̂, d̄ + d̂], row-major.
pub fn draw_var_samples(
    dispersion: &[f64],
    nominal: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, Error> {
    if n == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    if dispersion.len() != nominal.len() {
        return Err(Error::Dimension(format!(
            "{} dispersions for {} loads",
            dispersion.len(),
            nominal.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let scale = 2f64.powi(64);
    Ok((0..n)
        .map(|_| {
            nominal
                .iter()
                .zip(dispersion)
                .map(|(&d, &h)| d - h + (rng.next_u64() as f64 / scale) * 2.0 * h)
                .collect()
        })
        .collect())
}

fn key_value(line: &str, lineno: usize) -> Result<(Vec<&str>, f64), Error> {
    let (lhs, rhs) = line.split_once('=').ok_or_else(|| Error::Parse {
        line: lineno,
        msg: "expected `key = value`".into(),
    })?;
    let value: f64 = rhs.trim().parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("bad number `{}`", rhs.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: lineno,
            msg: "non-finite value".into(),
        });
    }
    Ok((lhs.split_whitespace().collect(), value))
}

fn bus_arg(keys: &[&str], lineno: usize) -> Result<usize, Error> {
    match keys {
        [_, id] => id.parse::<usize>().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad id `{id}`"),
        }),
        _ => Err(Error::Parse {
            line: lineno,
            msg: format!("expected `{} <id> = <value>`", keys[0]),
        }),
    }
}

/// Merges a sidecar into `net` (costs, candidates, thermal overrides) and
/// builds the uncertainty sets it describes.
pub fn parse_uncertainty(text: &str, net: &Network) -> Result<(Network, UncertaintySpec), Error> {
    let mut net = net.clone();
    let loads = net.load_set();
    let nominal = net.nominal_demand();
    let mut section = String::new();
    let mut costs: BTreeMap<usize, f64> = BTreeMap::new();
    let mut thermal: Vec<(usize, usize, f64)> = Vec::new();
    let mut fraction = 0.1;
    let mut per_bus: BTreeMap<usize, f64> = BTreeMap::new();
    let (mut kappa, mut tau) = (None, None);
    let mut has_budget = false;
    let (mut alpha, mut samples, mut seed) = (0.0, 10usize, 0u64);
    let mut has_var = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(name) = section_name(line) {
            section = name.to_ascii_lowercase();
            has_budget |= section == "budget";
            has_var |= section == "var";
            continue;
        }
        match section.as_str() {
            "costs" => {
                let (keys, v) = key_value(line, lineno)?;
                if keys.first() != Some(&"gen") {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "expected `gen <bus> = <cost>`".into(),
                    });
                }
                let bus = bus_arg(&keys, lineno)?;
                if v < 0.0 {
                    return Err(Error::Invalid(format!(
                        "negative cost for generator at bus {bus}"
                    )));
                }
                if !net.generators.iter().any(|g| g.bus == bus) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("no generator at bus {bus}"),
                    });
                }
                costs.insert(bus, v);
            }
            "candidates" => {
                let v = parse_numbers(line, lineno, 6, "candidate")?;
                if v[5] < 0.0 {
                    return Err(Error::Invalid(format!(
                        "negative investment cost on line {lineno}"
                    )));
                }
                let id = net.branches.len() + 1;
                let br = branch_from_row(&net.buses, id, &v, v[5], true, lineno)?;
                net.branches.push(br);
            }
            "thermal" => {
                let (keys, v) = key_value(line, lineno)?;
                if keys.first() != Some(&"thermal_rhs") {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "expected `thermal_rhs <branch> = <value>`".into(),
                    });
                }
                if v <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "thermal_rhs must be positive (line {lineno})"
                    )));
                }
                thermal.push((lineno, bus_arg(&keys, lineno)?, v));
            }
            "budget" => {
                let (keys, v) = key_value(line, lineno)?;
                match keys.as_slice() {
                    ["kappa"] => kappa = Some(v),
                    ["tau"] => tau = Some(v),
                    ["dispersion_fraction"] => fraction = v,
                    ["dispersion", _] => {
                        let bus = bus_arg(&keys, lineno)?;
                        if !loads.contains(&bus) {
                            return Err(Error::Parse {
                                line: lineno,
                                msg: format!("bus {bus} is not a load"),
                            });
                        }
                        per_bus.insert(bus, v);
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("unknown budget key `{}`", keys.join(" ")),
                        })
                    }
                }
            }
            "var" => {
                if let Some(("seed", rhs)) = line.split_once('=').map(|(k, v)| (k.trim(), v.trim()))
                {
                    seed = rhs.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("bad seed `{rhs}`"),
                    })?;
                    continue;
                }
                let (keys, v) = key_value(line, lineno)?;
                match keys.as_slice() {
                    ["alpha"] => alpha = v,
                    ["samples"] if v >= 1.0 && v.fract() == 0.0 => samples = v as usize,
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("bad var entry `{line}`"),
                        })
                    }
                }
            }
            "" => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "data before any section header".into(),
                })
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown section [{other}]"),
                })
            }
        }
    }

    for (lineno, id, v) in thermal {
        let br = net
            .branches
            .get_mut(id.wrapping_sub(1))
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("unknown branch {id}"),
            })?;
        br.rhs_override = Some(v);
        br.cap = (v / br.resistance).sqrt();
    }
    for g in &mut net.generators {
        g.cost = *costs.get(&g.bus).ok_or(Error::MissingCost(g.bus))?;
    }
    if fraction < 0.0 {
        return Err(Error::Invalid(
            "dispersion_fraction must be nonnegative".into(),
        ));
    }
    let dispersion: Vec<f64> = loads
        .iter()
        .zip(&nominal)
        .map(|(k, d)| per_bus.get(k).copied().unwrap_or(fraction * d))
        .collect();

    let budget = if has_budget {
        let tau = tau.unwrap_or(1.0);
        Some(UncertaintyBudget::new(
            dispersion.clone(),
            kappa.unwrap_or(tau * loads.len() as f64),
            tau,
        )?)
    } else {
        None
    };
    let var = if has_var {
        let rows = draw_var_samples(&dispersion, &nominal, samples, seed)?;
        Some(UncertaintyVaR::new(rows, alpha)?)
    } else {
        None
    };
    net.validate()?;
    Ok((
        net,
        UncertaintySpec {
            budget,
            var,
            dispersion,
            seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str =
        "[bus]\n1 3 0 0 0 0 1 1 0 230 1 1.05 0.95\n2 1 10 0 0 0 1 1 0 230 1 1.05 0.95\n\
                           [gen]\n1 0 0 1 100 0\n[branch]\n1 2 0.1 0.2 100 0 0 0 0\n";

    #[test]
    fn splitmix_reference_stream() {
        let mut rng = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..5).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            [
                6457827717110365317,
                3203168211198807973,
                9817491932198370423,
                4593380528125082431,
                16408922859458223821
            ]
        );
    }

    #[test]
    fn parses_two_bus_case() {
        let net = parse_case(TWO_BUS).unwrap();
        assert_eq!(net.load_set(), vec![2]);
        assert_eq!(net.branches[0].id, 1);
        assert!((net.branches[0].cap - 100.0 / 230.0).abs() < 1e-15);
        assert!(!net.branches[0].candidate);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = TWO_BUS.replace("1 2 0.1 0.2 100", "1 2 0.1 zz 100");
        match parse_case(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_bus() {
        let dup = TWO_BUS.replace("2 1 10", "1 1 10");
        assert_eq!(parse_case(&dup), Err(Error::DuplicateBus(1)));
        let unknown = TWO_BUS.replace("1 2 0.1", "1 7 0.1");
        assert!(matches!(
            parse_case(&unknown),
            Err(Error::UnknownBus { bus: 7, .. })
        ));
    }

    #[test]
    fn no_branches_means_disconnected_load() {
        let text = TWO_BUS.replace("1 2 0.1 0.2 100 0 0 0 0\n", "");
        let err = parse_case(&text).unwrap_err();
        assert_eq!(err, Error::DisconnectedLoad(2));
        assert!(err.to_string().contains("disconnected load"));
    }

    #[test]
    fn sidecar_costs_candidates_and_sets() {
        let net = parse_case(TWO_BUS).unwrap();
        let side = "[costs]\ngen 1 = 2\n[candidates]\n1 2 0.1 0.2 100 50\n[thermal]\nthermal_rhs 1 = 4\n\
                    [budget]\nkappa = 9\ntau = 1\ndispersion 2 = 3\n[var]\nalpha = 0.5\nsamples = 4\nseed = 9\n";
        let (net, spec) = parse_uncertainty(side, &net).unwrap();
        assert_eq!(net.branches.len(), 2);
        assert!(net.branches[1].candidate);
        assert_eq!(net.branches[1].cost, 50.0);
        assert_eq!(net.branches[0].thermal_rhs(), 4.0);
        assert!((net.branches[0].cap - (4.0f64 / 0.1).sqrt()).abs() < 1e-12);
        assert_eq!(net.generators[0].cost, 2.0);
        let b = spec.budget.unwrap();
        assert_eq!(b.kappa, 1.0);
        assert_eq!(b.dispersion, vec![3.0]);
        let v = spec.var.unwrap();
        assert_eq!(v.n(), 4);
        assert!((v.cap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sidecar_errors() {
        let net = parse_case(TWO_BUS).unwrap();
        assert_eq!(
            parse_uncertainty("[costs]\n", &net).unwrap_err(),
            Error::MissingCost(1)
        );
        assert!(parse_uncertainty("[costs]\ngen 1 = -1\n", &net).is_err());
        assert!(parse_uncertainty("[costs]\ngen 1 = 1\n[var]\nalpha = 1\n", &net).is_err());
        assert!(parse_uncertainty("[costs]\ngen 1 = 1\n[budget]\nkappa = -1\n", &net).is_err());
        assert!(matches!(
            parse_uncertainty("[costs]\ngen 1 = 1\n[candidates]\n1 9 0.1 0.1 10 1\n", &net),
            Err(Error::UnknownBus { bus: 9, .. })
        ));
    }

    #[test]
    fn zero_dispersion_gives_nominal_samples() {
        let rows = draw_var_samples(&[0.0, 0.0], &[5.0, 7.0], 3, 1).unwrap();
        assert!(rows.iter().all(|r| r == &vec![5.0, 7.0]));
        assert!(draw_var_samples(&[0.0], &[1.0], 0, 1).is_err());
    }

    #[test]
    fn kappa_clamp() {
        assert_eq!(clamp_kappa(99.0, 1.0, 5), (5.0, true));
        assert_eq!(clamp_kappa(2.0, 1.0, 5), (2.0, false));
    }
}
