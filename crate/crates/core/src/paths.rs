//! Generator-to-load paths via Yen's K-shortest loopless paths.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::grid::{Branch, Network};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Resistance,
    Hops,
}

impl Weight {
    pub fn of(self, br: &Branch) -> f64 {
        match self {
            Weight::Resistance => br.resistance,
            Weight::Hops => 1.0,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weight::Resistance => "resistance",
            Weight::Hops => "hops",
        })
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "resistance" => Ok(Weight::Resistance),
            "hops" => Ok(Weight::Hops),
            other => Err(format!(
                "unknown weight `{other}` (expected resistance or hops)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub generator_bus: usize,
    pub load_bus: usize,
    /// Branch ids from the generator end to the load end.
    pub edges: Vec<usize>,
    pub weight: f64,
}

impl Path {
    /// Bus sequence visited, starting at the generator.
    pub fn buses(&self, net: &Network) -> Vec<usize> {
        let mut out = vec![self.generator_bus];
        let mut at = self.generator_bus;
        for &e in &self.edges {
            at = net.branches[e - 1].other_end(at);
            out.push(at);
        }
        out
    }
}

/// Weights within this relative distance count as tied; ties fall back to
/// the lexicographic order of the edge-id sequence.
const TIE: f64 = 1e-12;

fn cmp_label(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    let scale = 1f64.max(a.0.abs()).max(b.0.abs());
    if (a.0 - b.0).abs() <= TIE * scale {
        a.1.cmp(b.1)
    } else {
        a.0.total_cmp(&b.0)
    }
}

fn path_weight(net: &Network, edges: &[usize], weight: Weight) -> f64 {
    edges
        .iter()
        .fold(0.0, |acc, &e| acc + weight.of(&net.branches[e - 1]))
}

struct Graph {
    /// Per bus index: (branch id, neighbour bus id), sorted by branch id.
    adj: Vec<Vec<(usize, usize)>>,
    w: Vec<f64>,
}

impl Graph {
    fn new(net: &Network, weight: Weight) -> Self {
        let mut adj = vec![Vec::new(); net.buses.len()];
        for br in &net.branches {
            adj[br.from - 1].push((br.id, br.to));
            adj[br.to - 1].push((br.id, br.from));
        }
        for list in &mut adj {
            list.sort();
        }
        Self {
            adj,
            w: net.branches.iter().map(|b| weight.of(b)).collect(),
        }
    }

    /// Least (weight, edge sequence) path avoiding blocked buses and edges.
    fn dijkstra(
        &self,
        src: usize,
        dst: usize,
        blocked_bus: &[bool],
        blocked_edge: &[bool],
    ) -> Option<(f64, Vec<usize>)> {
        let n = self.adj.len();
        let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
        let mut done = vec![false; n];
        best[src - 1] = Some((0.0, Vec::new()));
        loop {
            let mut pick: Option<usize> = None;
            for v in 0..n {
                if done[v] {
                    continue;
                }
                if let Some((d, seq)) = &best[v] {
                    let better = match pick {
                        None => true,
                        Some(u) => {
                            let (du, su) = best[u].as_ref().unwrap();
                            cmp_label((*d, seq), (*du, su)) == Ordering::Less
                        }
                    };
                    if better {
                        pick = Some(v);
                    }
                }
            }
            let u = pick?;
            if u == dst - 1 {
                return best[u].take();
            }
            done[u] = true;
            let (du, su) = best[u].clone().unwrap();
            for &(e, v) in &self.adj[u] {
                let vi = v - 1;
                if done[vi] || blocked_bus[vi] || blocked_edge[e - 1] {
                    continue;
                }
                let dv = du + self.w[e - 1];
                let mut sv = su.clone();
                sv.push(e);
                let improves = match &best[vi] {
                    None => true,
                    Some((d, s)) => cmp_label((dv, &sv), (*d, s)) == Ordering::Less,
                };
                if improves {
                    best[vi] = Some((dv, sv));
                }
            }
        }
    }
}

/// Up to `k` loopless paths from `src` to `dst`, ordered by weight and then
/// by edge-id sequence. `src == dst` yields the single empty path.
pub fn yen_k_shortest(
    net: &Network,
    src: usize,
    dst: usize,
    k: usize,
    weight: Weight,
) -> Vec<Path> {
    let make = |edges: Vec<usize>| Path {
        generator_bus: src,
        load_bus: dst,
        weight: path_weight(net, &edges, weight),
        edges,
    };
    if k == 0 || net.bus(src).is_none() || net.bus(dst).is_none() {
        return Vec::new();
    }
    if src == dst {
        return vec![make(Vec::new())];
    }
    let g = Graph::new(net, weight);
    let n = net.buses.len();
    let Some((_, first)) = g.dijkstra(src, dst, &vec![false; n], &vec![false; net.branches.len()])
    else {
        return Vec::new();
    };
    let mut found: Vec<Path> = vec![make(first)];
    let mut pool: Vec<Path> = Vec::new();

    while found.len() < k {
        let prev = found.last().unwrap().clone();
        let nodes = prev.buses(net);
        for i in 0..prev.edges.len() {
            let root = &prev.edges[..i];
            let mut blocked_edge = vec![false; net.branches.len()];
            for p in &found {
                if p.edges.len() > i && &p.edges[..i] == root {
                    blocked_edge[p.edges[i] - 1] = true;
                }
            }
            let mut blocked_bus = vec![false; n];
            for &b in &nodes[..i] {
                blocked_bus[b - 1] = true;
            }
            if let Some((_, spur)) = g.dijkstra(nodes[i], dst, &blocked_bus, &blocked_edge) {
                let mut edges = root.to_vec();
                edges.extend(spur);
                if !pool.iter().any(|p| p.edges == edges) && !found.iter().any(|p| p.edges == edges)
                {
                    pool.push(make(edges));
                }
            }
        }
        let Some(best) = (0..pool.len()).min_by(|&a, &b| {
            cmp_label(
                (pool[a].weight, &pool[a].edges),
                (pool[b].weight, &pool[b].edges),
            )
        }) else {
            break;
        };
        found.push(pool.swap_remove(best));
    }
    found
}

/// Admissible paths for every (load, generator) pair, with derived sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub k: usize,
    pub weight: Weight,
    /// Load bus ids; a load's position here is its index everywhere else.
    pub loads: Vec<usize>,
    /// Global path list; the position is the path id.
    pub paths: Vec<Path>,
    pub path_load: Vec<usize>,
    pub path_gen: Vec<usize>,
    /// 1-based rank within its pair.
    pub path_rank: Vec<usize>,
    /// (load bus, generator index) → path ids in rank order.
    pub per_pair: BTreeMap<(usize, usize), Vec<usize>>,
    /// P_k by load position.
    pub per_load: Vec<Vec<usize>>,
    /// P_g by generator index.
    pub per_gen: Vec<Vec<usize>>,
    /// Path ids through each branch, by branch index.
    pub incidence: Vec<Vec<usize>>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

pub fn build_path_sets(net: &Network, k: usize, weight: Weight) -> Result<PathSet, Error> {
    if k == 0 {
        return Err(Error::Invalid("path count K must be at least 1".into()));
    }
    let loads = net.load_set();
    let mut ps = PathSet {
        k,
        weight,
        loads: loads.clone(),
        paths: Vec::new(),
        path_load: Vec::new(),
        path_gen: Vec::new(),
        path_rank: Vec::new(),
        per_pair: BTreeMap::new(),
        per_load: vec![Vec::new(); loads.len()],
        per_gen: vec![Vec::new(); net.generators.len()],
        incidence: vec![Vec::new(); net.branches.len()],
    };
    for (ki, &bus) in loads.iter().enumerate() {
        for (gi, gen) in net.generators.iter().enumerate() {
            let found = yen_k_shortest(net, gen.bus, bus, k, weight);
            let mut ids = Vec::with_capacity(found.len());
            for (rank, p) in found.into_iter().enumerate() {
                let id = ps.paths.len();
                for &e in &p.edges {
                    ps.incidence[e - 1].push(id);
                }
                ps.paths.push(p);
                ps.path_load.push(ki);
                ps.path_gen.push(gi);
                ps.path_rank.push(rank + 1);
                ps.per_load[ki].push(id);
                ps.per_gen[gi].push(id);
                ids.push(id);
            }
            ps.per_pair.insert((bus, gi), ids);
        }
        if ps.per_load[ki].is_empty() {
            return Err(Error::NoPath(bus));
        }
    }
    Ok(ps)
}
