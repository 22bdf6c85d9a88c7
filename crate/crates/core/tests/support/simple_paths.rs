//! Random small networks and exhaustive simple-path enumeration.

use rand::Rng;
use robopf_core::grid::{Branch, Bus, BusKind, Network};
use robopf_core::paths::Weight;

/// `n` buses, a random spanning tree plus extra (possibly parallel) edges,
/// small integer resistances so that ties are common.
pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> Network {
    let buses = (1..=n)
        .map(|id| Bus {
            id,
            kind: BusKind::Load,
            demand: 0.0,
            base_kv: 1.0,
        })
        .collect();
    let mut ends: Vec<(usize, usize)> = Vec::new();
    for v in 2..=n {
        if rng.gen_bool(0.9) {
            ends.push((rng.gen_range(1..v), v));
        }
    }
    let extra = rng.gen_range(0..=n + 2);
    for _ in 0..extra {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b {
            ends.push((a, b));
        }
    }
    let branches = ends
        .into_iter()
        .enumerate()
        .map(|(i, (from, to))| Branch {
            id: i + 1,
            from,
            to,
            resistance: rng.gen_range(1..=3) as f64,
            reactance: 1.0,
            rate_a: 1.0,
            cap: 1.0,
            cost: 0.0,
            candidate: false,
            rhs_override: None,
        })
        .collect();
    Network {
        buses,
        generators: Vec::new(),
        branches,
    }
}

/// Every simple path from `src` to `dst` as (weight, edge ids), sorted by
/// weight and then by edge sequence.
pub fn all_simple_paths(
    net: &Network,
    src: usize,
    dst: usize,
    weight: Weight,
) -> Vec<(f64, Vec<usize>)> {
    fn dfs(
        net: &Network,
        at: usize,
        dst: usize,
        weight: Weight,
        seen: &mut Vec<bool>,
        edges: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if at == dst {
            let w = edges
                .iter()
                .fold(0.0, |acc, &e| acc + weight.of(&net.branches[e - 1]));
            out.push((w, edges.clone()));
            return;
        }
        for br in &net.branches {
            if br.from != at && br.to != at {
                continue;
            }
            let next = br.other_end(at);
            if seen[next - 1] {
                continue;
            }
            seen[next - 1] = true;
            edges.push(br.id);
            dfs(net, next, dst, weight, seen, edges, out);
            edges.pop();
            seen[next - 1] = false;
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; net.buses.len()];
    seen[src - 1] = true;
    dfs(net, src, dst, weight, &mut seen, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}
