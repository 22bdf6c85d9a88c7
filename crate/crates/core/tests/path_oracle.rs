mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robopf_core::paths::{yen_k_shortest, Weight};
use support::simple_paths::{all_simple_paths, random_network};

fn check_graph(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let net = random_network(&mut rng, n);
    let weight = if rng.gen_bool(0.5) {
        Weight::Resistance
    } else {
        Weight::Hops
    };
    let mut pairs = 0;
    for src in 1..=n {
        for dst in 1..=n {
            let truth = all_simple_paths(&net, src, dst, weight);
            for k in [1, 2, 5] {
                let got = yen_k_shortest(&net, src, dst, k, weight);
                let want: Vec<_> = truth.iter().take(k).collect();
                assert_eq!(got.len(), want.len(), "seed {seed} {src}->{dst} k={k}");
                for (p, (w, edges)) in got.iter().zip(&want) {
                    assert_eq!(&p.edges, edges, "seed {seed} {src}->{dst} k={k}");
                    assert_eq!(p.weight, *w);
                    assert_eq!(p.generator_bus, src);
                    assert_eq!(p.load_bus, dst);
                }
            }
            pairs += 1;
        }
    }
    pairs
}

#[test]
fn yen_matches_exhaustive_enumeration_on_100_graphs() {
    let pairs: usize = (0..100).map(check_graph).sum();
    assert!(pairs > 100);
}

#[test]
fn returned_paths_are_loopless() {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let net = random_network(&mut rng, 7);
        for dst in 2..=7 {
            for p in yen_k_shortest(&net, 1, dst, 5, Weight::Resistance) {
                let mut buses = p.buses(&net);
                assert_eq!(buses.first(), Some(&1));
                assert_eq!(buses.last(), Some(&dst));
                let len = buses.len();
                buses.sort_unstable();
                buses.dedup();
                assert_eq!(buses.len(), len);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smaller_k_is_a_prefix(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=7);
        let net = random_network(&mut rng, n);
        let dst = rng.gen_range(1..=n);
        let long = yen_k_shortest(&net, 1, dst, k + 3, Weight::Hops);
        let short = yen_k_shortest(&net, 1, dst, k, Weight::Hops);
        prop_assert!(short.len() <= k);
        prop_assert_eq!(&long[..short.len()], &short[..]);
        for w in long.windows(2) {
            prop_assert!(w[0].weight <= w[1].weight + 1e-12);
        }
    }
}
