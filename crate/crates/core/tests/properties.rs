use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flowsparse::flow::{all_bipartition_cuts, lambda, lambda_2hop, lambda_terminal_free, lambda_value, sparsest_cut};
use flowsparse::generate::{quasi_bipartite, random_connected, series_parallel, CapRange};
use flowsparse::merging::{clump, ratio_type_sparsifier, refine_partitions, round_capacities};
use flowsparse::sampling::sample_sparsifier;
use flowsparse::sketch::DemandSketch;
use flowsparse::splice::{decompose_flow, splice};
use flowsparse::structured::{mimick_small, sp_sparsifier};
use flowsparse::verify::{certify, certify_cuts, demand_grid, DemandSpec};
use flowsparse::{phi_merge, DemandVector, Rational, TerminalNetwork, VertexPartition};

fn demand(net: &TerminalNetwork, seed: u64) -> DemandVector {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let ts = net.terminal_names();
    let mut d = DemandVector::new();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            if r.random_bool(0.6) {
                d = d.with(&ts[i], &ts[j], r.random_range(0.1..5.0));
            }
        }
    }
    if d.is_zero() {
        d = d.with(&ts[0], &ts[1], 1.0);
    }
    d
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Random partition of the non-terminals into blocks; terminals stay alone.
fn random_partition(net: &TerminalNetwork, seed: u64) -> VertexPartition {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<BTreeSet<String>> = net.terminal_names().into_iter().map(|t| BTreeSet::from([t])).collect();
    let groups = 1 + r.random_range(0..3);
    let mut extra: Vec<BTreeSet<String>> = vec![BTreeSet::new(); groups];
    for v in net.non_terminals() {
        extra[r.random_range(0..groups)].insert(net.name(v).to_string());
    }
    blocks.extend(extra.into_iter().filter(|b| !b.is_empty()));
    VertexPartition::new(blocks)
}

fn edge_multiset(net: &TerminalNetwork, rename: &BTreeMap<String, String>) -> Vec<(String, String, Rational)> {
    let map = |s: String| rename.get(&s).cloned().unwrap_or(s);
    let mut out: Vec<_> = net
        .edge_list()
        .into_iter()
        .map(|(u, v, c)| {
            let (u, v) = (map(u), map(v));
            if u <= v { (u, v, c) } else { (v, u, c) }
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn singleton_merge_is_normalize(seed in 0u64..10_000, n in 4usize..12, k in 2usize..5) {
        let net = random_connected(n, k.min(n), 0.3, CapRange::default(), seed).unwrap();
        prop_assert_eq!(net.merge_vertices(&VertexPartition::singletons(&net)).unwrap(), net.normalize());
    }

    #[test]
    fn structural_operations_and_lambda(seed in 0u64..10_000, n in 5usize..12, k in 2usize..5) {
        let net = random_connected(n, k, 0.35, CapRange::default(), seed).unwrap();
        let d = demand(&net, seed + 1);
        let base = lambda_value(&net, &d).unwrap();
        prop_assert!(close(lambda_value(&net.normalize(), &d).unwrap(), base, 1e-6));
        prop_assert!(close(lambda_value(&net.subdivide_terminal_edges(), &d).unwrap(), base, 1e-6));
        let merged = clump(&net, &random_partition(&net, seed + 2)).unwrap();
        prop_assert!(lambda_value(&merged, &d).unwrap() >= base * (1.0 - 1e-6));
    }

    #[test]
    fn phi_merge_is_symmetric_up_to_renaming(seed in 0u64..10_000) {
        let g1 = random_connected(6, 3, 0.4, CapRange::default(), seed).unwrap().rename_except(&BTreeSet::new(), "a:").unwrap();
        let g2 = random_connected(6, 3, 0.4, CapRange::default(), seed + 1).unwrap().rename_except(&BTreeSet::new(), "b:").unwrap();
        let (t1, t2) = (g1.terminal_names(), g2.terminal_names());
        let phi = vec![(t1[0].clone(), t2[1].clone()), (t1[2].clone(), t2[0].clone())];
        let inv: Vec<(String, String)> = phi.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        let ab = phi_merge(&g1, &g2, &phi).unwrap();
        let ba = phi_merge(&g2, &g1, &inv).unwrap();
        let rename: BTreeMap<String, String> = inv.into_iter().collect();
        prop_assert_eq!(ab.n(), ba.n());
        prop_assert_eq!(edge_multiset(&ab, &BTreeMap::new()), edge_multiset(&ba, &rename));
    }

    #[test]
    fn duality_cut_homogeneity_monotonicity(seed in 0u64..10_000, n in 4usize..11, k in 2usize..5, alpha in 0.05f64..20.0) {
        let net = random_connected(n, k.min(n), 0.3, CapRange::default(), seed).unwrap();
        let d = demand(&net, seed + 3);
        let res = lambda(&net, &d).unwrap();
        prop_assert!((res.value - res.dual.objective).abs() <= 1e-6 * res.value.max(1.0));
        let (phi, _) = sparsest_cut(&net, &d).unwrap();
        prop_assert!(res.value <= phi * (1.0 + 1e-9));
        prop_assert!(close(lambda_value(&net, &d.scaled(alpha)).unwrap() * alpha, res.value, 1e-9));
        // a routable demand stays routable when one coordinate shrinks
        let routable = d.scaled(res.value);
        let (s, t, x) = routable.iter().next().map(|(s, t, x)| (s.to_string(), t.to_string(), x)).unwrap();
        let smaller = routable.clone().with(&s, &t, x * 0.5);
        prop_assert!(lambda_value(&net, &smaller).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn terminal_free_flow_is_two_hop(seed in 0u64..10_000, k in 2usize..5) {
        let net = quasi_bipartite(k, 20, CapRange::default(), seed).unwrap();
        let d = demand(&net, seed + 4);
        let two = lambda_2hop(&net, &d).unwrap().value;
        prop_assert!(close(lambda_terminal_free(&net, &d).unwrap(), two, 1e-6));
        prop_assert!(lambda_value(&net, &d).unwrap() >= two * (1.0 - 1e-9));
    }

    #[test]
    fn merges_only_help_and_rounding_is_bounded(seed in 0u64..10_000, eps in 0.05f64..0.45) {
        let net = quasi_bipartite(3, 14, CapRange::default(), seed).unwrap();
        let out = ratio_type_sparsifier(&net, eps).unwrap();
        let rounded = round_capacities(&net, eps).unwrap();
        for i in 0..5 {
            let d = demand(&net, seed * 10 + i);
            let base = lambda_value(&net, &d).unwrap();
            prop_assert!(lambda_value(&out.net, &d).unwrap() >= base * (1.0 - 1e-6));
            let r = lambda_value(&rounded, &d).unwrap() / base;
            prop_assert!(r <= 1.0 + 1e-6 && r >= 1.0 / (1.0 + eps) - 1e-6, "rounding ratio {}", r);
        }
    }

    #[test]
    fn refinement_is_an_equivalence(seed in 0u64..10_000) {
        let net = random_connected(10, 3, 0.3, CapRange::default(), seed).unwrap();
        let (a, b) = (random_partition(&net, seed), random_partition(&net, seed + 1));
        let ab = refine_partitions(&[a.clone(), b.clone()]).unwrap();
        let ba = refine_partitions(&[b.clone(), a.clone()]).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert_eq!(&refine_partitions(&[ab.clone(), ab.clone()]).unwrap(), &ab);
        prop_assert_eq!(&refine_partitions(std::slice::from_ref(&a)).unwrap(), &a);
        ab.validate_for(&net).unwrap();
        // same block in the refinement iff same block in both inputs
        let (la, lb, lab) = (a.block_of(), b.block_of(), ab.block_of());
        for u in net.names() {
            for v in net.names() {
                let together = la[u.as_str()] == la[v.as_str()] && lb[u.as_str()] == lb[v.as_str()];
                prop_assert_eq!(lab[u.as_str()] == lab[v.as_str()], together);
            }
        }
    }

    #[test]
    fn splice_preserves_loads(seed in 0u64..10_000) {
        let net = random_connected(9, 4, 0.3, CapRange::default(), seed).unwrap();
        let d = demand(&net, seed + 5);
        let dec = decompose_flow(&net, &lambda(&net, &d).unwrap().flow).unwrap();
        let (out, log) = splice(&dec);
        prop_assert_eq!(out.edge_loads(), dec.edge_loads());
        prop_assert_eq!(out.internal_terminal_count(), 0);
        prop_assert_eq!(log.splits.is_empty(), dec.internal_terminal_count() == 0);
    }

    #[test]
    fn sampling_is_deterministic_and_two_hop(seed in 0u64..10_000, m in 1.0f64..20.0) {
        let net = quasi_bipartite(4, 40, CapRange::default(), seed).unwrap();
        let a = sample_sparsifier(&net, m, seed).unwrap();
        prop_assert_eq!(&a, &sample_sparsifier(&net, m, seed).unwrap());
        let d = demand(&net, seed + 6);
        prop_assert!(close(lambda_terminal_free(&a, &d).unwrap(), lambda_2hop(&a, &d).unwrap().value, 1e-6));
    }

    #[test]
    fn exact_constructions_keep_cuts(seed in 0u64..10_000, k in 2usize..7) {
        let (net, tree) = series_parallel(24, k, CapRange::default(), seed).unwrap();
        prop_assert!(certify_cuts(&net, &sp_sparsifier(&net, &tree).unwrap()).unwrap().exact);
        let small = random_connected(10, k.min(4), 0.3, CapRange::default(), seed).unwrap();
        let m = mimick_small(&small).unwrap();
        prop_assert_eq!(all_bipartition_cuts(&m), all_bipartition_cuts(&small));
    }

    #[test]
    fn certify_swaps_and_repeats(seed in 0u64..10_000) {
        let net = random_connected(8, 3, 0.35, CapRange::default(), seed).unwrap();
        let other = clump(&net, &random_partition(&net, seed + 7)).unwrap();
        let ds = demand_grid(&net, &DemandSpec::Random { n: 8, seed }).unwrap();
        let fwd = certify(&net, &other, &ds, 2.0).unwrap();
        let back = certify(&other, &net, &ds, 2.0).unwrap();
        prop_assert!(close(fwd.lower, back.upper, 1e-12) && close(fwd.upper, back.lower, 1e-12));
        prop_assert!(fwd.lower <= 1.0 + 1e-6);
        let again = certify(&net, &other, &ds, 2.0).unwrap();
        prop_assert_eq!(serde_json::to_string(&fwd).unwrap(), serde_json::to_string(&again).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn sketch_is_sound_and_monotone(seed in 0u64..10_000) {
        let net = random_connected(6, 2 + (seed % 2) as usize, 0.4, CapRange::default(), seed).unwrap();
        let sk = DemandSketch::build(&net, 0.25).unwrap();
        let st = sk.storage();
        prop_assert!(st.entries as f64 <= st.bound);
        let e = 1.0 + sk.epsilon();
        for i in 0..20 {
            let d = demand(&net, seed * 100 + i);
            let q = sk.query(&d).unwrap();
            let l = lambda_value(&net, &d).unwrap();
            prop_assert!(q <= e * l * (1.0 + 1e-9) && q >= l / e * (1.0 - 1e-9), "{} vs {}", q, l);
            let (s, t, x) = d.iter().next().map(|(s, t, x)| (s.to_string(), t.to_string(), x)).unwrap();
            let smaller = d.clone().with(&s, &t, x * 0.5);
            prop_assert!(sk.query(&smaller).unwrap() >= q * (1.0 - 1e-9));
        }
    }
}
