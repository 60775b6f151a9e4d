use proptest::prelude::*;

use randmap_lattice::partition::{
    all_partitions, graph_components_oracle, is_k_free, join, join_all, join_streaming,
    kfree_spectrum, meet, partition_from_map, refines, SetPartition,
};

fn map_strategy(max_n: usize) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(0..n as u32, n))
}

fn partition_triple(max_n: usize) -> impl Strategy<Value = (SetPartition, SetPartition, SetPartition)> {
    (1..=max_n).prop_flat_map(|n| {
        let m = || prop::collection::vec(0..n as u32, n).prop_map(|v| partition_from_map(&v).unwrap());
        (m(), m(), m())
    })
}

fn maps_strategy(max_n: usize, max_t: usize) -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (1..=max_n, 1..=max_t).prop_flat_map(|(n, t)| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(0..n as u32, n), t),
        )
    })
}

fn is_canonical(labels: &[u32]) -> bool {
    let mut next = 0;
    labels.iter().all(|&l| {
        let ok = l <= next;
        if l == next {
            next += 1;
        }
        ok
    })
}

/// Achievable block-union sizes by visiting every subset of blocks.
fn power_set_sums(sizes: &[usize]) -> Vec<bool> {
    let n: usize = sizes.iter().sum();
    let mut hit = vec![false; n + 1];
    for mask in 0u64..(1u64 << sizes.len()) {
        let s: usize = (0..sizes.len())
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| sizes[b])
            .sum();
        hit[s] = true;
    }
    hit
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn lattice_laws((p, q, r) in partition_triple(8)) {
        let pq = meet(&p, &q).unwrap();
        let pj = join(&p, &q).unwrap();
        prop_assert_eq!(&pq, &meet(&q, &p).unwrap());
        prop_assert_eq!(&pj, &join(&q, &p).unwrap());
        prop_assert_eq!(meet(&pq, &r).unwrap(), meet(&p, &meet(&q, &r).unwrap()).unwrap());
        prop_assert_eq!(join(&pj, &r).unwrap(), join(&p, &join(&q, &r).unwrap()).unwrap());
        prop_assert_eq!(&meet(&p, &p).unwrap(), &p);
        prop_assert_eq!(&join(&p, &p).unwrap(), &p);
        prop_assert_eq!(&meet(&p, &pj).unwrap(), &p);
        prop_assert_eq!(&join(&p, &pq).unwrap(), &p);
        prop_assert!(refines(&pq, &p).unwrap());
        prop_assert!(refines(&p, &pj).unwrap());
        prop_assert!(is_canonical(pq.labels()) && is_canonical(pj.labels()));
        prop_assert_eq!(refines(&p, &q).unwrap(), meet(&p, &q).unwrap() == p);
    }

    #[test]
    fn map_partition_semantics(map in map_strategy(40)) {
        let p = partition_from_map(&map).unwrap();
        prop_assert!(is_canonical(p.labels()));
        for i in 0..map.len() {
            for j in 0..map.len() {
                prop_assert_eq!(p.same_block(i, j), map[i] == map[j]);
            }
        }
        prop_assert_eq!(p.to_string().parse::<SetPartition>().unwrap(), p);
    }

    #[test]
    fn streaming_join_equals_fold((n, maps) in maps_strategy(64, 5)) {
        let parts: Vec<_> = maps.iter().map(|m| partition_from_map(m).unwrap()).collect();
        let fold = parts[1..].iter().fold(parts[0].clone(), |acc, p| join(&acc, p).unwrap());
        let streamed = join_streaming(n, &maps).unwrap();
        prop_assert_eq!(&streamed, &fold);
        prop_assert_eq!(&join_all(&parts).unwrap(), &fold);
        prop_assert_eq!(&graph_components_oracle(n, &maps).unwrap(), &streamed);
    }

    #[test]
    fn kfree_matches_power_set((labels, n) in (1usize..=24).prop_flat_map(|n| (prop::collection::vec(0..n as u32, n), Just(n)))) {
        let p = SetPartition::from_labels(&labels).unwrap();
        let sizes = p.block_sizes();
        prop_assume!(sizes.len() <= 20);
        let oracle = power_set_sums(&sizes);
        let spec = kfree_spectrum(&p);
        for s in 1..=n {
            prop_assert_eq!(spec.contains(s), oracle[s]);
        }
        for k in 1..n {
            prop_assert_eq!(is_k_free(&p, k).unwrap(), !oracle[k]);
        }
    }
}

#[test]
fn join_agrees_with_graph_oracle_exhaustively_for_n_le_4() {
    for n in 1..=4usize {
        let maps: Vec<Vec<u32>> = (0..n.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let v = (code % n) as u32;
                        code /= n;
                        v
                    })
                    .collect()
            })
            .collect();
        for a in &maps {
            assert_eq!(
                partition_from_map(a).unwrap(),
                graph_components_oracle(n, &[a]).unwrap()
            );
            for b in &maps {
                let joined = join(&partition_from_map(a).unwrap(), &partition_from_map(b).unwrap()).unwrap();
                assert_eq!(joined, graph_components_oracle(n, &[a, b]).unwrap());
            }
        }
    }
}

#[test]
fn meet_is_greatest_lower_bound_exhaustively() {
    for n in 1..=5 {
        let parts: Vec<_> = all_partitions(n).collect();
        for p in &parts {
            for q in &parts {
                let m = meet(p, q).unwrap();
                let j = join(p, q).unwrap();
                for r in &parts {
                    if refines(r, p).unwrap() && refines(r, q).unwrap() {
                        assert!(refines(r, &m).unwrap());
                    }
                    if refines(p, r).unwrap() && refines(q, r).unwrap() {
                        assert!(refines(&j, r).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn bottom_and_top_are_identities() {
    for n in 1..=6 {
        let bottom = SetPartition::finest(n).unwrap();
        let top = SetPartition::coarsest(n).unwrap();
        for p in all_partitions(n) {
            assert!(refines(&bottom, &p).unwrap());
            assert!(refines(&p, &top).unwrap());
            assert_eq!(meet(&p, &top).unwrap(), p);
            assert_eq!(join(&p, &bottom).unwrap(), p);
        }
    }
}
