mod common;

use std::collections::BTreeSet;

use common::{bfs_components, inner_rect, oracle_crossing, tri_window};

use hyperperc::harris::{harris_check, FinitePoset, PosetMeasure, ProductUpset};
use hyperperc::ncpart::{enumerate_nc, NCPartition, ProbabilityVector};
use hyperperc::percsim::{
    clusters, crossing, estimate_crossing, sample_from_uniforms, thread_pool, Configuration, Direction,
};
use hyperperc::szgen::{connection_vector, Generator, GeneratorMode, Poly};
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn partition() -> impl Strategy<Value = NCPartition> {
    (1usize..=8).prop_flat_map(|k| {
        let all = enumerate_nc(k).unwrap();
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

fn partition_pair() -> impl Strategy<Value = (NCPartition, NCPartition)> {
    (1usize..=7).prop_flat_map(|k| {
        let all = enumerate_nc(k).unwrap();
        let n = all.len();
        (0..n, 0..n).prop_map(move |(i, j)| (all[i].clone(), all[j].clone()))
    })
}

proptest! {
    #[test]
    fn dual_squared_is_rotation(pi in partition()) {
        prop_assert_eq!(pi.dual().dual(), pi.rotate(-1));
    }

    #[test]
    fn block_counts_sum(pi in partition()) {
        prop_assert_eq!(pi.num_blocks() + pi.dual().num_blocks(), pi.k() + 1);
    }

    #[test]
    fn dual_is_antitone((a, b) in partition_pair()) {
        if a.refines(&b).unwrap() {
            prop_assert!(b.dual().refines(&a.dual()).unwrap());
        }
    }

    #[test]
    fn dual_is_bijective(k in 1usize..=8) {
        let all = enumerate_nc(k).unwrap();
        let duals: BTreeSet<NCPartition> = all.iter().map(NCPartition::dual).collect();
        prop_assert_eq!(duals.len(), all.len());
    }
}

/// Connected random graph: a spanning tree plus extra bonds, three terminals.
fn small_generator() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<u8>)> {
    (3usize..=5).prop_flat_map(|n| {
        let tree = proptest::collection::vec(0usize..100, n - 1);
        let extra = proptest::collection::vec((0..n, 0..n), 0..4);
        (Just(n), tree, extra, proptest::collection::vec(0u8..3, n + 4)).prop_map(|(n, tree, extra, kinds)| {
            let mut bonds: Vec<(usize, usize)> = tree.iter().enumerate().map(|(i, r)| (r % (i + 1), i + 1)).collect();
            bonds.extend(extra.into_iter().filter(|(a, b)| a != b));
            let kinds = kinds[..bonds.len()].to_vec();
            (n, bonds, kinds)
        })
    })
}

fn bond_poly(kind: u8) -> Poly {
    match kind {
        0 => Poly::p(),
        1 => Poly::p().one_minus(),
        _ => Poly::p().pow(2),
    }
}

/// Brute force over open-bond subsets with a plain union-find.
fn oracle_connection(n: usize, bonds: &[(usize, usize)], probs: &[f64], terminals: &[usize]) -> Vec<(Vec<Vec<usize>>, f64)> {
    let mut out: std::collections::BTreeMap<Vec<Vec<usize>>, f64> = Default::default();
    for mask in 0u32..(1 << bonds.len()) {
        let mut weight = 1.0;
        let mut comp: Vec<usize> = (0..n).collect();
        for (i, &(a, b)) in bonds.iter().enumerate() {
            if mask & (1 << i) != 0 {
                weight *= probs[i];
                let (ca, cb) = (comp[a], comp[b]);
                for c in comp.iter_mut() {
                    if *c == cb {
                        *c = ca;
                    }
                }
            } else {
                weight *= 1.0 - probs[i];
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (j, &t) in terminals.iter().enumerate() {
            match blocks.iter_mut().find(|b| comp[terminals[b[0]]] == comp[t]) {
                Some(b) => b.push(j),
                None => blocks.push(vec![j]),
            }
        }
        *out.entry(blocks).or_insert(0.0) += weight;
    }
    out.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connection_vector_matches_enumeration((n, bonds, kinds) in small_generator()) {
        let probs: Vec<Poly> = kinds.iter().map(|&k| bond_poly(k)).collect();
        let g = Generator::new(n, vec![0, 1, 2], bonds.clone(), probs.clone(), GeneratorMode::Bond).unwrap();
        let cv = connection_vector(&g).unwrap();
        prop_assert_eq!(cv.total(), Poly::constant(BigRational::one()));
        let p = 0.3;
        let numeric: Vec<f64> = probs.iter().map(|q| q.eval(p)).collect();
        for (blocks, expected) in oracle_connection(n, &bonds, &numeric, &[0, 1, 2]) {
            let got = cv.entries().get(&blocks).map(|f| f.eval(p)).unwrap_or(0.0);
            prop_assert!((got - expected).abs() < 1e-12, "{:?}: {} vs {}", blocks, got, expected);
        }
    }
}

/// Adjacent comparable pairs `(i, i + 1)` of the canonical order of NC(3).
fn covering_steps() -> Vec<usize> {
    let all = enumerate_nc(3).unwrap();
    (0..all.len() - 1).filter(|&i| all[i].refines(&all[i + 1]).unwrap() && all[i] != all[i + 1]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn coupled_monotonicity(
        weights in proptest::collection::vec(0.05f64..1.0, 5),
        shift in 0.0f64..1.0,
        step_pick in 0usize..8,
        uniforms in proptest::collection::vec(0.0f64..1.0, 200),
    ) {
        let all = enumerate_nc(3).unwrap();
        let steps = covering_steps();
        let i = steps[step_pick % steps.len()];
        let total: f64 = weights.iter().sum();
        let base: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut moved = base.clone();
        let delta = base[i] * shift;
        moved[i] -= delta;
        moved[i + 1] += delta;
        let low = ProbabilityVector::new(3, all.iter().cloned().zip(base)).unwrap();
        let high = ProbabilityVector::new(3, all.iter().cloned().zip(moved)).unwrap();
        let w = tri_window(6);
        let u = &uniforms[..w.edges().len()];
        let a = sample_from_uniforms(&w, &[low], u).unwrap();
        let b = sample_from_uniforms(&w, &[high], u).unwrap();
        for e in 0..w.edges().len() {
            prop_assert!(a.state(&w, e).refines(b.state(&w, e)).unwrap());
        }
        let (ca, cb) = (clusters(&w, &a), clusters(&w, &b));
        for v in 0..ca.len() {
            prop_assert_eq!(cb[ca[v]], cb[v], "clusters of the lower sample must merge in the upper one");
        }
        let rect = inner_rect(&w);
        for dir in [Direction::Horizontal, Direction::Vertical] {
            if crossing(&w, &a, rect, dir).unwrap() {
                prop_assert!(crossing(&w, &b, rect, dir).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn clusters_match_bfs(seed_states in proptest::collection::vec(0usize..5, 64), size in 4i32..=6) {
        let w = tri_window(size);
        let states = seed_states.iter().cycle().take(w.edges().len()).copied().collect();
        let config = Configuration::from_indices(&w, states).unwrap();
        prop_assert_eq!(clusters(&w, &config), bfs_components(&w, &config, &|_| true));
        if size == 6 {
            let rect = inner_rect(&w);
            for dir in [Direction::Horizontal, Direction::Vertical] {
                prop_assert_eq!(crossing(&w, &config, rect, dir).unwrap(), oracle_crossing(&w, &config, rect, dir));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimates_ignore_thread_count(seed in any::<u64>(), p in 0.3f64..0.7) {
        let w = tri_window(10);
        let rect = inner_rect(&w);
        let v = [ProbabilityVector::competition(p).unwrap()];
        let run = |threads| {
            thread_pool(threads).unwrap().install(|| estimate_crossing(&w, &v, rect, Direction::Horizontal, 200, seed).unwrap())
        };
        prop_assert_eq!(run(1), run(3));
    }
}

/// Weights, power `n`, and generating tuples of two upsets.
type HarrisCase = (Vec<f64>, usize, Vec<Vec<usize>>, Vec<Vec<usize>>);

fn harris_case() -> impl Strategy<Value = HarrisCase> {
    (1usize..=2).prop_flat_map(|n| {
        let tuple = proptest::collection::vec(0usize..5, n);
        (
            proptest::collection::vec(0.01f64..1.0, 5),
            Just(n),
            proptest::collection::vec(tuple.clone(), 1..=3),
            proptest::collection::vec(tuple, 1..=3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn harris_bound_on_nc3((weights, n, ga, gb) in harris_case()) {
        let (poset, _) = FinitePoset::noncrossing(3).unwrap();
        let total: f64 = weights.iter().sum();
        let measure = PosetMeasure::new(poset.clone(), weights.iter().map(|w| w / total).collect()).unwrap();
        let a = ProductUpset::generated(&poset, n, &ga).unwrap();
        let b = ProductUpset::generated(&poset, n, &gb).unwrap();
        let r = harris_check(&measure, n, &a, &b).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn harris_bound_on_fans(m in 2usize..=4, weights in proptest::collection::vec(0.01f64..1.0, 5), mask_a in 1u32..32, mask_b in 1u32..32) {
        let poset = FinitePoset::fan(m);
        let size = poset.len();
        let total: f64 = weights[..size].iter().sum();
        let measure = PosetMeasure::new(poset.clone(), weights[..size].iter().map(|w| w / total).collect()).unwrap();
        let upset = |mask: u32| {
            let seeds: Vec<usize> = (0..size).filter(|i| mask & (1 << i) != 0).collect();
            ProductUpset::explicit(&poset, 1, poset.up_closure(&seeds)).unwrap()
        };
        let r = harris_check(&measure, 1, &upset(mask_a), &upset(mask_b)).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }
}
