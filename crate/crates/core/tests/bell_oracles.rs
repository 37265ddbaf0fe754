//! The bell engine checked against brute-force enumeration of label tuples.

use std::collections::BTreeMap;

use aepp_core::bell::{
    parity_prob, werner, Axis, BellLabel, DenseJointDistribution, ExchangeableDistribution, PairDistribution,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All label tuples over `k` pairs with their probability, as plain vectors.
fn tuples(d: &DenseJointDistribution) -> Vec<(Vec<BellLabel>, f64)> {
    (0..d.probs().len()).map(|i| (d.labels_at(i), d.probs()[i])).collect()
}

fn apply_bxor(labels: &mut [BellLabel], source: usize, target: usize) {
    let a_t = labels[target].a;
    let b_s = labels[source].b;
    labels[source].a ^= a_t;
    labels[target].b ^= b_s;
}

fn random_dist(rng: &mut ChaCha8Rng, k: usize) -> DenseJointDistribution {
    let raw: Vec<f64> = (0..1usize << (2 * k)).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    DenseJointDistribution::from_probs(k, raw.into_iter().map(|x| x / total).collect()).unwrap()
}

#[test]
fn random_fanouts_match_tuple_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let k = 8;
    for _ in 0..100 {
        let d = random_dist(&mut rng, k);
        let common = rng.random_range(0..k);
        let targets: Vec<usize> = (0..k).filter(|&i| i != common && rng.random_bool(0.6)).collect();
        let fast = d.bxor_fanout(&targets, common).unwrap();

        let mut expected = vec![0.0; d.probs().len()];
        for (mut labels, p) in tuples(&d) {
            for &t in &targets {
                apply_bxor(&mut labels, t, common);
            }
            let idx = labels.iter().fold(0usize, |acc, l| (acc << 2) | l.code());
            expected[idx] += p;
        }
        for (x, y) in fast.probs().iter().zip(&expected) {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn measurement_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 1..=5 {
        let d = random_dist(&mut rng, k);
        for pair in 0..k {
            for axis in [Axis::Z, Axis::X] {
                for outcome in [false, true] {
                    let (p, rest) = d.measure(pair, axis, outcome).unwrap();
                    let mut mass = 0.0;
                    let mut cond: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                    for (labels, q) in tuples(&d) {
                        if labels[pair].revealed(axis) == outcome {
                            mass += q;
                            let mut rest_labels: Vec<usize> = labels.iter().map(|l| l.code()).collect();
                            rest_labels.remove(pair);
                            *cond.entry(rest_labels).or_default() += q;
                        }
                    }
                    assert!((p - mass).abs() < 1e-12);
                    if k == 1 {
                        continue;
                    }
                    let rest = rest.unwrap();
                    for (codes, q) in cond {
                        let labels: Vec<BellLabel> = codes.into_iter().map(BellLabel::from_code).collect();
                        let got = rest.prob(&labels).unwrap();
                        assert!(
                            (got - q / mass).abs() < 1e-12,
                            "k={k} pair={pair} {axis} {outcome}: {got} vs {}",
                            q / mass
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn marginals_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = random_dist(&mut rng, 4);
    let keep = [3usize, 1];
    let m = d.marginal(&keep).unwrap();
    let mut expected = [[0.0; 4]; 4];
    for (labels, q) in tuples(&d) {
        expected[labels[1].code()][labels[3].code()] += q;
    }
    for (i, row) in expected.iter().enumerate() {
        for (j, q) in row.iter().enumerate() {
            let got = m.prob(&[BellLabel::from_code(i), BellLabel::from_code(j)]).unwrap();
            assert!((got - q).abs() < 1e-14);
        }
    }
}

#[test]
fn exchangeable_matches_dense() {
    for k in [2usize, 4, 8] {
        for f in [0.6, 0.75, 0.9, 0.99] {
            for parity in [false, true] {
                for axis in [Axis::Z, Axis::X] {
                    let e = ExchangeableDistribution::new(k, werner(f).unwrap(), parity, axis).unwrap();
                    let dense = e.to_dense().unwrap();
                    assert!(
                        (e.entropy() - dense.entropy()).abs() < 1e-10,
                        "K={k} F={f} parity={parity} {axis}"
                    );
                }
            }
        }
    }
}

#[test]
fn parity_matches_enumeration() {
    for k in 1..=8u32 {
        for f in [0.3, 0.5, 0.8, 0.97] {
            let w = werner(f).unwrap();
            let d = DenseJointDistribution::iid(&w, k as usize).unwrap();
            let even: f64 = tuples(&d)
                .into_iter()
                .filter(|(labels, _)| labels.iter().filter(|l| l.b).count() % 2 == 0)
                .map(|(_, q)| q)
                .sum();
            let p = parity_prob(f, u64::from(k)).unwrap();
            assert!((p - even).abs() < 1e-12, "K={k} F={f}: {p} vs {even}");
        }
    }
}

proptest! {
    #[test]
    fn bxor_preserves_mass_and_entropy(seed in any::<u64>(), s in 0usize..4, t in 0usize..4) {
        prop_assume!(s != t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dist(&mut rng, 4);
        let e = d.bxor(s, t).unwrap();
        prop_assert!((e.total() - 1.0).abs() < 1e-12);
        prop_assert!((e.entropy() - d.entropy()).abs() < 1e-12);
        // a BXOR is an involution
        let back = e.bxor(s, t).unwrap();
        prop_assert_eq!(back.probs(), d.probs());
    }

    #[test]
    fn werner_is_a_distribution(f in 0.0f64..=1.0) {
        let w: PairDistribution = werner(f).unwrap();
        prop_assert!((w.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        prop_assert!((0.0..=2.0).contains(&w.entropy()));
    }
}
