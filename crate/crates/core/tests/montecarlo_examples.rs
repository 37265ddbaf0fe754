//! Sampled frequencies against closed forms.

use aepp_core::bell::{parity_prob, BellLabel};
use aepp_core::montecarlo::{estimate, sample_block, DEFAULT_SIGMA};
use aepp_core::protocols::{Family, ProtocolSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn band(p: f64, shots: u64) -> f64 {
    DEFAULT_SIGMA * (p * (1.0 - p) / shots as f64).sqrt()
}

#[test]
fn werner_label_frequencies() {
    let shots = 1_000_000;
    for (f, target) in [(0.25, [0.25; 4]), (0.85, [0.85, 0.05, 0.05, 0.05])] {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels = sample_block(f, shots, &mut rng).unwrap();
        let mut counts = [0u64; 4];
        for l in labels {
            counts[l.code()] += 1;
        }
        for (c, p) in counts.iter().zip(target) {
            let freq = *c as f64 / shots as f64;
            assert!((freq - p).abs() < band(p, shots as u64), "F={f}: {freq} vs {p}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert!(sample_block(1.0, 100, &mut rng)
        .unwrap()
        .into_iter()
        .all(|l| l == BellLabel::PHI_PLUS));
}

#[test]
fn agree_frequency_of_aepp_4() {
    let shots = 1_000_000;
    let r = estimate(&ProtocolSpec::aepp_a(2).unwrap(), 0.9, shots, 11).unwrap();
    let p = parity_prob(0.9, 4).unwrap();
    let agree = r.branches.iter().find(|b| b.key == "0").unwrap();
    assert!((agree.frequency - p).abs() < band(p, shots));
    assert_eq!(r.branches.iter().map(|b| b.count).sum::<u64>(), shots);
}

#[test]
fn maneva_smolin_discard_frequency() {
    let shots = 1_000_000;
    let r = estimate(&ProtocolSpec::maneva_smolin(3).unwrap(), 0.8, shots, 12).unwrap();
    let discard = 1.0 - parity_prob(0.8, 8).unwrap();
    let b = r.branches.iter().find(|b| b.key == "1").unwrap();
    assert!((b.frequency - discard).abs() < band(discard, shots));
}

#[test]
fn pure_pairs_never_leave_the_agree_leaf() {
    for spec in [
        ProtocolSpec::aepp_a(6).unwrap(),
        ProtocolSpec::aepp_p(2).unwrap(),
        ProtocolSpec::of(Family::LeungShor),
    ] {
        let r = estimate(&spec, 1.0, 20_000, 1).unwrap();
        let hit: Vec<_> = r.branches.iter().filter(|b| b.count > 0).collect();
        assert_eq!(hit.len(), 1, "{spec}");
        assert!(hit[0].key.chars().all(|c| c == '0'));
        assert!(r.within(DEFAULT_SIGMA));
    }
}

#[test]
fn recurrence_population_matches_round_probabilities() {
    for family in [Family::Recurrence, Family::ModifiedRecurrence] {
        let r = estimate(&ProtocolSpec::of(family), 0.8, 400_000, 4).unwrap();
        assert!(r.within(DEFAULT_SIGMA), "{family:?}: max z {}", r.max_abs_z());
        assert!(r.branches.iter().any(|b| b.key.starts_with("round1")));
        assert!((0.0..=1.0).contains(&r.empirical_yield));
    }
}

#[test]
fn report_is_independent_of_thread_count() {
    let spec = ProtocolSpec::aepp_a(3).unwrap();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| estimate(&spec, 0.85, 55_000, 77).unwrap());
    let parallel = estimate(&spec, 0.85, 55_000, 77).unwrap();
    assert_eq!(serial, parallel);
}
