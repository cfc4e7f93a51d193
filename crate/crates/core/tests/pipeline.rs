mod common;

use std::collections::HashSet;

use eqrw_core::dataset::{self, BuildConfig, PruneRules};
use eqrw_core::{check, gen_src, gen_unequal, GenConfig, Outcome};

#[test]
fn emitted_samples_obey_every_rule() {
    let cfg = BuildConfig::new(GenConfig::with_seed(21));
    let corpus = dataset::build(&cfg, 5_000).unwrap();
    let rules = PruneRules::default();
    let mut seen = HashSet::new();
    for s in &corpus.samples {
        let seq = s.sequence().unwrap();
        assert!(check(&s.prog_a, seq, &s.prog_b).is_proven());
        assert_ne!(s.prog_a, s.prog_b);
        assert!(s.prog_a.node_count() + s.prog_b.node_count() <= rules.max_pair_tokens);
        for p in [&s.prog_a, &s.prog_b] {
            assert!(p.node_count() <= rules.max_program_nodes);
            assert!(p.depth_edges() <= rules.max_depth_edges);
        }
        assert!((1..=rules.max_steps).contains(&seq.len()));
        assert!(seq.token_len() <= rules.max_seq_tokens);
        assert!(
            seen.insert(dataset::format_sample(s)),
            "duplicate {}",
            dataset::format_sample(s)
        );
    }
}

#[test]
fn file_round_trip_is_byte_identical() {
    let cfg = BuildConfig {
        not_equal_frac: 0.1,
        ..BuildConfig::new(GenConfig::with_seed(22))
    };
    let corpus = dataset::build(&cfg, 10_000).unwrap();
    assert!(corpus.samples.iter().any(|s| s.outcome == Outcome::NotEqual));
    let mut first = Vec::new();
    dataset::write(&mut first, &corpus.samples).unwrap();
    let back = dataset::read(first.as_slice()).unwrap();
    assert_eq!(back, corpus.samples);
    let mut second = Vec::new();
    dataset::write(&mut second, &back).unwrap();
    assert_eq!(first, second);
    for line in String::from_utf8(first).unwrap().lines() {
        assert_eq!(line.split('\t').count(), 3);
    }
}

#[test]
fn split_at_published_proportions() {
    let corpus = dataset::build(&BuildConfig::new(GenConfig::with_seed(23)), 100_000).unwrap();
    let parts = dataset::split(&corpus.samples, [0.8, 0.1, 0.1], 3).unwrap();
    assert_eq!(
        (parts.train.len(), parts.validation.len(), parts.test.len()),
        (80_000, 10_000, 10_000)
    );
    let train: HashSet<_> = parts.train.iter().collect();
    assert!(parts.test.iter().chain(&parts.validation).all(|s| !train.contains(s)));
    let novelty = dataset::novelty(&parts.train, &parts.test);
    println!("test pairs with a program unseen in train: {:.1}%", 100.0 * novelty);
    assert!(novelty > 0.5);
}

#[test]
fn unequal_pairs_are_distinguishable() {
    let cfg = GenConfig::with_seed(24);
    let (mut pairs, mut distinguished, mut i) = (0, 0, 0u64);
    while pairs < 1000 {
        let mut rng = cfg.sample_rng(i);
        i += 1;
        let a = gen_src(&cfg, &mut rng);
        let Ok(b) = gen_unequal(&cfg, &a, &mut rng) else {
            continue;
        };
        pairs += 1;
        distinguished += usize::from(common::compare(&a, &b, 10, i).disagree > 0);
    }
    assert!(distinguished >= 990, "only {distinguished} of 1000 pairs told apart");
}
