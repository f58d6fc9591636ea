mod common;

use common::{all_projective_trees, is_canonical, is_projective_tree};
use fashion_parser::corpus::{fashion_templates, generate_corpus, Lexicon, PosTagSet};
use fashion_parser::dep::{labels_to_tree, run_transition_executor, tree_to_oplabels, OpLabel};
use fashion_parser::tree;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn enumerator_counts_match_known_sequence() {
    // single-rooted projective trees: 1, 2, 7, 30, 143, 728, 3876, 21318
    let counts: Vec<usize> = (1..=8).map(|n| all_projective_trees(n).len()).collect();
    assert_eq!(counts, [1, 2, 7, 30, 143, 728, 3876, 21318]);
}

#[test]
fn round_trip_holds_exactly_on_canonical_trees() {
    for n in 1..=8 {
        let mut canonical = 0;
        for heads in all_projective_trees(n) {
            assert!(is_projective_tree(&heads), "{heads:?}");
            assert!(tree::validate(&heads).is_ok(), "{heads:?}");
            let labels = tree_to_oplabels(&heads).unwrap();
            assert_eq!(labels.len(), n);
            assert_eq!(labels.iter().filter(|&&l| l == OpLabel::Shift).count(), 1);
            let back = labels_to_tree(&labels);
            let same = back.heads == heads;
            assert_eq!(same, is_canonical(&heads), "{heads:?} -> {:?}", back.heads);
            if same {
                assert!(!back.repaired, "{heads:?}");
            }
            canonical += same as usize;
        }
        // one canonical tree per (root, split of post-root tokens into chains)
        let expect: usize = (0..n).map(|r| 1usize << (n - 1 - r).saturating_sub(1)).sum();
        assert_eq!(canonical, expect, "n = {n}");
    }
}

#[test]
fn random_label_sequences_decode_to_valid_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=12);
        let labels: Vec<OpLabel> = (0..n)
            .map(|_| OpLabel::from_index(rng.random_range(0..OpLabel::ALL.len())).unwrap())
            .collect();
        let trace = run_transition_executor(&labels);
        assert!(is_projective_tree(&trace.heads), "{labels:?} -> {:?}", trace.heads);
        assert!(trace.steps.len() <= 2 * n + 1);
        assert_eq!(trace.heads, labels_to_tree(&labels).heads);
        let well_formed = labels.iter().filter(|&&l| l == OpLabel::Shift).count() == 1
            && tree_to_oplabels(&trace.heads).unwrap() == labels;
        if well_formed {
            assert!(!trace.repaired, "{labels:?}");
        }
    }
}

proptest! {
    #[test]
    fn executor_states_partition_the_tokens(
        labels in prop::collection::vec(prop::sample::select(OpLabel::ALL.to_vec()), 1..15)
    ) {
        let n = labels.len();
        let trace = run_transition_executor(&labels);
        let mut attached = vec![false; n];
        for step in &trace.steps {
            if let Some(t) = step.transition {
                use fashion_parser::dep::Transition::*;
                match t {
                    LeftArc { dependent, .. } | RightArc { dependent, .. } => {
                        prop_assert!(!attached[dependent]);
                        attached[dependent] = true;
                    }
                    Shift { .. } => {}
                }
            }
            let popped = attached.iter().filter(|&&a| a).count();
            prop_assert_eq!(step.stack.len() + (n - step.buffer_front) + popped, n);
            prop_assert!(step.stack.windows(2).all(|w| w[0] < w[1]));
        }
        let arcs = trace.arcs();
        prop_assert_eq!(arcs.len(), n - 1);
        let mut deps: Vec<usize> = arcs.iter().map(|a| a.1).collect();
        deps.sort_unstable();
        deps.dedup();
        prop_assert_eq!(deps.len(), n - 1);
    }
}

#[test]
fn generated_corpus_round_trips_completely() {
    let data = generate_corpus(
        &Lexicon::fashion(),
        &fashion_templates(),
        &PosTagSet::universal(),
        2000,
        5,
    )
    .unwrap();
    for s in &data {
        assert!(!s.op.contains(&OpLabel::Unknown));
        assert_eq!(tree_to_oplabels(&s.head).unwrap(), s.op);
        let back = labels_to_tree(&s.op);
        assert_eq!(back.heads, s.head, "{:?}", s.token_strs());
        assert!(!back.repaired);
    }
}
