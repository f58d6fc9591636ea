mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::is_projective_tree;
use fashion_parser::corpus::{
    fashion_templates, generate_corpus, load_corpus, save_corpus, AnnotatedSentence, Lexicon, NerTag, PosTagSet,
};
use proptest::prelude::*;

fn generate(n: usize, seed: u64) -> Vec<AnnotatedSentence> {
    generate_corpus(
        &Lexicon::fashion(),
        &fashion_templates(),
        &PosTagSet::universal(),
        n,
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_sentences_are_well_formed(seed in any::<u64>()) {
        let tags = PosTagSet::universal();
        for s in generate(50, seed) {
            let n = s.len();
            prop_assert!(n > 0);
            prop_assert_eq!(s.pos.len(), n);
            prop_assert_eq!(s.head.len(), n);
            prop_assert_eq!(s.op.len(), n);
            prop_assert_eq!(s.ner.len(), n);
            prop_assert!(is_projective_tree(&s.head), "{:?} {:?}", s.token_strs(), s.head);
            prop_assert!(s.pos.iter().all(|p| tags.index_of(p).is_some()));
            prop_assert!(s.validate(&tags).is_ok());
        }
    }
}

#[test]
fn entity_tags_come_from_the_matching_lexicon_lists() {
    let lex = Lexicon::fashion();
    let as_set =
        |v: &[fashion_parser::corpus::Token]| v.iter().map(|t| t.as_str().to_string()).collect::<BTreeSet<_>>();
    let colours = as_set(&lex.colours);
    let categories = as_set(&lex.categories);
    let mut attributes = as_set(&lex.attributes);
    attributes.extend(as_set(&lex.materials));
    let brands: BTreeSet<String> = lex.brand_words().into_iter().map(String::from).collect();

    for s in generate(3000, 4) {
        for (t, tag) in s.tokens.iter().zip(&s.ner) {
            let w = t.as_str();
            let ok = match tag {
                NerTag::Colour => colours.contains(w),
                NerTag::Category => categories.contains(w),
                NerTag::Attribute => attributes.contains(w),
                NerTag::Brand => brands.contains(w),
                NerTag::Unknown => true,
            };
            assert!(ok, "{w} tagged {tag} in {:?}", s.token_strs());
        }
        // the root is always a category
        let root = s.head.iter().position(|&h| h == -1).unwrap();
        assert_eq!(s.ner[root], NerTag::Category, "{:?}", s.token_strs());
    }
}

#[test]
fn multi_token_brands_are_tagged_as_whole_spans() {
    let lex = Lexicon::fashion();
    let multi: Vec<Vec<&str>> = lex
        .brands
        .iter()
        .filter(|b| b.len() > 1)
        .map(|b| b.iter().map(|t| t.as_str()).collect())
        .collect();
    assert!(!multi.is_empty());
    let mut seen = 0;
    for s in generate(3000, 8) {
        let words = s.token_strs();
        for b in &multi {
            for i in 0..words.len().saturating_sub(b.len() - 1) {
                if words[i..i + b.len()] == b[..] && s.ner[i] == NerTag::Brand {
                    seen += 1;
                    assert!(s.ner[i..i + b.len()].iter().all(|&t| t == NerTag::Brand), "{words:?}");
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn ambiguous_forms_occur_in_several_roles() {
    let lex = Lexicon::fashion();
    let data = generate(5000, 1);
    let mut roles: BTreeMap<&str, (BTreeSet<NerTag>, BTreeSet<&str>)> = BTreeMap::new();
    for s in &data {
        for ((t, ner), pos) in s.tokens.iter().zip(&s.ner).zip(&s.pos) {
            let e = roles.entry(t.as_str()).or_default();
            e.0.insert(*ner);
            e.1.insert(pos.as_str());
        }
    }
    assert!(!lex.ambiguous.is_empty());
    for w in &lex.ambiguous {
        let (ner, pos) = &roles[w.as_str()];
        assert!(ner.len() >= 2, "{} NER tags {ner:?}", w.as_str());
        assert!(pos.len() >= 2, "{} PoS tags {pos:?}", w.as_str());
    }
}

#[test]
fn saved_corpus_reloads_field_by_field() {
    let data = generate(200, 12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    save_corpus(&data, &path).unwrap();
    let back = load_corpus(&path, &PosTagSet::universal()).unwrap();
    assert_eq!(back, data);
    assert_eq!(generate(200, 12), data);
    assert_ne!(generate(200, 13), data);
}
