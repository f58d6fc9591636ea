use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lexicon::Lexicon;
use super::sentence::AnnotatedSentence;
use super::tagset::PosTagSet;
use super::template::Template;
use crate::dep::tree_to_oplabels;
use crate::error::{Error, Result};

/// Generates `n` annotated sentences by filling templates from the lexicon.
///
/// Templates are drawn in proportion to their weights and every slot filler
/// uniformly. Output is a pure function of the inputs and `seed`.
pub fn generate_corpus(
    lexicon: &Lexicon,
    templates: &[Template],
    tagset: &PosTagSet,
    n: usize,
    seed: u64,
) -> Result<Vec<AnnotatedSentence>> {
    if n == 0 {
        return Err(Error::Config("corpus size must be at least 1".into()));
    }
    if templates.is_empty() {
        return Err(Error::Config("no templates given".into()));
    }
    lexicon.validate_tags(tagset)?;
    for t in templates {
        t.check(lexicon)?;
        for i in 0..t.slots.len() {
            let pos = t.slot_pos(i, lexicon)?;
            if tagset.index_of(&pos).is_none() {
                return Err(Error::Config(format!(
                    "template `{}` uses unknown tag `{pos}`",
                    t.source
                )));
            }
        }
    }

    let weights = WeightedIndex::new(templates.iter().map(|t| t.weight))
        .map_err(|e| Error::Config(format!("template weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let template = &templates[weights.sample(&mut rng)];
        let filled = template.fill(lexicon, |_, k| rng.random_range(0..k))?;
        let head: Vec<i32> = filled.iter().map(|f| f.head).collect();
        let op = tree_to_oplabels(&head)
            .map_err(|e| Error::Invariant(format!("template `{}` produced an invalid tree: {e}", template.source)))?;
        out.push(AnnotatedSentence {
            tokens: filled.iter().map(|f| f.token.clone()).collect(),
            pos: filled.iter().map(|f| f.pos.clone()).collect(),
            head,
            op,
            ner: filled.iter().map(|f| f.ner).collect(),
        });
    }
    Ok(out)
}

/// Shuffles with `seed` and splits so that the first part holds
/// `round(ratio * n)` items.
pub fn split_dataset<T>(items: Vec<T>, ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let n = items.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (ratio * n as f64).round() as usize;
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    let mut take =
        |idx: &[usize]| -> Vec<T> { idx.iter().map(|&i| slots[i].take().expect("each index once")).collect() };
    let train = take(&order[..n_train]);
    let test = take(&order[n_train..]);
    Ok((train, test))
}
