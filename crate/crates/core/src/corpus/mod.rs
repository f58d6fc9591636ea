//! Tokenization, fashion lexicons, template-based corpus generation, and the
//! JSONL corpus format.

mod generate;
mod lexicon;
mod sentence;
mod tagset;
mod template;
mod tokenize;

pub use generate::{generate_corpus, split_dataset};
pub use lexicon::{FunctionWords, Lexicon};
pub use sentence::{load_corpus, save_corpus, AnnotatedSentence};
pub use tagset::{NerTag, PosTagSet, POS_TAGSET_SIZE};
pub use template::{
    fashion_templates, load_templates, parse_templates, FilledToken, HeadRule, Slot, SlotKind, SlotRole, Template,
    TemplateKind,
};
pub use tokenize::{join_tokens, normalize_tokenize, Token};
