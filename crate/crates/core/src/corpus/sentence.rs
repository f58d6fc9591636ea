use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::tagset::{NerTag, PosTagSet};
use super::tokenize::Token;
use crate::dep::{tree_to_oplabels, OpLabel};
use crate::error::{Error, Result};
use crate::tree;

/// A sentence with all four annotation layers aligned to its tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub tokens: Vec<Token>,
    pub pos: Vec<String>,
    pub head: Vec<i32>,
    pub op: Vec<OpLabel>,
    pub ner: Vec<NerTag>,
}

impl AnnotatedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token_strs(&self) -> Vec<&str> {
        self.tokens.iter().map(Token::as_str).collect()
    }

    /// Checks alignment, tagset membership, tree shape, and that `op` is the
    /// labelling derived from `head`.
    pub fn validate(&self, tagset: &PosTagSet) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::Invariant("sentence has no tokens".into()));
        }
        for (name, len) in [
            ("pos", self.pos.len()),
            ("head", self.head.len()),
            ("op", self.op.len()),
            ("ner", self.ner.len()),
        ] {
            if len != n {
                return Err(Error::Invariant(format!(
                    "aligned lengths: {name} has {len} entries for {n} tokens"
                )));
            }
        }
        if let Some(bad) = self.pos.iter().find(|p| tagset.index_of(p).is_none()) {
            return Err(Error::Invariant(format!("tagset membership: unknown pos tag `{bad}`")));
        }
        let derived = tree_to_oplabels(&self.head)
            .map_err(|e| Error::Invariant(format!("projective single-rooted tree: {e}")))?;
        if derived != self.op {
            return Err(Error::Invariant("op labels must equal those derived from heads".into()));
        }
        debug_assert!(tree::validate(&self.head).is_ok());
        Ok(())
    }
}

/// Writes one JSON object per line.
pub fn save_corpus(sentences: &[AnnotatedSentence], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in sentences {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads and validates a JSONL corpus. Errors carry the 1-based line number.
pub fn load_corpus(path: &Path, tagset: &PosTagSet) -> Result<Vec<AnnotatedSentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: PathBuf::from(path),
            line: i + 1,
            message,
        };
        let s: AnnotatedSentence = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        s.validate(tagset).map_err(|e| err(e.to_string()))?;
        out.push(s);
    }
    Ok(out)
}
