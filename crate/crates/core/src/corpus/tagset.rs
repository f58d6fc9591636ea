use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of part-of-speech classes every tagset must define.
pub const POS_TAGSET_SIZE: usize = 20;

const REQUIRED_POS: [&str; 7] = ["ADJ", "NOUN", "PROPN", "ADP", "VERB", "DET", "UNKNOWN"];

/// The 17 Universal Dependencies tags plus UNKNOWN and sentence boundary tags.
const UNIVERSAL_POS: [&str; POS_TAGSET_SIZE] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ",
    "SYM", "VERB", "X", "UNKNOWN", "BOS", "EOS",
];

/// Ordered part-of-speech label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTagSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PosTagSet {
    pub fn universal() -> Self {
        Self::from_labels(UNIVERSAL_POS.iter().map(|s| s.to_string()).collect()).expect("built-in tagset is valid")
    }

    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        if labels.len() != POS_TAGSET_SIZE {
            return Err(Error::Config(format!(
                "part-of-speech tagset must have {POS_TAGSET_SIZE} labels, found {}",
                labels.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate part-of-speech label `{l}`")));
            }
        }
        for req in REQUIRED_POS {
            if !index.contains_key(req) {
                return Err(Error::Config(format!("part-of-speech tagset lacks `{req}`")));
            }
        }
        Ok(PosTagSet { labels, index })
    }

    /// Reads one label per line; blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_labels(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
}

impl Default for PosTagSet {
    fn default() -> Self {
        Self::universal()
    }
}

/// Fashion entity classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NerTag {
    Brand,
    Category,
    Colour,
    Attribute,
    Unknown,
}

impl NerTag {
    pub const ALL: [NerTag; 5] = [
        NerTag::Brand,
        NerTag::Category,
        NerTag::Colour,
        NerTag::Attribute,
        NerTag::Unknown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<NerTag> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NerTag::Brand => "BRAND",
            NerTag::Category => "CATEGORY",
            NerTag::Colour => "COLOUR",
            NerTag::Attribute => "ATTRIBUTE",
            NerTag::Unknown => "UNKNOWN",
        }
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|t| t.as_str().to_string()).collect()
    }
}

impl fmt::Display for NerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NerTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Label(format!("unknown entity tag `{s}`")))
    }
}
