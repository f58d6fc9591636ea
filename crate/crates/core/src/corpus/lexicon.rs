use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use super::tagset::PosTagSet;
use super::tokenize::{normalize_tokenize, Token};
use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.txt");

/// A closed class of function words sharing one part-of-speech tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionWords {
    pub pos: String,
    pub words: Vec<Token>,
}

/// Fashion vocabulary grouped by the slot role each entry can fill.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    /// Brand names; each entry is one or more tokens.
    pub brands: Vec<Vec<Token>>,
    pub colours: Vec<Token>,
    pub categories: Vec<Token>,
    pub attributes: Vec<Token>,
    pub materials: Vec<Token>,
    pub function_words: BTreeMap<String, FunctionWords>,
    /// Surface forms allowed to belong to several entity lists.
    pub ambiguous: BTreeSet<Token>,
}

#[derive(Debug, Clone, Copy)]
enum Section {
    Brands,
    Colours,
    Categories,
    Attributes,
    Materials,
    Ambiguous,
}

impl Lexicon {
    /// The built-in fashion lexicon.
    pub fn fashion() -> Self {
        Self::parse(DEFAULT_LEXICON, Path::new("<builtin lexicon>")).expect("built-in lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: PathBuf::from(origin),
            line,
            message,
        };
        let mut lex = Lexicon::default();
        enum Current {
            None,
            Entity(Section),
            Function(String),
        }
        let mut current = Current::None;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = match header {
                    "brands" => Current::Entity(Section::Brands),
                    "colours" => Current::Entity(Section::Colours),
                    "categories" => Current::Entity(Section::Categories),
                    "attributes" => Current::Entity(Section::Attributes),
                    "materials" => Current::Entity(Section::Materials),
                    "ambiguous" => Current::Entity(Section::Ambiguous),
                    other => {
                        let spec = other
                            .strip_prefix("function:")
                            .ok_or_else(|| err(lineno, format!("unknown section `[{other}]`")))?;
                        let (role, pos) = spec
                            .split_once('=')
                            .ok_or_else(|| err(lineno, format!("function section `{spec}` lacks `=TAG`")))?;
                        let role = role.trim().to_string();
                        lex.function_words.insert(
                            role.clone(),
                            FunctionWords {
                                pos: pos.trim().to_string(),
                                words: Vec::new(),
                            },
                        );
                        Current::Function(role)
                    }
                };
                continue;
            }

            let tokens = normalize_tokenize(line);
            if tokens.is_empty() {
                return Err(err(lineno, format!("entry `{line}` is empty after normalization")));
            }
            let single = |tokens: Vec<Token>| -> Result<Token> {
                match <[Token; 1]>::try_from(tokens) {
                    Ok([t]) => Ok(t),
                    Err(_) => Err(err(lineno, format!("entry `{line}` must be a single token"))),
                }
            };
            match &current {
                Current::None => {
                    return Err(err(lineno, "entry outside of any section".into()));
                }
                Current::Entity(Section::Brands) => lex.brands.push(tokens),
                Current::Entity(Section::Colours) => lex.colours.push(single(tokens)?),
                Current::Entity(Section::Categories) => lex.categories.push(single(tokens)?),
                Current::Entity(Section::Attributes) => lex.attributes.push(single(tokens)?),
                Current::Entity(Section::Materials) => lex.materials.push(single(tokens)?),
                Current::Entity(Section::Ambiguous) => {
                    lex.ambiguous.insert(single(tokens)?);
                }
                Current::Function(role) => {
                    let t = single(tokens)?;
                    lex.function_words
                        .get_mut(role)
                        .expect("section registered")
                        .words
                        .push(t);
                }
            }
        }
        lex.check_disjoint()?;
        Ok(lex)
    }

    /// The entity lists may only overlap on the declared ambiguous forms, and
    /// that set must be non-empty.
    fn check_disjoint(&self) -> Result<()> {
        if self.ambiguous.is_empty() {
            return Err(Error::Config("lexicon declares no ambiguous forms".into()));
        }
        let mut owner: HashMap<&Token, &'static str> = HashMap::new();
        let brand_words: BTreeSet<&Token> = self.brands.iter().flatten().collect();
        let lists: [(&'static str, Vec<&Token>); 5] = [
            ("brands", brand_words.into_iter().collect()),
            ("colours", self.colours.iter().collect()),
            ("categories", self.categories.iter().collect()),
            ("attributes", self.attributes.iter().collect()),
            ("materials", self.materials.iter().collect()),
        ];
        for (name, words) in &lists {
            let mut seen = BTreeSet::new();
            for &w in words {
                if !seen.insert(w) {
                    continue;
                }
                if let Some(prev) = owner.insert(w, name) {
                    if prev != *name && !self.ambiguous.contains(w) {
                        return Err(Error::Config(format!(
                            "`{w}` appears in both {prev} and {name} but is not declared ambiguous"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks every function-word tag against `tagset`.
    pub fn validate_tags(&self, tagset: &PosTagSet) -> Result<()> {
        for (role, fw) in &self.function_words {
            if tagset.index_of(&fw.pos).is_none() {
                return Err(Error::Config(format!(
                    "function role `{role}` uses unknown tag `{}`",
                    fw.pos
                )));
            }
        }
        Ok(())
    }

    /// Part-of-speech tag of a known function word.
    pub fn function_pos(&self, word: &str) -> Option<&str> {
        self.function_words
            .values()
            .find(|fw| fw.words.iter().any(|w| w.as_str() == word))
            .map(|fw| fw.pos.as_str())
    }

    /// Brand vocabulary flattened to single words.
    pub fn brand_words(&self) -> BTreeSet<&str> {
        self.brands.iter().flatten().map(Token::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_lexicon_is_valid() {
        let lex = Lexicon::fashion();
        assert!(lex.brands.iter().any(|b| b.len() == 2 && b[0].as_str() == "golden"));
        assert!(lex.colours.iter().any(|c| c.as_str() == "golden"));
        assert!(lex.ambiguous.iter().any(|a| a.as_str() == "red"));
        assert_eq!(lex.function_pos("from"), Some("ADP"));
        lex.validate_tags(&PosTagSet::universal()).unwrap();
        for c in lex.colours.iter().chain(&lex.categories) {
            assert_eq!(Token::new(c.as_str()).as_ref(), Some(c));
        }
    }

    #[test]
    fn undeclared_overlap_is_rejected() {
        let text = "[brands]\nred valentino\n[colours]\nred\n[ambiguous]\ngolden\n";
        let e = Lexicon::parse(text, Path::new("t")).unwrap_err();
        assert!(e.to_string().contains("`red`"), "{e}");
        let ok = "[brands]\nred valentino\n[colours]\nred\n[ambiguous]\nred\n";
        assert!(Lexicon::parse(ok, Path::new("t")).is_ok());
    }

    #[test]
    fn empty_ambiguity_set_is_rejected() {
        let text = "[colours]\nred\n[categories]\ndress\n";
        assert!(Lexicon::parse(text, Path::new("t")).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "[colours]\nred\n[bogus]\n";
        match Lexicon::parse(text, Path::new("lex.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "[colours]\ndark red\n";
        assert!(matches!(
            Lexicon::parse(text, Path::new("t")),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
