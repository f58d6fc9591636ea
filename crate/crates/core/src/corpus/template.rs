use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use super::lexicon::Lexicon;
use super::tagset::NerTag;
use super::tokenize::Token;
use crate::error::{Error, Result};

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.txt");

/// Lexicon role a template slot draws from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotRole {
    Brand,
    Colour,
    Category,
    Attribute,
    Material,
    Function(String),
}

impl SlotRole {
    fn parse(s: &str) -> Option<SlotRole> {
        Some(match s {
            "brand" => SlotRole::Brand,
            "colour" => SlotRole::Colour,
            "category" => SlotRole::Category,
            "attribute" => SlotRole::Attribute,
            "material" => SlotRole::Material,
            other => SlotRole::Function(other.strip_prefix("function:")?.to_string()),
        })
    }

    /// Entity tag carried by tokens filled from this role. Materials are
    /// reported as attributes since the entity set has no material class.
    pub fn ner(&self) -> NerTag {
        match self {
            SlotRole::Brand => NerTag::Brand,
            SlotRole::Colour => NerTag::Colour,
            SlotRole::Category => NerTag::Category,
            SlotRole::Attribute | SlotRole::Material => NerTag::Attribute,
            SlotRole::Function(_) => NerTag::Unknown,
        }
    }

    /// Default part-of-speech tag for the role.
    pub fn default_pos<'a>(&self, lexicon: &'a Lexicon) -> Result<&'a str> {
        Ok(match self {
            SlotRole::Brand => "PROPN",
            SlotRole::Colour | SlotRole::Attribute => "ADJ",
            SlotRole::Category | SlotRole::Material => "NOUN",
            SlotRole::Function(role) => lexicon
                .function_words
                .get(role)
                .map(|fw| fw.pos.as_str())
                .ok_or_else(|| Error::Config(format!("lexicon has no role `function:{role}`")))?,
        })
    }

    /// Candidate fillers; brands may span several tokens.
    pub fn fillers(&self, lexicon: &Lexicon) -> Result<Vec<Vec<Token>>> {
        let single = |v: &[Token]| v.iter().map(|t| vec![t.clone()]).collect::<Vec<_>>();
        let fillers = match self {
            SlotRole::Brand => lexicon.brands.clone(),
            SlotRole::Colour => single(&lexicon.colours),
            SlotRole::Category => single(&lexicon.categories),
            SlotRole::Attribute => single(&lexicon.attributes),
            SlotRole::Material => single(&lexicon.materials),
            SlotRole::Function(role) => lexicon
                .function_words
                .get(role)
                .map(|fw| single(&fw.words))
                .unwrap_or_default(),
        };
        if fillers.is_empty() {
            return Err(Error::Config(format!("lexicon has no entries for role `{self}`")));
        }
        Ok(fillers)
    }
}

impl fmt::Display for SlotRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotRole::Brand => f.write_str("brand"),
            SlotRole::Colour => f.write_str("colour"),
            SlotRole::Category => f.write_str("category"),
            SlotRole::Attribute => f.write_str("attribute"),
            SlotRole::Material => f.write_str("material"),
            SlotRole::Function(r) => write!(f, "function:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    Literal(Token),
    Fill(SlotRole),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    /// Explicit tag overriding the template's `pos_map`.
    pub pos: Option<String>,
    /// Phrase index for slots after the root; slots sharing an index form one
    /// phrase.
    pub phrase: usize,
}

/// How heads are assigned to a filled template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadRule {
    /// Tokens before the root attach to their right neighbour; each phrase
    /// after the root chains left-to-right and its last token attaches to the
    /// root.
    #[default]
    ChainToRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    Query,
    Description,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub slots: Vec<Slot>,
    /// Index into `slots` of the root category slot.
    pub root: usize,
    pub pos_map: BTreeMap<SlotRole, String>,
    pub head_rule: HeadRule,
    pub kind: TemplateKind,
    pub weight: u32,
    pub source: String,
}

/// One token produced by filling a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilledToken {
    pub token: Token,
    pub pos: String,
    pub ner: NerTag,
    pub head: i32,
}

impl Template {
    /// Parses one template line (without section context).
    pub fn parse(line: &str, kind: TemplateKind) -> std::result::Result<Template, String> {
        let mut rest = line.trim();
        let mut weight = 1;
        if let Some(w) = rest.strip_prefix('@') {
            let (num, tail) = w.split_once(char::is_whitespace).ok_or("weight without body")?;
            weight = num.parse().map_err(|_| format!("bad weight `{num}`"))?;
            if weight == 0 {
                return Err("weight must be positive".into());
            }
            rest = tail.trim();
        }

        let mut slots = Vec::new();
        let mut marked_root = None;
        let mut phrase = 0;
        let mut in_group = false;
        for piece in rest.split_whitespace() {
            match piece {
                "(" if in_group => return Err("nested groups".into()),
                "(" => {
                    in_group = true;
                    phrase += 1;
                    continue;
                }
                ")" if !in_group => return Err("unbalanced `)`".into()),
                ")" => {
                    in_group = false;
                    continue;
                }
                _ => {}
            }
            if !in_group {
                phrase += 1;
            }
            if let Some(inner) = piece.strip_prefix('<').and_then(|p| p.strip_suffix('>')) {
                let (inner, is_root) = match inner.strip_suffix('!') {
                    Some(i) => (i, true),
                    None => (inner, false),
                };
                let (role, pos) = match inner.split_once(':') {
                    Some((r, t)) if r != "function" => (r.to_string(), Some(t.to_string())),
                    _ => match inner.strip_prefix("function:").and_then(|r| r.split_once(':')) {
                        Some((r, t)) => (format!("function:{r}"), Some(t.to_string())),
                        None => (inner.to_string(), None),
                    },
                };
                let role = SlotRole::parse(&role).ok_or_else(|| format!("unknown role `{role}`"))?;
                if is_root {
                    if role != SlotRole::Category {
                        return Err("only a category slot can be the root".into());
                    }
                    if marked_root.replace(slots.len()).is_some() {
                        return Err("more than one root marker".into());
                    }
                }
                slots.push(Slot {
                    kind: SlotKind::Fill(role),
                    pos,
                    phrase,
                });
            } else {
                let (word, pos) = match piece.split_once('/') {
                    Some((w, t)) => (w, Some(t.to_string())),
                    None => (piece, None),
                };
                let token = Token::new(word).ok_or_else(|| format!("literal `{word}` is not normalized"))?;
                slots.push(Slot {
                    kind: SlotKind::Literal(token),
                    pos,
                    phrase,
                });
            }
        }
        if in_group {
            return Err("unclosed `(`".into());
        }
        let root = match marked_root {
            Some(r) => r,
            None => slots
                .iter()
                .position(|s| s.kind == SlotKind::Fill(SlotRole::Category))
                .ok_or("template has no category slot")?,
        };
        if slots
            .iter()
            .enumerate()
            .any(|(i, s)| i != root && s.phrase == slots[root].phrase)
        {
            return Err("the root cannot be inside a group".into());
        }
        Ok(Template {
            slots,
            root,
            pos_map: BTreeMap::new(),
            head_rule: HeadRule::ChainToRoot,
            kind,
            weight,
            source: line.trim().to_string(),
        })
    }

    /// Part-of-speech tag for slot `i`.
    pub fn slot_pos(&self, i: usize, lexicon: &Lexicon) -> Result<String> {
        let slot = &self.slots[i];
        if let Some(p) = &slot.pos {
            return Ok(p.clone());
        }
        match &slot.kind {
            SlotKind::Fill(role) => match self.pos_map.get(role) {
                Some(p) => Ok(p.clone()),
                None => role.default_pos(lexicon).map(str::to_string),
            },
            SlotKind::Literal(word) => lexicon.function_pos(word.as_str()).map(str::to_string).ok_or_else(|| {
                Error::Config(format!(
                    "literal `{word}` in template `{}` has no part-of-speech tag",
                    self.source
                ))
            }),
        }
    }

    /// Checks every role and literal against the lexicon.
    pub fn check(&self, lexicon: &Lexicon) -> Result<()> {
        for (i, slot) in self.slots.iter().enumerate() {
            if let SlotKind::Fill(role) = &slot.kind {
                role.fillers(lexicon)?;
            }
            self.slot_pos(i, lexicon)?;
        }
        Ok(())
    }

    /// Expands the template with the chosen filler for every slot and assigns
    /// tags and heads. `choose(role, n)` picks a filler index in `0..n`.
    pub fn fill(
        &self,
        lexicon: &Lexicon,
        mut choose: impl FnMut(&SlotRole, usize) -> usize,
    ) -> Result<Vec<FilledToken>> {
        let mut out: Vec<FilledToken> = Vec::new();
        // (first token index, last token index, phrase) per slot
        let mut spans = Vec::with_capacity(self.slots.len());
        for (i, slot) in self.slots.iter().enumerate() {
            let pos = self.slot_pos(i, lexicon)?;
            let start = out.len();
            match &slot.kind {
                SlotKind::Literal(t) => out.push(FilledToken {
                    token: t.clone(),
                    pos,
                    ner: NerTag::Unknown,
                    head: 0,
                }),
                SlotKind::Fill(role) => {
                    let fillers = role.fillers(lexicon)?;
                    let pick = &fillers[choose(role, fillers.len())];
                    for t in pick {
                        out.push(FilledToken {
                            token: t.clone(),
                            pos: pos.clone(),
                            ner: role.ner(),
                            head: 0,
                        });
                    }
                }
            }
            spans.push((start, out.len() - 1, slot.phrase));
        }
        self.assign_heads(&mut out, &spans);
        Ok(out)
    }

    fn assign_heads(&self, out: &mut [FilledToken], spans: &[(usize, usize, usize)]) {
        let root = spans[self.root].1;
        for (i, tok) in out.iter_mut().enumerate().take(root) {
            tok.head = i as i32 + 1;
        }
        out[root].head = crate::tree::ROOT;
        let n = out.len();
        let mut i = root + 1;
        while i < n {
            // The phrase containing token i ends at the last token of the last
            // slot sharing its phrase index.
            let phrase = spans.iter().find(|s| s.0 <= i && i <= s.1).expect("token in span").2;
            let end = spans.iter().filter(|s| s.2 == phrase).map(|s| s.1).max().expect("span");
            for (k, tok) in out.iter_mut().enumerate().take(end).skip(i) {
                tok.head = k as i32 + 1;
            }
            out[end].head = root as i32;
            i = end + 1;
        }
    }

    /// Lower bound on the share of entity tokens in any fill of this template
    /// (brands counted as one token).
    pub fn min_entity_density(&self) -> f64 {
        let entities = self
            .slots
            .iter()
            .filter(|s| matches!(&s.kind, SlotKind::Fill(r) if r.ner() != NerTag::Unknown))
            .count();
        entities as f64 / self.slots.len() as f64
    }
}

/// Parses a template file with `[query]` / `[description]` sections.
pub fn parse_templates(text: &str, origin: &Path) -> Result<Vec<Template>> {
    let mut kind = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: String| Error::Parse {
            path: PathBuf::from(origin),
            line: i + 1,
            message,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[query]" => kind = Some(TemplateKind::Query),
            "[description]" => kind = Some(TemplateKind::Description),
            _ if line.starts_with('[') && line.ends_with(']') => {
                return Err(err(format!("unknown section `{line}`")));
            }
            _ => {
                let k = kind.ok_or_else(|| err("template outside of a section".into()))?;
                out.push(Template::parse(line, k).map_err(err)?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{} defines no templates", origin.display())));
    }
    Ok(out)
}

pub fn load_templates(path: &Path) -> Result<Vec<Template>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_templates(&text, path)
}

/// The built-in query and description templates.
pub fn fashion_templates() -> Vec<Template> {
    parse_templates(DEFAULT_TEMPLATES, Path::new("<builtin templates>")).expect("built-in templates parse")
}
