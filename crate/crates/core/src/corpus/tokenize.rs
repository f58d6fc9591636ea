use std::fmt;

use serde::{Deserialize, Serialize};

/// A normalized token: lowercase, non-empty, no whitespace, no leading or
/// trailing punctuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// Wraps `s` if it is already in normalized form.
    pub fn new(s: &str) -> Option<Token> {
        match normalize_piece(s) {
            Some(n) if n == s => Some(Token(n)),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Token::new(&s).ok_or_else(|| format!("`{s}` is not a normalized token"))
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201c}'
                | '\u{201d}'
                | '\u{ab}'
                | '\u{bb}'
                | '\u{2026}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{a1}'
                | '\u{bf}'
        )
}

fn normalize_piece(piece: &str) -> Option<String> {
    let lower = piece.to_lowercase();
    let trimmed = lower.trim_matches(is_punctuation);
    if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
        None
    } else {
        Some(trimmed.to_string())
    }
}

/// Splits on whitespace runs, lowercases, and strips surrounding punctuation.
/// No stemming or lemmatization is applied.
pub fn normalize_tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().filter_map(normalize_piece).map(Token).collect()
}

/// Joins tokens back into a single space-separated string.
pub fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(Token::as_str).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strs(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(Token::as_str).collect()
    }

    #[test]
    fn query_examples() {
        assert_eq!(
            strs(&normalize_tokenize("I want red dresses")),
            ["i", "want", "red", "dresses"]
        );
        assert!(normalize_tokenize("").is_empty());
        assert!(normalize_tokenize(" \t\n ").is_empty());
        assert_eq!(strs(&normalize_tokenize("  Golden   Goose ")), ["golden", "goose"]);
    }

    #[test]
    fn strips_surrounding_punctuation_only() {
        assert_eq!(
            strs(&normalize_tokenize("a gold-tone logo plaque, top handles.")),
            ["a", "gold-tone", "logo", "plaque", "top", "handles"]
        );
        assert_eq!(
            strs(&normalize_tokenize("\u{201c}Dark red\u{201d} , ...")),
            ["dark", "red"]
        );
    }

    #[test]
    fn token_rejects_unnormalized() {
        assert!(Token::new("Red").is_none());
        assert!(Token::new("red,").is_none());
        assert!(Token::new("").is_none());
        assert!(Token::new("red").is_some());
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,40}") {
            let once = normalize_tokenize(&text);
            let twice = normalize_tokenize(&join_tokens(&once));
            prop_assert_eq!(once.clone(), twice);
            for t in &once {
                prop_assert!(!t.as_str().is_empty());
                prop_assert!(!t.as_str().chars().any(char::is_whitespace));
                prop_assert_eq!(Token::new(t.as_str()), Some(t.clone()));
            }
        }
    }
}
