//! Dependency-tree representation shared by the corpus and the parser.
//!
//! A tree over `n` tokens is a head vector: `heads[i]` is the 0-based index of
//! the head of token `i`, or [`ROOT`] for the single root token.

use std::fmt;

/// Head sentinel of the root token.
pub const ROOT: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeError {
    Empty,
    HeadOutOfRange { token: usize, head: i32 },
    SelfLoop(usize),
    NoRoot,
    MultipleRoots(usize, usize),
    Cycle(usize),
    NonProjective { head: usize, dependent: usize },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::Empty => write!(f, "empty head list"),
            TreeError::HeadOutOfRange { token, head } => {
                write!(f, "head {head} of token {token} is out of range")
            }
            TreeError::SelfLoop(t) => write!(f, "token {t} is its own head"),
            TreeError::NoRoot => write!(f, "no root token"),
            TreeError::MultipleRoots(a, b) => write!(f, "tokens {a} and {b} are both roots"),
            TreeError::Cycle(t) => write!(f, "token {t} lies on a cycle"),
            TreeError::NonProjective { head, dependent } => {
                write!(f, "arc {head}->{dependent} is non-projective")
            }
        }
    }
}

impl std::error::Error for TreeError {}

/// Checks that `heads` is a single-rooted, acyclic, projective tree and
/// returns the root index.
pub fn validate(heads: &[i32]) -> Result<usize, TreeError> {
    let n = heads.len();
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let mut root = None;
    for (i, &h) in heads.iter().enumerate() {
        if h == ROOT {
            if let Some(r) = root {
                return Err(TreeError::MultipleRoots(r, i));
            }
            root = Some(i);
        } else if h < 0 || h as usize >= n {
            return Err(TreeError::HeadOutOfRange { token: i, head: h });
        } else if h as usize == i {
            return Err(TreeError::SelfLoop(i));
        }
    }
    let root = root.ok_or(TreeError::NoRoot)?;

    // Walking up from any token must reach the root within n steps.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while heads[cur] != ROOT {
            cur = heads[cur] as usize;
            steps += 1;
            if steps > n {
                return Err(TreeError::Cycle(start));
            }
        }
    }

    // Projective: every token strictly inside an arc descends from its head.
    for (d, &h) in heads.iter().enumerate() {
        if h == ROOT {
            continue;
        }
        let h = h as usize;
        let (lo, hi) = if h < d { (h, d) } else { (d, h) };
        for k in lo + 1..hi {
            if !is_ancestor(heads, h, k) {
                return Err(TreeError::NonProjective { head: h, dependent: d });
            }
        }
    }
    Ok(root)
}

fn is_ancestor(heads: &[i32], ancestor: usize, mut node: usize) -> bool {
    loop {
        if node == ancestor {
            return true;
        }
        match heads[node] {
            ROOT => return false,
            h => node = h as usize,
        }
    }
}
