//! Per-token transition labels and the stack/buffer machinery that turns a
//! label sequence back into a dependency tree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{self, TreeError, ROOT};

/// Operation label attached to each token.
///
/// A token whose head lies to its right is labelled `LeftArc`, one whose head
/// lies to its left `RightArc`, and the root `Shift`. `Unknown` is a
/// model-side class only and never appears in gold annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpLabel {
    Shift,
    LeftArc,
    RightArc,
    Unknown,
}

impl OpLabel {
    pub const ALL: [OpLabel; 4] = [OpLabel::Shift, OpLabel::LeftArc, OpLabel::RightArc, OpLabel::Unknown];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<OpLabel> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpLabel::Shift => "SHIFT",
            OpLabel::LeftArc => "LEFT_ARC",
            OpLabel::RightArc => "RIGHT_ARC",
            OpLabel::Unknown => "UNKNOWN",
        }
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.as_str().to_string()).collect()
    }
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Label(format!("unknown operation label `{s}`")))
    }
}

/// Labels each token by the direction of its head.
pub fn tree_to_oplabels(heads: &[i32]) -> std::result::Result<Vec<OpLabel>, TreeError> {
    tree::validate(heads)?;
    Ok(heads
        .iter()
        .enumerate()
        .map(|(i, &h)| match h {
            ROOT => OpLabel::Shift,
            h if h as usize > i => OpLabel::LeftArc,
            _ => OpLabel::RightArc,
        })
        .collect())
}

/// A transition applied by the executor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Transition {
    Shift { token: usize },
    LeftArc { head: usize, dependent: usize },
    RightArc { head: usize, dependent: usize },
}

/// Executor state after a transition (or the initial state).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub transition: Option<Transition>,
    pub stack: Vec<usize>,
    /// Index of the first token still in the buffer.
    pub buffer_front: usize,
}

/// Full record of one executor run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionTrace {
    pub steps: Vec<TraceStep>,
    /// Stack left over once the buffer is exhausted, before repair.
    pub final_stack: Vec<usize>,
    /// Arcs added by end-of-buffer repair, as `(head, dependent)`.
    pub forced: Vec<(usize, usize)>,
    pub heads: Vec<i32>,
    /// True when the label sequence was not a well-formed encoding and the
    /// tree had to be repaired.
    pub repaired: bool,
}

impl TransitionTrace {
    /// All arcs as `(head, dependent)` pairs, in order of creation.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.steps
            .iter()
            .filter_map(|s| match s.transition {
                Some(Transition::LeftArc { head, dependent }) | Some(Transition::RightArc { head, dependent }) => {
                    Some((head, dependent))
                }
                _ => None,
            })
            .chain(self.forced.iter().copied())
            .collect()
    }
}

/// Runs the greedy stack algorithm over `labels`, recording every state.
///
/// With `s1` on top of `s2`: if `s2` is `LeftArc` it becomes a dependent of
/// `s1`; otherwise if `s1` is `RightArc` it becomes a dependent of `s2`;
/// otherwise the next buffer token is shifted. Tokens left on the stack at the
/// end attach to the first `Shift`-labelled one (or to the last remaining
/// token), so the result is always a single-rooted projective tree.
pub fn run_transition_executor(labels: &[OpLabel]) -> TransitionTrace {
    let n = labels.len();
    let mut heads = vec![ROOT; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut next = 0;
    let mut steps = vec![TraceStep {
        transition: None,
        stack: Vec::new(),
        buffer_front: 0,
    }];

    loop {
        let len = stack.len();
        let transition = if len >= 2 && labels[stack[len - 2]] == OpLabel::LeftArc {
            let (s1, s2) = (stack[len - 1], stack[len - 2]);
            heads[s2] = s1 as i32;
            stack.remove(len - 2);
            Transition::LeftArc {
                head: s1,
                dependent: s2,
            }
        } else if len >= 2 && labels[stack[len - 1]] == OpLabel::RightArc {
            let (s1, s2) = (stack[len - 1], stack[len - 2]);
            heads[s1] = s2 as i32;
            stack.pop();
            Transition::RightArc {
                head: s2,
                dependent: s1,
            }
        } else if next < n {
            stack.push(next);
            next += 1;
            Transition::Shift { token: next - 1 }
        } else {
            break;
        };
        steps.push(TraceStep {
            transition: Some(transition),
            stack: stack.clone(),
            buffer_front: next,
        });
    }

    let final_stack = stack.clone();
    let mut forced = Vec::new();
    let mut repaired = false;
    if let Some(&last) = stack.last() {
        let root = stack
            .iter()
            .copied()
            .find(|&t| labels[t] == OpLabel::Shift)
            .unwrap_or(last);
        repaired = labels[root] != OpLabel::Shift;
        for &t in &stack {
            if t != root {
                heads[t] = root as i32;
                forced.push((root, t));
                repaired = true;
            }
        }
        heads[root] = ROOT;
    }

    TransitionTrace {
        steps,
        final_stack,
        forced,
        heads,
        repaired,
    }
}

/// Result of decoding a label sequence into a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub heads: Vec<i32>,
    pub repaired: bool,
}

/// Deterministically rebuilds a projective tree from per-token labels.
pub fn labels_to_tree(labels: &[OpLabel]) -> Reconstruction {
    let trace = run_transition_executor(labels);
    Reconstruction {
        heads: trace.heads,
        repaired: trace.repaired,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use OpLabel::*;

    #[test]
    fn labels_follow_head_direction() {
        assert_eq!(tree_to_oplabels(&[1, ROOT]).unwrap(), vec![LeftArc, Shift]);
        assert_eq!(
            tree_to_oplabels(&[ROOT, 0, 1]).unwrap(),
            vec![Shift, RightArc, RightArc]
        );
        assert!(tree_to_oplabels(&[1, 0]).is_err());
        assert!(tree_to_oplabels(&[]).is_err());
    }

    #[test]
    fn simple_reconstructions() {
        assert_eq!(labels_to_tree(&[LeftArc, Shift]).heads, vec![1, ROOT]);
        assert_eq!(labels_to_tree(&[Shift]).heads, vec![ROOT]);
        assert!(!labels_to_tree(&[Shift]).repaired);
        let r = labels_to_tree(&[Unknown]);
        assert_eq!(r.heads, vec![ROOT]);
        assert!(r.repaired);
    }

    #[test]
    fn repair_attaches_leftovers_to_shift_token() {
        // Two roots: the first SHIFT wins, the second is force-attached.
        let r = labels_to_tree(&[Shift, Shift, LeftArc]);
        assert!(r.repaired);
        tree::validate(&r.heads).unwrap();
        assert_eq!(r.heads[0], ROOT);
        // No SHIFT at all: the last remaining token becomes the root.
        let r = labels_to_tree(&[LeftArc, LeftArc]);
        assert_eq!(r.heads, vec![1, ROOT]);
        assert!(r.repaired);
    }

    #[test]
    fn figure_three_query() {
        // white shoes dolce gabbana
        let gold = [1, ROOT, 3, 1];
        let labels = tree_to_oplabels(&gold).unwrap();
        let trace = run_transition_executor(&labels);
        assert_eq!(trace.heads, gold);
        assert_eq!(trace.final_stack, vec![1]);
        assert!(trace.forced.is_empty());
        let mut arcs = trace.arcs();
        arcs.sort();
        assert_eq!(arcs, vec![(1, 0), (1, 3), (3, 2)]);
        assert!(trace.steps.len() <= 2 * gold.len() + 1);
    }
}
