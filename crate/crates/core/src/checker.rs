//! Rewrite sequences and the proof checker.
//!
//! A sequence is written as a flat token list: each step is zero or more
//! `left`/`right` selectors followed by a category name, e.g.
//! `DistributeRight right Commute`. Each step's path is read against the
//! program produced by the previous steps.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::axioms::{apply_at, Category, Path, RewriteError, Selector};
use crate::lang::Expr;

/// Marker token for a corrupted (non-equivalent) pair.
pub const NOT_EQUAL: &str = "Not_equal";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub path: Path,
    pub category: Category,
}

impl RewriteStep {
    pub fn new(path: Path, category: Category) -> RewriteStep {
        RewriteStep { path, category }
    }

    pub fn at_root(category: Category) -> RewriteStep {
        RewriteStep::new(Path::root(), category)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RewriteSequence {
    pub steps: Vec<RewriteStep>,
}

impl RewriteSequence {
    pub fn new(steps: Vec<RewriteStep>) -> RewriteSequence {
        RewriteSequence { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: RewriteStep) {
        self.steps.push(step);
    }

    /// Selector words plus category names.
    pub fn token_len(&self) -> usize {
        self.steps.iter().map(|s| s.path.len() + 1).sum()
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.steps.iter().map(|s| s.category)
    }
}

impl fmt::Display for RewriteSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for step in &self.steps {
            for sel in step.path.selectors() {
                if !first {
                    f.write_str(" ")?;
                }
                f.write_str(sel.token())?;
                first = false;
            }
            if !first {
                f.write_str(" ")?;
            }
            f.write_str(step.category.name())?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("unknown sequence token `{token}` at position {position}")]
    UnknownToken { token: String, position: usize },
    #[error("{count} trailing selector(s) without a category")]
    Unterminated { count: usize },
}

/// Parses a whitespace-separated token list. Selectors accumulate until a
/// category closes the step.
pub fn parse_sequence(tokens: &str) -> Result<RewriteSequence, SequenceError> {
    let mut seq = RewriteSequence::default();
    let mut path = Path::root();
    for (position, tok) in tokens.split_whitespace().enumerate() {
        if let Ok(sel) = tok.parse::<Selector>() {
            path.push(sel);
        } else if let Ok(category) = tok.parse::<Category>() {
            seq.push(RewriteStep::new(std::mem::take(&mut path), category));
        } else {
            return Err(SequenceError::UnknownToken {
                token: tok.to_string(),
                position,
            });
        }
    }
    if !path.is_empty() {
        return Err(SequenceError::Unterminated { count: path.len() });
    }
    Ok(seq)
}

impl FromStr for RewriteSequence {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sequence(s)
    }
}

/// Outcome of checking a candidate proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proven,
    StepFailed { index: usize, reason: RewriteError },
    MismatchAfterRewrites { result: Expr },
}

impl Verdict {
    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::Proven)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proven => f.write_str("Proven"),
            Verdict::StepFailed { index, reason } => write!(f, "StepFailed at step {index}: {reason}"),
            Verdict::MismatchAfterRewrites { result } => {
                write!(f, "MismatchAfterRewrites: rewritten program is {result}")
            }
        }
    }
}

/// Applies `seq` to `a` step by step and compares the result with `b`.
pub fn check(a: &Expr, seq: &RewriteSequence, b: &Expr) -> Verdict {
    match replay(a, seq) {
        Err((index, reason)) => Verdict::StepFailed { index, reason },
        Ok(result) if result == *b => Verdict::Proven,
        Ok(result) => Verdict::MismatchAfterRewrites { result },
    }
}

/// Program obtained by applying every step of `seq` to `a`.
pub fn replay(a: &Expr, seq: &RewriteSequence) -> Result<Expr, (usize, RewriteError)> {
    seq.steps.iter().enumerate().try_fold(a.clone(), |cur, (i, step)| {
        apply_at(&cur, &step.path, step.category).map_err(|e| (i, e))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    const PROG_A: &str = "( d *s ( ( ( ns e ) /s a ) -s c ) )";
    const PROG_B: &str = "( ( d *s ( ( ns e ) /s a ) ) -s ( c *s d ) )";

    #[test]
    fn parses_listing_sequence() {
        let seq = parse_sequence("DistributeRight right Commute").unwrap();
        assert_eq!(
            seq.steps,
            vec![
                RewriteStep::at_root(Category::DistributeRight),
                RewriteStep::new(Path::from(vec![Selector::Right]), Category::Commute),
            ]
        );
        assert_eq!(seq.to_string(), "DistributeRight right Commute");
        assert_eq!(seq.token_len(), 3);
    }

    #[test]
    fn parse_edge_cases() {
        assert!(parse_sequence("").unwrap().is_empty());
        assert_eq!(
            parse_sequence("left left"),
            Err(SequenceError::Unterminated { count: 2 })
        );
        assert!(matches!(
            parse_sequence("Commute up Noop"),
            Err(SequenceError::UnknownToken { position: 1, .. })
        ));
        assert!(matches!(
            parse_sequence(NOT_EQUAL),
            Err(SequenceError::UnknownToken { .. })
        ));
    }

    #[test]
    fn listing_is_proven() {
        let a = parse(PROG_A).unwrap();
        let b = parse(PROG_B).unwrap();
        let seq = parse_sequence("DistributeRight right Commute").unwrap();
        assert_eq!(check(&a, &seq, &b), Verdict::Proven);
    }

    #[test]
    fn empty_sequence_on_identical_programs() {
        let a = parse(PROG_A).unwrap();
        assert_eq!(check(&a, &RewriteSequence::default(), &a), Verdict::Proven);
    }

    #[test]
    fn commuting_subtraction_fails() {
        let a = parse("( a -s b )").unwrap();
        let b = parse("( b -s a )").unwrap();
        let seq = parse_sequence("Commute").unwrap();
        assert!(matches!(
            check(&a, &seq, &b),
            Verdict::StepFailed {
                index: 0,
                reason: RewriteError::NotApplicable { .. }
            }
        ));
    }

    #[test]
    fn wrong_target_is_a_mismatch() {
        let a = parse("( a +s b )").unwrap();
        let b = parse("( a +s b )").unwrap();
        let seq = parse_sequence("Commute").unwrap();
        match check(&a, &seq, &b) {
            Verdict::MismatchAfterRewrites { result } => assert_eq!(result.print(), "( b +s a )"),
            v => panic!("unexpected {v}"),
        }
    }

    #[test]
    fn bad_path_fails_step() {
        let a = parse("( a +s b )").unwrap();
        let seq = parse_sequence("Commute left left Commute").unwrap();
        assert!(matches!(
            check(&a, &seq, &a),
            Verdict::StepFailed {
                index: 1,
                reason: RewriteError::Path { .. }
            }
        ));
    }

    #[test]
    fn unary_child_uses_left() {
        let a = parse("( ns ( a +s b ) )").unwrap();
        let b = parse("( ns ( b +s a ) )").unwrap();
        assert!(check(&a, &parse_sequence("left Commute").unwrap(), &b).is_proven());
        assert!(!check(&a, &parse_sequence("right Commute").unwrap(), &b).is_proven());
    }
}
