//! Bounded breadth-first proof search over single-axiom rewrites.
//!
//! Successors of a program are all `(position, category)` pairs with a
//! matching rule, positions in pre-order and categories in declaration
//! order. Programs already seen are not expanded again, so the first proof
//! found is a shortest one.

use std::time::{Duration, Instant};

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::axioms::{self, match_root, replace_at, subtree, Category, Path};
use crate::checker::{check, RewriteSequence, RewriteStep};
use crate::lang::{Expr, TypeTag};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Longest sequence considered.
    pub max_steps: usize,
    /// Maximum number of programs expanded.
    pub max_expansions: usize,
    pub time_budget: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_steps: 5,
            max_expansions: 200_000,
            time_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn with_max_steps(max_steps: usize) -> SearchConfig {
        SearchConfig {
            max_steps,
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error("programs have different types ({0} vs {1})")]
    TypeMismatch(TypeTag, TypeTag),
    #[error("no proof of at most {max_steps} step(s) exists")]
    NotFoundWithinDepth { max_steps: usize },
    #[error("expansion budget exhausted after {expanded} programs")]
    BudgetExceeded { expanded: usize },
    #[error("time budget exhausted after {expanded} programs")]
    TimeExceeded { expanded: usize },
}

struct State {
    prog: Expr,
    parent: usize,
    step: Option<RewriteStep>,
}

/// Every single-rewrite successor of `e`, in tie-break order.
pub fn successors(e: &Expr) -> Vec<(RewriteStep, Expr)> {
    let mut out = Vec::new();
    for_each_successor(e, |path, category, next| {
        out.push((RewriteStep::new(path.clone(), category), next));
        false
    });
    out
}

/// Calls `f` on each successor until it returns `true`.
fn for_each_successor(e: &Expr, mut f: impl FnMut(&Path, Category, Expr) -> bool) {
    for path in axioms::positions(e) {
        let node = subtree(e, &path).expect("position exists");
        if node.is_terminal() {
            continue;
        }
        for category in Category::ALL {
            if let Some((rule, b)) = match_root(node, category) {
                let next = replace_at(e, &path, rule.instantiate(&b)).expect("position exists");
                if f(&path, category, next) {
                    return;
                }
            }
        }
    }
}

fn trace(states: &[State], mut idx: usize) -> RewriteSequence {
    let mut steps = Vec::new();
    while let Some(step) = &states[idx].step {
        steps.push(step.clone());
        idx = states[idx].parent;
    }
    steps.reverse();
    RewriteSequence::new(steps)
}

/// Searches for a rewrite sequence turning `a` into `b`.
///
/// A returned sequence has been re-verified with [`check`]. An error is never
/// evidence that the programs differ, only that no proof was found.
pub fn prove(a: &Expr, b: &Expr, cfg: &SearchConfig) -> Result<RewriteSequence, ProveError> {
    if a.ty() != b.ty() {
        return Err(ProveError::TypeMismatch(a.ty(), b.ty()));
    }
    if a == b {
        return Ok(RewriteSequence::default());
    }
    let start = Instant::now();
    let mut states = vec![State {
        prog: a.clone(),
        parent: 0,
        step: None,
    }];
    let mut seen: FxHashSet<Expr> = FxHashSet::default();
    seen.insert(a.clone());
    let mut level: Vec<usize> = vec![0];
    let mut expanded = 0usize;

    for depth in 1..=cfg.max_steps {
        let last = depth == cfg.max_steps;
        let mut next_level = Vec::new();
        for &idx in &level {
            if expanded >= cfg.max_expansions {
                return Err(ProveError::BudgetExceeded { expanded });
            }
            if let Some(limit) = cfg.time_budget {
                if start.elapsed() > limit {
                    return Err(ProveError::TimeExceeded { expanded });
                }
            }
            expanded += 1;
            let prog = states[idx].prog.clone();
            let mut found = None;
            for_each_successor(&prog, |path, category, next| {
                if next == *b {
                    found = Some(RewriteStep::new(path.clone(), category));
                    return true;
                }
                if !last && seen.insert(next.clone()) {
                    states.push(State {
                        prog: next,
                        parent: idx,
                        step: Some(RewriteStep::new(path.clone(), category)),
                    });
                    next_level.push(states.len() - 1);
                }
                false
            });
            if let Some(step) = found {
                let mut seq = trace(&states, idx);
                seq.push(step);
                assert!(check(a, &seq, b).is_proven(), "search produced an invalid proof");
                return Ok(seq);
            }
        }
        if next_level.is_empty() {
            break;
        }
        level = next_level;
    }
    Err(ProveError::NotFoundWithinDepth {
        max_steps: cfg.max_steps,
    })
}
