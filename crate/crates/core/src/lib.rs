//! Rewrite-rule engine and dataset factory for proving equivalence of
//! typed linear-algebra programs.
//!
//! * [`lang`]: tokens, typed expression trees, parsing and printing
//! * [`axioms`]: the 102-rule catalog, matching and rewriting at a path
//! * [`checker`]: rewrite sequences and proof checking
//! * [`interp`]: numeric evaluation used as a semantic oracle
//! * [`generator`]: random programs, equivalent targets, corrupted targets
//! * [`prover`]: bounded breadth-first proof search
//! * [`dataset`]: corpus building, statistics, file format and splits

pub mod axioms;
pub mod checker;
pub mod dataset;
pub mod generator;
pub mod interp;
pub mod lang;
pub mod prover;

pub use axioms::{applicable, apply_at, catalog, match_at, AxiomRule, Category, Path, Selector};
pub use checker::{check, parse_sequence, RewriteSequence, RewriteStep, Verdict, NOT_EQUAL};
pub use generator::{gen_src, gen_tgt, gen_unequal, GenConfig, Outcome, SampleTuple};
pub use interp::{eval, semantically_equal, Oracle, OracleReport, Valuation, Value};
pub use lang::{parse, Expr, ExprView, Metrics, Op, Terminal, TypeTag};
pub use prover::{prove, ProveError, SearchConfig};
