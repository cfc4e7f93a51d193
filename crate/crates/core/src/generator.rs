//! Random program generation and equivalent/corrupted target generation.
//!
//! [`gen_src`] grows a random well-typed tree top-down. The probability that
//! an operand is itself an operation starts at `initial_child_prob` and drops
//! by `level_decrement` per level, which bounds the height.
//!
//! [`gen_tgt`] walks a program in pre-order and, at each node, offers every
//! applicable category an independent coin flip in declaration order; the
//! first success fires. After a rewrite the walk continues on the rewritten
//! node's operands (or on the surviving operand, when the rule returns one),
//! so recorded paths always refer to the current program.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::axioms::{self, match_root, replace_at, subtree, Category, Path, Selector};
use crate::checker::{RewriteSequence, RewriteStep};
use crate::interp::Oracle;
use crate::lang::{Expr, ExprView, Op, Terminal, TypeTag};

/// The operator multiset of the initial generation call; binary operators
/// appear twice.
pub fn default_op_weights() -> Vec<Op> {
    use Op::*;
    vec![
        AddS, SubS, MulS, DivS, AddS, SubS, MulS, DivS, InvS, NegS, //
        AddM, SubM, MulM, AddM, SubM, MulM, InvM, NegM, TrnM, //
        AddV, SubV, MulV, AddV, SubV, MulV, NegV,
    ]
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub initial_child_prob: f64,
    pub level_decrement: f64,
    pub apply_prob: f64,
    pub seed: u64,
    pub op_weights: Vec<Op>,
    /// Illegal edits performed for each corrupted sample.
    pub illegal_edits: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            initial_child_prob: 0.91,
            level_decrement: 0.23,
            apply_prob: 0.5,
            seed: 0,
            op_weights: default_op_weights(),
            illegal_edits: 1,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    /// Largest height `gen_src` can produce: the number of levels at which
    /// the operand probability is still positive.
    pub fn max_depth_edges(&self) -> usize {
        let mut p = self.initial_child_prob;
        let mut levels = 1;
        while p > 0.0 && levels < 64 {
            levels += 1;
            p -= self.level_decrement;
        }
        levels
    }

    /// Independent random stream for sample `index`.
    pub fn sample_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Draws a random program from `cfg.op_weights` with the configured operand
/// probability.
pub fn gen_src<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Expr {
    gen_src_with(&cfg.op_weights, cfg.initial_child_prob, cfg.level_decrement, rng)
}

/// One step of the generator: pick an operator from `ops`, then fill each
/// operand with a recursive call (probability `p`) or a random terminal.
/// Recursive calls draw from the operators of `ops` producing the required
/// operand type and use `p - decrement`.
///
/// Panics if `ops` is empty.
pub fn gen_src_with<R: Rng + ?Sized>(ops: &[Op], p: f64, decrement: f64, rng: &mut R) -> Expr {
    grow(ops, ops, p, decrement, rng)
}

fn grow<R: Rng + ?Sized>(all: &[Op], pool: &[Op], p: f64, decrement: f64, rng: &mut R) -> Expr {
    let op = *pool.choose(rng).expect("operator set must not be empty");
    let sigs = op.signatures();
    let sig = sigs[rng.gen_range(0..sigs.len())];
    let children = sig
        .iter()
        .map(|&ty| {
            if rng.gen::<f64>() < p {
                let sub: Vec<Op> = all.iter().copied().filter(|o| o.result_type() == ty).collect();
                if !sub.is_empty() {
                    return grow(all, &sub, p - decrement, decrement, rng);
                }
            }
            random_terminal(ty, rng)
        })
        .collect();
    Expr::apply(op, children).expect("chosen signature is valid")
}

pub fn random_terminal<R: Rng + ?Sized>(ty: TypeTag, rng: &mut R) -> Expr {
    let choices: Vec<Terminal> = Terminal::of_type(ty).collect();
    Expr::terminal(*choices.choose(rng).expect("every type has terminals"))
}

/// Rewrites `a` at random and records the steps taken. The returned
/// sequence always checks: `check(a, seq, b)` is `Proven`.
pub fn gen_tgt<R: Rng + ?Sized>(cfg: &GenConfig, a: &Expr, rng: &mut R) -> (Expr, RewriteSequence) {
    let mut walker = Walker {
        prog: a.clone(),
        seq: RewriteSequence::default(),
        apply_prob: cfg.apply_prob,
    };
    walker.visit(&mut Path::root(), rng);
    (walker.prog, walker.seq)
}

struct Walker {
    prog: Expr,
    seq: RewriteSequence,
    apply_prob: f64,
}

impl Walker {
    fn visit<R: Rng + ?Sized>(&mut self, path: &mut Path, rng: &mut R) {
        let node = subtree(&self.prog, path)
            .expect("walker paths stay inside the program")
            .clone();
        if node.is_terminal() {
            return;
        }
        let mut fired = None;
        for category in Category::ALL {
            let Some((rule, b)) = match_root(&node, category) else {
                continue;
            };
            if rng.gen_bool(self.apply_prob) {
                let new = rule.instantiate(&b);
                self.prog = replace_at(&self.prog, path, new).expect("path resolved above");
                self.seq.push(RewriteStep::new(path.clone(), category));
                fired = Some(rule);
                break;
            }
        }
        match fired {
            // The node was replaced by one of its own operands, which has not
            // been visited yet.
            Some(rule) if rule.returns_operand() => self.visit(path, rng),
            _ => self.visit_children(path, rng),
        }
    }

    fn visit_children<R: Rng + ?Sized>(&mut self, path: &mut Path, rng: &mut R) {
        let node = subtree(&self.prog, path).expect("walker paths stay inside the program");
        let arity = node.children().count();
        for sel in [Selector::Left, Selector::Right].into_iter().take(arity) {
            path.push(sel);
            self.visit(path, rng);
            path.pop();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("program admits no illegal edit")]
    DegenerateInput,
}

/// A semantics-changing structural edit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IllegalEdit {
    /// Swap the operands of a non-commutative operator.
    Commute(Path),
    /// Replace the operator with another of identical signature.
    Mutate(Path, Op),
}

fn same_signature_ops(op: Op, operands: &[TypeTag]) -> Vec<Op> {
    use Op::*;
    let family: &[Op] = match op {
        AddS | SubS | MulS | DivS => &[AddS, SubS, MulS, DivS],
        InvS | NegS => &[InvS, NegS],
        AddM | SubM => &[AddM, SubM, MulM],
        MulM if operands == [TypeTag::Matrix, TypeTag::Matrix] => &[AddM, SubM, MulM],
        InvM | NegM | TrnM => &[InvM, NegM, TrnM],
        AddV | SubV => &[AddV, SubV],
        _ => &[],
    };
    family.iter().copied().filter(|&o| o != op).collect()
}

fn is_non_commutative(op: Op, operands: &[TypeTag]) -> bool {
    match op {
        Op::SubS | Op::DivS | Op::SubM | Op::SubV => true,
        Op::MulM => operands == [TypeTag::Matrix, TypeTag::Matrix],
        _ => false,
    }
}

/// Every illegal edit available in `e`, in pre-order.
pub fn illegal_edits(e: &Expr) -> Vec<IllegalEdit> {
    let mut out = Vec::new();
    for path in axioms::positions(e) {
        let node = subtree(e, &path).expect("position exists");
        let (op, operands): (Op, Vec<&Expr>) = match node.view() {
            ExprView::Terminal(_) => continue,
            ExprView::Unary(op, c) => (op, vec![c]),
            ExprView::Binary(op, l, r) => (op, vec![l, r]),
        };
        let tys: Vec<TypeTag> = operands.iter().map(|c| c.ty()).collect();
        if operands.len() == 2 && is_non_commutative(op, &tys) && operands[0] != operands[1] {
            out.push(IllegalEdit::Commute(path.clone()));
        }
        for other in same_signature_ops(op, &tys) {
            out.push(IllegalEdit::Mutate(path.clone(), other));
        }
    }
    out
}

pub fn apply_illegal(e: &Expr, edit: &IllegalEdit) -> Expr {
    let (path, replacement) = match edit {
        IllegalEdit::Commute(path) => {
            let node = subtree(e, path).expect("edit path exists");
            let ExprView::Binary(op, l, r) = node.view() else {
                panic!("commute edit on a non-binary node");
            };
            (
                path,
                Expr::binary(op, r.clone(), l.clone()).expect("swapped operands keep the signature"),
            )
        }
        IllegalEdit::Mutate(path, op) => {
            let node = subtree(e, path).expect("edit path exists");
            let children: Vec<Expr> = node.children().cloned().collect();
            (path, Expr::apply(*op, children).expect("mutation keeps the signature"))
        }
    };
    replace_at(e, path, replacement).expect("edit path exists")
}

/// Produces a program that is not equivalent to `a`: one or more illegal
/// edits followed by a legal random rewrite pass.
///
/// Edits can coincidentally preserve meaning (`( x -s 0 )` versus
/// `( x +s 0 )`, or anything multiplied by `0`), so a candidate is only
/// returned once a few random valuations tell it apart from `a`. Programs
/// that fail to evaluate everywhere, such as `( is 0 )`, are degenerate.
pub fn gen_unequal<R: Rng + ?Sized>(cfg: &GenConfig, a: &Expr, rng: &mut R) -> Result<Expr, GenError> {
    const ATTEMPTS: usize = 16;
    const TRIALS: usize = 4;
    let oracle = Oracle::with_seed(rng.gen());
    for _ in 0..ATTEMPTS {
        let mut cur = a.clone();
        for _ in 0..cfg.illegal_edits.max(1) {
            let edits = illegal_edits(&cur);
            let edit = edits.choose(rng).ok_or(GenError::DegenerateInput)?;
            cur = apply_illegal(&cur, edit);
        }
        let (b, _) = gen_tgt(cfg, &cur, rng);
        if b == *a {
            continue;
        }
        let report = oracle.compare(a, &b, TRIALS).expect("edits preserve the type");
        if report.disagree > 0 {
            return Ok(b);
        }
    }
    Err(GenError::DegenerateInput)
}

/// Third field of a sample: a proof or the non-equivalence marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Sequence(RewriteSequence),
    NotEqual,
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SampleTuple {
    pub prog_a: Expr,
    pub prog_b: Expr,
    pub outcome: Outcome,
}

impl SampleTuple {
    pub fn sequence(&self) -> Option<&RewriteSequence> {
        match &self.outcome {
            Outcome::Sequence(s) => Some(s),
            Outcome::NotEqual => None,
        }
    }
}

/// Raw (unpruned) sample `index` of the stream defined by `cfg`. With
/// probability `not_equal_frac` the target is corrupted.
pub fn sample(cfg: &GenConfig, index: u64, not_equal_frac: f64) -> SampleTuple {
    let mut rng = cfg.sample_rng(index);
    loop {
        let a = gen_src(cfg, &mut rng);
        if not_equal_frac > 0.0 && rng.gen_bool(not_equal_frac.min(1.0)) {
            if let Ok(b) = gen_unequal(cfg, &a, &mut rng) {
                return SampleTuple {
                    prog_a: a,
                    prog_b: b,
                    outcome: Outcome::NotEqual,
                };
            }
            continue;
        }
        let (b, seq) = gen_tgt(cfg, &a, &mut rng);
        return SampleTuple {
            prog_a: a,
            prog_b: b,
            outcome: Outcome::Sequence(seq),
        };
    }
}
