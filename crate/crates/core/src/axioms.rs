//! The axiom catalog: 102 directed rewrite rules in 13 categories, plus
//! matching and rewriting at a path.
//!
//! Rules are stored as ordinary programs. In a pattern, every non-special
//! terminal is a metavariable of that terminal's type (`a` matches any scalar
//! subexpression, `A` any matrix one, `v` any vector one); the special
//! terminals `0 1 O I o` only match themselves. A metavariable that occurs
//! twice must bind structurally equal subtrees.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::lang::{parse, Expr, ExprView, Terminal};

/// Rewrite categories, in declaration order. The names are the sequence
/// tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Cancel,
    Noop,
    Double,
    Commute,
    DistributeLeft,
    DistributeRight,
    FactorLeft,
    FactorRight,
    AssociativeLeft,
    AssociativeRight,
    FlipLeft,
    FlipRight,
    Transpose,
}

impl Category {
    pub const ALL: [Category; 13] = [
        Category::Cancel,
        Category::Noop,
        Category::Double,
        Category::Commute,
        Category::DistributeLeft,
        Category::DistributeRight,
        Category::FactorLeft,
        Category::FactorRight,
        Category::AssociativeLeft,
        Category::AssociativeRight,
        Category::FlipLeft,
        Category::FlipRight,
        Category::Transpose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Cancel => "Cancel",
            Category::Noop => "Noop",
            Category::Double => "Double",
            Category::Commute => "Commute",
            Category::DistributeLeft => "DistributeLeft",
            Category::DistributeRight => "DistributeRight",
            Category::FactorLeft => "FactorLeft",
            Category::FactorRight => "FactorRight",
            Category::AssociativeLeft => "AssociativeLeft",
            Category::AssociativeRight => "AssociativeRight",
            Category::FlipLeft => "FlipLeft",
            Category::FlipRight => "FlipRight",
            Category::Transpose => "Transpose",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.iter().copied().find(|c| c.name() == s).ok_or(())
    }
}

/// Child selector. Unary nodes expose their only child as `Left`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selector {
    Left,
    Right,
}

impl Selector {
    pub fn token(self) -> &'static str {
        match self {
            Selector::Left => "left",
            Selector::Right => "right",
        }
    }
}

impl FromStr for Selector {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Selector::Left),
            "right" => Ok(Selector::Right),
            _ => Err(()),
        }
    }
}

/// Root-to-node location. The empty path is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Path(Vec<Selector>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Selector) {
        self.0.push(s);
    }

    pub fn pop(&mut self) -> Option<Selector> {
        self.0.pop()
    }

    pub fn child(&self, s: Selector) -> Path {
        let mut p = self.clone();
        p.push(s);
        p
    }
}

impl From<Vec<Selector>> for Path {
    fn from(v: Vec<Selector>) -> Path {
        Path(v)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<_> = self.0.iter().map(|s| s.token()).collect();
        f.write_str(&words.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("path `{path}` does not resolve: step {step} leaves the tree")]
    Path { path: Path, step: usize },
    #[error("no {category} rule applies at `{path}`")]
    NotApplicable { path: Path, category: Category },
}

/// One directed axiom.
#[derive(Debug, Clone)]
pub struct AxiomRule {
    pub id: u8,
    pub category: Category,
    pub pattern: Expr,
    pub template: Expr,
}

/// Metavariable assignments produced by a successful match.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(Vec<(Terminal, Expr)>);

impl Bindings {
    pub fn get(&self, var: Terminal) -> Option<&Expr> {
        self.0.iter().find(|(v, _)| *v == var).map(|(_, e)| e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Terminal, &Expr)> {
        self.0.iter().map(|(v, e)| (*v, e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule_id: u8,
    pub bindings: Bindings,
}

// id, category, pattern, template
const TABLE: &[(u8, Category, &str, &str)] = {
    use Category::*;
    &[
        (1, Cancel, "( a -s a )", "0"),
        (2, Cancel, "( a /s a )", "1"),
        (3, Cancel, "( A -m A )", "O"),
        (4, Cancel, "( v -v v )", "o"),
        (5, Noop, "( a +s 0 )", "a"),
        (6, Noop, "( 0 +s a )", "a"),
        (7, Noop, "( a -s 0 )", "a"),
        (8, Noop, "( a *s 1 )", "a"),
        (9, Noop, "( 1 *s a )", "a"),
        (10, Noop, "( a /s 1 )", "a"),
        (11, Noop, "( A +m O )", "A"),
        (12, Noop, "( O +m A )", "A"),
        (13, Noop, "( A -m O )", "A"),
        (14, Noop, "( A *m I )", "A"),
        (15, Noop, "( I *m A )", "A"),
        (16, Noop, "( v +v o )", "v"),
        (17, Noop, "( o +v v )", "v"),
        (18, Noop, "( v -v o )", "v"),
        (19, Double, "( ns ( ns a ) )", "a"),
        (20, Double, "( is ( is a ) )", "a"),
        (21, Double, "( nm ( nm A ) )", "A"),
        (22, Double, "( im ( im A ) )", "A"),
        (23, Double, "( tm ( tm A ) )", "A"),
        (24, Double, "( nv ( nv v ) )", "v"),
        (25, Commute, "( a +s b )", "( b +s a )"),
        (26, Commute, "( a *s b )", "( b *s a )"),
        (27, Commute, "( A +m B )", "( B +m A )"),
        (28, Commute, "( v +v w )", "( w +v v )"),
        (29, Commute, "( v *v a )", "( a *v v )"),
        (30, Commute, "( a *v v )", "( v *v a )"),
        (
            31,
            DistributeLeft,
            "( ( a +s b ) *s c )",
            "( ( a *s c ) +s ( b *s c ) )",
        ),
        (
            32,
            DistributeLeft,
            "( ( a -s b ) *s c )",
            "( ( a *s c ) -s ( b *s c ) )",
        ),
        (
            33,
            DistributeLeft,
            "( ( a +s b ) /s c )",
            "( ( a /s c ) +s ( b /s c ) )",
        ),
        (
            34,
            DistributeLeft,
            "( ( a -s b ) /s c )",
            "( ( a /s c ) -s ( b /s c ) )",
        ),
        (
            35,
            DistributeLeft,
            "( ( v +v w ) *v a )",
            "( ( v *v a ) +v ( w *v a ) )",
        ),
        (
            36,
            DistributeLeft,
            "( ( v -v w ) *v a )",
            "( ( v *v a ) -v ( w *v a ) )",
        ),
        (
            37,
            DistributeLeft,
            "( ( A +m B ) *m C )",
            "( ( A *m C ) +m ( B *m C ) )",
        ),
        (
            38,
            DistributeLeft,
            "( ( A -m B ) *m C )",
            "( ( A *m C ) -m ( B *m C ) )",
        ),
        (
            39,
            DistributeLeft,
            "( ( A +m B ) *v v )",
            "( ( A *v v ) +v ( B *v v ) )",
        ),
        (
            40,
            DistributeLeft,
            "( ( A -m B ) *v v )",
            "( ( A *v v ) -v ( B *v v ) )",
        ),
        (
            41,
            DistributeLeft,
            "( ( A +m B ) *m a )",
            "( ( A *m a ) +m ( B *m a ) )",
        ),
        (
            42,
            DistributeLeft,
            "( ( A -m B ) *m a )",
            "( ( A *m a ) -m ( B *m a ) )",
        ),
        (
            43,
            DistributeRight,
            "( a *s ( b +s c ) )",
            "( ( a *s b ) +s ( a *s c ) )",
        ),
        (
            44,
            DistributeRight,
            "( a *s ( b -s c ) )",
            "( ( a *s b ) -s ( a *s c ) )",
        ),
        (
            45,
            DistributeRight,
            "( a *v ( v +v w ) )",
            "( ( a *v v ) +v ( a *v w ) )",
        ),
        (
            46,
            DistributeRight,
            "( a *v ( v -v w ) )",
            "( ( a *v v ) -v ( a *v w ) )",
        ),
        (
            47,
            DistributeRight,
            "( A *m ( B +m C ) )",
            "( ( A *m B ) +m ( A *m C ) )",
        ),
        (
            48,
            DistributeRight,
            "( A *m ( B -m C ) )",
            "( ( A *m B ) -m ( A *m C ) )",
        ),
        (
            49,
            DistributeRight,
            "( a *m ( B +m C ) )",
            "( ( a *m B ) +m ( a *m C ) )",
        ),
        (
            50,
            DistributeRight,
            "( a *m ( B -m C ) )",
            "( ( a *m B ) -m ( a *m C ) )",
        ),
        (51, FactorLeft, "( ( a *s b ) +s ( a *s c ) )", "( a *s ( b +s c ) )"),
        (52, FactorLeft, "( ( a *s b ) -s ( a *s c ) )", "( a *s ( b -s c ) )"),
        (53, FactorLeft, "( ( A *m B ) +m ( A *m C ) )", "( A *m ( B +m C ) )"),
        (54, FactorLeft, "( ( A *m B ) -m ( A *m C ) )", "( A *m ( B -m C ) )"),
        (55, FactorLeft, "( ( A *v v ) +v ( A *v w ) )", "( A *v ( v +v w ) )"),
        (56, FactorLeft, "( ( A *v v ) -v ( A *v w ) )", "( A *v ( v -v w ) )"),
        (57, FactorLeft, "( ( A *m a ) +m ( A *m b ) )", "( A *m ( a +s b ) )"),
        (58, FactorLeft, "( ( A *m a ) -m ( A *m b ) )", "( A *m ( a -s b ) )"),
        (59, FactorLeft, "( ( v *v a ) +v ( v *v b ) )", "( v *v ( a +s b ) )"),
        (60, FactorLeft, "( ( v *v a ) -v ( v *v b ) )", "( v *v ( a -s b ) )"),
        (61, FactorRight, "( ( a *s c ) +s ( b *s c ) )", "( ( a +s b ) *s c )"),
        (62, FactorRight, "( ( a *s c ) -s ( b *s c ) )", "( ( a -s b ) *s c )"),
        (63, FactorRight, "( ( a /s c ) +s ( b /s c ) )", "( ( a +s b ) /s c )"),
        (64, FactorRight, "( ( a /s c ) -s ( b /s c ) )", "( ( a -s b ) /s c )"),
        (65, FactorRight, "( ( A *m C ) +m ( B *m C ) )", "( ( A +m B ) *m C )"),
        (66, FactorRight, "( ( A *m C ) -m ( B *m C ) )", "( ( A -m B ) *m C )"),
        (67, FactorRight, "( ( A *v v ) +v ( B *v v ) )", "( ( A +m B ) *v v )"),
        (68, FactorRight, "( ( A *v v ) -v ( B *v v ) )", "( ( A -m B ) *v v )"),
        (69, FactorRight, "( ( A *m a ) +m ( B *m a ) )", "( ( A +m B ) *m a )"),
        (70, FactorRight, "( ( A *m a ) -m ( B *m a ) )", "( ( A -m B ) *m a )"),
        (71, FactorRight, "( ( v *v a ) +v ( w *v a ) )", "( ( v +v w ) *v a )"),
        (72, FactorRight, "( ( v *v a ) -v ( w *v a ) )", "( ( v -v w ) *v a )"),
        (73, AssociativeLeft, "( a +s ( b +s c ) )", "( ( a +s b ) +s c )"),
        (74, AssociativeLeft, "( a *s ( b *s c ) )", "( ( a *s b ) *s c )"),
        (75, AssociativeLeft, "( A +m ( B +m C ) )", "( ( A +m B ) +m C )"),
        (76, AssociativeLeft, "( A *m ( B *m C ) )", "( ( A *m B ) *m C )"),
        (77, AssociativeLeft, "( A *m ( B *m a ) )", "( ( A *m B ) *m a )"),
        (78, AssociativeLeft, "( v +v ( w +v x ) )", "( ( v +v w ) +v x )"),
        (79, AssociativeRight, "( ( a +s b ) +s c )", "( a +s ( b +s c ) )"),
        (80, AssociativeRight, "( ( a *s b ) *s c )", "( a *s ( b *s c ) )"),
        (81, AssociativeRight, "( ( A +m B ) +m C )", "( A +m ( B +m C ) )"),
        (82, AssociativeRight, "( ( A *m B ) *m C )", "( A *m ( B *m C ) )"),
        (83, AssociativeRight, "( ( A *m B ) *m a )", "( A *m ( B *m a ) )"),
        (84, AssociativeRight, "( ( v +v w ) +v x )", "( v +v ( w +v x ) )"),
        (85, FlipLeft, "( ns ( a -s b ) )", "( b -s a )"),
        (86, FlipLeft, "( is ( a /s b ) )", "( b /s a )"),
        (87, FlipLeft, "( nm ( A -m B ) )", "( B -m A )"),
        (88, FlipLeft, "( nv ( v -v w ) )", "( w -v v )"),
        (89, FlipRight, "( a /s ( b /s c ) )", "( a *s ( c /s b ) )"),
        (90, FlipRight, "( a /s ( is b ) )", "( a *s b )"),
        (91, FlipRight, "( a -s ( b -s c ) )", "( a +s ( c -s b ) )"),
        (92, FlipRight, "( a -s ( ns b ) )", "( a +s b )"),
        (93, FlipRight, "( A -m ( B -m C ) )", "( A +m ( C -m B ) )"),
        (94, FlipRight, "( A -m ( nm B ) )", "( A +m B )"),
        (95, FlipRight, "( v -v ( w -v x ) )", "( v +v ( x -v w ) )"),
        (96, FlipRight, "( v -v ( nv w ) )", "( v +v w )"),
        (97, Transpose, "( A *m B )", "( tm ( ( tm B ) *m ( tm A ) ) )"),
        (98, Transpose, "( A +m B )", "( tm ( ( tm A ) +m ( tm B ) ) )"),
        (99, Transpose, "( A -m B )", "( tm ( ( tm A ) -m ( tm B ) ) )"),
        (100, Transpose, "( tm ( A *m B ) )", "( ( tm B ) *m ( tm A ) )"),
        (101, Transpose, "( tm ( A +m B ) )", "( ( tm A ) +m ( tm B ) )"),
        (102, Transpose, "( tm ( A -m B ) )", "( ( tm A ) -m ( tm B ) )"),
    ]
};

struct Catalog {
    rules: Vec<AxiomRule>,
    by_category: [Vec<usize>; 13],
}

fn catalog_data() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let rules: Vec<AxiomRule> = TABLE
            .iter()
            .map(|&(id, category, pat, tpl)| AxiomRule {
                id,
                category,
                pattern: parse(pat).unwrap_or_else(|e| panic!("rule {id} pattern: {e}")),
                template: parse(tpl).unwrap_or_else(|e| panic!("rule {id} template: {e}")),
            })
            .collect();
        let mut by_category: [Vec<usize>; 13] = Default::default();
        for (i, r) in rules.iter().enumerate() {
            by_category[r.category.index()].push(i);
        }
        Catalog { rules, by_category }
    })
}

/// All 102 rules, ordered by id.
pub fn catalog() -> &'static [AxiomRule] {
    &catalog_data().rules
}

/// Looks a rule up by its 1-based id.
pub fn rule(id: u8) -> Option<&'static AxiomRule> {
    catalog().get(usize::from(id).checked_sub(1)?)
}

/// Rules of one category, ordered by id.
pub fn rules_in(category: Category) -> impl Iterator<Item = &'static AxiomRule> {
    let data = catalog_data();
    data.by_category[category.index()].iter().map(move |&i| &data.rules[i])
}

/// Tab-separated export: `id  category  pattern  template`, one rule per line.
pub fn catalog_table() -> String {
    let mut out = String::from("id\tcategory\tpattern\ttemplate\n");
    for r in catalog() {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.id, r.category, r.pattern, r.template));
    }
    out
}

fn is_metavar(t: Terminal) -> bool {
    !t.is_special()
}

fn match_into(pattern: &Expr, e: &Expr, b: &mut Bindings) -> bool {
    match (pattern.view(), e.view()) {
        (ExprView::Terminal(p), _) if is_metavar(p) => {
            if p.ty() != e.ty() {
                return false;
            }
            match b.get(p) {
                Some(bound) => bound == e,
                None => {
                    b.0.push((p, e.clone()));
                    true
                }
            }
        }
        (ExprView::Terminal(p), ExprView::Terminal(t)) => p == t,
        (ExprView::Unary(po, pc), ExprView::Unary(eo, ec)) => po == eo && match_into(pc, ec, b),
        (ExprView::Binary(po, pl, pr), ExprView::Binary(eo, el, er)) => {
            po == eo && match_into(pl, el, b) && match_into(pr, er, b)
        }
        _ => false,
    }
}

impl AxiomRule {
    /// Matches the pattern against `e` (the whole of it, not a subterm).
    pub fn matches(&self, e: &Expr) -> Option<Bindings> {
        if e.op() != self.pattern.op() {
            return None;
        }
        let mut b = Bindings::default();
        match_into(&self.pattern, e, &mut b).then_some(b)
    }

    pub fn instantiate(&self, b: &Bindings) -> Expr {
        instantiate(&self.template, b)
    }

    /// Rewrites `e` in place of its root, if the rule matches.
    pub fn rewrite(&self, e: &Expr) -> Option<Expr> {
        self.matches(e).map(|b| self.instantiate(&b))
    }

    /// The template is a lone metavariable: the rewrite returns an
    /// existing operand unchanged.
    pub fn returns_operand(&self) -> bool {
        self.template.as_terminal().is_some_and(is_metavar)
    }
}

fn instantiate(template: &Expr, b: &Bindings) -> Expr {
    match template.view() {
        ExprView::Terminal(t) if is_metavar(t) => b
            .get(t)
            .cloned()
            .unwrap_or_else(|| panic!("template metavariable {t} unbound")),
        ExprView::Terminal(_) => template.clone(),
        ExprView::Unary(op, c) => Expr::unary(op, instantiate(c, b)).expect("templates are well typed"),
        ExprView::Binary(op, l, r) => {
            Expr::binary(op, instantiate(l, b), instantiate(r, b)).expect("templates are well typed")
        }
    }
}

/// The first rule of `category` (by id) matching the root of `e`.
///
/// Only the Noop pairs 5/6, 8/9, 11/12, 14/15 and 16/17 can match the same
/// node, and only when both operands are the special constant; both rules
/// then produce the same result.
pub fn match_root(e: &Expr, category: Category) -> Option<(&'static AxiomRule, Bindings)> {
    if e.is_terminal() {
        return None;
    }
    rules_in(category).find_map(|r| r.matches(e).map(|b| (r, b)))
}

/// Subtree of `e` at `path`.
pub fn subtree<'a>(e: &'a Expr, path: &Path) -> Result<&'a Expr, RewriteError> {
    let mut cur = e;
    for (step, sel) in path.selectors().iter().enumerate() {
        let next = match sel {
            Selector::Left => cur.left(),
            Selector::Right => cur.right(),
        };
        cur = next.ok_or_else(|| RewriteError::Path {
            path: path.clone(),
            step,
        })?;
    }
    Ok(cur)
}

/// `e` with the subtree at `path` replaced by `new`. Only the spine from
/// the root to `path` is rebuilt.
pub fn replace_at(e: &Expr, path: &Path, new: Expr) -> Result<Expr, RewriteError> {
    fn go(e: &Expr, sels: &[Selector], new: Expr, path: &Path, step: usize) -> Result<Expr, RewriteError> {
        let Some((first, rest)) = sels.split_first() else {
            return Ok(new);
        };
        let err = || RewriteError::Path {
            path: path.clone(),
            step,
        };
        match (e.view(), first) {
            (ExprView::Unary(op, c), Selector::Left) => {
                let c = go(c, rest, new, path, step + 1)?;
                Ok(Expr::unary(op, c).expect("replacement preserves type"))
            }
            (ExprView::Binary(op, l, r), Selector::Left) => {
                let l = go(l, rest, new, path, step + 1)?;
                Ok(Expr::binary(op, l, r.clone()).expect("replacement preserves type"))
            }
            (ExprView::Binary(op, l, r), Selector::Right) => {
                let r = go(r, rest, new, path, step + 1)?;
                Ok(Expr::binary(op, l.clone(), r).expect("replacement preserves type"))
            }
            _ => Err(err()),
        }
    }
    debug_assert!(subtree(e, path).map_or(true, |old| old.ty() == new.ty()));
    go(e, path.selectors(), new, path, 0)
}

/// The rule of `category` that applies at `path`, with its bindings.
pub fn match_at(e: &Expr, path: &Path, category: Category) -> Result<Option<RuleMatch>, RewriteError> {
    let node = subtree(e, path)?;
    Ok(match_root(node, category).map(|(r, bindings)| RuleMatch {
        rule_id: r.id,
        bindings,
    }))
}

/// Applies the `category` rule at `path`; everything outside `path` is
/// shared with `e`.
pub fn apply_at(e: &Expr, path: &Path, category: Category) -> Result<Expr, RewriteError> {
    let node = subtree(e, path)?;
    let (rule, b) = match_root(node, category).ok_or_else(|| RewriteError::NotApplicable {
        path: path.clone(),
        category,
    })?;
    replace_at(e, path, rule.instantiate(&b))
}

/// Like [`apply_at`], also returning the id of the rule that fired.
pub fn apply_at_with_rule(e: &Expr, path: &Path, category: Category) -> Result<(Expr, u8), RewriteError> {
    let node = subtree(e, path)?;
    let (rule, b) = match_root(node, category).ok_or_else(|| RewriteError::NotApplicable {
        path: path.clone(),
        category,
    })?;
    Ok((replace_at(e, path, rule.instantiate(&b))?, rule.id))
}

/// Categories with a matching rule at `path`, in declaration order.
pub fn applicable(e: &Expr, path: &Path) -> Result<Vec<Category>, RewriteError> {
    let node = subtree(e, path)?;
    Ok(applicable_root(node))
}

/// Categories with a matching rule at the root of `node`.
pub fn applicable_root(node: &Expr) -> Vec<Category> {
    Category::ALL
        .into_iter()
        .filter(|&c| match_root(node, c).is_some())
        .collect()
}

/// Every node position of `e` in pre-order (node, then left, then right).
pub fn positions(e: &Expr) -> Vec<Path> {
    fn go(e: &Expr, path: &mut Path, out: &mut Vec<Path>) {
        out.push(path.clone());
        if let Some(l) = e.left() {
            path.push(Selector::Left);
            go(l, path, out);
            path.pop();
        }
        if let Some(r) = e.right() {
            path.push(Selector::Right);
            go(r, path, out);
            path.pop();
        }
    }
    let mut out = Vec::with_capacity(e.node_count());
    go(e, &mut Path::root(), &mut out);
    out
}
