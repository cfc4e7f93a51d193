//! The expression language: scalars, square matrices and vectors combined by
//! sixteen typed operators.
//!
//! Programs are written fully parenthesized with whitespace-separated tokens.
//! Binary operators are infix, unary operators come first:
//!
//! ```text
//! ( d *s ( ( ( ns e ) /s a ) -s c ) )
//! ( tm ( A *m B ) )
//! ```
//!
//! Every [`Expr`] that can be built through this module is well typed; the
//! constructors reject operator/operand combinations outside the signature
//! table.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// The three value classes of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    Scalar,
    Matrix,
    Vector,
}

impl TypeTag {
    pub const ALL: [TypeTag; 3] = [TypeTag::Scalar, TypeTag::Matrix, TypeTag::Vector];
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeTag::Scalar => "scalar",
            TypeTag::Matrix => "matrix",
            TypeTag::Vector => "vector",
        };
        f.write_str(s)
    }
}

/// Operator mnemonics. The suffix letter names the result type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    AddS,
    SubS,
    MulS,
    DivS,
    InvS,
    NegS,
    AddM,
    SubM,
    MulM,
    InvM,
    NegM,
    TrnM,
    AddV,
    SubV,
    MulV,
    NegV,
}

impl Op {
    pub const ALL: [Op; 16] = [
        Op::AddS,
        Op::SubS,
        Op::MulS,
        Op::DivS,
        Op::InvS,
        Op::NegS,
        Op::AddM,
        Op::SubM,
        Op::MulM,
        Op::InvM,
        Op::NegM,
        Op::TrnM,
        Op::AddV,
        Op::SubV,
        Op::MulV,
        Op::NegV,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::AddS => "+s",
            Op::SubS => "-s",
            Op::MulS => "*s",
            Op::DivS => "/s",
            Op::InvS => "is",
            Op::NegS => "ns",
            Op::AddM => "+m",
            Op::SubM => "-m",
            Op::MulM => "*m",
            Op::InvM => "im",
            Op::NegM => "nm",
            Op::TrnM => "tm",
            Op::AddV => "+v",
            Op::SubV => "-v",
            Op::MulV => "*v",
            Op::NegV => "nv",
        }
    }

    /// Untyped glyph used by the display-only rendering.
    pub fn glyph(self) -> &'static str {
        match self {
            Op::AddS | Op::AddM | Op::AddV => "+",
            Op::SubS | Op::SubM | Op::SubV => "-",
            Op::MulS | Op::MulM | Op::MulV => "*",
            Op::DivS => "/",
            Op::NegS | Op::NegM | Op::NegV => "-",
            Op::InvS | Op::InvM => "inv",
            Op::TrnM => "trn",
        }
    }

    pub fn arity(self) -> usize {
        if self.is_unary() {
            1
        } else {
            2
        }
    }

    pub fn is_unary(self) -> bool {
        matches!(self, Op::InvS | Op::NegS | Op::InvM | Op::NegM | Op::TrnM | Op::NegV)
    }

    pub fn result_type(self) -> TypeTag {
        match self {
            Op::AddS | Op::SubS | Op::MulS | Op::DivS | Op::InvS | Op::NegS => TypeTag::Scalar,
            Op::AddM | Op::SubM | Op::MulM | Op::InvM | Op::NegM | Op::TrnM => TypeTag::Matrix,
            Op::AddV | Op::SubV | Op::MulV | Op::NegV => TypeTag::Vector,
        }
    }

    /// Operand type tuples accepted by this operator.
    pub fn signatures(self) -> &'static [&'static [TypeTag]] {
        use TypeTag::*;
        match self {
            Op::AddS | Op::SubS | Op::MulS | Op::DivS => &[&[Scalar, Scalar]],
            Op::InvS | Op::NegS => &[&[Scalar]],
            Op::AddM | Op::SubM => &[&[Matrix, Matrix]],
            Op::MulM => &[&[Matrix, Matrix], &[Matrix, Scalar], &[Scalar, Matrix]],
            Op::InvM | Op::NegM | Op::TrnM => &[&[Matrix]],
            Op::AddV | Op::SubV => &[&[Vector, Vector]],
            Op::MulV => &[&[Matrix, Vector], &[Scalar, Vector], &[Vector, Scalar]],
            Op::NegV => &[&[Vector]],
        }
    }

    pub fn accepts(self, operands: &[TypeTag]) -> bool {
        self.signatures().contains(&operands)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Op {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Op::ALL.iter().copied().find(|op| op.symbol() == s).ok_or(())
    }
}

/// One of the twenty single-letter terminals.
///
/// `0`, `1`, `O`, `I` and `o` are the special constants (zero, one, zero
/// matrix, identity, zero vector); the rest are free variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Terminal(char);

const SCALAR_TERMINALS: &str = "abcde01";
const MATRIX_TERMINALS: &str = "ABCDEOI";
const VECTOR_TERMINALS: &str = "vwxyzo";

impl Terminal {
    pub fn new(symbol: char) -> Option<Terminal> {
        Terminal::type_of(symbol).map(|_| Terminal(symbol))
    }

    fn type_of(symbol: char) -> Option<TypeTag> {
        if SCALAR_TERMINALS.contains(symbol) {
            Some(TypeTag::Scalar)
        } else if MATRIX_TERMINALS.contains(symbol) {
            Some(TypeTag::Matrix)
        } else if VECTOR_TERMINALS.contains(symbol) {
            Some(TypeTag::Vector)
        } else {
            None
        }
    }

    /// All terminals of the given type, specials included.
    pub fn of_type(ty: TypeTag) -> impl Iterator<Item = Terminal> {
        let set = match ty {
            TypeTag::Scalar => SCALAR_TERMINALS,
            TypeTag::Matrix => MATRIX_TERMINALS,
            TypeTag::Vector => VECTOR_TERMINALS,
        };
        set.chars().map(Terminal)
    }

    pub fn all() -> impl Iterator<Item = Terminal> {
        TypeTag::ALL.into_iter().flat_map(Terminal::of_type)
    }

    pub fn symbol(self) -> char {
        self.0
    }

    pub fn ty(self) -> TypeTag {
        Terminal::type_of(self.0).expect("terminal symbol validated at construction")
    }

    pub fn is_special(self) -> bool {
        matches!(self.0, '0' | '1' | 'O' | 'I' | 'o')
    }

    pub const ZERO: Terminal = Terminal('0');
    pub const ONE: Terminal = Terminal('1');
    pub const ZERO_MATRIX: Terminal = Terminal('O');
    pub const IDENTITY: Terminal = Terminal('I');
    pub const ZERO_VECTOR: Terminal = Terminal('o');
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("unknown token `{token}` at position {position}")]
    Lex { token: String, position: usize },
    #[error("syntax error at token {position}: {message}")]
    Syntax { message: String, position: usize },
    #[error("type error: {op} does not accept ({operands})")]
    Type { op: Op, operands: String },
}

impl LangError {
    fn type_error(op: Op, operands: &[TypeTag]) -> LangError {
        let operands = operands.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ");
        LangError::Type { op, operands }
    }
}

/// An immutable, well-typed expression tree.
///
/// Subtrees are reference counted, so cloning and replacing a subtree at a
/// path only copies the spine. Each interior node caches its structural hash,
/// size and height.
#[derive(Clone)]
pub struct Expr(Repr);

#[derive(Clone)]
enum Repr {
    Term(Terminal),
    Node(Arc<Node>),
}

struct Node {
    op: Op,
    left: Expr,
    right: Option<Expr>,
    hash: u64,
    size: u32,
    depth: u32,
}

/// Borrowed, pattern-matchable view of an [`Expr`].
#[derive(Debug, Clone, Copy)]
pub enum ExprView<'a> {
    Terminal(Terminal),
    Unary(Op, &'a Expr),
    Binary(Op, &'a Expr, &'a Expr),
}

/// Structural size measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    /// Operators plus terminals.
    pub node_count: usize,
    /// Edges on the longest root-to-leaf path.
    pub depth_edges: usize,
}

fn mix(mut h: u64) -> u64 {
    // splitmix64 finalizer
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

impl Expr {
    pub fn terminal(t: Terminal) -> Expr {
        Expr(Repr::Term(t))
    }

    pub fn unary(op: Op, child: Expr) -> Result<Expr, LangError> {
        let tys = [child.ty()];
        if op.arity() != 1 || !op.accepts(&tys) {
            return Err(LangError::type_error(op, &tys));
        }
        Ok(Expr::node(op, child, None))
    }

    pub fn binary(op: Op, left: Expr, right: Expr) -> Result<Expr, LangError> {
        let tys = [left.ty(), right.ty()];
        if op.arity() != 2 || !op.accepts(&tys) {
            return Err(LangError::type_error(op, &tys));
        }
        Ok(Expr::node(op, left, Some(right)))
    }

    /// Builds a node of the same arity as `op` from `children`.
    pub fn apply(op: Op, mut children: Vec<Expr>) -> Result<Expr, LangError> {
        match (op.arity(), children.len()) {
            (1, 1) => Expr::unary(op, children.pop().unwrap()),
            (2, 2) => {
                let right = children.pop().unwrap();
                let left = children.pop().unwrap();
                Expr::binary(op, left, right)
            }
            _ => Err(LangError::Syntax {
                message: format!("{op} expects {} operand(s)", op.arity()),
                position: 0,
            }),
        }
    }

    fn node(op: Op, left: Expr, right: Option<Expr>) -> Expr {
        let mut h = mix(op as u64 + 0x51);
        h = mix(h ^ left.structural_hash());
        let mut size = 1 + left.size();
        let mut depth = left.height();
        if let Some(r) = &right {
            h = mix(h.rotate_left(17) ^ r.structural_hash());
            size += r.size();
            depth = depth.max(r.height());
        }
        Expr(Repr::Node(Arc::new(Node {
            op,
            left,
            right,
            hash: h,
            size,
            depth: depth + 1,
        })))
    }

    pub fn view(&self) -> ExprView<'_> {
        match &self.0 {
            Repr::Term(t) => ExprView::Terminal(*t),
            Repr::Node(n) => match &n.right {
                None => ExprView::Unary(n.op, &n.left),
                Some(r) => ExprView::Binary(n.op, &n.left, r),
            },
        }
    }

    pub fn as_terminal(&self) -> Option<Terminal> {
        match &self.0 {
            Repr::Term(t) => Some(*t),
            Repr::Node(_) => None,
        }
    }

    pub fn op(&self) -> Option<Op> {
        match &self.0 {
            Repr::Term(_) => None,
            Repr::Node(n) => Some(n.op),
        }
    }

    pub fn left(&self) -> Option<&Expr> {
        match &self.0 {
            Repr::Term(_) => None,
            Repr::Node(n) => Some(&n.left),
        }
    }

    pub fn right(&self) -> Option<&Expr> {
        match &self.0 {
            Repr::Term(_) => None,
            Repr::Node(n) => n.right.as_ref(),
        }
    }

    pub fn children(&self) -> impl Iterator<Item = &Expr> {
        self.left().into_iter().chain(self.right())
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.0, Repr::Term(_))
    }

    /// Type of the value this expression computes.
    pub fn ty(&self) -> TypeTag {
        match &self.0 {
            Repr::Term(t) => t.ty(),
            Repr::Node(n) => n.op.result_type(),
        }
    }

    fn size(&self) -> u32 {
        match &self.0 {
            Repr::Term(_) => 1,
            Repr::Node(n) => n.size,
        }
    }

    fn height(&self) -> u32 {
        match &self.0 {
            Repr::Term(_) => 0,
            Repr::Node(n) => n.depth,
        }
    }

    pub fn node_count(&self) -> usize {
        self.size() as usize
    }

    pub fn depth_edges(&self) -> usize {
        self.height() as usize
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            node_count: self.node_count(),
            depth_edges: self.depth_edges(),
        }
    }

    fn structural_hash(&self) -> u64 {
        match &self.0 {
            Repr::Term(t) => mix(t.symbol() as u64),
            Repr::Node(n) => n.hash,
        }
    }

    /// Renders with the untyped glyphs (`+`, `*`, `-`, ...). The result is for
    /// reading only and cannot be parsed back.
    pub fn display_glyphs(&self) -> String {
        let mut out = String::new();
        self.write_tokens(&mut out, true);
        out
    }

    fn write_tokens(&self, out: &mut String, glyphs: bool) {
        let name = |op: Op| if glyphs { op.glyph() } else { op.symbol() };
        match self.view() {
            ExprView::Terminal(t) => out.push(t.symbol()),
            ExprView::Unary(op, c) => {
                out.push_str("( ");
                out.push_str(name(op));
                out.push(' ');
                c.write_tokens(out, glyphs);
                out.push_str(" )");
            }
            ExprView::Binary(op, l, r) => {
                out.push_str("( ");
                l.write_tokens(out, glyphs);
                out.push(' ');
                out.push_str(name(op));
                out.push(' ');
                r.write_tokens(out, glyphs);
                out.push_str(" )");
            }
        }
    }

    /// Canonical token string; the inverse of [`parse`].
    pub fn print(&self) -> String {
        let mut out = String::with_capacity(self.node_count() * 4);
        self.write_tokens(&mut out, false);
        out
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        match (&self.0, &other.0) {
            (Repr::Term(a), Repr::Term(b)) => a == b,
            (Repr::Node(a), Repr::Node(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.hash == b.hash && a.size == b.size && a.op == b.op && a.left == b.left && a.right == b.right)
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.structural_hash());
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.print())
    }
}

impl FromStr for Expr {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<Terminal> for Expr {
    fn from(t: Terminal) -> Expr {
        Expr::terminal(t)
    }
}

enum Token {
    Open,
    Close,
    Op(Op),
    Term(Terminal),
}

fn lex(text: &str) -> Result<Vec<Token>, LangError> {
    text.split_whitespace()
        .enumerate()
        .map(|(position, tok)| match tok {
            "(" => Ok(Token::Open),
            ")" => Ok(Token::Close),
            _ => {
                if let Ok(op) = tok.parse::<Op>() {
                    return Ok(Token::Op(op));
                }
                let mut chars = tok.chars();
                match (chars.next().and_then(Terminal::new), chars.next()) {
                    (Some(t), None) => Ok(Token::Term(t)),
                    _ => Err(LangError::Lex {
                        token: tok.to_string(),
                        position,
                    }),
                }
            }
        })
        .collect()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::Syntax {
            message: message.into(),
            position: self.pos,
        })
    }

    fn expect_close(&mut self) -> Result<(), LangError> {
        match self.tokens.get(self.pos) {
            Some(Token::Close) => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => self.syntax("expected `)`"),
            None => self.syntax("unbalanced parentheses: missing `)`"),
        }
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        match self.tokens.get(self.pos) {
            None => self.syntax("unexpected end of input"),
            Some(Token::Term(t)) => {
                let t = *t;
                self.pos += 1;
                Ok(Expr::terminal(t))
            }
            Some(Token::Close) => self.syntax("unexpected `)`"),
            Some(Token::Op(op)) => {
                let op = *op;
                self.syntax(format!("operator {op} outside parentheses"))
            }
            Some(Token::Open) => {
                self.pos += 1;
                if let Some(Token::Op(op)) = self.tokens.get(self.pos) {
                    let op = *op;
                    if !op.is_unary() {
                        return self.syntax(format!("binary operator {op} used in prefix position"));
                    }
                    self.pos += 1;
                    let child = self.expr()?;
                    self.expect_close()?;
                    return Expr::unary(op, child);
                }
                let left = self.expr()?;
                let op = match self.tokens.get(self.pos) {
                    Some(Token::Op(op)) => *op,
                    _ => return self.syntax("expected an infix operator"),
                };
                if op.is_unary() {
                    return self.syntax(format!("unary operator {op} used in infix position"));
                }
                self.pos += 1;
                let right = self.expr()?;
                self.expect_close()?;
                Expr::binary(op, left, right)
            }
        }
    }
}

/// Parses the canonical token format.
pub fn parse(text: &str) -> Result<Expr, LangError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.syntax("trailing tokens after expression");
    }
    Ok(expr)
}

/// Canonical token string of `e`.
pub fn print(e: &Expr) -> String {
    e.print()
}

/// Result type of `e`. Always succeeds for values built by this module.
pub fn infer_type(e: &Expr) -> TypeTag {
    e.ty()
}

pub fn metrics(e: &Expr) -> Metrics {
    e.metrics()
}

/// Walks the tree and re-checks every node against the signature table.
pub fn type_check(e: &Expr) -> Result<TypeTag, LangError> {
    match e.view() {
        ExprView::Terminal(t) => Ok(t.ty()),
        ExprView::Unary(op, c) => {
            let tys = [type_check(c)?];
            if op.accepts(&tys) {
                Ok(op.result_type())
            } else {
                Err(LangError::type_error(op, &tys))
            }
        }
        ExprView::Binary(op, l, r) => {
            let tys = [type_check(l)?, type_check(r)?];
            if op.accepts(&tys) {
                Ok(op.result_type())
            } else {
                Err(LangError::type_error(op, &tys))
            }
        }
    }
}
