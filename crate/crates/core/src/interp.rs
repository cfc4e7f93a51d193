//! Numeric interpretation of programs over concrete scalars, `n x n`
//! matrices and `n`-vectors. Used as a semantic oracle: agreement on random
//! valuations is evidence of equivalence, a disagreement is a witness
//! against it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lang::{Expr, ExprView, Op, Terminal, TypeTag};

/// Default relative tolerance for value comparison.
pub const REL_TOL: f64 = 1e-6;
/// Absolute floor for comparisons of near-zero values.
pub const ABS_TOL: f64 = 1e-9;

/// Sampled matrices with a larger 2-norm condition number are rejected.
pub const MAX_SAMPLE_CONDITION: f64 = 1e3;

// Divisors smaller than this, or matrices worse conditioned than
// SINGULAR_CONDITION, are treated as singular during evaluation.
const ZERO_DIVISOR: f64 = 1e-9;
const SINGULAR_CONDITION: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("inverse of a singular matrix")]
    SingularMatrix,
    #[error("non-finite intermediate value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Matrix(DMatrix<f64>),
    Vector(DVector<f64>),
}

impl Value {
    pub fn ty(&self) -> TypeTag {
        match self {
            Value::Scalar(_) => TypeTag::Scalar,
            Value::Matrix(_) => TypeTag::Matrix,
            Value::Vector(_) => TypeTag::Vector,
        }
    }

    fn entries(&self) -> &[f64] {
        match self {
            Value::Scalar(x) => std::slice::from_ref(x),
            Value::Matrix(m) => m.as_slice(),
            Value::Vector(v) => v.as_slice(),
        }
    }

    fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.is_finite())
    }

    /// Element-wise comparison: `|x - y| <= rel * max(|x|, |y|)` or
    /// `|x - y| <= abs`.
    pub fn approx_eq(&self, other: &Value, rel: f64, abs: f64) -> bool {
        if self.ty() != other.ty() {
            return false;
        }
        let (xs, ys) = (self.entries(), other.entries());
        xs.len() == ys.len()
            && xs.iter().zip(ys).all(|(x, y)| {
                let d = (x - y).abs();
                d <= abs || d <= rel * x.abs().max(y.abs())
            })
    }
}

/// Concrete values for every terminal.
#[derive(Debug, Clone)]
pub struct Valuation {
    dim: usize,
    scalars: [f64; 5],
    matrices: Vec<DMatrix<f64>>,
    vectors: Vec<DVector<f64>>,
}

fn sample_entry<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let magnitude = rng.gen_range(0.1..=2.0);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn index_of(symbol: char, set: &str) -> usize {
    set.find(symbol).expect("terminal belongs to its type's set")
}

impl Valuation {
    /// Draws a valuation: entries uniform on `[-2, -0.1] U [0.1, 2]`, matrices
    /// resampled until their condition number is at most 1e3.
    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Valuation {
        assert!(dim > 0, "dimension must be positive");
        let scalars = std::array::from_fn(|_| sample_entry(rng));
        let matrices = (0..5)
            .map(|_| loop {
                let m = DMatrix::from_fn(dim, dim, |_, _| sample_entry(rng));
                if condition_number(&m) <= MAX_SAMPLE_CONDITION {
                    break m;
                }
            })
            .collect();
        let vectors = (0..5)
            .map(|_| DVector::from_fn(dim, |_, _| sample_entry(rng)))
            .collect();
        Valuation {
            dim,
            scalars,
            matrices,
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set_scalar(&mut self, t: Terminal, value: f64) {
        assert!(
            t.ty() == TypeTag::Scalar && !t.is_special(),
            "{t} is not a scalar variable"
        );
        self.scalars[index_of(t.symbol(), "abcde")] = value;
    }

    pub fn set_matrix(&mut self, t: Terminal, value: DMatrix<f64>) {
        assert!(
            t.ty() == TypeTag::Matrix && !t.is_special(),
            "{t} is not a matrix variable"
        );
        assert_eq!(value.shape(), (self.dim, self.dim));
        self.matrices[index_of(t.symbol(), "ABCDE")] = value;
    }

    pub fn set_vector(&mut self, t: Terminal, value: DVector<f64>) {
        assert!(
            t.ty() == TypeTag::Vector && !t.is_special(),
            "{t} is not a vector variable"
        );
        assert_eq!(value.len(), self.dim);
        self.vectors[index_of(t.symbol(), "vwxyz")] = value;
    }

    pub fn lookup(&self, t: Terminal) -> Value {
        let n = self.dim;
        match t.symbol() {
            '0' => Value::Scalar(0.0),
            '1' => Value::Scalar(1.0),
            'O' => Value::Matrix(DMatrix::zeros(n, n)),
            'I' => Value::Matrix(DMatrix::identity(n, n)),
            'o' => Value::Vector(DVector::zeros(n)),
            c @ 'a'..='e' => Value::Scalar(self.scalars[index_of(c, "abcde")]),
            c @ 'A'..='E' => Value::Matrix(self.matrices[index_of(c, "ABCDE")].clone()),
            c => Value::Vector(self.vectors[index_of(c, "vwxyz")].clone()),
        }
    }
}

fn checked(v: Value) -> Result<Value, NumericError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericError::NonFinite)
    }
}

fn invert(m: DMatrix<f64>) -> Result<DMatrix<f64>, NumericError> {
    if condition_number(&m) > SINGULAR_CONDITION {
        return Err(NumericError::SingularMatrix);
    }
    m.try_inverse().ok_or(NumericError::SingularMatrix)
}

fn reciprocal(x: f64) -> Result<f64, NumericError> {
    if x.abs() < ZERO_DIVISOR {
        Err(NumericError::DivisionByZero)
    } else {
        Ok(1.0 / x)
    }
}

/// Evaluates `e` under `val`.
pub fn eval(e: &Expr, val: &Valuation) -> Result<Value, NumericError> {
    use Value::*;
    let v = match e.view() {
        ExprView::Terminal(t) => return Ok(val.lookup(t)),
        ExprView::Unary(op, c) => match (op, eval(c, val)?) {
            (Op::InvS, Scalar(x)) => Scalar(reciprocal(x)?),
            (Op::NegS, Scalar(x)) => Scalar(-x),
            (Op::InvM, Matrix(m)) => Matrix(invert(m)?),
            (Op::NegM, Matrix(m)) => Matrix(-m),
            (Op::TrnM, Matrix(m)) => Matrix(m.transpose()),
            (Op::NegV, Vector(v)) => Vector(-v),
            (op, v) => unreachable!("ill-typed unary {op} on {}", v.ty()),
        },
        ExprView::Binary(op, l, r) => match (op, eval(l, val)?, eval(r, val)?) {
            (Op::AddS, Scalar(x), Scalar(y)) => Scalar(x + y),
            (Op::SubS, Scalar(x), Scalar(y)) => Scalar(x - y),
            (Op::MulS, Scalar(x), Scalar(y)) => Scalar(x * y),
            (Op::DivS, Scalar(x), Scalar(y)) => Scalar(x * reciprocal(y)?),
            (Op::AddM, Matrix(x), Matrix(y)) => Matrix(x + y),
            (Op::SubM, Matrix(x), Matrix(y)) => Matrix(x - y),
            (Op::MulM, Matrix(x), Matrix(y)) => Matrix(x * y),
            (Op::MulM, Matrix(x), Scalar(s)) | (Op::MulM, Scalar(s), Matrix(x)) => Matrix(x * s),
            (Op::AddV, Vector(x), Vector(y)) => Vector(x + y),
            (Op::SubV, Vector(x), Vector(y)) => Vector(x - y),
            (Op::MulV, Matrix(m), Vector(v)) => Vector(m * v),
            (Op::MulV, Scalar(s), Vector(v)) | (Op::MulV, Vector(v), Scalar(s)) => Vector(v * s),
            (op, l, r) => unreachable!("ill-typed binary {op} on ({}, {})", l.ty(), r.ty()),
        },
    };
    checked(v)
}

/// Tally of a randomized equivalence test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub agree: usize,
    pub disagree: usize,
    /// Trials where either side raised a [`NumericError`].
    pub skip: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot compare a {left} program with a {right} program")]
pub struct TypeMismatch {
    pub left: TypeTag,
    pub right: TypeTag,
}

/// Seeded random-valuation tester.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub dim: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            dim: 3,
            seed: 0x5eed,
            rel_tol: REL_TOL,
            abs_tol: ABS_TOL,
        }
    }
}

impl Oracle {
    pub fn with_seed(seed: u64) -> Oracle {
        Oracle {
            seed,
            ..Oracle::default()
        }
    }

    /// Valuation used for trial `i`; independent of how many trials run.
    pub fn valuation(&self, trial: u64) -> Valuation {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        Valuation::sample(self.dim, &mut rng)
    }

    pub fn compare(&self, a: &Expr, b: &Expr, trials: usize) -> Result<OracleReport, TypeMismatch> {
        if a.ty() != b.ty() {
            return Err(TypeMismatch {
                left: a.ty(),
                right: b.ty(),
            });
        }
        let mut report = OracleReport::default();
        for trial in 0..trials as u64 {
            let val = self.valuation(trial);
            match (eval(a, &val), eval(b, &val)) {
                (Ok(x), Ok(y)) if x.approx_eq(&y, self.rel_tol, self.abs_tol) => report.agree += 1,
                (Ok(_), Ok(_)) => report.disagree += 1,
                _ => report.skip += 1,
            }
        }
        Ok(report)
    }
}

/// [`Oracle::compare`] with the default oracle settings.
pub fn semantically_equal(a: &Expr, b: &Expr, trials: usize) -> Result<OracleReport, TypeMismatch> {
    Oracle::default().compare(a, b, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn t(c: char) -> Terminal {
        Terminal::new(c).unwrap()
    }

    #[test]
    fn scalar_arithmetic() {
        let mut val = Oracle::default().valuation(0);
        val.set_scalar(t('a'), 2.0);
        val.set_scalar(t('b'), 3.0);
        assert_eq!(eval(&p("( a +s b )"), &val), Ok(Value::Scalar(5.0)));
        assert_eq!(eval(&p("( a /s b )"), &val), Ok(Value::Scalar(2.0 / 3.0)));
        assert_eq!(eval(&p("( is a )"), &val), Ok(Value::Scalar(0.5)));
        assert_eq!(eval(&p("( ns ( a -s b ) )"), &val), Ok(Value::Scalar(1.0)));
    }

    #[test]
    fn matrix_and_vector_semantics() {
        let mut val = Oracle::default().valuation(1);
        val.set_matrix(
            t('A'),
            DMatrix::from_row_slice(3, 3, &[1., 2., 0., 0., 1., 0., 0., 0., 2.]),
        );
        val.set_vector(t('v'), DVector::from_row_slice(&[1., 1., 1.]));
        val.set_scalar(t('a'), 2.0);
        assert_eq!(
            eval(&p("( A *v v )"), &val),
            Ok(Value::Vector(DVector::from_row_slice(&[3., 1., 2.])))
        );
        assert_eq!(
            eval(&p("( v *v a )"), &val),
            Ok(Value::Vector(DVector::from_row_slice(&[2., 2., 2.])))
        );
        let inv = eval(&p("( A *m ( im A ) )"), &val).unwrap();
        assert!(inv.approx_eq(&Value::Matrix(DMatrix::identity(3, 3)), REL_TOL, ABS_TOL));
        let tr = eval(&p("( tm A )"), &val).unwrap();
        assert_eq!(
            tr,
            Value::Matrix(DMatrix::from_row_slice(3, 3, &[1., 0., 0., 2., 1., 0., 0., 0., 2.]))
        );
    }

    #[test]
    fn special_terminals_are_constants() {
        let val = Oracle::default().valuation(7);
        assert_eq!(eval(&p("I"), &val), Ok(Value::Matrix(DMatrix::identity(3, 3))));
        assert_eq!(eval(&p("o"), &val), Ok(Value::Vector(DVector::zeros(3))));
        assert!(eval(&p("( a *s 0 )"), &val)
            .unwrap()
            .approx_eq(&Value::Scalar(0.0), 0.0, 0.0));
    }

    #[test]
    fn numeric_errors() {
        let val = Oracle::default().valuation(2);
        assert_eq!(eval(&p("( a /s ( b -s b ) )"), &val), Err(NumericError::DivisionByZero));
        assert_eq!(eval(&p("( is 0 )"), &val), Err(NumericError::DivisionByZero));
        assert_eq!(eval(&p("( im O )"), &val), Err(NumericError::SingularMatrix));
        assert_eq!(eval(&p("( im ( A -m A ) )"), &val), Err(NumericError::SingularMatrix));
    }

    #[test]
    fn sampled_valuations_are_safe() {
        let oracle = Oracle::default();
        for trial in 0..50 {
            let val = oracle.valuation(trial);
            for s in "abcde".chars() {
                let Value::Scalar(x) = val.lookup(t(s)) else {
                    unreachable!()
                };
                assert!((0.1..=2.0).contains(&x.abs()));
            }
            for m in "ABCDE".chars() {
                let Value::Matrix(x) = val.lookup(t(m)) else {
                    unreachable!()
                };
                assert!(condition_number(&x) <= MAX_SAMPLE_CONDITION);
            }
        }
    }

    #[test]
    fn valuations_are_reproducible() {
        let o = Oracle::with_seed(99);
        let a = o.valuation(3);
        let b = o.valuation(3);
        assert_eq!(a.lookup(t('C')), b.lookup(t('C')));
        assert_ne!(a.lookup(t('C')), o.valuation(4).lookup(t('C')));
    }

    #[test]
    fn transpose_of_product() {
        let r = semantically_equal(&p("( tm ( A *m B ) )"), &p("( ( tm B ) *m ( tm A ) )"), 100).unwrap();
        assert_eq!(
            r,
            OracleReport {
                agree: 100,
                disagree: 0,
                skip: 0
            }
        );
        // but not ( tm A ) *m ( tm B )
        let r = semantically_equal(&p("( tm ( A *m B ) )"), &p("( ( tm A ) *m ( tm B ) )"), 100).unwrap();
        assert_eq!(r.disagree, 100);
    }

    #[test]
    fn self_division_is_one() {
        let r = semantically_equal(&p("( b /s b )"), &p("1"), 100).unwrap();
        assert_eq!(r.agree, 100);
    }

    #[test]
    fn identical_programs_agree() {
        let e = p("( ( A *m ( im B ) ) *v ( v +v ( c *v w ) ) )");
        let r = semantically_equal(&e, &e, 50).unwrap();
        assert_eq!(r.disagree, 0);
    }

    #[test]
    fn sum_vs_product_disagree() {
        let r = semantically_equal(&p("( a +s b )"), &p("( a *s b )"), 100).unwrap();
        assert!(r.disagree >= 99, "{r:?}");
    }

    #[test]
    fn type_mismatch() {
        assert!(semantically_equal(&p("a"), &p("A"), 1).is_err());
    }
}
