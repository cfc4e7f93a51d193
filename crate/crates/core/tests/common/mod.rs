//! Reference semantics for integration tests: a small evaluator over fixed
//! 3x3 arrays, written without the crate's interpreter so the two can be
//! checked against each other.

#![allow(dead_code)]

use std::collections::HashMap;

use eqrw_core::{Expr, ExprView, Op, Terminal, TypeTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Val {
    S(f64),
    M(Mat),
    V(Vec3),
}

const EPS: f64 = 1e-9;

fn entry(rng: &mut ChaCha8Rng) -> f64 {
    let mag = rng.gen_range(0.1..=2.0);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn norm1(a: &Mat) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan with partial pivoting.
pub fn inverse(a: &Mat) -> Option<Mat> {
    let mut m = *a;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[pivot][col].abs() < EPS {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for j in 0..3 {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col];
                for j in 0..3 {
                    m[r][j] -= f * m[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    let cond = norm1(a) * norm1(&inv);
    (cond.is_finite() && cond <= 1e9).then_some(inv)
}

/// Random values for every terminal; special terminals keep their meaning.
pub struct Env(HashMap<char, Val>);

impl Env {
    pub fn random(seed: u64) -> Env {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut map = HashMap::new();
        for t in Terminal::all().filter(|t| !t.is_special()) {
            let v = match t.ty() {
                TypeTag::Scalar => Val::S(entry(&mut rng)),
                TypeTag::Vector => Val::V([entry(&mut rng), entry(&mut rng), entry(&mut rng)]),
                TypeTag::Matrix => loop {
                    let mut m = [[0.0; 3]; 3];
                    for row in m.iter_mut() {
                        for x in row.iter_mut() {
                            *x = entry(&mut rng);
                        }
                    }
                    if let Some(inv) = inverse(&m) {
                        if norm1(&m) * norm1(&inv) <= 1e3 {
                            break Val::M(m);
                        }
                    }
                },
            };
            map.insert(t.symbol(), v);
        }
        map.insert('0', Val::S(0.0));
        map.insert('1', Val::S(1.0));
        map.insert('O', Val::M([[0.0; 3]; 3]));
        map.insert('I', Val::M([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
        map.insert('o', Val::V([0.0; 3]));
        Env(map)
    }
}

fn scale_m(s: f64, m: &Mat) -> Mat {
    m.map(|row| row.map(|x| s * x))
}

fn zip_m(a: &Mat, b: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = f(a[i][j], b[i][j]);
        }
    }
    out
}

fn zip_v(a: &Vec3, b: &Vec3, f: impl Fn(f64, f64) -> f64) -> Vec3 {
    [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])]
}

/// `None` when a division or inversion is undefined or a value overflows.
pub fn eval(e: &Expr, env: &Env) -> Option<Val> {
    let v = match e.view() {
        ExprView::Terminal(t) => env.0[&t.symbol()],
        ExprView::Unary(op, c) => match (op, eval(c, env)?) {
            (Op::NegS, Val::S(x)) => Val::S(-x),
            (Op::InvS, Val::S(x)) if x.abs() >= EPS => Val::S(1.0 / x),
            (Op::NegM, Val::M(m)) => Val::M(scale_m(-1.0, &m)),
            (Op::InvM, Val::M(m)) => Val::M(inverse(&m)?),
            (Op::TrnM, Val::M(m)) => {
                let mut t = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        t[i][j] = m[j][i];
                    }
                }
                Val::M(t)
            }
            (Op::NegV, Val::V(v)) => Val::V(v.map(|x| -x)),
            _ => return None,
        },
        ExprView::Binary(op, l, r) => match (op, eval(l, env)?, eval(r, env)?) {
            (Op::AddS, Val::S(x), Val::S(y)) => Val::S(x + y),
            (Op::SubS, Val::S(x), Val::S(y)) => Val::S(x - y),
            (Op::MulS, Val::S(x), Val::S(y)) => Val::S(x * y),
            (Op::DivS, Val::S(x), Val::S(y)) if y.abs() >= EPS => Val::S(x / y),
            (Op::AddM, Val::M(a), Val::M(b)) => Val::M(zip_m(&a, &b, |x, y| x + y)),
            (Op::SubM, Val::M(a), Val::M(b)) => Val::M(zip_m(&a, &b, |x, y| x - y)),
            (Op::MulM, Val::M(a), Val::M(b)) => Val::M(mat_mul(&a, &b)),
            (Op::MulM, Val::M(a), Val::S(s)) | (Op::MulM, Val::S(s), Val::M(a)) => Val::M(scale_m(s, &a)),
            (Op::AddV, Val::V(a), Val::V(b)) => Val::V(zip_v(&a, &b, |x, y| x + y)),
            (Op::SubV, Val::V(a), Val::V(b)) => Val::V(zip_v(&a, &b, |x, y| x - y)),
            (Op::MulV, Val::M(m), Val::V(v)) => Val::V([0, 1, 2].map(|i| (0..3).map(|k| m[i][k] * v[k]).sum())),
            (Op::MulV, Val::S(s), Val::V(v)) | (Op::MulV, Val::V(v), Val::S(s)) => Val::V(v.map(|x| s * x)),
            _ => return None,
        },
    };
    finite(&v).then_some(v)
}

fn finite(v: &Val) -> bool {
    match v {
        Val::S(x) => x.is_finite(),
        Val::M(m) => m.iter().flatten().all(|x| x.is_finite()),
        Val::V(v) => v.iter().all(|x| x.is_finite()),
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-9 + 1e-6 * x.abs().max(y.abs())
}

pub fn approx(a: &Val, b: &Val) -> bool {
    match (a, b) {
        (Val::S(x), Val::S(y)) => close(*x, *y),
        (Val::M(x), Val::M(y)) => x.iter().flatten().zip(y.iter().flatten()).all(|(a, b)| close(*a, *b)),
        (Val::V(x), Val::V(y)) => x.iter().zip(y).all(|(a, b)| close(*a, *b)),
        _ => false,
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub agree: usize,
    pub disagree: usize,
    pub undefined: usize,
}

/// Compares two programs on `trials` environments drawn from `seed`.
pub fn compare(a: &Expr, b: &Expr, trials: u64, seed: u64) -> Tally {
    let mut t = Tally::default();
    for i in 0..trials {
        let env = Env::random(seed.wrapping_mul(0x9e37_79b9).wrapping_add(i));
        match (eval(a, &env), eval(b, &env)) {
            (Some(x), Some(y)) if approx(&x, &y) => t.agree += 1,
            (Some(_), Some(_)) => t.disagree += 1,
            _ => t.undefined += 1,
        }
    }
    t
}
