//! Constant folding and identity elimination.

use super::{apply_binary, apply_pow, apply_unary, BinaryOp, Expr, UnaryOp};

pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Unary(op, a) => unary(*op, simplify(a)),
        Expr::Binary(op, a, b) => binary(*op, simplify(a), simplify(b)),
        Expr::Pow(a, c) => pow(simplify(a), *c),
    }
}

fn unary(op: UnaryOp, a: Expr) -> Expr {
    if let Expr::Const(v) = a {
        if let Ok(r) = apply_unary(op, v, String::new) {
            return Expr::Const(r);
        }
    }
    match (op, a) {
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => *inner,
        (op, a) => Expr::unary(op, a),
    }
}

fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        if let Ok(r) = apply_binary(op, *x, *y, String::new) {
            return Expr::Const(r);
        }
    }
    let (ca, cb) = (a.as_const(), b.as_const());
    match op {
        BinaryOp::Add => match (ca, cb) {
            (Some(z), _) if z == 0.0 => b,
            (_, Some(z)) if z == 0.0 => a,
            _ => Expr::binary(op, a, b),
        },
        BinaryOp::Sub => match (ca, cb) {
            (_, Some(z)) if z == 0.0 => a,
            (Some(z), _) if z == 0.0 => unary(UnaryOp::Neg, b),
            _ => Expr::binary(op, a, b),
        },
        BinaryOp::Mul => match (ca, cb) {
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Expr::zero(),
            (Some(o), _) if o == 1.0 => b,
            (_, Some(o)) if o == 1.0 => a,
            (Some(m), _) if m == -1.0 => unary(UnaryOp::Neg, b),
            (_, Some(m)) if m == -1.0 => unary(UnaryOp::Neg, a),
            _ => Expr::binary(op, a, b),
        },
        BinaryOp::Div => match (ca, cb) {
            (Some(z), _) if z == 0.0 => Expr::zero(),
            (_, Some(o)) if o == 1.0 => a,
            _ => Expr::binary(op, a, b),
        },
    }
}

fn pow(a: Expr, c: f64) -> Expr {
    if c == 1.0 {
        return a;
    }
    if c == 0.0 {
        return Expr::one();
    }
    if let Expr::Const(v) = a {
        if let Ok(r) = apply_pow(v, c, String::new) {
            return Expr::Const(r);
        }
    }
    Expr::Pow(Box::new(a), c)
}
