//! Symbolic differentiation rules. The result is simplified by the caller.

use super::{BinaryOp, Expr, UnaryOp};

pub(super) fn derivative(e: &Expr, v: &str) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(n) => Expr::c(if &**n == v { 1.0 } else { 0.0 }),
        Expr::Unary(op, a) => {
            let da = derivative(a, v);
            let a = (**a).clone();
            let outer = match op {
                UnaryOp::Neg => return -da,
                // d sqrt(a) = da / (2 sqrt(a))
                UnaryOp::Sqrt => return da / (2.0 * a.sqrt()),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln => return da / a,
                UnaryOp::Sin => a.cos(),
                UnaryOp::Cos => -a.sin(),
                UnaryOp::Tan => 1.0 + a.tan().powf(2.0),
                UnaryOp::Arctan => return da / (1.0 + a.powf(2.0)),
            };
            outer * da
        }
        Expr::Binary(op, a, b) => {
            let da = derivative(a, v);
            let db = derivative(b, v);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => da + db,
                BinaryOp::Sub => da - db,
                BinaryOp::Mul => da * b + a * db,
                BinaryOp::Div => {
                    if db.as_const() == Some(0.0) {
                        da / b
                    } else {
                        (da * b.clone() - a * db) / b.powf(2.0)
                    }
                }
            }
        }
        Expr::Pow(a, c) => {
            let da = derivative(a, v);
            if *c == 1.0 {
                return da;
            }
            Expr::c(*c) * (**a).clone().powf(c - 1.0) * da
        }
    }
}
