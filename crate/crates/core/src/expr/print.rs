//! Precedence-aware printer emitting the parser's grammar.

use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(v) if v.is_sign_negative() => NEG,
        Expr::Const(_) | Expr::Var(_) => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => NEG,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => ADD,
        Expr::Binary(..) => MUL,
        Expr::Pow(..) => POW,
    }
}

pub(crate) fn number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => f.write_str(&number(*v)),
            Expr::Var(n) => f.write_str(n),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_operand(f, a, NEG)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let (p, sym) = match op {
                    BinaryOp::Add => (ADD, " + "),
                    BinaryOp::Sub => (ADD, " - "),
                    BinaryOp::Mul => (MUL, "*"),
                    BinaryOp::Div => (MUL, "/"),
                };
                write_operand(f, a, p)?;
                f.write_str(sym)?;
                // Right operands of equal precedence keep their grouping.
                write_operand(f, b, p + 1)
            }
            Expr::Pow(a, c) => {
                write_operand(f, a, ATOM)?;
                if *c < 0.0 {
                    write!(f, "^({})", number(*c))
                } else {
                    write!(f, "^{}", number(*c))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    fn round_trip(s: &str) {
        let e = parse(s).unwrap();
        let printed = e.to_string();
        assert_eq!(parse(&printed).unwrap(), e, "{s} printed as {printed}");
    }

    #[test]
    fn round_trips_preserve_trees() {
        for s in [
            "u^2*ux",
            "x - (t - u)",
            "x/(t*u)",
            "-(x + t)",
            "(-x)^2",
            "-x^2",
            "x^(-2/3)",
            "sqrt(u)*exp(-t)",
            "2*sigma - 3*xi",
            "(x^2)^3",
            "arctan(1/u) + tan(p - q)",
            "1.5e-7*x + 1e20",
        ] {
            round_trip(s);
        }
    }

    #[test]
    fn readable_output() {
        assert_eq!(parse("u^2*ux").unwrap().to_string(), "u^2*ux");
        assert_eq!(parse("(x+t)*u").unwrap().to_string(), "(x + t)*u");
        assert_eq!(Expr::var("x").powf(-0.5).to_string(), "x^(-0.5)");
    }

    #[test]
    fn negative_constants_are_grouped() {
        let e = Expr::var("x") - Expr::c(-2.0);
        assert_eq!(e.to_string(), "x - -2");
        let e = Expr::c(-2.0).powf(2.0);
        assert_eq!(e.to_string(), "(-2)^2");
    }
}
