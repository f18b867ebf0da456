//! Scalar expressions in named real variables.
//!
//! Every coefficient, right-hand side and arbitrary function handled by the
//! crate is an [`Expr`]. Expressions are parsed from a small infix grammar,
//! printed back in the same grammar, differentiated symbolically and either
//! evaluated directly against an [`Env`] or compiled to a [`Compiled`] stack
//! program for hot loops.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;          (* exponent must fold to a constant *)
//! primary = number | name | func "(" expr ")" | "(" expr ")" ;
//! func    = "sqrt" | "exp" | "ln" | "sin" | "cos" | "tan" | "arctan" ;
//! number  = digits [ "." [ digits ] ] [ exponent ] | "." digits [ exponent ] ;
//! exponent= ("e" | "E") [ "+" | "-" ] digits ;
//! name    = letter { letter | digit | "_" } ;
//! ```
//!
//! Names are the variables `x t u ux ut sigma xi p q`, the constant `pi`,
//! and any parameter declared on the [`Parser`].

mod compile;
mod diff;
mod parse;
mod print;
mod simplify;

use std::collections::{BTreeMap, BTreeSet};
use std::ops;
use std::sync::Arc;

pub use compile::Compiled;
pub use parse::{parse, Parser};

use crate::error::ExprError;
use crate::scalar::{lit, Scalar};

/// Variables every parser accepts without declaration.
pub const VARIABLES: [&str; 9] = ["x", "t", "u", "ux", "ut", "sigma", "xi", "p", "q"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Arctan,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Arctan => "arctan",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "arctan" => UnaryOp::Arctan,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree. `Pow` carries a constant real exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::unary(UnaryOp::Ln, self)
    }

    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn tan(self) -> Expr {
        Expr::unary(UnaryOp::Tan, self)
    }

    pub fn arctan(self) -> Expr {
        Expr::unary(UnaryOp::Arctan, self)
    }

    /// Constant value if the tree is a literal.
    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Value of a variable-free tree.
    pub fn const_value(&self) -> Option<f64> {
        if self.vars().is_empty() {
            self.eval::<f64>(&Env::new()).ok()
        } else {
            None
        }
    }

    /// Names of all variables occurring in the tree.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(n) => {
                out.insert(n.to_string());
            }
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(n) => &**n == name,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.depends_on(name),
            Expr::Binary(_, a, b) => a.depends_on(name) || b.depends_on(name),
        }
    }

    /// Replaces every occurrence of variable `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Var(n) if &**n == name => with.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(name, with)),
            Expr::Pow(a, c) => Expr::Pow(Box::new(a.substitute(name, with)), *c),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute(name, with), b.substitute(name, with))
            }
        }
    }

    /// Substitutes numeric values for the given names.
    pub fn bind<'a, I>(&self, values: I) -> Expr
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        values
            .into_iter()
            .fold(self.clone(), |e, (n, v)| e.substitute(n, &Expr::Const(v)))
    }

    /// Renames a variable.
    pub fn rename(&self, from: &str, to: &str) -> Expr {
        self.substitute(from, &Expr::var(to))
    }

    /// Exact symbolic partial derivative with respect to `var`, simplified.
    pub fn diff(&self, var: &str) -> Expr {
        diff::derivative(self, var).simplify()
    }

    /// Constant folding and identity elimination.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Tree-walking evaluation. Any non-finite intermediate is a domain error.
    pub fn eval<T: Scalar>(&self, env: &Env<T>) -> Result<T, ExprError> {
        match self {
            Expr::Const(v) => Ok(lit(*v)),
            Expr::Var(n) => env.get(n),
            Expr::Unary(op, a) => apply_unary(*op, a.eval(env)?, || self.to_string()),
            Expr::Binary(op, a, b) => {
                let l = a.eval(env)?;
                let r = b.eval(env)?;
                apply_binary(*op, l, r, || self.to_string())
            }
            Expr::Pow(a, c) => apply_pow(a.eval(env)?, *c, || self.to_string()),
        }
    }

    /// Compiles against a fixed variable layout. Variables outside the layout
    /// are reported as unbound.
    pub fn compile(&self, layout: &[&str]) -> Result<Compiled, ExprError> {
        Compiled::new(self, layout)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

#[inline]
fn checked<T: Scalar>(
    v: T,
    node: impl FnOnce() -> String,
    reason: &'static str,
) -> Result<T, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain {
            node: node(),
            reason,
        })
    }
}

pub(crate) fn apply_unary<T: Scalar>(
    op: UnaryOp,
    a: T,
    node: impl FnOnce() -> String,
) -> Result<T, ExprError> {
    let v = match op {
        UnaryOp::Neg => -a,
        UnaryOp::Sqrt => {
            if a < T::zero() {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "sqrt of a negative number",
                });
            }
            a.sqrt()
        }
        UnaryOp::Exp => a.exp(),
        UnaryOp::Ln => {
            if a <= T::zero() {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "ln of a non-positive number",
                });
            }
            a.ln()
        }
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Tan => a.tan(),
        UnaryOp::Arctan => a.atan(),
    };
    checked(v, node, "non-finite result")
}

pub(crate) fn apply_binary<T: Scalar>(
    op: BinaryOp,
    l: T,
    r: T,
    node: impl FnOnce() -> String,
) -> Result<T, ExprError> {
    let v = match op {
        BinaryOp::Add => l + r,
        BinaryOp::Sub => l - r,
        BinaryOp::Mul => l * r,
        BinaryOp::Div => {
            if r == T::zero() {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "division by zero",
                });
            }
            l / r
        }
    };
    checked(v, node, "non-finite result")
}

/// Integral exponents of moderate size use repeated multiplication.
pub(crate) fn integral_exponent(c: f64) -> Option<i32> {
    (c.fract() == 0.0 && c.abs() <= 64.0).then_some(c as i32)
}

pub(crate) fn apply_pow<T: Scalar>(
    base: T,
    c: f64,
    node: impl FnOnce() -> String,
) -> Result<T, ExprError> {
    let v = match integral_exponent(c) {
        Some(n) => {
            if n < 0 && base == T::zero() {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "zero raised to a negative power",
                });
            }
            base.powi(n)
        }
        None => {
            if base < T::zero() {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "negative base with non-integer exponent",
                });
            }
            if base == T::zero() && c < 0.0 {
                return Err(ExprError::Domain {
                    node: node(),
                    reason: "zero raised to a negative power",
                });
            }
            base.powf(lit(c))
        }
    };
    checked(v, node, "non-finite result")
}

/// Variable bindings. Looking up an unbound name is an error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env<T = f64> {
    vars: BTreeMap<String, T>,
}

impl<T: Scalar> Env<T> {
    pub fn new() -> Self {
        Env {
            vars: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: T) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: T) {
        self.vars.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Result<T, ExprError> {
        if name == "pi" && !self.vars.contains_key("pi") {
            return Ok(lit(std::f64::consts::PI));
        }
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| ExprError::Unbound(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<T: Scalar> FromIterator<(String, T)> for Env<T> {
    fn from_iter<I: IntoIterator<Item = (String, T)>>(iter: I) -> Self {
        Env {
            vars: iter.into_iter().collect(),
        }
    }
}

macro_rules! impl_binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::Const(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::Const(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, f64)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn eval_linear_combination() {
        let e = parse("x + 2*t").unwrap();
        assert_eq!(e.eval(&env(&[("x", 1.0), ("t", 2.0)])).unwrap(), 5.0);
    }

    #[test]
    fn eval_reciprocal() {
        let e = parse("1/u").unwrap();
        assert_eq!(e.eval(&env(&[("u", 2.0)])).unwrap(), 0.5);
    }

    #[test]
    fn sqrt_of_negative_is_domain_error() {
        let e = parse("sqrt(u)").unwrap();
        match e.eval(&env(&[("u", -1.0)])) {
            Err(ExprError::Domain { node, .. }) => assert_eq!(node, "sqrt(u)"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let e = parse("x + t").unwrap();
        assert_eq!(
            e.eval(&env(&[("x", 1.0)])),
            Err(ExprError::Unbound("t".into()))
        );
    }

    #[test]
    fn division_by_zero_names_the_node() {
        let e = parse("x + 1/u").unwrap();
        match e.eval(&env(&[("x", 1.0), ("u", 0.0)])) {
            Err(ExprError::Domain { node, reason }) => {
                assert_eq!(node, "1/u");
                assert_eq!(reason, "division by zero");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diff_reciprocal() {
        let d = parse("1/u").unwrap().diff("u");
        for u in [0.5, 1.0, 3.0] {
            let v = d.eval(&env(&[("u", u)])).unwrap();
            assert!((v + 1.0 / (u * u)).abs() < 1e-15);
        }
    }

    #[test]
    fn diff_of_independent_variable_is_zero() {
        assert_eq!(parse("x*t").unwrap().diff("u"), Expr::Const(0.0));
    }

    #[test]
    fn diff_tan_matches_central_difference() {
        let e = parse("tan(sigma)").unwrap();
        let d = e.diff("sigma");
        let s = 0.3;
        let h = 1e-5;
        let f = |v: f64| e.eval(&env(&[("sigma", v)])).unwrap();
        let fd = (f(s + h) - f(s - h)) / (2.0 * h);
        let exact = d.eval(&env(&[("sigma", s)])).unwrap();
        assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()));
        assert!((exact - (1.0 + s.tan().powi(2))).abs() < 1e-14);
    }

    #[test]
    fn simplify_examples() {
        assert_eq!(parse("0*ux + 3").unwrap().simplify(), Expr::Const(3.0));
        assert_eq!(parse("u*1").unwrap().simplify(), Expr::var("u"));
        assert_eq!(parse("2+3").unwrap().simplify(), Expr::Const(5.0));
    }

    #[test]
    fn substitute_and_bind() {
        let p = Parser::new().with_params(["k0"]);
        let e = p.parse("k0/sqrt(u)").unwrap().bind([("k0", 2.0)]);
        assert!(!e.depends_on("k0"));
        assert_eq!(e.eval(&env(&[("u", 4.0)])).unwrap(), 1.0);
    }

    #[test]
    fn pi_is_a_constant() {
        let e = parse("sin(pi/2)").unwrap();
        assert_eq!(e.eval(&Env::<f64>::new()).unwrap(), 1.0);
    }

    #[test]
    fn f32_evaluation() {
        let e = parse("x^2 + sqrt(t)").unwrap();
        let v: f32 = e.eval(&Env::new().with("x", 1.5f32).with("t", 4.0f32)).unwrap();
        assert!((v - 4.25).abs() < 1e-6);
    }
}
