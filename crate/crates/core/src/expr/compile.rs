//! Postfix stack programs for repeated evaluation.

use smallvec::SmallVec;

use super::{apply_binary, apply_pow, apply_unary, BinaryOp, Expr, UnaryOp};
use crate::error::ExprError;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
    Pow(f64),
}

/// An expression compiled against a fixed slot layout.
///
/// Produces the same values and the same domain errors as [`Expr::eval`].
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    /// Source subtree of every operator, used only for error messages.
    nodes: Vec<Expr>,
    max_depth: usize,
    arity: usize,
}

impl Compiled {
    pub(super) fn new(e: &Expr, layout: &[&str]) -> Result<Compiled, ExprError> {
        let mut c = Compiled {
            ops: Vec::with_capacity(e.size()),
            nodes: Vec::with_capacity(e.size()),
            max_depth: 0,
            arity: layout.len(),
        };
        c.emit(e, layout)?;
        let mut depth = 0usize;
        for op in &c.ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Binary(_) => depth -= 1,
                Op::Unary(_) | Op::Pow(_) => {}
            }
            c.max_depth = c.max_depth.max(depth);
        }
        Ok(c)
    }

    fn emit(&mut self, e: &Expr, layout: &[&str]) -> Result<(), ExprError> {
        let op = match e {
            Expr::Const(v) => Op::Const(*v),
            Expr::Var(n) => match layout.iter().position(|s| *s == &**n) {
                Some(i) => Op::Var(i),
                None if &**n == "pi" => Op::Const(std::f64::consts::PI),
                None => return Err(ExprError::Unbound(n.to_string())),
            },
            Expr::Unary(op, a) => {
                self.emit(a, layout)?;
                Op::Unary(*op)
            }
            Expr::Binary(op, a, b) => {
                self.emit(a, layout)?;
                self.emit(b, layout)?;
                Op::Binary(*op)
            }
            Expr::Pow(a, c) => {
                self.emit(a, layout)?;
                Op::Pow(*c)
            }
        };
        self.ops.push(op);
        self.nodes.push(e.clone());
        Ok(())
    }

    /// Number of slots the program reads.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates with `vals[i]` bound to the `i`-th layout name.
    pub fn eval<T: Scalar>(&self, vals: &[T]) -> Result<T, ExprError> {
        debug_assert!(vals.len() >= self.arity);
        let mut stack: SmallVec<[T; 16]> = SmallVec::with_capacity(self.max_depth);
        for (k, op) in self.ops.iter().enumerate() {
            let node = || self.nodes[k].to_string();
            match *op {
                Op::Const(v) => stack.push(lit(v)),
                Op::Var(i) => stack.push(vals[i]),
                Op::Unary(u) => {
                    let a = stack.pop().expect("stack underflow");
                    stack.push(apply_unary(u, a, node)?);
                }
                Op::Binary(b) => {
                    let r = stack.pop().expect("stack underflow");
                    let l = stack.pop().expect("stack underflow");
                    stack.push(apply_binary(b, l, r, node)?);
                }
                Op::Pow(c) => {
                    let a = stack.pop().expect("stack underflow");
                    stack.push(apply_pow(a, c, node)?);
                }
            }
        }
        Ok(stack.pop().expect("empty program"))
    }
}
