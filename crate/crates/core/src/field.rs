//! Scalar fields `u(x, t)` with an optional declared domain.

use crate::compat::Interval;
use crate::error::Result;

/// Rectangle `x × t` on which a field may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x: Interval,
    pub t: Interval,
}

impl Domain {
    pub fn contains(&self, x: f64, t: f64) -> bool {
        self.x.contains(x) && self.t.contains(t)
    }
}

/// Deterministic evaluator of a scalar field.
pub trait Evaluator: Send + Sync {
    fn eval(&self, x: f64, t: f64) -> Result<f64>;

    /// Box on which `eval` is meant to succeed; `None` means unrestricted.
    fn domain(&self) -> Option<Domain> {
        None
    }
}

/// Closure adapter with an optional domain.
pub struct FnEvaluator<F> {
    f: F,
    domain: Option<Domain>,
}

impl<F> FnEvaluator<F>
where
    F: Fn(f64, f64) -> Result<f64> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnEvaluator { f, domain: None }
    }

    pub fn on(f: F, domain: Domain) -> Self {
        FnEvaluator { f, domain: Some(domain) }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(f64, f64) -> Result<f64> + Send + Sync,
{
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        (self.f)(x, t)
    }

    fn domain(&self) -> Option<Domain> {
        self.domain
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        (**self).eval(x, t)
    }

    fn domain(&self) -> Option<Domain> {
        (**self).domain()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for std::sync::Arc<E> {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        (**self).eval(x, t)
    }

    fn domain(&self) -> Option<Domain> {
        (**self).domain()
    }
}

/// Field given by an expression in `x` and `t`.
#[derive(Debug, Clone)]
pub struct ExprField {
    compiled: crate::expr::Compiled,
}

impl ExprField {
    pub fn new(e: &crate::expr::Expr) -> Result<Self> {
        Ok(ExprField {
            compiled: e.compile(&["x", "t"])?,
        })
    }
}

impl Evaluator for ExprField {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.compiled.eval(&[x, t])?)
    }
}
