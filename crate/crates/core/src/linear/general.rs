//! General solution `u = u1 + u2` of a linear equation.

use std::sync::Arc;

use super::catalog::ClosedForm;
use super::trace::{Trace, Profile};
use super::{gamma_eta, structural_residual, LinearSpec, STRUCTURAL_TOL};
use crate::error::Result;
use crate::expr::Expr;
use crate::families::UnaryFn;
use crate::field::{Domain, Evaluator, ExprField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    /// Add one particular solution of the inhomogeneous equation. Without
    /// it the result solves the equation with `B = 0`.
    pub particular: bool,
    /// RK4 steps per traced characteristic on the transport path.
    pub trace_steps: usize,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions {
            particular: true,
            trace_steps: 100,
        }
    }
}

enum Inner {
    Closed(ClosedForm),
    Transport {
        u1: Trace,
        u2: Trace,
        particular: Option<Trace>,
    },
}

/// Evaluable general solution.
pub struct GeneralSolution {
    inner: Inner,
    domain: Domain,
}

impl GeneralSolution {
    /// Whether a catalog closed form is used.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.inner, Inner::Closed(_))
    }
}

impl Evaluator for GeneralSolution {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        match &self.inner {
            Inner::Closed(c) => c.eval(x, t),
            Inner::Transport { u1, u2, particular } => {
                let mut u = u1.eval(x, t)? + u2.eval(x, t)?;
                if let Some(p) = particular {
                    u += p.eval(x, t)?;
                }
                Ok(u)
            }
        }
    }

    fn domain(&self) -> Option<Domain> {
        Some(self.domain)
    }
}

fn profile(f: UnaryFn) -> Profile {
    Arc::new(move |x| f.eval(x))
}

/// `u = u1 + u2` where `u1` solves `u_t - a u_x = γ u + α` with arbitrary
/// function `f1` and `u2` solves `u_t + a u_x = η u + β` with `f2`.
///
/// Catalog specs use their closed forms, where `f1`, `f2` are functions of
/// the entry's characteristic coordinates. Other specs are solved by tracing
/// characteristics back to `t = 0`, and there `f1`, `f2` are the profiles of
/// `u1`, `u2` at `t = 0`. The particular part is the solution of the `+`
/// reduction with zero data, with `α` transported from zero data.
pub fn general_solution(spec: &LinearSpec, f1: &Expr, f2: &Expr, opts: GeneralOptions) -> Result<GeneralSolution> {
    if let Some(c) = spec.catalog() {
        c.check()?;
    }
    let sample = spec.default_box();
    spec.check_speed(&sample)?;
    structural_residual(spec, &sample)?.require(STRUCTURAL_TOL)?;
    let f1 = UnaryFn::new(f1, "xi")?;
    let f2 = UnaryFn::new(f2, "xi")?;
    let inner = match spec.catalog() {
        Some(c) => Inner::Closed(ClosedForm::new(c, f1, f2, opts.particular)?),
        None => {
            let (gamma, eta) = gamma_eta(spec);
            let steps = opts.trace_steps;
            let particular = if opts.particular && !spec.is_homogeneous() {
                let b: Arc<dyn Evaluator> = Arc::new(ExprField::new(spec.source())?);
                let k = (spec.coef_ut().clone() - gamma.clone()).simplify();
                let alpha: Arc<dyn Evaluator> =
                    Arc::new(Trace::new(1.0, spec.a(), &k, Some(b), super::trace::zero_profile(), steps)?);
                Some(Trace::new(-1.0, spec.a(), &gamma, Some(alpha), super::trace::zero_profile(), steps)?)
            } else {
                None
            };
            Inner::Transport {
                u1: Trace::new(-1.0, spec.a(), &gamma, None, profile(f1), steps)?,
                u2: Trace::new(1.0, spec.a(), &eta, None, profile(f2), steps)?,
                particular,
            }
        }
    };
    Ok(GeneralSolution {
        inner,
        domain: spec.domain(),
    })
}
