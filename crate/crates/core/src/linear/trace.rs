//! Pointwise solution of linear transport by tracing one characteristic
//! back to `t = 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr};
use crate::field::Evaluator;
use crate::numerics::Rk4;

/// Data at `t = 0` as a function of `x`.
pub(crate) type Profile = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

pub(crate) fn zero_profile() -> Profile {
    Arc::new(|_| Ok(0.0))
}

/// `v_t + c v_x = k v + s` with `c = sign · a`, solved at `(x, t)` by
/// integrating the characteristic through that point back to `t = 0`:
///
/// `v(x, t) = v0(X(0)) e^{Λ(0)} + J(0)` where, for `τ` from `t` down to 0,
/// `X' = c`, `Λ' = -k`, `J' = -e^Λ s`.
///
/// A fixed number of RK4 steps keeps the result smooth in `(x, t)`.
pub(crate) struct Trace {
    sign: f64,
    a: Compiled,
    k: Compiled,
    source: Option<Arc<dyn Evaluator>>,
    profile: Profile,
    steps: usize,
}

impl Trace {
    pub(crate) fn new(
        sign: f64,
        a: &Expr,
        k: &Expr,
        source: Option<Arc<dyn Evaluator>>,
        profile: Profile,
        steps: usize,
    ) -> Result<Self> {
        Ok(Trace {
            sign,
            a: a.compile(&["x", "t"])?,
            k: k.compile(&["x", "t"])?,
            source,
            profile,
            steps: steps.max(1),
        })
    }
}

impl Evaluator for Trace {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return (self.profile)(x);
        }
        let rhs = |tau: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
            let p = [y[0], tau];
            let s = match &self.source {
                Some(f) => f.eval(y[0], tau)?,
                None => 0.0,
            };
            Ok([
                self.sign * self.a.eval(&p)?,
                -self.k.eval(&p)?,
                -y[1].exp() * s,
            ])
        };
        let end = Rk4 {
            t0: t,
            t1: 0.0,
            steps: self.steps,
        }
        .run(rhs, [x, 0.0, 0.0], |_, _, _| {})?;
        let v = (self.profile)(end[0])? * end[1].exp() + end[2];
        if !v.is_finite() {
            return Err(Error::OutOfRange(format!("transport value at ({x}, {t}) is not finite")));
        }
        Ok(v)
    }
}
