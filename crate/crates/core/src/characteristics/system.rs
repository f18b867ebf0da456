use crate::compat::{PdeSpec, Reduction};
use crate::error::Result;
use crate::expr::Compiled;

/// Right-hand side of the characteristic ODEs `x' = v(x,t,u)`, `u' = g(x,t,u)`
/// together with the partials needed for the variational equations.
pub trait CharacteristicSystem: Send + Sync {
    /// `([v, g], [[v_x, v_u], [g_x, g_u]])`.
    fn rhs_jacobian(&self, x: f64, t: f64, u: f64) -> Result<([f64; 2], [[f64; 2]; 2])>;
}

/// Characteristic system of a reduction, compiled from expressions.
#[derive(Debug, Clone)]
pub struct ExprSystem {
    v: Compiled,
    g: Compiled,
    vx: Compiled,
    vu: Compiled,
    gx: Compiled,
    gu: Compiled,
}

impl ExprSystem {
    pub fn new(p: &PdeSpec, r: &Reduction) -> Result<Self> {
        let layout = ["x", "t", "u"];
        let v = (-r.lambda(p)).simplify();
        let g = r.g().clone();
        Ok(ExprSystem {
            vx: v.diff("x").compile(&layout)?,
            vu: v.diff("u").compile(&layout)?,
            gx: g.diff("x").compile(&layout)?,
            gu: g.diff("u").compile(&layout)?,
            v: v.compile(&layout)?,
            g: g.compile(&layout)?,
        })
    }
}

impl CharacteristicSystem for ExprSystem {
    fn rhs_jacobian(&self, x: f64, t: f64, u: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let s = [x, t, u];
        Ok((
            [self.v.eval(&s)?, self.g.eval(&s)?],
            [
                [self.vx.eval(&s)?, self.vu.eval(&s)?],
                [self.gx.eval(&s)?, self.gu.eval(&s)?],
            ],
        ))
    }
}
