//! The pair `G_x = α0 G² + α1 G + α2`, `G_t = γ0 G² + γ1 G + γ2`.
//!
//! Under the compatibility relations `α0γ1 = α1γ0`, `α0γ2 = α2γ0`,
//! `α1γ2 = α2γ1`, `G` depends on `σ = α0 x + γ0 t` only and, after dividing
//! by the leading coefficient, solves `G' = G² + p G + r`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::Rk4;

/// Step of the numerical Riccati integration in `σ`.
pub const RICCATI_STEP: f64 = 1e-3;
/// Queries closer than this (in `σ`) to a pole are rejected.
pub const POLE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCoefficients {
    pub alpha: [f64; 3],
    pub gamma: [f64; 3],
}

/// Closed-form branch of `G' = G² + r` (`p = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiBranch {
    /// `r = c0² > 0`: `G = c0 tan(c0 σ + c1)`.
    Tan { c0: f64 },
    /// `r = -c0² < 0`: `G = c0 (1 + e^{2c0σ+c1}) / (1 - e^{2c0σ+c1})`.
    Exp { c0: f64 },
    /// `r = 0`: `G = -1 / (σ + c1)`.
    Reciprocal,
}

fn rel_zero(v: f64, scale: f64) -> bool {
    v.abs() <= 1e-12 * (1.0 + scale)
}

impl RiccatiCoefficients {
    pub fn new(alpha: [f64; 3], gamma: [f64; 3]) -> Self {
        RiccatiCoefficients { alpha, gamma }
    }

    /// Violated compatibility relations, as readable strings.
    pub fn violations(&self) -> Vec<String> {
        let [a0, a1, a2] = self.alpha;
        let [g0, g1, g2] = self.gamma;
        let mut out = Vec::new();
        let checks = [
            (a0 * g1 - a1 * g0, (a0 * g1).abs().max((a1 * g0).abs()), "alpha0*gamma1 = alpha1*gamma0"),
            (a0 * g2 - a2 * g0, (a0 * g2).abs().max((a2 * g0).abs()), "alpha0*gamma2 = alpha2*gamma0"),
            (a1 * g2 - a2 * g1, (a1 * g2).abs().max((a2 * g1).abs()), "alpha1*gamma2 = alpha2*gamma1"),
        ];
        for (r, scale, name) in checks {
            if !rel_zero(r, scale) {
                out.push(format!("{name} violated (residual {r:e})"));
            }
        }
        if self.alpha[0] == 0.0 && self.gamma[0] == 0.0 {
            out.push("alpha0 and gamma0 both vanish".into());
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Constraint(v.join("; ")))
        }
    }

    pub fn sigma(&self, x: f64, t: f64) -> f64 {
        self.alpha[0] * x + self.gamma[0] * t
    }

    /// `(p, r)` of the normalized equation `G' = G² + pG + r`.
    pub fn normalized(&self) -> Result<(f64, f64)> {
        let [a0, a1, a2] = self.alpha;
        let [g0, g1, g2] = self.gamma;
        if a0 != 0.0 {
            Ok((a1 / a0, a2 / a0))
        } else if g0 != 0.0 {
            Ok((g1 / g0, g2 / g0))
        } else {
            Err(Error::Constraint("alpha0 and gamma0 both vanish".into()))
        }
    }

    /// Closed-form branch when `p = 0`.
    pub fn branch(&self) -> Result<Option<RiccatiBranch>> {
        let (p, r) = self.normalized()?;
        if p != 0.0 {
            return Ok(None);
        }
        Ok(Some(branch_of(r)))
    }
}

fn branch_of(r: f64) -> RiccatiBranch {
    if r > 0.0 {
        RiccatiBranch::Tan { c0: r.sqrt() }
    } else if r < 0.0 {
        RiccatiBranch::Exp { c0: (-r).sqrt() }
    } else {
        RiccatiBranch::Reciprocal
    }
}

/// Pole of the closed form nearest to `sigma`.
fn nearest_pole(b: RiccatiBranch, c1: f64, sigma: f64) -> Option<f64> {
    match b {
        RiccatiBranch::Tan { c0 } => {
            let k = ((c0 * sigma + c1 - FRAC_PI_2) / PI).round();
            Some((FRAC_PI_2 + k * PI - c1) / c0)
        }
        RiccatiBranch::Exp { c0 } => Some(-c1 / (2.0 * c0)),
        RiccatiBranch::Reciprocal => Some(-c1),
    }
}

fn closed_form(b: RiccatiBranch, c1: f64, sigma: f64) -> f64 {
    match b {
        RiccatiBranch::Tan { c0 } => c0 * (c0 * sigma + c1).tan(),
        RiccatiBranch::Exp { c0 } => {
            let e = (2.0 * c0 * sigma + c1).exp();
            c0 * (1.0 + e) / (1.0 - e)
        }
        RiccatiBranch::Reciprocal => -1.0 / (sigma + c1),
    }
}

/// Whether a pole of the branch lies in the closed segment between `a` and `b`.
fn pole_between(br: RiccatiBranch, c1: f64, a: f64, b: f64) -> Option<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    match br {
        RiccatiBranch::Tan { c0 } => {
            // Poles at (π/2 + kπ - c1)/c0; check the first one at or above lo.
            let k = ((c0 * lo + c1 - FRAC_PI_2) / PI).ceil();
            let s = (FRAC_PI_2 + k * PI - c1) / c0;
            let s2 = (FRAC_PI_2 + (k - 1.0) * PI - c1) / c0;
            [s, s2].into_iter().find(|s| *s >= lo && *s <= hi)
        }
        _ => nearest_pole(br, c1, a).filter(|s| *s >= lo && *s <= hi),
    }
}

/// `G` at `(x, t)` with integration constant `c1`.
///
/// With `α1 = γ1 = 0` the closed forms are used. Otherwise the normalized
/// equation is integrated by RK4 with step [`RICCATI_STEP`] from `σ = 0`,
/// starting from the completed-square closed form
/// `G = H - p/2`, `H' = H² + (r - p²/4)`, with the same `c1`.
pub fn riccati_g(coef: &RiccatiCoefficients, c1: f64, x: f64, t: f64) -> Result<f64> {
    coef.check()?;
    let sigma = coef.sigma(x, t);
    let (p, r) = coef.normalized()?;
    if p == 0.0 {
        let b = branch_of(r);
        if let Some(pole) = nearest_pole(b, c1, sigma) {
            if (sigma - pole).abs() < POLE_GAP {
                return Err(Error::Pole { sigma, pole });
            }
        }
        return Ok(closed_form(b, c1, sigma));
    }
    riccati_numeric(p, r, c1, sigma)
}

/// Numerical integration of `G' = G² + pG + r` from `σ = 0`.
pub fn riccati_numeric(p: f64, r: f64, c1: f64, sigma: f64) -> Result<f64> {
    let b = branch_of(r - 0.25 * p * p);
    if let Some(pole) = pole_between(b, c1, 0.0, sigma) {
        return Err(Error::Pole { sigma, pole });
    }
    if let Some(pole) = nearest_pole(b, c1, 0.0) {
        if pole.abs() < POLE_GAP {
            return Err(Error::Pole { sigma: 0.0, pole });
        }
    }
    let g0 = closed_form(b, c1, 0.0) - 0.5 * p;
    if sigma == 0.0 {
        return Ok(g0);
    }
    let rk = Rk4::with_max_step(0.0, sigma, RICCATI_STEP);
    let [g] = rk.run(|_, y: &[f64; 1]| Ok([y[0] * y[0] + p * y[0] + r]), [g0], |_, _, _| {})?;
    if !g.is_finite() {
        return Err(Error::NoConvergence(format!("Riccati integration diverged before sigma = {sigma}")));
    }
    Ok(g)
}

/// `G(x, t)` as an expression when a closed form applies (`α1 = γ1 = 0`).
pub fn riccati_expr(coef: &RiccatiCoefficients, c1: f64) -> Result<Option<Expr>> {
    coef.check()?;
    let Some(b) = coef.branch()? else {
        return Ok(None);
    };
    let sigma = Expr::c(coef.alpha[0]) * Expr::var("x") + Expr::c(coef.gamma[0]) * Expr::var("t");
    let e = match b {
        RiccatiBranch::Tan { c0 } => Expr::c(c0) * (Expr::c(c0) * sigma + c1).tan(),
        RiccatiBranch::Exp { c0 } => {
            let e = (Expr::c(2.0 * c0) * sigma + c1).exp();
            Expr::c(c0) * (1.0 + e.clone()) / (1.0 - e)
        }
        RiccatiBranch::Reciprocal => Expr::c(-1.0) / (sigma + c1),
    };
    Ok(Some(e.simplify()))
}
