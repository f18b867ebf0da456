//! Catalogued linear equations with closed-form general solutions.
//!
//! Every entry keeps its own characteristic coordinates: the telegraph,
//! EPD and KGF entries use `σ = x - c t`, `ξ = x + c t`; the variable-speed
//! entry uses `σ = t + τ(x)`, `ξ = t - τ(x)` with `τ = ∫_0^x ds/√a`; the
//! damped entry uses `σ = x + t`, `ξ = x - t`. In each case `f1` is the
//! arbitrary function carried by the `u_t - a u_x` reduction and `f2` the
//! one carried by `u_t + a u_x`. All lower integration limits are 0.
//!
//! Quadratures use fixed nodes so that every closed form is a smooth
//! function of `(x, t)`.

use super::LinearSpec;
use crate::compat::Interval;
use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr};
use crate::families::UnaryFn;
use crate::field::Domain;
use crate::numerics::{gauss_legendre, Rk4};

/// Stable names of the catalog entries.
pub const CATALOG_NAMES: [&str; 5] = ["telegraph", "variable-speed", "epd", "kgf", "damped"];

/// Gauss–Legendre panels per axis of the closed-form quadratures.
const PANELS: usize = 8;
/// RK4 steps accumulating the variable-speed particular solution.
const S6_STEPS: usize = 256;

/// Variable-speed entry: `u_tt - a(x) u_xx = a'(x) u_x - c(x) u + h0(x) e^{-k0 t}`
/// with `c = -a''/4 + (a'/(4√a))²`, so the wave speed is `√a`.
#[derive(Debug, Clone)]
pub struct VariableSpeed {
    /// The coefficient `a(x)` of `u_xx`.
    pub coef: Expr,
    pub h0: Expr,
    pub k0: f64,
    /// Closed form of `∫_0^x ds/√a`; integrated numerically when absent.
    pub tau: Option<Expr>,
    /// Amplitude in front of `f1 + f2`; defaults to `a^{-1/4}`.
    pub weight: Option<Expr>,
}

impl VariableSpeed {
    /// Homogeneous equation with the given coefficient.
    pub fn new(coef: Expr) -> Self {
        VariableSpeed {
            coef,
            h0: Expr::zero(),
            k0: 0.0,
            tau: None,
            weight: None,
        }
    }

    pub fn with_source(mut self, h0: Expr, k0: f64) -> Self {
        self.h0 = h0;
        self.k0 = k0;
        self
    }

    pub fn with_tau(mut self, tau: Expr) -> Self {
        self.tau = Some(tau);
        self
    }
}

#[derive(Debug, Clone)]
pub enum Catalog {
    /// `u_tt - c² u_xx = q1 u_t + q2 u`.
    Telegraph { c: f64, q1: f64, q2: f64 },
    VariableSpeed(VariableSpeed),
    /// `u_tt - u_xx = (α0/x) u_x + h(x, t)`.
    Epd { alpha0: f64, h: Expr },
    /// `u_tt - u_xx = (c0/x) u_x - (k0/x²) u`.
    Kgf { c0: f64, k0: f64 },
    /// `u_tt - u_xx = -c0 u_t - (c0²/4) u + h0(x, t)`.
    Damped { c0: f64, h0: Expr },
}

impl Catalog {
    pub fn name(&self) -> &'static str {
        match self {
            Catalog::Telegraph { .. } => "telegraph",
            Catalog::VariableSpeed(_) => "variable-speed",
            Catalog::Epd { .. } => "epd",
            Catalog::Kgf { .. } => "kgf",
            Catalog::Damped { .. } => "damped",
        }
    }

    /// The equation of this entry on its default domain.
    pub fn spec(&self) -> Result<LinearSpec> {
        let x = Expr::var("x");
        let zero = Expr::zero;
        let spec = match self {
            Catalog::Telegraph { c, q1, q2 } => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidInput(format!("telegraph speed c = {c} must be positive")));
                }
                LinearSpec::new(Expr::c(*c), zero(), Expr::c(*q2), zero(), Expr::c(*q1))?
            }
            Catalog::VariableSpeed(v) => {
                only_x(&v.coef, "a")?;
                only_x(&v.h0, "h0")?;
                let a = v.coef.clone();
                let a1 = a.diff("x").simplify();
                let a2 = a1.diff("x").simplify();
                // H = -c(x) = a''/4 - a'²/(16 a).
                let h = a2 / 4.0 - a1.clone().powf(2.0) / (Expr::c(16.0) * a.clone());
                let source = v.h0.clone() * (Expr::c(-v.k0) * Expr::var("t")).exp();
                LinearSpec::new(a.sqrt(), a1, h, source, zero())?
            }
            Catalog::Epd { alpha0, h } => {
                LinearSpec::new(Expr::one(), Expr::c(*alpha0) / x, zero(), h.clone(), zero())?
            }
            Catalog::Kgf { c0, k0 } => LinearSpec::new(
                Expr::one(),
                Expr::c(*c0) / x.clone(),
                Expr::c(-*k0) / x.powf(2.0),
                zero(),
                zero(),
            )?,
            Catalog::Damped { c0, h0 } => LinearSpec::new(
                Expr::one(),
                zero(),
                Expr::c(-c0 * c0 / 4.0),
                h0.clone(),
                Expr::c(-*c0),
            )?,
        };
        Ok(spec.with_catalog(self.clone()))
    }

    /// Entry-specific constraints beyond the structural conditions.
    pub fn check(&self) -> Result<()> {
        if let Catalog::Kgf { c0, k0 } = self {
            let want = c0 / 2.0 - c0 * c0 / 4.0;
            if (k0 - want).abs() > 1e-12 * (1.0 + want.abs()) {
                return Err(Error::Constraint(format!(
                    "KGF requires k0 = c0/2 - c0^2/4 = {want}, got k0 = {k0}"
                )));
            }
        }
        Ok(())
    }
}

fn only_x(e: &Expr, what: &str) -> Result<()> {
    crate::compat::check_vars(e, &["x"], what)
}

impl LinearSpec {
    pub fn telegraph(c: f64, q1: f64, q2: f64) -> Result<Self> {
        Catalog::Telegraph { c, q1, q2 }.spec()
    }

    pub fn variable_speed(v: VariableSpeed) -> Result<Self> {
        Catalog::VariableSpeed(v).spec()
    }

    /// Variable speed with `a = c0 x^{4/3}`, written as
    /// `u = x^{-1/3}(f1(t + 3x^{1/3}/√c0) + f2(t - 3x^{1/3}/√c0))` on `x ∈ [1, 2]`.
    pub fn sol3(c0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::InvalidInput(format!("c0 = {c0} must be positive")));
        }
        let x = Expr::var("x");
        let v = VariableSpeed {
            coef: Expr::c(c0) * x.clone().powf(4.0 / 3.0),
            h0: Expr::zero(),
            k0: 0.0,
            tau: Some(Expr::c(3.0 / c0.sqrt()) * x.clone().powf(1.0 / 3.0)),
            weight: Some(x.powf(-1.0 / 3.0)),
        };
        let spec = LinearSpec::variable_speed(v)?;
        let domain = Domain {
            x: Interval::new(1.0, 2.0)?,
            t: spec.domain().t,
        };
        Ok(spec.on(domain))
    }

    pub fn epd(alpha0: f64, h: Expr) -> Result<Self> {
        Catalog::Epd { alpha0, h }.spec()
    }

    pub fn kgf(c0: f64, k0: f64) -> Result<Self> {
        Catalog::Kgf { c0, k0 }.spec()
    }

    pub fn damped(c0: f64, h0: Expr) -> Result<Self> {
        Catalog::Damped { c0, h0 }.spec()
    }
}

/// Optional compiled source; `None` when the expression is identically zero
/// or the particular part is switched off.
fn source(e: &Expr, layout: &[&str], particular: bool) -> Result<Option<Compiled>> {
    if !particular || e.as_const() == Some(0.0) {
        return Ok(None);
    }
    Ok(Some(e.compile(layout)?))
}

enum Kind {
    Telegraph {
        c: f64,
        q1: f64,
    },
    VariableSpeed {
        coef: Compiled,
        tau: Option<Compiled>,
        weight: Option<Compiled>,
        h0: Option<Compiled>,
        k0: f64,
    },
    Epd {
        alpha0: f64,
        h: Option<Compiled>,
    },
    Kgf {
        c0: f64,
    },
    Damped {
        c0: f64,
        h0: Option<Compiled>,
    },
}

/// Closed-form general solution of a catalog entry.
pub(crate) struct ClosedForm {
    kind: Kind,
    f1: UnaryFn,
    f2: UnaryFn,
}

impl ClosedForm {
    pub(crate) fn new(cat: &Catalog, f1: UnaryFn, f2: UnaryFn, particular: bool) -> Result<Self> {
        cat.check()?;
        let kind = match cat {
            Catalog::Telegraph { c, q1, .. } => Kind::Telegraph { c: *c, q1: *q1 },
            Catalog::VariableSpeed(v) => Kind::VariableSpeed {
                coef: v.coef.compile(&["x"])?,
                tau: v.tau.as_ref().map(|e| e.compile(&["x"])).transpose()?,
                weight: v.weight.as_ref().map(|e| e.compile(&["x"])).transpose()?,
                h0: source(&v.h0, &["x"], particular)?,
                k0: v.k0,
            },
            Catalog::Epd { alpha0, h } => Kind::Epd {
                alpha0: *alpha0,
                h: source(h, &["x", "t"], particular)?,
            },
            Catalog::Kgf { c0, .. } => Kind::Kgf { c0: *c0 },
            Catalog::Damped { c0, h0 } => Kind::Damped {
                c0: *c0,
                h0: source(h0, &["x", "t"], particular)?,
            },
        };
        Ok(ClosedForm { kind, f1, f2 })
    }

    pub(crate) fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let (f1, f2) = (&self.f1, &self.f2);
        match &self.kind {
            Kind::Telegraph { c, q1 } => {
                let (s, xi) = (x - c * t, x + c * t);
                Ok(f1.eval(xi)? * (-q1 * s / (4.0 * c)).exp() + f2.eval(s)? * (q1 * xi / (4.0 * c)).exp())
            }
            Kind::VariableSpeed {
                coef,
                tau,
                weight,
                h0,
                k0,
            } => {
                let vs = VarSpeedEval { coef, tau: tau.as_ref() };
                let tx = vs.tau(x)?;
                let (s, xi) = (t + tx, t - tx);
                let a = vs.coef(x)?;
                let w = match weight {
                    Some(w) => w.eval(&[x])?,
                    None => a.powf(-0.25),
                };
                let mut u = w * (f1.eval(s)? + f2.eval(xi)?);
                if let Some(h0) = h0 {
                    let (h1, h2) = vs.h(h0, *k0, x)?;
                    u += 0.5 * a.powf(-0.25) * (h1 * (-k0 * s).exp() + h2 * (-k0 * xi).exp());
                }
                Ok(u)
            }
            Kind::Epd { alpha0, h } => {
                let (s, xi) = (x - t, x + t);
                let p = (s + xi).powf(-alpha0 / 2.0);
                let mut u = p * (f1.eval(xi)? + f2.eval(s)?);
                if let Some(h) = h {
                    let integrand = |sp: f64, xp: f64| -> Result<f64> {
                        Ok(h.eval(&[(sp + xp) / 2.0, (xp - sp) / 2.0])? * (sp + xp).powf(alpha0 / 2.0))
                    };
                    u -= 0.25 * p * double_integral(integrand, s, xi)?;
                }
                Ok(u)
            }
            Kind::Kgf { c0 } => {
                let (s, xi) = (x - t, x + t);
                Ok(x.powf(-c0 / 2.0) * (f1.eval(xi)? + f2.eval(s)?))
            }
            Kind::Damped { c0, h0 } => {
                let (s, xi) = (x + t, x - t);
                let mut u =
                    (c0 * (x - t) / 4.0).exp() * f1.eval(s)? + (-c0 * (x + t) / 4.0).exp() * f2.eval(xi)?;
                if let Some(h0) = h0 {
                    let integrand = |sp: f64, xp: f64| -> Result<f64> {
                        Ok(h0.eval(&[(sp + xp) / 2.0, (sp - xp) / 2.0])? * (c0 * (sp - xp) / 4.0).exp())
                    };
                    u -= 0.25 * (-c0 * t / 2.0).exp() * double_integral(integrand, s, xi)?;
                }
                Ok(u)
            }
        }
    }
}

/// `∫_0^σ ∫_0^ξ f(σ', ξ') dξ' dσ'` by iterated composite Gauss–Legendre.
fn double_integral(f: impl Fn(f64, f64) -> Result<f64>, s: f64, xi: f64) -> Result<f64> {
    gauss_legendre(|sp| gauss_legendre(|xp| f(sp, xp), 0.0, xi, PANELS), 0.0, s, PANELS)
}

struct VarSpeedEval<'a> {
    coef: &'a Compiled,
    tau: Option<&'a Compiled>,
}

impl VarSpeedEval<'_> {
    fn coef(&self, x: f64) -> Result<f64> {
        let a = self.coef.eval(&[x])?;
        if !(a > 0.0) {
            return Err(Error::OutOfRange(format!("a({x}) = {a} must be positive")));
        }
        Ok(a)
    }

    fn tau(&self, x: f64) -> Result<f64> {
        match self.tau {
            Some(t) => Ok(t.eval(&[x])?),
            None => gauss_legendre(|s| Ok(self.coef(s)?.sqrt().recip()), 0.0, x, PANELS),
        }
    }

    /// `(h1(x), h2(x))` with `h1 = -∫_0^x e^{2k0τ}/√a ∫_0^y h0 a^{-1/4} e^{-k0τ} dz dy`
    /// and `h2` the same with `k0 → -k0`, accumulated as one RK4 system in
    /// `x` with state `(τ, K1, h1, K2, h2)`.
    fn h(&self, h0: &Compiled, k0: f64, x: f64) -> Result<(f64, f64)> {
        let rhs = |y: f64, s: &[f64; 5]| -> Result<[f64; 5]> {
            let a = self.coef(y)?;
            let tau = match self.tau {
                Some(t) => t.eval(&[y])?,
                None => s[0],
            };
            let base = h0.eval(&[y])? * a.powf(-0.25);
            let inv = a.sqrt().recip();
            Ok([
                inv,
                base * (-k0 * tau).exp(),
                -(2.0 * k0 * tau).exp() * inv * s[1],
                base * (k0 * tau).exp(),
                -(-2.0 * k0 * tau).exp() * inv * s[3],
            ])
        };
        let tau0 = match self.tau {
            Some(t) => t.eval(&[0.0])?,
            None => 0.0,
        };
        let end = Rk4 { t0: 0.0, t1: x, steps: S6_STEPS }.run(rhs, [tau0, 0.0, 0.0, 0.0, 0.0], |_, _, _| {})?;
        Ok((end[2], end[4]))
    }
}
