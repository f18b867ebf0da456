//! Linear equations `u_tt - a² u_xx = A u_x + H u + B + G u_t` and their
//! splitting into two first-order reductions.
//!
//! With `γ`, `η` from [`gamma_eta`], every solution of
//! `u_t - a u_x = γ u + α` and of `u_t + a u_x = η u + β` solves the
//! second-order equation as soon as the structural conditions hold and
//! `α`, `β` obey their transport equations. Solutions are combined as
//! `u = u1 + u2`.

mod catalog;
mod general;
mod ivp;
mod trace;

use std::sync::Arc;

pub use catalog::{Catalog, VariableSpeed, CATALOG_NAMES};
pub use general::{general_solution, GeneralOptions, GeneralSolution};
pub use ivp::{solve_ivp, IvpData, IvpOptions, IvpSolution};

use crate::characteristics::{CharStrip, ExprSystem, InitialData};
use crate::compat::{check_vars, Branch, Interval, PdeSpec, Reduction, SampleBox};
use crate::error::{Error, Result};
use crate::expr::{Expr, Parser};
use crate::field::Domain;

/// Largest structural residual accepted before a solution is built.
pub const STRUCTURAL_TOL: f64 = 1e-8;

const XT: [&str; 2] = ["x", "t"];

/// Coefficients of `u_tt - a² u_xx = A u_x + H u + B + G u_t`, all functions
/// of `(x, t)`, together with the rectangle they are meant for.
#[derive(Debug, Clone)]
pub struct LinearSpec {
    a: Expr,
    coef_ux: Expr,
    coef_u: Expr,
    source: Expr,
    coef_ut: Expr,
    domain: Domain,
    catalog: Option<Catalog>,
}

impl LinearSpec {
    /// `a`, then `A` (of `u_x`), `H` (of `u`), `B` (source), `G` (of `u_t`).
    pub fn new(a: Expr, coef_ux: Expr, coef_u: Expr, source: Expr, coef_ut: Expr) -> Result<Self> {
        for (e, what) in [
            (&a, "wave speed a"),
            (&coef_ux, "coefficient A"),
            (&coef_u, "coefficient H"),
            (&source, "source B"),
            (&coef_ut, "coefficient G"),
        ] {
            check_vars(e, &XT, what)?;
        }
        Ok(LinearSpec {
            a: a.simplify(),
            coef_ux: coef_ux.simplify(),
            coef_u: coef_u.simplify(),
            source: source.simplify(),
            coef_ut: coef_ut.simplify(),
            domain: default_domain(),
            catalog: None,
        })
    }

    pub fn parse(a: &str, coef_ux: &str, coef_u: &str, source: &str, coef_ut: &str) -> Result<Self> {
        let p = Parser::new();
        LinearSpec::new(p.parse(a)?, p.parse(coef_ux)?, p.parse(coef_u)?, p.parse(source)?, p.parse(coef_ut)?)
    }

    /// The plain wave equation with constant speed `c`.
    pub fn wave(c: f64) -> Result<Self> {
        LinearSpec::new(Expr::c(c), Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// Replaces the declared rectangle (default `[0.5, 2] × [0, 1]`).
    pub fn on(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub(crate) fn with_catalog(mut self, c: Catalog) -> Self {
        self.catalog = Some(c);
        self
    }

    pub fn a(&self) -> &Expr {
        &self.a
    }

    pub fn coef_ux(&self) -> &Expr {
        &self.coef_ux
    }

    pub fn coef_u(&self) -> &Expr {
        &self.coef_u
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn coef_ut(&self) -> &Expr {
        &self.coef_ut
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Catalog entry this equation was built from, if any.
    pub fn catalog(&self) -> Option<&Catalog> {
        self.catalog.as_ref()
    }

    /// Whether `B` is identically zero.
    pub fn is_homogeneous(&self) -> bool {
        self.source.as_const() == Some(0.0)
    }

    /// The same equation as a general [`PdeSpec`].
    pub fn pde(&self) -> Result<PdeSpec> {
        let f = self.coef_ux.clone() * Expr::var("ux")
            + self.coef_u.clone() * Expr::var("u")
            + self.source.clone()
            + self.coef_ut.clone() * Expr::var("ut");
        PdeSpec::new(self.a.clone(), f.simplify())
    }

    /// `x × t` grid of 41 × 21 nodes over the declared domain.
    pub fn default_box(&self) -> SampleBox {
        let unit = Interval { lo: 0.0, hi: 1.0 };
        SampleBox {
            x: self.domain.x,
            t: self.domain.t,
            u: unit,
            ux: unit,
            counts: [41, 21, 1, 1],
        }
    }

    /// Fails unless `a > 0` at every node of `sample`.
    pub fn check_speed(&self, sample: &SampleBox) -> Result<()> {
        let a = self.a.compile(&XT)?;
        for x in sample.x.nodes(sample.counts[0]) {
            for t in sample.t.nodes(sample.counts[1]) {
                let v = a.eval(&[x, t])?;
                if !(v > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "wave speed must be positive, a({x}, {t}) = {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn default_domain() -> Domain {
    Domain {
        x: Interval { lo: 0.5, hi: 2.0 },
        t: Interval { lo: 0.0, hi: 1.0 },
    }
}

/// `γ = (A + aG - (a_t + a a_x)) / (2a)` and
/// `η = -(A - aG + (a_t - a a_x)) / (2a)`.
pub fn gamma_eta(spec: &LinearSpec) -> (Expr, Expr) {
    let a = &spec.a;
    let a_t = a.diff("t");
    let a_x = a.diff("x");
    let two_a = Expr::c(2.0) * a.clone();
    let gamma = (spec.coef_ux.clone() + a.clone() * spec.coef_ut.clone() - (a_t.clone() + a.clone() * a_x.clone()))
        / two_a.clone();
    let eta = -(spec.coef_ux.clone() - a.clone() * spec.coef_ut.clone() + (a_t - a.clone() * a_x)) / two_a;
    (gamma.simplify(), eta.simplify())
}

/// The two structural conditions as expressions that vanish when they hold:
/// `γ_t + a γ_x - (H + Gγ - γ²)` and `η_t - a η_x - (H + Gη - η²)`.
pub fn structural_exprs(spec: &LinearSpec) -> (Expr, Expr) {
    let (gamma, eta) = gamma_eta(spec);
    let cond = |w: &Expr, s: f64| {
        let lhs = w.diff("t") + Expr::c(s) * spec.a.clone() * w.diff("x");
        let rhs = spec.coef_u.clone() + spec.coef_ut.clone() * w.clone() - w.clone().powf(2.0);
        (lhs - rhs).simplify()
    };
    (cond(&gamma, 1.0), cond(&eta, -1.0))
}

/// Largest absolute structural residuals over a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralReport {
    pub plus: f64,
    pub minus: f64,
}

impl StructuralReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.plus <= tol && self.minus <= tol
    }

    pub(crate) fn require(&self, tol: f64) -> Result<()> {
        if self.passes(tol) {
            Ok(())
        } else {
            Err(Error::Structural {
                plus: self.plus,
                minus: self.minus,
            })
        }
    }
}

/// Maximum of both structural residuals over the `x × t` nodes of `sample`;
/// the `u` and `u_x` axes are ignored.
pub fn structural_residual(spec: &LinearSpec, sample: &SampleBox) -> Result<StructuralReport> {
    let (plus, minus) = structural_exprs(spec);
    let (pc, mc) = (plus.compile(&XT)?, minus.compile(&XT)?);
    let mut out = StructuralReport { plus: 0.0, minus: 0.0 };
    for x in sample.x.nodes(sample.counts[0]) {
        for t in sample.t.nodes(sample.counts[1]) {
            out.plus = out.plus.max(pc.eval(&[x, t])?.abs());
            out.minus = out.minus.max(mc.eval(&[x, t])?.abs());
        }
    }
    Ok(out)
}

/// `γ, η` of a spec together with closed-form `α`, `β` (zero by default).
#[derive(Debug, Clone)]
pub struct LinearReductions {
    pub gamma: Expr,
    pub eta: Expr,
    pub alpha: Expr,
    pub beta: Expr,
}

impl LinearReductions {
    pub fn new(spec: &LinearSpec) -> Self {
        let (gamma, eta) = gamma_eta(spec);
        LinearReductions {
            gamma,
            eta,
            alpha: Expr::zero(),
            beta: Expr::zero(),
        }
    }

    pub fn with_alpha(mut self, alpha: Expr) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: Expr) -> Self {
        self.beta = beta;
        self
    }

    /// `u_t - a u_x = γ u + α`.
    pub fn plus(&self) -> Result<Reduction> {
        Reduction::new(Branch::Plus, (self.gamma.clone() * Expr::var("u") + self.alpha.clone()).simplify())
    }

    /// `u_t + a u_x = η u + β`.
    pub fn minus(&self) -> Result<Reduction> {
        Reduction::new(Branch::Minus, (self.eta.clone() * Expr::var("u") + self.beta.clone()).simplify())
    }
}

/// Transport equation of `α` (`which = Plus`) or `β` (`which = Minus`):
/// `α_t + a α_x = B + (G - γ) α`, `β_t - a β_x = B + (G - η) β`, with
/// `B = source`. It is solved as a first-order reduction on the
/// characteristic strip launched from `interval` at `t = 0`; the initial
/// profile (an expression in `sigma`) defaults to zero.
#[allow(clippy::too_many_arguments)]
pub fn solve_transport(
    spec: &LinearSpec,
    which: Branch,
    source: &Expr,
    initial: Option<&Expr>,
    interval: Interval,
    t_end: f64,
    n_sigma: usize,
    h_t: f64,
) -> Result<CharStrip> {
    structural_residual(spec, &spec.default_box())?.require(STRUCTURAL_TOL)?;
    check_vars(source, &XT, "transport source")?;
    let (gamma, eta) = gamma_eta(spec);
    let w = match which {
        Branch::Plus => gamma,
        Branch::Minus => eta,
    };
    // u_t - λ u_x = g with λ = -a for α and λ = +a for β.
    let branch = match which {
        Branch::Plus => Branch::Minus,
        Branch::Minus => Branch::Plus,
    };
    let g = source.clone() + (spec.coef_ut.clone() - w) * Expr::var("u");
    let p = PdeSpec::new(spec.a.clone(), Expr::zero())?;
    let r = Reduction::new(branch, g.simplify())?;
    let init = InitialData::new(initial.cloned().unwrap_or_else(Expr::zero), interval, 0.0)?;
    CharStrip::integrate(Arc::new(ExprSystem::new(&p, &r)?), &init, t_end, n_sigma, h_t)
}
