//! Cauchy problem `u(x, 0) = φ`, `u_t(x, 0) = ψ` through the two reductions.
//!
//! At `t = 0` the split `u = u1 + u2` must satisfy both reductions, which
//! leaves one linear ODE for `w = u1(·, 0)`:
//! `2a w' + (γ - η) w = ψ + a φ' - η φ - α - β`. Here `α` and `β` start
//! from zero, so they drop out at `t = 0`. The ODE is integrated left to
//! right from `w(x_left)` (default `φ(x_left)/2`); the anchor only moves
//! mass between `u1` and `u2` and does not change `u`.
//!
//! With a source `B`, each reduction carries `B/2` so that `u1 + u2`
//! solves the equation with the full `B`.

use std::sync::Arc;

use super::trace::{zero_profile, Profile, Trace};
use super::{gamma_eta, structural_residual, LinearSpec, STRUCTURAL_TOL};
use crate::compat::{Interval, SampleBox};
use crate::error::{Error, Result};
use crate::expr::{Expr, Parser};
use crate::families::UnaryFn;
use crate::field::{Domain, Evaluator, ExprField};
use crate::numerics::{rk4_step, HermiteTable};

#[derive(Debug, Clone)]
pub struct IvpData {
    /// `u(x, 0)`.
    pub phi: Expr,
    /// `u_t(x, 0)`.
    pub psi: Expr,
    pub interval: Interval,
    /// `u1(x_left, 0)`; `φ(x_left)/2` when absent.
    pub left: Option<f64>,
}

impl IvpData {
    pub fn new(phi: Expr, psi: Expr, interval: Interval) -> Result<Self> {
        for (e, what) in [(&phi, "phi"), (&psi, "psi")] {
            crate::compat::check_vars(e, &["x"], what)?;
        }
        Ok(IvpData {
            phi,
            psi,
            interval,
            left: None,
        })
    }

    pub fn parse(phi: &str, psi: &str, interval: Interval) -> Result<Self> {
        let p = Parser::new();
        IvpData::new(p.parse(phi)?, p.parse(psi)?, interval)
    }

    pub fn with_left(mut self, w: f64) -> Self {
        self.left = Some(w);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Nodes of the `t = 0` ODE grid, both ends included.
    pub nodes: usize,
    /// RK4 steps per traced characteristic.
    pub trace_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            nodes: 2001,
            trace_steps: 100,
        }
    }
}

/// Solution of the Cauchy problem; valid where both characteristics through
/// `(x, t)` reach `t = 0` inside the data interval.
pub struct IvpSolution {
    u1: Trace,
    u2: Trace,
    w: Arc<HermiteTable<f64>>,
    domain: Domain,
}

impl IvpSolution {
    /// `u1(x, 0)` on the ODE grid.
    pub fn split_at(&self, x: f64) -> f64 {
        self.w.eval(x)
    }

    pub fn nodes(&self) -> &[f64] {
        self.w.nodes()
    }

    pub fn parts(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        Ok((self.u1.eval(x, t)?, self.u2.eval(x, t)?))
    }
}

impl Evaluator for IvpSolution {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.u1.eval(x, t)? + self.u2.eval(x, t)?)
    }

    fn domain(&self) -> Option<Domain> {
        Some(self.domain)
    }
}

pub fn solve_ivp(spec: &LinearSpec, data: &IvpData, t_end: f64, opts: IvpOptions) -> Result<IvpSolution> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end = {t_end} must be positive")));
    }
    if opts.nodes < 2 {
        return Err(Error::InvalidInput("the IVP grid needs at least two nodes".into()));
    }
    let domain = Domain {
        x: data.interval,
        t: Interval::new(0.0, t_end)?,
    };
    let unit = Interval { lo: 0.0, hi: 1.0 };
    let sample = SampleBox {
        x: domain.x,
        t: domain.t,
        u: unit,
        ux: unit,
        counts: [41, 21, 1, 1],
    };
    spec.check_speed(&sample)?;
    structural_residual(spec, &sample)?.require(STRUCTURAL_TOL)?;

    let (gamma, eta) = gamma_eta(spec);
    let at0 = |e: &Expr| UnaryFn::new(&e.substitute("t", &Expr::zero()).simplify(), "x");
    let (a0, g0, e0) = (at0(spec.a())?, at0(&gamma)?, at0(&eta)?);
    let phi = UnaryFn::new(&data.phi, "x")?;
    let psi = UnaryFn::new(&data.psi, "x")?;

    let slope = |x: f64, w: f64| -> Result<f64> {
        let a = a0.eval(x)?;
        let (p, dp) = phi.jet(x)?;
        let (g, e) = (g0.eval(x)?, e0.eval(x)?);
        Ok((psi.eval(x)? + a * dp - e * p - (g - e) * w) / (2.0 * a))
    };
    let xs = data.interval.nodes(opts.nodes);
    let mut ws = Vec::with_capacity(xs.len());
    let mut ds = Vec::with_capacity(xs.len());
    let mut w = data.left.unwrap_or(phi.eval(xs[0])? / 2.0);
    for (i, &x) in xs.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite { i, j: 0 });
        }
        ws.push(w);
        ds.push(slope(x, w)?);
        if i + 1 < xs.len() {
            let mut f = |x: f64, y: &[f64; 1]| Ok([slope(x, y[0])?]);
            w = rk4_step(&mut f, x, &[w], xs[i + 1] - x)?[0];
        }
    }
    let table = Arc::new(HermiteTable::new(xs, ws, ds));

    let inside = {
        let iv = data.interval;
        let slack = 1e-12 * (1.0 + iv.width());
        move |x: f64| -> Result<()> {
            if x < iv.lo - slack || x > iv.hi + slack {
                return Err(Error::OutOfRange(format!(
                    "characteristic reaches t = 0 at x = {x}, outside the data interval [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
            Ok(())
        }
    };
    let w1: Profile = {
        let (table, inside) = (table.clone(), inside);
        Arc::new(move |x| {
            inside(x)?;
            Ok(table.eval(x))
        })
    };
    let w2: Profile = {
        let table = table.clone();
        Arc::new(move |x| {
            inside(x)?;
            Ok(phi.eval(x)? - table.eval(x))
        })
    };

    let steps = opts.trace_steps;
    let (alpha, beta) = if spec.is_homogeneous() {
        (None, None)
    } else {
        let half: Arc<dyn Evaluator> = Arc::new(ExprField::new(&(spec.source().clone() / 2.0))?);
        let k_alpha = (spec.coef_ut().clone() - gamma.clone()).simplify();
        let k_beta = (spec.coef_ut().clone() - eta.clone()).simplify();
        let alpha: Arc<dyn Evaluator> =
            Arc::new(Trace::new(1.0, spec.a(), &k_alpha, Some(half.clone()), zero_profile(), steps)?);
        let beta: Arc<dyn Evaluator> =
            Arc::new(Trace::new(-1.0, spec.a(), &k_beta, Some(half), zero_profile(), steps)?);
        (Some(alpha), Some(beta))
    };
    Ok(IvpSolution {
        u1: Trace::new(-1.0, spec.a(), &gamma, alpha, w1, steps)?,
        u2: Trace::new(1.0, spec.a(), &eta, beta, w2, steps)?,
        w: table,
        domain,
    })
}
