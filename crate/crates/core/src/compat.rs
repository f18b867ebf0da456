//! Residual tests for first-order intermediate integrals
//! `u_t - λ u_x - g(x, t, u) = 0`, `λ = s·a`, of `u_tt - a² u_xx = f`.
//!
//! The compatibility residual is a polynomial in `u_x` once `u_t` is replaced
//! by `λ u_x + g`; "for all `u_x`" is checked by sampling a [`SampleBox`] whose
//! `u_x` axis straddles zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Env, Expr, Parser};

const XTU: [&str; 3] = ["x", "t", "u"];
const XTU_UX: [&str; 4] = ["x", "t", "u", "ux"];
const XTU_UX_UT: [&str; 5] = ["x", "t", "u", "ux", "ut"];

pub(crate) fn check_vars(e: &Expr, allowed: &[&str], what: &str) -> Result<()> {
    for v in e.vars() {
        if !allowed.contains(&v.as_str()) && v != "pi" {
            return Err(Error::InvalidInput(format!(
                "{what} may depend only on {}, found `{v}`",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

/// Pointwise coefficients of `u_tt - a² u_xx = f`.
pub trait WaveEquation: Send + Sync {
    fn speed(&self, x: f64, t: f64, u: f64) -> Result<f64>;
    fn rhs(&self, x: f64, t: f64, u: f64, ux: f64, ut: f64) -> Result<f64>;
}

impl WaveEquation for PdeSpec {
    fn speed(&self, x: f64, t: f64, u: f64) -> Result<f64> {
        PdeSpec::speed(self, x, t, u)
    }

    fn rhs(&self, x: f64, t: f64, u: f64, ux: f64, ut: f64) -> Result<f64> {
        PdeSpec::rhs(self, x, t, u, ux, ut)
    }
}

/// `u_tt - a(x,t,u)² u_xx = f(x,t,u,u_x,u_t)`.
#[derive(Debug, Clone)]
pub struct PdeSpec {
    a: Expr,
    f: Expr,
    a_c: Compiled,
    f_c: Compiled,
}

impl PdeSpec {
    pub fn new(a: Expr, f: Expr) -> Result<Self> {
        check_vars(&a, &XTU, "wave speed a")?;
        check_vars(&f, &XTU_UX_UT, "right-hand side f")?;
        let a_c = a.compile(&XTU)?;
        let f_c = f.compile(&XTU_UX_UT)?;
        Ok(PdeSpec { a, f, a_c, f_c })
    }

    /// Parses both coefficients with the default vocabulary.
    pub fn parse(a: &str, f: &str) -> Result<Self> {
        let p = Parser::new();
        PdeSpec::new(p.parse(a)?, p.parse(f)?)
    }

    pub fn a(&self) -> &Expr {
        &self.a
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn speed(&self, x: f64, t: f64, u: f64) -> Result<f64> {
        Ok(self.a_c.eval(&[x, t, u])?)
    }

    pub fn rhs(&self, x: f64, t: f64, u: f64, ux: f64, ut: f64) -> Result<f64> {
        Ok(self.f_c.eval(&[x, t, u, ux, ut])?)
    }
}

/// Characteristic branch: `λ = +a` or `λ = -a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Branch::Plus)
        } else if s == -1.0 {
            Ok(Branch::Minus)
        } else {
            Err(Error::InvalidInput(format!("branch sign must be +1 or -1, got {s}")))
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Branch::Plus),
            "-" | "-1" | "minus" => Ok(Branch::Minus),
            other => Err(Error::InvalidInput(format!(
                "branch must be one of +1, -1, plus, minus; got `{other}`"
            ))),
        }
    }
}

/// Candidate intermediate integral `u_t - s·a·u_x - g(x, t, u) = 0`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub branch: Branch,
    g: Expr,
}

impl Reduction {
    pub fn new(branch: Branch, g: Expr) -> Result<Self> {
        check_vars(&g, &XTU, "reduction source g")?;
        Ok(Reduction { branch, g })
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    /// `λ = s·a` as an expression.
    pub fn lambda(&self, p: &PdeSpec) -> Expr {
        match self.branch {
            Branch::Plus => p.a().clone(),
            Branch::Minus => (-p.a().clone()).simplify(),
        }
    }

    /// The constraint `F(x,t,u,q,p) = p - λ q - g` with `q = u_x`, `p = u_t`.
    pub fn constraint(&self, p: &PdeSpec) -> Expr {
        (Expr::var("p") - self.lambda(p) * Expr::var("q") - self.g.clone()).simplify()
    }

    /// Same reduction with `g` scaled by `factor`.
    pub fn perturbed(&self, factor: f64) -> Reduction {
        Reduction {
            branch: self.branch,
            g: (Expr::c(factor) * self.g.clone()).simplify(),
        }
    }
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// `n` equispaced nodes including both ends.
    pub fn nodes(&self, n: usize) -> Vec<f64> {
        let d = (self.hi - self.lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { self.hi } else { self.lo + d * i as f64 })
            .collect()
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A point of the jet space `(x, t, u, u_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub ux: f64,
}

/// Tensor grid over `(x, t, u, u_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub x: Interval,
    pub t: Interval,
    pub u: Interval,
    pub ux: Interval,
    /// Nodes per axis in the order x, t, u, ux.
    pub counts: [usize; 4],
}

impl SampleBox {
    pub fn new(x: Interval, t: Interval, u: Interval, ux: Interval, counts: [usize; 4]) -> Result<Self> {
        if counts.iter().any(|&n| n < 2) {
            return Err(Error::InvalidInput("sample counts must be at least 2".into()));
        }
        Ok(SampleBox { x, t, u, ux, counts })
    }

    /// Box from `(lo, hi)` pairs; panics on degenerate input, intended for
    /// literals in catalog code and tests.
    pub fn from_bounds(x: (f64, f64), t: (f64, f64), u: (f64, f64), ux: (f64, f64), counts: [usize; 4]) -> Self {
        let iv = |(lo, hi): (f64, f64)| Interval::new(lo, hi).expect("nondegenerate interval");
        SampleBox::new(iv(x), iv(t), iv(u), iv(ux), counts).expect("valid sample counts")
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Doubles the resolution; every node of `self` stays a node.
    pub fn refined(&self) -> Self {
        let mut b = self.clone();
        for n in &mut b.counts {
            *n = 2 * *n - 1;
        }
        b
    }

    /// Same box with `n` nodes on every axis.
    pub fn with_counts(&self, counts: [usize; 4]) -> Self {
        SampleBox { counts, ..self.clone() }
    }

    pub fn points(&self) -> Vec<JetPoint> {
        let xs = self.x.nodes(self.counts[0]);
        let ts = self.t.nodes(self.counts[1]);
        let us = self.u.nodes(self.counts[2]);
        let uxs = self.ux.nodes(self.counts[3]);
        let mut out = Vec::with_capacity(self.len());
        for &x in &xs {
            for &t in &ts {
                for &u in &us {
                    for &ux in &uxs {
                        out.push(JetPoint { x, t, u, ux });
                    }
                }
            }
        }
        out
    }
}

/// Compatibility residual split into its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Con1Value {
    pub residual: f64,
    /// `1 + max |term|`, the magnitude the residual is compared against.
    pub scale: f64,
}

impl Con1Value {
    pub fn scaled(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

/// Compiled form of the compatibility condition for one `(PdeSpec, Reduction)`
/// pair:
///
/// `(λ_t + λλ_x + 2λg_u + gλ_u) u_x + 2λλ_u u_x² + g_t + λg_x + g g_u - f|_{u_t = λu_x + g}`.
#[derive(Debug, Clone)]
pub struct Compatibility {
    linear: Compiled,
    quadratic: Compiled,
    constant: Compiled,
    f_on_manifold: Compiled,
}

impl Compatibility {
    pub fn new(p: &PdeSpec, r: &Reduction) -> Result<Self> {
        let lam = r.lambda(p);
        let g = r.g().clone();
        let d = |e: &Expr, v: &str| e.diff(v);
        let linear = d(&lam, "t")
            + lam.clone() * d(&lam, "x")
            + 2.0 * lam.clone() * d(&g, "u")
            + g.clone() * d(&lam, "u");
        let quadratic = 2.0 * lam.clone() * d(&lam, "u");
        let constant = d(&g, "t") + lam.clone() * d(&g, "x") + g.clone() * d(&g, "u");
        let ut = lam * Expr::var("ux") + g;
        let f_on = p.f().substitute("ut", &ut);
        Ok(Compatibility {
            linear: linear.simplify().compile(&XTU)?,
            quadratic: quadratic.simplify().compile(&XTU)?,
            constant: constant.simplify().compile(&XTU)?,
            f_on_manifold: f_on.simplify().compile(&XTU_UX)?,
        })
    }

    pub fn eval(&self, pt: JetPoint) -> Result<Con1Value> {
        let xtu = [pt.x, pt.t, pt.u];
        let terms = [
            self.linear.eval(&xtu)? * pt.ux,
            self.quadratic.eval(&xtu)? * pt.ux * pt.ux,
            self.constant.eval(&xtu)?,
            -self.f_on_manifold.eval(&[pt.x, pt.t, pt.u, pt.ux])?,
        ];
        let residual = terms.iter().sum();
        let scale = 1.0 + terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Con1Value { residual, scale })
    }

    /// Worst case over a box.
    pub fn max_over(&self, sample: &SampleBox) -> Result<Con1Report> {
        let points = sample.points();
        let values: Vec<(JetPoint, Con1Value)> = points
            .par_iter()
            .map(|&pt| self.eval(pt).map(|v| (pt, v)))
            .collect::<Result<_>>()?;
        let mut report = Con1Report {
            max_abs: 0.0,
            max_scaled: 0.0,
            worst: points[0],
            samples: values.len(),
        };
        for (pt, v) in values {
            if v.residual.abs() > report.max_abs {
                report.max_abs = v.residual.abs();
            }
            if v.scaled() > report.max_scaled {
                report.max_scaled = v.scaled();
                report.worst = pt;
            }
        }
        Ok(report)
    }
}

/// Result of sampling the compatibility residual over a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Con1Report {
    pub max_abs: f64,
    /// Largest `|residual| / (1 + max |term|)`.
    pub max_scaled: f64,
    /// Point attaining `max_scaled`.
    pub worst: JetPoint,
    pub samples: usize,
}

/// Default zero tolerance for the scaled compatibility residual.
pub const CON1_TOL: f64 = 1e-10;

/// Compatibility residual of `r` for `p` at one jet point.
pub fn con1_residual(p: &PdeSpec, r: &Reduction, pt: JetPoint) -> Result<f64> {
    Ok(Compatibility::new(p, r)?.eval(pt)?.residual)
}

/// Maximum compatibility residual of `r` for `p` over a box.
pub fn con1_max(p: &PdeSpec, r: &Reduction, sample: &SampleBox) -> Result<Con1Report> {
    Compatibility::new(p, r)?.max_over(sample)
}

/// Characteristic determinant `a² F_p² - F_q²` of a constraint
/// `F(x, t, u, q, p)` with `q = u_x`, `p = u_t`. `env` binds every variable
/// of `F`.
pub fn det_residual(constraint: &Expr, a: f64, env: &Env) -> Result<f64> {
    let fp = constraint.diff("p").eval(env)?;
    let fq = constraint.diff("q").eval(env)?;
    Ok(a * a * fp * fp - fq * fq)
}

/// Admissible right-hand side patterns in `(u_x, u_t)`:
///
/// | tag | form |
/// |-----|------|
/// | F0 | `A + B u_x + C u_x²` |
/// | F1 | `A + B u_t + C u_x²` |
/// | F2 | `A + B u_t + C u_t²` |
/// | F3 | `A + B u_t + C u_x u_t + D u_x` |
/// | F4 | `A + B u_x + C u_t + D u_t²` |
/// | F5 | `A + B u_x + C u_x u_t` |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FForm {
    F0,
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl FForm {
    pub const ALL: [FForm; 6] = [FForm::F0, FForm::F1, FForm::F2, FForm::F3, FForm::F4, FForm::F5];

    pub fn tag(self) -> &'static str {
        match self {
            FForm::F0 => "f0",
            FForm::F1 => "f1",
            FForm::F2 => "f2",
            FForm::F3 => "f3",
            FForm::F4 => "f4",
            FForm::F5 => "f5",
        }
    }
}

/// Matched pattern with coefficient expressions in `(x, t, u)`, named
/// `A`, `B`, `C` and (for F3, F4) `D`.
#[derive(Debug, Clone)]
pub struct Classification {
    pub form: FForm,
    pub coefficients: Vec<(&'static str, Expr)>,
}

impl Classification {
    pub fn coefficient(&self, name: &str) -> Option<&Expr> {
        self.coefficients.iter().find(|(n, _)| *n == name).map(|(_, e)| e)
    }

    /// Coefficients evaluated at `(x, t, u)`.
    pub fn eval_at(&self, x: f64, t: f64, u: f64) -> Result<Vec<(&'static str, f64)>> {
        let env = Env::new().with("x", x).with("t", t).with("u", u);
        self.coefficients
            .iter()
            .map(|(n, e)| Ok((*n, e.eval(&env)?)))
            .collect()
    }
}

/// Relative tolerance for "this partial vanishes" in [`classify_f`].
pub const CLASSIFY_TOL: f64 = 1e-9;

struct Partials {
    f: Expr,
    x: Expr,
    t: Expr,
    xx: Expr,
    xt: Expr,
    tt: Expr,
    xxx: Expr,
    ttt: Expr,
}

impl Partials {
    fn new(f: &Expr) -> Self {
        let x = f.diff("ux");
        let t = f.diff("ut");
        let xx = x.diff("ux");
        let xt = x.diff("ut");
        let tt = t.diff("ut");
        let xxx = xx.diff("ux");
        let ttt = tt.diff("ut");
        Partials { f: f.clone(), x, t, xx, xt, tt, xxx, ttt }
    }
}

fn at(e: &Expr, ux: Option<f64>, ut: Option<f64>) -> Expr {
    let mut e = e.clone();
    if let Some(v) = ux {
        e = e.substitute("ux", &Expr::c(v));
    }
    if let Some(v) = ut {
        e = e.substitute("ut", &Expr::c(v));
    }
    e.simplify()
}

/// Matches `f` against the admissible forms. F5 is a special case of F3 and
/// F2 of F4, so the most specific match wins: forms are tried in the order
/// F0, F1, F2, F5, F3, F4.
///
/// A pattern matches when its excluded partials vanish at every box node,
/// with `u_t` sampled over the box's `u_x` interval. Returns `None` when no
/// pattern matches.
pub fn classify_f(p: &PdeSpec, sample: &SampleBox) -> Result<Option<Classification>> {
    let d = Partials::new(p.f());
    let uts = sample.ux.nodes(sample.counts[3]);
    let mut points = Vec::with_capacity(sample.len() * uts.len());
    for pt in sample.points() {
        for &ut in &uts {
            points.push([pt.x, pt.t, pt.u, pt.ux, ut]);
        }
    }
    let vanishes = |e: &Expr| -> Result<bool> {
        if e.as_const() == Some(0.0) {
            return Ok(true);
        }
        let c = e.compile(&XTU_UX_UT)?;
        for pt in &points {
            let scale = 1.0 + p.f_c.eval(pt)?.abs();
            if c.eval(pt)?.abs() > CLASSIFY_TOL * scale {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let all = |es: &[&Expr]| -> Result<bool> {
        for e in es {
            if !vanishes(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let half = |e: &Expr| (0.5 * e.clone()).simplify();
    let z = Some(0.0);
    for form in [FForm::F0, FForm::F1, FForm::F2, FForm::F5, FForm::F3, FForm::F4] {
        let coefficients = match form {
            FForm::F0 if all(&[&d.t, &d.xxx])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.x, z, z)),
                ("C", half(&at(&d.xx, z, z))),
            ],
            FForm::F1 if all(&[&d.tt, &d.xt, &d.xxx, &at(&d.x, z, None)])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.t, z, z)),
                ("C", half(&at(&d.xx, z, z))),
            ],
            FForm::F2 if all(&[&d.x, &d.ttt])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.t, z, z)),
                ("C", half(&at(&d.tt, z, z))),
            ],
            FForm::F3 if all(&[&d.xx, &d.tt])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.t, z, z)),
                ("C", at(&d.xt, z, z)),
                ("D", at(&d.x, z, z)),
            ],
            FForm::F4 if all(&[&d.xx, &d.xt, &d.ttt])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.x, z, z)),
                ("C", at(&d.t, z, z)),
                ("D", half(&at(&d.tt, z, z))),
            ],
            FForm::F5 if all(&[&d.xx, &d.tt, &at(&d.t, z, None)])? => vec![
                ("A", at(&d.f, z, z)),
                ("B", at(&d.x, z, z)),
                ("C", at(&d.xt, z, z)),
            ],
            _ => continue,
        };
        return Ok(Some(Classification { form, coefficients }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn pt(x: f64, t: f64, u: f64, ux: f64) -> JetPoint {
        JetPoint { x, t, u, ux }
    }

    #[test]
    fn free_wave_is_compatible() {
        let p = PdeSpec::parse("1", "0").unwrap();
        let r = Reduction::new(Branch::Plus, Expr::zero()).unwrap();
        assert_eq!(con1_residual(&p, &r, pt(0.1, 0.2, 0.3, 0.4)).unwrap(), 0.0);
    }

    #[test]
    fn constraint_form_has_vanishing_determinant() {
        let p = PdeSpec::parse("1 + u^2", "0").unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let r = Reduction::new(branch, parse("x*u").unwrap()).unwrap();
            let f = r.constraint(&p);
            let env = Env::new().with("x", 0.3).with("t", 0.1).with("u", 2.0).with("q", 1.0).with("p", 0.5);
            let a = p.speed(0.3, 0.1, 2.0).unwrap();
            assert!(det_residual(&f, a, &env).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn determinant_arithmetic() {
        let env = Env::new().with("p", 0.0).with("q", 0.0);
        assert_eq!(det_residual(&parse("p - 2*q").unwrap(), 1.0, &env).unwrap(), -3.0);
        assert_eq!(det_residual(&parse("p").unwrap(), 3.0, &env).unwrap(), 9.0);
    }

    #[test]
    fn g_with_gradient_is_rejected() {
        assert!(Reduction::new(Branch::Plus, parse("ux").unwrap()).is_err());
    }

    fn unit_box() -> SampleBox {
        SampleBox::from_bounds((0.1, 1.0), (0.0, 1.0), (0.5, 2.0), (-1.0, 1.0), [3, 3, 3, 3])
    }

    #[test]
    fn classify_cubic_is_none() {
        let p = PdeSpec::parse("1", "ux^3").unwrap();
        assert!(classify_f(&p, &unit_box()).unwrap().is_none());
    }

    #[test]
    fn classify_zero_is_f0() {
        let p = PdeSpec::parse("1", "0").unwrap();
        let c = classify_f(&p, &unit_box()).unwrap().unwrap();
        assert_eq!(c.form, FForm::F0);
        for (_, v) in c.eval_at(0.3, 0.3, 1.0).unwrap() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn classify_each_form() {
        let cases = [
            ("u + x*ux + u^2*ux^2", FForm::F0),
            ("u + 2*ut + 3*ux^2", FForm::F1),
            ("u + 2*ut + 3*ut^2", FForm::F2),
            ("1 + ut + ux*ut + ux", FForm::F3),
            ("1 + ux + ut + ut^2", FForm::F4),
            ("1 + ux + u*ux*ut", FForm::F5),
        ];
        for (f, want) in cases {
            let p = PdeSpec::parse("1", f).unwrap();
            let c = classify_f(&p, &unit_box()).unwrap().unwrap();
            assert_eq!(c.form, want, "{f}");
        }
    }

    #[test]
    fn f5_coefficients() {
        let p = PdeSpec::parse("1", "1 + x*ux + u*ux*ut").unwrap();
        let c = classify_f(&p, &unit_box()).unwrap().unwrap();
        let v = c.eval_at(0.5, 0.0, 3.0).unwrap();
        assert_eq!(v, vec![("A", 1.0), ("B", 0.5), ("C", 3.0)]);
    }

    #[test]
    fn refinement_nests_nodes() {
        let b = unit_box();
        let r = b.refined();
        assert_eq!(r.counts, [5, 5, 5, 5]);
        let coarse = b.x.nodes(3);
        let fine = r.x.nodes(5);
        assert_eq!(coarse[1], fine[2]);
    }
}
