//! Catalog of closed-form solution families together with their governing
//! equations, reductions and parameter validators.
//!
//! Every family is evaluated through the parametric form of its
//! characteristics: the label `σ` of the characteristic through `(x, t)` is
//! found by bracketed Newton on `X(σ, t) = x`, and a root with `X_σ ≤ 0` is
//! reported as crossed characteristics. Integration constants left free by
//! the closed forms are fixed at zero (lower limits of the `x`-quadratures,
//! the speed-profile constant).

mod riccati;
mod solve;
mod speed;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use riccati::{riccati_expr, riccati_g, riccati_numeric, RiccatiBranch, RiccatiCoefficients, POLE_GAP, RICCATI_STEP};
pub use speed::{speed_profile_a, ProfileEquation, SpeedProfile};

use crate::characteristics::{CharStrip, CharacteristicSystem, ExprSystem, InitialData};
use crate::compat::{Branch, Interval, PdeSpec, Reduction, WaveEquation};
use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr};
use crate::field::Evaluator;
use crate::numerics::{simpson, Rk4};
use solve::{invert_label, solve_increasing};

/// Pass threshold of [`validate_family`], relative to `1 + |terms|`.
pub const VALIDATION_TOL: f64 = 1e-8;
/// Absolute tolerance of the adaptive quadratures inside the closed forms.
pub const QUAD_TOL: f64 = 1e-12;

/// Grid on which structural identities in `u` (or `x`) are sampled.
const CHECK_GRID: (f64, f64, usize) = (0.5, 2.0, 31);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    E1CaseI,
    E1CaseII,
    E1CaseIII12,
    E1CaseIII11,
    SimpleWave,
    E5,
    E6Minus,
    E6Plus,
    ConstantAstigmatism,
}

impl FamilyId {
    pub const ALL: [FamilyId; 9] = [
        FamilyId::E1CaseI,
        FamilyId::E1CaseII,
        FamilyId::E1CaseIII12,
        FamilyId::E1CaseIII11,
        FamilyId::SimpleWave,
        FamilyId::E5,
        FamilyId::E6Minus,
        FamilyId::E6Plus,
        FamilyId::ConstantAstigmatism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::E1CaseI => "E1_CASE_I",
            FamilyId::E1CaseII => "E1_CASE_II",
            FamilyId::E1CaseIII12 => "E1_CASE_III_12",
            FamilyId::E1CaseIII11 => "E1_CASE_III_11",
            FamilyId::SimpleWave => "SIMPLE_WAVE",
            FamilyId::E5 => "E5",
            FamilyId::E6Minus => "E6_MINUS",
            FamilyId::E6Plus => "E6_PLUS",
            FamilyId::ConstantAstigmatism => "CONSTANT_ASTIGMATISM",
        }
    }

    pub fn info(self) -> FamilyInfo {
        let none: &'static [&'static str] = &[];
        let (constants, optional_constants, exprs, optional_exprs, functions, optional_functions) = match self {
            FamilyId::E1CaseI => (&["gamma0", "beta0", "t0"][..], none, &["a"][..], &["h"][..], &["u0"][..], none),
            FamilyId::E1CaseII => (&["k1"][..], none, &["a"][..], &["phi"][..], &["u0"][..], none),
            FamilyId::E1CaseIII12 => (&["k0"][..], none, &["a"][..], &["q"][..], &["u0"][..], none),
            FamilyId::E1CaseIII11 => (
                &["alpha0", "gamma0"][..],
                &["alpha1", "alpha2", "gamma1", "gamma2", "c1"][..],
                none,
                none,
                none,
                &["u0"][..],
            ),
            FamilyId::SimpleWave => (none, none, &["a"][..], none, &["u0"][..], none),
            FamilyId::E5 => (none, none, none, none, &["u0"][..], none),
            FamilyId::E6Minus | FamilyId::E6Plus => (&["c"][..], none, &["q1"][..], &["q2"][..], &["u0"][..], none),
            FamilyId::ConstantAstigmatism => (none, none, none, none, none, &["u0"][..]),
        };
        let (pde, reduction, singular) = match self {
            FamilyId::E1CaseI => (
                "u_tt - a(u)^2 u_xx = 2 a a' u_x^2 + beta0/(gamma0 t)^2",
                "u_t - a u_x = -1/(gamma0 t sqrt(a)), data on t = t0",
                "t = 0; t/t0 <= 0",
            ),
            FamilyId::E1CaseII => (
                "u_tt - a(u)^2 u_xx = 2 a a' u_x^2 + phi(u) u_x, phi = k1 a'",
                "u_t - a u_x = k1",
                "zeros of a",
            ),
            FamilyId::E1CaseIII12 => (
                "u_tt - a(u)^2 u_xx = 2 a a' u_x^2 + q(u), q = (k0^2/2)(1/a)'",
                "u_t - a u_x = k0/sqrt(a)",
                "a <= 0",
            ),
            FamilyId::E1CaseIII11 => (
                "u_tt - a(u)^2 u_xx = 2 a a' u_x^2 + gamma2 w + alpha2/w, w = 1/sqrt(a) from profile A1-A4",
                "u_t - a u_x = G(alpha0 x + gamma0 t) w(u)",
                "poles of G; u = 0 for power-law speeds",
            ),
            FamilyId::SimpleWave => (
                "u_tt - a(u)^2 u_xx = 2 a a' u_x^2",
                "u_t - a u_x = 0",
                "t beyond the first crossing of characteristics",
            ),
            FamilyId::E5 => (
                "u_tt - u^2 u_xx = -u_t + (2/u) u_t^2",
                "u_t - u u_x = u",
                "u = 0; t = ln 2 for u0(sigma) = sigma",
            ),
            FamilyId::E6Minus => (
                "u_tt - c^2 u_xx = q1(x) u_t + q2(x) u, q2 = -c q1'/2 - q1^2/4",
                "u_t + c u_x = q1 u / 2",
                "singularities of q1",
            ),
            FamilyId::E6Plus => (
                "u_tt - c^2 u_xx = q1(x) u_t + q2(x) u, q2 = c q1'/2 - q1^2/4",
                "u_t - c u_x = q1 u / 2",
                "singularities of q1",
            ),
            FamilyId::ConstantAstigmatism => (
                "u_tt - u^-2 u_xx = -2 u_x^2/u^3 + 2",
                "u_t - u_x/u = 2 sqrt(u)",
                "u <= 0",
            ),
        };
        FamilyInfo {
            id: self,
            constants,
            optional_constants,
            exprs,
            optional_exprs,
            functions,
            optional_functions,
            pde,
            reduction,
            singular,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown family `{s}`")))
    }
}

/// Catalog entry: parameter names and the governing equations in words.
#[derive(Debug, Clone)]
pub struct FamilyInfo {
    pub id: FamilyId,
    pub constants: &'static [&'static str],
    /// Constants defaulting to zero.
    pub optional_constants: &'static [&'static str],
    /// Expressions: `a`, `phi`, `q` in `u`; `q1`, `q2` in `x`; `h` in `x, t`.
    pub exprs: &'static [&'static str],
    /// Derived from the other parameters when absent, validated when given.
    pub optional_exprs: &'static [&'static str],
    pub functions: &'static [&'static str],
    pub optional_functions: &'static [&'static str],
    pub pde: &'static str,
    pub reduction: &'static str,
    pub singular: &'static str,
}

impl FamilyInfo {
    /// Governing equation for the given parameters.
    pub fn pde_spec(&self, params: &FamilyParams) -> Result<Option<PdeSpec>> {
        Ok(Model::build(self.id, params)?.equations()?.map(|(p, _)| p))
    }
}

pub fn list_families() -> Vec<FamilyInfo> {
    FamilyId::ALL.into_iter().map(FamilyId::info).collect()
}

/// Named constants and expressions of a family.
#[derive(Debug, Clone, Default)]
pub struct FamilyParams {
    pub constants: BTreeMap<String, f64>,
    pub exprs: BTreeMap<String, Expr>,
}

impl FamilyParams {
    pub fn new() -> Self {
        FamilyParams::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn with_expr(mut self, name: &str, e: Expr) -> Self {
        self.exprs.insert(name.to_string(), e);
        self
    }

    /// Parses `src` and stores it under `name`.
    pub fn with_parsed(self, name: &str, src: &str) -> Result<Self> {
        Ok(self.with_expr(name, crate::expr::parse(src)?))
    }

    fn constant(&self, name: &str) -> Result<f64> {
        self.constants.get(name).copied().ok_or_else(|| Error::MissingKey {
            section: "params".into(),
            key: name.into(),
        })
    }

    fn constant_or_zero(&self, name: &str) -> f64 {
        self.constants.get(name).copied().unwrap_or(0.0)
    }

    fn expr(&self, name: &str) -> Result<&Expr> {
        self.exprs.get(name).ok_or_else(|| Error::MissingKey {
            section: "params".into(),
            key: name.into(),
        })
    }
}

/// Arbitrary one-variable functions of a family, such as `u0`.
#[derive(Debug, Clone, Default)]
pub struct ArbitraryFns(BTreeMap<String, Expr>);

impl ArbitraryFns {
    pub fn new() -> Self {
        ArbitraryFns::default()
    }

    pub fn with(mut self, name: &str, e: Expr) -> Self {
        self.0.insert(name.to_string(), e);
        self
    }

    pub fn with_parsed(self, name: &str, src: &str) -> Result<Self> {
        Ok(self.with(name, crate::expr::parse(src)?))
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.0.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Function of a single variable, whatever that variable is called, with
/// its derivative.
#[derive(Debug, Clone)]
pub struct UnaryFn {
    expr: Expr,
    f: Compiled,
    df: Compiled,
}

impl UnaryFn {
    /// Renames the only free variable of `e` to `var`.
    pub fn new(e: &Expr, var: &str) -> Result<Self> {
        let vars: Vec<String> = e.vars().into_iter().filter(|v| v != "pi").collect();
        let expr = match vars.as_slice() {
            [] => e.clone(),
            [v] => e.rename(v, var),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "`{e}` must depend on a single variable, found {}",
                    vars.join(", ")
                )))
            }
        };
        let df = expr.diff(var).simplify();
        Ok(UnaryFn {
            f: expr.compile(&[var])?,
            df: df.compile(&[var])?,
            expr,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        Ok(self.f.eval(&[v])?)
    }

    pub fn deriv(&self, v: f64) -> Result<f64> {
        Ok(self.df.eval(&[v])?)
    }

    /// `(f(v), f'(v))`.
    pub fn jet(&self, v: f64) -> Result<(f64, f64)> {
        Ok((self.eval(v)?, self.deriv(v)?))
    }
}

/// Positive speed `a(u)` with `√a` enforced to be real.
fn sqrt_speed(a: &UnaryFn, u: f64) -> Result<f64> {
    let v = a.eval(u)?;
    if !(v > 0.0) {
        return Err(Error::OutOfRange(format!("a({u}) = {v} must be positive")));
    }
    Ok(v.sqrt())
}

#[derive(Debug, Clone)]
enum Model {
    E5,
    SimpleWave { a: UnaryFn },
    CaseI { gamma0: f64, beta0: f64, t0: f64, a: UnaryFn },
    CaseII { k1: f64, a: UnaryFn, phi: Option<UnaryFn> },
    CaseIII12 { k0: f64, a: UnaryFn, q: Option<UnaryFn> },
    CaseIII11 { eq: ProfileEquation },
    E6 { c: f64, branch: Branch, q1: UnaryFn, q2: Option<UnaryFn> },
    Astigmatism,
}

fn ux2() -> Expr {
    Expr::var("ux").powf(2.0)
}

/// `2 a a' u_x²` for a speed depending on `u` only.
fn quadratic_term(a: &Expr) -> Expr {
    Expr::c(2.0) * a.clone() * a.diff("u").simplify() * ux2()
}

impl Model {
    fn build(id: FamilyId, p: &FamilyParams) -> Result<Model> {
        let speed = |p: &FamilyParams| UnaryFn::new(p.expr("a")?, "u");
        let optional = |name: &str, var: &str| p.exprs.get(name).map(|e| UnaryFn::new(e, var)).transpose();
        Ok(match id {
            FamilyId::E5 => Model::E5,
            FamilyId::SimpleWave => Model::SimpleWave { a: speed(p)? },
            FamilyId::E1CaseI => {
                let (gamma0, t0) = (p.constant("gamma0")?, p.constant("t0")?);
                if gamma0 == 0.0 || t0 == 0.0 {
                    return Err(Error::InvalidInput("gamma0 and t0 must be nonzero".into()));
                }
                Model::CaseI { gamma0, beta0: p.constant("beta0")?, t0, a: speed(p)? }
            }
            FamilyId::E1CaseII => Model::CaseII {
                k1: p.constant("k1")?,
                a: speed(p)?,
                phi: optional("phi", "u")?,
            },
            FamilyId::E1CaseIII12 => Model::CaseIII12 {
                k0: p.constant("k0")?,
                a: speed(p)?,
                q: optional("q", "u")?,
            },
            FamilyId::E1CaseIII11 => {
                let coef = RiccatiCoefficients::new(
                    [p.constant("alpha0")?, p.constant_or_zero("alpha1"), p.constant_or_zero("alpha2")],
                    [p.constant("gamma0")?, p.constant_or_zero("gamma1"), p.constant_or_zero("gamma2")],
                );
                Model::CaseIII11 {
                    eq: ProfileEquation::new(coef, p.constant_or_zero("c1"))?,
                }
            }
            FamilyId::E6Minus | FamilyId::E6Plus => {
                let c = p.constant("c")?;
                if c == 0.0 {
                    return Err(Error::InvalidInput("c must be nonzero".into()));
                }
                Model::E6 {
                    c,
                    branch: if id == FamilyId::E6Minus { Branch::Minus } else { Branch::Plus },
                    q1: UnaryFn::new(p.expr("q1")?, "x")?,
                    q2: optional("q2", "x")?,
                }
            }
            FamilyId::ConstantAstigmatism => Model::Astigmatism,
        })
    }

    /// `Φ = k1 a'`.
    fn case_ii_phi(k1: f64, a: &UnaryFn) -> Expr {
        (Expr::c(k1) * a.expr().diff("u")).simplify()
    }

    /// `q = (k0²/2) (1/a)'`.
    fn case_iii12_q(k0: f64, a: &UnaryFn) -> Expr {
        (Expr::c(0.5 * k0 * k0) * (Expr::one() / a.expr().clone()).diff("u")).simplify()
    }

    /// `q2 = λ q1'/2 - q1²/4`.
    fn e6_q2(c: f64, branch: Branch, q1: &UnaryFn) -> Expr {
        let lambda = branch.sign() * c;
        (Expr::c(0.5 * lambda) * q1.expr().diff("x") - Expr::c(0.25) * q1.expr().clone().powf(2.0)).simplify()
    }

    /// Governing equation and reduction as expressions, when they exist.
    fn equations(&self) -> Result<Option<(PdeSpec, Reduction)>> {
        let u = Expr::var("u");
        let (a, f, branch, g) = match self {
            Model::E5 => (
                u.clone(),
                -Expr::var("ut") + Expr::c(2.0) / u.clone() * Expr::var("ut").powf(2.0),
                Branch::Plus,
                u,
            ),
            Model::SimpleWave { a } => (a.expr().clone(), quadratic_term(a.expr()), Branch::Plus, Expr::zero()),
            Model::CaseI { gamma0, beta0, a, .. } => {
                let t = Expr::var("t");
                (
                    a.expr().clone(),
                    quadratic_term(a.expr()) + Expr::c(beta0 / (gamma0 * gamma0)) / t.clone().powf(2.0),
                    Branch::Plus,
                    Expr::c(-1.0 / gamma0) / (t * a.expr().clone().sqrt()),
                )
            }
            Model::CaseII { k1, a, phi } => {
                let phi = phi.as_ref().map(|p| p.expr().clone()).unwrap_or_else(|| Model::case_ii_phi(*k1, a));
                (
                    a.expr().clone(),
                    quadratic_term(a.expr()) + phi * Expr::var("ux"),
                    Branch::Plus,
                    Expr::c(*k1),
                )
            }
            Model::CaseIII12 { k0, a, q } => {
                let q = q.as_ref().map(|q| q.expr().clone()).unwrap_or_else(|| Model::case_iii12_q(*k0, a));
                (
                    a.expr().clone(),
                    quadratic_term(a.expr()) + q,
                    Branch::Plus,
                    Expr::c(*k0) / a.expr().clone().sqrt(),
                )
            }
            Model::CaseIII11 { eq } => {
                let Some((a, w)) = eq.profile.exprs() else {
                    return Ok(None);
                };
                let Some(gfun) = riccati_expr(&eq.coef, eq.c1)? else {
                    return Ok(None);
                };
                let q = Expr::c(eq.coef.gamma[2]) * w.clone() + Expr::c(eq.coef.alpha[2]) / w.clone();
                (a.clone(), quadratic_term(&a) + q, Branch::Plus, gfun * w)
            }
            Model::E6 { c, branch, q1, q2 } => {
                let q2 = q2.as_ref().map(|q| q.expr().clone()).unwrap_or_else(|| Model::e6_q2(*c, *branch, q1));
                (
                    Expr::c(*c),
                    q1.expr().clone() * Expr::var("ut") + q2 * u.clone(),
                    *branch,
                    Expr::c(0.5) * q1.expr().clone() * u,
                )
            }
            Model::Astigmatism => (
                Expr::one() / u.clone(),
                Expr::c(-2.0) * ux2() / u.clone().powf(3.0) + 2.0,
                Branch::Plus,
                Expr::c(2.0) * u.sqrt(),
            ),
        };
        Ok(Some((PdeSpec::new(a.simplify(), f.simplify())?, Reduction::new(branch, g.simplify())?)))
    }

    fn t_start(&self) -> f64 {
        match self {
            Model::CaseI { t0, .. } => *t0,
            _ => 0.0,
        }
    }
}

fn grid() -> Vec<f64> {
    let (lo, hi, n) = CHECK_GRID;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Compares two one-variable expressions on the default grid.
fn compare_on_grid(out: &mut Vec<String>, what: &str, var: &str, lhs: &Expr, rhs: &Expr) {
    let (lc, rc) = match (lhs.compile(&[var]), rhs.compile(&[var])) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => {
            out.push(format!("{what}: {e}"));
            return;
        }
    };
    for v in grid() {
        match (lc.eval(&[v]), rc.eval(&[v])) {
            (Ok(l), Ok(r)) => {
                if (l - r).abs() > VALIDATION_TOL * (1.0 + l.abs() + r.abs()) {
                    out.push(format!("{what} violated at {var} = {v}: {l} != {r}"));
                    return;
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                out.push(format!("{what}: cannot evaluate at {var} = {v}: {e}"));
                return;
            }
        }
    }
}

fn key_violations(info: &FamilyInfo, params: &FamilyParams) -> Vec<String> {
    let mut out = Vec::new();
    for k in info.constants {
        if !params.constants.contains_key(*k) {
            out.push(format!("missing constant `{k}`"));
        }
    }
    for k in info.exprs {
        if !params.exprs.contains_key(*k) {
            out.push(format!("missing expression `{k}`"));
        }
    }
    for k in params.constants.keys() {
        if !info.constants.contains(&k.as_str()) && !info.optional_constants.contains(&k.as_str()) {
            out.push(format!("unexpected constant `{k}` for {}", info.id));
        }
    }
    for k in params.exprs.keys() {
        if !info.exprs.contains(&k.as_str()) && !info.optional_exprs.contains(&k.as_str()) {
            out.push(format!("unexpected expression `{k}` for {}", info.id));
        }
    }
    out
}

/// Checks parameter presence and every structural identity of the family;
/// an empty list means the parameters are admissible.
pub fn validate_family(id: FamilyId, params: &FamilyParams) -> Vec<String> {
    let info = id.info();
    let mut out = key_violations(&info, params);
    if !out.is_empty() {
        return out;
    }
    if id == FamilyId::E1CaseIII11 {
        let coef = RiccatiCoefficients::new(
            [params.constant_or_zero("alpha0"), params.constant_or_zero("alpha1"), params.constant_or_zero("alpha2")],
            [params.constant_or_zero("gamma0"), params.constant_or_zero("gamma1"), params.constant_or_zero("gamma2")],
        );
        out.extend(coef.violations());
        if coef.alpha[1] != 0.0 || coef.gamma[1] != 0.0 {
            out.push("alpha1 = gamma1 = 0 is required".into());
        }
        return out;
    }
    let model = match Model::build(id, params) {
        Ok(m) => m,
        Err(e) => return vec![e.to_string()],
    };
    match &model {
        Model::CaseI { gamma0, beta0, a, .. } => {
            // d/du (1/√a) - β0 √a + γ0 = 0
            let lhs = (a.expr().clone().powf(-0.5).diff("u") - Expr::c(*beta0) * a.expr().clone().sqrt()).simplify();
            compare_on_grid(&mut out, "d/du(1/sqrt(a)) - beta0 sqrt(a) + gamma0 = 0", "u", &lhs, &Expr::c(-gamma0));
            if let Some(h) = params.exprs.get("h") {
                // h = β0/(γ0 t)² on t in [t0/2, 2 t0] at x = 1
                let t0 = params.constant_or_zero("t0");
                let lhs = h.substitute("x", &Expr::one()).rename("t", "s");
                let expected = Expr::c(beta0 / (gamma0 * gamma0)) / (Expr::c(t0) * Expr::var("s")).powf(2.0);
                let lhs = lhs.substitute("s", &(Expr::c(t0) * Expr::var("s")));
                compare_on_grid(&mut out, "h = beta0/(gamma0 t)^2", "s", &lhs, &expected);
            }
        }
        Model::CaseII { k1, a, phi: Some(phi) } => {
            compare_on_grid(&mut out, "phi = k1 a'", "u", phi.expr(), &Model::case_ii_phi(*k1, a));
        }
        Model::CaseIII12 { k0, a, q: Some(q) } => {
            compare_on_grid(&mut out, "q = (k0^2/2)(1/a)'", "u", q.expr(), &Model::case_iii12_q(*k0, a));
        }
        Model::E6 { c, branch, q1, q2: Some(q2) } => {
            compare_on_grid(&mut out, "q2 = lambda q1'/2 - q1^2/4", "x", q2.expr(), &Model::e6_q2(*c, *branch, q1));
        }
        _ => {}
    }
    out
}

/// A family with validated parameters and its arbitrary functions.
#[derive(Clone)]
pub struct Family {
    id: FamilyId,
    model: Model,
    equations: Option<(PdeSpec, Reduction)>,
    u0: Option<UnaryFn>,
    strip: Option<Arc<CharStrip>>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family")
            .field("id", &self.id)
            .field("model", &self.model)
            .field("u0", &self.u0.as_ref().map(|u| u.expr().to_string()))
            .field("strip", &self.strip.is_some())
            .finish()
    }
}

impl Family {
    pub fn new(id: FamilyId, params: &FamilyParams, fns: &ArbitraryFns) -> Result<Family> {
        let violations = validate_family(id, params);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let info = id.info();
        for name in info.functions {
            if fns.get(name).is_none() {
                return Err(Error::MissingKey { section: "functions".into(), key: name.to_string() });
            }
        }
        for name in fns.names() {
            if !info.functions.contains(&name) && !info.optional_functions.contains(&name) {
                return Err(Error::UnknownKey { section: "functions".into(), key: name.to_string() });
            }
        }
        let model = Model::build(id, params)?;
        let equations = model.equations()?;
        let u0 = fns.get("u0").map(|e| UnaryFn::new(e, "sigma")).transpose()?;
        Ok(Family { id, model, equations, u0, strip: None })
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    /// Governing equation as expressions; `None` for implicit speed profiles.
    pub fn pde(&self) -> Option<&PdeSpec> {
        self.equations.as_ref().map(|(p, _)| p)
    }

    pub fn reduction(&self) -> Option<&Reduction> {
        self.equations.as_ref().map(|(_, r)| r)
    }

    pub fn equation(&self) -> Arc<dyn WaveEquation> {
        match (&self.equations, &self.model) {
            (Some((p, _)), _) => Arc::new(p.clone()),
            (None, Model::CaseIII11 { eq }) => Arc::new(eq.clone()),
            (None, _) => unreachable!("only profile families lack expression form"),
        }
    }

    pub fn system(&self) -> Result<Arc<dyn CharacteristicSystem>> {
        match (&self.equations, &self.model) {
            (Some((p, r)), _) => Ok(Arc::new(ExprSystem::new(p, r)?)),
            (None, Model::CaseIII11 { eq }) => Ok(Arc::new(eq.clone())),
            (None, _) => unreachable!("only profile families lack expression form"),
        }
    }

    /// Time of the initial line carrying `u0`.
    pub fn t_start(&self) -> f64 {
        self.model.t_start()
    }

    /// Whether [`Family::eval`] uses a closed form rather than a strip.
    pub fn has_closed_form(&self) -> bool {
        match &self.model {
            Model::Astigmatism => false,
            Model::CaseIII11 { eq } => is_explicit_iii11(eq),
            _ => true,
        }
    }

    /// Integrates the family's reduction from `u0` on `interval` and uses the
    /// strip wherever no closed form is available.
    pub fn attach_strip(&mut self, interval: Interval, t_end: f64, n_sigma: usize, h_t: f64) -> Result<()> {
        let strip = self.integrate_strip(interval, t_end, n_sigma, h_t)?;
        self.strip = Some(Arc::new(strip));
        Ok(())
    }

    /// Characteristic strip of the family's reduction from `u0`.
    pub fn integrate_strip(&self, interval: Interval, t_end: f64, n_sigma: usize, h_t: f64) -> Result<CharStrip> {
        let u0 = self.u0.as_ref().ok_or_else(|| Error::MissingKey {
            section: "functions".into(),
            key: "u0".into(),
        })?;
        let init = InitialData::new(u0.expr().clone(), interval, self.t_start())?;
        CharStrip::integrate(self.system()?, &init, t_end, n_sigma, h_t)
    }

    fn u0(&self) -> Result<&UnaryFn> {
        self.u0.as_ref().ok_or_else(|| Error::MissingKey {
            section: "functions".into(),
            key: "u0".into(),
        })
    }

    /// `u(x, t)` from the closed form, or from the attached strip.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !self.has_closed_form() {
            return match &self.strip {
                Some(s) => s.eval_solution(x, t),
                None => Err(Error::InvalidInput(format!(
                    "{} has no closed form for these parameters; attach initial data with attach_strip",
                    self.id
                ))),
            };
        }
        let u0 = self.u0()?;
        match &self.model {
            Model::E5 => eval_e5(u0, x, t),
            Model::SimpleWave { a } => eval_simple_wave(a, u0, x, t),
            Model::CaseII { k1, a, .. } => eval_case_ii(*k1, a, u0, x, t),
            Model::CaseIII12 { k0, a, .. } => eval_case_iii12(*k0, a, u0, x, t),
            Model::CaseI { gamma0, t0, a, .. } => eval_case_i(*gamma0, *t0, a, u0, x, t),
            Model::CaseIII11 { eq } => eval_iii11_explicit(eq, u0, x, t),
            Model::E6 { c, branch, q1, .. } => eval_e6(*c, *branch, q1, u0, x, t),
            Model::Astigmatism => unreachable!("no closed form"),
        }
    }
}

impl Evaluator for Family {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Family::eval(self, x, t)
    }

    fn domain(&self) -> Option<crate::field::Domain> {
        if self.has_closed_form() {
            None
        } else {
            self.strip.as_ref().and_then(|s| s.covered_domain())
        }
    }
}

/// Evaluates a family once; see [`Family`] for repeated evaluation.
pub fn eval_family(id: FamilyId, params: &FamilyParams, fns: &ArbitraryFns, x: f64, t: f64) -> Result<f64> {
    Family::new(id, params, fns)?.eval(x, t)
}

// u = u0(σ) e^t on x = σ - u0(σ)(e^t - 1)
fn eval_e5(u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let e = t.exp_m1();
    let sigma = invert_label(
        |s| {
            let (v, dv) = u0.jet(s)?;
            Ok((s - v * e, 1.0 - dv * e))
        },
        x,
        t,
        x,
    )?;
    Ok(u0.eval(sigma)? * t.exp())
}

// u = u0(ξ) on x = ξ - a(u0(ξ)) t
fn eval_simple_wave(a: &UnaryFn, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let sigma = invert_label(
        |s| {
            let (v, dv) = u0.jet(s)?;
            let (av, dav) = a.jet(v)?;
            Ok((s - av * t, 1.0 - dav * dv * t))
        },
        x,
        t,
        x,
    )?;
    u0.eval(sigma)
}

// u = k1 t + u0(σ) on x = σ - ∫_0^t a(k1 τ + u0(σ)) dτ
fn eval_case_ii(k1: f64, a: &UnaryFn, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let sigma = invert_label(
        |s| {
            let (v, dv) = u0.jet(s)?;
            if k1 == 0.0 {
                let (av, dav) = a.jet(v)?;
                return Ok((s - av * t, 1.0 - dav * dv * t));
            }
            let drift = simpson(|tau| a.eval(k1 * tau + v), 0.0, t, QUAD_TOL)?;
            let slope = simpson(|tau| a.deriv(k1 * tau + v), 0.0, t, QUAD_TOL)?;
            Ok((s - drift, 1.0 - dv * slope))
        },
        x,
        t,
        x,
    )?;
    Ok(k1 * t + u0.eval(sigma)?)
}

/// `u` with `∫_{u0}^u √a(w) dw = target`.
fn solve_sqrt_integral(a: &UnaryFn, u_start: f64, target: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(u_start);
    }
    solve_increasing(
        |v| Ok((simpson(|w| sqrt_speed(a, w), u_start, v, QUAD_TOL)?, sqrt_speed(a, v)?)),
        target,
        u_start,
    )
}

// ∫_{u0(σ)}^u √a = k0 t on x = σ - (1/k0) ∫_{u0}^u a^{3/2}
fn eval_case_iii12(k0: f64, a: &UnaryFn, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let label = |s: f64| -> Result<(f64, f64, f64)> {
        let (v, dv) = u0.jet(s)?;
        if k0 == 0.0 {
            let (av, dav) = a.jet(v)?;
            return Ok((v, s - av * t, 1.0 - dav * dv * t));
        }
        let u = solve_sqrt_integral(a, v, k0 * t)?;
        let drift = simpson(|w| Ok(sqrt_speed(a, w)?.powi(3)), v, u, QUAD_TOL)? / k0;
        let slope = dv * sqrt_speed(a, v)? * (a.eval(u)? - a.eval(v)?) / k0;
        Ok((u, s - drift, 1.0 - slope))
    };
    let sigma = invert_label(|s| label(s).map(|(_, x, dx)| (x, dx)), x, t, x)?;
    Ok(label(sigma)?.0)
}

/// Fixed RK4 step count of the `u`-quadratures of [`FamilyId::E1CaseI`];
/// a fixed count keeps `X(σ, t)` smooth in both arguments.
const CASE_I_STEPS: usize = 128;

// Initial line t = t0. Along a characteristic dt/du = -γ0 t √a(u), so
// t(w) = t0 exp(-γ0 S(w)), S(w) = ∫_{u0}^w √a, and the t-quadratures become
// u-quadratures:
//   x = σ + γ0 ∫_{u0}^u a^{3/2}(w) t(w) dw,
//   x_σ = 1 + γ0 √a(u0) u0' ∫_{u0}^u a'(w) t(w) dw.
// S and both integrals are accumulated together as one ODE in w.
fn eval_case_i(gamma0: f64, t0: f64, a: &UnaryFn, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    if !(t * t0 > 0.0) {
        return Err(Error::OutOfRange(format!(
            "t = {t} must lie on the same side of 0 as t0 = {t0}"
        )));
    }
    let target = -(t / t0).ln() / gamma0;
    let label = |s: f64| -> Result<(f64, f64, f64)> {
        let (v, dv) = u0.jet(s)?;
        let u = solve_sqrt_integral(a, v, target)?;
        let rk = Rk4 { t0: v, t1: u, steps: CASE_I_STEPS };
        let rhs = |w: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
            let r = sqrt_speed(a, w)?;
            let time = t0 * (-gamma0 * y[0]).exp();
            Ok([r, r * r * r * time, a.deriv(w)? * time])
        };
        let [_, drift, slope] = rk.run(rhs, [0.0; 3], |_, _, _| {})?;
        Ok((u, s + gamma0 * drift, 1.0 + gamma0 * sqrt_speed(a, v)? * dv * slope))
    };
    let sigma = invert_label(|s| label(s).map(|(_, x, dx)| (x, dx)), x, t, x)?;
    Ok(label(sigma)?.0)
}

/// `α0 = α2 = γ2 = 0`: `G = -1/(γ0 t + c1)` with the A3 speed.
fn is_explicit_iii11(eq: &ProfileEquation) -> bool {
    let c = &eq.coef;
    c.alpha[0] == 0.0 && c.alpha[2] == 0.0 && c.gamma[2] == 0.0 && eq.c1 != 0.0
}

// With t0 = c1/γ0: u = u0(z)(t + t0)/t0 on x = z - t0 t / (γ0² u0(z)² (t + t0)).
fn eval_iii11_explicit(eq: &ProfileEquation, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let gamma0 = eq.coef.gamma[0];
    let t0 = eq.c1 / gamma0;
    let shift = t + t0;
    if shift.abs() < POLE_GAP {
        return Err(Error::Pole { sigma: gamma0 * t, pole: -eq.c1 });
    }
    let k = t0 * t / (gamma0 * gamma0 * shift);
    let z = invert_label(
        |z| {
            let (v, dv) = u0.jet(z)?;
            Ok((z - k / (v * v), 1.0 + 2.0 * k * dv / (v * v * v)))
        },
        x,
        t,
        x,
    )?;
    Ok(u0.eval(z)? * shift / t0)
}

// u = u0(x ∓ c t) exp(±∫_0^x q1/(2c)); upper signs for the minus branch.
fn eval_e6(c: f64, branch: Branch, q1: &UnaryFn, u0: &UnaryFn, x: f64, t: f64) -> Result<f64> {
    let s = -branch.sign();
    let integral = match q1.expr().const_value() {
        Some(k) => k * x,
        None => simpson(|y| q1.eval(y), 0.0, x, QUAD_TOL)?,
    };
    Ok(u0.eval(x - s * c * t)? * (s * integral / (2.0 * c)).exp())
}
