//! Configuration-file driven command line.
//!
//! [`run_command`] does all the work and returns the report lines, the
//! overall verdict and the CSV payload; the binary only handles files and
//! exit codes.

pub mod config;
pub mod csv;

use std::str::FromStr;
use std::sync::Arc;

pub use config::Config;

use crate::characteristics::{integrate_reduction, InitialData};
use crate::compat::{con1_max, det_residual, Branch, Interval, PdeSpec, Reduction, SampleBox, WaveEquation, CON1_TOL};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::families::{ArbitraryFns, Family, FamilyId, FamilyParams};
use crate::field::{Domain, Evaluator};
use crate::linear::{
    general_solution, solve_ivp, structural_residual, Catalog, GeneralOptions, IvpData, IvpOptions, LinearSpec,
    VariableSpeed,
};
use csv::float;
use crate::oracle::{compare, fd_residual, leapfrog_solve, FdOrder, GridField, LeapfrogSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Reduce,
    Family,
    LinearGeneral,
    LinearIvp,
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Reduce => "reduce",
            Command::Family => "family",
            Command::LinearGeneral => "linear-general",
            Command::LinearIvp => "linear-ivp",
            Command::Verify => "verify",
        }
    }
}

/// Result of one command.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// `name = value` report lines.
    pub lines: Vec<String>,
    /// Whether every reported residual is within its tolerance.
    pub passed: bool,
    pub csv: Option<Vec<u8>>,
}

impl Outcome {
    fn report(&mut self, name: &str, v: f64) {
        self.lines.push(format!("{name} = {}", float(v)));
    }

    /// Reports `v` and folds `v <= tol` into the verdict.
    fn gate(&mut self, name: &str, v: f64, tol: f64) {
        self.report(name, v);
        self.passed &= v <= tol;
    }

    fn finish(mut self) -> Self {
        let verdict = if self.passed { "pass" } else { "fail" };
        self.lines.push(format!("result = {verdict}"));
        self
    }
}

/// Tolerances with defaults equal to the acceptance values.
struct Tolerances {
    con1: f64,
    det: f64,
    structural: f64,
    fd: f64,
    compare: f64,
}

impl Tolerances {
    fn from(cfg: &Config) -> Result<Self> {
        Ok(Tolerances {
            con1: cfg.float_or("tolerance", "con1", CON1_TOL)?,
            det: cfg.float_or("tolerance", "det", 1e-12)?,
            structural: cfg.float_or("tolerance", "structural", 1e-12)?,
            fd: cfg.float_or("tolerance", "fd", 1e-5)?,
            compare: cfg.float_or("tolerance", "compare", 5e-4)?,
        })
    }
}

pub fn run_command(cmd: Command, cfg: &Config) -> Result<Outcome> {
    let tol = Tolerances::from(cfg)?;
    let out = Outcome {
        passed: true,
        ..Outcome::default()
    };
    let out = match cmd {
        Command::Check => check(cfg, &tol, out)?,
        Command::Reduce => reduce(cfg, out)?,
        Command::Family => {
            let fam = family(cfg)?;
            sample_grid(cfg, &fam, out)?
        }
        Command::LinearGeneral => {
            let (_, u) = linear_general(cfg)?;
            sample_grid(cfg, &*u, out)?
        }
        Command::LinearIvp => {
            let (_, u) = linear_ivp(cfg)?;
            sample_grid(cfg, &*u, out)?
        }
        Command::Verify => verify(cfg, &tol, out)?,
    };
    Ok(out.finish())
}

fn interval_or(cfg: &Config, section: &str, key: &str, lo: f64, hi: f64) -> Result<Interval> {
    Ok(cfg.interval(section, key)?.unwrap_or(Interval { lo, hi }))
}

/// `(PdeSpec, Reduction)` from `[problem]` + `[reduction]`, or from a family.
fn equations(cfg: &Config) -> Result<(PdeSpec, Reduction)> {
    let (p, r) = if cfg.has("problem") || cfg.has("reduction") {
        let p = PdeSpec::new(cfg.require_expr("problem", "a")?, cfg.require_expr("problem", "f")?)?;
        let branch = Branch::from_str(cfg.require("reduction", "branch")?)?;
        (p, Reduction::new(branch, cfg.require_expr("reduction", "g")?)?)
    } else if cfg.has("family") {
        let fam = family(cfg)?;
        match (fam.pde(), fam.reduction()) {
            (Some(p), Some(r)) => (p.clone(), r.clone()),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "family {} has no expression-level equation and reduction",
                    fam.id()
                )))
            }
        }
    } else {
        return Err(Error::MissingKey {
            section: "problem".into(),
            key: "a".into(),
        });
    };
    let r = match cfg.float("reduction", "g_scale")? {
        Some(s) => r.perturbed(s),
        None => r,
    };
    Ok((p, r))
}

fn check(cfg: &Config, tol: &Tolerances, mut out: Outcome) -> Result<Outcome> {
    let has_pair = cfg.has("problem") || cfg.has("reduction") || cfg.has("family");
    if has_pair {
        let (p, r) = equations(cfg)?;
        let sample = SampleBox::new(
            interval_or(cfg, "grid", "x", 0.5, 2.0)?,
            interval_or(cfg, "grid", "t", 0.0, 1.0)?,
            interval_or(cfg, "grid", "u", -2.0, 2.0)?,
            interval_or(cfg, "grid", "ux", -2.0, 2.0)?,
            [cfg.count_or("grid", "n", 10)?; 4],
        )?;
        let rep = con1_max(&p, &r, &sample)?;
        out.report("con1.max_abs", rep.max_abs);
        out.gate("con1.max_scaled", rep.max_scaled, tol.con1);

        let constraint = r.constraint(&p);
        let mut det = 0.0f64;
        for pt in sample.points() {
            let env = Env::new()
                .with("x", pt.x)
                .with("t", pt.t)
                .with("u", pt.u)
                .with("q", pt.ux)
                .with("p", 0.0);
            let a = p.speed(pt.x, pt.t, pt.u)?;
            det = det.max(det_residual(&constraint, a, &env)?.abs());
        }
        out.gate("det.max_abs", det, tol.det);
    }
    if cfg.has("linear") {
        let spec = linear_spec(cfg)?;
        let rep = structural_residual(&spec, &spec.default_box())?;
        out.gate("structural.plus", rep.plus, tol.structural);
        out.gate("structural.minus", rep.minus, tol.structural);
    }
    if !has_pair && !cfg.has("linear") {
        return Err(Error::InvalidInput(
            "check needs [problem] and [reduction], [family] or [linear]".into(),
        ));
    }
    Ok(out)
}

fn reduce(cfg: &Config, mut out: Outcome) -> Result<Outcome> {
    let (p, r) = equations(cfg)?;
    let init = InitialData::new(
        cfg.require_expr("initial", "u0")?,
        cfg.require_interval("initial", "interval")?,
        cfg.float_or("initial", "t_start", 0.0)?,
    )?;
    let strip = integrate_reduction(
        &p,
        &r,
        &init,
        cfg.require_float("grid", "t_end")?,
        cfg.count_or("grid", "n_sigma", 201)?,
        cfg.float_or("grid", "h_t", 1e-3)?,
    )?;
    match strip.breakdown_time() {
        Some(tb) => out.report("strip.breakdown_time", tb),
        None => out.lines.push("strip.breakdown_time = none".into()),
    }
    let mut buf = Vec::new();
    strip.write_csv(&mut buf)?;
    out.csv = Some(buf);
    Ok(out)
}

fn family(cfg: &Config) -> Result<Family> {
    let id = FamilyId::from_str(cfg.require("family", "id")?)?;
    let mut params = FamilyParams::new();
    for key in cfg.keys("params") {
        params = match cfg.float("params", key) {
            Ok(Some(v)) => params.with(key, v),
            _ => params.with_expr(key, cfg.require_expr("params", key)?),
        };
    }
    let mut fns = ArbitraryFns::new();
    for key in cfg.keys("functions") {
        fns = fns.with(key, cfg.require_expr("functions", key)?);
    }
    let mut fam = Family::new(id, &params, &fns)?;
    if !fam.has_closed_form() {
        fam.attach_strip(
            cfg.require_interval("initial", "interval")?,
            cfg.require_float("grid", "t_end")?,
            cfg.count_or("grid", "n_sigma", 201)?,
            cfg.float_or("grid", "h_t", 1e-3)?,
        )?;
    }
    Ok(fam)
}

fn linear_spec(cfg: &Config) -> Result<LinearSpec> {
    const COMMON: &[&str] = &["spec", "f1", "f2", "particular", "phi", "psi", "interval", "left", "x", "t"];
    let name = cfg.get("linear", "spec").unwrap_or("custom");
    let own: &[&str] = match name {
        "telegraph" => &["c", "q1", "q2"],
        "variable-speed" => &["coef", "h0", "k0", "tau"],
        "epd" => &["alpha0", "h"],
        "kgf" => &["c0", "k0"],
        "damped" => &["c0", "h0"],
        "custom" => &["a", "coef_ux", "coef_u", "source", "coef_ut"],
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown linear spec `{other}` (expected custom or one of {})",
                crate::linear::CATALOG_NAMES.join(", ")
            )))
        }
    };
    if let Some(key) = cfg.keys("linear").into_iter().find(|k| !COMMON.contains(k) && !own.contains(k)) {
        return Err(Error::UnknownKey {
            section: "linear".into(),
            key: key.into(),
        });
    }
    let f = |k: &str| cfg.require_float("linear", k);
    let e0 = |k: &str| Ok::<_, Error>(cfg.expr("linear", k)?.unwrap_or_else(Expr::zero));
    let spec = match name {
        "telegraph" => {
            let q1 = f("q1")?;
            Catalog::Telegraph {
                c: f("c")?,
                q1,
                q2: cfg.float_or("linear", "q2", -q1 * q1 / 4.0)?,
            }
            .spec()?
        }
        "variable-speed" => Catalog::VariableSpeed(VariableSpeed {
            coef: cfg.require_expr("linear", "coef")?,
            h0: e0("h0")?,
            k0: cfg.float_or("linear", "k0", 0.0)?,
            tau: cfg.expr("linear", "tau")?,
            weight: None,
        })
        .spec()?,
        "epd" => Catalog::Epd {
            alpha0: f("alpha0")?,
            h: e0("h")?,
        }
        .spec()?,
        "kgf" => {
            let c0 = f("c0")?;
            Catalog::Kgf {
                c0,
                k0: cfg.float_or("linear", "k0", c0 / 2.0 - c0 * c0 / 4.0)?,
            }
            .spec()?
        }
        "damped" => Catalog::Damped {
            c0: f("c0")?,
            h0: e0("h0")?,
        }
        .spec()?,
        _ => LinearSpec::new(
            cfg.require_expr("linear", "a")?,
            e0("coef_ux")?,
            e0("coef_u")?,
            e0("source")?,
            e0("coef_ut")?,
        )?,
    };
    let d = spec.domain();
    let domain = Domain {
        x: cfg.interval("linear", "x")?.unwrap_or(d.x),
        t: cfg.interval("linear", "t")?.unwrap_or(d.t),
    };
    Ok(spec.on(domain))
}

fn linear_general(cfg: &Config) -> Result<(LinearSpec, Arc<dyn Evaluator>)> {
    let spec = linear_spec(cfg)?;
    let zero = || Expr::zero();
    let f1 = cfg.expr("linear", "f1")?.unwrap_or_else(zero);
    let f2 = cfg.expr("linear", "f2")?.unwrap_or_else(zero);
    let opts = GeneralOptions {
        particular: cfg.bool_or("linear", "particular", true)?,
        ..GeneralOptions::default()
    };
    let u = general_solution(&spec, &f1, &f2, opts)?;
    Ok((spec, Arc::new(u)))
}

fn linear_ivp(cfg: &Config) -> Result<(LinearSpec, Arc<dyn Evaluator>)> {
    let spec = linear_spec(cfg)?;
    let mut data = IvpData::new(
        cfg.require_expr("linear", "phi")?,
        cfg.require_expr("linear", "psi")?,
        cfg.require_interval("linear", "interval")?,
    )?;
    if let Some(w) = cfg.float("linear", "left")? {
        data = data.with_left(w);
    }
    let t_end = cfg.require_interval("grid", "t")?.hi;
    let u = solve_ivp(&spec, &data, t_end, IvpOptions::default())?;
    Ok((spec, Arc::new(u)))
}

/// Samples `ev` on the `[grid]` lattice and stores the CSV.
fn sample_grid(cfg: &Config, ev: &dyn Evaluator, mut out: Outcome) -> Result<Outcome> {
    let (x, t) = (cfg.require_interval("grid", "x")?, cfg.require_interval("grid", "t")?);
    let (nx, nt) = (cfg.count_or("grid", "nx", 21)?, cfg.count_or("grid", "nt", 11)?);
    if nx < 2 || nt < 2 {
        return Err(Error::InvalidInput("grid needs nx >= 2 and nt >= 2".into()));
    }
    let field = GridField::sample(
        ev,
        x.lo,
        x.width() / (nx - 1) as f64,
        nx,
        t.lo,
        t.width() / (nt - 1) as f64,
        nt,
    )?;
    let mut buf = Vec::new();
    field.write_csv(&mut buf)?;
    out.lines.push(format!("grid.nodes = {}", nx * nt));
    out.csv = Some(buf);
    Ok(out)
}

/// Points of the 2-3 Halton sequence in `x × t`.
fn halton_points(x: Interval, t: Interval, n: usize) -> Vec<(f64, f64)> {
    let radical = |mut k: usize, base: usize| {
        let (mut f, mut r) = (1.0, 0.0);
        while k > 0 {
            f /= base as f64;
            r += f * (k % base) as f64;
            k /= base;
        }
        r
    };
    (1..=n)
        .map(|k| (x.lo + x.width() * radical(k, 2), t.lo + t.width() * radical(k, 3)))
        .collect()
}

fn verify(cfg: &Config, tol: &Tolerances, mut out: Outcome) -> Result<Outcome> {
    let (eq, u): (Arc<dyn WaveEquation>, Arc<dyn Evaluator>) = if cfg.has("family") {
        let fam = family(cfg)?;
        (fam.equation(), Arc::new(fam))
    } else if cfg.has("linear") {
        let (spec, u) = if cfg.get("linear", "phi").is_some() {
            linear_ivp(cfg)?
        } else {
            linear_general(cfg)?
        };
        (Arc::new(spec.pde()?), u)
    } else {
        return Err(Error::InvalidInput("verify needs [family] or [linear]".into()));
    };
    let (x, t) = (cfg.require_interval("grid", "x")?, cfg.require_interval("grid", "t")?);
    let h = cfg.float_or("grid", "h", 1e-2)?;
    let m = 3.0 * h;
    let inner = |i: Interval| Interval::new(i.lo + m, i.hi - m);
    let points = halton_points(inner(x)?, inner(t)?, cfg.count_or("grid", "points", 200)?);
    let fd = fd_residual(&*eq, &*u, &points, h, FdOrder::Fourth)?;
    out.gate("fd.max", fd, tol.fd);

    if let (Some(phi), Some(psi)) = (cfg.expr("verify", "phi")?, cfg.expr("verify", "psi")?) {
        let setup = LeapfrogSetup {
            phi,
            psi,
            domain: Domain { x, t },
            dx: cfg.require_float("grid", "dx")?,
            dt: cfg.require_float("grid", "dt")?,
        };
        let field = leapfrog_solve(&*eq, &setup, &*u)?;
        let errs = compare(&field, &*u)?;
        out.gate("compare.linf", errs.linf, tol.compare);
        out.report("compare.l2", errs.l2);
    }
    Ok(out)
}
