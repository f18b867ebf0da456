use super::grid::{compare, GridField};
use crate::compat::WaveEquation;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Domain, Evaluator};

/// Initial data and resolution for [`leapfrog_solve`].
#[derive(Debug, Clone)]
pub struct LeapfrogSetup {
    /// `u(x, t0)` as an expression in `x`.
    pub phi: Expr,
    /// `u_t(x, t0)` as an expression in `x`.
    pub psi: Expr,
    /// Spatial interval and time interval `[t0, t_end]`.
    pub domain: Domain,
    pub dx: f64,
    pub dt: f64,
}

const CFL: f64 = 0.9;

fn check_cfl(step: usize, dt: f64, dx: f64, max_speed: f64) -> Result<()> {
    let courant_dx = dt * max_speed;
    if courant_dx > CFL * dx * (1.0 + 1e-12) {
        return Err(Error::Cfl {
            step,
            max_speed,
            courant_dx,
        });
    }
    Ok(())
}

/// Explicit leapfrog for `u_tt = a² u_xx + f`.
///
/// `dx` and `dt` are shrunk to divide the domain evenly. Interior update
/// `u^{j+1} = 2u^j - u^{j-1} + dt² (a² δ²u + f)` with `u_x` central and `u_t`
/// from the lagged second-order backward difference
/// `(3u^j - 4u^{j-1} + u^{j-2}) / (2dt)`. The first step and the auxiliary
/// level `u^{-1}` come from a second-order Taylor expansion using `φ`, `ψ` and
/// the PDE. Boundary columns are taken from `boundary`.
pub fn leapfrog_solve(p: &dyn WaveEquation, setup: &LeapfrogSetup, boundary: &dyn Evaluator) -> Result<GridField> {
    let d = setup.domain;
    if !(setup.dx > 0.0 && setup.dt > 0.0) {
        return Err(Error::InvalidInput("dx and dt must be positive".into()));
    }
    let nx = ((d.x.width() / setup.dx).round() as usize).max(2) + 1;
    let dx = d.x.width() / (nx - 1) as f64;
    let steps = ((d.t.width() / setup.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = d.t.width() / steps as f64;
    let mut field = GridField::new(d.x.lo, dx, nx, d.t.lo, dt, steps + 1)?;

    let xl = ["x"];
    let phi = setup.phi.compile(&xl)?;
    let dphi = setup.phi.diff("x").compile(&xl)?;
    let ddphi = setup.phi.diff("x").diff("x").compile(&xl)?;
    let psi = setup.psi.compile(&xl)?;

    let t0 = d.t.lo;
    let mut max_speed = 0.0f64;
    let mut back = vec![0.0; nx];
    for i in 0..nx {
        let x = field.x(i);
        let (u, ux, uxx, ut) = (phi.eval(&[x])?, dphi.eval(&[x])?, ddphi.eval(&[x])?, psi.eval(&[x])?);
        let a = p.speed(x, t0, u)?;
        max_speed = max_speed.max(a.abs());
        let utt = a * a * uxx + p.rhs(x, t0, u, ux, ut)?;
        field.set(i, 0, u);
        field.set(i, 1, u + dt * ut + 0.5 * dt * dt * utt);
        back[i] = u - dt * ut + 0.5 * dt * dt * utt;
    }
    check_cfl(0, dt, dx, max_speed)?;
    for i in [0, nx - 1] {
        let v = boundary.eval(field.x(i), field.t(1))?;
        field.set(i, 1, v);
    }

    let mut next = vec![0.0; nx];
    for j in 1..steps {
        let t = field.t(j);
        let cur = field.row(j);
        let prev = field.row(j - 1);
        let prev2: &[f64] = if j == 1 { &back } else { field.row(j - 2) };
        let mut max_speed = 0.0f64;
        for i in 1..nx - 1 {
            let x = field.x(i);
            let u = cur[i];
            let ux = (cur[i + 1] - cur[i - 1]) / (2.0 * dx);
            let uxx = (cur[i + 1] - 2.0 * u + cur[i - 1]) / (dx * dx);
            let ut = (3.0 * u - 4.0 * prev[i] + prev2[i]) / (2.0 * dt);
            let a = p.speed(x, t, u)?;
            max_speed = max_speed.max(a.abs());
            let f = p.rhs(x, t, u, ux, ut)?;
            next[i] = 2.0 * u - prev[i] + dt * dt * (a * a * uxx + f);
            if !next[i].is_finite() {
                return Err(Error::NonFinite { i, j: j + 1 });
            }
        }
        check_cfl(j, dt, dx, max_speed)?;
        let tn = field.t(j + 1);
        next[0] = boundary.eval(field.x(0), tn)?;
        next[nx - 1] = boundary.eval(field.x(nx - 1), tn)?;
        field.row_mut(j + 1).copy_from_slice(&next);
    }
    Ok(field)
}

/// Observed convergence of the leapfrog solver against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    /// `(dx, L∞ error)` per resolution.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log dx`.
    pub order: f64,
    /// Errors not strictly decreasing, or already at roundoff.
    pub inconclusive: bool,
}

/// Runs [`leapfrog_solve`] at each `(dx, dt)` and fits the order. The
/// reference also supplies boundary values.
pub fn convergence_order(
    p: &dyn WaveEquation,
    setup: &LeapfrogSetup,
    reference: &dyn Evaluator,
    resolutions: &[(f64, f64)],
) -> Result<Convergence> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidInput("need at least three resolutions".into()));
    }
    let mut errors = Vec::with_capacity(resolutions.len());
    for &(dx, dt) in resolutions {
        let s = LeapfrogSetup { dx, dt, ..setup.clone() };
        let field = leapfrog_solve(p, &s, reference)?;
        errors.push((field.dx, compare(&field, reference)?.linf));
    }
    let roundoff = errors.iter().any(|&(_, e)| e < 1e-12);
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .map(|&(h, e)| (h.ln(), e.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(Convergence {
        errors,
        order: sxy / sxx,
        inconclusive: roundoff || !decreasing,
    })
}
