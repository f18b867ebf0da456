use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::system::{CharacteristicSystem, ExprSystem};
use crate::compat::{Interval, PdeSpec, Reduction};
use crate::error::{Error, ExprError, Result};
use crate::expr::{Compiled, Expr};
use crate::field::{Domain, Evaluator};
use crate::numerics::{hermite, newton_bracketed, rk4_step, RootOptions};

/// State along one characteristic: `(x, u, x_σ, u_σ)`.
type State = [f64; 4];

/// Initial data `u(σ, t_start) = u0(σ)` on `x = σ ∈ interval`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Expr,
    pub interval: Interval,
    pub t_start: f64,
}

impl InitialData {
    pub fn new(u0: Expr, interval: Interval, t_start: f64) -> Result<Self> {
        if let Some(v) = u0.vars().into_iter().find(|v| v != "sigma" && v != "pi") {
            return Err(Error::InvalidInput(format!(
                "initial profile must depend on sigma only, found `{v}`"
            )));
        }
        Ok(InitialData { u0, interval, t_start })
    }
}

/// Parametric solution of a reduction sampled on a `σ × t` grid.
///
/// Column `j` holds the states of every characteristic at `times[j]`. Each
/// characteristic also carries `(x_σ, u_σ)` from the variational equations,
/// which drive the monotonicity test and Newton inversion.
pub struct CharStrip {
    system: Arc<dyn CharacteristicSystem>,
    u0: Compiled,
    du0: Compiled,
    sigmas: Vec<f64>,
    times: Vec<f64>,
    h_t: f64,
    states: Vec<State>,
    /// Number of valid columns per characteristic.
    alive: Vec<usize>,
    monotone: Vec<bool>,
    blowup: Option<(f64, f64)>,
    breakdown: OnceLock<Option<f64>>,
}

impl std::fmt::Debug for CharStrip {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CharStrip")
            .field("n_sigma", &self.sigmas.len())
            .field("n_t", &self.times.len())
            .field("h_t", &self.h_t)
            .field("blowup", &self.blowup)
            .finish()
    }
}

fn is_blowup(e: &Error) -> bool {
    matches!(
        e,
        Error::Expr(ExprError::Domain {
            reason: "non-finite result",
            ..
        })
    )
}

/// Uniform time grid `t0 + k h`, closed by a partial step at `t_end` when
/// `(t_end - t0) / h` is not an integer.
fn time_grid(t0: f64, t_end: f64, h: f64) -> Vec<f64> {
    let ratio = (t_end - t0) / h;
    let full = (ratio + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=full).map(|k| t0 + h * k as f64).collect();
    if (t_end - ts[full]).abs() > 1e-12 * h.abs().max(1.0) && (ratio - full as f64) > 1e-9 {
        ts.push(t_end);
    } else {
        ts[full] = t_end;
    }
    ts
}

fn flow(sys: &dyn CharacteristicSystem, t: f64, s: &State) -> Result<State> {
    let ([v, g], [[vx, vu], [gx, gu]]) = sys.rhs_jacobian(s[0], t, s[1])?;
    Ok([v, g, vx * s[2] + vu * s[3], gx * s[2] + gu * s[3]])
}

fn step(sys: &dyn CharacteristicSystem, t: f64, s: &State, h: f64) -> Result<State> {
    let mut f = |t: f64, y: &State| flow(sys, t, y);
    let next = rk4_step(&mut f, t, s, h)?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Expr(ExprError::Domain {
            node: "characteristic state".into(),
            reason: "non-finite result",
        }));
    }
    Ok(next)
}

/// Integrates the reduction `u_t - λ u_x = g` along characteristics launched
/// from `n_sigma` equispaced points of the initial interval, with classical
/// RK4 of step `h_t` up to `t_end`.
pub fn integrate_reduction(
    p: &PdeSpec,
    r: &Reduction,
    init: &InitialData,
    t_end: f64,
    n_sigma: usize,
    h_t: f64,
) -> Result<CharStrip> {
    let system = Arc::new(ExprSystem::new(p, r)?);
    CharStrip::integrate(system, init, t_end, n_sigma, h_t)
}

impl CharStrip {
    /// Integrates an arbitrary characteristic system.
    pub fn integrate(
        system: Arc<dyn CharacteristicSystem>,
        init: &InitialData,
        t_end: f64,
        n_sigma: usize,
        h_t: f64,
    ) -> Result<CharStrip> {
        if !(h_t > 0.0) || !h_t.is_finite() {
            return Err(Error::InvalidInput(format!("step h_t must be positive, got {h_t}")));
        }
        if t_end == init.t_start || !t_end.is_finite() {
            return Err(Error::InvalidInput("t_end must differ from t_start".into()));
        }
        if n_sigma < 2 {
            return Err(Error::InvalidInput("need at least two characteristics".into()));
        }
        let h = if t_end > init.t_start { h_t } else { -h_t };
        let times = time_grid(init.t_start, t_end, h);
        let sigmas = init.interval.nodes(n_sigma);
        let u0 = init.u0.compile(&["sigma"])?;
        let du0 = init.u0.diff("sigma").compile(&["sigma"])?;
        let n_t = times.len();

        let columns: Vec<(Vec<State>, usize)> = sigmas
            .par_iter()
            .map(|&sigma| -> Result<(Vec<State>, usize)> {
                let mut traj = vec![[f64::NAN; 4]; n_t];
                let mut s = [sigma, u0.eval(&[sigma])?, 1.0, du0.eval(&[sigma])?];
                traj[0] = s;
                for j in 1..n_t {
                    let t = times[j - 1];
                    match step(system.as_ref(), t, &s, times[j] - t) {
                        Ok(next) => {
                            s = next;
                            traj[j] = s;
                        }
                        Err(e) if is_blowup(&e) => return Ok((traj, j)),
                        Err(e) => {
                            return Err(Error::Trajectory {
                                sigma,
                                t,
                                source: Box::new(e),
                            })
                        }
                    }
                }
                Ok((traj, n_t))
            })
            .collect::<Result<_>>()?;

        let n_s = sigmas.len();
        let mut states = vec![[f64::NAN; 4]; n_t * n_s];
        let mut alive = Vec::with_capacity(n_s);
        let mut blowup: Option<(f64, f64)> = None;
        for (i, (traj, n_alive)) in columns.into_iter().enumerate() {
            for (j, s) in traj.into_iter().enumerate() {
                states[j * n_s + i] = s;
            }
            if n_alive < n_t {
                let t = times[n_alive - 1];
                if blowup.map_or(true, |(_, tb)| (t - init.t_start).abs() < (tb - init.t_start).abs()) {
                    blowup = Some((sigmas[i], t));
                }
            }
            alive.push(n_alive);
        }
        let mut strip = CharStrip {
            system,
            u0,
            du0,
            sigmas,
            times,
            h_t,
            states,
            alive,
            monotone: Vec::new(),
            blowup,
            breakdown: OnceLock::new(),
        };
        strip.monotone = (0..n_t).map(|j| strip.column_monotone(j)).collect();
        Ok(strip)
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn step_size(&self) -> f64 {
        self.h_t
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// `(x, u)` of characteristic `i` at stored time `j` (NaN after blow-up).
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let s = self.states[j * self.sigmas.len() + i];
        (s[0], s[1])
    }

    /// Whether `σ ↦ x(σ, times[j])` is strictly increasing at column `j`.
    pub fn is_monotone(&self, j: usize) -> bool {
        self.monotone[j]
    }

    /// First `(σ, t)` at which a characteristic's state became non-finite.
    pub fn blowup(&self) -> Option<(f64, f64)> {
        self.blowup
    }

    fn state(&self, i: usize, j: usize) -> State {
        self.states[j * self.sigmas.len() + i]
    }

    fn live(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.sigmas.len()).filter(move |&i| self.alive[i] > j)
    }

    fn monotone_states(states: impl Iterator<Item = State>) -> bool {
        let mut prev: Option<f64> = None;
        for s in states {
            if !(s[2] > 0.0) {
                return false;
            }
            if let Some(p) = prev {
                if !(s[0] > p) {
                    return false;
                }
            }
            prev = Some(s[0]);
        }
        true
    }

    fn column_monotone(&self, j: usize) -> bool {
        Self::monotone_states(self.live(j).map(|i| self.state(i, j)))
    }

    /// Index `j` with `times[j] <= t <= times[j+1]` (in integration
    /// direction), or an exact node.
    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange(format!("t = {t} outside the strip's range [{lo}, {hi}]")));
        }
        let dir = (self.t_end() - self.t_start()).signum();
        let k = self.times.partition_point(|&tk| (tk - t) * dir <= 0.0);
        Ok(k.saturating_sub(1).min(self.times.len() - 2))
    }

    /// State of characteristic `i` at time `t` by cubic Hermite interpolation
    /// between stored columns.
    fn interpolated(&self, i: usize, j: usize, t: f64) -> Result<State> {
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        if t == t0 {
            return Ok(self.state(i, j));
        }
        if t == t1 {
            return Ok(self.state(i, j + 1));
        }
        let (s0, s1) = (self.state(i, j), self.state(i, j + 1));
        let d0 = flow(self.system.as_ref(), t0, &s0)?;
        let d1 = flow(self.system.as_ref(), t1, &s1)?;
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = hermite(t0, t1, s0[k], s1[k], d0[k], d1[k], t);
        }
        Ok(out)
    }

    fn monotone_at(&self, j: usize, t: f64) -> bool {
        let states: Result<Vec<State>> = self
            .live(j + 1)
            .map(|i| self.interpolated(i, j, t))
            .collect();
        states.map_or(false, |s| Self::monotone_states(s.into_iter()))
    }

    /// Earliest time at which `σ ↦ x(σ, t)` stops being strictly increasing,
    /// located between stored columns by bisection on the Hermite-interpolated
    /// column. `None` if every stored column is monotone.
    pub fn breakdown_time(&self) -> Option<f64> {
        *self.breakdown.get_or_init(|| {
            let j = self.monotone.iter().position(|m| !m)?;
            if j == 0 {
                return Some(self.times[0]);
            }
            let (mut good, mut bad) = (self.times[j - 1], self.times[j]);
            for _ in 0..80 {
                if (bad - good).abs() <= 1e-6 * self.h_t {
                    break;
                }
                let mid = 0.5 * (good + bad);
                if self.monotone_at(j - 1, mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            Some(bad)
        })
    }

    /// Integrates characteristic `σ` from the initial line to `t` with the
    /// strip's step sequence; reproduces stored nodes bit for bit.
    pub fn shoot(&self, sigma: f64, t: f64) -> Result<(f64, f64, f64, f64)> {
        let j = self.locate(t)?;
        let mut s = [sigma, self.u0.eval(&[sigma])?, 1.0, self.du0.eval(&[sigma])?];
        let wrap = |e: Error, tk: f64| Error::Trajectory {
            sigma,
            t: tk,
            source: Box::new(e),
        };
        for k in 0..j {
            let tk = self.times[k];
            s = step(self.system.as_ref(), tk, &s, self.times[k + 1] - tk).map_err(|e| wrap(e, tk))?;
        }
        let tj = self.times[j];
        if t != tj {
            s = step(self.system.as_ref(), tj, &s, t - tj).map_err(|e| wrap(e, tj))?;
        }
        Ok((s[0], s[1], s[2], s[3]))
    }

    /// Value of the solution at `(x, t)`.
    ///
    /// Finds `σ*` with `x(σ*, t) = x` by a Hermite guess on the interpolated
    /// column and Newton on exact shots, with a bracketed fallback.
    pub fn eval_solution(&self, x: f64, t: f64) -> Result<f64> {
        let j = self.locate(t)?;
        if let Some(tb) = self.breakdown_time() {
            let dir = (self.t_end() - self.t_start()).signum();
            if (t - tb) * dir >= 0.0 {
                return Err(Error::CharacteristicsCrossed { t });
            }
        }
        if t == self.t_start() {
            let iv = Interval {
                lo: self.sigmas[0],
                hi: self.sigmas[self.sigmas.len() - 1],
            };
            if !iv.contains(x) {
                return Err(Error::OutOfRange(format!("x = {x} outside the initial interval")));
            }
            return Ok(self.u0.eval(&[x])?);
        }
        let live: Vec<usize> = self.live(j + 1).collect();
        if live.len() < 2 {
            return Err(Error::OutOfRange(format!("no live characteristics at t = {t}")));
        }
        let at = |k: usize| self.interpolated(live[k], j, t);
        let (first, last_state) = (at(0)?, at(live.len() - 1)?);
        // Stored node hit exactly.
        if t == self.times[j] || t == self.times[j + 1] {
            let jj = if t == self.times[j] { j } else { j + 1 };
            if let Some(&i) = live.iter().find(|&&i| self.state(i, jj)[0] == x) {
                return Ok(self.state(i, jj)[1]);
            }
        }
        let (xmin, xmax) = (first[0], last_state[0]);
        if !(x >= xmin && x <= xmax) {
            return Err(Error::OutOfRange(format!(
                "x = {x} outside the strip's x-range [{xmin}, {xmax}] at t = {t}"
            )));
        }
        // Binary search of the monotone column for the cell holding x.
        let (mut lo, mut hi) = (0, live.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if at(mid)?[0] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let (sa, sb) = (self.sigmas[live[k]], self.sigmas[live[k + 1]]);
        let (ca, cb) = (at(k)?, at(k + 1)?);
        // Initial guess: invert the cubic Hermite of x in σ by a few Newton steps.
        let mut guess = sa + (x - ca[0]) / (cb[0] - ca[0]) * (sb - sa);
        for _ in 0..4 {
            let xs = hermite(sa, sb, ca[0], cb[0], ca[2], cb[2], guess);
            let d = crate::numerics::hermite_slope(sa, sb, ca[0], cb[0], ca[2], cb[2], guess);
            if d > 0.0 {
                guess = (guess - (xs - x) / d).clamp(sa, sb);
            }
        }
        let span = (sb - sa).abs();
        let lo_idx = k.saturating_sub(1);
        let hi_idx = (k + 2).min(live.len() - 1);
        let (outer_lo, outer_hi) = (self.sigmas[live[lo_idx]], self.sigmas[live[hi_idx]]);

        // Plain Newton on exact shots from the interpolated guess; the final
        // first-order correction makes the value error quadratic in the x
        // residual, so a loose stopping test suffices.
        let accept = 1e-9 * (1.0 + x.abs());
        let mut s = guess;
        for _ in 0..6 {
            let st = self.shoot(s, t)?;
            let dx = x - st.0;
            if dx.abs() <= accept {
                return Ok(st.1 + st.3 / st.2 * dx);
            }
            if !(st.2 > 0.0) {
                break;
            }
            s += dx / st.2;
            if !(s >= outer_lo && s <= outer_hi) {
                break;
            }
        }

        // Fallback: bracketed Newton, widening the bracket by one node on
        // each side if the interpolated column misplaced the root.
        let brackets = [(sa, sb), (outer_lo, outer_hi)];
        let mut last: Option<(f64, (f64, f64, f64, f64))> = None;
        let mut fdf = |s: f64| -> Result<(f64, f64)> {
            let st = self.shoot(s, t)?;
            last = Some((s, st));
            Ok((st.0 - x, st.2))
        };
        let opts = RootOptions {
            xtol: 1e-15 * (1.0 + span),
            max_iter: 100,
        };
        let mut root = None;
        for (lo, hi) in brackets {
            match newton_bracketed(&mut fdf, lo, hi, guess, opts) {
                Ok(r) => {
                    root = Some(r);
                    break;
                }
                Err(Error::NoBracket(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        let sigma = root.ok_or_else(|| Error::NoBracket(format!("cannot invert x = {x} at t = {t}")))?;
        let st = match last {
            Some((s, st)) if s == sigma => st,
            _ => self.shoot(sigma, t)?,
        };
        let dx = x - st.0;
        if dx.abs() > 1e-12 * (1.0 + x.abs()) {
            return Err(Error::NoConvergence(format!(
                "characteristic inversion left |x residual| = {:e} at ({x}, {t})",
                dx.abs()
            )));
        }
        Ok(st.1 + st.3 / st.2 * dx)
    }

    /// Domain covered by the initial interval and the strip's time range,
    /// intersected over time for the x-range.
    pub fn covered_domain(&self) -> Option<Domain> {
        let n = self.sigmas.len();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for j in 0..self.times.len() {
            if self.alive[0] <= j || self.alive[n - 1] <= j {
                return None;
            }
            lo = lo.max(self.state(0, j)[0]);
            hi = hi.min(self.state(n - 1, j)[0]);
        }
        let (t0, t1) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        Some(Domain {
            x: Interval::new(lo, hi).ok()?,
            t: Interval::new(t0, t1).ok()?,
        })
    }

    /// CSV with header `sigma,t,x,u`, rows ordered by time then σ.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "sigma,t,x,u")?;
        for (j, &t) in self.times.iter().enumerate() {
            for (i, &s) in self.sigmas.iter().enumerate() {
                let (x, u) = self.node(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    crate::cli::csv::float(s),
                    crate::cli::csv::float(t),
                    crate::cli::csv::float(x),
                    crate::cli::csv::float(u)
                )?;
            }
        }
        Ok(())
    }
}

impl Evaluator for CharStrip {
    fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.eval_solution(x, t)
    }

    fn domain(&self) -> Option<Domain> {
        self.covered_domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::Branch;
    use crate::expr::parse;

    fn strip(a: &str, g: &str, branch: Branch, u0: &str, iv: (f64, f64), t_end: f64, h: f64) -> CharStrip {
        let p = PdeSpec::parse(a, "0").unwrap();
        let r = Reduction::new(branch, parse(g).unwrap()).unwrap();
        let init = InitialData::new(parse(u0).unwrap(), Interval::new(iv.0, iv.1).unwrap(), 0.0).unwrap();
        integrate_reduction(&p, &r, &init, t_end, 81, h).unwrap()
    }

    #[test]
    fn time_grid_closes_with_partial_step() {
        let ts = time_grid(0.0, 1.0, 0.3);
        assert_eq!(ts.len(), 5);
        assert_eq!(*ts.last().unwrap(), 1.0);
        let ts = time_grid(0.0, 1.0, 0.25);
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let ts = time_grid(1.0, 0.0, -0.5);
        assert_eq!(ts, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn transport_plus_branch() {
        let s = strip("1", "0", Branch::Plus, "sin(sigma)", (-3.0, 3.0), 1.0, 1e-2);
        for (x, t) in [(0.0, 0.5), (0.7, 0.33), (-1.2, 1.0)] {
            let u = s.eval_solution(x, t).unwrap();
            assert!((u - (x + t).sin()).abs() < 1e-8, "({x},{t}): {u}");
        }
        assert_eq!(s.breakdown_time(), None);
    }

    #[test]
    fn transport_minus_branch() {
        let s = strip("1", "0", Branch::Minus, "sin(sigma)", (-3.0, 3.0), 1.0, 1e-2);
        let u = s.eval_solution(0.4, 0.8).unwrap();
        assert!((u - (0.4f64 - 0.8).sin()).abs() < 1e-8);
    }

    #[test]
    fn initial_line_is_exact() {
        let s = strip("u", "u", Branch::Plus, "sigma^2 + 1", (0.0, 1.0), 0.5, 1e-2);
        for i in [0, 10, 80] {
            let x = s.sigmas()[i];
            assert_eq!(s.eval_solution(x, 0.0).unwrap(), x * x + 1.0);
            assert_eq!(s.node(i, 0), (x, x * x + 1.0));
        }
    }

    #[test]
    fn shooting_reproduces_stored_nodes() {
        let s = strip("u", "u", Branch::Plus, "sigma", (0.5, 1.5), 0.5, 1e-2);
        let (j, i) = (23, 17);
        let (x, u) = s.node(i, j);
        let (xs, us, _, _) = s.shoot(s.sigmas()[i], s.times()[j]).unwrap();
        assert_eq!((x, u), (xs, us));
        assert_eq!(s.eval_solution(x, s.times()[j]).unwrap(), u);
    }

    #[test]
    fn simple_wave_before_and_after_breakdown() {
        let s = strip("u", "0", Branch::Plus, "sigma", (-2.0, 2.0), 1.5, 1e-3);
        let u = s.eval_solution(0.5, 0.5).unwrap();
        assert!((u - 1.0).abs() < 1e-8);
        let tb = s.breakdown_time().unwrap();
        assert!((tb - 1.0).abs() <= 1e-3, "{tb}");
        assert!(matches!(
            s.eval_solution(0.0, 1.2),
            Err(Error::CharacteristicsCrossed { .. })
        ));
    }

    #[test]
    fn out_of_range_queries() {
        let s = strip("1", "0", Branch::Plus, "sigma", (0.0, 1.0), 1.0, 1e-2);
        assert!(matches!(s.eval_solution(0.5, 2.0), Err(Error::OutOfRange(_))));
        assert!(matches!(s.eval_solution(5.0, 0.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn blowup_is_recorded() {
        // u' = u^2 from u0 = 1 blows up at t = 1.
        let s = strip("1", "u^2", Branch::Plus, "1 + 0*sigma", (0.0, 1.0), 1.5, 1e-3);
        let (_, t) = s.blowup().expect("blow-up");
        assert!(t > 0.9 && t < 1.1, "{t}");
    }

    #[test]
    fn csv_layout() {
        let s = strip("1", "0", Branch::Plus, "sigma", (0.0, 1.0), 0.5, 0.25);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "sigma,t,x,u");
        assert_eq!(lines.len(), 1 + 81 * 3);
    }
}
