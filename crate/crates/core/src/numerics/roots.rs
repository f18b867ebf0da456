//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    /// Absolute tolerance on the abscissa.
    pub xtol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootOptions<T> {
    fn default() -> Self {
        RootOptions {
            xtol: lit(1e-12),
            max_iter: 200,
        }
    }
}

fn no_bracket<T: Scalar>(lo: T, hi: T, flo: T, fhi: T) -> Error {
    Error::NoBracket(format!(
        "f({lo}) = {flo} and f({hi}) = {fhi} have the same sign"
    ))
}

/// Plain bisection on a sign-changing bracket.
pub fn bisect<T, F>(mut f: F, mut lo: T, mut hi: T, opts: RootOptions<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(no_bracket(lo, hi, flo, fhi));
    }
    let half = lit::<T>(0.5);
    for _ in 0..opts.max_iter.max(2000) {
        let mid = (lo + hi) * half;
        if (hi - lo).abs() <= opts.xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * half)
}

/// Newton iteration safeguarded by a sign-changing bracket `[lo, hi]`.
///
/// `fdf` returns `(f, f')`. A step leaving the bracket, or three consecutive
/// steps that fail to halve the residual, trigger a bisection step.
pub fn newton_bracketed<T, F>(mut fdf: F, lo: T, hi: T, x0: T, opts: RootOptions<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<(T, T)>,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (flo, _) = fdf(lo)?;
    let (fhi, _) = fdf(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(no_bracket(lo, hi, flo, fhi));
    }
    let lo_positive = flo > T::zero();
    let half = lit::<T>(0.5);
    let mut x = if x0 > lo && x0 < hi { x0 } else { (lo + hi) * half };
    let mut stalled = 0;
    let mut last_abs = T::infinity();
    for _ in 0..opts.max_iter {
        let (fx, dfx) = fdf(x)?;
        if fx == T::zero() {
            return Ok(x);
        }
        if (fx > T::zero()) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        if fx.abs() > half * last_abs {
            stalled += 1;
        } else {
            stalled = 0;
        }
        last_abs = fx.abs();
        let newton = x - fx / dfx;
        let use_newton = stalled < 3 && dfx != T::zero() && newton.is_finite() && newton > lo && newton < hi;
        let next = if use_newton {
            newton
        } else {
            stalled = 0;
            (lo + hi) * half
        };
        if (next - x).abs() <= opts.xtol || (hi - lo) <= opts.xtol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(format!(
        "Newton iteration stalled in [{lo}, {hi}]"
    )))
}

/// Brent's method on a sign-changing bracket.
pub fn brent<T, F>(mut f: F, a: T, b: T, opts: RootOptions<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(no_bracket(a, b, fa, fb));
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let three = lit::<T>(3.0);
    let eps = T::epsilon();
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..opts.max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * eps * b.abs() + half * opts.xtol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b)?;
    }
    Err(Error::NoConvergence("Brent iteration limit reached".into()))
}

/// Grows `[x0, x0 + step]` geometrically until `f` changes sign; at most
/// `max_iter` doublings. Evaluation failures count as "not bracketed yet".
pub fn expand_bracket<T, F>(mut f: F, x0: T, step: T, max_iter: usize) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let f0 = f(x0)?;
    if f0 == T::zero() {
        return Ok((x0, x0));
    }
    let mut h = step;
    let mut prev = x0;
    for _ in 0..max_iter {
        let x = x0 + h;
        if let Ok(fx) = f(x) {
            if fx == T::zero() || (fx > T::zero()) != (f0 > T::zero()) {
                return Ok(if prev <= x { (prev, x) } else { (x, prev) });
            }
            prev = x;
        } else {
            break;
        }
        h = h * lit(2.0);
    }
    Err(Error::NoBracket(format!(
        "no sign change found from {x0} with initial step {step}"
    )))
}
