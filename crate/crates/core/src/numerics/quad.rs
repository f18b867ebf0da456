//! Adaptive Simpson quadrature with fallible integrands.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

const MAX_DEPTH: u32 = 40;

/// `∫_a^b f` to absolute tolerance `tol` (Richardson-corrected adaptive
/// Simpson). Reversed limits give the negated integral.
pub fn simpson<T, F>(mut f: F, a: T, b: T, tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(T::zero());
    }
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = simpson_rule(a, b, fa, fm, fb);
    let v = recurse(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)?;
    if !v.is_finite() {
        return Err(Error::NoConvergence(format!(
            "quadrature over [{a}, {b}] produced a non-finite value"
        )));
    }
    Ok(v)
}

fn simpson_rule<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(f: &mut F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = lit::<T>(15.0);
    if depth == 0 || delta.abs() <= fifteen * tol || m == a || m == b {
        return Ok(left + right + delta / fifteen);
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, tol * half, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, tol * half, depth - 1)?)
}

/// Iterated double integral `∫_a^b ∫_{lo(x)}^{hi(x)} f(x, y) dy dx`; the inner
/// tolerance is ten times tighter than the outer one.
pub fn simpson_nested<T, F, L, H>(mut f: F, a: T, b: T, lo: L, hi: H, tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T, T) -> Result<T>,
    L: Fn(T) -> T,
    H: Fn(T) -> T,
{
    let inner_tol = tol / lit(10.0);
    simpson(
        |x| simpson(|y| f(x, y), lo(x), hi(x), inner_tol),
        a,
        b,
        tol,
    )
}

/// Nodes and weights of the 8-point Gauss–Legendre rule on `[-1, 1]`
/// (positive half; the rule is symmetric).
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_3),
];

/// `∫_a^b f` by composite 8-point Gauss–Legendre on `panels` equal panels.
///
/// The nodes move continuously with `a` and `b`, so the result is a smooth
/// function of the limits. Reversed limits give the negated integral.
pub fn gauss_legendre<T, F>(mut f: F, a: T, b: T, panels: usize) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let panels = panels.max(1);
    let h = (b - a) / lit(panels as f64);
    let half = h * lit(0.5);
    let mut sum = T::zero();
    for k in 0..panels {
        let mid = a + h * lit(k as f64 + 0.5);
        for &(x, w) in &GL8 {
            let d = half * lit(x);
            sum = sum + lit::<T>(w) * (f(mid - d)? + f(mid + d)?);
        }
    }
    Ok(sum * half)
}
