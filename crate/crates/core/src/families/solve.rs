//! Implicit relations shared by the closed forms.

use crate::error::{Error, Result};
use crate::numerics::{expand_bracket, newton_bracketed, RootOptions};

/// Maximum number of bracket doublings.
const MAX_EXPAND: usize = 80;

/// Solves `y(s) = target` for a map with known slope, starting from `guess`.
///
/// The bracket is grown from `guess` towards the target, then refined by
/// safeguarded Newton to `1e-12`.
pub(crate) fn solve_increasing<F>(mut ys: F, target: f64, guess: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (y0, d0) = ys(guess)?;
    let r0 = y0 - target;
    if r0 == 0.0 {
        return Ok(guess);
    }
    let mut step = if d0.is_finite() && d0.abs() > 1e-12 {
        1.25 * r0.abs() / d0.abs()
    } else {
        0.1
    };
    step = step.max(1e-9 * (1.0 + guess.abs()));
    // Increasing map: move right when below the target.
    let step = if r0 < 0.0 { step } else { -step };
    let (lo, hi) = expand_bracket(|s| Ok(ys(s)?.0 - target), guess, step, MAX_EXPAND)?;
    if lo == hi {
        return Ok(lo);
    }
    let opts = RootOptions { xtol: 1e-13 * (1.0 + guess.abs()), max_iter: 200 };
    newton_bracketed(
        |s| {
            let (y, d) = ys(s)?;
            Ok((y - target, d))
        },
        lo,
        hi,
        guess.clamp(lo, hi),
        opts,
    )
}

/// Inverts `x = X(σ, t)` for the label `σ` of the characteristic through
/// `(x, t)`, rejecting roots where `X_σ ≤ 0` (crossed characteristics).
pub(crate) fn invert_label<F>(mut xs: F, x: f64, t: f64, guess: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let sigma = match solve_increasing(&mut xs, x, guess) {
        Ok(s) => s,
        Err(e @ (Error::NoBracket(_) | Error::NoConvergence(_))) => {
            // A map that already folds at the starting label is multi-valued.
            return match xs(guess) {
                Ok((_, d)) if !(d > 0.0) => Err(Error::CharacteristicsCrossed { t }),
                _ => Err(e),
            };
        }
        Err(e) => return Err(e),
    };
    let (_, slope) = xs(sigma)?;
    if !(slope > 0.0) {
        return Err(Error::CharacteristicsCrossed { t });
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_affine_map() {
        let s = invert_label(|s| Ok((2.0 * s + 1.0, 2.0)), 5.0, 0.0, 0.0).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn decreasing_map_is_crossed() {
        let e = invert_label(|s| Ok((-s, -1.0)), 1.0, 2.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::CharacteristicsCrossed { t } if t == 2.0));
    }
}
