//! Speed profiles `a(u)` compatible with `g = G(x,t)·w(u)`, `w = 1/√a`, and
//! the wave equation and characteristic system they induce.
//!
//! The profile ODE is `w' = -(α0 + γ0 w²)/w²`; its integration constant is
//! fixed at zero.

use std::f64::consts::FRAC_PI_2;

use super::riccati::{riccati_g, RiccatiCoefficients};
use crate::characteristics::CharacteristicSystem;
use crate::compat::WaveEquation;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{newton_bracketed, RootOptions};

/// One of the four speed profiles, tagged by the sign pattern of `(α0, γ0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedProfile {
    /// `α0/γ0 = c2² > 0`: `w - c2·arctan(w/c2) = -γ0 u`.
    A1 { gamma0: f64, c2: f64 },
    /// `α0/γ0 = -c2² < 0`: `w - (c2/2)·ln((w + c2)/(w - c2)) = -γ0 u`, `w > c2`.
    A2 { gamma0: f64, c2: f64 },
    /// `α0 = 0`: `a = 1/(γ0² u²)`.
    A3 { gamma0: f64 },
    /// `γ0 = 0`: `a = (-3α0 u)^(-2/3)`.
    A4 { alpha0: f64 },
}

impl SpeedProfile {
    /// Profile selected by the signs of `α0` and `γ0`.
    pub fn from_constants(alpha0: f64, gamma0: f64) -> Result<Self> {
        match (alpha0 == 0.0, gamma0 == 0.0) {
            (true, true) => Err(Error::InvalidInput(
                "alpha0 and gamma0 cannot both vanish".into(),
            )),
            (true, false) => Ok(SpeedProfile::A3 { gamma0 }),
            (false, true) => Ok(SpeedProfile::A4 { alpha0 }),
            (false, false) => {
                let ratio = alpha0 / gamma0;
                let c2 = ratio.abs().sqrt();
                Ok(if ratio > 0.0 {
                    SpeedProfile::A1 { gamma0, c2 }
                } else {
                    SpeedProfile::A2 { gamma0, c2 }
                })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpeedProfile::A1 { .. } => "A1",
            SpeedProfile::A2 { .. } => "A2",
            SpeedProfile::A3 { .. } => "A3",
            SpeedProfile::A4 { .. } => "A4",
        }
    }

    /// `(α0, γ0)` of the profile ODE.
    pub fn ode_constants(&self) -> (f64, f64) {
        match *self {
            SpeedProfile::A1 { gamma0, c2 } => (gamma0 * c2 * c2, gamma0),
            SpeedProfile::A2 { gamma0, c2 } => (-gamma0 * c2 * c2, gamma0),
            SpeedProfile::A3 { gamma0 } => (0.0, gamma0),
            SpeedProfile::A4 { alpha0 } => (alpha0, 0.0),
        }
    }

    /// `w(u) = 1/√a(u)`. For A3 the signed root `w = -γ0 u` is used, which
    /// keeps `g = G·w` smooth through either sign of `u`.
    pub fn w(&self, u: f64) -> Result<f64> {
        match *self {
            SpeedProfile::A3 { gamma0 } => {
                if u == 0.0 {
                    return Err(Error::OutOfRange("profile A3 is singular at u = 0".into()));
                }
                Ok(-gamma0 * u)
            }
            SpeedProfile::A4 { alpha0 } => {
                let s = -3.0 * alpha0 * u;
                if s <= 0.0 {
                    return Err(Error::OutOfRange(format!(
                        "profile A4 needs -3*alpha0*u > 0, got {s}"
                    )));
                }
                Ok(s.cbrt())
            }
            SpeedProfile::A1 { gamma0, c2 } => solve_a1(-gamma0 * u, c2),
            SpeedProfile::A2 { gamma0, c2 } => solve_a2(-gamma0 * u, c2),
        }
    }

    /// `dw/du` at a given `w`.
    pub fn w_prime(&self, w: f64) -> f64 {
        let (a0, g0) = self.ode_constants();
        -(a0 + g0 * w * w) / (w * w)
    }

    pub fn a(&self, u: f64) -> Result<f64> {
        let w = self.w(u)?;
        Ok(1.0 / (w * w))
    }

    /// `(w, a, a')` at `u`.
    pub fn jet(&self, u: f64) -> Result<(f64, f64, f64)> {
        let w = self.w(u)?;
        let a = 1.0 / (w * w);
        let da = -2.0 * self.w_prime(w) / (w * w * w);
        Ok((w, a, da))
    }

    /// Closed forms of `a(u)` and `w(u)` for the explicit profiles.
    pub fn exprs(&self) -> Option<(Expr, Expr)> {
        let u = Expr::var("u");
        match *self {
            SpeedProfile::A3 { gamma0 } => Some((
                Expr::c(1.0 / (gamma0 * gamma0)) / u.clone().powf(2.0),
                Expr::c(-gamma0) * u,
            )),
            SpeedProfile::A4 { alpha0 } => {
                let s = Expr::c(-3.0 * alpha0) * u;
                Some((s.clone().powf(-2.0 / 3.0), s.powf(1.0 / 3.0)))
            }
            _ => None,
        }
    }
}

fn solve_a1(k: f64, c2: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "profile A1 needs -gamma0*u > 0, got {k}"
        )));
    }
    let f = |w: f64| {
        let r = w / c2;
        Ok((w - c2 * r.atan() - k, r * r / (1.0 + r * r)))
    };
    let hi = k + c2 * FRAC_PI_2 + 1.0;
    newton_bracketed(f, 0.0, hi, k.cbrt().min(hi), RootOptions::default())
}

fn solve_a2(k: f64, c2: f64) -> Result<f64> {
    let f = |w: f64| {
        let v = w - 0.5 * c2 * ((w + c2) / (w - c2)).ln() - k;
        (v, w * w / ((w - c2) * (w + c2)))
    };
    let mut d = c2.max(1.0);
    let mut lo = c2 + d;
    while f(lo).0 >= 0.0 {
        d *= 0.5;
        if d < 1e-300 {
            return Err(Error::NoBracket("profile A2: no lower bracket above c2".into()));
        }
        lo = c2 + d;
    }
    let mut hi = c2 + 2.0 * c2.max(1.0) + k.abs();
    for _ in 0..200 {
        if f(hi).0 > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if f(hi).0 <= 0.0 {
        return Err(Error::NoBracket("profile A2: no upper bracket".into()));
    }
    newton_bracketed(|w| Ok(f(w)), lo, hi, 0.5 * (lo + hi), RootOptions::default())
}

/// Evaluates `a(u)` for the given profile.
pub fn speed_profile_a(profile: SpeedProfile, u: f64) -> Result<f64> {
    profile.a(u)
}

/// `u_tt - a(u)² u_xx = 2aa' u_x² + γ2 w + α2/w` and its reduction
/// `u_t - a u_x = G(x,t)·w(u)`, usable for every profile including the
/// implicit ones.
#[derive(Debug, Clone)]
pub struct ProfileEquation {
    pub profile: SpeedProfile,
    pub coef: RiccatiCoefficients,
    pub c1: f64,
}

impl ProfileEquation {
    pub fn new(coef: RiccatiCoefficients, c1: f64) -> Result<Self> {
        coef.check()?;
        if coef.alpha[1] != 0.0 || coef.gamma[1] != 0.0 {
            return Err(Error::Constraint(
                "this family requires alpha1 = gamma1 = 0".into(),
            ));
        }
        let profile = SpeedProfile::from_constants(coef.alpha[0], coef.gamma[0])?;
        Ok(ProfileEquation { profile, coef, c1 })
    }

    /// `q(u) = γ2 w + α2 / w`.
    pub fn q(&self, w: f64) -> f64 {
        self.coef.gamma[2] * w + self.coef.alpha[2] / w
    }

    pub fn g_value(&self, x: f64, t: f64) -> Result<f64> {
        riccati_g(&self.coef, self.c1, x, t)
    }
}

impl WaveEquation for ProfileEquation {
    fn speed(&self, _x: f64, _t: f64, u: f64) -> Result<f64> {
        self.profile.a(u)
    }

    fn rhs(&self, _x: f64, _t: f64, u: f64, ux: f64, _ut: f64) -> Result<f64> {
        let (w, a, da) = self.profile.jet(u)?;
        Ok(2.0 * a * da * ux * ux + self.q(w))
    }
}

impl CharacteristicSystem for ProfileEquation {
    fn rhs_jacobian(&self, x: f64, t: f64, u: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let (w, a, da) = self.profile.jet(u)?;
        let g = self.g_value(x, t)?;
        let gx = self.coef.alpha[0] * g * g + self.coef.alpha[2];
        Ok((
            [-a, g * w],
            [[0.0, -da], [gx * w, g * self.profile.w_prime(w)]],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_profiles() {
        assert_eq!(speed_profile_a(SpeedProfile::A3 { gamma0: 2.0 }, 0.5).unwrap(), 1.0);
        let a = speed_profile_a(SpeedProfile::A4 { alpha0: -1.0 / 3.0 }, 1.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert!(speed_profile_a(SpeedProfile::A4 { alpha0: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn implicit_a1_recovers_unit_speed() {
        let u = -(1.0 - 1f64.atan());
        let a = speed_profile_a(SpeedProfile::A1 { gamma0: 1.0, c2: 1.0 }, u).unwrap();
        assert!((a - 1.0).abs() < 1e-12, "{a}");
    }

    #[test]
    fn implicit_a2_recovers_manufactured_speed() {
        let (gamma0, c2, w): (f64, f64, f64) = (-0.5, 1.0, 2.0);
        let u = -(w - 0.5 * c2 * ((w + c2) / (w - c2)).ln()) / gamma0;
        let a = speed_profile_a(SpeedProfile::A2 { gamma0, c2 }, u).unwrap();
        assert!((a - 0.25).abs() < 1e-12, "{a}");
    }

    #[test]
    fn derivative_matches_profile_ode() {
        for p in [
            SpeedProfile::A1 { gamma0: -1.0, c2: 0.7 },
            SpeedProfile::A2 { gamma0: -1.0, c2: 0.7 },
            SpeedProfile::A3 { gamma0: -1.5 },
            SpeedProfile::A4 { alpha0: -0.4 },
        ] {
            let (u, h) = (0.8, 1e-5);
            let fd = (p.w(u + h).unwrap() - p.w(u - h).unwrap()) / (2.0 * h);
            let w = p.w(u).unwrap();
            assert!((fd - p.w_prime(w)).abs() < 1e-7 * (1.0 + fd.abs()), "{p:?}");
        }
    }

    #[test]
    fn sign_pattern_selects_profile() {
        assert_eq!(SpeedProfile::from_constants(4.0, 1.0).unwrap(), SpeedProfile::A1 { gamma0: 1.0, c2: 2.0 });
        assert_eq!(SpeedProfile::from_constants(-4.0, 1.0).unwrap(), SpeedProfile::A2 { gamma0: 1.0, c2: 2.0 });
        assert_eq!(SpeedProfile::from_constants(0.0, 3.0).unwrap().name(), "A3");
        assert_eq!(SpeedProfile::from_constants(3.0, 0.0).unwrap().name(), "A4");
    }
}
