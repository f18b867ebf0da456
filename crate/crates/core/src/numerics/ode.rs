//! Classical fourth-order Runge–Kutta for small fixed-size systems.

use crate::error::Result;
use crate::scalar::{lit, Scalar};

fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: T, k: &[T; N]) -> [T; N] {
    let mut out = *y;
    for (o, ki) in out.iter_mut().zip(k) {
        *o = *o + h * *ki;
    }
    out
}

/// One RK4 step of `y' = f(t, y)` from `t` with step `h`.
pub fn rk4_step<T, F, const N: usize>(f: &mut F, t: T, y: &[T; N], h: T) -> Result<[T; N]>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let half = lit::<T>(0.5);
    let k1 = f(t, y)?;
    let k2 = f(t + half * h, &axpy(y, half * h, &k1))?;
    let k3 = f(t + half * h, &axpy(y, half * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    let sixth = h / lit(6.0);
    let two = lit::<T>(2.0);
    let mut out = *y;
    for i in 0..N {
        out[i] = out[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Fixed-step RK4 driver: `n` uniform steps from `t0` to `t1`.
#[derive(Debug, Clone, Copy)]
pub struct Rk4<T> {
    pub t0: T,
    pub t1: T,
    pub steps: usize,
}

impl<T: Scalar> Rk4<T> {
    /// Uniform steps no longer than `h_max`.
    pub fn with_max_step(t0: T, t1: T, h_max: T) -> Self {
        let span = (t1 - t0).abs();
        let steps = (span / h_max).ceil().to_usize().unwrap_or(1).max(1);
        Rk4 { t0, t1, steps }
    }

    pub fn step_size(&self) -> T {
        (self.t1 - self.t0) / lit(self.steps as f64)
    }

    /// Integrates and returns the final state; `observe(k, t_k, y_k)` is
    /// called for every node including the start.
    pub fn run<F, O, const N: usize>(&self, mut f: F, y0: [T; N], mut observe: O) -> Result<[T; N]>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
        O: FnMut(usize, T, &[T; N]),
    {
        let h = self.step_size();
        let mut y = y0;
        observe(0, self.t0, &y);
        for k in 0..self.steps {
            let t = self.t0 + h * lit(k as f64);
            y = rk4_step(&mut f, t, &y, h)?;
            let tk = if k + 1 == self.steps {
                self.t1
            } else {
                self.t0 + h * lit((k + 1) as f64)
            };
            observe(k + 1, tk, &y);
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_fourth_order() {
        let err = |steps: usize| {
            let y = Rk4 { t0: 0.0, t1: 1.0, steps }
                .run(|_, y: &[f64; 1]| Ok([y[0]]), [1.0], |_, _, _| {})
                .unwrap();
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = err(10) / err(20);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn harmonic_oscillator_f32() {
        let y = Rk4 { t0: 0.0f32, t1: 1.0, steps: 100 }
            .run(|_, y: &[f32; 2]| Ok([y[1], -y[0]]), [0.0, 1.0], |_, _, _| {})
            .unwrap();
        assert!((y[0] - 1f32.sin()).abs() < 1e-5);
    }

    #[test]
    fn step_count_from_max_step() {
        let r = Rk4::with_max_step(0.0, 1.0, 0.3);
        assert_eq!(r.steps, 4);
        assert!((r.step_size() - 0.25f64).abs() < 1e-15);
    }
}
