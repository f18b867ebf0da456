//! Cubic Hermite interpolation.

use crate::scalar::{lit, Scalar};

/// Cubic Hermite interpolant on `[x0, x1]` with end values and slopes.
pub fn hermite<T: Scalar>(x0: T, x1: T, y0: T, y1: T, d0: T, d1: T, x: T) -> T {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Derivative of [`hermite`] with respect to `x`.
pub fn hermite_slope<T: Scalar>(x0: T, x1: T, y0: T, y1: T, d0: T, d1: T, x: T) -> T {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let six = lit::<T>(6.0);
    let four = lit::<T>(4.0);
    ((six * s2 - six * s) * y0 + (three * s2 - four * s + T::one()) * h * d0
        + (six * s - six * s2) * y1
        + (three * s2 - two * s) * h * d1)
        / h
}

/// Piecewise cubic Hermite interpolant through strictly increasing nodes.
#[derive(Debug, Clone)]
pub struct HermiteTable<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    ds: Vec<T>,
}

impl<T: Scalar> HermiteTable<T> {
    /// # Panics
    /// If the slices differ in length, have fewer than two nodes, or the
    /// nodes are not strictly increasing.
    pub fn new(xs: Vec<T>, ys: Vec<T>, ds: Vec<T>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == ds.len());
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "nodes must increase");
        HermiteTable { xs, ys, ds }
    }

    pub fn range(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn nodes(&self) -> &[T] {
        &self.xs
    }

    fn segment(&self, x: T) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    /// Value at `x`; extrapolates with the end cubic outside the range.
    pub fn eval(&self, x: T) -> T {
        let i = self.segment(x);
        hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        )
    }

    pub fn slope(&self, x: T) -> T {
        let i = self.segment(x);
        hermite_slope(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        )
    }
}
