#![allow(dead_code)]

use hyperint::compat::SampleBox;

/// `n` deterministic points of `[x0, x1] × [t0, t1]` from a Halton sequence.
pub fn interior_points(x: (f64, f64), t: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|k| {
            let (a, b) = (halton(k, 2), halton(k, 3));
            (x.0 + (x.1 - x.0) * a, t.0 + (t.1 - t.0) * b)
        })
        .collect()
}

pub fn halton(mut k: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// A `10 × 10 × 10 × 10` box (10⁴ samples).
pub fn box4(x: (f64, f64), t: (f64, f64), u: (f64, f64), ux: (f64, f64)) -> SampleBox {
    SampleBox::from_bounds(x, t, u, ux, [10, 10, 10, 10])
}
