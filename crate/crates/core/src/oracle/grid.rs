use std::io::Write;

use crate::error::{Error, Result};
use crate::field::Evaluator;

/// Values on a uniform `x × t` grid, stored row-major in `t` then `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(x0: f64, dx: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        if !(dx > 0.0 && dt > 0.0) || nx == 0 || nt == 0 {
            return Err(Error::InvalidInput("grid steps must be positive and counts nonzero".into()));
        }
        Ok(GridField {
            x0,
            dx,
            nx,
            t0,
            dt,
            nt,
            values: vec![0.0; nx * nt],
        })
    }

    /// Samples an evaluator at every node.
    pub fn sample(ev: &dyn Evaluator, x0: f64, dx: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let mut g = GridField::new(x0, dx, nx, t0, dt, nt)?;
        for j in 0..nt {
            for i in 0..nx {
                let v = ev.eval(g.x(i), g.t(j))?;
                g.set(i, j, v);
            }
        }
        Ok(g)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nx + i] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.nx..(j + 1) * self.nx]
    }

    /// CSV with header `x,t,u`, rows ordered by time then x.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (0..self.nt).flat_map(|j| (0..self.nx).map(move |i| [self.x(i), self.t(j), self.get(i, j)]));
        crate::cli::csv::write_rows(w, &["x", "t", "u"], rows)
    }
}

/// Maximum and root-mean-square errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Errors {
    pub linf: f64,
    pub l2: f64,
}

/// Errors of `field` against `reference` over interior nodes: every node
/// except the two x-boundary columns and the initial row.
pub fn compare(field: &GridField, reference: &dyn Evaluator) -> Result<Errors> {
    let mut linf = 0.0f64;
    let mut sum = 0.0;
    let mut n = 0usize;
    let j0 = usize::from(field.nt > 1);
    for j in j0..field.nt {
        for i in 1..field.nx.saturating_sub(1) {
            let e = (field.get(i, j) - reference.eval(field.x(i), field.t(j))?).abs();
            linf = linf.max(e);
            sum += e * e;
            n += 1;
        }
    }
    Ok(Errors {
        linf,
        l2: if n == 0 { 0.0 } else { (sum / n as f64).sqrt() },
    })
}
