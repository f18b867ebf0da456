//! Independent numerical verification: finite-difference PDE residuals, an
//! explicit leapfrog solver, field comparison and convergence orders.

mod fd;
mod grid;
mod leapfrog;

pub use fd::{fd_residual, fd_residual_report, FdOrder, FdReport};
pub use grid::{compare, Errors, GridField};
pub use leapfrog::{convergence_order, leapfrog_solve, Convergence, LeapfrogSetup};

pub use crate::field::{Domain, Evaluator};
