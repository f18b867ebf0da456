//! Scalar-generic numerical kernels: quadrature, root finding, RK4 and
//! cubic Hermite interpolation.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;

pub use interp::{hermite, hermite_slope, HermiteTable};
pub use ode::{rk4_step, Rk4};
pub use quad::{gauss_legendre, simpson, simpson_nested};
pub use roots::{bisect, brent, expand_bracket, newton_bracketed, RootOptions};
