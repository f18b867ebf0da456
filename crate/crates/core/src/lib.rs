//! Intermediate integrals and exact solutions of second-order hyperbolic
//! equations `u_tt - a^2 u_xx = f`.

pub mod characteristics;
pub mod cli;
pub mod compat;
pub mod error;
pub mod expr;
pub mod families;
pub mod linear;
pub mod field;
pub mod oracle;
pub mod numerics;
pub mod scalar;

pub use error::{Error, ExprError, Result};
pub use expr::{parse, Env, Expr, Parser};
pub use field::{Domain, Evaluator};
pub use families::{eval_family, validate_family, Family, FamilyId, FamilyParams};
pub use scalar::Scalar;

/// Real type used by the PDE-level API.
pub type Real = f64;
