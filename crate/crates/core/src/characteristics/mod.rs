//! Characteristic integration of the reduction `u_t - λ u_x = g`.
//!
//! Along `dx/dt = -λ(x, t, u)` the reduction becomes `du/dt = g(x, t, u)`.
//! Characteristics launched from the initial line `t = t_start` give a
//! parametric solution `(σ, t) ↦ (x, u)` stored in a [`CharStrip`].

mod strip;
mod system;

pub use strip::{integrate_reduction, CharStrip, InitialData};
pub use system::{CharacteristicSystem, ExprSystem};
