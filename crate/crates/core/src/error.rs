use thiserror::Error;

/// Errors raised while parsing or evaluating an [`Expr`](crate::expr::Expr).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("exponent must be a constant (byte {offset})")]
    NonConstantExponent { offset: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("characteristics crossed at t = {t}: the solution is multi-valued")]
    CharacteristicsCrossed { t: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("evaluation failed on characteristic sigma = {sigma} at t = {t}: {source}")]
    Trajectory {
        sigma: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no bracketing interval: {0}")]
    NoBracket(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("pole of G at sigma = {pole} (query sigma = {sigma})")]
    Pole { sigma: f64, pole: f64 },

    #[error("parameter validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("structural conditions violated: plus = {plus:e}, minus = {minus:e}")]
    Structural { plus: f64, minus: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("CFL condition violated at step {step}: dt*max|a| = {courant_dx:e} > 0.9*dx (max|a| = {max_speed})")]
    Cfl {
        step: usize,
        max_speed: f64,
        courant_dx: f64,
    },

    #[error("non-finite value at cell (i = {i}, j = {j})")]
    NonFinite { i: usize, j: usize },

    #[error("stencil at (x = {x}, t = {t}) leaves the valid box")]
    StencilOutOfBox { x: f64, t: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown key `{key}` in section [{section}]")]
    UnknownKey { section: String, key: String },

    #[error("missing required key `{key}` in section [{section}]")]
    MissingKey { section: String, key: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
