use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),

    #[error("state is not normalized: |a|^2+|b|^2+|c|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("phases are undefined: middle amplitude b is zero")]
    DegeneratePhase,

    #[error("invalid canonical coordinates: {0}")]
    InvalidCoords(String),

    #[error("derivative is singular on the simplex boundary (p1={p1}, p3={p3})")]
    SingularDerivative { p1: f64, p3: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("equation is degenerate (all coefficients vanish)")]
    DegenerateEquation,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("norm drift {deviation:e} exceeds bound {bound:e} at t = {t}; use a tighter tolerance")]
    NormDrift { deviation: f64, bound: f64, t: f64 },

    #[error("integration blew up (non-finite state); last good time t = {t_last}")]
    BlowUp { t_last: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
