use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not weakly attracting: delta = {delta} must exceed 1")]
    NotWeaklyAttracting { delta: f64 },

    #[error("invalid saddle value {name} = {value}: must be finite and positive")]
    InvalidSaddleValue { name: &'static str, value: f64 },

    #[error("left the return domain: s = y + A + lambda sin x = {s} <= 0")]
    LeftDomain { s: f64 },

    #[error("radial coordinate |y| = {y} exceeds the cross-section bound 1")]
    OutOfSection { y: f64 },

    #[error("logarithmic stage needs a positive radial input, got {value}")]
    NonPositiveRadius { value: f64 },

    #[error("omega must be positive, got {omega}")]
    NonPositiveOmega { omega: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("degenerate circle of fixed points: lambda = 0 and A = G_l(omega)")]
    DegenerateCircle,

    #[error("Newton failed to converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("empty measurement window: {0}")]
    EmptyWindow(String),

    #[error("orbit escaped the domain at iterate {iteration}")]
    Escaped { iteration: usize },

    #[error("fixed point is not a saddle")]
    NotSaddle,

    #[error("integration failed at t = {t}: step size underflow ({step:e})")]
    IntegrationFailed { t: f64, step: f64 },
}
