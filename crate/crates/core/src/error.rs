use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wedge degree overflow: {left} + {right} exceeds chart dimension {dim}")]
    DegreeOverflow { left: usize, right: usize, dim: usize },

    #[error("expected a form of degree {expected}, got degree {got}")]
    WrongDegree { expected: usize, got: usize },

    #[error("cannot contract into a degree-0 form")]
    ContractDegreeZero,

    #[error("coordinate x = {0} lies outside the chart interval (-1, 1)")]
    OutOfChart(f64),

    #[error("chart dimension must be even and at least 2, got {0}")]
    BadDimension(usize),

    #[error("b^m-form has a pole at x = 0")]
    PoleAtZero,

    #[error("finite-difference stencil leaves the chart at x = {0}")]
    StencilOutOfDomain(f64),

    #[error("derivative order {order} exceeds the declared maximum {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("profile construction infeasible: {0}")]
    ProfileInfeasible(String),

    #[error("profile evaluated where f' <= 0 (t = {0})")]
    ProfileNotMonotone(f64),

    #[error("profile parity does not match the model order m = {m}")]
    ParityMismatch { m: usize },

    #[error("eps must satisfy 0 < eps < 1/2, got {0}")]
    InvalidEps(f64),

    #[error("grid point x = {x} lies inside the excluded band |x| <= {band}")]
    InsideBand { x: f64, band: f64 },

    #[error("degenerate linear system: {0}")]
    Degenerate(String),

    #[error("2-form value is singular, cannot invert to a bivector")]
    SingularMatrix,

    #[error("unsupported Laurent data: {0}")]
    Unsupported(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("model data invalid: {0}")]
    InvalidModel(String),

    #[error("model spec error: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
