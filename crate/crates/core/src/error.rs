use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distance {value} between points {i} and {j}")]
    InvalidDistance { i: usize, j: usize, value: f64 },
    #[error("distance between points {i} and {j} is not symmetric")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails on points ({i}, {j}, {k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("label {value} of point {index} is outside [0, 1]")]
    InvalidLabel { index: usize, value: f64 },
    #[error("{0}")]
    Domain(&'static str),
    #[error("parent links of node {0} do not reach the root")]
    CyclicTree(usize),
    #[error("solver gave up after {iterations} iterations without a feasible point or a certificate")]
    BudgetExhausted { iterations: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
