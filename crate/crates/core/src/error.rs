use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid permutation set: {0}")]
    InvalidPermutations(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("malformed fixture: {0}")]
    Fixture(String),
}
