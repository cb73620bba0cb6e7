use crate::hamiltonians::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid sector: 2J = {twice_j} is not allowed for N = {n}")]
    InvalidSector { n: usize, twice_j: usize },
    #[error("matrix dimension {dim} exceeds the guard of {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("inverse temperature must be positive and finite, got {0}")]
    NonPositiveBeta(f64),
    #[error("no Jx^2 coefficient is defined for {0}")]
    NoKappa(ModelKind),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("eigensolver did not converge within {0} QL sweeps")]
    NoConvergence(usize),
    #[error("inverse iteration failed: {0}")]
    InverseIteration(String),
    #[error("Fock cutoff insufficient: doubling past M = {cutoff} would exceed dimension {max_dim}")]
    CutoffInsufficient { cutoff: usize, max_dim: usize },
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),
    #[error("underflow points: {rejected} of {total} rejected, too few left to fit")]
    Underflow { rejected: usize, total: usize },
    #[error("parity-odd moment {name} = {value:e} is not negligible")]
    ParityViolation { name: &'static str, value: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("oracle size guard: {0}")]
    OracleGuard(String),
}
