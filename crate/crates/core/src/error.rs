use thiserror::Error;

/// Errors produced by grid construction, parameter validation, and file I/O.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension must be 1, 2 or 3, got {0}")]
    InvalidDimension(usize),

    #[error("samples per axis must be a power of two >= 16, got {0}")]
    InvalidGridSize(usize),

    #[error("grid values must be finite (found NaN or Inf at index {0})")]
    NonFiniteValue(usize),

    #[error("value count {got} does not match N^dim = {expected}")]
    ValueCount { got: usize, expected: usize },

    #[error("no valid scale ladder: need k_min <= k_max with t_kmin <= 1/4 and t_kmax >= 2/N (N={n}, k_min={k_min})")]
    LadderUnsatisfiable { n: usize, k_min: i32 },

    #[error("scale t={t} out of admissible range [{lo}, {hi}]")]
    ScaleOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("rung k={0} is not in the ladder")]
    RungOutOfRange(i32),

    #[error("parameter domain violation: {0}")]
    ParamDomain(String),

    #[error("grids have mismatched geometry (dim {0}x N {1} vs dim {2} x N {3})")]
    GridMismatch(usize, usize, usize, usize),

    #[error("unsupported generator spec for this operation: {0}")]
    UnsupportedSpec(String),

    #[error("aliasing guard: highest generated mode {mode} exceeds N/4 = {limit}")]
    AliasGuard { mode: usize, limit: usize },

    #[error("GF1 format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
