use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("orbital {orbital} out of range 1..={n}")]
    OrbitalOutOfRange { orbital: usize, n: usize },

    #[error("orbitals must be strictly increasing: {0:?}")]
    NotCanonical(Vec<usize>),

    #[error("ambient dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("sector (n={n}, k={k}) is invalid: k must not exceed n")]
    InvalidSector { n: usize, k: usize },

    #[error("rank {rank} out of range for sector (n={n}, k={k})")]
    RankOutOfRange { rank: u64, n: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("antisymmetry violated: max |G_ij + G_ji| = {max_deviation:.3e}")]
    AntisymmetryViolated { max_deviation: f64 },

    #[error("normalization violated: sum_(i<j) |G_ij|^2 = {norm_sqr:.17}")]
    NormalizationViolated { norm_sqr: f64 },

    #[error("invalid pair amplitudes: {0}")]
    InvalidPairs(String),

    #[error("canonicalization failed: {0}")]
    Canonicalization(String),

    #[error("operator requires n >= 3, got n = {0}")]
    SectorTooSmall(usize),

    #[error("n = {n} outside the supported range {min}..={max}")]
    OutOfRange { n: usize, min: usize, max: usize },

    #[error("invalid block parameters (n={n}, s={s}): {reason}")]
    InvalidBlockParameters { n: usize, s: usize, reason: &'static str },

    #[error("normalizer denominator vanished for {family} (partial sum {partial_sum:.3e})")]
    VanishingNormalizer { family: String, partial_sum: f64 },

    #[error("matrix is not Hermitian: max |A_ij - conj(A_ji)| = {max_deviation:.3e}")]
    NotHermitian { max_deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid document: {0}")]
    Document(String),
}
