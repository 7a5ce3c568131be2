//! Spectral decomposition and kernel basis of the elementary three-fermion
//! two-body operator `3P²_g∧I¹` built from a geminal `g²`.

pub mod analytic;
pub mod cli;
pub mod basis;
pub mod eigen;
pub mod error;
pub mod geminal;
pub mod kernel;
pub mod operator;
pub mod oracle;

pub use analytic::{spectral_report, EigenCluster, EigenFamily, FamilyLabel, SpectralReport};
pub use basis::{Determinant, WedgeVector};
pub use error::{Error, Result};
pub use geminal::{canonicalize, CanonicalGeminal, GeminalMatrix};
pub use kernel::{block_dimensions, kernel_decomposition, BlockDimensions, BlockSignature, KernelDecomposition};
pub use operator::{assemble_wedge, HermitianOperatorMatrix};
pub mod verify;
