//! The operator `3P²_g∧I¹` on H^∧3, assembled in the natural-orbital
//! determinant basis as `Σ_p |g²∧φ_p⟩⟨g²∧φ_p|`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{exterior_power, sector_dim, WedgeVector};
use crate::eigen::hermiticity_error;
use crate::error::{Error, Result};
use crate::geminal::CanonicalGeminal;

/// Hermiticity tolerance for matrices accepted as operators on H^∧3.
pub const HERMITICITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense Hermitian matrix on the C(n,3)-dimensional sector H^∧3.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperatorMatrix {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl HermitianOperatorMatrix {
    pub fn from_matrix(n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = sector_dim(n, 3);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let defect = hermiticity_error(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                max_deviation: defect,
            });
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn apply(&self, v: &WedgeVector) -> Result<WedgeVector> {
        if v.n() != self.n || v.k() != 3 {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        let out = &self.matrix * v.to_dvector();
        WedgeVector::from_dvector(self.n, 3, &out)
    }

    /// Re-expresses the operator in the basis in which `orbitals` (columns =
    /// natural orbitals) are given: `L·M·L†` with `L = Λ³U`.
    pub fn to_input_basis(&self, orbitals: &DMatrix<Complex64>) -> Result<Self> {
        if orbitals.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: orbitals.nrows(),
            });
        }
        let l = exterior_power(orbitals, 3)?;
        let m = &l * &self.matrix * l.adjoint();
        Ok(Self {
            n: self.n,
            matrix: symmetrize(m),
        })
    }
}

pub(crate) fn symmetrize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `Σ |v⟩⟨v|` accumulated in slice order.
pub fn outer_sum<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a WedgeVector>) -> DMatrix<Complex64> {
    let mut acc = DMatrix::from_element(dim, dim, ZERO);
    for v in vectors {
        accumulate_outer(&mut acc, v, 1.0);
    }
    acc
}

pub(crate) fn accumulate_outer(acc: &mut DMatrix<Complex64>, v: &WedgeVector, weight: f64) {
    let nz: Vec<(usize, Complex64)> = v
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != ZERO)
        .map(|(i, z)| (i, *z))
        .collect();
    for &(i, a) in &nz {
        for &(j, b) in &nz {
            acc[(i, j)] += a * b.conj() * weight;
        }
    }
}

/// Builds `3P²_g∧I¹` from the wedge lifts `g²∧φ_p`, p = 1..n.
///
/// Pair orbitals (k ascending) come first and the complement (l ascending)
/// after, so the accumulation order is fixed and results are reproducible.
pub fn assemble_wedge(c: &CanonicalGeminal) -> Result<HermitianOperatorMatrix> {
    let n = c.n();
    if n < 3 {
        return Err(Error::SectorTooSmall(n));
    }
    let g = c.reconstruct();
    let mut m = DMatrix::from_element(sector_dim(n, 3), sector_dim(n, 3), ZERO);
    for p in 1..=n {
        let lifted = g.lift(p)?;
        accumulate_outer(&mut m, &lifted, 1.0);
    }
    Ok(HermitianOperatorMatrix {
        n,
        matrix: symmetrize(m),
    })
}
