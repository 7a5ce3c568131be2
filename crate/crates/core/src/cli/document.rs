//! JSON documents: geminal input/output and the report schema.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::WedgeVector;
use crate::error::{Error, Result};
use crate::geminal::{canonicalize, CanonicalGeminal, GeminalMatrix};
use crate::kernel::BlockDimensions;
use crate::oracle::ComparisonReport;
use crate::verify::{CaseVerdict, Tolerances};

pub const SCHEMA: &str = "fermion-wedge/1";

/// A number in a document: plain real or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    /// Real when the imaginary part is exactly zero.
    pub fn compact(z: Complex64) -> Self {
        if z.im == 0.0 {
            Scalar::Real(z.re)
        } else {
            Scalar::Complex([z.re, z.im])
        }
    }

    pub fn pair(z: Complex64) -> Self {
        Scalar::Complex([z.re, z.im])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalData {
    pub xi: Vec<Scalar>,
    /// Natural orbitals as columns, row-major; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<Vec<Scalar>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeminalDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalData>,
    /// Row-major coefficient matrix `G`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Scalar>>>,
}

/// A validated document.
#[derive(Clone, Debug, PartialEq)]
pub enum GeminalInput {
    Canonical(CanonicalGeminal),
    Matrix(GeminalMatrix),
}

impl GeminalInput {
    /// Canonical data for the analysis commands; matrices are canonicalized
    /// and gauge fixed, canonical input is used as given.
    pub fn resolve(&self, tol: f64) -> Result<CanonicalGeminal> {
        match self {
            GeminalInput::Canonical(c) => Ok(c.clone()),
            GeminalInput::Matrix(g) => canonicalize(g, tol)?.gauge_fixed(tol),
        }
    }
}

fn matrix_from_rows(n: usize, rows: &[Vec<Scalar>], what: &str) -> Result<DMatrix<Complex64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Document(format!("{what} must be {n}×{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

fn rows_from_matrix(m: &DMatrix<Complex64>) -> Vec<Vec<Scalar>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Scalar::pair(m[(i, j)])).collect())
        .collect()
}

impl GeminalDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn validate(&self) -> Result<GeminalInput> {
        if let Some(schema) = &self.schema {
            if schema != SCHEMA {
                return Err(Error::Document(format!("unsupported schema {schema:?}, expected {SCHEMA:?}")));
            }
        }
        match (&self.canonical, &self.matrix) {
            (Some(_), Some(_)) => Err(Error::Document(
                "exactly one of \"canonical\" and \"matrix\" may be given".into(),
            )),
            (None, None) => Err(Error::Document("one of \"canonical\" or \"matrix\" is required".into())),
            (Some(c), None) => {
                let xi = c.xi.iter().map(|x| x.value()).collect();
                let orbitals = match &c.orbitals {
                    Some(rows) => matrix_from_rows(self.n, rows, "orbitals")?,
                    None => DMatrix::identity(self.n, self.n),
                };
                Ok(GeminalInput::Canonical(CanonicalGeminal::with_orbitals(self.n, xi, orbitals)?))
            }
            (None, Some(rows)) => Ok(GeminalInput::Matrix(GeminalMatrix::new(matrix_from_rows(
                self.n, rows, "matrix",
            )?)?)),
        }
    }

    /// Orbitals are written unless they are exactly the identity.
    pub fn from_canonical(c: &CanonicalGeminal) -> Self {
        let identity = DMatrix::<Complex64>::identity(c.n(), c.n());
        Self {
            schema: Some(SCHEMA.to_string()),
            n: c.n(),
            canonical: Some(CanonicalData {
                xi: c.xi().iter().map(|&x| Scalar::compact(x)).collect(),
                orbitals: (c.orbitals() != &identity).then(|| rows_from_matrix(c.orbitals())),
            }),
            matrix: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub determinant: String,
    pub re: f64,
    pub im: f64,
}

pub fn terms(v: &WedgeVector) -> Vec<Term> {
    v.terms()
        .map(|(d, z)| Term {
            determinant: d.to_string(),
            re: z.re,
            im: z.im,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalEcho {
    pub n: usize,
    pub s: usize,
    pub xi: Vec<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<Vec<Scalar>>>,
}

impl CanonicalEcho {
    pub fn new(c: &CanonicalGeminal, with_orbitals: bool) -> Self {
        Self {
            n: c.n(),
            s: c.pair_count(),
            xi: c.xi().iter().map(|&x| Scalar::compact(x)).collect(),
            orbitals: with_orbitals.then(|| rows_from_matrix(c.orbitals())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterEntry {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyEntry {
    pub label: String,
    pub eigenvalue: f64,
    pub amplitudes: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSection {
    pub clusters: Vec<ClusterEntry>,
    pub kernel_dim: usize,
    pub folded_pairs: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<FamilyEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisEntry {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Term>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockEntry {
    pub signature: String,
    pub dimension: usize,
    /// Closed-form count; the raw `(3,0)` value is negative for a single pair.
    pub closed_form: i64,
    pub basis: Vec<BasisEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSection {
    pub blocks: Vec<BlockEntry>,
    pub folded: Vec<BasisEntry>,
    pub dimension: usize,
    /// `C(n,3) − n`
    pub generic_dimension: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub command: &'static str,
    pub input: serde_json::Value,
    pub canonical: CanonicalEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyDocument {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<serde_json::Value>,
    pub tolerances: Tolerances,
    pub total_cases: usize,
    pub passed_cases: usize,
    /// Some case had a pair eigenvalue folded into the kernel.
    pub degenerate: bool,
    pub passed: bool,
    pub cases: Vec<CaseVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimsRow {
    pub n: usize,
    pub s: usize,
    pub d03: i64,
    pub d12: i64,
    pub d21: i64,
    pub d30: i64,
    pub total: i64,
    pub expected: i64,
    pub folded: bool,
    pub holds: bool,
}

impl From<&BlockDimensions> for DimsRow {
    fn from(d: &BlockDimensions) -> Self {
        let (total, expected) = if d.folded_pair() {
            (d.realized_total(), d.kernel_dimension())
        } else {
            (d.total, d.expected)
        };
        Self {
            n: d.n,
            s: d.s,
            d03: d.d03,
            d12: d.d12,
            d21: d.d21,
            d30: d.d30,
            total,
            expected,
            folded: d.folded_pair(),
            holds: total == expected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimsDocument {
    pub schema: &'static str,
    pub command: &'static str,
    pub rows: Vec<DimsRow>,
    pub passed: bool,
}
