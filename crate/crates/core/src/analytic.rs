//! Closed-form spectral decomposition of `3P²_g∧I¹`.
//!
//! Nonzero eigenvalues are `1 − |ξₖ|²` (twice, on the pair eigenfunctions
//! `g³_{2k−1}`, `g³_{2k}`) and `1` on each complement eigenfunction `g³_l`,
//! `l > 2s`. Everything else is kernel.
//!
//! A pair with `1 − |ξₖ|²` at or below the fold tolerance (always the case
//! for `s = 1`) contributes no eigenfunction; its span belongs to the kernel.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{sector_dim, Determinant, WedgeVector};
use crate::error::{Error, Result};
use crate::geminal::CanonicalGeminal;
use crate::operator::accumulate_outer;

/// Absolute tolerance for grouping eigenvalues and for folding pairs.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyLabel {
    /// `g³_{2k−1}`
    OddPair { k: usize },
    /// `g³_{2k}`
    EvenPair { k: usize },
    /// `g³_l`, l = 2s+1..n
    Tail { l: usize },
}

impl FamilyLabel {
    /// The orbital wedged onto g²: `2k−1`, `2k` or `l`.
    pub fn orbital(&self) -> usize {
        match *self {
            FamilyLabel::OddPair { k } => 2 * k - 1,
            FamilyLabel::EvenPair { k } => 2 * k,
            FamilyLabel::Tail { l } => l,
        }
    }

    pub fn pair(&self) -> Option<usize> {
        match *self {
            FamilyLabel::OddPair { k } | FamilyLabel::EvenPair { k } => Some(k),
            FamilyLabel::Tail { .. } => None,
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g³_{}", self.orbital())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenFamily {
    pub label: FamilyLabel,
    pub eigenvalue: f64,
    pub vector: WedgeVector,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub n: usize,
    pub s: usize,
    pub families: Vec<EigenFamily>,
    /// Pairs `k` whose eigenvalue `1 − |ξₖ|²` was folded into the kernel.
    pub folded_pairs: Vec<usize>,
    pub kernel_dim: usize,
    /// Nonzero clusters in ascending order, followed by the zero cluster
    /// when the kernel is nontrivial.
    pub clusters: Vec<EigenCluster>,
    /// Largest distance between the determinant-sum and wedge-lift routes.
    pub route_deviation: f64,
}

impl SpectralReport {
    /// All eigenvalues with multiplicity, ascending, kernel included as zeros.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.families.iter().map(|f| f.eigenvalue).collect();
        values.extend(std::iter::repeat_n(0.0, self.kernel_dim));
        values.sort_by(f64::total_cmp);
        values
    }

    /// `Σ λ |g³⟩⟨g³|` over the nonzero families.
    pub fn reconstruct_operator(&self) -> DMatrix<Complex64> {
        let dim = sector_dim(self.n, 3);
        let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for f in &self.families {
            accumulate_outer(&mut acc, &f.vector, f.eigenvalue);
        }
        acc
    }

    /// Projector onto the span of all nonzero-eigenvalue families.
    pub fn range_projector(&self) -> DMatrix<Complex64> {
        let dim = sector_dim(self.n, 3);
        let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for f in &self.families {
            accumulate_outer(&mut acc, &f.vector, 1.0);
        }
        acc
    }

    pub fn has_folded_pairs(&self) -> bool {
        !self.folded_pairs.is_empty()
    }
}

/// `1 − |ξₖ|²` for 1-based `k`.
pub fn pair_eigenvalue(c: &CanonicalGeminal, k: usize) -> f64 {
    1.0 - c.amplitude(k).norm_sqr()
}

/// Pairs whose eigenvalue does not exceed `tol`.
pub fn folded_pairs(c: &CanonicalGeminal, tol: f64) -> Vec<usize> {
    (1..=c.pair_count())
        .filter(|&k| pair_eigenvalue(c, k) <= tol)
        .collect()
}

fn check_sector(c: &CanonicalGeminal) -> Result<()> {
    if c.n() < 3 {
        return Err(Error::SectorTooSmall(c.n()));
    }
    Ok(())
}

/// Eigenfunction from the explicit determinant sum,
/// e.g. `g³_{2k−1} = (1−|ξₖ|²)^{−1/2} Σ_{i≠k} ξᵢ |2i−1, 2i, 2k−1⟩`.
pub fn eigenfunction_by_determinants(c: &CanonicalGeminal, label: FamilyLabel) -> Result<WedgeVector> {
    check_sector(c)?;
    let n = c.n();
    let p = label.orbital();
    let (skip, scale) = match label.pair() {
        Some(k) => (Some(k), pair_eigenvalue(c, k).sqrt().recip()),
        None => (None, 1.0),
    };
    let mut terms = Vec::new();
    for i in 1..=c.pair_count() {
        if Some(i) == skip {
            continue;
        }
        if let Some((det, sign)) = Determinant::from_unordered(n, &[2 * i - 1, 2 * i, p])? {
            terms.push((det, c.amplitude(i) * (f64::from(sign) * scale)));
        }
    }
    WedgeVector::from_terms(n, 3, terms)
}

/// Eigenfunction as a normalized wedge lift of g²: for pairs
/// `√(3/(1−|ξₖ|²))·g²∧φ`, for the complement `√3·g²∧φ_l`. The `√3` is part
/// of the unit-determinant convention of [`WedgeVector::lift`].
pub fn eigenfunction_by_lift(c: &CanonicalGeminal, label: FamilyLabel) -> Result<WedgeVector> {
    check_sector(c)?;
    let lifted = c.reconstruct().lift(label.orbital())?;
    Ok(match label.pair() {
        Some(k) => lifted.scaled(Complex64::new(pair_eigenvalue(c, k).sqrt().recip(), 0.0)),
        None => lifted,
    })
}

/// Labels of the nonzero-eigenvalue families in orbital order.
pub fn family_labels(c: &CanonicalGeminal, fold_tol: f64) -> Vec<FamilyLabel> {
    let folded = folded_pairs(c, fold_tol);
    let mut labels = Vec::with_capacity(c.n());
    for k in 1..=c.pair_count() {
        if !folded.contains(&k) {
            labels.push(FamilyLabel::OddPair { k });
            labels.push(FamilyLabel::EvenPair { k });
        }
    }
    labels.extend((c.one_rank() + 1..=c.n()).map(|l| FamilyLabel::Tail { l }));
    labels
}

pub fn eigenfunctions(c: &CanonicalGeminal, fold_tol: f64) -> Result<Vec<EigenFamily>> {
    family_labels(c, fold_tol)
        .into_iter()
        .map(|label| {
            let eigenvalue = match label.pair() {
                Some(k) => pair_eigenvalue(c, k),
                None => 1.0,
            };
            Ok(EigenFamily {
                label,
                eigenvalue,
                vector: eigenfunction_by_determinants(c, label)?,
            })
        })
        .collect()
}

/// Groups ascending values into runs whose neighbours differ by at most `tol`;
/// each run is reported by its mean and size.
pub fn cluster_values(sorted: &[f64], tol: f64) -> Vec<EigenCluster> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((sum, count, last)) if v - *last <= tol => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter()
        .map(|(sum, count, _)| EigenCluster {
            value: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}

pub fn spectral_report(c: &CanonicalGeminal, tol: f64) -> Result<SpectralReport> {
    let families = eigenfunctions(c, tol)?;
    let mut route_deviation = 0.0f64;
    for f in &families {
        let lifted = eigenfunction_by_lift(c, f.label)?;
        route_deviation = route_deviation.max(lifted.sub(&f.vector)?.norm());
    }
    let mut values: Vec<f64> = families.iter().map(|f| f.eigenvalue).collect();
    values.sort_by(f64::total_cmp);
    let mut clusters = cluster_values(&values, tol);
    let kernel_dim = sector_dim(c.n(), 3) - families.len();
    if kernel_dim > 0 {
        clusters.push(EigenCluster {
            value: 0.0,
            multiplicity: kernel_dim,
        });
    }
    Ok(SpectralReport {
        n: c.n(),
        s: c.pair_count(),
        families,
        folded_pairs: folded_pairs(c, tol),
        kernel_dim,
        clusters,
        route_deviation,
    })
}
