//! Two-particle antisymmetric functions and their canonical pair expansion
//! `g² = Σ ξₖ |2k−1, 2k⟩` over natural orbitals.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{Determinant, WedgeVector, MAX_ORBITALS};
use crate::eigen::{jacobi_eigh, max_abs_deviation_from_identity};
use crate::error::{Error, Result};

/// Tolerance for antisymmetry, normalization and unitarity checks on input.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Relative singular-value cutoff below which a pair is treated as absent.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative gap below which eigenvalues of `G·G†` share one eigenspace.
const CLUSTER_GAP: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficient matrix of g²: the amplitude on `|i,j⟩` (i < j) is `G[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeminalMatrix {
    matrix: DMatrix<Complex64>,
}

impl GeminalMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        if n > MAX_ORBITALS {
            return Err(Error::DimensionTooLarge {
                n,
                max: MAX_ORBITALS,
            });
        }
        let mut max_deviation = 0.0f64;
        for i in 0..n {
            for j in i..n {
                max_deviation = max_deviation.max((matrix[(i, j)] + matrix[(j, i)]).norm());
            }
        }
        if max_deviation > VALIDATION_TOL {
            return Err(Error::AntisymmetryViolated { max_deviation });
        }
        let g = Self { matrix };
        let norm_sqr = g.norm_sqr();
        if (norm_sqr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NormalizationViolated { norm_sqr });
        }
        Ok(g)
    }

    pub fn from_wedge(v: &WedgeVector) -> Result<Self> {
        if v.k() != 2 {
            return Err(Error::InvalidSector { n: v.n(), k: v.k() });
        }
        let n = v.n();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (det, c) in v.terms() {
            let orbs: Vec<usize> = det.orbitals().collect();
            let (i, j) = (orbs[0] - 1, orbs[1] - 1);
            m[(i, j)] = c;
            m[(j, i)] = -c;
        }
        Self::new(m)
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `Σ_{i<j} |G_ij|²`
    pub fn norm_sqr(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                acc += self.matrix[(i, j)].norm_sqr();
            }
        }
        acc
    }

    pub fn to_wedge(&self) -> WedgeVector {
        let n = self.n();
        let terms = Determinant::all(n, 2).expect("validated dimension").map(|d| {
            let orbs: Vec<usize> = d.orbitals().collect();
            (d, self.matrix[(orbs[0] - 1, orbs[1] - 1)])
        });
        WedgeVector::from_terms(n, 2, terms).expect("sector matches")
    }
}

/// Pair amplitudes `ξ₁…ξ_s` together with the natural orbitals.
///
/// Columns of `orbitals` are the natural orbitals expressed in the input
/// basis; column `2k−2`/`2k−1` (0-based) carry pair `k`, the remaining
/// `n − 2s` columns span the complement. Amplitudes may be complex so the
/// conjugate-bearing formulas can be exercised; [`canonicalize`] always
/// produces real positive values sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGeminal {
    n: usize,
    xi: Vec<Complex64>,
    orbitals: DMatrix<Complex64>,
}

impl CanonicalGeminal {
    /// Amplitudes in the natural-orbital basis itself (identity orbitals).
    pub fn from_pairs(n: usize, xi: Vec<Complex64>) -> Result<Self> {
        Self::with_orbitals(n, xi, DMatrix::identity(n, n))
    }

    pub fn from_real_pairs(n: usize, xi: &[f64]) -> Result<Self> {
        Self::from_pairs(n, xi.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn with_orbitals(n: usize, xi: Vec<Complex64>, orbitals: DMatrix<Complex64>) -> Result<Self> {
        if n > MAX_ORBITALS {
            return Err(Error::DimensionTooLarge {
                n,
                max: MAX_ORBITALS,
            });
        }
        if xi.is_empty() {
            return Err(Error::InvalidPairs("at least one pair is required".into()));
        }
        if 2 * xi.len() > n {
            return Err(Error::InvalidPairs(format!(
                "{} pairs need 2s = {} orbitals but n = {n}",
                xi.len(),
                2 * xi.len()
            )));
        }
        if let Some(k) = xi.iter().position(|x| x.norm() == 0.0 || !x.norm().is_finite()) {
            return Err(Error::InvalidPairs(format!("xi_{} must be nonzero and finite", k + 1)));
        }
        let norm_sqr: f64 = xi.iter().map(|x| x.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NormalizationViolated { norm_sqr });
        }
        if orbitals.nrows() != n || orbitals.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: orbitals.nrows(),
            });
        }
        let defect = max_abs_deviation_from_identity(&(orbitals.adjoint() * &orbitals));
        if defect > VALIDATION_TOL {
            return Err(Error::InvalidPairs(format!(
                "orbital matrix is not unitary (max |U†U - I| = {defect:.3e})"
            )));
        }
        Ok(Self { n, xi, orbitals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pairs `s`.
    pub fn pair_count(&self) -> usize {
        self.xi.len()
    }

    /// One-particle rank `r = 2s`.
    pub fn one_rank(&self) -> usize {
        2 * self.xi.len()
    }

    pub fn xi(&self) -> &[Complex64] {
        &self.xi
    }

    /// `ξ_k` for 1-based `k`.
    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.xi[k - 1]
    }

    pub fn orbitals(&self) -> &DMatrix<Complex64> {
        &self.orbitals
    }

    /// `g² = Σ ξₖ |2k−1, 2k⟩` in the natural-orbital basis.
    pub fn reconstruct(&self) -> WedgeVector {
        let terms = self.xi.iter().enumerate().map(|(i, &x)| {
            let det = Determinant::new(self.n, &[2 * i + 1, 2 * i + 2]).expect("pair orbitals in range");
            (det, x)
        });
        WedgeVector::from_terms(self.n, 2, terms).expect("sector matches")
    }

    /// Block-diagonal coefficient matrix in the natural-orbital basis.
    pub fn natural_matrix(&self) -> DMatrix<Complex64> {
        let mut b = DMatrix::from_element(self.n, self.n, ZERO);
        for (i, &x) in self.xi.iter().enumerate() {
            b[(2 * i, 2 * i + 1)] = x;
            b[(2 * i + 1, 2 * i)] = -x;
        }
        b
    }

    pub fn natural_geminal(&self) -> GeminalMatrix {
        GeminalMatrix::new(self.natural_matrix()).expect("canonical data is normalized")
    }

    /// The geminal in the input basis: `G = U·B·Uᵀ`.
    pub fn input_geminal(&self) -> Result<GeminalMatrix> {
        let u = &self.orbitals;
        GeminalMatrix::new(u * self.natural_matrix() * u.transpose())
    }

    /// Real positive amplitudes in descending order.
    ///
    /// Phases move into the odd orbital of each pair, pairs are stably sorted
    /// by `|ξ|`, and pairs with `|ξ| < tol·max|ξ|` are dropped (their orbitals
    /// join the complement). Exact apart from the phase multiplication.
    pub fn gauge_fixed(&self, tol: f64) -> Result<Self> {
        let max = self.xi.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..self.xi.len()).collect();
        order.sort_by(|&a, &b| self.xi[b].norm().total_cmp(&self.xi[a].norm()));
        let (kept, dropped): (Vec<usize>, Vec<usize>) =
            order.into_iter().partition(|&k| self.xi[k].norm() >= tol * max);

        let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(self.n);
        let mut xi = Vec::with_capacity(kept.len());
        for &k in &kept {
            let x = self.xi[k];
            let phase = x / x.norm();
            columns.push(self.orbitals.column(2 * k) * phase);
            columns.push(self.orbitals.column(2 * k + 1).into_owned());
            xi.push(Complex64::new(x.norm(), 0.0));
        }
        for &k in &dropped {
            columns.push(self.orbitals.column(2 * k).into_owned());
            columns.push(self.orbitals.column(2 * k + 1).into_owned());
        }
        for j in 2 * self.xi.len()..self.n {
            columns.push(self.orbitals.column(j).into_owned());
        }
        if !dropped.is_empty() {
            let norm = xi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            xi.iter_mut().for_each(|x| *x /= norm);
        }
        Self::with_orbitals(self.n, xi, DMatrix::from_columns(&columns))
    }

    pub fn is_gauge_fixed(&self) -> bool {
        self.xi.iter().all(|x| x.im == 0.0 && x.re > 0.0)
            && self.xi.windows(2).all(|w| w[0].re >= w[1].re)
    }
}

/// Computes the canonical pair expansion of `g`.
///
/// The Hermitian matrix `G·G†` has eigenvalues `ξₖ²`, each twice. Inside every
/// eigenspace a unit vector `φ` is chosen by pivoting on the standard basis,
/// and its partner is `conj(G†φ)/ξ`, which puts the pair into the form
/// `[[0, ξ], [−ξ, 0]]`. The complement is completed the same way.
pub fn canonicalize(g: &GeminalMatrix, tol: f64) -> Result<CanonicalGeminal> {
    let n = g.n();
    let gm = g.matrix();
    let gram = gm * gm.adjoint();
    let eig = jacobi_eigh(&gram, 1e-10)?;
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::Canonicalization("zero geminal".into()));
    }
    // Eigenvalues of G·G† carry absolute noise of order n·ε·λ_max, so pairs
    // below roughly 1e−7·ξ_max cannot be told apart from zero.
    let cutoff = lambda_max * (tol * tol).max(100.0 * n as f64 * f64::EPSILON);

    // Eigenspaces above the cutoff, largest eigenvalue first.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in (0..n).rev() {
        let value = eig.values[idx];
        if value < cutoff {
            break;
        }
        match clusters.last_mut() {
            Some(cluster)
                if eig.values[*cluster.last().unwrap()] - value <= CLUSTER_GAP * lambda_max =>
            {
                cluster.push(idx)
            }
            _ => clusters.push(vec![idx]),
        }
    }

    let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut xi: Vec<Complex64> = Vec::new();
    for cluster in &clusters {
        if cluster.len() % 2 != 0 {
            return Err(Error::Canonicalization(format!(
                "eigenspace of G·G† at {:.6e} has odd dimension {}",
                eig.values[cluster[0]],
                cluster.len()
            )));
        }
        let q = DMatrix::from_columns(&cluster.iter().map(|&i| eig.vectors.column(i)).collect::<Vec<_>>());
        let mut remaining = &q * q.adjoint();
        for _ in 0..cluster.len() / 2 {
            let first = pivot_column(&remaining, &chosen)
                .ok_or_else(|| Error::Canonicalization("eigenspace exhausted".into()))?;
            let mut partner = (gm.adjoint() * &first).map(|z| z.conj());
            partner = orthogonalize(partner, chosen.iter().chain(std::iter::once(&first)));
            let partner_norm = partner.norm();
            if partner_norm == 0.0 {
                return Err(Error::Canonicalization("vanishing pair partner".into()));
            }
            partner /= Complex64::new(partner_norm, 0.0);
            let coupling = first.adjoint() * gm * partner.map(|z| z.conj());
            let c = coupling[(0, 0)];
            let phase = c / c.norm();
            partner *= phase;
            xi.push(Complex64::new(c.norm(), 0.0));
            remaining -= &first * first.adjoint() + &partner * partner.adjoint();
            chosen.push(first);
            chosen.push(partner);
        }
    }

    let mut remaining = DMatrix::<Complex64>::identity(n, n);
    for v in &chosen {
        remaining -= v * v.adjoint();
    }
    while chosen.len() < n {
        let v = pivot_column(&remaining, &chosen)
            .ok_or_else(|| Error::Canonicalization("complement exhausted".into()))?;
        remaining -= &v * v.adjoint();
        chosen.push(v);
    }

    if xi.is_empty() {
        return Err(Error::Canonicalization("no pair above the rank cutoff".into()));
    }
    let norm = xi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (norm * norm - 1.0).abs() > VALIDATION_TOL {
        // Truncated pairs carried weight beyond rounding; renormalize the rest.
        xi.iter_mut().for_each(|x| *x /= norm);
    }
    CanonicalGeminal::with_orbitals(n, xi, DMatrix::from_columns(&chosen))
}

/// Largest column of `projector` (lowest index on ties), re-orthogonalized
/// against `chosen` and normalized.
fn pivot_column(projector: &DMatrix<Complex64>, chosen: &[DVector<Complex64>]) -> Option<DVector<Complex64>> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..projector.ncols() {
        let norm = projector.column(j).norm();
        if best.is_none_or(|(_, b)| norm > b + 1e-12) {
            best = Some((j, norm));
        }
    }
    let (j, norm) = best?;
    // A rank-d projector on n dims has a column of norm at least sqrt(d/n) >= 1/8.
    if norm < 0.05 {
        return None;
    }
    let v = orthogonalize(projector.column(j).into_owned(), chosen.iter());
    let norm = v.norm();
    // The pivot entry of a projector column is real and positive; keep that gauge.
    let phase = if v[j].norm() > 0.0 { v[j].conj() / v[j].norm() } else { Complex64::new(1.0, 0.0) };
    Some(v * (phase / norm))
}

/// Two rounds of classical Gram–Schmidt against unit vectors.
fn orthogonalize<'a>(
    mut v: DVector<Complex64>,
    basis: impl Iterator<Item = &'a DVector<Complex64>> + Clone,
) -> DVector<Complex64> {
    for _ in 0..2 {
        for b in basis.clone() {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let x = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        x.qr().q()
    }

    fn block_form_error(canon: &CanonicalGeminal, g: &GeminalMatrix) -> f64 {
        let u = canon.orbitals();
        let b = u.adjoint() * g.matrix() * u.map(|z| z.conj());
        (b - canon.natural_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn canonical_input_is_a_fixed_point() {
        let xi = [0.75f64.sqrt(), 0.25f64.sqrt()];
        let canon0 = CanonicalGeminal::from_real_pairs(5, &xi).unwrap();
        let g = canon0.natural_geminal();
        let canon = canonicalize(&g, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(canon.pair_count(), 2);
        for (a, b) in canon.xi().iter().zip(xi) {
            assert!((a - c(b)).norm() < 1e-14);
        }
        // Identity up to per-pair phase.
        let u = canon.orbitals();
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)].norm() - expected).abs() < 1e-14, "U[{i},{j}]");
            }
        }
        assert!(block_form_error(&canon, &g) < 1e-14);
    }

    #[test]
    fn single_determinant_has_one_pair() {
        let det = Determinant::new(4, &[1, 2]).unwrap();
        let g = GeminalMatrix::from_wedge(&WedgeVector::from_determinant(det)).unwrap();
        let canon = canonicalize(&g, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(canon.pair_count(), 1);
        assert!((canon.xi()[0] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn rotated_geminal_recovers_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xi = [0.6f64.sqrt(), 0.3f64.sqrt(), 0.1f64.sqrt()];
        let base = CanonicalGeminal::from_real_pairs(7, &xi).unwrap();
        let v = random_unitary(7, &mut rng);
        let rotated = CanonicalGeminal::with_orbitals(7, base.xi().to_vec(), v).unwrap();
        let g = rotated.input_geminal().unwrap();
        let canon = canonicalize(&g, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(canon.pair_count(), 3);
        for (a, b) in canon.xi().iter().zip(xi) {
            assert!((a - c(b)).norm() < 1e-10);
        }
        assert!(block_form_error(&canon, &g) < 1e-12);
        let back = canon.input_geminal().unwrap();
        assert!((back.matrix() - g.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn degenerate_pairs_are_split_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = [0.5f64.sqrt(), 0.5f64.sqrt()];
        let base = CanonicalGeminal::from_real_pairs(6, &xi).unwrap();
        let rotated =
            CanonicalGeminal::with_orbitals(6, base.xi().to_vec(), random_unitary(6, &mut rng)).unwrap();
        let g = rotated.input_geminal().unwrap();
        let canon = canonicalize(&g, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(canon.pair_count(), 2);
        assert!(canon.xi().iter().all(|x| (x - c(0.5f64.sqrt())).norm() < 1e-12));
        assert!(block_form_error(&canon, &g) < 1e-12);
    }

    #[test]
    fn reconstruct_examples() {
        let one = CanonicalGeminal::from_real_pairs(3, &[1.0]).unwrap();
        let v = one.reconstruct();
        assert_eq!(v.amplitude(&Determinant::new(3, &[1, 2]).unwrap()), c(1.0));
        assert_eq!(v.norm(), 1.0);

        let h = 0.5f64.sqrt();
        let two = CanonicalGeminal::from_real_pairs(4, &[h, h]).unwrap();
        let v = two.reconstruct();
        assert_eq!(v.amplitude(&Determinant::new(4, &[1, 2]).unwrap()), c(h));
        assert_eq!(v.amplitude(&Determinant::new(4, &[3, 4]).unwrap()), c(h));
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauge_fixing_absorbs_phases_and_sorts() {
        let xi = vec![
            Complex64::from_polar(0.25f64.sqrt(), 0.3),
            Complex64::from_polar(0.75f64.sqrt(), -1.1),
        ];
        let raw = CanonicalGeminal::from_pairs(5, xi).unwrap();
        let fixed = raw.gauge_fixed(DEFAULT_RANK_TOL).unwrap();
        assert!(fixed.is_gauge_fixed());
        assert!((fixed.xi()[0].re - 0.75f64.sqrt()).abs() < 1e-15);
        let a = raw.input_geminal().unwrap();
        let b = fixed.input_geminal().unwrap();
        assert!((a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
        assert_eq!(fixed.gauge_fixed(DEFAULT_RANK_TOL).unwrap(), fixed);
    }

    #[test]
    fn validation_errors() {
        let mut m = DMatrix::from_element(3, 3, ZERO);
        m[(0, 1)] = c(1.0);
        m[(1, 0)] = c(1.0);
        assert!(matches!(
            GeminalMatrix::new(m.clone()),
            Err(Error::AntisymmetryViolated { .. })
        ));
        let err = GeminalMatrix::new(m).unwrap_err().to_string();
        assert!(err.contains("antisymmetry violated"));

        let mut m = DMatrix::from_element(3, 3, ZERO);
        m[(0, 1)] = c(0.5);
        m[(1, 0)] = c(-0.5);
        assert!(matches!(
            GeminalMatrix::new(m),
            Err(Error::NormalizationViolated { .. })
        ));

        assert!(CanonicalGeminal::from_real_pairs(3, &[0.5f64.sqrt(), 0.5f64.sqrt()]).is_err());
        assert!(CanonicalGeminal::from_real_pairs(4, &[1.0, 0.0]).is_err());
        assert!(CanonicalGeminal::from_real_pairs(4, &[]).is_err());
    }
}
