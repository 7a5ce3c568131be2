//! Independent ground truth: the operator built on the full tensor space
//! H¹⊗H¹⊗H¹ as `A³ Σ_{i<j} P²_g(i,j) A³`, dense eigendecomposition, and the
//! comparison against the closed-form spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::analytic::{cluster_values, SpectralReport};
use crate::basis::{sector_dim, Determinant};
use crate::eigen::{hermiticity_error, jacobi_eigh, EigenSolution};
use crate::error::{Error, Result};
use crate::geminal::{canonicalize, CanonicalGeminal, GeminalMatrix, DEFAULT_RANK_TOL};
use crate::operator::{symmetrize, HermitianOperatorMatrix, HERMITICITY_TOL};

/// Largest orbital count for which the n³-dimensional tensor route is built.
pub const MAX_TENSOR_ORBITALS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The six permutations of three slots with their signs.
const PERMUTATIONS: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([1, 0, 2], -1.0),
    ([0, 2, 1], -1.0),
    ([2, 1, 0], -1.0),
];

/// Operator on the full 3-fold tensor space, index `(a,b,c) ↦ a·n² + b·n + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl TensorOperator {
    /// `Σ_{i<j} P²_g(i,j)`: the projector onto g² on each pair of slots,
    /// identity on the third.
    pub fn pair_projector_sum(g: &GeminalMatrix) -> Result<Self> {
        let n = g.n();
        check_size(n)?;
        // Tensor components of the unit-norm two-particle state.
        let gt = g.matrix() / Complex64::new(2f64.sqrt(), 0.0);
        let dim = n * n * n;
        let mut t = DMatrix::from_element(dim, dim, ZERO);
        let idx = |s: [usize; 3]| s[0] * n * n + s[1] * n + s[2];
        // Slot pairs (0,1), (0,2), (1,2) with the spectator slot last.
        for (i, j, spectator) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            for x in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let gab = gt[(a, b)];
                        if gab == ZERO {
                            continue;
                        }
                        for a2 in 0..n {
                            for b2 in 0..n {
                                let gcd = gt[(a2, b2)];
                                if gcd == ZERO {
                                    continue;
                                }
                                let mut row = [0; 3];
                                let mut col = [0; 3];
                                row[i] = a;
                                row[j] = b;
                                row[spectator] = x;
                                col[i] = a2;
                                col[j] = b2;
                                col[spectator] = x;
                                t[(idx(row), idx(col))] += gab * gcd.conj();
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { n, matrix: t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `A³·T·A³`, with `A³` applied as signed slot permutations.
    pub fn antisymmetrized(&self) -> Self {
        let n = self.n;
        let dim = n * n * n;
        let perm_index: Vec<[usize; 6]> = (0..dim).map(|i| permuted_indices(n, i)).collect();
        // Left factor: rows.
        let mut left = DMatrix::from_element(dim, dim, ZERO);
        for col in 0..dim {
            for row in 0..dim {
                let mut acc = ZERO;
                for (p, &(_, sign)) in PERMUTATIONS.iter().enumerate() {
                    acc += self.matrix[(perm_index[row][p], col)] * sign;
                }
                left[(row, col)] = acc / 6.0;
            }
        }
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for col in 0..dim {
            for (p, &(_, sign)) in PERMUTATIONS.iter().enumerate() {
                let src = perm_index[col][p];
                for row in 0..dim {
                    out[(row, col)] += left[(row, src)] * (sign / 6.0);
                }
            }
        }
        Self { n, matrix: out }
    }

    /// `V†·T·V` where column `D` of `V` is the normalized antisymmetrized
    /// product `(1/√6) Σ_σ sgn(σ) e_σ(D)`.
    pub fn compress(&self) -> Result<HermitianOperatorMatrix> {
        let n = self.n;
        if n < 3 {
            return Err(Error::SectorTooSmall(n));
        }
        let dets: Vec<[usize; 3]> = Determinant::all(n, 3)?
            .map(|d| {
                let o: Vec<usize> = d.orbitals().map(|p| p - 1).collect();
                [o[0], o[1], o[2]]
            })
            .collect();
        let columns: Vec<[(usize, f64); 6]> = dets
            .iter()
            .map(|d| {
                PERMUTATIONS.map(|(perm, sign)| {
                    (d[perm[0]] * n * n + d[perm[1]] * n + d[perm[2]], sign / 6f64.sqrt())
                })
            })
            .collect();
        let dim = dets.len();
        let m = DMatrix::from_fn(dim, dim, |r, c| {
            let mut acc = ZERO;
            for &(i, si) in &columns[r] {
                for &(j, sj) in &columns[c] {
                    acc += self.matrix[(i, j)] * (si * sj);
                }
            }
            acc
        });
        HermitianOperatorMatrix::from_matrix(n, symmetrize(m))
    }
}

fn check_size(n: usize) -> Result<()> {
    if !(3..=MAX_TENSOR_ORBITALS).contains(&n) {
        return Err(Error::OutOfRange {
            n,
            min: 3,
            max: MAX_TENSOR_ORBITALS,
        });
    }
    Ok(())
}

/// Flat indices of the six slot permutations of tensor index `i`.
fn permuted_indices(n: usize, i: usize) -> [usize; 6] {
    let slots = [i / (n * n), (i / n) % n, i % n];
    PERMUTATIONS.map(|(perm, _)| slots[perm[0]] * n * n + slots[perm[1]] * n + slots[perm[2]])
}

/// Dense `A³ = (1/3!) Σ_σ sgn(σ)·σ` on the n³-dimensional tensor space.
pub fn antisymmetrizer(n: usize) -> Result<DMatrix<Complex64>> {
    check_size(n)?;
    let dim = n * n * n;
    let mut a = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        for (p, &(_, sign)) in PERMUTATIONS.iter().enumerate() {
            a[(permuted_indices(n, col)[p], col)] += Complex64::new(sign / 6.0, 0.0);
        }
    }
    Ok(a)
}

/// The operator on H^∧3 from its first-principles tensor definition.
pub fn assemble_tensor(g: &GeminalMatrix) -> Result<HermitianOperatorMatrix> {
    TensorOperator::pair_projector_sum(g)?.antisymmetrized().compress()
}

/// Dense eigendecomposition, ascending.
pub fn eig_hermitian(m: &HermitianOperatorMatrix) -> Result<EigenSolution> {
    jacobi_eigh(m.matrix(), HERMITICITY_TOL)
}

/// `argmin_c ‖a − c·b‖_F`, restricted to real `c`.
pub fn best_fit_scalar(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (y.conj() * x).re).sum();
    let den = b.norm_squared();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Largest entrywise `|a − b|`.
pub fn max_entry_deviation(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonTolerances {
    pub eigenvalue: f64,
    pub projector: f64,
}

impl Default for ComparisonTolerances {
    fn default() -> Self {
        Self {
            eigenvalue: 1e-10,
            projector: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterComparison {
    pub value: f64,
    pub multiplicity: usize,
    /// Numeric eigenvalues clustered at this value, or `None` when none lies within tolerance.
    pub numeric_multiplicity: Option<usize>,
    pub eigenvalue_deviation: f64,
    pub projector_distance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub clusters: Vec<ClusterComparison>,
    pub max_eigenvalue_deviation: f64,
    pub max_projector_distance: f64,
    /// Numeric eigenvalues with `|λ| < eigenvalue tolerance`.
    pub numeric_kernel_dim: usize,
    pub passed: bool,
    /// First failing cluster, e.g. `λ=0.2500 ×2: numeric multiplicity 1`.
    pub failure: Option<String>,
}

/// Compares the closed-form spectrum with a dense eigendecomposition.
///
/// Eigenvalues are compared as sorted lists; eigenvectors per cluster through
/// `‖P_analytic − P_numeric‖_F`, since vectors inside a degenerate cluster
/// are gauge dependent. The analytic zero cluster uses `I − Σ P`.
pub fn compare_spectra(
    analytic: &SpectralReport,
    numeric: &EigenSolution,
    tol: ComparisonTolerances,
) -> ComparisonReport {
    let expected = analytic.eigenvalues();
    let dim = sector_dim(analytic.n, 3);
    let numeric_kernel_dim = numeric.values.iter().filter(|v| v.abs() < tol.eigenvalue).count();
    let mut failure: Option<String> = None;
    if expected.len() != numeric.values.len() || numeric.vectors.nrows() != dim {
        return ComparisonReport {
            clusters: Vec::new(),
            max_eigenvalue_deviation: f64::INFINITY,
            max_projector_distance: f64::INFINITY,
            numeric_kernel_dim,
            passed: false,
            failure: Some(format!(
                "sector size: analytic {} vs numeric {}",
                expected.len(),
                numeric.values.len()
            )),
        };
    }
    let max_eigenvalue_deviation = expected
        .iter()
        .zip(&numeric.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let numeric_clusters = cluster_values(&numeric.values, tol.eigenvalue);
    let range = analytic.range_projector();
    let identity = DMatrix::<Complex64>::identity(dim, dim);

    let mut clusters = Vec::new();
    let mut start = 0;
    for cluster in cluster_values(&expected, tol.eigenvalue) {
        let positions = start..start + cluster.multiplicity;
        start = positions.end;
        let numeric_multiplicity = numeric_clusters
            .iter()
            .find(|c| (c.value - cluster.value).abs() <= tol.eigenvalue)
            .map(|c| c.multiplicity);
        let eigenvalue_deviation = positions
            .clone()
            .map(|i| (numeric.values[i] - cluster.value).abs())
            .fold(0.0, f64::max);

        let p_analytic = if cluster.value.abs() <= tol.eigenvalue {
            &identity - &range
        } else {
            let mut p = DMatrix::from_element(dim, dim, ZERO);
            for f in analytic
                .families
                .iter()
                .filter(|f| (f.eigenvalue - cluster.value).abs() <= tol.eigenvalue)
            {
                let v = f.vector.to_dvector();
                p += &v * v.adjoint();
            }
            p
        };
        let block = numeric.vectors.columns(positions.start, positions.len());
        let p_numeric = block * block.adjoint();
        let projector_distance = (p_analytic - p_numeric).norm();

        let passed = numeric_multiplicity == Some(cluster.multiplicity)
            && eigenvalue_deviation <= tol.eigenvalue
            && projector_distance <= tol.projector;
        if !passed && failure.is_none() {
            let reason = match numeric_multiplicity {
                Some(m) if m != cluster.multiplicity => format!("numeric multiplicity {m}"),
                None => "no numeric eigenvalue within tolerance".to_string(),
                _ if eigenvalue_deviation > tol.eigenvalue => {
                    format!("eigenvalue deviation {eigenvalue_deviation:.3e}")
                }
                _ => format!("projector distance {projector_distance:.3e}"),
            };
            failure = Some(format!("λ={:.4} ×{}: {reason}", cluster.value, cluster.multiplicity));
        }
        clusters.push(ClusterComparison {
            value: cluster.value,
            multiplicity: cluster.multiplicity,
            numeric_multiplicity,
            eigenvalue_deviation,
            projector_distance,
            passed,
        });
    }
    if failure.is_none() && numeric_clusters.len() != clusters.len() {
        failure = Some(format!(
            "{} numeric clusters vs {} analytic",
            numeric_clusters.len(),
            clusters.len()
        ));
    }
    let max_projector_distance = clusters.iter().map(|c| c.projector_distance).fold(0.0, f64::max);
    ComparisonReport {
        clusters,
        max_eigenvalue_deviation,
        max_projector_distance,
        numeric_kernel_dim,
        passed: failure.is_none() && max_eigenvalue_deviation <= tol.eigenvalue,
        failure,
    }
}

/// A seeded random geminal with exactly `s` pairs.
///
/// A complex Gaussian antisymmetric matrix is normalized and canonicalized;
/// the `s` largest pairs are kept and renormalized, and the input-basis
/// matrix is rebuilt as `U·B·Uᵀ` on the same orbitals.
pub fn random_geminal<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<CanonicalGeminal> {
    if s == 0 || 2 * s > n {
        return Err(Error::InvalidPairs(format!("cannot place {s} pairs in {n} orbitals")));
    }
    let mut x = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            x[(i, j)] = z;
            x[(j, i)] = -z;
        }
    }
    let norm_sqr: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| x[(i, j)].norm_sqr()).sum();
    x /= Complex64::new(norm_sqr.sqrt(), 0.0);
    let full = canonicalize(&GeminalMatrix::new(x)?, DEFAULT_RANK_TOL)?;
    if full.pair_count() < s {
        return Err(Error::Canonicalization(format!(
            "random draw has only {} pairs, {s} requested",
            full.pair_count()
        )));
    }
    let kept = &full.xi()[..s];
    let norm = kept.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let xi = kept.iter().map(|z| z / norm).collect();
    CanonicalGeminal::with_orbitals(n, xi, full.orbitals().clone())
}

/// Hermiticity defect of a tensor-space operator.
pub fn tensor_hermiticity_error(t: &TensorOperator) -> f64 {
    hermiticity_error(t.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::spectral_report;
    use crate::basis::exterior_power;
    use crate::operator::assemble_wedge;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pairs(n: usize, xi_sqr: &[f64]) -> CanonicalGeminal {
        let xi: Vec<f64> = xi_sqr.iter().map(|x| x.sqrt()).collect();
        CanonicalGeminal::from_real_pairs(n, &xi).unwrap()
    }

    #[test]
    fn single_determinant_entry() {
        let m = assemble_tensor(&pairs(3, &[1.0]).natural_geminal()).unwrap();
        assert_eq!(m.dim(), 1);
        assert!((m.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn antisymmetrizer_is_idempotent() {
        for n in 3..=4 {
            let a = antisymmetrizer(n).unwrap();
            assert!((&a * &a - &a).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
            assert!(((0..a.nrows()).map(|i| a[(i, i)].re).sum::<f64>() - sector_dim(n, 3) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_matches_dense_antisymmetrizer() {
        let c = pairs(4, &[0.6, 0.4]);
        let t = TensorOperator::pair_projector_sum(&c.natural_geminal()).unwrap();
        assert!(tensor_hermiticity_error(&t) < 1e-12);
        let a = antisymmetrizer(4).unwrap();
        let dense = &a * t.matrix() * &a;
        assert!((t.antisymmetrized().matrix() - dense).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn tensor_route_matches_wedge_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, s) in [(4, 2), (5, 2), (6, 3), (7, 2), (8, 3)] {
            let c = random_geminal(n, s, &mut rng).unwrap();
            let wedge = assemble_wedge(&c).unwrap();
            let tensor = assemble_tensor(&c.natural_geminal()).unwrap();
            assert!(max_entry_deviation(tensor.matrix(), wedge.matrix()) < 1e-12, "n={n} s={s}");

            let input = assemble_tensor(&c.input_geminal().unwrap()).unwrap();
            let rotated = wedge.to_input_basis(c.orbitals()).unwrap();
            assert!(max_entry_deviation(input.matrix(), rotated.matrix()) < 1e-12, "n={n} s={s}");
            let l = exterior_power(c.orbitals(), 3).unwrap();
            assert!(max_entry_deviation(&(l.adjoint() * &l), &DMatrix::identity(l.nrows(), l.nrows())) < 1e-12);
        }
    }

    #[test]
    fn tensor_size_limits() {
        let c = pairs(11, &[1.0]);
        assert!(matches!(assemble_tensor(&c.natural_geminal()), Err(Error::OutOfRange { .. })));
        assert!(antisymmetrizer(2).is_err());
    }

    #[test]
    fn eig_examples() {
        let id = HermitianOperatorMatrix::from_matrix(4, DMatrix::identity(4, 4)).unwrap();
        assert!(eig_hermitian(&id).unwrap().values.iter().all(|v| (v - 1.0).abs() < 1e-15));

        let m = assemble_wedge(&pairs(5, &[0.75, 0.25])).unwrap();
        let sol = eig_hermitian(&m).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.75, 0.75, 1.0];
        for (a, b) in sol.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(sol.max_residual(m.matrix()) < 1e-10);
    }

    #[test]
    fn comparison_passes_on_matching_inputs() {
        let c = pairs(7, &[0.5, 0.3, 0.2]);
        let m = assemble_wedge(&c).unwrap();
        let report = spectral_report(&c, 1e-10).unwrap();
        let cmp = compare_spectra(&report, &eig_hermitian(&m).unwrap(), ComparisonTolerances::default());
        assert!(cmp.passed, "{:?}", cmp.failure);
        assert!(cmp.max_eigenvalue_deviation < 1e-10);
        assert!(cmp.max_projector_distance < 1e-8);
        assert_eq!(cmp.numeric_kernel_dim, 35 - 7);
    }

    #[test]
    fn comparison_names_perturbed_cluster() {
        let c = pairs(5, &[0.75, 0.25]);
        let m = assemble_wedge(&c).unwrap();
        let mut report = spectral_report(&c, 1e-10).unwrap();
        report.families[0].eigenvalue += 1e-3;
        let cmp = compare_spectra(&report, &eig_hermitian(&m).unwrap(), ComparisonTolerances::default());
        assert!(!cmp.passed);
        let failure = cmp.failure.unwrap();
        assert!(failure.starts_with("λ=0.2500 ×1: numeric multiplicity 2"), "{failure}");
    }

    #[test]
    fn comparison_on_single_determinant_sector() {
        let c = pairs(3, &[1.0]);
        let m = assemble_wedge(&c).unwrap();
        let report = spectral_report(&c, 1e-10).unwrap();
        let cmp = compare_spectra(&report, &eig_hermitian(&m).unwrap(), ComparisonTolerances::default());
        assert!(cmp.passed, "{:?}", cmp.failure);
        assert_eq!(cmp.clusters.len(), 1);
        assert_eq!((cmp.clusters[0].value, cmp.clusters[0].multiplicity), (1.0, 1));
    }

    #[test]
    fn random_geminal_has_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, s) in [(4, 2), (9, 4), (10, 3)] {
            let c = random_geminal(n, s, &mut rng).unwrap();
            assert_eq!(c.pair_count(), s);
            let g = c.input_geminal().unwrap();
            assert!((g.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(random_geminal(4, 3, &mut rng).is_err());
    }

    #[test]
    fn best_fit_scalar_recovers_factor() {
        let m = assemble_wedge(&pairs(5, &[0.75, 0.25])).unwrap().into_matrix();
        let scaled = &m * Complex64::new(3.0, 0.0);
        assert!((best_fit_scalar(&scaled, &m) - 3.0).abs() < 1e-14);
    }
}
