//! Orthonormal basis of the kernel of `3P²_g∧I¹`, split by how many orbitals
//! of each determinant lie in the pair space R¹ (orbitals 1..2s) versus its
//! complement (orbitals 2s+1..n).
//!
//! Block `(a, b)` holds determinants with `a` orbitals in R¹ and `b` in the
//! complement. Projectors are built from the explicit basis vectors.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{folded_pairs, FamilyLabel};
use crate::basis::{binomial, sector_dim, Determinant, WedgeVector};
use crate::error::{Error, Result};
use crate::geminal::CanonicalGeminal;
use crate::operator::{accumulate_outer, symmetrize, HermitianOperatorMatrix};

/// Which of the four orthogonal subspaces of H^∧3 a block lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockSignature {
    /// No orbital in R¹.
    K03,
    /// One orbital in R¹.
    K12,
    /// Two orbitals in R¹.
    K21,
    /// All three orbitals in R¹.
    K30,
}

impl BlockSignature {
    pub const ALL: [BlockSignature; 4] = [Self::K03, Self::K12, Self::K21, Self::K30];

    /// Orbitals in R¹ for determinants of this subspace.
    pub fn pair_space_count(&self) -> usize {
        match self {
            Self::K03 => 0,
            Self::K12 => 1,
            Self::K21 => 2,
            Self::K30 => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::K03 => "(0,3)",
            Self::K12 => "(1,2)",
            Self::K21 => "(2,1)",
            Self::K30 => "(3,0)",
        }
    }
}

impl fmt::Display for BlockSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    Determinant(Determinant),
    /// `f³_{l,m}`: complement orbital `l`, pair index `m`.
    TailMix { l: usize, m: usize },
    /// `f³_{2k−1,m}`
    OddPairMix { k: usize, m: usize },
    /// `f³_{2k,m}`
    EvenPairMix { k: usize, m: usize },
    /// Pair eigenfunction whose eigenvalue `1 − |ξₖ|²` vanished numerically.
    FoldedPair(FamilyLabel),
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelFamily::Determinant(d) => write!(f, "{d}"),
            KernelFamily::TailMix { l, m } => write!(f, "f³_{{{l},{m}}}"),
            KernelFamily::OddPairMix { k, m } => write!(f, "f³_{{{},{m}}}", 2 * k - 1),
            KernelFamily::EvenPairMix { k, m } => write!(f, "f³_{{{},{m}}}", 2 * k),
            KernelFamily::FoldedPair(label) => write!(f, "{label} (folded)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasisFunction {
    pub family: KernelFamily,
    pub vector: WedgeVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelBlock {
    pub signature: BlockSignature,
    pub basis: Vec<KernelBasisFunction>,
    n: usize,
}

impl KernelBlock {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn projector(&self) -> DMatrix<Complex64> {
        projector_of(self.n, &self.basis)
    }
}

fn projector_of(n: usize, basis: &[KernelBasisFunction]) -> DMatrix<Complex64> {
    let dim = sector_dim(n, 3);
    let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for f in basis {
        accumulate_outer(&mut acc, &f.vector, 1.0);
    }
    acc
}

fn pair_of(p: usize) -> usize {
    p.div_ceil(2)
}

fn check_sector(c: &CanonicalGeminal) -> Result<()> {
    if c.n() < 3 {
        return Err(Error::SectorTooSmall(c.n()));
    }
    Ok(())
}

/// Determinants of H^∧3 with `count` orbitals in R¹, filtered by the pair
/// indices of those orbitals, in rank order.
fn determinants_where(
    c: &CanonicalGeminal,
    count: usize,
    keep: impl Fn(&[usize]) -> bool,
) -> Result<Vec<KernelBasisFunction>> {
    let r = c.one_rank();
    Ok(Determinant::all(c.n(), 3)?
        .filter(|d| {
            let inside: Vec<usize> = d.orbitals().filter(|&p| p <= r).map(pair_of).collect();
            inside.len() == count && keep(&inside)
        })
        .map(|d| KernelBasisFunction {
            family: KernelFamily::Determinant(d),
            vector: WedgeVector::from_determinant(d),
        })
        .collect())
}

fn all_distinct(pairs: &[usize]) -> bool {
    pairs.iter().enumerate().all(|(i, a)| !pairs[..i].contains(a))
}

/// The whole complement sector: all `|j₁,j₂,j₃⟩` with `j₁ > 2s`.
pub fn block_k03(c: &CanonicalGeminal) -> Result<KernelBlock> {
    check_sector(c)?;
    Ok(KernelBlock {
        signature: BlockSignature::K03,
        basis: determinants_where(c, 0, |_| true)?,
        n: c.n(),
    })
}

/// All `|i,j₁,j₂⟩` with `i ≤ 2s < j₁ < j₂`.
pub fn block_k12(c: &CanonicalGeminal) -> Result<KernelBlock> {
    check_sector(c)?;
    Ok(KernelBlock {
        signature: BlockSignature::K12,
        basis: determinants_where(c, 1, |_| true)?,
        n: c.n(),
    })
}

/// `1/√(a·b)` after checking both partial sums are positive.
fn normalizer(lower: f64, upper: f64, family: impl Fn() -> String) -> Result<f64> {
    for partial_sum in [lower, upper] {
        if partial_sum.is_nan() || partial_sum <= 0.0 {
            return Err(Error::VanishingNormalizer {
                family: family(),
                partial_sum,
            });
        }
    }
    Ok((lower * upper).sqrt().recip())
}

/// `N (Σ_{i<m, i≠k} ξᵢ ξ̄_m |2i−1,2i,p⟩ − Σ_{i<m, i≠k} |ξᵢ|² |2m−1,2m,p⟩)`
/// with `N = (Σ_{i<m,i≠k}|ξᵢ|²)^{−1/2} (Σ_{i≤m,i≠k}|ξᵢ|²)^{−1/2}`.
/// `k = None` gives the complement family `f³_{p,m}`.
fn mixed_function(
    c: &CanonicalGeminal,
    p: usize,
    m: usize,
    skip: Option<usize>,
    family: KernelFamily,
) -> Result<KernelBasisFunction> {
    let n = c.n();
    let xi_m = c.amplitude(m);
    let lower: f64 = (1..m)
        .filter(|&i| Some(i) != skip)
        .map(|i| c.amplitude(i).norm_sqr())
        .sum();
    let upper = lower + xi_m.norm_sqr();
    let norm = normalizer(lower, upper, || family.to_string())?;

    let mut terms = Vec::with_capacity(m);
    for i in (1..m).filter(|&i| Some(i) != skip) {
        if let Some((det, sign)) = Determinant::from_unordered(n, &[2 * i - 1, 2 * i, p])? {
            terms.push((det, c.amplitude(i) * xi_m.conj() * (norm * f64::from(sign))));
        }
    }
    if let Some((det, sign)) = Determinant::from_unordered(n, &[2 * m - 1, 2 * m, p])? {
        terms.push((det, Complex64::new(-lower * norm * f64::from(sign), 0.0)));
    }
    Ok(KernelBasisFunction {
        family,
        vector: WedgeVector::from_terms(n, 3, terms)?,
    })
}

/// Mixed-pair determinants `|2i₁−?, 2i₂−?, j⟩` (i₁ < i₂, j > 2s) followed by
/// `f³_{l,m}` for `l = 2s+1..n`, `m = 2..s`.
pub fn block_k21(c: &CanonicalGeminal) -> Result<KernelBlock> {
    check_sector(c)?;
    let mut basis = determinants_where(c, 2, all_distinct)?;
    for l in c.one_rank() + 1..=c.n() {
        for m in 2..=c.pair_count() {
            basis.push(mixed_function(c, l, m, None, KernelFamily::TailMix { l, m })?);
        }
    }
    Ok(KernelBlock {
        signature: BlockSignature::K21,
        basis,
        n: c.n(),
    })
}

/// Index set J for pair `k`: `{3..s}` when `k = 1`, otherwise `{2..s} \ {k}`.
pub fn index_set(k: usize, s: usize) -> Vec<usize> {
    let start = if k == 1 { 3 } else { 2 };
    (start..=s).filter(|&m| m != k).collect()
}

/// Determinants on three distinct pairs followed by `f³_{2k−1,m}`,
/// `f³_{2k,m}` for `k = 1..s`, `m ∈ J`.
pub fn block_k30(c: &CanonicalGeminal) -> Result<KernelBlock> {
    check_sector(c)?;
    let mut basis = determinants_where(c, 3, all_distinct)?;
    let s = c.pair_count();
    for k in 1..=s {
        for m in index_set(k, s) {
            basis.push(mixed_function(c, 2 * k - 1, m, Some(k), KernelFamily::OddPairMix { k, m })?);
            basis.push(mixed_function(c, 2 * k, m, Some(k), KernelFamily::EvenPairMix { k, m })?);
        }
    }
    Ok(KernelBlock {
        signature: BlockSignature::K30,
        basis,
        n: c.n(),
    })
}

/// The four blocks plus normalized eigenfunctions of any folded pair.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDecomposition {
    pub n: usize,
    pub s: usize,
    pub blocks: [KernelBlock; 4],
    pub folded: Vec<KernelBasisFunction>,
    pub folded_pairs: Vec<usize>,
}

impl KernelDecomposition {
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(KernelBlock::dimension).sum::<usize>() + self.folded.len()
    }

    pub fn block(&self, signature: BlockSignature) -> &KernelBlock {
        &self.blocks[signature as usize]
    }

    /// Every basis vector: blocks in signature order, then folded functions.
    pub fn basis(&self) -> impl Iterator<Item = &KernelBasisFunction> {
        self.blocks.iter().flat_map(|b| b.basis.iter()).chain(self.folded.iter())
    }

    pub fn projector(&self) -> HermitianOperatorMatrix {
        let mut acc = self.blocks[0].projector();
        for b in &self.blocks[1..] {
            acc += b.projector();
        }
        acc += projector_of(self.n, &self.folded);
        HermitianOperatorMatrix::from_matrix(self.n, symmetrize(acc)).expect("sum of outer products is Hermitian")
    }
}

pub fn kernel_decomposition(c: &CanonicalGeminal, fold_tol: f64) -> Result<KernelDecomposition> {
    check_sector(c)?;
    let blocks = [block_k03(c)?, block_k12(c)?, block_k21(c)?, block_k30(c)?];
    let folded_pairs = folded_pairs(c, fold_tol);
    let mut folded = Vec::new();
    for &k in &folded_pairs {
        for label in [FamilyLabel::OddPair { k }, FamilyLabel::EvenPair { k }] {
            // For s = 1 the lift is identically zero and nothing is added.
            if let Some(vector) = c.reconstruct().lift(label.orbital())?.normalized() {
                folded.push(KernelBasisFunction {
                    family: KernelFamily::FoldedPair(label),
                    vector,
                });
            }
        }
    }
    Ok(KernelDecomposition {
        n: c.n(),
        s: c.pair_count(),
        blocks,
        folded,
        folded_pairs,
    })
}

/// Projector onto the kernel: sum of the block projectors and of any folded pair.
pub fn kernel_projector(c: &CanonicalGeminal, fold_tol: f64) -> Result<HermitianOperatorMatrix> {
    Ok(kernel_decomposition(c, fold_tol)?.projector())
}

/// Diagonal projector onto determinants with `inside` orbitals among `1..=r`.
pub fn subspace_projector(n: usize, r: usize, inside: usize) -> Result<DMatrix<Complex64>> {
    let dim = sector_dim(n, 3);
    let mut q = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (idx, d) in Determinant::all(n, 3)?.enumerate() {
        if d.orbitals().filter(|&p| p <= r).count() == inside {
            q[(idx, idx)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(q)
}

/// Closed-form block dimensions.
///
/// `d30` is the raw formula `8·C(s,3) + 2s(s−2)`, which is `−2` for `s = 1`;
/// the realized block is empty then and the two missing pair eigenfunctions
/// move the kernel dimension to `C(n,3) − n + 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockDimensions {
    pub n: usize,
    pub s: usize,
    pub d03: i64,
    pub d12: i64,
    pub d21: i64,
    pub d30: i64,
    pub total: i64,
    /// `C(n,3) − n`
    pub expected: i64,
}

impl BlockDimensions {
    pub fn identity_holds(&self) -> bool {
        self.total == self.expected
    }

    pub fn folded_pair(&self) -> bool {
        self.s == 1
    }

    /// Dimensions of the blocks as actually constructed.
    pub fn realized(&self) -> [i64; 4] {
        [self.d03, self.d12, self.d21, self.d30.max(0)]
    }

    pub fn realized_total(&self) -> i64 {
        self.realized().iter().sum()
    }

    /// Kernel dimension including the `s = 1` adjustment.
    pub fn kernel_dimension(&self) -> i64 {
        if self.folded_pair() {
            self.expected + 2
        } else {
            self.expected
        }
    }
}

pub fn block_dimensions(n: usize, s: usize) -> Result<BlockDimensions> {
    if n < 3 {
        return Err(Error::InvalidBlockParameters { n, s, reason: "n must be at least 3" });
    }
    if s < 1 {
        return Err(Error::InvalidBlockParameters { n, s, reason: "s must be at least 1" });
    }
    if 2 * s > n {
        return Err(Error::InvalidBlockParameters { n, s, reason: "2s must not exceed n" });
    }
    let b = |a: usize, k: usize| binomial(a, k) as i64;
    let (ni, si) = (n as i64, s as i64);
    let rest = n - 2 * s;
    let d03 = b(rest, 3);
    let d12 = 2 * si * b(rest, 2);
    let d21 = 4 * rest as i64 * b(s, 2) + (si - 1) * rest as i64;
    let d30 = 8 * b(s, 3) + 2 * si * (si - 2);
    Ok(BlockDimensions {
        n,
        s,
        d03,
        d12,
        d21,
        d30,
        total: d03 + d12 + d21 + d30,
        expected: b(n, 3) - ni,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::assemble_wedge;

    fn pairs(n: usize, xi_sqr: &[f64]) -> CanonicalGeminal {
        let xi: Vec<f64> = xi_sqr.iter().map(|x| x.sqrt()).collect();
        CanonicalGeminal::from_real_pairs(n, &xi).unwrap()
    }

    fn det(n: usize, orbs: &[usize]) -> Determinant {
        Determinant::new(n, orbs).unwrap()
    }

    fn generic(n: usize, s: usize) -> CanonicalGeminal {
        let weights: Vec<f64> = (1..=s).map(|i| (s + 1 - i) as f64).collect();
        let total: f64 = weights.iter().sum();
        pairs(n, &weights.iter().map(|w| w / total).collect::<Vec<_>>())
    }

    #[test]
    fn k03_examples() {
        let b = block_k03(&generic(7, 2)).unwrap();
        assert_eq!(b.dimension(), 1);
        assert_eq!(b.basis[0].family, KernelFamily::Determinant(det(7, &[5, 6, 7])));
        assert_eq!(block_k03(&generic(6, 2)).unwrap().dimension(), 0);
        assert_eq!(block_k03(&generic(9, 2)).unwrap().dimension(), 10);
    }

    #[test]
    fn k12_examples() {
        let c = generic(6, 2);
        let b = block_k12(&c).unwrap();
        assert_eq!(b.dimension(), 4);
        assert_eq!(block_k12(&generic(5, 2)).unwrap().dimension(), 0);
        let m = assemble_wedge(&c).unwrap();
        for f in &b.basis {
            assert!(m.apply(&f.vector).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn k21_tail_mix_example() {
        let c = pairs(5, &[0.75, 0.25]);
        let b = block_k21(&c).unwrap();
        assert_eq!(b.dimension(), 5);
        let f = b.basis.last().unwrap();
        assert_eq!(f.family, KernelFamily::TailMix { l: 5, m: 2 });
        // N·(ξ₁ξ̄₂|1,2,5⟩ − |ξ₁|²|3,4,5⟩), N = 0.75^{−1/2}
        assert!((f.vector.amplitude(&det(5, &[1, 2, 5])).re - 0.25f64.sqrt()).abs() < 1e-15);
        assert!((f.vector.amplitude(&det(5, &[3, 4, 5])).re + 0.75f64.sqrt()).abs() < 1e-15);
        let g5 = c.reconstruct().lift(5).unwrap();
        assert!(g5.inner(&f.vector).unwrap().norm() < 1e-15);
        assert_eq!(block_k21(&generic(6, 2)).unwrap().dimension(), 10);
    }

    #[test]
    fn k21_tail_mix_gram_is_identity() {
        let c = pairs(7, &[0.5, 0.3, 0.2]);
        let fs: Vec<_> = block_k21(&c)
            .unwrap()
            .basis
            .into_iter()
            .filter(|f| matches!(f.family, KernelFamily::TailMix { .. }))
            .collect();
        assert_eq!(fs.len(), 2);
        for a in &fs {
            for b in &fs {
                let expected = if a.family == b.family { 1.0 } else { 0.0 };
                assert!((a.vector.inner(&b.vector).unwrap() - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn k30_examples() {
        assert!(index_set(1, 2).is_empty());
        assert!(index_set(2, 2).is_empty());
        assert_eq!(block_k30(&generic(6, 2)).unwrap().dimension(), 0);

        let c = pairs(6, &[0.5, 0.3, 0.2]);
        let b = block_k30(&c).unwrap();
        assert_eq!(b.dimension(), 14);
        let dets = b.basis.iter().filter(|f| matches!(f.family, KernelFamily::Determinant(_))).count();
        assert_eq!(dets, 8);
        let f13 = b
            .basis
            .iter()
            .find(|f| f.family == KernelFamily::OddPairMix { k: 1, m: 3 })
            .unwrap();
        // N(ξ₂ξ̄₃|3,4,1⟩ − |ξ₂|²|5,6,1⟩), N = (0.3)^{−1/2}(0.5)^{−1/2}
        let norm = (0.3f64 * 0.5).sqrt().recip();
        let a = f13.vector.amplitude(&det(6, &[1, 3, 4])).re;
        let b2 = f13.vector.amplitude(&det(6, &[1, 5, 6])).re;
        assert!((a - norm * (0.3f64 * 0.2).sqrt()).abs() < 1e-15);
        assert!((b2 + norm * 0.3).abs() < 1e-15);
        assert!((f13.vector.norm() - 1.0).abs() < 1e-12);
        let m = assemble_wedge(&c).unwrap();
        assert!(m.apply(&f13.vector).unwrap().norm() < 1e-10);
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set(1, 4), vec![3, 4]);
        assert_eq!(index_set(2, 4), vec![3, 4]);
        assert_eq!(index_set(3, 4), vec![2, 4]);
        assert_eq!(index_set(4, 4), vec![2, 3]);
    }

    #[test]
    fn kernel_projector_examples() {
        let c = generic(6, 2);
        let m = assemble_wedge(&c).unwrap();
        let ker = kernel_projector(&c, 1e-10).unwrap();
        assert!((m.matrix() * ker.matrix()).norm() < 1e-10);
        let rank: f64 = ker.trace();
        assert!((rank - 14.0).abs() < 1e-12);

        let report = crate::analytic::spectral_report(&c, 1e-10).unwrap();
        let identity = DMatrix::<Complex64>::identity(20, 20);
        assert!((ker.matrix() + report.range_projector() - identity).norm() < 1e-10);
    }

    #[test]
    fn dimension_examples() {
        let d = block_dimensions(6, 2).unwrap();
        assert_eq!((d.d03, d.d12, d.d21, d.d30, d.total), (0, 4, 10, 0, 14));
        assert!(d.identity_holds());
        let d = block_dimensions(5, 2).unwrap();
        assert_eq!((d.d03, d.d12, d.d21, d.d30, d.total), (0, 0, 5, 0, 5));
        let d = block_dimensions(3, 1).unwrap();
        assert_eq!(d.total, -2);
        assert!(d.folded_pair());
        assert_eq!(d.realized_total(), 0);
        assert_eq!(d.kernel_dimension(), 0);
        assert!(block_dimensions(5, 3).is_err());
        assert!(block_dimensions(2, 1).is_err());
        assert!(block_dimensions(6, 0).is_err());
    }

    #[test]
    fn dimension_identity_sweep() {
        for n in 3..=30 {
            for s in 1..=n / 2 {
                assert!(block_dimensions(n, s).unwrap().identity_holds(), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn single_pair_kernel() {
        let c = pairs(4, &[1.0]);
        let k = kernel_decomposition(&c, 1e-10).unwrap();
        assert!(k.folded.is_empty());
        assert_eq!(k.dimension(), 2);
        assert_eq!(k.dimension() as i64, block_dimensions(4, 1).unwrap().kernel_dimension());
    }

    #[test]
    fn commutes_with_subspace_projectors() {
        let c = pairs(7, &[0.5, 0.3, 0.2]);
        let m = assemble_wedge(&c).unwrap();
        let mut total = DMatrix::<Complex64>::zeros(35, 35);
        for a in 0..=3 {
            let q = subspace_projector(7, 6, a).unwrap();
            let comm = m.matrix() * &q - &q * m.matrix();
            assert!(comm.norm() < 1e-10);
            total += q;
        }
        assert_eq!(total, DMatrix::identity(35, 35));
    }

    #[test]
    fn vanishing_normalizer_is_reported() {
        assert!(matches!(
            normalizer(0.0, 1.0, || "f".into()),
            Err(Error::VanishingNormalizer { .. })
        ));
    }
}
