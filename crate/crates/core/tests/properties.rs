use fermion_wedge::analytic::{eigenfunction_by_determinants, spectral_report, FamilyLabel};
use fermion_wedge::basis::{sector_dim, WedgeVector};
use fermion_wedge::eigen::jacobi_eigh;
use fermion_wedge::geminal::{canonicalize, CanonicalGeminal, GeminalMatrix, DEFAULT_RANK_TOL};
use fermion_wedge::kernel::{block_dimensions, kernel_decomposition, subspace_projector, KernelFamily};
use fermion_wedge::operator::assemble_wedge;
use fermion_wedge::oracle::{assemble_tensor, eig_hermitian, max_entry_deviation};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_unitary(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    x.qr().q()
}

/// Canonical data with distinct, well separated |ξ| and arbitrary phases.
fn arb_canonical(max_n: usize) -> impl Strategy<Value = CanonicalGeminal> {
    (3..=max_n)
        .prop_flat_map(|n| (Just(n), 1..=n / 2))
        .prop_flat_map(|(n, s)| {
            (
                Just(n),
                prop::collection::vec(0.05f64..1.0, s),
                prop::collection::vec(0.0f64..std::f64::consts::TAU, s),
            )
        })
        .prop_map(|(n, weights, phases)| {
            let total: f64 = weights.iter().map(|w| w * w).sum();
            let xi = weights
                .iter()
                .zip(&phases)
                .map(|(w, p)| Complex64::from_polar(w / total.sqrt(), *p))
                .collect();
            CanonicalGeminal::from_pairs(n, xi).unwrap()
        })
}

fn generic(c: &CanonicalGeminal) -> bool {
    c.xi().iter().all(|x| 1.0 - x.norm_sqr() > 1e-6)
}

fn gram_deviation(vectors: &[&WedgeVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b).unwrap() - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Singular values of G, descending, from an independent dense SVD.
fn singular_values(g: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = g.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_pairs_match_paired_singular_values(c in arb_canonical(10), seed in any::<u64>()) {
        let n = c.n();
        let u = random_unitary(n, seed);
        let g = GeminalMatrix::new(&u * c.natural_matrix() * u.transpose()).unwrap();
        let canon = canonicalize(&g, DEFAULT_RANK_TOL).unwrap();
        let sv = singular_values(g.matrix());
        prop_assert_eq!(canon.pair_count(), c.pair_count());
        for (k, x) in canon.xi().iter().enumerate() {
            prop_assert!((x.norm() - sv[2 * k]).abs() < 1e-10);
            prop_assert!((x.norm() - sv[2 * k + 1]).abs() < 1e-10);
        }
        for v in &sv[2 * canon.pair_count()..] {
            prop_assert!(v.abs() < 1e-10);
        }
        let v = canon.orbitals();
        prop_assert!(max_entry_deviation(&(v.adjoint() * v), &DMatrix::identity(n, n)) < 1e-12);
        let rebuilt = v * canon.natural_matrix() * v.transpose();
        prop_assert!(max_entry_deviation(&rebuilt, g.matrix()) < 1e-10);
    }

    #[test]
    fn canonical_pairs_do_not_depend_on_rotation(c in arb_canonical(9), a in any::<u64>(), b in any::<u64>()) {
        let n = c.n();
        let rotate = |seed| {
            let u = random_unitary(n, seed);
            let g = GeminalMatrix::new(&u * c.natural_matrix() * u.transpose()).unwrap();
            canonicalize(&g, DEFAULT_RANK_TOL).unwrap()
        };
        let (x, y) = (rotate(a), rotate(b));
        prop_assert_eq!(x.pair_count(), y.pair_count());
        for (p, q) in x.xi().iter().zip(y.xi()) {
            prop_assert!((p - q).norm() < 1e-10);
        }
        prop_assert!(2 * x.pair_count() <= n && x.pair_count() >= 1);
    }

    #[test]
    fn operator_is_hermitian_psd_with_trace_n_minus_two(c in arb_canonical(9)) {
        let m = assemble_wedge(&c).unwrap();
        let n = c.n();
        prop_assert!((m.trace() - (n as f64 - 2.0)).abs() < 1e-10);
        let sol = jacobi_eigh(m.matrix(), 1e-12).unwrap();
        prop_assert!(sol.values[0] > -1e-12);
        prop_assert!(*sol.values.last().unwrap() < 1.0 + 1e-12);
        for inside in 0..=3 {
            let q = subspace_projector(n, c.one_rank(), inside).unwrap();
            prop_assert!((m.matrix() * &q - &q * m.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn families_reconstruct_operator(c in arb_canonical(9)) {
        let m = assemble_wedge(&c).unwrap();
        let report = spectral_report(&c, 1e-10).unwrap();
        prop_assert!((report.reconstruct_operator() - m.matrix()).norm() < 1e-10);
        prop_assert!(report.route_deviation < 1e-12);
        let vectors: Vec<_> = report.families.iter().map(|f| &f.vector).collect();
        prop_assert!(gram_deviation(&vectors) < 1e-12);
        for f in &report.families {
            match f.label {
                FamilyLabel::Tail { .. } => prop_assert_eq!(f.eigenvalue, 1.0),
                _ => prop_assert!((0.0..1.0).contains(&f.eigenvalue)),
            }
        }
        let max = report.eigenvalues().into_iter().fold(0.0, f64::max);
        let expected = if c.one_rank() < c.n() {
            1.0
        } else {
            c.xi().iter().map(|x| 1.0 - x.norm_sqr()).fold(0.0, f64::max)
        };
        prop_assert_eq!(max, expected);
    }

    #[test]
    fn kernel_blocks_complete_the_eigenbasis(c in arb_canonical(9)) {
        let m = assemble_wedge(&c).unwrap();
        let report = spectral_report(&c, 1e-10).unwrap();
        let kernel = kernel_decomposition(&c, 1e-10).unwrap();
        for f in kernel.basis() {
            prop_assert!(m.apply(&f.vector).unwrap().norm() < 1e-10);
        }
        let projectors: Vec<_> = kernel.blocks.iter().map(|b| b.projector()).collect();
        for (i, a) in projectors.iter().enumerate() {
            for b in &projectors[i + 1..] {
                prop_assert!((a * b).norm() < 1e-10);
            }
        }
        let vectors: Vec<_> = report
            .families
            .iter()
            .map(|f| &f.vector)
            .chain(kernel.basis().map(|f| &f.vector))
            .collect();
        prop_assert_eq!(vectors.len(), sector_dim(c.n(), 3));
        prop_assert!(gram_deviation(&vectors) < 1e-12);
    }

    #[test]
    fn tail_mixing_functions_are_orthogonal_to_tail_eigenfunctions(c in arb_canonical(9)) {
        let kernel = kernel_decomposition(&c, 1e-10).unwrap();
        for f in kernel.basis() {
            if let KernelFamily::TailMix { l, .. } = f.family {
                let g = eigenfunction_by_determinants(&c, FamilyLabel::Tail { l }).unwrap();
                prop_assert!(g.inner(&f.vector).unwrap().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dense_spectrum_has_generic_kernel_dimension(c in arb_canonical(8)) {
        prop_assume!(generic(&c));
        let m = assemble_wedge(&c).unwrap();
        let sol = eig_hermitian(&m).unwrap();
        let zeros = sol.values.iter().filter(|v| v.abs() < 1e-10).count();
        prop_assert_eq!(zeros, sector_dim(c.n(), 3) - c.n());
        prop_assert!(sol.max_residual(m.matrix()) < 1e-10);
        prop_assert!(sol.orthonormality_error() < 1e-10);
    }

    #[test]
    fn dimension_identity_holds(n in 4usize..=30, s_frac in 0.0f64..1.0) {
        let s = 2 + ((n / 2 - 2) as f64 * s_frac).round() as usize;
        prop_assume!(2 * s <= n);
        let d = block_dimensions(n, s).unwrap();
        prop_assert_eq!(d.total, d.expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tensor_route_matches_wedge_route(c in arb_canonical(7), seed in any::<u64>()) {
        let m = assemble_wedge(&c).unwrap();
        let natural = assemble_tensor(&c.natural_geminal()).unwrap();
        prop_assert!(max_entry_deviation(natural.matrix(), m.matrix()) < 1e-12);

        let u = random_unitary(c.n(), seed);
        let rotated = CanonicalGeminal::with_orbitals(c.n(), c.xi().to_vec(), u).unwrap();
        let input = assemble_tensor(&rotated.input_geminal().unwrap()).unwrap();
        let expected = m.to_input_basis(rotated.orbitals()).unwrap();
        prop_assert!(max_entry_deviation(input.matrix(), expected.matrix()) < 1e-12);
    }
}
