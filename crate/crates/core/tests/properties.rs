use proptest::prelude::*;
use qresource::factory::{is_iq, MEMBERSHIP_TOL};
use qresource::io::{parse_state_str, serialize_state};
use qresource::measures::{bd_l1_closed_form, bd_relative_entropy};
use qresource::qkd::{conditional_entropy_za_e, devetak_winter_rate};
use qresource::state::{fidelity, purify, tensor_product, von_neumann_entropy};
use qresource::{eig_hermitian, ComplexMatrix, DensityMatrix, QkdSetup, Sampler, C64};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

fn state(seed: u64, d_a: usize, d_b: usize) -> qresource::BipartiteState {
    let mut s = Sampler::new(seed);
    let rank = 1 + s.index(d_a * d_b);
    s.bipartite(d_a, d_b, rank)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_decomposition_reconstructs(seed in any::<u64>(), d in 1usize..=6) {
        let rho = Sampler::new(seed).density(d, d);
        let eig = eig_hermitian(rho.matrix()).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(rho.matrix()) < 1e-12);
        let v = &eig.eigenvectors;
        prop_assert!((&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(d)) < 1e-12);
        let sum: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn entropy_is_additive(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut s = Sampler::new(seed);
        let a = s.density(da, da);
        let b = s.density(db, db);
        let ab = tensor_product(&a, &b).unwrap();
        let lhs = von_neumann_entropy(ab.state());
        prop_assert!((lhs - von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() < 1e-10);
    }

    #[test]
    fn purification_traces_back(seed in any::<u64>(), d in 1usize..=6) {
        let mut s = Sampler::new(seed);
        let rank = 1 + s.index(d);
        let rho = s.density(d, rank);
        let psi = purify(&rho);
        let r = psi.dim() / d;
        let amp = psi.amplitudes();
        let back = ComplexMatrix::from_fn(d, d, |i, j| {
            (0..r).map(|e| amp[i * r + e] * amp[j * r + e].conj()).sum::<C64>()
        });
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn fidelity_symmetric_and_unitarily_invariant(seed in any::<u64>(), d in 1usize..=4) {
        let mut s = Sampler::new(seed);
        let a = s.density(d, d);
        let b = s.density(d, 1 + (seed as usize % d));
        let u = s.unitary(d);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!((f - fidelity(&a.conjugate(&u), &b.conjugate(&u)).unwrap()).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn dephasing_is_idempotent_and_free((da, db) in dims(), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let once = rho.dephase_a();
        prop_assert!(once.dephase_a().matrix().max_abs_diff(once.matrix()) < 1e-15);
        prop_assert!(is_iq(&once, MEMBERSHIP_TOL));
        prop_assert!(bd_relative_entropy(&once).value < 1e-10);
    }

    #[test]
    fn positive_bd_means_not_iq((da, db) in dims(), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        if bd_relative_entropy(&rho).value > 1e-6 {
            prop_assert!(!is_iq(&rho, MEMBERSHIP_TOL));
        }
    }

    #[test]
    fn sqi_channels_do_not_increase_bd((da, db) in (2usize..=3, 1usize..=3), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let ch = Sampler::new(seed ^ 1).sqi_channel(da, db);
        let out = ch.apply(&rho).unwrap();
        prop_assert!(bd_relative_entropy(&out).value <= bd_relative_entropy(&rho).value + 1e-8);
    }

    #[test]
    fn local_unitaries_preserve_bd((da, db) in (2usize..=3, 1usize..=3), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let mut s = Sampler::new(seed ^ 2);
        let u_a = s.incoherent_unitary(da).to_matrix();
        let u_b = s.unitary(db);
        let w_b = s.incoherent_unitary(db).to_matrix();
        let re = bd_relative_entropy(&rho).value;
        prop_assert!((bd_relative_entropy(&rho.local_unitary(Some(&u_a), Some(&u_b))).value - re).abs() < 1e-8);
        let l1 = bd_l1_closed_form(&rho).value;
        prop_assert!((bd_l1_closed_form(&rho.local_unitary(Some(&u_a), Some(&w_b))).value - l1).abs() < 1e-8);
    }

    #[test]
    fn purification_paths_agree((da, db) in dims(), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let (v, gap) = conditional_entropy_za_e(&QkdSetup::new(rho.clone()));
        prop_assert!(gap < 1e-8);
        prop_assert!((v - bd_relative_entropy(&rho).value).abs() < 1e-12);
    }

    #[test]
    fn key_rate_is_basis_covariant((da, db) in dims(), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let mut s = Sampler::new(seed ^ 3);
        let (u_a, u_b) = (s.unitary(da), s.unitary(db));
        let rotated = rho.local_unitary(Some(&u_a.adjoint()), Some(&u_b.adjoint()));
        let base = devetak_winter_rate(&QkdSetup::new(rho));
        let moved = devetak_winter_rate(&QkdSetup::with_bases(rotated, u_a, u_b).unwrap());
        prop_assert!((base.key_rate - moved.key_rate).abs() < 1e-10);
        prop_assert!((base.s_za_e - moved.s_za_e).abs() < 1e-10);
        prop_assert!((base.key_rate - (base.s_za_e - base.s_za_zb)).abs() < 1e-12);
    }

    #[test]
    fn state_files_round_trip_bit_exactly((da, db) in dims(), seed in any::<u64>()) {
        let rho = state(seed, da, db);
        let back = parse_state_str(&serialize_state(&rho)).unwrap();
        prop_assert_eq!(back.dims(), rho.dims());
        prop_assert_eq!(back.matrix().as_slice(), rho.matrix().as_slice());
    }

    #[test]
    fn mixtures_stay_valid(seed in any::<u64>(), d in 1usize..=4, p in 0.0f64..=1.0) {
        let mut s = Sampler::new(seed);
        let a = s.density(d, d);
        let b = s.pure(d).to_density();
        let m = DensityMatrix::mixture(&[p, 1.0 - p], &[a, b]).unwrap();
        prop_assert!(DensityMatrix::new(m.matrix().clone()).is_ok());
    }
}
