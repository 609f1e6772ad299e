use hrp_core::codes::{reconstruct, sparse_codes, SparsityBudget};
use hrp_core::ingest::{mean_fill, SensorTable};
use hrp_core::manifold::{
    in_good_subset, normalize_to_sphere, polar, sphere_tangent_project, tangent_project,
    GoodSubsetQuery, Sign,
};
use hrp_core::metrics::{masked_rmse, sign_perm_rmse, ObservationMask, SignPermutation};
use hrp_core::synth::{gaussian_matrix, gen_random_orthogonal, rng_from_seed};
use hrp_core::{DataMatrix, OrthoDict};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_matrix(n: usize, seed: u64, rank: usize) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let a = gaussian_matrix(n, rank, &mut rng);
    let b = gaussian_matrix(rank, n, &mut rng);
    a * b * scale
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn polar_is_orthogonal(n in 2usize..=16, seed in any::<u64>(), deficit in 0usize..3) {
        let rank = n.saturating_sub(deficit).max(1);
        let q = polar(&random_matrix(n, seed, rank)).unwrap();
        prop_assert!(q.residual() <= 1e-10);
    }

    #[test]
    fn tangent_projection_is_a_linear_projector(n in 1usize..=8, seed in any::<u64>(), s in -5.0f64..5.0) {
        let r = gen_random_orthogonal(n, seed).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xabcd);
        let a = gaussian_matrix(n, n, &mut rng);
        let b = gaussian_matrix(n, n, &mut rng);
        let p = tangent_project(&r, &a).unwrap();
        let cert = r.as_matrix().tr_mul(&p) + p.tr_mul(r.as_matrix());
        prop_assert!(cert.amax() <= 1e-12);
        let again = tangent_project(&r, &p).unwrap();
        prop_assert!((again - &p).amax() <= 1e-12);
        let combined = tangent_project(&r, &(&a * s + &b)).unwrap();
        let split = &p * s + tangent_project(&r, &b).unwrap();
        prop_assert!((combined - split).amax() <= 1e-12);
    }

    #[test]
    fn sphere_projection_annihilates_the_base(n in 1usize..=10, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let r = normalize_to_sphere(&gaussian_matrix(n, 1, &mut rng).column(0).into_owned()).unwrap();
        let a = gaussian_matrix(n, 1, &mut rng).column(0).into_owned();
        let p = sphere_tangent_project(&r, &a).unwrap();
        prop_assert!(p.dot(r.as_vector()).abs() <= 1e-12);
        prop_assert!((sphere_tangent_project(&r, &p).unwrap() - &p).amax() <= 1e-12);
        prop_assert!(sphere_tangent_project(&r, r.as_vector()).unwrap().amax() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_beats_random_orthogonal_matrices(n in 2usize..=8, seed in any::<u64>()) {
        let c = random_matrix(n, seed, n);
        let best = inner(polar(&c).unwrap().as_matrix(), &c);
        for k in 0..100u64 {
            let q = gen_random_orthogonal(n, seed.wrapping_add(k + 1)).unwrap();
            prop_assert!(best >= inner(q.as_matrix(), &c) - 1e-9 * c.norm());
        }
    }

    #[test]
    fn rmse_ignores_column_sign_and_order(n in 1usize..=8, seed in any::<u64>()) {
        let a = gen_random_orthogonal(n, seed).unwrap();
        let b = gen_random_orthogonal(n, seed ^ 1).unwrap();
        let mut rng = rng_from_seed(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let j = SignPermutation::new(perm, signs).unwrap();
        let moved = OrthoDict::new(j.apply(a.as_matrix())).unwrap();
        let (e1, _) = sign_perm_rmse(&a, &b).unwrap();
        let (e2, _) = sign_perm_rmse(&moved, &b).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12);
        prop_assert!((0.0..=2.0).contains(&e1));
        let (self_err, _) = sign_perm_rmse(&moved, &a).unwrap();
        prop_assert!(self_err <= 1e-12);
    }

    #[test]
    fn masked_rmse_ignores_unobserved_cells(n in 1usize..=6, l in 1usize..=12, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let y = gaussian_matrix(n, l, &mut rng);
        let yhat = gaussian_matrix(n, l, &mut rng);
        let mut mask = DMatrix::from_fn(n, l, |_, _| rng.random::<f64>() < 0.7);
        mask[(0, 0)] = true;
        let mask = ObservationMask::new(mask);
        let junk = gaussian_matrix(n, l, &mut rng) * 1e6;
        let poisoned = DMatrix::from_fn(n, l, |i, j| if mask.is_observed(i, j) { y[(i, j)] } else { junk[(i, j)] });
        let a = masked_rmse(&yhat, &y, &mask).unwrap();
        let b = masked_rmse(&yhat, &poisoned, &mask).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reconstruction_error_shrinks_with_budget(n in 1usize..=8, l in 1usize..=20, seed in any::<u64>()) {
        let d = gen_random_orthogonal(n, seed).unwrap();
        let mut rng = rng_from_seed(seed ^ 7);
        let y = DataMatrix::new(gaussian_matrix(n, l, &mut rng)).unwrap();
        let mask = ObservationMask::all_observed(n, l);
        let mut last = f64::INFINITY;
        for t0 in 1..=n {
            let b = SparsityBudget::new(t0, n).unwrap();
            let x = sparse_codes(&d, &y, b).unwrap();
            let yhat = reconstruct(&d, &x).unwrap();
            let e = masked_rmse(yhat.as_matrix(), y.as_matrix(), &mask).unwrap();
            prop_assert!(e <= last + 1e-12);
            last = e;
        }
        prop_assert!(last <= 1e-10);
    }

    #[test]
    fn good_subsets_partition_the_sphere(n in 2usize..=10, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let v = gaussian_matrix(n, 1, &mut rng).column(0).into_owned();
        let d = normalize_to_sphere(&v).unwrap();
        let mut sq: Vec<f64> = d.as_vector().iter().map(|x| x * x).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(sq[0] > sq[1] * (1.0 + 1e-9));
        let zeta = 0.5 * (sq[0] / sq[1] - 1.0);
        let mut hits = 0;
        for idx in 0..n {
            for sign in [Sign::Plus, Sign::Minus] {
                if in_good_subset(&d, &GoodSubsetQuery::new(idx, sign, zeta).unwrap()).unwrap() {
                    hits += 1;
                }
            }
        }
        prop_assert_eq!(hits, 1);
    }

    #[test]
    fn mean_fill_keeps_observed_cells(n in 1usize..=5, l in 1usize..=8, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let values = gaussian_matrix(n, l, &mut rng);
        let mut mask = DMatrix::from_fn(n, l, |_, _| rng.random::<f64>() < 0.6);
        mask[(0, 0)] = true;
        let ids = (0..n).map(|i| format!("s{i}")).collect();
        let stamps = (0..l).map(|j| format!("t{j}")).collect();
        let table = SensorTable::new(values.clone(), ObservationMask::new(mask.clone()), ids, stamps).unwrap();
        let filled = mean_fill(&table).unwrap();
        for i in 0..n {
            for j in 0..l {
                if mask[(i, j)] {
                    prop_assert_eq!(filled.as_matrix()[(i, j)], values[(i, j)]);
                } else {
                    prop_assert!(filled.as_matrix()[(i, j)].is_finite());
                }
            }
        }
    }
}
