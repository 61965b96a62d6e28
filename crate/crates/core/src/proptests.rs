//! Randomized invariants across the kernels, distance and logarithm modules.

use crate::bwgeom::{bw_distance, bw_distance_factors};
use crate::logmaps::{build_log_rotation, log_index_params, recover_block};
use crate::manifolds::{principal_angles, stiefel_split, StiefelPoint, StiefelTangent};
use crate::matkernels::{
    fro, gaussian_matrix, orthonormality_residual, psd_sqrt, random_orthogonal, sylvester_solve, thin_svd, DetSign,
    SymMatrix,
};
use crate::sampling::{random_frame, random_spd, random_sym};
use crate::tolerance::Tolerances;
use crate::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn inner(a: &Mat, b: &Mat) -> f64 {
    a.component_mul(b).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sylvester_is_equivariant_and_self_adjoint(seed in any::<u64>(), k in 1usize..6) {
        let mut r = rng(seed);
        let d = random_spd(k, &mut r);
        let t1 = random_sym(k, 1.0, &mut r);
        let t2 = random_sym(k, 1.0, &mut r);
        let s1 = sylvester_solve(&d, &t1).unwrap();
        let s2 = sylvester_solve(&d, &t2).unwrap();
        let resid = d.as_mat() * s1.as_mat() + s1.as_mat() * d.as_mat() - t1.as_mat();
        prop_assert!(fro(&resid) <= 1e-10 * (1.0 + fro(t1.as_mat())));
        let lhs = inner(s1.as_mat(), t2.as_mat());
        let rhs = inner(t1.as_mat(), s2.as_mat());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));

        let g = random_orthogonal(k, seed ^ 1, DetSign::Minus);
        let moved = sylvester_solve(&d.congruence(&g), &t1.congruence(&g)).unwrap();
        prop_assert!(fro(&(moved.as_mat() - s1.congruence(&g).as_mat())) <= 1e-9);
    }

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>(), n in 1usize..7, rank in 0usize..7) {
        let rank = rank.min(n);
        let x = gaussian_matrix(n, rank, &mut rng(seed));
        let a = SymMatrix::new(&x * x.transpose()).unwrap();
        let root = psd_sqrt(&a).unwrap();
        let back = root.as_mat() * root.as_mat();
        prop_assert!(fro(&(back - a.as_mat())) <= 1e-9 * (1.0 + fro(a.as_mat())));

        let spd = random_spd(n, &mut rng(seed ^ 2));
        let sq = SymMatrix::new(spd.as_mat() * spd.as_mat()).unwrap();
        prop_assert!(fro(&(psd_sqrt(&sq).unwrap().as_mat() - spd.as_mat())) <= 1e-9 * fro(spd.as_mat()));
    }

    #[test]
    fn svd_handles_low_rank(seed in any::<u64>(), n in 1usize..8, k in 1usize..8, rank in 0usize..8) {
        let k = k.min(n);
        let rank = rank.min(k);
        let mut r = rng(seed);
        let a = gaussian_matrix(n, rank, &mut r) * gaussian_matrix(rank, k, &mut r);
        let s = thin_svd(&a).unwrap();
        prop_assert!(fro(&(s.reconstruct() - &a)) <= 1e-12 * (1.0 + fro(&a)));
        prop_assert!(orthonormality_residual(&s.u) <= 1e-12);
        prop_assert!(orthonormality_residual(&s.v) <= 1e-12);
        prop_assert!(s.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(s.rank(1e-10), rank);
    }

    #[test]
    fn split_round_trips(seed in any::<u64>(), n in 2usize..7, k in 1usize..6) {
        let k = k.min(n - 1);
        let mut r = rng(seed);
        let frame = random_frame(n, k, &mut r);
        let g = gaussian_matrix(k, k, &mut r);
        let tangent = StiefelTangent::new(&g - g.transpose(), gaussian_matrix(n - k, k, &mut r));
        let v = tangent.to_ambient(&frame);
        let split = stiefel_split(&frame, &v).unwrap();
        prop_assert!(fro(&(split.a() - tangent.a())) <= 1e-12 * (1.0 + fro(&v)));
        prop_assert!(fro(&(split.to_ambient(&frame) - &v)) <= 1e-12 * (1.0 + fro(&v)));
    }

    #[test]
    fn principal_angles_are_symmetric(seed in any::<u64>(), n in 2usize..8, k in 1usize..5) {
        let k = k.min(n);
        let mut r = rng(seed);
        let q1 = StiefelPoint::from_span(&gaussian_matrix(n, k, &mut r)).unwrap();
        let q2 = StiefelPoint::from_span(&gaussian_matrix(n, k, &mut r)).unwrap();
        let a = principal_angles(&q1, &q2).unwrap();
        let b = principal_angles(&q2, &q1).unwrap();
        for (x, y) in a.angles.iter().zip(&b.angles) {
            prop_assert!((x - y).abs() <= 1e-12);
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(x));
        }
        // 2k > n forces 2k − n shared directions
        let shared = (2 * k).saturating_sub(n);
        prop_assert!(a.angles.iter().take(shared).all(|t| *t < 1e-7));
    }

    #[test]
    fn distance_routes_agree(seed in any::<u64>(), n in 1usize..6, ka in 0usize..6, kb in 0usize..6) {
        let mut r = rng(seed);
        let x = gaussian_matrix(n, ka.min(n), &mut r);
        let y = gaussian_matrix(n, kb.min(n), &mut r);
        let (a, b) = (&x * x.transpose(), &y * y.transpose());
        let formula = bw_distance(&a, &b).unwrap();
        let factors = bw_distance_factors(&x, &y).unwrap();
        prop_assert!((formula - factors).abs() <= 1e-7 * (1.0 + formula));
        prop_assert!((bw_distance(&b, &a).unwrap() - formula).abs() <= 1e-7 * (1.0 + formula));
        // d² cancels to roundoff, and eigenvalues under 1e-10·λmax are floored
        let own = bw_distance(&a, &a).unwrap();
        prop_assert!(own <= 2e-5 * (1.0 + fro(&a)).sqrt(), "d(A, A) = {own:e}, |A| = {}", fro(&a));
    }

    #[test]
    fn log_rotations_certify(seed in any::<u64>(), r_dim in 0usize..4) {
        // span Y shares 3 − r directions with span X and is orthogonal otherwise
        let o = random_orthogonal(7, seed, DetSign::Plus);
        let l = 3 - r_dim;
        let mut ys = Mat::zeros(7, 3);
        ys.columns_mut(0, l).copy_from(&o.columns(0, l));
        ys.columns_mut(l, r_dim).copy_from(&o.columns(3, r_dim));
        let mut g = rng(seed ^ 3);
        let x = o.columns(0, 3) * random_spd(3, &mut g).as_mat();
        let y = ys * random_spd(3, &mut g).as_mat();
        let p = log_index_params(&x, &y, &Tolerances::default()).unwrap();
        prop_assert_eq!((p.l, p.r), (l, r_dim));
        for sign in [DetSign::Plus, DetSign::Minus] {
            let rr = random_orthogonal(r_dim, seed ^ 4, sign);
            let c = build_log_rotation(&p, &rr).unwrap();
            prop_assert!(orthonormality_residual(&c.rotation) <= 1e-12);
            prop_assert!(fro(&(recover_block(&p, &c.rotation) - &rr)) <= 1e-9);
        }
    }
}
