use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hormander::embedding::derivative_weight_sum;
use hormander::interpolation::verify_lemma71;
use hormander::parabolicity::{root_split, zeta_polynomial, BoundaryFrame, PrincipalSymbol};
use hormander::plus_spaces::{plus_norm, RegionMask};
use hormander::spectra::hormander_weight;
use hormander::{AnisotropicIndex, GridFunction, Lattice, PhiFunction};

fn phi_strategy() -> impl Strategy<Value = PhiFunction> {
    prop_oneof![
        Just(PhiFunction::constant_one()),
        (-2.0f64..2.0).prop_map(|q| PhiFunction::log_power(vec![q]).unwrap()),
        ((-2.0f64..2.0), (-2.0f64..2.0)).prop_map(|(a, b)| PhiFunction::log_power(vec![a, b]).unwrap()),
    ]
}

fn region() -> RegionMask {
    RegionMask::time_window(Lattice::standard(1, 4, 8, 2.0).unwrap(), 0.0, 0.6)
}

fn values(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn plus_norm_is_a_seminorm(s in 0.0f64..3.0, phi in phi_strategy(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let region = region();
        let idx = AnisotropicIndex::new(s, 0.5, phi).unwrap();
        let n = region.v_count();
        let u = values(seed, n);
        let w = values(seed ^ 1, n);
        let nu = plus_norm(&u, &idx, &region).unwrap().norm;
        let nw = plus_norm(&w, &idx, &region).unwrap().norm;
        let au: Vec<_> = u.iter().map(|z| z * a).collect();
        let nau = plus_norm(&au, &idx, &region).unwrap().norm;
        prop_assert!((nau - a.abs() * nu).abs() <= 1e-9 * nu.max(1e-300));
        let sum: Vec<_> = u.iter().zip(&w).map(|(x, y)| x + y).collect();
        let ns = plus_norm(&sum, &idx, &region).unwrap().norm;
        prop_assert!(ns <= (nu + nw) * (1.0 + 1e-9));
    }

    #[test]
    fn plus_norm_grows_with_the_region(s in 0.0f64..2.5, seed in any::<u64>()) {
        // the small window's nodes are a subset of the large one's
        let lat = Lattice::standard(1, 4, 8, 2.0).unwrap();
        let small = RegionMask::time_window(lat, 0.0, 0.3);
        let large = RegionMask::time_window(lat, 0.0, 0.6);
        let idx = AnisotropicIndex::sobolev(s, 0.5).unwrap();
        let g = GridFunction::random(lat, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = plus_norm(&small.restrict(&g).unwrap(), &idx, &small).unwrap().norm;
        let b = plus_norm(&large.restrict(&g).unwrap(), &idx, &large).unwrap().norm;
        prop_assert!(a <= b * (1.0 + 1e-9));
    }

    #[test]
    fn interpolation_norm_equality(s0 in 0.0f64..1.0, d0 in 0.1f64..2.0, d1 in 0.1f64..2.0, phi in phi_strategy(), seed in any::<u64>()) {
        let lat = Lattice::standard(1, 8, 8, 3.0).unwrap();
        let g = GridFunction::random(lat, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = verify_lemma71(&g, s0, s0 + d0, s0 + d0 + d1, 0.5, phi).unwrap();
        prop_assert!((r - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn weight_increases_with_s(s in -2.0f64..3.0, ds in 0.01f64..2.0, phi in phi_strategy(), xi in -50.0f64..50.0, eta in -50.0f64..50.0) {
        let lo = AnisotropicIndex::new(s, 0.5, phi.clone()).unwrap();
        let hi = AnisotropicIndex::new(s + ds, 0.5, phi).unwrap();
        prop_assert!(hormander_weight(&lo, &[xi], eta) <= hormander_weight(&hi, &[xi], eta));
    }

    #[test]
    fn derivative_weight_sum_decreases_with_s(s in 2.0f64..4.0, ds in 0.01f64..1.0, phi in phi_strategy()) {
        let lat = Lattice::standard(1, 16, 16, 6.0).unwrap();
        let a = derivative_weight_sum(&lat, s, 0.5, &phi, &[0], 0).unwrap();
        let b = derivative_weight_sum(&lat, s + ds, 0.5, &phi, &[0], 0).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn heat_roots_split_evenly_and_scale(x in -5.0f64..5.0, pr in 0.0f64..5.0, pi in -5.0f64..5.0, lambda in 0.1f64..10.0) {
        prop_assume!(x.abs() + pr.abs() + pi.abs() > 1e-3);
        let heat = PrincipalSymbol::heat(2);
        let nu = vec![0.0, 1.0];
        let f = BoundaryFrame::new(nu.clone(), vec![x, 0.0], Complex64::new(pr, pi)).unwrap();
        let g = BoundaryFrame::new(nu, vec![lambda * x, 0.0], Complex64::new(pr, pi) * lambda * lambda).unwrap();
        let a = root_split(&zeta_polynomial(&heat, &f).unwrap()).unwrap();
        let b = root_split(&zeta_polynomial(&heat, &g).unwrap()).unwrap();
        prop_assert_eq!((a.plus.len(), a.minus.len()), (1, 1));
        prop_assert_eq!((b.plus.len(), b.minus.len()), (1, 1));
        // roots in ζ are homogeneous of degree one
        for (r, q) in a.plus.iter().zip(&b.plus) {
            prop_assert!((r * lambda - q).norm() <= 1e-8 * q.norm().max(1.0));
        }
    }
}
