use std::f64::consts::PI;

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::konno::{interval, k_map, konno_density};
use anisowalk::lattice::{evolve, LatticeState};
use anisowalk::linalg::{wrap_angle, Mat2};
use anisowalk::momentum::{eigensystem, free_evolve, velocity, BRANCHES};
use anisowalk::scattering::{apply_j, apply_j_adjoint, PairState};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn coin_strategy(a: std::ops::RangeInclusive<f64>) -> impl Strategy<Value = CoinMatrix> {
    (a, -PI..PI, -PI..PI, -PI..PI).prop_map(|(a, al, be, de)| CoinMatrix::from_params(a, al, be, de).unwrap())
}

fn state_strategy() -> impl Strategy<Value = LatticeState> {
    (-5i64..5, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..8)).prop_map(
        |(lo, amps)| {
            let s = LatticeState::from_entries(
                amps.iter()
                    .enumerate()
                    .map(|(i, &(a, b, c, d))| (lo + i as i64, [C64::new(a, b), C64::new(c, d)])),
            );
            if s.norm() > 1e-6 {
                s.normalized()
            } else {
                LatticeState::delta(0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn params_survive_the_matrix(c in coin_strategy(0.0..=1.0)) {
        let back = CoinMatrix::from_matrix(c.matrix()).unwrap();
        prop_assert!(back.matrix().max_abs_diff(&c.matrix()) < 1e-12);
        prop_assert!((back.a() - c.a()).abs() < 1e-12);
        prop_assert!(wrap_angle(back.delta() - c.delta()).abs() < 1e-12);
        prop_assert!(c.matrix().is_unitary(1e-12));
    }

    #[test]
    fn walk_is_unitary_and_reversible(
        l in coin_strategy(0.0..=1.0),
        r in coin_strategy(0.0..=1.0),
        psi in state_strategy(),
        n in 1i64..200,
    ) {
        let field = CoinField::two_phase(l, r).with_override(0, Mat2::real(0.0, 1.0, 1.0, 0.0)).unwrap();
        let out = evolve(&psi, &field, n).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        let back = evolve(&out, &field, -n).unwrap();
        prop_assert!(back.distance(&psi) < 1e-12);
    }

    #[test]
    fn lattice_and_momentum_free_walks_agree(c in coin_strategy(0.0..=1.0), psi in state_strategy(), n in 0i64..60) {
        let field = CoinField::homogeneous(c);
        let lattice = evolve(&psi, &field, n).unwrap();
        let momentum = free_evolve(&psi, &c, n);
        prop_assert!(lattice.distance(&momentum) < 1e-11);
    }

    #[test]
    fn j_is_a_coisometry(l in state_strategy(), r in state_strategy()) {
        let pair = PairState::new(l, r);
        let back = apply_j(&apply_j_adjoint(&apply_j(&pair)));
        prop_assert!(back.distance(&apply_j(&pair)) < 1e-14);
        prop_assert!(apply_j(&pair).norm_sqr() <= pair.norm_sqr() + 1e-14);
    }

    #[test]
    fn velocities_are_bounded_by_a(c in coin_strategy(0.01..=0.99), k in -PI..PI) {
        for j in BRANCHES {
            prop_assert!(velocity(&c, k, j).abs() <= c.a() + 1e-12);
        }
        let e = eigensystem(&c, k);
        prop_assert!((velocity(&c, k, 1) + velocity(&c, k, 2)).abs() < 1e-12);
        prop_assert!((e.lambda(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_map_lands_in_its_interval(c in coin_strategy(0.01..=0.99), t in -0.999..0.999f64) {
        let v = t * c.a();
        for j in BRANCHES {
            for m in 0..2 {
                let k = k_map(v, &c, j, m).unwrap();
                let (lo, hi) = interval(&c, m);
                let centred = lo + wrap_angle(k - lo - PI / 2.0) + PI / 2.0;
                prop_assert!(centred >= lo - 1e-12 && centred <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn konno_density_is_nonnegative_and_even(v in -1.2..1.2f64, r in 0.01..=1.0f64) {
        let f = konno_density(v, r).unwrap();
        prop_assert!(f >= 0.0);
        prop_assert_eq!(f, konno_density(-v, r).unwrap());
    }
}
