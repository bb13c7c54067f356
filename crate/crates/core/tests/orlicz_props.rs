mod common;

use common::*;
use orlicz_mce::orlicz::NORM_REL_TOL;
use orlicz_mce::{luxemburg_norm, modular, ExtendedReal, MeasureSpace, SimpleFunction, YoungFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(seed: u64, a: usize, b: usize) -> (MeasureSpace, SimpleFunction, SimpleFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, a, b);
    let f = random_values(&mut rng, &space, -4.0, 4.0);
    let g = random_values(&mut rng, &space, -4.0, 4.0);
    (space, f, g)
}

fn norm(phi: &YoungFunction, f: &SimpleFunction, s: &MeasureSpace) -> f64 {
    luxemburg_norm(phi, f, s).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn agrees_with_lp_norm(seed in any::<u64>(), a in 1usize..10, b in 0usize..10, p in 1.0f64..5.0) {
        let (s, f, _) = sample(seed, a, b);
        let phi = YoungFunction::power(p, false).unwrap();
        let want = lp_norm(&f, &s, p);
        let got = luxemburg_norm(&phi, &f, &s).unwrap();
        prop_assert!(rel_diff(got.value, want) <= 1e-9, "{} vs {want}", got.value);
        prop_assert!(got.rel_width() <= NORM_REL_TOL);
    }

    #[test]
    fn norm_axioms(seed in any::<u64>(), a in 1usize..10, b in 0usize..10, t in -5.0f64..5.0, p in 1.0f64..4.0) {
        let (s, f, g) = sample(seed, a, b);
        let phi = YoungFunction::power(p, true).unwrap();
        let (nf, ng) = (norm(&phi, &f, &s), norm(&phi, &g, &s));
        prop_assert!(norm(&phi, &f.add(&g), &s) <= (nf + ng) * (1.0 + 1e-9));
        prop_assert!(rel_diff(norm(&phi, &f.scale(t), &s), t.abs() * nf) <= 1e-9);
        prop_assert!(nf >= 0.0);
    }

    #[test]
    fn modular_at_norm_is_at_most_one(seed in any::<u64>(), a in 1usize..10, b in 0usize..10) {
        let (s, f, _) = sample(seed, a, b);
        let phi = YoungFunction::exp_growth();
        let n = luxemburg_norm(&phi, &f, &s).unwrap();
        prop_assume!(n.value > 0.0);
        prop_assert!(modular(&phi, &f.scale(1.0 / n.bracket.1), &s) <= ExtendedReal::Finite(1.0));
        prop_assert!(modular(&phi, &f.scale(1.0 / n.bracket.0), &s) > ExtendedReal::Finite(1.0));
    }

    #[test]
    fn refinement_leaves_modular_and_norm_alone(seed in any::<u64>(), a in 0usize..6, b in 1usize..6, depth in 1usize..8) {
        let (s, f, _) = sample(seed, a, b);
        let mut fine = s.clone();
        for i in 0..depth {
            let id = fine.nonatomic_cells().nth(i % b).unwrap().id.clone();
            fine = fine.refine(&id).unwrap();
        }
        let lifted = fine.lift_function(&f);
        let phi = YoungFunction::power(3.0, true).unwrap();
        let (m0, m1) = (modular(&phi, &f, &s).to_f64(), modular(&phi, &lifted, &fine).to_f64());
        prop_assert!(rel_diff(m0, m1) <= 1e-12);
        prop_assert!(rel_diff(norm(&phi, &f, &s), norm(&phi, &lifted, &fine)) <= 1e-9);
        prop_assert!(rel_diff(s.total_mass(), fine.total_mass()) <= 1e-15);
    }
}

#[test]
fn zero_function_has_zero_norm() {
    let (s, _, _) = sample(1, 3, 3);
    let phi = YoungFunction::power(2.0, true).unwrap();
    assert_eq!(norm(&phi, &SimpleFunction::zero(), &s), 0.0);
}
