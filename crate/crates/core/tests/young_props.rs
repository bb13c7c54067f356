use orlicz_mce::grid::Grid;
use orlicz_mce::young::{check_delta2, check_eq12, check_inverse_sandwich, check_young_inequality, dominance,
    DominanceConfig, DominanceMode};
use orlicz_mce::{ExtendedReal, YoungFunction, YoungSpec};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) }
}

/// sup_x (xy - x^p) at x = (y/p)^{1/(p-1)}.
fn unscaled_power_conjugate(p: f64, y: f64) -> f64 {
    y * (1.0 - 1.0 / p) * (y / p).powf(1.0 / (p - 1.0))
}

/// sup_x (xy - e^x + x + 1) at x = ln(1 + y).
fn exp_growth_conjugate(y: f64) -> f64 {
    (1.0 + y) * (1.0 + y).ln() - y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_conjugate_matches_numeric(p in 1.1f64..6.0, y in 1e-3f64..1e3) {
        let phi = YoungFunction::power(p, true).unwrap();
        let closed = phi.complementary().evaluate(y).to_f64();
        let numeric = phi.numeric_complementary().evaluate(y).to_f64();
        prop_assert!(rel(closed, numeric) <= 1e-9, "{closed} vs {numeric}");
    }

    #[test]
    fn unscaled_conjugate_matches_oracle(p in 1.2f64..5.0, y in 1e-2f64..1e2) {
        let phi = YoungFunction::power(p, false).unwrap();
        let got = phi.complementary().evaluate(y).to_f64();
        prop_assert!(rel(got, unscaled_power_conjugate(p, y)) <= 1e-9);
    }

    #[test]
    fn exp_growth_conjugate_matches_oracle(y in 1e-2f64..1e3) {
        let got = YoungFunction::exp_growth().complementary().evaluate(y).to_f64();
        prop_assert!(rel(got, exp_growth_conjugate(y)) <= 1e-9);
    }

    #[test]
    fn biconjugate_recovers_function(p in 1.2f64..4.0, x in 1e-2f64..1e2, scaled in any::<bool>()) {
        let phi = YoungFunction::power(p, scaled).unwrap();
        let bi = phi.numeric_complementary().numeric_complementary();
        prop_assert!(rel(bi.evaluate(x).to_f64(), phi.evaluate(x).to_f64()) <= 1e-6);
    }

    #[test]
    fn young_inequality_pointwise(p in 1.05f64..8.0, x in 1e-3f64..1e3, y in 1e-3f64..1e3) {
        let phi = YoungFunction::power(p, true).unwrap();
        let rhs = phi.evaluate(x).to_f64() + phi.complementary().evaluate(y).to_f64();
        prop_assert!(x * y <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn inverse_is_monotone_and_right_inverse(p in 1.0f64..6.0, a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
        let phi = YoungFunction::power(p, false).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(phi.generalized_inverse(lo) <= phi.generalized_inverse(hi));
        let x = phi.generalized_inverse(a);
        prop_assert!(rel(phi.evaluate(x).to_f64(), a) <= 1e-12);
    }

    #[test]
    fn eq12_sandwich_pointwise(p in 1.1f64..6.0, x in 1e-3f64..1e3) {
        let phi = YoungFunction::power(p, true).unwrap();
        let prod = phi.generalized_inverse(x) * phi.complementary().generalized_inverse(x);
        prop_assert!(x < prod && prod <= 2.0 * x * (1.0 + 1e-12));
    }

    #[test]
    fn spec_round_trip(p in 1.0f64..9.0, scaled in any::<bool>()) {
        let phi = YoungFunction::power(p, scaled).unwrap();
        let json = serde_json::to_string(&phi.to_spec()).unwrap();
        let back: YoungSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, phi.to_spec());
    }
}

#[test]
fn delta2_constant_of_powers() {
    for p in [1.0, 2.0, 3.5] {
        let ev = check_delta2(&YoungFunction::power(p, true).unwrap(), 0.0, 1e6);
        assert!(ev.holds());
        assert!(rel(ev.constant.to_f64(), 2f64.powf(p)) <= 1e-9, "p = {p}: {:?}", ev.constant);
    }
    assert!(!check_delta2(&YoungFunction::exp_growth(), 0.0, 1e6).holds());
}

#[test]
fn suites_pass_on_exp_growth() {
    let grid = Grid::decades(1e-3, 1e3, 4);
    let phi = YoungFunction::exp_growth();
    assert!(check_young_inequality(&phi, &grid).passed());
    assert!(check_eq12(&phi, &grid).passed());
    assert!(check_inverse_sandwich(&phi, &grid).passed());
}

#[test]
fn dominance_between_powers() {
    let cfg = DominanceConfig::default();
    let sq = YoungFunction::power(2.0, false).unwrap();
    let quartic = YoungFunction::power(4.0, false).unwrap();
    assert!(dominance(&quartic, &sq, DominanceMode::AtInfinity, &cfg).holds());
    assert!(!dominance(&sq, &quartic, DominanceMode::AtInfinity, &cfg).holds());
}

#[test]
fn cutoff_function_is_infinite_beyond_b() {
    let phi = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
    assert_eq!(phi.b_phi(), 1.0);
    assert_eq!(phi.evaluate(1.5), ExtendedReal::Infinite);
    assert_eq!(phi.generalized_inverse(10.0), 1.0);
}
