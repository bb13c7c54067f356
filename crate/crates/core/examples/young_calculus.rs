//! Young functions: values, conjugates, inverses and growth evidence.

use orlicz_mce::grid::Grid;
use orlicz_mce::young::{
    check_delta2, check_delta_prime, check_eq12, check_lemma_l2, check_nabla_prime, dominance, DominanceConfig,
    DominanceMode,
};
use orlicz_mce::YoungFunction;

fn main() -> orlicz_mce::Result<()> {
    let families = [
        YoungFunction::power(2.0, true)?,
        YoungFunction::power(3.0, false)?,
        YoungFunction::exp_growth(),
        YoungFunction::piecewise_linear(&[[1.0, 1.0], [2.0, 3.0]], Some(4.0))?,
    ];
    for phi in &families {
        let conj = phi.complementary();
        println!("Φ = {phi}   a = {}, b = {}", phi.a_phi(), phi.b_phi());
        for x in [0.5, 1.0, 2.0] {
            println!(
                "  x = {x}: Φ = {}, Φ* = {}, Φ⁻¹ = {:.6}",
                phi.evaluate(x),
                conj.evaluate(x),
                phi.generalized_inverse(x)
            );
        }
        for ev in [
            check_delta2(phi, 0.0, 1e6),
            check_delta_prime(phi, 0.0, 1e6),
            check_nabla_prime(phi, 0.0, 1e6),
        ] {
            println!("  {}: {:?} (constant {})", ev.condition, ev.verdict, ev.constant);
        }
        let eq12 = check_eq12(phi, &Grid::decades(1e-3, 1e3, 4));
        println!("  x < Φ⁻¹(x)Φ*⁻¹(x) <= 2x: {} on {} points", eq12.passed(), eq12.checked);
    }

    let sq = YoungFunction::power(2.0, false)?;
    let quartic = YoungFunction::power(4.0, false)?;
    let cfg = DominanceConfig::default();
    println!("x⁴ dominates x² at ∞: {}", dominance(&quartic, &sq, DominanceMode::AtInfinity, &cfg).holds());
    println!("x² dominates x⁴ at ∞: {}", dominance(&sq, &quartic, DominanceMode::AtInfinity, &cfg).holds());

    // x²y²/2 <= x⁴/4 + y⁴/4
    let half_sq = YoungFunction::power(2.0, true)?;
    let q4 = YoungFunction::power(4.0, true)?;
    let l2 = check_lemma_l2(&half_sq, &q4, &q4, &Grid::decades(1e-3, 1e3, 5))?;
    println!("Ψ⁻¹Θ⁻¹ <= 2Φ⁻¹ on samples: {}", l2.inverse_bound.passed());
    Ok(())
}
