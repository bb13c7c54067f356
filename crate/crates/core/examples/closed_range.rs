//! Zero / finite-rank / closed-range classification through the support set
//! `E`, cross-checked against the numerical rank.

use orlicz_mce::mce::CheckOptions;
use orlicz_mce::range::{classify, numeric_rank, tail_sum_check, RangeMode};
use orlicz_mce::{ConditionalExpectation, MceOperator, MeasureSpace, SimpleFunction, YoungFunction};

fn main() -> orlicz_mce::Result<()> {
    let space = MeasureSpace::new(
        [("A1", 0.5), ("A2", 0.25), ("A3", 0.125), ("A4", 0.125)],
        Vec::<(String, f64)>::new(),
    )?;
    let phi = YoungFunction::power(4.0, true)?;
    let psi = YoungFunction::power(2.0, true)?;
    // x²y²/2 <= x⁴/4 + y⁴/4
    let theta = YoungFunction::power(4.0, true)?;

    for u in [
        SimpleFunction::zero(),
        SimpleFunction::from_values([("A1", 1.0), ("A3", 2.0)]),
        SimpleFunction::constant(&space, 0.5),
    ] {
        let op = MceOperator::new(u, ConditionalExpectation::identity(space.clone()), phi.clone(), psi.clone());
        let r = classify(&op, &theta, RangeMode::Thm41, &CheckOptions::default())?;
        let tail = tail_sum_check(&op, &theta, RangeMode::Thm41)?;
        println!(
            "E = {:?}: {:?}, rank {:?} (numerical {}), |E| <= Θ-sum {}: {}",
            r.support_set_e,
            r.classification,
            r.rank,
            numeric_rank(&op),
            tail.theta_sum,
            tail.passed()
        );
    }
    Ok(())
}
