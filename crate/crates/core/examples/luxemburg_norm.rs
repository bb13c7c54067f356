//! Modular and Luxemburg norm of a simple function, with the bisection
//! certificate.

use orlicz_mce::{luxemburg_norm, modular, MeasureSpace, SimpleFunction, YoungFunction};

fn main() -> orlicz_mce::Result<()> {
    let space = MeasureSpace::new([("A1", 0.5), ("A2", 0.25)], [("B", 1.0)])?;
    let f = SimpleFunction::from_values([("A1", 3.0), ("A2", -1.0), ("B", 0.5)]);

    for phi in [YoungFunction::power(2.0, false)?, YoungFunction::power(3.0, true)?, YoungFunction::exp_growth()] {
        let n = luxemburg_norm(&phi, &f, &space)?;
        println!(
            "Φ = {phi}: I_Φ(f) = {}, ‖f‖ = {:.12} in [{:.12}, {:.12}] after {} steps",
            modular(&phi, &f, &space),
            n.value,
            n.bracket.0,
            n.bracket.1,
            n.iterations
        );
    }

    // with Φ = |x|² the norm is the L² norm
    let l2: f64 = [(3.0f64, 0.5), (1.0, 0.25), (0.5, 1.0)].iter().map(|(v, m)| v * v * m).sum::<f64>().sqrt();
    println!("L² norm by hand: {l2:.12}");

    // refining the non-atomic cell changes nothing
    let fine = space.refine("B")?;
    let lifted = fine.lift_function(&f);
    let phi = YoungFunction::power(2.0, false)?;
    println!("after refining B: {:.12}", luxemburg_norm(&phi, &lifted, &fine)?.value);
    Ok(())
}
