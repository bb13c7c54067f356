//! Conditional expectation as block averaging, with its basic identities.

use std::collections::BTreeMap;

use orlicz_mce::{ConditionalExpectation, MeasureSpace, SimpleFunction, SubSigmaAlgebra, YoungFunction};

fn main() -> orlicz_mce::Result<()> {
    let space = MeasureSpace::new([("A1", 0.5), ("A2", 0.5)], [("B1", 1.0), ("B2", 2.0)])?;
    let blocks = BTreeMap::from([
        ("C".to_string(), vec!["A1".to_string(), "A2".to_string()]),
        ("D".to_string(), vec!["B1".to_string(), "B2".to_string()]),
    ]);
    let alg = SubSigmaAlgebra::new(&space, &blocks)?;
    let e = ConditionalExpectation::new(space.clone(), alg)?;

    let f = SimpleFunction::from_values([("A1", 2.0), ("A2", 4.0), ("B1", 3.0), ("B2", 0.0)]);
    let ef = e.apply(&f);
    println!("f    = {:?}", f.entries().collect::<Vec<_>>());
    println!("E(f) = {:?}", ef.entries().collect::<Vec<_>>());
    println!("∫f = {}, ∫E(f) = {}", f.integrate(&space), ef.integrate(&space));

    let g = SimpleFunction::from_values([("A1", 5.0), ("A2", 5.0), ("B1", -1.0), ("B2", -1.0)]);
    println!("E(fg) = E(f)g: {}", e.check_module_property(&f, &g)?.passed());

    let phi = YoungFunction::power(2.0, true)?;
    println!("Φ(E f) <= E(Φ f): {}", e.check_jensen(&f, &phi).passed());

    let lemma = e.check_support_lemma(&f, &phi)?;
    println!(
        "supp E(f) = supp E(Φ∘f): {}, supp f inside: {}",
        lemma.supports_equal, lemma.inclusion_holds
    );
    Ok(())
}
