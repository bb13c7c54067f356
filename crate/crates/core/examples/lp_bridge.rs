//! Power-type source and target: the closed-form Lᵖ → L^q criteria against
//! the general Young-function machinery.

use std::collections::BTreeMap;

use orlicz_mce::mce::{lp_bridge_check, CheckOptions, OperatorSpec};
use orlicz_mce::measure::{AtomsSpec, FunctionSpec, ParametricAtoms, SpaceSpec};
use orlicz_mce::YoungSpec;

fn family(mass: &str, u: &str) -> OperatorSpec {
    OperatorSpec {
        space: SpaceSpec {
            atoms: AtomsSpec::Parametric {
                parametric: ParametricAtoms {
                    mass_formula: mass.parse().unwrap(),
                    truncation: 16,
                },
            },
            nonatomic: Vec::new(),
            sigma_algebra: None,
        },
        u: FunctionSpec {
            formula: Some(u.parse().unwrap()),
            values: BTreeMap::new(),
        },
        source: YoungSpec::Power { p: 2.0, scaled: true },
        target: YoungSpec::Power { p: 2.0, scaled: true },
    }
}

fn main() -> orlicz_mce::Result<()> {
    let opts = CheckOptions::default();
    let cases = [
        ("2^-n", "2^(-n/2)", 2.0, 4.0),
        ("2^-n", "1", 2.0, 4.0),
        ("2^-n", "1", 4.0, 2.0),
        ("1/n^2", "n", 4.0, 2.0),
    ];
    for (mass, u, p, q) in cases {
        let r = lp_bridge_check(&family(mass, u), p, q, &opts)?;
        println!(
            "μ = {mass:<6} u = {u:<9} p = {p}, q = {q}: closed {:?}, generic {:?}, rel diff {:.1e}",
            r.closed_form.verdict, r.generic.verdict, r.max_rel_diff
        );
    }
    Ok(())
}
