//! Necessary and sufficient boundedness criteria for `f ↦ E(uf)` on a
//! parametric family of atoms, with truncation trends.

use std::collections::BTreeMap;

use orlicz_mce::mce::{
    estimate_gch_constant, random_pairs, thm32_check, thm34_check, thm36_converse_check, thm36_forward_check,
    CheckOptions, OperatorFamily, OperatorSpec,
};
use orlicz_mce::measure::{AtomsSpec, FunctionSpec, ParametricAtoms, SpaceSpec};
use orlicz_mce::{CriterionReport, YoungFunction, YoungSpec};

fn family(u: &str, source: f64, target: f64) -> OperatorSpec {
    OperatorSpec {
        space: SpaceSpec {
            atoms: AtomsSpec::Parametric {
                parametric: ParametricAtoms {
                    mass_formula: "2^-n".parse().unwrap(),
                    truncation: 20,
                },
            },
            nonatomic: Vec::new(),
            sigma_algebra: None,
        },
        u: FunctionSpec {
            formula: Some(u.parse().unwrap()),
            values: BTreeMap::new(),
        },
        source: YoungSpec::Power { p: source, scaled: true },
        target: YoungSpec::Power { p: target, scaled: true },
    }
}

fn show(r: &CriterionReport) {
    let trend = r.trend.as_ref().map(|t| format!(", N={} → {}, 2N → {}", t.n, t.value_n, t.value_2n));
    if r.terms.is_empty() {
        let q: Vec<String> = r.quantities.iter().map(|(k, v)| format!("{k} = {v:.6}")).collect();
        println!("  {:<16} {:?}, {}{}", r.criterion, r.verdict, q.join(", "), trend.unwrap_or_default());
    } else {
        println!("  {:<16} {:?}, sup {:.6}{}", r.criterion, r.verdict, r.sup(), trend.unwrap_or_default());
    }
}

fn main() -> orlicz_mce::Result<()> {
    let opts = CheckOptions::default();
    for u in ["2^(-n/4)", "1"] {
        println!("u = {u}");
        // x²/2 → x⁴/4: x²y²/2 <= x⁴/4 + y⁴/4
        let up = family(u, 2.0, 4.0);
        show(&thm32_check(&up, &YoungFunction::power(4.0, true)?, &opts)?);
        let op = up.at(None)?;
        let c = estimate_gch_constant(op.expectation(), op.source(), &random_pairs(op.space(), &opts))?.c_hat;
        show(&thm34_check(&up, c, &opts)?);
        // x⁴/4 → x²/2: (4x)^{1/4}·x^{1/4} = (2x)^{1/2}
        let down = family(u, 4.0, 2.0);
        show(&thm36_forward_check(&down, &YoungFunction::power(4.0, false)?, &opts)?);
        show(&thm36_converse_check(&down, &opts)?);
    }
    Ok(())
}
