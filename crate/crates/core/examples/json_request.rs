//! The batch interface: parse a JSON request, run it, print the summary and
//! the report.

use orlicz_mce::request::{parse_json, run_analysis, AnalysisRequest, Overrides};

const REQUEST: &str = r#"{
    "space": {
        "atoms": {"parametric": {"mass_formula": "2^-n", "N": 12}},
        "nonatomic": [{"id": "B", "mass": 1.0}]
    },
    "operator": {"u": {"formula": "1/n", "values": {"B": 0.0}}},
    "source": {"family": "power", "p": 2.0, "scaled": true},
    "target": {"family": "power", "p": 4.0, "scaled": true},
    "theta": {"family": "power", "p": 4.0, "scaled": true},
    "checks": ["thm32", "thm34", "lp_bridge"]
}"#;

fn main() -> orlicz_mce::Result<()> {
    let req: AnalysisRequest = parse_json(REQUEST)?;
    let report = run_analysis(&req, &Overrides { seed: Some(1), ..Overrides::default() })?;
    print!("{}", report.summary_table());

    let bad = REQUEST.replace("\"lp_bridge\"", "\"lp_brigde\"");
    if let Err(e) = parse_json::<AnalysisRequest>(&bad) {
        println!("{e}");
    }
    Ok(())
}
