//! When Ψ is not dominated by Φ, build `f ∈ L^Φ` on the non-atomic part with
//! `E(uf) ∉ L^Ψ` and certify it from partial sums. Prints the plot-ready dump.

use orlicz_mce::witness::{build_witness, certify_divergence, WitnessDump};
use orlicz_mce::{MeasureSpace, YoungFunction};

fn main() -> orlicz_mce::Result<()> {
    let phi = YoungFunction::power(2.0, false)?;
    let psi = YoungFunction::power(4.0, false)?;
    let space = MeasureSpace::new([("A1", 0.5)], [("F", 1.0)])?;

    let ws = build_witness(&phi, &psi, &space, &["F".to_string()], 24)?;
    let op = ws.identity_operator(&phi, &psi);
    let cert = certify_divergence(&ws, &op, 1.0)?;

    eprintln!("cells after carving: {}", ws.space.cells().len());
    eprintln!("I_Φ(f) ≈ {:.6}", cert.phi_partial.last().unwrap());
    eprintln!("I_Ψ(E(uf)) >= {:.3e} and growing by {}", cert.harmonic_bound, cert.ratio);
    eprintln!("certified: {}", cert.certified());
    println!("{}", serde_json::to_string_pretty(&WitnessDump::new(&ws, &cert)).unwrap());
    Ok(())
}
