#![allow(dead_code)]

use std::collections::BTreeMap;

use orlicz_mce::{MeasureSpace, SimpleFunction, SubSigmaAlgebra};
use rand::Rng;

/// Random space with `atoms` atoms `a0..` and `nonatomic` cells `b0..`.
pub fn random_space(rng: &mut impl Rng, atoms: usize, nonatomic: usize) -> MeasureSpace {
    let a: Vec<(String, f64)> = (0..atoms).map(|i| (format!("a{i}"), rng.gen_range(0.01..2.0))).collect();
    let b: Vec<(String, f64)> = (0..nonatomic).map(|i| (format!("b{i}"), rng.gen_range(0.01..2.0))).collect();
    MeasureSpace::new(a, b).unwrap()
}

/// Random partition of the cells into at most `max_blocks` blocks.
pub fn random_algebra(rng: &mut impl Rng, space: &MeasureSpace, max_blocks: usize) -> SubSigmaAlgebra {
    let mut blocks: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for c in space.cells() {
        let b = rng.gen_range(0..max_blocks.max(1));
        blocks.entry(format!("C{b}")).or_default().push(c.id.clone());
    }
    SubSigmaAlgebra::new(space, &blocks).unwrap()
}

/// Values in `[lo, hi)` on every cell, with roughly a quarter of them zero.
pub fn random_values(rng: &mut impl Rng, space: &MeasureSpace, lo: f64, hi: f64) -> SimpleFunction {
    SimpleFunction::from_values(space.cells().iter().map(|c| {
        let v = if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(lo..hi) };
        (c.id.clone(), v)
    }))
}

/// Block-constant random function.
pub fn random_measurable(rng: &mut impl Rng, alg: &SubSigmaAlgebra, lo: f64, hi: f64) -> SimpleFunction {
    let mut f = SimpleFunction::zero();
    for b in 0..alg.len() {
        let v = rng.gen_range(lo..hi);
        for id in alg.block_ids(b) {
            f.set(id, v);
        }
    }
    f
}

/// `(Σ|f|^p μ)^{1/p}` summed in plain order.
pub fn lp_norm(f: &SimpleFunction, space: &MeasureSpace, p: f64) -> f64 {
    space.cells().iter().map(|c| f.get(&c.id).abs().powf(p) * c.mass).sum::<f64>().powf(1.0 / p)
}

/// Block averages computed directly from the definition.
pub fn average_oracle(f: &SimpleFunction, space: &MeasureSpace, alg: &SubSigmaAlgebra) -> SimpleFunction {
    let mut out = SimpleFunction::zero();
    for b in 0..alg.len() {
        let ids = alg.block_ids(b);
        let mass: f64 = ids.iter().map(|id| space.mass(id).unwrap()).sum();
        let int: f64 = ids.iter().map(|id| f.get(id) * space.mass(id).unwrap()).sum();
        for id in ids {
            out.set(id, int / mass);
        }
    }
    out
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
