//! Conditional expectation onto a partition sub-σ-algebra.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::grid::InequalityReport;
use crate::measure::{MeasureSpace, SimpleFunction, SubSigmaAlgebra};
use crate::numeric::CompensatedSum;
use crate::young::YoungFunction;

const CHECK_TOL: f64 = 1e-9;

/// `E = E^𝒜`: on each block `C`, `E(f) = ∫_C f dμ / μ(C)`.
#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    space: MeasureSpace,
    algebra: SubSigmaAlgebra,
    block_mass: Vec<f64>,
}

impl ConditionalExpectation {
    pub fn new(space: MeasureSpace, algebra: SubSigmaAlgebra) -> Result<Self> {
        for c in space.cells() {
            if algebra.block_of(&c.id).is_none() {
                return Err(Error::InvalidAlgebra(format!("cell `{}` is not in any block", c.id)));
            }
        }
        let block_mass = (0..algebra.len())
            .map(|b| space.measure(algebra.block_ids(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConditionalExpectation {
            space,
            algebra,
            block_mass,
        })
    }

    /// The identity expectation (every cell its own block).
    pub fn identity(space: MeasureSpace) -> Self {
        let algebra = SubSigmaAlgebra::identity(&space);
        ConditionalExpectation::new(space, algebra).expect("identity partition covers the space")
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn algebra(&self) -> &SubSigmaAlgebra {
        &self.algebra
    }

    pub fn block_mass(&self, b: usize) -> f64 {
        self.block_mass[b]
    }

    /// Block averages in block order; a block containing `+∞` averages to `∞`.
    pub fn block_values(&self, f: &SimpleFunction) -> Vec<ExtendedReal> {
        (0..self.algebra.len())
            .map(|b| {
                let mut sum = CompensatedSum::default();
                for id in self.algebra.block_ids(b) {
                    let v = f.get(id);
                    if v != 0.0 {
                        let m = self.space.mass(id).expect("block ids belong to the space");
                        sum.add(ExtendedReal::from_f64(v) * m);
                    }
                }
                match sum.total() {
                    ExtendedReal::Finite(s) => ExtendedReal::Finite(s / self.block_mass[b]),
                    ExtendedReal::Infinite => ExtendedReal::Infinite,
                }
            })
            .collect()
    }

    /// `E(f)` as a function on cells.
    pub fn apply(&self, f: &SimpleFunction) -> SimpleFunction {
        self.spread(&self.block_values(f))
    }

    /// Turns per-block values into a block-constant function on cells.
    pub fn spread(&self, values: &[ExtendedReal]) -> SimpleFunction {
        SimpleFunction::from_values(self.space.cells().iter().map(|c| {
            let b = self.algebra.block_of(&c.id).expect("covered");
            (c.id.clone(), values[b].to_f64())
        }))
    }

    /// Block indices where `|E(f)| > ε`, with `ε` taken from `E(f)` itself.
    pub fn block_support(&self, f: &SimpleFunction) -> BTreeSet<usize> {
        let vals = self.block_values(f);
        let max = vals.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        let eps = 1e-12 * if max.is_finite() { max.max(1.0) } else { 1.0 };
        vals.iter()
            .enumerate()
            .filter(|(_, v)| v.to_f64().abs() > eps)
            .map(|(b, _)| b)
            .collect()
    }

    /// Blocks meeting the cell-level support of `f`.
    pub fn blocks_meeting(&self, f: &SimpleFunction) -> BTreeSet<usize> {
        f.support()
            .iter()
            .filter_map(|id| self.algebra.block_of(id))
            .collect()
    }

    /// `E(fg) = E(f)·g` for block-constant `g`.
    pub fn check_module_property(&self, f: &SimpleFunction, g: &SimpleFunction) -> Result<InequalityReport> {
        if !self.algebra.is_measurable(g, 0.0) {
            return Err(Error::NotMeasurable("g is not constant on the blocks of the algebra".into()));
        }
        let lhs = self.apply(&f.mul(g));
        let rhs = self.apply(f).mul(g);
        let mut report = InequalityReport::new("module_property", CHECK_TOL);
        for c in self.space.cells() {
            let (l, r) = (lhs.get(&c.id), rhs.get(&c.id));
            let scale = f.max_abs() * g.max_abs();
            report.record(&[], (l - r).abs(), 0.0, scale);
        }
        Ok(report)
    }

    /// Jensen: `Φ(E(f)) <= E(Φ(f))` on every block.
    pub fn check_jensen(&self, f: &SimpleFunction, phi: &YoungFunction) -> InequalityReport {
        let ef = self.block_values(f);
        let ephi = self.block_values(&f.compose(phi));
        let mut report = InequalityReport::new("jensen", CHECK_TOL);
        for (b, (m, mphi)) in ef.iter().zip(&ephi).enumerate() {
            let lhs = phi.evaluate(m.to_f64()).to_f64();
            let rhs = mphi.to_f64();
            report.record(&[b as f64], lhs, rhs, rhs);
        }
        report
    }

    /// `S(E(f)) = S(E(Φ(f)))` and `S(f) ⊆ S(E(f))` as block sets, for
    /// `f >= 0` and `Φ` vanishing only at zero.
    pub fn check_support_lemma(&self, f: &SimpleFunction, phi: &YoungFunction) -> Result<SupportLemmaReport> {
        if phi.a_phi() > 0.0 {
            return Err(Error::Precondition(format!(
                "support lemma needs Φ vanishing only at zero, got a_Φ = {}",
                phi.a_phi()
            )));
        }
        if f.entries().any(|(_, v)| v < 0.0) {
            return Err(Error::Precondition("support lemma needs f >= 0".into()));
        }
        let name = |s: BTreeSet<usize>| -> Vec<String> {
            s.into_iter().map(|b| self.algebra.block_name(b).to_string()).collect()
        };
        let s_ef = self.block_support(f);
        let s_ephi = self.block_support(&f.compose(phi));
        let s_f = self.blocks_meeting(f);
        Ok(SupportLemmaReport {
            supports_equal: s_ef == s_ephi,
            inclusion_holds: s_f.is_subset(&s_ef),
            support_e_f: name(s_ef),
            support_e_phi_f: name(s_ephi),
            support_f_blocks: name(s_f),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportLemmaReport {
    pub support_e_f: Vec<String>,
    pub support_e_phi_f: Vec<String>,
    pub support_f_blocks: Vec<String>,
    pub supports_equal: bool,
    pub inclusion_holds: bool,
}

impl SupportLemmaReport {
    pub fn passed(&self) -> bool {
        self.supports_equal && self.inclusion_holds
    }
}
