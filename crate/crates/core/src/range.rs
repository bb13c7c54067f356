//! Zero / finite-rank / closed-range classification of MCE operators via the
//! support index set `E = {n : E(Φ*(u))(A_n) ≠ 0}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::grid::InequalityReport;
use crate::mce::{CheckOptions, MceOperator, OperatorFamily};
use crate::measure::SimpleFunction;
use crate::orlicz::{luxemburg_norm, membership_trend, Membership};
use crate::young::{check_delta2, check_product_premise, require, YoungFunction};

/// Which characterization to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// `Ψ(xy) <= Φ(x) + Θ(y)` and `u ∈ L^Θ`; support of `E(Φ*(u))`.
    Thm41,
    /// `Φ(xy) <= Ψ(x) + Θ(y)` and `1/E(u) ∈ L^Θ`; support of `E(u)`.
    Thm42,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Zero,
    FiniteRankClosed,
    /// The support set keeps growing with the truncation.
    DivergingSupport,
    /// The support meets the non-atomic part, so the finite-support
    /// characterization fails.
    NonatomicSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rank {
    Finite(usize),
    InfiniteTrend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportTrend {
    pub n: usize,
    pub count_n: usize,
    pub count_2n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub mode: RangeMode,
    /// Atom ids in the support set `E`.
    pub support_set_e: Vec<String>,
    /// 1-based atom positions of `E`.
    pub support_indices: Vec<usize>,
    pub nonatomic_support_mass: f64,
    pub rank: Rank,
    pub classification: Classification,
    pub premises_checked: Vec<String>,
    pub trend: Option<SupportTrend>,
}

fn support_function(op: &MceOperator, mode: RangeMode) -> SimpleFunction {
    match mode {
        RangeMode::Thm41 => op.u().abs().compose(&op.source().complementary()),
        RangeMode::Thm42 => op.u().abs(),
    }
}

/// `(atom ids, 1-based indices, non-atomic support mass)` of the support of
/// `E(h)`, with `h` as selected by `mode`.
fn support_of(op: &MceOperator, mode: RangeMode) -> Result<(Vec<String>, Vec<usize>, f64)> {
    let e = op.expectation();
    let alg = e.algebra();
    let support = e.block_support(&support_function(op, mode));
    let mut ids = Vec::new();
    let mut idx = Vec::new();
    for (k, atom) in op.space().atoms().enumerate() {
        let b = alg.block_of(&atom.id).expect("covered");
        if alg.block_ids(b).len() != 1 {
            return Err(Error::Precondition(format!(
                "atom `{}` shares block `{}` with other cells",
                atom.id,
                alg.block_name(b)
            )));
        }
        if support.contains(&b) {
            ids.push(atom.id.clone());
            idx.push(k + 1);
        }
    }
    let mass = op
        .space()
        .nonatomic_cells()
        .filter(|c| support.contains(&alg.block_of(&c.id).expect("covered")))
        .map(|c| c.mass)
        .sum();
    Ok((ids, idx, mass))
}

/// `1/E(|u|)` on the support of `E(|u|)`, zero elsewhere.
fn reciprocal_mean(op: &MceOperator) -> Result<SimpleFunction> {
    let e = op.expectation();
    let vals = e.block_values(&op.u().abs());
    let support = e.block_support(&op.u().abs());
    let mut out = Vec::with_capacity(vals.len());
    for (b, v) in vals.iter().enumerate() {
        if !support.contains(&b) {
            out.push(ExtendedReal::ZERO);
            continue;
        }
        let r = 1.0 / v.to_f64();
        if !r.is_finite() {
            return Err(Error::DivisionDegenerate(format!(
                "E(u) = {} on block `{}` has no finite reciprocal",
                v,
                e.algebra().block_name(b)
            )));
        }
        out.push(ExtendedReal::Finite(r));
    }
    Ok(e.spread(&out))
}

fn check_integrability(
    family: &dyn OperatorFamily,
    theta: &YoungFunction,
    what: &str,
    f: impl Fn(&MceOperator) -> Result<SimpleFunction>,
) -> Result<()> {
    let op = family.at(None)?;
    let g = f(&op)?;
    let norm = luxemburg_norm(theta, &g, op.space()).map_err(|_| Error::premise(what, vec![], f64::INFINITY))?;
    if let Some(n) = family.truncation() {
        let t = membership_trend(theta, n, |t| {
            let op = family.at(Some(t))?;
            let g = f(&op)?;
            Ok((op.space().clone(), g))
        })?;
        if t.verdict == Membership::Diverging {
            return Err(Error::premise(what, vec![n as f64], norm.value));
        }
    }
    Ok(())
}

/// Classifies the operator and reports the support set `E`.
pub fn classify(
    family: &dyn OperatorFamily,
    theta: &YoungFunction,
    mode: RangeMode,
    opts: &CheckOptions,
) -> Result<RangeReport> {
    let op = family.at(None)?;
    let (phi, psi) = (op.source(), op.target());
    let mut premises = Vec::new();
    match mode {
        RangeMode::Thm41 => {
            require(check_product_premise(psi, phi, theta, &opts.grid), "Ψ(xy) <= Φ(x) + Θ(y)")?;
            premises.push("Ψ(xy) <= Φ(x) + Θ(y)".to_string());
            for (name, f) in [("Ψ", psi), ("Θ", theta)] {
                let ev = check_delta2(f, opts.evidence_range.0, opts.evidence_range.1);
                if !ev.holds() {
                    return Err(Error::premise(format!("{name} satisfies Δ₂"), ev.worst_point, ev.constant.to_f64()));
                }
                premises.push(format!("{name} ∈ Δ₂ (evidence)"));
            }
            check_integrability(family, theta, "u ∈ L^Θ", |op| Ok(op.u().abs()))?;
            premises.push("u ∈ L^Θ".to_string());
        }
        RangeMode::Thm42 => {
            require(check_product_premise(phi, psi, theta, &opts.grid), "Φ(xy) <= Ψ(x) + Θ(y)")?;
            premises.push("Φ(xy) <= Ψ(x) + Θ(y)".to_string());
            check_integrability(family, theta, "1/E(u) ∈ L^Θ", reciprocal_mean)?;
            premises.push("1/E(u) ∈ L^Θ".to_string());
        }
    }
    let (ids, idx, b_mass) = support_of(&op, mode)?;
    let trend = match family.truncation() {
        Some(n) => {
            let (ids2, _, _) = support_of(&family.at(Some(2 * n))?, mode)?;
            Some(SupportTrend {
                n,
                count_n: ids.len(),
                count_2n: ids2.len(),
            })
        }
        None => None,
    };
    let diverging = trend.as_ref().is_some_and(|t| t.count_2n > t.count_n);
    let (classification, rank) = if b_mass > 0.0 {
        (Classification::NonatomicSupport, Rank::InfiniteTrend)
    } else if ids.is_empty() && !diverging {
        (Classification::Zero, Rank::Finite(0))
    } else if diverging {
        (Classification::DivergingSupport, Rank::InfiniteTrend)
    } else {
        (Classification::FiniteRankClosed, Rank::Finite(ids.len()))
    };
    Ok(RangeReport {
        mode,
        support_set_e: ids,
        support_indices: idx,
        nonatomic_support_mass: b_mass,
        rank,
        classification,
        premises_checked: premises,
        trend,
    })
}

/// Numerical rank of `f ↦ E(uf)` on the materialized cells: singular values
/// above `1e-10·σ_max`.
pub fn numeric_rank(op: &MceOperator) -> usize {
    let cells = op.space().cells();
    let n = cells.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (j, c) in cells.iter().enumerate() {
        let col = op.apply(&SimpleFunction::from_values([(c.id.as_str(), 1.0)]));
        for (i, r) in cells.iter().enumerate() {
            m[(i, j)] = col.get(&r.id);
        }
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > 1e-10 * max).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSumReport {
    pub mode: RangeMode,
    /// The per-atom supremum `C`.
    pub c: f64,
    pub support_count: usize,
    /// `Σ_{n∈E} Θ(·)·μ(A_n)`.
    pub theta_sum: ExtendedReal,
    /// `1 <= Θ(·)·μ(A_n)` for every `n ∈ E`.
    pub per_atom: InequalityReport,
    pub vacuous: bool,
}

impl TailSumReport {
    pub fn passed(&self) -> bool {
        self.vacuous
            || (self.per_atom.passed()
                && ExtendedReal::Finite(self.support_count as f64) <= self.theta_sum * (1.0 + 1e-9))
    }
}

/// The finiteness certificate for `E`: with `C` the supremum of the
/// per-atom quantity, `1 <= Θ(C·E(u)(A_n))μ(A_n)` (thm41) or
/// `1 <= Θ(C/E(u)(A_n))μ(A_n)` (thm42), and `|E|` is at most their sum.
pub fn tail_sum_check(op: &MceOperator, theta: &YoungFunction, mode: RangeMode) -> Result<TailSumReport> {
    let (ids, _, _) = support_of(op, mode)?;
    let e = op.expectation();
    let means = e.block_values(&op.u().abs());
    let rows: Vec<(f64, f64)> = ids
        .iter()
        .map(|id| {
            let b = e.algebra().block_of(id).expect("covered");
            (means[b].to_f64(), op.space().mass(id).expect("atom"))
        })
        .collect();
    let mut per_atom = InequalityReport::new("tail_sum_per_atom", 1e-9);
    if rows.is_empty() {
        return Ok(TailSumReport {
            mode,
            c: 0.0,
            support_count: 0,
            theta_sum: ExtendedReal::ZERO,
            per_atom,
            vacuous: true,
        });
    }
    let c = rows
        .iter()
        .map(|&(eu, m)| {
            let inv = theta.generalized_inverse(1.0 / m);
            match mode {
                RangeMode::Thm41 => inv / eu,
                RangeMode::Thm42 => eu * inv,
            }
        })
        .fold(0.0, f64::max);
    let mut sum = ExtendedReal::ZERO;
    for &(eu, m) in &rows {
        let arg = match mode {
            RangeMode::Thm41 => c * eu,
            RangeMode::Thm42 => c / eu,
        };
        let term = theta.evaluate(arg) * m;
        per_atom.record(&[eu, m], 1.0, term.to_f64(), 1.0);
        sum = sum + term;
    }
    Ok(TailSumReport {
        mode,
        c,
        support_count: rows.len(),
        theta_sum: sum,
        per_atom,
        vacuous: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::ConditionalExpectation;
    use crate::measure::MeasureSpace;

    fn sq() -> YoungFunction {
        YoungFunction::power(2.0, true).unwrap()
    }

    fn five_atoms(u: [f64; 5]) -> MceOperator {
        let space = MeasureSpace::new(
            (1..=5).map(|k| (format!("A{k}"), 1.0 / k as f64)),
            Vec::<(String, f64)>::new(),
        )
        .unwrap();
        let u = SimpleFunction::from_values((1..=5).map(|k| (format!("A{k}"), u[k - 1])));
        MceOperator::new(u, ConditionalExpectation::identity(space), sq(), sq())
    }

    #[test]
    fn classify_examples() {
        let opts = CheckOptions::default();
        // Φ = Ψ = x²/2 forces Θ = 0 on [0, 1] up to a linear piece, ∞ beyond
        let theta = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
        let r = classify(&five_atoms([0.0; 5]), &theta, RangeMode::Thm42, &opts).unwrap();
        assert_eq!(r.classification, Classification::Zero);
        assert_eq!(r.rank, Rank::Finite(0));
        let op = five_atoms([1.5, 0.0, 2.0, 0.0, 0.0]);
        let r = classify(&op, &theta, RangeMode::Thm42, &opts).unwrap();
        assert_eq!(r.support_indices, vec![1, 3]);
        assert_eq!(r.rank, Rank::Finite(2));
        assert_eq!(r.classification, Classification::FiniteRankClosed);
        assert_eq!(numeric_rank(&op), 2);
    }

    #[test]
    fn numeric_rank_examples() {
        assert_eq!(numeric_rank(&five_atoms([0.0; 5])), 0);
        let space = MeasureSpace::new(Vec::<(String, f64)>::new(), (1..=4).map(|k| (format!("B{k}"), 0.25))).unwrap();
        let op = MceOperator::new(
            SimpleFunction::constant(&space, 1.0),
            ConditionalExpectation::identity(space),
            sq(),
            sq(),
        );
        assert_eq!(numeric_rank(&op), 4);
    }

    #[test]
    fn tail_sum_examples() {
        let theta = YoungFunction::power(2.0, false).unwrap();
        let r = tail_sum_check(&five_atoms([0.0; 5]), &theta, RangeMode::Thm41).unwrap();
        assert!(r.vacuous && r.passed());
        let space = MeasureSpace::new([("A1", 1.0)], Vec::<(String, f64)>::new()).unwrap();
        let op = MceOperator::new(
            SimpleFunction::constant(&space, 1.0),
            ConditionalExpectation::identity(space),
            sq(),
            sq(),
        );
        let r = tail_sum_check(&op, &theta, RangeMode::Thm41).unwrap();
        assert_eq!(r.c, 1.0);
        assert_eq!(r.theta_sum, ExtendedReal::Finite(1.0));
        assert!(r.passed());
    }

    #[test]
    fn shared_atom_block_is_rejected() {
        let space = MeasureSpace::new([("A1", 1.0), ("A2", 1.0)], Vec::<(String, f64)>::new()).unwrap();
        let alg = crate::measure::SubSigmaAlgebra::trivial(&space);
        let op = MceOperator::new(
            SimpleFunction::constant(&space, 1.0),
            ConditionalExpectation::new(space, alg).unwrap(),
            sq(),
            sq(),
        );
        assert!(matches!(tail_sum_check(&op, &sq(), RangeMode::Thm42), Err(Error::Precondition(_))));
    }
}
