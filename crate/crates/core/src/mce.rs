//! The multiplication conditional expectation operator `EM_u f = E(u f)` and
//! its boundedness criteria.
//!
//! Criteria over countable atom families are two-level: the exact supremum at
//! the materialized truncation `N`, plus a trend comparing `N` with `2N`
//! (growth by more than 5% reads as diverging).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectation::ConditionalExpectation;
use crate::extended::ExtendedReal;
use crate::grid::{Grid, InequalityReport};
use crate::measure::{FunctionSpec, MeasureSpace, SimpleFunction, SpaceSpec};
use crate::orlicz::{luxemburg_norm, membership_trend, modular, Membership, MembershipTrend};
use crate::young::{
    check_delta2, check_delta_prime, check_product_premise, require, GrowthEvidence, YoungFunction, YoungSpec,
};

/// Relative growth from `N` to `2N` above which a supremum reads as diverging.
pub const TREND_DELTA: f64 = 0.05;

/// `f ↦ E(u f)` from `L^Φ(Σ)` to `L^Ψ(𝒜)`.
#[derive(Clone, Debug)]
pub struct MceOperator {
    u: SimpleFunction,
    expectation: ConditionalExpectation,
    source: YoungFunction,
    target: YoungFunction,
}

impl MceOperator {
    pub fn new(
        u: SimpleFunction,
        expectation: ConditionalExpectation,
        source: YoungFunction,
        target: YoungFunction,
    ) -> Self {
        MceOperator {
            u,
            expectation,
            source,
            target,
        }
    }

    pub fn u(&self) -> &SimpleFunction {
        &self.u
    }

    pub fn expectation(&self) -> &ConditionalExpectation {
        &self.expectation
    }

    pub fn space(&self) -> &MeasureSpace {
        self.expectation.space()
    }

    /// `Φ`.
    pub fn source(&self) -> &YoungFunction {
        &self.source
    }

    /// `Ψ`.
    pub fn target(&self) -> &YoungFunction {
        &self.target
    }

    /// Same weight and expectation with other Young functions.
    pub fn with_functions(&self, source: YoungFunction, target: YoungFunction) -> Self {
        MceOperator {
            source,
            target,
            ..self.clone()
        }
    }

    pub fn apply(&self, f: &SimpleFunction) -> SimpleFunction {
        self.expectation.apply(&self.u.mul(f))
    }

    /// Per-block values of `E(h(|u|))`.
    fn block_values_of(&self, h: impl Fn(f64) -> f64) -> Vec<ExtendedReal> {
        self.expectation.block_values(&self.u.map(|v| h(v.abs())))
    }

    /// `(atom id, μ(A), block value)` for every atom, in atom order.
    fn atom_values<'a>(&'a self, vals: &'a [ExtendedReal]) -> impl Iterator<Item = (&'a str, f64, ExtendedReal)> + 'a {
        let alg = self.expectation.algebra();
        self.space().atoms().map(move |a| {
            let b = alg.block_of(&a.id).expect("covered");
            (a.id.as_str(), a.mass, vals[b])
        })
    }

    /// `max |v|` over blocks that meet the non-atomic part, and the threshold
    /// used to call it zero.
    fn nonatomic_max(&self, vals: &[ExtendedReal]) -> (ExtendedReal, f64) {
        let alg = self.expectation.algebra();
        let mut blocks: Vec<usize> = self.space().nonatomic_cells().filter_map(|c| alg.block_of(&c.id)).collect();
        blocks.sort_unstable();
        blocks.dedup();
        let max = blocks
            .iter()
            .map(|&b| vals[b])
            .fold(ExtendedReal::ZERO, ExtendedReal::max);
        let overall = vals.iter().map(|v| v.to_f64()).fold(0.0, f64::max);
        let eps = 1e-12 * if overall.is_finite() { overall.max(1.0) } else { 1.0 };
        (max, eps)
    }
}

/// Something that can produce an operator at a given truncation.
pub trait OperatorFamily {
    /// The base truncation `N`, or `None` for a fixed finite space.
    fn truncation(&self) -> Option<usize>;

    /// The operator at truncation `n` (`None`: the base truncation).
    fn at(&self, n: Option<usize>) -> Result<MceOperator>;
}

impl OperatorFamily for MceOperator {
    fn truncation(&self) -> Option<usize> {
        None
    }

    fn at(&self, _n: Option<usize>) -> Result<MceOperator> {
        Ok(self.clone())
    }
}

/// JSON description of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub space: SpaceSpec,
    pub u: FunctionSpec,
    pub source: YoungSpec,
    pub target: YoungSpec,
}

impl OperatorSpec {
    /// Overrides the truncation of a parametric space.
    pub fn with_truncation(mut self, n: usize) -> Self {
        if let crate::measure::AtomsSpec::Parametric { parametric } = &mut self.space.atoms {
            parametric.truncation = n;
        }
        self
    }
}

impl OperatorFamily for OperatorSpec {
    fn truncation(&self) -> Option<usize> {
        self.space.truncation()
    }

    fn at(&self, n: Option<usize>) -> Result<MceOperator> {
        let (space, algebra) = self.space.materialize(n)?;
        let u = self.u.materialize(&space)?;
        let e = ConditionalExpectation::new(space, algebra)?;
        Ok(MceOperator::new(
            u,
            e,
            YoungFunction::from_spec(&self.source)?,
            YoungFunction::from_spec(&self.target)?,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    Diverging,
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Trend(TrendKind),
    Inconclusive,
}

impl Verdict {
    pub fn is_conclusive(&self) -> bool {
        matches!(self, Verdict::Satisfied | Verdict::Violated)
    }

    /// Satisfied, or bounded along the truncation trend.
    pub fn is_favourable(&self) -> bool {
        matches!(self, Verdict::Satisfied | Verdict::Trend(TrendKind::Bounded))
    }
}

/// A quantity at truncations `N` and `2N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub n: usize,
    pub value_n: ExtendedReal,
    pub value_2n: ExtendedReal,
    pub ratio: ExtendedReal,
}

impl Trend {
    fn new(n: usize, value_n: ExtendedReal, value_2n: ExtendedReal) -> Self {
        let ratio = match (value_n, value_2n) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) if a > 0.0 => ExtendedReal::from_f64(b / a),
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) if a == 0.0 && b == 0.0 => ExtendedReal::Finite(1.0),
            _ => ExtendedReal::Infinite,
        };
        Trend {
            n,
            value_n,
            value_2n,
            ratio,
        }
    }

    pub fn kind(&self) -> TrendKind {
        if self.ratio > ExtendedReal::Finite(1.0 + TREND_DELTA) {
            TrendKind::Diverging
        } else {
            TrendKind::Bounded
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomTerm {
    pub atom: String,
    pub value: ExtendedReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub verdict: Verdict,
    pub truncation: Option<usize>,
    pub quantities: BTreeMap<String, ExtendedReal>,
    pub terms: Vec<AtomTerm>,
    pub trend: Option<Trend>,
    pub constants: BTreeMap<String, f64>,
    pub tolerance: f64,
}

impl CriterionReport {
    fn new(criterion: &str, truncation: Option<usize>, tolerance: f64) -> Self {
        CriterionReport {
            criterion: criterion.to_string(),
            verdict: Verdict::Inconclusive,
            truncation,
            quantities: BTreeMap::new(),
            terms: Vec::new(),
            trend: None,
            constants: BTreeMap::new(),
            tolerance,
        }
    }

    fn set(&mut self, key: &str, v: impl Into<ExtendedReal>) {
        self.quantities.insert(key.to_string(), v.into());
    }

    pub fn quantity(&self, key: &str) -> Option<ExtendedReal> {
        self.quantities.get(key).copied()
    }

    /// Maximum over the per-atom terms.
    pub fn sup(&self) -> ExtendedReal {
        sup(&self.terms)
    }
}

/// Sampling and grid settings shared by the criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub seed: u64,
    /// Random functions drawn for bound confirmations and GCH estimates.
    pub samples: usize,
    /// Grid for premise inequalities and convexity checks.
    pub grid: Grid,
    /// Range `[x0, horizon]` for growth-condition evidence.
    pub evidence_range: (f64, f64),
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 0x5eed,
            samples: 16,
            grid: Grid::decades(1e-3, 1e3, 5),
            evidence_range: (0.0, 1e6),
            tol: 1e-9,
        }
    }
}

fn sup(terms: &[AtomTerm]) -> ExtendedReal {
    terms.iter().map(|t| t.value).fold(ExtendedReal::ZERO, ExtendedReal::max)
}

fn sup_verdict(sup_n: ExtendedReal, trend: Option<&Trend>) -> Verdict {
    match trend {
        None if sup_n.is_finite() => Verdict::Satisfied,
        None => Verdict::Violated,
        Some(t) if t.value_n == ExtendedReal::ZERO && t.value_2n == ExtendedReal::ZERO => Verdict::Satisfied,
        Some(t) => Verdict::Trend(t.kind()),
    }
}

/// Evaluates per-atom terms at `N` and, for parametric families, at `2N`.
fn terms_with_trend<F>(family: &dyn OperatorFamily, terms: F) -> Result<(MceOperator, Vec<AtomTerm>, Option<Trend>)>
where
    F: Fn(&MceOperator) -> Result<Vec<AtomTerm>>,
{
    let op = family.at(None)?;
    let t = terms(&op)?;
    let trend = match family.truncation() {
        Some(n) => {
            let t2 = terms(&family.at(Some(2 * n))?)?;
            Some(Trend::new(n, sup(&t), sup(&t2)))
        }
        None => None,
    };
    Ok((op, t, trend))
}

fn term(atom: &str, v: f64) -> AtomTerm {
    AtomTerm {
        atom: atom.to_string(),
        value: if v.is_nan() { ExtendedReal::Infinite } else { ExtendedReal::from_f64(v) },
    }
}

/// Necessary conditions for boundedness when `Φ(xy) <= Ψ(x) + Θ(y)`:
/// (i) `E(u) = 0` on the non-atomic part, (ii) `sup E(u)(A_n)·Θ⁻¹(1/μ(A_n)) < ∞`.
pub fn thm32_check(family: &dyn OperatorFamily, theta: &YoungFunction, opts: &CheckOptions) -> Result<CriterionReport> {
    let op0 = family.at(None)?;
    require(
        check_product_premise(op0.source(), op0.target(), theta, &opts.grid),
        "Φ(xy) <= Ψ(x) + Θ(y)",
    )?;
    let (op, terms, trend) = terms_with_trend(family, |op| {
        let vals = op.block_values_of(|v| v);
        Ok(op
            .atom_values(&vals)
            .map(|(id, m, e)| term(id, e.to_f64() * theta.generalized_inverse(1.0 / m)))
            .collect())
    })?;
    let vals = op.block_values_of(|v| v);
    let (b_max, eps) = op.nonatomic_max(&vals);
    let mut r = CriterionReport::new("thm32", family.truncation(), opts.tol);
    r.set("nonatomic_max_E_u", b_max);
    r.set("sup", sup(&terms));
    let cond_i = b_max <= ExtendedReal::Finite(eps);
    r.set("condition_i", if cond_i { 1.0 } else { 0.0 });
    r.verdict = if cond_i { sup_verdict(sup(&terms), trend.as_ref()) } else { Verdict::Violated };
    r.terms = terms;
    r.trend = trend;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessInequality {
    pub atom: String,
    /// `‖f_n‖_Φ` for `f_n = Φ⁻¹(1/μ(A_n))·χ_{A_n}`.
    pub f_norm: f64,
    /// `E(u)(A_n)·Φ⁻¹(1/μ(A_n)) / Ψ⁻¹(1/μ(A_n))`.
    pub lhs: f64,
    /// `‖E(u f_n)‖_Ψ`.
    pub rhs: f64,
    pub holds: bool,
}

/// The lower bound `E(u)(A_n)Φ⁻¹(1/μ)/Ψ⁻¹(1/μ) <= ‖E(u f_n)‖_Ψ` at the atom
/// `atom`, which must form its own block.
pub fn thm32_witness_inequality(op: &MceOperator, atom: &str) -> Result<WitnessInequality> {
    let cell = op.space().cell(atom)?;
    if !cell.is_atom() {
        return Err(Error::Precondition(format!("`{atom}` is not an atom")));
    }
    let alg = op.expectation().algebra();
    let b = alg.block_of(atom).expect("covered");
    if alg.block_ids(b).len() != 1 {
        return Err(Error::Precondition(format!(
            "atom `{atom}` shares block `{}` with other cells",
            alg.block_name(b)
        )));
    }
    let inv_mass = 1.0 / cell.mass;
    let height = op.source().generalized_inverse(inv_mass);
    let f = SimpleFunction::from_values([(atom, height)]);
    let f_norm = luxemburg_norm(op.source(), &f, op.space())?.value;
    let e_u = op.block_values_of(|v| v)[b].to_f64();
    let lhs = e_u * height / op.target().generalized_inverse(inv_mass);
    let rhs = luxemburg_norm(op.target(), &op.apply(&f.abs()).abs(), op.space())?.value;
    Ok(WitnessInequality {
        atom: atom.to_string(),
        f_norm,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8 * rhs.max(1.0),
    })
}

/// Draws a nonnegative random simple function on every cell.
pub fn random_function(space: &MeasureSpace, rng: &mut impl Rng) -> SimpleFunction {
    SimpleFunction::from_values(space.cells().iter().map(|c| {
        let v: f64 = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..4.0) };
        (c.id.clone(), v)
    }))
}

fn delta_prime_constant(phi: &YoungFunction, which: &str, opts: &CheckOptions) -> Result<(f64, GrowthEvidence)> {
    let ev = check_delta_prime(phi, opts.evidence_range.0, opts.evidence_range.1);
    match ev.constant_if_holds() {
        Some(c) => Ok((c, ev)),
        None => Err(Error::premise(
            format!("{which} satisfies Δ′ on the evidence range"),
            ev.worst_point.clone(),
            ev.constant.to_f64(),
        )),
    }
}

/// Sufficient condition: (i) `E(Φ*(u)) = 0` on the non-atomic part and
/// (ii) `M = sup Ψ[C c₁ Φ*⁻¹(E(Φ*(u)))(A_n)/Φ⁻¹(μ(A_n))]·μ(A_n) < ∞`.
///
/// `c₁, c₂` are the Δ′ constants of `Φ, Ψ`. When the verdict is favourable,
/// random `f` with `‖f‖_Φ <= 1` are checked against
/// `I_Ψ(EM_u f) <= c₂·M·(Ψ∘Φ⁻¹)(1)`.
pub fn thm34_check(family: &dyn OperatorFamily, c_gch: f64, opts: &CheckOptions) -> Result<CriterionReport> {
    let op0 = family.at(None)?;
    let (c1, _) = delta_prime_constant(op0.source(), "Φ", opts)?;
    let (c2, _) = delta_prime_constant(op0.target(), "Ψ", opts)?;
    let h = YoungFunction::composed_with_inverse(op0.target(), op0.source());
    require(h.validate_convexity(&opts.grid), "Ψ∘Φ⁻¹ is convex")?;
    let scale = c_gch * c1;
    let (op, terms, trend) = terms_with_trend(family, |op| {
        let conj = op.source().complementary();
        let vals = op.block_values_of(|v| conj.evaluate(v).to_f64());
        Ok(op
            .atom_values(&vals)
            .map(|(id, m, e)| {
                let arg = scale * conj.generalized_inverse(e.to_f64()) / op.source().generalized_inverse(m);
                term(id, (op.target().evaluate(arg) * m).to_f64())
            })
            .collect())
    })?;
    let conj = op.source().complementary();
    let vals = op.block_values_of(|v| conj.evaluate(v).to_f64());
    let (b_max, eps) = op.nonatomic_max(&vals);
    let m = sup(&terms);
    let mut r = CriterionReport::new("thm34", family.truncation(), opts.tol);
    r.constants.insert("C".into(), c_gch);
    r.constants.insert("c1".into(), c1);
    r.constants.insert("c2".into(), c2);
    r.set("nonatomic_max_E_conj_u", b_max);
    r.set("M", m);
    let cond_i = b_max <= ExtendedReal::Finite(eps);
    r.set("condition_i", if cond_i { 1.0 } else { 0.0 });
    r.verdict = if cond_i { sup_verdict(m, trend.as_ref()) } else { Verdict::Violated };
    if r.verdict.is_favourable() && m.is_finite() {
        let bound = c2 * m.to_f64() * h.evaluate(1.0).to_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst = 0.0f64;
        for _ in 0..opts.samples {
            let f = random_function(op.space(), &mut rng);
            let norm = luxemburg_norm(op.source(), &f, op.space())?.value;
            if norm == 0.0 {
                continue;
            }
            let f = f.scale(1.0 / norm);
            let i_psi = modular(op.target(), &op.apply(&f), op.space()).to_f64();
            worst = worst.max(i_psi - bound);
        }
        r.set("bound", bound);
        r.set("bound_max_excess", worst);
        r.set("bound_confirmed", if worst <= opts.tol * bound.max(1.0) { 1.0 } else { 0.0 });
    }
    r.terms = terms;
    r.trend = trend;
    Ok(r)
}

/// `Φ⁻¹(x)Θ⁻¹(x) <= Ψ⁻¹(x)` on the grid.
pub fn check_inverse_premise(
    phi: &YoungFunction,
    psi: &YoungFunction,
    theta: &YoungFunction,
    grid: &Grid,
) -> InequalityReport {
    let mut r = InequalityReport::new("inverse_premise", 1e-9);
    for x in grid.values() {
        let lhs = phi.generalized_inverse(x) * theta.generalized_inverse(x);
        let rhs = psi.generalized_inverse(x);
        r.record(&[x], lhs, rhs, rhs);
    }
    r
}

/// `g = Φ*⁻¹(E(Φ*(|u|)))` as a block-constant function.
pub fn conjugate_mean(op: &MceOperator) -> SimpleFunction {
    let conj = op.source().complementary();
    let vals: Vec<ExtendedReal> = op
        .block_values_of(|v| conj.evaluate(v).to_f64())
        .into_iter()
        .map(|e| ExtendedReal::from_f64(conj.generalized_inverse(e.to_f64())))
        .collect();
    op.expectation().spread(&vals)
}

fn membership_verdict(m: Membership) -> Verdict {
    match m {
        Membership::Member => Verdict::Trend(TrendKind::Bounded),
        Membership::Diverging => Verdict::Trend(TrendKind::Diverging),
        Membership::Inconclusive => Verdict::Inconclusive,
    }
}

fn function_trend<F>(family: &dyn OperatorFamily, n: usize, theta: &YoungFunction, f: F) -> Result<MembershipTrend>
where
    F: Fn(&MceOperator) -> SimpleFunction,
{
    membership_trend(theta, n, |t| {
        let op = family.at(Some(t))?;
        let g = f(&op);
        Ok((op.space().clone(), g))
    })
}

/// Integrability criterion: if `Φ*⁻¹(E(Φ*(u))) ∈ L^Θ(𝒜)` (with
/// `Φ⁻¹Θ⁻¹ <= Ψ⁻¹`), then `EM_u` is bounded with
/// `‖E(uf)‖_Ψ <= 2Ĉ‖f‖_Φ‖Φ*⁻¹(E(Φ*(u)))‖_Θ`.
pub fn thm36_forward_check(
    family: &dyn OperatorFamily,
    theta: &YoungFunction,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    let op = family.at(None)?;
    require(
        check_inverse_premise(op.source(), op.target(), theta, &opts.grid),
        "Φ⁻¹(x)Θ⁻¹(x) <= Ψ⁻¹(x)",
    )?;
    let g = conjugate_mean(&op);
    let g_norm = luxemburg_norm(theta, &g, op.space())?.value;
    let mut r = CriterionReport::new("thm36_forward", family.truncation(), opts.tol);
    r.set("g_norm", g_norm);
    r.verdict = match family.truncation() {
        None => Verdict::Satisfied,
        Some(n) => {
            let t = function_trend(family, n, theta, conjugate_mean)?;
            membership_verdict(t.verdict)
        }
    };
    if r.verdict.is_favourable() {
        let gch = estimate_gch_constant(op.expectation(), op.source(), &random_pairs(op.space(), opts))?;
        r.constants.insert("C".into(), gch.c_hat);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x36);
        let mut worst = 0.0f64;
        for _ in 0..opts.samples {
            let f = random_function(op.space(), &mut rng);
            let f_norm = luxemburg_norm(op.source(), &f, op.space())?.value;
            let denom = gch.c_hat * f_norm * g_norm;
            if denom == 0.0 {
                continue;
            }
            let out = luxemburg_norm(op.target(), &op.apply(&f), op.space())?.value;
            worst = worst.max(out / denom);
        }
        r.set("bound_ratio", worst);
        r.set("bound_confirmed", if worst <= 2.0 * (1.0 + opts.tol) { 1.0 } else { 0.0 });
    }
    Ok(r)
}

/// Necessary integrability: with `Θ = Ψ*∘Φ*⁻¹`, reports whether
/// `E(Φ*(|u|)) ∈ L^{Θ*}(𝒜)` and `Φ*⁻¹(E(Φ*(|u|))) ∈ L^{Θ*∘Φ*}(𝒜)`.
pub fn thm36_converse_check(family: &dyn OperatorFamily, opts: &CheckOptions) -> Result<CriterionReport> {
    let op = family.at(None)?;
    let conj = op.source().complementary();
    let theta = YoungFunction::composed_with_inverse(&op.target().complementary(), &conj);
    require(theta.validate_convexity(&opts.grid), "Ψ*∘Φ*⁻¹ is convex")?;
    for (name, f) in [("Θ", &theta), ("Φ*", &conj)] {
        let ev = check_delta2(f, opts.evidence_range.0, opts.evidence_range.1);
        if !ev.holds() {
            return Err(Error::premise(format!("{name} satisfies Δ₂"), ev.worst_point, ev.constant.to_f64()));
        }
    }
    let theta_star = theta.complementary();
    let outer = YoungFunction::composed(&theta_star, &conj);
    let mean = |op: &MceOperator| {
        let c = op.source().complementary();
        op.expectation().apply(&op.u().abs().compose(&c))
    };
    let h1 = mean(&op);
    let h2 = conjugate_mean(&op);
    let mut r = CriterionReport::new("thm36_converse", family.truncation(), opts.tol);
    r.set("E_conj_u_norm", luxemburg_norm(&theta_star, &h1, op.space())?.value);
    r.set("conj_mean_norm", luxemburg_norm(&outer, &h2, op.space())?.value);
    r.verdict = match family.truncation() {
        None => Verdict::Satisfied,
        Some(n) => {
            let t1 = function_trend(family, n, &theta_star, mean)?;
            let t2 = function_trend(family, n, &outer, conjugate_mean)?;
            match (t1.verdict, t2.verdict) {
                (Membership::Member, Membership::Member) => Verdict::Trend(TrendKind::Bounded),
                (Membership::Diverging, _) | (_, Membership::Diverging) => Verdict::Trend(TrendKind::Diverging),
                _ => Verdict::Inconclusive,
            }
        }
    };
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GchEstimate {
    /// Lower estimate of the constant `C`.
    pub c_hat: f64,
    pub sample_count: usize,
    pub excluded: usize,
    /// Index of the sample pair attaining `c_hat`.
    pub worst_pair: usize,
}

/// Seeded random `(f, g)` pairs for [`estimate_gch_constant`].
pub fn random_pairs(space: &MeasureSpace, opts: &CheckOptions) -> Vec<(SimpleFunction, SimpleFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6c4);
    (0..opts.samples.max(1))
        .map(|_| (random_function(space, &mut rng), random_function(space, &mut rng)))
        .collect()
}

/// `Ĉ = max E(|fg|) / (Φ⁻¹(E(Φ(|f|)))·Φ*⁻¹(E(Φ*(|g|))))` over samples and
/// blocks, skipping blocks where the denominator vanishes.
pub fn estimate_gch_constant(
    e: &ConditionalExpectation,
    phi: &YoungFunction,
    samples: &[(SimpleFunction, SimpleFunction)],
) -> Result<GchEstimate> {
    if samples.is_empty() {
        return Err(Error::Precondition("GCH estimate needs at least one sample pair".into()));
    }
    let conj = phi.complementary();
    let mut best: Option<(f64, usize)> = None;
    let mut excluded = 0;
    for (i, (f, g)) in samples.iter().enumerate() {
        let (f, g) = (f.abs(), g.abs());
        let lhs = e.block_values(&f.mul(&g));
        let a = e.block_values(&f.compose(phi));
        let b = e.block_values(&g.compose(&conj));
        for k in 0..lhs.len() {
            let rhs = phi.generalized_inverse(a[k].to_f64()) * conj.generalized_inverse(b[k].to_f64());
            if !(rhs > 1e-12) || !rhs.is_finite() {
                excluded += 1;
                continue;
            }
            let ratio = lhs[k].to_f64() / rhs;
            if best.is_none_or(|(c, _)| ratio > c) {
                best = Some((ratio, i));
            }
        }
    }
    let (c_hat, worst_pair) =
        best.ok_or_else(|| Error::Precondition("every sample pair was excluded from the GCH estimate".into()))?;
    Ok(GchEstimate {
        c_hat,
        sample_count: samples.len(),
        excluded,
        worst_pair,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpRegime {
    /// `p < q`: the supremum criterion.
    SupCriterion,
    /// `q < p`: the integrability criterion with `r = pq/(p-q)`.
    Integrability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpBridgeReport {
    pub p: f64,
    pub q: f64,
    pub regime: LpRegime,
    pub closed_form: CriterionReport,
    pub generic: CriterionReport,
    /// Largest relative difference between matching quantities.
    pub max_rel_diff: f64,
    pub verdicts_agree: bool,
}

impl LpBridgeReport {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.verdicts_agree && self.max_rel_diff <= rel_tol
    }
}

fn rel_diff(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        }
        (ExtendedReal::Infinite, ExtendedReal::Infinite) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Compares the closed-form `Lᵖ → L^q` criteria with the Young-function
/// machinery on the same weight and expectation, using scaled powers.
pub fn lp_bridge_check(family: &dyn OperatorFamily, p: f64, q: f64, opts: &CheckOptions) -> Result<LpBridgeReport> {
    if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite() && p != q) {
        return Err(Error::Precondition(format!("need 1 < p, q < ∞ with p ≠ q, got p = {p}, q = {q}")));
    }
    let phi = YoungFunction::power(p, true)?;
    let psi = YoungFunction::power(q, true)?;
    let with_powers = Powered {
        inner: family,
        phi: &phi,
        psi: &psi,
    };
    let p_conj = p / (p - 1.0);
    if p < q {
        lp_sup_regime(&with_powers, p, q, p_conj, opts)
    } else {
        lp_integrability_regime(&with_powers, p, q, p_conj, opts)
    }
}

struct Powered<'a> {
    inner: &'a dyn OperatorFamily,
    phi: &'a YoungFunction,
    psi: &'a YoungFunction,
}

impl OperatorFamily for Powered<'_> {
    fn truncation(&self) -> Option<usize> {
        self.inner.truncation()
    }

    fn at(&self, n: Option<usize>) -> Result<MceOperator> {
        Ok(self.inner.at(n)?.with_functions(self.phi.clone(), self.psi.clone()))
    }
}

fn lp_sup_regime(
    family: &Powered<'_>,
    p: f64,
    q: f64,
    p_conj: f64,
    opts: &CheckOptions,
) -> Result<LpBridgeReport> {
    let (op, closed_terms, closed_trend) = terms_with_trend(family, |op| {
        let vals = op.block_values_of(|v| v.powf(p_conj));
        Ok(op
            .atom_values(&vals)
            .map(|(id, m, e)| term(id, e.to_f64().powf(q / p_conj) * m.powf(1.0 - q / p)))
            .collect())
    })?;
    let normalizer = p.powf(-q / p) / q;
    let (_, generic_terms, generic_trend) = terms_with_trend(family, |op| {
        let conj = op.source().complementary();
        let vals = op.block_values_of(|v| conj.evaluate(v).to_f64());
        Ok(op
            .atom_values(&vals)
            .map(|(id, m, e)| {
                let arg = conj.generalized_inverse(e.to_f64()) / op.source().generalized_inverse(m);
                term(id, (op.target().evaluate(arg) * m).to_f64() / normalizer)
            })
            .collect())
    })?;
    let closed_b = op.nonatomic_max(&op.block_values_of(|v| v.powf(p_conj)));
    let conj = op.source().complementary();
    let generic_b = op.nonatomic_max(&op.block_values_of(|v| conj.evaluate(v).to_f64()));
    let build = |name: &str, terms: Vec<AtomTerm>, trend: Option<Trend>, (b, eps): (ExtendedReal, f64)| {
        let mut r = CriterionReport::new(name, family.truncation(), opts.tol);
        let cond_i = b <= ExtendedReal::Finite(eps);
        r.set("nonatomic_max", b);
        r.set("sup", sup(&terms));
        r.verdict = if cond_i { sup_verdict(sup(&terms), trend.as_ref()) } else { Verdict::Violated };
        r.terms = terms;
        r.trend = trend;
        r
    };
    let closed = build("lp_sup_closed_form", closed_terms, closed_trend, closed_b);
    let mut generic = build("lp_sup_generic", generic_terms, generic_trend, generic_b);
    generic.constants.insert("normalizer".into(), normalizer);
    let mut max_rel_diff = closed
        .terms
        .iter()
        .zip(&generic.terms)
        .map(|(a, b)| rel_diff(a.value, b.value))
        .fold(0.0, f64::max);
    if let (Some(a), Some(b)) = (&closed.trend, &generic.trend) {
        max_rel_diff = max_rel_diff.max(rel_diff(a.value_2n, b.value_2n));
    }
    Ok(LpBridgeReport {
        p,
        q,
        regime: LpRegime::SupCriterion,
        verdicts_agree: closed.verdict == generic.verdict,
        closed_form: closed,
        generic,
        max_rel_diff,
    })
}

fn lp_integrability_regime(
    family: &Powered<'_>,
    p: f64,
    q: f64,
    p_conj: f64,
    opts: &CheckOptions,
) -> Result<LpBridgeReport> {
    let r_exp = p * q / (p - q);
    let theta = YoungFunction::power(r_exp, false)?;
    let closed_sum = |op: &MceOperator| -> ExtendedReal {
        let w = op.expectation().apply(&op.u().abs().map(|v| v.powf(p_conj))).map(|v| v.powf(1.0 / p_conj));
        w.map(|v| v.powf(r_exp)).integrate(op.space())
    };
    let generic_sum = |op: &MceOperator| -> Result<ExtendedReal> {
        let g = conjugate_mean(op);
        let norm = luxemburg_norm(&theta, &g, op.space())?.value;
        Ok(ExtendedReal::from_f64(norm.powf(r_exp)))
    };
    let op = family.at(None)?;
    let mut closed = CriterionReport::new("lp_integrability_closed_form", family.truncation(), opts.tol);
    let mut generic = CriterionReport::new("lp_integrability_generic", family.truncation(), opts.tol);
    closed.constants.insert("r".into(), r_exp);
    generic.constants.insert("r".into(), r_exp);
    let (c_n, g_n) = (closed_sum(&op), generic_sum(&op)?);
    closed.set("sum", c_n);
    generic.set("norm_pow_r", g_n);
    let mut max_rel_diff = rel_diff(c_n, g_n);
    match family.truncation() {
        None => {
            closed.verdict = sup_verdict(c_n, None);
            generic.verdict = sup_verdict(g_n, None);
        }
        Some(n) => {
            let op2 = family.at(Some(2 * n))?;
            let (c_2n, g_2n) = (closed_sum(&op2), generic_sum(&op2)?);
            max_rel_diff = max_rel_diff.max(rel_diff(c_2n, g_2n));
            let (ct, gt) = (Trend::new(n, c_n, c_2n), Trend::new(n, g_n, g_2n));
            closed.verdict = sup_verdict(c_n, Some(&ct));
            generic.verdict = sup_verdict(g_n, Some(&gt));
            let m = function_trend(family, n, &theta, conjugate_mean)?;
            generic.set(
                "membership_member",
                if m.verdict == Membership::Member { 1.0 } else { 0.0 },
            );
            closed.trend = Some(ct);
            generic.trend = Some(gt);
        }
    }
    Ok(LpBridgeReport {
        p,
        q,
        regime: LpRegime::Integrability,
        verdicts_agree: closed.verdict == generic.verdict,
        closed_form: closed,
        generic,
        max_rel_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SubSigmaAlgebra;

    fn sq() -> YoungFunction {
        YoungFunction::power(2.0, true).unwrap()
    }

    fn single_atom_op(u: f64) -> MceOperator {
        let space = MeasureSpace::new([("A1", 1.0)], Vec::<(String, f64)>::new()).unwrap();
        let u = SimpleFunction::constant(&space, u);
        MceOperator::new(u, ConditionalExpectation::identity(space), sq(), sq())
    }

    fn parametric(mass: &str, u: &str, n: usize) -> OperatorSpec {
        serde_json::from_value(serde_json::json!({
            "space": {"atoms": {"parametric": {"mass_formula": mass, "N": n}}},
            "u": {"formula": u},
            "source": {"family": "power", "p": 2.0, "scaled": true},
            "target": {"family": "power", "p": 4.0, "scaled": true},
        }))
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let space = MeasureSpace::new([("a", 1.0), ("b", 1.0)], Vec::<(String, f64)>::new()).unwrap();
        let f = SimpleFunction::from_values([("a", 1.0), ("b", 5.0)]);
        let id = MceOperator::new(
            SimpleFunction::constant(&space, 1.0),
            ConditionalExpectation::identity(space.clone()),
            sq(),
            sq(),
        );
        assert_eq!(id.apply(&f), f);
        let alg = SubSigmaAlgebra::trivial(&space);
        let op = MceOperator::new(
            SimpleFunction::from_values([("a", 2.0), ("b", 4.0)]),
            ConditionalExpectation::new(space.clone(), alg).unwrap(),
            sq(),
            sq(),
        );
        let out = op.apply(&SimpleFunction::constant(&space, 1.0));
        assert_eq!((out.get("a"), out.get("b")), (3.0, 3.0));
    }

    #[test]
    fn thm32_examples() {
        let theta = YoungFunction::power(4.0, true).unwrap();
        let opts = CheckOptions::default();
        let r = thm32_check(&parametric("2^-n", "0", 8), &theta, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert_eq!(r.sup(), ExtendedReal::ZERO);
        let r = thm32_check(&parametric("2^-n", "(2^-n)^(1/4)", 8), &theta, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Trend(TrendKind::Bounded));
        // closed form: μ^{1/4}·(4/μ)^{1/4} = √2
        for t in &r.terms {
            assert!((t.value.to_f64() - 2f64.sqrt()).abs() < 1e-12);
        }
        let r = thm32_check(&parametric("2^-n", "1", 8), &theta, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Trend(TrendKind::Diverging));
    }

    #[test]
    fn thm32_premise_violation() {
        // Φ = x^4/4 is not dominated by Ψ + Θ = x^2/2 + x^2/2
        let spec = parametric("2^-n", "1", 4);
        let mut spec = spec;
        spec.source = YoungSpec::Power { p: 4.0, scaled: true };
        spec.target = YoungSpec::Power { p: 2.0, scaled: true };
        let err = thm32_check(&spec, &sq(), &CheckOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PremiseViolation { .. }));
    }

    #[test]
    fn witness_inequality_single_atom() {
        let w = thm32_witness_inequality(&single_atom_op(1.0), "A1").unwrap();
        assert!((w.f_norm - 1.0).abs() < 1e-8);
        assert!((w.lhs - 1.0).abs() < 1e-12);
        assert!(w.holds);
        let w = thm32_witness_inequality(&single_atom_op(0.0), "A1").unwrap();
        assert_eq!((w.lhs, w.rhs), (0.0, 0.0));
    }

    #[test]
    fn thm34_examples() {
        let opts = CheckOptions::default();
        let r = thm34_check(&single_atom_op(0.0), 1.0, &opts).unwrap();
        assert_eq!(r.quantity("M"), Some(ExtendedReal::ZERO));
        assert_eq!(r.verdict, Verdict::Satisfied);
        let r = thm34_check(&single_atom_op(3.0), 1.0, &opts).unwrap();
        // Φ = Φ* = Ψ = x²/2, c₁ = 2: M = Ψ(2·3/√2)·1 = 9
        assert!((r.quantity("M").unwrap().to_f64() - 9.0).abs() < 1e-9);
        assert_eq!(r.quantity("bound_confirmed"), Some(ExtendedReal::Finite(1.0)));
        let mut spec = parametric("2^-n", "1", 8);
        spec.u = FunctionSpec {
            formula: Some("sqrt(2)".parse().unwrap()),
            values: BTreeMap::new(),
        };
        let r = thm34_check(&spec, 1.0, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Trend(TrendKind::Diverging));
    }

    #[test]
    fn gch_identity_is_one() {
        let space = MeasureSpace::new([("a", 1.0), ("b", 2.0), ("c", 0.5)], Vec::<(String, f64)>::new()).unwrap();
        let e = ConditionalExpectation::identity(space.clone());
        let est = estimate_gch_constant(&e, &sq(), &random_pairs(&space, &CheckOptions::default())).unwrap();
        assert!((est.c_hat - 1.0).abs() < 1e-9, "{est:?}");
        let zero = [(SimpleFunction::zero(), SimpleFunction::constant(&space, 1.0))];
        assert!(estimate_gch_constant(&e, &sq(), &zero).is_err());
    }

    #[test]
    fn lp_bridge_sup_example() {
        // p = 2, q = 4, E(u²) = μ: terms (E u²)^{q/p'}·μ^{1-q/p} = μ²·μ⁻¹ = μ
        let spec = parametric("2^-n", "(2^-n)^(1/2)", 8);
        let r = lp_bridge_check(&spec, 2.0, 4.0, &CheckOptions::default()).unwrap();
        assert!(r.passed(1e-6), "{r:?}");
        assert_eq!(r.closed_form.verdict, Verdict::Trend(TrendKind::Bounded));
        assert!((r.closed_form.sup().to_f64() - 0.5).abs() < 1e-12);
        for (k, t) in r.closed_form.terms.iter().enumerate() {
            assert!((t.value.to_f64() - 2f64.powi(-(k as i32) - 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn lp_bridge_integrability_example() {
        // p = 4, q = 2, r = 4: u = 1 on μ = 1/n gives Σ 1/n
        let spec = parametric("1/n", "1", 16);
        let r = lp_bridge_check(&spec, 4.0, 2.0, &CheckOptions::default()).unwrap();
        assert!(r.passed(1e-6), "{r:?}");
        assert_eq!(r.generic.verdict, Verdict::Trend(TrendKind::Diverging));
    }

    #[test]
    fn zero_weight_criteria() {
        let opts = CheckOptions::default();
        let op = single_atom_op(0.0);
        // Θ = |x| up to 1 then ∞ has Θ⁻¹ <= 1, so Φ⁻¹Θ⁻¹ <= Ψ⁻¹ when Φ = Ψ
        let theta = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
        let r = thm36_forward_check(&op, &theta, &opts).unwrap();
        assert_eq!(r.quantity("g_norm"), Some(ExtendedReal::ZERO));
        let r = thm36_converse_check(&op.with_functions(YoungFunction::power(4.0, true).unwrap(), sq()), &opts).unwrap();
        assert_eq!(r.quantity("E_conj_u_norm"), Some(ExtendedReal::ZERO));
    }
}
