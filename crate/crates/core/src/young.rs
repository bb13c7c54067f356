//! Young functions and their single-function calculus.
//!
//! A Young function is an even convex `Φ: ℝ → [0, ∞]` with `Φ(0) = 0`. Values
//! past `b_Φ` are `+∞`; at `b_Φ` itself the left limit is returned.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::grid::{Grid, InequalityReport};
use crate::numeric::{bisect_predicate, maximize_concave, Maximum};

/// Largest argument explored by bracket expansion.
pub const HORIZON: f64 = f64::MAX / 4.0;

const CONVEXITY_TOL: f64 = 1e-9;
const TREND_DELTA: f64 = 0.05;

/// JSON description of a Young function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungSpec {
    /// `|x|^p / p` when `scaled`, `|x|^p` otherwise.
    Power {
        p: f64,
        #[serde(default)]
        scaled: bool,
    },
    /// `e^|x| - |x| - 1`.
    ExpGrowth,
    /// Convex interpolant through `points`, extended linearly; `+∞` past
    /// `cutoff` when given.
    PiecewiseLinear {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
    /// `outer ∘ inner_inverse⁻¹`, or `outer ∘ inner` when `inner` is given.
    Composed {
        outer: Box<YoungSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner_inverse: Option<Box<YoungSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<Box<YoungSpec>>,
    },
    /// The complementary function of `of`.
    Complementary { of: Box<YoungSpec> },
}

#[derive(Clone, Debug)]
struct Piecewise {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `slopes[i]` is the slope on `[xs[i], xs[i+1]]`; the last entry is the
    /// slope of the linear tail.
    slopes: Vec<f64>,
    cutoff: f64,
}

impl Piecewise {
    fn eval(&self, x: f64) -> f64 {
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            k => k - 1,
        };
        self.ys[i] + self.slopes[i] * (x - self.xs[i])
    }

    fn inverse(&self, y: f64) -> f64 {
        if self.cutoff.is_finite() && y >= self.eval(self.cutoff) {
            return self.cutoff;
        }
        let last = self.xs.len() - 1;
        for i in 0..last {
            if self.ys[i + 1] > y {
                // slopes[i] > 0 here since ys[i+1] > y >= ys[i]
                return self.xs[i] + (y - self.ys[i]) / self.slopes[i];
            }
        }
        self.xs[last] + (y - self.ys[last]) / self.slopes[last]
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Power { p: f64, scaled: bool },
    ExpGrowth,
    Piecewise(Piecewise),
    Composed {
        outer: Arc<YoungFunction>,
        inner: Arc<YoungFunction>,
        /// `true`: `outer ∘ inner⁻¹`; `false`: `outer ∘ inner`.
        inverse: bool,
    },
    Conjugate(Arc<YoungFunction>),
}

/// An immutable Young function with cached `a_Φ` and `b_Φ`.
#[derive(Clone, Debug)]
pub struct YoungFunction {
    kind: Kind,
    a_phi: f64,
    b_phi: f64,
}

impl YoungFunction {
    pub fn power(p: f64, scaled: bool) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidYoung(format!("power exponent must be >= 1, got {p}")));
        }
        Ok(YoungFunction {
            kind: Kind::Power { p, scaled },
            a_phi: 0.0,
            b_phi: f64::INFINITY,
        })
    }

    pub fn exp_growth() -> Self {
        YoungFunction {
            kind: Kind::ExpGrowth,
            a_phi: 0.0,
            b_phi: f64::INFINITY,
        }
    }

    /// Convex piecewise-linear interpolant. `(0, 0)` is prepended when absent.
    /// Rejects non-convex, decreasing or identically-zero input.
    pub fn piecewise_linear(points: &[[f64; 2]], cutoff: Option<f64>) -> Result<Self> {
        let mut pts: Vec<[f64; 2]> = points.to_vec();
        if pts.first().is_none_or(|p| p[0] != 0.0) {
            pts.insert(0, [0.0, 0.0]);
        }
        if pts[0][1] != 0.0 {
            return Err(Error::InvalidYoung("piecewise_linear must pass through (0, 0)".into()));
        }
        if pts.len() < 2 {
            return Err(Error::InvalidYoung("piecewise_linear needs at least one point besides the origin".into()));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidYoung("piecewise_linear points must be finite".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidYoung("piecewise_linear abscissae must be strictly increasing".into()));
        }
        let mut slopes: Vec<f64> = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect();
        slopes.push(*slopes.last().unwrap());
        if slopes[0] < 0.0 {
            return Err(Error::InvalidYoung("piecewise_linear must be nondecreasing".into()));
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] < w[0] - 1e-12 * w[0].abs().max(1.0) {
                return Err(Error::InvalidYoung(format!(
                    "piecewise_linear is not convex at x = {} (slope {} then {})",
                    xs[i + 1],
                    w[0],
                    w[1]
                )));
            }
        }
        if *slopes.last().unwrap() <= 0.0 {
            return Err(Error::InvalidYoung("piecewise_linear is identically zero".into()));
        }
        let a_phi = xs
            .iter()
            .zip(&ys)
            .zip(&slopes)
            .take_while(|((_, &y), _)| y == 0.0)
            .filter(|(_, &s)| s > 0.0)
            .map(|((&x, _), _)| x)
            .next()
            .unwrap_or(0.0);
        let cutoff = match cutoff {
            None => f64::INFINITY,
            Some(b) if b > a_phi && b > 0.0 => b,
            Some(b) => {
                return Err(Error::InvalidYoung(format!(
                    "cutoff {b} must exceed a_Φ = {a_phi} (Φ would vanish identically before ∞)"
                )))
            }
        };
        Ok(YoungFunction {
            kind: Kind::Piecewise(Piecewise { xs, ys, slopes, cutoff }),
            a_phi,
            b_phi: cutoff,
        })
    }

    /// `outer ∘ inner⁻¹`, e.g. `Ψ ∘ Φ⁻¹`. Convexity is not guaranteed; see
    /// [`YoungFunction::validate_convexity`].
    pub fn composed_with_inverse(outer: &YoungFunction, inner: &YoungFunction) -> Self {
        let a_phi = inner.evaluate(outer.a_phi).to_f64();
        let b_phi = if outer.b_phi.is_infinite() {
            f64::INFINITY
        } else {
            inner.evaluate(outer.b_phi).to_f64()
        };
        YoungFunction {
            kind: Kind::Composed {
                outer: Arc::new(outer.clone()),
                inner: Arc::new(inner.clone()),
                inverse: true,
            },
            a_phi,
            b_phi,
        }
    }

    /// `outer ∘ inner`, e.g. `Θ* ∘ Φ*`.
    pub fn composed(outer: &YoungFunction, inner: &YoungFunction) -> Self {
        let a_phi = inner.generalized_inverse(outer.a_phi);
        let b_phi = if outer.b_phi.is_infinite() {
            inner.b_phi
        } else {
            inner.generalized_inverse(outer.b_phi).min(inner.b_phi)
        };
        YoungFunction {
            kind: Kind::Composed {
                outer: Arc::new(outer.clone()),
                inner: Arc::new(inner.clone()),
                inverse: false,
            },
            a_phi,
            b_phi,
        }
    }

    /// The complementary function `Φ*(y) = sup{x|y| - Φ(x) : x >= 0}`.
    ///
    /// Closed form for scaled powers with `p > 1`; numeric conjugation
    /// otherwise.
    pub fn complementary(&self) -> YoungFunction {
        match self.kind {
            Kind::Power { p, scaled: true } if p > 1.0 => {
                YoungFunction::power(p / (p - 1.0), true).expect("conjugate exponent is > 1")
            }
            _ => self.numeric_complementary(),
        }
    }

    /// Always conjugates numerically (golden-section search), even when a
    /// closed form exists.
    pub fn numeric_complementary(&self) -> YoungFunction {
        let (a_phi, b_phi) = match &self.kind {
            Kind::Power { p, .. } if *p == 1.0 => (1.0, 1.0),
            Kind::Power { .. } | Kind::ExpGrowth => (0.0, f64::INFINITY),
            Kind::Piecewise(pw) => (
                pw.slopes[0],
                if pw.cutoff.is_finite() { f64::INFINITY } else { *pw.slopes.last().unwrap() },
            ),
            // Φ** = Φ for lower semicontinuous convex Φ
            Kind::Conjugate(inner) => (inner.a_phi, inner.b_phi),
            Kind::Composed { .. } => self.estimate_conjugate_bounds(),
        };
        YoungFunction {
            kind: Kind::Conjugate(Arc::new(self.clone())),
            a_phi,
            b_phi,
        }
    }

    /// Slope estimates: `Φ'(0+)` and `lim Φ(x)/x`.
    fn estimate_conjugate_bounds(&self) -> (f64, f64) {
        let h = 1e-9;
        let a = self.evaluate(h).to_f64() / h;
        let b = if self.b_phi.is_finite() {
            f64::INFINITY
        } else {
            let r1 = self.evaluate(1e12).to_f64() / 1e12;
            let r2 = self.evaluate(1e15).to_f64() / 1e15;
            if !r2.is_finite() || r2 > r1 * (1.0 + 1e-3) {
                f64::INFINITY
            } else {
                r2
            }
        };
        (a, b)
    }

    pub fn from_spec(spec: &YoungSpec) -> Result<Self> {
        match spec {
            YoungSpec::Power { p, scaled } => YoungFunction::power(*p, *scaled),
            YoungSpec::ExpGrowth => Ok(YoungFunction::exp_growth()),
            YoungSpec::PiecewiseLinear { points, cutoff } => YoungFunction::piecewise_linear(points, *cutoff),
            YoungSpec::Composed {
                outer,
                inner_inverse,
                inner,
            } => {
                let outer = YoungFunction::from_spec(outer)?;
                match (inner_inverse, inner) {
                    (Some(i), None) => Ok(YoungFunction::composed_with_inverse(&outer, &YoungFunction::from_spec(i)?)),
                    (None, Some(i)) => Ok(YoungFunction::composed(&outer, &YoungFunction::from_spec(i)?)),
                    _ => Err(Error::InvalidYoung(
                        "composed needs exactly one of `inner_inverse` or `inner`".into(),
                    )),
                }
            }
            YoungSpec::Complementary { of } => Ok(YoungFunction::from_spec(of)?.complementary()),
        }
    }

    pub fn to_spec(&self) -> YoungSpec {
        match &self.kind {
            Kind::Power { p, scaled } => YoungSpec::Power { p: *p, scaled: *scaled },
            Kind::ExpGrowth => YoungSpec::ExpGrowth,
            Kind::Piecewise(pw) => YoungSpec::PiecewiseLinear {
                points: pw.xs.iter().zip(&pw.ys).map(|(&x, &y)| [x, y]).collect(),
                cutoff: pw.cutoff.is_finite().then_some(pw.cutoff),
            },
            Kind::Composed { outer, inner, inverse } => YoungSpec::Composed {
                outer: Box::new(outer.to_spec()),
                inner_inverse: inverse.then(|| Box::new(inner.to_spec())),
                inner: (!inverse).then(|| Box::new(inner.to_spec())),
            },
            Kind::Conjugate(of) => YoungSpec::Complementary {
                of: Box::new(of.to_spec()),
            },
        }
    }

    /// `sup{x >= 0 : Φ(x) = 0}`.
    pub fn a_phi(&self) -> f64 {
        self.a_phi
    }

    /// `sup{x > 0 : Φ(x) < ∞}`.
    pub fn b_phi(&self) -> f64 {
        self.b_phi
    }

    /// Exponent and scaling when this is a power family.
    pub fn as_power(&self) -> Option<(f64, bool)> {
        match self.kind {
            Kind::Power { p, scaled } => Some((p, scaled)),
            _ => None,
        }
    }

    /// `Φ(|x|)`; `+∞` iff `|x| > b_Φ` (or the value overflows).
    pub fn evaluate(&self, x: f64) -> ExtendedReal {
        let x = x.abs();
        if x.is_nan() {
            return ExtendedReal::Infinite;
        }
        if x > self.b_phi {
            return ExtendedReal::Infinite;
        }
        if x == 0.0 {
            return ExtendedReal::ZERO;
        }
        match &self.kind {
            Kind::Power { p, scaled } => {
                let v = if p.fract() == 0.0 && *p <= 64.0 { x.powi(*p as i32) } else { x.powf(*p) };
                ExtendedReal::from_f64(if *scaled { v / p } else { v })
            }
            Kind::ExpGrowth => ExtendedReal::from_f64(exp_growth(x)),
            Kind::Piecewise(pw) => ExtendedReal::from_f64(pw.eval(x)),
            Kind::Composed { outer, inner, inverse } => {
                if *inverse {
                    let t = inner.generalized_inverse(x);
                    if t.is_infinite() {
                        ExtendedReal::Infinite
                    } else {
                        outer.evaluate(t)
                    }
                } else {
                    match inner.evaluate(x) {
                        ExtendedReal::Infinite => ExtendedReal::Infinite,
                        ExtendedReal::Finite(t) => outer.evaluate(t),
                    }
                }
            }
            Kind::Conjugate(phi) => {
                if x <= self.a_phi {
                    return ExtendedReal::ZERO;
                }
                let objective = |t: f64| match phi.evaluate(t) {
                    ExtendedReal::Finite(v) => t * x - v,
                    ExtendedReal::Infinite => f64::NEG_INFINITY,
                };
                match maximize_concave(objective, phi.b_phi, HORIZON) {
                    Maximum::Value(v) => ExtendedReal::from_f64(v),
                    Maximum::Unbounded => ExtendedReal::Infinite,
                }
            }
        }
    }

    /// `ln Φ(|x|)`, computed without overflow for the power and exponential
    /// families.
    pub fn ln_evaluate(&self, x: f64) -> f64 {
        let x = x.abs();
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        if x > self.b_phi {
            return f64::INFINITY;
        }
        match self.kind {
            Kind::Power { p, scaled } => p * x.ln() - if scaled { p.ln() } else { 0.0 },
            Kind::ExpGrowth if x > 30.0 => x + (-(1.0 + x) * (-x).exp()).ln_1p(),
            _ => self.evaluate(x).to_f64().ln(),
        }
    }

    /// `Φ⁻¹(y) = inf{x >= 0 : Φ(x) > y}`.
    ///
    /// Closed form for powers and piecewise-linear functions, bracketing plus
    /// bisection otherwise. Returns `b_Φ` when `Φ` never exceeds `y`.
    pub fn generalized_inverse(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            // inf{x : Φ(x) > 0} = a_Φ; negative y gives 0
            return if y == 0.0 { self.a_phi } else { 0.0 };
        }
        if y.is_infinite() {
            return self.b_phi;
        }
        match &self.kind {
            Kind::Power { p, scaled } => {
                let base = if *scaled { p * y } else { y };
                if *p == 1.0 {
                    base
                } else if *p == 2.0 {
                    base.sqrt()
                } else {
                    base.powf(1.0 / p)
                }
            }
            Kind::Piecewise(pw) => pw.inverse(y),
            Kind::Composed { outer, inner, inverse } => {
                let s = outer.generalized_inverse(y);
                if *inverse {
                    inner.evaluate(s).to_f64()
                } else {
                    inner.generalized_inverse(s)
                }
            }
            _ => self.bisect_inverse(y),
        }
    }

    fn bisect_inverse(&self, y: f64) -> f64 {
        let exceeds = |x: f64| self.evaluate(x) > ExtendedReal::Finite(y);
        let (lo, hi) = if self.b_phi.is_finite() {
            if !exceeds(self.b_phi) {
                return self.b_phi;
            }
            (0.0, self.b_phi)
        } else {
            let mut hi = 1.0;
            while !exceeds(hi) {
                hi *= 2.0;
                if hi > HORIZON {
                    return self.b_phi;
                }
            }
            (if hi > 1.0 { 0.5 * hi } else { 0.0 }, hi)
        };
        bisect_predicate(lo, hi, exceeds)
    }

    /// Sampled N-function test: vanishes only at zero, finite, `Φ(x)/x → 0` at
    /// `0⁺` and `→ ∞` at `∞` (checked at the sample endpoints).
    pub fn is_n_function(&self) -> bool {
        if self.a_phi != 0.0 || self.b_phi.is_finite() {
            return false;
        }
        let ratio = |x: f64| self.evaluate(x).to_f64() / x;
        let r1 = ratio(1.0);
        ratio(1e-8) > 0.0 && ratio(1e-8) < 1e-3 * r1 && ratio(1e8) > 1e3 * r1
    }

    /// Spot-checks midpoint-type convexity `Φ(λx+(1-λ)y) <= λΦ(x)+(1-λ)Φ(y)`.
    pub fn validate_convexity(&self, grid: &Grid) -> InequalityReport {
        let xs = grid.values();
        let mut report = InequalityReport::new("convexity", CONVEXITY_TOL);
        for &x in &xs {
            for &y in &xs {
                for lambda in [0.25, 0.5, 0.75] {
                    let lhs = self.evaluate(lambda * x + (1.0 - lambda) * y);
                    let rhs = self.evaluate(x) * lambda + self.evaluate(y) * (1.0 - lambda);
                    if rhs.is_infinite() {
                        continue;
                    }
                    let rhs = rhs.to_f64();
                    report.record(&[x, y, lambda], lhs.to_f64(), rhs, rhs);
                }
            }
        }
        report
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Power { p, scaled: true } => write!(f, "|x|^{p}/{p}"),
            Kind::Power { p, scaled: false } => write!(f, "|x|^{p}"),
            Kind::ExpGrowth => write!(f, "e^|x|-|x|-1"),
            Kind::Piecewise(pw) => write!(f, "piecewise_linear({} knots)", pw.xs.len()),
            Kind::Composed { outer, inner, inverse: true } => write!(f, "({outer})∘({inner})⁻¹"),
            Kind::Composed { outer, inner, inverse: false } => write!(f, "({outer})∘({inner})"),
            Kind::Conjugate(phi) => write!(f, "({phi})*"),
        }
    }
}

fn exp_growth(x: f64) -> f64 {
    if x < 0.1 {
        // e^x - 1 - x by its series, avoiding cancellation
        let mut term = x * x / 2.0;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term > sum * 1e-18 {
            sum += term;
            k += 1.0;
            term *= x / k;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

/// Young's inequality `xy <= Φ(x) + Φ*(y)` on all grid pairs.
pub fn check_young_inequality(phi: &YoungFunction, grid: &Grid) -> InequalityReport {
    let conj = phi.complementary();
    let xs = grid.values();
    let phi_x: Vec<ExtendedReal> = xs.iter().map(|&x| phi.evaluate(x)).collect();
    let conj_y: Vec<ExtendedReal> = xs.iter().map(|&y| conj.evaluate(y)).collect();
    let mut report = InequalityReport::new("young_inequality", 1e-9);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let rhs = (phi_x[i] + conj_y[j]).to_f64();
            report.record(&[x, y], x * y, rhs, x * y);
        }
    }
    report
}

/// The sandwich `x < Φ⁻¹(x)·Φ*⁻¹(x) <= 2x`, checked non-strictly (`x = 0`
/// exempt from the lower bound).
pub fn check_eq12(phi: &YoungFunction, grid: &Grid) -> InequalityReport {
    let conj = phi.complementary();
    let mut report = InequalityReport::new("inverse_product_sandwich", 1e-9);
    for x in grid.values() {
        let prod = phi.generalized_inverse(x) * conj.generalized_inverse(x);
        let upper = prod - 2.0 * x;
        let lower = if x == 0.0 { f64::NEG_INFINITY } else { x - prod };
        let excess = upper.max(lower);
        report.record(&[x, prod], excess, 0.0, x);
    }
    report
}

/// `Φ(Φ⁻¹(y)) <= y` and `x <= Φ⁻¹(Φ(x))` on the grid.
pub fn check_inverse_sandwich(phi: &YoungFunction, grid: &Grid) -> InequalityReport {
    let mut report = InequalityReport::new("inverse_sandwich", 1e-9);
    for t in grid.values() {
        let back = phi.evaluate(phi.generalized_inverse(t)).to_f64();
        report.record(&[t, back], back, t, t);
        if let ExtendedReal::Finite(v) = phi.evaluate(t) {
            let again = phi.generalized_inverse(v);
            report.record(&[t, again], t, again, t);
        }
    }
    report
}

/// Verdict of a growth-condition evidence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// Bounded constant with no upward trend over the grid.
    Holds,
    /// The sampled ratio keeps growing towards the top of the grid.
    UnboundedTrend,
    /// A finite argument produced an infinite value.
    Violation,
    /// `Φ` vanishes on the whole range.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvidence {
    pub condition: String,
    /// `K̂` (Δ₂), `ĉ` (Δ′) or `b̂` (∇′).
    pub constant: ExtendedReal,
    pub verdict: GrowthVerdict,
    pub worst_point: Vec<f64>,
    pub grid: Grid,
}

impl GrowthEvidence {
    pub fn holds(&self) -> bool {
        self.verdict == GrowthVerdict::Holds
    }

    /// The constant when the condition holds on the grid.
    pub fn constant_if_holds(&self) -> Option<f64> {
        self.holds().then(|| self.constant.to_f64())
    }
}

fn evidence_start(phi: &YoungFunction, x0: f64) -> f64 {
    let eps = 1e-6 * (1.0 + phi.a_phi);
    x0.max(phi.a_phi + eps).max(1e-6)
}

fn ratio_of(phi: &YoungFunction, num: f64, dens: &[f64]) -> f64 {
    let n = phi.evaluate(num);
    let d: Vec<ExtendedReal> = dens.iter().map(|&t| phi.evaluate(t)).collect();
    let direct = d.iter().try_fold(1.0, |acc, v| v.finite().map(|v| acc * v));
    match (n, direct) {
        (ExtendedReal::Finite(n), Some(den)) if den > 0.0 && den.is_finite() && n > 0.0 => n / den,
        _ => (phi.ln_evaluate(num) - dens.iter().map(|&t| phi.ln_evaluate(t)).sum::<f64>()).exp(),
    }
}

/// Δ₂ evidence: `K̂ = max Φ(2x)/Φ(x)` on `[max(x0, a_Φ+ε), horizon]`.
pub fn check_delta2(phi: &YoungFunction, x0: f64, horizon: f64) -> GrowthEvidence {
    let start = evidence_start(phi, x0);
    let grid = Grid::log(start, horizon.max(start * 2.0), 200);
    let xs = grid.values();
    let mut ratios = Vec::with_capacity(xs.len());
    let mut worst = vec![start];
    let mut best = 0.0f64;
    for &x in &xs {
        let v = phi.evaluate(x);
        if v == ExtendedReal::ZERO || v.is_infinite() {
            continue;
        }
        if phi.evaluate(2.0 * x).is_infinite() && phi.b_phi.is_finite() {
            return GrowthEvidence {
                condition: "delta2".into(),
                constant: ExtendedReal::Infinite,
                verdict: GrowthVerdict::Violation,
                worst_point: vec![x],
                grid,
            };
        }
        let r = ratio_of(phi, 2.0 * x, &[x]);
        if r > best {
            best = r;
            worst = vec![x];
        }
        ratios.push(r);
    }
    finish_evidence("delta2", ratios, best, worst, grid, true)
}

fn finish_evidence(
    condition: &str,
    ratios: Vec<f64>,
    best: f64,
    worst: Vec<f64>,
    grid: Grid,
    growing_is_bad: bool,
) -> GrowthEvidence {
    if ratios.is_empty() {
        return GrowthEvidence {
            condition: condition.into(),
            constant: ExtendedReal::ZERO,
            verdict: GrowthVerdict::Degenerate,
            worst_point: worst,
            grid,
        };
    }
    let n = ratios.len();
    let third = (n / 3).max(1);
    let mid = ratios[third.min(n - 1)..(2 * third).min(n).max(third + 1).min(n)]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let top = ratios[(2 * third).min(n - 1)..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let trending = if growing_is_bad {
        !top.is_finite() || top > (1.0 + TREND_DELTA) * mid
    } else {
        top < mid / (1.0 + TREND_DELTA)
    };
    GrowthEvidence {
        condition: condition.into(),
        constant: ExtendedReal::from_f64(best),
        verdict: if trending { GrowthVerdict::UnboundedTrend } else { GrowthVerdict::Holds },
        worst_point: worst,
        grid,
    }
}

/// Δ′ evidence: `ĉ = max Φ(xy)/(Φ(x)Φ(y))` over grid pairs `x, y >= x0`.
pub fn check_delta_prime(phi: &YoungFunction, x0: f64, horizon: f64) -> GrowthEvidence {
    let start = evidence_start(phi, x0);
    let grid = Grid::log(start, horizon.max(start * 2.0), 48);
    let xs = grid.values();
    // ratios indexed by max(i, j) so the trend follows the grid upwards
    let mut by_level = vec![f64::NEG_INFINITY; xs.len()];
    let mut best = 0.0f64;
    let mut worst = vec![start, start];
    let mut any = false;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate().skip(i) {
            let (fx, fy) = (phi.evaluate(x), phi.evaluate(y));
            if fx == ExtendedReal::ZERO || fy == ExtendedReal::ZERO || fx.is_infinite() || fy.is_infinite() {
                continue;
            }
            if phi.evaluate(x * y).is_infinite() && phi.b_phi.is_finite() {
                return GrowthEvidence {
                    condition: "delta_prime".into(),
                    constant: ExtendedReal::Infinite,
                    verdict: GrowthVerdict::Violation,
                    worst_point: vec![x, y],
                    grid,
                };
            }
            any = true;
            let r = ratio_of(phi, x * y, &[x, y]);
            if r > best || r.is_nan() {
                best = if r.is_nan() { f64::INFINITY } else { r };
                worst = vec![x, y];
            }
            by_level[j] = by_level[j].max(r);
        }
    }
    let ratios: Vec<f64> = if any { by_level.into_iter().filter(|r| *r > f64::NEG_INFINITY).collect() } else { vec![] };
    finish_evidence("delta_prime", ratios, best, worst, grid, true)
}

/// ∇′ evidence: the smallest power of two `b̂` with `Φ(b̂xy) >= Φ(x)Φ(y)` on
/// all grid pairs `x, y >= x0`.
pub fn check_nabla_prime(phi: &YoungFunction, x0: f64, horizon: f64) -> GrowthEvidence {
    let start = evidence_start(phi, x0);
    let grid = Grid::log(start, horizon.max(start * 2.0), 48);
    let xs = grid.values();
    let mut by_level = vec![f64::INFINITY; xs.len()];
    let mut pairs = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate().skip(i) {
            let (fx, fy) = (phi.evaluate(x), phi.evaluate(y));
            if fx == ExtendedReal::ZERO || fx.is_infinite() || fy.is_infinite() {
                continue;
            }
            let r = ratio_of(phi, x * y, &[x, y]);
            by_level[j] = by_level[j].min(r);
            pairs.push((x, y));
        }
    }
    let ratios: Vec<f64> = by_level.into_iter().filter(|r| r.is_finite()).collect();
    let mut b = 1.0;
    let mut worst = vec![start, start];
    let found = (0..=60).any(|k| {
        b = 2f64.powi(k);
        pairs.iter().all(|&(x, y)| {
            let ok = phi.ln_evaluate(b * x * y) >= phi.ln_evaluate(x) + phi.ln_evaluate(y) - 1e-12;
            if !ok {
                worst = vec![x, y];
            }
            ok
        })
    });
    let mut ev = finish_evidence("nabla_prime", ratios, 0.0, worst, grid, false);
    if ev.verdict != GrowthVerdict::Degenerate {
        ev.constant = if found { ExtendedReal::Finite(b) } else { ExtendedReal::Infinite };
        if !found {
            ev.verdict = GrowthVerdict::UnboundedTrend;
        }
    }
    ev
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceMode {
    AtInfinity,
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceConfig {
    /// Scales `a` tried in increasing order; the last is `A_max`.
    pub scales: Vec<f64>,
    pub grid: Grid,
    /// At infinity a witness must cover at least this many top decades.
    pub tail_decades: f64,
}

impl Default for DominanceConfig {
    fn default() -> Self {
        DominanceConfig {
            scales: (0..=20).map(|k| 2f64.powi(k)).collect(),
            grid: Grid::decades(1e-6, 1e18, 10),
            tail_decades: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum DominanceRelation {
    /// `Ψ(x) <= Φ(a·x)` at every sampled `x >= x0`.
    HoldsWithWitness { a: f64, x0: f64 },
    /// `Ψ(x_star) > Φ(a_max·x_star)`.
    Counterevidence { x_star: f64, a_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub relation: DominanceRelation,
    pub global: bool,
    pub grid: Grid,
}

impl DominanceVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.relation, DominanceRelation::HoldsWithWitness { .. })
    }
}

/// Searches for evidence that `Φ` is stronger than `Ψ` (`Ψ(x) <= Φ(ax)`).
pub fn dominance(
    phi: &YoungFunction,
    psi: &YoungFunction,
    mode: DominanceMode,
    config: &DominanceConfig,
) -> DominanceVerdict {
    let xs = config.grid.values();
    let x_max = *xs.last().expect("non-empty grid");
    let tail_start = x_max / 10f64.powf(config.tail_decades);
    let mut last_fail = x_max;
    for &a in &config.scales {
        let ok: Vec<bool> = xs
            .iter()
            .map(|&x| {
                let lhs = psi.evaluate(x);
                let rhs = phi.evaluate(a * x);
                lhs <= rhs || lhs.approx_eq(&rhs, 1e-12)
            })
            .collect();
        let k = ok.iter().rposition(|&b| !b).map_or(0, |i| i + 1);
        if k == 0 {
            return DominanceVerdict {
                relation: DominanceRelation::HoldsWithWitness { a, x0: 0.0 },
                global: true,
                grid: config.grid.clone(),
            };
        }
        if mode == DominanceMode::AtInfinity && k < xs.len() && xs[k] <= tail_start {
            return DominanceVerdict {
                relation: DominanceRelation::HoldsWithWitness { a, x0: xs[k] },
                global: false,
                grid: config.grid.clone(),
            };
        }
        last_fail = xs[k - 1];
    }
    DominanceVerdict {
        relation: DominanceRelation::Counterevidence {
            x_star: last_fail,
            a_max: *config.scales.last().expect("non-empty scales"),
        },
        global: mode == DominanceMode::Global,
        grid: config.grid.clone(),
    }
}

/// `Φ(xy) <= Ψ(x) + Θ(y)` on all grid pairs.
pub fn check_product_premise(
    phi: &YoungFunction,
    psi: &YoungFunction,
    theta: &YoungFunction,
    grid: &Grid,
) -> InequalityReport {
    let xs = grid.values();
    let mut report = InequalityReport::new("product_premise", 1e-9);
    for &x in &xs {
        for &y in &xs {
            let lhs = phi.evaluate(x * y);
            let rhs = psi.evaluate(x) + theta.evaluate(y);
            if rhs.is_infinite() {
                report.record(&[x, y], 0.0, 1.0, 1.0);
                continue;
            }
            let rhs = rhs.to_f64();
            report.record(&[x, y], lhs.to_f64(), rhs, rhs);
        }
    }
    report
}

pub(crate) fn require(report: InequalityReport, what: &str) -> Result<InequalityReport> {
    if report.passed() {
        Ok(report)
    } else {
        Err(Error::premise(
            what,
            report.worst_point.clone().unwrap_or_default(),
            report.max_excess,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaL2Report {
    pub premise: InequalityReport,
    /// `Ψ⁻¹(t)Θ⁻¹(t) <= 2Φ⁻¹(t)`.
    pub inverse_bound: InequalityReport,
    pub dominance: DominanceVerdict,
    /// The dominance search found counterevidence, i.e. `Ψ` is not weaker
    /// than `Φ` at infinity.
    pub not_dominated: bool,
}

/// Given `Φ(xy) <= Ψ(x) + Θ(y)`, checks `Ψ⁻¹Θ⁻¹ <= 2Φ⁻¹` and that `Φ` is
/// not stronger than `Ψ` at infinity.
pub fn check_lemma_l2(
    phi: &YoungFunction,
    psi: &YoungFunction,
    theta: &YoungFunction,
    grid: &Grid,
) -> Result<LemmaL2Report> {
    let premise = require(check_product_premise(phi, psi, theta, grid), "Φ(xy) <= Ψ(x) + Θ(y)")?;
    let mut inverse_bound = InequalityReport::new("inverse_product_bound", 1e-9);
    for t in grid.values() {
        let lhs = psi.generalized_inverse(t) * theta.generalized_inverse(t);
        let rhs = 2.0 * phi.generalized_inverse(t);
        inverse_bound.record(&[t], lhs, rhs, rhs);
    }
    let dominance = dominance(phi, psi, DominanceMode::AtInfinity, &DominanceConfig::default());
    let not_dominated = !dominance.holds();
    Ok(LemmaL2Report {
        premise,
        inverse_bound,
        dominance,
        not_dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> YoungFunction {
        YoungFunction::power(2.0, true).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(sq().evaluate(2.0), ExtendedReal::Finite(2.0));
        assert_eq!(YoungFunction::power(3.0, false).unwrap().evaluate(-2.0), ExtendedReal::Finite(8.0));
        for f in [sq(), YoungFunction::exp_growth(), YoungFunction::piecewise_linear(&[[1.0, 1.0]], None).unwrap()] {
            assert_eq!(f.evaluate(0.0), ExtendedReal::ZERO);
        }
    }

    #[test]
    fn cutoff_is_left_continuous() {
        let f = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
        assert_eq!(f.evaluate(1.0), ExtendedReal::Finite(1.0));
        assert_eq!(f.evaluate(1.0 + 1e-12), ExtendedReal::Infinite);
        assert_eq!(f.b_phi(), 1.0);
        // Φ never exceeds 5 on [0, b]: inverse returns b
        assert_eq!(f.generalized_inverse(5.0), 1.0);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(sq().generalized_inverse(2.0), 2.0);
        assert_eq!(YoungFunction::exp_growth().generalized_inverse(0.0), 0.0);
        let unscaled = YoungFunction::power(2.0, false).unwrap();
        assert_eq!(unscaled.generalized_inverse(9.0), 3.0);
    }

    #[test]
    fn bisection_inverse_matches_closed_form() {
        // force the generic path through a composition with the identity-like |x|
        let id = YoungFunction::piecewise_linear(&[[1.0, 1.0]], None).unwrap();
        let comp = YoungFunction::composed(&YoungFunction::power(2.0, false).unwrap(), &id);
        assert!((comp.bisect_inverse(9.0) - 3.0).abs() < 1e-14);
        let pw = YoungFunction::power(2.0, false).unwrap();
        assert!((pw.bisect_inverse(9.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn piecewise_rejects_nonconvex() {
        let err = YoungFunction::piecewise_linear(&[[1.0, 2.0], [2.0, 2.5]], None).unwrap_err();
        assert!(matches!(err, Error::InvalidYoung(_)));
        assert!(YoungFunction::piecewise_linear(&[[1.0, 0.0]], None).is_err());
    }

    #[test]
    fn piecewise_a_phi() {
        let f = YoungFunction::piecewise_linear(&[[1.0, 0.0], [2.0, 1.0]], None).unwrap();
        assert_eq!(f.a_phi(), 1.0);
        assert_eq!(f.generalized_inverse(0.0), 1.0);
        assert_eq!(f.generalized_inverse(0.5), 1.5);
    }

    #[test]
    fn complementary_examples() {
        let c = sq().complementary();
        assert_eq!(c.as_power(), Some((2.0, true)));
        assert_eq!(c.evaluate(0.0), ExtendedReal::ZERO);
        let c3 = YoungFunction::power(3.0, true).unwrap();
        let numeric = c3.numeric_complementary().evaluate(1.0).to_f64();
        let closed = 1.0f64.powf(1.5) / 1.5;
        assert!((numeric - closed).abs() < 1e-12, "{numeric} vs {closed}");
    }

    #[test]
    fn conjugate_of_abs_is_indicator() {
        let abs = YoungFunction::piecewise_linear(&[[1.0, 1.0]], None).unwrap();
        let c = abs.complementary();
        assert_eq!((c.a_phi(), c.b_phi()), (1.0, 1.0));
        assert_eq!(c.evaluate(0.5), ExtendedReal::ZERO);
        assert_eq!(c.evaluate(1.0), ExtendedReal::ZERO);
        assert_eq!(c.evaluate(1.5), ExtendedReal::Infinite);
        assert_eq!(c.generalized_inverse(3.0), 1.0);
    }

    #[test]
    fn exp_conjugate_closed_form() {
        let c = YoungFunction::exp_growth().complementary();
        for y in [1e-3, 0.5, 1.0, 10.0, 1e3, 1e8] {
            let want = (1.0 + y) * (y as f64).ln_1p() - y;
            let got = c.evaluate(y).to_f64();
            assert!((got - want).abs() <= 1e-9 * want, "y={y}: {got} vs {want}");
        }
    }

    #[test]
    fn young_inequality_examples() {
        let r = check_young_inequality(&sq(), &Grid::Explicit { values: vec![0.0, 1.0, 5.0] });
        assert!(r.passed());
        // (1, 1) is an equality case
        assert_eq!(sq().evaluate(1.0) + sq().complementary().evaluate(1.0), ExtendedReal::Finite(1.0));
        let r = check_young_inequality(&YoungFunction::exp_growth(), &Grid::linear(0.0, 10.0, 21));
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn eq12_examples() {
        let f = sq();
        let p = f.generalized_inverse(1.0) * f.complementary().generalized_inverse(1.0);
        assert!((p - 2.0).abs() < 1e-15);
        assert!(check_eq12(&f, &Grid::Explicit { values: vec![0.0, 1.0] }).passed());
        let f4 = YoungFunction::power(4.0, true).unwrap();
        let x: f64 = 2.0;
        let p = f4.generalized_inverse(x) * f4.complementary().generalized_inverse(x);
        let closed = (4.0 * x).powf(0.25) * (4.0 / 3.0 * x).powf(0.75);
        assert!((p - closed).abs() < 1e-12);
        assert!(p > x && p <= 2.0 * x);
    }

    #[test]
    fn delta2_examples() {
        let ev = check_delta2(&sq(), 0.0, 1e6);
        assert!(ev.holds());
        assert!((ev.constant.to_f64() - 4.0).abs() < 1e-12);
        let ev = check_delta2(&YoungFunction::exp_growth(), 0.0, 50.0);
        assert_eq!(ev.verdict, GrowthVerdict::UnboundedTrend);
        let pw = YoungFunction::piecewise_linear(&[[0.5, 0.1], [1.0, 1.0]], None).unwrap();
        let ev = check_delta2(&pw, 100.0, 1e6);
        assert!(ev.holds());
        assert!(ev.constant.to_f64() <= 2.01, "{:?}", ev.constant);
        let cut = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(4.0)).unwrap();
        assert_eq!(check_delta2(&cut, 0.0, 10.0).verdict, GrowthVerdict::Violation);
    }

    #[test]
    fn delta_prime_examples() {
        let ev = check_delta_prime(&sq(), 1.0, 1e4);
        assert!(ev.holds());
        assert!((ev.constant.to_f64() - 2.0).abs() < 1e-12);
        let ev = check_delta_prime(&YoungFunction::power(3.0, false).unwrap(), 1.0, 1e4);
        assert!((ev.constant.to_f64() - 1.0).abs() < 1e-12);
        let ev = check_delta_prime(&YoungFunction::exp_growth(), 1.0, 100.0);
        assert_ne!(ev.verdict, GrowthVerdict::Holds);
    }

    #[test]
    fn nabla_prime_power() {
        // (bxy)^2/2 >= x^2 y^2 / 4 iff b^2 >= 1/2: b = 1
        let ev = check_nabla_prime(&sq(), 1.0, 1e4);
        assert!(ev.holds());
        assert_eq!(ev.constant, ExtendedReal::Finite(1.0));
    }

    #[test]
    fn dominance_examples() {
        let cfg = DominanceConfig::default();
        let p4 = YoungFunction::power(4.0, true).unwrap();
        let v = dominance(&p4, &sq(), DominanceMode::AtInfinity, &cfg);
        match v.relation {
            DominanceRelation::HoldsWithWitness { a, x0 } => {
                assert_eq!(a, 1.0);
                assert!(x0 >= 2f64.sqrt() && x0 < 1.3 * 2f64.sqrt(), "x0 = {x0}");
            }
            other => panic!("{other:?}"),
        }
        let v = dominance(&sq(), &sq(), DominanceMode::Global, &cfg);
        assert_eq!(v.relation, DominanceRelation::HoldsWithWitness { a: 1.0, x0: 0.0 });
        assert!(v.global);
        let v = dominance(&sq(), &p4, DominanceMode::AtInfinity, &cfg);
        match v.relation {
            DominanceRelation::Counterevidence { x_star, a_max } => {
                assert!(p4.evaluate(x_star) > sq().evaluate(a_max * x_star));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lemma_l2_abs_and_squares() {
        let abs = YoungFunction::piecewise_linear(&[[1.0, 1.0]], None).unwrap();
        let r = check_lemma_l2(&abs, &sq(), &sq(), &Grid::decades(1e-3, 1e3, 5)).unwrap();
        assert!(r.inverse_bound.passed());
        assert!(r.not_dominated);
        // equality: sqrt(2t)^2 = 2t
        assert!(r.inverse_bound.max_excess.abs() < 1e-9);
    }

    #[test]
    fn lemma_l2_premise_violation() {
        let p4 = YoungFunction::power(4.0, true).unwrap();
        let err = check_lemma_l2(&p4, &sq(), &sq(), &Grid::decades(1e-2, 1e2, 4)).unwrap_err();
        assert!(matches!(err, Error::PremiseViolation { .. }));
    }

    #[test]
    fn composed_bounds_and_inverse() {
        // Ψ∘Φ⁻¹ with Ψ = x^4/4, Φ = x^2/2 is (2x)^2/4 = x^2
        let p4 = YoungFunction::power(4.0, true).unwrap();
        let c = YoungFunction::composed_with_inverse(&p4, &sq());
        assert_eq!((c.a_phi(), c.b_phi()), (0.0, f64::INFINITY));
        assert!((c.evaluate(3.0).to_f64() - 9.0).abs() < 1e-12);
        assert!((c.generalized_inverse(9.0) - 3.0).abs() < 1e-12);
        assert!(c.validate_convexity(&Grid::decades(1e-2, 1e2, 4)).passed());
    }

    #[test]
    fn spec_round_trip() {
        let js = r#"{"family":"composed","outer":{"family":"power","p":4.0,"scaled":true},"inner_inverse":{"family":"power","p":2.0,"scaled":true}}"#;
        let spec: YoungSpec = serde_json::from_str(js).unwrap();
        let f = YoungFunction::from_spec(&spec).unwrap();
        assert_eq!(f.to_spec(), spec);
    }
}
