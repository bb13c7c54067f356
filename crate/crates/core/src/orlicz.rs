//! The modular `I_Φ`, the Luxemburg norm, and membership trends for
//! parametric families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::measure::{MeasureSpace, SimpleFunction};
use crate::numeric::CompensatedSum;
use crate::young::YoungFunction;

/// Relative bracket width at which norm bisection stops.
pub const NORM_REL_TOL: f64 = 1e-10;
const NORM_MAX_ITER: usize = 200;
const TREND_DELTA: f64 = 0.05;

/// `I_Φ(f) = Σ Φ(f)·μ`, saturating at `∞`.
pub fn modular(phi: &YoungFunction, f: &SimpleFunction, space: &MeasureSpace) -> ExtendedReal {
    scaled_modular(phi, f, space, 1.0)
}

/// `I_Φ(f / k)`.
fn scaled_modular(phi: &YoungFunction, f: &SimpleFunction, space: &MeasureSpace, k: f64) -> ExtendedReal {
    let mut sum = CompensatedSum::default();
    for c in space.cells() {
        let v = f.get(&c.id);
        if v != 0.0 {
            sum.add(phi.evaluate(v / k) * c.mass);
            if sum.total().is_infinite() {
                return ExtendedReal::Infinite;
            }
        }
    }
    sum.total()
}

/// `‖f‖_Φ` with the bisection certificate `bracket = (k_lo, k_hi)`:
/// `I_Φ(f/k_hi) <= 1 < I_Φ(f/k_lo)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LuxemburgNorm {
    pub value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

impl LuxemburgNorm {
    /// Relative width of the certificate bracket.
    pub fn rel_width(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            (self.bracket.1 - self.bracket.0) / self.bracket.1
        }
    }
}

/// `‖f‖_Φ = inf{k > 0 : I_Φ(f/k) <= 1}` by bisection over an expanding
/// bracket.
pub fn luxemburg_norm(phi: &YoungFunction, f: &SimpleFunction, space: &MeasureSpace) -> Result<LuxemburgNorm> {
    let max = space.cells().iter().map(|c| f.get(&c.id).abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(LuxemburgNorm {
            value: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    if !max.is_finite() {
        return Err(Error::NormUnbounded(max));
    }
    let fits = |k: f64| scaled_modular(phi, f, space, k) <= ExtendedReal::Finite(1.0);
    let mut iterations = 0;
    let mut hi = max * (1.0 + space.total_mass());
    while !fits(hi) {
        iterations += 1;
        hi *= 2f64.powi(8);
        if !hi.is_finite() {
            return Err(Error::NormUnbounded(f64::MAX));
        }
    }
    let step = 2f64.powi(-60);
    let mut lo = hi * step;
    while fits(lo) {
        iterations += 1;
        hi = lo;
        lo *= step;
        if lo == 0.0 {
            // Φ vanishes on every value of f/k: the norm is 0 to machine precision
            return Ok(LuxemburgNorm {
                value: 0.0,
                iterations,
                bracket: (0.0, hi),
            });
        }
    }
    for _ in 0..NORM_MAX_ITER {
        if hi - lo <= NORM_REL_TOL * hi {
            break;
        }
        iterations += 1;
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LuxemburgNorm {
        value: hi,
        iterations,
        bracket: (lo, hi),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    Diverging,
    Inconclusive,
}

/// Partial sums `I_Φ(k f)` at truncations `N, 2N, 4N` for one `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub k: f64,
    pub sums: [ExtendedReal; 3],
}

impl TrendRow {
    fn increments(&self) -> Option<(f64, f64)> {
        let [a, b, c] = self.sums.map(|s| s.finite());
        Some((b? - a?, c? - b?))
    }

    fn is_flat(&self) -> bool {
        match (self.increments(), self.sums[2].finite()) {
            (Some((inc1, inc2)), Some(total)) => inc2 <= 1e-9 * total || inc2 <= 0.5 * inc1,
            _ => false,
        }
    }

    fn is_growing(&self) -> bool {
        match self.increments() {
            Some((inc1, inc2)) => {
                let s_n = self.sums[0].to_f64();
                self.sums[1].to_f64() > (1.0 + TREND_DELTA) * s_n && inc2 >= 0.95 * inc1
            }
            None => self.sums[2].is_infinite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipTrend {
    pub verdict: Membership,
    pub truncations: [usize; 3],
    pub rows: Vec<TrendRow>,
}

/// The scales `k = 2^0, 2^-2, …, 2^-20` tried by [`membership_trend`].
pub fn trend_scales() -> Vec<f64> {
    (0..=10).map(|i| 2f64.powi(-2 * i)).collect()
}

/// Classifies `f ∈ L^Φ` for a family materialized at `N, 2N, 4N` by
/// `materialize`.
///
/// Member when some `k` gives a flat partial-sum sequence (last increment
/// below `1e-9` of the sum, or at most half the previous increment);
/// diverging when every `k` grows by more than 5% with non-shrinking
/// increments.
pub fn membership_trend<M>(phi: &YoungFunction, n: usize, materialize: M) -> Result<MembershipTrend>
where
    M: Fn(usize) -> Result<(MeasureSpace, SimpleFunction)>,
{
    let truncations = [n, 2 * n, 4 * n];
    let mats = truncations
        .iter()
        .map(|&t| materialize(t))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<TrendRow> = trend_scales()
        .into_iter()
        .map(|k| TrendRow {
            k,
            sums: [0, 1, 2].map(|i| modular(phi, &mats[i].1.scale(k), &mats[i].0)),
        })
        .collect();
    let verdict = if rows.iter().any(TrendRow::is_flat) {
        Membership::Member
    } else if rows.iter().all(TrendRow::is_growing) {
        Membership::Diverging
    } else {
        Membership::Inconclusive
    };
    Ok(MembershipTrend {
        verdict,
        truncations,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::atom_id;

    fn unit_atom() -> MeasureSpace {
        MeasureSpace::new([("A", 1.0)], Vec::<(String, f64)>::new()).unwrap()
    }

    #[test]
    fn modular_examples() {
        let s = unit_atom();
        let sq = YoungFunction::power(2.0, true).unwrap();
        assert_eq!(modular(&sq, &SimpleFunction::zero(), &s), ExtendedReal::ZERO);
        assert_eq!(modular(&sq, &SimpleFunction::constant(&s, 1.0), &s), ExtendedReal::Finite(0.5));
        let cut = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
        assert_eq!(modular(&cut, &SimpleFunction::constant(&s, 2.0), &s), ExtendedReal::Infinite);
    }

    #[test]
    fn norm_examples() {
        let s = unit_atom();
        let sq = YoungFunction::power(2.0, true).unwrap();
        assert_eq!(luxemburg_norm(&sq, &SimpleFunction::zero(), &s).unwrap().value, 0.0);
        let n = luxemburg_norm(&sq, &SimpleFunction::constant(&s, 1.0), &s).unwrap();
        assert!((n.value - 0.5f64.sqrt()).abs() <= 1e-10);
        assert!(n.rel_width() <= NORM_REL_TOL);
        let p2 = YoungFunction::power(2.0, false).unwrap();
        let n = luxemburg_norm(&p2, &SimpleFunction::constant(&s, 2.0), &s).unwrap();
        assert!((n.value - 2.0).abs() <= 2e-10);
    }

    #[test]
    fn norm_with_cutoff() {
        // Φ = |x| up to 1, ∞ beyond: ‖f‖ = max(‖f‖_1, ‖f‖_∞)
        let s = MeasureSpace::new([("a", 0.25), ("b", 0.25)], Vec::<(String, f64)>::new()).unwrap();
        let cut = YoungFunction::piecewise_linear(&[[1.0, 1.0]], Some(1.0)).unwrap();
        let f = SimpleFunction::from_values([("a", 3.0), ("b", 1.0)]);
        let n = luxemburg_norm(&cut, &f, &s).unwrap();
        assert!((n.value - 3.0).abs() <= 3e-10, "{n:?}");
    }

    fn parametric(mass: fn(usize) -> f64) -> impl Fn(usize) -> Result<(MeasureSpace, SimpleFunction)> {
        move |n| {
            let space = MeasureSpace::new((1..=n).map(|k| (atom_id(k), mass(k))), Vec::<(String, f64)>::new())?;
            let f = SimpleFunction::constant(&space, 1.0);
            Ok((space, f))
        }
    }

    #[test]
    fn membership_examples() {
        let sq = YoungFunction::power(2.0, false).unwrap();
        let zero = |n: usize| -> Result<(MeasureSpace, SimpleFunction)> {
            let space = MeasureSpace::new((1..=n).map(|k| (atom_id(k), 1.0)), Vec::<(String, f64)>::new())?;
            Ok((space, SimpleFunction::zero()))
        };
        assert_eq!(membership_trend(&sq, 8, zero).unwrap().verdict, Membership::Member);
        let t = membership_trend(&sq, 16, parametric(|k| 2f64.powi(-(k as i32)))).unwrap();
        assert_eq!(t.verdict, Membership::Member);
        // partial sums at k = 1 are 1 - 2^-N
        let s = t.rows[0].sums[0].to_f64();
        assert!((s - (1.0 - 2f64.powi(-16))).abs() < 1e-15);
        let t = membership_trend(&sq, 16, parametric(|k| 1.0 / k as f64)).unwrap();
        assert_eq!(t.verdict, Membership::Diverging);
    }
}
