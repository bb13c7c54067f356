//! Shared scalar routines: compensated summation, golden-section search and
//! predicate bisection.

use crate::extended::ExtendedReal;

/// Neumaier summation that saturates at `+∞`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
    infinite: bool,
}

impl CompensatedSum {
    pub fn add(&mut self, x: ExtendedReal) {
        match x {
            ExtendedReal::Infinite => self.infinite = true,
            ExtendedReal::Finite(v) => self.add_f64(v),
        }
    }

    pub fn add_f64(&mut self, v: f64) {
        if v == f64::INFINITY {
            self.infinite = true;
            return;
        }
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> ExtendedReal {
        if self.infinite {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::from_f64(self.sum + self.comp)
        }
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in xs {
        acc.add_f64(x);
    }
    acc.total().to_f64()
}

pub(crate) const GOLDEN_MAX_ITER: usize = 200;
pub(crate) const GOLDEN_ABS_TOL: f64 = 1e-12;
pub(crate) const GOLDEN_REL_TOL: f64 = 1e-10;

/// Result of maximizing a concave objective over `[0, limit]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Maximum {
    Value(f64),
    /// The objective was still increasing at the search horizon.
    Unbounded,
}

/// Maximizes a concave `g` on `[0, limit]` with `g(0) = 0` assumed available.
///
/// Brackets by doubling from 1 (expansion factor 2) until the objective
/// decreases, then runs golden-section search. A non-finite objective while
/// still increasing, or passing `horizon`, reports [`Maximum::Unbounded`].
pub(crate) fn maximize_concave<G: Fn(f64) -> f64>(g: G, limit: f64, horizon: f64) -> Maximum {
    let g0 = g(0.0);
    let (lo, hi) = if limit.is_finite() {
        (0.0, limit)
    } else {
        let mut h = 1.0;
        let mut gh = g(h);
        if gh > g0 {
            loop {
                let next = 2.0 * h;
                if next > horizon {
                    return Maximum::Unbounded;
                }
                let gn = g(next);
                // Non-finite while still increasing: the maximum is beyond
                // what floating point can represent.
                if !gn.is_finite() {
                    return Maximum::Unbounded;
                }
                if gn <= gh {
                    break;
                }
                h = next;
                gh = gn;
            }
        }
        if h <= 1.0 {
            (0.0, 2.0)
        } else {
            (0.5 * h, 2.0 * h)
        }
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    let mut best = g0.max(g(hi)).max(g(lo));
    for _ in 0..GOLDEN_MAX_ITER {
        if (b - a).abs() <= GOLDEN_ABS_TOL + GOLDEN_REL_TOL * c.abs().max(d.abs()) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    for v in [gc, gd] {
        if v > best {
            best = v;
        }
    }
    if best == f64::INFINITY {
        Maximum::Unbounded
    } else {
        Maximum::Value(best.max(0.0))
    }
}

/// Smallest float `x` in `(lo, hi]` with `pred(x)` true, for a predicate that
/// is false at `lo`, true at `hi` and monotone in between.
pub(crate) fn bisect_predicate<P: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, pred: P) -> f64 {
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
