//! Sample grids. Every evidence check carries the grid it was evaluated on so
//! that verdicts are reproducible.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// `points` values spaced geometrically on `[lo, hi]`.
    Log { lo: f64, hi: f64, points: usize },
    /// `points` values spaced evenly on `[lo, hi]`.
    Linear { lo: f64, hi: f64, points: usize },
    Explicit { values: Vec<f64> },
}

impl Grid {
    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        Grid::Log { lo, hi, points }
    }

    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        Grid::Linear { lo, hi, points }
    }

    /// Log grid with `per_decade` points per factor of ten, endpoints included.
    pub fn decades(lo: f64, hi: f64, per_decade: usize) -> Self {
        let n = ((hi / lo).log10() * per_decade as f64).round() as usize + 1;
        Grid::log(lo, hi, n.max(2))
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Log { lo, hi, points } => {
                if *points <= 1 {
                    return vec![*lo];
                }
                let (a, b) = (lo.ln(), hi.ln());
                (0..*points)
                    .map(|i| {
                        if i + 1 == *points {
                            *hi
                        } else if i == 0 {
                            *lo
                        } else {
                            (a + (b - a) * i as f64 / (*points - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
            Grid::Linear { lo, hi, points } => {
                if *points <= 1 {
                    return vec![*lo];
                }
                (0..*points)
                    .map(|i| lo + (hi - lo) * i as f64 / (*points - 1) as f64)
                    .collect()
            }
            Grid::Explicit { values } => values.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_exact() {
        let v = Grid::decades(1e-3, 1e3, 10).values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 1e-3);
        assert_eq!(v[60], 1e3);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}

/// Outcome of checking an inequality `lhs <= rhs + tol` over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen (negative when every sample has slack).
    pub max_excess: f64,
    pub worst_point: Option<Vec<f64>>,
    pub tolerance: f64,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        InequalityReport {
            name: name.into(),
            checked: 0,
            violations: 0,
            max_excess: f64::NEG_INFINITY,
            worst_point: None,
            tolerance,
        }
    }

    /// Records one sample; `scale` multiplies the relative tolerance.
    pub fn record(&mut self, point: &[f64], lhs: f64, rhs: f64, scale: f64) {
        self.checked += 1;
        let excess = if rhs == f64::INFINITY { f64::NEG_INFINITY } else { lhs - rhs };
        let excess = if excess.is_nan() { f64::INFINITY } else { excess };
        if excess > self.max_excess || self.worst_point.is_none() {
            self.max_excess = excess;
            self.worst_point = Some(point.to_vec());
        }
        if excess > self.tolerance * scale.max(1.0) {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}
