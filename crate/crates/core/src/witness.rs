//! Constructive unboundedness witnesses on the non-atomic part.
//!
//! Given `Ψ ⊀ Φ`, pick `y_n` with `Ψ(y_n) > Φ(2ⁿn³y_n)`, carve disjoint
//! `F_n ⊂ F` with `μ(F_n) = Φ(y₁)μ(F)/(2ⁿΦ(n³y_n))` and set
//! `f = Σ n²y_n χ_{F_n}`. Then `I_Φ(αf) < ∞` while `I_Ψ(α EM_u f) = ∞`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectation::ConditionalExpectation;
use crate::extended::ExtendedReal;
use crate::grid::InequalityReport;
use crate::mce::{MceOperator, TREND_DELTA};
use crate::measure::{MeasureSpace, SimpleFunction, SubSigmaAlgebra};
use crate::orlicz::{membership_trend, modular, MembershipTrend};
use crate::young::{dominance, DominanceConfig, DominanceMode, YoungFunction};

/// Refinement depth allowed when carving witness sets; the masses shrink
/// roughly like `2^{-n}/Φ(n³y_n)`.
pub const WITNESS_MAX_DEPTH: u32 = 1100;

/// Doublings tried per `y_n` before giving up.
const MAX_DOUBLINGS: usize = 4000;

/// `ln Φ` above which comparisons switch to the log domain.
const LOG_SWITCH: f64 = 230.0;

#[derive(Clone, Debug)]
pub struct WitnessSequence {
    pub y: Vec<f64>,
    /// `b_n = n²y_n`.
    pub b: Vec<f64>,
    /// Target masses `μ(F_n)`.
    pub f_masses: Vec<f64>,
    pub f_sets: Vec<Vec<String>>,
    pub truncation: usize,
    pub region_mass: f64,
    /// The refined space carrying the `F_n`.
    pub space: MeasureSpace,
    /// `f = Σ b_n χ_{F_n}` on `space`.
    pub f: SimpleFunction,
    phi_y1: f64,
}

impl WitnessSequence {
    /// `Φ(y₁)μ(F)`, the scale of both partial-sum bounds.
    pub fn scale(&self) -> f64 {
        self.phi_y1 * self.region_mass
    }

    /// `Σ_{k<=n} b_k χ_{F_k}`.
    pub fn partial_function(&self, n: usize) -> SimpleFunction {
        let mut f = SimpleFunction::zero();
        for (k, set) in self.f_sets.iter().enumerate().take(n) {
            for id in set {
                f.set(id, self.b[k]);
            }
        }
        f
    }

    /// `EM_u` with `u = 1` and the identity algebra on the refined space.
    pub fn identity_operator(&self, phi: &YoungFunction, psi: &YoungFunction) -> MceOperator {
        MceOperator::new(
            SimpleFunction::constant(&self.space, 1.0),
            ConditionalExpectation::identity(self.space.clone()),
            phi.clone(),
            psi.clone(),
        )
    }

    /// Carries an operator on the original space over to the refined one.
    pub fn lift_operator(&self, op: &MceOperator) -> Result<MceOperator> {
        let alg: SubSigmaAlgebra = op.expectation().algebra().lift(&self.space)?;
        Ok(MceOperator::new(
            self.space.lift_function(op.u()),
            ConditionalExpectation::new(self.space.clone(), alg)?,
            op.source().clone(),
            op.target().clone(),
        ))
    }
}

/// `a > b` for `a = Ψ(y)`, `b = Φ(x)`, exactly while both are moderate,
/// otherwise through `ln`.
fn exceeds(psi: &YoungFunction, y: f64, phi: &YoungFunction, x: f64) -> bool {
    let (lp, lf) = (psi.ln_evaluate(y), phi.ln_evaluate(x));
    if lp < LOG_SWITCH && lf < LOG_SWITCH {
        psi.evaluate(y) > phi.evaluate(x)
    } else {
        lp > lf
    }
}

/// Builds the witness on the non-atomic `region` up to truncation `n`.
pub fn build_witness(
    phi: &YoungFunction,
    psi: &YoungFunction,
    space: &MeasureSpace,
    region: &[String],
    n: usize,
) -> Result<WitnessSequence> {
    let dom = dominance(phi, psi, DominanceMode::AtInfinity, &DominanceConfig::default());
    if dom.holds() {
        return Err(Error::Precondition(
            "Ψ(x) <= Φ(ax) holds at infinity on the sampled range; no witness exists".into(),
        ));
    }
    let region_mass = space.measure(region)?;
    if !(region_mass > 0.0) {
        return Err(Error::Precondition("witness region has no mass".into()));
    }
    let mut y = Vec::with_capacity(n);
    let mut prev = 1.0f64;
    for k in 1..=n {
        let kf = k as f64;
        let factor = 2f64.powi(k as i32) * kf.powi(3);
        let mut cand = prev;
        let mut found = false;
        for _ in 0..MAX_DOUBLINGS {
            if !cand.is_finite() || !(factor * cand).is_finite() {
                break;
            }
            if exceeds(psi, cand, phi, factor * cand) {
                found = true;
                break;
            }
            cand *= 2.0;
        }
        if !found {
            return Err(Error::SearchFailure {
                n: k,
                reason: format!("no y with Ψ(y) > Φ({factor:e}·y) below the overflow horizon"),
            });
        }
        y.push(cand);
        prev = cand;
    }
    let ln_phi_y1 = y.first().map_or(0.0, |&y1| phi.ln_evaluate(y1));
    let ln_region = region_mass.ln();
    let f_masses: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, &yk)| {
            let kf = (i + 1) as f64;
            let x = kf.powi(3) * yk;
            let ln_den = kf * LN_2 + phi.ln_evaluate(x);
            if ln_phi_y1 < LOG_SWITCH && ln_den < LOG_SWITCH {
                let num = phi.evaluate(y[0]).to_f64() * region_mass;
                num / (2f64.powi(i as i32 + 1) * phi.evaluate(x).to_f64())
            } else {
                (ln_phi_y1 + ln_region - ln_den).exp()
            }
        })
        .collect();
    if let Some(k) = f_masses.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::SearchFailure {
            n: k + 1,
            reason: "μ(F_n) underflows".into(),
        });
    }
    let (refined, f_sets) = space.carve_subsets(region, &f_masses, WITNESS_MAX_DEPTH)?;
    let b: Vec<f64> = y.iter().enumerate().map(|(i, &yk)| ((i + 1) as f64).powi(2) * yk).collect();
    let mut f = SimpleFunction::zero();
    for (k, set) in f_sets.iter().enumerate() {
        for id in set {
            f.set(id, b[k]);
        }
    }
    Ok(WitnessSequence {
        phi_y1: y.first().map_or(0.0, |&y1| phi.evaluate(y1).to_f64()),
        y,
        b,
        f_masses,
        f_sets,
        truncation: n,
        region_mass,
        space: refined,
        f,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCertificate {
    pub alpha: f64,
    pub n0: usize,
    pub m0: usize,
    /// `I_Φ(α f_n)` for `n = 1..N`.
    pub phi_partial: Vec<f64>,
    /// `I_Ψ(α EM_u f_n)` for `n = 1..N`.
    pub psi_partial: Vec<ExtendedReal>,
    /// Increments of the `Φ` sums against `μ(F)Φ(y₁)2^{-n}` for `n >= n0`.
    pub geometric: InequalityReport,
    /// `μ(F)Φ(y₁)·Σ_{n=m0}^{N} 1/n`.
    pub harmonic_bound: f64,
    pub harmonic_holds: bool,
    /// `S_N / S_{N/2}` of the `Ψ` sums.
    pub ratio: ExtendedReal,
    pub ratio_holds: bool,
}

impl DivergenceCertificate {
    pub fn certified(&self) -> bool {
        self.geometric.passed() && self.harmonic_holds && self.ratio_holds
    }
}

/// Partial-sum certificate that `I_Φ(αf)` converges while
/// `I_Ψ(α EM_u f)` diverges. `op` must live on `ws.space`, with
/// `E(u) > 1/n` on `F_n` for every `n >= m0`.
pub fn certify_divergence(ws: &WitnessSequence, op: &MceOperator, alpha: f64) -> Result<DivergenceCertificate> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    let n = ws.truncation;
    let n0 = alpha.floor() as usize + 1;
    let m0 = (1.0 / alpha).floor() as usize + 1;
    let e = op.expectation();
    let eu = e.apply(op.u());
    for (k, set) in ws.f_sets.iter().enumerate().skip(m0 - 1) {
        let bound = 1.0 / (k + 1) as f64;
        if let Some(id) = set.iter().find(|id| !(eu.get(id) > bound)) {
            return Err(Error::Precondition(format!(
                "E(u) = {} <= 1/{} on `{id}` inside F_{}",
                eu.get(id),
                k + 1,
                k + 1
            )));
        }
    }
    let space = &ws.space;
    let mut phi_partial = Vec::with_capacity(n);
    let mut psi_partial = Vec::with_capacity(n);
    for k in 1..=n {
        let fk = ws.partial_function(k).scale(alpha);
        phi_partial.push(modular(op.source(), &fk, space).to_f64());
        psi_partial.push(modular(op.target(), &op.apply(&fk), space));
    }
    let scale = ws.scale();
    let mut geometric = InequalityReport::new("geometric_tail", 2e-9);
    for k in n0.max(2)..=n {
        let inc = phi_partial[k - 1] - phi_partial[k - 2];
        let bound = scale * 2f64.powi(-(k as i32));
        geometric.record(&[k as f64], inc, bound, bound);
    }
    let harmonic: f64 = (m0..=n).map(|k| 1.0 / k as f64).sum();
    let harmonic_bound = scale * harmonic;
    let last = psi_partial.last().copied().unwrap_or(ExtendedReal::ZERO);
    let harmonic_holds = last >= ExtendedReal::Finite(harmonic_bound * (1.0 - 1e-9));
    let ratio = match (n, last) {
        (0 | 1, _) => ExtendedReal::Finite(1.0),
        (_, ExtendedReal::Infinite) => ExtendedReal::Infinite,
        (_, ExtendedReal::Finite(s)) => {
            let half = psi_partial[n / 2 - 1].to_f64();
            if half > 0.0 {
                ExtendedReal::from_f64(s / half)
            } else {
                ExtendedReal::Infinite
            }
        }
    };
    let ratio_holds = n == 0 || ratio > ExtendedReal::Finite(1.0 + TREND_DELTA);
    Ok(DivergenceCertificate {
        alpha,
        n0,
        m0,
        phi_partial,
        psi_partial,
        geometric,
        harmonic_bound,
        harmonic_holds,
        ratio,
        ratio_holds,
    })
}

/// Plot-ready dump of a witness and its partial sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    pub y: Vec<f64>,
    #[serde(rename = "F_masses")]
    pub f_masses: Vec<f64>,
    pub partial_sums: PartialSums,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    pub phi: Vec<f64>,
    pub psi: Vec<ExtendedReal>,
}

impl WitnessDump {
    pub fn new(ws: &WitnessSequence, cert: &DivergenceCertificate) -> Self {
        WitnessDump {
            y: ws.y.clone(),
            f_masses: ws.f_masses.clone(),
            partial_sums: PartialSums {
                phi: cert.phi_partial.clone(),
                psi: cert.psi_partial.clone(),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lemma22Witness {
    pub witness: WitnessSequence,
    pub phi_trend: MembershipTrend,
    pub psi_trend: MembershipTrend,
}

/// A function in `L^Φ` whose restriction to `region` is not in `L^Ψ`,
/// checked by membership trends over truncations `N, 2N, 4N`.
pub fn lemma22_witness(
    phi: &YoungFunction,
    psi: &YoungFunction,
    space: &MeasureSpace,
    region: &[String],
    n: usize,
) -> Result<Lemma22Witness> {
    let witness = build_witness(phi, psi, space, region, n)?;
    let materialize = |t: usize| -> Result<(MeasureSpace, SimpleFunction)> {
        let ws = build_witness(phi, psi, space, region, t)?;
        Ok((ws.space, ws.f))
    };
    let phi_trend = membership_trend(phi, n, materialize)?;
    let psi_trend = membership_trend(psi, n, materialize)?;
    Ok(Lemma22Witness {
        witness,
        phi_trend,
        psi_trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::Membership;

    fn setup() -> (YoungFunction, YoungFunction, MeasureSpace, Vec<String>) {
        let phi = YoungFunction::power(2.0, false).unwrap();
        let psi = YoungFunction::power(4.0, false).unwrap();
        let space = MeasureSpace::new([("A1", 1.0)], [("F", 1.0)]).unwrap();
        (phi, psi, space, vec!["F".to_string()])
    }

    #[test]
    fn first_y_is_four() {
        let (phi, psi, space, region) = setup();
        let ws = build_witness(&phi, &psi, &space, &region, 1).unwrap();
        assert_eq!(ws.y, vec![4.0]);
        assert_eq!(ws.f_masses, vec![0.5]);
        assert_eq!(ws.space.measure(&ws.f_sets[0]).unwrap(), 0.5);
    }

    #[test]
    fn y_nondecreasing_and_inequalities_exact() {
        let (phi, psi, space, region) = setup();
        let ws = build_witness(&phi, &psi, &space, &region, 20).unwrap();
        for (k, w) in ws.y.windows(2).enumerate() {
            assert!(w[0] <= w[1], "y_{} > y_{}", k + 1, k + 2);
        }
        for (k, &y) in ws.y.iter().enumerate() {
            let n = (k + 1) as f64;
            // exact: powers of two times small integers
            assert!(psi.evaluate(y) > phi.evaluate(2f64.powi(k as i32 + 1) * n.powi(3) * y));
        }
        let total: f64 = ws.f_masses.iter().sum();
        assert!(total <= 1.0);
    }

    #[test]
    fn dominated_pair_is_rejected() {
        let (phi, psi, space, region) = setup();
        assert!(matches!(
            build_witness(&psi, &phi, &space, &region, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn empty_witness_has_zero_sums() {
        let (phi, psi, space, region) = setup();
        let ws = build_witness(&phi, &psi, &space, &region, 0).unwrap();
        let cert = certify_divergence(&ws, &ws.identity_operator(&phi, &psi), 1.0).unwrap();
        assert!(cert.phi_partial.is_empty() && cert.psi_partial.is_empty());
        assert_eq!(modular(&phi, &ws.f, &ws.space), ExtendedReal::ZERO);
    }

    #[test]
    fn lemma22_trends() {
        let (phi, psi, space, region) = setup();
        let w = lemma22_witness(&phi, &psi, &space, &region, 8).unwrap();
        assert_eq!(w.phi_trend.verdict, Membership::Member);
        assert_eq!(w.psi_trend.verdict, Membership::Diverging);
    }

    #[test]
    fn certificate_for_squares_and_fourth_powers() {
        let (phi, psi, space, region) = setup();
        let ws = build_witness(&phi, &psi, &space, &region, 12).unwrap();
        let cert = certify_divergence(&ws, &ws.identity_operator(&phi, &psi), 1.0).unwrap();
        assert!(cert.certified(), "{cert:?}");
        assert_eq!((cert.n0, cert.m0), (2, 2));
        assert!(cert.phi_partial.last().unwrap() < &(ws.scale() * 2.0));
    }
}
