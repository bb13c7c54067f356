//! JSON requests and reports for batch runs.
//!
//! Each request kind parses with JSON-pointer error paths, runs as a pure
//! function of its contents and the [`Overrides`], and yields a [`Report`]
//! whose serialization is byte-stable for a fixed seed.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectation::ConditionalExpectation;
use crate::extended::ExtendedReal;
use crate::grid::{Grid, InequalityReport};
use crate::mce::{
    estimate_gch_constant, lp_bridge_check, random_pairs, thm32_check, thm34_check, thm36_converse_check,
    thm36_forward_check, CheckOptions, CriterionReport, LpBridgeReport, MceOperator, OperatorFamily, OperatorSpec,
    Verdict,
};
use crate::measure::{AlgebraSpec, FunctionSpec, SimpleFunction, SpaceSpec};
use crate::orlicz::{luxemburg_norm, LuxemburgNorm, NORM_REL_TOL};
use crate::range::{classify, tail_sum_check, Classification, RangeMode, RangeReport, Rank, TailSumReport};
use crate::witness::{build_witness, certify_divergence, DivergenceCertificate, WitnessDump};
use crate::young::{check_delta2, check_delta_prime, check_nabla_prime, GrowthEvidence, YoungFunction, YoungSpec};

pub const REPORT_SCHEMA_VERSION: &str = "1";
pub const TOOL_NAME: &str = "orlicz-mce";

/// Parses `text` as `T`, reporting failures with the JSON pointer of the
/// offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => write!(pointer, "/{index}").unwrap(),
                Segment::Map { key } => write!(pointer, "/{}", key.replace('~', "~0").replace('/', "~1")).unwrap(),
                Segment::Enum { .. } | Segment::Unknown => {}
            }
        }
        Error::schema(if pointer.is_empty() { "/".into() } else { pointer }, e.into_inner().to_string())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&std::fs::read_to_string(path)?)
}

/// Command-line overrides applied on top of a request.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Thm32,
    Thm34,
    Thm36,
    Thm36Converse,
    LpBridge,
}

impl CheckName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Thm32 => "thm32",
            CheckName::Thm34 => "thm34",
            CheckName::Thm36 => "thm36",
            CheckName::Thm36Converse => "thm36_converse",
            CheckName::LpBridge => "lp_bridge",
        }
    }
}

/// The weight `u` and, optionally, the blocks of the sub-σ-algebra
/// (otherwise taken from the space).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorPart {
    pub u: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    pub space: SpaceSpec,
    pub operator: OperatorPart,
    pub source: YoungSpec,
    pub target: YoungSpec,
    #[serde(default)]
    pub theta: Option<YoungSpec>,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// GCH constant for `thm34`; estimated from seeded samples when absent.
    #[serde(default)]
    pub gch_constant: Option<f64>,
    /// Exponents for `lp_bridge`; read off power-type source/target when absent.
    #[serde(default)]
    pub lp: Option<Exponents>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub space: SpaceSpec,
    pub operator: OperatorPart,
    pub source: YoungSpec,
    pub target: YoungSpec,
    pub theta: YoungSpec,
    pub mode: RangeMode,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRequest {
    pub space: SpaceSpec,
    pub source: YoungSpec,
    pub target: YoungSpec,
    /// Non-atomic cells to carve; all of them when absent.
    #[serde(default)]
    pub region: Option<Vec<String>>,
    /// Defaults to `u = 1` with the identity algebra.
    #[serde(default)]
    pub operator: Option<OperatorPart>,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

pub const DEFAULT_WITNESS_TRUNCATION: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    pub truncation: Option<usize>,
    pub samples: usize,
    pub grid: Grid,
    pub evidence_range: (f64, f64),
    pub norm_rel_tol: f64,
}

impl Provenance {
    fn new(opts: &CheckOptions, truncation: Option<usize>) -> Self {
        Provenance {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: opts.seed,
            tolerance: opts.tol,
            truncation,
            samples: opts.samples,
            grid: opts.grid.clone(),
            evidence_range: opts.evidence_range,
            norm_rel_tol: NORM_REL_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Conclusive,
    Trend,
    Failed,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Conclusive => 0,
            Status::Trend => 2,
            Status::Failed => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungInfo {
    pub spec: YoungSpec,
    pub a_phi: f64,
    pub b_phi: f64,
    pub n_function: bool,
    pub convexity: InequalityReport,
    pub delta2: GrowthEvidence,
    pub delta_prime: GrowthEvidence,
    pub nabla_prime: GrowthEvidence,
    /// `(x, Φ(x), Φ*(x), Φ⁻¹(x))` on the sample grid.
    pub samples: Vec<(f64, ExtendedReal, ExtendedReal, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: LuxemburgNorm,
    pub modular_at_norm: ExtendedReal,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub truncation: usize,
    pub alpha: f64,
    pub certified: bool,
    pub certificate: DivergenceCertificate,
    pub dump: WitnessDump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Criterion(CriterionReport),
    LpBridge(LpBridgeReport),
    Range {
        range: RangeReport,
        tail_sum: Option<TailSumReport>,
    },
    Witness(WitnessReport),
    Young(Box<YoungInfo>),
    Norm(NormReport),
    Error {
        error: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    pub status: Status,
    pub outcome: Outcome,
}

impl CheckEntry {
    fn new(check: &str, outcome: Outcome) -> Self {
        let status = match &outcome {
            Outcome::Criterion(r) => criterion_status(r.verdict),
            Outcome::LpBridge(r) => criterion_status(r.closed_form.verdict).max(criterion_status(r.generic.verdict)),
            Outcome::Range { range, .. } => {
                if range.classification == Classification::DivergingSupport || range.rank == Rank::InfiniteTrend {
                    Status::Trend
                } else {
                    Status::Conclusive
                }
            }
            Outcome::Witness(w) if w.certified => Status::Conclusive,
            Outcome::Witness(_) => Status::Trend,
            Outcome::Young(_) | Outcome::Norm(_) => Status::Conclusive,
            Outcome::Error { .. } => Status::Failed,
        };
        CheckEntry {
            check: check.into(),
            status,
            outcome,
        }
    }

    fn from_result(check: &str, r: Result<Outcome>) -> Self {
        CheckEntry::new(
            check,
            r.unwrap_or_else(|e| Outcome::Error { error: e.to_string() }),
        )
    }

    /// The quantity shown in the summary table.
    pub fn key_quantity(&self) -> String {
        match &self.outcome {
            Outcome::Criterion(r) if !r.terms.is_empty() => format!("sup = {}", r.sup()),
            Outcome::Criterion(r) => r
                .quantities
                .iter()
                .next()
                .map_or_else(String::new, |(k, v)| format!("{k} = {v}")),
            Outcome::LpBridge(r) => format!("max_rel_diff = {:e}", r.max_rel_diff),
            Outcome::Range { range, .. } => format!("|E| = {}", range.support_set_e.len()),
            Outcome::Witness(w) => format!("S_N/S_N/2 = {}", w.certificate.ratio),
            Outcome::Young(y) => format!("a = {}, b = {}", y.a_phi, y.b_phi),
            Outcome::Norm(n) => format!("norm = {}", n.norm.value),
            Outcome::Error { error } => error.clone(),
        }
    }

    pub fn verdict_label(&self) -> String {
        match &self.outcome {
            Outcome::Criterion(r) => verdict_label(r.verdict),
            Outcome::LpBridge(r) => format!(
                "{} / {}",
                verdict_label(r.closed_form.verdict),
                verdict_label(r.generic.verdict)
            ),
            Outcome::Range { range, .. } => serde_json::to_value(range.classification)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            Outcome::Witness(w) => if w.certified { "certified" } else { "not certified" }.into(),
            Outcome::Young(_) | Outcome::Norm(_) => "ok".into(),
            Outcome::Error { .. } => "error".into(),
        }
    }
}

fn criterion_status(v: Verdict) -> Status {
    if v.is_conclusive() {
        Status::Conclusive
    } else {
        Status::Trend
    }
}

fn verdict_label(v: Verdict) -> String {
    match v {
        Verdict::Satisfied => "satisfied".into(),
        Verdict::Violated => "violated".into(),
        Verdict::Trend(k) => format!("trend: {}", if k == crate::mce::TrendKind::Diverging { "diverging" } else { "bounded" }),
        Verdict::Inconclusive => "inconclusive".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitClass {
    pub code: i32,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub provenance: Provenance,
    pub checks: Vec<CheckEntry>,
    pub exit: ExitClass,
}

impl Report {
    fn new(provenance: Provenance, checks: Vec<CheckEntry>) -> Self {
        let status = checks.iter().map(|c| c.status).max().unwrap_or(Status::Conclusive);
        Report {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            provenance,
            checks,
            exit: ExitClass {
                code: status.exit_code(),
                status,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.exit.code
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `check | verdict | key quantity` table.
    pub fn summary_table(&self) -> String {
        let rows: Vec<[String; 3]> = self
            .checks
            .iter()
            .map(|c| [c.check.clone(), c.verdict_label(), c.key_quantity()])
            .collect();
        let header = ["check".to_string(), "verdict".into(), "key quantity".into()];
        let width = |i: usize| rows.iter().chain([&header]).map(|r| r[i].chars().count()).max().unwrap_or(0);
        let (w0, w1) = (width(0), width(1));
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            writeln!(out, "{:<w0$}  {:<w1$}  {}", r[0], r[1], r[2]).unwrap();
        }
        writeln!(out, "exit {} ({:?})", self.exit.code, self.exit.status).unwrap();
        out
    }
}

fn options(tolerance: Option<f64>, seed: Option<u64>, ov: &Overrides) -> CheckOptions {
    let mut opts = CheckOptions::default();
    if let Some(t) = ov.tol.or(tolerance) {
        opts.tol = t;
    }
    if let Some(s) = ov.seed.or(seed) {
        opts.seed = s;
    }
    opts
}

fn operator_spec(space: &SpaceSpec, part: &OperatorPart, source: &YoungSpec, target: &YoungSpec) -> OperatorSpec {
    let mut space = space.clone();
    if let Some(alg) = &part.algebra {
        space.sigma_algebra = Some(alg.clone());
    }
    OperatorSpec {
        space,
        u: part.u.clone(),
        source: source.clone(),
        target: target.clone(),
    }
}

fn apply_truncation(spec: OperatorSpec, request: Option<usize>, ov: &Overrides) -> OperatorSpec {
    match (ov.truncation.or(request), spec.space.is_parametric()) {
        (Some(n), true) => spec.with_truncation(n),
        _ => spec,
    }
}

fn required_theta(req: &AnalysisRequest, check: CheckName) -> Result<YoungFunction> {
    match &req.theta {
        Some(t) => YoungFunction::from_spec(t),
        None => Err(Error::schema("/theta", format!("required by check `{}`", check.as_str()))),
    }
}

fn lp_exponents(req: &AnalysisRequest) -> Result<(f64, f64)> {
    if let Some(e) = req.lp {
        return Ok((e.p, e.q));
    }
    let p = YoungFunction::from_spec(&req.source)?.as_power().map(|(p, _)| p);
    let q = YoungFunction::from_spec(&req.target)?.as_power().map(|(q, _)| q);
    match (p, q) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(Error::schema("/lp", "needed when source or target is not a power function")),
    }
}

fn gch_constant(family: &OperatorSpec, given: Option<f64>, opts: &CheckOptions) -> Result<f64> {
    if let Some(c) = given {
        return Ok(c);
    }
    let op = family.at(None)?;
    let pairs = random_pairs(op.space(), opts);
    Ok(estimate_gch_constant(op.expectation(), op.source(), &pairs)?.c_hat)
}

fn run_check(req: &AnalysisRequest, family: &OperatorSpec, check: CheckName, opts: &CheckOptions) -> Result<Outcome> {
    Ok(match check {
        CheckName::Thm32 => Outcome::Criterion(thm32_check(family, &required_theta(req, check)?, opts)?),
        CheckName::Thm34 => {
            let c = gch_constant(family, req.gch_constant, opts)?;
            Outcome::Criterion(thm34_check(family, c, opts)?)
        }
        CheckName::Thm36 => Outcome::Criterion(thm36_forward_check(family, &required_theta(req, check)?, opts)?),
        CheckName::Thm36Converse => Outcome::Criterion(thm36_converse_check(family, opts)?),
        CheckName::LpBridge => {
            let (p, q) = lp_exponents(req)?;
            Outcome::LpBridge(lp_bridge_check(family, p, q, opts)?)
        }
    })
}

/// Runs every check of an analysis request, in request order.
pub fn run_analysis(req: &AnalysisRequest, ov: &Overrides) -> Result<Report> {
    let opts = options(req.tolerance, req.seed, ov);
    let family = apply_truncation(operator_spec(&req.space, &req.operator, &req.source, &req.target), req.truncation, ov);
    if !req.checks.is_empty() {
        // surface malformed operators before any check runs
        family.at(None)?;
    }
    let checks = req
        .checks
        .iter()
        .map(|&c| CheckEntry::from_result(c.as_str(), run_check(req, &family, c, &opts)))
        .collect();
    Ok(Report::new(Provenance::new(&opts, family.truncation()), checks))
}

pub fn run_classify(req: &ClassifyRequest, ov: &Overrides) -> Result<Report> {
    let opts = options(req.tolerance, req.seed, ov);
    let family = apply_truncation(operator_spec(&req.space, &req.operator, &req.source, &req.target), req.truncation, ov);
    let theta = YoungFunction::from_spec(&req.theta)?;
    let result = classify(&family, &theta, req.mode, &opts).and_then(|range| {
        let op = family.at(None)?;
        let tail_sum = tail_sum_check(&op, &theta, req.mode).ok();
        Ok(Outcome::Range { range, tail_sum })
    });
    let check = match req.mode {
        RangeMode::Thm41 => "classify_thm41",
        RangeMode::Thm42 => "classify_thm42",
    };
    Ok(Report::new(
        Provenance::new(&opts, family.truncation()),
        vec![CheckEntry::from_result(check, result)],
    ))
}

pub fn run_witness(req: &WitnessRequest, ov: &Overrides) -> Result<Report> {
    let opts = options(None, None, ov);
    let n = ov.truncation.or(req.truncation).unwrap_or(DEFAULT_WITNESS_TRUNCATION);
    let result = (|| {
        let phi = YoungFunction::from_spec(&req.source)?;
        let psi = YoungFunction::from_spec(&req.target)?;
        let (space, algebra) = req.space.materialize(None)?;
        let region: Vec<String> = match &req.region {
            Some(r) => r.clone(),
            None => space.nonatomic_cells().map(|c| c.id.clone()).collect(),
        };
        let ws = build_witness(&phi, &psi, &space, &region, n)?;
        let op = match &req.operator {
            None => ws.identity_operator(&phi, &psi),
            Some(part) => {
                let spec = operator_spec(&req.space, part, &req.source, &req.target);
                let (space, algebra) = spec.space.materialize(None)?;
                let u = spec.u.materialize(&space)?;
                ws.lift_operator(&MceOperator::new(u, ConditionalExpectation::new(space, algebra)?, phi, psi))?
            }
        };
        let _ = algebra;
        let alpha = req.alpha.unwrap_or(1.0);
        let certificate = certify_divergence(&ws, &op, alpha)?;
        Ok(Outcome::Witness(WitnessReport {
            truncation: n,
            alpha,
            certified: certificate.certified(),
            dump: WitnessDump::new(&ws, &certificate),
            certificate,
        }))
    })();
    Ok(Report::new(Provenance::new(&opts, Some(n)), vec![CheckEntry::from_result("witness", result)]))
}

/// Sample grid used by [`young_info`].
pub fn young_info_grid() -> Grid {
    Grid::decades(1e-3, 1e3, 1)
}

pub fn young_info(spec: &YoungSpec, ov: &Overrides) -> Result<Report> {
    let opts = options(None, None, ov);
    let phi = YoungFunction::from_spec(spec)?;
    let conj = phi.complementary();
    let (x0, horizon) = opts.evidence_range;
    let grid = young_info_grid();
    let samples = grid
        .values()
        .into_iter()
        .map(|x| (x, phi.evaluate(x), conj.evaluate(x), phi.generalized_inverse(x)))
        .collect();
    let info = YoungInfo {
        spec: phi.to_spec(),
        a_phi: phi.a_phi(),
        b_phi: phi.b_phi(),
        n_function: phi.is_n_function(),
        convexity: phi.validate_convexity(&opts.grid),
        delta2: check_delta2(&phi, x0, horizon),
        delta_prime: check_delta_prime(&phi, x0, horizon),
        nabla_prime: check_nabla_prime(&phi, x0, horizon),
        samples,
    };
    Ok(Report::new(
        Provenance::new(&opts, None),
        vec![CheckEntry::new("young_info", Outcome::Young(Box::new(info)))],
    ))
}

pub fn norm_report(space: &SpaceSpec, f: &FunctionSpec, phi: &YoungSpec, ov: &Overrides) -> Result<Report> {
    let opts = options(None, None, ov);
    let (space, _) = space.materialize(ov.truncation)?;
    let f: SimpleFunction = f.materialize(&space)?;
    let phi = YoungFunction::from_spec(phi)?;
    let norm = luxemburg_norm(&phi, &f, &space)?;
    let modular_at_norm = if norm.value > 0.0 {
        crate::orlicz::modular(&phi, &f.scale(1.0 / norm.value), &space)
    } else {
        ExtendedReal::ZERO
    };
    Ok(Report::new(
        Provenance::new(&opts, space.truncation()),
        vec![CheckEntry::new(
            "norm",
            Outcome::Norm(NormReport {
                norm,
                modular_at_norm,
                rel_tol: NORM_REL_TOL,
            }),
        )],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const U_ZERO: &str = r#"{
        "space": {"atoms": [{"id": "A1", "mass": 0.5}, {"id": "A2", "mass": 0.25}]},
        "operator": {"u": {"values": {}}},
        "source": {"family": "power", "p": 2.0, "scaled": true},
        "target": {"family": "power", "p": 2.0, "scaled": true},
        "theta": {"family": "piecewise_linear", "points": [[1.0, 1.0]], "cutoff": 1.0},
        "checks": ["thm32"]
    }"#;

    #[test]
    fn empty_checks_exit_zero() {
        let mut req: AnalysisRequest = parse_json(U_ZERO).unwrap();
        req.checks.clear();
        let r = run_analysis(&req, &Overrides::default()).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn zero_weight_is_satisfied() {
        let req: AnalysisRequest = parse_json(U_ZERO).unwrap();
        let r = run_analysis(&req, &Overrides::default()).unwrap();
        assert_eq!(r.exit_code(), 0);
        match &r.checks[0].outcome {
            Outcome::Criterion(c) => assert_eq!(c.verdict, Verdict::Satisfied),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn unknown_check_has_pointer() {
        let text = U_ZERO.replace(r#"["thm32"]"#, r#"["thm32", "thm99"]"#);
        match parse_json::<AnalysisRequest>(&text) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/checks/1"),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn nested_schema_error_has_pointer() {
        let text = U_ZERO.replace(r#""mass": 0.25"#, r#""mass": "heavy""#);
        match parse_json::<AnalysisRequest>(&text) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/space/atoms/1/mass"),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn deterministic_bytes() {
        let mut req: AnalysisRequest = parse_json(U_ZERO).unwrap();
        req.checks = vec![CheckName::Thm32, CheckName::Thm34, CheckName::LpBridge];
        let a = run_analysis(&req, &Overrides::default()).unwrap().to_json();
        let b = run_analysis(&req, &Overrides::default()).unwrap().to_json();
        assert_eq!(a, b);
    }
}
