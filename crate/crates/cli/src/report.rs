//! Report types. Every float is a [`Real`] so that infinite bounds survive JSON.

use avgop_core::calculus::IdentityReport;
use avgop_core::dynamics::{Classification, LimitWitness, Orbit};
use avgop_core::estimator::{BiLipschitzReport, Inversion, Violation};
use avgop_core::{ModulusBound, ValueEstimate, Vector};
use serde::{Deserialize, Serialize};

use crate::document::Document;
use crate::format::{reals, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Derive the modulus with the calculus rules.
    Analyze,
    /// Sample a modulus or a monotone/cocoercive/Lipschitz value.
    Estimate,
    /// Iterate the operator from `x0`.
    Iterate,
    /// Solve `Tx = v` by contraction.
    Invert,
    /// Compare the limiting operator with the projection onto `fix_set`.
    Classify,
    /// Check the resolvent/Yosida/Moreau identities pointwise.
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Estimate => "estimate",
            Command::Iterate => "iterate",
            Command::Invert => "invert",
            Command::Classify => "classify",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub seed: u64,
    pub samples: usize,
    pub tol: Real,
    pub max_iter: usize,
    /// Local-search steps applied to the best sampled pair.
    pub refine: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            seed: 0,
            samples: 10_000,
            tol: Real(1e-10),
            max_iter: 1_000_000,
            refine: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub command: Command,
    pub params: Params,
    pub document: Document,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub request: Request,
    pub results: Results,
    pub wall_time_seconds: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Analyze(AnalyzeResult),
    Estimate(EstimateResult),
    Iterate(IterateResult),
    Invert(InvertResult),
    Classify(ClassifyResult),
    Verify(VerifyResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: Real,
    pub upper: Real,
    pub exact: bool,
    pub trace: Vec<TraceEntry>,
}

impl From<&ModulusBound> for Bound {
    fn from(b: &ModulusBound) -> Self {
        Bound {
            lower: Real(b.lower),
            upper: Real(b.upper),
            exact: b.exact,
            trace: b
                .trace
                .iter()
                .map(|s| TraceEntry {
                    rule: s.rule.as_str().to_string(),
                    detail: s.detail.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResult {
    pub operator: String,
    pub dim: usize,
    pub modulus: Bound,
}

pub fn vec_of(v: &Vector) -> Vec<Real> {
    reals(v.as_slice())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub quantity: String,
    pub direction: String,
    pub value: Real,
    pub witness: Option<[Vec<Real>; 2]>,
    pub samples_used: usize,
    pub skipped: usize,
    pub seed: u64,
}

impl From<&ValueEstimate> for Estimate {
    fn from(e: &ValueEstimate) -> Self {
        Estimate {
            quantity: e.quantity.as_str().to_string(),
            direction: e.direction.as_str().to_string(),
            value: Real(e.value),
            witness: e.witness.as_ref().map(|(x, y)| [vec_of(x), vec_of(y)]),
            samples_used: e.samples_used,
            skipped: e.skipped,
            seed: e.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Falsification {
    pub claimed_k: Real,
    pub violated: bool,
    pub x: Option<Vec<Real>>,
    pub y: Option<Vec<Real>>,
    pub excess: Option<Real>,
}

impl Falsification {
    pub fn new(claimed_k: f64, v: Option<&Violation>) -> Self {
        Falsification {
            claimed_k: Real(claimed_k),
            violated: v.is_some(),
            x: v.map(|v| vec_of(&v.x)),
            y: v.map(|v| vec_of(&v.y)),
            excess: v.map(|v| Real(v.excess)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLipschitz {
    pub k: Real,
    pub lower_factor: Real,
    pub min_ratio: Real,
    pub max_ratio: Real,
    pub min_witness: Option<[Vec<Real>; 2]>,
    pub samples: usize,
}

impl From<&BiLipschitzReport> for BiLipschitz {
    fn from(r: &BiLipschitzReport) -> Self {
        BiLipschitz {
            k: Real(r.k),
            lower_factor: Real(r.lower_factor),
            min_ratio: Real(r.min_ratio),
            max_ratio: Real(r.max_ratio),
            min_witness: r.min_witness.as_ref().map(|(x, y)| [vec_of(x), vec_of(y)]),
            samples: r.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: Estimate,
    /// Derived bound for comparison, present for modulus estimates.
    pub derived: Option<Bound>,
    pub falsification: Option<Falsification>,
    pub bilipschitz: Option<BiLipschitz>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateResult {
    pub points: Vec<Vec<Real>>,
    pub converged: bool,
    pub residual: Real,
    pub iterations: usize,
}

impl From<&Orbit> for IterateResult {
    fn from(o: &Orbit) -> Self {
        IterateResult {
            points: o.points.iter().map(vec_of).collect(),
            converged: o.converged,
            residual: Real(o.residual),
            iterations: o.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertResult {
    pub x: Vec<Real>,
    pub residual: Real,
    pub iterations: usize,
    pub modulus_upper: Option<Real>,
    pub rate: Option<Real>,
    pub predicted_iterations: Option<usize>,
}

impl From<&Inversion> for InvertResult {
    fn from(i: &Inversion) -> Self {
        InvertResult {
            x: vec_of(&i.x),
            residual: Real(i.residual),
            iterations: i.iterations,
            modulus_upper: i.modulus_upper.map(Real),
            rate: i.rate.map(Real),
            predicted_iterations: i.predicted_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<Real>,
    pub limit: Vec<Real>,
    pub projection: Vec<Real>,
    pub distance_to_limit: Real,
    pub distance_to_projection: Real,
    pub gap: Real,
}

impl From<&LimitWitness> for Witness {
    fn from(w: &LimitWitness) -> Self {
        Witness {
            x: vec_of(&w.x),
            limit: vec_of(&w.limit),
            projection: vec_of(&w.projection),
            distance_to_limit: Real(w.distance_to_limit),
            distance_to_projection: Real(w.distance_to_projection),
            gap: Real(w.gap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub verdict: String,
    pub witness: Option<Witness>,
    pub max_gap: Real,
    pub points: usize,
    pub limit_modulus: Estimate,
}

impl From<&Classification> for ClassifyResult {
    fn from(c: &Classification) -> Self {
        ClassifyResult {
            verdict: c.verdict.as_str().to_string(),
            witness: c.witness.as_ref().map(Witness::from),
            max_gap: Real(c.max_gap),
            points: c.points,
            limit_modulus: Estimate::from(&c.limit_modulus),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub suite: String,
    pub subject: String,
    pub mu: Real,
    pub alpha: Real,
    pub points: usize,
    pub max_residual: Real,
    pub expected_modulus: Option<Real>,
    pub derived_modulus: Option<Real>,
    pub sampled_modulus: Option<Real>,
    pub passed: bool,
}

impl From<&IdentityReport> for IdentityCheck {
    fn from(r: &IdentityReport) -> Self {
        IdentityCheck {
            suite: r.suite.as_str().to_string(),
            subject: r.subject.clone(),
            mu: Real(r.mu),
            alpha: Real(r.alpha),
            points: r.points,
            max_residual: Real(r.max_residual),
            expected_modulus: r.modulus.as_ref().map(|m| Real(m.expected)),
            derived_modulus: r.modulus.as_ref().map(|m| Real(m.derived)),
            sampled_modulus: r.modulus.as_ref().and_then(|m| m.sampled.map(Real)),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub all_passed: bool,
    pub checks: Vec<IdentityCheck>,
}
