//! The JSON operator document (`"schema": 1`) and its conversion into library objects.
//!
//! Operators are tagged by `"op"`, sets by `"set"`, functions by `"fn"` and
//! monotone operators by `"mono"`. Matrices are row-major arrays of rows;
//! spanning sets are lists of vectors.

use avgop_core::dynamics::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use avgop_core::linalg::{matrix_from_rows, orthonormal_span};
use avgop_core::{AffinePiece, ConvexFunction, ConvexSet, Halfspace, Matrix, MonotoneOperator, Operator, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::{floats, Real};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorDoc>,
    /// Starting point for `iterate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Right-hand side for `invert`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    /// Claimed `Fix T` for `classify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix_set: Option<SetDoc>,
    /// Points checked by `classify` before the random ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDoc {
    Identity { dim: usize },
    Constant { value: Vec<f64> },
    Shift { offset: Vec<f64> },
    Matrix { data: Vec<Vec<f64>> },
    Affine { data: Vec<Vec<f64>>, shift: Vec<f64> },
    Projection { set: SetDoc },
    /// Projection onto the span of the listed vectors.
    ProjSubspace { span: Vec<Vec<f64>> },
    Reflector { set: SetDoc },
    Prox { function: FunctionDoc },
    Resolvent {
        monotone: MonotoneDoc,
        #[serde(default = "one")]
        alpha: f64,
    },
    ReflectedResolvent { monotone: MonotoneDoc },
    Relaxation { lambda: f64, inner: Box<OperatorDoc> },
    /// `inner[0] ∘ inner[1] ∘ …`; the last entry is applied first.
    Compose { inner: Vec<OperatorDoc> },
    ConvexCombination { weights: Vec<f64>, inner: Vec<OperatorDoc> },
    DouglasRachford { a: SetDoc, b: SetDoc },
    /// `pieces[i] = [slope, intercept]` applies left of `breakpoints[i]`.
    ScalarPiecewise { breakpoints: Vec<f64>, pieces: Vec<[f64; 2]> },
    Limit {
        inner: Box<OperatorDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDoc {
    /// Bounds may be `"inf"` / `"-inf"`.
    Box { lower: Vec<Real>, upper: Vec<Real> },
    Ball { center: Vec<f64>, radius: Real },
    /// `{x : ⟨normal, x⟩ ≥ offset}`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    Subspace { span: Vec<Vec<f64>> },
    AffineSubspace { span: Vec<Vec<f64>>, anchor: Vec<f64> },
    Singleton { point: Vec<f64> },
    /// Intersection of halfspaces `{x : ⟨normal, x⟩ ≥ offset}`.
    Polyhedron { halfspaces: Vec<HalfspaceDoc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceDoc {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionDoc {
    Indicator { set: SetDoc },
    /// `½ xᵀQx` with symmetric positive semidefinite `q`.
    Quadratic { q: Vec<Vec<f64>> },
    /// `(α/2) d_C²`.
    HalfDistanceSquared { set: SetDoc, alpha: f64 },
    Huber { dim: usize, mu: f64, alpha: f64 },
    /// `λ σ_C`.
    Support { set: SetDoc, lambda: f64 },
    MoreauEnvelope { inner: Box<FunctionDoc>, mu: f64, alpha: f64 },
    ScalarPiecewiseConvex { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mono", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotoneDoc {
    Subdifferential { function: FunctionDoc },
    Linear { data: Vec<Vec<f64>> },
    NormalCone { set: SetDoc },
    Scaled { beta: f64, inner: Box<MonotoneDoc> },
    Yosida { mu: f64, inner: Box<MonotoneDoc> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateDoc {
    /// `modulus` (default), `cocoercive_value`, `monotone_value` or `lipschitz_value`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    /// What a value is estimated for: `operator` (default), `complement` (Id − T) or `monotone`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneDoc>,
    /// Averagedness constant to try to falsify.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_k: Option<f64>,
    /// Modulus bound whose bi-Lipschitz consequence is checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bilipschitz_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDoc {
    /// A suite name or `all` (default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Operator under test; the built-in reference operators when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneDoc>,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub alpha: f64,
}

impl Default for VerifyDoc {
    fn default() -> Self {
        VerifyDoc {
            suite: None,
            monotone: None,
            mu: 1.0,
            alpha: 1.0,
        }
    }
}

/// Parses a document, reporting the JSON path of the first error.
pub fn parse_document(text: &str) -> CliResult<Document> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        if e.inner().is_syntax() || e.inner().is_eof() {
            return CliError::Parse {
                path: format!("line {} column {}", e.inner().line(), e.inner().column()),
                message: e.inner().to_string(),
            };
        }
        // Tagged objects are buffered before their fields are read, which hides
        // the path below them; locate the deepest tagged object that fails.
        let deepest = serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| first_bad_node(&v, String::new()));
        let (path, message) = deepest.unwrap_or_else(|| (e.path().to_string(), e.inner().to_string()));
        CliError::Parse {
            path: path_or_root(path),
            message,
        }
    })?;
    if doc.schema != SCHEMA_VERSION {
        return Err(CliError::Parse {
            path: "schema".into(),
            message: format!("unsupported schema {}, expected {SCHEMA_VERSION}", doc.schema),
        });
    }
    Ok(doc)
}

fn try_as<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Option<String> {
    T::deserialize(v).err().map(|e| e.to_string())
}

fn first_bad_node(value: &serde_json::Value, path: String) -> Option<(String, String)> {
    use serde_json::Value;
    match value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| first_bad_node(v, format!("{path}[{i}]"))),
        Value::Object(map) => {
            let nested = map.iter().find_map(|(k, v)| {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                first_bad_node(v, p)
            });
            if nested.is_some() {
                return nested;
            }
            let error = if map.contains_key("op") {
                try_as::<OperatorDoc>(value)
            } else if map.contains_key("set") {
                try_as::<SetDoc>(value)
            } else if map.contains_key("fn") {
                try_as::<FunctionDoc>(value)
            } else if map.contains_key("mono") {
                try_as::<MonotoneDoc>(value)
            } else {
                None
            };
            error.map(|m| (path, m))
        }
        _ => None,
    }
}

fn path_or_root(p: String) -> String {
    if p.is_empty() || p == "." {
        "(document)".into()
    } else {
        p
    }
}

fn child(path: &str, field: &str) -> String {
    format!("{path}.{field}")
}

fn item(path: &str, field: &str, i: usize) -> String {
    format!("{path}.{field}[{i}]")
}

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn matrix(rows: &[Vec<f64>], path: &str) -> CliResult<Matrix> {
    matrix_from_rows(rows).map_err(|e| CliError::from_core(path, e))
}

/// Matrix whose columns are the listed vectors.
fn columns(vectors: &[Vec<f64>], path: &str) -> CliResult<Matrix> {
    if vectors.is_empty() {
        return Err(CliError::invalid(path, "at least one spanning vector is required"));
    }
    Ok(matrix(vectors, path)?.transpose())
}

pub fn build_set(doc: &SetDoc, path: &str) -> CliResult<ConvexSet> {
    let core = |e| CliError::from_core(path, e);
    match doc {
        SetDoc::Box { lower, upper } => ConvexSet::boxed(vector(&floats(lower)), vector(&floats(upper))).map_err(core),
        SetDoc::Ball { center, radius } => ConvexSet::ball(vector(center), radius.0).map_err(core),
        SetDoc::Halfspace { normal, offset } => ConvexSet::halfspace(vector(normal), *offset).map_err(core),
        SetDoc::Subspace { span } => ConvexSet::span(&columns(span, &child(path, "span"))?).map_err(core),
        SetDoc::AffineSubspace { span, anchor } => {
            let basis = orthonormal_span(&columns(span, &child(path, "span"))?, 1e-10);
            ConvexSet::affine_subspace(basis, vector(anchor)).map_err(core)
        }
        SetDoc::Singleton { point } => ConvexSet::singleton(vector(point)).map_err(core),
        SetDoc::Polyhedron { halfspaces } => {
            let hs = halfspaces
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    Halfspace::new(vector(&h.normal), h.offset)
                        .map_err(|e| CliError::from_core(&item(path, "halfspaces", i), e))
                })
                .collect::<CliResult<Vec<_>>>()?;
            ConvexSet::halfspace_intersection(hs).map_err(core)
        }
    }
}

pub fn build_function(doc: &FunctionDoc, path: &str) -> CliResult<ConvexFunction> {
    let core = |e| CliError::from_core(path, e);
    match doc {
        FunctionDoc::Indicator { set } => Ok(ConvexFunction::indicator(build_set(set, &child(path, "set"))?)),
        FunctionDoc::Quadratic { q } => ConvexFunction::quadratic(matrix(q, &child(path, "q"))?).map_err(core),
        FunctionDoc::HalfDistanceSquared { set, alpha } => {
            ConvexFunction::half_distance_squared(build_set(set, &child(path, "set"))?, *alpha).map_err(core)
        }
        FunctionDoc::Huber { dim, mu, alpha } => ConvexFunction::huber(*dim, *mu, *alpha).map_err(core),
        FunctionDoc::Support { set, lambda } => {
            ConvexFunction::support(build_set(set, &child(path, "set"))?, *lambda).map_err(core)
        }
        FunctionDoc::MoreauEnvelope { inner, mu, alpha } => {
            ConvexFunction::moreau_envelope(build_function(inner, &child(path, "inner"))?, *mu, *alpha).map_err(core)
        }
        FunctionDoc::ScalarPiecewiseConvex { breakpoints, slopes } => {
            ConvexFunction::scalar_piecewise_convex(breakpoints.clone(), slopes.clone()).map_err(core)
        }
    }
}

pub fn build_monotone(doc: &MonotoneDoc, path: &str) -> CliResult<MonotoneOperator> {
    let core = |e| CliError::from_core(path, e);
    match doc {
        MonotoneDoc::Subdifferential { function } => Ok(MonotoneOperator::subdifferential(build_function(
            function,
            &child(path, "function"),
        )?)),
        MonotoneDoc::Linear { data } => MonotoneOperator::linear(matrix(data, &child(path, "data"))?).map_err(core),
        MonotoneDoc::NormalCone { set } => Ok(MonotoneOperator::normal_cone(build_set(set, &child(path, "set"))?)),
        MonotoneDoc::Scaled { beta, inner } => {
            MonotoneOperator::scaled(*beta, build_monotone(inner, &child(path, "inner"))?).map_err(core)
        }
        MonotoneDoc::Yosida { mu, inner } => {
            MonotoneOperator::yosida(*mu, build_monotone(inner, &child(path, "inner"))?).map_err(core)
        }
    }
}

fn build_list(docs: &[OperatorDoc], path: &str) -> CliResult<Vec<Operator>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| build_operator(d, &item(path, "inner", i)))
        .collect()
}

pub fn build_operator(doc: &OperatorDoc, path: &str) -> CliResult<Operator> {
    let core = |e| CliError::from_core(path, e);
    match doc {
        OperatorDoc::Identity { dim } => Operator::identity(*dim).map_err(core),
        OperatorDoc::Constant { value } => Operator::constant(vector(value)).map_err(core),
        OperatorDoc::Shift { offset } => Operator::shift(vector(offset)).map_err(core),
        OperatorDoc::Matrix { data } => Operator::linear(matrix(data, &child(path, "data"))?).map_err(core),
        OperatorDoc::Affine { data, shift } => {
            Operator::affine(matrix(data, &child(path, "data"))?, vector(shift)).map_err(core)
        }
        OperatorDoc::Projection { set } => Ok(Operator::projection(build_set(set, &child(path, "set"))?)),
        OperatorDoc::ProjSubspace { span } => {
            let set = ConvexSet::span(&columns(span, &child(path, "span"))?).map_err(core)?;
            Ok(Operator::projection(set))
        }
        OperatorDoc::Reflector { set } => Ok(Operator::reflector(build_set(set, &child(path, "set"))?)),
        OperatorDoc::Prox { function } => Ok(Operator::prox(build_function(function, &child(path, "function"))?)),
        OperatorDoc::Resolvent { monotone, alpha } => {
            Operator::resolvent(build_monotone(monotone, &child(path, "monotone"))?, *alpha).map_err(core)
        }
        OperatorDoc::ReflectedResolvent { monotone } => Ok(Operator::reflected_resolvent(build_monotone(
            monotone,
            &child(path, "monotone"),
        )?)),
        OperatorDoc::Relaxation { lambda, inner } => {
            Operator::relaxation(*lambda, build_operator(inner, &child(path, "inner"))?).map_err(core)
        }
        OperatorDoc::Compose { inner } => Operator::compose(build_list(inner, path)?).map_err(core),
        OperatorDoc::ConvexCombination { weights, inner } => {
            Operator::convex_combination(weights.clone(), build_list(inner, path)?).map_err(core)
        }
        OperatorDoc::DouglasRachford { a, b } => {
            Operator::douglas_rachford(build_set(a, &child(path, "a"))?, build_set(b, &child(path, "b"))?).map_err(core)
        }
        OperatorDoc::ScalarPiecewise { breakpoints, pieces } => {
            let pieces = pieces.iter().map(|&[s, c]| AffinePiece::new(s, c)).collect();
            Operator::scalar_piecewise(breakpoints.clone(), pieces).map_err(core)
        }
        OperatorDoc::Limit { inner, tol, max_iter } => Operator::limit(
            build_operator(inner, &child(path, "inner"))?,
            tol.unwrap_or(DEFAULT_TOL),
            max_iter.unwrap_or(DEFAULT_MAX_ITER),
        )
        .map_err(core),
    }
}

impl Document {
    /// The operator, checked against `dim` when both are present.
    pub fn operator(&self) -> CliResult<Operator> {
        let doc = self
            .operator
            .as_ref()
            .ok_or_else(|| CliError::invalid("operator", "this command needs an operator"))?;
        let op = build_operator(doc, "operator")?;
        if let Some(dim) = self.dim {
            if dim != op.dim() {
                return Err(CliError::invalid(
                    "dim",
                    format!("document declares dimension {dim} but the operator acts on dimension {}", op.dim()),
                ));
            }
        }
        Ok(op)
    }
}
