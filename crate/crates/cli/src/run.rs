use std::time::Instant;

use avgop_core::calculus::{standard_suites, verify_identities, IdentityReport, IdentitySuite};
use avgop_core::dynamics::{classify_limit, orbit};
use avgop_core::estimator::{
    bilipschitz_check, estimate_modulus, estimate_value, falsify_averaged, invert_by_contraction, refine,
    Complement, Quantity, VectorMap,
};
use avgop_core::{exact_modulus, Operator, VERSION};

use crate::document::{build_monotone, build_set, vector, Document};
use crate::error::{CliError, CliResult};
use crate::format::Real;
use crate::report::*;

fn check_params(p: &Params) -> CliResult<()> {
    if p.samples == 0 {
        return Err(CliError::invalid("--samples", "must be >= 1"));
    }
    if !(p.tol.0.is_finite() && p.tol.0 > 0.0) {
        return Err(CliError::invalid("--tol", "must be finite and > 0"));
    }
    if p.max_iter == 0 {
        return Err(CliError::invalid("--max-iter", "must be >= 1"));
    }
    Ok(())
}

/// Runs `command` on the document and wraps the results with the request and timing.
pub fn run(document: &Document, command: Command, params: &Params) -> CliResult<Report> {
    check_params(params)?;
    let start = Instant::now();
    let results = match command {
        Command::Analyze => Results::Analyze(analyze(document)?),
        Command::Estimate => Results::Estimate(estimate(document, params)?),
        Command::Iterate => Results::Iterate(iterate(document, params)?),
        Command::Invert => Results::Invert(invert(document, params)?),
        Command::Classify => Results::Classify(classify(document, params)?),
        Command::Verify => Results::Verify(verify(document, params)?),
    };
    Ok(Report {
        version: VERSION.to_string(),
        request: Request {
            command,
            params: params.clone(),
            document: document.clone(),
        },
        results,
        wall_time_seconds: Real(start.elapsed().as_secs_f64()),
    })
}

fn core(path: &str) -> impl Fn(avgop_core::Error) -> CliError + '_ {
    move |e| CliError::from_core(path, e)
}

fn analyze(doc: &Document) -> CliResult<AnalyzeResult> {
    let op = doc.operator()?;
    Ok(AnalyzeResult {
        operator: op.name().to_string(),
        dim: op.dim(),
        modulus: Bound::from(&exact_modulus(&op)),
    })
}

fn required<'a, T>(field: &'a Option<T>, name: &str, command: Command) -> CliResult<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| CliError::invalid(name, format!("required by {}", command.as_str())))
}

fn estimate(doc: &Document, p: &Params) -> CliResult<EstimateResult> {
    let spec = doc.estimate.clone().unwrap_or_default();
    let quantity = Quantity::parse(spec.quantity.as_deref().unwrap_or("modulus")).map_err(core("estimate.quantity"))?;
    let map = spec.map.as_deref().unwrap_or("operator");
    if quantity == Quantity::Modulus && map != "operator" {
        return Err(CliError::invalid("estimate.map", "the modulus is estimated for the operator itself"));
    }

    let op = if map == "monotone" { None } else { Some(doc.operator()?) };
    let (estimate, derived) = match (quantity, map) {
        (Quantity::Modulus, _) => {
            let op = op.as_ref().expect("operator map");
            let est = estimate_modulus(op, p.samples, p.seed, p.refine).map_err(core("operator"))?;
            (est, Some(Bound::from(&exact_modulus(op))))
        }
        (_, "operator") => (value_of(quantity, op.as_ref().expect("operator map"), p)?, None),
        (_, "complement") => (value_of(quantity, &Complement(op.as_ref().expect("operator map")), p)?, None),
        (_, "monotone") => {
            let mono = build_monotone(required(&spec.monotone, "estimate.monotone", Command::Estimate)?, "estimate.monotone")?;
            (value_of(quantity, &mono, p)?, None)
        }
        (_, other) => {
            return Err(CliError::invalid(
                "estimate.map",
                format!("unknown map {other:?}; expected operator, complement or monotone"),
            ))
        }
    };

    let falsification = match (spec.claimed_k, &op) {
        (Some(k), Some(op)) => {
            let v = falsify_averaged(op, k, p.samples, p.seed).map_err(core("estimate.claimed_k"))?;
            Some(Falsification::new(k, v.as_ref()))
        }
        _ => None,
    };
    let bilipschitz = match (spec.bilipschitz_k, &op) {
        (Some(k), Some(op)) => Some(BiLipschitz::from(
            &bilipschitz_check(op, k, p.samples, p.seed).map_err(core("estimate.bilipschitz_k"))?,
        )),
        _ => None,
    };
    Ok(EstimateResult {
        estimate: Estimate::from(&estimate),
        derived,
        falsification,
        bilipschitz,
    })
}

fn value_of<M: VectorMap + ?Sized>(
    quantity: Quantity,
    map: &M,
    p: &Params,
) -> CliResult<avgop_core::ValueEstimate> {
    let est = estimate_value(quantity, map, p.samples, p.seed).map_err(core("estimate"))?;
    refine(est, map, p.refine).map_err(core("estimate"))
}

fn point(xs: &[f64], op: &Operator, path: &str) -> CliResult<avgop_core::Vector> {
    if xs.len() != op.dim() {
        return Err(CliError::invalid(
            path,
            format!("has length {} but the operator acts on dimension {}", xs.len(), op.dim()),
        ));
    }
    Ok(vector(xs))
}

fn iterate(doc: &Document, p: &Params) -> CliResult<IterateResult> {
    let op = doc.operator()?;
    let x0 = point(required(&doc.x0, "x0", Command::Iterate)?, &op, "x0")?;
    let o = orbit(&op, &x0, p.tol.0, p.max_iter).map_err(core("operator"))?;
    Ok(IterateResult::from(&o))
}

fn invert(doc: &Document, p: &Params) -> CliResult<InvertResult> {
    let op = doc.operator()?;
    let v = point(required(&doc.v, "v", Command::Invert)?, &op, "v")?;
    let inv = invert_by_contraction(&op, &v, p.tol.0, p.max_iter).map_err(core("operator"))?;
    Ok(InvertResult::from(&inv))
}

fn classify(doc: &Document, p: &Params) -> CliResult<ClassifyResult> {
    let op = doc.operator()?;
    let fix = build_set(required(&doc.fix_set, "fix_set", Command::Classify)?, "fix_set")?;
    let probes = doc
        .probes
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, x)| point(x, &op, &format!("probes[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    let c = classify_limit(&op, &fix, &probes, p.samples, p.seed, p.tol.0).map_err(core("operator"))?;
    Ok(ClassifyResult::from(&c))
}

fn verify(doc: &Document, p: &Params) -> CliResult<VerifyResult> {
    let spec = doc.verify.clone().unwrap_or_default();
    let selected = match spec.suite.as_deref() {
        None | Some("all") => None,
        Some(name) => Some(IdentitySuite::parse(name).map_err(core("verify.suite"))?),
    };
    let reports: Vec<IdentityReport> = match &spec.monotone {
        None => standard_suites(spec.mu, spec.alpha, p.samples, p.seed)
            .map_err(core("verify"))?
            .into_iter()
            .filter(|r| selected.is_none_or(|s| r.suite == s))
            .collect(),
        Some(m) => {
            let a = build_monotone(m, "verify.monotone")?;
            match selected {
                Some(s) => vec![verify_identities(s, &a, spec.mu, spec.alpha, p.samples, p.seed).map_err(core("verify"))?],
                None => {
                    // Every suite whose preconditions the operator and parameters meet.
                    let mut out = Vec::new();
                    for s in IdentitySuite::ALL {
                        match verify_identities(s, &a, spec.mu, spec.alpha, p.samples, p.seed) {
                            Ok(r) => out.push(r),
                            Err(e) if e.is_validation() => {}
                            Err(e) => return Err(CliError::from_core("verify", e)),
                        }
                    }
                    out
                }
            }
        }
    };
    if reports.is_empty() {
        return Err(CliError::invalid("verify", "no identity suite applies to this operator"));
    }
    let checks: Vec<IdentityCheck> = reports.iter().map(IdentityCheck::from).collect();
    Ok(VerifyResult {
        all_passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
