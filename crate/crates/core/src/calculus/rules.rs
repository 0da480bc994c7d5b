//! Structural recursion that derives modulus bounds from an operator tree.

use crate::calculus::bound::{ogura_yamada, ModulusBound, Rule, TraceStep};
use crate::calculus::matrix::{is_nontrivial_orthogonal, matrix_modulus};
use crate::calculus::scalar::scalar_modulus_from_pieces;
use crate::calculus::subspaces::{two_subspace_modulus, SubspacePair};
use crate::linalg::{max_sym_eigenvalue, rank, Matrix};
use crate::operators::functions::{ConvexFunction, FunctionKind};
use crate::operators::monotone::{MonotoneKind, MonotoneOperator};
use crate::operators::operator::{Operator, OperatorKind};
use crate::operators::sets::{ConvexSet, SetKind};

const ORTHOGONAL_TOL: f64 = 1e-12;
const RANK_CUTOFF: f64 = 1e-12;

/// Exact modulus where a rule chain closes, otherwise the tightest derivable interval.
pub fn exact_modulus(op: &Operator) -> ModulusBound {
    match op.kind() {
        OperatorKind::Identity => ModulusBound::exact(0.0, Rule::ShiftOnly, "identity"),
        OperatorKind::Shift(_) => ModulusBound::exact(0.0, Rule::ShiftOnly, "Id + v"),
        OperatorKind::Constant(_) => ModulusBound::exact(0.5, Rule::ConstantMap, "constant map"),
        OperatorKind::LinearMatrix(m) => linear_modulus(m),
        OperatorKind::Affine { matrix, .. } => {
            linear_modulus(matrix).after(Rule::ShiftInvariance, "drop affine shift")
        }
        OperatorKind::Projection(set) => projection_modulus(set),
        OperatorKind::Reflector(set) => {
            if set.is_whole_space() {
                ModulusBound::exact(0.0, Rule::ShiftOnly, "reflector onto the whole space is Id")
            } else {
                ModulusBound::exact(1.0, Rule::Reflector, "reflector of a proper set")
            }
        }
        OperatorKind::Prox(f) => prox_modulus(f, 1.0),
        OperatorKind::Resolvent { operator, alpha } => resolvent_modulus(operator, *alpha),
        OperatorKind::ReflectedResolvent(a) => {
            resolvent_modulus(a, 1.0).scaled(2.0, Rule::ReflectedResolvent, "k(R_A) = 2k(J_A)")
        }
        OperatorKind::Relaxation { lambda, inner } => exact_modulus(inner).scaled(
            *lambda,
            Rule::Relaxation,
            format!("lambda = {lambda}"),
        ),
        OperatorKind::Compose(ops) => compose_modulus(ops),
        OperatorKind::ConvexCombination { weights, operators } => {
            combination_modulus(weights, operators)
        }
        OperatorKind::DouglasRachford { a, b } => douglas_rachford_modulus(op, a, b),
        OperatorKind::ScalarPiecewise { pieces, .. } => match scalar_modulus_from_pieces(pieces) {
            Ok(k) => ModulusBound::exact(k, Rule::ScalarModulus, "(1 - min slope)/2"),
            Err(_) => ModulusBound::unknown(),
        },
        OperatorKind::LimitOperator { inner, .. } => limit_modulus(inner),
    }
}

fn linear_modulus(m: &Matrix) -> ModulusBound {
    if is_nontrivial_orthogonal(m, ORTHOGONAL_TOL) {
        return ModulusBound::exact(1.0, Rule::OrthogonalMatrix, "orthogonal matrix other than I");
    }
    match matrix_modulus(m) {
        Ok(k) => ModulusBound::exact(k, Rule::MatrixModulus, "bisection on the quadratic form"),
        Err(_) => ModulusBound::unknown(),
    }
}

fn projection_modulus(set: &ConvexSet) -> ModulusBound {
    if set.is_whole_space() {
        ModulusBound::exact(0.0, Rule::ShiftOnly, "projection onto the whole space is Id")
    } else if set.is_singleton() {
        ModulusBound::exact(0.5, Rule::ConstantMap, "projection onto a point")
    } else {
        ModulusBound::exact(0.5, Rule::ProjectionSpecial, "projection onto a proper set")
    }
}

/// Bound for `P_{t·f}`.
fn prox_modulus(f: &ConvexFunction, t: f64) -> ModulusBound {
    match f.kind() {
        FunctionKind::Indicator(set) => projection_modulus(set),
        FunctionKind::Quadratic(q) => {
            let l = max_sym_eigenvalue(q).max(0.0);
            if l == 0.0 {
                return ModulusBound::exact(0.0, Rule::ShiftOnly, "zero quadratic");
            }
            let s = t * l;
            ModulusBound::exact(
                s / (2.0 * (1.0 + s)),
                Rule::ProxLipschitz,
                format!("gradient Lipschitz constant {l}"),
            )
        }
        FunctionKind::HalfDistanceSquared { set, alpha } => {
            if set.is_whole_space() {
                return ModulusBound::exact(0.0, Rule::ShiftOnly, "distance to the whole space is 0");
            }
            let s = t * alpha;
            ModulusBound::exact(
                s / (2.0 * (1.0 + s)),
                Rule::ProxLipschitz,
                format!("gradient Lipschitz constant {alpha}"),
            )
        }
        FunctionKind::Huber { mu, alpha } => {
            let s = t * alpha;
            ModulusBound::exact(
                s / (2.0 * (mu + s)),
                Rule::MoreauEnvelope,
                format!("envelope of the norm, mu = {mu}"),
            )
        }
        FunctionKind::Support { set, .. } => {
            if set.is_singleton() {
                ModulusBound::exact(0.0, Rule::ShiftOnly, "support of a point is linear")
            } else if set.is_whole_space() {
                ModulusBound::exact(0.5, Rule::ConstantMap, "prox maps everything to 0")
            } else {
                ModulusBound::exact(0.5, Rule::ProxNonsmooth, "support of a non-singleton set")
            }
        }
        FunctionKind::MoreauEnvelope { inner, mu, alpha } => {
            let s = t * alpha;
            let lambda = s / (mu + s);
            prox_modulus(inner, mu + s).scaled(
                lambda,
                Rule::MoreauEnvelope,
                format!("relaxation of the inner prox by {lambda}"),
            )
        }
        FunctionKind::ScalarPiecewiseConvex { slopes, .. } => {
            if slopes.windows(2).all(|w| w[0] == w[1]) {
                ModulusBound::exact(0.0, Rule::ShiftOnly, "linear function")
            } else {
                ModulusBound::exact(0.5, Rule::ProxNonsmooth, "kinked function")
            }
        }
    }
}

/// Bound for `J_{αA}`.
fn resolvent_modulus(a: &MonotoneOperator, alpha: f64) -> ModulusBound {
    match a.kind() {
        MonotoneKind::Subdifferential(f) => prox_modulus(f, alpha),
        MonotoneKind::LinearMonotone(m) => {
            let n = m.nrows();
            let Some(inv) = (Matrix::identity(n, n) + m * alpha).try_inverse() else {
                return firm_default("resolvent");
            };
            match matrix_modulus(&inv) {
                Ok(k) => ModulusBound::exact(k, Rule::ResolventCocoercive, "(I + alpha M)^-1"),
                Err(_) => firm_default("resolvent"),
            }
        }
        MonotoneKind::NormalCone(set) => projection_modulus(set),
        MonotoneKind::Scaled { beta, inner } => resolvent_modulus(inner, alpha * beta),
        MonotoneKind::Yosida { mu, inner } => {
            let lambda = alpha / (mu + alpha);
            resolvent_modulus(inner, mu + alpha).scaled(
                lambda,
                Rule::YosidaResolvent,
                format!("relaxation of J by {lambda}"),
            )
        }
    }
}

fn firm_default(what: &str) -> ModulusBound {
    ModulusBound::interval(
        0.0,
        0.5,
        vec![TraceStep {
            rule: Rule::FirmDefault,
            detail: format!("{what} is firmly nonexpansive"),
        }],
    )
}

fn is_identity(op: &Operator) -> bool {
    matches!(op.kind(), OperatorKind::Identity)
}

fn is_shift(op: &Operator) -> bool {
    matches!(op.kind(), OperatorKind::Shift(_))
}

fn linear_subspace(op: &Operator) -> Option<&ConvexSet> {
    match op.kind() {
        OperatorKind::Projection(set) if matches!(set.kind(), SetKind::LinearSubspace { .. }) => {
            Some(set)
        }
        _ => None,
    }
}

fn compose_modulus(ops: &[Operator]) -> ModulusBound {
    let mut trace = Vec::new();
    let mut rest: Vec<&Operator> = ops.iter().filter(|o| !is_identity(o)).collect();
    let mut dropped = 0;
    while rest.first().is_some_and(|o| is_shift(o)) {
        rest.remove(0);
        dropped += 1;
    }
    while rest.last().is_some_and(|o| is_shift(o)) {
        rest.pop();
        dropped += 1;
    }
    if dropped > 0 {
        trace.push(TraceStep {
            rule: Rule::ShiftInvariance,
            detail: format!("dropped {dropped} outer shift(s)"),
        });
    }
    let with_prefix = |mut b: ModulusBound, prefix: &[TraceStep]| {
        let mut t = prefix.to_vec();
        t.append(&mut b.trace);
        b.trace = t;
        b
    };
    match rest.len() {
        0 => return with_prefix(ModulusBound::exact(0.0, Rule::ShiftOnly, "composition of shifts"), &trace),
        1 => return with_prefix(exact_modulus(rest[0]), &trace),
        _ => {}
    }

    if rest.len() == 2 {
        if let (Some(v), Some(u)) = (linear_subspace(rest[0]), linear_subspace(rest[1])) {
            if let Ok(pair) = SubspacePair::new(u, v) {
                return match two_subspace_modulus(&pair) {
                    Ok(k) => with_prefix(
                        ModulusBound::exact(
                            k,
                            Rule::TwoSubspaceModulus,
                            format!("friedrichs cosine {}", pair.friedrichs_cosine),
                        ),
                        &trace,
                    ),
                    Err(_) => with_prefix(projection_modulus(u), &trace),
                };
            }
        }
    }

    let owned: Vec<Operator> = rest.iter().map(|o| (*o).clone()).collect();
    if let Ok(product) = Operator::compose(owned.clone()) {
        if let Some((m, _)) = product.affine_form() {
            let b = linear_modulus(&m).after(Rule::LinearCollapse, "composition of affine maps");
            return with_prefix(b, &trace);
        }
    }

    let bounds: Vec<ModulusBound> = owned.iter().map(exact_modulus).collect();
    let upper = bounds
        .iter()
        .map(|b| b.upper)
        .reduce(ogura_yamada)
        .unwrap_or(1.0);
    trace.push(TraceStep {
        rule: Rule::OguraYamada,
        detail: format!("folded {} factor upper bounds", bounds.len()),
    });
    let lower = match composition_non_bijective(&owned) {
        Some(reason) => {
            trace.push(TraceStep {
                rule: Rule::NonBijective,
                detail: reason,
            });
            0.5
        }
        None => 0.0,
    };
    ModulusBound::interval(lower, upper, trace)
}

#[derive(Debug, Clone, Copy, Default)]
struct Bijectivity {
    bijective: bool,
    non_injective: bool,
    non_surjective: bool,
}

/// Conservative structural facts about injectivity and surjectivity.
fn bijectivity(op: &Operator) -> Bijectivity {
    let both = Bijectivity {
        bijective: false,
        non_injective: true,
        non_surjective: true,
    };
    if let Some((m, _)) = op.affine_form() {
        let n = m.nrows();
        return if rank(&m, RANK_CUTOFF) == n {
            Bijectivity {
                bijective: true,
                ..Default::default()
            }
        } else {
            both
        };
    }
    match op.kind() {
        OperatorKind::Projection(set) if !set.is_whole_space() => both,
        OperatorKind::Prox(f) if !f.is_lipschitz_smooth() => both,
        OperatorKind::Resolvent { operator, .. } if proper_normal_cone_or_nonsmooth(operator) => both,
        OperatorKind::ScalarPiecewise { pieces, .. } => {
            let has_flat = pieces.iter().any(|p| p.slope == 0.0);
            let mixed = pieces.iter().any(|p| p.slope > 0.0) && pieces.iter().any(|p| p.slope < 0.0);
            Bijectivity {
                bijective: false,
                non_injective: has_flat || mixed,
                non_surjective: false,
            }
        }
        _ => {
            let b = exact_modulus(op);
            Bijectivity {
                bijective: b.upper < 0.5,
                ..Default::default()
            }
        }
    }
}

fn proper_normal_cone_or_nonsmooth(a: &MonotoneOperator) -> bool {
    match a.kind() {
        MonotoneKind::NormalCone(set) => !set.is_whole_space(),
        MonotoneKind::Subdifferential(f) => !f.is_lipschitz_smooth(),
        MonotoneKind::Scaled { inner, .. } => proper_normal_cone_or_nonsmooth(inner),
        _ => false,
    }
}

/// Reason why `ops[0] ∘ … ∘ ops[m−1]` is not bijective, if one is known.
fn composition_non_bijective(ops: &[Operator]) -> Option<String> {
    let facts: Vec<Bijectivity> = ops.iter().map(bijectivity).collect();
    // Not injective: some factor is, and everything applied before it is bijective.
    for i in (0..ops.len()).rev() {
        if facts[i].non_injective {
            return Some(format!("factor {i} ({}) is not injective", ops[i].name()));
        }
        if !facts[i].bijective {
            break;
        }
    }
    // Not surjective: some factor is, and everything applied after it is bijective.
    for i in 0..ops.len() {
        if facts[i].non_surjective {
            return Some(format!("factor {i} ({}) is not surjective", ops[i].name()));
        }
        if !facts[i].bijective {
            break;
        }
    }
    None
}

fn combination_modulus(weights: &[f64], operators: &[Operator]) -> ModulusBound {
    if let Some((m, _)) = Operator::convex_combination(weights.to_vec(), operators.to_vec())
        .ok()
        .and_then(|t| t.affine_form())
    {
        return linear_modulus(&m).after(Rule::LinearCollapse, "combination of affine maps");
    }
    let (mut rest_w, mut rest_ops) = (Vec::new(), Vec::new());
    for (w, op) in weights.iter().zip(operators) {
        if !is_identity(op) && *w > 0.0 {
            rest_w.push(*w);
            rest_ops.push(op);
        }
    }
    let mass: f64 = rest_w.iter().sum();
    if rest_ops.len() == 1 {
        return exact_modulus(rest_ops[0]).scaled(
            mass,
            Rule::Relaxation,
            format!("lambda = {mass}"),
        );
    }
    let bounds: Vec<ModulusBound> = rest_ops.iter().map(|o| exact_modulus(o)).collect();
    let upper: f64 = rest_w.iter().zip(&bounds).map(|(w, b)| w * b.upper).sum();
    ModulusBound::interval(
        0.0,
        upper,
        vec![TraceStep {
            rule: Rule::Convexity,
            detail: format!("weighted sum of {} upper bounds", bounds.len()),
        }],
    )
}

fn douglas_rachford_modulus(op: &Operator, a: &ConvexSet, b: &ConvexSet) -> ModulusBound {
    let both_linear = matches!(a.kind(), SetKind::LinearSubspace { .. })
        && matches!(b.kind(), SetKind::LinearSubspace { .. });
    if both_linear {
        if let Ok(pair) = SubspacePair::new(a, b) {
            return if pair.is_degenerate() {
                ModulusBound::exact(0.0, Rule::ShiftOnly, "equal subspaces give Id")
            } else {
                ModulusBound::exact(0.5, Rule::DouglasRachfordSubspaces, "distinct subspaces")
            };
        }
    }
    if let Some((m, _)) = op.affine_form() {
        return linear_modulus(&m).after(Rule::LinearCollapse, "affine sets");
    }
    firm_default("douglas_rachford")
}

fn limit_modulus(inner: &Operator) -> ModulusBound {
    let b = exact_modulus(inner);
    let step = |detail: &str| vec![TraceStep {
        rule: Rule::LimitingOperator,
        detail: detail.into(),
    }];
    if b.exact && b.upper == 0.0 {
        return ModulusBound::exact(0.0, Rule::LimitingOperator, "inner map is Id");
    }
    let projection_like = inner.affine_form().is_some()
        || matches!(inner.kind(), OperatorKind::Projection(_))
        || (inner.dim() == 1 && b.upper <= 0.5);
    if projection_like && b.upper < 1.0 && b.lower > 0.0 {
        return ModulusBound::exact(0.5, Rule::LimitingOperator, "limit is the projection onto Fix T");
    }
    if b.lower > 0.0 {
        return ModulusBound::interval(0.5, 1.0, step("range is Fix T, a proper subset"));
    }
    ModulusBound::interval(0.0, 1.0, step("no structural information"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::operators::sets::Halfspace;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn halfspace() -> ConvexSet {
        ConvexSet::halfspace(v(&[1.0, 1.0]), 0.0).unwrap()
    }

    #[test]
    fn base_cases() {
        assert_eq!(exact_modulus(&Operator::identity(2).unwrap()).value(), Some(0.0));
        assert_eq!(exact_modulus(&Operator::projection(halfspace())).value(), Some(0.5));
        assert_eq!(exact_modulus(&Operator::constant(v(&[1.0])).unwrap()).value(), Some(0.5));
    }

    #[test]
    fn relaxed_reflector() {
        let t = Operator::relaxation(0.3, Operator::reflector(halfspace())).unwrap();
        assert_eq!(exact_modulus(&t).value(), Some(0.3));
    }

    #[test]
    fn two_rule_chains_agree() {
        // P_{(α/2)d_C²} = (1/(1+α))Id + (α/(1+α))P_C.
        let alpha = 0.7;
        let f = ConvexFunction::half_distance_squared(halfspace(), alpha).unwrap();
        let direct = exact_modulus(&Operator::prox(f)).value().unwrap();
        let relaxed = exact_modulus(
            &Operator::relaxation(alpha / (1.0 + alpha), Operator::projection(halfspace())).unwrap(),
        )
        .value()
        .unwrap();
        assert_relative_eq!(direct, relaxed, epsilon = 1e-12);
    }

    #[test]
    fn projection_after_arbitrary_map_interval() {
        let slab = ConvexSet::halfspace_intersection(vec![
            Halfspace::new(v(&[1.0, 0.0]), 0.0).unwrap(),
            Halfspace::new(v(&[-1.0, 0.0]), -1.0).unwrap(),
        ])
        .unwrap();
        let inner = Operator::prox(ConvexFunction::huber(2, 1.0, 1.0).unwrap());
        let t = Operator::compose(vec![inner, Operator::projection(slab)]).unwrap();
        let b = exact_modulus(&t);
        assert!(!b.exact);
        assert_eq!(b.lower, 0.5);
        assert_relative_eq!(b.upper, 1.0 / (2.0 - 0.25), epsilon = 1e-15);
    }

    #[test]
    fn two_projections_use_subspace_formula() {
        let line = |t: f64| ConvexSet::linear_subspace(Matrix::from_column_slice(2, 1, &[t.cos(), t.sin()])).unwrap();
        let t = Operator::compose(vec![Operator::projection(line(1.0)), Operator::projection(line(0.0))]).unwrap();
        let b = exact_modulus(&t);
        assert_eq!(b.rules(), vec!["two_subspace_modulus"]);
        let c = 1.0f64.cos();
        assert_relative_eq!(b.upper, (1.0 + c) / (2.0 + c), epsilon = 1e-12);
    }

    #[test]
    fn shift_does_not_change_bound() {
        let inner = Operator::prox(ConvexFunction::huber(2, 1.0, 2.0).unwrap());
        let shifted = Operator::compose(vec![Operator::shift(v(&[1.0, -2.0])).unwrap(), inner.clone()]).unwrap();
        assert_eq!(exact_modulus(&shifted).value(), exact_modulus(&inner).value());
    }

    #[test]
    fn douglas_rachford_of_subspaces() {
        let u = ConvexSet::linear_subspace(Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let w = ConvexSet::span(&Matrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        let t = Operator::douglas_rachford(u, w).unwrap();
        assert_eq!(exact_modulus(&t).value(), Some(0.5));
    }
}
