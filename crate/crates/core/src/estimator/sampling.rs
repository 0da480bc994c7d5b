//! Deterministic sample generation: seeded Gaussian pairs plus pairs aimed at known structure.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{Matrix, Vector};
use crate::operators::functions::{ConvexFunction, FunctionKind};
use crate::operators::monotone::{MonotoneKind, MonotoneOperator};
use crate::operators::operator::{Operator, OperatorKind};
use crate::operators::sets::ConvexSet;

/// Coordinate scales cycled through by the random sampler.
pub const SCALES: [f64; 3] = [0.1, 1.0, 10.0];

pub type Pair = (Vector, Vector);

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vector {
    Vector::from_fn(dim, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

/// `n` seeded points with coordinates `scale·N(0,1)`, scales cycling through [`SCALES`].
pub fn random_points(dim: usize, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| gaussian(&mut rng, dim, SCALES[i % 3])).collect()
}

/// `n` seeded pairs `(x, x + s_b·N)` with `x = s_a·N`.
pub fn random_pairs(dim: usize, n: usize, seed: u64) -> Vec<Pair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let x = gaussian(&mut rng, dim, SCALES[i % 3]);
            let d = gaussian(&mut rng, dim, SCALES[(i / 3) % 3]);
            let y = &x + d;
            (x, y)
        })
        .collect()
}

/// Pairs placed where extremal ratios tend to live for this operator:
/// projection normals of every set in the tree, extremal directions of
/// affine maps, and kinks of scalar maps.
pub fn adversarial_pairs(op: &Operator, seed: u64) -> Vec<Pair> {
    let n = op.dim();
    let mut pairs = Vec::new();
    let mut sets = Vec::new();
    collect_sets(op, &mut sets);
    let bases = base_points(n, seed);
    for set in sets {
        for z in &bases {
            let Ok(p) = set.project(z) else { continue };
            let normal = z - &p;
            if normal.norm() <= 1e-9 * z.norm().max(1.0) {
                continue;
            }
            pairs.push((p.clone(), z.clone()));
            pairs.push((p.clone(), &p + &normal * 0.5));
            pairs.push((&p + &normal * 0.25, &p + &normal * 2.0));
        }
    }
    if let Some((m, _)) = op.affine_form() {
        for d in affine_directions(&m) {
            pairs.push((Vector::zeros(n), d.clone()));
            pairs.push((bases[1].clone(), &bases[1] + &d * 3.0));
        }
    }
    for i in 0..n {
        for r in [1e-3, 0.1, 1.0] {
            let mut e = Vector::zeros(n);
            e[i] = r;
            pairs.push((Vector::zeros(n), e));
        }
    }
    if n == 1 {
        let mut kinks = Vec::new();
        collect_kinks(op, 1.0, &mut kinks);
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        pairs.extend(kink_pairs(&kinks));
    }
    pairs
}

fn base_points(n: usize, seed: u64) -> Vec<Vector> {
    let mut points = vec![Vector::zeros(n)];
    for i in 0..n {
        for s in [3.0, -3.0, 10.0, -10.0] {
            let mut e = Vector::zeros(n);
            e[i] = s;
            points.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5e75);
    for _ in 0..8 {
        points.push(gaussian(&mut rng, n, 5.0));
    }
    points
}

/// Directions attaining the extremal modulus ratio of `x ↦ Mx`, plus
/// eigen- and singular directions of `I − M`.
fn affine_directions(m: &Matrix) -> Vec<Vector> {
    let n = m.nrows();
    let b = Matrix::identity(n, n) - m;
    let sym = (&b + b.transpose()) * 0.5;
    let mut dirs = Vec::new();
    let eig = SymmetricEigen::new(sym.clone());
    for j in 0..n {
        dirs.push(eig.eigenvectors.column(j).into_owned());
    }
    let svd = b.clone().svd(false, true);
    if let Some(vt) = svd.v_t {
        for j in 0..vt.nrows() {
            dirs.push(vt.row(j).transpose());
        }
    }
    // Maximize ‖Bd‖²/(dᵀ(B+Bᵀ)d) over the range of B + Bᵀ.
    let lmax = eig.eigenvalues.max();
    if lmax > 0.0 {
        let keep: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 1e-12 * lmax).collect();
        let w = Matrix::from_fn(n, keep.len(), |r, c| {
            eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
        });
        let reduced = w.transpose() * b.transpose() * &b * &w;
        let red = SymmetricEigen::new((&reduced + reduced.transpose()) * 0.5);
        let top = red.eigenvalues.imax();
        let d = &w * red.eigenvectors.column(top);
        let norm = d.norm();
        if norm > 0.0 {
            dirs.push(d / norm);
        }
    }
    dirs
}

fn kink_pairs(kinks: &[f64]) -> Vec<Pair> {
    let s = |x: f64| Vector::from_element(1, x);
    let mut pairs = Vec::new();
    let Some((&first, &last)) = kinks.first().zip(kinks.last()) else {
        return pairs;
    };
    pairs.push((s(first - 2.0), s(first - 1.0)));
    pairs.push((s(last + 1.0), s(last + 2.0)));
    for w in kinks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let q = (b - a) / 4.0;
        pairs.push((s(a + q), s(b - q)));
    }
    for &k in kinks {
        for eps in [1e-3, 0.1, 1.0] {
            pairs.push((s(k - eps), s(k + eps)));
        }
    }
    pairs
}

fn collect_sets<'a>(op: &'a Operator, out: &mut Vec<&'a ConvexSet>) {
    match op.kind() {
        OperatorKind::Projection(c) | OperatorKind::Reflector(c) => out.push(c),
        OperatorKind::DouglasRachford { a, b } => {
            out.push(a);
            out.push(b);
        }
        OperatorKind::Prox(f) => collect_function_sets(f, out),
        OperatorKind::Resolvent { operator, .. } | OperatorKind::ReflectedResolvent(operator) => {
            collect_monotone_sets(operator, out)
        }
        OperatorKind::Relaxation { inner, .. } | OperatorKind::LimitOperator { inner, .. } => {
            collect_sets(inner, out)
        }
        OperatorKind::Compose(ops) | OperatorKind::ConvexCombination { operators: ops, .. } => {
            for o in ops {
                collect_sets(o, out);
            }
        }
        _ => {}
    }
}

fn collect_function_sets<'a>(f: &'a ConvexFunction, out: &mut Vec<&'a ConvexSet>) {
    match f.kind() {
        FunctionKind::Indicator(c)
        | FunctionKind::HalfDistanceSquared { set: c, .. }
        | FunctionKind::Support { set: c, .. } => out.push(c),
        FunctionKind::MoreauEnvelope { inner, .. } => collect_function_sets(inner, out),
        _ => {}
    }
}

fn collect_monotone_sets<'a>(a: &'a MonotoneOperator, out: &mut Vec<&'a ConvexSet>) {
    match a.kind() {
        MonotoneKind::NormalCone(c) => out.push(c),
        MonotoneKind::Subdifferential(f) => collect_function_sets(f, out),
        MonotoneKind::Scaled { inner, .. } | MonotoneKind::Yosida { inner, .. } => {
            collect_monotone_sets(inner, out)
        }
        MonotoneKind::LinearMonotone(_) => {}
    }
}

/// Kink locations of scalar maps in the tree, with `t` the prox scale in effect.
fn collect_kinks(op: &Operator, t: f64, out: &mut Vec<f64>) {
    match op.kind() {
        OperatorKind::ScalarPiecewise { breakpoints, .. } => out.extend(breakpoints),
        OperatorKind::Prox(f) => function_kinks(f, t, out),
        OperatorKind::Resolvent { operator, alpha } => {
            if let MonotoneKind::Subdifferential(f) = operator.kind() {
                function_kinks(f, t * alpha, out);
            }
        }
        OperatorKind::Relaxation { inner, .. } | OperatorKind::LimitOperator { inner, .. } => {
            collect_kinks(inner, t, out)
        }
        OperatorKind::Compose(ops) | OperatorKind::ConvexCombination { operators: ops, .. } => {
            for o in ops {
                collect_kinks(o, t, out);
            }
        }
        OperatorKind::Projection(c) | OperatorKind::Reflector(c) => {
            let lo = c.project(&Vector::from_element(1, -1e300)).ok();
            let hi = c.project(&Vector::from_element(1, 1e300)).ok();
            for p in [lo, hi].into_iter().flatten() {
                if p[0].abs() < 1e299 {
                    out.push(p[0]);
                }
            }
        }
        _ => {}
    }
}

fn function_kinks(f: &ConvexFunction, t: f64, out: &mut Vec<f64>) {
    if let FunctionKind::ScalarPiecewiseConvex { breakpoints, slopes } = f.kind() {
        // P_{tf} has kinks where x − b ∈ t·{s_j, s_{j+1}}.
        for (j, &b) in breakpoints.iter().enumerate() {
            out.push(b + t * slopes[j]);
            out.push(b + t * slopes[j + 1]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_reproducible() {
        assert_eq!(random_pairs(3, 20, 9), random_pairs(3, 20, 9));
        assert_ne!(random_pairs(3, 20, 9), random_pairs(3, 20, 10));
    }

    #[test]
    fn extremal_direction_of_diagonal_map() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        let dirs = affine_directions(&m);
        let d = dirs.last().unwrap();
        assert!(d[0].abs() < 1e-12 && (d[1].abs() - 1.0).abs() < 1e-12);
    }
}
