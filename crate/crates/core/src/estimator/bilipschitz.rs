use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::estimator::estimate::modulus_pairs;
use crate::linalg::Vector;
use crate::operators::operator::Operator;

#[derive(Debug, Clone, PartialEq)]
pub struct BiLipschitzReport {
    pub k: f64,
    /// `2(1/2 − k)`, the claimed lower Lipschitz factor.
    pub lower_factor: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_witness: Option<(Vector, Vector)>,
    pub samples: usize,
}

/// Checks `(1 − 2k)‖x−y‖ ≤ ‖Tx−Ty‖ ≤ ‖x−y‖` on sampled pairs for a claimed `k < 1/2`.
pub fn bilipschitz_check(op: &Operator, k: f64, n: usize, seed: u64) -> Result<BiLipschitzReport> {
    if !(0.0..=1.0).contains(&k) {
        return Err(invalid(format!("modulus must lie in [0, 1] (got {k})")));
    }
    if k >= 0.5 {
        return Err(Error::NotNormallyNonexpansive { k });
    }
    let lower = 1.0 - 2.0 * k;
    let pairs = modulus_pairs(op, n, seed);
    let measured: Vec<Result<(f64, f64)>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let nd = (x - y).norm();
            let nt = (op.evaluate(x)? - op.evaluate(y)?).norm();
            Ok((nd, nt))
        })
        .collect();
    let mut report = BiLipschitzReport {
        k,
        lower_factor: lower,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        min_witness: None,
        samples: pairs.len(),
    };
    for (i, m) in measured.into_iter().enumerate() {
        let (nd, nt) = m?;
        if nd == 0.0 {
            continue;
        }
        let slack = 1e-10 * nd.max(1.0);
        let ratio = nt / nd;
        if nt > nd + slack || nt < lower * nd - slack {
            let (x, y) = &pairs[i];
            return Err(Error::ViolationFound {
                x: x.iter().copied().collect(),
                y: y.iter().copied().collect(),
                ratio,
                lower,
            });
        }
        if ratio < report.min_ratio {
            report.min_ratio = ratio;
            report.min_witness = Some(pairs[i].clone());
        }
        report.max_ratio = report.max_ratio.max(ratio);
    }
    Ok(report)
}
