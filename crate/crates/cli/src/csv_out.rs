//! `--csv`: one flat table per command. Vectors occupy one cell with
//! components separated by `;`; floats use the report's 17-digit format.

use crate::format::{fmt_real, Real};
use crate::report::{Report, Results};

fn r(x: Real) -> String {
    fmt_real(x.0)
}

fn opt(x: Option<Real>) -> String {
    x.map(r).unwrap_or_default()
}

fn v(xs: &[Real]) -> String {
    xs.iter().map(|&x| r(x)).collect::<Vec<_>>().join(";")
}

pub fn to_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |cells: Vec<String>| w.write_record(&cells).expect("writing to memory cannot fail");
    match &report.results {
        Results::Analyze(a) => {
            row(vec!["operator".into(), "dim".into(), "lower".into(), "upper".into(), "exact".into(), "rules".into()]);
            let rules: Vec<&str> = a.modulus.trace.iter().map(|t| t.rule.as_str()).collect();
            row(vec![
                a.operator.clone(),
                a.dim.to_string(),
                r(a.modulus.lower),
                r(a.modulus.upper),
                a.modulus.exact.to_string(),
                rules.join(";"),
            ]);
        }
        Results::Estimate(e) => {
            let est = &e.estimate;
            row(
                ["quantity", "direction", "value", "samples_used", "skipped", "seed", "witness_x", "witness_y"]
                    .map(String::from)
                    .to_vec(),
            );
            let (wx, wy) = est.witness.as_ref().map_or((String::new(), String::new()), |[x, y]| (v(x), v(y)));
            row(vec![
                est.quantity.clone(),
                est.direction.clone(),
                r(est.value),
                est.samples_used.to_string(),
                est.skipped.to_string(),
                est.seed.to_string(),
                wx,
                wy,
            ]);
        }
        Results::Iterate(it) => {
            let dim = it.points.first().map_or(0, Vec::len);
            let mut header = vec!["step".to_string()];
            header.extend((0..dim).map(|i| format!("x{i}")));
            row(header);
            for (step, p) in it.points.iter().enumerate() {
                let mut cells = vec![step.to_string()];
                cells.extend(p.iter().map(|&x| r(x)));
                row(cells);
            }
        }
        Results::Invert(i) => {
            row(["x", "residual", "iterations", "modulus_upper", "rate", "predicted_iterations"].map(String::from).to_vec());
            row(vec![
                v(&i.x),
                r(i.residual),
                i.iterations.to_string(),
                opt(i.modulus_upper),
                opt(i.rate),
                i.predicted_iterations.map(|n| n.to_string()).unwrap_or_default(),
            ]);
        }
        Results::Classify(c) => {
            row(
                [
                    "verdict",
                    "max_gap",
                    "points",
                    "limit_modulus",
                    "witness_x",
                    "limit",
                    "projection",
                    "distance_to_limit",
                    "distance_to_projection",
                ]
                .map(String::from)
                .to_vec(),
            );
            let mut cells = vec![c.verdict.clone(), r(c.max_gap), c.points.to_string(), r(c.limit_modulus.value)];
            match &c.witness {
                Some(w) => cells.extend([
                    v(&w.x),
                    v(&w.limit),
                    v(&w.projection),
                    r(w.distance_to_limit),
                    r(w.distance_to_projection),
                ]),
                None => cells.extend(std::iter::repeat_n(String::new(), 5)),
            }
            row(cells);
        }
        Results::Verify(res) => {
            row(
                ["suite", "subject", "mu", "alpha", "points", "max_residual", "expected_modulus", "derived_modulus", "sampled_modulus", "passed"]
                    .map(String::from)
                    .to_vec(),
            );
            for c in &res.checks {
                row(vec![
                    c.suite.clone(),
                    c.subject.clone(),
                    r(c.mu),
                    r(c.alpha),
                    c.points.to_string(),
                    r(c.max_residual),
                    opt(c.expected_modulus),
                    opt(c.derived_modulus),
                    opt(c.sampled_modulus),
                    c.passed.to_string(),
                ]);
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flushing to memory cannot fail")).expect("CSV cells are UTF-8")
}
