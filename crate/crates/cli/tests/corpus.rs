use std::fs;
use std::path::PathBuf;

use avgop_cli::{parse_document, run, to_csv, to_json, Command, Document, Params, Report, Results};

fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn corpus() -> Vec<(String, Document)> {
    let mut out: Vec<(String, Document)> = fs::read_dir(specs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let doc = parse_document(&fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, doc)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn load(name: &str) -> Document {
    parse_document(&fs::read_to_string(specs_dir().join(format!("{name}.json"))).unwrap()).unwrap()
}

fn quick() -> Params {
    Params {
        samples: 2000,
        ..Params::default()
    }
}

fn upper(name: &str) -> (f64, bool, Vec<String>) {
    match run(&load(name), Command::Analyze, &Params::default()).unwrap().results {
        Results::Analyze(a) => (
            a.modulus.upper.0,
            a.modulus.exact,
            a.modulus.trace.iter().map(|t| t.rule.clone()).collect(),
        ),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn corpus_is_not_empty_and_round_trips() {
    let docs = corpus();
    assert!(docs.len() >= 15, "only {} documents", docs.len());
    for (name, doc) in &docs {
        let compact = serde_json::to_string(doc).unwrap();
        assert_eq!(&parse_document(&compact).unwrap(), doc, "{name}");
        assert_eq!(&parse_document(&to_json(doc)).unwrap(), doc, "{name}");
    }
}

#[test]
fn derived_moduli_match_closed_forms() {
    let c = std::f64::consts::FRAC_PI_4.cos();
    let cases: &[(&str, f64, f64)] = &[
        ("matrix_diag_three_quarters", 0.75, 1e-9),
        ("matrix_diag_half_quarter", 0.375, 1e-9),
        ("rotation_quarter_turn", 1.0, 0.0),
        ("two_subspaces_pi_over_4", (1.0 + c) / (2.0 + c), 1e-12),
        ("two_subspaces_pi_over_3", 0.6, 1e-12),
        ("huber_prox", 2.0 / (2.0 * (1.0 + 2.0)), 0.0),
        ("distance_squared_prox", 0.5 / (2.0 * (1.0 + 0.5)), 0.0),
        ("yosida_normal_cone_resolvent", 1.0 / (2.0 * (2.0 + 1.0)), 0.0),
        ("support_box_prox", 0.5, 0.0),
        ("support_point_prox", 0.0, 0.0),
        ("halfspace_projection", 0.5, 0.0),
        ("quarter_plane_projection", 0.5, 0.0),
        ("relaxed_ball_projection", 0.25, 1e-15),
        ("quadratic_prox_inversion", 0.375, 1e-15),
        ("scalar_kink", 0.75, 0.0),
        ("scalar_kink_limit", 0.75, 0.0),
        ("averaged_clamp_limit", 0.25, 0.0),
    ];
    for &(name, expected, tol) in cases {
        let (k, exact, _) = upper(name);
        assert!(exact, "{name} is not exact");
        assert!((k - expected).abs() <= tol, "{name}: {k} vs {expected}");
    }
    assert_eq!(upper("two_subspaces_pi_over_4").2, vec!["two_subspace_modulus"]);
}

#[test]
fn every_document_runs_its_commands_and_reports_round_trip() {
    for (name, doc) in corpus() {
        let mut commands = Vec::new();
        if doc.operator.is_some() {
            commands.extend([Command::Analyze, Command::Estimate]);
        }
        if doc.x0.is_some() {
            commands.push(Command::Iterate);
        }
        if doc.v.is_some() {
            commands.push(Command::Invert);
        }
        if doc.fix_set.is_some() {
            commands.push(Command::Classify);
        }
        if doc.verify.is_some() {
            commands.push(Command::Verify);
        }
        assert!(!commands.is_empty(), "{name} exercises nothing");
        for command in commands {
            let report = run(&doc, command, &quick()).unwrap_or_else(|e| panic!("{name} {command:?}: {e}"));
            let back: Report = serde_json::from_str(&to_json(&report)).unwrap();
            assert_eq!(back, report, "{name} {command:?}");
            assert!(!to_csv(&report).is_empty());
            match &report.results {
                Results::Estimate(e) => {
                    if let Some(bound) = &e.derived {
                        assert!(e.estimate.value.0 <= bound.upper.0 + 1e-9, "{name}: estimate above derived modulus");
                    }
                    if let Some(f) = &e.falsification {
                        assert!(!f.violated, "{name}: a true claim was falsified");
                    }
                }
                Results::Verify(v) => assert!(v.all_passed, "{name}: {:?}", v.checks),
                _ => {}
            }
        }
    }
}

#[test]
fn diag_estimate_with_seed_seven_stays_below_three_quarters() {
    let params = Params {
        seed: 7,
        ..Params::default()
    };
    let report = run(&load("matrix_diag_three_quarters"), Command::Estimate, &params).unwrap();
    let Results::Estimate(e) = report.results else { panic!() };
    assert_eq!(e.estimate.direction, "lower_bound");
    assert!(e.estimate.value.0 <= 0.75 + 1e-9 && e.estimate.value.0 > 0.7);
    assert_eq!(report.request.params.seed, 7);
}

#[test]
fn douglas_rachford_orbit_and_classification() {
    let doc = load("dr_line_slab");
    let report = run(&doc, Command::Iterate, &Params::default()).unwrap();
    let csv = to_csv(&report);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "step,x0,x1");
    assert_eq!(rows[1], "0,4.0000000000000000e0,1.0000000000000000e1");
    assert_eq!(rows[2], "1,-1.0000000000000000e0,7.0000000000000000e0");
    assert_eq!(rows[3], "2,-2.0000000000000000e0,3.0000000000000000e0");
    assert_eq!(rows[4], "3,-5.0000000000000000e-1,5.0000000000000000e-1");
    assert_eq!(rows[5], "4,0.0000000000000000e0,0.0000000000000000e0");

    let report = run(&doc, Command::Classify, &quick()).unwrap();
    let Results::Classify(c) = report.results else { panic!() };
    assert_eq!(c.verdict, "not_projection");
    let w = c.witness.unwrap();
    assert!((w.distance_to_projection.0 - 2.0 * 17f64.sqrt()).abs() <= 1e-12);
    assert!((w.distance_to_limit.0 - 2.0 * 29f64.sqrt()).abs() <= 1e-12);
}

#[test]
fn clamp_limit_is_a_projection() {
    let report = run(&load("averaged_clamp_limit"), Command::Classify, &quick()).unwrap();
    let Results::Classify(c) = report.results else { panic!() };
    assert_eq!(c.verdict, "projection");
    assert!(c.witness.is_none());
}

#[test]
fn inversion_recovers_the_direct_solve() {
    let report = run(&load("quadratic_prox_inversion"), Command::Invert, &Params::default()).unwrap();
    let Results::Invert(i) = report.results else { panic!() };
    assert!((i.x[0].0 - 4.0).abs() <= 1e-9);
    assert!(i.iterations <= 120);
    assert_eq!(i.rate.map(|r| r.0), Some(0.75));
}

#[test]
fn report_echoes_every_input() {
    let doc = load("huber_prox");
    let params = Params {
        seed: 11,
        samples: 500,
        refine: 3,
        ..Params::default()
    };
    let report = run(&doc, Command::Estimate, &params).unwrap();
    assert_eq!(report.request.document, doc);
    assert_eq!(report.request.params, params);
    assert_eq!(report.request.command, Command::Estimate);
    assert_eq!(report.version, avgop_core::VERSION);
    assert!(report.wall_time_seconds.0 >= 0.0);
}

#[test]
fn commands_report_missing_inputs_as_validation_errors() {
    let doc = load("huber_prox");
    for (command, field) in [
        (Command::Iterate, "x0"),
        (Command::Invert, "v"),
        (Command::Classify, "fix_set"),
    ] {
        match run(&doc, command, &quick()) {
            Err(avgop_cli::CliError::Validation { path, .. }) => assert_eq!(path, field),
            other => panic!("{command:?}: unexpected {other:?}"),
        }
    }
}
