mod common;

use std::path::Path;
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use proxpair::structure::PunsVerdict;
use proxpair_cli::fixtures::{self, FIXTURE_NAMES};
use proxpair_cli::run::{Overrides, TaskOutput};
use proxpair_cli::spec::{ProblemSpec, SpecError, TaskKind};
use proxpair_cli::{run_spec, EXIT_INPUT, EXIT_OK, EXIT_UNCERTIFIED};
use serde_json::Value;

use common::*;

fn proxpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxpair"))
        .args(args)
        .env("PROXPAIR_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_fixture(dir: &Path, spec: &ProblemSpec) -> String {
    let path = dir.join(format!("{}.json", spec.name));
    std::fs::write(&path, spec.to_json()).unwrap();
    path.display().to_string()
}

fn report_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

#[test]
fn fixtures_round_trip() {
    for spec in fixtures::canonical() {
        let text = spec.to_json();
        let back = ProblemSpec::parse(&text).unwrap();
        assert_eq!(back, spec, "{}", spec.name);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn emit_writes_six_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let first = fixtures::emit_fixtures(dir.path()).unwrap();
    assert_eq!(first.len(), 6);
    let names: Vec<String> = first
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, FIXTURE_NAMES);
    let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let second = fixtures::emit_fixtures(dir.path()).unwrap();
    for (p, b) in second.iter().zip(&bytes) {
        assert_eq!(&std::fs::read(p).unwrap(), b);
    }
}

#[test]
fn fixtures_command_writes_the_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = proxpair(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 6);
}

#[test]
fn example1_records_its_approximation_error() {
    let spec = fixtures::example1_dim4();
    assert_eq!(spec.meta["shift"], 0.5);
    let verts = fixtures::rhombicuboctahedron();
    assert_eq!(verts.len(), 24);
    for v in &verts {
        assert_abs_diff_eq!(v.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
    }
    // Oracle: the square facets sit at distance (1 + sqrt 2) / sqrt(5 + 2 sqrt 2).
    let s2 = 2f64.sqrt();
    let square = (1.0 + s2) / (5.0 + 2.0 * s2).sqrt();
    let error = spec.meta["hausdorff_error"].as_f64().unwrap();
    assert!(error >= 1.0 - square - 1e-12);
    assert!(error > 0.0 && error < 0.2);
}

#[test]
fn malformed_body_is_an_input_error_naming_the_field() {
    let mut spec = fixtures::parallel_segments_l2();
    spec.bodies
        .insert("B".into(), proxpair::ConvexBody::segment(vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]));
    let text = serde_json::to_string_pretty(&spec).unwrap();
    match ProblemSpec::parse(&text) {
        Err(SpecError::Invalid { field, .. }) => assert_eq!(field, "bodies.B"),
        other => panic!("unexpected {other:?}"),
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let out = proxpair(&["analyze", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bodies.B"));
}

#[test]
fn parse_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"name\": \"x\",\n  \"norm\": \n}").unwrap();
    let out = proxpair(&["run", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn unknown_task_names_are_rejected() {
    let text = fixtures::reflection_bpp().to_json().replace("\"solve\"", "\"optimize\"");
    let err = ProblemSpec::parse(&text).unwrap_err();
    assert!(err.to_string().contains("optimize"), "{err}");
}

#[test]
fn dangling_references_are_rejected() {
    let mut spec = fixtures::reflection_bpp();
    spec.tasks[0].map = Some("missing".into());
    let err = spec.validate().unwrap_err();
    assert!(err.to_string().starts_with("tasks[0].map"), "{err}");
    let mut spec = fixtures::reflection_bpp();
    spec.pairs.push(("A".into(), "C".into()));
    assert!(spec.validate().unwrap_err().to_string().starts_with("pairs[1]"));
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let reflection = write_fixture(dir.path(), &fixtures::reflection_bpp());
    let example2 = write_fixture(dir.path(), &fixtures::example2_linf());
    let missing = dir.path().join("missing.json").display().to_string();
    let cases: [(&[&str], i32); 6] = [
        (&["solve", "--spec", &reflection], EXIT_OK),
        (&["analyze", "--spec", &example2], EXIT_OK),
        (&["structure", "--spec", &example2], EXIT_UNCERTIFIED),
        (&["run", "--spec", &missing], EXIT_INPUT),
        (&["solve", "--spec", &reflection, "--tol", "-1"], EXIT_INPUT),
        (&["frobnicate"], EXIT_INPUT),
    ];
    for (args, code) in cases {
        assert_eq!(proxpair(args).status.code(), Some(code), "{args:?}");
    }
}

#[test]
fn example2_analyze_flags_the_whole_pair_proximal() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &fixtures::example2_linf());
    let out = proxpair(&["analyze", "--spec", &path]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let report = report_json(&out);
    let result = &report["results"][0];
    assert_eq!(result["task"], "analyze");
    let a = &result["output"]["analyze"];
    assert_eq!(a["metrics"]["flags"]["proximal"], true);
    assert_eq!(a["core"]["covers_a"], true);
    assert_eq!(a["core"]["covers_b"], true);
    assert_eq!(a["metrics"]["flags"]["semisharp"], false);
    assert_eq!(a["metrics"]["d"], 1.0);
    assert_eq!(report["seed"], 202);
}

#[test]
fn reflection_solve_matches_the_grid_optimum() {
    let spec = fixtures::reflection_bpp();
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &spec);
    let report_path = dir.path().join("report.json");
    let out = proxpair(&["solve", "--spec", &path, "--out", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let trace = &report["results"][0]["output"]["solve"];
    assert_eq!(trace["outcome"]["status"], "converged");
    let x: Vec<f64> = serde_json::from_value(trace["outcome"]["x_star"].clone()).unwrap();
    let pair = pair_of(&spec, 0);
    let map = &spec.maps["reflection"];
    let (best, _) = grid_argmin(&pair.norm, &vertices(&pair.a), 1e-3, |p| map.on_a(p));
    assert!(dist_oracle(&pair.norm, &x, &best) <= 1e-4, "{x:?} vs {best:?}");
    let levels = trace["iterations"].as_array().unwrap();
    for key in ["level", "delta", "d", "gap", "bound", "ok"] {
        assert!(levels[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn overrides_are_echoed_and_applied() {
    let spec = fixtures::parallel_segments_l2();
    let ov = Overrides {
        seed: Some(9),
        tol: Some(1e-6),
        ..Overrides::default()
    };
    let report = run_spec(&spec, Some(TaskKind::Analyze), &ov).unwrap();
    assert_eq!(report.seed, 9);
    assert_eq!(report.results[0].seed, 9);
    assert_eq!(report.results[0].tol, 1e-6);
    let json: Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["overrides"]["seed"], 9);
}

#[test]
fn commands_synthesize_tasks_when_the_spec_lists_none() {
    let spec = fixtures::reflection_bpp();
    let report = run_spec(&spec, Some(TaskKind::Falsify), &Overrides::default()).unwrap();
    assert_eq!(report.results.len(), 1);
    assert!(matches!(report.results[0].output, TaskOutput::Falsify(_)));
}

#[test]
fn reports_are_deterministic() {
    let spec = fixtures::parallel_segments_l2();
    let a = run_spec(&spec, None, &Overrides::default()).unwrap().to_json();
    let b = run_spec(&spec, None, &Overrides::default()).unwrap().to_json();
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
    assert!(a.trim_end().trim_end_matches('}').trim_end().contains("\"wall_time\""));
}

#[test]
fn structure_verdicts_only_on_strictly_convex_norms() {
    // A pair with proximal uniform normal structure is semisharp, which
    // every strictly convex norm guarantees; the converse fails on the
    // l-infinity fixtures.
    for spec in fixtures::canonical() {
        let report = run_spec(&spec, Some(TaskKind::Structure), &Overrides::default()).unwrap();
        for r in &report.results {
            if let TaskOutput::Structure(s) = &r.output {
                if matches!(s.estimate.verdict, PunsVerdict::HasStructureSampled) {
                    assert!(spec.norm.is_strictly_convex().is_strict(), "{}", spec.name);
                }
                assert!(s.estimate.n_hat <= s.estimate.c0_hat + 1e-7, "{}", spec.name);
            }
        }
    }
}
