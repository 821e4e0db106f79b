// SPDX-License-Identifier: MIT OR Apache-2.0

use qbnf::pipeline::{run, Command, GermSource, RunConfig, REPORT_SCHEMA};
use qbnf::Error;

const RESONANT: &str = r#"{"L":6.283185307179586,"tau":0.1111111111111111,"tau_nu":0.3,"tau_nunu":0.1,"higher":[0.0,0.0]}"#;

fn preset(command: Command, name: &str) -> RunConfig {
    RunConfig::new(command, GermSource::Preset(name.to_string()))
}

#[test]
fn compute_report_embeds_schema_and_conventions() {
    let report = run(&preset(Command::Compute, "paraboloid")).unwrap();
    assert!(report.passed(), "{:?}", report.failing());
    let v = report.to_json();
    assert_eq!(v["schema"], REPORT_SCHEMA);
    assert!(!v["conventions"]["symbols"].as_array().unwrap().is_empty());
    assert!(!v["conventions"]["grades"].as_array().unwrap().is_empty());
    for key in ["alpha", "birkhoff", "wave_invariants", "morse_index"] {
        assert!(!v["result"][key].is_null(), "missing {key}");
    }
    assert_eq!(v["config"]["command"], "compute");
}

#[test]
fn markdown_lists_every_check() {
    let report = run(&preset(Command::Validate, "quartic")).unwrap();
    let md = report.to_markdown();
    assert!(md.contains("| check | value | tolerance | status |"));
    for c in &report.checks {
        assert!(md.contains(&c.name));
    }
}

#[test]
fn resonant_germ_names_the_exponent() {
    let config = RunConfig::new(
        Command::Compute,
        GermSource::File { path: "resonant.json".to_string(), contents: RESONANT.to_string() },
    );
    let report = run(&config).unwrap();
    assert!(!report.passed());
    let failing = report.failing();
    assert_eq!(failing[0].name, "resonance");
    assert!(failing[0].detail.as_deref().unwrap().contains("m-n"));
}

#[test]
fn malformed_inputs_are_errors() {
    let err = run(&preset(Command::Compute, "torus")).unwrap_err();
    assert!(matches!(err, Error::MalformedInput(_)));
    let config = RunConfig::new(
        Command::Compute,
        GermSource::File { path: "bad.json".to_string(), contents: "{\"L\": ".to_string() },
    );
    assert!(matches!(run(&config).unwrap_err(), Error::MalformedInput(_)));
    let err = run(&RunConfig::new(
        Command::OracleSpectral,
        GermSource::File { path: "x.json".to_string(), contents: RESONANT.to_string() },
    ))
    .unwrap_err();
    assert!(matches!(err, Error::MalformedInput(_)));
}

#[test]
fn suite_is_deterministic_per_seed() {
    let mut config = RunConfig::new(Command::Suite, GermSource::Preset("paraboloid".to_string()));
    config.seed = 11;
    let a = run(&config).unwrap();
    let b = run(&config).unwrap();
    assert!(a.passed(), "{:?}", a.failing());
    assert_eq!(a.to_json_string(), b.to_json_string());
}

#[test]
fn higher_order_compute_reports_each_invariant() {
    let mut config = preset(Command::Compute, "quartic");
    config.order = 1;
    let report = run(&config).unwrap();
    assert!(report.passed(), "{:?}", report.failing());
    assert_eq!(report.body["wave_invariants"].as_array().unwrap().len(), 2);
}
