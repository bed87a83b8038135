mod support {
    pub mod schema;
}

use std::collections::BTreeSet;

use csalsa::bench::{run_experiment, ExperimentSpec, ImageSource, OutputPaths, SolverSettings};
use serde_json::{json, Value};
use support::schema::validate;

fn report_schema() -> Value {
    serde_json::from_str(include_str!("../schemas/report.schema.json")).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn small_reports() -> Vec<Value> {
    let settings = SolverSettings {
        max_iters: Some(5),
        ..Default::default()
    };
    let specs = [
        ExperimentSpec::deblur_preset("3A", ImageSource::Synthetic { size: 32 }).unwrap(),
        ExperimentSpec::mri_preset(32, 8),
    ];
    specs
        .iter()
        .map(|s| {
            let out = run_experiment(s, &settings, &OutputPaths::default()).unwrap();
            serde_json::to_value(&out.report).unwrap()
        })
        .collect()
}

#[test]
fn reports_validate() {
    let schema = report_schema();
    for r in small_reports() {
        validate(&schema, &r).unwrap();
    }
}

#[test]
fn schema_lists_exactly_the_serialized_keys() {
    let schema = report_schema();
    let r = &small_reports()[0];
    assert_eq!(keys(&schema["properties"]), keys(r));
    assert_eq!(
        keys(&schema["properties"]["solver"]["properties"]),
        keys(&r["solver"])
    );
}

#[test]
fn malformed_reports_rejected() {
    let schema = report_schema();
    let good = small_reports().remove(1);
    let mut extra = good.clone();
    extra["unexpected"] = json!(1);
    assert!(validate(&schema, &extra).is_err());
    let mut status = good.clone();
    status["status"] = json!("finished");
    assert!(validate(&schema, &status).is_err());
    let mut missing = good;
    missing.as_object_mut().unwrap().remove("mse");
    assert!(validate(&schema, &missing).is_err());
}

#[test]
fn presets_validate_as_experiments() {
    let schema = report_schema();
    let experiment = json!({ "$defs": schema["$defs"], "$ref": "#/$defs/experiment" });
    let mut specs: Vec<ExperimentSpec> = ExperimentSpec::DEBLUR_PRESETS
        .iter()
        .map(|id| ExperimentSpec::deblur_preset(id, ImageSource::Synthetic { size: 256 }).unwrap())
        .collect();
    specs.push(ExperimentSpec::mri_preset(128, 22));
    for s in specs {
        validate(&experiment, &serde_json::to_value(&s).unwrap()).unwrap();
    }
}

#[test]
fn shared_definitions_agree() {
    let config: Value =
        serde_json::from_str(include_str!("../../cli/schemas/run-config.schema.json")).unwrap();
    assert_eq!(config["$defs"], report_schema()["$defs"]);
}
