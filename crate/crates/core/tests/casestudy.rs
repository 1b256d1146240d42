use resha_core::casestudy::{compare, parse_golden, verify_golden, QIASP_GOLDEN, QIASP_MODEL};
use resha_core::dsl::parse_model;
use resha_core::model::validate_model;
use resha_core::pipeline::{run_pipeline, PipelineOptions};

#[test]
fn shipped_model_matches_shipped_golden() {
    let report = verify_golden(QIASP_MODEL, QIASP_GOLDEN).unwrap();
    assert!(report.passed(), "{report}");
    assert!(report.checked >= 20);
}

#[test]
fn bundled_files_match_embedded_copies() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples");
    assert_eq!(std::fs::read_to_string(format!("{dir}/qiasp.resha")).unwrap(), QIASP_MODEL);
    assert_eq!(std::fs::read_to_string(format!("{dir}/qiasp.golden.json")).unwrap(), QIASP_GOLDEN);
}

#[test]
fn wrong_census_fails_on_that_field() {
    let golden = QIASP_GOLDEN.replace("\"hw_stochastic_events\": 41", "\"hw_stochastic_events\": 42");
    let report = verify_golden(QIASP_MODEL, &golden).unwrap();
    assert_eq!(report.diffs.len(), 1, "{report}");
    assert_eq!(report.diffs[0].field, "census.hw_stochastic_events");
    assert_eq!((report.diffs[0].expected.as_str(), report.diffs[0].actual.as_str()), ("42", "41"));
}

#[test]
fn removing_the_replica_loses_design_ccfs() {
    let model = QIASP_MODEL
        .replace("division B replicates A\n", "")
        .replace("inputs: DISPLAY_IF_A, DISPLAY_IF_B", "inputs: DISPLAY_IF_A")
        .replace(", HJTC_SENSOR_B.dis, CET_SENSOR_B.dis", "")
        .replace("inputs: SDN_NODE_A, SDN_NODE_B", "inputs: SDN_NODE_A")
        .replace("members: A, B", "members: A, MCR");
    let golden = parse_golden(QIASP_GOLDEN).unwrap();
    let run = run_pipeline(&model, "single.resha", PipelineOptions::default()).unwrap();
    assert!(run.groups.iter().all(|g| g.ccf_type != resha_core::ccf::CcfType::Type4));
    let report = compare(&golden, &run);
    assert!(!report.passed());
    let type4 = report.diffs.iter().find(|d| d.field == "ccf.type_4").unwrap();
    assert_eq!((type4.expected.as_str(), type4.actual.as_str()), ("28", "0"));
}

#[test]
fn bundled_model_validates_cleanly() {
    let model = parse_model(QIASP_MODEL).unwrap();
    let report = validate_model(&model);
    assert!(report.is_empty(), "{:?}", report.messages().collect::<Vec<_>>());
}

#[test]
fn losses_and_hazards_are_verbatim() {
    let model = parse_model(QIASP_MODEL).unwrap();
    let losses: Vec<(&str, &str)> = model.losses.iter().map(|l| (l.id.as_str(), l.description.as_str())).collect();
    assert_eq!(
        losses,
        [
            ("L-1", "Damage to reactor or key reactor components"),
            ("L-2", "Damage to operational equipment"),
            ("L-3", "Damage to monitoring & control hardware"),
            ("L-4", "Loss of plant availability"),
            ("L-5", "Generic: loss of life, environmental contamination"),
        ]
    );
    let hazards: Vec<(&str, &str)> = model.hazards.iter().map(|h| (h.id.as_str(), h.description.as_str())).collect();
    assert_eq!(
        hazards,
        [
            ("H-1", "QIAS-P false positive indication"),
            ("H-2", "QIAS-P false negative indication"),
            ("H-3", "QIAS-P false positive alarm"),
            ("H-4", "QIAS-P false negative alarm"),
        ]
    );
}

#[test]
fn controller_failure_spreads_to_eight_modules_per_division() {
    let run = run_pipeline(QIASP_MODEL, "qiasp.resha", PipelineOptions::default()).unwrap();
    let g = run.groups.iter().find(|g| g.id == "T2-HJTC_CTRL_A-F").unwrap();
    assert_eq!(g.members.iter().filter(|m| m.ends_with("_A")).count(), 8);
    assert_eq!(g.members.len(), 16);
    assert!(!g.members.iter().any(|m| m.starts_with("CET")));

    // The CET calculator's dependents are exactly its own alarm and the ICC alarm.
    let cet = run.groups.iter().find(|g| g.id == "T2-CET_CALC_A-A").unwrap();
    assert_eq!(cet.members, ["CET_ALM_A", "ICC_ALM_A", "CET_ALM_B", "ICC_ALM_B"]);
    assert!(!run.groups.iter().any(|g| g.trigger.id == "ICC_CALC_A" && g.ccf_type == resha_core::ccf::CcfType::Type2));
}

#[test]
fn terminal_is_the_only_hardware_single_point() {
    let run = run_pipeline(QIASP_MODEL, "qiasp.resha", PipelineOptions::default()).unwrap();
    let first = resha_core::cutsets::first_order_cut_sets(&run.cutsets);
    assert_eq!(first.hardware, ["OIT/hw_stochastic"]);
    assert!(first.software.iter().all(|e| e.starts_with("ccf/")));
}

#[test]
fn hardware_design_toggle_adds_one_branch_per_component() {
    let options = PipelineOptions { include_hw_design: true, ..Default::default() };
    let run = run_pipeline(QIASP_MODEL, "qiasp.resha", options).unwrap();
    assert_eq!(run.census.hw_design_branches, 41);
    assert_eq!(run.census.hw_stochastic_events, 41);
}
