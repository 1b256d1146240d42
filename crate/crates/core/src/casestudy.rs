//! The bundled QIAS-P reference model and its expected results.
//!
//! `verify_golden` runs the full pipeline and reports every field that
//! differs from the golden record.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ccf::{CcfType, TriggerKind};
use crate::cutsets::first_order_cut_sets;
use crate::model::ComponentKind;
use crate::pipeline::{run_pipeline, PipelineError, PipelineOptions, PipelineRun};
use crate::stpa::Flavor;

pub const QIASP_MODEL: &str = include_str!("../examples/qiasp.resha");
pub const QIASP_GOLDEN: &str = include_str!("../examples/qiasp.golden.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenCensus {
    pub hw_stochastic_events: usize,
    pub dependency_branches: usize,
    pub sw_design_branches: usize,
    pub hw_design_branches: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenInstances {
    pub uca: usize,
    pub calculator_uif: usize,
    pub alarm_uif: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenCcf {
    pub type_1: usize,
    pub type_2: usize,
    pub type_3: usize,
    pub type_4: usize,
}

/// A first-order software cut set expected from a shared design class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub description: String,
    pub trigger: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub schema: String,
    pub model: String,
    /// Divisions the per-division expectations apply to.
    pub divisions: Vec<String>,
    pub census: GoldenCensus,
    pub candidates_per_division: usize,
    pub instances_per_division: GoldenInstances,
    pub ccf: GoldenCcf,
    pub first_order_software_cut_sets: usize,
    pub first_order_entries: Vec<GoldenEntry>,
    /// Where each expected value comes from, keyed by field name.
    pub sources: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDiff {
    pub field: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for FieldDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, got {}", self.field, self.expected, self.actual)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldenReport {
    pub checked: usize,
    pub diffs: Vec<FieldDiff>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty()
    }

    fn check<T: PartialEq + fmt::Display>(&mut self, field: impl Into<String>, expected: T, actual: T) {
        self.checked += 1;
        if expected != actual {
            self.diffs.push(FieldDiff {
                field: field.into(),
                expected: expected.to_string(),
                actual: actual.to_string(),
            });
        }
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "golden: PASS ({} fields)", self.checked);
        }
        write!(f, "golden: FAIL ({} of {} fields differ)", self.diffs.len(), self.checked)?;
        for d in &self.diffs {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error("golden file: {0}")]
    Golden(#[from] serde_json::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

pub fn parse_golden(text: &str) -> Result<GoldenRecord, serde_json::Error> {
    serde_json::from_str(text)
}

/// Runs the pipeline on `model_text` and compares it with the golden record.
pub fn verify_golden(model_text: &str, golden_text: &str) -> Result<GoldenReport, GoldenError> {
    let golden = parse_golden(golden_text)?;
    let run = run_pipeline(model_text, "<model>", PipelineOptions::default())?;
    Ok(compare(&golden, &run))
}

/// Field-by-field comparison of a finished run against a golden record.
pub fn compare(golden: &GoldenRecord, run: &PipelineRun) -> GoldenReport {
    let mut r = GoldenReport::default();
    r.check("model", golden.model.as_str(), run.model.name.as_str());

    let c = &run.census;
    r.check("census.hw_stochastic_events", golden.census.hw_stochastic_events, c.hw_stochastic_events);
    r.check("census.dependency_branches", golden.census.dependency_branches, c.dependency_branches);
    r.check("census.sw_design_branches", golden.census.sw_design_branches, c.sw_design_branches);
    r.check("census.hw_design_branches", golden.census.hw_design_branches, c.hw_design_branches);

    let kind_of = |owner: &str| run.model.component(owner).map(|p| p.component.kind);
    for d in &golden.divisions {
        let candidates = run.candidates.iter().filter(|i| &i.division == d).count();
        r.check(format!("candidates_per_division.{d}"), golden.candidates_per_division, candidates);
        let here: Vec<_> = run.instances.iter().filter(|i| &i.division == d).collect();
        let count = |flavor: Flavor, kind: Option<ComponentKind>| {
            here.iter().filter(|i| i.flavor == flavor && kind.is_none_or(|k| kind_of(&i.owner) == Some(k))).count()
        };
        let g = &golden.instances_per_division;
        r.check(format!("instances_per_division.{d}.uca"), g.uca, count(Flavor::Uca, None));
        r.check(
            format!("instances_per_division.{d}.calculator_uif"),
            g.calculator_uif,
            count(Flavor::Uif, Some(ComponentKind::Calculator)),
        );
        r.check(
            format!("instances_per_division.{d}.alarm_uif"),
            g.alarm_uif,
            count(Flavor::Uif, Some(ComponentKind::Alarm)),
        );
    }

    let by_type = crate::ccf::count_by_type(&run.groups);
    let n = |t| by_type.get(&t).copied().unwrap_or(0);
    r.check("ccf.type_1", golden.ccf.type_1, n(CcfType::Type1));
    r.check("ccf.type_2", golden.ccf.type_2, n(CcfType::Type2));
    r.check("ccf.type_3", golden.ccf.type_3, n(CcfType::Type3));
    r.check("ccf.type_4", golden.ccf.type_4, n(CcfType::Type4));

    let first = first_order_cut_sets(&run.cutsets);
    r.check("first_order_software_cut_sets", golden.first_order_software_cut_sets, first.software.len());
    for (i, entry) in golden.first_order_entries.iter().enumerate() {
        let found = run.groups.iter().any(|g| {
            g.ccf_type == CcfType::Type4
                && g.trigger.kind == TriggerKind::DesignClass
                && g.trigger.id == entry.trigger
                && first.software.contains(&g.event_id())
        });
        r.check(
            format!("first_order_entries[{i}] ({})", entry.trigger),
            "present",
            if found { "present" } else { "absent" },
        );
    }
    r
}
