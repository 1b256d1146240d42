//! Design guidance and the human-readable summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ccf::{CcfGroup, CcfType, TriggerKind};
use crate::cutsets::{first_order_cut_sets, CutSetCollection};
use crate::model::{FailureModeType, StpaCategory, SystemModel};
use crate::pipeline::PipelineRun;
use crate::stpa::Flavor;

/// Design classes that share a diversity tag and are replicated across
/// redundant divisions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityFinding {
    pub diversity_tag: String,
    pub design_classes: Vec<String>,
    pub divisions: Vec<String>,
    /// Type-4 group ids explained by this finding.
    pub groups: Vec<String>,
}

/// A component (or internal resource) whose failure modes reach several
/// software-bearing components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingFinding {
    pub trigger: String,
    pub dependents: Vec<String>,
    pub dependent_count: usize,
    /// Type-2 group ids explained by this finding.
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseEntry {
    pub failure_type: FailureModeType,
    pub stpa_category: StpaCategory,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpofEntry {
    pub event: String,
    pub software: bool,
    pub narrative: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidanceReport {
    pub diversity_findings: Vec<DiversityFinding>,
    pub coupling_findings: Vec<CouplingFinding>,
    pub cause_map: Vec<CauseEntry>,
    pub spof_summary: Vec<SpofEntry>,
}

const PROGRAMMING_DEFECT: &str = "programming-stage defect: an output variable is unassigned after \
calculation, or a setpoint variable is under or over the ideal limit";
const BOUNDARY_DEFECT: &str = "inappropriate boundary conditions of the module, or an incorrect \
process model of the monitored variable";
const TIMING_DEFECT: &str = "timing defect: task scheduling, priority inversion or communication \
latency delays or reorders the output";

/// Likely software cause for each failure-mode type.
pub fn cause_for(ty: FailureModeType) -> &'static str {
    match ty {
        FailureModeType::A | FailureModeType::B => PROGRAMMING_DEFECT,
        FailureModeType::C | FailureModeType::D | FailureModeType::E => TIMING_DEFECT,
        FailureModeType::F | FailureModeType::G => BOUNDARY_DEFECT,
    }
}

pub fn generate_guidance(groups: &[CcfGroup], cutsets: &CutSetCollection, model: &SystemModel) -> GuidanceReport {
    let mut diversity: BTreeMap<String, DiversityFinding> = BTreeMap::new();
    let mut coupling: Vec<CouplingFinding> = Vec::new();
    for g in groups {
        match g.ccf_type {
            CcfType::Type4 => {
                let class = &g.trigger.id;
                let tag = model.design_class(class).map(|c| c.diversity_tag.clone()).unwrap_or_else(|| class.clone());
                let f = diversity.entry(tag.clone()).or_insert_with(|| DiversityFinding {
                    diversity_tag: tag,
                    design_classes: Vec::new(),
                    divisions: Vec::new(),
                    groups: Vec::new(),
                });
                if !f.design_classes.contains(class) {
                    f.design_classes.push(class.clone());
                }
                for p in model.components().filter(|p| &p.component.design_class == class) {
                    if !f.divisions.contains(&p.division.id) {
                        f.divisions.push(p.division.id.clone());
                    }
                }
                f.groups.push(g.id.clone());
            }
            CcfType::Type2 => match coupling.iter_mut().find(|c| c.trigger == g.trigger.id) {
                Some(c) => {
                    for m in &g.members {
                        if !c.dependents.contains(m) {
                            c.dependents.push(m.clone());
                        }
                    }
                    c.dependent_count = c.dependents.len();
                    c.groups.push(g.id.clone());
                }
                None => coupling.push(CouplingFinding {
                    trigger: g.trigger.id.clone(),
                    dependents: g.members.clone(),
                    dependent_count: g.members.len(),
                    groups: vec![g.id.clone()],
                }),
            },
            CcfType::Type1 | CcfType::Type3 => {}
        }
    }
    let mut diversity_findings: Vec<DiversityFinding> = diversity.into_values().collect();
    for f in &mut diversity_findings {
        f.divisions.sort();
    }

    let cause_map = FailureModeType::ALL
        .into_iter()
        .map(|ty| CauseEntry { failure_type: ty, stpa_category: ty.stpa_category(), cause: cause_for(ty).to_string() })
        .collect();

    let by_event: BTreeMap<String, &CcfGroup> = groups.iter().map(|g| (g.event_id(), g)).collect();
    let first = first_order_cut_sets(cutsets);
    let spof_summary = first
        .software
        .iter()
        .map(|e| (e, true))
        .chain(first.hardware.iter().map(|e| (e, false)))
        .map(|(event, software)| SpofEntry {
            event: event.clone(),
            software,
            narrative: match by_event.get(event) {
                Some(g) => spof_narrative(g),
                None if software => format!("{event}: software failure mode defeats every division on its own"),
                None => format!("{event}: hardware failure with no redundant counterpart"),
            },
        })
        .collect();

    GuidanceReport { diversity_findings, coupling_findings: coupling, cause_map, spof_summary }
}

fn spof_narrative(g: &CcfGroup) -> String {
    let what = match g.trigger.kind {
        TriggerKind::DesignClass => format!("shared design {}", g.trigger.id),
        TriggerKind::Component => format!("upstream component {}", g.trigger.id),
        TriggerKind::SharedResource => format!("shared resource {}", g.trigger.id),
        TriggerKind::Controller => format!("controller {}", g.trigger.id),
    };
    match g.failure_type {
        Some(ty) => format!(
            "{}: {} CCF from {what}, type {ty} ({}), {} affected locations",
            g.event_id(),
            g.ccf_type,
            ty.description(),
            g.members.len()
        ),
        None => format!("{}: {} CCF from {what}, {} affected locations", g.event_id(), g.ccf_type, g.members.len()),
    }
}

pub fn guidance_json(g: &GuidanceReport) -> String {
    let mut s = serde_json::to_string_pretty(g).unwrap_or_default();
    s.push('\n');
    s
}

/// Counts shown in both summary formats, derived from the run's artifacts.
struct Counts {
    lines: Vec<(String, Vec<String>)>,
}

fn counts(run: &PipelineRun) -> Counts {
    let census = &run.census;
    let uca = run.instances.iter().filter(|i| i.flavor == Flavor::Uca).count();
    let uif = run.instances.len() - uca;
    let resolved = run
        .integrated_ft
        .nodes()
        .filter(|(_, n)| n.role() == Some(crate::ftree::GateRole::Software) && !n.is_unresolved())
        .count();
    let by_type = crate::ccf::count_by_type(&run.groups);
    let n = |t| by_type.get(&t).copied().unwrap_or(0);
    let first = first_order_cut_sets(&run.cutsets);
    let orders: Vec<String> = run.cutsets.order_index.iter().map(|(k, v)| format!("order {k}: {v}")).collect();

    let mut lines = vec![
        (
            "Model".to_string(),
            vec![
                format!("Components: {}", run.model.components().count()),
                format!("Divisions: {}", run.model.divisions.len()),
                format!("Losses: {}", run.model.losses.len()),
                format!("Hazards: {}", run.model.hazards.len()),
            ],
        ),
        (
            "Hardware fault tree".to_string(),
            vec![
                format!("Hardware stochastic events: {}", census.hw_stochastic_events),
                format!("Dependency branches: {}", census.dependency_branches),
                format!("Software design branches: {}", census.sw_design_branches),
                format!("Hardware design branches: {}", census.hw_design_branches),
            ],
        ),
        (
            "STPA".to_string(),
            vec![
                format!("Control structure nodes: {}", run.control_structure.nodes.len()),
                format!("Candidates: {}", run.candidates.len()),
                format!("Applicable UCAs: {uca}"),
                format!("Applicable UIFs: {uif}"),
            ],
        ),
        (
            "Software integration".to_string(),
            vec![
                format!("Failure-mode events: {}", run.instances.len()),
                format!("Resolved software branches: {resolved}"),
            ],
        ),
        (
            "Common cause failures".to_string(),
            vec![
                format!("Type 4 sCCF: {}", n(CcfType::Type4)),
                format!("Type 3 sCCF: {}", n(CcfType::Type3)),
                format!("Type 2 sCCF: {}", n(CcfType::Type2)),
                format!("Type 1 sCCF: {}", n(CcfType::Type1)),
            ],
        ),
        (
            "Minimal cut sets".to_string(),
            vec![
                format!(
                    "Minimal cut sets: {}{}",
                    run.cutsets.sets.len(),
                    if orders.is_empty() { String::new() } else { format!(" ({})", orders.join(", ")) }
                ),
                format!("First-order software cut sets: {}", first.software.len()),
                format!("First-order hardware cut sets: {}", first.hardware.len()),
            ],
        ),
        (
            "Guidance".to_string(),
            vec![
                format!("Diversity findings: {}", run.guidance.diversity_findings.len()),
                format!("Coupling findings: {}", run.guidance.coupling_findings.len()),
            ],
        ),
    ];
    if let Some(k) = run.cutsets.truncation_order {
        lines[5].1.push(format!("Truncated at order: {k}"));
    }
    Counts { lines }
}

pub fn render_summary_text(run: &PipelineRun) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "RESHA summary: {}", run.model.name);
    let _ = writeln!(out, "Top event: {}", run.model.top_event);
    for (i, (title, lines)) in counts(run).lines.into_iter().enumerate() {
        let _ = writeln!(out, "\n[{}] {title}", i + 1);
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
    }
    render_guidance_text(&mut out, &run.guidance, "\n", "", "  ");
    out
}

pub fn render_summary_md(run: &PipelineRun) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# RESHA summary: {}\n", run.model.name);
    let _ = writeln!(out, "Top event: {}", run.model.top_event);
    for (i, (title, lines)) in counts(run).lines.into_iter().enumerate() {
        let _ = writeln!(out, "\n## {}. {title}\n", i + 1);
        for l in lines {
            let _ = writeln!(out, "- {l}");
        }
    }
    render_guidance_text(&mut out, &run.guidance, "\n## ", "- ", "  - ");
    out
}

fn render_guidance_text(out: &mut String, g: &GuidanceReport, heading: &str, item: &str, sub: &str) {
    let _ = writeln!(out, "{heading}Diversity findings\n");
    if g.diversity_findings.is_empty() {
        let _ = writeln!(out, "{item}none");
    }
    for f in &g.diversity_findings {
        let _ = writeln!(
            out,
            "{item}Design classes tagged `{}` are reused across divisions {}; {} Type 4 groups follow from the missing diversity.",
            f.diversity_tag,
            f.divisions.join(", "),
            f.groups.len()
        );
        let _ = writeln!(out, "{sub}classes: {}", f.design_classes.join(", "));
    }
    let _ = writeln!(out, "{heading}Coupling findings\n");
    if g.coupling_findings.is_empty() {
        let _ = writeln!(out, "{item}none");
    }
    for f in &g.coupling_findings {
        let _ = writeln!(
            out,
            "{item}{} feeds {} software-bearing components ({} Type 2 groups).",
            f.trigger,
            f.dependent_count,
            f.groups.len()
        );
        let _ = writeln!(out, "{sub}dependents: {}", f.dependents.join(", "));
    }
    let _ = writeln!(out, "{heading}Likely causes by failure-mode type\n");
    for c in &g.cause_map {
        let _ = writeln!(out, "{item}{} ({}): {}", c.failure_type, c.failure_type.description(), c.cause);
    }
    let _ = writeln!(out, "{heading}Single points of failure\n");
    if g.spof_summary.is_empty() {
        let _ = writeln!(out, "{item}none");
    }
    for s in &g.spof_summary {
        let _ = writeln!(out, "{item}{}", s.narrative);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    #[test]
    fn zero_groups_still_emit_cause_map() {
        let m = parse_model("system \"X\"\n").unwrap();
        let g = generate_guidance(&[], &CutSetCollection::default(), &m);
        assert!(g.diversity_findings.is_empty());
        assert!(g.coupling_findings.is_empty());
        assert!(g.spof_summary.is_empty());
        assert_eq!(g.cause_map.len(), 7);
        assert!(g.cause_map[0].cause.contains("unassigned after calculation"));
        assert!(g.cause_map[5].cause.contains("inappropriate boundary conditions"));
    }

    #[test]
    fn cause_table_groups_types() {
        assert_eq!(cause_for(FailureModeType::A), cause_for(FailureModeType::B));
        assert_eq!(cause_for(FailureModeType::F), cause_for(FailureModeType::G));
        assert_eq!(cause_for(FailureModeType::C), cause_for(FailureModeType::E));
        assert_ne!(cause_for(FailureModeType::A), cause_for(FailureModeType::F));
    }
}
